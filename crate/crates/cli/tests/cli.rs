use std::process::{Command, Output};

fn moyal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moyal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn curvature_csv_is_deterministic() {
    let args = ["curvature", "--dim", "2", "--A", "1", "--theta", "0.1", "--samples", "101"];
    let a = moyal(&args);
    let b = moyal(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.starts_with("# command: curvature\n"));
    assert!(text.contains("\nr,eta,exact_coeff_at_nearest_level\n"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 101);
    assert!((rows[100][1] - 1.0).abs() < 1e-2);
}

#[test]
fn four_dimensional_single_sample() {
    let o = moyal(&["curvature", "--dim", "4", "--samples", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn gauss_bonnet_exit_codes() {
    let o = moyal(&["gauss-bonnet", "--A", "2", "--theta", "0.3", "--trunc", "10000"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# pass: true"));
    assert_eq!(moyal(&["gauss-bonnet", "--trunc", "0"]).status.code(), Some(0));
    assert_eq!(moyal(&["gauss-bonnet", "--A", "1", "--theta", "0.7"]).status.code(), Some(2));
}

#[test]
fn area_to_file_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("area.csv");
    let o = moyal(&["area", "--M", "1", "--lambda", "1", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rows = data_rows(&std::fs::read_to_string(&path).unwrap());
    assert!((rows[0][1] - 0.8224670334).abs() < 1e-10);

    let o = moyal(&["area", "--M", "1,2", "--lambda", "1,10", "--format", "json"]);
    let json = stdout(&o);
    assert!(json.contains("\"gamma_2\""));
    assert!(json.contains("\"meta\""));
}

#[test]
fn epsilon_flat_limit() {
    let o = moyal(&["epsilon", "--theta", "0", "--samples", "11"]);
    assert_eq!(o.status.code(), Some(0));
    for row in data_rows(&stdout(&o)) {
        assert_eq!(&row[1..5], &[1.0; 4]);
        assert!(row[5..].iter().all(|&r| r <= 1e-8));
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(moyal(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(moyal(&["curvature", "--dim", "3"]).status.code(), Some(2));
    assert_eq!(moyal(&["curvature", "--r-min", "2", "--r-max", "1"]).status.code(), Some(2));
    assert_eq!(moyal(&["epsilon", "--A", "0.1"]).status.code(), Some(2));
}

#[test]
fn verify_algebra_passes() {
    let o = moyal(&["verify", "algebra"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
