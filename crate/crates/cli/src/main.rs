#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use moyal_core::curvature::Dimension;
use moyal_core::figures::{cmd_area, cmd_curvature, cmd_epsilon, cmd_gauss_bonnet, linspace, logspace};
use moyal_core::table::CurveTable;
use moyal_core::verify::{run_suite, Suite};
use moyal_core::SphereParams;

#[derive(Parser)]
#[command(name = "moyal", version, about = "Curvature, area and Gauss-Bonnet tables for Moyal spheres")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Curvature profile (eta in 2D, Lambda in 4D) against the exact level coefficients
    Curvature {
        #[arg(long, value_enum, default_value_t = Dim::Two)]
        dim: Dim,
        #[command(flatten)]
        sphere: SphereArgs,
        #[command(flatten)]
        grid: RadiusGrid,
        #[command(flatten)]
        out: Output,
    },
    /// Partial sums of the total curvature of the 2D sphere
    GaussBonnet {
        #[command(flatten)]
        sphere: SphereArgs,
        /// Number of summed levels
        #[arg(long, default_value_t = 1_000_000)]
        trunc: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Area reduction factor gamma_M(lambda)
    Area {
        #[arg(long = "M", value_delimiter = ',', default_values_t = [1, 2, 4, 6])]
        m: Vec<u32>,
        /// Explicit lambda values; defaults to a log grid on [1e-2, 1e3]
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 61)]
        samples: usize,
        #[arg(long, default_value_t = 1e-13)]
        tol: f64,
        #[command(flatten)]
        out: Output,
    },
    /// Ratio h^-2 / h0^-2 for the constant-curvature 4D factor
    Epsilon {
        #[arg(long = "A", value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0, 5.0])]
        a: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        #[command(flatten)]
        grid: RadiusGrid,
        #[command(flatten)]
        out: Output,
    },
    /// Run the built-in checks
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct SphereArgs {
    #[arg(long = "A", default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long)]
    allow_out_of_window: bool,
}

impl SphereArgs {
    fn params(&self, half_dim: u32) -> moyal_core::Result<SphereParams> {
        let p = SphereParams {
            a: self.a,
            theta: self.theta,
            mu: self.mu,
            half_dim,
            allow_out_of_window: self.allow_out_of_window,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct RadiusGrid {
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = 5.0)]
    r_max: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dim {
    #[value(name = "2")]
    Two,
    #[value(name = "4")]
    Four,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn sink(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
            )),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn emit(&self, table: &CurveTable) -> Result<()> {
        let mut w = self.sink()?;
        match self.format {
            Format::Csv => table.write_csv(&mut w)?,
            Format::Json => writeln!(w, "{}", table.to_json()?)?,
        }
        w.flush()?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Curvature { dim, sphere, grid, out } => {
            let (d, half) = match dim {
                Dim::Two => (Dimension::Two, 1),
                Dim::Four => (Dimension::Four, 2),
            };
            let t = cmd_curvature(d, &sphere.params(half)?, grid.r_min, grid.r_max, grid.samples)?;
            out.emit(&t)?;
        }
        Cmd::GaussBonnet { sphere, trunc, out } => {
            let rep = cmd_gauss_bonnet(&sphere.params(1)?, trunc)?;
            out.emit(&rep.table)?;
            if !rep.pass {
                eprintln!(
                    "deviation {:e} exceeds tail bound {:e}",
                    rep.deviation, rep.tail_bound
                );
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Area {
            m,
            lambda,
            samples,
            tol,
            out,
        } => {
            let grid = if lambda.is_empty() { logspace(1e-2, 1e3, samples) } else { lambda };
            out.emit(&cmd_area(&m, &grid, tol)?)?;
        }
        Cmd::Epsilon { a, theta, grid, out } => {
            if grid.samples == 0 || !(grid.r_max >= grid.r_min) {
                return Err(moyal_core::Error::InvalidParameter("bad radius grid".into()).into());
            }
            let radii = linspace(grid.r_min, grid.r_max, grid.samples);
            out.emit(&cmd_epsilon(&a, theta, &radii)?)?;
        }
        Cmd::Verify { suite, out } => {
            let suite: Suite = suite.parse()?;
            let checks = run_suite(suite)?;
            let mut w = out.sink()?;
            match out.format {
                Format::Csv => {
                    for c in &checks {
                        writeln!(w, "{c}")?;
                    }
                }
                Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&checks)?)?,
            }
            w.flush()?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", checks.len());
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<moyal_core::Error>()
                .is_some_and(|c| c.is_validation());
            ExitCode::from(if usage { 2 } else { 1 })
        }
    }
}
