//! Command-line front end: one subcommand per analysis, scenario-file
//! support, and the acceptance `verify` run.
//!
//! Exit codes: 0 success, 1 validation error, 2 numerical failure,
//! 3 acceptance failure.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use thermoelastic::dynamics::Scheme;
use thermoelastic::runner::{run, RunError};
use thermoelastic::scenario::{parse_scenario, Scenario, Task};

#[derive(Parser)]
#[command(
    name = "thermoelastic",
    about = "Modal approximation laboratory for coupled wave-heat systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; unset flags keep the scenario-file or
/// documented default values.
#[derive(Args, Clone, Default)]
struct Common {
    /// Scenario JSON file providing base parameters (flags override it).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Coupling kind: strong | weak.
    #[arg(long)]
    model: Option<String>,
    /// Boundary case: DD | DN | ND | NN.
    #[arg(long)]
    bc: Option<String>,
    /// Number of modes per field (1..=512).
    #[arg(long)]
    n: Option<usize>,
    /// Coupling constant gamma (0, 10].
    #[arg(long)]
    gamma: Option<f64>,
    /// Final time (0, 1e4].
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Time step (0, 1].
    #[arg(long)]
    dt: Option<f64>,
    /// Resolvent scaling exponent |s|^-alpha.
    #[arg(long)]
    alpha: Option<f64>,
    /// Output directory (THERMO_OUT_DIR overrides).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed for sampled checks (echoed in reports).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, branch labels, and axis distance of one generator.
    Spectrum(Common),
    /// Resolvent-norm scan along the imaginary axis.
    Resolvent {
        #[command(flatten)]
        common: Common,
        /// Lowest sampled frequency.
        #[arg(long, name = "s-min")]
        s_min: Option<f64>,
        /// Highest sampled frequency.
        #[arg(long, name = "s-max")]
        s_max: Option<f64>,
    },
    /// Spectrum-to-axis distance across mode counts.
    Abscissa {
        #[command(flatten)]
        common: Common,
        /// Comma-separated mode counts, e.g. 8,16,24,32.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Characteristic roots of the unbounded-domain problem near i k.
    Roots {
        #[command(flatten)]
        common: Common,
        #[arg(long, name = "k-lo")]
        k_lo: Option<u32>,
        #[arg(long, name = "k-hi")]
        k_hi: Option<u32>,
    },
    /// Time-domain energy decay for one initial datum.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Integrator: trapezoidal_implicit | eigen_expansion.
        #[arg(long)]
        scheme: Option<String>,
    },
    /// Initial-data sweeps (smoothness by default, --disc for the
    /// discontinuous comparison).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated sine frequencies for the smoothness sweep.
        #[arg(long, value_delimiter = ',')]
        js: Option<Vec<u32>>,
        /// Compare a discontinuous velocity datum against sin x instead.
        #[arg(long)]
        disc: bool,
    },
    /// Run the full acceptance suite; exits 3 on any failed criterion.
    Verify(Common),
}

fn base_scenario(common: &Common, task: Task) -> Result<Scenario, RunError> {
    let mut s = match &common.scenario {
        Some(path) => parse_scenario(path)?,
        None => Scenario::with_task(task),
    };
    s.task = task;
    if let Some(v) = &common.model {
        s.model = v.clone();
    }
    if let Some(v) = &common.bc {
        s.bc = v.clone();
    }
    if let Some(v) = common.n {
        s.n = v;
    }
    if let Some(v) = common.gamma {
        s.gamma = v;
    }
    if let Some(v) = common.t_final {
        s.t_final = v;
    }
    if let Some(v) = common.dt {
        s.dt = v;
    }
    if let Some(v) = common.alpha {
        s.alpha = v;
    }
    if let Some(v) = &common.out {
        s.out = Some(v.clone());
    }
    if let Some(v) = common.seed {
        s.seed = v;
    }
    Ok(s)
}

fn build_scenario(cli: &Command) -> Result<Scenario, RunError> {
    Ok(match cli {
        Command::Spectrum(common) => base_scenario(common, Task::Spectrum)?,
        Command::Resolvent {
            common,
            s_min,
            s_max,
        } => {
            let mut s = base_scenario(common, Task::Resolvent)?;
            if let Some(v) = s_min {
                s.s_min = *v;
            }
            if let Some(v) = s_max {
                s.s_max = *v;
            }
            s
        }
        Command::Abscissa { common, ns } => {
            let mut s = base_scenario(common, Task::AbscissaTable)?;
            if let Some(v) = ns {
                s.ns = v.clone();
            }
            s
        }
        Command::Roots { common, k_lo, k_hi } => {
            let mut s = base_scenario(common, Task::ContinuousRoots)?;
            if let Some(v) = k_lo {
                s.k_lo = *v;
            }
            if let Some(v) = k_hi {
                s.k_hi = *v;
            }
            s
        }
        Command::Simulate { common, scheme } => {
            let mut s = base_scenario(common, Task::Simulate)?;
            if let Some(v) = scheme {
                s.scheme = match v.as_str() {
                    "trapezoidal_implicit" => Scheme::TrapezoidalImplicit,
                    "eigen_expansion" => Scheme::EigenExpansion,
                    other => {
                        return Err(RunError::Validation(format!("unknown scheme {other:?}")))
                    }
                };
            }
            s
        }
        Command::Sweep { common, js, disc } => {
            let task = if *disc {
                Task::DiscontinuitySweep
            } else {
                Task::SmoothnessSweep
            };
            let mut s = base_scenario(common, task)?;
            s.task = task;
            if let Some(v) = js {
                s.js = v.clone();
            }
            s
        }
        Command::Verify(common) => base_scenario(common, Task::Verify)?,
    })
}

fn main() {
    let cli = Cli::parse();
    let scenario = match build_scenario(&cli.command) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    };
    match run(&scenario) {
        Ok(report) => {
            print!("{}", report.to_text());
            if scenario.task == Task::Verify {
                let failed = report.summary["failed"].as_u64().unwrap_or(0);
                if let Some(lines) = report.summary["lines"].as_array() {
                    for l in lines {
                        println!("{}", l.as_str().unwrap_or_default());
                    }
                }
                if failed > 0 {
                    eprintln!("acceptance: {failed} criterion(s) failed");
                    std::process::exit(3);
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
