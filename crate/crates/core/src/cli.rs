//! Subcommand dispatch for the `ompmmv` binary.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 domain or numerical
//! error, 3 guarantee violation reported by an experiment.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::guarantees::{check_guarantee, fmt_g, GuaranteeMode};
use crate::harness::run_experiment;
use crate::io::{format_f64, read_config, read_matrix, write_matrix, write_text};
use crate::model::{min_support_row_norm, MeasurementSet, SensingMatrix, SignalMatrix};
use crate::perturb::{apply_perturbation, calibrate_perturbation, PerturbationSpec};
use crate::rip::{ric_exact, ExtremeSide, PerturbationLevels, DEFAULT_SUBSET_BUDGET};
use crate::solver::{somp_solve, IterationTrace, SolverOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ompmmv",
    version,
    about = "Joint sparse recovery from multiple measurement vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover a jointly sparse signal matrix from Y = ΦX.
    Solve {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        sparsity: usize,
        /// Write the recovered signal matrix here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the per-iteration trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact restricted isometry constant by subset enumeration.
    Ric {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// Evaluate the recovery guarantee for given perturbation levels.
    Check {
        #[arg(long)]
        phi: PathBuf,
        /// Required in every mode except noiseless.
        #[arg(long)]
        y: Option<PathBuf>,
        /// Signal matrix; t0 is its smallest nonzero row norm.
        #[arg(long, conflicts_with = "t0")]
        x: Option<PathBuf>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        sparsity: usize,
        #[arg(long, default_value_t = 0.0)]
        eps0: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0.0)]
        epsb: f64,
        #[arg(long, default_value = "general")]
        mode: String,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// Run a Monte Carlo experiment described by a TOML file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Append per-trial wall time to the table (breaks byte-identical reruns).
        #[arg(long)]
        timings: bool,
    },
    /// Draw calibrated perturbations and write Φ̃, Ỹ, E and B.
    Perturb {
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        eps0: f64,
        #[arg(long)]
        epsb: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_prefix: PathBuf,
        /// Measure the submatrix level ε over orders 1..=K.
        #[arg(long)]
        sparsity: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
}

/// What a subcommand produced: text for stdout and an exit code.
struct Outcome {
    stdout: String,
    code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            code: EXIT_OK,
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Io { .. } | Error::InvalidConfig(_) => EXIT_USAGE,
        Error::Trial { source, .. } => exit_code_for(source),
        _ => EXIT_DOMAIN,
    }
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn load<T>(path: &Path, wrap: fn(DMatrix<f64>) -> Result<T>) -> Result<T> {
    wrap(read_matrix(path)?)
}

fn trace_table(trace: &IterationTrace) -> String {
    let mut s = String::from("iteration,selected,score,residual_norm,rank_deficient\n");
    let _ = writeln!(s, "0,,,{},", format_f64(trace.initial_residual_norm));
    for r in &trace.iterations {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.iteration,
            r.selected,
            format_f64(r.scores[r.selected]),
            format_f64(r.residual_norm),
            r.rank_deficient
        );
    }
    s
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Solve {
            phi,
            y,
            sparsity,
            out,
            trace,
        } => {
            let phi = load(&phi, SensingMatrix::new)?;
            let y = load(&y, MeasurementSet::new)?;
            let res = somp_solve(&y, &phi, sparsity, &SolverOptions::default())?;
            if let Some(p) = out {
                write_matrix(res.signal.as_matrix(), p)?;
            }
            if let Some(p) = trace {
                write_text(&trace_table(&res.trace), p)?;
            }
            let mut s = format!("support: {}\n", res.support);
            let _ = writeln!(
                s,
                "residual_norm: {}",
                format_f64(
                    res.trace
                        .iterations
                        .last()
                        .map_or(res.trace.initial_residual_norm, |r| r.residual_norm)
                )
            );
            if let Some(stop) = res.terminated_early {
                let _ = writeln!(s, "terminated_early: {stop:?}");
            }
            Ok(Outcome::ok(s))
        }
        Command::Ric {
            matrix,
            order,
            budget,
        } => {
            let a = load(&matrix, SensingMatrix::new)?;
            let est = ric_exact(&a, order, budget)?;
            let side = match est.side {
                ExtremeSide::Upper => "upper",
                ExtremeSide::Lower => "lower",
            };
            let witness: Vec<String> = est.witness_subset.iter().map(|i| i.to_string()).collect();
            Ok(Outcome::ok(format!(
                "order: {}\ndelta: {}\nwitness: {}\nside: {}\nsubsets: {}\n",
                est.order,
                format_f64(est.delta),
                witness.join(","),
                side,
                est.subsets_examined
            )))
        }
        Command::Check {
            phi,
            y,
            x,
            t0,
            sparsity,
            eps0,
            eps,
            epsb,
            mode,
            budget,
        } => {
            let mode: GuaranteeMode = mode.parse()?;
            let phi = load(&phi, SensingMatrix::new)?;
            let y = match y {
                Some(p) => load(&p, MeasurementSet::new)?,
                None if mode == GuaranteeMode::Noiseless => {
                    // ‖Y‖_F never enters the noiseless condition
                    MeasurementSet::new(DMatrix::zeros(phi.nrows(), 1))?
                }
                None => {
                    return Err(Error::InvalidConfig(format!(
                        "--y is required in {mode} mode"
                    )))
                }
            };
            let t0 = match (x, t0) {
                (Some(p), _) => Some(min_support_row_norm(&load(&p, SignalMatrix::new)?)?.t0),
                (None, t) => t,
            };
            if t0.is_none() && mode != GuaranteeMode::Noiseless {
                return Err(Error::InvalidConfig(format!(
                    "--x or --t0 is required in {mode} mode"
                )));
            }
            let delta = ric_exact(&phi, sparsity + 1, budget)?;
            let report = check_guarantee(
                &phi,
                &y,
                t0,
                sparsity,
                PerturbationLevels { eps0, eps, epsb },
                &delta,
                mode,
            )?;
            let mut s = format!("verdict: {}\n", report.verdict());
            let _ = writeln!(s, "mode: {}", report.mode);
            let _ = writeln!(s, "delta_k+1: {}", fmt_g(report.delta_kplus1.delta));
            let _ = writeln!(s, "eps_h: {}", fmt_g(report.eps_h));
            match report.threshold.value() {
                Some(t) => {
                    let _ = writeln!(s, "threshold: {}", fmt_g(t));
                }
                None => {
                    let _ = writeln!(s, "threshold: unsatisfiable");
                }
            }
            if let Some(b) = &report.predicted_error_bound {
                let _ = writeln!(s, "error_bound: {}", fmt_g(b.value));
                if let Some(p) = b.printed_form {
                    let _ = writeln!(s, "error_bound_printed_form: {}", fmt_g(p));
                }
            }
            if let Some(n) = &report.note {
                let _ = writeln!(s, "note: {n}");
            }
            Ok(Outcome::ok(s))
        }
        Command::Experiment {
            config,
            out,
            timings,
        } => {
            let cfg = read_config(&config)?;
            let report = run_experiment(&cfg)?;
            write_text(&report.to_table(timings), &out)?;
            let violations = report.total_violations();
            let s = format!(
                "trials: {}\nguarantee_passes: {}\nviolations: {}\nreport: {}\n",
                report.total_trials(),
                report.guarantee_passes(),
                violations,
                out.display()
            );
            if violations > 0 {
                eprintln!("RED ALERT: {violations} trial(s) met the guarantee condition but missed its conclusion");
                return Ok(Outcome {
                    stdout: s,
                    code: EXIT_VIOLATION,
                });
            }
            Ok(Outcome::ok(s))
        }
        Command::Perturb {
            phi,
            y,
            eps0,
            epsb,
            seed,
            out_prefix,
            sparsity,
            budget,
        } => {
            let phi = load(&phi, SensingMatrix::new)?;
            let y = load(&y, MeasurementSet::new)?;
            let spec = PerturbationSpec::gaussian(eps0, epsb, seed);
            let p = calibrate_perturbation(&phi, &y, &spec, sparsity.unwrap_or(0), budget)?;
            let (yt, pt) = apply_perturbation(&y, &phi, &p)?;
            let path = |suffix: &str| {
                let mut s = out_prefix.clone().into_os_string();
                s.push(suffix);
                PathBuf::from(s)
            };
            write_matrix(pt.as_matrix(), path("phi.csv"))?;
            write_matrix(yt.as_matrix(), path("y.csv"))?;
            write_matrix(&p.e, path("e.csv"))?;
            write_matrix(&p.b, path("b.csv"))?;
            let eps = match sparsity {
                Some(_) => format_f64(p.realized.eps),
                None => "not measured (pass --sparsity)".into(),
            };
            Ok(Outcome::ok(format!(
                "eps0: {}\neps: {}\nepsb: {}\n",
                format_f64(p.realized.eps0),
                eps,
                format_f64(p.realized.epsb)
            )))
        }
    }
}
