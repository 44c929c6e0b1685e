//! A small seeded sweep over measurement-noise levels. Pass an output path
//! to also write the full per-trial table.

use ompmmv::guarantees::GuaranteeMode;
use ompmmv::harness::{run_experiment, Checks, ExperimentConfig, SweepPoint};
use ompmmv::perturb::{InstanceConfig, MatrixEnsemble, MeasurementNoise};

fn main() -> ompmmv::Result<()> {
    let cfg = ExperimentConfig {
        instance: InstanceConfig {
            m: 24,
            n: 28,
            l: 3,
            k: 2,
            signal_row_norm_min: 1.0,
            ensemble: MatrixEnsemble::LowCoherenceFrame { iterations: 200 },
            seed: 0,
        },
        sweep: [0.0, 0.005, 0.01, 0.02, 0.05]
            .iter()
            .map(|&epsb| SweepPoint { eps0: 0.0, epsb })
            .collect(),
        measurement_noise: MeasurementNoise::Gaussian,
        trials: 50,
        master_seed: 1,
        checks: Checks {
            mode: GuaranteeMode::MeasurementOnly,
            ..Checks::default()
        },
    };
    let report = run_experiment(&cfg)?;
    println!(
        "{:>6} {:>8} {:>11} {:>11} {:>7} {:>10}",
        "epsb", "support", "mean err", "max err", "passes", "violations"
    );
    for p in &report.points {
        println!(
            "{:>6} {:>8.3} {:>11.3e} {:>11.3e} {:>7} {:>10}",
            p.point.epsb,
            p.support_recovery_rate,
            p.mean_relative_error,
            p.max_relative_error,
            p.guarantee_passes,
            p.violations
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        ompmmv::io::write_text(&report.to_table(false), &path)?;
        println!("table written to {path}");
    }
    Ok(())
}
