//! Evaluate the recovery condition and the predicted error bound for a
//! fixed instance across the four noise modes.

use ompmmv::guarantees::{check_guarantee, f_func, noiseless_threshold, q_func, GuaranteeMode};
use ompmmv::model::min_support_row_norm;
use ompmmv::perturb::{gen_sensing_matrix, gen_sparse_signal, InstanceConfig, MatrixEnsemble};
use ompmmv::rip::{ric_exact, PerturbationLevels};

fn main() -> ompmmv::Result<()> {
    println!("noiseless thresholds 1/(2 sqrt(k) + 1):");
    for k in 1..=6 {
        println!("  k = {k}: {:.6}", noiseless_threshold(k));
    }
    println!(
        "Q(4, 100) = {:.12}  F(1/3, 0) = {:.12}",
        q_func(4.0, 100.0)?,
        f_func(1.0 / 3.0, 0.0)?
    );

    let cfg = InstanceConfig {
        m: 24,
        n: 28,
        l: 3,
        k: 2,
        signal_row_norm_min: 1.0,
        ensemble: MatrixEnsemble::LowCoherenceFrame { iterations: 200 },
        seed: 11,
    };
    let phi = gen_sensing_matrix(&cfg)?;
    let x = gen_sparse_signal(&cfg)?;
    let y = phi.apply(&x)?;
    let t0 = min_support_row_norm(&x)?.t0;
    let delta = ric_exact(&phi, cfg.k + 1, 1_000_000)?;
    println!(
        "\nframe 24x28, k = 2: delta_3 = {:.4}, t0 = {t0:.3}",
        delta.delta
    );

    let levels = PerturbationLevels {
        eps0: 0.002,
        eps: 0.002,
        epsb: 0.01,
    };
    for mode in [
        GuaranteeMode::Noiseless,
        GuaranteeMode::MeasurementOnly,
        GuaranteeMode::SensingOnly,
        GuaranteeMode::General,
    ] {
        let r = check_guarantee(&phi, &y, Some(t0), cfg.k, levels, &delta, mode)?;
        let bound = r
            .predicted_error_bound
            .map_or_else(|| "exact".to_string(), |b| format!("{:.4}", b.value));
        println!(
            "  {mode:<12} eps_h = {:.4e}  {}  bound {bound}",
            r.eps_h,
            r.verdict()
        );
    }

    let heavy = PerturbationLevels {
        eps0: 0.0,
        eps: 0.0,
        epsb: 0.5,
    };
    let r = check_guarantee(
        &phi,
        &y,
        Some(t0),
        cfg.k,
        heavy,
        &delta,
        GuaranteeMode::MeasurementOnly,
    )?;
    println!("  epsb = 0.5: {}", r.verdict());
    Ok(())
}
