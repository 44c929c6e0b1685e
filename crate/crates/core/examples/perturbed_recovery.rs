//! One perturbed trial end to end: calibrate `E` and `B`, solve on
//! `(Ỹ, Φ̃)`, compare the error with the predicted bound and the
//! matched-filter deviation with `ε_h`.

use ompmmv::guarantees::{check_guarantee, epsilon_h, GuaranteeMode};
use ompmmv::harness::delta_h_diagnostic;
use ompmmv::model::{min_support_row_norm, relative_frobenius_error, support_of};
use ompmmv::perturb::{
    apply_perturbation, calibrate_perturbation, gen_sensing_matrix, gen_sparse_signal,
    InstanceConfig, MatrixEnsemble, PerturbationSpec,
};
use ompmmv::rip::ric_exact;
use ompmmv::{solve_perturbed, somp_solve, SolverOptions};

fn main() -> ompmmv::Result<()> {
    let cfg = InstanceConfig {
        m: 24,
        n: 28,
        l: 3,
        k: 2,
        signal_row_norm_min: 1.0,
        ensemble: MatrixEnsemble::LowCoherenceFrame { iterations: 200 },
        seed: 5,
    };
    let phi = gen_sensing_matrix(&cfg)?;
    let x = gen_sparse_signal(&cfg)?;
    let y = phi.apply(&x)?;

    let spec = PerturbationSpec::gaussian(0.002, 0.01, 99);
    let p = calibrate_perturbation(&phi, &y, &spec, cfg.k, 1_000_000)?;
    let lv = p.realized;
    println!(
        "realized eps0 = {:.4}, eps = {:.4}, epsb = {:.4}",
        lv.eps0, lv.eps, lv.epsb
    );

    let (yt, phit) = apply_perturbation(&y, &phi, &p)?;
    let opts = SolverOptions::default();
    let noisy = solve_perturbed(&yt, &phit, cfg.k, &opts)?;
    let clean = somp_solve(&y, &phi, cfg.k, &opts)?;

    let delta = ric_exact(&phi, cfg.k + 1, 1_000_000)?;
    let t0 = min_support_row_norm(&x)?.t0;
    let r = check_guarantee(
        &phi,
        &y,
        Some(t0),
        cfg.k,
        lv,
        &delta,
        GuaranteeMode::General,
    )?;
    println!("{}", r.verdict());

    let err = relative_frobenius_error(&noisy.signal, &x)?;
    let bound = r
        .predicted_error_bound
        .map(|b| b.value)
        .unwrap_or(f64::INFINITY);
    println!(
        "support {} (true {}), relative error {err:.3e} <= bound {bound:.3e}: {}",
        noisy.support,
        support_of(&x, 0.0),
        err <= bound
    );

    let h = epsilon_h(
        phi.spectral_norm(),
        y.frobenius_norm(),
        lv.eps0,
        lv.eps,
        lv.epsb,
    )?;
    match delta_h_diagnostic(&noisy.trace, &clean.trace, h) {
        Ok(d) => {
            for (l, v) in d.norms.iter().enumerate() {
                println!(
                    "  ||H~ - H|| at iteration {} = {v:.3e} (eps_h = {h:.3e})",
                    l + 1
                );
            }
        }
        Err(e) => println!("  {e}"),
    }
    Ok(())
}
