//! Recover a jointly 2-sparse signal from `Y = ΦX`, first with `Φ = I`
//! and then with a low-coherence frame, printing the selection trace.

use ompmmv::perturb::{gen_sensing_matrix, gen_sparse_signal, InstanceConfig, MatrixEnsemble};
use ompmmv::{somp_solve, SensingMatrix, SignalMatrix, SolverOptions};

fn main() -> ompmmv::Result<()> {
    let opts = SolverOptions::default();

    let phi = SensingMatrix::identity(4)?;
    let x = SignalMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, -2.0, 0.0, 0.0, 3.0, 0.5])?;
    let y = phi.apply(&x)?;
    let res = somp_solve(&y, &phi, 2, &opts)?;
    println!("identity: support {} (expected 1,3)", res.support);
    println!("recovered exactly: {}", res.signal == x);

    let cfg = InstanceConfig {
        m: 20,
        n: 25,
        l: 3,
        k: 2,
        signal_row_norm_min: 0.5,
        ensemble: MatrixEnsemble::LowCoherenceFrame { iterations: 200 },
        seed: 7,
    };
    let phi = gen_sensing_matrix(&cfg)?;
    let x = gen_sparse_signal(&cfg)?;
    let y = phi.apply(&x)?;
    let res = somp_solve(&y, &phi, cfg.k, &opts)?;
    println!("\nframe 20x25, L = 3");
    println!("true support      {}", ompmmv::model::support_of(&x, 0.0));
    println!("recovered support {}", res.support);
    for it in &res.trace.iterations {
        println!(
            "  iteration {}: picked {:>2} with score {:.4}, residual {:.3e}",
            it.iteration, it.selected, it.scores[it.selected], it.residual_norm
        );
    }
    println!(
        "relative error {:.2e}",
        ompmmv::model::relative_frobenius_error(&res.signal, &x)?
    );
    Ok(())
}
