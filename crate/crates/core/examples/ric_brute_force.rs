//! Exact restricted isometry constants by subset enumeration.

use nalgebra::DMatrix;
use ompmmv::perturb::{gen_sensing_matrix, InstanceConfig, MatrixEnsemble};
use ompmmv::rip::{binomial, extremal_vector, ric_exact};
use ompmmv::SensingMatrix;

fn main() -> ompmmv::Result<()> {
    // two unit columns with inner product 0.6: δ₂ = 0.6
    let pair = SensingMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.0, 0.8])?;
    let est = ric_exact(&pair, 2, 10)?;
    println!(
        "coherent pair: delta_2 = {:.12} on {:?} ({:?} side)",
        est.delta, est.witness_subset, est.side
    );

    for (name, ensemble) in [
        ("gaussian", MatrixEnsemble::Gaussian),
        (
            "low-coherence frame",
            MatrixEnsemble::LowCoherenceFrame { iterations: 200 },
        ),
    ] {
        let cfg = InstanceConfig {
            m: 20,
            n: 25,
            l: 1,
            k: 1,
            signal_row_norm_min: 0.0,
            ensemble,
            seed: 3,
        };
        let phi = gen_sensing_matrix(&cfg)?;
        println!("\n{name} 20x25");
        for order in 1..=4 {
            let est = ric_exact(&phi, order, 1_000_000)?;
            println!(
                "  delta_{order} = {:.4}  ({} subsets, witness {:?})",
                est.delta, est.subsets_examined, est.witness_subset
            );
            if order == 3 {
                let u = extremal_vector(&phi, &est);
                let ratio = (phi.as_matrix() * &u).norm_squared() / u.norm_squared();
                println!("  extremal vector: ||Phi u||^2 / ||u||^2 = {ratio:.4}");
            }
        }
    }

    let big = SensingMatrix::new(DMatrix::identity(100, 100))?;
    println!("\nC(100, 50) = {}", binomial(100, 50));
    match ric_exact(&big, 50, 2_000_000) {
        Err(e) => println!("refused: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
