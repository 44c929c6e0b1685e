//! With a single measurement vector the joint solver is plain OMP. Compare
//! it against the independent scalar implementation.

use nalgebra::{DMatrix, DVector};
use ompmmv::harness::reference_omp_smv;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ompmmv::{somp_solve, MeasurementSet, SensingMatrix, SolverOptions};

fn main() -> ompmmv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let opts = SolverOptions::default();
    let mut same = 0;
    let total = 200;
    for _ in 0..total {
        let phi = SensingMatrix::new(DMatrix::from_fn(16, 32, |_, _| {
            rng.sample::<f64, _>(StandardNormal) / 4.0
        }))?;
        let y = DVector::from_fn(16, |_, _| rng.sample::<f64, _>(StandardNormal));
        let k = rng.random_range(1..=4);
        let a = somp_solve(
            &MeasurementSet::new(DMatrix::from_column_slice(16, 1, y.as_slice()))?,
            &phi,
            k,
            &opts,
        )?;
        let b = reference_omp_smv(&y, &phi, k, &opts)?;
        if a.selected_sequence() == b.selected_sequence() {
            same += 1;
        } else {
            println!(
                "differ: {:?} vs {:?}",
                a.selected_sequence(),
                b.selected_sequence()
            );
        }
    }
    println!("{same} of {total} selection sequences identical");
    Ok(())
}
