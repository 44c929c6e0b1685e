//! The inner-product, projected-isometry and projected matched-filter
//! inequalities checked on random instances with exact constants.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ompmmv::harness::lemma4_oracle;
use ompmmv::rip::{lemma2_check, lemma2_order, lemma3_check, ric_exact};
use ompmmv::{SensingMatrix, SignalMatrix, SupportSet};

fn main() -> ompmmv::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (m, n) = (80, 12);
    let phi = SensingMatrix::new(DMatrix::from_fn(m, n, |_, _| {
        rng.sample::<f64, _>(StandardNormal) / (m as f64).sqrt()
    }))?;

    // disjointly supported u, v: |<Φu, Φv>| ≤ δ ‖u‖ ‖v‖
    let mut u = DVector::zeros(n);
    let mut v = DVector::zeros(n);
    u[0] = 1.0;
    u[3] = -0.5;
    v[5] = 2.0;
    let order = lemma2_order(&u, &v);
    let d = ric_exact(&phi, order, 100_000)?.delta;
    let l2 = lemma2_check(&phi, &u, &v, d)?;
    println!(
        "order {order}, delta {d:.4}: {:.4} <= {:.4}: {}",
        l2.lhs, l2.rhs, l2.holds
    );

    // projecting out Λ keeps a vector supported off Λ nearly isometric
    let lam = SupportSet::from_indices([1, 2], n)?;
    let d4 = ric_exact(&phi, 4, 100_000)?.delta;
    let l3 = lemma3_check(&phi, &lam, &u, d4)?;
    println!(
        "projected: {:.4} <= {:.4} <= {:.4}: {}",
        l3.lower, l3.value, l3.upper, l3.holds
    );

    let mut xs = DMatrix::zeros(n, 3);
    for c in 0..3 {
        xs[(6, c)] = rng.sample(StandardNormal);
        xs[(9, c)] = rng.sample(StandardNormal);
    }
    let l4 = lemma4_oracle(&phi, &lam, &SignalMatrix::new(xs)?, 100_000)?;
    println!(
        "matched filter: max_j ||H(j) - X*(j)|| = {:.4} <= {:.4} (order {}, delta {:.4}): {}",
        l4.max_lhs, l4.rhs, l4.order, l4.delta, l4.holds
    );
    Ok(())
}
