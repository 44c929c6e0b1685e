//! Exact restricted isometry constants by full subset enumeration, spectral
//! norms over column submatrices, and relative perturbation levels.
//!
//! Everything here is brute force: the subset count is checked against a
//! budget up front and the call fails instead of approximating.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{annihilated, select_columns};
use crate::model::{MeasurementSet, SensingMatrix, SupportSet};

pub const DEFAULT_SUBSET_BUDGET: u64 = 2_000_000;

/// Absolute slack used by the inequality diagnostics.
pub const CHECK_SLACK: f64 = 1e-12;

/// Which side of the isometry sandwich the witness attains.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ExtremeSide {
    /// `σ_max² − 1` is the binding term.
    #[default]
    Upper,
    /// `1 − σ_min²` is the binding term.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicEstimate {
    pub order: usize,
    pub delta: f64,
    /// Lexicographically first subset attaining `delta`.
    pub witness_subset: Vec<usize>,
    pub side: ExtremeSide,
    pub subsets_examined: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationLevels {
    /// `‖E‖₂ / ‖Φ‖₂`.
    pub eps0: f64,
    /// `max_{l ≤ k} ‖E‖₂^{(l)} / ‖Φ‖₂^{(l)}`.
    pub eps: f64,
    /// `‖B‖_F / ‖Y‖_F`.
    pub epsb: f64,
}

impl PerturbationLevels {
    pub const ZERO: Self = Self {
        eps0: 0.0,
        eps: 0.0,
        epsb: 0.0,
    };
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_order(n: usize, order: usize, budget: u64) -> Result<u64> {
    if order == 0 || order > n {
        return Err(Error::InvalidOrder { order, n });
    }
    let subsets = binomial(n, order);
    if subsets > budget as u128 {
        return Err(Error::SubsetBudgetExceeded {
            n,
            k: order,
            subsets,
            budget,
        });
    }
    Ok(subsets as u64)
}

/// Singular values of `A_S` padded with zeros up to `|S|` entries, sorted
/// descending, so that the minimum is the true `σ_min` of the map on ℝ^|S|.
fn subset_singular_values(a: &DMatrix<f64>, subset: &[usize]) -> Vec<f64> {
    let sub = select_columns(a, subset);
    let mut sv: Vec<f64> = sub.singular_values().iter().copied().collect();
    sv.resize(subset.len(), 0.0);
    sv.sort_by(|p, q| q.total_cmp(p));
    sv
}

/// Walks every `order`-subset of `0..n` in lexicographic order and keeps the
/// first subset maximising `score`. Work is split by leading index; the
/// reduction keeps the earliest leading index among equal scores, so the
/// outcome does not depend on scheduling.
fn lexicographic_argmax<T, F>(n: usize, order: usize, score: F) -> (f64, Vec<usize>, T)
where
    T: Send + Default,
    F: Fn(&[usize]) -> (f64, T) + Sync,
{
    let best = (0..=n - order)
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<usize>, T)> = None;
            let mut subset = Vec::with_capacity(order);
            for rest in ((first + 1)..n).combinations(order - 1) {
                subset.clear();
                subset.push(first);
                subset.extend_from_slice(&rest);
                let (s, extra) = score(&subset);
                if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
                    best = Some((s, subset.clone(), extra));
                }
            }
            best
        })
        .collect::<Vec<_>>();
    let mut out: Option<(f64, Vec<usize>, T)> = None;
    for cand in best.into_iter().flatten() {
        if out.as_ref().is_none_or(|(b, _, _)| cand.0 > *b) {
            out = Some(cand);
        }
    }
    out.unwrap_or((0.0, Vec::new(), T::default()))
}

/// Exact order-`k` restricted isometry constant of `a` as given (columns
/// are not normalised).
pub fn ric_exact(a: &SensingMatrix, k: usize, subset_budget: u64) -> Result<RicEstimate> {
    let n = a.ncols();
    let subsets = check_order(n, k, subset_budget)?;
    let mat = a.as_matrix();
    let (delta, witness, side) = lexicographic_argmax(n, k, |s| {
        let sv = subset_singular_values(mat, s);
        let upper = sv[0] * sv[0] - 1.0;
        let lower = 1.0 - sv[sv.len() - 1] * sv[sv.len() - 1];
        if upper >= lower {
            (upper.max(0.0), ExtremeSide::Upper)
        } else {
            (lower.max(0.0), ExtremeSide::Lower)
        }
    });
    Ok(RicEstimate {
        order: k,
        delta,
        witness_subset: witness,
        side,
        subsets_examined: subsets,
    })
}

/// A unit-norm `k`-sparse vector supported on the witness subset that
/// attains the binding side of the isometry bound.
pub fn extremal_vector(a: &SensingMatrix, est: &RicEstimate) -> DVector<f64> {
    let n = a.ncols();
    let mut u = DVector::zeros(n);
    if est.witness_subset.is_empty() {
        return u;
    }
    let sub = select_columns(a.as_matrix(), &est.witness_subset);
    // eigenvectors of the Gram matrix are the right singular vectors
    let gram = sub.transpose() * &sub;
    let eig = gram.symmetric_eigen();
    let pick = match est.side {
        ExtremeSide::Upper => eig.eigenvalues.imax(),
        ExtremeSide::Lower => eig.eigenvalues.imin(),
    };
    let v = eig.eigenvectors.column(pick);
    for (slot, &idx) in est.witness_subset.iter().enumerate() {
        u[idx] = v[slot];
    }
    u
}

/// `‖A‖₂^{(l)}`: the largest spectral norm over all `l`-column submatrices.
pub fn submatrix_spectral_norm(a: &DMatrix<f64>, l: usize, subset_budget: u64) -> Result<f64> {
    let n = a.ncols();
    check_order(n, l, subset_budget)?;
    let (best, _, ()) = lexicographic_argmax(n, l, |s| (subset_singular_values(a, s)[0], ()));
    Ok(best)
}

/// Measures the three relative levels of a perturbation `(E, B)`.
pub fn measure_perturbation_levels(
    phi: &SensingMatrix,
    e: &DMatrix<f64>,
    y: &MeasurementSet,
    b: &DMatrix<f64>,
    k: usize,
    subset_budget: u64,
) -> Result<PerturbationLevels> {
    let (m, n) = (phi.nrows(), phi.ncols());
    if e.shape() != (m, n) {
        return Err(Error::dims(
            "sensing perturbation",
            format!("{m}x{n}"),
            format!("{}x{}", e.nrows(), e.ncols()),
        ));
    }
    if b.shape() != (y.nrows(), y.ncols()) {
        return Err(Error::dims(
            "measurement perturbation",
            format!("{}x{}", y.nrows(), y.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    let phi_norm = phi.spectral_norm();
    if phi_norm == 0.0 {
        return Err(Error::ZeroReference("‖Φ‖₂"));
    }
    let y_norm = y.frobenius_norm();
    if y_norm == 0.0 {
        return Err(Error::ZeroReference("‖Y‖_F"));
    }
    let eps0 = crate::model::spectral_norm(e) / phi_norm;
    let mut eps = 0.0f64;
    let e_is_zero = e.iter().all(|&v| v == 0.0);
    for l in 1..=k.min(n) {
        check_order(n, l, subset_budget)?;
        if e_is_zero {
            continue;
        }
        let denom = submatrix_spectral_norm(phi.as_matrix(), l, subset_budget)?;
        if denom == 0.0 {
            return Err(Error::ZeroReference("‖Φ‖₂^(l)"));
        }
        eps = eps.max(submatrix_spectral_norm(e, l, subset_budget)? / denom);
    }
    Ok(PerturbationLevels {
        eps0,
        eps,
        epsb: b.norm() / y_norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Diagnostic {
    /// `|⟨Φu, Φv⟩ − ⟨u, v⟩|`.
    pub lhs: f64,
    /// `δ ‖u‖₂ ‖v‖₂`.
    pub rhs: f64,
    pub holds: bool,
}

/// Order of RIC required for the inner-product bound on `u`, `v`.
pub fn lemma2_order(u: &DVector<f64>, v: &DVector<f64>) -> usize {
    let nnz = |w: DVector<f64>| w.iter().filter(|&&x| x != 0.0).count();
    nnz(u - v).max(nnz(u + v))
}

pub fn lemma2_check(
    phi: &SensingMatrix,
    u: &DVector<f64>,
    v: &DVector<f64>,
    delta: f64,
) -> Result<Lemma2Diagnostic> {
    let n = phi.ncols();
    if u.len() != n || v.len() != n {
        return Err(Error::dims(
            "inner-product check",
            format!("vectors of length {n}"),
            format!("{} and {}", u.len(), v.len()),
        ));
    }
    let pu = phi.as_matrix() * u;
    let pv = phi.as_matrix() * v;
    let lhs = (pu.dot(&pv) - u.dot(v)).abs();
    let rhs = delta * u.norm() * v.norm();
    Ok(Lemma2Diagnostic {
        lhs,
        rhs,
        holds: lhs <= rhs + CHECK_SLACK * rhs.max(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma3Diagnostic {
    /// `(1 − δ/(1−δ)) ‖u‖₂²`.
    pub lower: f64,
    /// `‖A_Λ u‖₂²`.
    pub value: f64,
    /// `(1 + δ) ‖u‖₂²`.
    pub upper: f64,
    pub holds: bool,
}

/// Checks the isometry sandwich for `A_Λ = (I − P_Λ)Φ` on a vector supported
/// off `Λ`.
pub fn lemma3_check(
    phi: &SensingMatrix,
    support: &SupportSet,
    u: &DVector<f64>,
    delta: f64,
) -> Result<Lemma3Diagnostic> {
    let n = phi.ncols();
    if u.len() != n {
        return Err(Error::dims(
            "projected isometry check",
            format!("vector of length {n}"),
            u.len(),
        ));
    }
    if let Some(i) = support.iter().find(|&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    if support.iter().any(|i| u[i] != 0.0) {
        return Err(Error::PreconditionViolated(
            "vector support overlaps the projected index set".into(),
        ));
    }
    if !(delta < 1.0) {
        return Err(Error::PreconditionViolated(format!(
            "RIC {delta} must be below 1"
        )));
    }
    let a = annihilated(phi.as_matrix(), support.as_slice());
    let value = (a * u).norm_squared();
    let u2 = u.norm_squared();
    let lower = (1.0 - delta / (1.0 - delta)) * u2;
    let upper = (1.0 + delta) * u2;
    let slack = CHECK_SLACK * u2.max(1.0);
    Ok(Lemma3Diagnostic {
        lower,
        value,
        upper,
        holds: value >= lower - slack && value <= upper + slack,
    })
}
