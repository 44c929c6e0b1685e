//! Orthogonal matching pursuit for multiple measurement vectors.
//!
//! Each iteration matches the residual against every column (`H = Φᵀ R`),
//! selects the row of `H` with the largest ℓ₂ norm, and re-solves the least
//! squares problem restricted to the selected columns from scratch.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{householder_lstsq, pseudoinverse, select_columns};
use crate::model::{MeasurementSet, SensingMatrix, SignalMatrix, SupportSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once `‖R‖_F ≤ residual_stop_tol · ‖Y‖_F`.
    pub residual_stop_tol: f64,
    /// Relative singular value cutoff for the rank-deficient fallback.
    pub rank_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            residual_stop_tol: 1e-12,
            rank_tol: 1e-12,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if !(self.residual_stop_tol >= 0.0) || !(self.rank_tol >= 0.0) {
            return Err(Error::InvalidConfig(
                "solver tolerances must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Which recovery process produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    /// `R(Y, Φ, k)`.
    Noiseless,
    /// `R(Ỹ, Φ̃, k)`.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration number `l`.
    pub iteration: usize,
    pub selected: usize,
    /// `H^l = Φᵀ R^{l-1}`, `n × L`.
    pub matched: DMatrix<f64>,
    /// `‖H^l(j)‖₂` for every column index `j`.
    pub scores: Vec<f64>,
    /// `‖R^l‖_F` after the update step.
    pub residual_norm: f64,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    /// `‖R⁰‖_F = ‖Y‖_F`.
    pub initial_residual_norm: f64,
    pub iterations: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn selected_sequence(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.selected).collect()
    }

    /// Largest ratio `‖H^l(j)‖₂ / max_i ‖H^l(i)‖₂` over all iterations and
    /// all `j` selected before iteration `l`. Zero when nothing to check.
    pub fn previously_selected_score_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for (l, it) in self.iterations.iter().enumerate() {
            let max = it.scores.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                continue;
            }
            for prev in &self.iterations[..l] {
                worst = worst.max(it.scores[prev.selected] / max);
            }
        }
        worst
    }

    /// The zero-row identity on previously selected indices, at a relative
    /// tolerance.
    pub fn zero_rows_on_support(&self, rel_tol: f64) -> bool {
        self.previously_selected_score_ratio() <= rel_tol
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.iterations.iter().map(|it| it.residual_norm).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EarlyStop {
    /// The residual fell below `residual_stop_tol · ‖Y‖_F` after
    /// `after_iteration` iterations (0 means before the first).
    ZeroResidual { after_iteration: usize },
    /// Every unselected column is orthogonal to the residual.
    NoCorrelation { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub process: Process,
    pub support: SupportSet,
    pub signal: SignalMatrix,
    pub trace: IterationTrace,
    pub terminated_early: Option<EarlyStop>,
}

impl RecoveryResult {
    pub fn selected_sequence(&self) -> Vec<usize> {
        self.trace.selected_sequence()
    }
}

/// Restricted least-squares solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub signal: SignalMatrix,
    /// Set when the SVD fallback truncated at least one singular value.
    pub rank_deficient: bool,
}

fn check_conform(phi: &SensingMatrix, m_rows: usize, what: &'static str) -> Result<()> {
    if phi.nrows() != m_rows {
        return Err(Error::dims(
            what,
            format!("{} rows", phi.nrows()),
            format!("{m_rows} rows"),
        ));
    }
    Ok(())
}

fn row_norms(h: &DMatrix<f64>) -> Vec<f64> {
    h.row_iter().map(|r| r.norm()).collect()
}

/// `score_j = ‖(Φᵀ R)(j)‖₂` for every column `j` of `Φ`.
pub fn match_scores(residual: &MeasurementSet, phi: &SensingMatrix) -> Result<Vec<f64>> {
    check_conform(phi, residual.nrows(), "match scores")?;
    Ok(row_norms(
        &(phi.as_matrix().transpose() * residual.as_matrix()),
    ))
}

/// Minimises `‖Y − Φ Z‖_F` over `Z` with `supp(Z) ⊆ Λ`.
///
/// Solved by a Householder QR factorisation of `Φ_Λ`; when the triangular factor
/// is numerically singular the truncated SVD pseudoinverse is used instead.
pub fn least_squares_on_support(
    y: &MeasurementSet,
    phi: &SensingMatrix,
    support: &SupportSet,
    rank_tol: f64,
) -> Result<LeastSquares> {
    check_conform(phi, y.nrows(), "least squares")?;
    let n = phi.ncols();
    if let Some(bad) = support.iter().find(|&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    if support.is_empty() {
        return Err(Error::PreconditionViolated(
            "support must be nonempty".into(),
        ));
    }
    if support.len() > phi.nrows() {
        return Err(Error::PreconditionViolated(format!(
            "support size {} exceeds {} measurements",
            support.len(),
            phi.nrows()
        )));
    }
    let cols = support.as_slice();
    let (coef, rank_deficient) = restricted_solve(phi.as_matrix(), cols, y.as_matrix(), rank_tol);
    let mut z = DMatrix::zeros(n, y.ncols());
    for (r, &idx) in cols.iter().enumerate() {
        z.set_row(idx, &coef.row(r));
    }
    Ok(LeastSquares {
        signal: SignalMatrix::new(z)?,
        rank_deficient,
    })
}

fn restricted_solve(
    phi: &DMatrix<f64>,
    cols: &[usize],
    y: &DMatrix<f64>,
    rank_tol: f64,
) -> (DMatrix<f64>, bool) {
    let sub = select_columns(phi, cols);
    if let Some(coef) = householder_lstsq(&sub, y, rank_tol) {
        return (coef, false);
    }
    let (pinv, truncated) = pseudoinverse(&sub, rank_tol);
    (pinv * y, truncated)
}

/// Runs the pursuit for at most `k` iterations.
///
/// Ties in the identify step go to the smallest index. The loop stops early
/// when the residual is numerically zero, which is recorded in
/// [`RecoveryResult::terminated_early`].
pub fn somp_solve(
    y: &MeasurementSet,
    phi: &SensingMatrix,
    k: usize,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    run(y, phi, k, opts, Process::Noiseless)
}

/// The perturbed recovery process `X̃ = R(Ỹ, Φ̃, k)`. The algorithm is the
/// same; only the labelling differs.
pub fn solve_perturbed(
    y_tilde: &MeasurementSet,
    phi_tilde: &SensingMatrix,
    k: usize,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    run(y_tilde, phi_tilde, k, opts, Process::Perturbed)
}

fn run(
    y: &MeasurementSet,
    phi: &SensingMatrix,
    k: usize,
    opts: &SolverOptions,
    process: Process,
) -> Result<RecoveryResult> {
    opts.validate()?;
    check_conform(phi, y.nrows(), "pursuit")?;
    let (m, n) = (phi.nrows(), phi.ncols());
    let max_k = m.min(n);
    if k == 0 || k > max_k {
        return Err(Error::InvalidSparsity { k, max: max_k });
    }

    let phi_m = phi.as_matrix();
    let phi_t = phi_m.transpose();
    let y_m = y.as_matrix();
    let y_norm = y_m.norm();
    let stop_at = opts.residual_stop_tol * y_norm;

    let mut trace = IterationTrace {
        initial_residual_norm: y_norm,
        iterations: Vec::with_capacity(k),
    };
    let mut support = SupportSet::empty();
    let mut residual = y_m.clone();
    let mut z = DMatrix::zeros(n, y.ncols());
    let mut terminated_early = None;

    if y_norm <= stop_at {
        terminated_early = Some(EarlyStop::ZeroResidual { after_iteration: 0 });
    } else {
        for l in 1..=k {
            let matched = &phi_t * &residual;
            let scores = row_norms(&matched);

            let mut best: Option<(usize, f64)> = None;
            for (j, &s) in scores.iter().enumerate() {
                if support.contains(j) {
                    continue;
                }
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((j, s));
                }
            }
            let selected = match best {
                Some((j, s)) if s > 0.0 => j,
                _ => {
                    terminated_early = Some(EarlyStop::NoCorrelation { iteration: l });
                    break;
                }
            };
            support.insert(selected);

            let cols = support.as_slice();
            let (coef, rank_deficient) = restricted_solve(phi_m, cols, y_m, opts.rank_tol);
            z.fill(0.0);
            for (r, &idx) in cols.iter().enumerate() {
                z.set_row(idx, &coef.row(r));
            }
            residual = y_m - phi_m * &z;
            let residual_norm = residual.norm();

            trace.iterations.push(IterationRecord {
                iteration: l,
                selected,
                matched,
                scores,
                residual_norm,
                rank_deficient,
            });

            if residual_norm <= stop_at && l < k {
                terminated_early = Some(EarlyStop::ZeroResidual { after_iteration: l });
                break;
            }
        }
    }

    Ok(RecoveryResult {
        process,
        support,
        signal: SignalMatrix::new(z)?,
        trace,
        terminated_early,
    })
}
