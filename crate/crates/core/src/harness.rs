//! Monte Carlo experiments: generate instances, perturb, solve, evaluate the
//! guarantee and the diagnostics, aggregate.
//!
//! Trial `t` of an experiment uses instance seed `derive_seed(master_seed, t)`
//! and perturbation seed `derive_seed(instance_seed, PERTURBATION_TAG)`. The
//! same trial index therefore sees the same `Φ`, `X` and raw noise
//! directions at every sweep point, and only the noise scale changes.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guarantees::{check_guarantee, epsilon_h, GuaranteeMode};
use crate::linalg::annihilated;
use crate::model::{
    min_support_row_norm, relative_frobenius_error, support_of, MeasurementSet, SensingMatrix,
    SignalMatrix, SupportSet,
};
use crate::perturb::{
    apply_perturbation, calibrate_perturbation, derive_seed, gen_sensing_matrix, gen_sparse_signal,
    InstanceConfig, MeasurementNoise, PerturbationSpec,
};
use crate::rip::{binomial, ric_exact, PerturbationLevels, CHECK_SLACK, DEFAULT_SUBSET_BUDGET};
use crate::solver::{
    solve_perturbed, somp_solve, EarlyStop, IterationRecord, IterationTrace, Process,
    RecoveryResult, SolverOptions,
};

pub const PERTURBATION_TAG: u64 = 0x5EED;

/// Relative tolerance for the zero-row identity on selected indices.
pub const ZERO_ROW_REL_TOL: f64 = 1e-10;

/// Relative error accepted as exact recovery in noiseless mode. Also added
/// to every predicted bound before comparing, since a zero-noise bound of
/// exactly 0 cannot absorb rounding in the least-squares step.
pub const NOISELESS_EXACT_TOL: f64 = 1e-10;

/// Seed of trial `t` under `master_seed`.
pub fn trial_seed(master_seed: u64, t: u64) -> u64 {
    derive_seed(master_seed, t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checks {
    /// Compute `δ_{k+1}` by enumeration and evaluate the guarantee.
    pub ric: bool,
    pub mode: GuaranteeMode,
    pub lemma4: bool,
    pub zero_rows: bool,
    pub delta_h: bool,
    pub subset_budget: u64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            ric: true,
            mode: GuaranteeMode::General,
            lemma4: false,
            zero_rows: true,
            delta_h: true,
            subset_budget: DEFAULT_SUBSET_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Unsatisfiable,
    NotChecked,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Unsatisfiable => "unsatisfiable",
            Verdict::NotChecked => "not-checked",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DeltaHOutcome {
    Within,
    Exceeded { iteration: usize },
    Diverged { iteration: usize },
    Skipped(String),
}

impl DeltaHOutcome {
    pub fn label(&self) -> String {
        match self {
            DeltaHOutcome::Within => "within".into(),
            DeltaHOutcome::Exceeded { iteration } => format!("exceeded@{iteration}"),
            DeltaHOutcome::Diverged { iteration } => format!("diverged@{iteration}"),
            DeltaHOutcome::Skipped(_) => "skipped".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceDigest {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub digest: InstanceDigest,
    pub levels: PerturbationLevels,
    pub delta_kplus1: Option<f64>,
    pub eps_h: Option<f64>,
    pub verdict: Verdict,
    pub support_exact: bool,
    pub relative_error: f64,
    pub predicted_bound: Option<f64>,
    pub lemma4_ok: Option<bool>,
    pub zero_rows_ok: Option<bool>,
    pub delta_h: Option<DeltaHOutcome>,
    /// The guarantee held but its conclusion did not.
    pub violation: bool,
    pub wall_time: Duration,
}

impl TrialRecord {
    pub fn bound_satisfied(&self) -> Option<bool> {
        self.predicted_bound
            .filter(|b| b.is_finite())
            .map(|b| self.relative_error <= b + NOISELESS_EXACT_TOL)
    }
}

/// One trial of the perturbed recovery process.
pub fn run_trial(
    cfg: &InstanceConfig,
    pert: &PerturbationSpec,
    checks: &Checks,
) -> Result<TrialRecord> {
    let started = Instant::now();
    let opts = SolverOptions::default();
    let k = cfg.k;
    if k == 0 {
        return Err(Error::InvalidConfig("trials need sparsity >= 1".into()));
    }
    let phi = gen_sensing_matrix(cfg)?;
    let x = gen_sparse_signal(cfg)?;
    let y = phi.apply(&x)?;
    let budget = checks.subset_budget;

    let realized = calibrate_perturbation(&phi, &y, pert, k, budget)?;
    let (y_t, phi_t) = apply_perturbation(&y, &phi, &realized)?;
    let levels = realized.realized;

    let noisy = solve_perturbed(&y_t, &phi_t, k, &opts)?;
    let truth = support_of(&x, 0.0);
    let support_exact = noisy.support == truth;
    let relative_error = relative_frobenius_error(&noisy.signal, &x)?;

    let ric_feasible = k < cfg.n && binomial(cfg.n, k + 1) <= budget as u128;
    let mut delta_kplus1 = None;
    let mut eps_h = None;
    let mut verdict = Verdict::NotChecked;
    let mut predicted_bound = None;
    let t0 = min_support_row_norm(&x)?.t0;
    if checks.ric && ric_feasible {
        let delta = ric_exact(&phi, k + 1, budget)?;
        delta_kplus1 = Some(delta.delta);
        let report = check_guarantee(&phi, &y, Some(t0), k, levels, &delta, checks.mode)?;
        eps_h = Some(report.eps_h);
        verdict = match (report.threshold.value(), report.condition_holds) {
            (None, _) => Verdict::Unsatisfiable,
            (Some(_), true) => Verdict::Holds,
            (Some(_), false) => Verdict::Fails,
        };
        predicted_bound = match checks.mode {
            GuaranteeMode::Noiseless => Some(NOISELESS_EXACT_TOL),
            _ => report.predicted_error_bound.map(|b| b.value),
        };
    }

    let zero_rows_ok = checks
        .zero_rows
        .then(|| noisy.trace.zero_rows_on_support(ZERO_ROW_REL_TOL));

    let lemma4_ok = if checks.lemma4 && k < cfg.n && binomial(cfg.n, k + 1) <= budget as u128 {
        match lemma4_oracle(&phi, &SupportSet::empty(), &x, budget) {
            Ok(d) => Some(d.holds),
            Err(Error::PreconditionViolated(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let delta_h = if checks.delta_h {
        let clean = somp_solve(&y, &phi, k, &opts)?;
        Some(
            match epsilon_h(
                phi.spectral_norm(),
                y.frobenius_norm(),
                levels.eps0,
                levels.eps,
                levels.epsb,
            ) {
                Err(e) => DeltaHOutcome::Skipped(e.to_string()),
                Ok(h) => match delta_h_diagnostic(&noisy.trace, &clean.trace, h) {
                    Ok(d) => match d.first_exceeded {
                        None => DeltaHOutcome::Within,
                        Some(iteration) => DeltaHOutcome::Exceeded { iteration },
                    },
                    Err(Error::TraceMismatch { iteration, .. }) => {
                        DeltaHOutcome::Diverged { iteration }
                    }
                    Err(e) => return Err(e),
                },
            },
        )
    } else {
        None
    };

    let conclusion_ok =
        support_exact && predicted_bound.is_none_or(|b| relative_error <= b + NOISELESS_EXACT_TOL);
    let violation = verdict == Verdict::Holds && !conclusion_ok;

    Ok(TrialRecord {
        digest: InstanceDigest {
            m: cfg.m,
            n: cfg.n,
            l: cfg.l,
            k,
            seed: cfg.seed,
        },
        levels,
        delta_kplus1,
        eps_h,
        verdict,
        support_exact,
        relative_error,
        predicted_bound,
        lemma4_ok,
        zero_rows_ok,
        delta_h,
        violation,
        wall_time: started.elapsed(),
    })
}

/// A point of a perturbation-level sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub eps0: f64,
    pub epsb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Template instance; its seed is replaced per trial.
    pub instance: InstanceConfig,
    pub sweep: Vec<SweepPoint>,
    pub measurement_noise: MeasurementNoise,
    pub trials: usize,
    pub master_seed: u64,
    pub checks: Checks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSummary {
    pub point: SweepPoint,
    pub trials: usize,
    pub support_recovery_rate: f64,
    pub mean_relative_error: f64,
    pub max_relative_error: f64,
    /// Among trials with a finite predicted bound.
    pub bound_satisfaction_rate: Option<f64>,
    pub guarantee_passes: usize,
    pub conditional_support_rate: Option<f64>,
    pub conditional_bound_rate: Option<f64>,
    pub violations: usize,
    pub zero_row_failures: usize,
    pub lemma4_failures: usize,
    pub delta_h_exceeded: usize,
    pub delta_h_diverged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub points: Vec<PointSummary>,
    /// `(sweep point index, trial index, record)`, sorted.
    pub records: Vec<(usize, usize, TrialRecord)>,
}

impl ExperimentReport {
    pub fn total_trials(&self) -> usize {
        self.records.len()
    }

    pub fn total_violations(&self) -> usize {
        self.points.iter().map(|p| p.violations).sum()
    }

    pub fn guarantee_passes(&self) -> usize {
        self.points.iter().map(|p| p.guarantee_passes).sum()
    }

    /// Delimited per-trial table followed by a summary block. Timing is
    /// left out unless `include_timings`, so the default output is
    /// reproducible byte for byte.
    pub fn to_table(&self, include_timings: bool) -> String {
        let mut out = String::new();
        out.push_str(
            "point,trial,m,n,L,k,seed,eps0,eps,epsb,delta_k1,eps_h,verdict,support_exact,\
             relative_error,predicted_bound,lemma4_ok,zero_rows_ok,delta_h,violation",
        );
        if include_timings {
            out.push_str(",wall_time_s");
        }
        out.push('\n');
        let opt_f = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        let opt_b = |v: Option<bool>| v.map_or_else(String::new, |x| x.to_string());
        for (p, t, r) in &self.records {
            let d = &r.digest;
            let _ = write!(
                out,
                "{p},{t},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                d.m,
                d.n,
                d.l,
                d.k,
                d.seed,
                r.levels.eps0,
                r.levels.eps,
                r.levels.epsb,
                opt_f(r.delta_kplus1),
                opt_f(r.eps_h),
                r.verdict.as_str(),
                r.support_exact,
                r.relative_error,
                opt_f(r.predicted_bound),
                opt_b(r.lemma4_ok),
                opt_b(r.zero_rows_ok),
                r.delta_h.as_ref().map_or_else(String::new, |o| o.label()),
                r.violation
            );
            if include_timings {
                let _ = write!(out, ",{}", r.wall_time.as_secs_f64());
            }
            out.push('\n');
        }
        out.push('\n');
        let c = &self.config;
        let _ = writeln!(out, "# summary");
        let _ = writeln!(
            out,
            "# config: m={} n={} L={} k={} ensemble={} trials={} master_seed={} mode={}",
            c.instance.m,
            c.instance.n,
            c.instance.l,
            c.instance.k,
            c.instance.ensemble.name(),
            c.trials,
            c.master_seed,
            c.checks.mode
        );
        let opt_r = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
        for (i, s) in self.points.iter().enumerate() {
            let _ = writeln!(
                out,
                "# point {i}: eps0={} epsb={} trials={} support_rate={} mean_error={} max_error={} \
                 bound_rate={} guarantee_passes={} support_rate_given_pass={} bound_rate_given_pass={} \
                 violations={} zero_row_failures={} lemma4_failures={} delta_h_exceeded={} delta_h_diverged={}",
                s.point.eps0,
                s.point.epsb,
                s.trials,
                s.support_recovery_rate,
                s.mean_relative_error,
                s.max_relative_error,
                opt_r(s.bound_satisfaction_rate),
                s.guarantee_passes,
                opt_r(s.conditional_support_rate),
                opt_r(s.conditional_bound_rate),
                s.violations,
                s.zero_row_failures,
                s.lemma4_failures,
                s.delta_h_exceeded,
                s.delta_h_diverged
            );
        }
        let _ = writeln!(
            out,
            "# total: trials={} guarantee_passes={} violations={}",
            self.total_trials(),
            self.guarantee_passes(),
            self.total_violations()
        );
        out
    }
}

fn rate(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn summarize(point: SweepPoint, records: &[&TrialRecord]) -> PointSummary {
    let n = records.len();
    let support = records.iter().filter(|r| r.support_exact).count();
    let mean = records.iter().map(|r| r.relative_error).sum::<f64>() / n.max(1) as f64;
    let max = records.iter().map(|r| r.relative_error).fold(0.0, f64::max);
    let with_bound: Vec<bool> = records.iter().filter_map(|r| r.bound_satisfied()).collect();
    let passed: Vec<&&TrialRecord> = records
        .iter()
        .filter(|r| r.verdict == Verdict::Holds)
        .collect();
    let passed_bound: Vec<bool> = passed.iter().filter_map(|r| r.bound_satisfied()).collect();
    PointSummary {
        point,
        trials: n,
        support_recovery_rate: support as f64 / n.max(1) as f64,
        mean_relative_error: mean,
        max_relative_error: max,
        bound_satisfaction_rate: rate(with_bound.iter().filter(|&&b| b).count(), with_bound.len()),
        guarantee_passes: passed.len(),
        conditional_support_rate: rate(
            passed.iter().filter(|r| r.support_exact).count(),
            passed.len(),
        ),
        conditional_bound_rate: rate(
            passed_bound.iter().filter(|&&b| b).count(),
            passed_bound.len(),
        ),
        violations: records.iter().filter(|r| r.violation).count(),
        zero_row_failures: records
            .iter()
            .filter(|r| r.zero_rows_ok == Some(false))
            .count(),
        lemma4_failures: records
            .iter()
            .filter(|r| r.lemma4_ok == Some(false))
            .count(),
        delta_h_exceeded: records
            .iter()
            .filter(|r| matches!(r.delta_h, Some(DeltaHOutcome::Exceeded { .. })))
            .count(),
        delta_h_diverged: records
            .iter()
            .filter(|r| matches!(r.delta_h, Some(DeltaHOutcome::Diverged { .. })))
            .count(),
    }
}

/// Runs every sweep point for `trials` trials. Trials run in parallel; the
/// report is independent of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidConfig("trials must be >= 1".into()));
    }
    if cfg.sweep.is_empty() {
        return Err(Error::InvalidConfig(
            "sweep must contain at least one point".into(),
        ));
    }
    cfg.instance.validate()?;
    let jobs: Vec<(usize, usize)> = (0..cfg.sweep.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let records: Vec<(usize, usize, TrialRecord)> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let seed = trial_seed(cfg.master_seed, t as u64);
            let inst = InstanceConfig {
                seed,
                ..cfg.instance.clone()
            };
            let point = cfg.sweep[p];
            let pert = PerturbationSpec {
                measurement_noise: cfg.measurement_noise,
                ..PerturbationSpec::gaussian(
                    point.eps0,
                    point.epsb,
                    derive_seed(seed, PERTURBATION_TAG),
                )
            };
            run_trial(&inst, &pert, &cfg.checks)
                .map(|r| (p, t, r))
                .map_err(|e| Error::Trial {
                    index: p * cfg.trials + t,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    let points = cfg
        .sweep
        .iter()
        .enumerate()
        .map(|(p, &point)| {
            let rs: Vec<&TrialRecord> = records
                .iter()
                .filter(|(q, _, _)| *q == p)
                .map(|(_, _, r)| r)
                .collect();
            summarize(point, &rs)
        })
        .collect();

    Ok(ExperimentReport {
        config: cfg.clone(),
        points,
        records,
    })
}

/// Plain single-vector OMP, written independently of [`somp_solve`]: the
/// selected columns are kept as an incrementally orthonormalised basis
/// (modified Gram-Schmidt with one re-orthogonalisation pass) and the
/// coefficients are recovered by back substitution at the end.
///
/// Same tie-break (smallest index) and stopping rule as the MMV solver.
pub fn reference_omp_smv(
    y: &DVector<f64>,
    phi: &SensingMatrix,
    k: usize,
    opts: &SolverOptions,
) -> Result<RecoveryResult> {
    let a = phi.as_matrix();
    let (m, n) = a.shape();
    if y.len() != m {
        return Err(Error::dims(
            "reference OMP",
            format!("{m} rows"),
            format!("{} rows", y.len()),
        ));
    }
    if k == 0 || k > m.min(n) {
        return Err(Error::InvalidSparsity { k, max: m.min(n) });
    }
    let y_norm = y.norm();
    let stop = opts.residual_stop_tol * y_norm;

    let mut basis: Vec<DVector<f64>> = Vec::new();
    // upper-triangular factor, column by column
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    let mut r = y.clone();
    let mut iterations = Vec::new();
    let mut terminated_early = None;

    if y_norm <= stop {
        terminated_early = Some(EarlyStop::ZeroResidual { after_iteration: 0 });
    }
    let mut l = 0;
    while terminated_early.is_none() && l < k {
        l += 1;
        let mut h = DVector::zeros(n);
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..m {
                acc += a[(i, j)] * r[i];
            }
            h[j] = acc;
        }
        let mut pick: Option<usize> = None;
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            match pick {
                Some(p) if h[j].abs() <= h[p].abs() => {}
                _ => pick = Some(j),
            }
        }
        let j = match pick {
            Some(j) if h[j] != 0.0 => j,
            _ => {
                terminated_early = Some(EarlyStop::NoCorrelation { iteration: l });
                break;
            }
        };
        chosen.push(j);

        let mut q: DVector<f64> = a.column(j).into_owned();
        let mut coeffs = vec![0.0; basis.len() + 1];
        for _pass in 0..2 {
            for (b, c) in basis.iter().zip(coeffs.iter_mut()) {
                let proj = b.dot(&q);
                *c += proj;
                q -= b * proj;
            }
        }
        let qn = q.norm();
        let rank_deficient = qn <= opts.rank_tol.max(f64::EPSILON) * a.column(j).norm();
        if !rank_deficient {
            q /= qn;
            coeffs[basis.len()] = qn;
            basis.push(q);
        }
        r_cols.push(coeffs);

        r = y.clone();
        for b in &basis {
            let c = b.dot(y);
            r -= b * c;
        }
        let rn = r.norm();
        iterations.push(IterationRecord {
            iteration: l,
            selected: j,
            scores: h.iter().map(|v| v.abs()).collect(),
            matched: DMatrix::from_column_slice(n, 1, h.as_slice()),
            residual_norm: rn,
            rank_deficient,
        });
        if rn <= stop && l < k {
            terminated_early = Some(EarlyStop::ZeroResidual { after_iteration: l });
        }
    }

    // coefficients: solve R c = Qᵀ y over the full-rank prefix
    let s = chosen.len();
    let mut x = DMatrix::zeros(n, 1);
    if s > 0 && basis.len() == s {
        let qty: Vec<f64> = basis.iter().map(|b| b.dot(y)).collect();
        let mut c = vec![0.0; s];
        for i in (0..s).rev() {
            let mut acc = qty[i];
            for jj in (i + 1)..s {
                acc -= r_cols[jj][i] * c[jj];
            }
            c[i] = acc / r_cols[i][i];
        }
        for (idx, &col) in chosen.iter().enumerate() {
            x[(col, 0)] = c[idx];
        }
    } else if s > 0 {
        let ym = MeasurementSet::new(DMatrix::from_column_slice(m, 1, y.as_slice()))?;
        let sup = SupportSet::from_indices(chosen.iter().copied(), n)?;
        x = crate::solver::least_squares_on_support(&ym, phi, &sup, opts.rank_tol)?
            .signal
            .into_matrix();
    }

    Ok(RecoveryResult {
        process: Process::Noiseless,
        support: SupportSet::from_indices(chosen, n)?,
        signal: SignalMatrix::new(x)?,
        trace: IterationTrace {
            initial_residual_norm: y_norm,
            iterations,
        },
        terminated_early,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Diagnostic {
    pub order: usize,
    pub delta: f64,
    /// `max_{j ∉ Λ} ‖H(j) − X*(j)‖₂`.
    pub max_lhs: f64,
    pub worst_index: Option<usize>,
    /// `δ/(1−δ) ‖X*‖_F`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks `‖H(j) − X*(j)‖₂ ≤ δ/(1−δ) ‖X*‖_F` for every `j ∉ Λ`, where
/// `H = A_Λᵀ A_Λ X*` and `δ` is the exact RIC of order `‖X*‖₀ + |Λ| + 1`.
pub fn lemma4_oracle(
    phi: &SensingMatrix,
    support: &SupportSet,
    xstar: &SignalMatrix,
    subset_budget: u64,
) -> Result<Lemma4Diagnostic> {
    let n = phi.ncols();
    if xstar.nrows() != n {
        return Err(Error::dims(
            "projected matched-filter check",
            format!("{n} rows"),
            xstar.nrows(),
        ));
    }
    if let Some(i) = support.iter().find(|&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let xs_support = support_of(xstar, 0.0);
    if !xs_support.is_disjoint(support) {
        return Err(Error::PreconditionViolated(
            "supp(X*) intersects the projected index set".into(),
        ));
    }
    let order = xs_support.len() + support.len() + 1;
    let delta = ric_exact(phi, order, subset_budget)?.delta;
    if delta >= 1.0 {
        return Err(Error::PreconditionViolated(format!(
            "RIC of order {order} is {delta} >= 1"
        )));
    }
    let a = annihilated(phi.as_matrix(), support.as_slice());
    let h = a.transpose() * &a * xstar.as_matrix();
    let diff = h - xstar.as_matrix();
    let mut max_lhs = 0.0f64;
    let mut worst_index = None;
    for j in (0..n).filter(|&j| !support.contains(j)) {
        let v = diff.row(j).norm();
        if worst_index.is_none() || v > max_lhs {
            max_lhs = v;
            worst_index = Some(j);
        }
    }
    let rhs = delta / (1.0 - delta) * xstar.frobenius_norm();
    Ok(Lemma4Diagnostic {
        order,
        delta,
        max_lhs,
        worst_index,
        rhs,
        holds: max_lhs <= rhs + CHECK_SLACK * rhs.max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaHDiagnostic {
    /// `‖H̃^l − H^l‖_F` for each compared iteration.
    pub norms: Vec<f64>,
    pub eps_h: f64,
    pub first_exceeded: Option<usize>,
}

impl DeltaHDiagnostic {
    pub fn within(&self) -> bool {
        self.first_exceeded.is_none()
    }
}

/// Compares the matched-filter outputs of a perturbed and a clean run on
/// the same instance, iteration by iteration, against `ε_h`.
///
/// Iteration `l` is comparable only while both runs share `Λ^{l−1}`; a
/// different selection yields [`Error::TraceMismatch`].
pub fn delta_h_diagnostic(
    noisy: &IterationTrace,
    clean: &IterationTrace,
    eps_h: f64,
) -> Result<DeltaHDiagnostic> {
    let len = noisy.iterations.len().min(clean.iterations.len());
    let mut norms = Vec::with_capacity(len);
    let mut first_exceeded = None;
    for idx in 0..len {
        let (a, b) = (&noisy.iterations[idx], &clean.iterations[idx]);
        if a.matched.shape() != b.matched.shape() {
            return Err(Error::dims(
                "matched filter comparison",
                format!("{:?}", b.matched.shape()),
                format!("{:?}", a.matched.shape()),
            ));
        }
        let d = (&a.matched - &b.matched).norm();
        if first_exceeded.is_none() && d > eps_h * (1.0 + 1e-12) {
            first_exceeded = Some(a.iteration);
        }
        norms.push(d);
        if a.selected != b.selected {
            return Err(Error::TraceMismatch {
                iteration: a.iteration,
                noisy: a.selected,
                clean: b.selected,
            });
        }
    }
    if noisy.iterations.len() != clean.iterations.len() {
        let iteration = len + 1;
        let pick = |t: &IterationTrace| t.iterations.get(len).map_or(usize::MAX, |r| r.selected);
        return Err(Error::TraceMismatch {
            iteration,
            noisy: pick(noisy),
            clean: pick(clean),
        });
    }
    Ok(DeltaHDiagnostic {
        norms,
        eps_h,
        first_exceeded,
    })
}
