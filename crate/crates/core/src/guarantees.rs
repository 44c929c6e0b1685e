//! Closed-form recovery guarantees: the threshold function `Q`, the error
//! amplification `F`, the composite perturbation magnitude `ε_h` and the
//! verdicts built from them.
//!
//! `ε_h` is evaluated exactly as stated, including the
//! `(‖Φ‖₂⁴ + ⅔‖Φ‖₂²)` factor on the sensing term. That factor is not
//! dimensionally homogeneous in `‖Φ‖₂`; it is kept as is rather than
//! "corrected".

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{MeasurementSet, SensingMatrix};
use crate::rip::{PerturbationLevels, RicEstimate};

/// `Q(u, v) = 1/(2√u+1) − (4√u/(2√u+1)) · 1/((2 + 1/√u)v − 2)`.
///
/// `v = +∞` is accepted and yields `1/(2√u+1)`.
pub fn q_func(u: f64, v: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("Q requires u > 0, got {u}")));
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!("Q requires v > 0, got {v}")));
    }
    let su = u.sqrt();
    let denom = (2.0 + 1.0 / su) * v - 2.0;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "Q denominator (2 + 1/√u)v − 2 = {denom} is not positive"
        )));
    }
    let head = 1.0 / (2.0 * su + 1.0);
    Ok(head - (4.0 * su / (2.0 * su + 1.0)) / denom)
}

/// `F(w) = √((1 + w) / (2 − (1 + w)(1 + ε)²))`.
pub fn f_func(w: f64, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Domain(format!("F requires ε ≥ 0, got {eps}")));
    }
    let denom = 2.0 - (1.0 + w) * (1.0 + eps) * (1.0 + eps);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "F denominator 2 − (1 + w)(1 + ε)² = {denom} is not positive"
        )));
    }
    Ok(((1.0 + w) / denom).sqrt())
}

/// `1/(2√k + 1)`, the noiseless threshold.
pub fn noiseless_threshold(k: usize) -> f64 {
    1.0 / (2.0 * (k as f64).sqrt() + 1.0)
}

/// Largest admissible submatrix-level `ε`: `√1.5 − 1`.
pub fn max_sensing_level() -> f64 {
    1.5f64.sqrt() - 1.0
}

fn sensing_term(spectral_phi: f64, frob_y: f64, eps: f64) -> Result<f64> {
    // compare against the root itself so the boundary is not left to rounding
    let denom = 12.0 - 8.0 * (1.0 + eps) * (1.0 + eps);
    if !(denom > 0.0) || eps >= max_sensing_level() {
        return Err(Error::Domain(format!(
            "12 − 8(1 + ε)² = {denom} is not positive (ε = {eps})"
        )));
    }
    let p2 = spectral_phi * spectral_phi;
    let coeff = 9.0 * (2.0 + eps) * eps / denom;
    Ok(coeff * (p2 * p2 + (2.0 / 3.0) * p2) * spectral_phi * frob_y)
}

/// The composite perturbation magnitude `ε_h`.
pub fn epsilon_h(spectral_phi: f64, frob_y: f64, eps0: f64, eps: f64, epsb: f64) -> Result<f64> {
    if [spectral_phi, frob_y, eps0, eps, epsb]
        .iter()
        .any(|v| !(*v >= 0.0))
    {
        return Err(Error::Domain("ε_h inputs must be nonnegative".into()));
    }
    let sensing = sensing_term(spectral_phi, frob_y, eps)?;
    Ok(sensing + (eps0 + epsb + eps0 * epsb) * spectral_phi * frob_y)
}

/// Which perturbations are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuaranteeMode {
    /// No perturbation at all.
    Noiseless,
    /// Only the measurements are perturbed (`Φ̃ = Φ`).
    MeasurementOnly,
    /// Only the sensing matrix is perturbed (`Ỹ = Y`).
    SensingOnly,
    /// Both.
    General,
}

impl GuaranteeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GuaranteeMode::Noiseless => "noiseless",
            GuaranteeMode::MeasurementOnly => "measurement",
            GuaranteeMode::SensingOnly => "sensing",
            GuaranteeMode::General => "general",
        }
    }
}

impl fmt::Display for GuaranteeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GuaranteeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noiseless" => Ok(GuaranteeMode::Noiseless),
            "measurement" | "measurement-only" => Ok(GuaranteeMode::MeasurementOnly),
            "sensing" | "sensing-only" => Ok(GuaranteeMode::SensingOnly),
            "general" => Ok(GuaranteeMode::General),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// `ε_h` specialised to a mode:
/// measurement-only gives `ε_b ‖Φ‖₂ ‖Y‖_F`, sensing-only drops `ε_b`,
/// noiseless is zero and general is the full expression.
pub fn epsilon_h_variants(
    mode: GuaranteeMode,
    spectral_phi: f64,
    frob_y: f64,
    eps0: f64,
    eps: f64,
    epsb: f64,
) -> Result<f64> {
    match mode {
        GuaranteeMode::Noiseless => Ok(0.0),
        GuaranteeMode::MeasurementOnly => {
            if !(epsb >= 0.0) {
                return Err(Error::Domain("ε_b must be nonnegative".into()));
            }
            Ok(epsb * spectral_phi * frob_y)
        }
        GuaranteeMode::SensingOnly => {
            if !(eps0 >= 0.0) {
                return Err(Error::Domain("ε₀ must be nonnegative".into()));
            }
            Ok(sensing_term(spectral_phi, frob_y, eps)? + eps0 * spectral_phi * frob_y)
        }
        GuaranteeMode::General => epsilon_h(spectral_phi, frob_y, eps0, eps, epsb),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Value(f64),
    /// `Q` is undefined at this noise level: no RIC can satisfy the
    /// condition.
    Unsatisfiable,
}

impl Threshold {
    pub fn value(self) -> Option<f64> {
        match self {
            Threshold::Value(v) => Some(v),
            Threshold::Unsatisfiable => None,
        }
    }
}

/// Predicted relative error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBound {
    /// `(ε + ε_b) F(1/√k)` with the mode's levels;
    /// `+∞` when `F(1/√k)` is undefined (e.g. `k = 1`).
    pub value: f64,
    /// Measurement-only mode also reports the printed closed form
    /// `ε_b (√k + 1)/√(k − 1)`, which differs from the `F` form.
    /// `None` in other modes and for `k = 1`.
    pub printed_form: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuaranteeInputs {
    pub k: usize,
    pub t0: Option<f64>,
    pub levels: PerturbationLevels,
    pub spectral_phi: f64,
    pub frob_y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub mode: GuaranteeMode,
    pub delta_kplus1: RicEstimate,
    pub eps_h: f64,
    pub threshold: Threshold,
    pub condition_holds: bool,
    /// Present for every mode except noiseless.
    pub predicted_error_bound: Option<ErrorBound>,
    pub inputs: GuaranteeInputs,
    /// Why the condition is unsatisfiable, if it is.
    pub note: Option<String>,
}

impl GuaranteeReport {
    /// One-line human-readable verdict.
    pub fn verdict(&self) -> String {
        match self.threshold {
            Threshold::Value(t) => {
                let rel = if self.condition_holds { "<" } else { ">=" };
                format!(
                    "condition {} ({} {} {})",
                    if self.condition_holds {
                        "holds"
                    } else {
                        "fails"
                    },
                    fmt_g(self.delta_kplus1.delta),
                    rel,
                    fmt_g(t)
                )
            }
            Threshold::Unsatisfiable => "condition unsatisfiable at this noise level".into(),
        }
    }
}

/// Six significant digits, trailing zeros trimmed.
pub fn fmt_g(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Evaluates the sufficient condition `δ_{k+1} < Q(k, t₀/ε_h)` (or
/// `δ_{k+1} < 1/(2√k+1)` in noiseless mode) together with the predicted
/// error bound.
///
/// The mode selects which levels enter `ε_h` and the bound; levels that the
/// mode excludes are ignored.
pub fn check_guarantee(
    phi: &SensingMatrix,
    y: &MeasurementSet,
    t0: Option<f64>,
    k: usize,
    levels: PerturbationLevels,
    delta: &RicEstimate,
    mode: GuaranteeMode,
) -> Result<GuaranteeReport> {
    if k == 0 {
        return Err(Error::InvalidSparsity {
            k,
            max: phi.ncols(),
        });
    }
    if delta.order != k + 1 {
        return Err(Error::PreconditionViolated(format!(
            "RIC has order {}, expected {}",
            delta.order,
            k + 1
        )));
    }
    let spectral_phi = phi.spectral_norm();
    let frob_y = y.frobenius_norm();
    let inputs = GuaranteeInputs {
        k,
        t0,
        levels,
        spectral_phi,
        frob_y,
    };
    let kf = k as f64;
    let sk = kf.sqrt();

    if mode == GuaranteeMode::Noiseless {
        let t = noiseless_threshold(k);
        return Ok(GuaranteeReport {
            mode,
            delta_kplus1: delta.clone(),
            eps_h: 0.0,
            threshold: Threshold::Value(t),
            condition_holds: delta.delta < t,
            predicted_error_bound: None,
            inputs,
            note: None,
        });
    }

    let t0 = match t0 {
        Some(v) if v > 0.0 => v,
        _ => {
            return Err(Error::PreconditionViolated(
                "t0 > 0 is required outside noiseless mode".into(),
            ))
        }
    };

    let PerturbationLevels { eps0, eps, epsb } = levels;
    let mut note = None;
    let eps_h = match epsilon_h_variants(mode, spectral_phi, frob_y, eps0, eps, epsb) {
        Ok(v) => Some(v),
        Err(e) => {
            note = Some(e.to_string());
            None
        }
    };
    let threshold = match eps_h {
        None => Threshold::Unsatisfiable,
        Some(h) => {
            let v = if h == 0.0 { f64::INFINITY } else { t0 / h };
            match q_func(kf, v) {
                Ok(q) => Threshold::Value(q),
                Err(e) => {
                    note = Some(e.to_string());
                    Threshold::Unsatisfiable
                }
            }
        }
    };
    let condition_holds = matches!(threshold, Threshold::Value(q) if delta.delta < q);

    let (level, f_eps) = match mode {
        GuaranteeMode::MeasurementOnly => (epsb, 0.0),
        GuaranteeMode::SensingOnly => (eps, eps),
        _ => (eps + epsb, eps),
    };
    let f = f_func(1.0 / sk, f_eps).unwrap_or(f64::INFINITY);
    let value = if level == 0.0 { 0.0 } else { level * f };
    let printed_form = (mode == GuaranteeMode::MeasurementOnly && k > 1)
        .then(|| epsb * (sk + 1.0) / (kf - 1.0).sqrt());

    Ok(GuaranteeReport {
        mode,
        delta_kplus1: delta.clone(),
        eps_h: eps_h.unwrap_or(f64::INFINITY),
        threshold,
        condition_holds,
        predicted_error_bound: Some(ErrorBound {
            value,
            printed_form,
        }),
        inputs,
        note,
    })
}
