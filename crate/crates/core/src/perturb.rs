//! Test-instance generation and calibrated perturbations `Ỹ = Y + B`,
//! `Φ̃ = Φ + E`.
//!
//! Randomness comes from `ChaCha8Rng` seeded through [`derive_seed`], so an
//! instance is a pure function of its configuration and seed on every
//! platform. Each drawn object (sensing matrix, signal, `E`, `B`) uses its own
//! derived stream.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{MeasurementSet, SensingMatrix, SignalMatrix};
use crate::rip::{measure_perturbation_levels, PerturbationLevels};

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `tag` of `seed`: `splitmix64(seed ^ splitmix64(tag))`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

const STREAM_SENSING: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_SENSING_NOISE: u64 = 3;
const STREAM_MEASUREMENT_NOISE: u64 = 4;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // column-major fill keeps the draw order fixed
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixEnsemble {
    /// I.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// `I_m` in the leading columns, the first two of which are bent to
    /// inner product `coherence` (so `δ₂ = coherence` when `n ≤ m`). Columns
    /// beyond `m` are unit-norm Gaussian directions.
    IdentityEmbedded {
        coherence: f64,
    },
    /// Unit-norm columns with low mutual coherence, produced by alternating
    /// projection between a clipped Gram matrix and rank-`m` PSD matrices.
    LowCoherenceFrame {
        iterations: usize,
    },
    UserSupplied(SensingMatrix),
}

impl MatrixEnsemble {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixEnsemble::Gaussian => "gaussian",
            MatrixEnsemble::IdentityEmbedded { .. } => "identity-embedded",
            MatrixEnsemble::LowCoherenceFrame { .. } => "low-coherence-frame",
            MatrixEnsemble::UserSupplied(_) => "user-supplied",
        }
    }
}

pub const DEFAULT_FRAME_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceConfig {
    pub m: usize,
    pub n: usize,
    /// Number of measurement vectors `L`.
    pub l: usize,
    pub k: usize,
    /// Floor applied to every support row norm.
    pub signal_row_norm_min: f64,
    pub ensemble: MatrixEnsemble,
    pub seed: u64,
}

impl InstanceConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 || self.l == 0 {
            return bad(format!(
                "m, n, L must be positive (got {}, {}, {})",
                self.m, self.n, self.l
            ));
        }
        if self.k > self.m.min(self.n) {
            return bad(format!(
                "sparsity {} exceeds min(m, n) = {}",
                self.k,
                self.m.min(self.n)
            ));
        }
        if !(self.signal_row_norm_min >= 0.0) || !self.signal_row_norm_min.is_finite() {
            return bad("signal_row_norm_min must be a finite nonnegative number".into());
        }
        match &self.ensemble {
            MatrixEnsemble::IdentityEmbedded { coherence } => {
                if !(coherence.abs() < 1.0) {
                    return bad(format!("coherence {coherence} must lie in (-1, 1)"));
                }
                if *coherence != 0.0 && (self.m < 2 || self.n < 2) {
                    return bad("nonzero coherence needs m, n >= 2".into());
                }
            }
            MatrixEnsemble::LowCoherenceFrame { iterations } if *iterations == 0 => {
                return bad("frame iterations must be positive".into());
            }
            MatrixEnsemble::UserSupplied(phi) if phi.nrows() != self.m || phi.ncols() != self.n => {
                return bad(format!(
                    "user-supplied matrix is {}x{}, config says {}x{}",
                    phi.nrows(),
                    phi.ncols(),
                    self.m,
                    self.n
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

fn normalize_columns(a: &mut DMatrix<f64>) {
    for mut c in a.column_iter_mut() {
        let nrm = c.norm();
        if nrm > 0.0 {
            c /= nrm;
        }
    }
}

fn low_coherence_frame(
    m: usize,
    n: usize,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> DMatrix<f64> {
    let mut a = gaussian_matrix(rng, m, n);
    normalize_columns(&mut a);
    if n <= 1 {
        return a;
    }
    let welch = if n > m {
        (((n - m) as f64) / ((m * (n - 1)) as f64)).sqrt()
    } else {
        0.0
    };
    for _ in 0..iterations {
        let mut g = a.transpose() * &a;
        let mut mu = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if i != j {
                    mu = mu.max(g[(i, j)].abs());
                }
            }
        }
        let cap = welch.max(0.9 * mu);
        for j in 0..n {
            for i in 0..n {
                if i == j {
                    g[(i, j)] = 1.0;
                } else {
                    g[(i, j)] = g[(i, j)].clamp(-cap, cap);
                }
            }
        }
        let eig = g.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&p, &q| {
            eig.eigenvalues[q]
                .total_cmp(&eig.eigenvalues[p])
                .then(p.cmp(&q))
        });
        let rank = m.min(n);
        let mut next = DMatrix::zeros(m, n);
        for (row, &idx) in order[..rank].iter().enumerate() {
            let w = eig.eigenvalues[idx].max(0.0).sqrt();
            let v = eig.eigenvectors.column(idx);
            for c in 0..n {
                next[(row, c)] = w * v[c];
            }
        }
        normalize_columns(&mut next);
        a = next;
    }
    a
}

pub fn gen_sensing_matrix(cfg: &InstanceConfig) -> Result<SensingMatrix> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    let mut rng = rng_for(cfg.seed, STREAM_SENSING);
    let a = match &cfg.ensemble {
        MatrixEnsemble::Gaussian => gaussian_matrix(&mut rng, m, n) / (m as f64).sqrt(),
        MatrixEnsemble::IdentityEmbedded { coherence } => {
            let mut a = DMatrix::zeros(m, n);
            for j in 0..m.min(n) {
                a[(j, j)] = 1.0;
            }
            if *coherence != 0.0 {
                a[(0, 1)] = *coherence;
                a[(1, 1)] = (1.0 - coherence * coherence).sqrt();
            }
            if n > m {
                let mut pad = gaussian_matrix(&mut rng, m, n - m);
                normalize_columns(&mut pad);
                a.view_mut((0, m), (m, n - m)).copy_from(&pad);
            }
            a
        }
        MatrixEnsemble::LowCoherenceFrame { iterations } => {
            low_coherence_frame(m, n, *iterations, &mut rng)
        }
        MatrixEnsemble::UserSupplied(phi) => phi.as_matrix().clone(),
    };
    SensingMatrix::new(a)
}

/// Jointly `k`-sparse signal: `k` rows drawn uniformly, entries standard
/// normal, rows shorter than `signal_row_norm_min` rescaled up to it.
pub fn gen_sparse_signal(cfg: &InstanceConfig) -> Result<SignalMatrix> {
    cfg.validate()?;
    let (n, l, k) = (cfg.n, cfg.l, cfg.k);
    let mut rng = rng_for(cfg.seed, STREAM_SIGNAL);
    let mut rows: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        rows.swap(i, j);
    }
    let mut x = DMatrix::zeros(n, l);
    for &r in &rows[..k] {
        let mut row: Vec<f64> = (0..l).map(|_| rng.sample(StandardNormal)).collect();
        let mut nrm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            row[0] = 1.0;
            nrm = 1.0;
        }
        if nrm < cfg.signal_row_norm_min {
            let s = cfg.signal_row_norm_min / nrm;
            row.iter_mut().for_each(|v| *v *= s);
        }
        for (c, v) in row.into_iter().enumerate() {
            x[(r, c)] = v;
        }
    }
    SignalMatrix::new(x)
}

/// How the raw sensing perturbation `E₀` is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SensingNoise {
    Gaussian,
    /// `E₀` is given; only its scale is calibrated.
    UserSupplied(DMatrix<f64>),
}

/// How the raw measurement perturbation `B₀` is drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasurementNoise {
    Gaussian,
    /// Column `column` carries `share` of the total energy of `B`; the
    /// remaining columns split the rest evenly. Lets a single column's
    /// `‖b_j‖₂/‖y_j‖₂` exceed `ε_b` while `‖B‖_F/‖Y‖_F = ε_b`.
    ColumnSkewed {
        column: usize,
        share: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub target_eps0: f64,
    pub target_epsb: f64,
    pub seed: u64,
    pub sensing_noise: SensingNoise,
    pub measurement_noise: MeasurementNoise,
}

impl PerturbationSpec {
    pub fn gaussian(target_eps0: f64, target_epsb: f64, seed: u64) -> Self {
        Self {
            target_eps0,
            target_epsb,
            seed,
            sensing_noise: SensingNoise::Gaussian,
            measurement_noise: MeasurementNoise::Gaussian,
        }
    }

    pub fn none() -> Self {
        Self::gaussian(0.0, 0.0, 0)
    }
}

/// A perturbation after calibration against a specific `(Φ, Y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedPerturbation {
    pub spec: PerturbationSpec,
    pub e: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Measured levels; `eps` is measured over orders `1..=k`.
    pub realized: PerturbationLevels,
}

impl RealizedPerturbation {
    /// `(−E, −B)` with the same measured levels.
    pub fn negated(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            e: -&self.e,
            b: -&self.b,
            realized: self.realized,
        }
    }
}

fn skewed_measurement_noise(
    rng: &mut ChaCha8Rng,
    m: usize,
    l: usize,
    column: usize,
    share: f64,
) -> Result<DMatrix<f64>> {
    if column >= l {
        return Err(Error::InvalidConfig(format!(
            "skew column {column} out of range for {l} columns"
        )));
    }
    if !(share > 0.0 && share <= 1.0) || (l == 1 && share < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "skew share {share} out of range"
        )));
    }
    let mut b = gaussian_matrix(rng, m, l);
    let rest = if l > 1 {
        (1.0 - share) / (l - 1) as f64
    } else {
        0.0
    };
    for (j, mut col) in b.column_iter_mut().enumerate() {
        let nrm = col.norm();
        let target = if j == column { share } else { rest }.sqrt();
        if nrm > 0.0 {
            col *= target / nrm;
        }
    }
    Ok(b)
}

/// Draws `E₀`, `B₀` from the perturbation seed and rescales them so that
/// `‖E‖₂/‖Φ‖₂ = target_eps0` and `‖B‖_F/‖Y‖_F = target_epsb`. The
/// submatrix level `ε` is measured afterwards over orders `1..=k`.
pub fn calibrate_perturbation(
    phi: &SensingMatrix,
    y: &MeasurementSet,
    spec: &PerturbationSpec,
    k: usize,
    subset_budget: u64,
) -> Result<RealizedPerturbation> {
    for (name, v) in [("eps0", spec.target_eps0), ("epsb", spec.target_epsb)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "target {name} = {v} must be >= 0"
            )));
        }
    }
    let (m, n) = (phi.nrows(), phi.ncols());
    if y.nrows() != m {
        return Err(Error::dims(
            "calibration",
            format!("{m} rows"),
            format!("{} rows", y.nrows()),
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

    let e = if spec.target_eps0 == 0.0 {
        DMatrix::zeros(m, n)
    } else {
        let e0 = match &spec.sensing_noise {
            SensingNoise::Gaussian => {
                gaussian_matrix(&mut rng_for(spec.seed, STREAM_SENSING_NOISE), m, n)
            }
            SensingNoise::UserSupplied(e0) => {
                if e0.shape() != (m, n) {
                    return Err(Error::dims(
                        "user-supplied sensing perturbation",
                        format!("{m}x{n}"),
                        format!("{}x{}", e0.nrows(), e0.ncols()),
                    ));
                }
                e0.clone()
            }
        };
        let e0_norm = crate::model::spectral_norm(&e0);
        if e0_norm == 0.0 {
            return Err(Error::ZeroReference("‖E₀‖₂"));
        }
        e0 * (spec.target_eps0 * phi_norm / e0_norm)
    };

    let l = y.ncols();
    let b = if spec.target_epsb == 0.0 {
        DMatrix::zeros(m, l)
    } else {
        let mut rng = rng_for(spec.seed, STREAM_MEASUREMENT_NOISE);
        let b0 = match spec.measurement_noise {
            MeasurementNoise::Gaussian => gaussian_matrix(&mut rng, m, l),
            MeasurementNoise::ColumnSkewed { column, share } => {
                skewed_measurement_noise(&mut rng, m, l, column, share)?
            }
        };
        let b0_norm = b0.norm();
        b0 * (spec.target_epsb * y_norm / b0_norm)
    };

    let realized = measure_perturbation_levels(phi, &e, y, &b, k, subset_budget)?;
    Ok(RealizedPerturbation {
        spec: spec.clone(),
        e,
        b,
        realized,
    })
}

/// `(Ỹ, Φ̃) = (Y + B, Φ + E)`.
pub fn apply_perturbation(
    y: &MeasurementSet,
    phi: &SensingMatrix,
    p: &RealizedPerturbation,
) -> Result<(MeasurementSet, SensingMatrix)> {
    if p.b.shape() != (y.nrows(), y.ncols()) || p.e.shape() != (phi.nrows(), phi.ncols()) {
        return Err(Error::dims(
            "apply perturbation",
            format!(
                "B {}x{}, E {}x{}",
                y.nrows(),
                y.ncols(),
                phi.nrows(),
                phi.ncols()
            ),
            format!(
                "B {}x{}, E {}x{}",
                p.b.nrows(),
                p.b.ncols(),
                p.e.nrows(),
                p.e.ncols()
            ),
        ));
    }
    Ok((
        MeasurementSet::new(y.as_matrix() + &p.b)?,
        SensingMatrix::new(phi.as_matrix() + &p.e)?,
    ))
}

/// Per-column ratios `‖b_j‖₂/‖y_j‖₂` (infinite where `y_j = 0`).
pub fn column_noise_ratios(y: &MeasurementSet, b: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(
        y.ncols(),
        (0..y.ncols()).map(|j| {
            let yn = y.as_matrix().column(j).norm();
            let bn = b.column(j).norm();
            if yn == 0.0 {
                f64::INFINITY
            } else {
                bn / yn
            }
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::min_support_row_norm;
    use crate::rip::ric_exact;
    use approx::assert_abs_diff_eq;

    fn cfg(m: usize, n: usize, l: usize, k: usize, ensemble: MatrixEnsemble) -> InstanceConfig {
        InstanceConfig {
            m,
            n,
            l,
            k,
            signal_row_norm_min: 0.0,
            ensemble,
            seed: 42,
        }
    }

    #[test]
    fn identity_embedded_square_is_identity() {
        let c = cfg(
            4,
            4,
            1,
            1,
            MatrixEnsemble::IdentityEmbedded { coherence: 0.0 },
        );
        assert_eq!(
            gen_sensing_matrix(&c).unwrap(),
            SensingMatrix::identity(4).unwrap()
        );
    }

    #[test]
    fn identity_embedded_coherence_sets_ric() {
        let c = cfg(
            6,
            6,
            1,
            1,
            MatrixEnsemble::IdentityEmbedded { coherence: 0.3 },
        );
        let phi = gen_sensing_matrix(&c).unwrap();
        assert_abs_diff_eq!(ric_exact(&phi, 2, 100).unwrap().delta, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn generation_is_deterministic() {
        for ens in [
            MatrixEnsemble::Gaussian,
            MatrixEnsemble::IdentityEmbedded { coherence: 0.1 },
            MatrixEnsemble::LowCoherenceFrame { iterations: 20 },
        ] {
            let c = cfg(8, 12, 3, 2, ens);
            assert_eq!(
                gen_sensing_matrix(&c).unwrap(),
                gen_sensing_matrix(&c).unwrap()
            );
            assert_eq!(
                gen_sparse_signal(&c).unwrap(),
                gen_sparse_signal(&c).unwrap()
            );
        }
        let c = cfg(8, 12, 3, 2, MatrixEnsemble::Gaussian);
        let mut d = c.clone();
        d.seed = 43;
        assert_ne!(
            gen_sensing_matrix(&c).unwrap(),
            gen_sensing_matrix(&d).unwrap()
        );
    }

    #[test]
    fn gaussian_columns_near_unit_norm() {
        let c = cfg(32, 48, 1, 1, MatrixEnsemble::Gaussian);
        let phi = gen_sensing_matrix(&c).unwrap();
        let mean = phi.as_matrix().column_iter().map(|c| c.norm()).sum::<f64>() / 48.0;
        assert!((mean - 1.0).abs() < 0.15, "mean column norm {mean}");
    }

    #[test]
    fn frame_has_unit_columns_and_low_coherence() {
        let c = cfg(
            20,
            25,
            1,
            2,
            MatrixEnsemble::LowCoherenceFrame {
                iterations: DEFAULT_FRAME_ITERATIONS,
            },
        );
        let phi = gen_sensing_matrix(&c).unwrap();
        let g = phi.as_matrix().transpose() * phi.as_matrix();
        let mut mu = 0.0f64;
        for i in 0..25 {
            assert_abs_diff_eq!(g[(i, i)], 1.0, epsilon = 1e-12);
            for j in 0..25 {
                if i != j {
                    mu = mu.max(g[(i, j)].abs());
                }
            }
        }
        assert!(mu < 0.15, "coherence {mu}");
    }

    #[test]
    fn sparse_signal_cases() {
        let zero = gen_sparse_signal(&cfg(5, 6, 2, 0, MatrixEnsemble::Gaussian)).unwrap();
        assert_eq!(zero.row_sparsity(), 0);
        let full = gen_sparse_signal(&cfg(6, 6, 2, 6, MatrixEnsemble::Gaussian)).unwrap();
        assert_eq!(full.row_sparsity(), 6);
        let mut c = cfg(10, 20, 3, 4, MatrixEnsemble::Gaussian);
        c.signal_row_norm_min = 0.5;
        let x = gen_sparse_signal(&c).unwrap();
        assert_eq!(x.row_sparsity(), 4);
        assert!(min_support_row_norm(&x).unwrap().t0 >= 0.5 - 1e-15);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(gen_sensing_matrix(&cfg(3, 4, 1, 4, MatrixEnsemble::Gaussian)).is_err());
        assert!(gen_sensing_matrix(&cfg(3, 4, 0, 1, MatrixEnsemble::Gaussian)).is_err());
        assert!(gen_sensing_matrix(&cfg(
            3,
            4,
            1,
            1,
            MatrixEnsemble::IdentityEmbedded { coherence: 1.0 }
        ))
        .is_err());
    }

    fn instance() -> (SensingMatrix, MeasurementSet) {
        let c = cfg(8, 12, 3, 2, MatrixEnsemble::Gaussian);
        let phi = gen_sensing_matrix(&c).unwrap();
        let y = phi.apply(&gen_sparse_signal(&c).unwrap()).unwrap();
        (phi, y)
    }

    #[test]
    fn zero_targets_give_zero_perturbation() {
        let (phi, y) = instance();
        let p = calibrate_perturbation(&phi, &y, &PerturbationSpec::none(), 2, 1000).unwrap();
        assert!(p.e.iter().all(|&v| v == 0.0) && p.b.iter().all(|&v| v == 0.0));
        assert_eq!(p.realized, PerturbationLevels::ZERO);
        let (yt, pt) = apply_perturbation(&y, &phi, &p).unwrap();
        assert_eq!((yt, pt), (y, phi));
    }

    #[test]
    fn calibration_hits_targets() {
        let (phi, y) = instance();
        let spec = PerturbationSpec::gaussian(0.1, 0.03, 9);
        let p = calibrate_perturbation(&phi, &y, &spec, 2, 1000).unwrap();
        assert!((p.realized.eps0 - 0.1).abs() <= 1e-12 * 0.1);
        assert!((p.realized.epsb - 0.03).abs() <= 1e-12 * 0.03);
        assert!(p.realized.eps > 0.0);

        let (yt, pt) = apply_perturbation(&y, &phi, &p).unwrap();
        let measured = (yt.as_matrix() - y.as_matrix()).norm() / y.frobenius_norm();
        assert!((measured - 0.03).abs() <= 1e-12);
        let (y2, phi2) = apply_perturbation(&yt, &pt, &p.negated()).unwrap();
        assert!((y2.as_matrix() - y.as_matrix()).amax() <= 1e-15);
        assert!((phi2.as_matrix() - phi.as_matrix()).amax() <= 1e-15);
    }

    #[test]
    fn scale_factor_arithmetic() {
        // ‖E₀‖₂ = 2 and ‖Φ‖₂ = 3: scale 0.1·3/2 = 0.15
        let phi =
            SensingMatrix::new(DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0]))).unwrap();
        let y = MeasurementSet::from_row_slice(2, 1, &[1.0, 1.0]).unwrap();
        let e0 = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let spec = PerturbationSpec {
            sensing_noise: SensingNoise::UserSupplied(e0.clone()),
            ..PerturbationSpec::gaussian(0.1, 0.0, 0)
        };
        let p = calibrate_perturbation(&phi, &y, &spec, 1, 10).unwrap();
        assert!((&p.e - &e0 * 0.15).amax() < 1e-15);
        assert_abs_diff_eq!(p.realized.eps0, 0.1, epsilon = 1e-15);
    }

    #[test]
    fn proportional_perturbation_levels() {
        let (phi, y) = instance();
        let spec = PerturbationSpec {
            sensing_noise: SensingNoise::UserSupplied(phi.as_matrix().clone()),
            ..PerturbationSpec::gaussian(0.07, 0.0, 0)
        };
        let p = calibrate_perturbation(&phi, &y, &spec, 2, 1000).unwrap();
        assert_abs_diff_eq!(p.realized.eps0, 0.07, epsilon = 1e-14);
        assert_abs_diff_eq!(p.realized.eps, 0.07, epsilon = 1e-14);
    }

    #[test]
    fn column_skewed_noise_exceeds_level_in_one_column() {
        let (phi, y) = instance();
        let spec = PerturbationSpec {
            measurement_noise: MeasurementNoise::ColumnSkewed {
                column: 1,
                share: 0.95,
            },
            ..PerturbationSpec::gaussian(0.0, 0.05, 3)
        };
        let p = calibrate_perturbation(&phi, &y, &spec, 2, 1000).unwrap();
        assert!((p.realized.epsb - 0.05).abs() <= 1e-12 * 0.05);
        let ratios = column_noise_ratios(&y, &p.b);
        assert!(ratios.max() > 0.05, "ratios {ratios:?}");
    }

    #[test]
    fn calibration_zero_reference() {
        let phi = SensingMatrix::identity(2).unwrap();
        let y = MeasurementSet::new(DMatrix::zeros(2, 1)).unwrap();
        assert!(matches!(
            calibrate_perturbation(&phi, &y, &PerturbationSpec::none(), 1, 10),
            Err(Error::ZeroReference(_))
        ));
    }
}
