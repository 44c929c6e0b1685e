//! Domain types for the multiple-measurement-vector model `Y = Φ X`.
//!
//! All matrices are dense, real and double precision. Row indices are
//! 0-based everywhere.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if !m[(r, c)].is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

macro_rules! matrix_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(DMatrix<f64>);

        impl $name {
            /// Wraps a matrix, rejecting empty shapes and non-finite entries.
            pub fn new(entries: DMatrix<f64>) -> Result<Self> {
                check_finite(&entries)?;
                Ok(Self(entries))
            }

            pub fn from_row_slice(nrows: usize, ncols: usize, data: &[f64]) -> Result<Self> {
                if data.len() != nrows * ncols {
                    return Err(Error::dims(
                        stringify!($name),
                        format!("{} entries", nrows * ncols),
                        format!("{} entries", data.len()),
                    ));
                }
                Self::new(DMatrix::from_row_slice(nrows, ncols, data))
            }

            pub fn as_matrix(&self) -> &DMatrix<f64> {
                &self.0
            }

            pub fn into_matrix(self) -> DMatrix<f64> {
                self.0
            }

            pub fn nrows(&self) -> usize {
                self.0.nrows()
            }

            pub fn ncols(&self) -> usize {
                self.0.ncols()
            }

            pub fn frobenius_norm(&self) -> f64 {
                self.0.norm()
            }
        }

        impl AsRef<DMatrix<f64>> for $name {
            fn as_ref(&self) -> &DMatrix<f64> {
                &self.0
            }
        }
    };
}

matrix_newtype!(
    /// The jointly sparse unknown `X`, `n` rows by `L` columns.
    SignalMatrix
);
matrix_newtype!(
    /// The sensing matrix `Φ`, `m` rows by `n` columns.
    SensingMatrix
);
matrix_newtype!(
    /// The observations `Y`, `m` rows by `L` columns.
    MeasurementSet
);

impl SignalMatrix {
    pub fn zeros(n: usize, l: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, l))
    }

    /// Number of rows with a nonzero entry.
    pub fn row_sparsity(&self) -> usize {
        support_of(self, 0.0).len()
    }
}

impl SensingMatrix {
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.0)
    }

    /// `Φ X`, checked for conforming shapes.
    pub fn apply(&self, x: &SignalMatrix) -> Result<MeasurementSet> {
        if self.ncols() != x.nrows() {
            return Err(Error::dims(
                "sensing matrix times signal",
                format!("{} signal rows", self.ncols()),
                format!("{} signal rows", x.nrows()),
            ));
        }
        MeasurementSet::new(&self.0 * x.as_matrix())
    }
}

/// Largest singular value of an arbitrary dense matrix (0 for empty input).
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Ascending, duplicate-free set of 0-based row indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a support set over `{0, …, n-1}`; duplicates collapse.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I, n: usize) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self { indices: v })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn insert(&mut self, index: usize) -> bool {
        match self.indices.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.indices.insert(pos, index);
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| !other.contains(i))
    }

    /// Parses the comma-separated form produced by `Display`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Self::empty());
        }
        let mut out = Vec::new();
        for (pos, tok) in text.split(',').enumerate() {
            let idx = tok.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: 1,
                column: pos + 1,
                message: format!("bad index {tok:?}: {e}"),
            })?;
            out.push(idx);
        }
        Self::from_indices(out, n)
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, idx) in self.indices.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// Per-row ℓ₂ norms of a signal together with the weakest support row norm.
#[derive(Debug, Clone, PartialEq)]
pub struct RowNormProfile {
    pub norms: Vec<f64>,
    pub t0: f64,
}

/// Indices of rows whose ℓ₂ norm exceeds `zero_tol`.
pub fn support_of(x: &SignalMatrix, zero_tol: f64) -> SupportSet {
    let tol = zero_tol.max(0.0);
    let indices = x
        .as_matrix()
        .row_iter()
        .enumerate()
        .filter(|(_, row)| row.norm() > tol)
        .map(|(i, _)| i)
        .collect();
    SupportSet { indices }
}

/// Tolerance used when classifying the support of a recovered signal.
pub fn recovered_zero_tol(x: &SignalMatrix) -> f64 {
    1e-12 * x.frobenius_norm()
}

pub fn min_support_row_norm(x: &SignalMatrix) -> Result<RowNormProfile> {
    let norms: Vec<f64> = x.as_matrix().row_iter().map(|r| r.norm()).collect();
    let t0 = norms
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .min_by(f64::total_cmp)
        .ok_or(Error::EmptySupport)?;
    Ok(RowNormProfile { norms, t0 })
}

/// `‖X̃ − X‖_F / ‖X‖_F`.
pub fn relative_frobenius_error(recovered: &SignalMatrix, truth: &SignalMatrix) -> Result<f64> {
    if recovered.nrows() != truth.nrows() || recovered.ncols() != truth.ncols() {
        return Err(Error::dims(
            "relative error",
            format!("{}x{}", truth.nrows(), truth.ncols()),
            format!("{}x{}", recovered.nrows(), recovered.ncols()),
        ));
    }
    let reference = truth.frobenius_norm();
    if reference == 0.0 {
        return Err(Error::ZeroReference("‖X‖_F"));
    }
    Ok((recovered.as_matrix() - truth.as_matrix()).norm() / reference)
}
