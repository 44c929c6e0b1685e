//! File formats: dense matrices as headerless CSV and experiment
//! configurations as TOML.
//!
//! Matrix files are UTF-8, one row per line, comma-separated decimal
//! literals. The writer picks the shorter of the plain and exponent forms of
//! Rust's shortest round-trip representation, so `read(write(A)) == A` bit for
//! bit for every finite `A`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::guarantees::GuaranteeMode;
use crate::harness::{Checks, ExperimentConfig, SweepPoint};
use crate::model::SensingMatrix;
use crate::perturb::{InstanceConfig, MatrixEnsemble, MeasurementNoise, DEFAULT_FRAME_ITERATIONS};
use crate::rip::DEFAULT_SUBSET_BUDGET;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Shortest decimal literal that parses back to exactly `v`.
pub fn format_f64(v: f64) -> String {
    let plain = format!("{v}");
    let exp = format!("{v:e}");
    if exp.len() < plain.len() {
        exp
    } else {
        plain
    }
}

pub fn format_matrix(a: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            if c > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(a[(r, c)]));
        }
        out.push('\n');
    }
    out
}

/// Parses matrix text. Blank lines are rejected except for a single
/// trailing newline. Line and column numbers in errors are 1-based; the
/// column is the field index.
pub fn parse_matrix(text: &str) -> Result<DMatrix<f64>> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let body = body.strip_suffix('\r').unwrap_or(body);
    if body.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty matrix file".into(),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (li, raw) in body.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let mut row = Vec::new();
        for (ci, field) in line.split(',').enumerate() {
            let parse_err = |message: String| Error::Parse {
                line: li + 1,
                column: ci + 1,
                message,
            };
            let f = field.trim();
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(format!("not a number: {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value {f:?}")));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: li + 1,
                    column: row.len().min(first.len()) + 1,
                    message: format!("row has {} fields, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    let ncols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), ncols, |r, c| rows[r][c]))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_matrix(&text)
}

pub fn write_matrix(a: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(a)).map_err(|e| io_err(path, e))
}

pub fn write_text(text: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Experiment configuration file (TOML). Unknown keys are rejected.
///
/// ```toml
/// m = 24                      # required
/// n = 32                      # required
/// l = 3                       # required, number of measurement vectors
/// k = 2                       # required, row sparsity
/// trials = 200                # default 200
/// master_seed = 0             # default 0
/// signal_row_norm_min = 1.0   # default 1.0
/// eps0 = [0.0]                # default [0.0]; sweep is eps0 x epsb
/// epsb = [0.005, 0.01]        # default [0.0]
///
/// [ensemble]                  # default kind = "gaussian"
/// kind = "gaussian"           # | "identity-embedded" (coherence, default 0.0)
///                             # | "low-coherence-frame" (iterations, default 200)
///                             # | "user-supplied" (path, relative to this file)
///
/// [measurement_noise]         # default kind = "gaussian"
/// kind = "column-skewed"      # column (required), share (required)
///
/// [checks]
/// ric = true                  # default true
/// mode = "general"            # default "general"
/// lemma4 = false              # default false
/// zero_rows = true            # default true
/// delta_h = true              # default true
/// subset_budget = 2000000     # default 2000000
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    pub m: usize,
    pub n: usize,
    pub l: usize,
    pub k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_row_norm_min")]
    pub signal_row_norm_min: f64,
    #[serde(default = "default_levels")]
    pub eps0: Vec<f64>,
    #[serde(default = "default_levels")]
    pub epsb: Vec<f64>,
    #[serde(default)]
    pub ensemble: EnsembleFile,
    #[serde(default)]
    pub measurement_noise: MeasurementNoiseFile,
    #[serde(default)]
    pub checks: ChecksFile,
}

fn default_trials() -> usize {
    200
}

fn default_row_norm_min() -> f64 {
    1.0
}

fn default_levels() -> Vec<f64> {
    vec![0.0]
}

fn default_frame_iterations() -> usize {
    DEFAULT_FRAME_ITERATIONS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnsembleFile {
    // struct variants so that stray keys are rejected
    Gaussian {},
    IdentityEmbedded {
        #[serde(default)]
        coherence: f64,
    },
    LowCoherenceFrame {
        #[serde(default = "default_frame_iterations")]
        iterations: usize,
    },
    UserSupplied {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasurementNoiseFile {
    Gaussian {},
    ColumnSkewed { column: usize, share: f64 },
}

impl Default for EnsembleFile {
    fn default() -> Self {
        EnsembleFile::Gaussian {}
    }
}

impl Default for MeasurementNoiseFile {
    fn default() -> Self {
        MeasurementNoiseFile::Gaussian {}
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksFile {
    #[serde(default = "yes")]
    pub ric: bool,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub lemma4: bool,
    #[serde(default = "yes")]
    pub zero_rows: bool,
    #[serde(default = "yes")]
    pub delta_h: bool,
    #[serde(default = "default_budget")]
    pub subset_budget: u64,
}

impl Default for ChecksFile {
    fn default() -> Self {
        Self {
            ric: true,
            mode: default_mode(),
            lemma4: false,
            zero_rows: true,
            delta_h: true,
            subset_budget: DEFAULT_SUBSET_BUDGET,
        }
    }
}

fn yes() -> bool {
    true
}

fn default_mode() -> String {
    "general".into()
}

fn default_budget() -> u64 {
    DEFAULT_SUBSET_BUDGET
}

pub fn parse_config(text: &str) -> Result<ExperimentConfigFile> {
    toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map(|s| line_col(text, s.start)).unwrap_or((0, 0));
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.len(), |p| before.len() - p - 1)
        + 1;
    (line, column)
}

impl ExperimentConfigFile {
    /// Builds the run configuration; relative matrix paths resolve against
    /// `base_dir`.
    pub fn into_experiment(self, base_dir: &Path) -> Result<ExperimentConfig> {
        let ensemble = match self.ensemble {
            EnsembleFile::Gaussian {} => MatrixEnsemble::Gaussian,
            EnsembleFile::IdentityEmbedded { coherence } => {
                MatrixEnsemble::IdentityEmbedded { coherence }
            }
            EnsembleFile::LowCoherenceFrame { iterations } => {
                MatrixEnsemble::LowCoherenceFrame { iterations }
            }
            EnsembleFile::UserSupplied { path } => {
                let p = if path.is_absolute() {
                    path
                } else {
                    base_dir.join(path)
                };
                MatrixEnsemble::UserSupplied(SensingMatrix::new(read_matrix(p)?)?)
            }
        };
        let measurement_noise = match self.measurement_noise {
            MeasurementNoiseFile::Gaussian {} => MeasurementNoise::Gaussian,
            MeasurementNoiseFile::ColumnSkewed { column, share } => {
                MeasurementNoise::ColumnSkewed { column, share }
            }
        };
        let mode: GuaranteeMode = self.checks.mode.parse()?;
        let sweep = self
            .eps0
            .iter()
            .flat_map(|&eps0| self.epsb.iter().map(move |&epsb| SweepPoint { eps0, epsb }))
            .collect();
        let cfg = ExperimentConfig {
            instance: InstanceConfig {
                m: self.m,
                n: self.n,
                l: self.l,
                k: self.k,
                signal_row_norm_min: self.signal_row_norm_min,
                ensemble,
                seed: 0,
            },
            sweep,
            measurement_noise,
            trials: self.trials,
            master_seed: self.master_seed,
            checks: Checks {
                ric: self.checks.ric,
                mode,
                lemma4: self.checks.lemma4,
                zero_rows: self.checks.zero_rows,
                delta_h: self.checks.delta_h,
                subset_budget: self.checks.subset_budget,
            },
        };
        cfg.instance.validate()?;
        Ok(cfg)
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text)?.into_experiment(base)
}
