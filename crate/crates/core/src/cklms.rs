//! Complex kernel LMS with an optional novelty-criterion dictionary.
//!
//! The learned function is `w = Σ_k a_k κ(z_k, ·) + i Σ_k b_k κ(z_k, ·)` in the
//! complexification of the real RKHS of `κ`. Each step:
//!
//! ```text
//! ŷ   = Σ_k [(a_k + b_k) + i (a_k − b_k)] κ(z, z_k)
//! e   = d − ŷ
//! γ   = 2κ(z, z)  (normalized)  or  1
//! a   = μ (Re e + Im e) / γ
//! b   = μ (Re e − Im e) / γ
//! ```
//!
//! and the center `z` is stored with coefficient `c = a + ib` if the novelty
//! criterion admits it. Coefficients of stored centers are never revisited;
//! a rejected sample leaves the filter untouched.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{distance_sq_from_values, embed, CVec, RealKernel};

/// Novelty-criterion thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Novelty {
    /// Minimum feature-space distance from every stored center.
    pub delta1: f64,
    /// Minimum error magnitude.
    pub delta2: f64,
}

impl Novelty {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        for (name, v) in [("delta1", delta1), ("delta2", delta2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "novelty {name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(Self { delta1, delta2 })
    }
}

/// A stored center and its coefficient `c = a + ib`.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionaryEntry {
    center: CVec,
    coeff: Complex64,
    embedded: Vec<f64>,
}

impl DictionaryEntry {
    pub fn new(center: CVec, coeff: Complex64) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::NonFinite("dictionary coefficient".into()));
        }
        let embedded = embed(&center);
        Ok(Self {
            center,
            coeff,
            embedded,
        })
    }

    pub fn center(&self) -> &CVec {
        &self.center
    }

    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }

    /// `a_k` of the real/imaginary expansion.
    pub fn a(&self) -> f64 {
        self.coeff.re
    }

    /// `b_k` of the real/imaginary expansion.
    pub fn b(&self) -> f64 {
        self.coeff.im
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub prediction: Complex64,
    pub error: Complex64,
    pub admitted: bool,
}

#[derive(Debug, Clone)]
pub struct CklmsFilter {
    kernel: RealKernel,
    mu: f64,
    normalized: bool,
    novelty: Option<Novelty>,
    dim: usize,
    entries: Vec<DictionaryEntry>,
    samples_seen: usize,
}

impl CklmsFilter {
    /// Unnormalized CKLMS for inputs of dimension `dim`, without sparsification.
    pub fn new(kernel: RealKernel, mu: f64, dim: usize) -> Result<Self> {
        kernel.validate()?;
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size must be non-negative, got {mu}")));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("input dimension must be at least 1".into()));
        }
        Ok(Self {
            kernel,
            mu,
            normalized: false,
            novelty: None,
            dim,
            entries: Vec::new(),
            samples_seen: 0,
        })
    }

    /// Divides the step by `2κ(z, z)` (NCKLMS).
    pub fn normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }

    pub fn with_novelty(mut self, novelty: Option<Novelty>) -> Self {
        self.novelty = novelty;
        self
    }

    pub fn kernel(&self) -> &RealKernel {
        &self.kernel
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn novelty(&self) -> Option<Novelty> {
        self.novelty
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[DictionaryEntry] {
        &self.entries
    }

    pub fn dictionary_size(&self) -> usize {
        self.entries.len()
    }

    pub fn samples_seen(&self) -> usize {
        self.samples_seen
    }

    fn check_input(&self, z: &CVec) -> Result<()> {
        if z.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// `κ(z, z_k)` for every stored center.
    fn kernel_row(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| self.kernel.eval_embedded(x, &e.embedded))
            .collect()
    }

    fn output_from_row(&self, row: &[f64]) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (entry, &k) in self.entries.iter().zip(row) {
            let (a, b) = (entry.a(), entry.b());
            re += (a + b) * k;
            im += (a - b) * k;
        }
        Complex64::new(re, im)
    }

    /// Smallest feature-space distance from `x` to the dictionary, `+∞` when empty.
    fn min_distance(&self, x: &[f64], row: &[f64]) -> f64 {
        let k11 = self.kernel.self_similarity_embedded(x);
        self.entries
            .iter()
            .zip(row)
            .map(|(entry, &k12)| {
                let k22 = self.kernel.self_similarity_embedded(&entry.embedded);
                distance_sq_from_values(k11, k12, k22)
            })
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    fn admit_with_row(&self, x: &[f64], row: &[f64], e: Complex64) -> bool {
        let Some(novelty) = self.novelty else {
            return true;
        };
        if self.min_distance(x, row) < novelty.delta1 {
            return false;
        }
        e.norm() >= novelty.delta2
    }

    /// Filter output `⟨Φ(z), w⟩` for the current dictionary.
    pub fn predict(&self, z: &CVec) -> Result<Complex64> {
        self.check_input(z)?;
        let x = embed(z);
        Ok(self.output_from_row(&self.kernel_row(&x)))
    }

    /// Whether the novelty criterion would add `z` given error `e`.
    pub fn admit(&self, z: &CVec, e: Complex64) -> Result<bool> {
        self.check_input(z)?;
        let x = embed(z);
        Ok(self.admit_with_row(&x, &self.kernel_row(&x), e))
    }

    /// Predicts, computes the error and, if admitted, appends `z` to the dictionary.
    pub fn step(&mut self, z: &CVec, d: Complex64) -> Result<StepOutcome> {
        self.check_input(z)?;
        if !d.is_finite() {
            return Err(Error::NonFinite("desired sample".into()));
        }
        let x = embed(z);
        let row = self.kernel_row(&x);
        let prediction = self.output_from_row(&row);
        let error = d - prediction;
        if !error.is_finite() {
            return Err(Error::NonFinite("prediction error".into()));
        }

        let admitted = self.admit_with_row(&x, &row, error);
        if admitted {
            let gamma = if self.normalized {
                2.0 * self.kernel.self_similarity_embedded(&x)
            } else {
                1.0
            };
            let a = self.mu * (error.re + error.im) / gamma;
            let b = self.mu * (error.re - error.im) / gamma;
            let coeff = Complex64::new(a, b);
            if !coeff.is_finite() {
                return Err(Error::NonFinite("new dictionary coefficient".into()));
            }
            self.entries.push(DictionaryEntry {
                center: z.clone(),
                coeff,
                embedded: x,
            });
        }
        self.samples_seen += 1;

        Ok(StepOutcome {
            prediction,
            error,
            admitted,
        })
    }

    /// One line per entry: the embedded center (real parts, then imaginary
    /// parts) followed by `Re c` and `Im c`, separated by single spaces.
    pub fn dictionary_to_text(&self) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            for v in entry.embedded.iter().chain([&entry.coeff.re, &entry.coeff.im]) {
                if !out.is_empty() && !out.ends_with('\n') {
                    out.push(' ');
                }
                write!(out, "{v}").expect("writing to a String cannot fail");
            }
            out.push('\n');
        }
        out
    }

    /// Rebuilds a filter around a dictionary previously written by
    /// [`CklmsFilter::dictionary_to_text`].
    pub fn with_dictionary(mut self, entries: Vec<DictionaryEntry>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| e.center.dim() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: e.center.dim(),
            });
        }
        self.samples_seen = self.samples_seen.max(entries.len());
        self.entries = entries;
        Ok(self)
    }
}

/// Parses the text format of [`CklmsFilter::dictionary_to_text`]. Blank lines
/// are skipped.
pub fn parse_dictionary(text: &str) -> Result<Vec<DictionaryEntry>> {
    let mut entries = Vec::new();
    let mut width = None;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
        if values.len() < 4 || values.len() % 2 != 0 {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("expected 2ν + 2 values with ν ≥ 1, got {}", values.len()),
            });
        }
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(Error::Parse {
                line: line_no,
                reason: "center dimension differs from previous lines".into(),
            });
        }
        let n = values.len();
        let center = CVec::from_embedded(&values[..n - 2]).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let coeff = Complex64::new(values[n - 2], values[n - 1]);
        entries.push(DictionaryEntry::new(center, coeff).map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?);
    }
    Ok(entries)
}
