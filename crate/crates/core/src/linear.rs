//! Normalized complex LMS and its widely-linear variant.
//!
//! Output convention is `y = hᴴx` (plus `gᴴx*` for the widely-linear filter),
//! so the conjugate Wirtinger gradient of `|d - y|²` with respect to `h` is
//! `-e*·x` and the update moves along `e*·x`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::CVec;

/// Default regularizer added to the input power.
pub const DEFAULT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCFilter {
    h: Vec<Complex64>,
    /// Conjugate-branch weights; present only for the widely-linear filter.
    g: Option<Vec<Complex64>>,
    mu: f64,
    eps: f64,
}

/// `Σ conj(w_j) x_j`
fn hermitian_dot(w: &[Complex64], x: &[Complex64]) -> Complex64 {
    w.iter().zip(x).map(|(w, x)| w.conj() * x).sum()
}

/// `Σ conj(w_j) conj(x_j)`
fn hermitian_dot_conj(w: &[Complex64], x: &[Complex64]) -> Complex64 {
    w.iter().zip(x).map(|(w, x)| (w * x).conj()).sum()
}

impl LinearCFilter {
    /// Strictly linear NCLMS with `len` taps.
    pub fn nclms(len: usize, mu: f64) -> Result<Self> {
        Self::build(len, mu, DEFAULT_EPS, false)
    }

    /// Widely-linear NCLMS with `len` taps on each branch.
    pub fn wl_nclms(len: usize, mu: f64) -> Result<Self> {
        Self::build(len, mu, DEFAULT_EPS, true)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        self.eps = eps;
        Ok(self)
    }

    /// Builds a filter from explicit initial weights.
    pub fn from_weights(
        h: Vec<Complex64>,
        g: Option<Vec<Complex64>>,
        mu: f64,
        eps: f64,
    ) -> Result<Self> {
        check_mu(mu)?;
        check_eps(eps)?;
        if h.is_empty() {
            return Err(Error::InvalidParameter("filter needs at least one tap".into()));
        }
        if let Some(g) = &g {
            if g.len() != h.len() {
                return Err(Error::DimensionMismatch {
                    expected: h.len(),
                    found: g.len(),
                });
            }
        }
        if h.iter().chain(g.iter().flatten()).any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("initial weights".into()));
        }
        Ok(Self { h, g, mu, eps })
    }

    fn build(len: usize, mu: f64, eps: f64, widely_linear: bool) -> Result<Self> {
        let zeros = vec![Complex64::new(0.0, 0.0); len];
        let g = widely_linear.then(|| zeros.clone());
        Self::from_weights(zeros, g, mu, eps)
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn is_widely_linear(&self) -> bool {
        self.g.is_some()
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.h
    }

    pub fn conjugate_weights(&self) -> Option<&[Complex64]> {
        self.g.as_deref()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn check_input(&self, x: &CVec) -> Result<()> {
        if x.dim() != self.h.len() {
            return Err(Error::DimensionMismatch {
                expected: self.h.len(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    pub fn predict(&self, x: &CVec) -> Result<Complex64> {
        self.check_input(x)?;
        let mut y = hermitian_dot(&self.h, x);
        if let Some(g) = &self.g {
            y += hermitian_dot_conj(g, x);
        }
        Ok(y)
    }

    /// One online step. Returns the pre-update prediction and the error.
    pub fn update(&mut self, x: &CVec, d: Complex64) -> Result<(Complex64, Complex64)> {
        if !d.is_finite() {
            return Err(Error::NonFinite("desired sample".into()));
        }
        let y = self.predict(x)?;
        let e = d - y;

        let power: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        // ‖x*‖² = ‖x‖² for the conjugate branch
        let denom = if self.g.is_some() { 2.0 * power } else { power } + self.eps;
        if denom == 0.0 {
            // only reachable with eps = 0 and x = 0, where e*·x vanishes anyway
            return Ok((y, e));
        }
        let step = e.conj() * (self.mu / denom);

        for (h, v) in self.h.iter_mut().zip(x.iter()) {
            *h += step * v;
        }
        if let Some(g) = &mut self.g {
            for (g, v) in g.iter_mut().zip(x.iter()) {
                *g += step * v.conj();
            }
        }
        Ok((y, e))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    // mu = 0 is allowed: it freezes the filter, which the benchmark uses as a reference.
    if mu >= 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("step size must be non-negative, got {mu}")))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("regularizer must be non-negative, got {eps}")))
    }
}
