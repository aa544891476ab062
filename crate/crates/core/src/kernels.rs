//! Real positive-definite kernels applied to complex inputs.
//!
//! A complex vector `z = x + iy` in C^ν is identified with the real vector
//! `(x_1, .., x_ν, y_1, .., y_ν)` in R^2ν (all real parts first, then all
//! imaginary parts). Kernels are evaluated on that embedding. The feature map
//! into the complexified space is `Φ(z) = κ(z, ·) + i κ(z, ·)`, so inner
//! products and distances between mapped points reduce to real kernel values.

use std::ops::Deref;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A finite complex input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVec(Vec<Complex64>);

impl CVec {
    /// Builds a vector, rejecting empty input and NaN/Inf components.
    pub fn new(elements: Vec<Complex64>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("input vector must be non-empty".into()));
        }
        if let Some(j) = elements.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(format!("input vector component {j}")));
        }
        Ok(Self(elements))
    }

    /// Real-valued vector with zero imaginary parts.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Inverse of [`embed`]: the first half of `v` holds real parts, the
    /// second half imaginary parts.
    pub fn from_embedded(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "embedded vector length {} is odd",
                v.len()
            )));
        }
        let nu = v.len() / 2;
        Self::new((0..nu).map(|j| Complex64::new(v[j], v[nu + j])).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }
}

impl Deref for CVec {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

/// Maps `z` to `(Re z_1, .., Re z_ν, Im z_1, .., Im z_ν)`.
pub fn embed(z: &CVec) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.dim());
    out.extend(z.iter().map(|c| c.re));
    out.extend(z.iter().map(|c| c.im));
    out
}

/// A real positive-definite kernel on R^2ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealKernel {
    /// `exp(-‖x - y‖² / σ²)`.
    Gaussian { sigma: f64 },
    /// `(1 + xᵀy)^d`.
    Polynomial { degree: u32 },
}

impl RealKernel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let k = RealKernel::Gaussian { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn polynomial(degree: u32) -> Result<Self> {
        let k = RealKernel::Polynomial { degree };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RealKernel::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::InvalidParameter(format!("gaussian sigma must be positive, got {sigma}")),
            ),
            RealKernel::Polynomial { degree: 0 } => Err(Error::InvalidParameter(
                "polynomial degree must be at least 1".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Evaluates the kernel on two already-embedded real vectors of equal length.
    pub fn eval_embedded(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match *self {
            RealKernel::Gaussian { sigma } => {
                let dist_sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-dist_sq / (sigma * sigma)).exp()
            }
            RealKernel::Polynomial { degree } => {
                let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
                (1.0 + dot).powi(degree as i32)
            }
        }
    }

    /// `κ(z, z)` on an embedded vector. Exactly 1 for the Gaussian kernel.
    pub fn self_similarity_embedded(&self, x: &[f64]) -> f64 {
        match self {
            RealKernel::Gaussian { .. } => 1.0,
            RealKernel::Polynomial { .. } => self.eval_embedded(x, x),
        }
    }
}

fn check_dims(z1: &CVec, z2: &CVec) -> Result<()> {
    if z1.dim() != z2.dim() {
        return Err(Error::DimensionMismatch {
            expected: z1.dim(),
            found: z2.dim(),
        });
    }
    Ok(())
}

/// `κ(embed(z1), embed(z2))`.
pub fn kernel_eval(k: &RealKernel, z1: &CVec, z2: &CVec) -> Result<f64> {
    check_dims(z1, z2)?;
    Ok(k.eval_embedded(&embed(z1), &embed(z2)))
}

/// `⟨Φ(z1), Φ(z2)⟩` in the complexified space, which equals `2κ(z1, z2)`.
///
/// With `Φ(z) = φ + iφ` the cross terms `⟨φ2, φ1⟩ - ⟨φ1, φ2⟩` cancel, so the
/// result is always real.
pub fn complexified_inner(k: &RealKernel, z1: &CVec, z2: &CVec) -> Result<Complex64> {
    Ok(Complex64::new(2.0 * kernel_eval(k, z1, z2)?, 0.0))
}

/// `‖Φ(z1) - Φ(z2)‖²` in the complexified space.
pub fn feature_distance_sq(k: &RealKernel, z1: &CVec, z2: &CVec) -> Result<f64> {
    check_dims(z1, z2)?;
    let (x1, x2) = (embed(z1), embed(z2));
    Ok(distance_sq_from_values(
        k.self_similarity_embedded(&x1),
        k.eval_embedded(&x1, &x2),
        k.self_similarity_embedded(&x2),
    ))
}

/// `2(κ11 - 2κ12 + κ22)`, clamped at zero against round-off.
pub(crate) fn distance_sq_from_values(k11: f64, k12: f64, k22: f64) -> f64 {
    (2.0 * (k11 - 2.0 * k12 + k22)).max(0.0)
}
