//! Explicit-feature surrogate of the complexified RKHS.
//!
//! For the degree-2 polynomial kernel on R^n the feature map
//! `φ(x) = (1, √2 x_i, x_i x_j)` (all ordered pairs `i, j`) satisfies
//! `φ(x)·φ(y) = (1 + xᵀy)²`. Complexifying gives `Φ(z) = φ + iφ` in C^D, where
//! the complexified inner product is the ordinary `Σ a_j conj(b_j)`. This lets
//! the CKLMS gradient `∇_{w*} |d − ⟨Φ(z), w⟩|² = −e*·Φ(z)` be checked against
//! finite differences.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::kernels::{embed, CVec};
use crate::wirtinger::{check_gradient, inner, GradientReport, ScalarField, WirtingerPair};

/// Explicit features of `(1 + xᵀy)²`.
pub fn poly2_features(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut phi = Vec::with_capacity(1 + n + n * n);
    phi.push(1.0);
    phi.extend(x.iter().map(|v| std::f64::consts::SQRT_2 * v));
    for a in x {
        for b in x {
            phi.push(a * b);
        }
    }
    phi
}

/// `Φ(z) = φ(embed z) + i φ(embed z)`.
pub fn complexified_features(z: &CVec) -> Vec<Complex64> {
    poly2_features(&embed(z))
        .into_iter()
        .map(|v| Complex64::new(v, v))
        .collect()
}

/// `|d − ⟨Φ, w⟩|²`
pub fn instantaneous_cost(w: &[Complex64], phi: &[Complex64], d: Complex64) -> f64 {
    (d - inner(phi, w)).norm_sqr()
}

/// `∂/∂w = −e·Φ*` and `∂/∂w* = −e*·Φ` for `e = d − ⟨Φ, w⟩`.
pub fn cost_gradient(w: &[Complex64], phi: &[Complex64], d: Complex64) -> WirtingerPair {
    let e = d - inner(phi, w);
    WirtingerPair {
        d_z: phi.iter().map(|p| -e * p.conj()).collect(),
        d_zstar: phi.iter().map(|p| -e.conj() * p).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct SurrogateReport {
    pub trials: usize,
    pub failures: usize,
    pub max_error: f64,
    /// Report of the worst trial.
    pub worst: Option<GradientReport>,
}

impl SurrogateReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Checks the analytic CKLMS gradient at `trials` random `(w, z, d)` with
/// `z ∈ C^input_dim`. `flip_sign` negates the analytic gradient, which must
/// then be caught.
pub fn gradient_trials(
    seed: u64,
    trials: usize,
    input_dim: usize,
    tol: f64,
    flip_sign: bool,
) -> Result<SurrogateReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = move || -> f64 { rng.sample(StandardNormal) };
    let mut report = SurrogateReport {
        trials,
        failures: 0,
        max_error: 0.0,
        worst: None,
    };

    for _ in 0..trials {
        let z = CVec::new(
            (0..input_dim)
                .map(|_| Complex64::new(gauss(), gauss()) * 0.5)
                .collect(),
        )?;
        let phi = complexified_features(&z);
        let w: Vec<Complex64> = (0..phi.len())
            .map(|_| Complex64::new(gauss(), gauss()) * 0.1)
            .collect();
        let d = Complex64::new(gauss(), gauss());

        let field = ScalarField::new(phi.len(), |v: &[Complex64]| {
            Complex64::new(instantaneous_cost(v, &phi, d), 0.0)
        });
        let analytic = |v: &[Complex64]| {
            let mut g = cost_gradient(v, &phi, d);
            if flip_sign {
                g.d_z.iter_mut().chain(g.d_zstar.iter_mut()).for_each(|x| *x = -*x);
            }
            g
        };
        let trial = check_gradient(&field, analytic, &w, tol)?;
        if !trial.passed {
            report.failures += 1;
        }
        if report.worst.is_none() || trial.max_error > report.max_error {
            report.max_error = trial.max_error;
            report.worst = Some(trial);
        }
    }
    Ok(report)
}
