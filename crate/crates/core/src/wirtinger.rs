//! Numerical Wirtinger derivatives of scalar functions of complex vectors.
//!
//! For `T(w) = u(x, y) + i v(x, y)` with `w = x + iy`,
//!
//! ```text
//! ∂T/∂z  = ½(u_x + v_y) + ½i(v_x − u_y)
//! ∂T/∂z* = ½(u_x − v_y) + ½i(v_x + u_y)
//! ```
//!
//! Each partial is a central difference along one real coordinate, so a field
//! of dimension `m` costs `4m` evaluations per step size.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Steps tried by [`check_gradient`]; the best one is kept.
pub const STEP_LADDER: [f64; 3] = [1e-4, 1e-5, 1e-6];

/// Step used inside the property suite.
const SUITE_STEP: f64 = 1e-5;

/// A map `C^m -> C` together with its input dimension.
pub struct ScalarField<F> {
    dim: usize,
    eval: F,
}

impl<F> ScalarField<F>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    pub fn new(dim: usize, eval: F) -> Self {
        Self { dim, eval }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn evaluate(&self, w: &[Complex64]) -> Complex64 {
        (self.eval)(w)
    }
}

/// The ℝ-derivative and conjugate ℝ-derivative at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct WirtingerPair {
    pub d_z: Vec<Complex64>,
    pub d_zstar: Vec<Complex64>,
}

impl WirtingerPair {
    pub fn dim(&self) -> usize {
        self.d_z.len()
    }
}

/// Central-difference Wirtinger derivatives of `f` at `w` with step `h`.
pub fn numeric_wirtinger<F>(f: &ScalarField<F>, w: &[Complex64], h: f64) -> Result<WirtingerPair>
where
    F: Fn(&[Complex64]) -> Complex64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {h}")));
    }
    if w.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: w.len(),
        });
    }

    let mut probe = w.to_vec();
    let mut d_z = Vec::with_capacity(w.len());
    let mut d_zstar = Vec::with_capacity(w.len());

    let eval_at = |probe: &[Complex64], what: &str, j: usize| -> Result<Complex64> {
        let t = f.evaluate(probe);
        if t.is_finite() {
            Ok(t)
        } else {
            Err(Error::NonFinite(format!(
                "field evaluation at {what} perturbation of coordinate {j}"
            )))
        }
    };

    for j in 0..w.len() {
        let base = w[j];

        probe[j] = base + Complex64::new(h, 0.0);
        let plus_x = eval_at(&probe, "+re", j)?;
        probe[j] = base - Complex64::new(h, 0.0);
        let minus_x = eval_at(&probe, "-re", j)?;
        probe[j] = base + Complex64::new(0.0, h);
        let plus_y = eval_at(&probe, "+im", j)?;
        probe[j] = base - Complex64::new(0.0, h);
        let minus_y = eval_at(&probe, "-im", j)?;
        probe[j] = base;

        // u_x + i v_x and u_y + i v_y
        let dx = (plus_x - minus_x) / (2.0 * h);
        let dy = (plus_y - minus_y) / (2.0 * h);
        let i = Complex64::i();
        d_z.push((dx - i * dy) * 0.5);
        d_zstar.push((dx + i * dy) * 0.5);
    }

    Ok(WirtingerPair { d_z, d_zstar })
}

/// Per-coordinate error `|a - b| / max(1, |b|)`: relative for large
/// reference values, absolute near zero.
fn scaled_error(actual: Complex64, reference: Complex64) -> f64 {
    (actual - reference).norm() / reference.norm().max(1.0)
}

fn max_scaled_error(actual: &[Complex64], reference: &[Complex64]) -> f64 {
    actual
        .iter()
        .zip(reference)
        .map(|(a, r)| scaled_error(*a, *r))
        .fold(0.0, f64::max)
}

/// Outcome of comparing an analytic gradient against finite differences.
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub passed: bool,
    pub tolerance: f64,
    /// Step of the ladder that gave the smallest error.
    pub best_step: f64,
    /// Max-norm error over both derivatives at `best_step`.
    pub max_error: f64,
    pub d_z_errors: Vec<f64>,
    pub d_zstar_errors: Vec<f64>,
}

/// Checks `analytic` against [`numeric_wirtinger`] over [`STEP_LADDER`].
pub fn check_gradient<F, A>(
    f: &ScalarField<F>,
    analytic: A,
    w: &[Complex64],
    tol: f64,
) -> Result<GradientReport>
where
    F: Fn(&[Complex64]) -> Complex64,
    A: Fn(&[Complex64]) -> WirtingerPair,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let expected = analytic(w);
    if expected.d_z.len() != f.dim() || expected.d_zstar.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: expected.dim(),
        });
    }

    let mut best: Option<GradientReport> = None;
    for &h in &STEP_LADDER {
        let numeric = numeric_wirtinger(f, w, h)?;
        let d_z_errors: Vec<f64> = numeric
            .d_z
            .iter()
            .zip(&expected.d_z)
            .map(|(a, r)| scaled_error(*a, *r))
            .collect();
        let d_zstar_errors: Vec<f64> = numeric
            .d_zstar
            .iter()
            .zip(&expected.d_zstar)
            .map(|(a, r)| scaled_error(*a, *r))
            .collect();
        let max_error = d_z_errors
            .iter()
            .chain(&d_zstar_errors)
            .copied()
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| max_error < b.max_error) {
            best = Some(GradientReport {
                passed: max_error < tol,
                tolerance: tol,
                best_step: h,
                max_error,
                d_z_errors,
                d_zstar_errors,
            });
        }
    }
    Ok(best.expect("step ladder is non-empty"))
}

/// Result of one numerically restated calculus property.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub property: u8,
    pub description: &'static str,
    pub trials: usize,
    pub max_error: f64,
    pub passed: bool,
    /// The point with the largest error, reported when the property fails.
    pub witness: Option<Vec<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub tolerance: f64,
    pub outcomes: Vec<PropertyOutcome>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

pub const PROPERTY_DESCRIPTIONS: [&str; 11] = [
    "holomorphic => d/dz* = 0",
    "anti-holomorphic => d/dz = 0",
    "(dT/dz)* = d(T*)/dz*",
    "(dT/dz*)* = d(T*)/dz",
    "real T => (dT/dz)* = dT/dz*",
    "first-order Taylor expansion",
    "T = <f, w> => (w*, 0)",
    "T = <w, f> => (0, w)",
    "T = <f*, w> => (0, w*)",
    "T = <w, f*> => (w, 0)",
    "product rule for holomorphic R*S",
];

/// `Σ_j a_j conj(b_j)`: linear in the first argument.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn conj_all(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z.conj()).collect()
}

/// A random polynomial in `w` and `w*`: `Σ c Π w_j^p_j (w_j*)^q_j`.
#[derive(Debug, Clone)]
struct RandomPoly {
    terms: Vec<(Complex64, Vec<u32>, Vec<u32>)>,
}

impl RandomPoly {
    /// `holomorphic` restricts to monomials in `w` only.
    fn sample(rng: &mut ChaCha8Rng, dim: usize, holomorphic: bool) -> Self {
        let n_terms = rng.random_range(1..=4);
        let terms = (0..n_terms)
            .map(|_| {
                let coeff = random_complex(rng);
                let mut p = vec![0u32; dim];
                let mut q = vec![0u32; dim];
                let degree = rng.random_range(1..=3);
                for _ in 0..degree {
                    let j = rng.random_range(0..dim);
                    if holomorphic || rng.random_bool(0.5) {
                        p[j] += 1;
                    } else {
                        q[j] += 1;
                    }
                }
                (coeff, p, q)
            })
            .collect();
        Self { terms }
    }

    fn eval(&self, w: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, p, q)| {
                w.iter().zip(p.iter().zip(q)).fold(*c, |acc, (z, (&pj, &qj))| {
                    acc * z.powu(pj) * z.conj().powu(qj)
                })
            })
            .sum()
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_cvec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| random_complex(rng)).collect()
}

fn numeric<F: Fn(&[Complex64]) -> Complex64>(
    dim: usize,
    f: F,
    w: &[Complex64],
) -> Result<WirtingerPair> {
    numeric_wirtinger(&ScalarField::new(dim, f), w, SUITE_STEP)
}

struct Tracker {
    property: u8,
    trials: usize,
    max_error: f64,
    worst: Option<Vec<Complex64>>,
}

impl Tracker {
    fn new(property: u8) -> Self {
        Self {
            property,
            trials: 0,
            max_error: 0.0,
            worst: None,
        }
    }

    fn record(&mut self, err: f64, w: &[Complex64]) {
        self.trials += 1;
        // NaN counts as a failure
        if !(err <= self.max_error) {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
            self.worst = Some(w.to_vec());
        }
    }

    fn finish(self, tol: f64) -> PropertyOutcome {
        let passed = self.max_error < tol;
        PropertyOutcome {
            property: self.property,
            description: PROPERTY_DESCRIPTIONS[self.property as usize - 1],
            trials: self.trials,
            max_error: self.max_error,
            passed,
            witness: if passed { None } else { self.worst },
        }
    }
}

/// Shrinking perturbation norms used to test the Taylor remainder.
const TAYLOR_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Runs the eleven calculus properties with 100 trials each at tolerance 1e-6.
pub fn property_suite(seed: u64) -> Result<SuiteReport> {
    property_suite_with(seed, 100, 1e-6)
}

/// Property suite with an explicit trial count and tolerance.
///
/// Every trial draws a dimension `m ∈ 1..=4`, a point and fresh random
/// polynomials or weights from a generator seeded with `seed`.
pub fn property_suite_with(seed: u64, trials: usize, tol: f64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trackers: Vec<Tracker> = (1..=11).map(Tracker::new).collect();

    for _ in 0..trials {
        let m = rng.random_range(1..=4);
        let w = random_cvec(&mut rng, m);

        // 1: holomorphic polynomial has vanishing conjugate derivative.
        let p = RandomPoly::sample(&mut rng, m, true);
        let d = numeric(m, |v| p.eval(v), &w)?;
        trackers[0].record(max_scaled_error(&d.d_zstar, &vec![Complex64::new(0.0, 0.0); m]), &w);

        // 2: the same polynomial in w* has vanishing ℝ-derivative.
        let d = numeric(m, |v| p.eval(&conj_all(v)), &w)?;
        trackers[1].record(max_scaled_error(&d.d_z, &vec![Complex64::new(0.0, 0.0); m]), &w);

        // 3, 4: conjugation rules on a general polynomial in w and w*.
        let t = RandomPoly::sample(&mut rng, m, false);
        let dt = numeric(m, |v| t.eval(v), &w)?;
        let dt_conj = numeric(m, |v| t.eval(v).conj(), &w)?;
        trackers[2].record(max_scaled_error(&conj_all(&dt.d_z), &dt_conj.d_zstar), &w);
        trackers[3].record(max_scaled_error(&conj_all(&dt.d_zstar), &dt_conj.d_z), &w);

        // 5: real-valued field |T|² + Re T.
        let dr = numeric(
            m,
            |v| {
                let x = t.eval(v);
                Complex64::new(x.norm_sqr() + x.re, 0.0)
            },
            &w,
        )?;
        trackers[4].record(max_scaled_error(&conj_all(&dr.d_z), &dr.d_zstar), &w);

        // 6: first-order expansion with the numeric derivatives of T.
        trackers[5].record(taylor_violation(&mut rng, &t, &dt, &w), &w);

        // 7-10: the four inner-product forms against a random w0.
        let w0 = random_cvec(&mut rng, m);
        let zeros = vec![Complex64::new(0.0, 0.0); m];
        let d7 = numeric(m, |f| inner(f, &w0), &w)?;
        trackers[6].record(
            max_scaled_error(&d7.d_z, &conj_all(&w0)).max(max_scaled_error(&d7.d_zstar, &zeros)),
            &w,
        );
        let d8 = numeric(m, |f| inner(&w0, f), &w)?;
        trackers[7].record(
            max_scaled_error(&d8.d_z, &zeros).max(max_scaled_error(&d8.d_zstar, &w0)),
            &w,
        );
        let d9 = numeric(m, |f| inner(&conj_all(f), &w0), &w)?;
        trackers[8].record(
            max_scaled_error(&d9.d_z, &zeros).max(max_scaled_error(&d9.d_zstar, &conj_all(&w0))),
            &w,
        );
        let d10 = numeric(m, |f| inner(&w0, &conj_all(f)), &w)?;
        trackers[9].record(
            max_scaled_error(&d10.d_z, &w0).max(max_scaled_error(&d10.d_zstar, &zeros)),
            &w,
        );

        // 11: product rule on two holomorphic polynomials.
        let r = RandomPoly::sample(&mut rng, m, true);
        let s = RandomPoly::sample(&mut rng, m, true);
        let d_rs = numeric(m, |v| r.eval(v) * s.eval(v), &w)?;
        let d_r = numeric(m, |v| r.eval(v), &w)?;
        let d_s = numeric(m, |v| s.eval(v), &w)?;
        let (r_w, s_w) = (r.eval(&w), s.eval(&w));
        let rule: Vec<Complex64> = d_r
            .d_z
            .iter()
            .zip(&d_s.d_z)
            .map(|(dr, ds)| dr * s_w + ds * r_w)
            .collect();
        trackers[10].record(max_scaled_error(&d_rs.d_z, &rule), &w);
    }

    Ok(SuiteReport {
        seed,
        tolerance: tol,
        outcomes: trackers.into_iter().map(|t| t.finish(tol)).collect(),
    })
}

/// How far the Taylor remainder is from vanishing faster than `‖h‖`.
///
/// For each rung `t_k` the ratio `ρ_k = |T(w+h) − T(w) − ⟨h, (∂T/∂z)*⟩ − ⟨h*, (∂T/∂z*)*⟩| / ‖h‖`
/// must satisfy `ρ_k ≤ 2 (t_k / t_0) ρ_0`; the returned value is the worst
/// excess over that bound. A wrong derivative leaves a floor in `ρ_k` and
/// shows up as a positive excess.
fn taylor_violation(
    rng: &mut ChaCha8Rng,
    t: &RandomPoly,
    d: &WirtingerPair,
    w: &[Complex64],
) -> f64 {
    let m = w.len();
    let dir = random_cvec(rng, m);
    let norm = inner(&dir, &dir).re.sqrt();
    let base = t.eval(w);
    let d_z_conj = conj_all(&d.d_z);
    let d_zstar_conj = conj_all(&d.d_zstar);

    let ratios: Vec<f64> = TAYLOR_LADDER
        .iter()
        .map(|&scale| {
            let h: Vec<Complex64> = dir.iter().map(|x| x * (scale / norm)).collect();
            let shifted: Vec<Complex64> = w.iter().zip(&h).map(|(a, b)| a + b).collect();
            let linear = inner(&h, &d_z_conj) + inner(&conj_all(&h), &d_zstar_conj);
            (t.eval(&shifted) - base - linear).norm() / scale
        })
        .collect();

    ratios
        .iter()
        .zip(&TAYLOR_LADDER)
        .skip(1)
        .map(|(rho, scale)| rho - 2.0 * (scale / TAYLOR_LADDER[0]) * ratios[0])
        .fold(0.0, f64::max)
}
