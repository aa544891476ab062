//! Nonlinear channel equalization benchmark.
//!
//! A source `s(n) = A(√(1−ρ²) X(n) + iρ Y(n))` passes through
//!
//! ```text
//! t(n) = h0 s(n) + h1 s(n−1)
//! q(n) = t(n) + c2 t(n)² + c3 t(n)³
//! r(n) = q(n) + w(n)
//! ```
//!
//! with circular white Gaussian noise `w` at a given SNR. Equalizers learn to
//! recover `s(n)` from the receiver window `(r(n+D), .., r(n+D−L))`.
//!
//! Randomness: every run `k` of an experiment draws its source from the ChaCha8
//! stream `2k` and its noise from stream `2k + 1`, both keyed by the master
//! seed. Runs are therefore independent of scheduling and reproducible
//! bit-for-bit.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::cklms::{CklmsFilter, Novelty};
use crate::error::{Error, Result};
use crate::kernels::{CVec, RealKernel};
use crate::linear::{LinearCFilter, DEFAULT_EPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub h0: Complex64,
    pub h1: Complex64,
    pub c2: Complex64,
    pub c3: Complex64,
    pub snr_db: f64,
    pub rho: f64,
    pub amplitude: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            h0: Complex64::new(-0.9, 0.8),
            h1: Complex64::new(0.6, -0.7),
            c2: Complex64::new(0.1, 0.15),
            c3: Complex64::new(0.06, 0.05),
            snr_db: 15.0,
            rho: std::f64::consts::FRAC_1_SQRT_2,
            amplitude: 0.70,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidParameter(format!("snr_db must be finite, got {}", self.snr_db)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter("amplitude must be finite".into()));
        }
        if [self.h0, self.h1, self.c2, self.c3].iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("channel coefficients must be finite".into()));
        }
        Ok(())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("rho must lie in [0, 1], got {rho}")))
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `n` source symbols from a seeded generator.
pub fn generate_source(n: usize, rho: f64, amplitude: f64, seed: u64) -> Result<Vec<Complex64>> {
    generate_source_with(&mut ChaCha8Rng::seed_from_u64(seed), n, rho, amplitude)
}

pub fn generate_source_with<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    rho: f64,
    amplitude: f64,
) -> Result<Vec<Complex64>> {
    check_rho(rho)?;
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one source sample".into()));
    }
    let real_scale = amplitude * (1.0 - rho * rho).sqrt();
    let imag_scale = amplitude * rho;
    Ok((0..n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Complex64::new(real_scale * x, imag_scale * y)
        })
        .collect())
}

/// Channel output before noise: linear filter followed by the memoryless
/// nonlinearity. `s(−1)` is taken as zero.
pub fn noiseless_channel(cfg: &ChannelConfig, s: &[Complex64]) -> Vec<Complex64> {
    let mut prev = Complex64::new(0.0, 0.0);
    s.iter()
        .map(|&cur| {
            let t = cfg.h0 * cur + cfg.h1 * prev;
            prev = cur;
            t + cfg.c2 * t * t + cfg.c3 * t * t * t
        })
        .collect()
}

/// Noisy receiver signal `r = q + w` with `10 log10(mean|q|² / var w) = snr_db`.
pub fn run_channel(cfg: &ChannelConfig, s: &[Complex64], seed: u64) -> Result<Vec<Complex64>> {
    run_channel_with(&mut ChaCha8Rng::seed_from_u64(seed), cfg, s)
}

pub fn run_channel_with<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &ChannelConfig,
    s: &[Complex64],
) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if s.is_empty() {
        return Err(Error::InvalidParameter("source sequence is empty".into()));
    }
    let q = noiseless_channel(cfg, s);
    let signal_power = q.iter().map(|v| v.norm_sqr()).sum::<f64>() / q.len() as f64;
    let noise_var = signal_power / 10f64.powf(cfg.snr_db / 10.0);
    let component_std = (noise_var / 2.0).sqrt();
    Ok(q.into_iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v + Complex64::new(re, im) * component_std
        })
        .collect())
}

/// Receiver windows paired with the symbols they should recover.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizationDataset {
    pub inputs: Vec<CVec>,
    pub targets: Vec<Complex64>,
    pub filter_length: usize,
    pub delay: usize,
}

impl EqualizationDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Input dimension `L + 1`.
    pub fn dim(&self) -> usize {
        self.filter_length + 1
    }
}

/// `inputs[n] = (r(n+D), r(n+D−1), .., r(n+D−L))`, `targets[n] = s(n)`.
///
/// Receiver samples before the start of `r` are zero. Pairs whose newest
/// receiver index `n + D` falls past the end of `r` are dropped.
pub fn build_dataset(
    r: &[Complex64],
    s: &[Complex64],
    filter_length: usize,
    delay: usize,
) -> Result<EqualizationDataset> {
    let len = s.len().min(r.len().saturating_sub(delay));
    if len == 0 {
        return Err(Error::EmptyDataset(format!(
            "{} receiver and {} source samples with delay {delay}",
            r.len(),
            s.len()
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let inputs = (0..len)
        .map(|n| {
            let newest = n + delay;
            let window = (0..=filter_length)
                .map(|j| newest.checked_sub(j).map_or(zero, |idx| r[idx]))
                .collect();
            CVec::new(window)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EqualizationDataset {
        inputs,
        targets: s[..len].to_vec(),
        filter_length,
        delay,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Normalized complex kernel LMS.
    Cklms,
    Nclms,
    WlNclms,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Cklms, Algorithm::Nclms, Algorithm::WlNclms];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Cklms => "cklms",
            Algorithm::Nclms => "nclms",
            Algorithm::WlNclms => "wl-nclms",
        }
    }

    pub fn is_kernel(&self) -> bool {
        matches!(self, Algorithm::Cklms)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparameters {
    pub kernel: RealKernel,
    pub cklms_mu: f64,
    /// Divide the kernel step by `2κ(z, z)`.
    pub normalized: bool,
    pub novelty: Option<Novelty>,
    pub nclms_mu: f64,
    pub wl_nclms_mu: f64,
    pub eps: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            kernel: RealKernel::Gaussian { sigma: 5.0 },
            cklms_mu: 0.5,
            normalized: true,
            novelty: Some(Novelty {
                delta1: 0.15,
                delta2: 0.2,
            }),
            nclms_mu: 1.0 / 16.0,
            wl_nclms_mu: 1.0 / 16.0,
            eps: DEFAULT_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    pub filter_length: usize,
    pub delay: usize,
    /// Learning-curve length; `samples + delay` source symbols are drawn per run.
    pub samples: usize,
    pub runs: usize,
    pub seed: u64,
    pub hyper: Hyperparameters,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::default(),
            filter_length: 5,
            delay: 2,
            samples: 5000,
            runs: 20,
            seed: 0,
            hyper: Hyperparameters::default(),
        }
    }
}

/// Monte-Carlo mean of `|e(n)|²` with the mean dictionary size.
#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub algorithm: Algorithm,
    pub mse: Vec<f64>,
    pub mse_db: Vec<f64>,
    /// Mean dictionary size after step `n`; zero for linear filters.
    pub dict_size: Vec<f64>,
    /// Dictionary size at the end of each run.
    pub final_dict_sizes: Vec<usize>,
    pub runs: usize,
}

impl LearningCurve {
    pub fn len(&self) -> usize {
        self.mse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mse.is_empty()
    }

    /// Mean of `mse` over the final `window` iterations.
    pub fn steady_state_mse(&self, window: usize) -> f64 {
        let window = window.clamp(1, self.mse.len().max(1));
        let tail = &self.mse[self.mse.len().saturating_sub(window)..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn steady_state_db(&self, window: usize) -> f64 {
        to_db(self.steady_state_mse(window))
    }

    /// Trailing moving average of `mse` over `window` iterations (1 = unchanged).
    pub fn smoothed(&self, window: usize) -> LearningCurve {
        let window = window.max(1);
        if window == 1 {
            return self.clone();
        }
        let mut mse = Vec::with_capacity(self.mse.len());
        let mut acc = 0.0;
        for (n, v) in self.mse.iter().enumerate() {
            acc += v;
            if n >= window {
                acc -= self.mse[n - window];
            }
            mse.push(acc / (n + 1).min(window) as f64);
        }
        LearningCurve {
            mse_db: mse.iter().map(|&v| to_db(v)).collect(),
            mse,
            ..self.clone()
        }
    }
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}

enum Equalizer {
    Kernel(CklmsFilter),
    Linear(LinearCFilter),
}

impl Equalizer {
    fn new(algorithm: Algorithm, hyper: &Hyperparameters, dim: usize) -> Result<Self> {
        Ok(match algorithm {
            Algorithm::Cklms => Equalizer::Kernel(
                CklmsFilter::new(hyper.kernel, hyper.cklms_mu, dim)?
                    .normalized(hyper.normalized)
                    .with_novelty(hyper.novelty),
            ),
            Algorithm::Nclms => {
                Equalizer::Linear(LinearCFilter::nclms(dim, hyper.nclms_mu)?.with_eps(hyper.eps)?)
            }
            Algorithm::WlNclms => Equalizer::Linear(
                LinearCFilter::wl_nclms(dim, hyper.wl_nclms_mu)?.with_eps(hyper.eps)?,
            ),
        })
    }

    fn update(&mut self, x: &CVec, d: Complex64) -> Result<Complex64> {
        match self {
            Equalizer::Kernel(f) => Ok(f.step(x, d)?.error),
            Equalizer::Linear(f) => Ok(f.update(x, d)?.1),
        }
    }

    fn dictionary_size(&self) -> usize {
        match self {
            Equalizer::Kernel(f) => f.dictionary_size(),
            Equalizer::Linear(_) => 0,
        }
    }
}

struct RunTrace {
    sq_err: Vec<f64>,
    dict: Vec<usize>,
}

/// Source, noisy receiver signal and dataset of run `run`.
pub fn run_dataset(cfg: &ExperimentConfig, run: usize) -> Result<EqualizationDataset> {
    let mut source_rng = stream_rng(cfg.seed, 2 * run as u64);
    let mut noise_rng = stream_rng(cfg.seed, 2 * run as u64 + 1);
    let s = generate_source_with(
        &mut source_rng,
        cfg.samples + cfg.delay,
        cfg.channel.rho,
        cfg.channel.amplitude,
    )?;
    let r = run_channel_with(&mut noise_rng, &cfg.channel, &s)?;
    build_dataset(&r, &s, cfg.filter_length, cfg.delay)
}

fn run_once(
    algorithms: &[Algorithm],
    cfg: &ExperimentConfig,
    run: usize,
) -> Result<Vec<RunTrace>> {
    let data = run_dataset(cfg, run)?;
    algorithms
        .iter()
        .map(|&algorithm| {
            let mut eq = Equalizer::new(algorithm, &cfg.hyper, data.dim())?;
            let mut trace = RunTrace {
                sq_err: Vec::with_capacity(data.len()),
                dict: Vec::with_capacity(data.len()),
            };
            for (step, (x, &d)) in data.inputs.iter().zip(&data.targets).enumerate() {
                let e = match eq.update(x, d) {
                    Ok(e) => e,
                    Err(Error::NonFinite(_)) => Complex64::new(f64::NAN, f64::NAN),
                    Err(other) => return Err(other),
                };
                let sq = e.norm_sqr();
                if !sq.is_finite() {
                    return Err(Error::Diverged {
                        algorithm: algorithm.name().into(),
                        run,
                        step,
                        value: sq,
                    });
                }
                trace.sq_err.push(sq);
                trace.dict.push(eq.dictionary_size());
            }
            Ok(trace)
        })
        .collect()
}

/// Runs every algorithm on `cfg.runs` independent realizations and averages
/// the squared prior errors pointwise. Curves come back in the order of
/// `algorithms`.
pub fn run_experiment(algorithms: &[Algorithm], cfg: &ExperimentConfig) -> Result<Vec<LearningCurve>> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if algorithms.is_empty() {
        return Err(Error::InvalidParameter("no algorithm selected".into()));
    }
    cfg.channel.validate()?;

    let traces: Vec<Vec<RunTrace>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_once(algorithms, cfg, run))
        .collect::<Result<_>>()?;

    let runs = cfg.runs as f64;
    Ok(algorithms
        .iter()
        .enumerate()
        .map(|(a, &algorithm)| {
            let len = traces[0][a].sq_err.len();
            let mut mse = vec![0.0; len];
            let mut dict = vec![0.0; len];
            // summed in run order for reproducibility
            for run in &traces {
                let t = &run[a];
                for n in 0..len {
                    mse[n] += t.sq_err[n];
                    dict[n] += t.dict[n] as f64;
                }
            }
            mse.iter_mut().for_each(|v| *v /= runs);
            dict.iter_mut().for_each(|v| *v /= runs);
            LearningCurve {
                algorithm,
                mse_db: mse.iter().map(|&v| to_db(v)).collect(),
                mse,
                dict_size: dict,
                final_dict_sizes: traces
                    .iter()
                    .map(|run| run[a].dict.last().copied().unwrap_or(0))
                    .collect(),
                runs: cfg.runs,
            }
        })
        .collect())
}
