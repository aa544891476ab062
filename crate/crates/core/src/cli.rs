//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a check or experiment fails, 2 on
//! argument or I/O errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{run_experiment, Algorithm, ExperimentConfig, Hyperparameters, LearningCurve};
use crate::cklms::Novelty;
use crate::error::{Error, Result};
use crate::kernels::RealKernel;
use crate::surrogate;
use crate::wirtinger::{check_gradient, property_suite, ScalarField, WirtingerPair};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const CSV_HEADER: &str = "n,algorithm,mse,mse_db,dict_size";

/// Iterations averaged for the steady-state summary.
pub const STEADY_STATE_WINDOW: usize = 500;

pub const DEFAULT_CKLMS_MU: f64 = 0.5;
pub const DEFAULT_LINEAR_MU: f64 = 1.0 / 16.0;

#[derive(Debug, Parser)]
#[command(name = "cklms", version, about = "Complex kernel LMS channel equalization experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the nonlinear channel equalization experiment and write learning curves as CSV.
    Equalize(EqualizeArgs),
    /// Verify the Wirtinger calculus rules and the CKLMS gradient numerically.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmChoice {
    Cklms,
    Nclms,
    WlNclms,
    All,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::Cklms => vec![Algorithm::Cklms],
            AlgorithmChoice::Nclms => vec![Algorithm::Nclms],
            AlgorithmChoice::WlNclms => vec![Algorithm::WlNclms],
            AlgorithmChoice::All => Algorithm::ALL.to_vec(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            AlgorithmChoice::Cklms => "cklms",
            AlgorithmChoice::Nclms => "nclms",
            AlgorithmChoice::WlNclms => "wl-nclms",
            AlgorithmChoice::All => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelChoice {
    Gaussian,
    Polynomial,
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("must be a finite non-negative number".into())
    }
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v = non_negative(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be positive".into())
    }
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let v = non_negative(s)?;
    if v <= 1.0 {
        Ok(v)
    } else {
        Err("must lie in [0, 1]".into())
    }
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e: std::num::ParseFloatError| e.to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct EqualizeArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub algorithm: AlgorithmChoice,
    #[arg(long, default_value = "5000", value_parser = positive_usize)]
    pub samples: usize,
    #[arg(long, default_value = "20", value_parser = positive_usize)]
    pub runs: usize,
    /// Circularity parameter; √2/2 gives a circular source.
    #[arg(long, default_value_t = std::f64::consts::FRAC_1_SQRT_2, value_parser = unit_interval)]
    pub rho: f64,
    #[arg(long = "snr-db", default_value = "15", value_parser = finite, allow_hyphen_values = true)]
    pub snr_db: f64,
    /// Step size of the selected algorithm. Not allowed with `--algorithm all`.
    #[arg(long, value_parser = non_negative)]
    pub mu: Option<f64>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub kernel: KernelChoice,
    #[arg(long, default_value = "5", value_parser = positive)]
    pub sigma: f64,
    #[arg(long, default_value = "2", value_parser = clap::value_parser!(u32).range(1..))]
    pub degree: u32,
    #[arg(long = "filter-length", default_value = "5")]
    pub filter_length: usize,
    #[arg(long, default_value = "2")]
    pub delay: usize,
    /// Distance threshold of the novelty criterion (0 with --novelty-d2 0 disables it).
    #[arg(long = "novelty-d1", default_value = "0.15", value_parser = non_negative)]
    pub novelty_d1: f64,
    /// Error threshold of the novelty criterion.
    #[arg(long = "novelty-d2", default_value = "0.2", value_parser = non_negative)]
    pub novelty_d2: f64,
    #[arg(long, default_value = "0")]
    pub seed: u64,
    /// Moving-average window applied to the written curves.
    #[arg(long, default_value = "1", value_parser = positive_usize)]
    pub smooth: usize,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl Default for EqualizeArgs {
    fn default() -> Self {
        match Cli::try_parse_from(["cklms", "equalize"]).expect("defaults parse").command {
            Command::Equalize(args) => args,
            Command::Gradcheck(_) => unreachable!(),
        }
    }
}

impl EqualizeArgs {
    pub fn kernel(&self) -> RealKernel {
        match self.kernel {
            KernelChoice::Gaussian => RealKernel::Gaussian { sigma: self.sigma },
            KernelChoice::Polynomial => RealKernel::Polynomial {
                degree: self.degree,
            },
        }
    }

    pub fn novelty(&self) -> Option<Novelty> {
        if self.novelty_d1 == 0.0 && self.novelty_d2 == 0.0 {
            None
        } else {
            Some(Novelty {
                delta1: self.novelty_d1,
                delta2: self.novelty_d2,
            })
        }
    }

    /// Per-algorithm steps after applying `--mu`.
    fn step_sizes(&self) -> Result<(f64, f64, f64)> {
        let (mut kernel, mut nclms, mut wl) = (DEFAULT_CKLMS_MU, DEFAULT_LINEAR_MU, DEFAULT_LINEAR_MU);
        if let Some(mu) = self.mu {
            match self.algorithm {
                AlgorithmChoice::All => {
                    return Err(Error::InvalidParameter(
                        "--mu cannot be combined with --algorithm all; each algorithm uses its own default step"
                            .into(),
                    ))
                }
                AlgorithmChoice::Cklms => kernel = mu,
                AlgorithmChoice::Nclms => nclms = mu,
                AlgorithmChoice::WlNclms => wl = mu,
            }
        }
        Ok((kernel, nclms, wl))
    }

    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let (cklms_mu, nclms_mu, wl_nclms_mu) = self.step_sizes()?;
        let defaults = ExperimentConfig::default();
        let kernel = self.kernel();
        kernel.validate()?;
        let cfg = ExperimentConfig {
            channel: crate::channel::ChannelConfig {
                snr_db: self.snr_db,
                rho: self.rho,
                ..defaults.channel
            },
            filter_length: self.filter_length,
            delay: self.delay,
            samples: self.samples,
            runs: self.runs,
            seed: self.seed,
            hyper: Hyperparameters {
                kernel,
                cklms_mu,
                novelty: self.novelty(),
                nclms_mu,
                wl_nclms_mu,
                ..defaults.hyper
            },
        };
        cfg.channel.validate()?;
        Ok(cfg)
    }

    /// One-line record of the effective configuration.
    pub fn describe(&self) -> Result<String> {
        let cfg = self.experiment_config()?;
        Ok(format!(
            "samples={} runs={} rho={} snr_db={} kernel={} sigma={} degree={} filter_length={} delay={} \
             novelty_d1={} novelty_d2={} seed={} smooth={} algorithm={} mu_cklms={} mu_nclms={} mu_wl_nclms={} \
             normalized={} eps={}",
            self.samples,
            self.runs,
            self.rho,
            self.snr_db,
            match self.kernel {
                KernelChoice::Gaussian => "gaussian",
                KernelChoice::Polynomial => "polynomial",
            },
            self.sigma,
            self.degree,
            self.filter_length,
            self.delay,
            self.novelty_d1,
            self.novelty_d2,
            self.seed,
            self.smooth,
            self.algorithm.name(),
            cfg.hyper.cklms_mu,
            cfg.hyper.nclms_mu,
            cfg.hyper.wl_nclms_mu,
            cfg.hyper.normalized,
            cfg.hyper.eps,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value = "0")]
    pub seed: u64,
}

/// Writes the learning curves: header, a `#` configuration line, then one row
/// per iteration and algorithm.
pub fn write_csv<W: Write>(mut w: W, curves: &[LearningCurve], config_line: &str) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    writeln!(w, "# {config_line}")?;
    let len = curves.iter().map(|c| c.len()).max().unwrap_or(0);
    for n in 0..len {
        for curve in curves.iter().filter(|c| n < c.len()) {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{}",
                n + 1,
                curve.algorithm.name(),
                curve.mse[n],
                curve.mse_db[n],
                curve.dict_size[n],
            )?;
        }
    }
    w.flush()
}

pub fn emit_csv(curves: &[LearningCurve], config_line: &str, path: &Path) -> Result<()> {
    if curves.is_empty() {
        return Err(Error::InvalidParameter("no learning curves to write".into()));
    }
    let file = File::create(path)?;
    write_csv(BufWriter::new(file), curves, config_line)?;
    Ok(())
}

/// Faults that can be injected into `gradcheck` to prove it detects errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradcheckFault {
    /// Negate the analytic CKLMS gradient.
    FlipKernelGradientSign,
}

/// Runs the worked example, the property suite and the CKLMS surrogate check,
/// printing one line per check. Returns whether everything passed.
pub fn run_gradcheck<W: Write + ?Sized>(seed: u64, fault: Option<GradcheckFault>, out: &mut W) -> Result<bool> {
    let mut all_ok = true;
    writeln!(out, "gradcheck seed={seed}")?;
    writeln!(out, "{:<10} {:<36} {:>7} {:>12}  status", "check", "description", "trials", "max_error")?;

    // z (z*)²: ∂/∂z = (z*)², ∂/∂z* = 2 z z*
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = ScalarField::new(1, |w: &[Complex64]| w[0] * w[0].conj() * w[0].conj());
    let analytic = |w: &[Complex64]| WirtingerPair {
        d_z: vec![w[0].conj() * w[0].conj()],
        d_zstar: vec![2.0 * w[0] * w[0].conj()],
    };
    let (mut worst, mut worst_at, mut failed) = (0.0f64, None, 0);
    for _ in 0..20 {
        let z = Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let r = check_gradient(&field, analytic, &[z], 1e-6)?;
        if !r.passed {
            failed += 1;
        }
        if r.max_error >= worst {
            worst = r.max_error;
            worst_at = Some(z);
        }
    }
    all_ok &= failed == 0;
    write_row(out, "example", "T = z (z*)^2", 20, worst, failed == 0)?;
    if failed > 0 {
        writeln!(out, "  witness: z = {}", worst_at.expect("20 trials ran"))?;
    }

    let suite = property_suite(seed)?;
    for o in &suite.outcomes {
        write_row(out, &format!("P{}", o.property), o.description, o.trials, o.max_error, o.passed)?;
        if let Some(w) = &o.witness {
            writeln!(out, "  witness: {w:?}")?;
        }
    }
    all_ok &= suite.all_passed();

    let flip = fault == Some(GradcheckFault::FlipKernelGradientSign);
    let grad = surrogate::gradient_trials(seed, 50, 2, 1e-5, flip)?;
    write_row(out, "cklms", "grad_w* |d - <Phi(z), w>|^2 = -e* Phi", grad.trials, grad.max_error, grad.passed())?;
    if let Some(worst) = grad.worst.as_ref().filter(|_| !grad.passed()) {
        writeln!(
            out,
            "  witness: best step {:e}, worst d/dz* error {:e}",
            worst.best_step,
            worst.d_zstar_errors.iter().copied().fold(0.0, f64::max)
        )?;
    }
    all_ok &= grad.passed();

    writeln!(out, "{}", if all_ok { "ALL PASSED" } else { "FAILED" })?;
    Ok(all_ok)
}

fn write_row<W: Write + ?Sized>(
    out: &mut W,
    check: &str,
    description: &str,
    trials: usize,
    max_error: f64,
    passed: bool,
) -> io::Result<()> {
    writeln!(
        out,
        "{check:<10} {description:<36} {trials:>7} {max_error:>12.3e}  {}",
        if passed { "pass" } else { "FAIL" }
    )
}

/// Parses `args` (including the program name) and runs the selected command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };

    match cli.command {
        Command::Equalize(args) => equalize(&args, stdout, stderr),
        Command::Gradcheck(args) => match run_gradcheck(args.seed, None, stdout) {
            Ok(true) => EXIT_OK,
            Ok(false) => EXIT_FAILURE,
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_USAGE
            }
        },
    }
}

fn equalize(args: &EqualizeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (cfg, description) = match args.experiment_config().and_then(|c| Ok((c, args.describe()?))) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    let curves = match run_experiment(&args.algorithm.algorithms(), &cfg) {
        Ok(c) => c,
        Err(e @ Error::InvalidParameter(_)) | Err(e @ Error::EmptyDataset(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let _ = writeln!(stderr, "experiment failed: {e}");
            return EXIT_FAILURE;
        }
    };

    for c in &curves {
        let _ = writeln!(
            stderr,
            "{:<9} steady-state MSE {:8.3} dB (last {} iterations), final dictionary {:.1}",
            c.algorithm.name(),
            c.steady_state_db(STEADY_STATE_WINDOW),
            STEADY_STATE_WINDOW.min(c.len()),
            c.dict_size.last().copied().unwrap_or(0.0),
        );
    }

    let smoothed: Vec<LearningCurve> = curves.iter().map(|c| c.smoothed(args.smooth)).collect();
    let written = match &args.output {
        Some(path) => emit_csv(&smoothed, &description, path),
        None => write_csv(&mut *stdout, &smoothed, &description).map_err(Error::from),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write CSV: {e}");
            EXIT_USAGE
        }
    }
}
