//! Online complex-valued kernel adaptive filtering.
//!
//! - [`kernels`]: real kernels on complex inputs and the complexified feature space.
//! - [`cklms`]: complex kernel LMS (plain and normalized) with novelty sparsification.
//! - [`linear`]: NCLMS and widely-linear NCLMS baselines.
//! - [`wirtinger`]: finite-difference Wirtinger derivatives and calculus checks.
//! - [`surrogate`]: explicit-feature model used to check the CKLMS gradient.
//! - [`channel`]: nonlinear channel equalization benchmark and learning curves.
//! - [`cli`]: the `cklms` command-line tool.

pub mod channel;
pub mod cklms;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod linear;
pub mod surrogate;
pub mod wirtinger;

pub use channel::{Algorithm, ChannelConfig, EqualizationDataset, ExperimentConfig, Hyperparameters, LearningCurve};
pub use cklms::{CklmsFilter, DictionaryEntry, Novelty, StepOutcome};
pub use error::{Error, Result};
pub use kernels::{CVec, RealKernel};
pub use linear::LinearCFilter;
pub use num_complex::Complex64;
pub use wirtinger::{ScalarField, WirtingerPair};
