//! Sufficiency checks and data-reduction tools for decentralized inference.
//!
//! The discrete side works on finite parametric families p(obs | θ) and
//! decides sufficiency through conditional mutual information, builds minimal
//! (conditional) sufficient statistics from likelihood ratios, and compares
//! source-coding rate regions and rate-distortion curves before and after a
//! sufficient reduction. The continuous side reproduces three worked models
//! (correlated Gaussians, QAM detection under Rayleigh fading, and a
//! triangular support family) in closed form and by simulation.

pub mod cli;
pub mod continuous;
pub mod error;
pub mod families;
pub mod model;
pub mod modelfile;
pub mod statistic;
pub mod rng;
pub mod source_coding;
pub mod sufficiency;

pub use error::{Error, Result};
pub use model::{Alphabet, Channel, JointDistribution, ParamFamily};
pub use statistic::Statistic;
