//! Worked continuous models where sufficiency can be checked operationally:
//! inference from the reduced data must match inference from all of it.

pub mod gaussian;
pub mod qam;
pub mod triangle;

pub use gaussian::{gaussian_mc_mse, gaussian_posterior, GaussianHciConfig, GaussianPosterior, GaussianMse, Posterior, PosteriorMode};
pub use qam::{default_thresholds, qam_lr, qam_lr_from_magnitudes, qam_roc_compare, ConstellationPoint, QamConfig, QamRoc};
pub use triangle::{discretized_triangle_family, triangle_ratio_check, TriangleConfig, TriangleReport};
