//! Correlated Gaussian pairs sharing a common component.
//!
//! X_i = Z + U_i, Y_i = Z + V_i with Z ~ N(θ, ρ), U_i, V_i ~ N(0, 1−ρ), all
//! independent, and θ ~ N(μ₀, v₀). Every observation has variance 1 and any
//! two distinct observations have covariance ρ. The pair (ΣX_i, ΣY_i) is
//! sufficient for θ, so the posterior from the sums must equal the posterior
//! from all 2n values.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianHciConfig {
    pub n: usize,
    pub rho: f64,
    pub prior_mean: f64,
    pub prior_var: f64,
    pub seed: u64,
}

impl GaussianHciConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidConfig(format!("rho = {} outside (0, 1)", self.rho)));
        }
        if !(self.prior_var > 0.0) || !self.prior_mean.is_finite() || !self.prior_var.is_finite() {
            return Err(Error::InvalidConfig("prior needs finite mean and positive variance".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PosteriorMode {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Posterior {
    pub mean: f64,
    pub var: f64,
}

/// Linear posterior: with observation covariance K and all-ones design,
/// precision = 1/v₀ + 1ᵀK⁻¹1 and mean = (μ₀/v₀ + (K⁻¹1)ᵀobs) / precision.
/// The weights K⁻¹1 are fixed for a configuration, so they are solved once.
#[derive(Debug, Clone)]
pub struct GaussianPosterior {
    cfg: GaussianHciConfig,
    full_w: DVector<f64>,
    full_prec: f64,
    red_w: Vector2<f64>,
    red_prec: f64,
}

impl GaussianPosterior {
    pub fn new(cfg: &GaussianHciConfig) -> Result<Self> {
        cfg.validate()?;
        let (n, rho) = (cfg.n, cfg.rho);
        let m = 2 * n;
        let k = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 } else { rho });
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::InvalidConfig("observation covariance is not positive definite".into()))?;
        let full_w = chol.solve(&DVector::from_element(m, 1.0));
        let full_prec = 1.0 / cfg.prior_var + full_w.sum();

        let nf = n as f64;
        let diag = nf * nf * rho + nf * (1.0 - rho);
        let off = nf * nf * rho;
        let c = Matrix2::new(diag, off, off, diag);
        let red_w = c
            .cholesky()
            .ok_or_else(|| Error::InvalidConfig("sum covariance is not positive definite".into()))?
            .solve(&Vector2::new(nf, nf));
        let red_prec = 1.0 / cfg.prior_var + nf * (red_w[0] + red_w[1]);
        Ok(GaussianPosterior { cfg: cfg.clone(), full_w, full_prec, red_w, red_prec })
    }

    pub fn full(&self, x: &[f64], y: &[f64]) -> Result<Posterior> {
        self.check(x, y)?;
        let dot: f64 = x.iter().chain(y).zip(self.full_w.iter()).map(|(o, w)| o * w).sum();
        Ok(Posterior {
            mean: (self.cfg.prior_mean / self.cfg.prior_var + dot) / self.full_prec,
            var: 1.0 / self.full_prec,
        })
    }

    /// Posterior from (Σx, Σy) only.
    pub fn reduced(&self, sx: f64, sy: f64) -> Posterior {
        let dot = self.red_w[0] * sx + self.red_w[1] * sy;
        Posterior {
            mean: (self.cfg.prior_mean / self.cfg.prior_var + dot) / self.red_prec,
            var: 1.0 / self.red_prec,
        }
    }

    fn check(&self, x: &[f64], y: &[f64]) -> Result<()> {
        for v in [x, y] {
            if v.len() != self.cfg.n {
                return Err(Error::LengthMismatch { expected: self.cfg.n, got: v.len() });
            }
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("gaussian samples".into()));
        }
        Ok(())
    }
}

pub fn gaussian_posterior(cfg: &GaussianHciConfig, x: &[f64], y: &[f64], mode: PosteriorMode) -> Result<Posterior> {
    let post = GaussianPosterior::new(cfg)?;
    match mode {
        PosteriorMode::Full => post.full(x, y),
        PosteriorMode::Reduced => {
            post.check(x, y)?;
            Ok(post.reduced(x.iter().sum(), y.iter().sum()))
        }
    }
}

/// One simulated draw: θ then the 2n observations, from the trial's stream.
pub fn gaussian_draw(cfg: &GaussianHciConfig, trial: u64) -> (f64, Vec<f64>, Vec<f64>) {
    let mut s = Stream::new(cfg.seed, trial);
    let theta = cfg.prior_mean + cfg.prior_var.sqrt() * s.normal();
    let z = theta + cfg.rho.sqrt() * s.normal();
    let sd = (1.0 - cfg.rho).sqrt();
    let x: Vec<f64> = (0..cfg.n).map(|_| z + sd * s.normal()).collect();
    let y: Vec<f64> = (0..cfg.n).map(|_| z + sd * s.normal()).collect();
    (theta, x, y)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianTrial {
    pub trial: u64,
    pub theta: f64,
    pub mean_full: f64,
    pub mean_reduced: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianMse {
    pub trials: u64,
    pub mse_full: f64,
    pub mse_reduced: f64,
    /// Mean over trials of the paired difference of squared errors.
    pub mean_diff: f64,
    /// Standard error of the mean paired difference of squared errors.
    pub diff_std_err: f64,
    pub max_abs_mean_gap: f64,
}

pub fn gaussian_trials(cfg: &GaussianHciConfig, trials: u64) -> Result<Vec<GaussianTrial>> {
    let post = GaussianPosterior::new(cfg)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (theta, x, y) = gaussian_draw(cfg, t);
            let full = post.full(&x, &y)?;
            let red = post.reduced(x.iter().sum(), y.iter().sum());
            Ok(GaussianTrial { trial: t, theta, mean_full: full.mean, mean_reduced: red.mean })
        })
        .collect()
}

/// Summary of per-trial results, accumulated in trial order.
pub fn summarize_gaussian(rows: &[GaussianTrial]) -> GaussianMse {
    let n = rows.len() as f64;
    let (mut sf, mut sr, mut sd, mut sd2, mut gap) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
    for r in rows {
        let ef = (r.mean_full - r.theta).powi(2);
        let er = (r.mean_reduced - r.theta).powi(2);
        sf += ef;
        sr += er;
        sd += ef - er;
        sd2 += (ef - er).powi(2);
        gap = gap.max((r.mean_full - r.mean_reduced).abs());
    }
    let mean_d = sd / n;
    let var_d = if rows.len() > 1 { ((sd2 - n * mean_d * mean_d) / (n - 1.0)).max(0.0) } else { 0.0 };
    GaussianMse {
        trials: rows.len() as u64,
        mse_full: sf / n,
        mse_reduced: sr / n,
        mean_diff: mean_d,
        diff_std_err: (var_d / n).sqrt(),
        max_abs_mean_gap: gap,
    }
}

pub fn gaussian_mc_mse(cfg: &GaussianHciConfig, trials: u64) -> Result<GaussianMse> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    Ok(summarize_gaussian(&gaussian_trials(cfg, trials)?))
}
