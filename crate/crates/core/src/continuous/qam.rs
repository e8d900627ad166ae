//! Detecting a QAM symbol seen by k sensors through independent Rayleigh fading.
//!
//! H0: x_i = n_i. H1: x_i = h_i·S + n_i with S = r_m·e^{jφ_m} w.p. π_m,
//! h_i ~ CN(0, fading_var), n_i ~ CN(0, σ²). Given S the h_i-marginal of x_i
//! is CN(0, r_m²·fading_var + σ²), so the likelihood ratio is a finite
//! mixture that depends on the data only through the magnitudes |x_i|.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationPoint {
    pub radius: f64,
    pub phase: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QamConfig {
    pub k: usize,
    pub constellation: Vec<ConstellationPoint>,
    pub noise_var: f64,
    #[serde(default = "unit")]
    pub fading_var: f64,
    pub seed: u64,
}

fn unit() -> f64 {
    1.0
}

impl QamConfig {
    /// Square 4-QAM at unit radius, equiprobable.
    pub fn qam4(k: usize, noise_var: f64, seed: u64) -> Self {
        let constellation = (0..4)
            .map(|m| ConstellationPoint {
                radius: 1.0,
                phase: std::f64::consts::FRAC_PI_4 + m as f64 * std::f64::consts::FRAC_PI_2,
                prob: 0.25,
            })
            .collect();
        QamConfig { k, constellation, noise_var, fading_var: 1.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.constellation.is_empty() {
            return Err(Error::InvalidConfig("need k ≥ 1 and a nonempty constellation".into()));
        }
        if !(self.noise_var > 0.0 && self.fading_var > 0.0) || !self.noise_var.is_finite() || !self.fading_var.is_finite() {
            return Err(Error::InvalidConfig("variances must be finite and positive".into()));
        }
        if self.constellation.iter().any(|c| !(c.radius >= 0.0) || !(c.prob >= 0.0) || !c.phase.is_finite()) {
            return Err(Error::InvalidConfig("radii and probabilities must be nonnegative".into()));
        }
        let total: f64 = self.constellation.iter().map(|c| c.prob).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization { what: "constellation probabilities".into(), sum: total });
        }
        Ok(())
    }
}

/// log LR from per-sensor energies |x_i|².
fn log_lr_from_energy(cfg: &QamConfig, energy: &[f64]) -> f64 {
    let s2 = cfg.noise_var;
    let h0: f64 = energy.iter().map(|e| -e / s2 - s2.ln()).sum();
    let terms: Vec<f64> = cfg
        .constellation
        .iter()
        .filter(|c| c.prob > 0.0)
        .map(|c| {
            let v = c.radius * c.radius * cfg.fading_var + s2;
            c.prob.ln() + energy.iter().map(|e| -e / v - v.ln()).sum::<f64>() - h0
        })
        .collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

fn check_len(cfg: &QamConfig, got: usize) -> Result<()> {
    if got != cfg.k {
        return Err(Error::LengthMismatch { expected: cfg.k, got });
    }
    Ok(())
}

/// p(x|H1)/p(x|H0) from the complex observations.
pub fn qam_lr(cfg: &QamConfig, x: &[Complex64]) -> Result<f64> {
    check_len(cfg, x.len())?;
    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFiniteInput("complex observation".into()));
    }
    let energy: Vec<f64> = x.iter().map(|v| v.norm().powi(2)).collect();
    Ok(log_lr_from_energy(cfg, &energy).exp())
}

/// The same likelihood ratio computed from |x_i| alone.
pub fn qam_lr_from_magnitudes(cfg: &QamConfig, mags: &[f64]) -> Result<f64> {
    check_len(cfg, mags.len())?;
    if mags.iter().any(|m| !m.is_finite() || *m < 0.0) {
        return Err(Error::NonFiniteInput("magnitude".into()));
    }
    let energy: Vec<f64> = mags.iter().map(|m| m.powi(2)).collect();
    Ok(log_lr_from_energy(cfg, &energy).exp())
}

fn complex_normal(s: &mut Stream, var: f64) -> Complex64 {
    let sd = (var / 2.0).sqrt();
    Complex64::new(sd * s.normal(), sd * s.normal())
}

/// Observations under H0 and H1 for one trial, drawn from its own stream in
/// a fixed order: H0 noise, then symbol, fading and noise for H1.
pub fn qam_draw(cfg: &QamConfig, trial: u64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut s = Stream::new(cfg.seed, trial);
    let h0: Vec<Complex64> = (0..cfg.k).map(|_| complex_normal(&mut s, cfg.noise_var)).collect();
    let probs: Vec<f64> = cfg.constellation.iter().map(|c| c.prob).collect();
    let c = cfg.constellation[s.categorical(&probs)];
    let sym = Complex64::from_polar(c.radius, c.phase);
    let h1 = (0..cfg.k)
        .map(|_| {
            let h = complex_normal(&mut s, cfg.fading_var);
            h * sym + complex_normal(&mut s, cfg.noise_var)
        })
        .collect();
    (h0, h1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QamTrial {
    pub trial: u64,
    pub lr0_full: f64,
    pub lr0_magnitude: f64,
    pub lr1_full: f64,
    pub lr1_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocRow {
    pub threshold: f64,
    pub pfa_full: f64,
    pub pd_full: f64,
    pub pfa_magnitude: f64,
    pub pd_magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QamRoc {
    pub trials: u64,
    pub rows: Vec<RocRow>,
    pub auc_full: f64,
    pub auc_magnitude: f64,
    pub max_lr_rel_gap: f64,
    pub identical: bool,
}

pub fn qam_trials(cfg: &QamConfig, trials: u64) -> Result<Vec<QamTrial>> {
    cfg.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (h0, h1) = qam_draw(cfg, t);
            let mags = |v: &[Complex64]| v.iter().map(|c| c.norm()).collect::<Vec<f64>>();
            Ok(QamTrial {
                trial: t,
                lr0_full: qam_lr(cfg, &h0)?,
                lr0_magnitude: qam_lr_from_magnitudes(cfg, &mags(&h0))?,
                lr1_full: qam_lr(cfg, &h1)?,
                lr1_magnitude: qam_lr_from_magnitudes(cfg, &mags(&h1))?,
            })
        })
        .collect()
}

/// Probability that an H1 score beats an H0 score (ties count half).
pub fn auc(h0: &[f64], h1: &[f64]) -> f64 {
    let mut all: Vec<(f64, bool)> = h0.iter().map(|&v| (v, false)).chain(h1.iter().map(|&v| (v, true))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Mann–Whitney with midranks.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j < all.len() && all[j].0 == all[i].0 {
            j += 1;
        }
        let mid = (i + j + 1) as f64 / 2.0;
        rank_sum += mid * all[i..j].iter().filter(|e| e.1).count() as f64;
        i = j;
    }
    let (n0, n1) = (h0.len() as f64, h1.len() as f64);
    (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n0 * n1)
}

/// Empirical detection probability at false-alarm level `pfa`, using the
/// smallest threshold whose H0 exceedance rate is at most `pfa`.
pub fn detection_at(h0: &[f64], h1: &[f64], pfa: f64) -> f64 {
    let mut s0 = h0.to_vec();
    s0.sort_by(|a, b| b.total_cmp(a));
    let allowed = (pfa * s0.len() as f64).floor() as usize;
    let tau = if allowed >= s0.len() { f64::NEG_INFINITY } else { s0[allowed] };
    h1.iter().filter(|&&v| v > tau).count() as f64 / h1.len() as f64
}

pub fn roc_table(rows: &[QamTrial], thresholds: &[f64]) -> Vec<RocRow> {
    let n = rows.len() as f64;
    let rate = |f: &dyn Fn(&QamTrial) -> f64, tau: f64| rows.iter().filter(|r| f(r) > tau).count() as f64 / n;
    thresholds
        .iter()
        .map(|&tau| RocRow {
            threshold: tau,
            pfa_full: rate(&|r| r.lr0_full, tau),
            pd_full: rate(&|r| r.lr1_full, tau),
            pfa_magnitude: rate(&|r| r.lr0_magnitude, tau),
            pd_magnitude: rate(&|r| r.lr1_magnitude, tau),
        })
        .collect()
}

pub fn summarize_qam(rows: &[QamTrial], thresholds: &[f64]) -> QamRoc {
    let col = |f: fn(&QamTrial) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let rel = |a: f64, b: f64| if a == b { 0.0 } else { (a - b).abs() / a.abs().max(b.abs()) };
    let max_lr_rel_gap = rows
        .iter()
        .map(|r| rel(r.lr0_full, r.lr0_magnitude).max(rel(r.lr1_full, r.lr1_magnitude)))
        .fold(0.0, f64::max);
    let table = roc_table(rows, thresholds);
    let identical = table
        .iter()
        .all(|r| r.pfa_full == r.pfa_magnitude && r.pd_full == r.pd_magnitude)
        && rows.iter().all(|r| {
            thresholds.iter().all(|&t| {
                (r.lr0_full > t) == (r.lr0_magnitude > t) && (r.lr1_full > t) == (r.lr1_magnitude > t)
            })
        });
    QamRoc {
        trials: rows.len() as u64,
        auc_full: auc(&col(|r| r.lr0_full), &col(|r| r.lr1_full)),
        auc_magnitude: auc(&col(|r| r.lr0_magnitude), &col(|r| r.lr1_magnitude)),
        rows: table,
        max_lr_rel_gap,
        identical,
    }
}

/// LR thresholds 10^-2 … 10^3 in quarter-decade steps.
pub fn default_thresholds() -> Vec<f64> {
    (-8..=12).map(|i| 10f64.powf(i as f64 / 4.0)).collect()
}

pub fn qam_roc_compare(cfg: &QamConfig, trials: u64, thresholds: &[f64]) -> Result<QamRoc> {
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    Ok(summarize_qam(&qam_trials(cfg, trials)?, thresholds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value() {
        let cfg = QamConfig {
            k: 3,
            constellation: vec![
                ConstellationPoint { radius: 1.0, phase: 0.0, prob: 0.4 },
                ConstellationPoint { radius: 2.0, phase: 1.0, prob: 0.6 },
            ],
            noise_var: 0.5,
            fading_var: 1.5,
            seed: 0,
        };
        let lr = qam_lr(&cfg, &[Complex64::new(0.0, 0.0); 3]).unwrap();
        let expect = 0.4 * (0.5f64 / (1.5 + 0.5)).powi(3) + 0.6 * (0.5f64 / (6.0 + 0.5)).powi(3);
        assert!((lr - expect).abs() < 1e-15 * expect.max(1.0));
        assert!(lr < 1.0);
    }

    #[test]
    fn energy_detector_and_errors() {
        let cfg = QamConfig::qam4(2, 1.0, 0);
        let a = qam_lr(&cfg, &[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)]).unwrap();
        let b = qam_lr(&cfg, &[Complex64::new(0.0, 5.0), Complex64::new(0.0, 0.0)]).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
        assert_eq!(qam_lr(&cfg, &[Complex64::new(f64::NAN, 0.0); 2]).unwrap_err().code(), "NONFINITE_INPUT");
        assert_eq!(qam_lr(&cfg, &[Complex64::new(0.0, 0.0)]).unwrap_err().code(), "LENGTH_MISMATCH");
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.0, 1.0], &[2.0, 3.0]), 1.0);
        assert_eq!(auc(&[1.0], &[1.0]), 0.5);
        assert_eq!(detection_at(&[0.0, 1.0, 2.0, 3.0], &[2.5, 3.5], 0.25), 1.0);
        assert_eq!(detection_at(&[0.0, 1.0, 2.0, 3.0], &[2.5, 3.5], 0.0), 0.5);
    }

    #[test]
    fn huge_noise_merges_hypotheses() {
        let cfg = QamConfig::qam4(4, 1e6, 5);
        let roc = qam_roc_compare(&cfg, 4000, &[1.0]).unwrap();
        let r = &roc.rows[0];
        assert!((r.pd_full - r.pfa_full).abs() < 0.05);
        assert!(roc.identical);
    }
}
