//! Triangular support family: (X_i, Y_i) uniform on θ < y < x < θ + 1.
//!
//! The joint density is 2^n on the support and 0 outside, so a likelihood
//! ratio between two data sets only changes when a candidate θ moves a
//! support edge between them. Given Y, max_i X_i carries everything about θ
//! in X; given X, min_i Y_i plays the same role for Y.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Alphabet, ParamFamily};
use crate::rng::Stream;

/// Probes closer than this to a support edge are redrawn.
const EDGE_MARGIN: f64 = 1e-12;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleConfig {
    pub n: usize,
    pub theta_values: Vec<f64>,
    pub seed: u64,
}

pub fn triangle_density(theta: f64, x: &[f64], y: &[f64]) -> f64 {
    let inside = x.iter().zip(y).all(|(&xi, &yi)| theta < yi && yi < xi && xi < theta + 1.0);
    if inside {
        2f64.powi(x.len() as i32)
    } else {
        0.0
    }
}

/// Whether a ↦ b is a constant positive multiple across θ (matching zeros).
fn proportional(a: &[f64], b: &[f64]) -> bool {
    if a.iter().zip(b).any(|(&p, &q)| (p == 0.0) != (q == 0.0)) {
        return false;
    }
    let ratios: Vec<f64> = a.iter().zip(b).filter(|(p, _)| **p != 0.0).map(|(p, q)| p / q).collect();
    ratios.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-12 * w[0].abs().max(w[1].abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SideReport {
    /// Probes whose statistic (max x or min y) agreed.
    pub same_statistic: usize,
    pub different_statistic: usize,
    /// Probes where "ratio constant in θ" disagreed with "statistic equal".
    pub mismatches: usize,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TriangleReport {
    pub probes: usize,
    pub x_side: SideReport,
    pub y_side: SideReport,
    pub pass: bool,
}

struct Checker<'a> {
    thetas: &'a [f64],
    lo: f64,
    hi: f64,
}

impl Checker<'_> {
    fn profile(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.thetas.iter().map(|&t| triangle_density(t, x, y)).collect()
    }

    fn near_edge(&self, v: &[f64]) -> bool {
        v.iter().any(|&c| self.thetas.iter().any(|&t| (c - t).abs() < EDGE_MARGIN || (c - t - 1.0).abs() < EDGE_MARGIN))
    }
}

fn uniform_in(s: &mut Stream, a: f64, b: f64) -> f64 {
    a + (b - a) * s.uniform()
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] > v[best] { i } else { best })
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |best, i| if v[i] < v[best] { i } else { best })
}

/// Checks, on random probes, that the likelihood ratio between two data sets
/// sharing one coordinate block is constant over θ exactly when the relevant
/// statistic agrees.
///
/// x side: y and x are drawn inside the support of every candidate. The
/// partner x̂ either keeps max x (other coordinates redrawn below it) or
/// moves its maximum between θ_j + 1 and θ_{j+1} + 1 for a random adjacent
/// pair of sorted candidates. The y side mirrors this with min y.
pub fn triangle_ratio_check(cfg: &TriangleConfig, num_probes: usize) -> Result<TriangleReport> {
    if cfg.n == 0 || num_probes == 0 {
        return Err(Error::InvalidConfig("need n ≥ 1 and at least one probe".into()));
    }
    let mut thetas = cfg.theta_values.clone();
    if thetas.len() < 2 || thetas.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidConfig("need at least two finite θ values".into()));
    }
    thetas.sort_by(f64::total_cmp);
    if thetas.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig("θ values must be distinct".into()));
    }
    let (lo, hi) = (thetas[thetas.len() - 1], thetas[0] + 1.0);
    if lo >= hi {
        return Err(Error::EmptyCommonSupport);
    }
    let ck = Checker { thetas: &thetas, lo, hi };
    let n = cfg.n;
    let mut xs = SideReport { same_statistic: 0, different_statistic: 0, mismatches: 0, redraws: 0 };
    let mut ys = xs.clone();

    for p in 0..num_probes as u64 {
        let mut s = Stream::new(cfg.seed, p);
        let same = p % 2 == 0;
        let gap = (s.uniform() * (thetas.len() - 1) as f64) as usize;

        // x side.
        let mut tries = 0;
        let (x, xh, y) = loop {
            let y: Vec<f64> = (0..n).map(|_| uniform_in(&mut s, ck.lo, ck.hi)).collect();
            let x: Vec<f64> = y.iter().map(|&yi| uniform_in(&mut s, yi, ck.hi)).collect();
            let xh: Vec<f64> = if same {
                let k = argmax(&x);
                (0..n).map(|i| if i == k { x[k] } else { uniform_in(&mut s, y[i], x[k]) }).collect()
            } else {
                let top = uniform_in(&mut s, thetas[gap] + 1.0, thetas[gap + 1] + 1.0);
                let k = (s.uniform() * n as f64) as usize;
                (0..n).map(|i| if i == k { top } else { uniform_in(&mut s, y[i], top) }).collect()
            };
            if !(ck.near_edge(&x) || ck.near_edge(&xh) || ck.near_edge(&y)) || tries >= MAX_REDRAWS {
                break (x, xh, y);
            }
            tries += 1;
        };
        xs.redraws += tries;
        let stat_eq = x[argmax(&x)] == xh[argmax(&xh)];
        let flat = proportional(&ck.profile(&x, &y), &ck.profile(&xh, &y));
        *if stat_eq { &mut xs.same_statistic } else { &mut xs.different_statistic } += 1;
        xs.mismatches += usize::from(flat != stat_eq);

        // y side.
        let mut tries = 0;
        let (y, yh, x) = loop {
            let x: Vec<f64> = (0..n).map(|_| uniform_in(&mut s, ck.lo, ck.hi)).collect();
            let y: Vec<f64> = x.iter().map(|&xi| uniform_in(&mut s, ck.lo, xi)).collect();
            let yh: Vec<f64> = if same {
                let k = argmin(&y);
                (0..n).map(|i| if i == k { y[k] } else { uniform_in(&mut s, y[k], x[i]) }).collect()
            } else {
                let bottom = uniform_in(&mut s, thetas[gap], thetas[gap + 1]);
                let k = (s.uniform() * n as f64) as usize;
                (0..n).map(|i| if i == k { bottom } else { uniform_in(&mut s, bottom, x[i]) }).collect()
            };
            if !(ck.near_edge(&x) || ck.near_edge(&yh) || ck.near_edge(&y)) || tries >= MAX_REDRAWS {
                break (y, yh, x);
            }
            tries += 1;
        };
        ys.redraws += tries;
        let stat_eq = y[argmin(&y)] == yh[argmin(&yh)];
        let flat = proportional(&ck.profile(&x, &y), &ck.profile(&x, &yh));
        *if stat_eq { &mut ys.same_statistic } else { &mut ys.different_statistic } += 1;
        ys.mismatches += usize::from(flat != stat_eq);
    }
    let pass = xs.mismatches == 0 && ys.mismatches == 0;
    Ok(TriangleReport { probes: num_probes, x_side: xs, y_side: ys, pass })
}

/// Grid used for the discretized family: (2k + 3)/12 for k = 0..5.
pub fn triangle_grid() -> Vec<f64> {
    (0..6).map(|k| (2 * k + 3) as f64 / 12.0).collect()
}

/// One (X, Y) pair on [`triangle_grid`], uniform over grid pairs inside the
/// support, for θ ∈ {0, 1/6}.
pub fn discretized_triangle_family() -> ParamFamily {
    let grid = triangle_grid();
    let thetas = [0.0, 1.0 / 6.0];
    let syms: Vec<String> = (0..grid.len()).map(|k| format!("{}/12", 2 * k + 3)).collect();
    let x = Alphabet::new("X", syms.clone()).expect("distinct grid labels");
    let y = Alphabet::new("Y", syms).expect("distinct grid labels");
    let theta = Alphabet::new("theta", ["0", "1/6"]).expect("distinct");
    let valid = |t: f64, xi: usize, yi: usize| {
        let (xv, yv) = (grid[xi], grid[yi]);
        t < yv && yv < xv && xv < t + 1.0
    };
    let counts: Vec<f64> = thetas
        .iter()
        .map(|&t| (0..6).flat_map(|a| (0..6).map(move |b| (a, b))).filter(|&(a, b)| valid(t, a, b)).count() as f64)
        .collect();
    ParamFamily::from_fn(theta, vec![0.5, 0.5], vec![x, y], |t, c| {
        if valid(thetas[t], c[0], c[1]) {
            1.0 / counts[t]
        } else {
            0.0
        }
    })
    .expect("valid family")
}
