//! Remote rate-distortion with side information at encoder and decoder.
//!
//! R(D) = min I(X; Ẑ | Y) over p(ẑ|x,y) with E d(Z, Ẑ) ≤ D. Given Y = y the
//! problem is an ordinary rate-distortion problem for source p(x|y) under
//! the averaged distortion d̄_y(x, ẑ) = Σ_z p(z|x,y) d(z, ẑ); the per-y
//! curves are combined at a common slope, so one multiplier β sweeps the
//! whole curve. Each per-y problem is solved by Blahut–Arimoto in the log
//! domain; β is bisected to hit each target distortion and the rate is
//! interpolated linearly between the bracketing curve points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ZERO_CELL;
use crate::statistic::Statistic;
use crate::sufficiency::{check_markov, MarkovVerdict};

use super::SourceModel;

const BA_MAX_ITER: usize = 20_000;
const BISECT_MAX: usize = 200;
const BETA_FLOOR: f64 = 1e-6;
const BETA_CEIL: f64 = 1e6;
const D_MAX_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdPoint {
    pub distortion: f64,
    pub rate_bits: f64,
    /// Slope parameter β (per nat) of the bracketing solution.
    pub multiplier: f64,
    /// Blahut–Arimoto iterations spent on this point.
    pub iterations: usize,
    /// False when some inner solve hit its iteration cap. Not an error.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdCurve {
    pub points: Vec<RdPoint>,
    pub d_min: f64,
    pub d_max: f64,
}

/// Per-y subproblem: source weights over x and the averaged distortion.
struct Slice {
    weight: f64,
    px: Vec<f64>,
    /// `dbar[x * m + ẑ]`
    dbar: Vec<f64>,
}

fn slices(model: &SourceModel) -> Result<(Vec<Slice>, usize)> {
    let dist = model
        .distortion()
        .ok_or_else(|| Error::InvalidConfig("rate-distortion needs a distortion measure".into()))?;
    let (nx, ny) = (model.x().size(), model.y().size());
    let nz = model.z().expect("remote model has Z").size();
    let m = dist.reproduction().size();
    let p = model.joint().probs();
    let at = |x: usize, y: usize, z: usize| p[(x * ny + y) * nz + z];
    let mut out = Vec::new();
    for y in 0..ny {
        let py: f64 = (0..nx).flat_map(|x| (0..nz).map(move |z| (x, z))).map(|(x, z)| at(x, y, z)).sum();
        if py <= ZERO_CELL {
            continue;
        }
        let mut px = vec![0.0; nx];
        let mut dbar = vec![0.0; nx * m];
        for x in 0..nx {
            let pxy: f64 = (0..nz).map(|z| at(x, y, z)).sum();
            px[x] = pxy / py;
            if pxy <= ZERO_CELL {
                continue;
            }
            for zh in 0..m {
                dbar[x * m + zh] = (0..nz).map(|z| at(x, y, z) * dist.get(z, zh)).sum::<f64>() / pxy;
            }
        }
        out.push(Slice { weight: py, px, dbar });
    }
    Ok((out, m))
}

/// (D_min, D_max): the smallest achievable distortion and the smallest
/// distortion reachable at zero rate.
pub fn distortion_range(model: &SourceModel) -> Result<(f64, f64)> {
    let (sl, m) = slices(model)?;
    let mut d_min = 0.0;
    let mut d_max = 0.0;
    for s in &sl {
        let nx = s.px.len();
        for x in 0..nx {
            if s.px[x] > ZERO_CELL {
                let best = (0..m).map(|zh| s.dbar[x * m + zh]).fold(f64::INFINITY, f64::min);
                d_min += s.weight * s.px[x] * best;
            }
        }
        let best = (0..m)
            .map(|zh| (0..nx).filter(|&x| s.px[x] > ZERO_CELL).map(|x| s.px[x] * s.dbar[x * m + zh]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        d_max += s.weight * best;
    }
    Ok((d_min, d_max))
}

#[derive(Clone, Copy)]
struct Solution {
    beta: f64,
    d: f64,
    r_bits: f64,
    iterations: usize,
    converged: bool,
}

fn blahut_arimoto(s: &Slice, m: usize, beta: f64, tol: f64) -> (f64, f64, usize, bool) {
    let support: Vec<usize> = (0..s.px.len()).filter(|&x| s.px[x] > ZERO_CELL).collect();
    let mut q = vec![1.0 / m as f64; m];
    let mut cond = vec![0.0; support.len() * m];
    let mut logw = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < BA_MAX_ITER {
        iterations += 1;
        for (k, &x) in support.iter().enumerate() {
            for zh in 0..m {
                logw[zh] = if q[zh] > 0.0 { q[zh].ln() - beta * s.dbar[x * m + zh] } else { f64::NEG_INFINITY };
            }
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = logw.iter().map(|&l| (l - top).exp()).sum();
            for zh in 0..m {
                cond[k * m + zh] = (logw[zh] - top).exp() / z;
            }
        }
        let mut next = vec![0.0; m];
        for (k, &x) in support.iter().enumerate() {
            for zh in 0..m {
                next[zh] += s.px[x] * cond[k * m + zh];
            }
        }
        let change = q.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        q = next;
        if change < tol {
            converged = true;
            break;
        }
    }
    let mut d = 0.0;
    let mut r = 0.0;
    for (k, &x) in support.iter().enumerate() {
        for zh in 0..m {
            let c = cond[k * m + zh];
            d += s.px[x] * c * s.dbar[x * m + zh];
            if c > ZERO_CELL && q[zh] > 0.0 {
                r += s.px[x] * c * (c / q[zh]).log2();
            }
        }
    }
    (d, r.max(0.0), iterations, converged)
}

fn solve(sl: &[Slice], m: usize, beta: f64, tol: f64) -> Solution {
    let mut out = Solution { beta, d: 0.0, r_bits: 0.0, iterations: 0, converged: true };
    for s in sl {
        let (d, r, it, ok) = blahut_arimoto(s, m, beta, tol);
        out.d += s.weight * d;
        out.r_bits += s.weight * r;
        out.iterations += it;
        out.converged &= ok;
    }
    out
}

fn point_at(sl: &[Slice], m: usize, target: f64, d_max: f64, tol: f64) -> RdPoint {
    let mut iterations = 0;
    let mut converged = true;
    let mut eval = |beta: f64| {
        let s = solve(sl, m, beta, tol);
        iterations += s.iterations;
        converged &= s.converged;
        s
    };
    let zero_rate = Solution { beta: 0.0, d: d_max, r_bits: 0.0, iterations: 0, converged: true };

    // Bracket: lo has D ≥ target, hi has D ≤ target.
    let first = eval(1.0);
    let (mut lo, mut hi);
    if first.d <= target {
        hi = first;
        lo = zero_rate;
        let mut beta = 0.5;
        while beta >= BETA_FLOOR {
            let s = eval(beta);
            if s.d >= target {
                lo = s;
                break;
            }
            hi = s;
            beta *= 0.5;
        }
    } else {
        lo = first;
        let mut beta = 2.0;
        loop {
            let s = eval(beta);
            if s.d <= target {
                hi = s;
                break;
            }
            lo = s;
            if beta >= BETA_CEIL {
                // Target sits at the very end of the curve.
                return RdPoint { distortion: target, rate_bits: s.r_bits, multiplier: beta, iterations, converged };
            }
            beta *= 2.0;
        }
    }
    for _ in 0..BISECT_MAX {
        if lo.d - hi.d <= tol || hi.beta - lo.beta <= tol * hi.beta {
            break;
        }
        let mid = eval(0.5 * (lo.beta + hi.beta));
        if mid.d >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rate = if lo.d - hi.d > 0.0 {
        lo.r_bits + (hi.r_bits - lo.r_bits) * (lo.d - target) / (lo.d - hi.d)
    } else {
        hi.r_bits
    };
    RdPoint { distortion: target, rate_bits: rate, multiplier: hi.beta, iterations, converged }
}

/// Evaluates R(D) on `d_grid`. `tol` bounds the inner fixed-point change and
/// the width of the final distortion bracket.
pub fn conditional_remote_rd(model: &SourceModel, d_grid: &[f64], tol: f64) -> Result<RdCurve> {
    if let Some(bad) = d_grid.iter().find(|d| !d.is_finite()) {
        return Err(Error::NonFiniteInput(format!("distortion target {bad}")));
    }
    let (sl, m) = slices(model)?;
    let (d_min, d_max) = distortion_range(model)?;
    let mut points = Vec::with_capacity(d_grid.len());
    for &d in d_grid {
        if d < d_min - 1e-12 {
            return Err(Error::DistortionOutOfRange { d, d_min });
        }
        // R(D) has finite slope at D_max, so rounding-level shortfalls (a grid
        // endpoint recomputed as lo + (hi − lo)·k/k) are the zero-rate point.
        if d >= d_max - D_MAX_SNAP * d_max.abs().max(1.0) {
            points.push(RdPoint { distortion: d, rate_bits: 0.0, multiplier: 0.0, iterations: 0, converged: true });
        } else {
            points.push(point_at(&sl, m, d.max(d_min), d_max, tol));
        }
    }
    Ok(RdCurve { points, d_min, d_max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RdEqualityReport {
    pub precondition: MarkovVerdict,
    pub full: RdCurve,
    pub reduced: RdCurve,
    pub max_abs_diff_bits: f64,
}

/// Compares R(D) computed from X with R(D) computed from T(X), which must
/// satisfy Z − (T(X), Y) − X.
pub fn rd_equality_check(
    model: &SourceModel,
    t: &Statistic,
    d_grid: &[f64],
    tol: f64,
    threshold_bits: f64,
) -> Result<RdEqualityReport> {
    let (x, y) = (model.x().name(), model.y().name());
    let z = model.z().ok_or_else(|| Error::InvalidConfig("rate-distortion needs a Z axis".into()))?.name();
    let with_t = t.attach(model.joint(), x, "T(X)")?;
    let precondition = check_markov(&with_t, &[z], &["T(X)", y], &[x], threshold_bits)?;
    if !precondition.holds {
        return Err(Error::PreconditionFailed(format!(
            "T(X) is not conditionally sufficient (I(Z;X|T,Y) = {:e} bits)",
            precondition.cmi_bits
        )));
    }
    let full = conditional_remote_rd(model, d_grid, tol)?;
    let reduced = conditional_remote_rd(&model.reduce_x(t)?, d_grid, tol)?;
    let max_abs_diff_bits = full
        .points
        .iter()
        .zip(&reduced.points)
        .map(|(a, b)| (a.rate_bits - b.rate_bits).abs())
        .fold(0.0, f64::max);
    Ok(RdEqualityReport { precondition, full, reduced, max_abs_diff_bits })
}
