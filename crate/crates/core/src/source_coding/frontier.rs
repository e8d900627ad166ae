//! Rate region for lossless coding of X with a helper that observes Y.
//!
//! The boundary of `{(R1, R2): R1 ≥ H(X|U), R2 ≥ I(Y;U), X − Y − U}` is
//! searched over channels p(u|y) with |U| ≤ |Y| + 2. Candidates come from
//! every deterministic map Y → U (these hit the corner points exactly) and
//! from random restarts refined by block-coordinate descent on
//! `λ·H(X|U) + (1−λ)·I(Y;U)` over a λ sweep. The descent step is the
//! self-consistent update q(u|y) ∝ p(u)·exp(−β·D(p(x|y) ‖ p(x|u))) with
//! β = λ/(1−λ), which exactly minimizes the variational form of the weighted
//! objective in q(u|y) with the marginals held fixed.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{entropy_bits, ZERO_CELL};
use crate::rng::Stream;
use crate::statistic::{set_partitions, Statistic};
use crate::sufficiency::{check_markov, ratio_partition, MarkovVerdict};

use super::SourceModel;

/// Points closer than this in both coordinates are treated as ties.
const PARETO_EPS: f64 = 1e-12;
/// β used for λ = 1 (pure H(X|U) minimization).
const BETA_MAX: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierOptions {
    pub u_card: usize,
    /// Number of random restarts.
    pub budget: usize,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    pub max_iter: usize,
    /// Deterministic maps are enumerated only when there are at most this many.
    pub enumerate_cap: usize,
}

impl FrontierOptions {
    pub fn new(u_card: usize, budget: usize, seed: u64) -> Self {
        FrontierOptions {
            u_card,
            budget,
            seed,
            lambdas: (0..=20).map(|i| i as f64 * 0.05).collect(),
            max_iter: 500,
            enumerate_cap: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    pub r1_bits: f64,
    pub r2_bits: f64,
    /// p(u|y), `|Y| × u_card` row-major.
    pub channel: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFrontier {
    /// Sorted by r1 ascending, r2 strictly descending.
    pub points: Vec<RatePoint>,
    pub u_card: usize,
    pub deterministic_maps_enumerated: bool,
}

impl RateFrontier {
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.r1_bits, p.r2_bits)).collect()
    }
}

/// (H(X|U), I(Y;U)) in bits for the channel `q` (|Y| × nu) applied to p(x,y).
pub fn rate_pair(pxy: &[f64], nx: usize, ny: usize, q: &[f64], nu: usize) -> (f64, f64) {
    let mut pu = vec![0.0; nu];
    let mut pxu = vec![0.0; nx * nu];
    let mut py = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            let p = pxy[x * ny + y];
            py[y] += p;
            for u in 0..nu {
                pxu[x * nu + u] += p * q[y * nu + u];
            }
        }
    }
    for y in 0..ny {
        for u in 0..nu {
            pu[u] += py[y] * q[y * nu + u];
        }
    }
    let h_x_given_u = (entropy_bits(&pxu) - entropy_bits(&pu)).max(0.0);
    let mut i_yu = 0.0;
    for y in 0..ny {
        for u in 0..nu {
            let p = py[y] * q[y * nu + u];
            if p > ZERO_CELL {
                i_yu += p * (q[y * nu + u] / pu[u]).log2();
            }
        }
    }
    (h_x_given_u, i_yu.max(0.0))
}

/// Number of partitions of an `n`-set into at most `k` blocks.
fn partitions_up_to(n: usize, k: usize) -> u128 {
    // Stirling numbers of the second kind, row by row.
    let mut s = vec![0u128; k + 1];
    s[0] = 1;
    for _ in 0..n {
        for j in (1..=k).rev() {
            s[j] = s[j].saturating_mul(j as u128).saturating_add(s[j - 1]);
        }
        s[0] = 0;
    }
    s.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

fn descend(pxy: &[f64], nx: usize, ny: usize, q: &mut [f64], nu: usize, beta: f64, max_iter: usize) {
    let py: Vec<f64> = (0..ny).map(|y| (0..nx).map(|x| pxy[x * ny + y]).sum()).collect();
    let mut logw = vec![0.0; nu];
    for _ in 0..max_iter {
        let mut pu = vec![0.0; nu];
        let mut pxu = vec![0.0; nx * nu];
        for y in 0..ny {
            for u in 0..nu {
                let w = q[y * nu + u];
                pu[u] += py[y] * w;
                for x in 0..nx {
                    pxu[x * nu + u] += pxy[x * ny + y] * w;
                }
            }
        }
        let mut change: f64 = 0.0;
        for y in 0..ny {
            if py[y] <= ZERO_CELL {
                continue;
            }
            for u in 0..nu {
                if pu[u] <= ZERO_CELL {
                    logw[u] = f64::NEG_INFINITY;
                    continue;
                }
                let mut kl = 0.0;
                for x in 0..nx {
                    let a = pxy[x * ny + y] / py[y];
                    if a > ZERO_CELL {
                        let b = pxu[x * nu + u] / pu[u];
                        kl += if b > 0.0 { a * (a / b).ln() } else { f64::INFINITY };
                    }
                }
                logw[u] = pu[u].ln() - beta * kl;
            }
            let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !top.is_finite() {
                continue;
            }
            let z: f64 = logw.iter().map(|&l| (l - top).exp()).sum();
            for u in 0..nu {
                let new = (logw[u] - top).exp() / z;
                change = change.max((new - q[y * nu + u]).abs());
                q[y * nu + u] = new;
            }
        }
        if change < 1e-12 {
            break;
        }
    }
}

/// Keeps Pareto-minimal points, sorted by r1 ascending and r2 descending.
pub(crate) fn pareto_filter(mut cands: Vec<RatePoint>) -> Vec<RatePoint> {
    cands.sort_by(|a, b| a.r2_bits.total_cmp(&b.r2_bits).then(a.r1_bits.total_cmp(&b.r1_bits)));
    let mut kept: Vec<RatePoint> = Vec::new();
    let mut best_r1 = f64::INFINITY;
    for c in cands {
        if c.r1_bits < best_r1 - PARETO_EPS {
            best_r1 = c.r1_bits;
            kept.push(c);
        }
    }
    let dominated: Vec<bool> = kept
        .iter()
        .enumerate()
        .map(|(i, p)| {
            kept.iter().enumerate().any(|(j, q)| {
                j != i
                    && q.r1_bits <= p.r1_bits + PARETO_EPS
                    && q.r2_bits <= p.r2_bits + PARETO_EPS
                    && (q.r1_bits < p.r1_bits - PARETO_EPS || q.r2_bits < p.r2_bits - PARETO_EPS)
            })
        })
        .collect();
    let mut out: Vec<RatePoint> =
        kept.into_iter().zip(dominated).filter(|(_, d)| !d).map(|(p, _)| p).collect();
    out.sort_by(|a, b| a.r1_bits.total_cmp(&b.r1_bits));
    out
}

pub fn ak_frontier(model: &SourceModel, opts: &FrontierOptions) -> Result<RateFrontier> {
    let (nx, ny) = (model.x().size(), model.y().size());
    let nu = opts.u_card;
    if nu == 0 || nu > ny + 2 {
        return Err(Error::CardTooLarge { u_card: nu, max: ny + 2 });
    }
    let pxy = model.pxy();
    let point = |channel: Vec<f64>| {
        let (r1, r2) = rate_pair(&pxy, nx, ny, &channel, nu);
        RatePoint { r1_bits: r1, r2_bits: r2, channel }
    };

    let enumerate = partitions_up_to(ny, nu) <= opts.enumerate_cap as u128;
    let mut cands: Vec<RatePoint> = Vec::new();
    if enumerate {
        for labels in set_partitions(ny, nu) {
            let mut q = vec![0.0; ny * nu];
            for (y, &l) in labels.iter().enumerate() {
                q[y * nu + l] = 1.0;
            }
            cands.push(point(q));
        }
    }

    let restarts: Vec<Vec<RatePoint>> = (0..opts.budget as u64)
        .into_par_iter()
        .map(|r| {
            let mut s = Stream::new(opts.seed, r);
            let init: Vec<f64> = (0..ny).flat_map(|_| s.simplex(nu)).collect();
            opts.lambdas
                .iter()
                .map(|&lambda| {
                    let beta = if lambda >= 1.0 { BETA_MAX } else { lambda / (1.0 - lambda) };
                    let mut q = init.clone();
                    descend(&pxy, nx, ny, &mut q, nu, beta, opts.max_iter);
                    point(q)
                })
                .collect()
        })
        .collect();
    cands.extend(restarts.into_iter().flatten());

    Ok(RateFrontier { points: pareto_filter(cands), u_card: nu, deterministic_maps_enumerated: enumerate })
}

/// Minimal sufficient statistic of Y for X: y and ŷ merge iff p(x|y) = p(x|ŷ).
pub fn minimal_sufficient_of_y(model: &SourceModel) -> Statistic {
    let (nx, ny) = (model.x().size(), model.y().size());
    let pxy = model.pxy();
    let labels = ratio_partition(ny, 1, |y, _| (0..nx).map(|x| pxy[x * ny + y]).collect());
    Statistic::from_fn(model.y().clone(), |i| labels[i])
}

/// Smallest helper rate at R1 = H(X|Y): the entropy of the minimal
/// sufficient statistic of Y for X.
pub fn corner_point(model: &SourceModel) -> f64 {
    let phi = minimal_sufficient_of_y(model);
    let ny = model.y().size();
    let pxy = model.pxy();
    let mut mass = vec![0.0; phi.num_classes()];
    for y in 0..ny {
        mass[phi.labels()[y]] += (0..model.x().size()).map(|x| pxy[x * ny + y]).sum::<f64>();
    }
    entropy_bits(&mass)
}

/// Lower-left convex boundary of the region spanned by `points` (which must
/// be Pareto-sorted: r1 ascending, r2 descending).
pub fn lower_envelope(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

fn envelope_at(chain: &[(f64, f64)], r1: f64) -> f64 {
    let first = chain[0];
    let last = chain[chain.len() - 1];
    if r1 < first.0 {
        return f64::INFINITY;
    }
    if r1 >= last.0 {
        return last.1;
    }
    let k = chain.windows(2).position(|w| r1 <= w[1].0).expect("r1 within chain");
    let (a, b) = (chain[k], chain[k + 1]);
    a.1 + (b.1 - a.1) * (r1 - a.0) / (b.0 - a.0)
}

/// Smallest ε ≥ 0 such that p + (ε, ε) lies in the region above `chain`.
pub fn additive_gap(p: (f64, f64), chain: &[(f64, f64)]) -> f64 {
    let g = |e: f64| p.1 + e - envelope_at(chain, p.0 + e);
    if g(0.0) >= 0.0 {
        return 0.0;
    }
    let mut hi = (chain[0].0 - p.0).max(0.0) + (chain[0].1 - p.1).max(0.0) + 1.0;
    let mut lo = 0.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Largest [`additive_gap`] of any point of `from` against the envelope of `to`.
pub fn one_sided_gap(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
    let chain = lower_envelope(to);
    from.iter().map(|&p| additive_gap(p, &chain)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem6Report {
    pub precondition: MarkovVerdict,
    pub full: RateFrontier,
    pub reduced: RateFrontier,
    /// How far the full-data frontier reaches beyond the reduced region.
    pub full_outside_reduced_bits: f64,
    /// How far the reduced frontier reaches beyond the full-data region.
    pub reduced_outside_full_bits: f64,
    /// Max coordinate difference between each reduced point and the same
    /// channel lifted to Y through T (exact containment of R′ in R).
    pub lift_gap_bits: f64,
    pub gap_bits: f64,
}

/// Compares the region for (X, Y) with the one for (X, T(Y)).
pub fn theorem6_compare(
    model: &SourceModel,
    t: &Statistic,
    opts: &FrontierOptions,
    threshold_bits: f64,
) -> Result<Theorem6Report> {
    let (x, y) = (model.x().name(), model.y().name());
    let pair = model.joint().marginal(&[x, y])?;
    let with_t = t.attach(&pair, y, "T(Y)")?;
    let precondition = check_markov(&with_t, &[x], &["T(Y)"], &[y], threshold_bits)?;
    if !precondition.holds {
        return Err(Error::PreconditionFailed(format!(
            "T(Y) is not sufficient for X (I(X;Y|T) = {:e} bits)",
            precondition.cmi_bits
        )));
    }
    let reduced_model = model.reduce_y(t)?;
    let full = ak_frontier(model, opts)?;
    let mut ropts = opts.clone();
    ropts.u_card = opts.u_card.min(t.num_classes() + 2);
    let reduced = ak_frontier(&reduced_model, &ropts)?;

    let (nx, ny) = (model.x().size(), model.y().size());
    let pxy = model.pxy();
    let nu = reduced.u_card;
    let lift_gap_bits = reduced
        .points
        .iter()
        .map(|p| {
            let lifted: Vec<f64> = (0..ny)
                .flat_map(|yi| {
                    let c = t.labels()[yi];
                    p.channel[c * nu..(c + 1) * nu].to_vec()
                })
                .collect();
            let (r1, r2) = rate_pair(&pxy, nx, ny, &lifted, nu);
            (r1 - p.r1_bits).abs().max((r2 - p.r2_bits).abs())
        })
        .fold(0.0, f64::max);

    let (fp, rp) = (full.pairs(), reduced.pairs());
    let full_outside_reduced_bits = one_sided_gap(&fp, &rp);
    let reduced_outside_full_bits = one_sided_gap(&rp, &fp);
    Ok(Theorem6Report {
        precondition,
        gap_bits: full_outside_reduced_bits.max(reduced_outside_full_bits),
        full,
        reduced,
        full_outside_reduced_bits,
        reduced_outside_full_bits,
        lift_gap_bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Alphabet, JointDistribution};

    fn model(nx: usize, ny: usize, pxy: Vec<f64>) -> SourceModel {
        SourceModel::pair(
            JointDistribution::new(vec![Alphabet::indexed("X", nx), Alphabet::indexed("Y", ny)], pxy).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn partition_counts() {
        assert_eq!(partitions_up_to(4, 4), 15);
        assert_eq!(partitions_up_to(4, 6), 15);
        assert_eq!(partitions_up_to(5, 2), 16);
    }

    #[test]
    fn independent_sources_give_single_corner() {
        let m = model(2, 2, vec![0.15, 0.15, 0.35, 0.35]);
        let f = ak_frontier(&m, &FrontierOptions::new(2, 10, 1)).unwrap();
        assert_eq!(f.points.len(), 1);
        let hx = crate::model::binary_entropy(0.3);
        assert!((f.points[0].r1_bits - hx).abs() < 1e-9);
        assert!(f.points[0].r2_bits < 1e-9);
        assert!(corner_point(&m).abs() < 1e-12);
    }

    #[test]
    fn copy_source_needs_full_helper_rate() {
        let m = model(2, 2, vec![0.5, 0.0, 0.0, 0.5]);
        let f = ak_frontier(&m, &FrontierOptions::new(2, 10, 1)).unwrap();
        let first = &f.points[0];
        assert!(first.r1_bits < 1e-12 && (first.r2_bits - 1.0).abs() < 1e-12);
        assert!((corner_point(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cardinality_cap() {
        let m = model(2, 2, vec![0.25; 4]);
        let err = ak_frontier(&m, &FrontierOptions::new(5, 1, 1)).unwrap_err();
        assert_eq!(err.code(), "CARD_TOO_LARGE");
    }

    #[test]
    fn envelope_gap_examples() {
        let chain = lower_envelope(&[(0.0, 1.0), (1.0, 0.0)]);
        assert_eq!(additive_gap((0.5, 0.5), &chain), 0.0);
        let g = additive_gap((0.25, 0.25), &chain);
        assert!((g - 0.25).abs() < 1e-12);
        // Left of the chain the gap is the horizontal shortfall at least.
        let g = additive_gap((-0.5, 2.0), &chain);
        assert!((g - 0.5).abs() < 1e-12);
        let hull = lower_envelope(&[(0.0, 1.0), (0.6, 0.6), (1.0, 0.0)]);
        assert_eq!(hull.len(), 2);
    }

    #[test]
    fn pareto_filter_sorts_and_prunes() {
        let pts = [(0.0, 1.0), (0.5, 0.5), (0.6, 0.6), (1.0, 0.0), (0.5, 0.7)];
        let cands = pts
            .iter()
            .map(|&(a, b)| RatePoint { r1_bits: a, r2_bits: b, channel: vec![] })
            .collect();
        let f: Vec<(f64, f64)> = pareto_filter(cands).iter().map(|p| (p.r1_bits, p.r2_bits)).collect();
        assert_eq!(f, vec![(0.0, 1.0), (0.5, 0.5), (1.0, 0.0)]);
    }
}
