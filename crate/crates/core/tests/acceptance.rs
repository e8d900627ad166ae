//! Acceptance suite: one line per criterion, exit status 1 if any fails.
//!
//! Every criterion checks its numerical tolerance and its wall-clock budget.
//! Reference values come from closed forms or brute force written here,
//! independently of the library code under test.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use suffbench::cli::{achievability_gap, convexity_violation};
use suffbench::continuous::{
    default_thresholds, discretized_triangle_family, gaussian_mc_mse, qam_roc_compare, GaussianHciConfig,
    GaussianPosterior, QamConfig,
};
use suffbench::families::{ab_pair, bernoulli_remote, count_statistic, fam_bin, fam_dep, noisy_copy_remote, parity_statistic};
use suffbench::model::{Alphabet, JointDistribution, ParamFamily};
use suffbench::rng::Stream;
use suffbench::source_coding::{
    ak_frontier, conditional_remote_rd, corner_point, distortion_range, rd_equality_check, theorem6_compare,
    Distortion, FrontierOptions, SourceModel,
};
use suffbench::statistic::{all_statistics, Statistic};
use suffbench::sufficiency::{
    check_markov, is_conditionally_sufficient, is_sufficient, minimal_conditional_sufficient, minimal_sufficient,
    theorem1_check,
};

const SUFF: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Independent CMI from a dense (a, b, c) table: Σ p log p(abc)p(c)/(p(ac)p(bc)).
fn cmi_abc(p: &[f64], na: usize, nb: usize, nc: usize) -> f64 {
    let at = |a: usize, b: usize, c: usize| p[(a * nb + b) * nc + c];
    let mut total = 0.0;
    for c in 0..nc {
        let pc: f64 = (0..na).flat_map(|a| (0..nb).map(move |b| (a, b))).map(|(a, b)| at(a, b, c)).sum();
        for a in 0..na {
            let pac: f64 = (0..nb).map(|b| at(a, b, c)).sum();
            for b in 0..nb {
                let pbc: f64 = (0..na).map(|a| at(a, b, c)).sum();
                let v = at(a, b, c);
                if v > 0.0 {
                    total += v * (v * pc / (pac * pbc)).log2();
                }
            }
        }
    }
    total
}

/// I(θ; X | T(X)) computed directly from the family's slices.
fn brute_sufficiency_cmi(f: &ParamFamily, labels: &[usize]) -> f64 {
    let (nt, nx) = (f.theta().size(), f.obs_size());
    let nc = labels.iter().max().map_or(0, |m| m + 1);
    let mut p = vec![0.0; nt * nx * nc];
    for t in 0..nt {
        for x in 0..nx {
            p[(t * nx + x) * nc + labels[x]] += f.prior()[t] * f.slice(t)[x];
        }
    }
    cmi_abc(&p, nt, nx, nc)
}

fn c1_sufficiency() -> Outcome {
    let f = fam_bin();
    let x = f.obs_alphabet();
    let count = is_sufficient(&f, &count_statistic(&x), SUFF).unwrap();
    let parity = is_sufficient(&f, &parity_statistic(&x), SUFF).unwrap();
    let oracle_parity = brute_sufficiency_cmi(&f, &[0, 1, 1, 0]);
    let pass = count.cmi_bits <= SUFF
        && count.holds
        && parity.cmi_bits > 0.05
        && !parity.holds
        && (parity.cmi_bits - oracle_parity).abs() <= 1e-12;
    outcome(
        pass,
        format!("count I={:.3e} ≤ 1e-9, parity I={:.6} > 0.05 (oracle {:.6})", count.cmi_bits, parity.cmi_bits, oracle_parity),
    )
}

fn c2_minimal() -> Outcome {
    let f = fam_bin();
    let m = minimal_sufficient(&f);
    let expected = [0, 1, 1, 2];
    let x = f.obs_alphabet();
    let all = all_statistics(&x);
    let sufficient: Vec<&Statistic> =
        all.iter().filter(|t| brute_sufficiency_cmi(&f, t.labels()) <= SUFF).collect();
    // Unique coarsest: every sufficient partition refines it, and it is the
    // only sufficient one with that few classes.
    let refines = sufficient.iter().all(|t| m.is_coarsening_of(t).unwrap());
    let coarsest: Vec<_> = sufficient.iter().filter(|t| t.num_classes() <= m.num_classes()).collect();
    let pass = all.len() == 15 && m.labels() == expected && refines && coarsest.len() == 1;
    outcome(
        pass,
        format!(
            "partition {:?}, {} of {} partitions sufficient, all refine it: {refines}",
            m.class_symbols(),
            sufficient.len(),
            all.len()
        ),
    )
}

fn c3_theorem1() -> Outcome {
    let h = fam_dep(2);
    let axes = h.family().obs_axes().to_vec();
    let (x, y) = (&axes[0], &axes[1]);
    let tw = Statistic::identity(h.w().clone());
    let good = theorem1_check(&h, &tw, &count_statistic(x), &count_statistic(y), SUFF).unwrap();
    let bad = theorem1_check(&h, &tw, &parity_statistic(x), &count_statistic(y), SUFF).unwrap();
    let c = good.conclusion.verdict.cmi_bits;
    let pb = bad.conclusion.verdict.cmi_bits;
    let pass = good.premises_hold() && c <= SUFF && pb > 1e-3;
    outcome(
        pass,
        format!("premises hold: {}, conclusion I={c:.3e} ≤ 1e-9, parity Tx I={pb:.6} > 1e-3", good.premises_hold()),
    )
}

fn c4_conditional() -> Outcome {
    let f = discretized_triangle_family();
    let t = minimal_conditional_sufficient(&f, "X", "Y").unwrap();
    let sub = f.marginal_family(&["X", "Y"]).unwrap();
    let (nx, ny, nt) = (6, 6, f.theta().size());
    // Brute-force pairwise oracle: x ~ x' iff for every y the θ-profiles of
    // p(x,y|θ) and p(x',y|θ) have the same support and are proportional.
    let prof = |x: usize, y: usize| -> Vec<f64> { (0..nt).map(|th| sub.slice(th)[x * ny + y]).collect() };
    let equivalent = |a: usize, b: usize| {
        (0..ny).all(|y| {
            let (p, q) = (prof(a, y), prof(b, y));
            let supp = |v: &[f64]| v.iter().map(|&z| z > 0.0).collect::<Vec<_>>();
            if supp(&p) != supp(&q) {
                return false;
            }
            let r: Vec<f64> = p.iter().zip(&q).filter(|(a, _)| **a > 0.0).map(|(a, b)| b / a).collect();
            r.windows(2).all(|w| (w[0] - w[1]).abs() <= 1e-9 * w[0].abs().max(w[1].abs()))
        })
    };
    let oracle_ok = (0..nx).all(|a| (0..nx).all(|b| equivalent(a, b) == (t.labels()[a] == t.labels()[b])));
    // With one sample per node the maximum coordinate is x itself.
    let max_partition = Statistic::identity(f.obs_axes()[0].clone());
    let is_max = t.labels() == max_partition.labels();
    let v = is_conditionally_sufficient(&f, &t, "Y", SUFF).unwrap();
    let pass = oracle_ok && is_max && v.cmi_bits <= SUFF;
    outcome(
        pass,
        format!("{} classes, max-coordinate partition: {is_max}, ratio oracle agrees: {oracle_ok}, I={:.3e}", t.num_classes(), v.cmi_bits),
    )
}

fn c5_corner() -> Outcome {
    let m = ab_pair();
    let h = corner_point(&m);
    let f = ak_frontier(&m, &FrontierOptions::new(m.y().size() + 2, 200, 1)).unwrap();
    let best = f
        .points
        .iter()
        .filter(|p| p.r1_bits <= 1e-6)
        .map(|p| (p.r2_bits - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let pass = (h - 1.0).abs() <= 1e-9 && best <= 0.02;
    outcome(pass, format!("H(T*)={h:.12} (1 ± 1e-9); frontier point with R1 ≤ 1e-6 has |R2−1|={best:.3e} ≤ 0.02"))
}

/// X ∈ 3 symbols; Y = (V, N) with V driving X and N an independent fair
/// coin, so T(Y) = V is sufficient for X and Y has 6 symbols, 3 profiles.
fn redundant_pair() -> (SourceModel, Statistic) {
    let pv = [0.5, 0.3, 0.2];
    let px_v = [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.2, 0.2, 0.6]];
    let x = Alphabet::indexed("X", 3);
    let y = Alphabet::new("Y", ["a0", "a1", "b0", "b1", "c0", "c1"]).unwrap();
    let j = JointDistribution::from_fn(vec![x, y.clone()], |c| pv[c[1] / 2] * px_v[c[1] / 2][c[0]] * 0.5).unwrap();
    let t = Statistic::from_fn(y, |i| i / 2);
    (SourceModel::pair(j).unwrap(), t)
}

fn c6_theorem6() -> Outcome {
    let (m, t) = redundant_pair();
    let r = theorem6_compare(&m, &t, &FrontierOptions::new(m.y().size() + 2, 200, 7), SUFF).unwrap();
    let pass = r.gap_bits <= 0.02 && r.lift_gap_bits <= 1e-9;
    outcome(
        pass,
        format!(
            "gap {:.3e} ≤ 0.02 ({} full / {} reduced points), R'⊆R lift gap {:.3e} ≤ 1e-9",
            r.gap_bits,
            r.full.points.len(),
            r.reduced.points.len(),
            r.lift_gap_bits
        ),
    )
}

fn c7_binary_rd() -> Outcome {
    let grid = [0.05, 0.1, 0.2];
    let c = conditional_remote_rd(&bernoulli_remote(), &grid, 1e-10).unwrap();
    let worst = c
        .points
        .iter()
        .map(|p| (p.rate_bits - (1.0 - h2(p.distortion))).abs())
        .fold(0.0, f64::max);
    let rates: Vec<String> = c.points.iter().map(|p| format!("R({})={:.6}", p.distortion, p.rate_bits)).collect();
    outcome(worst <= 0.005, format!("{}; max |R − (1 − h2(D))| = {worst:.3e} ≤ 0.005", rates.join(", ")))
}

fn c8_rd_equality() -> Outcome {
    let m = noisy_copy_remote(0.1);
    let (d_min, d_max) = distortion_range(&m).unwrap();
    let grid: Vec<f64> = (0..=10).map(|i| d_min + (d_max - d_min) * i as f64 / 10.0).collect();
    let x = m.x().clone();
    let z_component = Statistic::from_fn(x.clone(), |i| i / 2);
    let noise_component = Statistic::from_fn(x, |i| i % 2);
    let good = rd_equality_check(&m, &z_component, &grid, 1e-10, SUFF).unwrap();
    let bad = rd_equality_check(&m, &noise_component, &grid, 1e-10, SUFF);
    let rejected = matches!(&bad, Err(e) if e.code() == "PRECONDITION_FAILED");
    outcome(
        good.max_abs_diff_bits <= 0.01 && rejected,
        format!("max |R − R'| = {:.3e} ≤ 0.01 over {} points; noise component rejected: {rejected}", good.max_abs_diff_bits, grid.len()),
    )
}

/// Solves `a · v = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut v = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * v[k]).sum();
        v[r] = (b[r] - s) / a[r][r];
    }
    v
}

/// Posterior of θ from the (2n+1)-dimensional joint Gaussian by Schur complement.
fn schur_posterior(cfg: &GaussianHciConfig, obs: &[f64]) -> (f64, f64) {
    let (v0, m) = (cfg.prior_var, obs.len());
    let cov: Vec<Vec<f64>> =
        (0..m).map(|i| (0..m).map(|j| v0 + cfg.rho + if i == j { 1.0 - cfg.rho } else { 0.0 }).collect()).collect();
    let resid: Vec<f64> = obs.iter().map(|o| o - cfg.prior_mean).collect();
    let w = solve(cov, vec![v0; m]);
    let mean = cfg.prior_mean + w.iter().zip(&resid).map(|(a, b)| a * b).sum::<f64>();
    let var = v0 - v0 * w.iter().sum::<f64>();
    (mean, var)
}

fn c9_gaussian() -> Outcome {
    let mut s = Stream::new(2024, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let cfg = GaussianHciConfig {
            n: 1 + (s.next_u64() % 6) as usize,
            rho: 0.02 + 0.96 * s.uniform(),
            prior_mean: 6.0 * s.uniform() - 3.0,
            prior_var: 0.1 + 3.9 * s.uniform(),
            seed: 0,
        };
        let post = GaussianPosterior::new(&cfg).unwrap();
        let obs: Vec<f64> = (0..2 * cfg.n).map(|_| cfg.prior_mean + 2.0 * s.normal()).collect();
        let (x, y) = obs.split_at(cfg.n);
        let full = post.full(x, y).unwrap();
        let red = post.reduced(x.iter().sum(), y.iter().sum());
        let (om, ov) = schur_posterior(&cfg, &obs);
        for d in [full.mean - red.mean, full.var - red.var, full.mean - om, full.var - ov, red.mean - om, red.var - ov] {
            worst = worst.max(d.abs());
        }
    }
    let cfg = GaussianHciConfig { n: 3, rho: 0.5, prior_mean: 0.0, prior_var: 1.0, seed: 11 };
    let mc = gaussian_mc_mse(&cfg, 100_000).unwrap();
    let diff = mc.mean_diff.abs();
    let pass = worst <= 1e-10 && diff <= 3.0 * mc.diff_std_err;
    outcome(
        pass,
        format!(
            "max moment gap {worst:.3e} ≤ 1e-10 (1000 configs, Schur oracle); MSE full {:.6} reduced {:.6}, paired |Δ|={diff:.3e} ≤ 3·SE={:.3e}",
            mc.mse_full,
            mc.mse_reduced,
            3.0 * mc.diff_std_err
        ),
    )
}

fn c10_qam() -> Outcome {
    let th = default_thresholds();
    let r = qam_roc_compare(&QamConfig::qam4(4, 1.0, 5), 10_000, &th).unwrap();
    let noisy = qam_roc_compare(&QamConfig::qam4(4, 4.0, 5), 10_000, &th).unwrap();
    let rows_equal = r.rows.iter().all(|w| w.pfa_full == w.pfa_magnitude && w.pd_full == w.pd_magnitude);
    let pass = r.max_lr_rel_gap <= 1e-12 && r.identical && rows_equal && r.auc_full > noisy.auc_full;
    outcome(
        pass,
        format!(
            "max LR rel gap {:.3e} ≤ 1e-12, {} ROC rows identical: {rows_equal}; AUC σ²=1 {:.4} > σ²=4 {:.4}",
            r.max_lr_rel_gap,
            r.rows.len(),
            r.auc_full,
            noisy.auc_full
        ),
    )
}

fn random_joint(s: &mut Stream, names: &[&str], max: usize) -> JointDistribution {
    let axes: Vec<Alphabet> = names.iter().map(|n| Alphabet::indexed(*n, 2 + (s.next_u64() as usize) % (max - 1))).collect();
    let cells: usize = axes.iter().map(Alphabet::size).product();
    // Sparse-ish tables exercise the 0·log 0 conventions.
    let mut w: Vec<f64> = (0..cells).map(|_| if s.uniform() < 0.2 { 0.0 } else { s.uniform() }).collect();
    if w.iter().all(|&v| v == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    JointDistribution::new(axes, w.iter().map(|v| v / total).collect()).unwrap()
}

fn c11_properties() -> Outcome {
    let mut s = Stream::new(99, 1);
    let (mut dpi, mut chain, mut achiev, mut convex) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        // Data processing: A − B − f(B) gives I(A; f(B)) ≤ I(A; B).
        let j = random_joint(&mut s, &["A", "B"], 5);
        let nb = j.axis("B").unwrap().size();
        let f = Statistic::from_fn(j.axis("B").unwrap().clone(), |i| (i * 7 + s.next_u64() as usize) % (nb - 1).max(1));
        let jf = f.attach(&j, "B", "F").unwrap();
        dpi = dpi.max(jf.mutual_information(&["A"], &["F"]).unwrap() - jf.mutual_information(&["A"], &["B"]).unwrap());
        assert!(check_markov(&jf, &["A"], &["B"], &["F"], SUFF).unwrap().holds);
    }
    for _ in 0..100 {
        // Chain rule: I(A; B,C | D) = I(A; C | D) + I(A; B | C, D).
        let j = random_joint(&mut s, &["A", "B", "C", "D"], 3);
        let lhs = j.conditional_mutual_information(&["A"], &["B", "C"], &["D"]).unwrap();
        let rhs = j.conditional_mutual_information(&["A"], &["C"], &["D"]).unwrap()
            + j.conditional_mutual_information(&["A"], &["B"], &["C", "D"]).unwrap();
        chain = chain.max((lhs - rhs).abs());
    }
    for i in 0..100 {
        // Every stored frontier point is reproduced from its channel.
        let m = SourceModel::pair(random_joint(&mut s, &["X", "Y"], 4)).unwrap();
        let f = ak_frontier(&m, &FrontierOptions::new(m.y().size() + 2, 10, i)).unwrap();
        achiev = achiev.max(achievability_gap(&m, &f));
    }
    for _ in 0..100 {
        // R(D) is convex on a uniform grid over [D_min, D_max].
        let j = random_joint(&mut s, &["X", "Y", "Z"], 3);
        let z = j.axis("Z").unwrap().clone();
        let m = SourceModel::remote(j, Distortion::hamming(&z)).unwrap();
        let (lo, hi) = distortion_range(&m).unwrap();
        let grid: Vec<f64> = (0..=8).map(|k| lo + (hi - lo) * k as f64 / 8.0).collect();
        convex = convex.max(convexity_violation(&conditional_remote_rd(&m, &grid, 1e-10).unwrap()));
    }
    let pass = dpi <= 1e-12 && chain <= 1e-12 && achiev <= 1e-9 && convex <= 1e-6;
    outcome(
        pass,
        format!(
            "DPI excess {dpi:.1e} ≤ 1e-12, chain rule {chain:.1e} ≤ 1e-12, achievability {achiev:.1e} ≤ 1e-9, convexity {convex:.1e} ≤ 1e-6 (100 models each)"
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (u32, &'static str, u64, fn() -> Outcome);
    let criteria: [Criterion; 11] = [
        (1, "sufficiency soundness (FAM-BIN)", 1, c1_sufficiency),
        (2, "minimal sufficient statistic", 1, c2_minimal),
        (3, "HCI pipeline (FAM-DEP, 2 samples)", 5, c3_theorem1),
        (4, "minimal conditional statistic (triangle grid)", 10, c4_conditional),
        (5, "corner point and frontier", 60, c5_corner),
        (6, "frontier equality under sufficient reduction", 120, c6_theorem6),
        (7, "binary remote rate-distortion", 30, c7_binary_rd),
        (8, "rate-distortion equality under reduction", 60, c8_rd_equality),
        (9, "Gaussian posterior moments and MSE", 60, c9_gaussian),
        (10, "QAM likelihood ratio and ROC", 30, c10_qam),
        (11, "property suites", 120, c11_properties),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let o = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{id:>2}] {name}: {} [{:.2}s / {budget}s]",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            took.as_secs_f64()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
