//! Small reference models used by `selftest`, the examples and the tests.

use crate::model::{Alphabet, Channel, JointDistribution, ParamFamily};
use crate::source_coding::{Distortion, SourceModel};
use crate::statistic::Statistic;
use crate::sufficiency::HciModel;

/// Bit strings of length `n` in lexicographic order: "00", "01", …
pub fn bit_strings(n: usize) -> Vec<String> {
    (0..1usize << n).map(|i| format!("{i:0n$b}")).collect()
}

pub fn bits_alphabet(name: &str, n: usize) -> Alphabet {
    Alphabet::new(name, bit_strings(n)).expect("distinct bit strings")
}

fn ones(symbol: &str) -> usize {
    symbol.chars().filter(|&c| c == '1').count()
}

/// Number of ones in each bit-string symbol.
pub fn count_statistic(domain: &Alphabet) -> Statistic {
    Statistic::from_fn(domain.clone(), |i| ones(domain.symbol(i)))
}

/// Parity of the number of ones.
pub fn parity_statistic(domain: &Alphabet) -> Statistic {
    Statistic::from_fn(domain.clone(), |i| ones(domain.symbol(i)) % 2)
}

/// Probability of the bit string `s` under iid Bernoulli(p).
fn iid_bits(s: &str, p: f64) -> f64 {
    let k = ones(s) as i32;
    p.powi(k) * (1.0 - p).powi(s.len() as i32 - k)
}

/// θ ∈ {0, 1} uniform; X = (X1, X2) iid Bernoulli(0.2) or Bernoulli(0.8).
pub fn fam_bin() -> ParamFamily {
    let x = bits_alphabet("X", 2);
    let theta = Alphabet::new("theta", ["0", "1"]).expect("bits");
    let p = [0.2, 0.8];
    ParamFamily::from_fn(theta, vec![0.5, 0.5], vec![x.clone()], |t, o| iid_bits(x.symbol(o[0]), p[t]))
        .expect("valid family")
}

/// θ ∈ {0, 1} uniform, W = θ flipped w.p. 0.1, and `samples` iid
/// Bernoulli(q_W) bits at each of two nodes X and Y, q = (0.25, 0.75).
pub fn fam_dep(samples: usize) -> HciModel {
    let theta = Alphabet::new("theta", ["0", "1"]).expect("bits");
    let w = Alphabet::new("W", ["0", "1"]).expect("bits");
    let x = bits_alphabet("X", samples);
    let y = bits_alphabet("Y", samples);
    let q = [0.25, 0.75];
    let flip = 0.1;
    let w_given_theta = Channel::from_rows(&[vec![1.0 - flip, flip], vec![flip, 1.0 - flip]]).expect("rows");
    let no = x.size() * y.size();
    let obs_rows: Vec<Vec<f64>> = (0..2)
        .map(|wv| {
            (0..no)
                .map(|o| iid_bits(x.symbol(o / y.size()), q[wv]) * iid_bits(y.symbol(o % y.size()), q[wv]))
                .collect()
        })
        .collect();
    let obs_given_w = Channel::from_rows(&obs_rows).expect("rows");
    let composed = w_given_theta.compose(&obs_given_w).expect("shapes");
    let family = ParamFamily::from_fn(theta, vec![0.5, 0.5], vec![x, y], |t, o| {
        composed.get(t, o[0] * no / (1usize << samples) + o[1])
    })
    .expect("valid family");
    HciModel::new(family, w, w_given_theta, obs_given_w).expect("consistent by construction")
}

/// Y = (A, B) two fair bits, X = A.
pub fn ab_pair() -> SourceModel {
    let x = Alphabet::new("X", ["0", "1"]).expect("bits");
    let y = bits_alphabet("Y", 2);
    let j = JointDistribution::from_fn(vec![x, y.clone()], |c| {
        if y.symbol(c[1]).starts_with(if c[0] == 0 { '0' } else { '1' }) {
            0.25
        } else {
            0.0
        }
    })
    .expect("valid joint");
    SourceModel::pair(j).expect("two axes")
}

/// Z = X ~ Bernoulli(1/2), constant Y, Hamming loss: R(D) = 1 − h2(D).
pub fn bernoulli_remote() -> SourceModel {
    let x = Alphabet::new("X", ["0", "1"]).expect("bits");
    let y = Alphabet::new("Y", ["*"]).expect("one symbol");
    let z = Alphabet::new("Z", ["0", "1"]).expect("bits");
    let j = JointDistribution::from_fn(vec![x, y, z.clone()], |c| if c[0] == c[2] { 0.5 } else { 0.0 })
        .expect("valid joint");
    SourceModel::remote(j, Distortion::hamming(&z)).expect("three axes")
}

/// Z a fair bit, X = (Z, N) with an independent fair bit N, and Y = Z
/// flipped w.p. `flip`. The Z-component of X is conditionally sufficient.
pub fn noisy_copy_remote(flip: f64) -> SourceModel {
    let x = bits_alphabet("X", 2);
    let y = Alphabet::new("Y", ["0", "1"]).expect("bits");
    let z = Alphabet::new("Z", ["0", "1"]).expect("bits");
    let j = JointDistribution::from_fn(vec![x, y, z.clone()], |c| {
        let (zx, yv, zv) = (c[0] / 2, c[1], c[2]);
        if zx != zv {
            0.0
        } else {
            0.25 * if yv == zv { 1.0 - flip } else { flip }
        }
    })
    .expect("valid joint");
    SourceModel::remote(j, Distortion::hamming(&z)).expect("three axes")
}

/// First character of each bit-string symbol of `domain`.
pub fn first_bit_statistic(domain: &Alphabet) -> Statistic {
    Statistic::from_fn(domain.clone(), |i| domain.symbol(i).chars().next())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fam_dep_slices_are_mixtures() {
        let h = fam_dep(1);
        let f = h.family();
        // p(x=0, y=0 | θ=0) = 0.9·0.75² + 0.1·0.25²
        assert!((f.slice(0)[0] - (0.9 * 0.5625 + 0.1 * 0.0625)).abs() < 1e-15);
        assert_eq!(fam_dep(2).family().obs_size(), 16);
    }

    #[test]
    fn statistics_on_bit_strings() {
        let x = bits_alphabet("X", 2);
        assert_eq!(count_statistic(&x).labels(), &[0, 1, 1, 2]);
        assert_eq!(parity_statistic(&x).labels(), &[0, 1, 1, 0]);
        assert_eq!(first_bit_statistic(&x).labels(), &[0, 0, 1, 1]);
    }
}
