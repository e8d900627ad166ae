//! Deterministic statistics stored as canonical partitions of an alphabet.
//!
//! A [`Statistic`] assigns each domain symbol a class index. Classes are
//! numbered by first occurrence in domain order, so two maps that induce the
//! same partition compare equal.

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Alphabet, JointDistribution};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Statistic {
    domain: Alphabet,
    labels: Vec<usize>,
    num_classes: usize,
}

/// Renumbers arbitrary labels by first occurrence.
fn canonical_labels<K: Eq + Hash>(raw: impl IntoIterator<Item = K>) -> (Vec<usize>, usize) {
    let mut ids: HashMap<K, usize> = HashMap::new();
    let labels: Vec<usize> = raw
        .into_iter()
        .map(|k| {
            let next = ids.len();
            *ids.entry(k).or_insert(next)
        })
        .collect();
    (labels, ids.len())
}

impl Statistic {
    /// Statistic `x ↦ f(x)` on `domain`, canonicalized.
    pub fn from_fn<K: Eq + Hash>(domain: Alphabet, f: impl FnMut(usize) -> K) -> Self {
        let (labels, num_classes) = canonical_labels((0..domain.size()).map(f));
        Statistic { domain, labels, num_classes }
    }

    /// Statistic from per-symbol labels in domain order.
    pub fn from_labels<K: Eq + Hash + Clone>(domain: Alphabet, raw: &[K]) -> Result<Self> {
        if raw.len() != domain.size() {
            return Err(Error::DomainMismatch(format!(
                "{} labels for alphabet {:?} of size {}",
                raw.len(),
                domain.name(),
                domain.size()
            )));
        }
        Ok(Self::from_fn(domain, |i| raw[i].clone()))
    }

    /// Canonical statistic from a symbol → label map that must cover the domain.
    pub fn canonicalize(domain: Alphabet, raw: &HashMap<String, String>) -> Result<Self> {
        let mut out = Vec::with_capacity(domain.size());
        for s in domain.symbols() {
            out.push(raw.get(s).ok_or_else(|| Error::MissingSymbol(s.clone()))?.clone());
        }
        if let Some(extra) = raw.keys().find(|k| domain.index_of(k).is_none()) {
            return Err(Error::UnknownSymbol {
                axis: domain.name().to_string(),
                symbol: extra.clone(),
            });
        }
        Self::from_labels(domain, &out)
    }

    pub fn identity(domain: Alphabet) -> Self {
        Self::from_fn(domain, |i| i)
    }

    pub fn constant(domain: Alphabet) -> Self {
        Self::from_fn(domain, |_| ())
    }

    pub fn domain(&self) -> &Alphabet {
        &self.domain
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Domain indices in each class, classes in canonical order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    pub fn class_symbols(&self) -> Vec<Vec<String>> {
        self.classes()
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.domain.symbol(i).to_string()).collect())
            .collect()
    }

    /// Output alphabet with symbols `"0"..num_classes-1`.
    pub fn image(&self, name: impl Into<String>) -> Alphabet {
        Alphabet::indexed(name, self.num_classes)
    }

    /// Same partition on a renamed domain (symbols unchanged).
    pub fn on_axis(&self, name: &str) -> Statistic {
        Statistic {
            domain: self.domain.renamed(name),
            labels: self.labels.clone(),
            num_classes: self.num_classes,
        }
    }

    /// The pair (self, other) acting on the product alphabet.
    pub fn product(&self, other: &Statistic) -> Result<Statistic> {
        if self.domain.name() == other.domain.name() {
            return Err(Error::SameDomain(self.domain.name().to_string()));
        }
        let domain = Alphabet::product(&[&self.domain, &other.domain])?;
        let m = other.domain.size();
        Ok(Self::from_fn(domain, |i| (self.labels[i / m], other.labels[i % m])))
    }

    /// True iff `self` is a function of `finer` (the partition of `finer`
    /// refines that of `self`).
    pub fn is_coarsening_of(&self, finer: &Statistic) -> Result<bool> {
        if self.domain.symbols() != finer.domain.symbols() {
            return Err(Error::DomainMismatch(format!(
                "{:?} vs {:?}",
                self.domain.name(),
                finer.domain.name()
            )));
        }
        let mut image = vec![usize::MAX; finer.num_classes];
        for (&u, &t) in finer.labels.iter().zip(&self.labels) {
            if image[u] == usize::MAX {
                image[u] = t;
            } else if image[u] != t {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_axis(&self, dist: &JointDistribution, axis: &str) -> Result<()> {
        let a = dist.axis(axis)?;
        if a.symbols() != self.domain.symbols() {
            return Err(Error::DomainMismatch(format!(
                "statistic on {:?} applied to axis {axis:?}",
                self.domain.name()
            )));
        }
        Ok(())
    }

    /// Replaces `axis` by the statistic value (mass of each class summed).
    pub fn push_forward(&self, dist: &JointDistribution, axis: &str) -> Result<JointDistribution> {
        self.check_axis(dist, axis)?;
        dist.map_axis(axis, &self.labels, self.image(axis))
    }

    /// Appends the statistic value as a new axis named `name`, keeping `axis`.
    pub fn attach(&self, dist: &JointDistribution, axis: &str, name: &str) -> Result<JointDistribution> {
        self.check_axis(dist, axis)?;
        dist.append_function_axis(axis, &self.labels, self.image(name))
    }
}

/// All set partitions of `{0..n}` with at most `max_blocks` blocks, as
/// restricted growth strings in lexicographic order.
pub fn set_partitions(n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 || max_blocks == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    fn rec(pos: usize, used: usize, max_blocks: usize, rgs: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == rgs.len() {
            out.push(rgs.clone());
            return;
        }
        let top = (used + 1).min(max_blocks);
        for v in 0..top {
            rgs[pos] = v;
            rec(pos + 1, used.max(v + 1), max_blocks, rgs, out);
        }
    }
    rec(1, 1, max_blocks, &mut rgs, &mut out);
    out
}

/// Every statistic on `domain` (Bell(|domain|) of them).
pub fn all_statistics(domain: &Alphabet) -> Vec<Statistic> {
    set_partitions(domain.size(), domain.size())
        .into_iter()
        .map(|rgs| Statistic { domain: domain.clone(), num_classes: rgs.iter().max().map_or(0, |m| m + 1), labels: rgs })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x4() -> Alphabet {
        Alphabet::new("X", ["00", "01", "10", "11"]).unwrap()
    }

    #[test]
    fn canonicalize_examples() {
        let abc = Alphabet::new("A", ["a", "b", "c"]).unwrap();
        assert_eq!(Statistic::identity(abc.clone()).num_classes(), 3);
        assert_eq!(Statistic::constant(abc).num_classes(), 1);
        let raw: HashMap<String, String> = [("00", "s0"), ("01", "s1"), ("10", "s1"), ("11", "s2")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let t = Statistic::canonicalize(x4(), &raw).unwrap();
        assert_eq!(t.labels(), &[0, 1, 1, 2]);
        let relabeled: HashMap<String, String> =
            raw.iter().map(|(k, v)| (k.clone(), format!("z{v}"))).collect();
        assert_eq!(Statistic::canonicalize(x4(), &relabeled).unwrap(), t);
        let mut partial = raw.clone();
        partial.remove("10");
        assert_eq!(Statistic::canonicalize(x4(), &partial).unwrap_err().code(), "MISSING_SYMBOL");
    }

    #[test]
    fn product_examples() {
        let x = x4();
        let y = Alphabet::new("Y", ["0", "1"]).unwrap();
        let id = Statistic::identity(x.clone()).product(&Statistic::identity(y.clone())).unwrap();
        assert_eq!(id.num_classes(), 8);
        let lifted = Statistic::constant(x.clone())
            .product(&Statistic::from_labels(y.clone(), &[0, 1]).unwrap())
            .unwrap();
        assert_eq!(lifted.labels(), &[0, 1, 0, 1, 0, 1, 0, 1]);
        let count = Statistic::from_labels(x.clone(), &[0, 1, 1, 2]).unwrap();
        let parity = Statistic::from_labels(y, &[0, 1]).unwrap();
        let p = count.product(&parity).unwrap();
        // Reachable pairs: (0,0)(0,1)(1,0)(1,1)(2,0)(2,1).
        assert_eq!(p.labels(), &[0, 1, 2, 3, 2, 3, 4, 5]);
        assert_eq!(count.product(&count).unwrap_err().code(), "SAME_DOMAIN");
    }

    #[test]
    fn coarsening_examples() {
        let x = x4();
        let id = Statistic::identity(x.clone());
        let c = Statistic::constant(x.clone());
        let count = Statistic::from_labels(x.clone(), &[0, 1, 1, 2]).unwrap();
        assert!(c.is_coarsening_of(&count).unwrap());
        assert!(count.is_coarsening_of(&id).unwrap());
        assert!(!id.is_coarsening_of(&count).unwrap());
        let other = Statistic::identity(Alphabet::indexed("Q", 4));
        assert_eq!(id.is_coarsening_of(&other).unwrap_err().code(), "DOMAIN_MISMATCH");
    }

    #[test]
    fn push_forward_count_on_slice() {
        let d = JointDistribution::new(vec![x4()], vec![0.64, 0.16, 0.16, 0.04]).unwrap();
        let count = Statistic::from_labels(x4(), &[0, 1, 1, 2]).unwrap();
        let out = count.push_forward(&d, "X").unwrap();
        for (a, b) in out.probs().iter().zip([0.64, 0.32, 0.04]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(Statistic::identity(x4()).push_forward(&d, "X").unwrap().probs(), d.probs());
        let c = Statistic::constant(x4()).push_forward(&d, "X").unwrap();
        assert_eq!(c.probs().len(), 1);
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=6).map(|n| set_partitions(n, n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52, 203]);
        // Stirling numbers of the second kind, S(5,1)+S(5,2) = 1 + 15.
        assert_eq!(set_partitions(5, 2).len(), 16);
        assert_eq!(all_statistics(&x4()).len(), 15);
    }
}
