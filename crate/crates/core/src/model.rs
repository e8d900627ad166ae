//! Finite-alphabet probability engine.
//!
//! Everything discrete in the crate runs on three values: an [`Alphabet`]
//! (named, ordered, distinct symbols), a dense [`JointDistribution`] over a
//! list of alphabets, and a [`ParamFamily`] holding a prior over θ together
//! with the conditional table p(obs | θ). Tensors are row-major with the last
//! axis varying fastest. Information quantities are in bits.

use serde::Serialize;

use crate::error::{Error, Result};

/// Input drift below this is renormalized silently; above it is an error.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Cells at or below this mass are exact zeros in information sums.
pub const ZERO_CELL: f64 = 1e-15;
/// Largest dense tensor the engine will allocate.
pub const MAX_CELLS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        symbols: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::ShapeMismatch(format!("alphabet {name:?} has no symbols")));
        }
        let mut seen = std::collections::HashSet::with_capacity(symbols.len());
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol { alphabet: name, symbol: s.clone() });
            }
        }
        Ok(Alphabet { name, symbols })
    }

    /// Alphabet with symbols `"0"`, `"1"`, … `"size-1"`.
    pub fn indexed(name: impl Into<String>, size: usize) -> Self {
        assert!(size >= 1, "alphabet size must be positive");
        Alphabet { name: name.into(), symbols: (0..size).map(|i| i.to_string()).collect() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn size(&self) -> usize {
        self.symbols.len()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Alphabet { name: name.into(), symbols: self.symbols.clone() }
    }

    /// Cartesian product, row-major. Names and symbols are joined with `,`.
    pub fn product(parts: &[&Alphabet]) -> Result<Self> {
        match parts {
            [] => Err(Error::EmptyAxisSet),
            [single] => Ok((*single).clone()),
            _ => {
                let name = parts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>().join(",");
                let sizes: Vec<usize> = parts.iter().map(|a| a.size()).collect();
                let total = checked_cells(&sizes)?;
                let mut symbols = Vec::with_capacity(total);
                for_each_index(&sizes, |coords, _| {
                    let s = coords
                        .iter()
                        .zip(parts)
                        .map(|(&c, a)| a.symbols[c].as_str())
                        .collect::<Vec<_>>()
                        .join(",");
                    symbols.push(s);
                });
                Alphabet::new(name, symbols)
            }
        }
    }
}

pub(crate) fn checked_cells(sizes: &[usize]) -> Result<usize> {
    let cells: u128 = sizes.iter().map(|&s| s as u128).product();
    if cells > MAX_CELLS as u128 {
        return Err(Error::TooLarge { cells, max: MAX_CELLS });
    }
    Ok(cells as usize)
}

/// Visits every multi-index of `shape` in row-major order.
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize], usize)) {
    let total: usize = shape.iter().product();
    let mut coords = vec![0usize; shape.len()];
    for flat in 0..total {
        f(&coords, flat);
        for k in (0..shape.len()).rev() {
            coords[k] += 1;
            if coords[k] < shape[k] {
                break;
            }
            coords[k] = 0;
        }
    }
}

fn row_major_multipliers(sizes: &[usize]) -> Vec<usize> {
    let mut m = vec![1usize; sizes.len()];
    for k in (0..sizes.len().saturating_sub(1)).rev() {
        m[k] = m[k + 1] * sizes[k + 1];
    }
    m
}

/// Checks nonnegativity and renormalizes a probability vector whose sum
/// drifts by at most [`NORMALIZATION_TOL`].
pub(crate) fn normalize_checked(what: &str, probs: &mut [f64]) -> Result<()> {
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() {
            return Err(Error::NonFiniteInput(format!("{what}[{i}] = {p}")));
        }
        if p < 0.0 {
            return Err(Error::NegativeProb { location: format!("{what}[{i}]"), value: p });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization { what: what.to_string(), sum });
    }
    if sum != 1.0 {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

/// `-Σ p log2 p` with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > ZERO_CELL).map(|&p| -p * p.log2()).sum();
    h.max(0.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

/// Dense joint probability tensor over named axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointDistribution {
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
}

/// Result of a conditional mutual information sum, with the cell that
/// contributed most (flat indices into the A, B and C groups).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CmiDetail {
    pub value: f64,
    pub top_cell: Option<(usize, usize, usize, f64)>,
}

impl JointDistribution {
    pub fn new(axes: Vec<Alphabet>, mut probs: Vec<f64>) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for a in &axes {
            if !names.insert(a.name()) {
                return Err(Error::DuplicateAxis(a.name().to_string()));
            }
        }
        let sizes: Vec<usize> = axes.iter().map(Alphabet::size).collect();
        let cells = checked_cells(&sizes)?;
        if probs.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "tensor has {} cells, axes {:?} need {cells}",
                probs.len(),
                sizes
            )));
        }
        normalize_checked("joint", &mut probs)?;
        Ok(JointDistribution { axes, probs })
    }

    pub fn from_fn(axes: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let sizes: Vec<usize> = axes.iter().map(Alphabet::size).collect();
        let cells = checked_cells(&sizes)?;
        let mut probs = Vec::with_capacity(cells);
        for_each_index(&sizes, |c, _| probs.push(f(c)));
        Self::new(axes, probs)
    }

    /// Skips validation; only for tensors produced by exact mass-preserving
    /// operations on an already valid distribution.
    fn derived(axes: Vec<Alphabet>, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), axes.iter().map(Alphabet::size).product::<usize>());
        JointDistribution { axes, probs }
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Alphabet::size).collect()
    }

    pub fn axis_index(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn axis(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.axes[self.axis_index(name)?])
    }

    pub fn prob(&self, index: &[usize]) -> f64 {
        let m = row_major_multipliers(&self.shape());
        self.probs[index.iter().zip(&m).map(|(i, m)| i * m).sum::<usize>()]
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.axis_index(n)).collect()
    }

    /// Sums out every axis not in `order` and lays the remaining axes out in
    /// the order given.
    fn project(&self, order: &[usize]) -> Vec<f64> {
        let shape = self.shape();
        let out_sizes: Vec<usize> = order.iter().map(|&k| shape[k]).collect();
        let out_mult = row_major_multipliers(&out_sizes);
        let mut mult = vec![0usize; shape.len()];
        for (pos, &k) in order.iter().enumerate() {
            mult[k] = out_mult[pos];
        }
        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut coords = vec![0usize; shape.len()];
        let mut o = 0usize;
        for &p in &self.probs {
            out[o] += p;
            for k in (0..shape.len()).rev() {
                coords[k] += 1;
                o += mult[k];
                if coords[k] < shape[k] {
                    break;
                }
                o -= mult[k] * shape[k];
                coords[k] = 0;
            }
        }
        out
    }

    /// Marginal on `keep`; kept axes stay in their original order.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDistribution> {
        if keep.is_empty() {
            return Err(Error::EmptyAxisSet);
        }
        let mut idx = self.indices(keep)?;
        idx.sort_unstable();
        idx.dedup();
        let probs = self.project(&idx);
        let axes = idx.iter().map(|&k| self.axes[k].clone()).collect();
        Ok(Self::derived(axes, probs))
    }

    /// Slice at `axis = value`, renormalized over the remaining axes.
    pub fn condition(&self, axis: &str, value: &str) -> Result<JointDistribution> {
        let k = self.axis_index(axis)?;
        let v = self.axes[k].index_of(value).ok_or_else(|| Error::UnknownSymbol {
            axis: axis.to_string(),
            symbol: value.to_string(),
        })?;
        if self.axes.len() == 1 {
            return Err(Error::EmptyAxisSet);
        }
        let shape = self.shape();
        let mut probs = Vec::with_capacity(self.probs.len() / shape[k]);
        for_each_index(&shape, |c, flat| {
            if c[k] == v {
                probs.push(self.probs[flat]);
            }
        });
        let mass: f64 = probs.iter().sum();
        if mass <= 0.0 {
            return Err(Error::ZeroEvent { axis: axis.to_string(), value: value.to_string() });
        }
        probs.iter_mut().for_each(|p| *p /= mass);
        let axes = self
            .axes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, a)| a.clone())
            .collect();
        Ok(Self::derived(axes, probs))
    }

    /// Shannon entropy (bits) of the marginal on `axes`; the empty set gives 0.
    pub fn entropy(&self, axes: &[&str]) -> Result<f64> {
        if axes.is_empty() {
            return Ok(0.0);
        }
        let idx = self.indices(axes)?;
        Ok(entropy_bits(&self.project(&idx)))
    }

    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// I(A;B|C) in bits by direct summation over the joint. Clamped at 0.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64> {
        Ok(self.cmi_detail(a, b, c)?.value)
    }

    pub(crate) fn cmi_detail(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<CmiDetail> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyAxisSet);
        }
        let ia = self.indices(a)?;
        let ib = self.indices(b)?;
        let ic = self.indices(c)?;
        let mut seen = std::collections::HashSet::new();
        for &k in ia.iter().chain(&ib).chain(&ic) {
            if !seen.insert(k) {
                return Err(Error::AxisOverlap(self.axes[k].name().to_string()));
            }
        }
        let shape = self.shape();
        let na: usize = ia.iter().map(|&k| shape[k]).product();
        let nb: usize = ib.iter().map(|&k| shape[k]).product();
        let nc: usize = ic.iter().map(|&k| shape[k]).product();
        let order: Vec<usize> = ia.iter().chain(&ib).chain(&ic).copied().collect();
        let abc = self.project(&order);
        Ok(cmi_table(&abc, na, nb, nc))
    }

    /// Symbols of each axis in `names` for a flat index into their product.
    pub(crate) fn decode(&self, names: &[&str], mut flat: usize) -> Vec<String> {
        let mut out = vec![String::new(); names.len()];
        for (pos, n) in names.iter().enumerate().rev() {
            let a = &self.axes[self.axis_index(n).expect("decoded axis exists")];
            out[pos] = a.symbol(flat % a.size()).to_string();
            flat /= a.size();
        }
        out
    }

    /// Replaces the axes in `names` with one product axis called `new_name`,
    /// placed where the first of them was.
    pub fn merge_axes(&self, names: &[&str], new_name: &str) -> Result<JointDistribution> {
        let idx = self.indices(names)?;
        if idx.is_empty() {
            return Err(Error::EmptyAxisSet);
        }
        let first = *idx.iter().min().expect("nonempty");
        let parts: Vec<&Alphabet> = idx.iter().map(|&k| &self.axes[k]).collect();
        let merged = Alphabet::product(&parts)?.renamed(new_name);
        let mut order = Vec::with_capacity(self.axes.len());
        let mut axes = Vec::new();
        for k in 0..self.axes.len() {
            if k == first {
                order.extend_from_slice(&idx);
                axes.push(merged.clone());
            } else if !idx.contains(&k) {
                order.push(k);
                axes.push(self.axes[k].clone());
            }
        }
        if axes.iter().filter(|a| a.name() == new_name).count() > 1 {
            return Err(Error::DuplicateAxis(new_name.to_string()));
        }
        Ok(Self::derived(axes, self.project(&order)))
    }

    /// Appends a deterministic function of `source` as a new last axis.
    pub fn append_function_axis(
        &self,
        source: &str,
        labels: &[usize],
        out: Alphabet,
    ) -> Result<JointDistribution> {
        let s = self.axis_index(source)?;
        self.check_labels(s, labels, &out)?;
        if self.axes.iter().any(|a| a.name() == out.name()) {
            return Err(Error::DuplicateAxis(out.name().to_string()));
        }
        let shape = self.shape();
        let k = out.size();
        checked_cells(&[self.probs.len(), k])?;
        let mut probs = vec![0.0; self.probs.len() * k];
        for_each_index(&shape, |c, flat| {
            probs[flat * k + labels[c[s]]] = self.probs[flat];
        });
        let mut axes = self.axes.clone();
        axes.push(out);
        Ok(Self::derived(axes, probs))
    }

    /// Replaces `source` by its image under `labels`, summing merged cells.
    pub fn map_axis(&self, source: &str, labels: &[usize], out: Alphabet) -> Result<JointDistribution> {
        let s = self.axis_index(source)?;
        self.check_labels(s, labels, &out)?;
        let shape = self.shape();
        let mut out_shape = shape.clone();
        out_shape[s] = out.size();
        let mult = row_major_multipliers(&out_shape);
        let mut probs = vec![0.0; out_shape.iter().product()];
        for_each_index(&shape, |c, flat| {
            let o: usize = c
                .iter()
                .enumerate()
                .map(|(k, &ck)| if k == s { labels[ck] } else { ck } * mult[k])
                .sum();
            probs[o] += self.probs[flat];
        });
        let mut axes = self.axes.clone();
        axes[s] = out;
        Ok(Self::derived(axes, probs))
    }

    fn check_labels(&self, s: usize, labels: &[usize], out: &Alphabet) -> Result<()> {
        if labels.len() != self.axes[s].size() {
            return Err(Error::DomainMismatch(format!(
                "map has {} entries, axis {:?} has {} symbols",
                labels.len(),
                self.axes[s].name(),
                self.axes[s].size()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= out.size()) {
            return Err(Error::DomainMismatch(format!(
                "label {bad} outside output alphabet of size {}",
                out.size()
            )));
        }
        Ok(())
    }
}

/// I(A;B|C) on a table laid out as [a][b][c].
pub(crate) fn cmi_table(abc: &[f64], na: usize, nb: usize, nc: usize) -> CmiDetail {
    let mut pac = vec![0.0; na * nc];
    let mut pbc = vec![0.0; nb * nc];
    let mut pc = vec![0.0; nc];
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let p = abc[(a * nb + b) * nc + c];
                pac[a * nc + c] += p;
                pbc[b * nc + c] += p;
                pc[c] += p;
            }
        }
    }
    let mut total = 0.0;
    let mut top: Option<(usize, usize, usize, f64)> = None;
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let p = abc[(a * nb + b) * nc + c];
                if p <= ZERO_CELL {
                    continue;
                }
                let term = p * ((p * pc[c]) / (pac[a * nc + c] * pbc[b * nc + c])).log2();
                total += term;
                if top.is_none_or(|t| term > t.3) {
                    top = Some((a, b, c, term));
                }
            }
        }
    }
    CmiDetail { value: total.max(0.0), top_cell: top }
}

/// Prior over a finite θ together with the conditional table p(obs | θ).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamFamily {
    theta: Alphabet,
    prior: Vec<f64>,
    obs_axes: Vec<Alphabet>,
    /// θ-major: `cond[t * obs_size + o]`.
    cond: Vec<f64>,
}

impl ParamFamily {
    pub fn new(
        theta: Alphabet,
        mut prior: Vec<f64>,
        obs_axes: Vec<Alphabet>,
        mut cond: Vec<f64>,
    ) -> Result<Self> {
        if obs_axes.is_empty() {
            return Err(Error::EmptyAxisSet);
        }
        let mut names = std::collections::HashSet::new();
        for a in std::iter::once(&theta).chain(&obs_axes) {
            if !names.insert(a.name()) {
                return Err(Error::DuplicateAxis(a.name().to_string()));
            }
        }
        if prior.len() != theta.size() {
            return Err(Error::ShapeMismatch(format!(
                "prior has {} entries, theta has {} symbols",
                prior.len(),
                theta.size()
            )));
        }
        normalize_checked("prior", &mut prior)?;
        let mut sizes = vec![theta.size()];
        sizes.extend(obs_axes.iter().map(Alphabet::size));
        let cells = checked_cells(&sizes)?;
        if cond.len() != cells {
            return Err(Error::ShapeMismatch(format!(
                "conditional table has {} cells, expected {cells}",
                cond.len()
            )));
        }
        let obs = cells / theta.size();
        for (t, slice) in cond.chunks_mut(obs).enumerate() {
            normalize_checked(&format!("cond[{}]", theta.symbol(t)), slice)?;
        }
        Ok(ParamFamily { theta, prior, obs_axes, cond })
    }

    pub fn from_fn(
        theta: Alphabet,
        prior: Vec<f64>,
        obs_axes: Vec<Alphabet>,
        mut f: impl FnMut(usize, &[usize]) -> f64,
    ) -> Result<Self> {
        let mut sizes = vec![theta.size()];
        sizes.extend(obs_axes.iter().map(Alphabet::size));
        let cells = checked_cells(&sizes)?;
        let mut cond = Vec::with_capacity(cells);
        for_each_index(&sizes, |c, _| cond.push(f(c[0], &c[1..])));
        Self::new(theta, prior, obs_axes, cond)
    }

    pub fn theta(&self) -> &Alphabet {
        &self.theta
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn obs_axes(&self) -> &[Alphabet] {
        &self.obs_axes
    }

    pub fn obs_size(&self) -> usize {
        self.cond.len() / self.theta.size()
    }

    /// p(· | θ = t) over the flattened observation alphabet.
    pub fn slice(&self, t: usize) -> &[f64] {
        let n = self.obs_size();
        &self.cond[t * n..(t + 1) * n]
    }

    pub fn obs_axis_index(&self, name: &str) -> Result<usize> {
        self.obs_axes
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    /// Product of all observation axes (the axis itself when there is one).
    pub fn obs_alphabet(&self) -> Alphabet {
        let parts: Vec<&Alphabet> = self.obs_axes.iter().collect();
        Alphabet::product(&parts).expect("observation product fits: cond table already allocated")
    }

    pub fn with_prior(&self, prior: Vec<f64>) -> Result<Self> {
        Self::new(self.theta.clone(), prior, self.obs_axes.clone(), self.cond.clone())
    }

    /// p(θ, obs) = prior × cond, axes `[θ, obs axes…]`.
    pub fn joint(&self) -> JointDistribution {
        let n = self.obs_size();
        let probs = self
            .cond
            .iter()
            .enumerate()
            .map(|(i, &c)| self.prior[i / n] * c)
            .collect();
        let mut axes = vec![self.theta.clone()];
        axes.extend(self.obs_axes.iter().cloned());
        JointDistribution::derived(axes, probs)
    }

    /// Same as [`joint`](Self::joint) with the observation axes merged into one.
    pub fn joint_merged(&self) -> JointDistribution {
        let j = self.joint();
        if self.obs_axes.len() == 1 {
            return j;
        }
        let obs = self.obs_alphabet();
        let mut axes = vec![self.theta.clone()];
        axes.push(obs);
        JointDistribution::derived(axes, j.probs)
    }

    /// Family over a subset of observation axes (others summed out), same θ.
    pub fn marginal_family(&self, keep: &[&str]) -> Result<ParamFamily> {
        let mut names = vec![self.theta.name()];
        names.extend_from_slice(keep);
        let j = JointDistribution::derived(
            {
                let mut axes = vec![self.theta.clone()];
                axes.extend(self.obs_axes.iter().cloned());
                axes
            },
            self.cond.clone(),
        );
        // `cond` is treated as a θ-indexed stack; summing over dropped axes
        // keeps each slice normalized.
        let m = j.marginal(&names)?;
        let obs_axes = m.axes()[1..].to_vec();
        Ok(ParamFamily {
            theta: self.theta.clone(),
            prior: self.prior.clone(),
            obs_axes,
            cond: m.probs,
        })
    }
}

/// Row-stochastic matrix p(out | in).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    data: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: usize, outputs: usize, mut data: Vec<f64>) -> Result<Self> {
        if inputs == 0 || outputs == 0 || data.len() != inputs * outputs {
            return Err(Error::ShapeMismatch(format!(
                "channel {inputs}x{outputs} given {} entries",
                data.len()
            )));
        }
        for (i, row) in data.chunks_mut(outputs).enumerate() {
            normalize_checked(&format!("channel row {i}"), row)?;
        }
        Ok(Channel { inputs, outputs, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != outputs) {
            return Err(Error::ShapeMismatch("ragged channel rows".into()));
        }
        Self::new(rows.len(), outputs, rows.concat())
    }

    /// Deterministic channel sending input `i` to `labels[i]`.
    pub fn deterministic(labels: &[usize], outputs: usize) -> Result<Self> {
        let mut data = vec![0.0; labels.len() * outputs];
        for (i, &l) in labels.iter().enumerate() {
            if l >= outputs {
                return Err(Error::ShapeMismatch(format!("label {l} >= {outputs}")));
            }
            data[i * outputs + l] = 1.0;
        }
        Self::new(labels.len(), outputs, data)
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.outputs..(i + 1) * self.outputs]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.outputs + j]
    }

    /// `self` followed by `next`: p(z|x) = Σ_y p(y|x) p(z|y).
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.outputs != next.inputs {
            return Err(Error::ShapeMismatch(format!(
                "cannot compose {}x{} with {}x{}",
                self.inputs, self.outputs, next.inputs, next.outputs
            )));
        }
        let mut data = vec![0.0; self.inputs * next.outputs];
        for i in 0..self.inputs {
            for (j, &p) in self.row(i).iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for (k, &q) in next.row(j).iter().enumerate() {
                    data[i * next.outputs + k] += p * q;
                }
            }
        }
        Ok(Channel { inputs: self.inputs, outputs: next.outputs, data })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit(name: &str) -> Alphabet {
        Alphabet::new(name, ["0", "1"]).unwrap()
    }

    fn fam_bin() -> ParamFamily {
        let x = Alphabet::new("X", ["00", "01", "10", "11"]).unwrap();
        let p = [0.2, 0.8];
        ParamFamily::from_fn(bit("theta"), vec![0.5, 0.5], vec![x], |t, o| {
            let (a, b) = (o[0] >> 1, o[0] & 1);
            let f = |v: usize| if v == 1 { p[t] } else { 1.0 - p[t] };
            f(a) * f(b)
        })
        .unwrap()
    }

    #[test]
    fn fam_bin_slices_are_products_of_marginals() {
        let f = fam_bin();
        let expect = [0.64, 0.16, 0.16, 0.04];
        for (a, b) in f.slice(0).iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let j = f.joint();
        let prior = j.marginal(&["theta"]).unwrap();
        assert!((prior.probs()[0] - 0.5).abs() < 1e-12);
        let x = j.marginal(&["X"]).unwrap();
        for (a, b) in x.probs().iter().zip([0.34, 0.16, 0.16, 0.34]) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = j.condition("theta", "1").unwrap();
        for (a, b) in c.probs().iter().zip([0.04, 0.16, 0.16, 0.64]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn deterministic_channel_family_is_point_masses() {
        let x = bit("X");
        let f = ParamFamily::from_fn(bit("theta"), vec![0.5, 0.5], vec![x], |t, o| {
            (t == o[0]) as u8 as f64
        })
        .unwrap();
        assert_eq!(f.slice(0), &[1.0, 0.0]);
        assert_eq!(f.slice(1), &[0.0, 1.0]);
    }

    #[test]
    fn build_rejects_bad_tables() {
        let x = bit("X");
        let err = ParamFamily::new(bit("theta"), vec![0.5, 0.5], vec![x.clone()], vec![0.5, 0.48, 0.5, 0.5])
            .unwrap_err();
        assert_eq!(err.code(), "NORMALIZATION");
        let err = ParamFamily::new(bit("theta"), vec![0.5, 0.5], vec![x.clone()], vec![1.1, -0.1, 0.5, 0.5])
            .unwrap_err();
        assert_eq!(err.code(), "NEGATIVE_PROB");
        let err = ParamFamily::new(bit("theta"), vec![0.5, 0.5], vec![x.clone()], vec![1.0, 0.0, 0.5])
            .unwrap_err();
        assert_eq!(err.code(), "SHAPE_MISMATCH");
        assert_eq!(Alphabet::new("A", ["a", "a"]).unwrap_err().code(), "DUPLICATE_SYMBOL");
        // Sub-tolerance drift is renormalized.
        let f = ParamFamily::new(bit("theta"), vec![0.5, 0.5 + 5e-10], vec![x], vec![0.5, 0.5, 0.3, 0.7])
            .unwrap();
        assert!((f.prior().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn point_mass_prior_supports_one_slice() {
        let f = fam_bin().with_prior(vec![1.0, 0.0]).unwrap();
        let j = f.joint();
        assert!(j.probs()[4..].iter().all(|&p| p == 0.0));
        assert_eq!(j.condition("theta", "1").unwrap_err().code(), "ZERO_EVENT");
    }

    #[test]
    fn entropy_examples() {
        let u4 = JointDistribution::new(vec![Alphabet::indexed("A", 4)], vec![0.25; 4]).unwrap();
        assert!((u4.entropy(&["A"]).unwrap() - 2.0).abs() < 1e-15);
        let pm = JointDistribution::new(vec![Alphabet::indexed("A", 3)], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(pm.entropy(&["A"]).unwrap(), 0.0);
        assert!((binary_entropy(0.1) - 0.4690).abs() < 1e-4);
    }

    #[test]
    fn mutual_information_of_bit_pairs() {
        let ind = JointDistribution::new(vec![bit("A"), bit("B")], vec![0.25; 4]).unwrap();
        assert!(ind.mutual_information(&["A"], &["B"]).unwrap().abs() < 1e-15);
        let cor = JointDistribution::new(vec![bit("A"), bit("B")], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((cor.mutual_information(&["A"], &["B"]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            cor.conditional_mutual_information(&["A"], &["A"], &[]).unwrap_err().code(),
            "AXIS_OVERLAP"
        );
    }

    #[test]
    fn composed_chain_is_markov() {
        let tw = Channel::from_rows(&[vec![0.7, 0.2, 0.1], vec![0.1, 0.3, 0.6]]).unwrap();
        let wx = Channel::from_rows(&[vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap();
        let prior = [0.4, 0.6];
        let j = JointDistribution::from_fn(
            vec![bit("theta"), Alphabet::indexed("W", 3), bit("X")],
            |c| prior[c[0]] * tw.get(c[0], c[1]) * wx.get(c[1], c[2]),
        )
        .unwrap();
        assert!(j.conditional_mutual_information(&["theta"], &["X"], &["W"]).unwrap() <= 1e-12);
        assert!(j.mutual_information(&["theta"], &["X"]).unwrap() > 1e-3);
        let composed = tw.compose(&wx).unwrap();
        let direct = j.marginal(&["theta", "X"]).unwrap();
        for t in 0..2 {
            for x in 0..2 {
                let p = direct.prob(&[t, x]) / prior[t];
                assert!((p - composed.get(t, x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn merge_and_marginal_errors() {
        let j = fam_bin().joint();
        assert_eq!(j.marginal(&[]).unwrap_err().code(), "EMPTY_AXIS_SET");
        assert_eq!(j.marginal(&["Q"]).unwrap_err().code(), "UNKNOWN_AXIS");
        let same = j.marginal(&["theta", "X"]).unwrap();
        assert_eq!(same, j);
        let merged = j.merge_axes(&["theta", "X"], "TX").unwrap();
        assert_eq!(merged.axes()[0].size(), 8);
        assert_eq!(merged.axes()[0].symbol(5), "1,01");
        assert_eq!(merged.probs(), j.probs());
    }

    #[test]
    fn cell_cap_is_enforced() {
        let big = Alphabet::indexed("A", 5000);
        let err = Alphabet::product(&[&big, &big.renamed("B")]).unwrap_err();
        assert_eq!(err.code(), "TOO_LARGE");
    }

    #[test]
    fn marginal_family_keeps_slices_normalized() {
        let x = bit("X");
        let y = bit("Y");
        let f = ParamFamily::from_fn(bit("theta"), vec![0.3, 0.7], vec![x, y], |t, o| {
            [[0.1, 0.2, 0.3, 0.4], [0.4, 0.3, 0.2, 0.1]][t][o[0] * 2 + o[1]]
        })
        .unwrap();
        let fx = f.marginal_family(&["X"]).unwrap();
        assert_eq!(fx.obs_axes().len(), 1);
        assert!((fx.slice(0)[0] - 0.3).abs() < 1e-15);
        assert!((fx.slice(1)[1] - 0.3).abs() < 1e-15);
    }
}
