//! Sufficiency checks on finite families.
//!
//! A statistic T is sufficient for θ when θ − T(X) − X is a Markov chain,
//! which on a finite joint is the same as I(θ; X | T(X)) = 0. Every check
//! here computes that conditional mutual information and compares it with a
//! threshold (default [`DEFAULT_THRESHOLD_BITS`]). The minimal-statistic
//! constructions use likelihood ratios instead and never touch the prior, so
//! they also cover a nonrandom θ.
//!
//! Parallel networks are covered by [`theorem1_check`] (a hidden variable W
//! that makes the sensors conditionally independent) and [`theorem2_check`]
//! (completing a locally sufficient Ty with some Tx). Tandem networks use
//! [`is_conditionally_sufficient`] and [`minimal_conditional_sufficient`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Channel, JointDistribution, ParamFamily, ZERO_CELL};
use crate::statistic::Statistic;

pub const DEFAULT_THRESHOLD_BITS: f64 = 1e-9;
/// Relative tolerance when comparing likelihood-ratio profiles.
pub const RATIO_RTOL: f64 = 1e-9;
/// Largest allowed |composed − family| cell deviation for an HCI model.
pub const COMPOSITION_TOL: f64 = 1e-9;

/// Cell contributing most to a nonzero conditional mutual information.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub a: Vec<String>,
    pub b: Vec<String>,
    pub c: Vec<String>,
    pub contribution_bits: f64,
}

/// Outcome of testing the chain A − B − C, i.e. I(A; C | B) ≤ threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovVerdict {
    pub cmi_bits: f64,
    pub threshold_bits: f64,
    pub holds: bool,
    pub witness: Option<Witness>,
}

pub fn check_markov(
    dist: &JointDistribution,
    a: &[&str],
    b: &[&str],
    c: &[&str],
    threshold_bits: f64,
) -> Result<MarkovVerdict> {
    let detail = dist.cmi_detail(a, c, b)?;
    let holds = detail.value <= threshold_bits;
    let witness = match (holds, detail.top_cell) {
        (false, Some((ia, ic, ib, contribution))) => Some(Witness {
            a: dist.decode(a, ia),
            b: dist.decode(b, ib),
            c: dist.decode(c, ic),
            contribution_bits: contribution,
        }),
        _ => None,
    };
    Ok(MarkovVerdict { cmi_bits: detail.value, threshold_bits, holds, witness })
}

fn stat_axis_name(base: &str) -> String {
    format!("T({base})")
}

/// θ − T(obs) − obs, with `t` defined on the product of all observation axes.
pub fn is_sufficient(family: &ParamFamily, t: &Statistic, threshold_bits: f64) -> Result<MarkovVerdict> {
    let obs = family.obs_alphabet();
    if t.domain().symbols() != obs.symbols() {
        return Err(Error::DomainMismatch(format!(
            "statistic on {:?}, family observations are {:?}",
            t.domain().name(),
            obs.name()
        )));
    }
    let joint = family.joint_merged();
    let tname = stat_axis_name(obs.name());
    let with_t = t.attach(&joint, obs.name(), &tname)?;
    check_markov(&with_t, &[family.theta().name()], &[&tname], &[obs.name()], threshold_bits)
}

fn obs_axis<'a>(family: &'a ParamFamily, name: &str) -> Result<&'a Alphabet> {
    Ok(&family.obs_axes()[family.obs_axis_index(name)?])
}

/// θ − (T(X), Y) − X with X the statistic's domain axis.
pub fn is_conditionally_sufficient(
    family: &ParamFamily,
    t: &Statistic,
    y_axis: &str,
    threshold_bits: f64,
) -> Result<MarkovVerdict> {
    if family.obs_axes().len() < 2 {
        return Err(Error::DomainMismatch("conditional sufficiency needs two observation axes".into()));
    }
    let x_axis = t.domain().name();
    if x_axis == y_axis {
        return Err(Error::AxisOverlap(y_axis.to_string()));
    }
    obs_axis(family, x_axis)?;
    obs_axis(family, y_axis)?;
    let theta = family.theta().name();
    let joint = family.joint().marginal(&[theta, x_axis, y_axis])?;
    let tname = stat_axis_name(x_axis);
    let with_t = t.attach(&joint, x_axis, &tname)?;
    check_markov(&with_t, &[theta], &[&tname, y_axis], &[x_axis], threshold_bits)
}

/// Groups points whose θ-profiles are proportional block by block.
///
/// `profile(i, b)` is the vector over θ for point `i` in block `b`. Two points
/// share a class iff in every block their supports coincide and the
/// normalized profiles agree to [`RATIO_RTOL`]. Points whose profiles are zero
/// everywhere share one class.
pub(crate) fn ratio_partition(
    points: usize,
    blocks: usize,
    mut profile: impl FnMut(usize, usize) -> Vec<f64>,
) -> Vec<usize> {
    // One entry per block: None when the block is all zero, else the
    // L1-normalized profile.
    type Signature = Vec<Option<Vec<f64>>>;
    let same = |a: &Signature, b: &Signature| {
        a.iter().zip(b).all(|(x, y)| match (x, y) {
            (None, None) => true,
            (Some(x), Some(y)) => x.iter().zip(y).all(|(&p, &q)| {
                if (p == 0.0) != (q == 0.0) {
                    return false;
                }
                (p - q).abs() <= RATIO_RTOL * p.max(q)
            }),
            _ => false,
        })
    };
    let mut reps: Vec<Signature> = Vec::new();
    let mut labels = Vec::with_capacity(points);
    for i in 0..points {
        let sig: Signature = (0..blocks)
            .map(|b| {
                let v = profile(i, b);
                let s: f64 = v.iter().filter(|&&p| p > ZERO_CELL).sum();
                (s > ZERO_CELL).then(|| v.iter().map(|&p| if p > ZERO_CELL { p / s } else { 0.0 }).collect())
            })
            .collect();
        match reps.iter().position(|r| same(r, &sig)) {
            Some(k) => labels.push(k),
            None => {
                labels.push(reps.len());
                reps.push(sig);
            }
        }
    }
    labels
}

/// Minimal sufficient statistic on the full observation alphabet.
///
/// x and x̂ share a class iff p(x|θ) = c·p(x̂|θ) for every θ with one c > 0.
pub fn minimal_sufficient(family: &ParamFamily) -> Statistic {
    let thetas = family.theta().size();
    let labels = ratio_partition(family.obs_size(), 1, |i, _| {
        (0..thetas).map(|t| family.slice(t)[i]).collect()
    });
    Statistic::from_fn(family.obs_alphabet(), |i| labels[i])
}

/// Minimal conditional sufficient statistic of X for θ given Y: x and x̂
/// share a class iff for every y the ratio p(x,y|θ)/p(x̂,y|θ) is constant in θ.
pub fn minimal_conditional_sufficient(family: &ParamFamily, x_axis: &str, y_axis: &str) -> Result<Statistic> {
    if x_axis == y_axis {
        return Err(Error::AxisOverlap(x_axis.to_string()));
    }
    let xa = obs_axis(family, x_axis)?.clone();
    let ny = obs_axis(family, y_axis)?.size();
    let sub = family.marginal_family(&[x_axis, y_axis])?;
    let x_first = sub.obs_axes()[0].name() == x_axis;
    let thetas = family.theta().size();
    let index = |x: usize, y: usize| if x_first { x * ny + y } else { y * xa.size() + x };
    let labels = ratio_partition(xa.size(), ny, |x, y| {
        (0..thetas).map(|t| sub.slice(t)[index(x, y)]).collect()
    });
    Ok(Statistic::from_fn(xa, |i| labels[i]))
}

/// Hierarchical conditional independence model: θ → W → (X, Y).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HciModel {
    family: ParamFamily,
    w: Alphabet,
    w_given_theta: Channel,
    obs_given_w: Channel,
}

impl HciModel {
    pub fn new(family: ParamFamily, w: Alphabet, w_given_theta: Channel, obs_given_w: Channel) -> Result<Self> {
        if w_given_theta.inputs() != family.theta().size() || w_given_theta.outputs() != w.size() {
            return Err(Error::ShapeMismatch("p(w|theta) does not match theta × W".into()));
        }
        if obs_given_w.inputs() != w.size() || obs_given_w.outputs() != family.obs_size() {
            return Err(Error::ShapeMismatch("p(obs|w) does not match W × observations".into()));
        }
        if family.theta().name() == w.name() || family.obs_axis_index(w.name()).is_ok() {
            return Err(Error::DuplicateAxis(w.name().to_string()));
        }
        let composed = w_given_theta.compose(&obs_given_w)?;
        let mut max_dev: f64 = 0.0;
        for t in 0..family.theta().size() {
            for (o, &p) in family.slice(t).iter().enumerate() {
                max_dev = max_dev.max((composed.get(t, o) - p).abs());
            }
        }
        if max_dev > COMPOSITION_TOL {
            return Err(Error::CompositionMismatch { max_dev });
        }
        Ok(HciModel { family, w, w_given_theta, obs_given_w })
    }

    pub fn family(&self) -> &ParamFamily {
        &self.family
    }

    pub fn w(&self) -> &Alphabet {
        &self.w
    }

    /// p(θ, w, obs…) with axes `[θ, W, obs axes…]`.
    pub fn joint(&self) -> JointDistribution {
        let mut axes = vec![self.family.theta().clone(), self.w.clone()];
        axes.extend(self.family.obs_axes().iter().cloned());
        let nw = self.w.size();
        let no = self.family.obs_size();
        let prior = self.family.prior();
        let mut probs = Vec::with_capacity(prior.len() * nw * no);
        for (t, &pt) in prior.iter().enumerate() {
            for w in 0..nw {
                let ptw = pt * self.w_given_theta.get(t, w);
                probs.extend(self.obs_given_w.row(w).iter().map(|&q| ptw * q));
            }
        }
        JointDistribution::new(axes, probs).expect("composition of validated channels")
    }

    fn xy(&self) -> Result<(&str, &str)> {
        match self.family.obs_axes() {
            [x, y] => Ok((x.name(), y.name())),
            _ => Err(Error::DomainMismatch("HCI checks need exactly two observation axes".into())),
        }
    }
}

/// Verdicts for θ − W − (X,Y) and X − W − Y.
pub fn verify_hci(h: &HciModel, threshold_bits: f64) -> Result<(MarkovVerdict, MarkovVerdict)> {
    let (x, y) = h.xy()?;
    let j = h.joint();
    let theta = h.family.theta().name();
    let w = h.w.name();
    let first = check_markov(&j, &[theta], &[w], &[x, y], threshold_bits)?;
    let second = check_markov(&j, &[x], &[w], &[y], threshold_bits)?;
    Ok((first, second))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedVerdict {
    pub name: String,
    #[serde(flatten)]
    pub verdict: MarkovVerdict,
}

impl NamedVerdict {
    fn new(name: impl Into<String>, verdict: MarkovVerdict) -> Self {
        NamedVerdict { name: name.into(), verdict }
    }
}

/// Premises plus conclusion of one implication checked on a concrete model.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub premises: Vec<NamedVerdict>,
    pub conclusion: NamedVerdict,
}

impl CheckReport {
    pub fn premises_hold(&self) -> bool {
        self.premises.iter().all(|p| p.verdict.holds)
    }

    pub fn conclusion_holds(&self) -> bool {
        self.conclusion.verdict.holds
    }
}

impl Serialize for CheckReport {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CheckReport", 6)?;
        st.serialize_field("check", &self.check)?;
        st.serialize_field("premises", &self.premises)?;
        st.serialize_field("conclusion", &self.conclusion)?;
        st.serialize_field("cmi_bits", &self.conclusion.verdict.cmi_bits)?;
        st.serialize_field("threshold_bits", &self.conclusion.verdict.threshold_bits)?;
        st.serialize_field("witness", &self.conclusion.verdict.witness)?;
        st.end()
    }
}

/// A statistic on the full observation alphabet is sufficient for W, hence
/// for θ, whenever θ − W − obs.
pub fn lemma1_check(h: &HciModel, t: &Statistic, threshold_bits: f64) -> Result<CheckReport> {
    let f = &h.family;
    let obs = f.obs_alphabet();
    let mut j = h.joint();
    if f.obs_axes().len() > 1 {
        let names: Vec<&str> = f.obs_axes().iter().map(Alphabet::name).collect();
        j = j.merge_axes(&names, obs.name())?;
    }
    let tname = stat_axis_name(obs.name());
    let j = t.attach(&j, obs.name(), &tname)?;
    let (theta, w, o) = (f.theta().name(), h.w.name(), obs.name());
    Ok(CheckReport {
        check: "lemma1".into(),
        premises: vec![
            NamedVerdict::new(format!("{theta}-{w}-{o}"), check_markov(&j, &[theta], &[w], &[o], threshold_bits)?),
            NamedVerdict::new(format!("{w}-{tname}-{o}"), check_markov(&j, &[w], &[&tname], &[o], threshold_bits)?),
        ],
        conclusion: NamedVerdict::new(
            format!("{theta}-{tname}-{o}"),
            check_markov(&j, &[theta], &[&tname], &[o], threshold_bits)?,
        ),
    })
}

/// Local sufficiency for T(W) under conditional independence given T(W)
/// implies global sufficiency for θ.
pub fn theorem1_check(
    h: &HciModel,
    tw: &Statistic,
    tx: &Statistic,
    ty: &Statistic,
    threshold_bits: f64,
) -> Result<CheckReport> {
    let (x, y) = h.xy()?;
    let theta = h.family.theta().name();
    let w = h.w.name();
    let (ntw, ntx, nty) = (stat_axis_name(w), stat_axis_name(x), stat_axis_name(y));
    let j = h.joint();
    let j = tw.attach(&j, w, &ntw)?;
    let j = tx.attach(&j, x, &ntx)?;
    let j = ty.attach(&j, y, &nty)?;
    let mv = |a: &[&str], b: &[&str], c: &[&str]| check_markov(&j, a, b, c, threshold_bits);
    let premises = vec![
        NamedVerdict::new(format!("{theta}-{w}-({x},{y})"), mv(&[theta], &[w], &[x, y])?),
        NamedVerdict::new(format!("{theta}-{ntw}-{w}"), mv(&[theta], &[&ntw], &[w])?),
        NamedVerdict::new(format!("{x}-{ntw}-{y}"), mv(&[x], &[&ntw], &[y])?),
        NamedVerdict::new(format!("{ntw}-{ntx}-{x}"), mv(&[&ntw], &[&ntx], &[x])?),
        NamedVerdict::new(format!("{ntw}-{nty}-{y}"), mv(&[&ntw], &[&nty], &[y])?),
    ];
    let conclusion = NamedVerdict::new(
        format!("{theta}-({ntx},{nty})-({x},{y})"),
        mv(&[theta], &[&ntx, &nty], &[x, y])?,
    );
    Ok(CheckReport { check: "theorem1".into(), premises, conclusion })
}

/// Ratio-based factorization test: within every (Tx, Ty) cell, all nonzero
/// θ-profiles p(x,y|·) are proportional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationVerdict {
    pub holds: bool,
    pub max_rel_dev: f64,
    pub tolerance: f64,
    /// (x, y) symbols of the worst cell member when the test fails.
    pub witness: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem2Report {
    #[serde(flatten)]
    pub global: CheckReport,
    pub factorization: FactorizationVerdict,
    pub agree: bool,
}

/// Completing a locally sufficient Ty with Tx: the direct global verdict and
/// the factorization p(x|y,θ) = g(Tx(x) | Ty(y), θ) h(x,y), checked separately.
pub fn theorem2_check(
    family: &ParamFamily,
    tx: &Statistic,
    ty: &Statistic,
    threshold_bits: f64,
) -> Result<Theorem2Report> {
    let (x, y) = (tx.domain().name(), ty.domain().name());
    if x == y {
        return Err(Error::SameDomain(x.to_string()));
    }
    let (xa, ya) = (obs_axis(family, x)?.clone(), obs_axis(family, y)?.clone());
    let theta = family.theta().name();
    let (ntx, nty) = (stat_axis_name(x), stat_axis_name(y));
    let j = family.joint().marginal(&[theta, x, y])?;
    let jy = ty.attach(&j.marginal(&[theta, y])?, y, &nty)?;
    let local = check_markov(&jy, &[theta], &[&nty], &[y], threshold_bits)?;
    if !local.holds {
        return Err(Error::PreconditionFailed(format!(
            "{nty} is not locally sufficient (I = {:e} bits)",
            local.cmi_bits
        )));
    }
    let jt = tx.attach(&j, x, &ntx)?;
    let jt = ty.attach(&jt, y, &nty)?;
    let global = check_markov(&jt, &[theta], &[&ntx, &nty], &[x, y], threshold_bits)?;

    // Profiles over θ of p(x,y|θ) taken from the family itself (no prior).
    let sub = family.marginal_family(&[x, y])?;
    let x_first = sub.obs_axes()[0].name() == x;
    let (nx, ny) = (xa.size(), ya.size());
    let idx = |xi: usize, yi: usize| if x_first { xi * ny + yi } else { yi * nx + xi };
    let thetas = family.theta().size();
    let mut reference: Vec<Option<Vec<f64>>> = vec![None; tx.num_classes() * ty.num_classes()];
    let mut max_dev: f64 = 0.0;
    let mut witness = None;
    for xi in 0..nx {
        for yi in 0..ny {
            let v: Vec<f64> = (0..thetas).map(|t| sub.slice(t)[idx(xi, yi)]).collect();
            let s: f64 = v.iter().filter(|&&p| p > ZERO_CELL).sum();
            if s <= ZERO_CELL {
                continue;
            }
            let v: Vec<f64> = v.iter().map(|&p| if p > ZERO_CELL { p / s } else { 0.0 }).collect();
            let cell = tx.labels()[xi] * ty.num_classes() + ty.labels()[yi];
            match &reference[cell] {
                None => reference[cell] = Some(v),
                Some(r) => {
                    let dev = r
                        .iter()
                        .zip(&v)
                        .map(|(&a, &b)| {
                            if (a == 0.0) != (b == 0.0) {
                                1.0
                            } else if a == 0.0 {
                                0.0
                            } else {
                                (a - b).abs() / a.max(b)
                            }
                        })
                        .fold(0.0, f64::max);
                    if dev > max_dev {
                        max_dev = dev;
                        witness = Some((xa.symbol(xi).to_string(), ya.symbol(yi).to_string()));
                    }
                }
            }
        }
    }
    let fact_holds = max_dev <= RATIO_RTOL;
    let factorization = FactorizationVerdict {
        holds: fact_holds,
        max_rel_dev: max_dev,
        tolerance: RATIO_RTOL,
        witness: if fact_holds { None } else { witness },
    };
    let agree = fact_holds == global.holds;
    Ok(Theorem2Report {
        global: CheckReport {
            check: "theorem2".into(),
            premises: vec![NamedVerdict::new(format!("{theta}-{nty}-{y}"), local)],
            conclusion: NamedVerdict::new(format!("{theta}-({ntx},{nty})-({x},{y})"), global),
        },
        factorization,
        agree,
    })
}
