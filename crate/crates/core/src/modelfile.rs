//! JSON model and statistic files.
//!
//! A family file carries `theta`, `prior`, `axes` and a `cond` table nested
//! θ-major then in axis order. A joint file replaces `theta`/`prior`/`cond`
//! with a `joint` table nested in axis order. Optional fields:
//!
//! * `statistics`: `[{"axis": name, "map": {symbol: label}}]`
//! * `hci`: `{"w": {name, symbols}, "p_w_given_theta": [[..]], "p_obs_given_w": nested}`
//! * `z`: name of the remote-source axis of a joint file
//! * `distortion`: rows over Z symbols, columns over the reproduction alphabet
//! * `reproduction`: `{name, symbols}` or a bare symbol list (defaults to Z)
//!
//! A missing `prior` means uniform.

use std::collections::HashMap;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{Alphabet, Channel, JointDistribution, ParamFamily};
use crate::source_coding::{Distortion, SourceModel};
use crate::statistic::Statistic;
use crate::sufficiency::HciModel;

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub family: Option<ParamFamily>,
    pub joint: Option<JointDistribution>,
    pub hci: Option<HciModel>,
    pub statistics: Vec<Statistic>,
    z: Option<String>,
    distortion: Option<Vec<Vec<f64>>>,
    reproduction: Option<Alphabet>,
}

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| perr(format!("missing field {key:?}")))
}

fn scalar_label(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => Err(perr(format!("expected a symbol, got {v}"))),
    }
}

fn symbols(v: &Value) -> Result<Vec<String>> {
    v.as_array().ok_or_else(|| perr("symbols must be a list"))?.iter().map(scalar_label).collect()
}

fn alphabet(v: &Value) -> Result<Alphabet> {
    let name = field(v, "name")?.as_str().ok_or_else(|| perr("axis name must be a string"))?;
    Alphabet::new(name, symbols(field(v, "symbols")?)?)
}

fn number(v: &Value) -> Result<f64> {
    v.as_f64().ok_or_else(|| perr(format!("expected a number, got {v}")))
}

fn numbers(v: &Value) -> Result<Vec<f64>> {
    v.as_array().ok_or_else(|| perr("expected a list of numbers"))?.iter().map(number).collect()
}

/// Row-major flattening of a nested array whose shape must be `shape`.
fn flatten(v: &Value, shape: &[usize], what: &str) -> Result<Vec<f64>> {
    fn rec(v: &Value, shape: &[usize], out: &mut Vec<f64>, what: &str) -> Result<()> {
        match shape.split_first() {
            None => {
                out.push(number(v)?);
                Ok(())
            }
            Some((&n, rest)) => {
                let items = v.as_array().ok_or_else(|| perr(format!("{what}: expected nested list")))?;
                if items.len() != n {
                    return Err(Error::ShapeMismatch(format!("{what}: expected {n} entries, got {}", items.len())));
                }
                items.iter().try_for_each(|i| rec(i, rest, out, what))
            }
        }
    }
    let mut out = Vec::new();
    rec(v, shape, &mut out, what)?;
    Ok(out)
}

/// Statistic from one `{axis, map}` entry; `lookup` resolves the axis.
pub fn parse_statistic(v: &Value, lookup: &dyn Fn(&str) -> Result<Alphabet>) -> Result<Statistic> {
    let axis = field(v, "axis")?.as_str().ok_or_else(|| perr("statistic axis must be a string"))?;
    let map = field(v, "map")?.as_object().ok_or_else(|| perr("statistic map must be an object"))?;
    let raw: HashMap<String, String> =
        map.iter().map(|(k, v)| Ok((k.clone(), scalar_label(v)?))).collect::<Result<_>>()?;
    Statistic::canonicalize(lookup(axis)?, &raw)
}

/// Statistic entries from a file: one entry, a list, or `{"statistics": [...]}`.
pub fn parse_statistics(text: &str, lookup: &dyn Fn(&str) -> Result<Alphabet>) -> Result<Vec<Statistic>> {
    let v: Value = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
    let list = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) if o.contains_key("statistics") => {
            field(&v, "statistics")?.as_array().ok_or_else(|| perr("statistics must be a list"))?.clone()
        }
        _ => vec![v],
    };
    list.iter().map(|s| parse_statistic(s, lookup)).collect()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| perr(format!("{}: {e}", path.display())))
}

impl ModelFile {
    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| perr(e.to_string()))?;
        let axes: Vec<Alphabet> = field(&v, "axes")?
            .as_array()
            .ok_or_else(|| perr("axes must be a list"))?
            .iter()
            .map(alphabet)
            .collect::<Result<_>>()?;
        let sizes: Vec<usize> = axes.iter().map(Alphabet::size).collect();

        let mut out = ModelFile {
            family: None,
            joint: None,
            hci: None,
            statistics: Vec::new(),
            z: None,
            distortion: None,
            reproduction: None,
        };
        if let Some(theta) = v.get("theta") {
            let theta = match theta {
                Value::Array(_) => Alphabet::new("theta", symbols(theta)?)?,
                _ => alphabet(theta)?,
            };
            let prior = match v.get("prior") {
                Some(p) => numbers(p)?,
                None => vec![1.0 / theta.size() as f64; theta.size()],
            };
            let mut shape = vec![theta.size()];
            shape.extend(&sizes);
            crate::model::checked_cells(&shape)?;
            let cond = flatten(field(&v, "cond")?, &shape, "cond")?;
            out.family = Some(ParamFamily::new(theta, prior, axes.clone(), cond)?);
        } else {
            crate::model::checked_cells(&sizes)?;
            let probs = flatten(field(&v, "joint")?, &sizes, "joint")?;
            out.joint = Some(JointDistribution::new(axes.clone(), probs)?);
        }

        if let Some(h) = v.get("hci") {
            let family = out.family.clone().ok_or_else(|| perr("hci needs a family file (theta, cond)"))?;
            let w = alphabet(field(h, "w")?)?;
            let nt = family.theta().size();
            let wt = flatten(field(h, "p_w_given_theta")?, &[nt, w.size()], "p_w_given_theta")?;
            let mut shape = vec![w.size()];
            shape.extend(&sizes);
            let ow = flatten(field(h, "p_obs_given_w")?, &shape, "p_obs_given_w")?;
            let wt = Channel::new(nt, w.size(), wt)?;
            let ow = Channel::new(w.size(), family.obs_size(), ow)?;
            out.hci = Some(HciModel::new(family, w, wt, ow)?);
        }

        if let Some(z) = v.get("z") {
            let z = z.as_str().ok_or_else(|| perr("z must be an axis name"))?;
            if !axes.iter().any(|a| a.name() == z) {
                return Err(Error::UnknownAxis(z.to_string()));
            }
            out.z = Some(z.to_string());
        }
        if let Some(r) = v.get("reproduction") {
            out.reproduction = Some(match r {
                Value::Array(_) => Alphabet::new("reproduction", symbols(r)?)?,
                _ => alphabet(r)?,
            });
        }
        if let Some(d) = v.get("distortion") {
            let rows = d.as_array().ok_or_else(|| perr("distortion must be a list of rows"))?;
            out.distortion = Some(rows.iter().map(numbers).collect::<Result<_>>()?);
        }

        if let Some(list) = v.get("statistics") {
            let list = list.as_array().ok_or_else(|| perr("statistics must be a list"))?;
            let lookup = |name: &str| out.alphabet(name);
            let stats = list.iter().map(|s| parse_statistic(s, &lookup)).collect::<Result<Vec<_>>>()?;
            out.statistics = stats;
        }
        Ok(out)
    }

    /// Every alphabet a statistic may live on: file axes, θ, W, the full
    /// observation product and the merged Y of a source model.
    pub fn alphabet(&self, name: &str) -> Result<Alphabet> {
        let mut cands: Vec<Alphabet> = Vec::new();
        if let Some(f) = &self.family {
            cands.push(f.theta().clone());
            cands.extend(f.obs_axes().iter().cloned());
            cands.push(f.obs_alphabet());
            if f.obs_axes().len() > 2 {
                let rest: Vec<&Alphabet> = f.obs_axes()[1..].iter().collect();
                cands.push(Alphabet::product(&rest)?);
            }
        }
        if let Some(j) = &self.joint {
            cands.extend(j.axes().iter().cloned());
            let rest = self.joint_roles()?.1;
            if rest.len() > 1 {
                let parts: Vec<&Alphabet> = rest.iter().map(|&k| &j.axes()[k]).collect();
                cands.push(Alphabet::product(&parts)?);
            }
        }
        if let Some(h) = &self.hci {
            cands.push(h.w().clone());
        }
        cands.into_iter().find(|a| a.name() == name).ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn family(&self) -> Result<&ParamFamily> {
        self.family.as_ref().ok_or_else(|| perr("this command needs a family file (theta, prior, cond)"))
    }

    pub fn hci(&self) -> Result<&HciModel> {
        self.hci.as_ref().ok_or_else(|| perr("this command needs an \"hci\" section"))
    }

    /// Joint distribution over all variables: p(θ, obs…) for a family file.
    pub fn full_joint(&self) -> JointDistribution {
        match (&self.family, &self.joint) {
            (Some(f), _) => f.joint(),
            (None, Some(j)) => j.clone(),
            (None, None) => unreachable!("parse sets one of them"),
        }
    }

    pub fn statistic_on(&self, axis: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.domain().name() == axis)
    }

    /// For a joint file: (X axis index, remaining non-Z indices, Z index).
    fn joint_roles(&self) -> Result<(usize, Vec<usize>, Option<usize>)> {
        let j = self.joint.as_ref().ok_or_else(|| perr("not a joint file"))?;
        let z = match &self.z {
            Some(n) => Some(j.axis_index(n)?),
            None => None,
        };
        let mut others = (0..j.axes().len()).filter(|&k| Some(k) != z);
        let x = others.next().ok_or_else(|| perr("source model needs an X axis"))?;
        Ok((x, others.collect(), z))
    }

    /// (X, Y) source. Family files use X = θ and Y = all observations; joint
    /// files use the first axis as X and the remaining non-Z axes as Y.
    pub fn source_pair(&self) -> Result<SourceModel> {
        if let Some(f) = &self.family {
            return SourceModel::pair(f.joint_merged());
        }
        let (x, rest, _) = self.joint_roles()?;
        if rest.is_empty() {
            return Err(perr("source model needs a Y axis"));
        }
        SourceModel::pair(self.regroup(x, &rest, None)?)
    }

    /// (X, Y, Z) source. Family files use Z = θ, X = the first observation
    /// axis and Y = the rest (a one-symbol axis if there is none); joint
    /// files need `z`.
    pub fn source_remote(&self) -> Result<SourceModel> {
        let (joint, z_alpha) = if let Some(f) = &self.family {
            let j = f.joint();
            // axes [θ, obs…] → X = obs[0], Y = obs[1..], Z = θ.
            let rest: Vec<usize> = (2..j.axes().len()).collect();
            (regroup(&j, 1, &rest, Some(0))?, f.theta().clone())
        } else {
            let (x, rest, z) = self.joint_roles()?;
            let z = z.ok_or_else(|| perr("remote source needs a \"z\" axis"))?;
            let j = self.joint.as_ref().expect("joint roles checked");
            (self.regroup(x, &rest, Some(z))?, j.axes()[z].clone())
        };
        let distortion = match (&self.distortion, &self.reproduction) {
            (Some(rows), Some(r)) => Distortion::new(r.clone(), rows)?,
            (Some(rows), None) => Distortion::new(z_alpha.renamed(format!("{}_hat", z_alpha.name())), rows)?,
            (None, None) => Distortion::hamming(&z_alpha),
            (None, Some(r)) => {
                if r.symbols() != z_alpha.symbols() {
                    return Err(perr("a custom reproduction alphabet needs a distortion table"));
                }
                Distortion::hamming(&z_alpha)
            }
        };
        SourceModel::remote(joint, distortion)
    }

    fn regroup(&self, x: usize, rest: &[usize], z: Option<usize>) -> Result<JointDistribution> {
        regroup(self.joint.as_ref().expect("joint file"), x, rest, z)
    }
}

/// Reorders `j` to axes (X, merged rest, Z?), summing out any axis not
/// named. An empty `rest` becomes a one-symbol Y axis.
fn regroup(j: &JointDistribution, x: usize, rest: &[usize], z: Option<usize>) -> Result<JointDistribution> {
    let axes = j.axes();
    let y = if rest.is_empty() {
        Alphabet::new("Y", ["*"])?
    } else {
        let parts: Vec<&Alphabet> = rest.iter().map(|&k| &axes[k]).collect();
        Alphabet::product(&parts)?
    };
    let (nx, ny) = (axes[x].size(), y.size());
    let nz = z.map_or(1, |k| axes[k].size());
    let mut new_axes = vec![axes[x].clone(), y];
    if let Some(z) = z {
        new_axes.push(axes[z].clone());
    }
    let mut probs = vec![0.0; nx * ny * nz];
    crate::model::for_each_index(&j.shape(), |c, flat| {
        let yi = rest.iter().fold(0, |acc, &k| acc * axes[k].size() + c[k]);
        let zi = z.map_or(0, |k| c[k]);
        probs[(c[x] * ny + yi) * nz + zi] += j.probs()[flat];
    });
    JointDistribution::new(new_axes, probs)
}
