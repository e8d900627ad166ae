//! Source coding with a sufficient reduction in front of the encoder.
//!
//! [`frontier`] handles lossless coding of X with a rate-limited helper that
//! sees Y: the achievable region is `R1 ≥ H(X|U), R2 ≥ I(Y;U)` over channels
//! p(u|y), and replacing Y by a statistic T(Y) with X − T(Y) − Y leaves it
//! unchanged. [`rd`] handles remote lossy coding of Z from X with side
//! information Y at both ends, where a conditionally sufficient T(X) leaves
//! the rate-distortion function unchanged.

pub mod frontier;
pub mod rd;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Alphabet, JointDistribution};
use crate::statistic::Statistic;

pub use frontier::{ak_frontier, corner_point, theorem6_compare, FrontierOptions, RateFrontier, RatePoint, Theorem6Report};
pub use rd::{conditional_remote_rd, distortion_range, rd_equality_check, RdCurve, RdEqualityReport, RdPoint};

/// Distortion d(z, ẑ) over Z × reproduction alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distortion {
    reproduction: Alphabet,
    /// `table[z * |Ẑ| + ẑ]`
    table: Vec<f64>,
}

impl Distortion {
    pub fn new(reproduction: Alphabet, rows: &[Vec<f64>]) -> Result<Self> {
        let m = reproduction.size();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::ShapeMismatch(format!("distortion rows must have {m} entries")));
        }
        let table = rows.concat();
        if let Some(bad) = table.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidConfig(format!("distortion entry {bad} is not a finite nonnegative number")));
        }
        Ok(Distortion { reproduction, table })
    }

    /// Hamming distortion with reproduction alphabet equal to `z`.
    pub fn hamming(z: &Alphabet) -> Self {
        let n = z.size();
        let table = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { 1.0 }).collect();
        Distortion { reproduction: z.renamed(format!("{}_hat", z.name())), table }
    }

    pub fn reproduction(&self) -> &Alphabet {
        &self.reproduction
    }

    pub fn get(&self, z: usize, zhat: usize) -> f64 {
        self.table[z * self.reproduction.size() + zhat]
    }

    pub fn rows(&self) -> usize {
        self.table.len() / self.reproduction.size()
    }
}

/// Joint p(x, y) or p(x, y, z) plus an optional distortion measure.
///
/// Axis order is fixed: X, Y, then Z when present.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceModel {
    joint: JointDistribution,
    distortion: Option<Distortion>,
}

impl SourceModel {
    pub fn pair(joint: JointDistribution) -> Result<Self> {
        if joint.axes().len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "pair model needs axes (X, Y), got {}",
                joint.axes().len()
            )));
        }
        Ok(SourceModel { joint, distortion: None })
    }

    pub fn remote(joint: JointDistribution, distortion: Distortion) -> Result<Self> {
        if joint.axes().len() != 3 {
            return Err(Error::ShapeMismatch(format!(
                "remote model needs axes (X, Y, Z), got {}",
                joint.axes().len()
            )));
        }
        if distortion.rows() != joint.axes()[2].size() {
            return Err(Error::ShapeMismatch(format!(
                "distortion has {} rows, Z has {} symbols",
                distortion.rows(),
                joint.axes()[2].size()
            )));
        }
        Ok(SourceModel { joint, distortion: Some(distortion) })
    }

    pub fn joint(&self) -> &JointDistribution {
        &self.joint
    }

    pub fn distortion(&self) -> Option<&Distortion> {
        self.distortion.as_ref()
    }

    pub fn x(&self) -> &Alphabet {
        &self.joint.axes()[0]
    }

    pub fn y(&self) -> &Alphabet {
        &self.joint.axes()[1]
    }

    pub fn z(&self) -> Option<&Alphabet> {
        self.joint.axes().get(2)
    }

    /// p(x, y) as an `|X| × |Y|` row-major table.
    pub fn pxy(&self) -> Vec<f64> {
        let names = [self.x().name(), self.y().name()];
        self.joint.marginal(&names).expect("own axes").probs().to_vec()
    }

    /// Model with Y replaced by T(Y).
    pub fn reduce_y(&self, t: &Statistic) -> Result<SourceModel> {
        let joint = t.push_forward(&self.joint, self.y().name())?;
        Ok(SourceModel { joint, distortion: self.distortion.clone() })
    }

    /// Model with X replaced by T(X); p(t,y,z) = Σ_{x: T(x)=t} p(x,y,z).
    pub fn reduce_x(&self, t: &Statistic) -> Result<SourceModel> {
        let joint = t.push_forward(&self.joint, self.x().name())?;
        Ok(SourceModel { joint, distortion: self.distortion.clone() })
    }
}
