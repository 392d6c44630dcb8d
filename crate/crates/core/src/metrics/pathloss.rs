use serde::{Deserialize, Serialize};

use crate::{Error, KernelModel, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossKind {
    /// l(r) = min(1, r^-β)
    BoundedPower,
    /// l(r) = r^-β
    PurePower,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub kind: PathLossKind,
    pub beta: f64,
}

impl PathLossModel {
    pub fn new(kind: PathLossKind, beta: f64) -> Result<Self> {
        let m = Self { kind, beta };
        m.validate()?;
        Ok(m)
    }

    pub fn bounded(beta: f64) -> Result<Self> {
        Self::new(PathLossKind::BoundedPower, beta)
    }

    pub fn pure_power(beta: f64) -> Result<Self> {
        Self::new(PathLossKind::PurePower, beta)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta <= 2.0 {
            return Err(Error::DivergentInterference(format!(
                "path-loss exponent must exceed 2, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        let p = r.powf(-self.beta);
        match self.kind {
            PathLossKind::BoundedPower => p.min(1.0),
            PathLossKind::PurePower => p,
        }
    }

    /// ∫_{|x| > r} l(|x|) dx for r ≥ 1 (both kinds coincide there).
    pub fn tail_mass(&self, r: f64) -> f64 {
        debug_assert!(r >= 1.0);
        2.0 * std::f64::consts::PI * r.powf(2.0 - self.beta) / (self.beta - 2.0)
    }

    /// ∫ l(|x|) dx over the plane; infinite for the pure power law.
    pub fn total_mass(&self) -> f64 {
        match self.kind {
            PathLossKind::BoundedPower => std::f64::consts::PI * self.beta / (self.beta - 2.0),
            PathLossKind::PurePower => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    /// The tagged BS is a fixed point of the process at distance r0.
    FixedBs,
    /// The tagged BS is the nearest one, at distance r0.
    NearestBs,
}

/// Interference seen at the origin with the tagged BS at x0 = (r0, 0).
#[derive(Clone, Debug)]
pub struct InterferenceQuery {
    pub model: KernelModel,
    pub pathloss: PathLossModel,
    pub power: f64,
    pub r0: f64,
    pub association: Association,
}

impl InterferenceQuery {
    pub fn new(
        model: KernelModel,
        pathloss: PathLossModel,
        power: f64,
        r0: f64,
        association: Association,
    ) -> Result<Self> {
        let q = Self {
            model,
            pathloss,
            power,
            r0,
            association,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        self.pathloss.validate()?;
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::invalid(format!(
                "power must be positive, got {}",
                self.power
            )));
        }
        if !(self.r0 >= 0.0 && self.r0.is_finite()) {
            return Err(Error::invalid(format!(
                "r0 must be non-negative, got {}",
                self.r0
            )));
        }
        Ok(())
    }

    pub(crate) fn expect(&self, a: Association) -> Result<()> {
        self.validate()?;
        if self.association != a {
            return Err(Error::invalid(format!(
                "query association is {:?}, operation needs {a:?}",
                self.association
            )));
        }
        Ok(())
    }

    pub fn anchor(&self) -> [f64; 2] {
        [self.r0, 0.0]
    }
}
