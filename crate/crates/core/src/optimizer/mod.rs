//! Sizing optimization over (N_PV, N_Ht) with three minimized objectives:
//! `1 - IR`, `LCOE` and `1 - RSF`.

mod moead;
mod pareto;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use moead::{moead_run, tchebycheff, MoeadConfig, MoeadResult, WEIGHT_FLOOR};
pub use pareto::{
    brute_force_pareto, dominates, hypervolume, insert_nondominated, nondominated, normalized_hypervolume,
    select_knee, ObjectiveBounds,
};
pub use weights::weight_vectors;

/// Number of objectives.
pub const N_OBJECTIVES: usize = 3;

/// A sizing decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub n_pv: u32,
    pub n_ht: u32,
}

/// Objectives in minimization form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTriple {
    /// `1 - IR`
    pub f1: f64,
    /// LCOE, $/kWh
    pub f2: f64,
    /// `1 - RSF`
    pub f3: f64,
}

impl ObjectiveTriple {
    pub fn from_metrics(ir: f64, lcoe: f64, rsf: f64) -> Self {
        Self {
            f1: 1.0 - ir,
            f2: lcoe,
            f3: 1.0 - rsf,
        }
    }

    pub fn ir(&self) -> f64 {
        1.0 - self.f1
    }

    pub fn lcoe(&self) -> f64 {
        self.f2
    }

    pub fn rsf(&self) -> f64 {
        1.0 - self.f3
    }

    pub fn as_array(&self) -> [f64; N_OBJECTIVES] {
        [self.f1, self.f2, self.f3]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluated {
    pub candidate: Candidate,
    pub objectives: ObjectiveTriple,
}

/// Nondominated candidates, sorted by `(n_pv, n_ht)`.
pub type ParetoFront = Vec<Evaluated>;

/// An inclusive integer range sampled every `step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableRange {
    pub min: u32,
    pub max: u32,
    #[serde(default = "one")]
    pub step: u32,
}

fn one() -> u32 {
    1
}

impl VariableRange {
    pub fn new(min: u32, max: u32, step: u32) -> Self {
        Self { min, max, step }
    }

    pub fn fixed(value: u32) -> Self {
        Self::new(value, value, 1)
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.step == 0 {
            return Err(Error::Input(format!("{name}.step must be >= 1")));
        }
        if self.min > self.max {
            return Err(Error::Input(format!(
                "{name}: min ({}) is above max ({})",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Number of grid values.
    pub fn count(&self) -> usize {
        ((self.max - self.min) / self.step) as usize + 1
    }

    pub fn value(&self, index: usize) -> u32 {
        self.min + index as u32 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.count()).map(|k| self.value(k))
    }

    pub fn contains(&self, v: u32) -> bool {
        v >= self.min && v <= self.max && (v - self.min).is_multiple_of(self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub n_pv: VariableRange,
    pub n_ht: VariableRange,
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            n_pv: VariableRange::new(0, 8000, 10),
            n_ht: VariableRange::new(0, 8, 1),
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<()> {
        self.n_pv.validate("bounds.n_pv")?;
        self.n_ht.validate("bounds.n_ht")
    }

    pub fn grid_size(&self) -> usize {
        self.n_pv.count().saturating_mul(self.n_ht.count())
    }

    pub fn contains(&self, c: Candidate) -> bool {
        self.n_pv.contains(c.n_pv) && self.n_ht.contains(c.n_ht)
    }

    pub fn candidates(&self) -> impl Iterator<Item = Candidate> + '_ {
        self.n_pv
            .values()
            .flat_map(move |n_pv| self.n_ht.values().map(move |n_ht| Candidate { n_pv, n_ht }))
    }
}
