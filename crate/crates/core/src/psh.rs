//! Upper-reservoir pumped storage plant at constant head.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

pub const WATER_DENSITY: f64 = 1000.0;
pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PshSpec {
    /// Gross head, m.
    pub head: f64,
    /// Working volume bounds and initial fill, m³.
    pub v_max: f64,
    pub v_min: f64,
    pub v_init: f64,
    pub eta_pump: f64,
    pub eta_turbine: f64,
    /// Electrical rating of the pump station, MW.
    pub pump_power_max: f64,
    /// Electrical rating of one turbine-generator unit, MW.
    pub turbine_unit_rating: f64,
    pub n_ht: u32,
}

impl Default for PshSpec {
    fn default() -> Self {
        Self {
            head: 110.0,
            v_max: 6.0e6,
            v_min: 0.0,
            v_init: 3.0e6,
            eta_pump: 0.9,
            eta_turbine: 0.9,
            pump_power_max: 2.0,
            turbine_unit_rating: 0.5,
            n_ht: 5,
        }
    }
}

impl PshSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("psh.head", self.head),
            ("psh.v_max", self.v_max),
            ("psh.v_min", self.v_min),
            ("psh.v_init", self.v_init),
            ("psh.eta_pump", self.eta_pump),
            ("psh.eta_turbine", self.eta_turbine),
            ("psh.pump_power_max", self.pump_power_max),
            ("psh.turbine_unit_rating", self.turbine_unit_rating),
        ] {
            ensure_finite(name, v)?;
        }
        if self.head <= 0.0 {
            return Err(Error::Input(format!("psh.head must be > 0, got {}", self.head)));
        }
        if !(self.v_min <= self.v_init && self.v_init <= self.v_max) {
            return Err(Error::Input(format!(
                "psh volumes must satisfy v_min <= v_init <= v_max (got {}, {}, {})",
                self.v_min, self.v_init, self.v_max
            )));
        }
        for (name, eta) in [("psh.eta_pump", self.eta_pump), ("psh.eta_turbine", self.eta_turbine)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::Input(format!("{name} must be within (0, 1], got {eta}")));
            }
        }
        if self.pump_power_max < 0.0 || self.turbine_unit_rating < 0.0 {
            return Err(Error::Input("psh ratings must be >= 0".into()));
        }
        Ok(())
    }

    /// Hydraulic energy per cubic metre lifted through the head, MJ/m³.
    fn specific_energy_mj(&self) -> f64 {
        WATER_DENSITY * GRAVITY * self.head / 1e6
    }

    pub fn turbine_capacity(&self) -> f64 {
        self.n_ht as f64 * self.turbine_unit_rating
    }

    /// Largest pump power (MW) whose flow over `dt` seconds fits in the
    /// remaining headroom.
    pub fn pump_power_for_headroom(&self, state: ReservoirState, dt: f64) -> f64 {
        let headroom = (self.v_max - state.volume).max(0.0);
        headroom / dt * self.specific_energy_mj() / self.eta_pump
    }

    /// Largest turbine power (MW) sustainable for `dt` seconds from the
    /// water above `v_min`, ignoring the unit ratings.
    pub fn turbine_power_for_storage(&self, state: ReservoirState, dt: f64) -> f64 {
        let usable = (state.volume - self.v_min).max(0.0);
        usable / dt * self.specific_energy_mj() * self.eta_turbine
    }

    /// Flow (m³/s) that produces `p_hydro` MW at the turbines.
    pub fn turbine_flow(&self, p_hydro: f64) -> f64 {
        p_hydro / (self.eta_turbine * self.specific_energy_mj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirState {
    pub volume: f64,
}

impl ReservoirState {
    pub fn initial(spec: &PshSpec) -> Self {
        Self { volume: spec.v_init }
    }
}

/// Pumped flow for an electrical input `p_pump` MW: `η_p·P/(ρ·g·H)`, m³/s.
pub fn pump_flow(p_pump: f64, spec: &PshSpec) -> Result<f64> {
    if !(p_pump >= 0.0) {
        return Err(Error::Input(format!("pump power must be >= 0, got {p_pump}")));
    }
    if p_pump > spec.pump_power_max * (1.0 + 1e-12) {
        return Err(Error::Input(format!(
            "pump power {p_pump} MW exceeds the pump rating of {} MW",
            spec.pump_power_max
        )));
    }
    Ok(spec.eta_pump * p_pump / spec.specific_energy_mj())
}

/// Turbine output for a flow `q` m³/s, capped at the installed units, MW.
pub fn turbine_power(q: f64, spec: &PshSpec) -> f64 {
    (spec.eta_turbine * spec.specific_energy_mj() * q.max(0.0)).min(spec.turbine_capacity())
}

/// Mass balance over `dt` seconds. Flows must already respect the volume
/// bounds; a step that would leave them by more than rounding is an error.
pub fn step_reservoir(
    state: ReservoirState,
    q_in: f64,
    q_out: f64,
    dt: f64,
    spec: &PshSpec,
) -> Result<ReservoirState> {
    if q_in < 0.0 || q_out < 0.0 {
        return Err(Error::Logic(format!("negative reservoir flow (in={q_in}, out={q_out})")));
    }
    if q_in > 0.0 && q_out > 0.0 {
        return Err(Error::Logic(format!(
            "simultaneous pumping ({q_in} m³/s) and generation ({q_out} m³/s)"
        )));
    }
    let next = state.volume + (q_in - q_out) * dt;
    let tol = 1e-9 * spec.v_max.abs().max(1.0);
    if next > spec.v_max + tol || next < spec.v_min - tol {
        return Err(Error::Logic(format!(
            "reservoir volume {next} m³ outside [{}, {}]",
            spec.v_min, spec.v_max
        )));
    }
    Ok(ReservoirState {
        volume: next.clamp(spec.v_min, spec.v_max),
    })
}
