//! PV module and array electrical model: NOCT cell temperature, linear
//! temperature-derated DC power, and a clipped inverter stage.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::irradiance::IrradianceSample;

/// Irradiance at standard test conditions, W/m².
pub const STC_IRRADIANCE: f64 = 1000.0;
/// Cell temperature at standard test conditions, °C.
pub const STC_TEMPERATURE: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Technology {
    Mpv,
    Bpv,
}

impl Technology {
    pub const ALL: [Technology; 2] = [Technology::Mpv, Technology::Bpv];

    pub fn as_str(self) -> &'static str {
        match self {
            Technology::Mpv => "mpv",
            Technology::Bpv => "bpv",
        }
    }
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mpv" | "monofacial" => Ok(Technology::Mpv),
            "bpv" | "bifacial" => Ok(Technology::Bpv),
            other => Err(Error::Input(format!("unknown technology `{other}` (expected mpv or bpv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleSpec {
    /// Nameplate power at STC, W.
    pub p_rated: f64,
    pub efficiency_stc: f64,
    pub technology: Technology,
    /// Power temperature coefficient, 1/°C (negative).
    pub gamma_p: f64,
    pub noct: f64,
    /// Module area, m².
    pub area: f64,
}

impl ModuleSpec {
    /// 420 W, 18.8 % mono-PERC module.
    pub fn monofacial() -> Self {
        Self {
            p_rated: 420.0,
            efficiency_stc: 0.188,
            technology: Technology::Mpv,
            gamma_p: -0.0034,
            noct: 42.0,
            area: 420.0 / (STC_IRRADIANCE * 0.188),
        }
    }

    /// 462 W, 20.68 % bifacial module of the same footprint.
    pub fn bifacial() -> Self {
        Self {
            p_rated: 462.0,
            efficiency_stc: 0.2068,
            technology: Technology::Bpv,
            gamma_p: -0.0034,
            noct: 42.0,
            area: 462.0 / (STC_IRRADIANCE * 0.2068),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p_rated", self.p_rated),
            ("efficiency_stc", self.efficiency_stc),
            ("gamma_p", self.gamma_p),
            ("noct", self.noct),
            ("area", self.area),
        ] {
            ensure_finite(name, v)?;
        }
        if self.p_rated <= 0.0 {
            return Err(Error::Input(format!("module p_rated must be > 0, got {}", self.p_rated)));
        }
        if !(self.efficiency_stc > 0.0 && self.efficiency_stc < 0.3) {
            return Err(Error::Input(format!(
                "module efficiency_stc must be within (0, 0.3), got {}",
                self.efficiency_stc
            )));
        }
        if !(-0.01..=0.0).contains(&self.gamma_p) {
            return Err(Error::Input(format!(
                "module gamma_p must be within [-0.01, 0], got {}",
                self.gamma_p
            )));
        }
        if self.area <= 0.0 {
            return Err(Error::Input(format!("module area must be > 0, got {}", self.area)));
        }
        Ok(())
    }
}

/// Losses between the modules and the AC bus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayLosses {
    /// Soiling, wiring and mismatch.
    pub derate: f64,
    pub inverter_efficiency: f64,
    /// AC clipping limit of the inverter fleet, MW.
    pub inverter_ac_limit: f64,
}

impl Default for ArrayLosses {
    fn default() -> Self {
        Self {
            derate: 0.95,
            inverter_efficiency: 0.97,
            inverter_ac_limit: 2.5,
        }
    }
}

impl ArrayLosses {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("array.derate", self.derate),
            ("array.inverter_efficiency", self.inverter_efficiency),
            ("array.inverter_ac_limit", self.inverter_ac_limit),
        ] {
            ensure_finite(name, v)?;
        }
        if !(self.derate > 0.0 && self.derate <= 1.0) {
            return Err(Error::Input(format!("array.derate must be within (0, 1], got {}", self.derate)));
        }
        if !(self.inverter_efficiency > 0.0 && self.inverter_efficiency <= 1.0) {
            return Err(Error::Input(format!(
                "array.inverter_efficiency must be within (0, 1], got {}",
                self.inverter_efficiency
            )));
        }
        if self.inverter_ac_limit < 0.0 {
            return Err(Error::Input(format!(
                "array.inverter_ac_limit must be >= 0, got {}",
                self.inverter_ac_limit
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub n_pv: u32,
    pub module: ModuleSpec,
    pub losses: ArrayLosses,
}

impl ArraySpec {
    pub fn validate(&self) -> Result<()> {
        self.module.validate()?;
        self.losses.validate()
    }

    /// DC nameplate of the array, W.
    pub fn nameplate_w(&self) -> f64 {
        self.n_pv as f64 * self.module.p_rated
    }
}

/// NOCT model: `T_amb + G·(NOCT - 20)/800`.
pub fn cell_temperature(g_eff: f64, t_amb: f64, module: &ModuleSpec) -> f64 {
    t_amb + g_eff * (module.noct - 20.0) / 800.0
}

/// `P_rated·(G/1000)·(1 + γ_p·(T_cell - 25))`, never negative. Watts.
pub fn dc_module_power(g_eff: f64, t_cell: f64, module: &ModuleSpec) -> f64 {
    let p = module.p_rated * (g_eff / STC_IRRADIANCE) * (1.0 + module.gamma_p * (t_cell - STC_TEMPERATURE));
    p.max(0.0)
}

/// AC output of the whole array after derate, inverter losses and clipping, MW.
pub fn inverted_array_power(array: &ArraySpec, g_eff: f64, t_amb: f64) -> f64 {
    if array.n_pv == 0 || g_eff <= 0.0 {
        return 0.0;
    }
    let t_cell = cell_temperature(g_eff, t_amb, &array.module);
    let per_module = dc_module_power(g_eff, t_cell, &array.module);
    let ac = array.n_pv as f64 * per_module * array.losses.derate * array.losses.inverter_efficiency / 1e6;
    ac.min(array.losses.inverter_ac_limit)
}

/// Effective plane irradiance and ambient temperature seen by one technology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneSample {
    pub g_eff: f64,
    pub t_amb: f64,
}

/// Monofacial modules see the transposed GHI; bifacial modules see
/// `front + φ_b·rear`.
pub fn plane_series(samples: &[IrradianceSample], technology: Technology) -> Vec<PlaneSample> {
    samples
        .iter()
        .map(|s| PlaneSample {
            g_eff: match technology {
                Technology::Mpv => s.monofacial,
                Technology::Bpv => s.bifacial,
            },
            t_amb: s.t_amb,
        })
        .collect()
}
