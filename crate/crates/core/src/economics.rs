//! Annualized system cost and levelized cost of energy.

use serde::{Deserialize, Serialize};

use crate::dispatch::{AnnualEnergies, GridSpec};
use crate::error::{ensure_finite, Error, Result};
use crate::optimizer::Candidate;
use crate::pv_array::{ModuleSpec, Technology};

/// Cost of one unit of a component. The unit depends on the component:
/// a module, a turbine, a pump, or a watt of DC nameplate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostItem {
    pub capital: f64,
    pub om_annual: f64,
    /// Years between replacements; replacements occur strictly inside the
    /// project life.
    pub lifetime: f64,
    pub replacement: f64,
}

impl CostItem {
    fn validate(&self, name: &str) -> Result<()> {
        for (field, v) in [
            ("capital", self.capital),
            ("om_annual", self.om_annual),
            ("lifetime", self.lifetime),
            ("replacement", self.replacement),
        ] {
            ensure_finite(&format!("costs.{name}.{field}"), v)?;
            if v < 0.0 {
                return Err(Error::Input(format!("costs.{name}.{field} must be >= 0, got {v}")));
            }
        }
        if self.lifetime <= 0.0 {
            return Err(Error::Input(format!("costs.{name}.lifetime must be > 0")));
        }
        Ok(())
    }

    fn scaled(self, k: f64) -> Self {
        Self {
            capital: self.capital * k,
            om_annual: self.om_annual * k,
            replacement: self.replacement * k,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    /// Per monofacial module.
    pub pv_module_mpv: CostItem,
    /// Per bifacial module.
    pub pv_module_bpv: CostItem,
    /// Per turbine-generator unit.
    pub hydro_turbine: CostItem,
    /// Per pump station (one installed).
    pub pump: CostItem,
    /// Per watt of DC nameplate.
    pub inverter: CostItem,
    /// Racking, wiring and installation, per module.
    pub balance_of_system: CostItem,
    pub discount_rate: f64,
    pub project_life: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        let per_module = |dollars_per_watt: f64, watts: f64| CostItem {
            capital: dollars_per_watt * watts,
            om_annual: 2.0,
            lifetime: 25.0,
            replacement: dollars_per_watt * watts,
        };
        Self {
            pv_module_mpv: per_module(0.36, 420.0),
            pv_module_bpv: per_module(0.40, 462.0),
            hydro_turbine: CostItem {
                capital: 400_000.0,
                om_annual: 4_000.0,
                lifetime: 25.0,
                replacement: 400_000.0,
            },
            pump: CostItem {
                capital: 300_000.0,
                om_annual: 3_000.0,
                lifetime: 25.0,
                replacement: 300_000.0,
            },
            inverter: CostItem {
                capital: 0.06,
                om_annual: 0.0,
                lifetime: 12.5,
                replacement: 0.06,
            },
            balance_of_system: CostItem {
                capital: 120.0,
                om_annual: 0.0,
                lifetime: 25.0,
                replacement: 120.0,
            },
            discount_rate: 0.05,
            project_life: 25.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<()> {
        self.pv_module_mpv.validate("pv_module_mpv")?;
        self.pv_module_bpv.validate("pv_module_bpv")?;
        self.hydro_turbine.validate("hydro_turbine")?;
        self.pump.validate("pump")?;
        self.inverter.validate("inverter")?;
        self.balance_of_system.validate("balance_of_system")?;
        if !(self.discount_rate > 0.0 && self.discount_rate < 1.0) {
            return Err(Error::Input(format!(
                "costs.discount_rate must be within (0, 1), got {}",
                self.discount_rate
            )));
        }
        if !(self.project_life >= 1.0) {
            return Err(Error::Input(format!(
                "costs.project_life must be >= 1 year, got {}",
                self.project_life
            )));
        }
        Ok(())
    }

    pub fn pv_module(&self, technology: Technology) -> &CostItem {
        match technology {
            Technology::Mpv => &self.pv_module_mpv,
            Technology::Bpv => &self.pv_module_bpv,
        }
    }

    /// Every monetary entry multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            pv_module_mpv: self.pv_module_mpv.scaled(k),
            pv_module_bpv: self.pv_module_bpv.scaled(k),
            hydro_turbine: self.hydro_turbine.scaled(k),
            pump: self.pump.scaled(k),
            inverter: self.inverter.scaled(k),
            balance_of_system: self.balance_of_system.scaled(k),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSummary {
    /// Annualized cost of the system net of export revenue, $/yr.
    pub acs: f64,
    pub annualized_capital: f64,
    pub om: f64,
    pub annualized_replacement: f64,
    pub grid_purchase_cost: f64,
    pub grid_sale_revenue: f64,
    /// Served energy, kWh/yr.
    pub e_served: f64,
    /// $/kWh, floored at zero.
    pub lcoe: f64,
}

/// `i(1+i)^n / ((1+i)^n - 1)`; `1/n` in the zero-rate limit.
pub fn capital_recovery_factor(i: f64, n: f64) -> Result<f64> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Input(format!("annuity length must be > 0 years, got {n}")));
    }
    if !(i > -1.0) || !i.is_finite() {
        return Err(Error::Input(format!("discount rate must be > -1, got {i}")));
    }
    if i == 0.0 {
        return Ok(1.0 / n);
    }
    let growth = (1.0 + i).powf(n);
    Ok(i * growth / (growth - 1.0))
}

/// Present value of mid-life replacements of one unit.
fn replacement_present_value(item: &CostItem, i: f64, project_life: f64) -> f64 {
    let mut pv = 0.0;
    let mut k = 1.0;
    while k * item.lifetime < project_life - 1e-9 {
        pv += item.replacement / (1.0 + i).powf(k * item.lifetime);
        k += 1.0;
    }
    pv
}

pub fn levelized_cost(
    candidate: Candidate,
    module: &ModuleSpec,
    ledger: &AnnualEnergies,
    costs: &CostModel,
    grid: &GridSpec,
) -> Result<CostSummary> {
    let e_served = ledger.e_served() * 1e6;
    if !(e_served > 0.0) {
        return Err(Error::UndefinedMetric("LCOE with zero served energy".into()));
    }
    let i = costs.discount_rate;
    let crf = capital_recovery_factor(i, costs.project_life)?;
    let nameplate_w = candidate.n_pv as f64 * module.p_rated;
    let lines = [
        (costs.pv_module(module.technology), candidate.n_pv as f64),
        (&costs.hydro_turbine, candidate.n_ht as f64),
        (&costs.pump, 1.0),
        (&costs.inverter, nameplate_w),
        (&costs.balance_of_system, candidate.n_pv as f64),
    ];
    let (mut capital, mut om, mut replacement) = (0.0, 0.0, 0.0);
    for (item, qty) in lines {
        capital += qty * crf * item.capital;
        om += qty * item.om_annual;
        replacement += qty * crf * replacement_present_value(item, i, costs.project_life);
    }
    let grid_purchase_cost = ledger.e_gpurch * 1e6 * grid.price_buy;
    let grid_sale_revenue = ledger.e_gsold * 1e6 * grid.price_sell;
    let acs = capital + om + replacement + grid_purchase_cost - grid_sale_revenue;
    Ok(CostSummary {
        acs,
        annualized_capital: capital,
        om,
        annualized_replacement: replacement,
        grid_purchase_cost,
        grid_sale_revenue,
        e_served,
        lcoe: acs.max(0.0) / e_served,
    })
}
