//! Hourly energy management for PV + pumped storage + capped grid tie, and
//! the reliability and storage-usage metrics computed from its ledger.
//!
//! Priority each hour: renewables serve the load; surplus drives the pump
//! (limited by its rating and reservoir headroom), then is sold up to the
//! export cap, and the rest is curtailed. A shortfall is met by the turbines
//! (limited by installed units and stored water), then by grid purchases up
//! to the import cap, and the rest is unserved.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::psh::{pump_flow, step_reservoir, PshSpec, ReservoirState};
use crate::pv_array::{inverted_array_power, ArraySpec, PlaneSample};

/// Simulation step, seconds.
pub const STEP_SECONDS: f64 = 3600.0;
/// Simulation step, hours.
pub const STEP_HOURS: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadRecord {
    pub hour_index: usize,
    /// MW
    pub p_load: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Import cap, MW.
    pub p_purchase_max: f64,
    /// Export cap, MW.
    pub p_sale_max: f64,
    /// $/kWh
    pub price_buy: f64,
    /// $/kWh
    pub price_sell: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            p_purchase_max: 0.5,
            p_sale_max: 2.5,
            price_buy: 0.12,
            price_sell: 0.04,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("grid.p_purchase_max", self.p_purchase_max),
            ("grid.p_sale_max", self.p_sale_max),
            ("grid.price_buy", self.price_buy),
            ("grid.price_sell", self.price_sell),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Input(format!("{name} must be >= 0, got {v}")));
            }
        }
        ensure_finite("grid.price_buy", self.price_buy)?;
        ensure_finite("grid.price_sell", self.price_sell)
    }
}

/// Power flows of one hour (MW) and the reservoir state at its end.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DispatchStep {
    pub p_load: f64,
    pub p_inv: f64,
    pub p_wt: f64,
    pub p_pump: f64,
    pub p_hydro: f64,
    pub p_gp: f64,
    pub p_gsold: f64,
    pub p_deficit: f64,
    pub p_curtailed: f64,
    /// Pumped and released flows, m³/s.
    pub q_pump: f64,
    pub q_turbine: f64,
    /// Reservoir volume after the step, m³.
    pub volume: f64,
}

impl DispatchStep {
    /// Sources minus sinks; zero up to rounding for every valid step.
    pub fn balance_residual(&self) -> f64 {
        (self.p_inv + self.p_wt + self.p_hydro + self.p_gp + self.p_deficit)
            - (self.p_load + self.p_pump + self.p_gsold + self.p_curtailed)
    }
}

/// Annual energy ledger. Energies in GWh, water in m³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnualEnergies {
    pub e_inv: f64,
    pub e_wt: f64,
    pub e_hydro: f64,
    pub e_pump: f64,
    pub e_gpurch: f64,
    pub e_load: f64,
    pub e_gsold: f64,
    pub e_deficit: f64,
    pub e_curtailed: f64,
    pub pumped_water: f64,
    pub released_water: f64,
}

impl AnnualEnergies {
    pub fn from_steps(steps: &[DispatchStep]) -> Self {
        let mut mwh = AnnualEnergies::default();
        for s in steps {
            mwh.e_inv += s.p_inv * STEP_HOURS;
            mwh.e_wt += s.p_wt * STEP_HOURS;
            mwh.e_hydro += s.p_hydro * STEP_HOURS;
            mwh.e_pump += s.p_pump * STEP_HOURS;
            mwh.e_gpurch += s.p_gp * STEP_HOURS;
            mwh.e_load += s.p_load * STEP_HOURS;
            mwh.e_gsold += s.p_gsold * STEP_HOURS;
            mwh.e_deficit += s.p_deficit * STEP_HOURS;
            mwh.e_curtailed += s.p_curtailed * STEP_HOURS;
            mwh.pumped_water += s.q_pump * STEP_SECONDS;
            mwh.released_water += s.q_turbine * STEP_SECONDS;
        }
        AnnualEnergies {
            e_inv: mwh.e_inv / 1e3,
            e_wt: mwh.e_wt / 1e3,
            e_hydro: mwh.e_hydro / 1e3,
            e_pump: mwh.e_pump / 1e3,
            e_gpurch: mwh.e_gpurch / 1e3,
            e_load: mwh.e_load / 1e3,
            e_gsold: mwh.e_gsold / 1e3,
            e_deficit: mwh.e_deficit / 1e3,
            e_curtailed: mwh.e_curtailed / 1e3,
            ..mwh
        }
    }

    /// Energy actually delivered to the load, GWh.
    pub fn e_served(&self) -> f64 {
        (self.e_load - self.e_deficit).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub steps: Vec<DispatchStep>,
    pub ledger: AnnualEnergies,
}

/// Dispatch one hour given the inverted PV, wind and load powers.
pub fn dispatch_hour(
    p_inv: f64,
    p_wt: f64,
    p_load: f64,
    state: ReservoirState,
    psh: &PshSpec,
    grid: &GridSpec,
) -> Result<(DispatchStep, ReservoirState)> {
    let mut step = DispatchStep {
        p_load,
        p_inv,
        p_wt,
        ..Default::default()
    };
    let renewable = p_inv + p_wt;
    if renewable >= p_load {
        let surplus = renewable - p_load;
        step.p_pump = surplus
            .min(psh.pump_power_max)
            .min(psh.pump_power_for_headroom(state, STEP_SECONDS));
        step.q_pump = pump_flow(step.p_pump, psh)?;
        let rest = surplus - step.p_pump;
        step.p_gsold = rest.min(grid.p_sale_max);
        step.p_curtailed = rest - step.p_gsold;
    } else {
        let need = p_load - renewable;
        step.p_hydro = need
            .min(psh.turbine_capacity())
            .min(psh.turbine_power_for_storage(state, STEP_SECONDS));
        step.q_turbine = psh.turbine_flow(step.p_hydro);
        let rest = need - step.p_hydro;
        step.p_gp = rest.min(grid.p_purchase_max);
        step.p_deficit = rest - step.p_gp;
    }
    let next = step_reservoir(state, step.q_pump, step.q_turbine, STEP_SECONDS, psh)?;
    step.volume = next.volume;
    Ok((step, next))
}

/// Run the dispatch over aligned hourly series (normally 8,760 hours).
pub fn simulate_year(
    array: &ArraySpec,
    psh: &PshSpec,
    grid: &GridSpec,
    plane: &[PlaneSample],
    load: &[LoadRecord],
    wt_series: &[f64],
) -> Result<Simulation> {
    if plane.len() != load.len() || plane.len() != wt_series.len() {
        return Err(Error::Input(format!(
            "misaligned series: {} weather hours, {} load hours, {} wind hours",
            plane.len(),
            load.len(),
            wt_series.len()
        )));
    }
    let mut state = ReservoirState::initial(psh);
    let mut steps = Vec::with_capacity(plane.len());
    for ((sample, l), &p_wt) in plane.iter().zip(load).zip(wt_series) {
        let p_inv = inverted_array_power(array, sample.g_eff, sample.t_amb);
        let (step, next) = dispatch_hour(p_inv, p_wt, l.p_load, state, psh, grid)?;
        steps.push(step);
        state = next;
    }
    let ledger = AnnualEnergies::from_steps(&steps);
    Ok(Simulation { steps, ledger })
}

/// Renewable storage usage factor: storage output over total delivered
/// system energy (PV + wind + hydro + grid purchases).
pub fn rsf(ledger: &AnnualEnergies) -> Result<f64> {
    let system = ledger.e_inv + ledger.e_wt + ledger.e_hydro + ledger.e_gpurch;
    if system <= 0.0 {
        return Err(Error::UndefinedMetric("RSF with zero system energy".into()));
    }
    Ok(ledger.e_hydro / system)
}

/// Index of reliability: one minus the unserved fraction of the load.
pub fn index_of_reliability(steps: &[DispatchStep], load: &[LoadRecord]) -> Result<f64> {
    if steps.len() != load.len() {
        return Err(Error::Input(format!(
            "misaligned series: {} dispatch steps, {} load hours",
            steps.len(),
            load.len()
        )));
    }
    let total: f64 = load.iter().map(|l| l.p_load).sum();
    if total <= 0.0 {
        return Err(Error::UndefinedMetric("IR with zero total load".into()));
    }
    let unserved: f64 = steps
        .iter()
        .zip(load)
        .map(|(s, l)| (l.p_load - (s.p_inv + s.p_wt + s.p_hydro + s.p_gp)).max(0.0))
        .sum();
    Ok(1.0 - unserved / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn half_full() -> (PshSpec, ReservoirState) {
        let psh = PshSpec::default();
        (psh, ReservoirState::initial(&psh))
    }

    #[test]
    fn surplus_pumps_then_sells() {
        let (psh, st) = half_full();
        let psh = PshSpec { pump_power_max: 1.0, ..psh };
        let grid = GridSpec { p_sale_max: f64::INFINITY, ..GridSpec::default() };
        let (s, _) = dispatch_hour(2.0, 0.0, 0.5, st, &psh, &grid).unwrap();
        assert_eq!(s.p_pump, 1.0);
        assert_eq!(s.p_gsold, 0.5);
        assert_eq!((s.p_hydro, s.p_gp, s.p_deficit, s.p_curtailed), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn shortfall_uses_turbines() {
        let (psh, st) = half_full();
        let (s, _) = dispatch_hour(0.0, 0.0, 1.0, st, &psh, &GridSpec::default()).unwrap();
        assert_abs_diff_eq!(s.p_hydro, 1.0, epsilon = 1e-12);
        assert_eq!((s.p_pump, s.p_gp, s.p_deficit), (0.0, 0.0, 0.0));
    }

    #[test]
    fn empty_reservoir_falls_back_to_grid_then_deficit() {
        let psh = PshSpec { v_init: 0.0, ..PshSpec::default() };
        let grid = GridSpec { p_purchase_max: 0.3, ..GridSpec::default() };
        let (s, _) = dispatch_hour(0.0, 0.0, 0.5, ReservoirState::initial(&psh), &psh, &grid).unwrap();
        assert_eq!(s.p_hydro, 0.0);
        assert_abs_diff_eq!(s.p_gp, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_deficit, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn full_reservoir_sends_surplus_to_grid_and_curtailment() {
        let psh = PshSpec { v_init: 6.0e6, ..PshSpec::default() };
        let grid = GridSpec { p_sale_max: 0.4, ..GridSpec::default() };
        let (s, st) = dispatch_hour(1.5, 0.0, 0.5, ReservoirState::initial(&psh), &psh, &grid).unwrap();
        assert_eq!(s.p_pump, 0.0);
        assert_eq!(s.p_gsold, 0.4);
        assert_abs_diff_eq!(s.p_curtailed, 0.6, epsilon = 1e-12);
        assert_eq!(st.volume, psh.v_max);
    }

    #[test]
    fn headroom_limits_pumping() {
        let psh = PshSpec::default();
        let st = ReservoirState { volume: psh.v_max - 1000.0 };
        let (s, next) = dispatch_hour(3.0, 0.0, 0.0, st, &psh, &GridSpec::default()).unwrap();
        assert!(s.p_pump < psh.pump_power_max);
        assert_abs_diff_eq!(next.volume, psh.v_max, epsilon = 1e-6);
    }

    #[test]
    fn no_turbines_means_no_hydro() {
        let psh = PshSpec { n_ht: 0, ..PshSpec::default() };
        let (s, _) = dispatch_hour(0.0, 0.0, 1.0, ReservoirState::initial(&psh), &psh, &GridSpec::default()).unwrap();
        assert_eq!(s.p_hydro, 0.0);
        assert_eq!(s.p_gp, 0.5);
    }

    #[test]
    fn misaligned_series_are_rejected() {
        let array = ArraySpec {
            n_pv: 1,
            module: crate::pv_array::ModuleSpec::monofacial(),
            losses: Default::default(),
        };
        let plane = vec![PlaneSample { g_eff: 0.0, t_amb: 0.0 }; 3];
        let load = vec![LoadRecord { hour_index: 0, p_load: 1.0 }; 2];
        let err = simulate_year(&array, &PshSpec::default(), &GridSpec::default(), &plane, &load, &[0.0; 3]);
        assert!(matches!(err, Err(Error::Input(_))));
    }

    #[test]
    fn rsf_examples() {
        let l = AnnualEnergies { e_inv: 3.342776, e_hydro: 2.264277, e_gpurch: 0.36718031, ..Default::default() };
        assert_abs_diff_eq!(rsf(&l).unwrap(), 0.37901, epsilon = 5e-6);
        assert_eq!(rsf(&AnnualEnergies { e_inv: 1.0, ..Default::default() }).unwrap(), 0.0);
        assert_eq!(rsf(&AnnualEnergies { e_hydro: 2.0, ..Default::default() }).unwrap(), 1.0);
        assert!(matches!(rsf(&AnnualEnergies::default()), Err(Error::UndefinedMetric(_))));
    }

    fn load(p: &[f64]) -> Vec<LoadRecord> {
        p.iter().enumerate().map(|(i, &p_load)| LoadRecord { hour_index: i, p_load }).collect()
    }

    #[test]
    fn reliability_examples() {
        let l = load(&[1.0, 2.0]);
        let served: Vec<DispatchStep> = l.iter().map(|x| DispatchStep { p_load: x.p_load, p_gp: x.p_load, ..Default::default() }).collect();
        assert_eq!(index_of_reliability(&served, &l).unwrap(), 1.0);
        let dark: Vec<DispatchStep> = l.iter().map(|x| DispatchStep { p_load: x.p_load, p_deficit: x.p_load, ..Default::default() }).collect();
        assert_eq!(index_of_reliability(&dark, &l).unwrap(), 0.0);
        assert!(index_of_reliability(&dark, &load(&[0.0, 0.0])).is_err());

        // Table IV mPV: 1 - E_deficit / E_L
        let ir = 1.0 - 0.008081316 / 4.1052819;
        assert_abs_diff_eq!(ir, 0.99803, epsilon = 5e-6);
    }
}
