//! The four studies behind the command line: simulate one sizing, optimize
//! the sizing, compare technologies, and sweep weather sensitivity.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data_io::{
    ensure_dir, input_hash, load_load_csv, load_weather_csv, write_comparison_csv, write_json, write_results,
    write_series_csv, InputSummary, Provenance, ResultBundle, RunConfig, RunSummary, SeriesSummary,
};
use crate::dispatch::{index_of_reliability, rsf, simulate_year, LoadRecord, Simulation};
use crate::economics::{levelized_cost, CostSummary};
use crate::error::{Error, Result};
use crate::irradiance::{irradiance_series, IrradianceSample, WeatherRecord};
use crate::optimizer::{
    brute_force_pareto, moead_run, normalized_hypervolume, select_knee, Candidate, Evaluated, ObjectiveBounds,
    ObjectiveTriple, ParetoFront,
};
use crate::pv_array::{plane_series, ArraySpec, ModuleSpec, PlaneSample, Technology};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reference point for hypervolume in normalized objective space.
pub const HV_REFERENCE: f64 = 1.1;

/// Weather and load loaded once and shared by every run of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub weather: Vec<WeatherRecord>,
    pub load: Vec<LoadRecord>,
    pub hash: String,
}

impl Inputs {
    pub fn new(weather: Vec<WeatherRecord>, load: Vec<LoadRecord>) -> Self {
        let hash = input_hash(&weather, &load);
        Self { weather, load, hash }
    }

    pub fn load(cfg: &RunConfig) -> Result<Self> {
        cfg.check_files()?;
        let weather = load_weather_csv(&cfg.weather_path())?;
        let load = load_load_csv(&cfg.load_path())?;
        Ok(Self::new(weather, load))
    }

    /// First `hours` hours of both series.
    pub fn truncated(&self, hours: usize) -> Self {
        let h = hours.min(self.weather.len());
        Self::new(self.weather[..h].to_vec(), self.load[..h].to_vec())
    }

    /// Weather with one parameter scaled by `1 + delta`.
    pub fn perturbed(&self, param: SensitivityParam, delta: f64) -> Self {
        let k = 1.0 + delta;
        let weather = self
            .weather
            .iter()
            .map(|r| match param {
                SensitivityParam::Ghi => WeatherRecord {
                    dni: r.dni * k,
                    dhi: r.dhi * k,
                    ghi: r.ghi.map(|g| g * k),
                    ..*r
                },
                SensitivityParam::TAmb => WeatherRecord { t_amb: r.t_amb * k, ..*r },
            })
            .collect();
        Self::new(weather, self.load.clone())
    }
}

/// Everything that does not depend on the sizing, for one technology.
pub struct Study<'a> {
    pub cfg: &'a RunConfig,
    pub technology: Technology,
    pub module: ModuleSpec,
    pub inputs: &'a Inputs,
    pub irradiance: Vec<IrradianceSample>,
    pub plane: Vec<PlaneSample>,
    pub wind: Vec<f64>,
}

/// One simulated sizing with its metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub candidate: Candidate,
    pub simulation: Simulation,
    pub cost: CostSummary,
    pub ir: f64,
    pub rsf: f64,
}

impl Outcome {
    pub fn objectives(&self) -> ObjectiveTriple {
        ObjectiveTriple::from_metrics(self.ir, self.cost.lcoe, self.rsf)
    }
}

impl<'a> Study<'a> {
    pub fn new(cfg: &'a RunConfig, technology: Technology, inputs: &'a Inputs) -> Result<Self> {
        let irradiance = irradiance_series(&cfg.site, &inputs.weather, &cfg.bifacial)?;
        let plane = plane_series(&irradiance, technology);
        Ok(Self {
            cfg,
            technology,
            module: *cfg.modules.get(technology),
            inputs,
            irradiance,
            plane,
            wind: vec![0.0; inputs.load.len()],
        })
    }

    pub fn array(&self, n_pv: u32) -> ArraySpec {
        ArraySpec {
            n_pv,
            module: self.module,
            losses: self.cfg.array,
        }
    }

    pub fn run(&self, candidate: Candidate) -> Result<Outcome> {
        let psh = crate::psh::PshSpec {
            n_ht: candidate.n_ht,
            ..self.cfg.psh
        };
        let simulation = simulate_year(
            &self.array(candidate.n_pv),
            &psh,
            &self.cfg.grid,
            &self.plane,
            &self.inputs.load,
            &self.wind,
        )?;
        let ir = index_of_reliability(&simulation.steps, &self.inputs.load)?;
        let rsf = rsf(&simulation.ledger)?;
        let cost = levelized_cost(candidate, &self.module, &simulation.ledger, &self.cfg.costs, &self.cfg.grid)?;
        Ok(Outcome {
            candidate,
            simulation,
            cost,
            ir,
            rsf,
        })
    }

    pub fn evaluate(&self, candidate: Candidate) -> Result<ObjectiveTriple> {
        self.run(candidate).map(|o| o.objectives())
    }

    pub fn bundle(&self, outcome: Outcome, pareto: Option<ParetoFront>, seed: Option<u64>) -> Result<ResultBundle> {
        let steps = outcome.simulation.steps;
        let series = |f: fn(&crate::dispatch::DispatchStep) -> f64| {
            SeriesSummary::of(steps.iter().map(f)).ok_or_else(|| Error::Input("empty simulation horizon".into()))
        };
        let summary = RunSummary {
            technology: self.technology,
            candidate: outcome.candidate,
            ir: outcome.ir,
            lcoe: outcome.cost.lcoe,
            rsf: outcome.rsf,
            objectives: ObjectiveTriple::from_metrics(outcome.ir, outcome.cost.lcoe, outcome.rsf),
            ledger: outcome.simulation.ledger,
            cost: outcome.cost,
            inverted_power: series(|s| s.p_inv)?,
            pumping_rate: series(|s| s.q_pump)?,
            inputs: InputSummary::new(&self.inputs.weather, &self.irradiance, &self.inputs.load)
                .ok_or_else(|| Error::Input("empty simulation horizon".into()))?,
        };
        Ok(ResultBundle {
            summary,
            steps,
            irradiance: self.irradiance.clone(),
            weather: self.inputs.weather.clone(),
            pareto,
            provenance: Provenance {
                seed,
                config_hash: self.cfg.hash(),
                input_hash: self.inputs.hash.clone(),
                tool_version: TOOL_VERSION.to_string(),
            },
        })
    }
}

// ---------------------------------------------------------------------------
// simulate

pub fn cmd_simulate(
    cfg: &RunConfig,
    inputs: &Inputs,
    technology: Technology,
    candidate: Candidate,
    seed: Option<u64>,
    out_dir: Option<&Path>,
) -> Result<ResultBundle> {
    let study = Study::new(cfg, technology, inputs)?;
    let outcome = study.run(candidate)?;
    let bundle = study.bundle(outcome, None, seed)?;
    if let Some(dir) = out_dir {
        write_results(&bundle, dir)?;
    }
    Ok(bundle)
}

// ---------------------------------------------------------------------------
// optimize

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub grid_size: usize,
    pub front_size: usize,
    pub hypervolume_ratio: f64,
    pub subset: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeReport {
    pub technology: Technology,
    pub front: ParetoFront,
    pub knee: Evaluated,
    pub evaluations: usize,
    pub oracle: Option<OracleReport>,
    pub bundle: ResultBundle,
}

/// Compare an archive against the exact front of the same grid.
pub fn oracle_compare(archive: &[Evaluated], exact: &[Evaluated], grid_size: usize) -> OracleReport {
    let members: HashSet<Candidate> = exact.iter().map(|e| e.candidate).collect();
    let subset = archive.iter().all(|e| members.contains(&e.candidate));
    let hypervolume_ratio = match ObjectiveBounds::of(exact.iter().map(|e| &e.objectives)) {
        Some(b) => {
            let reference = normalized_hypervolume(exact, &b, HV_REFERENCE);
            if reference > 0.0 {
                normalized_hypervolume(archive, &b, HV_REFERENCE) / reference
            } else {
                1.0
            }
        }
        None => 1.0,
    };
    OracleReport {
        grid_size,
        front_size: exact.len(),
        hypervolume_ratio,
        subset,
    }
}

pub fn optimize_study(study: &Study, seed: u64, oracle_check: bool) -> Result<OptimizeReport> {
    let cfg = study.cfg;
    let moead = crate::optimizer::MoeadConfig { seed, ..cfg.moead };
    let result = moead_run(&moead, &cfg.bounds, |c| study.evaluate(c))?;
    let knee = select_knee(&result.archive)?;
    let oracle = if oracle_check {
        let exact = brute_force_pareto(&cfg.bounds, cfg.oracle.enumeration_cap, |c| study.evaluate(c))?;
        Some(oracle_compare(&result.archive, &exact, cfg.bounds.grid_size()))
    } else {
        None
    };
    let outcome = study.run(knee.candidate)?;
    let bundle = study.bundle(outcome, Some(result.archive.clone()), Some(seed))?;
    Ok(OptimizeReport {
        technology: study.technology,
        front: result.archive,
        knee,
        evaluations: result.evaluations,
        oracle,
        bundle,
    })
}

pub fn cmd_optimize(
    cfg: &RunConfig,
    inputs: &Inputs,
    technology: Technology,
    seed: u64,
    oracle_check: bool,
    out_dir: Option<&Path>,
) -> Result<OptimizeReport> {
    let study = Study::new(cfg, technology, inputs)?;
    let report = optimize_study(&study, seed, oracle_check)?;
    if let Some(dir) = out_dir {
        write_results(&report.bundle, dir)?;
        if let Some(oracle) = &report.oracle {
            write_json(&dir.join("oracle.json"), oracle)?;
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// compare

/// How `compare` sizes each technology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sizing {
    /// The same sizing for both technologies.
    Fixed(Candidate),
    /// Each technology at the knee of its own optimized front.
    Knee { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub technology: Technology,
    pub candidate: Candidate,
    pub ir: f64,
    pub lcoe: f64,
    pub rsf: f64,
    pub e_inv_gwh: f64,
    pub pumped_water_m3: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Bifacial over monofacial annual pumped water.
    pub pumped_water_ratio: f64,
    pub input_hash: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    #[serde(skip)]
    pub bundles: Vec<ResultBundle>,
}

pub fn cmd_compare(cfg: &RunConfig, inputs: &Inputs, sizing: Sizing, out_dir: Option<&Path>) -> Result<CompareReport> {
    let mut bundles = Vec::new();
    for technology in Technology::ALL {
        let study = Study::new(cfg, technology, inputs)?;
        let bundle = match sizing {
            Sizing::Fixed(c) => {
                let outcome = study.run(c)?;
                study.bundle(outcome, None, None)?
            }
            Sizing::Knee { seed } => optimize_study(&study, seed, false)?.bundle,
        };
        bundles.push(bundle);
    }
    let rows: Vec<CompareRow> = bundles
        .iter()
        .map(|b| {
            let s = &b.summary;
            CompareRow {
                technology: s.technology,
                candidate: s.candidate,
                ir: s.ir,
                lcoe: s.lcoe,
                rsf: s.rsf,
                e_inv_gwh: s.ledger.e_inv,
                pumped_water_m3: s.ledger.pumped_water,
            }
        })
        .collect();
    let water = |t: Technology| {
        rows.iter()
            .find(|r| r.technology == t)
            .map(|r| r.pumped_water_m3)
            .expect("both technologies run")
    };
    let (mono, bi) = (water(Technology::Mpv), water(Technology::Bpv));
    let pumped_water_ratio = if mono > 0.0 { bi / mono } else { f64::NAN };
    let report = CompareReport {
        rows,
        pumped_water_ratio,
        input_hash: inputs.hash.clone(),
        config_hash: cfg.hash(),
        seed: match sizing {
            Sizing::Knee { seed } => Some(seed),
            Sizing::Fixed(_) => None,
        },
        bundles,
    };
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        let ledgers: Vec<_> = report
            .bundles
            .iter()
            .map(|b| (b.summary.technology, b.summary.ledger))
            .collect();
        write_comparison_csv(&dir.join("comparison.csv"), &ledgers)?;
        write_series_csv(
            &dir.join("inverted_power.csv"),
            &report
                .bundles
                .iter()
                .map(|b| (b.summary.technology.as_str(), b.steps.iter().map(|s| s.p_inv).collect()))
                .collect::<Vec<_>>(),
        )?;
        write_series_csv(
            &dir.join("pumping_rate.csv"),
            &report
                .bundles
                .iter()
                .map(|b| (b.summary.technology.as_str(), b.steps.iter().map(|s| s.q_pump).collect()))
                .collect::<Vec<_>>(),
        )?;
        write_json(&dir.join("comparison.json"), &report)?;
        for b in &report.bundles {
            write_results(b, &dir.join(b.summary.technology.as_str()))?;
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// sensitivity

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensitivityParam {
    Ghi,
    TAmb,
}

impl SensitivityParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SensitivityParam::Ghi => "ghi",
            SensitivityParam::TAmb => "t_amb",
        }
    }
}

impl fmt::Display for SensitivityParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensitivityParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ghi" => Ok(SensitivityParam::Ghi),
            "t_amb" | "tamb" | "temperature" => Ok(SensitivityParam::TAmb),
            other => Err(Error::Input(format!("unknown sensitivity parameter `{other}` (expected ghi or t_amb)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub case: String,
    pub technology: Technology,
    pub n_pv: u32,
    pub n_ht: u32,
    pub ir: f64,
    pub lcoe: f64,
    pub rsf: f64,
}

pub const SENSITIVITY_HEADER: [&str; 7] = ["case", "technology", "n_pv", "n_ht", "ir", "lcoe", "rsf"];

pub fn case_label(param: SensitivityParam, delta: f64) -> String {
    format!("{param} ({:+}%)", (delta * 100.0 * 1e6).round() / 1e6)
}

/// Baseline and perturbed knee sizings for both technologies. GHI scaling
/// multiplies DNI, DHI and GHI; temperature scaling multiplies the Celsius
/// values directly, so negative temperatures move further below zero.
pub fn cmd_sensitivity(
    cfg: &RunConfig,
    inputs: &Inputs,
    param: SensitivityParam,
    delta: f64,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<Vec<SensitivityRow>> {
    if !(-0.5..=0.5).contains(&delta) {
        return Err(Error::Input(format!("delta must lie in [-0.5, 0.5], got {delta}")));
    }
    let perturbed = inputs.perturbed(param, delta);
    let mut rows = Vec::new();
    for (case, data) in [("baseline".to_string(), inputs), (case_label(param, delta), &perturbed)] {
        for technology in Technology::ALL {
            let study = Study::new(cfg, technology, data)?;
            let report = optimize_study(&study, seed, false)?;
            let s = &report.bundle.summary;
            rows.push(SensitivityRow {
                case: case.clone(),
                technology,
                n_pv: s.candidate.n_pv,
                n_ht: s.candidate.n_ht,
                ir: s.ir,
                lcoe: s.lcoe,
                rsf: s.rsf,
            });
        }
    }
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_sensitivity_csv(&dir.join("sensitivity.csv"), &rows)?;
    }
    Ok(rows)
}

pub fn write_sensitivity_csv(path: &Path, rows: &[SensitivityRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(SENSITIVITY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.case.clone(),
            r.technology.to_string(),
            r.n_pv.to_string(),
            r.n_ht.to_string(),
            r.ir.to_string(),
            r.lcoe.to_string(),
            r.rsf.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Output directory for a command when `--out-dir` is not given.
pub fn default_out_dir(command: &str) -> PathBuf {
    PathBuf::from("out").join(command)
}
