//! CSV ingestion, run configuration, and result files.
//!
//! # Input schemas
//!
//! Weather CSV (8,760 data rows, header required, column order free):
//! `hour` (0..8759) or `timestamp` (`YYYY-MM-DD HH:MM[:SS]`), `dni`, `dhi`,
//! optional `ghi`, and `t_amb` (aliases `temperature`, `temp_air`).
//! Irradiance in W/m², temperature in °C. Without a `ghi` column GHI is
//! reconstructed from DNI, DHI and the zenith angle.
//!
//! Load CSV (8,760 data rows): `hour` or `timestamp`, and `p_load` (aliases
//! `load`, `load_mw`) in MW.
//!
//! # Output files
//!
//! | file | columns |
//! |------|---------|
//! | `ledger.csv` | [`LEDGER_HEADER`] |
//! | `hourly.csv` | [`HOURLY_HEADER`] |
//! | `irradiance.csv` | [`IRRADIANCE_HEADER`] |
//! | `inverted_power.csv` | `hour,<technology>...` (MW) |
//! | `pumping_rate.csv` | `hour,<technology>...` (m³/s) |
//! | `pareto.csv` | [`PARETO_HEADER`] |
//! | `summary.json` | run summary with provenance |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dispatch::{AnnualEnergies, DispatchStep, GridSpec, LoadRecord};
use crate::economics::{CostModel, CostSummary};
use crate::error::{Error, Result};
use crate::irradiance::{BifacialParams, IrradianceSample, WeatherRecord};
use crate::optimizer::{Bounds, Candidate, Evaluated, MoeadConfig, ObjectiveTriple, ParetoFront};
use crate::psh::PshSpec;
use crate::pv_array::{ArrayLosses, ModuleSpec, Technology};
use crate::solar_geometry::SiteSpec;
use crate::HOURS_PER_YEAR;

pub const LEDGER_HEADER: [&str; 12] = [
    "technology",
    "e_inv_gwh",
    "e_hydro_gwh",
    "e_pump_gwh",
    "e_gpurch_gwh",
    "e_load_gwh",
    "e_gsold_gwh",
    "e_deficit_gwh",
    "e_curtailed_gwh",
    "e_wt_gwh",
    "pumped_water_m3",
    "released_water_m3",
];

pub const HOURLY_HEADER: [&str; 13] = [
    "hour",
    "p_load_mw",
    "p_inv_mw",
    "p_wt_mw",
    "p_pump_mw",
    "p_hydro_mw",
    "p_gp_mw",
    "p_gsold_mw",
    "p_deficit_mw",
    "p_curtailed_mw",
    "q_pump_m3s",
    "q_turbine_m3s",
    "volume_m3",
];

pub const IRRADIANCE_HEADER: [&str; 16] = [
    "hour",
    "elevation_deg",
    "ghi",
    "i_gtm",
    "front_beam",
    "front_diffuse",
    "front_reflected",
    "front_total",
    "rear_beam",
    "rear_diffuse",
    "rear_reflected",
    "rear_total",
    "i_gtb",
    "dni",
    "dhi",
    "t_amb",
];

pub const PARETO_HEADER: [&str; 8] = ["n_pv", "n_ht", "ir", "lcoe", "rsf", "f1", "f2", "f3"];

// ---------------------------------------------------------------------------
// CSV input

struct Columns {
    time: (usize, TimeColumn),
    values: Vec<(usize, &'static str)>,
    optional: Vec<Option<usize>>,
}

#[derive(Clone, Copy)]
enum TimeColumn {
    Hour,
    Timestamp,
}

fn find(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

fn resolve_columns(
    path: &Path,
    headers: &csv::StringRecord,
    required: &[(&'static str, &[&str])],
    optional: &[&[&str]],
) -> Result<Columns> {
    let time = if let Some(i) = find(headers, &["hour", "hour_index"]) {
        (i, TimeColumn::Hour)
    } else if let Some(i) = find(headers, &["timestamp", "time", "datetime"]) {
        (i, TimeColumn::Timestamp)
    } else {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: "missing time column (`hour` or `timestamp`)".into(),
        });
    };
    let mut values = Vec::new();
    for (name, aliases) in required {
        let i = find(headers, aliases).ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!("missing required column `{name}`"),
        })?;
        values.push((i, *name));
    }
    Ok(Columns {
        time,
        values,
        optional: optional.iter().map(|aliases| find(headers, aliases)).collect(),
    })
}

fn days_before_month(month: u32) -> u32 {
    const CUMULATIVE: [u32; 12] = [0, 31, 59, 90, 120, 151, 181, 212, 243, 273, 304, 334];
    CUMULATIVE[(month - 1) as usize]
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    ["%Y-%m-%d %H:%M", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
}

fn parse_hour(path: &Path, line: usize, raw: &str, kind: TimeColumn) -> Result<usize> {
    let err = |message: String, column: &str| Error::Load {
        path: path.to_path_buf(),
        line,
        column: column.into(),
        message,
    };
    match kind {
        TimeColumn::Hour => raw
            .trim()
            .parse::<usize>()
            .map_err(|_| err(format!("cannot parse `{raw}` as an hour index"), "hour")),
        TimeColumn::Timestamp => {
            let ts = parse_timestamp(raw).ok_or_else(|| err(format!("cannot parse timestamp `{raw}`"), "timestamp"))?;
            if ts.month() == 2 && ts.day() == 29 {
                return Err(err(
                    "February 29 is not supported; the engine runs on 8,760-hour years, \
                     remove the leap-day rows before loading"
                        .into(),
                    "timestamp",
                ));
            }
            let day = days_before_month(ts.month()) + ts.day() - 1;
            Ok(day as usize * 24 + ts.hour() as usize)
        }
    }
}

fn parse_value(path: &Path, line: usize, column: &str, raw: &str) -> Result<f64> {
    let err = |message: String| Error::Load {
        path: path.to_path_buf(),
        line,
        column: column.into(),
        message,
    };
    let v: f64 = raw
        .trim()
        .parse()
        .map_err(|_| err(format!("cannot parse `{raw}` as a number")))?;
    if !v.is_finite() {
        return Err(err(format!("non-finite value `{raw}`")));
    }
    Ok(v)
}

/// Read rows, checking the time column runs 0, 1, 2, ... without gaps.
fn read_rows<T>(
    path: &Path,
    required: &[(&'static str, &[&str])],
    optional: &[&[&str]],
    mut build: impl FnMut(usize, usize, &[f64], &[Option<f64>]) -> Result<T>,
) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let headers = reader.headers().map_err(csv_err)?.clone();
    let cols = resolve_columns(path, &headers, required, optional)?;

    let mut out = Vec::with_capacity(HOURS_PER_YEAR);
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(row + 2, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let hour = parse_hour(path, line, field(cols.time.0), cols.time.1)?;
        if hour != row {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                column: "hour".into(),
                message: format!("expected hour {row}, found {hour} (rows must be hour-sorted without gaps)"),
            });
        }
        let values = cols
            .values
            .iter()
            .map(|&(i, name)| parse_value(path, line, name, field(i)))
            .collect::<Result<Vec<_>>>()?;
        let optional = cols
            .optional
            .iter()
            .map(|o| match o {
                Some(i) if !field(*i).is_empty() => parse_value(path, line, &headers[*i], field(*i)).map(Some),
                _ => Ok(None),
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(build(line, hour, &values, &optional)?);
    }
    if out.len() != HOURS_PER_YEAR {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("expected {HOURS_PER_YEAR} data rows, found {}", out.len()),
        });
    }
    Ok(out)
}

pub fn load_weather_csv(path: &Path) -> Result<Vec<WeatherRecord>> {
    let required: [(&str, &[&str]); 3] = [
        ("dni", &["dni"]),
        ("dhi", &["dhi"]),
        ("t_amb", &["t_amb", "temperature", "temp_air"]),
    ];
    read_rows(path, &required, &[&["ghi"]], |line, hour, v, opt| {
        let load_err = |column: &str, message: String| Error::Load {
            path: path.to_path_buf(),
            line,
            column: column.into(),
            message,
        };
        for (k, name) in ["dni", "dhi"].iter().enumerate() {
            if v[k] < 0.0 {
                return Err(load_err(name, format!("negative irradiance {}", v[k])));
            }
        }
        if let Some(g) = opt[0] {
            if g < 0.0 {
                return Err(load_err("ghi", format!("negative irradiance {g}")));
            }
        }
        if !(-60.0..=60.0).contains(&v[2]) {
            return Err(load_err("t_amb", format!("temperature {} outside [-60, 60] °C", v[2])));
        }
        Ok(WeatherRecord {
            hour_index: hour,
            dni: v[0],
            dhi: v[1],
            ghi: opt[0],
            t_amb: v[2],
        })
    })
}

pub fn load_load_csv(path: &Path) -> Result<Vec<LoadRecord>> {
    let required: [(&str, &[&str]); 1] = [("p_load", &["p_load", "load", "load_mw", "p_load_mw"])];
    let rows = read_rows(path, &required, &[], |line, hour, v, _| {
        if v[0] < 0.0 {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                column: "p_load".into(),
                message: format!("negative load {}", v[0]),
            });
        }
        Ok(LoadRecord {
            hour_index: hour,
            p_load: v[0],
        })
    })?;
    if rows.iter().all(|r| r.p_load == 0.0) {
        log::warn!("{}: load is zero in every hour; reliability and LCOE are undefined", path.display());
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// CSV output

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

/// Write rows of already-formatted cells; `{}` formatting of f64 is the
/// shortest representation that parses back to the same value.
fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_weather_csv(path: &Path, weather: &[WeatherRecord]) -> Result<()> {
    write_table(
        path,
        &["hour", "ghi", "dni", "dhi", "t_amb"],
        weather.iter().map(|r| {
            vec![
                r.hour_index.to_string(),
                r.ghi.map_or(String::new(), |g| g.to_string()),
                r.dni.to_string(),
                r.dhi.to_string(),
                r.t_amb.to_string(),
            ]
        }),
    )
}

pub fn write_load_csv(path: &Path, load: &[LoadRecord]) -> Result<()> {
    write_table(
        path,
        &["hour", "p_load"],
        load.iter().map(|r| vec![r.hour_index.to_string(), r.p_load.to_string()]),
    )
}

fn ledger_row(technology: &str, l: &AnnualEnergies) -> Vec<String> {
    let mut row = vec![technology.to_string()];
    row.extend(
        [
            l.e_inv,
            l.e_hydro,
            l.e_pump,
            l.e_gpurch,
            l.e_load,
            l.e_gsold,
            l.e_deficit,
            l.e_curtailed,
            l.e_wt,
            l.pumped_water,
            l.released_water,
        ]
        .iter()
        .map(f64::to_string),
    );
    row
}

pub fn write_ledger_csv(path: &Path, runs: &[(Technology, AnnualEnergies)]) -> Result<()> {
    write_table(
        path,
        &LEDGER_HEADER,
        runs.iter().map(|(t, l)| ledger_row(t.as_str(), l)),
    )
}

/// Side-by-side ledger with one row per quantity and one column per run.
pub fn write_comparison_csv(path: &Path, runs: &[(Technology, AnnualEnergies)]) -> Result<()> {
    let mut header = vec!["quantity"];
    header.extend(runs.iter().map(|(t, _)| t.as_str()));
    let rows: Vec<Vec<String>> = runs.iter().map(|(t, l)| ledger_row(t.as_str(), l)).collect();
    write_table(
        path,
        &header,
        (1..LEDGER_HEADER.len()).map(|k| {
            let mut row = vec![LEDGER_HEADER[k].to_string()];
            row.extend(rows.iter().map(|r| r[k].clone()));
            row
        }),
    )
}

pub fn write_hourly_csv(path: &Path, steps: &[DispatchStep]) -> Result<()> {
    write_table(
        path,
        &HOURLY_HEADER,
        steps.iter().enumerate().map(|(h, s)| {
            std::iter::once(h.to_string()).chain(
                [
                    s.p_load,
                    s.p_inv,
                    s.p_wt,
                    s.p_pump,
                    s.p_hydro,
                    s.p_gp,
                    s.p_gsold,
                    s.p_deficit,
                    s.p_curtailed,
                    s.q_pump,
                    s.q_turbine,
                    s.volume,
                ]
                .into_iter()
                .map(|v| v.to_string()),
            )
        }),
    )
}

pub fn read_hourly_csv(path: &Path) -> Result<Vec<DispatchStep>> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let v = (1..HOURLY_HEADER.len())
            .map(|k| parse_value(path, row + 2, HOURLY_HEADER[k], record.get(k).unwrap_or("")))
            .collect::<Result<Vec<_>>>()?;
        out.push(DispatchStep {
            p_load: v[0],
            p_inv: v[1],
            p_wt: v[2],
            p_pump: v[3],
            p_hydro: v[4],
            p_gp: v[5],
            p_gsold: v[6],
            p_deficit: v[7],
            p_curtailed: v[8],
            q_pump: v[9],
            q_turbine: v[10],
            volume: v[11],
        });
    }
    Ok(out)
}

pub fn write_irradiance_csv(path: &Path, samples: &[IrradianceSample], weather: &[WeatherRecord]) -> Result<()> {
    write_table(
        path,
        &IRRADIANCE_HEADER,
        samples.iter().zip(weather).map(|(s, w)| {
            std::iter::once(s.hour_index.to_string()).chain(
                [
                    s.position.elevation,
                    s.ghi,
                    s.monofacial,
                    s.front.beam,
                    s.front.diffuse,
                    s.front.reflected,
                    s.front.total,
                    s.rear.beam,
                    s.rear.diffuse,
                    s.rear.reflected,
                    s.rear.total,
                    s.bifacial,
                    w.dni,
                    w.dhi,
                    w.t_amb,
                ]
                .into_iter()
                .map(|v| v.to_string()),
            )
        }),
    )
}

/// `hour,<name>...` columns, one series per name.
pub fn write_series_csv(path: &Path, columns: &[(&str, Vec<f64>)]) -> Result<()> {
    let mut header = vec!["hour"];
    header.extend(columns.iter().map(|(n, _)| *n));
    let len = columns.first().map_or(0, |(_, v)| v.len());
    write_table(
        path,
        &header,
        (0..len).map(|h| std::iter::once(h.to_string()).chain(columns.iter().map(move |(_, v)| v[h].to_string()))),
    )
}

pub fn write_pareto_csv(path: &Path, front: &[Evaluated]) -> Result<()> {
    write_table(
        path,
        &PARETO_HEADER,
        front.iter().map(|e| {
            let o = e.objectives;
            vec![
                e.candidate.n_pv.to_string(),
                e.candidate.n_ht.to_string(),
                o.ir().to_string(),
                o.lcoe().to_string(),
                o.rsf().to_string(),
                o.f1.to_string(),
                o.f2.to_string(),
                o.f3.to_string(),
            ]
        }),
    )
}

pub fn read_pareto_csv(path: &Path) -> Result<ParetoFront> {
    let mut reader = csv::Reader::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let get = |k: usize| parse_value(path, row + 2, PARETO_HEADER[k], record.get(k).unwrap_or(""));
        out.push(Evaluated {
            candidate: Candidate {
                n_pv: get(0)? as u32,
                n_ht: get(1)? as u32,
            },
            objectives: ObjectiveTriple {
                f1: get(5)?,
                f2: get(6)?,
                f3: get(7)?,
            },
        });
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Logic(format!("serializing summary: {e}")))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| Error::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Output {
        path: dir.to_path_buf(),
        source,
    })
}

// ---------------------------------------------------------------------------
// Summaries and hashing

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl SeriesSummary {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut n = 0usize;
        let (mut min, mut max, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for v in values {
            n += 1;
            min = min.min(v);
            max = max.max(v);
            sum += v;
        }
        (n > 0).then(|| Self {
            min,
            mean: sum / n as f64,
            max,
        })
    }
}

/// Minimum, mean and maximum of every input series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub ghi: SeriesSummary,
    pub dni: SeriesSummary,
    pub dhi: SeriesSummary,
    pub t_amb: SeriesSummary,
    pub load: SeriesSummary,
}

impl InputSummary {
    /// GHI comes from the weather-plus-geometry samples so that
    /// reconstructed values are reported too.
    pub fn new(weather: &[WeatherRecord], samples: &[IrradianceSample], load: &[LoadRecord]) -> Option<Self> {
        Some(Self {
            ghi: SeriesSummary::of(samples.iter().map(|s| s.ghi))?,
            dni: SeriesSummary::of(weather.iter().map(|r| r.dni))?,
            dhi: SeriesSummary::of(weather.iter().map(|r| r.dhi))?,
            t_amb: SeriesSummary::of(weather.iter().map(|r| r.t_amb))?,
            load: SeriesSummary::of(load.iter().map(|r| r.p_load))?,
        })
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<14}{:>12}{:>12}{:>12}\n", "series", "min", "mean", "max");
        for (name, v) in [
            ("GHI (W/m2)", self.ghi),
            ("DNI (W/m2)", self.dni),
            ("DHI (W/m2)", self.dhi),
            ("T_amb (C)", self.t_amb),
            ("Load (MW)", self.load),
        ] {
            s.push_str(&format!("{:<14}{:>12.4}{:>12.4}{:>12.4}\n", name, v.min, v.mean, v.max));
        }
        s
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the exact numeric content of the weather and load series.
pub fn input_hash(weather: &[WeatherRecord], load: &[LoadRecord]) -> String {
    let mut h = Sha256::new();
    for r in weather {
        h.update(r.hour_index.to_le_bytes());
        for v in [r.dni, r.dhi, r.ghi.unwrap_or(f64::NAN), r.t_amb] {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    for r in load {
        h.update(r.hour_index.to_le_bytes());
        h.update(r.p_load.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub weather: PathBuf,
    pub load: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Modules {
    pub mpv: ModuleSpec,
    pub bpv: ModuleSpec,
}

impl Default for Modules {
    fn default() -> Self {
        Self {
            mpv: ModuleSpec::monofacial(),
            bpv: ModuleSpec::bifacial(),
        }
    }
}

impl Modules {
    pub fn get(&self, technology: Technology) -> &ModuleSpec {
        match technology {
            Technology::Mpv => &self.mpv,
            Technology::Bpv => &self.bpv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSettings {
    /// Largest grid `brute_force_pareto` will enumerate.
    pub enumeration_cap: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            enumeration_cap: 200_000,
        }
    }
}

/// Everything a study needs. Sections other than `[data]` fall back to
/// their defaults when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataPaths,
    #[serde(default)]
    pub site: SiteSpec,
    #[serde(default)]
    pub modules: Modules,
    #[serde(default)]
    pub array: ArrayLosses,
    #[serde(default)]
    pub bounds: Bounds,
    #[serde(default)]
    pub psh: PshSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub costs: CostModel,
    #[serde(default)]
    pub moead: MoeadConfig,
    #[serde(default)]
    pub bifacial: BifacialParams,
    #[serde(default)]
    pub oracle: OracleSettings,
    /// Directory relative data paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn with_data(weather: impl Into<PathBuf>, load: impl Into<PathBuf>) -> Self {
        Self {
            data: DataPaths {
                weather: weather.into(),
                load: load.into(),
            },
            site: SiteSpec::default(),
            modules: Modules::default(),
            array: ArrayLosses::default(),
            bounds: Bounds::default(),
            psh: PshSpec::default(),
            grid: GridSpec::default(),
            costs: CostModel::default(),
            moead: MoeadConfig::default(),
            bifacial: BifacialParams::default(),
            oracle: OracleSettings::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, &base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn weather_path(&self) -> PathBuf {
        self.base_dir.join(&self.data.weather)
    }

    pub fn load_path(&self) -> PathBuf {
        self.base_dir.join(&self.data.load)
    }

    /// Numeric invariants only; file existence is checked by
    /// [`RunConfig::check_files`].
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Input(m) => Error::Config(m),
            other => other,
        };
        self.site.validate().map_err(wrap)?;
        self.modules.mpv.validate().map_err(wrap)?;
        self.modules.bpv.validate().map_err(wrap)?;
        if self.modules.mpv.technology != Technology::Mpv || self.modules.bpv.technology != Technology::Bpv {
            return Err(Error::Config("modules.mpv/bpv must declare matching technologies".into()));
        }
        self.array.validate().map_err(wrap)?;
        self.bounds.validate().map_err(wrap)?;
        self.psh.validate().map_err(wrap)?;
        self.grid.validate().map_err(wrap)?;
        self.costs.validate().map_err(wrap)?;
        self.moead.validate().map_err(wrap)?;
        self.bifacial.validate().map_err(wrap)?;
        Ok(())
    }

    pub fn check_files(&self) -> Result<()> {
        for p in [self.weather_path(), self.load_path()] {
            if !p.is_file() {
                return Err(Error::Io {
                    path: p,
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "data file not found"),
                });
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        sha256_hex(&json)
    }
}

// ---------------------------------------------------------------------------
// Result bundle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_hash: String,
    pub input_hash: String,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub technology: Technology,
    pub candidate: Candidate,
    pub ir: f64,
    pub lcoe: f64,
    pub rsf: f64,
    pub objectives: ObjectiveTriple,
    pub ledger: AnnualEnergies,
    pub cost: CostSummary,
    pub inverted_power: SeriesSummary,
    pub pumping_rate: SeriesSummary,
    pub inputs: InputSummary,
}

/// Everything produced by one simulated sizing.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub summary: RunSummary,
    pub steps: Vec<DispatchStep>,
    pub irradiance: Vec<IrradianceSample>,
    pub weather: Vec<WeatherRecord>,
    pub pareto: Option<ParetoFront>,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    summary: &'a RunSummary,
    provenance: &'a Provenance,
    pareto_size: Option<usize>,
}

/// Write `ledger.csv`, `hourly.csv`, `irradiance.csv`, `inverted_power.csv`,
/// `pumping_rate.csv`, `summary.json` and, when present, `pareto.csv`.
pub fn write_results(bundle: &ResultBundle, out_dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(out_dir)?;
    let tech = bundle.summary.technology;
    let mut written = Vec::new();
    let mut out = |name: &str| {
        let p = out_dir.join(name);
        written.push(p.clone());
        p
    };
    write_ledger_csv(&out("ledger.csv"), &[(tech, bundle.summary.ledger)])?;
    write_hourly_csv(&out("hourly.csv"), &bundle.steps)?;
    write_irradiance_csv(&out("irradiance.csv"), &bundle.irradiance, &bundle.weather)?;
    write_series_csv(
        &out("inverted_power.csv"),
        &[(tech.as_str(), bundle.steps.iter().map(|s| s.p_inv).collect())],
    )?;
    write_series_csv(
        &out("pumping_rate.csv"),
        &[(tech.as_str(), bundle.steps.iter().map(|s| s.q_pump).collect())],
    )?;
    if let Some(front) = &bundle.pareto {
        write_pareto_csv(&out("pareto.csv"), front)?;
    }
    write_json(
        &out("summary.json"),
        &SummaryFile {
            summary: &bundle.summary,
            provenance: &bundle.provenance,
            pareto_size: bundle.pareto.as_ref().map(Vec::len),
        },
    )?;
    Ok(written)
}
