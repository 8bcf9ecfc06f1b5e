use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pvpsh::data_io::{read_pareto_csv, write_load_csv, write_weather_csv, PARETO_HEADER};
use pvpsh::solar_geometry::SiteSpec;
use pvpsh::synthetic::{synthetic_load, synthetic_weather, WeatherTargets, DEFAULT_SEED, LOAD_TARGET};

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config() -> PathBuf {
    repo().join("config/ludington.toml")
}

fn pvpsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvpsh")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bundled_data_matches_generator() {
    let tmp = tempfile::tempdir().unwrap();
    let weather = synthetic_weather(&SiteSpec::default(), &WeatherTargets::default(), DEFAULT_SEED).unwrap();
    let load = synthetic_load(LOAD_TARGET, DEFAULT_SEED);
    write_weather_csv(&tmp.path().join("w.csv"), &weather).unwrap();
    write_load_csv(&tmp.path().join("l.csv"), &load).unwrap();
    assert_eq!(
        fs::read(tmp.path().join("w.csv")).unwrap(),
        fs::read(repo().join("data/weather_synthetic.csv")).unwrap()
    );
    assert_eq!(
        fs::read(tmp.path().join("l.csv")).unwrap(),
        fs::read(repo().join("data/load_synthetic.csv")).unwrap()
    );
}

#[test]
fn simulate_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sim");
    let o = pvpsh(&["simulate", "--config", s(&config()), "--tech", "mpv", "--n-pv", "4108", "--n-ht", "4", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ledger.csv", "hourly.csv", "irradiance.csv", "inverted_power.csv", "pumping_rate.csv", "summary.json"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(!out.join("pareto.csv").exists());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["candidate"]["n_pv"], 4108);
    let hourly = fs::read_to_string(out.join("hourly.csv")).unwrap();
    assert_eq!(hourly.lines().count(), 8761);
}

#[test]
fn simulate_without_panels_runs_on_storage_and_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("zero");
    let o = pvpsh(&["simulate", "--config", s(&config()), "--tech", "bpv", "--n-pv", "0", "--n-ht", "2", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["ledger"]["e_inv"], 0.0);
    assert!(summary["ledger"]["e_gpurch"].as_f64().unwrap() > 0.0);
}

#[test]
fn optimize_is_reproducible_and_exports_front() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = pvpsh(&["optimize", "--config", s(&config()), "--tech", "bpv", "--seed", "17", "--out-dir", s(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("pareto.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), PARETO_HEADER.join(","));
    let front = read_pareto_csv(&tmp.path().join("a/pareto.csv")).unwrap();
    assert!(!front.is_empty());
}

#[test]
fn optimize_requires_a_seed() {
    let o = pvpsh(&["optimize", "--config", s(&config()), "--tech", "mpv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--seed"));
}

#[test]
fn bad_arguments_exit_with_validation_code() {
    assert_eq!(pvpsh(&["simulate", "--config", s(&config()), "--tech", "cdte", "--n-pv", "1", "--n-ht", "1"]).status.code(), Some(1));
    assert_eq!(pvpsh(&["frobnicate"]).status.code(), Some(1));
    let o = pvpsh(&["sensitivity", "--config", s(&config()), "--param", "ghi", "--delta", "0.9", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("delta"));
    let o = pvpsh(&["compare", "--config", s(&config())]);
    assert_eq!(o.status.code(), Some(1));
    assert!(pvpsh(&["--help"]).status.success());
}

#[test]
fn missing_weather_file_is_reported_with_its_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[data]\nweather = \"nowhere/weather.csv\"\nload = \"nowhere/load.csv\"\n").unwrap();
    let o = pvpsh(&["simulate", "--config", s(&cfg), "--tech", "mpv", "--n-pv", "10", "--n-ht", "1"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weather.csv"));
}

#[test]
fn malformed_weather_row_names_line_and_column() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fs::read_to_string(repo().join("data/weather_synthetic.csv")).unwrap();
    let mut lines: Vec<String> = src.lines().map(str::to_string).collect();
    let mut cells: Vec<String> = lines[101].split(',').map(str::to_string).collect();
    cells[3] = "abc".into();
    lines[101] = cells.join(",");
    fs::write(tmp.path().join("w.csv"), lines.join("\n") + "\n").unwrap();
    fs::copy(repo().join("data/load_synthetic.csv"), tmp.path().join("l.csv")).unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "[data]\nweather = \"w.csv\"\nload = \"l.csv\"\n").unwrap();
    let o = pvpsh(&["simulate", "--config", s(&cfg), "--tech", "mpv", "--n-pv", "10", "--n-ht", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("102") && err.contains("dhi"), "{err}");
}

#[test]
fn compare_at_fixed_sizing_writes_both_technologies() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cmp");
    let o = pvpsh(&["compare", "--config", s(&config()), "--n-pv", "3784", "--n-ht", "4", "--out-dir", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(table.lines().next().unwrap().contains("mpv") && table.contains("bpv"));
    assert!(out.join("mpv/summary.json").is_file() && out.join("bpv/summary.json").is_file());
}
