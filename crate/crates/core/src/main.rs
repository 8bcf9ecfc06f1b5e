use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pvpsh::data_io::{write_load_csv, write_weather_csv, RunConfig};
use pvpsh::optimizer::Candidate;
use pvpsh::pv_array::Technology;
use pvpsh::studies::{
    cmd_compare, cmd_optimize, cmd_sensitivity, cmd_simulate, default_out_dir, Inputs, SensitivityParam, Sizing,
};
use pvpsh::synthetic::{synthetic_load, synthetic_weather, WeatherTargets, DEFAULT_SEED, LOAD_TARGET};
use pvpsh::{Error, Result};

/// Hourly simulation and sizing of hybrid PV + pumped-storage systems.
#[derive(Parser)]
#[command(name = "pvpsh", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one sizing for a full year.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tech: Technology,
        #[arg(long)]
        n_pv: u32,
        #[arg(long)]
        n_ht: u32,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Search the sizing grid with MOEA/D and report the knee point.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        tech: Technology,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also enumerate the whole grid and compare fronts.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Run both technologies on the same inputs and compare ledgers.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Fixed sizing for both technologies (requires --n-ht).
        #[arg(long, requires = "n_ht")]
        n_pv: Option<u32>,
        #[arg(long, requires = "n_pv")]
        n_ht: Option<u32>,
        /// Size each technology at its own knee point.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-optimize both technologies with scaled irradiance or temperature.
    Sensitivity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: SensitivityParam,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Write the bundled synthetic weather and load files.
    Synthetic {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn setup(config: &Path) -> Result<(RunConfig, Inputs)> {
    let cfg = RunConfig::load(config)?;
    let inputs = Inputs::load(&cfg)?;
    print!("{}", pvpsh::data_io::InputSummary::new(
        &inputs.weather,
        &pvpsh::irradiance::irradiance_series(&cfg.site, &inputs.weather, &cfg.bifacial)?,
        &inputs.load,
    )
    .map(|s| s.table())
    .unwrap_or_default());
    Ok((cfg, inputs))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            tech,
            n_pv,
            n_ht,
            seed,
            out_dir,
        } => {
            let (cfg, inputs) = setup(&config)?;
            let out = out_dir.unwrap_or_else(|| default_out_dir("simulate"));
            let b = cmd_simulate(&cfg, &inputs, tech, Candidate { n_pv, n_ht }, seed, Some(&out))?;
            let s = &b.summary;
            println!(
                "{tech}: n_pv={n_pv} n_ht={n_ht} IR={:.4} LCOE={:.4} $/kWh RSF={:.4}",
                s.ir, s.lcoe, s.rsf
            );
            println!(
                "E_inv={:.4} GWh E_hydro={:.4} GWh E_gpurch={:.4} GWh pumped water={:.4e} m3",
                s.ledger.e_inv, s.ledger.e_hydro, s.ledger.e_gpurch, s.ledger.pumped_water
            );
            println!("results written to {}", out.display());
        }
        Command::Optimize {
            config,
            tech,
            seed,
            out_dir,
            oracle_check,
        } => {
            let (cfg, inputs) = setup(&config)?;
            let out = out_dir.unwrap_or_else(|| default_out_dir("optimize"));
            let r = cmd_optimize(&cfg, &inputs, tech, seed, oracle_check, Some(&out))?;
            let k = r.knee;
            println!(
                "{tech}: front of {} points from {} evaluations",
                r.front.len(),
                r.evaluations
            );
            println!(
                "knee: n_pv={} n_ht={} IR={:.4} LCOE={:.4} $/kWh RSF={:.4}",
                k.candidate.n_pv,
                k.candidate.n_ht,
                k.objectives.ir(),
                k.objectives.lcoe(),
                k.objectives.rsf()
            );
            if let Some(o) = &r.oracle {
                println!(
                    "oracle: grid {} points, exact front {} points, hypervolume ratio {:.4}, subset {}",
                    o.grid_size, o.front_size, o.hypervolume_ratio, o.subset
                );
            }
            println!("results written to {}", out.display());
        }
        Command::Compare {
            config,
            n_pv,
            n_ht,
            seed,
            out_dir,
        } => {
            let sizing = match (n_pv, n_ht, seed) {
                (Some(n_pv), Some(n_ht), _) => Sizing::Fixed(Candidate { n_pv, n_ht }),
                (None, None, Some(seed)) => Sizing::Knee { seed },
                _ => {
                    return Err(Error::Input(
                        "compare needs either --n-pv and --n-ht, or --seed for knee sizing".into(),
                    ))
                }
            };
            let (cfg, inputs) = setup(&config)?;
            let out = out_dir.unwrap_or_else(|| default_out_dir("compare"));
            let r = cmd_compare(&cfg, &inputs, sizing, Some(&out))?;
            println!(
                "{:<6}{:>8}{:>6}{:>10}{:>10}{:>10}{:>12}{:>16}",
                "tech", "n_pv", "n_ht", "IR", "LCOE", "RSF", "E_inv GWh", "pumped m3"
            );
            for row in &r.rows {
                println!(
                    "{:<6}{:>8}{:>6}{:>10.4}{:>10.4}{:>10.4}{:>12.4}{:>16.1}",
                    row.technology.as_str(),
                    row.candidate.n_pv,
                    row.candidate.n_ht,
                    row.ir,
                    row.lcoe,
                    row.rsf,
                    row.e_inv_gwh,
                    row.pumped_water_m3
                );
            }
            println!("pumped water ratio (bpv/mpv): {:.4}", r.pumped_water_ratio);
            println!("input hash: {}", r.input_hash);
            println!("results written to {}", out.display());
        }
        Command::Sensitivity {
            config,
            param,
            delta,
            seed,
            out_dir,
        } => {
            let (cfg, inputs) = setup(&config)?;
            let out = out_dir.unwrap_or_else(|| default_out_dir("sensitivity"));
            let rows = cmd_sensitivity(&cfg, &inputs, param, delta, seed, Some(&out))?;
            println!(
                "{:<16}{:<6}{:>8}{:>6}{:>10}{:>10}{:>10}",
                "case", "tech", "n_pv", "n_ht", "IR", "LCOE", "RSF"
            );
            for r in &rows {
                println!(
                    "{:<16}{:<6}{:>8}{:>6}{:>10.4}{:>10.4}{:>10.4}",
                    r.case,
                    r.technology.as_str(),
                    r.n_pv,
                    r.n_ht,
                    r.ir,
                    r.lcoe,
                    r.rsf
                );
            }
            println!("results written to {}", out.display());
        }
        Command::Synthetic { out_dir, seed } => {
            let site = pvpsh::solar_geometry::SiteSpec::default();
            pvpsh::data_io::ensure_dir(&out_dir)?;
            let weather = synthetic_weather(&site, &WeatherTargets::default(), seed)?;
            let load = synthetic_load(LOAD_TARGET, seed);
            write_weather_csv(&out_dir.join("weather_synthetic.csv"), &weather)?;
            write_load_csv(&out_dir.join("load_synthetic.csv"), &load)?;
            println!("synthetic weather and load written to {}", out_dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
