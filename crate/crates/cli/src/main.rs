use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use audit_game::analysis::{
    cover_regime, expected_min_audited_round, fpr_experiment, fwer_bound, regime_map, sensitivity_curves, to_csv,
    write_output, DEFAULT_DELTA_GRID, DEFAULT_N_MIN_GRID,
};
use audit_game::runner::{set_threads, shipped};
use audit_game::{bonferroni_z, ConfigError, load_config, run_sweep, Error, PolicySpec, Registry, SweepConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "audit-game", version, about = "Seeded simulator for the repeated compliance-audit game")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// YAML config path, or a shipped config name (`default`, `attrition`)
    #[arg(long, default_value = "default")]
    config: String,
    /// Override a config key, e.g. `--set seeds=10`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the strategy x policy sweep and write sweep.json
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to all cores)
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Honest-noisy false-positive experiment; writes fpr.json and fpr.csv
    Fpr {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 200)]
        seeds: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Attrition (n_min, delta) detection map; writes regime.csv
    RegimeMap {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        n_min: Option<Vec<u32>>,
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// TPR/FPR curves for an adaptive baseline; writes curves.csv
    Sensitivity {
        #[command(flatten)]
        config: ConfigArgs,
        /// `min_sample_floor` or `suspicion_escalation`
        #[arg(long)]
        policy: String,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the analytic oracles for the given parameters
    Oracle {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 100)]
        n_min: u32,
        #[arg(long, default_value_t = 1000)]
        n_max: u32,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
}

fn load(args: &ConfigArgs, registry: &Registry) -> Result<SweepConfig, Error> {
    let mut config = match shipped::by_name(&args.config) {
        Some(text) if !Path::new(&args.config).exists() => SweepConfig::from_yaml(text, registry)?,
        _ => load_config(Path::new(&args.config), registry)?,
    };
    for kv in &args.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| ConfigError::Parse(format!("override `{kv}` is not KEY=VALUE")))?;
        config = config.apply_override(key.trim(), value.trim(), registry)?;
    }
    Ok(config)
}

fn summary(what: &str, cells: usize, seeds: usize, start: Instant, out: &Path) {
    println!(
        "{what}: {cells} cells x {seeds} seeds in {:.2?} -> {}",
        start.elapsed(),
        out.display()
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    let registry = Registry::builtin();
    let start = Instant::now();
    match cli.command {
        Command::Run { config, out, jobs } => {
            let config = load(&config, registry)?;
            if let Some(n) = jobs {
                if n == 0 {
                    return Err(ConfigError::InvalidSweep("--jobs must be positive".into()).into());
                }
                set_threads(n).map_err(|e| ConfigError::InvalidSweep(e.to_string()))?;
            }
            let result = run_sweep(registry, &config)?;
            let path = result.write(&out)?;
            summary("run", result.cells.len(), config.seeds.len(), start, &path);
        }
        Command::Fpr { config, seeds, out } => {
            let config = load(&config, registry)?;
            if seeds == 0 {
                return Err(ConfigError::InvalidSweep("--seeds must be positive".into()).into());
            }
            let seeds: Vec<u64> = (0..seeds).collect();
            let report = fpr_experiment(registry, &config.policies, &seeds, &config.env)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Serialize(e.to_string()))? + "\n";
            write_output(&out, "fpr.json", &json)?;
            let path = write_output(&out, "fpr.csv", &to_csv(&report.rows)?)?;
            summary("fpr", report.rows.len(), seeds.len(), start, &path);
        }
        Command::RegimeMap { mut config, n_min, delta, out } => {
            if config.config == "default" {
                config.config = "attrition".into();
            }
            let config = load(&config, registry)?;
            let n_min = n_min.unwrap_or_else(|| DEFAULT_N_MIN_GRID.to_vec());
            let delta = delta.unwrap_or_else(|| DEFAULT_DELTA_GRID.to_vec());
            let cells = regime_map(registry, &n_min, &delta, &config.env, &config.seeds)?;
            let path = write_output(&out, "regime.csv", &to_csv(&cells)?)?;
            summary("regime-map", cells.len(), config.seeds.len(), start, &path);
        }
        Command::Sensitivity { config, policy, grid, out } => {
            let config = load(&config, registry)?;
            let grid = grid.unwrap_or_else(|| match policy.as_str() {
                "min_sample_floor" => (1..=10).map(|i| f64::from(i) * 100.0).collect(),
                _ => (1..=12).map(|i| f64::from(i) * 0.01).collect(),
            });
            let points = sensitivity_curves(registry, &PolicySpec::new(&policy), &grid, &config.env, &config.seeds)?;
            let path = write_output(&out, "curves.csv", &to_csv(&points)?)?;
            summary("sensitivity", points.len(), config.seeds.len(), start, &path);
        }
        Command::Oracle { p, n_min, n_max, epsilon, z, k, alpha, horizon } => {
            if !(0.0..=1.0).contains(&p) || n_min == 0 || n_min > n_max || k == 0 || k > horizon {
                return Err(ConfigError::InvalidEnv(
                    "need p in [0,1], 1 <= n_min <= n_max, 1 <= k <= horizon".into(),
                )
                .into());
            }
            let regime = cover_regime(p, n_min, n_max, epsilon, z);
            println!("cover regime: ({:.3}, {:.3}]", regime.lower, regime.upper);
            println!("bonferroni z (K={k}, alpha={alpha}): {:.4}", bonferroni_z(k, alpha).unwrap_or(f64::NAN));
            println!(
                "expected first audited round (T={horizon}, K={k}): {:.4}",
                expected_min_audited_round(horizon, k).unwrap_or(f64::NAN)
            );
            println!("FWER bound 1-(1-alpha)^K: {:.4}", fwer_bound(alpha, k));
            println!("oracle: 0 cells x 0 seeds in {:.2?}", start.elapsed());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
