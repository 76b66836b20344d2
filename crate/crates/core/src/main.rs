use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cdc_roadm::commands::{cmd_adddrop, cmd_budget, cmd_plan, cmd_route, cmd_scenario, cmd_sweep, Format, Output};
use cdc_roadm::config::{load_config, RunConfig};
use cdc_roadm::network::scenario::ScenarioId;
use cdc_roadm::Error;

const EXIT_CONFIG: u8 = 3;
const EXIT_SIMULATION: u8 = 4;

#[derive(Parser)]
#[command(name = "roadm", version, about = "C+L band CDC-ROADM planning and test-bed simulator")]
struct Cli {
    /// TOML configuration; the bundled defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write one file per table/stream here instead of printing tables.
    /// Given without a value, the configured output_dir is used.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "")]
    out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Channel counts per band and signal class.
    Plan,
    /// Add/drop ratio grid.
    Adddrop {
        /// MCS client-port counts, e.g. 4,8,16.
        #[arg(long, value_delimiter = ',')]
        clients: Option<Vec<usize>>,
    },
    /// Drop-path power budget of the test signals.
    Budget,
    /// Provision the configured lightpath requests.
    Route,
    /// Q margins and power traces of the test-bed scenarios.
    Scenario {
        /// 1, 2, 3 or all.
        #[arg(default_value = "all")]
        id: String,
    },
    /// Margin vs node input power.
    Sweep {
        #[arg(long, allow_hyphen_values = true)]
        from: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
}

fn sweep_points(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(step > 0.0) || to < from {
        return Err(Error::InvalidArgument(format!("bad sweep {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Output, Error> {
    match &cli.command {
        Command::Plan => cmd_plan(cfg),
        Command::Adddrop { clients } => cmd_adddrop(cfg, clients.as_deref()),
        Command::Budget => cmd_budget(cfg),
        Command::Route => cmd_route(cfg),
        Command::Scenario { id } => {
            let which = match id.as_str() {
                "all" => None,
                other => Some(other.parse::<ScenarioId>()?),
            };
            cmd_scenario(cfg, which)
        }
        Command::Sweep { from, to, step } => match (from, to) {
            (None, None) => cmd_sweep(cfg, None),
            (Some(a), Some(b)) => cmd_sweep(cfg, Some(&sweep_points(*a, *b, *step)?)),
            _ => Err(Error::InvalidArgument("--from and --to go together".into())),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => load_config(p),
        None => RunConfig::paper_defaults(),
    };
    if let (Ok(c), Some(seed)) = (&mut cfg, cli.seed) {
        c.set_seed(seed);
    }
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("roadm: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let format = match cli.format {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    };
    let result = execute(&cli, &cfg).and_then(|out| match &cli.out_dir {
        None => {
            print!("{}", out.render(format)?);
            Ok(())
        }
        Some(dir) => {
            let dir = if dir.as_os_str().is_empty() { &cfg.output_dir } else { dir };
            std::fs::create_dir_all(dir)?;
            for (name, body) in out.files(format)? {
                let path = dir.join(name);
                std::fs::write(&path, body)?;
                println!("{}", path.display());
            }
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("roadm: {e}");
            if e.is_config_error() && !matches!(e, Error::Io(_)) {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::from(EXIT_SIMULATION)
            }
        }
    }
}
