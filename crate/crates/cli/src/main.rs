//! `msgate`: command-line runner for gate simulations, error budgets,
//! parameter sweeps, parity scans and readout fits.
//!
//! Exit codes: 0 success, 1 other failure, 2 invalid configuration or
//! input file, 3 integration failure, 4 calibration failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use msgate_core::readout::{CalibrationSet, HistogramSet};
use msgate_core::runner::{self, CommandOutput, ScenarioConfig};
use msgate_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "msgate", version, about = "Mølmer–Sørensen gate simulator and readout analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one scenario and report the final Bell-state fidelity.
    Simulate(Common),
    /// Run every error-budget row against otherwise ideal dynamics.
    Budget(Common),
    /// Infidelity over the mode-jitter × chirp-duration grid.
    Sweep(Common),
    /// Scan the analysis phase and fit the parity fringe.
    Parity {
        #[command(flatten)]
        common: Common,
        /// Also synthesize photon-count histograms and refit through readout.
        #[arg(long)]
        with_readout: bool,
    },
    /// Fit histogram and calibration CSV files.
    FitHistograms {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "CSV")]
        histograms: PathBuf,
        #[arg(long, value_name = "CSV")]
        calibration: PathBuf,
    },
    /// Print the default configuration with the source of every value.
    PrintDefaults {
        /// Also write defaults.json and provenance.csv here.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario configuration file (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "paper_defaults")]
    config: Option<PathBuf>,
    /// Use the built-in defaults instead of a configuration file.
    #[arg(long)]
    paper_defaults: bool,
    /// Output directory; overrides the configured one.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Monte-Carlo shots for stochastic scenarios.
    #[arg(long, value_name = "N")]
    shots: Option<usize>,
    /// Fock-space cutoff per motional mode.
    #[arg(long, value_name = "N")]
    fock: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match (&self.config, self.paper_defaults) {
            (Some(p), _) => ScenarioConfig::load(p)?,
            (None, true) => ScenarioConfig::paper_defaults(),
            (None, false) => return Err(Error::Config("either --config PATH or --paper-defaults is required".into())),
        };
        if let Some(s) = self.seed {
            cfg.numerics.seed = s;
        }
        if let Some(n) = self.shots {
            cfg.numerics.n_shots = n;
        }
        if let Some(n) = self.fock {
            cfg.numerics.fock_cutoff = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.outputs.directory))
    }
}

fn emit(out: CommandOutput, dir: &Path) -> Result<()> {
    println!("{}", out.summary.trim_end());
    for p in runner::write_outputs(dir, &out.files)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn read_file<T>(path: &Path, parse: impl FnOnce(std::io::BufReader<std::fs::File>) -> Result<T>) -> Result<T> {
    let f = std::fs::File::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    parse(std::io::BufReader::new(f)).map_err(|e| match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            emit(runner::cmd_simulate(&cfg)?, &c.out_dir(&cfg))
        }
        Command::Budget(c) => {
            let cfg = c.load()?;
            emit(runner::cmd_budget(&cfg)?, &c.out_dir(&cfg))
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            emit(runner::cmd_sweep(&cfg)?, &c.out_dir(&cfg))
        }
        Command::Parity { common, with_readout } => {
            let cfg = common.load()?;
            emit(runner::cmd_parity(&cfg, with_readout)?, &common.out_dir(&cfg))
        }
        Command::FitHistograms { common, histograms, calibration } => {
            let cfg = common.load()?;
            let hists = read_file(&histograms, HistogramSet::read_csv)?;
            let refs = read_file(&calibration, CalibrationSet::read_csv)?;
            emit(runner::cmd_fit_histograms(&cfg, &hists, &refs)?, &common.out_dir(&cfg))
        }
        Command::PrintDefaults { out } => {
            let o = runner::cmd_print_defaults();
            println!("{}", o.summary);
            for (k, v, s) in runner::default_provenance() {
                eprintln!("{k:<36} {v:<24} {s}");
            }
            if let Some(dir) = out {
                runner::write_outputs(&dir, &o.files)?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runner::exit_code(&e) as u8)
        }
    }
}
