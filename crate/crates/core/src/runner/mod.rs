//! Configuration, batch commands and report writers behind the `msgate`
//! binary. Every command is deterministic given its configuration and
//! seed; wall times and timestamps live only in the report metadata.

mod commands;
mod config;
mod report;

pub use commands::{
    analyze_histograms, budget_csv, cmd_budget, cmd_fit_histograms, cmd_parity, cmd_print_defaults, cmd_simulate,
    cmd_sweep, exit_code, run_budget, run_parity, run_sweep, sweep_csv, sweep_scenario, synthesize_readout, BudgetRow,
    CommandOutput, ParityResults, ReadoutAnalysis, SimulateResults, SweepPoint, TimePoint, FIDELITY_ERROR_METHOD,
};
pub use config::{
    default_provenance, GateConfig, NoiseConfig, NumericsConfig, OutputConfig, ReadoutConfig, ScenarioConfig,
    SweepConfig, SCHEMA_VERSION,
};
pub use report::{csv_text, report_json, sci, write_outputs, Metadata, OutputFile, Report};
