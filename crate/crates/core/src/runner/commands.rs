use std::fmt::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::report::{csv_text, report_json, sci, Metadata, OutputFile};
use crate::analysis::{
    assemble_fidelity, fidelity, fit_fringe, parity_scan, phase_grid, populations, FidelityReport, FringeFit, ParityScan,
    SpinPopulations,
};
use crate::error::{Error, Result};
use crate::lindblad::{evolve, run_shots, GateModel, ShotsResult};
use crate::noise::{table1_scenarios, NoiseScenario};
use crate::quantum::{DensityMatrix, HilbertLayout, C64};
use crate::readout::{
    calibrate_reference, fit_populations_with, synthesize_histograms, synthesize_references, synthesize_unpulsed,
    Calibration, CalibrationSet, FitOptions, HistogramSet, PopulationFit,
};

/// Exit status for an error: 2 for configuration and input-format problems,
/// 3 for integration failures, 4 for calibration failures, 1 otherwise
/// (including failures to write outputs).
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Format(_) | Error::InvalidParameter(_) => 2,
        Error::Integration { .. } => 3,
        Error::Calibration(_) => 4,
        _ => 1,
    }
}

/// Files and a human-readable summary produced by one command.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub summary: String,
    pub files: Vec<OutputFile>,
}

/// Shot-averaged populations and fidelity at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimePoint {
    pub t: f64,
    pub populations: SpinPopulations,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateResults {
    pub n_shots: usize,
    pub fidelity: FidelityReport,
    pub infidelity: f64,
    pub std_error: f64,
    pub populations: SpinPopulations,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
    pub min_eigenvalue: Option<f64>,
    pub total_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_series: Option<Vec<TimePoint>>,
}

fn shots_summary(res: &ShotsResult) -> Result<(FidelityReport, SpinPopulations)> {
    let rho = res.mean_density_matrix();
    Ok((res.fidelity, populations(&rho)?))
}

/// Averages the spin state over shots on a uniform time grid.
fn time_series(cfg: &ScenarioConfig, model: &GateModel) -> Result<Vec<TimePoint>> {
    let n_t = cfg.outputs.time_points;
    let tau = model.params.gate_time;
    let grid: Vec<f64> = (0..n_t).map(|k| tau * k as f64 / (n_t - 1) as f64).collect();
    let shots = if model.scenario.is_stochastic() { cfg.numerics.n_shots } else { 1 };
    let per_shot: Vec<Vec<DensityMatrix>> = (0..shots as u64)
        .into_par_iter()
        .map(|i| {
            let mut p = model.problem(&model.sample(cfg.numerics.seed, i), None)?;
            p.output_grid = grid.clone();
            Ok(evolve(&p)?.states)
        })
        .collect::<Result<_>>()?;
    let layout = HilbertLayout::qubits(2)?;
    grid.iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut m = DMatrix::<C64>::zeros(4, 4);
            for s in &per_shot {
                m += s[k].matrix();
            }
            let rho = DensityMatrix::from_matrix_unchecked(layout.clone(), m / C64::new(shots as f64, 0.0));
            Ok(TimePoint { t, populations: populations(&rho)?, fidelity: crate::analysis::fidelity_unchecked(&rho).phase_insensitive })
        })
        .collect()
}

/// Runs the configured scenario and reports the final Bell-state fidelity.
pub fn cmd_simulate(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let (mut meta, clock) = Metadata::start();
    let params = cfg.params()?;
    let scenario = cfg.scenario();
    let settings = cfg.settings();
    let res = run_shots(&scenario, &params, cfg.numerics.n_shots, cfg.numerics.seed, &settings)?;
    let (fid, pops) = shots_summary(&res)?;
    let series = if cfg.outputs.time_series {
        Some(time_series(cfg, &GateModel::new(&params, &scenario, &settings)?)?)
    } else {
        None
    };
    let results = SimulateResults {
        n_shots: res.n_shots,
        fidelity: fid,
        infidelity: res.infidelity,
        std_error: res.std_error,
        populations: pops,
        max_trace_deviation: res.max_trace_deviation,
        max_hermiticity_deviation: res.max_hermiticity_deviation,
        min_eigenvalue: res.min_eigenvalue,
        total_steps: res.total_steps,
        time_series: series,
    };
    meta.wall_time_s = clock.elapsed().as_secs_f64();
    let mut files = vec![OutputFile::new("simulate.json", report_json("simulate", Some(cfg), &results, &meta))];
    if let Some(ts) = &results.time_series {
        let mut csv = String::from("t_s,p_uu,p_mixed,p_dd,fidelity\n");
        for p in ts {
            let q = &p.populations;
            writeln!(csv, "{},{},{},{},{}", sci(p.t), sci(q.p_uu), sci(q.p_mixed), sci(q.p_dd), sci(p.fidelity)).unwrap();
        }
        files.push(OutputFile::new("time_series.csv", csv));
    }
    let summary = format!(
        "fidelity {:.6} (infidelity {:.4e} +/- {:.2e}, {} shots)\npopulations uu {:.6} mixed {:.6} dd {:.6}",
        fid.phase_insensitive, res.infidelity, res.std_error, res.n_shots, pops.p_uu, pops.p_mixed, pops.p_dd
    );
    Ok(CommandOutput { summary, files })
}

/// One row of the error budget.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetRow {
    pub name: String,
    pub parameter: String,
    pub simulated: bool,
    pub stochastic: bool,
    pub infidelity: Option<f64>,
    pub std_error: Option<f64>,
    pub n_shots: usize,
    pub reference_infidelity: f64,
    pub reference_is_bound: bool,
    pub max_trace_deviation: Option<f64>,
    pub min_eigenvalue: Option<f64>,
}

/// Simulates every budget row as a single effect on top of the ideal gate.
pub fn run_budget(cfg: &ScenarioConfig) -> Result<(Vec<BudgetRow>, Vec<f64>)> {
    let params = cfg.params()?;
    let settings = cfg.settings();
    let mut rows = Vec::new();
    let mut times = Vec::new();
    for row in table1_scenarios() {
        let clock = Instant::now();
        let mut out = BudgetRow {
            name: row.name.clone(),
            parameter: row.parameter.clone(),
            simulated: row.simulate,
            stochastic: row.scenario.is_stochastic(),
            infidelity: None,
            std_error: None,
            n_shots: 0,
            reference_infidelity: row.reference_infidelity,
            reference_is_bound: row.reference_is_bound,
            max_trace_deviation: None,
            min_eigenvalue: None,
        };
        if row.simulate {
            let res = run_shots(&row.scenario, &params, cfg.numerics.n_shots, cfg.numerics.seed, &settings)?;
            out.infidelity = Some(res.infidelity);
            out.std_error = Some(res.std_error);
            out.n_shots = res.n_shots;
            out.max_trace_deviation = Some(res.max_trace_deviation);
            out.min_eigenvalue = res.min_eigenvalue;
        }
        times.push(clock.elapsed().as_secs_f64());
        rows.push(out);
    }
    Ok((rows, times))
}

pub fn budget_csv(rows: &[BudgetRow]) -> String {
    let mut csv = String::from("name,parameter,simulated,infidelity,stderr,n_shots,reference,reference_is_bound\n");
    let opt = |x: Option<f64>| x.map(sci).unwrap_or_default();
    for r in rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            csv_text(&r.name),
            csv_text(&r.parameter),
            r.simulated,
            opt(r.infidelity),
            opt(r.std_error),
            r.n_shots,
            sci(r.reference_infidelity),
            r.reference_is_bound
        )
        .unwrap();
    }
    csv
}

pub fn cmd_budget(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let (mut meta, clock) = Metadata::start();
    let (rows, times) = run_budget(cfg)?;
    meta.wall_time_s = clock.elapsed().as_secs_f64();
    meta.item_wall_times_s = times;
    let mut summary = String::new();
    for r in &rows {
        let sim = match (r.infidelity, r.std_error) {
            (Some(v), Some(se)) if r.stochastic => format!("{v:.3e} +/- {se:.1e}"),
            (Some(v), _) => format!("{v:.3e}"),
            _ => "not simulated".into(),
        };
        let rel = if r.reference_is_bound { "<" } else { "" };
        writeln!(summary, "{:<30} {:>22}   reference {rel}{:.1e}", r.name, sim, r.reference_infidelity).unwrap();
    }
    Ok(CommandOutput {
        summary,
        files: vec![
            OutputFile::new("budget.csv", budget_csv(&rows)),
            OutputFile::new("budget.json", report_json("budget", Some(cfg), &rows, &meta)),
        ],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub rel_std: f64,
    pub t_chirp_us: f64,
    pub infidelity: f64,
    pub std_error: f64,
    pub n_shots: usize,
}

/// Mode jitter plus a linear chirp of the configured rate lasting
/// `t_chirp_us`, on an otherwise ideal gate.
pub fn sweep_scenario(rel_std: f64, t_chirp_us: f64, chirp_rate_hz_per_us: f64) -> NoiseScenario {
    NoiseScenario {
        mode_jitter_rel_std: rel_std,
        chirp_rate: if t_chirp_us > 0.0 { chirp_rate_hz_per_us } else { 0.0 },
        chirp_duration: t_chirp_us * 1e-6,
        ..NoiseScenario::ideal()
    }
}

/// Every grid point uses the same seed, so neighbouring points share their
/// random draws and differences between them are not masked by sampling
/// noise.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<(Vec<SweepPoint>, Vec<f64>)> {
    let params = cfg.params()?;
    let settings = cfg.settings();
    let mut points = Vec::new();
    let mut times = Vec::new();
    for &t in &cfg.sweep.t_chirp_us {
        for &s in &cfg.sweep.rel_std {
            let clock = Instant::now();
            let sc = sweep_scenario(s, t, cfg.sweep.chirp_rate_hz_per_us);
            let res = run_shots(&sc, &params, cfg.numerics.n_shots, cfg.numerics.seed, &settings)?;
            points.push(SweepPoint { rel_std: s, t_chirp_us: t, infidelity: res.infidelity, std_error: res.std_error, n_shots: res.n_shots });
            times.push(clock.elapsed().as_secs_f64());
        }
    }
    Ok((points, times))
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut csv = String::from("rel_std,t_chirp_us,infidelity,stderr\n");
    for p in points {
        writeln!(csv, "{},{},{},{}", sci(p.rel_std), sci(p.t_chirp_us), sci(p.infidelity), sci(p.std_error)).unwrap();
    }
    csv
}

pub fn cmd_sweep(cfg: &ScenarioConfig) -> Result<CommandOutput> {
    let (mut meta, clock) = Metadata::start();
    let (points, times) = run_sweep(cfg)?;
    meta.wall_time_s = clock.elapsed().as_secs_f64();
    meta.item_wall_times_s = times;
    let mut summary = String::new();
    for p in &points {
        writeln!(summary, "rel_std {:.3e}  t_chirp {:>6.1} us  infidelity {:.4e} +/- {:.1e}", p.rel_std, p.t_chirp_us, p.infidelity, p.std_error).unwrap();
    }
    Ok(CommandOutput {
        summary,
        files: vec![
            OutputFile::new("sweep.csv", sweep_csv(&points)),
            OutputFile::new("sweep.json", report_json("sweep", Some(cfg), &points, &meta)),
        ],
    })
}

/// How fidelity errors are combined in reports.
pub const FIDELITY_ERROR_METHOD: &str =
    "F = (P_uu + P_dd)/2 + |A|/2 with SE_F = sqrt(SE_S^2 + SE_A^2)/2; SE_S and SE_A from the fit covariances, combined in quadrature";

/// Readout-level reconstruction of the fidelity from count histograms.
#[derive(Clone, Debug, Serialize)]
pub struct ReadoutAnalysis {
    pub calibration: Calibration,
    pub unpulsed_fit: PopulationFit,
    pub phase_fits: Vec<PopulationFit>,
    pub scan: ParityScan,
    pub fringe: FringeFit,
    pub even_population: f64,
    pub even_std_error: f64,
    pub fidelity: f64,
    pub fidelity_std_error: f64,
    pub error_method: &'static str,
}

/// Calibrates on the references, fits populations per phase, fits the
/// parity fringe and assembles the fidelity.
pub fn analyze_histograms(hists: &HistogramSet, refs: &CalibrationSet, t_detect: f64, seed: u64) -> Result<ReadoutAnalysis> {
    hists.validate()?;
    let unpulsed = hists
        .unpulsed
        .as_ref()
        .ok_or_else(|| Error::Format("histogram set has no unpulsed ('none') rows".into()))?;
    let calibration = calibrate_reference(refs, t_detect)?;
    let opts = FitOptions { seed, ..Default::default() };
    let unpulsed_fit = fit_populations_with(unpulsed, &calibration.model, &opts)?;
    let phase_fits = hists
        .histograms
        .iter()
        .map(|h| fit_populations_with(h, &calibration.model, &opts))
        .collect::<Result<Vec<_>>>()?;
    let scan = ParityScan::from_populations(hists.phases.clone(), phase_fits.iter().map(|f| f.populations).collect())?;
    let fringe = fit_fringe(&scan, None)?;
    let (even, even_se) = unpulsed_fit.even();
    Ok(ReadoutAnalysis {
        calibration,
        unpulsed_fit,
        phase_fits,
        fidelity: assemble_fidelity(even, fringe.amplitude),
        fidelity_std_error: 0.5 * even_se.hypot(fringe.amplitude_std_error),
        scan,
        fringe,
        even_population: even,
        even_std_error: even_se,
        error_method: FIDELITY_ERROR_METHOD,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ParityResults {
    pub n_shots: usize,
    /// Fidelities of the simulated (shot-averaged) spin state.
    pub density_matrix: FidelityReport,
    pub simulation_std_error: f64,
    pub scan: ParityScan,
    pub fringe: FringeFit,
    pub even_population: f64,
    /// ½(P↑↑ + P↓↓) + |A|/2 from the noiseless scan.
    pub fidelity: f64,
    pub fidelity_std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub readout: Option<ReadoutAnalysis>,
}

fn scan_csv(scan: &ParityScan) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    Ok(buf)
}

/// Synthesized readout data for a spin state: calibration references and
/// per-phase histograms including the unpulsed one.
pub fn synthesize_readout(cfg: &ScenarioConfig, rho: &DensityMatrix, scan: &ParityScan) -> Result<(HistogramSet, CalibrationSet)> {
    let model = cfg.detection_model();
    let seed = cfg.numerics.seed;
    let refs = synthesize_references(&model, cfg.readout.reference_shots, seed)?;
    let mut hists = synthesize_histograms(&model, scan, cfg.readout.shots_per_phase, seed)?;
    hists.unpulsed = Some(synthesize_unpulsed(&model, &clamp_populations(populations(rho)?), cfg.readout.shots_per_phase, seed)?);
    Ok((hists, refs))
}

/// Clips integration round-off so populations form an exact distribution.
fn clamp_populations(p: SpinPopulations) -> SpinPopulations {
    let [a, b, c] = p.as_array().map(|x| x.max(0.0));
    let s = a + b + c;
    SpinPopulations { p_uu: a / s, p_mixed: b / s, p_dd: c / s }
}

/// Simulates the gate, scans the analysis phase and fits the fringe;
/// optionally repeats the analysis on synthesized count histograms.
pub fn run_parity(cfg: &ScenarioConfig, with_readout: bool) -> Result<(ParityResults, Option<(HistogramSet, CalibrationSet)>)> {
    let params = cfg.params()?;
    let res = run_shots(&cfg.scenario(), &params, cfg.numerics.n_shots, cfg.numerics.seed, &cfg.settings())?;
    let rho = res.mean_density_matrix();
    let dm = fidelity(&rho)?;
    let scan = parity_scan(&rho, &phase_grid(cfg.readout.phase_points))?;
    let scan = ParityScan::from_populations(scan.phases, scan.populations.into_iter().map(clamp_populations).collect())?;
    let fringe = fit_fringe(&scan, None)?;
    let even = populations(&rho)?.even();
    let (readout, data) = if with_readout {
        let (hists, refs) = synthesize_readout(cfg, &rho, &scan)?;
        let analysis = analyze_histograms(&hists, &refs, cfg.readout.t_detect_s, cfg.numerics.seed)?;
        (Some(analysis), Some((hists, refs)))
    } else {
        (None, None)
    };
    let results = ParityResults {
        n_shots: res.n_shots,
        density_matrix: dm,
        simulation_std_error: res.std_error,
        fidelity: assemble_fidelity(even, fringe.amplitude),
        fidelity_std_error: 0.5 * fringe.amplitude_std_error,
        scan,
        fringe,
        even_population: even,
        readout,
    };
    Ok((results, data))
}

pub fn cmd_parity(cfg: &ScenarioConfig, with_readout: bool) -> Result<CommandOutput> {
    let (mut meta, clock) = Metadata::start();
    let (results, data) = run_parity(cfg, with_readout)?;
    meta.wall_time_s = clock.elapsed().as_secs_f64();
    let mut files = vec![
        OutputFile::new("parity_scan.csv", scan_csv(&results.scan)?),
        OutputFile::new("parity.json", report_json("parity", Some(cfg), &results, &meta)),
    ];
    let mut summary = format!(
        "density-matrix fidelity {:.6} (phase-sensitive {:.6})\nfringe amplitude {:.6}, P_uu + P_dd {:.6}, fidelity {:.6}",
        results.density_matrix.phase_insensitive,
        results.density_matrix.phase_sensitive,
        results.fringe.amplitude,
        results.even_population,
        results.fidelity
    );
    if let (Some(r), Some((hists, refs))) = (&results.readout, &data) {
        let mut h = Vec::new();
        hists.write_csv(&mut h)?;
        let mut c = Vec::new();
        refs.write_csv(&mut c)?;
        files.push(OutputFile::new("histograms.csv", h));
        files.push(OutputFile::new("calibration.csv", c));
        files.push(OutputFile::new("readout_scan.csv", scan_csv(&r.scan)?));
        write!(
            summary,
            "\nreadout: amplitude {:.4} +/- {:.4}, P_uu + P_dd {:.4} +/- {:.4}, fidelity {:.4} +/- {:.4}",
            r.fringe.amplitude, r.fringe.amplitude_std_error, r.even_population, r.even_std_error, r.fidelity, r.fidelity_std_error
        )
        .unwrap();
    }
    Ok(CommandOutput { summary, files })
}

/// Fits histogram and calibration files written by `cmd_parity`.
pub fn cmd_fit_histograms(cfg: &ScenarioConfig, hists: &HistogramSet, refs: &CalibrationSet) -> Result<CommandOutput> {
    let (mut meta, clock) = Metadata::start();
    let analysis = analyze_histograms(hists, refs, cfg.readout.t_detect_s, cfg.numerics.seed)?;
    meta.wall_time_s = clock.elapsed().as_secs_f64();
    let summary = format!(
        "lambda_b {:.4}, lambda_d {:.4}, r*T {:.4}\namplitude {:.4} +/- {:.4}, P_uu + P_dd {:.4} +/- {:.4}\nfidelity {:.4} +/- {:.4}",
        analysis.calibration.lambda_bright,
        analysis.calibration.lambda_dark,
        analysis.calibration.depump_product,
        analysis.fringe.amplitude,
        analysis.fringe.amplitude_std_error,
        analysis.even_population,
        analysis.even_std_error,
        analysis.fidelity,
        analysis.fidelity_std_error
    );
    Ok(CommandOutput {
        summary,
        files: vec![
            OutputFile::new("fitted_scan.csv", scan_csv(&analysis.scan)?),
            OutputFile::new("fit_histograms.json", report_json("fit-histograms", Some(cfg), &analysis, &meta)),
        ],
    })
}

/// The default configuration and where each value comes from.
pub fn cmd_print_defaults() -> CommandOutput {
    let cfg = ScenarioConfig::paper_defaults();
    let mut prov = String::from("key,value,source\n");
    for (k, v, s) in super::config::default_provenance() {
        writeln!(prov, "{},{},{}", k, csv_text(&v), csv_text(s)).unwrap();
    }
    CommandOutput {
        summary: cfg.to_json(),
        files: vec![OutputFile::new("defaults.json", cfg.to_json() + "\n"), OutputFile::new("provenance.csv", prov)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(noise: NoiseScenario) -> ScenarioConfig {
        let mut c = ScenarioConfig::paper_defaults();
        c.noise = super::super::config::NoiseConfig::from_scenario(&noise);
        c.numerics.fock_cutoff = 10;
        c.numerics.n_shots = 4;
        c
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Format("x".into())), 2);
        assert_eq!(exit_code(&Error::Integration { time: 0.0, reason: "x".into() }), 3);
        assert_eq!(exit_code(&Error::Calibration("x".into())), 4);
        assert_eq!(exit_code(&Error::Fit("x".into())), 1);
    }

    #[test]
    fn simulate_ideal_with_time_series() {
        let mut c = quick(NoiseScenario::ideal());
        c.outputs.time_series = true;
        c.outputs.time_points = 5;
        let out = cmd_simulate(&c).unwrap();
        let json: serde_json::Value = serde_json::from_slice(&out.files[0].contents).unwrap();
        assert!(json["results"]["fidelity"]["phase_insensitive"].as_f64().unwrap() > 0.9999);
        let ts = String::from_utf8(out.files[1].contents.clone()).unwrap();
        assert_eq!(ts.lines().count(), 6);
        assert!(ts.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,1.0000000000000000e0"));
    }

    #[test]
    fn parity_on_ideal_gate() {
        let c = quick(NoiseScenario::ideal());
        let (r, _) = run_parity(&c, false).unwrap();
        assert!((r.fringe.amplitude - 1.0).abs() < 1e-5);
        assert!((r.even_population - 1.0).abs() < 1e-5);
        assert_eq!(r.fidelity, assemble_fidelity(r.even_population, r.fringe.amplitude));
        assert!((r.fidelity - r.density_matrix.phase_insensitive).abs() < 1e-6);
    }

    #[test]
    fn sweep_grid_order_and_zero_corner() {
        let mut c = quick(NoiseScenario::ideal());
        c.sweep.rel_std = vec![0.0, 1.1e-2];
        c.sweep.t_chirp_us = vec![0.0, 600.0];
        let (pts, _) = run_sweep(&c).unwrap();
        assert_eq!(pts.len(), 4);
        assert_eq!((pts[1].rel_std, pts[1].t_chirp_us), (1.1e-2, 0.0));
        assert!(pts[0].infidelity <= 1e-4);
        assert_eq!(pts[0].n_shots, 1);
        let csv = sweep_csv(&pts);
        assert!(csv.starts_with("rel_std,t_chirp_us,infidelity,stderr\n"));
    }

    #[test]
    fn budget_csv_quotes_text() {
        let row = BudgetRow {
            name: "Mode instability".into(),
            parameter: "a, b".into(),
            simulated: false,
            stochastic: false,
            infidelity: None,
            std_error: None,
            n_shots: 0,
            reference_infidelity: 2.3e-3,
            reference_is_bound: true,
            max_trace_deviation: None,
            min_eigenvalue: None,
        };
        let csv = budget_csv(&[row]);
        assert_eq!(csv.lines().nth(1).unwrap(), "Mode instability,\"a, b\",false,,,0,2.3000000000000000e-3,true");
    }
}
