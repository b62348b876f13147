use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeField;
use crate::diagnostics::field::{velocity_field_rz, HarmonicSelector};
use crate::diagnostics::tables::{amplitude_table, frequency_table, harmonic_columns, standing_wave_pairs};
use crate::diagnostics::{classify_resonances, dominant_wavenumber, svg, EnergySpectrum};
use crate::error::{Error, Result};
use crate::evolve::{add_perturbation, run, SimConfig, TimeSeries};
use crate::interaction::tensor::DEFAULT_TENSOR_BUDGET_BYTES;
use crate::interaction::{InteractionTensor, NonlinearTerm, PseudoSpectral};
use crate::kslab::{ks_run, timestep_sensitivity, SensitivityReport};
use crate::linstab::{EigenBasis, LinearProblem, NeutralBand};

use super::config::{RhsPath, ScenarioConfig};

pub const CACHE_ENV: &str = "NLWAVES_CACHE";
pub const DEFAULT_CACHE_DIR: &str = ".nlwaves-cache";

/// `--cache` flag, else `$NLWAVES_CACHE`, else `.nlwaves-cache`.
pub fn resolve_cache_dir(flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    match std::env::var_os(CACHE_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_CACHE_DIR),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::Config(format!("output directory {} not writable: {e}", out.display())))
}

fn write_manifest(cfg: &ScenarioConfig, out: &Path) -> Result<()> {
    fs::write(out.join("manifest.json"), cfg.to_json() + "\n")?;
    Ok(())
}

pub fn load_basis(cfg: &ScenarioConfig, cache: Option<&Path>) -> Result<(LinearProblem, Arc<EigenBasis>)> {
    let problem = LinearProblem::new(cfg.h, cfg.re, cfg.n_r)?;
    let kgrid = cfg.sim_config().kgrid()?;
    let basis = EigenBasis::load_or_build(&problem, kgrid, cfg.modes, cache)?;
    Ok((problem, Arc::new(basis)))
}

pub fn make_rhs(cfg: &ScenarioConfig, basis: &Arc<EigenBasis>) -> Result<Box<dyn NonlinearTerm>> {
    Ok(match cfg.rhs {
        RhsPath::PseudoSpectral => Box::new(PseudoSpectral::with_padding(Arc::clone(basis), cfg.padding)?),
        RhsPath::Direct => Box::new(InteractionTensor::build(Arc::clone(basis), DEFAULT_TENSOR_BUDGET_BYTES)?),
    })
}

/// A finished (or failed) scenario integration.
pub struct Simulation {
    pub config: ScenarioConfig,
    pub problem: LinearProblem,
    pub basis: Arc<EigenBasis>,
    pub series: TimeSeries,
    /// Start of the last integration phase (after any perturbation).
    pub phase_start: f64,
    pub equilibrium_at: Option<f64>,
    pub failure: Option<Error>,
}

impl Simulation {
    pub fn final_state(&self) -> &AmplitudeField {
        self.series.last()
    }

    pub fn final_energy(&self) -> &EnergySpectrum {
        self.series.last_energy()
    }
}

fn seeded(cfg: &ScenarioConfig, sim: &SimConfig) -> Result<AmplitudeField> {
    let mut state = AmplitudeField::zeros(sim.kgrid()?, sim.modes);
    for s in &cfg.seeds {
        state = add_perturbation(state, s.0, s.1, s.2)?;
    }
    Ok(state)
}

/// Runs the scenario, building or loading the basis.
pub fn simulate(cfg: &ScenarioConfig, cache: Option<&Path>) -> Result<Simulation> {
    let (problem, basis) = load_basis(cfg, cache)?;
    simulate_with(cfg, problem, basis)
}

/// Runs the scenario on an existing basis: seeds, optional perturbation at
/// `perturb_at`, then on to `t_end`.
pub fn simulate_with(cfg: &ScenarioConfig, problem: LinearProblem, basis: Arc<EigenBasis>) -> Result<Simulation> {
    cfg.validate()?;
    let sim = cfg.sim_config();
    let initial = seeded(cfg, &sim)?;
    let (first_end, rest) = match cfg.perturb_at {
        Some(tp) => (tp, Some(cfg.t_end - tp)),
        None => (cfg.t_end, None),
    };
    let first = run(
        &SimConfig {
            t_end: first_end,
            ..sim.clone()
        },
        initial,
        make_rhs(cfg, &basis)?,
        &problem.profile,
    )?;
    let mut series = first.series;
    let mut result = Simulation {
        config: cfg.clone(),
        problem,
        basis,
        series: TimeSeries {
            config: sim.clone(),
            snapshots: Vec::new(),
            energies: Vec::new(),
        },
        phase_start: 0.0,
        equilibrium_at: first.equilibrium_at,
        failure: first.failure,
    };
    if let (Some(duration), None) = (rest, &result.failure) {
        let mut state = series.last().clone();
        for p in &cfg.perturbations {
            state = add_perturbation(state, p.0, p.1, p.2)?;
        }
        result.phase_start = state.t;
        let second = run(
            &SimConfig {
                t_end: duration,
                ..sim.clone()
            },
            state,
            make_rhs(cfg, &result.basis)?,
            &result.problem.profile,
        )?;
        series.extend(second.series);
        result.equilibrium_at = second.equilibrium_at;
        result.failure = second.failure;
    }
    series.config = sim;
    result.series = series;
    Ok(result)
}

/// Window for phase frequencies: the last `frequency_window` time units, not
/// reaching back before equilibrium or the final phase.
pub fn frequency_window(cfg: &ScenarioConfig, series: &TimeSeries, equilibrium_at: Option<f64>, phase_start: f64) -> (f64, f64) {
    let t1 = series.last().t;
    let floor = equilibrium_at.unwrap_or(phase_start).max(phase_start);
    ((t1 - cfg.frequency_window).max(floor), t1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FinalState {
    equilibrium_at: Option<f64>,
    state: AmplitudeField,
}

/// Summary of `cmd_run`.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub equilibrium_at: Option<f64>,
    pub dominant: Option<f64>,
    pub dt_halving_change: Option<f64>,
    pub summary: String,
}

fn energy_csv(series: &TimeSeries, out: &Path) -> Result<()> {
    let mut w = create(out, "energy.csv")?;
    writeln!(w, "t,k,E")?;
    for e in &series.energies {
        for (k, v) in e.k.iter().zip(&e.e) {
            writeln!(w, "{:e},{},{:e}", e.t, k, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the amplitude and frequency tables, standing-wave pairs and resonances; returns
/// summary lines.
pub fn write_tables(
    cfg: &ScenarioConfig,
    series: &TimeSeries,
    equilibrium_at: Option<f64>,
    phase_start: f64,
    out: &Path,
) -> Result<String> {
    let mut summary = String::new();
    let last = series.last();
    let dom = series
        .energies
        .last()
        .and_then(|e| e.dominant())
        .unwrap_or(0.0);
    let ks = harmonic_columns(cfg.k_max, dom);
    let amps = amplitude_table(last, &ks)?;
    amps.write_csv(create(out, "amplitude_table.csv")?)?;
    let window = frequency_window(cfg, series, equilibrium_at, phase_start);
    summary.push_str(&format!("frequency_window: {} {}\n", window.0, window.1));
    if window.1 - window.0 < crate::diagnostics::tables::MIN_FREQUENCY_WINDOW {
        summary.push_str("frequency_window_note: shorter than two periods of the slowest expected pair frequency\n");
    }
    if series.window(window.0, window.1).len() >= 2 {
        let freqs = frequency_table(series, &ks, window)?;
        freqs.write_csv(create(out, "frequency_table.csv")?)?;
        let pairs = standing_wave_pairs(&amps, &freqs, cfg.pair_tol);
        let mut w = create(out, "pairs.csv")?;
        writeln!(w, "k,m_a,m_b,amplitude,frequency")?;
        for p in &pairs {
            writeln!(w, "{},{},{},{:e},{:e}", p.k, p.m_a, p.m_b, p.amplitude, p.frequency)?;
        }
        w.flush()?;
        summary.push_str(&format!("standing_wave_pairs: {}\n", pairs.len()));
        let res = classify_resonances(series, window, cfg.resonance_tol)?;
        fs::write(out.join("resonances.txt"), res.to_text())?;
        summary.push_str(&format!("resonances: {}\n", res.entries.len()));
    } else {
        summary.push_str("frequency_table: skipped (fewer than two snapshots in window)\n");
    }
    Ok(summary)
}

/// Integrates the scenario and writes every run artifact to `out`.
pub fn cmd_run(cfg: &ScenarioConfig, out: &Path, cache: Option<&Path>) -> Result<RunReport> {
    prepare_out(out)?;
    write_manifest(cfg, out)?;
    let sim = simulate(cfg, cache)?;
    let series = &sim.series;
    series.write_csv(create(out, "amplitudes.csv")?)?;
    energy_csv(series, out)?;
    let dom = sim.final_energy().dominant();
    let plot_ks: Vec<f64> = match dom {
        Some(d) => harmonic_columns(cfg.k_max, d).into_iter().take(5).collect(),
        None => vec![0.0],
    };
    let mut extra: Vec<f64> = cfg.seeds.iter().chain(&cfg.perturbations).map(|s| s.0).collect();
    extra.retain(|k| !plot_ks.iter().any(|p| (p - k).abs() < 1e-9));
    let all_ks: Vec<f64> = plot_ks.iter().chain(&extra).copied().collect();
    fs::write(out.join("energy.svg"), svg::energy_history(&series.energies, &all_ks))?;
    serde_json::to_writer(
        create(out, "final_state.json")?,
        &FinalState {
            equilibrium_at: sim.equilibrium_at,
            state: series.last().clone(),
        },
    )?;
    let mut summary = String::new();
    summary.push_str(&format!("scenario: {}\n", serde_json::to_value(cfg.scenario)?.as_str().unwrap_or("?")));
    summary.push_str(&format!("t_final: {}\n", series.last().t));
    summary.push_str(&format!(
        "equilibrium_at: {}\n",
        sim.equilibrium_at.map_or("none".into(), |t| t.to_string())
    ));
    summary.push_str(&format!("dominant_k: {}\n", dom.map_or("none".into(), |k| k.to_string())));
    for &k in &all_ks {
        if let Some(e) = sim.final_energy().at(k) {
            summary.push_str(&format!("E({k}): {e:e}\n"));
        }
    }
    summary.push_str(&write_tables(cfg, series, sim.equilibrium_at, sim.phase_start, out)?);
    let mut dt_change = None;
    if cfg.publishable && sim.failure.is_none() {
        let half = ScenarioConfig {
            dt: cfg.dt / 2.0,
            ..cfg.clone()
        };
        let fine = simulate_with(&half, sim.problem.clone(), Arc::clone(&sim.basis))?;
        let a = sim.final_energy();
        let b = fine.final_energy();
        let scale = a.e.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let change = a
            .e
            .iter()
            .zip(&b.e)
            .filter(|(x, _)| x.abs() > 1e-12 * scale)
            .map(|(x, y)| (x - y).abs() / x.abs())
            .fold(0.0, f64::max);
        summary.push_str(&format!("dt_halving_max_relative_change: {change:e}\n"));
        dt_change = Some(change);
    }
    if let Some(e) = &sim.failure {
        summary.push_str(&format!("failure: {e}\n"));
    }
    fs::write(out.join("summary.txt"), &summary)?;
    if let Some(e) = sim.failure {
        return Err(e);
    }
    Ok(RunReport {
        equilibrium_at: sim.equilibrium_at,
        dominant: dom,
        dt_halving_change: dt_change,
        summary,
    })
}

/// Recomputes the tables from the amplitude history of a previous `run`.
pub fn cmd_tables(cfg: &ScenarioConfig, out: &Path, cache: Option<&Path>) -> Result<String> {
    let path = out.join("amplitudes.csv");
    let file = File::open(&path).map_err(|e| {
        Error::Config(format!("{} not readable ({e}); run `nlwaves run` with this --out first", path.display()))
    })?;
    let mut series = TimeSeries::read_csv(BufReader::new(file))?;
    let (problem, basis) = load_basis(cfg, cache)?;
    series.compute_energies(&basis, &problem.profile);
    let fin: Option<FinalState> = File::open(out.join("final_state.json"))
        .ok()
        .and_then(|f| serde_json::from_reader(BufReader::new(f)).ok());
    let summary = write_tables(cfg, &series, fin.and_then(|f| f.equilibrium_at), cfg.perturb_at.unwrap_or(0.0), out)?;
    Ok(summary)
}

/// Meridional velocity panels from the equilibrium stored by `run`.
pub fn cmd_field(cfg: &ScenarioConfig, out: &Path, cache: Option<&Path>) -> Result<String> {
    let path = out.join("final_state.json");
    let file = File::open(&path).map_err(|_| {
        Error::Config(format!(
            "no equilibrium snapshot at {}; run `nlwaves run` with this --out first",
            path.display()
        ))
    })?;
    let fin: FinalState = serde_json::from_reader(BufReader::new(file))?;
    if fin.equilibrium_at.is_none() {
        return Err(Error::Diagnostic(
            "the stored run did not reach an equilibrium; increase t_end and rerun".into(),
        ));
    }
    let (_, basis) = load_basis(cfg, cache)?;
    fin.state.check_shape(&basis.kgrid, basis.mode_count())?;
    let mut summary = String::new();
    let mut fields = Vec::new();
    for sel in [HarmonicSelector::Total, HarmonicSelector::Fundamental, HarmonicSelector::SecondHarmonic] {
        let f = velocity_field_rz(&fin.state, &basis, sel, cfg.field_points, cfg.field_points)?;
        f.write_csv(create(out, &format!("field_{}.csv", sel.label()))?)?;
        summary.push_str(&format!(
            "{}: max_outflow={:e} max_inflow={:e}\n",
            sel.label(),
            f.max_outflow(),
            f.max_inflow()
        ));
        fields.push(f);
    }
    let refs: Vec<_> = fields.iter().collect();
    fs::write(out.join("field.svg"), svg::quiver_panels(&refs))?;
    if let Some(k) = dominant_wavenumber(&fin.state, &basis) {
        summary.push_str(&format!("dominant_k: {k}\n"));
    }
    fs::write(out.join("field_summary.txt"), &summary)?;
    Ok(summary)
}

/// Neutral band and `sigma(k)` samples.
pub fn cmd_linstab(cfg: &ScenarioConfig, out: &Path) -> Result<(NeutralBand, String)> {
    prepare_out(out)?;
    write_manifest(cfg, out)?;
    let problem = LinearProblem::new(cfg.h, cfg.re, cfg.n_r)?;
    let mut w = create(out, "growth_rates.csv")?;
    writeln!(w, "k,growth_rate,frequency")?;
    for i in 0..cfg.k_samples {
        let k = cfg.k_lo + (cfg.k_hi - cfg.k_lo) * i as f64 / (cfg.k_samples - 1) as f64;
        let s = problem.leading_exponent(k)?;
        writeln!(w, "{k:e},{:e},{:e}", s.re, -s.im)?;
    }
    w.flush()?;
    let band = problem.neutral_band((cfg.k_lo, cfg.k_hi), cfg.k_samples.min(64), 1e-6)?;
    let text = match band.band {
        Some((lo, hi)) => format!("unstable band: {lo:.6} < k < {hi:.6}\n"),
        None => "no unstable band\n".to_string(),
    };
    fs::write(out.join("band.txt"), &text)?;
    Ok((band, text))
}

/// Time-step sensitivity of the KS testbed.
pub fn cmd_ks(cfg: &ScenarioConfig, out: &Path) -> Result<SensitivityReport> {
    prepare_out(out)?;
    write_manifest(cfg, out)?;
    let base = cfg.ks_config();
    let report = timestep_sensitivity(&base, &cfg.ks_init(), &cfg.ks_dts, cfg.ks_threshold)?;
    fs::write(out.join("ks_report.txt"), report.to_text())?;
    report.write_csv(create(out, "ks_report.csv")?)?;
    let traj = ks_run(&base, &cfg.ks_init())?;
    traj.write_csv(create(out, "ks_trajectory.csv")?)?;
    Ok(report)
}
