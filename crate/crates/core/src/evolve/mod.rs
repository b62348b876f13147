//! Time integration of the truncated amplitude equations
//! `dA_m/dt = -i omega_m A_m + N_m(A)`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeField;
use crate::diagnostics::energy::EnergySpectrum;
use crate::error::{Error, Result};
use crate::interaction::NonlinearTerm;
use crate::linstab::basis::KGrid;
use crate::linstab::{EigenBasis, C64};
use crate::meanflow::CouetteProfile;

mod stepper;

pub use stepper::Stepper;

/// Amplitude above which a run is declared blown up.
pub const BLOWUP_AMPLITUDE: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Integrating factor for the linear part, classical RK4 for the rest.
    IfRk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dk: f64,
    pub k_max: f64,
    pub modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub integrator: Integrator,
    /// Relative change of every `E(k)` per unit time below which the state
    /// counts as an equilibrium.
    pub equilibrium_tol: f64,
    /// Stop as soon as an equilibrium is detected.
    pub stop_at_equilibrium: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dk: 0.25,
            k_max: 12.0,
            modes: 20,
            dt: 1e-3,
            t_end: 40.0,
            snapshot_every: 0.1,
            integrator: Integrator::IfRk4,
            equilibrium_tol: 1e-8,
            stop_at_equilibrium: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<KGrid> {
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || !(self.snapshot_every > 0.0) {
            return Err(Error::Config(format!(
                "need dt > 0, t_end >= 0, snapshot_every > 0 (dt={}, t_end={}, snapshot_every={})",
                self.dt, self.t_end, self.snapshot_every
            )));
        }
        KGrid::new(self.dk, self.k_max)
    }

    pub fn kgrid(&self) -> Result<KGrid> {
        self.validate()
    }

    /// Steps between snapshots.
    pub fn snapshot_stride(&self) -> usize {
        ((self.snapshot_every / self.dt).round() as usize).max(1)
    }

    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

fn on_grid(kgrid: &KGrid, k0: f64, m: usize, modes: usize) -> Result<i64> {
    let n = kgrid
        .index_of(k0)
        .ok_or_else(|| Error::Config(format!("seed wavenumber {k0} is not on the grid (dk={})", kgrid.dk)))?;
    if m == 0 || m > modes {
        return Err(Error::Config(format!("seed mode {m} outside 1..={modes}")));
    }
    Ok(n)
}

/// Single mode with amplitude measure `amp = dk |A_m(k0)|`, real and positive
/// at `+k0`, plus its conjugate partner.
pub fn init_single_mode(config: &SimConfig, k0: f64, m: usize, amp: f64) -> Result<AmplitudeField> {
    let kgrid = config.validate()?;
    let field = AmplitudeField::zeros(kgrid, config.modes);
    add_perturbation(field, k0, m, amp)
}

/// Adds `amp / dk` to `A_m(k0)` (and the conjugate at `-k0`).
pub fn add_perturbation(mut state: AmplitudeField, k0: f64, m: usize, amp: f64) -> Result<AmplitudeField> {
    if !(amp >= 0.0) || !amp.is_finite() {
        return Err(Error::Config(format!("perturbation amplitude must be finite and >= 0, got {amp}")));
    }
    let n = on_grid(&state.kgrid, k0, m, state.modes)?;
    let value = state.get(n, m) + C64::new(amp / state.kgrid.dk, 0.0);
    state.set_pair(n, m, value);
    Ok(state)
}

/// Snapshot history of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeSeries {
    pub config: SimConfig,
    pub snapshots: Vec<AmplitudeField>,
    pub energies: Vec<EnergySpectrum>,
}

impl TimeSeries {
    pub fn last(&self) -> &AmplitudeField {
        self.snapshots.last().expect("time series always holds the initial state")
    }

    pub fn last_energy(&self) -> &EnergySpectrum {
        self.energies.last().expect("time series always holds the initial state")
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Snapshots with `t` in `[t0, t1]`.
    pub fn window(&self, t0: f64, t1: f64) -> Vec<&AmplitudeField> {
        self.snapshots.iter().filter(|s| s.t >= t0 - 1e-12 && s.t <= t1 + 1e-12).collect()
    }

    /// Rows `t,k,m,re,im` for `k >= 0` (negative k follow by conjugation).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# config: {}", serde_json::to_string(&self.config)?)?;
        writeln!(w, "# amplitudes at -k are conjugates of those at +k")?;
        writeln!(w, "t,k,m,re,im")?;
        for s in &self.snapshots {
            for n in 0..=s.kgrid.half as i64 {
                let k = s.kgrid.k_of(n);
                for m in 1..=s.modes {
                    let a = s.get(n, m);
                    writeln!(w, "{:e},{},{},{:e},{:e}", s.t, k, m, a.re, a.im)?;
                }
            }
        }
        Ok(())
    }
}

impl TimeSeries {
    /// Reads the output of [`TimeSeries::write_csv`].
    pub fn read_csv<R: std::io::BufRead>(reader: R) -> Result<Self> {
        let mut config: Option<SimConfig> = None;
        let mut snapshots: Vec<AmplitudeField> = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some(rest) = line.strip_prefix("# config: ") {
                config = Some(serde_json::from_str(rest)?);
                continue;
            }
            if line.starts_with('#') || line.starts_with("t,") || line.trim().is_empty() {
                continue;
            }
            let cfg = config
                .as_ref()
                .ok_or_else(|| Error::Config("amplitude CSV lacks its config header".into()))?;
            let bad = || Error::Config(format!("malformed amplitude row at line {}", lineno + 1));
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad());
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
            let (t, k, m) = (num(f[0])?, num(f[1])?, f[2].trim().parse::<usize>().map_err(|_| bad())?);
            let a = C64::new(num(f[3])?, num(f[4])?);
            if snapshots.last().is_none_or(|s| s.t != t) {
                let mut s = AmplitudeField::zeros(cfg.kgrid()?, cfg.modes);
                s.t = t;
                snapshots.push(s);
            }
            let s = snapshots.last_mut().expect("pushed above");
            let n = s.kgrid.index_of(k).ok_or_else(bad)?;
            if m == 0 || m > s.modes {
                return Err(bad());
            }
            s.set_pair(n, m, a);
        }
        let config = config.ok_or_else(|| Error::Config("amplitude CSV lacks its config header".into()))?;
        if snapshots.is_empty() {
            return Err(Error::Config("amplitude CSV holds no snapshots".into()));
        }
        Ok(Self {
            config,
            snapshots,
            energies: Vec::new(),
        })
    }

    /// Recomputes the energy history.
    pub fn compute_energies(&mut self, basis: &EigenBasis, profile: &CouetteProfile) {
        self.energies = self
            .snapshots
            .iter()
            .map(|s| EnergySpectrum::compute(s, basis, profile))
            .collect();
    }

    /// Appends `other`; where both hold a snapshot at the same time, the one
    /// from `other` wins.
    pub fn extend(&mut self, other: TimeSeries) {
        if let (Some(a), Some(b)) = (self.snapshots.last(), other.snapshots.first()) {
            if (a.t - b.t).abs() < 1e-12 {
                self.snapshots.pop();
                self.energies.pop();
            }
        }
        self.snapshots.extend(other.snapshots);
        self.energies.extend(other.energies);
    }
}

/// Result of [`run`]: the (possibly partial) series and how it ended.
#[derive(Debug)]
pub struct RunOutcome {
    pub series: TimeSeries,
    /// Time at which the equilibrium test first passed.
    pub equilibrium_at: Option<f64>,
    /// Blow-up diagnostic, if the run failed.
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn reached_equilibrium(&self) -> bool {
        self.equilibrium_at.is_some()
    }
}

/// Largest relative change per unit time of the energies that carry a
/// non-negligible share of the total.
pub fn energy_drift(prev: &EnergySpectrum, cur: &EnergySpectrum) -> f64 {
    let dt = cur.t - prev.t;
    if dt <= 0.0 {
        return f64::INFINITY;
    }
    let scale: f64 = cur.e.iter().map(|e| e.abs()).sum();
    if scale == 0.0 {
        return 0.0;
    }
    cur.e
        .iter()
        .zip(&prev.e)
        .filter(|(e, _)| e.abs() > 1e-12 * scale)
        .map(|(e, p)| (e - p).abs() / (e.abs() * dt))
        .fold(0.0, f64::max)
}

/// Integrates from `initial` to `config.t_end`.
pub fn run(
    config: &SimConfig,
    initial: AmplitudeField,
    rhs: Box<dyn NonlinearTerm>,
    profile: &CouetteProfile,
) -> Result<RunOutcome> {
    let kgrid = config.validate()?;
    let basis: Arc<EigenBasis> = Arc::clone(rhs.basis());
    initial.check_shape(&kgrid, config.modes)?;
    if basis.kgrid != kgrid || basis.mode_count() != config.modes {
        return Err(Error::Config("basis does not match the simulation grid".into()));
    }
    let mut stepper = Stepper::new(rhs, config.dt)?;
    log::info!("integrating {} steps of dt={} from t={}", config.total_steps(), config.dt, initial.t);
    let mut state = initial;
    state.enforce_reality();
    let stride = config.snapshot_stride();
    let total = config.total_steps();
    let t0 = state.t;
    let mut series = TimeSeries {
        config: config.clone(),
        energies: vec![EnergySpectrum::compute(&state, &basis, profile)],
        snapshots: vec![state.clone()],
    };
    let mut equilibrium_at = None;
    let mut failure = None;
    for step in 1..=total {
        if let Err(e) = stepper.step(&mut state) {
            failure = Some(e);
            break;
        }
        state.t = t0 + step as f64 * config.dt;
        if step % stride == 0 || step == total {
            let spec = EnergySpectrum::compute(&state, &basis, profile);
            let drift = energy_drift(series.last_energy(), &spec);
            series.snapshots.push(state.clone());
            series.energies.push(spec);
            if equilibrium_at.is_none() && drift < config.equilibrium_tol {
                equilibrium_at = Some(state.t);
                if config.stop_at_equilibrium {
                    break;
                }
            }
        }
    }
    Ok(RunOutcome {
        series,
        equilibrium_at,
        failure,
    })
}
