//! Kuramoto-Sivashinsky testbed `u_t + u u_x + u_xx + u_xxxx = 0` on a
//! periodic domain, integrated with fourth-order exponential time differencing.

use std::io::Write;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linstab::C64;

mod sensitivity;

pub use sensitivity::{timestep_sensitivity, PairDivergence, SensitivityReport, Verdict};

pub const DEFAULT_DIVERGENCE_THRESHOLD: f64 = 0.5;
pub const DEFAULT_T_END: f64 = 500.0;
const CONTOUR_POINTS: usize = 32;
const BLOWUP_NORM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsConfig {
    pub n_modes: usize,
    pub l_domain: f64,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: f64,
}

impl KsConfig {
    /// Chaotic window `L = 22`.
    pub fn chaotic() -> Self {
        Self {
            n_modes: 64,
            l_domain: 22.0,
            dt: 0.01,
            t_end: DEFAULT_T_END,
            snapshot_every: 1.0,
        }
    }

    /// `L = 5 < 2 pi`: every Fourier mode is linearly damped.
    pub fn dissipative() -> Self {
        Self {
            l_domain: 5.0,
            ..Self::chaotic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 32 || !self.n_modes.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_modes must be a power of two >= 32, got {}",
                self.n_modes
            )));
        }
        if !(self.l_domain > 0.0) || !(self.dt > 0.0) || !(self.t_end >= 0.0) || !(self.snapshot_every > 0.0) {
            return Err(Error::Config("l_domain, dt and snapshot_every must be positive, t_end >= 0".into()));
        }
        let ratio = self.snapshot_every / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "snapshot_every={} is not a multiple of dt={}",
                self.snapshot_every, self.dt
            )));
        }
        Ok(())
    }

    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n_modes;
        let s = if j < n / 2 {
            j as f64
        } else if j == n / 2 {
            0.0
        } else {
            j as f64 - n as f64
        };
        std::f64::consts::TAU * s / self.l_domain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KsInit {
    /// `amplitude * cos(2 pi mode x / L)`.
    Seed { mode: usize, amplitude: f64 },
    /// `cos(2 pi x / L) (1 + sin(2 pi x / L))`.
    Standard,
    /// `0.1 cos(q x) + 0.05 sin(3 q x) + 0.02 cos(5 q x + 0.3)`, `q = 2 pi / L`.
    Multimode,
    /// Nodal values on the `n_modes` uniform points.
    Values(Vec<f64>),
}

/// Spectral coefficients `u(x) = sum_q uhat_q exp(i q x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsState {
    pub n_modes: usize,
    pub l_domain: f64,
    pub t: f64,
    pub uhat: Vec<C64>,
}

impl KsState {
    pub fn from_values(l_domain: f64, u: &[f64]) -> Result<Self> {
        let n = u.len();
        let fft = FftPlanner::new().plan_fft_forward(n);
        let mut buf: Vec<C64> = u.iter().map(|&x| C64::new(x, 0.0)).collect();
        fft.process(&mut buf);
        buf.iter_mut().for_each(|z| *z /= n as f64);
        let mut s = Self {
            n_modes: n,
            l_domain,
            t: 0.0,
            uhat: buf,
        };
        s.uhat[0] = C64::new(0.0, 0.0);
        s.uhat[n / 2] = C64::new(0.0, 0.0);
        s.symmetrize();
        Ok(s)
    }

    pub fn initial(config: &KsConfig, init: &KsInit) -> Result<Self> {
        config.validate()?;
        let n = config.n_modes;
        let x = |j: usize| config.l_domain * j as f64 / n as f64;
        let th = |j: usize| std::f64::consts::TAU * x(j) / config.l_domain;
        let u: Vec<f64> = match init {
            KsInit::Seed { mode, amplitude } => {
                if *mode == 0 || *mode >= n / 2 {
                    return Err(Error::Config(format!("seed mode {mode} outside 1..{}", n / 2)));
                }
                (0..n).map(|j| amplitude * (*mode as f64 * th(j)).cos()).collect()
            }
            KsInit::Standard => (0..n).map(|j| th(j).cos() * (1.0 + th(j).sin())).collect(),
            KsInit::Multimode => (0..n)
                .map(|j| 0.1 * th(j).cos() + 0.05 * (3.0 * th(j)).sin() + 0.02 * (5.0 * th(j) + 0.3).cos())
                .collect(),
            KsInit::Values(v) => {
                if v.len() != n {
                    return Err(Error::Config(format!("{} initial values for {n} points", v.len())));
                }
                v.clone()
            }
        };
        Self::from_values(config.l_domain, &u)
    }

    fn symmetrize(&mut self) {
        let n = self.n_modes;
        for j in 1..n / 2 {
            let avg = 0.5 * (self.uhat[j] + self.uhat[n - j].conj());
            self.uhat[j] = avg;
            self.uhat[n - j] = avg.conj();
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let fft = FftPlanner::new().plan_fft_inverse(self.n_modes);
        let mut buf = self.uhat.clone();
        fft.process(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// `(1/L int u^2 dx)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        self.uhat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.uhat[0].re
    }

    /// `|uhat_q|^2` summed over `+-q`, index `j = 0..n/2`.
    pub fn spectrum(&self) -> Vec<f64> {
        let n = self.n_modes;
        (0..n / 2)
            .map(|j| {
                if j == 0 {
                    self.uhat[0].norm_sqr()
                } else {
                    self.uhat[j].norm_sqr() + self.uhat[n - j].norm_sqr()
                }
            })
            .collect()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.uhat
            .iter()
            .zip(&other.uhat)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for z in &self.uhat {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
        h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// ETDRK4 integrator with 3/2-rule dealiasing.
pub struct KsSolver {
    config: KsConfig,
    g: Vec<C64>,
    e: Vec<f64>,
    e2: Vec<f64>,
    q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    pad: Vec<C64>,
}

fn contour_mean(z: f64, f: impl Fn(C64) -> C64) -> f64 {
    (0..CONTOUR_POINTS)
        .map(|j| {
            let root = C64::from_polar(1.0, std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64);
            f(C64::new(z, 0.0) + root).re
        })
        .sum::<f64>()
        / CONTOUR_POINTS as f64
}

impl KsSolver {
    pub fn new(config: &KsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n_modes;
        let h = config.dt;
        let mut s = Self {
            config: config.clone(),
            g: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
            e2: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
            fwd: FftPlanner::new().plan_fft_forward(3 * n / 2),
            inv: FftPlanner::new().plan_fft_inverse(3 * n / 2),
            pad: vec![C64::new(0.0, 0.0); 3 * n / 2],
        };
        for j in 0..n {
            let k = config.wavenumber(j);
            let l = k * k - k * k * k * k;
            let z = h * l;
            s.g.push(C64::new(0.0, -0.5 * k));
            s.e.push(z.exp());
            s.e2.push((0.5 * z).exp());
            s.q.push(h * contour_mean(z, |r| ((r * 0.5).exp() - 1.0) / r));
            s.f1.push(h * contour_mean(z, |r| (-4.0 - r + r.exp() * (4.0 - 3.0 * r + r * r)) / (r * r * r)));
            s.f2.push(h * contour_mean(z, |r| (2.0 + r + r.exp() * (r - 2.0)) / (r * r * r)));
            s.f3.push(h * contour_mean(z, |r| (-4.0 - 3.0 * r - r * r + r.exp() * (4.0 - r)) / (r * r * r)));
        }
        Ok(s)
    }

    pub fn config(&self) -> &KsConfig {
        &self.config
    }

    /// `-(1/2) d/dx (u^2)` in spectral space, dealiased.
    fn nonlinear(&mut self, v: &[C64], out: &mut [C64]) {
        let n = self.config.n_modes;
        let p = 3 * n / 2;
        self.pad.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for j in 1..n / 2 {
            self.pad[j] = v[j];
            self.pad[p - j] = v[n - j];
        }
        self.inv.process(&mut self.pad);
        self.pad.iter_mut().for_each(|z| *z = C64::new(z.re * z.re, 0.0));
        self.fwd.process(&mut self.pad);
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for j in 1..n / 2 {
            out[j] = self.g[j] * self.pad[j] / p as f64;
            out[n - j] = self.g[n - j] * self.pad[p - j] / p as f64;
        }
    }

    pub fn step(&mut self, state: &mut KsState) -> Result<()> {
        let n = self.config.n_modes;
        let v = state.uhat.clone();
        let mut nv = vec![C64::new(0.0, 0.0); n];
        let mut na = nv.clone();
        let mut nb = nv.clone();
        let mut nc = nv.clone();
        self.nonlinear(&v, &mut nv);
        let a: Vec<C64> = (0..n).map(|j| v[j] * self.e2[j] + nv[j] * self.q[j]).collect();
        self.nonlinear(&a, &mut na);
        let b: Vec<C64> = (0..n).map(|j| v[j] * self.e2[j] + na[j] * self.q[j]).collect();
        self.nonlinear(&b, &mut nb);
        let c: Vec<C64> = (0..n)
            .map(|j| a[j] * self.e2[j] + (nb[j] * 2.0 - nv[j]) * self.q[j])
            .collect();
        self.nonlinear(&c, &mut nc);
        for j in 0..n {
            state.uhat[j] =
                v[j] * self.e[j] + nv[j] * self.f1[j] + (na[j] + nb[j]) * (2.0 * self.f2[j]) + nc[j] * self.f3[j];
        }
        state.uhat[0] = C64::new(0.0, 0.0);
        state.uhat[n / 2] = C64::new(0.0, 0.0);
        state.symmetrize();
        let norm = state.l2_norm();
        if !norm.is_finite() || norm > BLOWUP_NORM {
            return Err(Error::BlowUp {
                t: state.t + self.config.dt,
                max_abs: norm,
                k: f64::NAN,
                m: 0,
            });
        }
        Ok(())
    }
}

/// Snapshots of one KS run; `failure` is set if the run blew up.
#[derive(Debug, Clone)]
pub struct KsTrajectory {
    pub config: KsConfig,
    pub snapshots: Vec<KsState>,
    pub failure: Option<String>,
}

impl KsTrajectory {
    pub fn last(&self) -> &KsState {
        self.snapshots.last().expect("trajectories hold the initial state")
    }

    /// Rows `t,x,u`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,u")?;
        for s in &self.snapshots {
            let n = s.n_modes;
            for (j, u) in s.values().iter().enumerate() {
                writeln!(w, "{:e},{:e},{:e}", s.t, s.l_domain * j as f64 / n as f64, u)?;
            }
        }
        Ok(())
    }
}

pub fn ks_run(config: &KsConfig, init: &KsInit) -> Result<KsTrajectory> {
    let mut solver = KsSolver::new(config)?;
    let mut state = KsState::initial(config, init)?;
    let stride = (config.snapshot_every / config.dt).round() as usize;
    let total = (config.t_end / config.dt).round() as usize;
    let mut traj = KsTrajectory {
        config: config.clone(),
        snapshots: vec![state.clone()],
        failure: None,
    };
    for step in 1..=total {
        if let Err(e) = solver.step(&mut state) {
            traj.failure = Some(e.to_string());
            break;
        }
        state.t = step as f64 * config.dt;
        if step % stride == 0 {
            traj.snapshots.push(state.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(l: f64, dt: f64, t_end: f64) -> KsConfig {
        KsConfig {
            n_modes: 64,
            l_domain: l,
            dt,
            t_end,
            snapshot_every: t_end.max(dt),
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        for n in [16, 48, 100] {
            let c = KsConfig {
                n_modes: n,
                ..KsConfig::chaotic()
            };
            assert!(c.validate().is_err());
        }
        let c = KsConfig {
            snapshot_every: 0.015,
            ..KsConfig::chaotic()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_stays_zero() {
        let t = ks_run(&short(22.0, 0.01, 5.0), &KsInit::Values(vec![0.0; 64])).unwrap();
        assert_eq!(t.last().l2_norm(), 0.0);
    }

    #[test]
    fn values_round_trip() {
        let c = short(22.0, 0.01, 1.0);
        let s = KsState::initial(&c, &KsInit::Standard).unwrap();
        let v = s.values();
        let x = |j: usize| std::f64::consts::TAU * j as f64 / 64.0;
        for (j, u) in v.iter().enumerate() {
            assert!((u - x(j).cos() * (1.0 + x(j).sin())).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_decay_is_exact() {
        let c = short(5.0, 0.1, 2.0);
        let t = ks_run(&c, &KsInit::Seed { mode: 1, amplitude: 1e-8 }).unwrap();
        let q = std::f64::consts::TAU / 5.0;
        let rate = q * q - q.powi(4);
        let expect = 1e-8 / 2f64.sqrt() * (rate * 2.0).exp();
        assert!((t.last().l2_norm() / expect - 1.0).abs() < 1e-7);
    }

    #[test]
    fn dissipative_energy_decays_monotonically() {
        let c = KsConfig {
            t_end: 20.0,
            snapshot_every: 0.5,
            ..KsConfig::dissipative()
        };
        let t = ks_run(&c, &KsInit::Standard).unwrap();
        let norms: Vec<f64> = t.snapshots.iter().map(|s| s.l2_norm()).collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        assert!(*norms.last().unwrap() < 1e-3 * norms[0]);
    }

    #[test]
    fn long_wave_seeds_harmonics() {
        let c = KsConfig {
            t_end: 30.0,
            snapshot_every: 30.0,
            ..KsConfig::chaotic()
        };
        let t = ks_run(&c, &KsInit::Seed { mode: 2, amplitude: 0.1 }).unwrap();
        let s0 = t.snapshots[0].spectrum();
        assert!(s0[4] < 1e-28);
        let s = t.last().spectrum();
        assert!(s[4] > 1e-6 && s[6] > 1e-8, "{:e} {:e}", s[4], s[6]);
    }

    #[test]
    fn fourth_order_in_dt() {
        let run = |dt: f64| {
            let c = short(22.0, dt, 2.0);
            ks_run(&c, &KsInit::Standard).unwrap().last().clone()
        };
        let (a, b, c) = (run(0.01), run(0.005), run(0.0025));
        let ratio = a.distance(&b) / b.distance(&c);
        assert!(ratio > 13.0 && ratio < 19.0, "{ratio}");
    }

    #[test]
    fn mean_is_conserved() {
        let t = ks_run(
            &KsConfig {
                t_end: 20.0,
                ..KsConfig::chaotic()
            },
            &KsInit::Standard,
        )
        .unwrap();
        assert!(t.snapshots.iter().all(|s| s.mean().abs() < 1e-10));
    }
}
