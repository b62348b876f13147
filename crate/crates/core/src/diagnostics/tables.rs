//! Amplitude and frequency tables, phase-frequency estimation and standing-wave
//! pair detection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::evolve::TimeSeries;
use crate::linstab::EigenBasis;

/// Amplitudes below this make the phase undefined.
pub const PHASE_AMPLITUDE_FLOOR: f64 = 1e-12;
/// Frequencies below this count as stationary.
pub const STATIONARY_TOL: f64 = 1e-6;
/// Shortest window that resolves two periods of the slowest expected pair
/// frequency (0.0097).
pub const MIN_FREQUENCY_WINDOW: f64 = 2.0 * std::f64::consts::TAU / 0.0097;
pub const DEFAULT_FREQUENCY_WINDOW: f64 = 2000.0;

/// `0, k_d, 2 k_d, ...` up to the truncation.
pub fn harmonic_columns(kgrid_max: f64, dominant: f64) -> Vec<f64> {
    let mut ks = vec![0.0];
    let mut j = 1.0;
    while dominant > 0.0 && j * dominant <= kgrid_max + 1e-9 {
        ks.push(j * dominant);
        j += 1.0;
    }
    ks
}

/// `dk |A_m(k)|`, rows `m = 1..=M`, one column per wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTable {
    pub t: f64,
    pub ks: Vec<f64>,
    /// `values[m - 1][j]` for column `ks[j]`.
    pub values: Vec<Vec<f64>>,
}

fn column_indices(state: &AmplitudeField, ks: &[f64]) -> Result<Vec<i64>> {
    ks.iter()
        .map(|&k| {
            state
                .kgrid
                .index_of(k)
                .ok_or_else(|| Error::Domain(format!("k={k} is not on the wavenumber grid")))
        })
        .collect()
}

/// Amplitude table of `state` on the columns `ks`.
pub fn amplitude_table(state: &AmplitudeField, ks: &[f64]) -> Result<ModeTable> {
    let idx = column_indices(state, ks)?;
    Ok(ModeTable {
        t: state.t,
        ks: ks.to_vec(),
        values: (1..=state.modes)
            .map(|m| idx.iter().map(|&n| state.amplitude_measure(n, m)).collect())
            .collect(),
    })
}

impl ModeTable {
    pub fn get(&self, k: f64, m: usize) -> Option<f64> {
        let j = self.ks.iter().position(|&x| (x - k).abs() < 1e-9)?;
        self.values.get(m.checked_sub(1)?).map(|row| row[j])
    }

    pub fn modes(&self) -> usize {
        self.values.len()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table(w, &self.ks, self.values.iter().map(|r| r.iter().map(|&x| Some(x)).collect()))
    }
}

fn write_table<W: Write>(mut w: W, ks: &[f64], rows: impl Iterator<Item = Vec<Option<f64>>>) -> Result<()> {
    write!(w, "m")?;
    for k in ks {
        write!(w, ",k={k}")?;
    }
    writeln!(w)?;
    for (i, row) in rows.enumerate() {
        write!(w, "{}", i + 1)?;
        for x in row {
            match x {
                Some(x) => write!(w, ",{x:e}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Phase `beta_m(k, t)` samples in `[t0, t1]`, unwrapped.
pub fn phase_history(series: &TimeSeries, k: f64, m: usize, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let snaps = series.window(window.0, window.1);
    let first = snaps
        .first()
        .ok_or_else(|| Error::Diagnostic(format!("no snapshots in window {window:?}")))?;
    let n = first
        .kgrid
        .index_of(k)
        .ok_or_else(|| Error::Domain(format!("k={k} is not on the wavenumber grid")))?;
    if m == 0 || m > first.modes {
        return Err(Error::Domain(format!("mode {m} outside 1..={}", first.modes)));
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(snaps.len());
    for s in snaps {
        let a = s.get(n, m);
        if a.norm() < PHASE_AMPLITUDE_FLOOR {
            return Err(Error::UndefinedPhase {
                k,
                m,
                threshold: PHASE_AMPLITUDE_FLOOR,
            });
        }
        let mut beta = a.arg();
        if let Some(&(_, prev)) = out.last() {
            beta += std::f64::consts::TAU * ((prev - beta) / std::f64::consts::TAU).round();
        }
        out.push((s.t, beta));
    }
    Ok(out)
}

/// Least-squares slope `d beta_m / dt` of the unwrapped phase over `window`.
///
/// Snapshots must be dense enough that the phase moves by less than `pi`
/// between them.
pub fn phase_frequency(series: &TimeSeries, k: f64, m: usize, window: (f64, f64)) -> Result<f64> {
    let h = phase_history(series, k, m, window)?;
    if h.len() < 2 {
        return Err(Error::Diagnostic(format!(
            "need at least two snapshots in window {window:?} to estimate a frequency"
        )));
    }
    let n = h.len() as f64;
    let tm = h.iter().map(|p| p.0).sum::<f64>() / n;
    let bm = h.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(t, b) in &h {
        sxy += (t - tm) * (b - bm);
        sxx += (t - tm) * (t - tm);
    }
    Ok(sxy / sxx)
}

/// Phase frequencies, rows `m = 1..=M`; `None` where the phase is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub window: (f64, f64),
    pub ks: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

pub fn frequency_table(series: &TimeSeries, ks: &[f64], window: (f64, f64)) -> Result<FrequencyTable> {
    let modes = series.last().modes;
    let mut values = vec![vec![None; ks.len()]; modes];
    for (j, &k) in ks.iter().enumerate() {
        for (m, row) in values.iter_mut().enumerate() {
            row[j] = match phase_frequency(series, k, m + 1, window) {
                Ok(f) => Some(f),
                Err(Error::UndefinedPhase { .. }) => None,
                Err(e) => return Err(e),
            };
        }
    }
    Ok(FrequencyTable {
        window,
        ks: ks.to_vec(),
        values,
    })
}

impl FrequencyTable {
    pub fn get(&self, k: f64, m: usize) -> Option<f64> {
        let j = self.ks.iter().position(|&x| (x - k).abs() < 1e-9)?;
        self.values.get(m.checked_sub(1)?).and_then(|row| row[j])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_table(w, &self.ks, self.values.iter().cloned())
    }
}

/// Two modes at one wavenumber with equal amplitude and opposite frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandingPair {
    pub k: f64,
    pub m_a: usize,
    pub m_b: usize,
    pub amplitude: f64,
    pub frequency: f64,
}

/// Pairs `(m_a < m_b)` at a common `k` with `|f_a + f_b| < tol max|f|` and
/// `|A_a - A_b| < tol max A`, at least one member time-periodic.
pub fn standing_wave_pairs(amps: &ModeTable, freqs: &FrequencyTable, tol: f64) -> Vec<StandingPair> {
    let mut out = Vec::new();
    for &k in &amps.ks {
        let modes = amps.modes();
        for ma in 1..=modes {
            for mb in ma + 1..=modes {
                let (Some(aa), Some(ab)) = (amps.get(k, ma), amps.get(k, mb)) else {
                    continue;
                };
                let (Some(fa), Some(fb)) = (freqs.get(k, ma), freqs.get(k, mb)) else {
                    continue;
                };
                let fmax = fa.abs().max(fb.abs());
                if fmax <= STATIONARY_TOL {
                    continue;
                }
                if (fa + fb).abs() < tol * fmax && (aa - ab).abs() < tol * aa.max(ab) {
                    out.push(StandingPair {
                        k,
                        m_a: ma,
                        m_b: mb,
                        amplitude: 0.5 * (aa + ab),
                        frequency: fa.abs().max(fb.abs()),
                    });
                }
            }
        }
    }
    out
}

/// Adjacent modes at `k` forming a conjugate pair of the linear spectrum
/// (equal growth rate, opposite nonzero frequency).
pub fn linear_pairs(basis: &EigenBasis, k: f64) -> Result<Vec<(usize, usize)>> {
    let n = basis
        .kgrid
        .index_of(k)
        .ok_or_else(|| Error::Domain(format!("k={k} is not on the wavenumber grid")))?;
    let modes = basis.at(n);
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < modes.len() {
        let (a, b) = (&modes[i], &modes[i + 1]);
        let scale = a.omega.norm().max(1.0);
        if a.omega.re.abs() > 1e-8 * scale
            && (a.omega.im - b.omega.im).abs() < 1e-8 * scale
            && (a.omega.re + b.omega.re).abs() < 1e-8 * scale
        {
            out.push((a.m, b.m));
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::SimConfig;
    use crate::linstab::basis::KGrid;
    use crate::linstab::C64;

    fn series_of(states: Vec<AmplitudeField>) -> TimeSeries {
        TimeSeries {
            config: SimConfig::default(),
            energies: Vec::new(),
            snapshots: states,
        }
    }

    #[test]
    fn amplitude_measure_arithmetic() {
        let mut s = AmplitudeField::zeros(KGrid::new(0.25, 2.0).unwrap(), 2);
        s.set_pair(4, 2, C64::new(0.0, 0.4));
        let t = amplitude_table(&s, &[0.0, 1.0]).unwrap();
        assert!((t.get(1.0, 2).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(t.get(0.0, 1), Some(0.0));
        assert!(amplitude_table(&s, &[0.3]).is_err());
    }

    #[test]
    fn zero_state_table_is_zero() {
        let s = AmplitudeField::zeros(KGrid::new(0.5, 3.0).unwrap(), 3);
        let t = amplitude_table(&s, &harmonic_columns(3.0, 1.0)).unwrap();
        assert!(t.values.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(t.ks, vec![0.0, 1.0, 2.0, 3.0]);
    }

    fn rotating(f: f64, amp: f64, n_steps: usize, dt: f64) -> TimeSeries {
        let kg = KGrid::new(0.5, 2.0).unwrap();
        series_of(
            (0..n_steps)
                .map(|i| {
                    let t = i as f64 * dt;
                    let mut s = AmplitudeField::zeros(kg, 2);
                    s.t = t;
                    s.set_pair(2, 1, C64::from_polar(amp, 0.3 + f * t));
                    s.set_pair(2, 2, C64::from_polar(amp, -0.3 - f * t));
                    s
                })
                .collect(),
        )
    }

    #[test]
    fn phase_frequency_unwraps() {
        let s = rotating(2.7, 1.0, 200, 0.1);
        let f = phase_frequency(&s, 1.0, 1, (0.0, 20.0)).unwrap();
        assert!((f - 2.7).abs() < 1e-12, "{f}");
        let g = phase_frequency(&s, -1.0, 1, (0.0, 20.0)).unwrap();
        assert!((g + 2.7).abs() < 1e-12);
    }

    #[test]
    fn undefined_phase() {
        let s = rotating(1.0, 1e-13, 10, 0.1);
        assert!(matches!(
            phase_frequency(&s, 1.0, 1, (0.0, 1.0)),
            Err(Error::UndefinedPhase { .. })
        ));
    }

    #[test]
    fn pairs_detected_symmetrically() {
        let s = rotating(0.01, 0.5, 50, 1.0);
        let a = amplitude_table(s.last(), &[0.0, 1.0]).unwrap();
        let f = frequency_table(&s, &[0.0, 1.0], (0.0, 49.0)).unwrap();
        let p = standing_wave_pairs(&a, &f, 1e-3);
        assert_eq!(p.len(), 1);
        assert_eq!((p[0].m_a, p[0].m_b), (1, 2));
        assert!((p[0].frequency - 0.01).abs() < 1e-12);
    }

    #[test]
    fn stationary_table_has_no_pairs() {
        let s = rotating(0.0, 0.5, 20, 1.0);
        let a = amplitude_table(s.last(), &[1.0]).unwrap();
        let f = frequency_table(&s, &[1.0], (0.0, 19.0)).unwrap();
        assert!(standing_wave_pairs(&a, &f, 1e-2).is_empty());
    }
}
