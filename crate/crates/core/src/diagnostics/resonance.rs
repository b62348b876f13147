//! Classification of wave interactions active in an equilibrated window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::TimeSeries;
use crate::linstab::basis::KGrid;

use super::tables::phase_frequency;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonanceKind {
    /// `k1 + k2 = k3` with both inputs positive (`2k = k + k` and its
    /// higher-harmonic relatives).
    Harmonic,
    /// `k1 - k2 = k3`, e.g. `k = 2k - k`.
    Subharmonic,
    /// `k1 + k2 - k2 = k1` for two distinct active waves.
    Quartet,
    /// `k + 0 = k`, the exchange with the mean-flow distortion.
    MeanFlowTrio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub kind: ResonanceKind,
    /// Participating `(k, m)`, inputs first, output last; `k` is signed.
    pub members: Vec<(f64, usize)>,
    /// `|sum of input frequencies - output frequency|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub entries: Vec<Resonance>,
}

impl ResonanceReport {
    pub fn of_kind(&self, kind: ResonanceKind) -> impl Iterator<Item = &Resonance> {
        self.entries.iter().filter(move |r| r.kind == kind)
    }

    /// Harmonic triads as `(k1, k2, k3)`.
    pub fn harmonic_triads(&self) -> Vec<(f64, f64, f64)> {
        self.of_kind(ResonanceKind::Harmonic)
            .map(|r| (r.members[0].0, r.members[1].0, r.members[2].0))
            .collect()
    }

    /// Checks every entry's wavenumber sum rule in exact grid arithmetic.
    pub fn sum_rules_hold(&self, kgrid: &KGrid) -> bool {
        self.entries.iter().all(|r| {
            let idx: Option<Vec<i64>> = r.members.iter().map(|&(k, _)| kgrid.index_of(k)).collect();
            let Some(idx) = idx else { return false };
            let (out, inputs) = idx.split_last().expect("resonances have members");
            match r.kind {
                ResonanceKind::Quartet => inputs[0] + inputs[1] + inputs[2] == *out,
                _ => inputs.iter().sum::<i64>() == *out,
            }
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.entries {
            let kind = match r.kind {
                ResonanceKind::Harmonic => "harmonic",
                ResonanceKind::Subharmonic => "subharmonic",
                ResonanceKind::Quartet => "quartet",
                ResonanceKind::MeanFlowTrio => "mean-flow-trio",
            };
            let members: Vec<String> = r.members.iter().map(|(k, m)| format!("(k={k}, m={m})")).collect();
            s.push_str(&format!("{kind}: {} residual={:e}\n", members.join(" "), r.residual));
        }
        s
    }
}

/// A wave taking part in the classification: wavenumber index, strongest
/// mode and its phase frequency.
#[derive(Debug, Clone, Copy)]
struct Wave {
    n: i64,
    m: usize,
    f: f64,
}

/// Finds triads `k1 + k2 = k3` among the active waves of `window` whose phase
/// frequencies lock to within `tol`, plus the always-admissible quartets and
/// mean-flow trios.
///
/// A wave is active if its strongest amplitude at the window end exceeds
/// `1e-8` of the strongest amplitude anywhere (`k = 0` always included when
/// nonzero).
pub fn classify_resonances(series: &TimeSeries, window: (f64, f64), tol: f64) -> Result<ResonanceReport> {
    let last = *series
        .window(window.0, window.1)
        .last()
        .ok_or_else(|| Error::Diagnostic(format!("no snapshots in window {window:?}")))?;
    let kg = last.kgrid;
    let peak = last.max_abs().0;
    let mut waves: Vec<Wave> = Vec::new();
    if peak > 0.0 {
        for n in 0..=kg.half as i64 {
            let (m, a) = last
                .at(n)
                .iter()
                .enumerate()
                .map(|(i, a)| (i + 1, a.norm()))
                .fold((0, 0.0), |b, x| if x.1 > b.1 { x } else { b });
            if a <= 1e-8 * peak {
                continue;
            }
            let f = match phase_frequency(series, kg.k_of(n), m, window) {
                Ok(f) => f,
                Err(Error::UndefinedPhase { .. }) => continue,
                Err(e) => return Err(e),
            };
            waves.push(Wave { n, m, f });
        }
    }
    let find = |n: i64| waves.iter().find(|w| w.n == n).copied();
    let mem = |w: Wave, sign: i64| (kg.k_of(sign * w.n), w.m);
    let freq = |w: Wave, sign: i64| sign as f64 * w.f;
    let mut entries = Vec::new();
    let positive: Vec<Wave> = waves.iter().copied().filter(|w| w.n > 0).collect();
    let mean = find(0);
    for (i, a) in positive.iter().enumerate() {
        for b in &positive[i..] {
            if let Some(c) = find(a.n + b.n) {
                let residual = (a.f + b.f - c.f).abs();
                if residual < tol {
                    entries.push(Resonance {
                        kind: ResonanceKind::Harmonic,
                        members: vec![mem(*a, 1), mem(*b, 1), mem(c, 1)],
                        residual,
                    });
                }
            }
        }
    }
    for a in &positive {
        for b in &positive {
            if b.n >= a.n {
                continue;
            }
            if let Some(c) = find(a.n - b.n) {
                let residual = (a.f - b.f - c.f).abs();
                if residual < tol && c.n != 0 {
                    entries.push(Resonance {
                        kind: ResonanceKind::Subharmonic,
                        members: vec![mem(*a, 1), mem(*b, -1), mem(c, 1)],
                        residual,
                    });
                }
            }
        }
    }
    for a in &positive {
        for b in &positive {
            if a.n != b.n {
                entries.push(Resonance {
                    kind: ResonanceKind::Quartet,
                    members: vec![mem(*a, 1), mem(*b, 1), mem(*b, -1), mem(*a, 1)],
                    residual: (freq(*b, 1) + freq(*b, -1)).abs(),
                });
            }
        }
    }
    for a in &positive {
        let (zero, residual) = match mean {
            Some(z) => (mem(z, 1), z.f.abs()),
            None => ((0.0, 1), 0.0),
        };
        entries.push(Resonance {
            kind: ResonanceKind::MeanFlowTrio,
            members: vec![mem(*a, 1), zero, mem(*a, 1)],
            residual,
        });
    }
    Ok(ResonanceReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::AmplitudeField;
    use crate::evolve::SimConfig;
    use crate::linstab::C64;

    fn series(waves: &[(i64, f64, f64)]) -> TimeSeries {
        let kg = KGrid::new(0.5, 6.0).unwrap();
        let snapshots = (0..40)
            .map(|i| {
                let t = i as f64 * 0.5;
                let mut s = AmplitudeField::zeros(kg, 2);
                s.t = t;
                for &(n, amp, f) in waves {
                    s.set_pair(n, 1, C64::from_polar(amp, f * t));
                }
                s
            })
            .collect();
        TimeSeries {
            config: SimConfig::default(),
            energies: Vec::new(),
            snapshots,
        }
    }

    #[test]
    fn harmonic_family() {
        let s = series(&[(0, 0.1, 0.0), (2, 1.0, 0.0), (4, 0.1, 0.0), (6, 0.01, 0.0), (8, 0.001, 0.0)]);
        let r = classify_resonances(&s, (0.0, 20.0), 1e-6).unwrap();
        let tri = r.harmonic_triads();
        for t in [(1.0, 1.0, 2.0), (1.0, 2.0, 3.0), (2.0, 2.0, 4.0), (1.0, 3.0, 4.0)] {
            assert!(tri.contains(&t), "{t:?} missing from {tri:?}");
        }
        assert!(r.sum_rules_hold(&s.last().kgrid));
        assert!(r.of_kind(ResonanceKind::Subharmonic).count() > 0);
    }

    #[test]
    fn single_wave_only_has_mean_flow_trio() {
        let s = series(&[(3, 1e-3, -0.7)]);
        let r = classify_resonances(&s, (0.0, 20.0), 1e-6).unwrap();
        assert_eq!(r.entries.len(), 1);
        assert_eq!(r.entries[0].kind, ResonanceKind::MeanFlowTrio);
    }

    #[test]
    fn phase_mismatch_excludes_triad() {
        let s = series(&[(2, 1.0, 0.3), (4, 0.1, 0.1)]);
        let r = classify_resonances(&s, (0.0, 20.0), 1e-6).unwrap();
        assert!(r.harmonic_triads().is_empty());
        let s = series(&[(2, 1.0, 0.3), (4, 0.1, 0.6)]);
        let r = classify_resonances(&s, (0.0, 20.0), 1e-6).unwrap();
        assert_eq!(r.harmonic_triads(), vec![(1.0, 1.0, 2.0)]);
    }
}
