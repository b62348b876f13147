//! Fourier-component synthesis and kinetic energies.

use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::linstab::modes::inner;
use crate::linstab::{EigenBasis, Profiles};
use crate::meanflow::CouetteProfile;

/// `dk * sum_m A_m(k) u_m(k, r)` at an on-grid wavenumber.
pub fn fourier_component(state: &AmplitudeField, basis: &EigenBasis, k: f64) -> Result<Profiles> {
    let n = basis
        .kgrid
        .index_of(k)
        .ok_or_else(|| Error::Domain(format!("k={k} is not on the wavenumber grid")))?;
    Ok(component_at(state, basis, n))
}

pub(crate) fn component_at(state: &AmplitudeField, basis: &EigenBasis, n: i64) -> Profiles {
    let mut c = Profiles::zeros(basis.grid.n_r);
    let dk = basis.kgrid.dk;
    for (a, mode) in state.at(n).iter().zip(basis.at(n)) {
        if a.norm() > 0.0 {
            mode.profile.axpy_into(a * dk, &mut c);
        }
    }
    c
}

/// Kinetic energy of the Fourier component at `k >= 0`.
///
/// For `k != 0` this is `int r |u_k|^2 dr`, which covers both `+k` and `-k`.
/// At `k = 0` it is `1/2 int r [(V + v_0)^2 - V^2] dr`, the energy of the
/// mean-flow distortion relative to circular Couette flow (may be negative).
pub fn kinetic_energy(state: &AmplitudeField, basis: &EigenBasis, profile: &CouetteProfile, k: f64) -> Result<f64> {
    if k < 0.0 {
        return Err(Error::Domain(format!("energy is defined for k >= 0 (the +-k pair), got {k}")));
    }
    let n = basis
        .kgrid
        .index_of(k)
        .ok_or_else(|| Error::Domain(format!("k={k} is not on the wavenumber grid")))?;
    Ok(energy_at(state, basis, profile, n))
}

pub(crate) fn energy_at(state: &AmplitudeField, basis: &EigenBasis, profile: &CouetteProfile, n: i64) -> f64 {
    let c = component_at(state, basis, n);
    let g = &basis.grid;
    if n != 0 {
        inner(g, &c, &c).re
    } else {
        let f: Vec<f64> = (0..g.n_r)
            .map(|i| {
                let v = c.v[i].re;
                let big_v = profile.velocity(g.r[i]);
                0.5 * ((big_v + v) * (big_v + v) - big_v * big_v)
            })
            .collect();
        g.integrate_r(&f)
    }
}

/// `E(k, t)` for every `k >= 0` on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySpectrum {
    pub t: f64,
    pub k: Vec<f64>,
    pub e: Vec<f64>,
}

impl EnergySpectrum {
    pub fn compute(state: &AmplitudeField, basis: &EigenBasis, profile: &CouetteProfile) -> Self {
        let half = basis.kgrid.half as i64;
        Self {
            t: state.t,
            k: (0..=half).map(|n| basis.kgrid.k_of(n)).collect(),
            e: (0..=half).map(|n| energy_at(state, basis, profile, n)).collect(),
        }
    }

    pub fn at(&self, k: f64) -> Option<f64> {
        self.k.iter().position(|&x| (x - k).abs() < 1e-9).map(|i| self.e[i])
    }

    /// Wavenumber `k != 0` with the largest energy; ties go to the smaller k.
    pub fn dominant(&self) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (&k, &e) in self.k.iter().zip(&self.e).skip(1) {
            if e > 0.0 && best.is_none_or(|(_, be)| e > be) {
                best = Some((k, e));
            }
        }
        best.map(|(k, _)| k)
    }

    pub fn total(&self) -> f64 {
        self.e.iter().sum()
    }
}

/// Quadratic disturbance energy `1/2 <|u'|^2>` per unit length, including the
/// axial mean component, with the base flow excluded.
pub fn disturbance_energy(state: &AmplitudeField, basis: &EigenBasis) -> f64 {
    let g = &basis.grid;
    (0..=basis.kgrid.half as i64)
        .map(|n| {
            let c = component_at(state, basis, n);
            let e = inner(g, &c, &c).re;
            if n == 0 {
                0.5 * e
            } else {
                e
            }
        })
        .sum()
}

/// `d/dt` of [`disturbance_energy`] given amplitude tendencies `rate`.
pub fn disturbance_energy_rate(state: &AmplitudeField, rate: &AmplitudeField, basis: &EigenBasis) -> f64 {
    let g = &basis.grid;
    (0..=basis.kgrid.half as i64)
        .map(|n| {
            let c = component_at(state, basis, n);
            let dc = component_at(rate, basis, n);
            let e = 2.0 * inner(g, &dc, &c).re;
            if n == 0 {
                0.5 * e
            } else {
                e
            }
        })
        .sum()
}

/// Dominant wavenumber of `state` (largest `E(k)`, `k != 0`, ties to smaller
/// k); `None` if every `k != 0` component vanishes.
pub fn dominant_wavenumber(state: &AmplitudeField, basis: &EigenBasis) -> Option<f64> {
    let g = &basis.grid;
    let mut best: Option<(f64, f64)> = None;
    for n in 1..=basis.kgrid.half as i64 {
        let c = component_at(state, basis, n);
        let e = inner(g, &c, &c).re;
        if e > 0.0 && best.is_none_or(|(_, be)| e > be) {
            best = Some((basis.kgrid.k_of(n), e));
        }
    }
    best.map(|(k, _)| k)
}

/// Rate of change of [`disturbance_energy`] due to the unprojected convective
/// term, treating the retained components as a Fourier series of period
/// `2 pi / dk`. Vanishes for divergence-free, no-slip fields up to radial
/// quadrature error; contrast with the projected rate, which also carries the
/// truncation of the eigenfunction expansion.
pub fn convective_transfer(state: &AmplitudeField, basis: &EigenBasis) -> f64 {
    use crate::interaction::product::{convective_product, project};
    let g = &basis.grid;
    let kg = &basis.kgrid;
    let half = kg.half as i64;
    let comps: Vec<Profiles> = (-half..=half).map(|n| component_at(state, basis, n)).collect();
    let c = |n: i64| &comps[(n + half) as usize];
    let mut total = 0.0;
    for n in 0..=half {
        let mut rate = 0.0;
        for n1 in (n - half).max(-half)..=(n + half).min(half) {
            let n2 = n - n1;
            let f = convective_product(c(n1), c(n2), kg.k_of(n2), g);
            rate += project(g, &f, c(n)).re;
        }
        total += if n == 0 { rate } else { 2.0 * rate };
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstab::basis::KGrid;
    use crate::linstab::{LinearProblem, C64};
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn fixture() -> &'static (EigenBasis, LinearProblem) {
        static F: OnceLock<(EigenBasis, LinearProblem)> = OnceLock::new();
        F.get_or_init(|| {
            let p = LinearProblem::new(0.5, 88.1, 24).unwrap();
            let b = EigenBasis::build(&p, KGrid::new(0.5, 3.0).unwrap(), 3).unwrap();
            (b, p)
        })
    }

    fn sample(b: &EigenBasis, vals: &[f64]) -> AmplitudeField {
        let mut s = AmplitudeField::zeros(b.kgrid, 3);
        let mut it = vals.iter().cycle();
        for n in 0..=6 {
            for m in 1..=3 {
                s.set_pair(n, m, C64::new(*it.next().unwrap(), *it.next().unwrap()));
            }
        }
        s
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let (b, p) = fixture();
        let s = AmplitudeField::zeros(b.kgrid, 3);
        let spec = EnergySpectrum::compute(&s, b, &p.profile);
        assert!(spec.e.iter().all(|&e| e == 0.0));
        assert_eq!(spec.dominant(), None);
        assert_eq!(dominant_wavenumber(&s, b), None);
        assert_eq!(disturbance_energy(&s, b), 0.0);
    }

    #[test]
    fn bad_wavenumbers_rejected() {
        let (b, p) = fixture();
        let s = AmplitudeField::zeros(b.kgrid, 3);
        assert!(matches!(kinetic_energy(&s, b, &p.profile, -0.5), Err(Error::Domain(_))));
        assert!(matches!(kinetic_energy(&s, b, &p.profile, 0.7), Err(Error::Domain(_))));
        assert!(fourier_component(&s, b, 9.0).is_err());
    }

    #[test]
    fn parseval_against_physical_synthesis() {
        let (b, _) = fixture();
        let s = sample(b, &[0.3, -0.2, 0.7, 0.1, -0.4, 0.25, 0.05]);
        let g = &b.grid;
        let period = std::f64::consts::TAU / b.kgrid.dk;
        let nz = 64;
        let comps: Vec<Profiles> = (-6..=6).map(|n| component_at(&s, b, n)).collect();
        let mut mean = vec![0.0; g.n_r];
        for j in 0..nz {
            let z = period * j as f64 / nz as f64;
            for (i, e) in mean.iter_mut().enumerate() {
                let mut u = [C64::new(0.0, 0.0); 3];
                for (c, n) in comps.iter().zip(-6i64..) {
                    let ph = C64::from_polar(1.0, b.kgrid.k_of(n) * z);
                    u[0] += c.u[i] * ph;
                    u[1] += c.v[i] * ph;
                    u[2] += c.w[i] * ph;
                }
                assert!(u.iter().all(|x| x.im.abs() < 1e-12));
                *e += 0.5 * u.iter().map(|x| x.re * x.re).sum::<f64>() / nz as f64;
            }
        }
        let physical = g.integrate_r(&mean);
        assert!((physical - disturbance_energy(&s, b)).abs() < 1e-12 * physical.abs());
    }

    proptest! {
        #[test]
        fn energies_are_phase_invariant(
            vals in prop::collection::vec(-1.0f64..1.0, 42),
            phase in 0.0f64..6.3,
        ) {
            let (b, p) = fixture();
            let s = sample(b, &vals);
            let mut r = s.clone();
            for n in 1..=6i64 {
                let rot = C64::from_polar(1.0, phase * n as f64);
                for m in 1..=3 {
                    r.set_pair(n, m, s.get(n, m) * rot);
                }
            }
            let a = EnergySpectrum::compute(&s, b, &p.profile);
            let c = EnergySpectrum::compute(&r, b, &p.profile);
            for (x, y) in a.e.iter().zip(&c.e) {
                prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
            }
            prop_assert!(a.e[1..].iter().all(|&e| e >= 0.0));
        }
    }
}
