//! Meridional (r-z) velocity synthesis.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::linstab::{EigenBasis, Profiles};

use super::energy::{component_at, dominant_wavenumber};

pub const DEFAULT_FIELD_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HarmonicSelector {
    Total,
    Fundamental,
    SecondHarmonic,
    Mean,
}

impl HarmonicSelector {
    pub fn label(self) -> &'static str {
        match self {
            Self::Total => "total",
            Self::Fundamental => "fundamental",
            Self::SecondHarmonic => "second-harmonic",
            Self::Mean => "k=0",
        }
    }
}

/// Samples of `(u_r, u_z)` on a uniform `r x z` grid spanning the gap and one
/// wavelength of the dominant wave. Values are stored `[iz * n_r + ir]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RzField {
    pub selector: HarmonicSelector,
    pub k_dominant: f64,
    pub r: Vec<f64>,
    pub z: Vec<f64>,
    pub u_r: Vec<f64>,
    pub u_z: Vec<f64>,
}

impl RzField {
    pub fn at(&self, iz: usize, ir: usize) -> (f64, f64) {
        let i = iz * self.r.len() + ir;
        (self.u_r[i], self.u_z[i])
    }

    pub fn wavelength(&self) -> f64 {
        std::f64::consts::TAU / self.k_dominant
    }

    /// Largest outward radial velocity.
    pub fn max_outflow(&self) -> f64 {
        self.u_r.iter().fold(0.0, |a, &b| a.max(b))
    }

    /// Largest inward radial speed.
    pub fn max_inflow(&self) -> f64 {
        self.u_r.iter().fold(0.0, |a, &b| a.max(-b))
    }

    pub fn max_speed(&self) -> f64 {
        self.u_r.iter().zip(&self.u_z).fold(0.0, |a, (x, y)| a.max(x.hypot(*y)))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,z,u_r,u_z")?;
        for (iz, z) in self.z.iter().enumerate() {
            for (ir, r) in self.r.iter().enumerate() {
                let (ur, uz) = self.at(iz, ir);
                writeln!(w, "{r:e},{z:e},{ur:e},{uz:e}")?;
            }
        }
        Ok(())
    }
}

fn interpolate(weights: &[Vec<f64>], c: &Profiles) -> Vec<(crate::linstab::C64, crate::linstab::C64)> {
    weights
        .iter()
        .map(|w| {
            let mut u = crate::linstab::C64::new(0.0, 0.0);
            let mut wz = u;
            for ((wi, a), b) in w.iter().zip(&c.u).zip(&c.w) {
                u += a * wi;
                wz += b * wi;
            }
            (u, wz)
        })
        .collect()
}

/// Synthesises the selected harmonics on an `n_r x n_z` grid (`z` excludes the
/// periodic endpoint).
pub fn velocity_field_rz(
    state: &AmplitudeField,
    basis: &EigenBasis,
    selector: HarmonicSelector,
    n_r: usize,
    n_z: usize,
) -> Result<RzField> {
    if n_r < 2 || n_z < 1 {
        return Err(Error::Config(format!("field grid {n_r}x{n_z} too small")));
    }
    let k_dom = dominant_wavenumber(state, basis)
        .ok_or_else(|| Error::Diagnostic("no dominant wave: every k != 0 component vanishes".into()))?;
    let kg = &basis.kgrid;
    let n_dom = kg.index_of(k_dom).expect("dominant wavenumber lies on the grid");
    let indices: Vec<i64> = match selector {
        HarmonicSelector::Total => (0..=kg.half as i64).collect(),
        HarmonicSelector::Fundamental => vec![n_dom],
        HarmonicSelector::SecondHarmonic => {
            if 2 * n_dom <= kg.half as i64 {
                vec![2 * n_dom]
            } else {
                Vec::new()
            }
        }
        HarmonicSelector::Mean => vec![0],
    };
    let g = &basis.grid.geometry;
    let r: Vec<f64> = (0..n_r)
        .map(|i| g.r_inner + g.gap() * i as f64 / (n_r - 1) as f64)
        .collect();
    let lambda = std::f64::consts::TAU / k_dom;
    let z: Vec<f64> = (0..n_z).map(|j| lambda * j as f64 / n_z as f64).collect();
    let weights: Vec<Vec<f64>> = r.iter().map(|&ri| basis.grid.interpolation_weights(ri)).collect();
    let mut u_r = vec![0.0; n_r * n_z];
    let mut u_z = vec![0.0; n_r * n_z];
    for n in indices {
        let c = component_at(state, basis, n);
        let vals = interpolate(&weights, &c);
        let k = kg.k_of(n);
        let factor = if n == 0 { 1.0 } else { 2.0 };
        for (iz, &zz) in z.iter().enumerate() {
            let e = crate::linstab::C64::from_polar(factor, k * zz);
            for (ir, (u, w)) in vals.iter().enumerate() {
                u_r[iz * n_r + ir] += (u * e).re;
                u_z[iz * n_r + ir] += (w * e).re;
            }
        }
    }
    Ok(RzField {
        selector,
        k_dominant: k_dom,
        r,
        z,
        u_r,
        u_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstab::basis::KGrid;
    use crate::linstab::{LinearProblem, C64};

    fn basis() -> EigenBasis {
        let p = LinearProblem::new(0.5, 88.1, 24).unwrap();
        EigenBasis::build(&p, KGrid::new(0.5, 6.0).unwrap(), 2).unwrap()
    }

    #[test]
    fn zero_state_has_no_field() {
        let b = basis();
        let s = AmplitudeField::zeros(b.kgrid, 2);
        assert!(matches!(
            velocity_field_rz(&s, &b, HarmonicSelector::Total, 8, 8),
            Err(Error::Diagnostic(_))
        ));
    }

    #[test]
    fn fundamental_flips_over_half_wavelength() {
        let b = basis();
        let mut s = AmplitudeField::zeros(b.kgrid, 2);
        s.set_pair(6, 1, C64::new(0.8, 0.3));
        s.set_pair(12, 1, C64::new(0.1, -0.2));
        s.set_pair(0, 2, C64::new(0.05, 0.0));
        let f = velocity_field_rz(&s, &b, HarmonicSelector::Fundamental, 9, 16).unwrap();
        assert_eq!(f.k_dominant, 3.0);
        for iz in 0..8 {
            for ir in 0..9 {
                let (a, c) = (f.at(iz, ir), f.at(iz + 8, ir));
                assert!((a.0 + c.0).abs() < 1e-12 && (a.1 + c.1).abs() < 1e-12);
            }
        }
        for ir in [0, 8] {
            assert!(f.at(3, ir).0.abs() < 1e-10 && f.at(3, ir).1.abs() < 1e-10);
        }
        let total = velocity_field_rz(&s, &b, HarmonicSelector::Total, 9, 16).unwrap();
        let parts: Vec<RzField> = [HarmonicSelector::Fundamental, HarmonicSelector::SecondHarmonic, HarmonicSelector::Mean]
            .into_iter()
            .map(|h| velocity_field_rz(&s, &b, h, 9, 16).unwrap())
            .collect();
        for i in 0..total.u_r.len() {
            let sum: f64 = parts.iter().map(|p| p.u_r[i]).sum();
            assert!((sum - total.u_r[i]).abs() < 1e-12);
        }
    }
}
