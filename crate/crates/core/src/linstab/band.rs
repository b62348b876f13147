//! Growth rates and the neutral band.

use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::modes::{adjoint_modes, solve_modes, sorted_spectrum, EigenMode, SPURIOUS_CUTOFF};
use super::operator::{assemble_operator, StabilityOperator};
use crate::error::Result;
use crate::meanflow::{AnnulusGeometry, CouetteProfile};

pub const DEFAULT_N_R: usize = 48;

/// A Couette profile together with its collocation grid.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub profile: CouetteProfile,
    pub grid: RadialGrid,
    pub cutoff: f64,
}

/// Unstable wavenumber interval; `None` when the flow is linearly stable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralBand {
    pub band: Option<(f64, f64)>,
}

impl NeutralBand {
    pub fn is_empty(&self) -> bool {
        self.band.is_none()
    }

    pub fn contains(&self, k: f64) -> bool {
        matches!(self.band, Some((lo, hi)) if k > lo && k < hi)
    }
}

impl LinearProblem {
    pub fn new(h: f64, reynolds: f64, n_r: usize) -> Result<Self> {
        let geometry = AnnulusGeometry::new(h)?;
        Ok(Self {
            profile: CouetteProfile::new(geometry, reynolds)?,
            grid: RadialGrid::new(n_r, geometry)?,
            cutoff: SPURIOUS_CUTOFF,
        })
    }

    pub fn operator(&self, k: f64) -> Result<StabilityOperator> {
        assemble_operator(&self.grid, &self.profile, k)
    }

    /// Growth rate `omega_i` of the `m`-th least-stable mode (1-based).
    pub fn growth_rate_of(&self, k: f64, m: usize) -> Result<f64> {
        let op = self.operator(k)?;
        let s = sorted_spectrum(&op.direct, self.cutoff)?;
        s.get(m.saturating_sub(1))
            .map(|z| z.re)
            .ok_or_else(|| crate::error::Error::Config(format!("mode {m} not resolved at k={k}")))
    }

    /// Exponent `s = -i omega` of the least-stable mode.
    pub fn leading_exponent(&self, k: f64) -> Result<super::C64> {
        let op = self.operator(k)?;
        sorted_spectrum(&op.direct, self.cutoff)?
            .first()
            .copied()
            .ok_or_else(|| crate::error::Error::Numerical(format!("empty spectrum at k={k}")))
    }

    /// Growth rate of the least-stable mode.
    pub fn growth_rate(&self, k: f64) -> Result<f64> {
        self.growth_rate_of(k, 1)
    }

    /// `count` modes with biorthonormal adjoints, sorted by descending growth rate.
    pub fn modes(&self, k: f64, count: usize) -> Result<Vec<EigenMode>> {
        let op = self.operator(k)?;
        let mut modes = solve_modes(&self.grid, &op, count, self.cutoff)?;
        adjoint_modes(&self.grid, &op, &mut modes)?;
        Ok(modes)
    }

    /// Roots of `sigma(k) = 0` found by a uniform scan of `bracket` followed by
    /// bisection to `tol` in k.
    pub fn neutral_band(&self, bracket: (f64, f64), samples: usize, tol: f64) -> Result<NeutralBand> {
        let (a, b) = bracket;
        let n = samples.max(3);
        let ks: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let sig: Vec<f64> = ks.iter().map(|&k| self.growth_rate(k)).collect::<Result<_>>()?;
        let first = sig.iter().position(|&s| s > 0.0);
        let last = sig.iter().rposition(|&s| s > 0.0);
        let (Some(i0), Some(i1)) = (first, last) else {
            return Ok(NeutralBand { band: None });
        };
        for w in sig.windows(2) {
            if (w[1] - w[0]).abs() > 50.0 {
                log::warn!("growth-rate jump of {} between neighbouring samples", (w[1] - w[0]).abs());
            }
        }
        let lo = if i0 == 0 { a } else { self.bisect(ks[i0 - 1], ks[i0], tol)? };
        let hi = if i1 == n - 1 { b } else { self.bisect(ks[i1], ks[i1 + 1], tol)? };
        Ok(NeutralBand { band: Some((lo, hi)) })
    }

    fn bisect(&self, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
        let mut fa = self.growth_rate(a)?;
        while (b - a).abs() > tol {
            let mid = 0.5 * (a + b);
            let fm = self.growth_rate(mid)?;
            if (fm > 0.0) == (fa > 0.0) {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linstab::modes::inner;
    use crate::linstab::C64;
    use proptest::prelude::*;

    fn problem() -> LinearProblem {
        LinearProblem::new(0.5, 88.1, 32).unwrap()
    }

    #[test]
    fn growth_rate_signs() {
        let p = problem();
        assert!(p.growth_rate(3.0).unwrap() > 0.0);
        assert!(p.growth_rate(1.75).unwrap() > 0.0);
        assert!(p.growth_rate(6.0).unwrap() < 0.0);
        assert!(p.growth_rate(7.0).unwrap() < 0.0);
        assert!(p.growth_rate(0.0).unwrap() < 0.0);
    }

    #[test]
    fn subcritical_band_is_empty() {
        let p = LinearProblem::new(0.5, 60.0, 32).unwrap();
        assert!(p.neutral_band((0.25, 8.0), 32, 1e-4).unwrap().is_empty());
    }

    #[test]
    fn modes_are_solenoidal_and_biorthonormal() {
        let p = problem();
        let modes = p.modes(3.0, 6).unwrap();
        for m in &modes {
            assert!(m.continuity_residual(&p.grid) < 1e-8);
            assert!(m.wall_residual() < 1e-12);
            assert!((inner(&p.grid, &m.profile, &m.profile).re - 1.0).abs() < 1e-10);
        }
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let d = inner(&p.grid, &a.profile, &b.adjoint);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - C64::new(expect, 0.0)).norm() < 1e-8, "({i},{j}) {d}");
            }
        }
        assert!(modes.windows(2).all(|w| w[0].growth_rate() >= w[1].growth_rate() - 1e-12));
    }

    #[test]
    fn adjoint_spectrum_matches_direct() {
        let p = problem();
        let op = p.operator(2.5).unwrap();
        let a = sorted_spectrum(&op.direct, p.cutoff).unwrap();
        let b = sorted_spectrum(&op.adjoint, p.cutoff).unwrap();
        for (x, y) in a.iter().zip(&b).take(10) {
            assert!((x - y).norm() < 1e-7 * x.norm().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn conjugate_partner_at_negative_k() {
        let p = problem();
        let m = &p.modes(2.0, 4).unwrap()[3];
        let c = m.conjugate();
        assert_eq!(c.k, -2.0);
        assert_eq!(c.omega, -m.omega.conj());
        assert_eq!(c.growth_rate(), m.growth_rate());
        assert!(c.continuity_residual(&p.grid) < 1e-8);
    }

    #[test]
    fn mean_modes_are_stationary_and_decay() {
        let p = problem();
        for m in p.modes(0.0, 6).unwrap() {
            assert!(m.omega.re.abs() < 1e-9);
            assert!(m.growth_rate() < 0.0);
        }
    }

    #[test]
    fn rejects_too_many_modes() {
        let p = problem();
        assert!(p.modes(3.0, 1000).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn resting_fluid_is_stable(k in 0.05f64..10.0) {
            let p = LinearProblem::new(0.5, 0.0, 24).unwrap();
            prop_assert!(p.growth_rate(k).unwrap() < 0.0);
        }

        #[test]
        fn growth_rate_converges_in_resolution(k in 0.5f64..8.0) {
            let a = LinearProblem::new(0.5, 88.1, 32).unwrap().growth_rate(k).unwrap();
            let b = LinearProblem::new(0.5, 88.1, 40).unwrap().growth_rate(k).unwrap();
            prop_assert!((a - b).abs() < 1e-6 * a.abs().max(1.0));
        }
    }
}
