//! Annulus geometry and the circular Couette base flow.
//!
//! Lengths are scaled by the gap width, velocities by `nu/d`, time by
//! `d^2/nu`. The Reynolds number is the inner-cylinder surface speed in those
//! units; the outer cylinder is at rest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGeometry {
    /// Radius ratio `r_i / r_o`.
    pub h: f64,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl AnnulusGeometry {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::Domain(format!("radius ratio must lie in (0,1), got {h}")));
        }
        Ok(Self {
            h,
            r_inner: h / (1.0 - h),
            r_outer: 1.0 / (1.0 - h),
        })
    }

    pub fn gap(&self) -> f64 {
        self.r_outer - self.r_inner
    }

    pub fn contains(&self, r: f64) -> bool {
        let tol = 1e-12 * self.r_outer;
        r >= self.r_inner - tol && r <= self.r_outer + tol
    }
}

/// Circular Couette profile `V(r) = A r + B / r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouetteProfile {
    pub geometry: AnnulusGeometry,
    pub coeff_a: f64,
    pub coeff_b: f64,
    pub reynolds: f64,
}

impl CouetteProfile {
    /// Solves `V(r_i) = Re`, `V(r_o) = 0`.
    pub fn new(geometry: AnnulusGeometry, reynolds: f64) -> Result<Self> {
        if !(reynolds >= 0.0) || !reynolds.is_finite() {
            return Err(Error::Domain(format!("Reynolds number must be non-negative, got {reynolds}")));
        }
        let (ri, ro) = (geometry.r_inner, geometry.r_outer);
        let det = ri * ri - ro * ro;
        if det.abs() < 1e-14 {
            return Err(Error::Domain("degenerate annulus: r_i == r_o".into()));
        }
        // A r_i + B / r_i = Re,  A r_o + B / r_o = 0
        let coeff_a = reynolds * ri / det;
        let coeff_b = -coeff_a * ro * ro;
        Ok(Self {
            geometry,
            coeff_a,
            coeff_b,
            reynolds,
        })
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        if !self.geometry.contains(r) {
            return Err(Error::Domain(format!(
                "r={r} outside annulus [{}, {}]",
                self.geometry.r_inner, self.geometry.r_outer
            )));
        }
        Ok(self.velocity(r))
    }

    /// Unchecked evaluation for interior use.
    #[inline]
    pub fn velocity(&self, r: f64) -> f64 {
        self.coeff_a * r + self.coeff_b / r
    }

    /// `V / r`
    #[inline]
    pub fn angular_velocity(&self, r: f64) -> f64 {
        self.coeff_a + self.coeff_b / (r * r)
    }

    /// `dV/dr + V/r`, which is the constant `2A` for Couette flow.
    #[inline]
    pub fn vorticity(&self) -> f64 {
        2.0 * self.coeff_a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn geometry_half() {
        let g = AnnulusGeometry::new(0.5).unwrap();
        assert_eq!(g.r_inner, 1.0);
        assert_eq!(g.r_outer, 2.0);
        assert_eq!(g.gap(), 1.0);
        let g = AnnulusGeometry::new(0.875).unwrap();
        assert_relative_eq!(g.r_inner, 7.0, epsilon = 1e-12);
        assert_relative_eq!(g.r_outer, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn geometry_rejects_bad_ratio() {
        for h in [0.0, 1.0, -0.2, 1.5, f64::NAN] {
            assert!(matches!(AnnulusGeometry::new(h), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn couette_coefficients_h_half() {
        let re = 88.1;
        let p = CouetteProfile::new(AnnulusGeometry::new(0.5).unwrap(), re).unwrap();
        assert_relative_eq!(p.coeff_a, -re / 3.0, max_relative = 1e-14);
        assert_relative_eq!(p.coeff_b, 4.0 * re / 3.0, max_relative = 1e-14);
        let mid = p.eval(1.5).unwrap();
        assert_relative_eq!(mid, -re / 3.0 * 1.5 + (4.0 * re / 3.0) / 1.5, max_relative = 1e-14);
        assert!(p.eval(0.5).is_err());
        assert!(p.eval(2.5).is_err());
    }

    #[test]
    fn zero_reynolds() {
        let p = CouetteProfile::new(AnnulusGeometry::new(0.5).unwrap(), 0.0).unwrap();
        assert_eq!(p.coeff_a, 0.0);
        assert_eq!(p.velocity(1.3), 0.0);
    }

    proptest! {
        #[test]
        fn boundary_conditions_hold(h in 0.05f64..0.95, re in 0.1f64..1000.0) {
            let g = AnnulusGeometry::new(h).unwrap();
            let p = CouetteProfile::new(g, re).unwrap();
            prop_assert!((p.eval(g.r_inner).unwrap() - re).abs() <= 1e-12 * re);
            prop_assert!(p.eval(g.r_outer).unwrap().abs() <= 1e-12 * re);
            let mut prev = f64::INFINITY;
            for i in 0..=50 {
                let r = g.r_inner + g.gap() * i as f64 / 50.0;
                let v = p.velocity(r);
                prop_assert!(v <= prev + 1e-12 * re);
                prev = v;
            }
        }
    }
}
