//! Chebyshev-Gauss-Lobatto collocation on the annulus gap.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meanflow::AnnulusGeometry;

pub const MIN_POINTS: usize = 16;

/// Collocation grid with radii ordered from the inner to the outer wall.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub n_r: usize,
    pub geometry: AnnulusGeometry,
    /// Chebyshev nodes on [-1, 1], ascending.
    pub x: Vec<f64>,
    pub r: Vec<f64>,
    /// d/dr
    pub d1: DMatrix<f64>,
    /// d^2/dr^2
    pub d2: DMatrix<f64>,
    /// Weights for `int f(r) r dr`; already include the factor `r`.
    pub quad_weights: Vec<f64>,
    /// Plain Clenshaw-Curtis weights for `int f(r) dr`.
    pub cc_weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridKey {
    pub n_r: usize,
}

impl RadialGrid {
    pub fn new(n_r: usize, geometry: AnnulusGeometry) -> Result<Self> {
        if n_r < MIN_POINTS {
            return Err(Error::Config(format!(
                "radial resolution n_r={n_r} below minimum {MIN_POINTS}"
            )));
        }
        let n = n_r - 1;
        let x: Vec<f64> = (0..=n)
            .map(|j| -(std::f64::consts::PI * j as f64 / n as f64).cos())
            .collect();
        let half_gap = 0.5 * geometry.gap();
        let r: Vec<f64> = x
            .iter()
            .map(|&xi| geometry.r_inner + half_gap * (xi + 1.0))
            .collect();
        let dx = chebyshev_diff_matrix(&x);
        let d1 = &dx / half_gap;
        let d2 = &d1 * &d1;
        let cc = clenshaw_curtis(n);
        let cc_weights: Vec<f64> = cc.iter().map(|w| w * half_gap).collect();
        let quad_weights = cc_weights.iter().zip(&r).map(|(w, ri)| w * ri).collect();
        Ok(Self {
            n_r,
            geometry,
            x,
            r,
            d1,
            d2,
            quad_weights,
            cc_weights,
        })
    }

    /// Number of interior nodes.
    pub fn interior(&self) -> usize {
        self.n_r - 2
    }

    /// `int f(r) r dr` over the gap.
    pub fn integrate_r(&self, f: &[f64]) -> f64 {
        self.quad_weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Barycentric weights interpolating nodal values to radius `r`.
    pub fn interpolation_weights(&self, r: f64) -> Vec<f64> {
        let xr = 2.0 * (r - self.geometry.r_inner) / self.geometry.gap() - 1.0;
        let n = self.n_r - 1;
        let mut w = vec![0.0; self.n_r];
        if let Some(j) = self.x.iter().position(|&xj| (xr - xj).abs() < 1e-14) {
            w[j] = 1.0;
            return w;
        }
        let mut total = 0.0;
        for (j, (wj, &xj)) in w.iter_mut().zip(&self.x).enumerate() {
            let mut b = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                b *= 0.5;
            }
            *wj = b / (xr - xj);
            total += *wj;
        }
        w.iter_mut().for_each(|v| *v /= total);
        w
    }

    /// Derivative of order `p` in x of the clamped interpolant `(1 - x^2) q(x)`
    /// with `q(+-1) = 0`, scaled to r. Rows span all nodes, columns the interior.
    pub(crate) fn clamped_derivatives(&self, max_order: usize) -> Vec<DMatrix<f64>> {
        let n_r = self.n_r;
        let ni = self.interior();
        let dx = chebyshev_diff_matrix(&self.x);
        let scale = 2.0 / self.geometry.gap();
        // powers of dx restricted to interior columns
        let mut powers: Vec<DMatrix<f64>> = Vec::with_capacity(max_order + 1);
        let mut full = DMatrix::<f64>::identity(n_r, n_r);
        for _ in 0..=max_order {
            powers.push(full.columns(1, ni).into_owned());
            full = &dx * &full;
        }
        let mut out = Vec::with_capacity(max_order + 1);
        for p in 0..=max_order {
            let mut m = DMatrix::<f64>::zeros(n_r, ni);
            for i in 0..n_r {
                let xi = self.x[i];
                for j in 0..ni {
                    let mut v = (1.0 - xi * xi) * powers[p][(i, j)];
                    if p >= 1 {
                        v -= 2.0 * p as f64 * xi * powers[p - 1][(i, j)];
                    }
                    if p >= 2 {
                        v -= (p * (p - 1)) as f64 * powers[p - 2][(i, j)];
                    }
                    m[(i, j)] = v * scale.powi(p as i32);
                }
            }
            out.push(m);
        }
        out
    }
}

/// Differentiation matrix for Chebyshev-Lobatto nodes in any order,
/// built from barycentric weights with the negative-sum diagonal.
pub fn chebyshev_diff_matrix(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let nn = n - 1;
    // nodes are -cos(pi j / N); barycentric weights (-1)^j delta_j
    let w: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == nn {
                0.5 * s
            } else {
                s
            }
        })
        .collect();
    let mut d = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

/// Clenshaw-Curtis weights on [-1, 1] for N+1 Lobatto nodes.
pub fn clenshaw_curtis(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    let pi = std::f64::consts::PI;
    for (j, wj) in w.iter_mut().enumerate() {
        let theta = pi * j as f64 / n as f64;
        let mut s = 0.0;
        for k in 1..=n / 2 {
            let b = if 2 * k == n { 1.0 } else { 2.0 };
            s += b / (4.0 * (k * k) as f64 - 1.0) * (2.0 * k as f64 * theta).cos();
        }
        let c = if j == 0 || j == n { 1.0 } else { 2.0 };
        *wj = c / n as f64 * (1.0 - s);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::new(n, AnnulusGeometry::new(0.5).unwrap()).unwrap()
    }

    #[test]
    fn rejects_coarse_grid() {
        let g = AnnulusGeometry::new(0.5).unwrap();
        assert!(matches!(RadialGrid::new(8, g), Err(Error::Config(_))));
    }

    #[test]
    fn endpoints_are_walls() {
        let g = grid(24);
        assert_relative_eq!(g.r[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.r[23], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn differentiates_polynomials() {
        let g = grid(32);
        let f: Vec<f64> = g.r.iter().map(|r| r * r).collect();
        let df = &g.d1 * nalgebra::DVector::from_vec(f.clone());
        for (i, r) in g.r.iter().enumerate() {
            assert!((df[i] - 2.0 * r).abs() < 1e-10);
        }
        let f5: Vec<f64> = g.r.iter().map(|r| r.powi(5)).collect();
        let d2 = &g.d2 * nalgebra::DVector::from_vec(f5);
        for (i, r) in g.r.iter().enumerate() {
            assert!((d2[i] - 20.0 * r.powi(3)).abs() < 1e-8);
        }
    }

    #[test]
    fn quadrature_moments() {
        let g = grid(48);
        let ones = vec![1.0; 48];
        assert_relative_eq!(g.integrate_r(&ones), 1.5, epsilon = 1e-13);
        let r2: Vec<f64> = g.r.iter().map(|r| r * r).collect();
        assert_relative_eq!(g.integrate_r(&r2), 3.75, epsilon = 1e-13);
    }

    #[test]
    fn clamped_interpolant_is_exact() {
        let g = grid(20);
        let ops = g.clamped_derivatives(4);
        // q(x) = (1 - x^2) x, so u(x) = (1 - x^2)^2 x = x - 2x^3 + x^5
        let xs: Vec<f64> = g.x[1..19].to_vec();
        let q = nalgebra::DVector::from_iterator(18, xs.iter().map(|x| (1.0 - x * x) * x));
        let s: f64 = 2.0;
        let exact = [
            |x: f64| x - 2.0 * x.powi(3) + x.powi(5),
            |x: f64| 1.0 - 6.0 * x * x + 5.0 * x.powi(4),
            |x: f64| -12.0 * x + 20.0 * x.powi(3),
            |x: f64| -12.0 + 60.0 * x * x,
            |x: f64| 120.0 * x,
        ];
        for (p, f) in exact.iter().enumerate() {
            let d = &ops[p] * &q;
            for (i, &x) in g.x.iter().enumerate() {
                let want = f(x) * s.powi(p as i32);
                assert!((d[i] - want).abs() < 1e-8 * (1.0 + want.abs()), "order {p} node {i}");
            }
        }
        let d1 = &ops[1] * &q;
        assert!(d1[0].abs() < 1e-10 && d1[19].abs() < 1e-10);
    }
}
