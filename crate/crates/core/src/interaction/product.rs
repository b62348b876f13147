//! Quadratic convective term between two axisymmetric Fourier components.

use crate::linstab::{Profiles, RadialGrid, C64};

/// Complex radial profiles of a forcing field `(f_r, f_phi, f_z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub w: Vec<C64>,
}

impl Forcing {
    pub fn zeros(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            u: z.clone(),
            v: z.clone(),
            w: z,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u
            .iter()
            .chain(&self.v)
            .chain(&self.w)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `-(a . grad) b` for `a ~ e^{i k_a z}`, `b ~ e^{i k_b z}`; the result carries
/// `e^{i (k_a + k_b) z}`.
pub fn convective_product(a: &Profiles, b: &Profiles, k_b: f64, grid: &RadialGrid) -> Forcing {
    let n = grid.n_r;
    let mut out = Forcing::zeros(n);
    let ikb = C64::new(0.0, k_b);
    for i in 0..n {
        let r = grid.r[i];
        let (ua, va, wa) = (a.u[i], a.v[i], a.w[i]);
        let wz = wa * ikb;
        out.u[i] = -(ua * b.du[i] + wz * b.u[i] - va * b.v[i] / r);
        out.v[i] = -(ua * b.dv[i] + wz * b.v[i] + va * b.u[i] / r);
        out.w[i] = -(ua * b.dw[i] + wz * b.w[i]);
    }
    out
}

/// `int r f . conj(adj) dr`: the amplitude forcing on the mode whose adjoint is `adj`.
pub fn project(grid: &RadialGrid, f: &Forcing, adj: &Profiles) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..grid.n_r {
        s += grid.quad_weights[i] * (f.u[i] * adj.u[i].conj() + f.v[i] * adj.v[i].conj() + f.w[i] * adj.w[i].conj());
    }
    s
}

/// Trapezoidal weight for the pair `(n1, n2)` in the wavenumber convolution:
/// half weight when either factor sits on the truncation edge.
#[inline]
pub fn trapezoid_weight(dk: f64, half: usize, n1: i64, n2: i64) -> f64 {
    let h = half as u64;
    if n1.unsigned_abs() == h || n2.unsigned_abs() == h {
        0.5 * dk
    } else {
        dk
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanflow::AnnulusGeometry;
    use proptest::prelude::*;

    type Field = fn(f64) -> (C64, C64);

    struct Analytic {
        u: Field,
        v: Field,
        w: Field,
        k: f64,
    }

    fn s(x: f64) -> f64 {
        (std::f64::consts::PI * (x - 1.0)).sin()
    }
    fn ds(x: f64) -> f64 {
        std::f64::consts::PI * (std::f64::consts::PI * (x - 1.0)).cos()
    }

    fn field_a() -> Analytic {
        Analytic {
            u: |r| (C64::new(0.7, -0.2) * s(r) * s(r), C64::new(0.7, -0.2) * 2.0 * s(r) * ds(r)),
            v: |r| (C64::new(-0.3, 0.9) * s(r) * r, C64::new(-0.3, 0.9) * (ds(r) * r + s(r))),
            w: |r| (C64::new(0.1, 0.4) * (r * r - 1.0), C64::new(0.1, 0.4) * 2.0 * r),
            k: 1.3,
        }
    }

    fn field_b() -> Analytic {
        Analytic {
            u: |r| (C64::new(-0.5, 0.3) * s(r) * r * r, C64::new(-0.5, 0.3) * (ds(r) * r * r + 2.0 * r * s(r))),
            v: |r| (C64::new(1.1, 0.2) * s(r), C64::new(1.1, 0.2) * ds(r)),
            w: |r| (C64::new(0.6, -0.8) * r.ln(), C64::new(0.6, -0.8) / r),
            k: -2.1,
        }
    }

    fn on_grid(f: &Analytic, g: &RadialGrid) -> Profiles {
        let mut p = Profiles::zeros(g.n_r);
        for (i, &r) in g.r.iter().enumerate() {
            (p.u[i], p.du[i]) = (f.u)(r);
            (p.v[i], p.dv[i]) = (f.v)(r);
            (p.w[i], p.dw[i]) = (f.w)(r);
        }
        p
    }

    /// Cartesian components of `f(r) e^{ikz}` at `(x, y, z)`.
    fn cartesian(f: &Analytic, x: [f64; 3]) -> [C64; 3] {
        let r = x[0].hypot(x[1]);
        let (c, sn) = (x[0] / r, x[1] / r);
        let e = C64::from_polar(1.0, f.k * x[2]);
        let (u, v, w) = ((f.u)(r).0 * e, (f.v)(r).0 * e, (f.w)(r).0 * e);
        [u * c - v * sn, u * sn + v * c, w]
    }

    #[test]
    fn matches_cartesian_finite_differences() {
        let g = RadialGrid::new(24, AnnulusGeometry::new(0.5).unwrap()).unwrap();
        let (a, b) = (field_a(), field_b());
        let prod = convective_product(&on_grid(&a, &g), &on_grid(&b, &g), b.k, &g);
        let (theta, z, h) = (0.3f64, 0.2f64, 1e-5);
        for i in [3, 9, 15, 20] {
            let r = g.r[i];
            let p = [r * theta.cos(), r * theta.sin(), z];
            let av = cartesian(&a, p);
            let mut f = [C64::new(0.0, 0.0); 3];
            for j in 0..3 {
                let (mut pp, mut pm) = (p, p);
                pp[j] += h;
                pm[j] -= h;
                let (bp, bm) = (cartesian(&b, pp), cartesian(&b, pm));
                for c in 0..3 {
                    f[c] -= av[j] * (bp[c] - bm[c]) / (2.0 * h);
                }
            }
            let (c, sn) = (theta.cos(), theta.sin());
            let cyl = [f[0] * c + f[1] * sn, -f[0] * sn + f[1] * c, f[2]];
            let e = C64::from_polar(1.0, (a.k + b.k) * z);
            let got = [prod.u[i] * e, prod.v[i] * e, prod.w[i] * e];
            for c in 0..3 {
                assert!((got[c] - cyl[c]).norm() < 1e-7, "node {i} comp {c}: {} vs {}", got[c], cyl[c]);
            }
        }
    }

    #[test]
    fn edge_weights() {
        assert_eq!(trapezoid_weight(0.25, 8, 3, -2), 0.25);
        assert_eq!(trapezoid_weight(0.25, 8, 8, -2), 0.125);
        assert_eq!(trapezoid_weight(0.25, 8, 3, -8), 0.125);
    }

    fn profiles(n: usize, seed: &[f64]) -> Profiles {
        let mut p = Profiles::zeros(n);
        for i in 0..n {
            let c = |j: usize| C64::new(seed[j % seed.len()] * (i as f64 + 1.0).sin(), seed[(j + 1) % seed.len()]);
            (p.u[i], p.v[i], p.w[i]) = (c(0), c(1), c(2));
            (p.du[i], p.dv[i], p.dw[i]) = (c(3), c(4), c(5));
        }
        p
    }

    proptest! {
        #[test]
        fn bilinear(
            sa in prop::collection::vec(-1.0f64..1.0, 6),
            sb in prop::collection::vec(-1.0f64..1.0, 6),
            sc in prop::collection::vec(-1.0f64..1.0, 6),
            alpha in -2.0f64..2.0,
            k in -3.0f64..3.0,
        ) {
            let g = RadialGrid::new(16, AnnulusGeometry::new(0.5).unwrap()).unwrap();
            let (a, b, c) = (profiles(16, &sa), profiles(16, &sb), profiles(16, &sc));
            let mut ab = a.clone();
            b.axpy_into(C64::new(alpha, 0.0), &mut ab);
            let lhs = convective_product(&ab, &c, k, &g);
            let x = convective_product(&a, &c, k, &g);
            let y = convective_product(&b, &c, k, &g);
            for i in 0..16 {
                prop_assert!((lhs.u[i] - x.u[i] - y.u[i] * alpha).norm() < 1e-12);
                prop_assert!((lhs.v[i] - x.v[i] - y.v[i] * alpha).norm() < 1e-12);
                prop_assert!((lhs.w[i] - x.w[i] - y.w[i] * alpha).norm() < 1e-12);
            }
        }
    }
}
