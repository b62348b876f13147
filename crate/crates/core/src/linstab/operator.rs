//! Reduced axisymmetric stability operator.
//!
//! For `k != 0` the pressure and axial velocity are eliminated in favour of
//! the radial and azimuthal velocities `(u, v)`:
//!
//! ```text
//! s L u = L^2 u - 2 k^2 (V/r) v
//! s v   = L v   - (dV/dr + V/r) u
//! ```
//!
//! with `L = D D_* - k^2`, `D_* = d/dr + 1/r`, no-slip walls `u = u' = v = 0`
//! and `w = (i/k) D_* u` from continuity. The eigenvalue `s` relates to the
//! complex frequency by `s = -i omega`, so the growth rate is `omega_i = Re s`.
//! `u` is carried as `(1 - x^2) q(x)` so both wall conditions hold exactly and
//! the system is a standard (not generalized) eigenproblem in `(q, v)`.
//!
//! The adjoint with respect to `<a, b> = int r a . conj(b) dr` swaps the two
//! coupling coefficients. At `k = 0` continuity forces `u = 0` and the
//! operator splits into two self-adjoint diffusion problems for `v` and `w`.

use nalgebra::DMatrix;

use super::grid::RadialGrid;
use crate::error::{Error, Result};
use crate::meanflow::CouetteProfile;

/// How state vectors map back to velocity profiles at the collocation nodes.
#[derive(Debug, Clone)]
pub(crate) enum FieldMap {
    /// State `(q, v)`; `clamped[p]` gives `d^p u / dr^p`.
    Wave {
        clamped: Vec<DMatrix<f64>>,
        dirichlet: [DMatrix<f64>; 2],
    },
    /// State `(v, w)`, both Dirichlet.
    Mean { dirichlet: [DMatrix<f64>; 2] },
}

/// Direct and adjoint operators for one axial wavenumber.
#[derive(Debug, Clone)]
pub struct StabilityOperator {
    pub k: f64,
    pub direct: DMatrix<f64>,
    pub adjoint: DMatrix<f64>,
    pub(crate) fields: FieldMap,
}

impl StabilityOperator {
    pub fn dim(&self) -> usize {
        self.direct.nrows()
    }

    pub fn is_mean(&self) -> bool {
        matches!(self.fields, FieldMap::Mean { .. })
    }
}

fn dirichlet_maps(grid: &RadialGrid) -> [DMatrix<f64>; 2] {
    let n_r = grid.n_r;
    let ni = grid.interior();
    let embed = DMatrix::<f64>::identity(n_r, n_r).columns(1, ni).into_owned();
    let d1 = grid.d1.columns(1, ni).into_owned();
    [embed, d1]
}

fn interior_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    m.rows(1, n - 2).into_owned()
}

pub fn assemble_operator(grid: &RadialGrid, profile: &CouetteProfile, k: f64) -> Result<StabilityOperator> {
    if !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be finite, got {k}")));
    }
    if (profile.geometry.h - grid.geometry.h).abs() > 1e-14 {
        return Err(Error::Config("grid and profile use different geometries".into()));
    }
    let ni = grid.interior();
    let r_int: Vec<f64> = grid.r[1..grid.n_r - 1].to_vec();
    let [embed, d1v] = dirichlet_maps(grid);
    let d2v = grid.d2.columns(1, ni).into_owned();
    let e_i = interior_rows(&embed);
    let d1_i = interior_rows(&d1v);
    let d2_i = interior_rows(&d2v);
    let k2 = k * k;

    // Dirichlet Laplacian-type operators on interior values
    let mut lap_v = DMatrix::<f64>::zeros(ni, ni); // D D_* - k^2
    let mut lap_w = DMatrix::<f64>::zeros(ni, ni); // D_* D - k^2
    for i in 0..ni {
        let r = r_int[i];
        for j in 0..ni {
            let base = d2_i[(i, j)] + d1_i[(i, j)] / r;
            lap_v[(i, j)] = base - e_i[(i, j)] * (1.0 / (r * r) + k2);
            lap_w[(i, j)] = base - e_i[(i, j)] * k2;
        }
    }

    if k == 0.0 {
        let mut direct = DMatrix::<f64>::zeros(2 * ni, 2 * ni);
        direct.view_mut((0, 0), (ni, ni)).copy_from(&lap_v);
        direct.view_mut((ni, ni), (ni, ni)).copy_from(&lap_w);
        return Ok(StabilityOperator {
            k,
            adjoint: direct.clone(),
            direct,
            fields: FieldMap::Mean {
                dirichlet: dirichlet_maps(grid),
            },
        });
    }

    let clamped = grid.clamped_derivatives(4);
    let c: Vec<DMatrix<f64>> = clamped.iter().map(interior_rows).collect();
    let mut lu = DMatrix::<f64>::zeros(ni, ni);
    let mut lu2 = DMatrix::<f64>::zeros(ni, ni);
    for i in 0..ni {
        let r = r_int[i];
        let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
        for j in 0..ni {
            let (u0, u1, u2, u3, u4) = (c[0][(i, j)], c[1][(i, j)], c[2][(i, j)], c[3][(i, j)], c[4][(i, j)]);
            let t = u2 + u1 / r - u0 / r2;
            let t2 = u4 + 2.0 * u3 / r - 3.0 * u2 / r2 + 3.0 * u1 / r3 - 3.0 * u0 / r4;
            lu[(i, j)] = t - k2 * u0;
            lu2[(i, j)] = t2 - 2.0 * k2 * t + k2 * k2 * u0;
        }
    }
    let lu_inv = lu
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical(format!("singular radial operator at k={k}")))?;
    let a_uu = &lu_inv * &lu2;

    let omega = |r: f64| profile.angular_velocity(r);
    let two_a = profile.vorticity();

    let build = |c_uv: &dyn Fn(f64) -> f64, c_vu: &dyn Fn(f64) -> f64| {
        // s L u = L^2 u + k^2 c_u(r) v  ;  s v = L v + c_v(r) u
        let mut coup_u = DMatrix::<f64>::zeros(ni, ni);
        let mut coup_v = DMatrix::<f64>::zeros(ni, ni);
        for i in 0..ni {
            coup_u[(i, i)] = k2 * c_uv(r_int[i]);
            for j in 0..ni {
                coup_v[(i, j)] = c_vu(r_int[i]) * c[0][(i, j)];
            }
        }
        let a_uv = &lu_inv * coup_u;
        let mut m = DMatrix::<f64>::zeros(2 * ni, 2 * ni);
        m.view_mut((0, 0), (ni, ni)).copy_from(&a_uu);
        m.view_mut((0, ni), (ni, ni)).copy_from(&a_uv);
        m.view_mut((ni, 0), (ni, ni)).copy_from(&coup_v);
        m.view_mut((ni, ni), (ni, ni)).copy_from(&lap_v);
        m
    };
    let direct = build(&|r| -2.0 * omega(r), &|_| -two_a);
    let adjoint = build(&|_| two_a, &|r| 2.0 * omega(r));
    Ok(StabilityOperator {
        k,
        direct,
        adjoint,
        fields: FieldMap::Wave {
            clamped,
            dirichlet: [embed, d1v],
        },
    })
}
