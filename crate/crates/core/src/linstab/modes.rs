//! Eigenmodes of the stability operator and their adjoints.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::operator::{FieldMap, StabilityOperator};
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default spurious-eigenvalue cutoff on `|omega|` in viscous units.
pub const SPURIOUS_CUTOFF: f64 = 1e4;

/// Velocity profile `(u, v, w)` with radial derivatives, sampled at the
/// collocation nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    pub u: Vec<C64>,
    pub v: Vec<C64>,
    pub w: Vec<C64>,
    pub du: Vec<C64>,
    pub dv: Vec<C64>,
    pub dw: Vec<C64>,
}

impl Profiles {
    pub fn zeros(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            u: z.clone(),
            v: z.clone(),
            w: z.clone(),
            du: z.clone(),
            dv: z.clone(),
            dw: z,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn conj(&self) -> Self {
        let c = |x: &Vec<C64>| x.iter().map(|z| z.conj()).collect::<Vec<_>>();
        Self {
            u: c(&self.u),
            v: c(&self.v),
            w: c(&self.w),
            du: c(&self.du),
            dv: c(&self.dv),
            dw: c(&self.dw),
        }
    }

    pub fn scale(&mut self, s: C64) {
        for f in [&mut self.u, &mut self.v, &mut self.w, &mut self.du, &mut self.dv, &mut self.dw] {
            for z in f.iter_mut() {
                *z *= s;
            }
        }
    }

    /// `acc += s * self`
    pub fn axpy_into(&self, s: C64, acc: &mut Profiles) {
        let pairs = [
            (&self.u, &mut acc.u),
            (&self.v, &mut acc.v),
            (&self.w, &mut acc.w),
            (&self.du, &mut acc.du),
            (&self.dv, &mut acc.dv),
            (&self.dw, &mut acc.dw),
        ];
        for (src, dst) in pairs {
            for (d, x) in dst.iter_mut().zip(src) {
                *d += s * x;
            }
        }
    }
}

/// `int r a . conj(b) dr` over the three velocity components.
pub fn inner(grid: &RadialGrid, a: &Profiles, b: &Profiles) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for i in 0..grid.n_r {
        let w = grid.quad_weights[i];
        s += w * (a.u[i] * b.u[i].conj() + a.v[i] * b.v[i].conj() + a.w[i] * b.w[i].conj());
    }
    s
}

/// `int r |a|^2 dr`
pub fn energy_norm(grid: &RadialGrid, a: &Profiles) -> f64 {
    inner(grid, a, a).re
}

/// One linear eigenmode at axial wavenumber `k` (azimuthal number 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenMode {
    pub k: f64,
    /// 1-based mode index within its wavenumber.
    pub m: usize,
    /// `omega = omega_r + i omega_i`; `dA/dt = -i omega A`.
    pub omega: C64,
    pub profile: Profiles,
    pub adjoint: Profiles,
}

impl EigenMode {
    pub fn growth_rate(&self) -> f64 {
        self.omega.im
    }

    /// Linear evolution exponent `-i omega`.
    pub fn exponent(&self) -> C64 {
        -C64::i() * self.omega
    }

    /// The partner mode at `-k`.
    pub fn conjugate(&self) -> EigenMode {
        EigenMode {
            k: -self.k,
            m: self.m,
            omega: -self.omega.conj(),
            profile: self.profile.conj(),
            adjoint: self.adjoint.conj(),
        }
    }

    /// Max over interior nodes of `|(1/r) d(r u)/dr + i k w|` relative to the
    /// profile's largest component.
    pub fn continuity_residual(&self, grid: &RadialGrid) -> f64 {
        let p = &self.profile;
        let scale = p
            .u
            .iter()
            .chain(&p.v)
            .chain(&p.w)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-300);
        let ik = C64::new(0.0, self.k);
        (1..grid.n_r - 1)
            .map(|i| (p.du[i] + p.u[i] / grid.r[i] + ik * p.w[i]).norm())
            .fold(0.0, f64::max)
            / scale
    }

    pub fn wall_residual(&self) -> f64 {
        let p = &self.profile;
        let n = p.len() - 1;
        [p.u[0], p.u[n], p.v[0], p.v[n], p.w[0], p.w[n]]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// All eigenvalues `s` of the direct operator (unsorted).
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<C64>> {
    let schur = nalgebra::Schur::try_new(matrix.clone(), 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical(format!("Schur iteration failed for {}x{} operator", matrix.nrows(), matrix.ncols())))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenvalues `s` sorted as modes: by descending `Re s` (growth rate), ties
/// by descending `omega_r = -Im s`, with `|s| > cutoff` removed.
pub fn sorted_spectrum(matrix: &DMatrix<f64>, cutoff: f64) -> Result<Vec<C64>> {
    let mut s: Vec<C64> = eigenvalues(matrix)?
        .into_iter()
        .filter(|z| z.norm() <= cutoff && z.re.is_finite() && z.im.is_finite())
        .collect();
    s.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(s)
}

/// Eigenvector of `matrix` for the eigenvalue nearest `shift`, by inverse
/// iteration.
pub(crate) fn inverse_iteration(matrix: &DMatrix<f64>, shift: C64) -> Result<DVector<C64>> {
    let n = matrix.nrows();
    let eps = 1e-11 * (1.0 + shift.norm());
    let sigma = shift + C64::new(eps, eps);
    let mut a: DMatrix<C64> = matrix.map(|x| C64::new(x, 0.0));
    for i in 0..n {
        a[(i, i)] -= sigma;
    }
    let lu = a.lu();
    let mut x = DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 + 0.01 * (i as f64).sin(), 0.003 * (i as f64).cos()));
    for _ in 0..3 {
        let y = lu
            .solve(&x)
            .ok_or_else(|| Error::Numerical(format!("inverse iteration solve failed near s={shift}")))?;
        let nrm = y.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::Numerical(format!("inverse iteration diverged near s={shift}")));
        }
        x = y / C64::new(nrm, 0.0);
    }
    Ok(x)
}

/// Velocity profiles for a state vector of the operator.
pub(crate) fn profiles_from_state(grid: &RadialGrid, op: &StabilityOperator, x: &DVector<C64>) -> Profiles {
    let ni = grid.interior();
    let apply = |m: &DMatrix<f64>, seg: usize| -> Vec<C64> {
        (0..grid.n_r)
            .map(|i| (0..ni).map(|j| x[seg * ni + j] * m[(i, j)]).sum())
            .collect()
    };
    match &op.fields {
        FieldMap::Wave { clamped, dirichlet } => {
            let u = apply(&clamped[0], 0);
            let du = apply(&clamped[1], 0);
            let d2u = apply(&clamped[2], 0);
            let v = apply(&dirichlet[0], 1);
            let dv = apply(&dirichlet[1], 1);
            let ik = C64::new(0.0, 1.0 / op.k);
            let mut w = Vec::with_capacity(grid.n_r);
            let mut dw = Vec::with_capacity(grid.n_r);
            for i in 0..grid.n_r {
                let r = grid.r[i];
                w.push(ik * (du[i] + u[i] / r));
                dw.push(ik * (d2u[i] + du[i] / r - u[i] / (r * r)));
            }
            Profiles { u, v, w, du, dv, dw }
        }
        FieldMap::Mean { dirichlet } => {
            let z = vec![C64::new(0.0, 0.0); grid.n_r];
            Profiles {
                u: z.clone(),
                du: z,
                v: apply(&dirichlet[0], 0),
                dv: apply(&dirichlet[1], 0),
                w: apply(&dirichlet[0], 1),
                dw: apply(&dirichlet[1], 1),
            }
        }
    }
}

/// Unit energy norm, phase fixed so the dominant azimuthal (or, failing that,
/// radial or axial) sample is real and positive.
fn normalize(grid: &RadialGrid, p: &mut Profiles) {
    let nrm = energy_norm(grid, p).sqrt();
    p.scale(C64::new(1.0 / nrm, 0.0));
    let argmax = |f: &[C64]| {
        f.iter()
            .enumerate()
            .fold((0usize, 0.0f64), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc })
    };
    let (iv, mv) = argmax(&p.v);
    let (iu, mu) = argmax(&p.u);
    let (iw, _) = argmax(&p.w);
    let anchor = if mv > 1e-3 * mu && mv > 1e-12 {
        p.v[iv]
    } else if mu > 1e-12 {
        p.u[iu]
    } else {
        p.w[iw]
    };
    let phase = anchor.conj() / anchor.norm();
    p.scale(phase);
}

/// The `count` least-stable modes at the operator's wavenumber, without
/// adjoints.
pub fn solve_modes(grid: &RadialGrid, op: &StabilityOperator, count: usize, cutoff: f64) -> Result<Vec<EigenMode>> {
    if count == 0 {
        return Err(Error::Config("mode count must be at least 1".into()));
    }
    if count > op.dim() / 2 {
        return Err(Error::Config(format!(
            "requested {count} modes but the operator resolves at most {}",
            op.dim() / 2
        )));
    }
    let spectrum = sorted_spectrum(&op.direct, cutoff)?;
    let mut modes = Vec::with_capacity(count);
    for s in spectrum.iter().copied() {
        if modes.len() == count {
            break;
        }
        let x = inverse_iteration(&op.direct, s)?;
        let mut profile = profiles_from_state(grid, op, &x);
        normalize(grid, &mut profile);
        let mode = EigenMode {
            k: op.k,
            m: modes.len() + 1,
            omega: C64::i() * s,
            adjoint: Profiles::zeros(grid.n_r),
            profile,
        };
        if mode.continuity_residual(grid) > 1e-8 {
            log::warn!("dropping k={} eigenvalue {s}: continuity residual too large", op.k);
            continue;
        }
        modes.push(mode);
    }
    if modes.len() < count {
        return Err(Error::Numerical(format!(
            "only {} admissible modes at k={} (wanted {count})",
            modes.len(),
            op.k
        )));
    }
    Ok(modes)
}

/// Fills adjoint profiles and scales them so `<mode_m, adj_m> = 1`.
pub fn adjoint_modes(grid: &RadialGrid, op: &StabilityOperator, modes: &mut [EigenMode]) -> Result<()> {
    for mode in modes.iter_mut() {
        let s = mode.exponent();
        let mut adj = if op.is_mean() {
            mode.profile.clone()
        } else {
            let y = inverse_iteration(&op.adjoint, s.conj())?;
            profiles_from_state(grid, op, &y)
        };
        let an = energy_norm(grid, &adj).sqrt();
        adj.scale(C64::new(1.0 / an, 0.0));
        let p = inner(grid, &mode.profile, &adj);
        if p.norm() < 1e-10 {
            return Err(Error::Degenerate {
                k: op.k,
                m: mode.m,
                product: p.norm(),
            });
        }
        adj.scale(C64::new(1.0, 0.0) / p.conj());
        mode.adjoint = adj;
    }
    Ok(())
}
