//! Pseudo-spectral evaluation of the wave-interaction convolution.
//!
//! Velocity components and their derivatives are synthesized on an axial
//! grid spanning one period `2 pi / dk`, multiplied pointwise, transformed
//! back and projected onto the adjoint eigenfunctions. The transform length
//! exceeds `3 k_max / dk`, so no product harmonic aliases onto a retained
//! wavenumber. Edge wavenumbers enter with half weight to reproduce the
//! trapezoidal convolution exactly.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::NonlinearTerm;
use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::linstab::{EigenBasis, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Smallest transform length free of aliasing for `half` positive wavenumbers.
pub fn min_transform_len(half: usize) -> usize {
    3 * half + 1
}

/// Transform length for a padding factor relative to the `2 half + 1` retained
/// wavenumbers (3/2 is the usual rule).
pub fn transform_len(half: usize, padding: f64) -> usize {
    let n = ((2 * half + 1) as f64 * padding).ceil() as usize;
    n + (n % 2)
}

pub struct PseudoSpectral {
    basis: Arc<EigenBasis>,
    nfft: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// spectral coefficients `[field][n]`, n = 0..=half, at one radial node
    spec: Vec<Vec<C64>>,
    bufs: Vec<Vec<C64>>,
    scratch: Vec<C64>,
}

impl std::fmt::Debug for PseudoSpectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PseudoSpectral").field("nfft", &self.nfft).finish()
    }
}

// field slots
const U: usize = 0;
const DU: usize = 1;
const UZ: usize = 2;
const V: usize = 3;
const DV: usize = 4;
const VZ: usize = 5;
const W: usize = 6;
const DW: usize = 7;
const WZ: usize = 8;
const NFIELDS: usize = 9;

impl PseudoSpectral {
    pub fn new(basis: Arc<EigenBasis>, nfft: usize) -> Result<Self> {
        let half = basis.kgrid.half;
        if nfft < min_transform_len(half) {
            return Err(Error::Config(format!(
                "axial transform length {nfft} aliases quadratic products; need at least {}",
                min_transform_len(half)
            )));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(nfft);
        let inv = planner.plan_fft_inverse(nfft);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Ok(Self {
            spec: vec![vec![ZERO; half + 1]; NFIELDS],
            bufs: vec![vec![ZERO; nfft]; 5],
            scratch: vec![ZERO; scratch_len],
            basis,
            nfft,
            fwd,
            inv,
        })
    }

    pub fn with_padding(basis: Arc<EigenBasis>, padding: f64) -> Result<Self> {
        let n = transform_len(basis.kgrid.half, padding);
        Self::new(basis, n)
    }

    pub fn transform_len(&self) -> usize {
        self.nfft
    }

    /// Nonlinear forcing for every wavenumber (negative ones by conjugation).
    pub fn rhs(&mut self, state: &AmplitudeField) -> Result<AmplitudeField> {
        let mut out = AmplitudeField::zeros(self.basis.kgrid, self.basis.mode_count());
        self.eval_into(state, &mut out)?;
        Ok(out)
    }

    fn eval_into(&mut self, state: &AmplitudeField, out: &mut AmplitudeField) -> Result<()> {
        let basis = Arc::clone(&self.basis);
        let g = basis.kgrid;
        let mm = basis.mode_count();
        state.check_shape(&g, mm)?;
        out.check_shape(&g, mm)?;
        out.t = state.t;
        out.a.iter_mut().for_each(|z| *z = ZERO);
        let half = g.half;
        let nfft = self.nfft;
        let grid = &basis.grid;
        let inv_n = 1.0 / nfft as f64;

        // active wavenumbers
        let active: Vec<usize> = (0..=half)
            .filter(|&n| state.at(n as i64).iter().any(|z| *z != ZERO))
            .collect();
        if active.is_empty() {
            return Ok(());
        }
        // outputs reachable as sums of two active (signed) wavenumbers
        let mut reach = vec![false; half + 1];
        for &a in &active {
            for &b in &active {
                for n in [a + b, a.abs_diff(b)] {
                    if n <= half {
                        reach[n] = true;
                    }
                }
            }
        }

        for i in 1..grid.n_r - 1 {
            let r = grid.r[i];
            // synthesis of spectral coefficients at this node
            for f in self.spec.iter_mut() {
                f.iter_mut().for_each(|z| *z = ZERO);
            }
            for &n in &active {
                let amps = state.at(n as i64);
                let modes = basis.at(n as i64);
                let edge = if n == half { 0.5 } else { 1.0 };
                let scale = g.dk * edge;
                let (mut u, mut du, mut v, mut dv, mut w, mut dw) = (ZERO, ZERO, ZERO, ZERO, ZERO, ZERO);
                for (a, mode) in amps.iter().zip(modes) {
                    if *a == ZERO {
                        continue;
                    }
                    let p = &mode.profile;
                    u += a * p.u[i];
                    du += a * p.du[i];
                    v += a * p.v[i];
                    dv += a * p.dv[i];
                    w += a * p.w[i];
                    dw += a * p.dw[i];
                }
                let ik = C64::new(0.0, g.k_of(n as i64));
                let s = &mut self.spec;
                s[U][n] = u * scale;
                s[DU][n] = du * scale;
                s[UZ][n] = u * scale * ik;
                s[V][n] = v * scale;
                s[DV][n] = dv * scale;
                s[VZ][n] = v * scale * ik;
                s[W][n] = w * scale;
                s[DW][n] = dw * scale;
                s[WZ][n] = w * scale * ik;
            }
            // pack pairs of real fields into complex transforms
            let pairs: [(usize, Option<usize>); 5] = [
                (U, Some(DU)),
                (UZ, Some(V)),
                (DV, Some(VZ)),
                (W, Some(DW)),
                (WZ, None),
            ];
            for (b, (fa, fb)) in pairs.iter().enumerate() {
                let buf = &mut self.bufs[b];
                buf.iter_mut().for_each(|z| *z = ZERO);
                for n in 0..=half {
                    let a = self.spec[*fa][n];
                    let bb = fb.map(|f| self.spec[f][n]).unwrap_or(ZERO);
                    // H_n = A_n + i B_n,  H_{-n} = conj(A_n) + i conj(B_n)
                    buf[n] += a + C64::i() * bb;
                    if n > 0 {
                        buf[nfft - n] += a.conj() + C64::i() * bb.conj();
                    }
                }
                self.inv.process_with_scratch(buf, &mut self.scratch);
            }
            // pointwise products; bufs[0] <- Nu + i Nv, bufs[1] <- Nw
            for j in 0..nfft {
                let (u, du) = (self.bufs[0][j].re, self.bufs[0][j].im);
                let (uz, v) = (self.bufs[1][j].re, self.bufs[1][j].im);
                let (dv, vz) = (self.bufs[2][j].re, self.bufs[2][j].im);
                let (w, dw) = (self.bufs[3][j].re, self.bufs[3][j].im);
                let wz = self.bufs[4][j].re;
                let nu = -(u * du + w * uz - v * v / r);
                let nv = -(u * dv + w * vz + u * v / r);
                let nw = -(u * dw + w * wz);
                self.bufs[0][j] = C64::new(nu, nv);
                self.bufs[1][j] = C64::new(nw, 0.0);
            }
            for b in 0..2 {
                let buf = &mut self.bufs[b];
                self.fwd.process_with_scratch(buf, &mut self.scratch);
            }
            let edge_fix = self.edge_correction(r);
            // project each output wavenumber onto the adjoints
            let wq = grid.quad_weights[i] / g.dk;
            for n in (0..=half).filter(|&n| reach[n]) {
                let h = self.bufs[0][n] * inv_n;
                let hm = if n == 0 { h } else { self.bufs[0][nfft - n] * inv_n };
                let mut fu = 0.5 * (h + hm.conj());
                let mut fv = (h - hm.conj()) * C64::new(0.0, -0.5);
                let mut fw = self.bufs[1][n] * inv_n;
                if n == 0 {
                    fu += edge_fix[0];
                    fv += edge_fix[1];
                    fw += edge_fix[2];
                }
                let start = out.idx(n as i64, 1);
                for (m, mode) in basis.at(n as i64).iter().enumerate() {
                    let adj = &mode.adjoint;
                    out.a[start + m] += wq * (fu * adj.u[i].conj() + fv * adj.v[i].conj() + fw * adj.w[i].conj());
                }
            }
        }
        // k = 0 forcing is real; negative wavenumbers mirror positive ones
        out.enforce_reality();
        Ok(())
    }

    /// Mean-flow term from the two edge components, which the half-weighted
    /// synthesis counts at a quarter instead of half weight.
    fn edge_correction(&self, r: f64) -> [C64; 3] {
        let h = self.basis.kgrid.half;
        let s = &self.spec;
        let mut acc = [ZERO; 3];
        if s[U][h] == ZERO && s[V][h] == ZERO && s[W][h] == ZERO {
            return acc;
        }
        // ordered pairs (h, -h) and (-h, h); component at -h is the conjugate
        for sign in [1.0, -1.0] {
            let pick = |f: usize, positive: bool| if positive { s[f][h] } else { s[f][h].conj() };
            let a_pos = sign > 0.0;
            let b_pos = !a_pos;
            let (ua, va, wa) = (pick(U, a_pos), pick(V, a_pos), pick(W, a_pos));
            let (ub, vb) = (pick(U, b_pos), pick(V, b_pos));
            let (dub, dvb, dwb) = (pick(DU, b_pos), pick(DV, b_pos), pick(DW, b_pos));
            let (uzb, vzb, wzb) = (pick(UZ, b_pos), pick(VZ, b_pos), pick(WZ, b_pos));
            acc[0] += -(ua * dub + wa * uzb - va * vb / r);
            acc[1] += -(ua * dvb + wa * vzb + va * ub / r);
            acc[2] += -(ua * dwb + wa * wzb);
        }
        acc
    }
}

impl NonlinearTerm for PseudoSpectral {
    fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    fn eval(&mut self, state: &AmplitudeField, out: &mut AmplitudeField) -> Result<()> {
        self.eval_into(state, out)
    }
}
