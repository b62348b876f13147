//! Precomputed interaction coefficients and direct convolution.

use std::sync::Arc;

use super::product::{convective_product, project, trapezoid_weight};
use super::NonlinearTerm;
use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::linstab::{BasisKey, EigenBasis, C64};

/// Default memory budget for a full tensor.
pub const DEFAULT_TENSOR_BUDGET_BYTES: usize = 256 << 20;

/// Estimated bytes for a full tensor on `slots` wavenumbers and `modes` modes.
pub fn estimated_bytes(slots: usize, modes: usize) -> usize {
    slots
        .saturating_mul(slots)
        .saturating_mul(modes.pow(3))
        .saturating_mul(std::mem::size_of::<C64>())
}

/// Interaction coefficient for `(k_1, m_1) + (k_2, m_2) -> (k_1 + k_2, m)`.
pub fn coeff_b(basis: &EigenBasis, n1: i64, m1: usize, n2: i64, m2: usize, m: usize) -> Result<C64> {
    let g = &basis.kgrid;
    let n = n1 + n2;
    for (idx, label) in [(n1, "k1"), (n2, "k2"), (n, "k1+k2")] {
        if !g.contains_index(idx) {
            return Err(Error::Config(format!("{label} index {idx} is off the wavenumber grid")));
        }
    }
    let mm = basis.mode_count();
    if [m1, m2, m].iter().any(|&x| x == 0 || x > mm) {
        return Err(Error::Config(format!("mode labels ({m1},{m2},{m}) outside 1..={mm}")));
    }
    let a = basis.mode(n1, m1);
    let b = basis.mode(n2, m2);
    let f = convective_product(&a.profile, &b.profile, b.k, &basis.grid);
    Ok(project(&basis.grid, &f, &basis.mode(n, m).adjoint))
}

/// All coefficients `b(k_1, k_2; m_1, m_2 -> m)` with `k_1 + k_2` on the grid.
#[derive(Debug, Clone)]
pub struct InteractionTensor {
    pub key: BasisKey,
    basis: Arc<EigenBasis>,
    modes: usize,
    /// `entries[((out_slot * K + slot1) * M + m1) * M + m2) * M + m]`; zero
    /// where `k - k_1` is off the grid.
    entries: Vec<C64>,
}

impl InteractionTensor {
    pub fn build(basis: Arc<EigenBasis>, budget_bytes: usize) -> Result<Self> {
        let kk = basis.kgrid.len();
        let mm = basis.mode_count();
        let need = estimated_bytes(kk, mm);
        if need > budget_bytes {
            return Err(Error::Config(format!(
                "full interaction tensor needs ~{} MiB (K={kk}, M={mm}), budget {} MiB; use the pseudo-spectral path",
                need >> 20,
                budget_bytes >> 20
            )));
        }
        let g = basis.kgrid;
        let mut entries = vec![C64::new(0.0, 0.0); kk * kk * mm * mm * mm];
        for out in 0..kk {
            let n = g.signed(out);
            for s1 in 0..kk {
                let n1 = g.signed(s1);
                let n2 = n - n1;
                if !g.contains_index(n2) {
                    continue;
                }
                for m1 in 1..=mm {
                    let a = basis.mode(n1, m1);
                    for m2 in 1..=mm {
                        let b = basis.mode(n2, m2);
                        let f = convective_product(&a.profile, &b.profile, b.k, &basis.grid);
                        for m in 1..=mm {
                            let idx = (((out * kk + s1) * mm + (m1 - 1)) * mm + (m2 - 1)) * mm + (m - 1);
                            entries[idx] = project(&basis.grid, &f, &basis.mode(n, m).adjoint);
                        }
                    }
                }
            }
        }
        Ok(Self {
            key: basis.key,
            modes: mm,
            basis,
            entries,
        })
    }

    pub fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    /// Coefficient lookup; `None` when `k_1 + k_2` is off the grid.
    pub fn get(&self, n1: i64, m1: usize, n2: i64, m2: usize, m: usize) -> Option<C64> {
        let g = &self.basis.kgrid;
        let n = n1 + n2;
        if !(g.contains_index(n1) && g.contains_index(n2) && g.contains_index(n)) {
            return None;
        }
        let kk = g.len();
        let mm = self.modes;
        let idx = (((g.slot(n) * kk + g.slot(n1)) * mm + (m1 - 1)) * mm + (m2 - 1)) * mm + (m - 1);
        Some(self.entries[idx])
    }

    /// Nonlinear amplitude forcing by direct trapezoidal convolution.
    pub fn rhs_direct(&self, state: &AmplitudeField) -> Result<AmplitudeField> {
        let g = self.basis.kgrid;
        state.check_shape(&g, self.modes)?;
        let kk = g.len();
        let mm = self.modes;
        let mut out = AmplitudeField::zeros(g, mm);
        out.t = state.t;
        let mut acc = vec![C64::new(0.0, 0.0); mm];
        for os in 0..kk {
            let n = g.signed(os);
            acc.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for s1 in 0..kk {
                let n1 = g.signed(s1);
                let n2 = n - n1;
                if !g.contains_index(n2) {
                    continue;
                }
                let a1 = state.at(n1);
                let a2 = state.at(n2);
                if a1.iter().all(|z| *z == C64::new(0.0, 0.0)) || a2.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                    continue;
                }
                let w = trapezoid_weight(g.dk, g.half, n1, n2);
                let base = (os * kk + s1) * mm;
                for m1 in 0..mm {
                    for m2 in 0..mm {
                        let prod = a1[m1] * a2[m2] * w;
                        let row = ((base + m1) * mm + m2) * mm;
                        for (m, z) in acc.iter_mut().enumerate() {
                            *z += self.entries[row + m] * prod;
                        }
                    }
                }
            }
            let start = os * mm;
            out.a[start..start + mm].copy_from_slice(&acc);
        }
        Ok(out)
    }
}

impl NonlinearTerm for InteractionTensor {
    fn basis(&self) -> &Arc<EigenBasis> {
        &self.basis
    }

    fn eval(&mut self, state: &AmplitudeField, out: &mut AmplitudeField) -> Result<()> {
        *out = self.rhs_direct(state)?;
        Ok(())
    }
}
