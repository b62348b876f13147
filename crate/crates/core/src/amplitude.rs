//! Amplitude densities `A_m(k_j, t)` on the truncated wavenumber grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linstab::basis::KGrid;
use crate::linstab::C64;

/// Complex amplitude densities, stored slot-major: `a[slot * modes + (m - 1)]`.
///
/// Reality of the physical field requires `A_m(-k) = conj(A_m(k))` (modes at
/// `-k` are the conjugates of those at `k`, with identical labels), and
/// therefore real amplitudes at `k = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeField {
    pub kgrid: KGrid,
    pub modes: usize,
    pub t: f64,
    pub a: Vec<C64>,
}

impl AmplitudeField {
    pub fn zeros(kgrid: KGrid, modes: usize) -> Self {
        Self {
            kgrid,
            modes,
            t: 0.0,
            a: vec![C64::new(0.0, 0.0); kgrid.len() * modes],
        }
    }

    #[inline]
    pub fn idx(&self, n: i64, m: usize) -> usize {
        self.kgrid.slot(n) * self.modes + (m - 1)
    }

    #[inline]
    pub fn get(&self, n: i64, m: usize) -> C64 {
        self.a[self.idx(n, m)]
    }

    /// Sets `A_m(k_n)` and its conjugate partner.
    pub fn set_pair(&mut self, n: i64, m: usize, value: C64) {
        let i = self.idx(n, m);
        if n == 0 {
            self.a[i] = C64::new(value.re, 0.0);
        } else {
            self.a[i] = value;
            let j = self.idx(-n, m);
            self.a[j] = value.conj();
        }
    }

    /// Amplitudes at one signed wavenumber index.
    pub fn at(&self, n: i64) -> &[C64] {
        let s = self.kgrid.slot(n) * self.modes;
        &self.a[s..s + self.modes]
    }

    /// Largest violation of the reality condition.
    pub fn reality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..=self.kgrid.half as i64 {
            for m in 1..=self.modes {
                let d = if n == 0 {
                    self.get(0, m).im.abs()
                } else {
                    (self.get(-n, m) - self.get(n, m).conj()).norm()
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Overwrites negative wavenumbers with conjugates of the positive ones and
    /// drops the imaginary part at `k = 0`.
    pub fn enforce_reality(&mut self) {
        let mm = self.modes;
        for m in 1..=mm {
            let i0 = self.idx(0, m);
            self.a[i0].im = 0.0;
        }
        for n in 1..=self.kgrid.half as i64 {
            for m in 1..=mm {
                let v = self.get(n, m).conj();
                let j = self.idx(-n, m);
                self.a[j] = v;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(max |A|, k, m)`
    pub fn max_abs(&self) -> (f64, f64, usize) {
        let mut best = (0.0, 0.0, 1);
        for (i, z) in self.a.iter().enumerate() {
            let v = z.norm();
            if !(v <= best.0) {
                let slot = i / self.modes;
                best = (v, self.kgrid.k_of(self.kgrid.signed(slot)), i % self.modes + 1);
            }
        }
        best
    }

    pub fn check_shape(&self, kgrid: &KGrid, modes: usize) -> Result<()> {
        if self.kgrid != *kgrid || self.modes != modes || self.a.len() != kgrid.len() * modes {
            return Err(Error::Config(format!(
                "amplitude field shape ({} slots x {} modes) does not match basis ({} x {modes})",
                self.kgrid.len(),
                self.modes,
                kgrid.len()
            )));
        }
        Ok(())
    }

    /// Signed indices with any nonzero amplitude.
    pub fn support(&self) -> Vec<i64> {
        (0..self.kgrid.len())
            .map(|s| self.kgrid.signed(s))
            .filter(|&n| self.at(n).iter().any(|z| z.norm() > 0.0))
            .collect()
    }

    /// `Delta k |A_m(k)|`
    pub fn amplitude_measure(&self, n: i64, m: usize) -> f64 {
        self.kgrid.dk * self.get(n, m).norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_setting_respects_reality() {
        let g = KGrid::new(0.25, 3.0).unwrap();
        let mut f = AmplitudeField::zeros(g, 3);
        f.set_pair(4, 2, C64::new(0.3, -0.7));
        f.set_pair(0, 1, C64::new(0.5, 0.9));
        assert_eq!(f.get(-4, 2), C64::new(0.3, 0.7));
        assert_eq!(f.get(0, 1), C64::new(0.5, 0.0));
        assert_eq!(f.reality_defect(), 0.0);
        assert_eq!(f.support(), vec![-4, 0, 4]);
        assert!((f.amplitude_measure(4, 2) - 0.25 * (0.58f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn enforce_reality_repairs_negative_half() {
        let g = KGrid::new(0.5, 2.0).unwrap();
        let mut f = AmplitudeField::zeros(g, 2);
        let i = f.idx(-2, 1);
        f.a[i] = C64::new(9.0, 9.0);
        let j = f.idx(0, 2);
        f.a[j] = C64::new(1.0, 2.0);
        f.enforce_reality();
        assert_eq!(f.reality_defect(), 0.0);
        assert_eq!(f.get(-2, 1), C64::new(0.0, 0.0));
    }
}
