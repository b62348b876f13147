use crate::amplitude::AmplitudeField;
use crate::error::{Error, Result};
use crate::interaction::NonlinearTerm;
use crate::linstab::C64;

use super::BLOWUP_AMPLITUDE;

/// Integrating-factor RK4: the linear term `-i omega A` is propagated exactly
/// by `exp(-i omega dt)`, the nonlinear term by classical RK4 stages in the
/// interaction picture.
pub struct Stepper {
    rhs: Box<dyn NonlinearTerm>,
    dt: f64,
    half: Vec<C64>,
    full: Vec<C64>,
    pub nonlinear: bool,
    k1: AmplitudeField,
    k2: AmplitudeField,
    k3: AmplitudeField,
    k4: AmplitudeField,
    tmp: AmplitudeField,
}

impl Stepper {
    pub fn new(rhs: Box<dyn NonlinearTerm>, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let basis = rhs.basis().clone();
        let g = basis.kgrid;
        let mm = basis.mode_count();
        let mut half = Vec::with_capacity(g.len() * mm);
        let mut full = Vec::with_capacity(g.len() * mm);
        for slot in 0..g.len() {
            for mode in basis.at(g.signed(slot)) {
                let s = mode.exponent();
                half.push((s * (0.5 * dt)).exp());
                full.push((s * dt).exp());
            }
        }
        let z = AmplitudeField::zeros(g, mm);
        Ok(Self {
            rhs,
            dt,
            half,
            full,
            nonlinear: true,
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn eval(&mut self, which: usize) -> Result<()> {
        let (src, dst) = match which {
            1 => (&self.tmp, &mut self.k1),
            2 => (&self.tmp, &mut self.k2),
            3 => (&self.tmp, &mut self.k3),
            _ => (&self.tmp, &mut self.k4),
        };
        if self.nonlinear {
            self.rhs.eval(src, dst)
        } else {
            dst.a.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            Ok(())
        }
    }

    /// Advances `state` by one step (time stamp is left to the caller).
    pub fn step(&mut self, state: &mut AmplitudeField) -> Result<()> {
        let h = self.dt;
        let n = state.a.len();
        self.tmp.a.copy_from_slice(&state.a);
        self.tmp.t = state.t;
        self.eval(1)?;
        for i in 0..n {
            self.tmp.a[i] = self.half[i] * (state.a[i] + self.k1.a[i] * (0.5 * h));
        }
        self.eval(2)?;
        for i in 0..n {
            self.tmp.a[i] = self.half[i] * state.a[i] + self.k2.a[i] * (0.5 * h);
        }
        self.eval(3)?;
        for i in 0..n {
            self.tmp.a[i] = self.full[i] * state.a[i] + self.half[i] * self.k3.a[i] * h;
        }
        self.eval(4)?;
        for i in 0..n {
            let e = self.half[i];
            let e2 = self.full[i];
            state.a[i] = e2 * state.a[i]
                + (e2 * self.k1.a[i] + e * (self.k2.a[i] + self.k3.a[i]) * 2.0 + self.k4.a[i]) * (h / 6.0);
        }
        state.enforce_reality();
        if !state.is_finite() || state.max_abs().0 > BLOWUP_AMPLITUDE {
            let (max_abs, k, m) = state.max_abs();
            return Err(Error::BlowUp {
                t: state.t + h,
                max_abs,
                k,
                m,
            });
        }
        Ok(())
    }
}
