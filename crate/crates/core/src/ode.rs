//! Adaptive Dormand-Prince 5(4) integration for small fixed-size systems.

use crate::error::{Error, Result};
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub absolute: f64,
    pub relative: f64,
}

impl Tolerance {
    pub fn new(absolute: f64, relative: f64) -> Self {
        Self { absolute, relative }
    }
}

/// Adaptive integrator; keeps the last accepted step size between calls so a
/// sequence of short spans (e.g. grid intervals) does not restart from scratch.
#[derive(Debug, Clone)]
pub struct DormandPrince {
    tol: Tolerance,
    h: f64,
    min_step: f64,
    max_steps: usize,
    pub steps_taken: usize,
    pub steps_rejected: usize,
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b* (error weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl DormandPrince {
    pub fn new(tol: Tolerance, initial_step: f64) -> Self {
        Self { tol, h: initial_step.abs(), min_step: 1e-14, max_steps: 10_000_000, steps_taken: 0, steps_rejected: 0 }
    }

    /// Advance `y` from `t0` to `t1` (either direction).
    pub fn integrate<const N: usize, F>(&mut self, f: &F, t0: f64, t1: f64, y: &mut [f64; N]) -> Result<()>
    where
        F: Fn(f64, &[f64; N]) -> [f64; N],
    {
        let dir = if t1 >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut k1 = f(t, y);
        let mut guard = 0usize;
        while (t1 - t) * dir > 0.0 {
            guard += 1;
            if guard > self.max_steps {
                return Err(Error::NoConvergence { iterations: guard, update: self.h });
            }
            let remaining = (t1 - t).abs();
            let h = self.h.min(remaining);
            let hs = h * dir;
            let stage = |coef: &[(f64, &[f64; N])]| {
                let mut out = *y;
                for (c, k) in coef {
                    for i in 0..N {
                        out[i] += hs * c * k[i];
                    }
                }
                out
            };
            let k2 = f(t + C2 * hs, &stage(&[(A21, &k1)]));
            let k3 = f(t + C3 * hs, &stage(&[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * hs, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * hs, &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(t + hs, &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let y_new = stage(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + hs, &y_new);

            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.tol.absolute + self.tol.relative * y[i].abs().max(y_new[i].abs());
                err = err.max((e / scale).abs());
            }
            if !err.is_finite() {
                return Err(Error::Infeasible("non-finite derivative during integration".into()));
            }
            if err <= 1.0 {
                t += hs;
                if h == remaining {
                    t = t1;
                }
                *y = y_new;
                k1 = k7;
                self.steps_taken += 1;
            } else {
                self.steps_rejected += 1;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            // A short final step to hit t1 exactly must not shrink the next span's step.
            if !(err <= 1.0 && h == remaining && h < self.h) {
                self.h = h * factor;
            }
            if self.h < self.min_step {
                return Err(Error::Infeasible("step size underflow".into()));
            }
        }
        Ok(())
    }
}
