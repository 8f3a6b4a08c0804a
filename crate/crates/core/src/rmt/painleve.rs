//! Hastings-McLeod solution of Painleve II, `q'' = s q + 2 q^3`, `q ~ Ai(s)` as
//! `s -> +inf`.
//!
//! Integrating the initial value problem backwards from the Airy boundary is
//! exponentially unstable for `s < 0` (the solution is a separatrix between
//! decaying and blowing-up families); in double precision it leaves the
//! separatrix around `s = -8`. The solve therefore runs in two passes:
//!
//! 1. an adaptive Dormand-Prince shooting pass from `s_max` down to
//!    [`SHOOTING_LIMIT`], which is accurate there and seeds the next pass;
//! 2. Newton iteration on the fourth-order Numerov discretisation of the full
//!    grid, with `Ai(s_max)` on the right and the left-tail asymptotic
//!    expansion as the left boundary value. The linearised operator
//!    `-d^2 + (s + 6 q^2)` is coercive on the whole line, so this global
//!    problem is well conditioned where the shooting problem is not.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

use crate::error::{Error, Result};
use crate::ode::{DormandPrince, Tolerance};
use crate::quadrature::cumulative_from_right;
use crate::special::airy_ai;

pub const DEFAULT_S_MIN: f64 = -13.0;
pub const DEFAULT_S_MAX: f64 = 6.0;
pub const DEFAULT_STEP: f64 = 0.005;
pub const DEFAULT_TOL: f64 = 1e-13;

/// Left edge of the internal domain. The five-term asymptotic boundary value is
/// accurate to about 1e-12 relative here, and boundary errors decay inward
/// roughly like `exp(-sqrt(2|s|) d)`.
pub const ASYMPTOTIC_EDGE: f64 = -13.0;

/// The shooting pass is only trusted (and only run) down to here.
pub const SHOOTING_LIMIT: f64 = -4.0;

const MAX_NEWTON: usize = 60;

/// Tabulated Hastings-McLeod solution on a uniform grid.
#[derive(Debug, Clone)]
pub struct PainleveSolution {
    pub s: Vec<f64>,
    pub q: Vec<f64>,
    pub dq: Vec<f64>,
    pub step: f64,
    pub tol: f64,
    pub newton_iterations: usize,
}

impl PainleveSolution {
    pub fn s_min(&self) -> f64 {
        self.s[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Five-term expansion `q(s) ~ sqrt(-s/2) (1 + 1/(8 s^3) - 73/(128 s^6) + ...)`
/// for `s -> -inf`, with its derivative.
pub fn hastings_mcleod_left_tail(s: f64) -> (f64, f64) {
    const A: [f64; 5] = [1.0, 1.0 / 8.0, -73.0 / 128.0, 10657.0 / 1024.0, -13_912_277.0 / 32768.0];
    debug_assert!(s < 0.0);
    let r = (-s / 2.0).sqrt();
    let mut series = 0.0;
    let mut dseries = 0.0;
    for (n, a) in A.iter().enumerate() {
        let e = -3.0 * n as f64;
        series += a * s.powf(e);
        if n > 0 {
            dseries += a * e * s.powf(e - 1.0);
        }
    }
    let dr = -1.0 / (4.0 * r);
    (r * series, dr * series + r * dseries)
}

fn envelope(s: f64) -> f64 {
    10.0 * (-s / 2.0).max(1.0).sqrt()
}

/// Backward shooting from the Airy boundary at `s_max`, sampled on the grid
/// `s_max - k * step` down to `s_stop`. Returns `(s, q, q')` in ascending order.
pub fn shoot_from_airy(s_max: f64, s_stop: f64, step: f64, tol: f64) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = ((s_max - s_stop) / step).round() as usize;
    let (ai, aip) = airy_ai(s_max);
    let mut y = [ai, aip];
    let mut dp = DormandPrince::new(Tolerance::new(tol * 1e-2, tol), step);
    let rhs = |s: f64, y: &[f64; 2]| [y[1], s * y[0] + 2.0 * y[0] * y[0] * y[0]];
    let mut s_out = vec![0.0; n + 1];
    let mut q = vec![0.0; n + 1];
    let mut dq = vec![0.0; n + 1];
    s_out[n] = s_max;
    q[n] = y[0];
    dq[n] = y[1];
    for k in (0..n).rev() {
        let from = s_max - (n - k - 1) as f64 * step;
        let to = s_max - (n - k) as f64 * step;
        dp.integrate(&rhs, from, to, &mut y)?;
        if !y[0].is_finite() || y[0].abs() > envelope(to) {
            return Err(Error::BlowUp { s: to });
        }
        s_out[k] = to;
        q[k] = y[0];
        dq[k] = y[1];
    }
    Ok((s_out, q, dq))
}

/// Solve for the Hastings-McLeod `q` on the uniform grid `[s_min, s_max]`.
pub fn solve_painleve_ii(s_min: f64, s_max: f64, step: f64, tol: f64) -> Result<PainleveSolution> {
    if !(s_max >= 5.0) {
        return Err(Error::Infeasible(alloc::format!("s_max = {s_max} must be at least 5")));
    }
    if !(step > 0.0 && step <= 0.01) {
        return Err(Error::Infeasible(alloc::format!("step {step} must lie in (0, 0.01]")));
    }
    if !(1e-16..=1e-6).contains(&tol) {
        return Err(Error::Infeasible(alloc::format!("tolerance {tol:e} outside [1e-16, 1e-6]")));
    }
    let span = s_max - s_min;
    let intervals = (span / step).round();
    if !(intervals >= 10.0) || (intervals * step - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::Infeasible(alloc::format!(
            "step {step} does not divide [{s_min}, {s_max}] into at least ten intervals"
        )));
    }
    let intervals = intervals as usize;
    let extra = if s_min > ASYMPTOTIC_EDGE { ((s_min - ASYMPTOTIC_EDGE) / step).ceil() as usize } else { 0 };
    let total = extra + intervals;
    let grid: Vec<f64> =
        (0..=total).map(|i| if i == total { s_max } else { s_min + (i as f64 - extra as f64) * step }).collect();

    let mut q = initial_guess(&grid, s_max, step, tol)?;
    let left = grid[0];
    q[0] = hastings_mcleod_left_tail(left).0;
    q[total] = airy_ai(s_max).0;

    let iterations = newton_numerov(&grid, &mut q, step, tol)?;

    // q'(s) = Ai'(s_max) - int_s^{s_max} (x q + 2 q^3) dx
    let rhs: Vec<f64> = grid.iter().zip(&q).map(|(s, q)| s * q + 2.0 * q * q * q).collect();
    let acc = cumulative_from_right(&rhs, step);
    let aip = airy_ai(s_max).1;
    let dq: Vec<f64> = acc.iter().map(|a| aip - a).collect();

    Ok(PainleveSolution {
        s: grid[extra..].to_vec(),
        q: q[extra..].to_vec(),
        dq: dq[extra..].to_vec(),
        step,
        tol,
        newton_iterations: iterations,
    })
}

fn initial_guess(grid: &[f64], s_max: f64, step: f64, tol: f64) -> Result<Vec<f64>> {
    let stop = SHOOTING_LIMIT.max(grid[0]);
    let (shot_s, shot_q, _) = shoot_from_airy(s_max, stop, step, tol.max(1e-12))?;
    let offset = grid.len() - shot_s.len();
    Ok(grid
        .iter()
        .enumerate()
        .map(|(i, &s)| if i >= offset { shot_q[i - offset] } else { hastings_mcleod_left_tail(s.min(-1.0)).0 })
        .collect())
}

/// Newton on `q_{i+1} - 2 q_i + q_{i-1} = h^2/12 (f_{i+1} + 10 f_i + f_{i-1})`,
/// endpoints fixed. Returns the iteration count.
fn newton_numerov(s: &[f64], q: &mut [f64], h: f64, tol: f64) -> Result<usize> {
    let n = q.len();
    let m = n - 2;
    let c = h * h / 12.0;
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    let mut f = vec![0.0; n];
    let mut df = vec![0.0; n];
    let mut last_update = f64::INFINITY;
    for iter in 1..=MAX_NEWTON {
        for i in 0..n {
            f[i] = s[i] * q[i] + 2.0 * q[i] * q[i] * q[i];
            df[i] = s[i] + 6.0 * q[i] * q[i];
        }
        for k in 0..m {
            let i = k + 1;
            rhs[k] = -(q[i + 1] - 2.0 * q[i] + q[i - 1] - c * (f[i + 1] + 10.0 * f[i] + f[i - 1]));
            diag[k] = -2.0 - 10.0 * c * df[i];
            lower[k] = 1.0 - c * df[i - 1];
            upper[k] = 1.0 - c * df[i + 1];
        }
        solve_tridiagonal(&lower, &mut diag, &upper, &mut rhs);
        let mut update: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for k in 0..m {
            q[k + 1] += rhs[k];
            update = update.max(rhs[k].abs());
            scale = scale.max(q[k + 1].abs());
        }
        for i in 0..n {
            if !q[i].is_finite() || q[i].abs() > envelope(s[i]) {
                return Err(Error::BlowUp { s: s[i] });
            }
        }
        if update <= tol * scale {
            return Ok(iter);
        }
        // Rounding floor: quadratic convergence has stalled at machine precision.
        if update <= 1e3 * f64::EPSILON * scale && update >= 0.5 * last_update {
            return Ok(iter);
        }
        last_update = update;
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON, update: last_update })
}

/// Thomas algorithm; `lower[0]` and `upper[m-1]` are ignored. Solution in `rhs`.
fn solve_tridiagonal(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let m = diag.len();
    for k in 1..m {
        let w = lower[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    rhs[m - 1] /= diag[m - 1];
    for k in (0..m - 1).rev() {
        rhs[k] = (rhs[k] - upper[k] * rhs[k + 1]) / diag[k];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // q(s) from a 45-digit Taylor integration started deep in the Airy regime.
    const REFERENCE: [(f64, f64, f64); 5] = [
        (2.0, 0.034_928_149_264_595_72, -0.053_110_086_787_895_98),
        (0.0, 0.367_061_551_548_078_43, -0.295_372_105_447_550_06),
        (-4.0, 1.411_176_929_362_394, -0.178_902_329_967_618_66),
        (-6.0, 1.731_024_958_831_778_6, -0.144_778_284_257_288_12),
        (-8.0, 1.999_507_197_811_243_8, -0.125_155_766_477_299_09),
    ];

    fn at(sol: &PainleveSolution, s: f64) -> (f64, f64) {
        let i = ((s - sol.s_min()) / sol.step).round() as usize;
        assert!((sol.s[i] - s).abs() < 1e-9);
        (sol.q[i], sol.dq[i])
    }

    #[test]
    fn matches_high_precision_reference() {
        let sol = solve_painleve_ii(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL).unwrap();
        for (s, q, dq) in REFERENCE {
            let (got, dgot) = at(&sol, s);
            assert!((got - q).abs() < 1e-10, "q({s}) = {got}, want {q}");
            assert!((dgot - dq).abs() < 1e-9, "q'({s}) = {dgot}, want {dq}");
        }
    }

    #[test]
    fn right_boundary_is_airy() {
        let sol = solve_painleve_ii(-10.0, 6.0, 0.01, DEFAULT_TOL).unwrap();
        let (ai, aip) = airy_ai(6.0);
        assert_eq!(*sol.q.last().unwrap(), ai);
        assert!((sol.dq.last().unwrap() - aip).abs() < 1e-15);
    }

    #[test]
    fn short_left_range_uses_extended_domain() {
        let narrow = solve_painleve_ii(-2.0, 6.0, 0.01, DEFAULT_TOL).unwrap();
        assert!((narrow.s_min() + 2.0).abs() < 1e-12);
        let (q0, _) = at(&narrow, 0.0);
        assert!((q0 - REFERENCE[1].1).abs() < 1e-9);
    }

    #[test]
    fn shooting_agrees_where_it_is_stable() {
        let (s, q, _) = shoot_from_airy(6.0, -4.0, 0.005, 1e-13).unwrap();
        let i0 = s.iter().position(|&x| x.abs() < 1e-9).unwrap();
        // Ai boundary at s = 6 is off by ~4e-12 relative, which is what limits this.
        assert!((q[i0] - REFERENCE[1].1).abs() < 1e-9);
    }

    #[test]
    fn rejects_infeasible_configuration() {
        assert!(matches!(solve_painleve_ii(-13.0, 4.0, 0.005, 1e-13), Err(Error::Infeasible(_))));
        assert!(matches!(solve_painleve_ii(-13.0, 6.0, 0.05, 1e-13), Err(Error::Infeasible(_))));
        assert!(matches!(solve_painleve_ii(-13.0, 6.0, 0.005, 1e-18), Err(Error::Infeasible(_))));
        assert!(matches!(solve_painleve_ii(-13.0, 6.0, 0.0033, 1e-13), Err(Error::Infeasible(_))));
    }

    #[test]
    fn left_tail_expansion_derivative() {
        let s = -9.0;
        let h = 1e-5;
        let fd = (hastings_mcleod_left_tail(s + h).0 - hastings_mcleod_left_tail(s - h).0) / (2.0 * h);
        assert!((fd - hastings_mcleod_left_tail(s).1).abs() < 1e-8);
    }
}
