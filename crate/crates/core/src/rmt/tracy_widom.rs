//! Tracy-Widom distribution functions from the Painleve II solution:
//!
//! ```text
//! F2(s) = exp(-int_s^inf (x - s) q(x)^2 dx)
//! F1(s) = sqrt(F2(s) exp(-int_s^inf q(x) dx))
//! ```
//!
//! Both integrals are accumulated on the grid with a sixth-order rule; the
//! `[s_max, inf)` tails use `q = Ai` and closed forms for the Airy integrals.
//! Densities come from the exact identities `F2' = F2 u` and
//! `F1' = F1 (u + q) / 2` with `u(s) = int_s^inf q^2`.

use alloc::vec::Vec;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::cumulative_from_right;
use crate::rmt::painleve::{
    solve_painleve_ii, PainleveSolution, DEFAULT_STEP, DEFAULT_S_MAX, DEFAULT_S_MIN, DEFAULT_TOL,
};
use crate::special::{airy_ai, airy_ai_tail_integral};

/// Dyson index of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum Beta {
    /// Orthogonal ensemble, F1.
    One,
    /// Unitary ensemble, F2.
    Two,
}

impl Beta {
    pub fn index(self) -> u8 {
        match self {
            Beta::One => 1,
            Beta::Two => 2,
        }
    }

    pub fn from_index(b: u8) -> Option<Self> {
        match b {
            1 => Some(Beta::One),
            2 => Some(Beta::Two),
            _ => None,
        }
    }
}

/// How a table was produced.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TableMeta {
    pub step: f64,
    pub tol: f64,
    /// Where the Airy boundary condition was imposed.
    pub s_start: f64,
}

/// Which side of the tabulated range a lookup fell off.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamped {
    Below,
    Above,
}

#[derive(Debug, Clone)]
pub struct TracyWidomTable {
    beta: Beta,
    grid: Vec<f64>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
    /// Hermite slopes after the monotonicity limiter.
    slopes: Vec<f64>,
    meta: TableMeta,
}

/// Generate a single table with the given grid.
pub fn tw_table(beta: Beta, s_min: f64, s_max: f64, step: f64, tol: f64) -> Result<TracyWidomTable> {
    let sol = solve_painleve_ii(s_min, s_max, step, tol)?;
    Ok(TracyWidomTable::from_solution(beta, &sol))
}

/// Both tables from one Painleve solve on the default grid.
pub fn tw_tables_default() -> Result<(TracyWidomTable, TracyWidomTable)> {
    let sol = solve_painleve_ii(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL)?;
    Ok((TracyWidomTable::from_solution(Beta::One, &sol), TracyWidomTable::from_solution(Beta::Two, &sol)))
}

pub fn tw_cdf(table: &TracyWidomTable, s: f64) -> f64 {
    table.cdf(s)
}

pub fn tw_quantile(table: &TracyWidomTable, u: f64) -> Result<f64> {
    table.quantile(u)
}

impl TracyWidomTable {
    pub fn from_solution(beta: Beta, sol: &PainleveSolution) -> Self {
        let h = sol.step;
        let s_max = sol.s_max();
        let (ai, aip) = airy_ai(s_max);
        // Airy tails beyond s_max: int Ai^2, int (x - s) Ai^2, int Ai.
        let u_tail = aip * aip - s_max * ai * ai;
        let i_tail = 2.0 / 3.0 * s_max * s_max * ai * ai - 2.0 / 3.0 * s_max * aip * aip - ai * aip / 3.0;
        let v_tail = airy_ai_tail_integral(s_max);

        let q2: Vec<f64> = sol.q.iter().map(|q| q * q).collect();
        let u: Vec<f64> = cumulative_from_right(&q2, h).iter().map(|x| x + u_tail).collect();
        let big_i: Vec<f64> = cumulative_from_right(&u, h).iter().map(|x| x + i_tail).collect();

        let (cdf, pdf): (Vec<f64>, Vec<f64>) = match beta {
            Beta::Two => big_i
                .iter()
                .zip(&u)
                .map(|(i, u)| {
                    let f = (-i).exp();
                    (f, f * u)
                })
                .unzip(),
            Beta::One => {
                let v: Vec<f64> = cumulative_from_right(&sol.q, h).iter().map(|x| x + v_tail).collect();
                big_i
                    .iter()
                    .zip(&v)
                    .zip(u.iter().zip(&sol.q))
                    .map(|((i, v), (u, q))| {
                        let f = (-(i + v) / 2.0).exp();
                        (f, f * (u + q) / 2.0)
                    })
                    .unzip()
            }
        };
        let meta = TableMeta { step: h, tol: sol.tol, s_start: s_max };
        Self::assemble(beta, sol.s.clone(), pdf, cdf, meta)
    }

    /// Rebuild a table from a stored cdf column (e.g. an on-disk cache). The
    /// density is recovered by sixth-order finite differences of the cdf.
    pub fn from_cdf(beta: Beta, grid: Vec<f64>, cdf: Vec<f64>, meta: TableMeta) -> Result<Self> {
        let n = grid.len();
        if n < 7 || cdf.len() != n {
            return Err(Error::Dimension(alloc::format!(
                "table columns must have equal length >= 7 (grid {n}, cdf {})",
                cdf.len()
            )));
        }
        let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
        for (i, w) in grid.windows(2).enumerate() {
            if !(((w[1] - w[0]) - h).abs() <= 1e-6 * h) {
                return Err(Error::InvalidParameter(alloc::format!("grid not uniform at row {}", i + 1)));
            }
        }
        for (i, w) in cdf.windows(2).enumerate() {
            if !(w[1] >= w[0] && (0.0..=1.0).contains(&w[0]) && w[1] <= 1.0) {
                return Err(Error::InvalidParameter(alloc::format!("cdf not monotone in [0, 1] at row {i}")));
            }
        }
        let pdf = (0..n)
            .map(|i| {
                let start = i.saturating_sub(3).min(n - 7);
                let weights = derivative_weights(i as f64 - start as f64);
                let d: f64 = weights.iter().zip(&cdf[start..start + 7]).map(|(w, f)| w * f).sum();
                (d / h).max(0.0)
            })
            .collect();
        Ok(Self::assemble(beta, grid, pdf, cdf, meta))
    }

    fn assemble(beta: Beta, grid: Vec<f64>, pdf: Vec<f64>, cdf: Vec<f64>, meta: TableMeta) -> Self {
        let h = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
        let mut slopes = pdf.clone();
        // Fritsch-Carlson limiter; with exact densities it only ever bites in
        // the far tails where the cdf is flat to rounding.
        for k in 0..grid.len() - 1 {
            let secant = (cdf[k + 1] - cdf[k]) / h;
            if secant <= 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / secant;
            let b = slopes[k + 1] / secant;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[k] = tau * a * secant;
                slopes[k + 1] = tau * b * secant;
            }
        }
        let mut meta = meta;
        meta.step = h;
        Self { beta, grid, pdf, cdf, slopes, meta }
    }

    pub fn beta(&self) -> Beta {
        self.beta
    }

    pub fn meta(&self) -> TableMeta {
        self.meta
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn pdf_values(&self) -> &[f64] {
        &self.pdf
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    /// Backward difference quotients `(F(s_i) - F(s_{i-1})) / h` of the
    /// tabulated cdf (forward at the first node), the density column of the
    /// classic printed tables.
    pub fn difference_quotients(&self) -> Vec<f64> {
        let h = self.meta.step;
        let c = &self.cdf;
        (0..c.len()).map(|i| if i == 0 { (c[1] - c[0]) / h } else { (c[i] - c[i - 1]) / h }).collect()
    }

    pub fn s_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn s_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    fn locate(&self, s: f64) -> (usize, f64) {
        let h = self.meta.step;
        let pos = (s - self.grid[0]) / h;
        let k = (pos.floor() as isize).clamp(0, self.grid.len() as isize - 2) as usize;
        let t = ((s - self.grid[k]) / h).clamp(0.0, 1.0);
        (k, t)
    }

    fn hermite(&self, k: usize, t: f64) -> f64 {
        let h = self.meta.step;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.cdf[k] + h10 * h * self.slopes[k] + h01 * self.cdf[k + 1] + h11 * h * self.slopes[k + 1]
    }

    /// Cdf with an indication of whether `s` was outside the grid.
    pub fn lookup(&self, s: f64) -> (f64, Option<Clamped>) {
        if s < self.s_min() {
            return (self.cdf[0], Some(Clamped::Below));
        }
        if s > self.s_max() {
            return (self.cdf[self.cdf.len() - 1], Some(Clamped::Above));
        }
        let (k, t) = self.locate(s);
        (self.hermite(k, t).clamp(0.0, 1.0), None)
    }

    /// Monotone cubic interpolation of the cdf; clamps outside the grid.
    pub fn cdf(&self, s: f64) -> f64 {
        let (v, clamped) = self.lookup(s);
        if let Some(side) = clamped {
            log::warn!("Tracy-Widom argument {s} outside table ({side:?}); clamped");
        }
        v
    }

    /// Upper tail `1 - F(s)`.
    pub fn sf(&self, s: f64) -> f64 {
        1.0 - self.cdf(s)
    }

    /// Density, linearly interpolated; zero outside the grid.
    pub fn density(&self, s: f64) -> f64 {
        if s < self.s_min() || s > self.s_max() {
            return 0.0;
        }
        let (k, t) = self.locate(s);
        self.pdf[k] * (1.0 - t) + self.pdf[k + 1] * t
    }

    /// Inverse cdf by bracketed bisection on the interpolant.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::OutOfDomain(alloc::format!("quantile level {u} not in (0, 1)")));
        }
        let n = self.cdf.len();
        if u <= self.cdf[0] {
            log::warn!("quantile level {u} below table range; clamped");
            return Ok(self.s_min());
        }
        if u >= self.cdf[n - 1] {
            log::warn!("quantile level {u} above table range; clamped");
            return Ok(self.s_max());
        }
        // first k with cdf[k+1] >= u
        let k = self.cdf.partition_point(|&c| c < u).saturating_sub(1).min(n - 2);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.hermite(k, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.grid[k] + 0.5 * (lo + hi) * self.meta.step)
    }
}

/// Weights of the first derivative (unit spacing) at offset `x0` from seven
/// samples at offsets `0..7`, by Fornberg's recursion.
fn derivative_weights(x0: f64) -> [f64; 7] {
    const N: usize = 7;
    let mut c = [[0.0; 2]; N];
    let mut c1 = 1.0;
    let mut c4 = -x0;
    c[0][0] = 1.0;
    for i in 1..N {
        let xi = i as f64;
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xi - x0;
        for j in 0..i {
            let c3 = xi - j as f64;
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    let mut out = [0.0; N];
    for (o, row) in out.iter_mut().zip(&c) {
        *o = row[1];
    }
    out
}
