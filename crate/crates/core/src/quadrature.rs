//! Gauss-Legendre rules and sixth-order cumulative integration on uniform grids.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

/// An n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Weights (times 1440) integrating the quintic through six consecutive
/// samples over the unit interval starting at stencil position `j`.
const SIX_POINT: [[f64; 6]; 5] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [-27.0, 637.0, 1022.0, -258.0, 77.0, -11.0],
    [11.0, -93.0, 802.0, 802.0, -93.0, 11.0],
    [-11.0, 77.0, -258.0, 1022.0, 637.0, -27.0],
    [27.0, -173.0, 482.0, -798.0, 1427.0, 475.0],
];

/// Integral of the sampled function over each grid interval `[s_i, s_{i+1}]`,
/// using centred six-point stencils (shifted at the ends). Sixth order.
///
/// Panics if fewer than six samples are given.
pub fn interval_integrals(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 6, "six-point rule needs at least six samples");
    let intervals = n - 1;
    (0..intervals)
        .map(|i| {
            let start = i.saturating_sub(2).min(n - 6);
            let w = &SIX_POINT[i - start];
            let acc: f64 = w.iter().zip(&values[start..start + 6]).map(|(w, f)| w * f).sum();
            acc * step / 1440.0
        })
        .collect()
}

/// `out[i] = int_{s_i}^{s_last} f`, accumulated right to left.
pub fn cumulative_from_right(values: &[f64], step: f64) -> Vec<f64> {
    let pieces = interval_integrals(values, step);
    let mut out = vec![0.0; values.len()];
    let mut acc = 0.0;
    for i in (0..pieces.len()).rev() {
        acc += pieces[i];
        out[i] = acc;
    }
    out
}
