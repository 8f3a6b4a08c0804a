//! Tracy-Widom tables against independent references: Fredholm determinants
//! evaluated by Nystrom quadrature, and Monte Carlo from the tridiagonal GOE.

use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rmtfactor_core::quadrature::GaussLegendre;
use rmtfactor_core::rmt::painleve::{solve_painleve_ii, DEFAULT_STEP, DEFAULT_S_MAX, DEFAULT_S_MIN, DEFAULT_TOL};
use rmtfactor_core::rmt::{tw_table, tw_tables_default, Beta, TracyWidomTable};
use rmtfactor_core::special::airy_ai;

fn tables() -> &'static (TracyWidomTable, TracyWidomTable) {
    static T: OnceLock<(TracyWidomTable, TracyWidomTable)> = OnceLock::new();
    T.get_or_init(|| tw_tables_default().unwrap())
}

/// `det(I - K)` on `L^2(s, inf)` by Gauss-Legendre Nystrom discretisation
/// after mapping `(s, inf)` onto `(-1, 1)`.
fn fredholm(s: f64, kernel: impl Fn(f64, f64) -> f64) -> f64 {
    let rule = GaussLegendre::new(90);
    let (x, w): (Vec<f64>, Vec<f64>) = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&t, &wt)| {
            let arg = PI / 4.0 * (t + 1.0);
            (s + 10.0 * arg.tan(), wt * 10.0 * PI / 4.0 / arg.cos().powi(2))
        })
        .unzip();
    let n = x.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - w[i].sqrt() * kernel(x[i], x[j]) * w[j].sqrt()
    });
    m.determinant()
}

fn f1_oracle(s: f64) -> f64 {
    fredholm(s, |x, y| 0.5 * airy_ai((x + y) / 2.0).0)
}

fn f2_oracle(s: f64) -> f64 {
    fredholm(s, |x, y| {
        let (ax, dx) = airy_ai(x);
        if (x - y).abs() < 1e-12 {
            return dx * dx - x * ax * ax;
        }
        let (ay, dy) = airy_ai(y);
        (ax * dy - dx * ay) / (x - y)
    })
}

#[test]
fn fredholm_oracle_reproduces_frozen_values() {
    // Independent 40-digit evaluations.
    for (s, f1, f2) in [
        (-3.0, 0.069_600_118_867_37, 0.080_319_552_939_34),
        (0.0, 0.831_908_066_202_95, 0.969_372_828_355_27),
        (2.0, 0.989_597_571_084_83, 0.999_887_553_698_31),
    ] {
        assert!((f1_oracle(s) - f1).abs() < 1e-11, "F1({s})");
        assert!((f2_oracle(s) - f2).abs() < 1e-11, "F2({s})");
    }
}

#[test]
fn tables_match_fredholm_determinants() {
    let (t1, t2) = tables();
    for s in [-6.0, -4.5, -3.0, -2.0, -1.2345, 0.0, 0.0025, 0.7, 1.1111, 2.0, 2.04, 3.5, 5.0] {
        let (e1, e2) = (f1_oracle(s), f2_oracle(s));
        assert!((t1.cdf(s) - e1).abs() < 1e-9, "F1({s}): {} vs {e1}", t1.cdf(s));
        assert!((t2.cdf(s) - e2).abs() < 1e-9, "F2({s}): {} vs {e2}", t2.cdf(s));
    }
}

#[test]
fn density_matches_difference_of_oracle() {
    let (t1, t2) = tables();
    let h = 1e-3;
    for s in [-3.0, -1.0, 0.5, 2.0] {
        let d1 = (f1_oracle(s + h) - f1_oracle(s - h)) / (2.0 * h);
        let d2 = (f2_oracle(s + h) - f2_oracle(s - h)) / (2.0 * h);
        assert!((t1.density(s) - d1).abs() < 1e-6, "f1({s})");
        assert!((t2.density(s) - d2).abs() < 1e-6, "f2({s})");
    }
}

#[test]
fn orthogonal_reference_rows() {
    let t1 = &tables().0;
    assert!((t1.cdf(2.0) - 0.989598).abs() < 5e-5);
    let row = t1.grid().iter().position(|&x| (x - 2.0).abs() < 1e-9).unwrap();
    assert!((t1.difference_quotients()[row] - 0.017535).abs() < 5e-5);
    assert!((t1.cdf(2.04) - 0.990276).abs() < 5e-5);
    let q = t1.quantile(0.99).unwrap();
    assert!((2.020..=2.025).contains(&q), "{q}");
}

#[test]
fn unitary_values_are_not_the_orthogonal_ones() {
    let t2 = &tables().1;
    assert!((t2.cdf(2.0) - 0.989598).abs() > 1e-2);
}

#[test]
fn limits_monotonicity_and_normalization() {
    for t in [&tables().0, &tables().1] {
        let c = t.cdf_values();
        assert!(c[0] < 1e-8);
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
        assert!(t.pdf_values().iter().all(|&p| p >= 0.0));
        let mut s = -8.0;
        while s < 5.0 {
            assert!(t.cdf(s + 0.01) > t.cdf(s), "{:?} not increasing at {s}", t.beta());
            s += 0.01;
        }
        let h = t.meta().step;
        let pdf = t.pdf_values();
        let trapezoid: f64 = pdf.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert!((trapezoid - 1.0).abs() < 1e-4, "{trapezoid}");
    }
    // Right end: F2 reaches 1 - 1e-8, F1 carries a heavier tail there.
    assert!(*tables().1.cdf_values().last().unwrap() > 1.0 - 1e-8);
    let f1_end = *tables().0.cdf_values().last().unwrap();
    assert!((1.0 - f1_end - (1.0 - f1_oracle(DEFAULT_S_MAX))).abs() < 1e-10);
}

#[test]
fn hastings_mcleod_shape() {
    let sol = solve_painleve_ii(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL).unwrap();
    assert!(sol.q.iter().all(|&q| q > 0.0));
    let ratio = sol.q[0] / (-sol.s[0] / 2.0).sqrt();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    assert_eq!(*sol.q.last().unwrap(), airy_ai(DEFAULT_S_MAX).0);
}

#[test]
fn halving_the_step_is_self_consistent() {
    let coarse = solve_painleve_ii(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL).unwrap();
    let fine = solve_painleve_ii(DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP / 2.0, DEFAULT_TOL).unwrap();
    for (i, q) in coarse.q.iter().enumerate() {
        assert!((q - fine.q[2 * i]).abs() < 1e-9, "q at {}", coarse.s[i]);
    }
    for beta in [Beta::One, Beta::Two] {
        let a = tw_table(beta, DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL).unwrap();
        let b = tw_table(beta, DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP / 2.0, DEFAULT_TOL).unwrap();
        for (i, c) in a.cdf_values().iter().enumerate() {
            assert!((c - b.cdf_values()[2 * i]).abs() < 1e-8);
        }
    }
}

#[test]
fn generation_is_fast() {
    let start = Instant::now();
    tw_table(Beta::One, DEFAULT_S_MIN, DEFAULT_S_MAX, DEFAULT_STEP, DEFAULT_TOL).unwrap();
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn largest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    while hi - lo > 1e-9 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        if below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn goe_largest_eigenvalue_monte_carlo() {
    let n = 200;
    let reps = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let chis: Vec<ChiSquared<f64>> = (1..n).map(|k| ChiSquared::new(k as f64).unwrap()).collect();
    let centre = (2.0 * (n as f64 - 0.5)).sqrt();
    let scale = 2.0_f64.sqrt() * (n as f64 - 0.5).powf(1.0 / 6.0);
    let mut below_zero = 0usize;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for _ in 0..reps {
        // Diagonal N(0, 2) and off-diagonal chi_{n-1}, ..., chi_1, all over sqrt(2).
        for d in diag.iter_mut() {
            *d = StandardNormal.sample(&mut rng);
        }
        for (i, o) in off.iter_mut().enumerate() {
            *o = chis[n - 2 - i].sample(&mut rng).sqrt() / 2.0_f64.sqrt();
        }
        if (largest_eigenvalue(&diag, &off) - centre) * scale <= 0.0 {
            below_zero += 1;
        }
    }
    let empirical = below_zero as f64 / reps as f64;
    let exact = tables().0.cdf(0.0);
    assert!((empirical - exact).abs() < 0.01, "{empirical} vs {exact}");
}
