//! Special functions: Airy Ai on the real line, log-gamma and the
//! regularized incomplete gamma function (chi-squared tail).

use core::f64::consts::PI;
#[allow(unused_imports)] // float math on targets whose `core` lacks it
use num_traits::Float as _;

use crate::quadrature::GaussLegendre;

/// Ai(0)
const AI0: f64 = 0.355_028_053_887_817_24;
/// -Ai'(0)
const AIP0: f64 = 0.258_819_403_792_806_8;

/// Above this argument the Maclaurin series loses too many digits to
/// cancellation; the Macdonald-function representation takes over.
const SERIES_CUTOFF: f64 = 2.0;

/// Airy function of the first kind and its derivative, `(Ai(x), Ai'(x))`.
///
/// Accurate to roughly 1e-15 relative for `x >= 0`. For negative arguments the
/// power series is used, which keeps ~1e-12 absolute accuracy down to
/// `x = -8` and degrades slowly beyond that.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x >= SERIES_CUTOFF {
        airy_ai_macdonald(x)
    } else {
        airy_ai_series(x)
    }
}

fn airy_ai_series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = sum a_k x^{3k},  g = sum c_k x^{3k+1}
    let (mut f, mut g) = (1.0, x);
    let (mut df, mut dg) = (0.0, 1.0);
    let (mut tf, mut tg) = (1.0, x);
    let mut tdf = x * x / 2.0;
    let mut tdg = x3 / 3.0;
    df += tdf;
    dg += tdg;
    for k in 1..200 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        if k >= 2 {
            tdf *= x3 / ((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            tdg *= x3 / ((3.0 * kf - 2.0) * (3.0 * kf));
            df += tdf;
            dg += tdg;
        }
        let scale = f.abs() + g.abs() + df.abs() + dg.abs();
        if tf.abs() + tg.abs() + tdf.abs() + tdg.abs() <= 1e-18 * scale {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

/// Ai(x) = sqrt(x/3)/pi K_{1/3}(zeta), Ai'(x) = -x/(pi sqrt 3) K_{2/3}(zeta),
/// with K_nu evaluated by the trapezoidal rule on
/// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt, which converges
/// geometrically in the step for this entire, doubly-decaying integrand.
fn airy_ai_macdonald(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (k13, k23) = macdonald_scaled(zeta);
    let decay = (-zeta).exp();
    let ai = (x / 3.0).sqrt() / PI * k13 * decay;
    let aip = -x / (PI * 3.0_f64.sqrt()) * k23 * decay;
    (ai, aip)
}

/// `(e^z K_{1/3}(z), e^z K_{2/3}(z))` for `z > 0`.
fn macdonald_scaled(z: f64) -> (f64, f64) {
    const H: f64 = 0.05;
    let mut s13 = 0.5;
    let mut s23 = 0.5;
    let mut k = 1;
    loop {
        let t = k as f64 * H;
        let w = (-z * (t.cosh() - 1.0)).exp();
        s13 += w * (t / 3.0).cosh();
        s23 += w * (2.0 * t / 3.0).cosh();
        if w * (2.0 * t / 3.0).cosh() < 1e-19 * s13 {
            break;
        }
        k += 1;
    }
    (s13 * H, s23 * H)
}

/// `int_x^inf Ai(t) dt` for `x >= 0`.
pub fn airy_ai_tail_integral(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    let rule = GaussLegendre::new(24);
    let mut total = 0.0;
    let mut lo = x;
    // Panels of unit width until the integrand is negligible.
    loop {
        let panel = rule.integrate(|t| airy_ai(t).0, lo, lo + 1.0);
        total += panel;
        lo += 1.0;
        if panel.abs() <= 1e-18 * total.abs() || lo > x + 60.0 {
            break;
        }
    }
    total
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    // Modified Lentz.
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Upper tail `P[chi2(dof) > x]`.
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    if dof <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0).clamp(0.0, 1.0)
}
