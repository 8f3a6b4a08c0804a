#![allow(clippy::excessive_precision)]

use std::sync::OnceLock;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rmtfactor_core::cca::{canonical_correlations, partitioned_covariance, CcaSolution};
use rmtfactor_core::rmt::{
    count_factors, greatest_root_params, greatest_root_pvalue, mp_law, tw_tables_default, wishart_largest_eig_pvalue,
    Deflation, MarchenkoPasturLaw, RatioConvention, TracyWidomTable,
};

fn f1() -> &'static TracyWidomTable {
    static T: OnceLock<TracyWidomTable> = OnceLock::new();
    T.get_or_init(|| tw_tables_default().unwrap().0)
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| StandardNormal.sample(rng))
}

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn mp_mass(law: &MarchenkoPasturLaw) -> f64 {
    // x = a + (b - a) sin^2(u) removes the square-root edges.
    let (a, b) = (law.x_min, law.x_max);
    let g = |u: f64| {
        let x = a + (b - a) * u.sin().powi(2);
        law.density(x) * (b - a) * 2.0 * u.sin() * u.cos()
    };
    simpson(&g, 0.0, std::f64::consts::FRAC_PI_2, 1e-12)
}

#[test]
fn marchenko_pastur_normalization() {
    for c in [0.25, 0.5, 1.0] {
        let law = mp_law(c).unwrap();
        assert!((mp_mass(&law) - 1.0).abs() < 1e-6, "c = {c}");
    }
    let wide = mp_law(2.0).unwrap();
    assert!((mp_mass(&wide) + wide.atom_mass() - 1.0).abs() < 1e-6);
    let law = mp_law(1.0).unwrap();
    assert_eq!((law.x_min, law.x_max), (0.0, 4.0));
}

#[test]
fn marchenko_pastur_matches_wishart_spectrum() {
    let (n, p) = (2000, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = gaussian(&mut rng, n, p);
    let s = x.transpose() * &x / n as f64;
    let eig = s.symmetric_eigenvalues();
    let law = MarchenkoPasturLaw::from_dimensions(p, n, RatioConvention::DimensionOverSamples).unwrap();
    // fraction of eigenvalues below the law's median region
    let cut = 1.0;
    let empirical = eig.iter().filter(|&&l| l < cut).count() as f64 / p as f64;
    let g = |x: f64| law.density(x);
    let theory = simpson(&g, law.x_min, cut, 1e-10);
    assert!((empirical - theory).abs() < 0.02, "{empirical} vs {theory}");
    assert!(eig.max() < law.x_max * 1.05);
}

#[test]
fn wishart_example_pvalue() {
    let p = wishart_largest_eig_pvalue(f1(), 10, 10, 4.25).unwrap();
    assert!((0.05..=0.07).contains(&p), "{p}");
    let mut last = 1.0;
    for lambda in [1.0, 3.0, 4.25, 6.0, 10.0, 40.0] {
        let q = wishart_largest_eig_pvalue(f1(), 10, 10, lambda).unwrap();
        assert!(q <= last);
        last = q;
    }
    // Beyond the table the tail saturates at 1 - F1(s_max).
    assert!(last < 1e-5);
    assert!(wishart_largest_eig_pvalue(f1(), 1, 10, 4.0).is_err());
    assert!(wishart_largest_eig_pvalue(f1(), 10, 10, -1.0).is_err());
}

#[test]
fn wishart_null_calibration() {
    let (n, p, reps) = (200, 50, 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rejections = 0;
    for _ in 0..reps {
        let x = gaussian(&mut rng, n, p);
        let s = x.tr_mul(&x) / n as f64;
        let lambda1 = s.symmetric_eigenvalues().max();
        if wishart_largest_eig_pvalue(f1(), n, p, lambda1).unwrap() < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / reps as f64;
    assert!((rate - 0.05).abs() <= 0.01, "{rate}");
}

#[test]
fn greatest_root_reference_parameters() {
    // 40-digit evaluations of the centering and scaling formulas.
    let cases = [
        (
            (49, 4480, 51),
            0.207_314_548_149_936_19,
            0.211_561_586_219_035_31,
            -3.097_108_498_526_962_2,
            0.047_774_776_525_027_374,
        ),
        (
            (4, 494, 5),
            0.167_864_698_297_664_08,
            0.190_404_766_913_662_9,
            -3.417_679_647_007_093_2,
            0.255_061_579_039_595_56,
        ),
    ];
    for ((p, m, n), gamma, phi, mu, sigma) in cases {
        let g = greatest_root_params(p, m, n).unwrap();
        assert!((g.gamma - gamma).abs() < 1e-12);
        assert!((g.phi - phi).abs() < 1e-12);
        assert!((g.mu - mu).abs() < 1e-12);
        assert!((g.sigma - sigma).abs() < 1e-12);
    }
}

#[test]
fn greatest_root_pvalue_behaviour() {
    let g = greatest_root_params(4, 494, 5).unwrap();
    let mut last = 1.0;
    for k in 1..100 {
        let theta = k as f64 / 100.0;
        let pv = greatest_root_pvalue(f1(), &g, theta).unwrap();
        assert!(pv <= last);
        last = pv;
    }
    assert!(greatest_root_pvalue(f1(), &g, 0.0).is_err());
}

proptest! {
    #[test]
    fn duality_leaves_pvalues_unchanged(p in 1usize..30, extra in 0usize..200, n in 1usize..30, theta in 0.001f64..0.999) {
        let m = p + extra;
        prop_assume!(m + n > p.max(n) + 1);
        let direct = greatest_root_params(p, m, n);
        let dual = greatest_root_params(n, m + n - p, p);
        if let (Ok(a), Ok(b)) = (direct, dual) {
            prop_assert_eq!(
                greatest_root_pvalue(f1(), &a, theta).unwrap(),
                greatest_root_pvalue(f1(), &b, theta).unwrap()
            );
        }
    }
}

fn cca(x: &DMatrix<f64>, y: &DMatrix<f64>) -> CcaSolution {
    canonical_correlations(&partitioned_covariance(x, y, 0.0).unwrap()).unwrap()
}

#[test]
fn factor_count_monotone_in_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let z = gaussian(&mut rng, 300, 2);
        let x = &z * gaussian(&mut rng, 2, 6) * 0.3 + gaussian(&mut rng, 300, 6);
        let y = &z * gaussian(&mut rng, 2, 5) * 0.3 + gaussian(&mut rng, 300, 5);
        let sol = cca(&x, &y);
        for deflation in [Deflation::On, Deflation::Off] {
            let mut last = 0;
            for alpha in [0.001, 0.01, 0.05, 0.1, 0.3] {
                let t = count_factors(f1(), &sol, 5, 6, 300, alpha, deflation).unwrap().retained;
                assert!(t >= last);
                last = t;
            }
        }
    }
}

#[test]
fn factor_report_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = gaussian(&mut rng, 100, 4);
    let y = gaussian(&mut rng, 100, 3);
    let sol = cca(&x, &y);
    let report = count_factors(f1(), &sol, 3, 4, 100, 0.01, Deflation::On).unwrap();
    assert_eq!(report.rows.len(), 3);
    assert_eq!(report.rows.iter().map(|r| r.j).collect::<Vec<_>>(), vec![1, 2, 3]);
    assert_eq!((report.rows[1].params.p, report.rows[1].params.m, report.rows[1].params.n), (2, 95, 3));
    let off = count_factors(f1(), &sol, 3, 4, 100, 0.01, Deflation::Off).unwrap();
    assert_eq!((off.rows[2].params.p, off.rows[2].params.n), (3, 4));
    assert!(count_factors(f1(), &sol, 3, 4, 8, 0.01, Deflation::On).is_err());
}
