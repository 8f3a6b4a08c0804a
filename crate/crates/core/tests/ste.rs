use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rmtfactor_core::ingest::{ReturnMatrix, Standardization};
use rmtfactor_core::symbolic::{
    chi2_pvalue, grid_scan, pairwise_ste_matrix, permutation_entropy, ste, surrogate_pvalue, symbolize, GridRow,
    SignificanceMethod, SteParams, SymbolSequence,
};

fn codes(rng: &mut ChaCha8Rng, len: usize, alphabet: u16) -> Vec<u16> {
    (0..len).map(|_| rng.random_range(0..alphabet)).collect()
}

fn seq(symbols: Vec<u16>, m: usize) -> SymbolSequence {
    SymbolSequence::from_codes(symbols, m, 1).unwrap()
}

fn panel(values: DMatrix<f64>) -> ReturnMatrix {
    let names = (0..values.ncols()).map(|j| format!("a{j}")).collect();
    let stamps = (0..values.nrows() as i64).collect();
    ReturnMatrix::new(names, stamps, values, Standardization::None).unwrap()
}

fn chi2(dt: usize, m: usize, level: f64) -> SteParams {
    SteParams { dt, m, l: 1, delta: 1, level, method: SignificanceMethod::ChiSquared }
}

#[test]
fn worked_entropy_example() {
    let s = symbolize(&[1.0, 2.0, 3.0, 6.0, 5.0, 4.0], 2, 1).unwrap();
    assert_eq!(s.symbols, vec![0, 0, 0, 1, 1]);
    assert!((permutation_entropy(&s).unwrap() - 0.971).abs() < 1e-3);
}

#[test]
fn copied_source_carries_one_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 100_000;
    let source = codes(&mut rng, n, 2);
    let mut target = vec![rng.random_range(0..2)];
    target.extend_from_slice(&source[..n - 1]);
    let t = ste(&seq(source, 2), &seq(target, 2), 1).unwrap().value;
    assert!((t - 1.0).abs() < 0.02, "{t}");
}

fn rejection_rate(level: f64, runs: usize, mut pvalue: impl FnMut(&mut ChaCha8Rng) -> f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    (0..runs).filter(|_| pvalue(&mut rng) < level).count() as f64 / runs as f64
}

#[test]
fn chi2_calibration_on_independent_streams() {
    for (alphabet, m, len) in [(2u16, 2, 2000), (6, 3, 20_000)] {
        let rate = rejection_rate(0.10, 1000, |rng| {
            let (x, y) = (seq(codes(rng, len, alphabet), m), seq(codes(rng, len, alphabet), m));
            let est = ste(&y, &x, 1).unwrap();
            chi2_pvalue(&est, (est.target_alphabet, est.source_alphabet), est.triples).unwrap()
        });
        assert!((rate - 0.10).abs() <= 0.03, "alphabet {alphabet}: {rate}");
    }
}

#[test]
fn surrogate_calibration_on_independent_streams() {
    let rate = rejection_rate(0.10, 1000, |rng| {
        let (x, y) = (seq(codes(rng, 500, 6), 3), seq(codes(rng, 500, 6), 3));
        surrogate_pvalue(&y, &x, 1, 99, rng.random()).unwrap()
    });
    assert!((rate - 0.10).abs() <= 0.03, "{rate}");
}

#[test]
fn independent_noise_pairs_are_not_significant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let clean = (0..100)
        .filter(|_| {
            let values = DMatrix::from_fn(1000, 2, |_, _| StandardNormal.sample(&mut rng));
            let m = pairwise_ste_matrix(&panel(values), &chi2(1, 3, 0.01)).unwrap();
            m.mask.iter().all(|&b| !b)
        })
        .count();
    assert!(clean >= 95, "{clean}");
}

#[test]
fn matrix_entries_are_pairwise_estimates() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values = DMatrix::from_fn(400, 4, |_, _| StandardNormal.sample(&mut rng));
    let returns = panel(values.clone());
    for method in [SignificanceMethod::ChiSquared, SignificanceMethod::Surrogate { count: 19, seed: 9 }] {
        let params = SteParams { dt: 2, m: 3, l: 1, delta: 1, level: 0.1, method };
        let matrix = pairwise_ste_matrix(&returns, &params).unwrap();
        let aligned = 400 - 2 - 2;
        for a in 0..4 {
            for b in 0..4 {
                if a == b {
                    assert_eq!(matrix.value(a, b), 0.0);
                    assert!(!matrix.significant(a, b));
                    continue;
                }
                let col = |j: usize| values.column(j).iter().copied().collect::<Vec<_>>();
                let source = symbolize(&col(a), 3, 1).unwrap().window(0, aligned);
                let target = symbolize(&col(b), 3, 1).unwrap().window(2, aligned);
                let direct = ste(&source, &target, 1).unwrap().value;
                assert!((matrix.value(a, b) - direct).abs() < 1e-12);
                assert_eq!(matrix.significant(a, b), matrix.pvalue(a, b) < 0.1);
            }
        }
    }
}

#[test]
fn single_cell_grid_is_the_matrix_summary() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let returns = panel(DMatrix::from_fn(300, 5, |_, _| StandardNormal.sample(&mut rng)));
    let params = chi2(1, 2, 0.3);
    let report = grid_scan(&returns, &[1], &[2], &params, 0.9).unwrap();
    let direct = GridRow::from_matrix(&pairwise_ste_matrix(&returns, &params).unwrap());
    assert_eq!(report.rows, vec![direct]);
    assert_eq!(report.selected, Some(0));
}

#[test]
fn planted_lag_is_selected() {
    // Targets copy their sources three samples late, so the target symbol one
    // step ahead repeats the current source symbol only at dt = 2.
    let (n, pairs) = (400, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut values = DMatrix::from_fn(n, 2 * pairs, |_, _| StandardNormal.sample(&mut rng));
    for k in 0..pairs {
        for t in 3..n {
            values[(t, pairs + k)] += 0.6 * values[(t - 3, k)];
        }
    }
    let report = grid_scan(&panel(values), &[0, 1, 2, 3], &[2, 3], &chi2(0, 2, 0.01), 0.9).unwrap();
    let chosen = report.selected_row().unwrap();
    assert_eq!((chosen.dt, chosen.m), (2, 2), "{:?}", report.rows);
}
