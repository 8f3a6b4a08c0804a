#![allow(dead_code)]

use std::path::Path;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rmtfactor::panel;
use rmtfactor_core::ingest::PriceTable;

/// Prices whose returns follow `returns`, starting at 100.
pub fn prices_from_returns(returns: &DMatrix<f64>, names: Vec<String>) -> PriceTable {
    let (n, p) = returns.shape();
    let mut values = DMatrix::from_element(n + 1, p, 100.0);
    for t in 0..n {
        for j in 0..p {
            values[(t + 1, j)] = values[(t, j)] * (1.0 + returns[(t, j)]);
        }
    }
    let stamps = (0..=n as i64).map(|t| 1_600_000_000 + 86_400 * t).collect();
    PriceTable::new(stamps, names, values).unwrap()
}

/// Ten leading assets and ten that follow them one step later, driven by two
/// persistent latent factors (five leaders and five followers each).
pub fn two_factor_panel(seed: u64, n: usize) -> PriceTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut factors = DMatrix::<f64>::zeros(n + 1, 2);
    for t in 1..=n {
        for k in 0..2 {
            factors[(t, k)] = 0.7 * factors[(t - 1, k)] + normal();
        }
    }
    let mut returns = DMatrix::<f64>::zeros(n, 20);
    for t in 0..n {
        for j in 0..10 {
            let k = j / 5;
            returns[(t, j)] = 0.01 * (factors[(t + 1, k)] + normal());
            returns[(t, 10 + j)] = 0.01 * (factors[(t, k)] + normal());
        }
    }
    let names = (0..10).map(|j| format!("lead{j}")).chain((0..10).map(|j| format!("follow{j}"))).collect();
    prices_from_returns(&returns, names)
}

pub fn write_two_factor_panel(path: &Path, seed: u64, n: usize) {
    panel::write_prices(path, &two_factor_panel(seed, n)).unwrap();
}

/// Independent Gaussian returns.
pub fn noise_panel(seed: u64, n: usize, p: usize) -> PriceTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let returns = DMatrix::from_fn(n, p, |_, _| {
        let e: f64 = StandardNormal.sample(&mut rng);
        0.01 * e
    });
    prices_from_returns(&returns, (0..p).map(|j| format!("x{j}")).collect())
}
