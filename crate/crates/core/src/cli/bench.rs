//! Timing and agreement of the two Adomian polynomial routes on random
//! component sequences.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::adomian::{adomian_duan, adomian_oracle};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

pub const MAX_BENCH_ORDER: usize = 50;
pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub duan_mean_us: f64,
    pub oracle_mean_us: f64,
    /// Largest `|a − b| / max(|a|, |b|, 1e−3)` over all trials and polynomials
    /// up to `n`; at most 1e−9 exactly when the pair meets the mixed
    /// 1e−9 relative / 1e−12 absolute comparison.
    pub max_deviation: f64,
    pub failures: usize,
}

pub fn mixed_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(1e-3);
    (a - b).abs() / scale
}

/// Components with `u₀ ∈ [0.5, 1.5]`, admissible for every family, and the
/// rest in `[−0.5, 0.5]`.
pub fn random_components(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut u = Vec::with_capacity(n + 1);
    u.push(rng.gen_range(0.5..=1.5));
    u.extend((0..n).map(|_| rng.gen_range(-0.5..=0.5)));
    u
}

pub fn adomian_bench(f: &Nonlinearity, n_max: usize, trials: usize, seed: u64) -> Result<Vec<BenchRow>> {
    if n_max == 0 || n_max > MAX_BENCH_ORDER {
        return Err(Error::Usage(format!("n-max must lie in [1, {MAX_BENCH_ORDER}], got {n_max}")));
    }
    if trials == 0 {
        return Err(Error::Usage("trials must be at least 1".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (mut duan_t, mut oracle_t) = (0.0, 0.0);
        let mut max_dev: f64 = 0.0;
        let mut failures = 0;
        for _ in 0..trials {
            let u = random_components(&mut rng, n);
            let t0 = Instant::now();
            let duan = adomian_duan(&u, f, n);
            let t1 = Instant::now();
            let oracle = adomian_oracle(&u, f, n);
            let t2 = Instant::now();
            duan_t += (t1 - t0).as_secs_f64();
            oracle_t += (t2 - t1).as_secs_f64();
            match (duan, oracle) {
                (Ok(d), Ok(o)) => {
                    for (a, b) in d.polys.iter().zip(&o) {
                        max_dev = max_dev.max(mixed_deviation(*a, *b));
                    }
                }
                _ => failures += 1,
            }
        }
        rows.push(BenchRow {
            n,
            duan_mean_us: duan_t * 1e6 / trials as f64,
            oracle_mean_us: oracle_t * 1e6 / trials as f64,
            max_deviation: max_dev,
            failures,
        });
    }
    Ok(rows)
}
