use std::sync::Arc;

use proptest::prelude::*;
use rpqv_core::experiments::fubini_pair;
use rpqv_core::pathwise_integrals::{
    iterated_double_integral, iterated_double_integral_lagged, iterated_double_integral_naive,
    realized_qv, realized_qv_full,
};
use rpqv_core::periodogram::{
    periodogram, randomized_periodogram, rs_periodogram, QuadratureSpec, RandomizedKernel, XQuadrature,
};
use rpqv_core::{
    sample_brownian, sample_mixed, Complex64, FbmGenerator, Hurst, RandomizerSpec, SamplePath, Seed, TimeGrid,
};

fn mixed(n: usize, h: f64, seed: u64) -> SamplePath {
    let grid = Arc::new(TimeGrid::equidistant(1.0, n).unwrap());
    sample_mixed(&grid, Hurst::new(h).unwrap(), Seed(seed)).unwrap().mixed
}

fn irregular_grid(cuts: &[f64]) -> Arc<TimeGrid> {
    let mut times: Vec<f64> = cuts.iter().map(|c| c.clamp(1e-6, 1.0 - 1e-6)).collect();
    times.push(0.0);
    times.push(1.0);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    Arc::new(TimeGrid::from_times(times).unwrap())
}

fn randomizer() -> impl Strategy<Value = RandomizerSpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|s| RandomizerSpec::gaussian(s).unwrap()),
        (0.2f64..3.0).prop_map(|a| RandomizerSpec::uniform(a).unwrap()),
        (0.2f64..3.0).prop_map(|b| RandomizerSpec::laplace(b).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn periodogram_is_even_and_nonnegative(seed in any::<u64>(), lambda in -500.0f64..500.0, h in 0.55f64..0.95) {
        let x = mixed(256, h, seed);
        let a = periodogram(&x, lambda);
        prop_assert!(a >= 0.0);
        prop_assert!((a - periodogram(&x, -lambda)).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn discrete_ito_identity(seed in any::<u64>(), lambda in 0.0f64..300.0, cuts in prop::collection::vec(0.0f64..1.0, 2..80)) {
        // holds on arbitrary partitions, not only equidistant ones
        let grid = irregular_grid(&cuts);
        let x = FbmGenerator::new(grid.clone(), Hurst::new(0.7).unwrap()).unwrap().sample_mixed(Seed(seed)).mixed;
        let lhs = rs_periodogram(&x, lambda);
        let kernel = |u: f64| Complex64::from_polar(1.0, lambda * u);
        let rhs = realized_qv_full(&x) + 2.0 * iterated_double_integral(kernel, &x, &x).unwrap().re;
        prop_assert!((lhs - rhs).abs() / (1.0 + lhs) < 1e-11, "{lhs} vs {rhs}");
    }

    #[test]
    fn rs_periodogram_ignores_level_and_scales_quadratically(seed in any::<u64>(), lambda in 0.0f64..100.0, c in -5.0f64..5.0) {
        let x = mixed(128, 0.8, seed);
        let base = rs_periodogram(&x, lambda);
        prop_assert!((rs_periodogram(&x.shifted(c), lambda) - base).abs() <= 1e-12 * base.max(1.0));
        prop_assert!((rs_periodogram(&x.scaled(c), lambda) - c * c * base).abs() <= 1e-12 * (c * c * base).max(1.0));
    }

    #[test]
    fn randomized_periodogram_nonnegative_and_consistent(seed in any::<u64>(), l in 0.0f64..60.0, xi in randomizer()) {
        let x = mixed(512, 0.75, seed);
        let q = QuadratureSpec::default_for(&xi);
        let direct = randomized_periodogram(&x, l, &xi, &q).unwrap();
        prop_assert!(direct.value >= 0.0);
        let rule = q.materialize(&xi).unwrap().unwrap();
        prop_assert!(rule.weights.iter().all(|&w| w >= 0.0));
        // quadrature in x commutes with the lag decomposition
        let via_lags = RandomizedKernel::new(x.grid(), l, &xi, &q).unwrap().evaluate(&x);
        prop_assert!((direct.value - via_lags).abs() <= 1e-8 * direct.value.max(1e-300) + 1e-14,
            "{} vs {via_lags}", direct.value);
        let k = |u: f64| Complex64::new(rule.char_fn(l * u), 0.0);
        let decomposed = realized_qv_full(&x) + 2.0 * iterated_double_integral_naive(k, &x, &x).unwrap().re;
        prop_assert!((direct.value - decomposed).abs() <= 1e-8 * direct.value.max(1e-300) + 1e-14);
    }

    #[test]
    fn exact_rule_is_qv_plus_error_term(seed in any::<u64>(), l in 0.0f64..2000.0, xi in randomizer()) {
        let x = mixed(256, 0.65, seed);
        let exact = randomized_periodogram(&x, l, &xi, &QuadratureSpec::exact()).unwrap().value;
        let table = RandomizedKernel::new(x.grid(), l, &xi, &QuadratureSpec::exact()).unwrap().evaluate(&x);
        prop_assert!((exact - table).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn fubini_interchange_is_exact(seed in any::<u64>(), nodes in 1usize..80, sigma in 0.3f64..3.0) {
        let grid = Arc::new(TimeGrid::equidistant(1.0, 128).unwrap());
        let xi = RandomizerSpec::gaussian(sigma).unwrap();
        let rule = XQuadrature::legendre_window(&xi, 8.0 * sigma, nodes);
        let w = sample_brownian(&grid, Seed(seed));
        let b = FbmGenerator::new(grid, Hurst::new(0.7).unwrap()).unwrap().sample(Seed(seed));
        let (i1, i2) = fubini_pair(&w, &b, &rule);
        prop_assert!((i1 - i2).norm() / (1.0 + i1.norm()) < 1e-10);
    }

    #[test]
    fn lagged_double_sum_matches_naive(seed in any::<u64>(), n in 2usize..400, lambda in 0.0f64..200.0) {
        let x = mixed(n, 0.7, seed);
        let y = mixed(n, 0.9, seed ^ 1);
        let k = |u: f64| Complex64::from_polar((-u).exp(), lambda * u);
        let a = iterated_double_integral_naive(k, &x, &y).unwrap();
        let b = iterated_double_integral_lagged(k, &x, &y).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn restriction_matches_coarse_qv(seed in any::<u64>(), levels in 1usize..6) {
        let fine = mixed(1 << 10, 0.75, seed);
        let mut grid = fine.grid().as_ref().clone();
        for _ in 0..levels {
            grid = grid.coarsen(2).unwrap();
        }
        let coarse = Arc::new(grid);
        let restricted = fine.restrict(&coarse).unwrap();
        prop_assert_eq!(realized_qv(&fine, &coarse).unwrap(), realized_qv_full(&restricted));
        prop_assert_eq!(restricted.terminal(), fine.terminal());
    }

    #[test]
    fn csv_round_trip_is_exact(seed in any::<u64>(), n in 1usize..300) {
        let x = mixed(n, 0.6, seed);
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let back = SamplePath::read_csv(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.values(), x.values());
        prop_assert_eq!(back.grid().times(), x.grid().times());
    }
}
