mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_instance, GROSS};
use statarb::construct::{
    optimize_portfolio, regression_portfolio, weighted_regression_residuals, OptimizerConfig,
};
use statarb::signals::Direction;

fn dir(mr: bool) -> Direction {
    if mr {
        Direction::MeanReversion
    } else {
        Direction::Momentum
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_are_weighted_orthogonal(seed in any::<u64>(), n in 2usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 6, 21, 1.0);
        let w: Vec<f64> = inst.variances.iter().map(|v| 1.0 / v).collect();
        let eps = weighted_regression_residuals(&inst.signal, &inst.dummy, &w).unwrap();
        for grp in inst.dummy.groups() {
            let dot: f64 = grp.iter().map(|&i| w[i] * eps[i]).sum();
            let scale: f64 = grp.iter().map(|&i| (w[i] * inst.signal[i]).abs()).sum();
            prop_assert!(dot.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn regression_sign_coherence_and_scale_invariance(seed in any::<u64>(), n in 2usize..60, mr in any::<bool>(), c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 6, 21, 1.0);
        let loose = vec![f64::INFINITY; n];
        let w: Vec<f64> = inst.variances.iter().map(|v| 1.0 / v).collect();
        let eps = weighted_regression_residuals(&inst.signal, &inst.dummy, &w).unwrap();
        let h = regression_portfolio(&inst.signal, &inst.dummy, &inst.variances, &loose, dir(mr), GROSS).unwrap();
        for (d, e) in h.dollars.iter().zip(&eps) {
            if *d != 0.0 {
                prop_assert_eq!(d.signum(), dir(mr).sign() * e.signum());
            }
        }
        if !h.is_flat() {
            prop_assert!((h.gross() - GROSS).abs() <= 1e-9 * GROSS);
        }
        let scaled: Vec<f64> = inst.signal.iter().map(|x| c * x).collect();
        let h2 = regression_portfolio(&scaled, &inst.dummy, &inst.variances, &loose, dir(mr), GROSS).unwrap();
        for (a, b) in h.dollars.iter().zip(&h2.dollars) {
            prop_assert!((a - b).abs() <= 1e-9 * GROSS);
        }
    }

    #[test]
    fn bounded_portfolios_never_exceed_gross(seed in any::<u64>(), n in 2usize..120, mr in any::<bool>(), scale in 0.2f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 8, 21, scale);
        let reg = regression_portfolio(&inst.signal, &inst.dummy, &inst.variances, &inst.bounds, dir(mr), GROSS).unwrap();
        prop_assert!(reg.gross() <= GROSS * (1.0 + 1e-9));
        let w: Vec<f64> = inst.variances.iter().map(|v| 1.0 / v).collect();
        let e: Vec<f64> = weighted_regression_residuals(&inst.signal, &inst.dummy, &w)
            .unwrap()
            .iter()
            .map(|x| dir(mr).sign() * x)
            .collect();
        let opt = optimize_portfolio(&e, &inst.model, &inst.bounds, GROSS, OptimizerConfig::default()).unwrap();
        prop_assert!(opt.info.converged);
        prop_assert!(opt.info.kkt_residual <= 1e-8, "kkt {}", opt.info.kkt_residual);
        prop_assert!(opt.gross() <= GROSS * (1.0 + 1e-9), "gross {} > {}", opt.gross(), GROSS);
    }

    #[test]
    fn bounded_equals_unbounded_when_nothing_binds(seed in any::<u64>(), n in 2usize..60, mr in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 6, 21, 1.0);
        let loose = vec![f64::INFINITY; n];
        let free = regression_portfolio(&inst.signal, &inst.dummy, &inst.variances, &loose, dir(mr), GROSS).unwrap();
        // Bounds that sit just above every unbounded position.
        let snug: Vec<f64> = free.dollars.iter().map(|d| d.abs() * (1.0 + 1e-12) + 1.0).collect();
        let bounded = regression_portfolio(&inst.signal, &inst.dummy, &inst.variances, &snug, dir(mr), GROSS).unwrap();
        prop_assert_eq!(free.dollars, bounded.dollars);
    }

    #[test]
    fn optimizer_iteration_cap_returns_feasible_iterate(seed in any::<u64>(), n in 10usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, n, 6, 21, 0.3);
        let w: Vec<f64> = inst.variances.iter().map(|v| 1.0 / v).collect();
        let e = weighted_regression_residuals(&inst.signal, &inst.dummy, &w).unwrap();
        let h = optimize_portfolio(&e, &inst.model, &inst.bounds, GROSS, OptimizerConfig { max_iterations: Some(2) }).unwrap();
        prop_assert!(h.net().abs() <= 1e-6 * GROSS);
        for (d, b) in h.dollars.iter().zip(&inst.bounds) {
            prop_assert!(d.abs() <= b * (1.0 + 1e-9));
        }
    }
}
