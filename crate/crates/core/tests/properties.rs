use proptest::prelude::*;

use smoothot::experiment::ExperimentConfig;
use smoothot::hardness::{binary_search_min, search_levels};
use smoothot::measure::discrete_c_transform;
use smoothot::noise::{bisection_probs, choice_from_utilities, smooth_c_transform, sparsemax_probs};
use smoothot::{CostSpec, DiscreteMeasure, MarginalModel, ModelKind, Potential};

fn kind_strategy() -> impl Strategy<Value = ModelKind> {
    prop_oneof![
        Just(ModelKind::Exponential),
        Just(ModelKind::Uniform),
        (1.2f64..3.5).prop_map(|q| ModelKind::Pareto { q }),
        Just(ModelKind::Hyperbolic),
        Just(ModelKind::TDist),
    ]
}

fn weights(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    })
}

fn instance() -> impl Strategy<Value = (ModelKind, f64, Vec<f64>, Vec<f64>)> {
    (2usize..8).prop_flat_map(|n| {
        (
            kind_strategy(),
            0.05f64..3.0,
            weights(n),
            prop::collection::vec(-2.0f64..2.0, n),
        )
            .prop_map(|(kind, lambda, eta, u)| {
                let eta = if kind == ModelKind::TDist { vec![1.0 / eta.len() as f64; eta.len()] } else { eta };
                (kind, lambda, eta, u)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn probabilities_lie_in_simplex((kind, lambda, eta, u) in instance()) {
        let m = MarginalModel::new(kind, lambda, eta).unwrap();
        let p = choice_from_utilities(&u, &m, 1e-9).unwrap();
        prop_assert!(p.p.iter().all(|v| *v >= 0.0 && *v <= 1.0));
        prop_assert!((p.sum() - 1.0).abs() <= 1e-8 * u.len() as f64 + 1e-12);
    }

    #[test]
    fn larger_utility_never_lowers_its_probability((kind, lambda, eta, u) in instance(), bump in 0.0f64..0.5) {
        let m = MarginalModel::new(kind, lambda, eta).unwrap();
        let before = choice_from_utilities(&u, &m, 1e-11).unwrap().p[0];
        let mut v = u.clone();
        v[0] += bump;
        let after = choice_from_utilities(&v, &m, 1e-11).unwrap().p[0];
        prop_assert!(after >= before - 1e-8);
    }

    #[test]
    fn shift_equivariance((kind, lambda, eta, phi) in instance(), shift in -3.0f64..3.0, x in -1.0f64..1.0) {
        let n = phi.len();
        let nu = DiscreteMeasure::uniform((0..n).map(|i| vec![i as f64 / n as f64]).collect()).unwrap();
        let m = MarginalModel::new(kind, lambda, eta).unwrap();
        let cost = CostSpec::PNormPower { p: 2.0 };
        let a = smooth_c_transform(&Potential::new(phi.clone()).unwrap(), &[x], &nu, &cost, &m, 1e-12).unwrap();
        let shifted: Vec<f64> = phi.iter().map(|v| v + shift).collect();
        let b = smooth_c_transform(&Potential::new(shifted).unwrap(), &[x], &nu, &cost, &m, 1e-12).unwrap();
        prop_assert!((b - a - shift).abs() < 1e-6, "{} vs {}", b - a, shift);
    }

    #[test]
    fn sandwich((kind, lambda, eta, phi) in instance(), x in -1.0f64..1.0) {
        let n = phi.len();
        let nu = DiscreteMeasure::uniform((0..n).map(|i| vec![i as f64 / n as f64]).collect()).unwrap();
        let m = MarginalModel::new(kind, lambda, eta).unwrap();
        let phi = Potential::new(phi).unwrap();
        let cost = CostSpec::SupNorm;
        let hard = discrete_c_transform(&phi, &[x], &nu, &cost).unwrap().0;
        let smooth = smooth_c_transform(&phi, &[x], &nu, &cost, &m, 1e-12).unwrap();
        prop_assert!(smooth <= hard + 1e-7);
        prop_assert!(smooth >= hard - m.approximation_bound() - 1e-7);
    }

    #[test]
    fn sparsemax_is_pareto_two((lambda, eta, u) in (2usize..8).prop_flat_map(|n| (0.05f64..3.0, weights(n), prop::collection::vec(-2.0f64..2.0, n)))) {
        let m = MarginalModel::new(ModelKind::Pareto { q: 2.0 }, lambda, eta.clone()).unwrap();
        let scaled: Vec<f64> = u.iter().map(|v| v / lambda).collect();
        let a = sparsemax_probs(&scaled, &eta).unwrap().p;
        let b = bisection_probs(&u, &m, 1e-9).unwrap().p;
        let err: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-6);
    }

    #[test]
    fn binary_search_budget(delta in 1e-7f64..0.9, target in 0.0f64..1.0) {
        let mut calls = 0usize;
        let r = binary_search_min(|t| { calls += 1; Ok((t - target).powi(2)) }, delta).unwrap();
        let levels = search_levels(delta).unwrap();
        prop_assert_eq!(calls, 2 * levels as usize);
        prop_assert_eq!(r.calls, calls);
        prop_assert!((r.t - target).abs() <= delta);
    }

    #[test]
    fn config_round_trip(seeds in prop::collection::vec(any::<u64>(), 1..5), mult in 1usize..20, eps in 0.0f64..1.0) {
        let mut cfg = ExperimentConfig::extended("somewhere");
        cfg.seeds = seeds;
        cfg.multiplier = mult;
        cfg.eps_bar = eps;
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(cfg, back);
    }
}
