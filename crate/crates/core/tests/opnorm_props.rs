use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use newton_osc::opnorm::{
    dense_norm, operator_norm, schur_bound, size_bound, DiscreteOperator, Domain, NormConfig,
    PhaseSpec,
};
use newton_osc::BivarPoly;

/// Low-degree integer phases.
fn phase() -> impl Strategy<Value = BivarPoly> {
    prop::collection::vec(((0u32..=3, 0u32..=3), -3i64..=3), 1..=5)
        .prop_map(|t| BivarPoly::from_int_terms(&t))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_below_schur_and_size(s in phase(), rho in 0.1f64..=1.0, lambda in 0.0f64..200.0) {
        let p = PhaseSpec::new(s, rho).unwrap();
        let op = DiscreteOperator::new(p.domain(), 96, p.kernel(lambda), usize::MAX);
        let est = operator_norm(&op, 1e-10, 5000, 3).map_or_else(|e| e.value(), |e| e.value);
        prop_assert!(est <= 1.01 * schur_bound(&op), "{} > schur {}", est, schur_bound(&op));
        let side = 2.0 * rho;
        prop_assert!(est <= 1.01 * size_bound(side, side), "{} > size {}", est, side);
    }

    #[test]
    fn adjoint_identity(s in phase(), lambda in 0.0f64..500.0, seed in any::<u64>()) {
        let p = PhaseSpec::new(s, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cache in [usize::MAX, 0] {
            let op = DiscreteOperator::new(p.domain(), 80, p.kernel(lambda), cache);
            let (f, g) = (random_vec(&mut rng, 80), random_vec(&mut rng, 80));
            let lhs = dot(&op.apply(&f), &g);
            let rhs = dot(&f, &op.apply_adjoint(&g));
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "{} vs {}", lhs, rhs);
        }
    }

    #[test]
    fn power_iteration_matches_dense_svd(n in 4usize..=96, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_vec(&mut rng, n * n);
        let h = 1.0 / n as f64;
        let cell = move |v: f64| ((v / h) as usize).min(n - 1);
        let op = DiscreteOperator::new(
            Domain::square(0.0, 1.0),
            n,
            move |x, y| m[cell(x) * n + cell(y)],
            usize::MAX,
        );
        let est = operator_norm(&op, 1e-14, 20_000, seed).map_or_else(|e| e.value(), |e| e.value);
        let exact = dense_norm(&op.to_dense());
        prop_assert!((est - exact).abs() <= 1e-6 * exact, "{} vs {}", est, exact);
    }

    #[test]
    fn accepted_samples_are_grid_converged(s in phase(), lambda in 1.0f64..32.0) {
        let p = PhaseSpec::new(s, 0.5).unwrap();
        let cfg = NormConfig { max_n: 1024, ..NormConfig::default() };
        let sample = p.norm(lambda, &cfg).unwrap();
        prop_assert!(sample.valid(cfg.conv_tol), "{:?}", sample);
        prop_assert!(sample.conv_err < 0.02);
    }
}

#[test]
fn hormander_norm_scales_like_lambda_to_minus_half() {
    let p = PhaseSpec::new(BivarPoly::from_int_terms(&[((1, 1), 1)]), 0.5).unwrap();
    let cfg = NormConfig::default();
    let q: Vec<f64> = (4..=10)
        .map(|k| {
            let l = (2f64).powi(k);
            let s = p.norm(l, &cfg).unwrap();
            assert!(s.valid(cfg.conv_tol), "{s:?}");
            s.norm * l.sqrt()
        })
        .collect();
    let (lo, hi) = q
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(lo > 0.1 && hi / lo < 4.0, "{q:?}");
}
