//! Property-based tests for the structural invariants: reductions,
//! product extensions, entropy inequalities, and covariance validity.

use lattherm::entropy;
use lattherm::gaussian;
use lattherm::linalg;
use lattherm::monomial::Statistics;
use lattherm::potential::ModelSpec;
use lattherm::states::{self, random_density};
use lattherm::Window;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_reduce_consistency(seed in any::<u64>(), mask in 1u8..15) {
        // reduce(reduce(ρ, A∪B), A) = reduce(ρ, A) for nested subsets of a
        // 4-site window
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Window::new(0, 3, Statistics::Spin).unwrap();
        let rho = random_density(&mut rng, w.sites(), Statistics::Spin, false).unwrap();
        let big: Vec<i64> = (0..4).filter(|i| (mask >> i) & 1 == 1).collect();
        let small: Vec<i64> = big.iter().copied().take(1.max(big.len() / 2)).collect();
        let big_r = w.region(big).unwrap();
        let small_r = w.region(small).unwrap();
        let direct = states::reduce(&rho, &small_r).unwrap();
        let iterated = states::reduce(&states::reduce(&rho, &big_r).unwrap(), &small_r).unwrap();
        prop_assert!(linalg::max_abs(&(&direct.matrix - &iterated.matrix)) < 1e-12);
    }

    #[test]
    fn prop_entropy_additive_on_products(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&mut rng, vec![0, 1], Statistics::Spin, false).unwrap();
        let b = random_density(&mut rng, vec![2], Statistics::Spin, false).unwrap();
        let ab = states::product_extend(&a, &b).unwrap();
        let s_ab = entropy::von_neumann_full(&ab).unwrap();
        let s_a = entropy::von_neumann_full(&a).unwrap();
        let s_b = entropy::von_neumann_full(&b).unwrap();
        prop_assert!((s_ab - s_a - s_b).abs() < 1e-10);
    }

    #[test]
    fn prop_fermionic_product_entropy_additive(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_density(&mut rng, vec![0, 1], Statistics::Fermion, true).unwrap();
        let b = random_density(&mut rng, vec![2, 3], Statistics::Fermion, true).unwrap();
        let ab = states::product_extend(&a, &b).unwrap();
        let s_ab = entropy::von_neumann_full(&ab).unwrap();
        let s_a = entropy::von_neumann_full(&a).unwrap();
        let s_b = entropy::von_neumann_full(&b).unwrap();
        prop_assert!((s_ab - s_a - s_b).abs() < 1e-10);
    }

    #[test]
    fn prop_mutual_entropy_nonnegative_and_routes_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Window::new(0, 2, Statistics::Spin).unwrap();
        let rho = random_density(&mut rng, w.sites(), Statistics::Spin, false).unwrap();
        let a = w.range_region(0, 0).unwrap();
        let b = w.range_region(1, 2).unwrap();
        let m = entropy::mutual_entropy(&rho, &a, &b).unwrap();
        prop_assert!(m >= -1e-10);
        let via_rel = entropy::mutual_entropy_via_relative(&rho, &a, &b).unwrap();
        prop_assert!((via_rel.nats - m).abs() < 1e-9);
    }

    #[test]
    fn prop_gaussian_restriction_valid(seed in any::<u64>(), beta in 0.05f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = 0.2 + 1.5 * rand::Rng::random_range(&mut rng, 0.0..1.0);
        let delta = rand::Rng::random_range(&mut rng, 0.0..1.5);
        let mu = rand::Rng::random_range(&mut rng, -2.0..2.0);
        let phi = ModelSpec::KitaevChain { t, delta, mu }.potential().unwrap();
        let bdg = gaussian::bdg_from_potential(&phi, 10).unwrap();
        let (cov, _) = gaussian::thermal_covariance(&bdg, beta).unwrap();
        prop_assert!(cov.validate().is_ok());
        // mutual information of disjoint blocks is non-negative
        let m = gaussian::gaussian_mutual(&cov, &[0, 1, 2], &[5, 6]).unwrap();
        prop_assert!(m >= -1e-8);
    }
}
