use mdhier::brackets::{commutator_closed, ehrhart, ehrhart_bruteforce, poisson_u, random_u_monomial};
use mdhier::hierarchy::functional_zero_u;
use mdhier::suites::random_density;
use mdhier::{Bounds, UPolynomial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ehrhart_counts_lattice_points(d in prop::collection::vec(0u32..4, 1..4), a in 0u64..10) {
        prop_assert_eq!(ehrhart(&d, a), ehrhart_bruteforce(&d, a).unwrap());
    }

    #[test]
    fn poisson_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Bounds::new(0, 2);
        let (f, g) = (random_density(&mut rng, b), random_density(&mut rng, b));
        prop_assert_eq!(functional_zero_u(&poisson_u(&f, &g).add(&poisson_u(&g, &f))), None);
    }

    #[test]
    fn commutator_of_functionals_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = Bounds::new(0, 2);
        let f = UPolynomial::from_monomial(random_u_monomial(&mut rng, 2, 3, 1), b);
        let g = UPolynomial::from_monomial(random_u_monomial(&mut rng, 2, 3, 1), b);
        prop_assert_eq!(functional_zero_u(&commutator_closed(&f, &g).add(&commutator_closed(&g, &f))), None);
    }
}
