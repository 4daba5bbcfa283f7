//! Property tests. Random structures come from seeded generators so a
//! failing case is reproducible from the printed seed alone.

use dlmc_core::circuit::netlist;
use dlmc_core::circuit::normalize::{normalize, normalize_even};
use dlmc_core::corpus;
use dlmc_core::dist::{tvd, Distribution};
use dlmc_core::dyadic::Dyadic;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_circuits_validate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = corpus::random_circuit(&mut rng);
        prop_assert!(c.validate().is_valid());
    }

    #[test]
    fn normalizing_keeps_every_output_law(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let messy = corpus::random_messy_circuit(&mut rng);
        prop_assume!(messy.validate().is_structurally_sound());
        let clean = normalize(&messy).unwrap();
        prop_assert!(clean.validate().is_valid());
        let n = messy.num_inputs();
        for v in 0..1usize << n {
            let q: Vec<bool> = (0..n).map(|j| (v >> (n - 1 - j)) & 1 == 1).collect();
            let before = messy.output_distribution(&q, 16).unwrap();
            let after = clean.output_distribution(&q, 16).unwrap();
            prop_assert!(tvd(&before, &after).is_zero(), "law changed on {q:?}");
        }
    }

    #[test]
    fn normalizing_twice_changes_nothing(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let messy = corpus::random_messy_circuit(&mut rng);
        prop_assume!(messy.validate().is_structurally_sound());
        let once = normalize(&messy).unwrap();
        prop_assert_eq!(normalize(&once).unwrap(), once);
        let even = normalize_even(&messy).unwrap();
        prop_assert_eq!(normalize_even(&even).unwrap(), even);
    }

    #[test]
    fn netlists_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = corpus::random_circuit(&mut rng);
        let text = netlist::serialize(&c);
        prop_assert_eq!(netlist::parse(&text).unwrap(), c);
    }

    #[test]
    fn distance_is_a_metric_on_small_distributions(
        ps in prop::collection::vec(0u32..4, 3),
        qs in prop::collection::vec(0u32..4, 3),
        rs in prop::collection::vec(0u32..4, 3),
    ) {
        // Three-outcome distributions with dyadic weights. Skewed mass
        // is pushed onto the first key so each one sums to one.
        fn dist(weights: &[u32]) -> Distribution {
            let mut d = Distribution::new();
            let mut rest = Dyadic::one();
            for (i, &w) in weights.iter().enumerate() {
                // keys "k0", "k1", ...; weight w/8 each
                let p = Dyadic::from_ratio(w as u64, 3);
                rest = rest.sub(&p);
                d.add(format!("k{i}"), p);
            }
            d.add("k*".into(), rest);
            d
        }
        prop_assume!(ps.iter().sum::<u32>() <= 8);
        prop_assume!(qs.iter().sum::<u32>() <= 8);
        prop_assume!(rs.iter().sum::<u32>() <= 8);
        let (p, q, r) = (dist(&ps), dist(&qs), dist(&rs));
        prop_assert!(p.is_normalized());
        prop_assert_eq!(tvd(&p, &q), tvd(&q, &p));
        prop_assert_eq!(tvd(&p, &p), Dyadic::zero());
        let direct = tvd(&p, &r);
        let via = tvd(&p, &q).add(&tvd(&q, &r));
        prop_assert!(direct <= via, "triangle broken: {direct} > {via}");
    }
}
