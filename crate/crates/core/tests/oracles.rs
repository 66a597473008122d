use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use potts_ghs::derivatives::{ghs_i, second_derivative_analytic, second_derivative_exact, second_derivative_fd, Method};
use potts_ghs::model::{boltzmann_weight, configurations, GhostWeightVector, ModelSpec};
use potts_ghs::model_file::{parse_model, LoadedModel};
use potts_ghs::sampling::{random_weights, trial_rng};

/// Third joint cumulant of the indicators `[σ_i = 1]` by summing Boltzmann
/// weights over every configuration, ghost fixed to state 1.
fn brute_force_cumulant(w: &GhostWeightVector, i: usize, j: usize, k: usize) -> BigRational {
    let mut z = BigRational::zero();
    let mut moments = vec![BigRational::zero(); 8];
    for config in configurations(w.n_sites(), w.n_states(), false) {
        let h = boltzmann_weight(w, &config).unwrap();
        let bits = [i, j, k]
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &s)| acc | (usize::from(config.spin(s) == 1) << b));
        // moments[m] accumulates the product over the sites selected by m
        for (m, slot) in moments.iter_mut().enumerate() {
            if bits & m == m {
                *slot += &h;
            }
        }
        z += h;
    }
    let e: Vec<BigRational> = moments.iter().map(|v| v / &z).collect();
    // κ3 = E[abc] - E[ab]E[c] - E[ac]E[b] - E[bc]E[a] + 2E[a]E[b]E[c]
    let two = BigRational::from_integer(2.into());
    &e[7] - &e[3] * &e[4] - &e[5] * &e[2] - &e[6] * &e[1] + two * &e[1] * &e[2] * &e[4]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ising_correlation_is_nonpositive(n in 3usize..=4, seed in any::<u64>()) {
        let w = random_weights(n, 2, &mut trial_rng(seed, 0)).unwrap();
        prop_assert!(!ghs_i(&w).unwrap().is_positive());
    }

    #[test]
    fn analytic_derivative_is_the_enumerated_cumulant(n in 3usize..=4, r in 2u32..=3, seed in any::<u64>()) {
        let w = random_weights(n, r, &mut trial_rng(seed, 1)).unwrap();
        prop_assert_eq!(second_derivative_analytic(&w, 1, 2, 3).unwrap(), brute_force_cumulant(&w, 1, 2, 3));
        prop_assert_eq!(second_derivative_analytic(&w, 2, 3, 1).unwrap(), brute_force_cumulant(&w, 2, 3, 1));
    }
}

#[test]
fn model_file_routes_agree() {
    let LoadedModel::Exact(w) = parse_model(
        r#"{"n_sites": 4, "n_states": 3, "mode": "exact-weights",
            "couplings": [[1, 2, "3/2"], [2, 3, "5/1"], [1, 4, "9/4"], [3, 4, "2/1"]],
            "fields": ["1/1", "7/5", "2/1", "3/1"]}"#,
    )
    .unwrap() else {
        panic!("expected an exact model")
    };
    for sites in [(1, 2, 3), (4, 1, 3), (2, 4, 1)] {
        let a = second_derivative_exact(&w, sites, Method::Analytic).unwrap();
        let b = second_derivative_exact(&w, sites, Method::ViaI).unwrap();
        assert_eq!(a.value, b.value, "sites {sites:?}");
        assert_eq!(a.digest, b.digest);
    }
}

#[test]
fn three_state_instance_with_negative_mixed_derivative() {
    // All couplings and fields J = B = 1 on three sites.
    let model = ModelSpec::new(3, 3, [((1, 2), 1.0), ((1, 3), 1.0), ((2, 3), 1.0)], vec![1.0; 3]).unwrap();
    let fd = second_derivative_fd(&model, 1, 2, 3, 1e-4).unwrap();
    let analytic = second_derivative_analytic(&model.float_weights(), 1, 2, 3).unwrap();
    assert!(fd < 0.0 && analytic < 0.0, "fd {fd}, analytic {analytic}");
    assert!((fd - analytic).abs() <= 1e-6 * analytic.abs());

    // same instance in exact weights with t = 2.71828, close to e
    let t = BigRational::new(271828.into(), 100000.into());
    let w = GhostWeightVector::new(3, 3, vec![t; 6]).unwrap();
    assert!(ghs_i(&w).unwrap().is_negative());
}

#[test]
fn zero_coupling_free_sites() {
    for r in 2..=4 {
        let w = GhostWeightVector::uniform(3, r).unwrap();
        assert!(ghs_i(&w).unwrap().is_zero());
        let single = w.with_weight(0, BigRational::one() + BigRational::one()).unwrap();
        // one field alone still leaves the sites independent
        assert!(second_derivative_analytic(&single, 1, 2, 3).unwrap().is_zero());
    }
}
