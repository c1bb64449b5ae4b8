//! Randomized invariants of the arithmetic, character and epsilon layers.
mod common;

use proptest::prelude::*;

fn holds(r: common::Check) -> std::result::Result<(), TestCaseError> {
    match r {
        Ok(true) => Ok(()),
        Ok(false) => Err(TestCaseError::reject("outside the property's domain")),
        Err(e) => Err(TestCaseError::fail(e)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exp_inverts_log(seed in any::<u64>()) {
        holds(common::check_exp_inverts_log(seed))?;
    }

    #[test]
    fn norm_and_trace_are_transitive(seed in any::<u64>()) {
        holds(common::check_norm_and_trace_are_transitive(seed))?;
    }

    #[test]
    fn inflated_gamma_represents_the_composite(seed in any::<u64>()) {
        holds(common::check_inflated_gamma_represents_the_composite(seed))?;
    }

    #[test]
    fn c_theta_is_inflation_invariant(seed in any::<u64>()) {
        holds(common::check_c_theta_is_inflation_invariant(seed))?;
    }

    #[test]
    fn howe_factorization_round_trips(seed in any::<u64>()) {
        holds(common::check_howe_factorization_round_trips(seed))?;
    }

    #[test]
    fn gauss_sums_have_unit_modulus(seed in any::<u64>()) {
        holds(common::check_gauss_sums_have_unit_modulus(seed))?;
    }

    #[test]
    fn epsilon_ratios_form_a_cocycle(seed in any::<u64>()) {
        holds(common::check_epsilon_ratios_form_a_cocycle(seed))?;
    }
}
