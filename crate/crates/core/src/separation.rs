//! The factored form of `I`: a cubic factor per pair outside the core
//! triangle, a field factor per pair `(0,1), (0,2), (0,3)`, and a core
//! polynomial in `X_{12}, X_{13}, X_{23}` built from the 512 matrices
//! supported on those three rows.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use crate::constraint::{ia_eval, ConstraintMatrix};
use crate::derivatives::ghs_i;
use crate::error::{GhsError, Result};
use crate::expansion::{expand_full, x_assignment};
use crate::laurent::RLaurentPoly;
use crate::model::{in_o1, pair_count, GhostWeightVector, PairOrder, O2, O3};
use crate::sampling::{random_weights, trial_rng};
use crate::xpoly::{XMonomial, XPoly};

fn need_three(n_sites: usize) -> Result<()> {
    if n_sites < 3 {
        return Err(GhsError::NeedThreeSites(n_sites));
    }
    Ok(())
}

/// Positions of `p1, p2, p3` in pair order.
pub fn core_pair_indices(n_sites: usize) -> Result<[usize; 3]> {
    need_three(n_sites)?;
    let order = PairOrder::unchecked(n_sites);
    Ok(O2.map(|(i, j)| order.index_of(i, j).expect("core pair exists")))
}

/// `(1 + r⁻¹X_p)³`.
pub fn bulk_factor(p: usize) -> XPoly<RLaurentPoly> {
    XPoly::univariate(
        p,
        &[
            RLaurentPoly::one(),
            RLaurentPoly::monomial(3, -1),
            RLaurentPoly::monomial(3, -2),
            RLaurentPoly::r_pow(-3),
        ],
    )
}

/// `1 + (1 + 2r⁻¹)X_p + (2r⁻¹ + r⁻²)X_p² + r⁻²X_p³`.
pub fn field_factor(p: usize) -> XPoly<RLaurentPoly> {
    XPoly::univariate(
        p,
        &[
            RLaurentPoly::one(),
            RLaurentPoly::from_terms([(0, 1), (-1, 2)]),
            RLaurentPoly::from_terms([(-1, 2), (-2, 1)]),
            RLaurentPoly::r_pow(-2),
        ],
    )
}

/// `Σ_A I_A X_{p1}^{n(p1)} X_{p2}^{n(p2)} X_{p3}^{n(p3)}` over the 512
/// matrices whose nonzero rows are among `p1, p2, p3`.
pub fn reduced_expansion(n_sites: usize) -> Result<XPoly<RLaurentPoly>> {
    need_three(n_sites)?;
    let mut out = XPoly::zero();
    for code in 0..512u16 {
        let masks = [(code & 7) as u8, (code >> 3 & 7) as u8, (code >> 6) as u8];
        let a = ConstraintMatrix::from_o2_rows(n_sites, masks)?;
        out.add_term(a.monomial(), ia_eval(&a)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedForm {
    pub n_sites: usize,
    /// Pair indices outside `O2 ∪ O3`.
    pub bulk_pairs: Vec<usize>,
    /// Pair indices of `(0,1), (0,2), (0,3)`.
    pub field_pairs: [usize; 3],
    pub core: XPoly<RLaurentPoly>,
}

impl SeparatedForm {
    /// The whole product as one polynomial.
    pub fn assemble(&self) -> XPoly<RLaurentPoly> {
        let mut out = self.core.clone();
        for &p in &self.field_pairs {
            out = out.mul(&field_factor(p));
        }
        for &p in &self.bulk_pairs {
            out = out.mul(&bulk_factor(p));
        }
        out
    }

    /// Exact value at `X = t - 1`, multiplying the factors one at a time.
    pub fn evaluate(&self, weights: &GhostWeightVector) -> Result<BigRational> {
        if weights.n_sites() != self.n_sites {
            return Err(GhsError::LengthMismatch {
                expected: self.n_sites,
                found: weights.n_sites(),
            });
        }
        let x = x_assignment(weights, 0..pair_count(self.n_sites));
        let r = BigRational::from_integer(weights.n_states().into());
        let mut value = self.core.eval(&x, &r)?;
        for &p in &self.field_pairs {
            value *= field_factor(p).eval(&x, &r)?;
        }
        for &p in &self.bulk_pairs {
            value *= bulk_factor(p).eval(&x, &r)?;
        }
        Ok(value)
    }
}

/// The factor layout for `N` sites with an empty core.
pub fn separation_factors(n_sites: usize) -> Result<SeparatedForm> {
    need_three(n_sites)?;
    let order = PairOrder::unchecked(n_sites);
    let bulk_pairs = order
        .iter()
        .enumerate()
        .filter(|&(_, pair)| !in_o1(pair))
        .map(|(p, _)| p)
        .collect();
    Ok(SeparatedForm {
        n_sites,
        bulk_pairs,
        field_pairs: O3.map(|(i, j)| order.index_of(i, j).expect("field pair exists")),
        core: XPoly::zero(),
    })
}

/// The complete factored form.
pub fn separated_form(n_sites: usize) -> Result<SeparatedForm> {
    let mut form = separation_factors(n_sites)?;
    form.core = reduced_expansion(n_sites)?;
    Ok(form)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Exhaustive,
    RandomEval,
}

/// A disagreement: either a monomial whose coefficients differ (exhaustive)
/// or a sampled instance whose values differ (random evaluation).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationFailure {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monomial: Option<Vec<[usize; 2]>>,
    /// Direct side: the full expansion or `I` itself.
    pub lhs: String,
    /// Factored side.
    pub rhs: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub mode: CheckMode,
    pub n_sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_states: Option<u32>,
    pub trials: u64,
    pub seed: u64,
    pub passed: bool,
    /// Monomials compared (exhaustive) or instances evaluated (random).
    pub checked: usize,
    pub mismatches: usize,
    /// The first few disagreements, in canonical order.
    pub failures: Vec<SeparationFailure>,
}

/// Failures kept in a report.
pub const MAX_REPORTED_FAILURES: usize = 10;

/// Compares the factored form with the direct computation, either term by
/// term against the full expansion (`N = 3`) or by exact evaluation at
/// seeded random weights with `r` states.
pub fn separation_check(n_sites: usize, mode: CheckMode, trials: u64, seed: u64, n_states: u32) -> Result<SeparationReport> {
    need_three(n_sites)?;
    let form = separated_form(n_sites)?;
    let mut failures = Vec::new();
    let mut mismatches = 0;
    let checked;
    match mode {
        CheckMode::Exhaustive => {
            if n_sites != 3 {
                return Err(GhsError::ModeMismatch(format!(
                    "the exhaustive check needs N = 3, got N = {n_sites}"
                )));
            }
            let direct = expand_full(3)?;
            let factored = form.assemble();
            let mut monomials: Vec<&XMonomial> = direct.terms().map(|(m, _)| m).collect();
            monomials.extend(factored.terms().map(|(m, _)| m));
            monomials.sort();
            monomials.dedup();
            checked = monomials.len();
            for m in monomials {
                let (lhs, rhs) = (direct.coefficient(m), factored.coefficient(m));
                if lhs != rhs {
                    mismatches += 1;
                    if failures.len() < MAX_REPORTED_FAILURES {
                        failures.push(SeparationFailure {
                            trial: None,
                            weights: None,
                            monomial: Some(m.entries().iter().map(|&(p, e)| [p, usize::from(e)]).collect()),
                            lhs: lhs.to_string(),
                            rhs: rhs.to_string(),
                        });
                    }
                }
            }
        }
        CheckMode::RandomEval => {
            if n_states < 2 {
                return Err(GhsError::InvalidR(n_states));
            }
            checked = trials as usize;
            for trial in 0..trials {
                let w = random_weights(n_sites, n_states, &mut trial_rng(seed, trial))?;
                let (lhs, rhs) = (ghs_i(&w)?, form.evaluate(&w)?);
                if lhs != rhs {
                    mismatches += 1;
                    if failures.len() < MAX_REPORTED_FAILURES {
                        failures.push(SeparationFailure {
                            trial: Some(trial),
                            weights: Some(w.to_strings()),
                            monomial: None,
                            lhs: crate::model::format_rational(&lhs),
                            rhs: crate::model::format_rational(&rhs),
                        });
                    }
                }
            }
        }
    }
    Ok(SeparationReport {
        mode,
        n_sites,
        n_states: (mode == CheckMode::RandomEval).then_some(n_states),
        trials: if mode == CheckMode::RandomEval { trials } else { 0 },
        seed,
        passed: mismatches == 0,
        checked,
        mismatches,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::GHS_TERMS;
    use crate::partition::merge_constraints;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn factor_layout() {
        let f3 = separation_factors(3).unwrap();
        assert!(f3.bulk_pairs.is_empty());
        assert_eq!(f3.field_pairs, [0, 1, 2]);
        let f4 = separation_factors(4).unwrap();
        let order = PairOrder::new(4).unwrap();
        let bulk: Vec<(usize, usize)> = f4.bulk_pairs.iter().map(|&p| order.pair(p)).collect();
        assert_eq!(bulk, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        assert_eq!(separation_factors(2), Err(GhsError::NeedThreeSites(2)));
        // bulk, field and core pairs cover pair order exactly once
        for n in 3..=6 {
            let f = separation_factors(n).unwrap();
            let mut all: Vec<usize> = f.bulk_pairs.clone();
            all.extend(f.field_pairs);
            all.extend(core_pair_indices(n).unwrap());
            all.sort_unstable();
            assert_eq!(all, (0..pair_count(n)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn field_factor_at_two() {
        let f = field_factor(0).at_r(&q(2, 1)).unwrap();
        assert_eq!(f, XPoly::univariate(0, &[q(1, 1), q(2, 1), q(5, 4), q(1, 4)]));
    }

    #[test]
    fn reduced_expansion_known_coefficients() {
        let core = reduced_expansion(3).unwrap();
        let [p1, p2, p3] = core_pair_indices(3).unwrap();
        assert!(core.coefficient(&XMonomial::one()).is_zero());
        assert!(core.coefficient(&XMonomial::var(p1, 1)).is_zero());
        let top = XMonomial::from_pairs([(p1, 3), (p2, 3), (p3, 3)]);
        assert_eq!(core.coefficient(&top), RLaurentPoly::shifted_dense(3, &[1, -3, 2]));
        assert_eq!(core.variables(), vec![p1, p2, p3]);
        assert!(core.max_variable_degree() <= 3);
    }

    #[test]
    fn reduced_expansion_is_the_core_part_of_the_full_expansion() {
        let full = expand_full(3).unwrap();
        let core = reduced_expansion(3).unwrap();
        let [p1, p2, p3] = core_pair_indices(3).unwrap();
        for x in 0..4u8 {
            for y in 0..4u8 {
                for z in 0..4u8 {
                    let m = XMonomial::from_pairs([(p1, x), (p2, y), (p3, z)]);
                    assert_eq!(full.coefficient(&m), core.coefficient(&m));
                }
            }
        }
    }

    #[test]
    fn zero_coupling_both_sides_vanish() {
        let w = GhostWeightVector::uniform(4, 3).unwrap();
        let form = separated_form(4).unwrap();
        assert!(form.evaluate(&w).unwrap().is_zero());
        assert!(ghs_i(&w).unwrap().is_zero());
    }

    #[test]
    fn factored_evaluation_matches_assembled_product() {
        let w = random_weights(3, 3, &mut trial_rng(12, 0)).unwrap();
        let form = separated_form(3).unwrap();
        let x = x_assignment(&w, 0..6);
        assert_eq!(form.assemble().eval(&x, &q(3, 1)).unwrap(), form.evaluate(&w).unwrap());
    }

    #[test]
    fn exhaustive_mode_needs_three_sites() {
        assert!(matches!(
            separation_check(4, CheckMode::Exhaustive, 0, 0, 3),
            Err(GhsError::ModeMismatch(_))
        ));
    }

    /// For each term, whether the factors without a built-in `0=1` already
    /// link sites 0 and 1 through the other constraints of their column.
    fn field_row_is_free(a: &ConstraintMatrix, p4: usize) -> bool {
        let mut others = a.clone();
        others.set_row(p4, 0).unwrap();
        GHS_TERMS.iter().all(|t| {
            (0..3).all(|c| {
                let builtin = merge_constraints(a.n_sites(), t.factors[c]).unwrap();
                if builtin.same_block(0, 1) {
                    return true;
                }
                let mut eqs = t.factors[c].to_vec();
                eqs.extend(others.column_pairs(c + 1));
                !merge_constraints(a.n_sites(), &eqs).unwrap().same_block(0, 1)
            })
        })
    }

    #[test]
    fn full_field_row_divides_by_r_squared_when_free() {
        // every matrix at N = 3 with n(p4) = 3
        let p4 = 0;
        let (mut free, mut claim_fails) = (0, 0);
        for code in 0..(1u32 << 15) {
            let mut a = ConstraintMatrix::full(3).unwrap();
            a.set_row(p4, 7).unwrap();
            for p in 1..6 {
                a.set_row(p, (code >> (3 * (p - 1)) & 7) as u8).unwrap();
            }
            let mut hat = a.clone();
            hat.set_row(p4, 0).unwrap();
            let holds = ia_eval(&a).unwrap() == ia_eval(&hat).unwrap().shift(-2);
            if field_row_is_free(&a, p4) {
                free += 1;
                assert!(holds, "{a:?}");
            } else if !holds {
                claim_fails += 1;
            }
        }
        assert!(free > 0);
        assert!(claim_fails > 0);
    }

    #[test]
    fn full_field_row_counterexample() {
        // column 1 links 0 and 1 through site 2
        let mut a = ConstraintMatrix::full(3).unwrap();
        a.set_row(0, 0b111).unwrap(); // (0,1)
        a.set_row(1, 0b001).unwrap(); // (0,2)
        a.set_row(3, 0b001).unwrap(); // (1,2)
        let mut hat = a.clone();
        hat.set_row(0, 0).unwrap();
        assert_ne!(ia_eval(&a).unwrap(), ia_eval(&hat).unwrap().shift(-2));
    }

    #[test]
    fn single_bulk_entry_is_not_always_a_factor_of_one_over_r() {
        // (0,4) and (1,4) in the same column: (0,4) joins the blocks of 0 and 1
        let order = PairOrder::new(4).unwrap();
        let p04 = order.index_of(0, 4).unwrap();
        let p14 = order.index_of(1, 4).unwrap();
        let mut a = ConstraintMatrix::full(4).unwrap();
        a.set_row(p04, 0b001).unwrap();
        a.set_row(p14, 0b001).unwrap();
        let mut hat = a.clone();
        hat.set_row(p04, 0).unwrap();
        assert_ne!(ia_eval(&a).unwrap(), ia_eval(&hat).unwrap().shift(-1));

        // alone in its column it is
        let mut lone = ConstraintMatrix::full(4).unwrap();
        lone.set_row(p04, 0b001).unwrap();
        lone.set_row(p14, 0b010).unwrap();
        let mut lone_hat = lone.clone();
        lone_hat.set_row(p04, 0).unwrap();
        assert_eq!(ia_eval(&lone).unwrap(), ia_eval(&lone_hat).unwrap().shift(-1));
    }
}
