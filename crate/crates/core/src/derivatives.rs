//! Field derivatives of the local magnetization.
//!
//! Three independent routes to `∂²m_i/∂B_j∂B_k`: the correlator formula,
//! central finite differences of `m_i`, and the triple-product quantity `I`
//! with the identity `I = r³ Z³ ∂²m_1/∂B_2∂B_3`.

use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use sha2::{Digest, Sha256};
use twofloat::TwoFloat;

use crate::constraint::GHS_TERMS;
use crate::error::{GhsError, Result};
use crate::model::{
    partition_function, ActivePairs, Correlators, Ensemble, FloatWeights, GhostMode, GhostWeightVector, ModelSpec,
};
use crate::partition::{merge_constraints, Partition};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Relative tolerance between finite differences and the exact formula.
pub const FD_RELATIVE_TOLERANCE: f64 = 1e-6;
/// Absolute floor of the tolerance near zero.
pub const FD_ABSOLUTE_FLOOR: f64 = 1e-10;

/// `∂m_i/∂B_k = ⟨δ_i δ_k⟩ - ⟨δ_i⟩⟨δ_k⟩`.
pub fn first_derivative<E: Ensemble>(ensemble: &E, i: usize, k: usize) -> Result<E::Value> {
    let c = Correlators::new(ensemble);
    Ok(c.get(&[i, k])? - c.get(&[i])? * c.get(&[k])?)
}

/// `⟨ijk⟩ - ⟨ij⟩⟨k⟩ - ⟨ik⟩⟨j⟩ - ⟨jk⟩⟨i⟩ + 2⟨i⟩⟨j⟩⟨k⟩`, where `⟨S⟩` is the
/// probability that every site of `S` is in state 1. Repeated sites merge.
pub fn second_derivative_analytic<E: Ensemble>(ensemble: &E, i: usize, j: usize, k: usize) -> Result<E::Value> {
    let c = Correlators::new(ensemble);
    let (mi, mj, mk) = (c.get(&[i])?, c.get(&[j])?, c.get(&[k])?);
    let two = E::Value::one() + E::Value::one();
    Ok(c.get(&[i, j, k])?
        - c.get(&[i, j])? * mk.clone()
        - c.get(&[i, k])? * mj.clone()
        - c.get(&[j, k])? * mi.clone()
        + two * mi * mj * mk)
}

fn shifted_weights(model: &ModelSpec, shifts: &[(usize, f64)]) -> Result<FloatWeights<TwoFloat>> {
    FloatWeights::from_fn(model.n_sites(), model.n_states(), |(a, b)| {
        let mut value = TwoFloat::from(model.pair_value(a, b));
        if a == 0 {
            for &(site, delta) in shifts {
                if site == b {
                    value += TwoFloat::from(delta);
                }
            }
        }
        value.exp()
    })
}

/// Double-double quotient by two correction steps. `TwoFloat`'s own
/// division is only accurate to double precision.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + q2 + q3
}

fn shifted_magnetization(model: &ModelSpec, i: usize, shifts: &[(usize, f64)]) -> Result<TwoFloat> {
    let w = shifted_weights(model, shifts)?;
    let aligned = merge_constraints(model.n_sites(), &[(0, i)])?;
    let numerator = w.block_sum(&aligned, GhostMode::FixedAtOne, &ActivePairs::All);
    let m = dd_div(numerator, partition_function(&w, GhostMode::FixedAtOne));
    if !m.hi().is_finite() {
        return Err(GhsError::Overflow);
    }
    Ok(m)
}

/// Central second difference of `m_i` in `B_j, B_k` with step `h`. The
/// magnetization is evaluated in double-double precision so the result is
/// limited by truncation rather than cancellation.
pub fn second_derivative_fd(model: &ModelSpec, i: usize, j: usize, k: usize, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GhsError::NonPositiveStep(h));
    }
    for site in [i, j, k] {
        if site == 0 || site > model.n_sites() {
            return Err(GhsError::SiteOutOfRange {
                site,
                lo: 1,
                hi: model.n_sites(),
            });
        }
    }
    let m = |shifts: &[(usize, f64)]| shifted_magnetization(model, i, shifts);
    // the cancellation happens in double-double; the final scaling is benign
    let out = if j == k {
        f64::from(m(&[(j, h)])? - m(&[])? * 2.0 + m(&[(j, -h)])?) / (h * h)
    } else {
        f64::from(m(&[(j, h), (k, h)])? - m(&[(j, h), (k, -h)])? - m(&[(j, -h), (k, h)])? + m(&[(j, -h), (k, -h)])?)
            / (4.0 * h * h)
    };
    if !out.is_finite() {
        return Err(GhsError::Overflow);
    }
    Ok(out)
}

/// `F1 - F2 - F3 - F4 + 2 F5` with each factor a ghost-summed constrained
/// sum of the full weight.
pub fn ghs_i<E: Ensemble>(ensemble: &E) -> Result<E::Value> {
    let n = ensemble.n_sites();
    if n < 3 {
        return Err(GhsError::NeedThreeSites(n));
    }
    let mut memo: HashMap<Partition, E::Value> = HashMap::new();
    let mut total = E::Value::zero();
    for term in GHS_TERMS {
        let mut product = E::Value::one();
        for eqs in term.factors {
            let partition = merge_constraints(n, eqs)?;
            let value = memo
                .entry(partition)
                .or_insert_with_key(|p| ensemble.block_sum(p, GhostMode::Summed, &ActivePairs::All));
            product = product * value.clone();
        }
        for _ in 0..term.sign.unsigned_abs() {
            total = if term.sign > 0 {
                total + product.clone()
            } else {
                total - product.clone()
            };
        }
    }
    Ok(total)
}

/// `∂²m_i/∂B_j∂B_k` from `I` after moving `(i, j, k)` to `(1, 2, 3)`.
pub fn second_derivative_via_i(weights: &GhostWeightVector, i: usize, j: usize, k: usize) -> Result<BigRational> {
    let n = weights.n_sites();
    if n < 3 {
        return Err(GhsError::NeedThreeSites(n));
    }
    for site in [i, j, k] {
        if site == 0 || site > n {
            return Err(GhsError::SiteOutOfRange { site, lo: 1, hi: n });
        }
    }
    if i == j || i == k || j == k {
        return Err(GhsError::RepeatedSites(i, j, k));
    }
    // perm[s-1] is the new label of site s
    let mut perm = vec![0; n];
    perm[i - 1] = 1;
    perm[j - 1] = 2;
    perm[k - 1] = 3;
    let mut next = 4;
    for slot in perm.iter_mut().filter(|s| **s == 0) {
        *slot = next;
        next += 1;
    }
    let relabeled = weights.relabel(&perm)?;
    let z = partition_function(&relabeled, GhostMode::FixedAtOne);
    let r = BigRational::from_integer(weights.n_states().into());
    Ok(ghs_i(&relabeled)? / (num_traits::pow(r * z, 3)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    FiniteDifference,
    ViaI,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Analytic => "analytic",
            Method::FiniteDifference => "finite-difference",
            Method::ViaI => "via-I",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivativeValue {
    Exact(BigRational),
    Float(f64),
}

impl DerivativeValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DerivativeValue::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            DerivativeValue::Float(x) => *x,
        }
    }
}

impl fmt::Display for DerivativeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DerivativeValue::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            DerivativeValue::Float(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeResult {
    pub value: DerivativeValue,
    pub method: Method,
    pub sites: (usize, usize, usize),
    pub digest: String,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// SHA-256 of the canonical text of an exact instance.
pub fn weights_digest(weights: &GhostWeightVector) -> String {
    let mut h = Sha256::new();
    h.update(format!("exact {} {}", weights.n_sites(), weights.n_states()));
    for t in weights.to_strings() {
        h.update(b" ");
        h.update(t.as_bytes());
    }
    hex(&h.finalize())
}

/// SHA-256 of the bit patterns of a physical instance.
pub fn model_digest(model: &ModelSpec) -> String {
    let mut h = Sha256::new();
    h.update(format!("physical {} {}", model.n_sites(), model.n_states()));
    for (&(i, j), v) in model.couplings() {
        h.update(format!(" J{i},{j}={:016x}", v.to_bits()));
    }
    for b in model.fields() {
        h.update(format!(" B={:016x}", b.to_bits()));
    }
    hex(&h.finalize())
}

/// Exact second derivative by the requested method.
pub fn second_derivative_exact(
    weights: &GhostWeightVector,
    (i, j, k): (usize, usize, usize),
    method: Method,
) -> Result<DerivativeResult> {
    let value = match method {
        Method::Analytic => second_derivative_analytic(weights, i, j, k)?,
        Method::ViaI => second_derivative_via_i(weights, i, j, k)?,
        Method::FiniteDifference => {
            return Err(GhsError::ModeMismatch(
                "finite differences need a physical model".into(),
            ))
        }
    };
    Ok(DerivativeResult {
        value: DerivativeValue::Exact(value),
        method,
        sites: (i, j, k),
        digest: weights_digest(weights),
    })
}

/// Float second derivative of a physical model, by the correlator formula or
/// by finite differences with step `h`.
pub fn second_derivative_float(
    model: &ModelSpec,
    (i, j, k): (usize, usize, usize),
    method: Method,
    h: f64,
) -> Result<DerivativeResult> {
    let value = match method {
        Method::Analytic => second_derivative_analytic(&model.float_weights(), i, j, k)?,
        Method::FiniteDifference => second_derivative_fd(model, i, j, k, h)?,
        Method::ViaI => {
            return Err(GhsError::ModeMismatch("the route through I needs exact weights".into()))
        }
    };
    Ok(DerivativeResult {
        value: DerivativeValue::Float(value),
        method,
        sites: (i, j, k),
        digest: model_digest(model),
    })
}

/// Whether a finite-difference value is within tolerance of the exact one.
pub fn fd_agrees(fd: f64, analytic: f64) -> bool {
    (fd - analytic).abs() <= (FD_RELATIVE_TOLERANCE * analytic.abs()).max(FD_ABSOLUTE_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{configurations, correlator, magnetization};
    use crate::sampling::{random_physical_model, random_weights, trial_rng};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Brute force over ghost-summed configurations of the three factors of
    /// every term.
    fn brute_i(w: &GhostWeightVector) -> BigRational {
        let order = crate::model::PairOrder::new(w.n_sites()).unwrap();
        let factor = |eqs: &[(usize, usize)]| -> BigRational {
            configurations(w.n_sites(), w.n_states(), true)
                .filter(|c| eqs.iter().all(|&(a, b)| c.spin(a) == c.spin(b)))
                .map(|c| {
                    order
                        .iter()
                        .enumerate()
                        .filter(|&(_, (a, b))| c.spin(a) == c.spin(b))
                        .map(|(p, _)| w.weight(p).clone())
                        .product::<BigRational>()
                })
                .sum()
        };
        GHS_TERMS
            .iter()
            .map(|t| {
                BigRational::from_integer(t.sign.into()) * t.factors.iter().map(|e| factor(e)).product::<BigRational>()
            })
            .sum()
    }

    #[test]
    fn first_derivative_at_zero_coupling() {
        let w = GhostWeightVector::uniform(3, 3).unwrap();
        assert!(first_derivative(&w, 1, 2).unwrap().is_zero());
        assert_eq!(first_derivative(&w, 2, 2).unwrap(), q(1, 3) - q(1, 9));
    }

    #[test]
    fn first_derivative_is_nonnegative() {
        for trial in 0..10 {
            let w = random_weights(4, 2 + (trial % 3) as u32, &mut trial_rng(2, trial)).unwrap();
            for (i, k) in [(1, 2), (2, 4), (3, 1)] {
                assert!(first_derivative(&w, i, k).unwrap() >= BigRational::zero());
            }
        }
    }

    #[test]
    fn second_derivative_at_zero_coupling() {
        for r in 2..=5 {
            let w = GhostWeightVector::uniform(4, r).unwrap();
            assert!(second_derivative_analytic(&w, 1, 2, 3).unwrap().is_zero());
            assert!(ghs_i(&w).unwrap().is_zero());
        }
    }

    #[test]
    fn repeated_indices_merge() {
        // j = k: derivative of ⟨ij⟩ - ⟨i⟩⟨j⟩ in B_j
        let w = random_weights(3, 3, &mut trial_rng(6, 0)).unwrap();
        let (mi, mj, mij) = (
            magnetization(&w, 1).unwrap(),
            magnetization(&w, 2).unwrap(),
            correlator(&w, &[1, 2]).unwrap(),
        );
        let expected = &mij - &mij * &mj - &mij * &mj - &mj * &mi + q(2, 1) * &mi * &mj * &mj;
        assert_eq!(second_derivative_analytic(&w, 1, 2, 2).unwrap(), expected);
    }

    #[test]
    fn ghs_i_matches_brute_force() {
        for trial in 0..6 {
            let n = 3 + (trial as usize % 2);
            let w = random_weights(n, 2 + (trial % 2) as u32, &mut trial_rng(13, trial)).unwrap();
            assert_eq!(ghs_i(&w).unwrap(), brute_i(&w));
        }
    }

    #[test]
    fn ghost_bridge() {
        for trial in 0..10 {
            let n = 3 + (trial as usize % 2);
            let r = 2 + (trial % 3) as u32;
            let w = random_weights(n, r, &mut trial_rng(17, trial)).unwrap();
            let via = second_derivative_via_i(&w, 1, 2, 3).unwrap();
            assert_eq!(via, second_derivative_analytic(&w, 1, 2, 3).unwrap());
        }
    }

    #[test]
    fn relabeled_triples() {
        let w = random_weights(4, 3, &mut trial_rng(19, 0)).unwrap();
        for (i, j, k) in [(2, 4, 1), (4, 3, 2), (3, 1, 4)] {
            assert_eq!(
                second_derivative_via_i(&w, i, j, k).unwrap(),
                second_derivative_analytic(&w, i, j, k).unwrap()
            );
        }
        assert_eq!(second_derivative_via_i(&w, 1, 1, 2), Err(GhsError::RepeatedSites(1, 1, 2)));
    }

    #[test]
    fn fd_against_analytic() {
        for trial in 0..4 {
            let m = random_physical_model(3, 2 + (trial % 2) as u32, &mut trial_rng(23, trial)).unwrap();
            let an = second_derivative_analytic(&m.float_weights(), 1, 2, 3).unwrap();
            let fd = second_derivative_fd(&m, 1, 2, 3, DEFAULT_STEP).unwrap();
            assert!(fd_agrees(fd, an), "fd {fd} analytic {an}");
            let an_jj = second_derivative_analytic(&m.float_weights(), 1, 2, 2).unwrap();
            let fd_jj = second_derivative_fd(&m, 1, 2, 2, DEFAULT_STEP).unwrap();
            assert!(fd_agrees(fd_jj, an_jj), "fd {fd_jj} analytic {an_jj}");
        }
    }

    #[test]
    fn fd_at_zero_coupling() {
        let m = ModelSpec::free(4, 3).unwrap();
        assert!(second_derivative_fd(&m, 1, 2, 3, DEFAULT_STEP).unwrap().abs() < 1e-10);
    }

    #[test]
    fn fd_errors() {
        let m = ModelSpec::free(3, 2).unwrap();
        assert_eq!(second_derivative_fd(&m, 1, 2, 3, 0.0), Err(GhsError::NonPositiveStep(0.0)));
        assert!(second_derivative_fd(&m, 1, 2, 3, -1e-3).is_err());
        assert!(matches!(second_derivative_fd(&m, 1, 2, 4, 1e-3), Err(GhsError::SiteOutOfRange { .. })));
        let hot = ModelSpec::new(3, 2, [], vec![1e6, 0.0, 0.0]).unwrap();
        assert_eq!(second_derivative_fd(&hot, 1, 2, 3, 1e-3), Err(GhsError::Overflow));
    }

    #[test]
    fn digests_identify_instances() {
        let a = random_weights(3, 2, &mut trial_rng(1, 0)).unwrap();
        let b = random_weights(3, 2, &mut trial_rng(1, 1)).unwrap();
        assert_eq!(weights_digest(&a), weights_digest(&a.clone()));
        assert_ne!(weights_digest(&a), weights_digest(&b));
        assert_eq!(weights_digest(&a).len(), 64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn symmetric_in_the_field_indices(seed in 0u64..1000, j in 1usize..5, k in 1usize..5) {
            let w = random_weights(4, 3, &mut trial_rng(seed, 0)).unwrap();
            prop_assert_eq!(
                second_derivative_analytic(&w, 1, j, k).unwrap(),
                second_derivative_analytic(&w, 1, k, j).unwrap()
            );
        }
    }
}
