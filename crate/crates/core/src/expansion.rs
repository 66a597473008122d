//! Expansion of `I` as a polynomial in the variables `X_p = t_p - 1`.
//!
//! Writing `t_p^{δ} = 1 + X_p δ` for a pair inside the window turns each
//! constrained sum into `Σ_T X^T · W(constraints ∪ T)`, where `T` runs over
//! subsets of the window pairs and `W` is the constrained sum of the weight
//! restricted to the pairs before the window. Multiplying the three factors
//! of each term and collecting by monomial gives the coefficients `I_A`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::constraint::GHS_TERMS;
use crate::error::{GhsError, Result};
use crate::laurent::RLaurentPoly;
use crate::model::{pair_count, ActivePairs, Ensemble, GhostMode, GhostWeightVector, PairOrder};
use crate::partition::{count_blocks, merge_constraints};
use crate::xpoly::{XMonomial, XPoly};

/// Largest number of sites accepted by [`expand_full`].
pub const FULL_EXPANSION_MAX_SITES: usize = 3;
/// Largest window accepted by [`expand_partial`]; the work grows as `8^s`.
pub const PARTIAL_EXPANSION_MAX_WINDOW: usize = 8;

/// Digits of a subset mask spread into base 4, one digit per variable.
fn base4(mask: usize, bits: usize) -> usize {
    (0..bits).filter(|b| mask >> b & 1 == 1).map(|b| 1 << (2 * b)).sum()
}

fn code_to_monomial(code: usize, first_pair: usize, bits: usize) -> XMonomial {
    XMonomial::from_pairs((0..bits).map(|b| (first_pair + b, ((code >> (2 * b)) & 3) as u8)))
}

/// `Σ_A I_A ∏_p X_p^{n(p)}` over every matrix with all rows active.
pub fn expand_full(n_sites: usize) -> Result<XPoly<RLaurentPoly>> {
    if n_sites < 3 {
        return Err(GhsError::NeedThreeSites(n_sites));
    }
    if n_sites > FULL_EXPANSION_MAX_SITES {
        return Err(GhsError::Capacity(format!(
            "the full expansion enumerates 8^{} matrices for N = {n_sites}; \
             use the separated form for N > {FULL_EXPANSION_MAX_SITES}",
            pair_count(n_sites)
        )));
    }
    let order = PairOrder::unchecked(n_sites);
    let c = order.len();
    let columns = 1usize << c;

    // block counts of every (term, factor, column subset)
    let mut blocks = vec![[[0i32; 3]; 5]; columns];
    for (mask, slot) in blocks.iter_mut().enumerate() {
        let pairs: Vec<(usize, usize)> = (0..c).filter(|p| mask >> p & 1 == 1).map(|p| order.pair(p)).collect();
        for (k, term) in GHS_TERMS.iter().enumerate() {
            for f in 0..3 {
                slot[k][f] = count_blocks(n_sites + 1, term.factors[f].iter().chain(&pairs)) as i32;
            }
        }
    }
    let codes: Vec<usize> = (0..columns).map(|m| base4(m, c)).collect();

    let max_exp = 3 * (n_sites + 1);
    let width = max_exp + 1;
    let mut acc = vec![0i64; (1 << (2 * c)) * width];
    for m1 in 0..columns {
        for m2 in 0..columns {
            let code12 = codes[m1] + codes[m2];
            for m3 in 0..columns {
                let base = (code12 + codes[m3]) * width;
                for (k, term) in GHS_TERMS.iter().enumerate() {
                    let e = blocks[m1][k][0] + blocks[m2][k][1] + blocks[m3][k][2];
                    acc[base + e as usize] += term.sign;
                }
            }
        }
    }

    let mut out = XPoly::zero();
    for (code, chunk) in acc.chunks(width).enumerate() {
        let coeff = RLaurentPoly::from_terms(
            chunk
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(e, &v)| (e as i32, v)),
        );
        out.add_term(code_to_monomial(code, 0, c), coeff);
    }
    Ok(out)
}

/// Expansion in the last `s` pair variables, with the first `C - s` pair
/// weights kept inside the coefficients as exact rationals.
pub fn expand_partial(weights: &GhostWeightVector, s: usize) -> Result<XPoly<BigRational>> {
    let n = weights.n_sites();
    if n < 3 {
        return Err(GhsError::NeedThreeSites(n));
    }
    let order = PairOrder::unchecked(n);
    let c = order.len();
    if s == 0 || s > c {
        return Err(GhsError::WindowOutOfRange { s, max: c });
    }
    if s > PARTIAL_EXPANSION_MAX_WINDOW {
        return Err(GhsError::Capacity(format!(
            "a window of {s} pairs needs 8^{s} products; the limit is {PARTIAL_EXPANSION_MAX_WINDOW}"
        )));
    }
    let first = c - s;
    let active = ActivePairs::Prefix(first);
    let subsets = 1usize << s;

    // Common denominator of all weights before the window, so each
    // constrained sum becomes an integer.
    let denominator: BigInt = weights.weights()[..first].iter().map(|t| t.denom().clone()).product();
    let sum = |eqs: &[(usize, usize)]| -> BigInt {
        let partition = merge_constraints(n, eqs).expect("pairs are in range");
        let v = weights.block_sum(&partition, GhostMode::Summed, &active) * BigRational::from_integer(denominator.clone());
        debug_assert!(v.is_integer());
        v.to_integer()
    };

    let codes: Vec<usize> = (0..subsets).map(|m| base4(m, s)).collect();
    let mut acc = vec![BigInt::zero(); 1 << (2 * s)];
    for term in GHS_TERMS {
        // factor polynomials Σ_T W(builtin ∪ T) X^T, dense over subsets T
        let factor: Vec<Vec<BigInt>> = term
            .factors
            .iter()
            .map(|builtin| {
                (0..subsets)
                    .map(|mask| {
                        let eqs: Vec<(usize, usize)> = builtin
                            .iter()
                            .copied()
                            .chain((0..s).filter(|b| mask >> b & 1 == 1).map(|b| order.pair(first + b)))
                            .collect();
                        sum(&eqs)
                    })
                    .collect()
            })
            .collect();
        let sign = BigInt::from(term.sign);
        for (m1, a) in factor[0].iter().enumerate() {
            let a = a * &sign;
            for (m2, b) in factor[1].iter().enumerate() {
                let ab = &a * b;
                let code12 = codes[m1] + codes[m2];
                for (m3, d) in factor[2].iter().enumerate() {
                    acc[code12 + codes[m3]] += &ab * d;
                }
            }
        }
    }

    let scale = num_traits::pow(denominator, 3);
    let mut out = XPoly::zero();
    for (code, v) in acc.into_iter().enumerate() {
        if !v.is_zero() {
            out.add_term(code_to_monomial(code, first, s), BigRational::new(v, scale.clone()));
        }
    }
    Ok(out)
}

/// Values `X_p = t_p - 1` keyed by pair index, for the pairs `range`.
pub fn x_assignment(weights: &GhostWeightVector, range: std::ops::Range<usize>) -> std::collections::BTreeMap<usize, BigRational> {
    let x = weights.x_values();
    range.map(|p| (p, x[p].clone())).collect()
}
