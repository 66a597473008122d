//! Univariate Laurent polynomials in `r` with arbitrary-precision integer
//! coefficients.
//!
//! Closed forms such as `r^{3n-6}(r²-3r+2)` are stored with the exponents
//! already resolved for a concrete number of sites, so `n` never appears as a
//! symbol here.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{GhsError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RLaurentPoly {
    // exponent -> coefficient, zero coefficients never stored
    coeffs: BTreeMap<i32, BigInt>,
}

impl RLaurentPoly {
    /// `c · r^k`.
    pub fn monomial(coefficient: impl Into<BigInt>, exponent: i32) -> Self {
        let mut p = RLaurentPoly::zero();
        p.add_term(exponent, coefficient.into());
        p
    }

    /// `r^k`.
    pub fn r_pow(exponent: i32) -> Self {
        Self::monomial(1, exponent)
    }

    /// Builds `Σ c_k r^k` from `(exponent, coefficient)` pairs; repeated
    /// exponents are summed.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i32, C)>,
        C: Into<BigInt>,
    {
        let mut p = RLaurentPoly::zero();
        for (k, c) in terms {
            p.add_term(k, c.into());
        }
        p
    }

    /// `r^shift · (c_d r^d + … + c_0)` from coefficients listed by
    /// descending degree, the way closed forms are usually written.
    pub fn shifted_dense(shift: i32, descending: &[i64]) -> Self {
        let degree = descending.len() as i32 - 1;
        Self::from_terms(
            descending
                .iter()
                .enumerate()
                .map(|(i, &c)| (shift + degree - i as i32, c)),
        )
    }

    pub fn add_term(&mut self, exponent: i32, coefficient: BigInt) {
        if coefficient.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(exponent).or_insert_with(BigInt::zero);
        *slot += coefficient;
        if slot.is_zero() {
            self.coeffs.remove(&exponent);
        }
    }

    pub fn coefficient(&self, exponent: i32) -> BigInt {
        self.coeffs.get(&exponent).cloned().unwrap_or_default()
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (i32, &BigInt)> {
        self.coeffs.iter().map(|(&k, c)| (k, c))
    }

    pub fn term_count(&self) -> usize {
        self.coeffs.len()
    }

    pub fn min_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Multiplies by `r^k`.
    pub fn shift(&self, k: i32) -> Self {
        RLaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, factor: &BigInt) -> Self {
        if factor.is_zero() {
            return RLaurentPoly::zero();
        }
        RLaurentPoly {
            coeffs: self.coeffs.iter().map(|(&e, c)| (e, c * factor)).collect(),
        }
    }

    /// Exact value at a rational point.
    pub fn eval(&self, r: &BigRational) -> Result<BigRational> {
        if r.is_zero() && self.min_exponent().is_some_and(|k| k < 0) {
            return Err(GhsError::ZeroR);
        }
        let mut total = BigRational::zero();
        for (&k, c) in &self.coeffs {
            let power = if k >= 0 {
                num_traits::pow(r.clone(), k as usize)
            } else {
                num_traits::pow(r.recip(), k.unsigned_abs() as usize)
            };
            total += power * BigRational::from_integer(c.clone());
        }
        Ok(total)
    }

    pub fn eval_int(&self, r: i64) -> Result<BigRational> {
        self.eval(&BigRational::from_integer(BigInt::from(r)))
    }

    /// Sign of the value at an integer point: -1, 0 or 1.
    pub fn sign_at(&self, r: i64) -> Result<i8> {
        let v = self.eval_int(r)?;
        Ok(if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        })
    }

    /// `r^k*(…)` with `k` the minimal exponent and the cofactor an ordinary
    /// polynomial; `"0"` for the zero polynomial.
    pub fn factored(&self) -> String {
        let Some(k) = self.min_exponent() else {
            return "0".to_string();
        };
        let inner = self.shift(-k);
        let body = inner.plain_text();
        if k == 0 {
            format!("({body})")
        } else {
            format!("r^{k}*({body})")
        }
    }

    // Human-style text: "2*r^2 - 6*r + 4", descending degree.
    fn plain_text(&self) -> String {
        join_terms(self.coeffs.iter().rev().map(|(&k, c)| {
            let mag = c.abs();
            let body = match k {
                0 => mag.to_string(),
                1 if mag.is_one() => "r".to_string(),
                1 => format!("{mag}*r"),
                _ if mag.is_one() => format!("r^{k}"),
                _ => format!("{mag}*r^{k}"),
            };
            (c.is_negative(), body)
        }))
    }
}

fn join_terms<I: Iterator<Item = (bool, String)>>(terms: I) -> String {
    let mut out = String::new();
    for (negative, body) in terms {
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Canonical text: every term as `c*r^k`, descending exponent, e.g.
/// `2*r^5 - 6*r^4 + 4*r^3`.
impl fmt::Display for RLaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = join_terms(
            self.coeffs
                .iter()
                .rev()
                .map(|(&k, c)| (c.is_negative(), format!("{}*r^{k}", c.abs()))),
        );
        f.write_str(&text)
    }
}

impl Zero for RLaurentPoly {
    fn zero() -> Self {
        RLaurentPoly {
            coeffs: BTreeMap::new(),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for RLaurentPoly {
    fn one() -> Self {
        RLaurentPoly::r_pow(0)
    }
}

impl AddAssign<&RLaurentPoly> for RLaurentPoly {
    fn add_assign(&mut self, rhs: &RLaurentPoly) {
        for (&k, c) in &rhs.coeffs {
            self.add_term(k, c.clone());
        }
    }
}

impl Add<&RLaurentPoly> for &RLaurentPoly {
    type Output = RLaurentPoly;
    fn add(self, rhs: &RLaurentPoly) -> RLaurentPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for RLaurentPoly {
    type Output = RLaurentPoly;
    fn add(mut self, rhs: RLaurentPoly) -> RLaurentPoly {
        self += &rhs;
        self
    }
}

impl Neg for &RLaurentPoly {
    type Output = RLaurentPoly;
    fn neg(self) -> RLaurentPoly {
        RLaurentPoly {
            coeffs: self.coeffs.iter().map(|(&k, c)| (k, -c)).collect(),
        }
    }
}

impl Neg for RLaurentPoly {
    type Output = RLaurentPoly;
    fn neg(self) -> RLaurentPoly {
        -&self
    }
}

impl Sub<&RLaurentPoly> for &RLaurentPoly {
    type Output = RLaurentPoly;
    fn sub(self, rhs: &RLaurentPoly) -> RLaurentPoly {
        let mut out = self.clone();
        for (&k, c) in &rhs.coeffs {
            out.add_term(k, -c);
        }
        out
    }
}

impl Sub for RLaurentPoly {
    type Output = RLaurentPoly;
    fn sub(self, rhs: RLaurentPoly) -> RLaurentPoly {
        &self - &rhs
    }
}

impl Mul<&RLaurentPoly> for &RLaurentPoly {
    type Output = RLaurentPoly;
    fn mul(self, rhs: &RLaurentPoly) -> RLaurentPoly {
        let mut out = RLaurentPoly::zero();
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &rhs.coeffs {
                out.add_term(a + b, ca * cb);
            }
        }
        out
    }
}

impl Mul for RLaurentPoly {
    type Output = RLaurentPoly;
    fn mul(self, rhs: RLaurentPoly) -> RLaurentPoly {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn dense_constructor_matches_closed_form() {
        // r^3 (r^2 - 3r + 2)
        let p = RLaurentPoly::shifted_dense(3, &[1, -3, 2]);
        assert_eq!(p.coefficient(5), BigInt::from(1));
        assert_eq!(p.coefficient(4), BigInt::from(-3));
        assert_eq!(p.coefficient(3), BigInt::from(2));
        assert_eq!(p.term_count(), 3);
        assert_eq!(p.to_string(), "1*r^5 - 3*r^4 + 2*r^3");
        assert_eq!(p.factored(), "r^3*(r^2 - 3*r + 2)");
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = RLaurentPoly::from_terms([(2, 3), (2, -3), (1, 5)]);
        assert_eq!(p.term_count(), 1);
        let z = &p - &p;
        assert!(z.is_zero());
        assert_eq!(z.to_string(), "0");
        assert_eq!(z.factored(), "0");
    }

    #[test]
    fn negative_powers_evaluate_exactly() {
        // 1 + 3/r + 3/r^2 + 1/r^3 at r = 2 is (3/2)^3
        let p = RLaurentPoly::from_terms([(0, 1), (-1, 3), (-2, 3), (-3, 1)]);
        assert_eq!(p.eval_int(2).unwrap(), q(27, 8));
        assert_eq!(p.eval_int(0), Err(GhsError::ZeroR));
        assert_eq!(p.factored(), "r^-3*(r^3 + 3*r^2 + 3*r + 1)");
    }

    #[test]
    fn sign_at_integer_points() {
        let p = RLaurentPoly::shifted_dense(0, &[1, -3, 2]);
        assert_eq!(p.sign_at(1).unwrap(), 0);
        assert_eq!(p.sign_at(2).unwrap(), 0);
        assert_eq!(p.sign_at(3).unwrap(), 1);
        let n = -p;
        assert_eq!(n.sign_at(5).unwrap(), -1);
    }

    fn poly() -> impl Strategy<Value = RLaurentPoly> {
        prop::collection::vec((-4i32..6, -20i64..20), 0..5).prop_map(RLaurentPoly::from_terms)
    }

    proptest! {
        #[test]
        fn ring_laws(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in poly(), b in poly(), r in 1i64..7) {
            let (va, vb) = (a.eval_int(r).unwrap(), b.eval_int(r).unwrap());
            prop_assert_eq!((&a * &b).eval_int(r).unwrap(), &va * &vb);
            prop_assert_eq!((&a + &b).eval_int(r).unwrap(), va + vb);
        }
    }
}
