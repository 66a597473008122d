//! Sparse multivariate polynomials in the pair variables `X_p`.
//!
//! Coefficients are either Laurent polynomials in `r` (symbolic mode) or
//! exact rationals (numeric mode, for a fixed instance).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{GhsError, Result};
use crate::laurent::RLaurentPoly;
use crate::model::format_rational;

/// `∏ X_p^{e_p}` stored as `(p, e_p)` with `e_p > 0`, sorted by `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct XMonomial {
    exponents: Vec<(usize, u8)>,
}

impl XMonomial {
    pub fn one() -> Self {
        XMonomial::default()
    }

    pub fn var(p: usize, e: u8) -> Self {
        Self::from_pairs([(p, e)])
    }

    /// Builds a monomial from `(p, e)` entries; zero exponents are dropped
    /// and repeated variables multiply.
    pub fn from_pairs<I: IntoIterator<Item = (usize, u8)>>(entries: I) -> Self {
        let mut map: BTreeMap<usize, u8> = BTreeMap::new();
        for (p, e) in entries {
            *map.entry(p).or_default() += e;
        }
        XMonomial {
            exponents: map.into_iter().filter(|&(_, e)| e > 0).collect(),
        }
    }

    pub fn exponent(&self, p: usize) -> u8 {
        self.exponents
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.exponents[i].1)
    }

    pub fn entries(&self) -> &[(usize, u8)] {
        &self.exponents
    }

    pub fn is_one(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().map(|&(_, e)| u32::from(e)).sum()
    }

    pub fn max_exponent(&self) -> u8 {
        self.exponents.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &XMonomial) -> XMonomial {
        Self::from_pairs(self.exponents.iter().chain(&other.exponents).copied())
    }

    /// Splits off the variables for which `keep` is false.
    fn split<F: Fn(usize) -> bool>(&self, keep: F) -> (XMonomial, Vec<(usize, u8)>) {
        let (kept, dropped): (Vec<_>, Vec<_>) =
            self.exponents.iter().partition(|&&(p, _)| keep(p));
        (XMonomial { exponents: kept }, dropped)
    }
}

/// Lexicographic order on the dense exponent vectors `(e_0, e_1, …)`.
impl Ord for XMonomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let (mut a, mut b) = (self.exponents.iter().peekable(), other.exponents.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                // the other side has a zero where this one is positive
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&&(p, e)), Some(&&(q, f))) => match p.cmp(&q) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if e != f {
                            return e.cmp(&f);
                        }
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }
}

impl PartialOrd for XMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coefficient ring of an [`XPoly`].
pub trait Coefficient: Clone + PartialEq + Debug + Zero + One {
    /// Whether values depend on `r`.
    const SYMBOLIC: bool;

    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn value_at(&self, r: &BigRational) -> Result<BigRational>;
    fn text(&self) -> String;
}

impl Coefficient for RLaurentPoly {
    const SYMBOLIC: bool = true;

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn value_at(&self, r: &BigRational) -> Result<BigRational> {
        self.eval(r)
    }
    fn text(&self) -> String {
        self.to_string()
    }
}

impl Coefficient for BigRational {
    const SYMBOLIC: bool = false;

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn value_at(&self, _r: &BigRational) -> Result<BigRational> {
        Ok(self.clone())
    }
    fn text(&self) -> String {
        format_rational(self)
    }
}

/// One serialized term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermRecord {
    /// `[p, e]` with `p` the 0-based position in pair order.
    pub exponents: Vec<[usize; 2]>,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XPoly<C> {
    terms: BTreeMap<XMonomial, C>,
}

impl<C: Coefficient> Default for XPoly<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coefficient> XPoly<C> {
    pub fn zero() -> Self {
        XPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::term(XMonomial::one(), c)
    }

    pub fn term(m: XMonomial, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// `Σ_e c_e X_p^e` from coefficients listed by increasing power.
    pub fn univariate(p: usize, coeffs: &[C]) -> Self {
        let mut out = Self::zero();
        for (e, c) in coeffs.iter().enumerate() {
            out.add_term(XMonomial::var(p, e as u8), c.clone());
        }
        out
    }

    pub fn add_term(&mut self, m: XMonomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                *slot = slot.add_ref(&c);
                if slot.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn coefficient(&self, m: &XMonomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Terms in canonical monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&XMonomial, &C)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest exponent of any single variable.
    pub fn max_variable_degree(&self) -> u8 {
        self.terms.keys().map(XMonomial::max_exponent).max().unwrap_or(0)
    }

    /// Variables that occur with a positive exponent.
    pub fn variables(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .terms
            .keys()
            .flat_map(|m| m.entries().iter().map(|&(p, _)| p))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        XPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.mul_ref(cb));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (m, a) in &self.terms {
            out.add_term(m.clone(), a.mul_ref(c));
        }
        out
    }

    /// Exact value with every variable substituted.
    pub fn eval(&self, x_values: &BTreeMap<usize, BigRational>, r: &BigRational) -> Result<BigRational> {
        if C::SYMBOLIC && r.is_zero() {
            return Err(GhsError::ZeroR);
        }
        let mut powers: BTreeMap<usize, [BigRational; 4]> = BTreeMap::new();
        let mut total = BigRational::zero();
        for (m, c) in &self.terms {
            let mut value = c.value_at(r)?;
            for &(p, e) in m.entries() {
                if !powers.contains_key(&p) {
                    let x = x_values.get(&p).ok_or(GhsError::MissingVariable(p))?;
                    let x2 = x * x;
                    let x3 = &x2 * x;
                    powers.insert(p, [BigRational::one(), x.clone(), x2, x3]);
                }
                let table = &powers[&p];
                value *= match table.get(usize::from(e)) {
                    Some(v) => v.clone(),
                    None => num_traits::pow(table[1].clone(), usize::from(e)),
                };
            }
            total += value;
        }
        Ok(total)
    }

    /// Canonical records, monomials in increasing lexicographic order.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms
            .iter()
            .map(|(m, c)| TermRecord {
                exponents: m.entries().iter().map(|&(p, e)| [p, usize::from(e)]).collect(),
                coefficient: c.text(),
            })
            .collect()
    }
}

impl XPoly<RLaurentPoly> {
    /// Numeric polynomial obtained by fixing `r`.
    pub fn at_r(&self, r: &BigRational) -> Result<XPoly<BigRational>> {
        let mut out = XPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.eval(r)?);
        }
        Ok(out)
    }
}

impl XPoly<BigRational> {
    /// Substitutes values for some variables, keeping the rest symbolic.
    pub fn substitute(&self, values: &BTreeMap<usize, BigRational>) -> XPoly<BigRational> {
        let mut out = XPoly::zero();
        for (m, c) in &self.terms {
            let (kept, dropped) = m.split(|p| !values.contains_key(&p));
            let mut coeff = c.clone();
            for (p, e) in dropped {
                coeff *= num_traits::pow(values[&p].clone(), usize::from(e));
            }
            out.add_term(kept, coeff);
        }
        out
    }
}

/// Free-function form of [`XPoly::eval`] with an integer `r`.
pub fn xpoly_eval<C: Coefficient>(
    poly: &XPoly<C>,
    x_values: &BTreeMap<usize, BigRational>,
    r: i64,
) -> Result<BigRational> {
    poly.eval(x_values, &BigRational::from_integer(r.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn lp(shift: i32, desc: &[i64]) -> RLaurentPoly {
        RLaurentPoly::shifted_dense(shift, desc)
    }

    #[test]
    fn constant_evaluates_to_itself() {
        let c = XPoly::constant(q(7, 3));
        assert_eq!(xpoly_eval(&c, &BTreeMap::new(), 2).unwrap(), q(7, 3));
        assert!(XPoly::<BigRational>::zero().to_records().is_empty());
    }

    #[test]
    fn bulk_cube_at_two() {
        // (1 + r^-1 X)^3 at X = 2, r = 2
        let f = XPoly::univariate(4, &[RLaurentPoly::one(), RLaurentPoly::r_pow(-1)]);
        let cube = f.mul(&f).mul(&f);
        assert_eq!(cube.max_variable_degree(), 3);
        let x = BTreeMap::from([(4, q(2, 1))]);
        assert_eq!(xpoly_eval(&cube, &x, 2).unwrap(), q(8, 1));
    }

    #[test]
    fn missing_variable_and_zero_r() {
        let p = XPoly::term(XMonomial::var(3, 1), lp(-1, &[1]));
        assert_eq!(xpoly_eval(&p, &BTreeMap::new(), 2), Err(GhsError::MissingVariable(3)));
        let x = BTreeMap::from([(3, q(1, 1))]);
        assert_eq!(xpoly_eval(&p, &x, 0), Err(GhsError::ZeroR));
    }

    #[test]
    fn monomial_order_is_dense_lexicographic() {
        let a = XMonomial::from_pairs([(0, 1)]);
        let b = XMonomial::from_pairs([(1, 3)]);
        let c = XMonomial::from_pairs([(0, 1), (2, 1)]);
        // dense vectors (1,0,0) < (1,0,1) and (0,3,0) < (1,0,0)
        assert!(b < a);
        assert!(a < c);
        assert!(XMonomial::one() < b);
        assert_eq!(XMonomial::from_pairs([(2, 0), (0, 1)]), a);
    }

    #[test]
    fn records_are_canonical() {
        let mut p = XPoly::zero();
        p.add_term(XMonomial::from_pairs([(0, 1)]), q(1, 2));
        p.add_term(XMonomial::from_pairs([(1, 2)]), q(-3, 1));
        p.add_term(XMonomial::one(), q(2, 1));
        let recs = p.to_records();
        assert_eq!(recs[0].exponents, Vec::<[usize; 2]>::new());
        assert_eq!(recs[0].coefficient, "2/1");
        assert_eq!(recs[1].exponents, vec![[1, 2]]);
        assert_eq!(recs[1].coefficient, "-3/1");
        assert_eq!(recs[2].exponents, vec![[0, 1]]);

        let s = XPoly::term(XMonomial::var(5, 3), lp(3, &[1, -3, 2]));
        assert_eq!(s.to_records()[0].coefficient, "1*r^5 - 3*r^4 + 2*r^3");
    }

    #[test]
    fn partial_substitution() {
        // (1 + X0)(2 + X1) with X0 = 3
        let a = XPoly::univariate(0, &[q(1, 1), q(1, 1)]);
        let b = XPoly::univariate(1, &[q(2, 1), q(1, 1)]);
        let p = a.mul(&b).substitute(&BTreeMap::from([(0, q(3, 1))]));
        assert_eq!(p, XPoly::univariate(1, &[q(8, 1), q(4, 1)]));
        assert_eq!(p.variables(), vec![1]);
    }

    #[test]
    fn symbolic_to_numeric() {
        let p = XPoly::term(XMonomial::var(2, 1), lp(-2, &[1, 0, 1]));
        let n = p.at_r(&q(2, 1)).unwrap();
        assert_eq!(n.coefficient(&XMonomial::var(2, 1)), q(5, 4));
    }

    fn poly() -> impl Strategy<Value = XPoly<BigRational>> {
        prop::collection::vec(
            (prop::collection::vec((0usize..3, 0u8..2), 0..3), -9i64..9, 1i64..4),
            0..5,
        )
        .prop_map(|terms| {
            let mut p = XPoly::zero();
            for (m, n, d) in terms {
                p.add_term(XMonomial::from_pairs(m), BigRational::new(BigInt::from(n), BigInt::from(d)));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_laws(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(a.add(&b), b.add(&a));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            prop_assert!(a.sub(&a).is_zero());
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in poly(), b in poly(), xs in prop::collection::vec(-5i64..5, 3)) {
            let x: BTreeMap<usize, BigRational> =
                xs.iter().enumerate().map(|(p, &v)| (p, q(v, 2))).collect();
            let r = BigRational::from_integer(3.into());
            let (va, vb) = (a.eval(&x, &r).unwrap(), b.eval(&x, &r).unwrap());
            prop_assert_eq!(a.mul(&b).eval(&x, &r).unwrap(), &va * &vb);
            prop_assert_eq!(a.add(&b).eval(&x, &r).unwrap(), va + vb);
        }
    }
}
