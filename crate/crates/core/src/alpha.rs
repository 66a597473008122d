//! The coefficients `α(x,y,z)`: sums of `I_A` over the matrices supported on
//! `p1, p2, p3` with row weights `x, y, z`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::constraint::{ia_eval, ConstraintMatrix};
use crate::error::{GhsError, Result};
use crate::laurent::RLaurentPoly;
use crate::separation::{core_pair_indices, reduced_expansion};
use crate::xpoly::XMonomial;

pub type Triple = (u8, u8, u8);

fn masks_of_weight(w: u8) -> impl Iterator<Item = u8> {
    (0u8..8).filter(move |m| m.count_ones() as u8 == w)
}

/// `α(x,y,z)` for `N` sites.
pub fn alpha(x: u8, y: u8, z: u8, n_sites: usize) -> Result<RLaurentPoly> {
    for w in [x, y, z] {
        if w > 3 {
            return Err(GhsError::WeightOutOfRange(w));
        }
    }
    if n_sites < 3 {
        return Err(GhsError::NeedThreeSites(n_sites));
    }
    let mut total = RLaurentPoly::default();
    for a in masks_of_weight(x) {
        for b in masks_of_weight(y) {
            for c in masks_of_weight(z) {
                total += &ia_eval(&ConstraintMatrix::from_o2_rows(n_sites, [a, b, c])?)?;
            }
        }
    }
    Ok(total)
}

pub fn all_triples() -> impl Iterator<Item = Triple> {
    (0..4u8).flat_map(|x| (0..4u8).flat_map(move |y| (0..4u8).map(move |z| (x, y, z))))
}

pub fn triple_key((x, y, z): Triple) -> String {
    format!("{x},{y},{z}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaTable {
    pub n_sites: usize,
    pub entries: BTreeMap<Triple, RLaurentPoly>,
    /// Triples grouped by identical polynomials, each group sorted and the
    /// groups ordered by their largest member, descending.
    pub symmetry_classes: Vec<Vec<Triple>>,
}

pub fn alpha_table(n_sites: usize) -> Result<AlphaTable> {
    let mut entries = BTreeMap::new();
    for t in all_triples() {
        entries.insert(t, alpha(t.0, t.1, t.2, n_sites)?);
    }
    let mut groups: Vec<(RLaurentPoly, Vec<Triple>)> = Vec::new();
    for (t, poly) in &entries {
        match groups.iter_mut().find(|(p, _)| p == poly) {
            Some((_, members)) => members.push(*t),
            None => groups.push((poly.clone(), vec![*t])),
        }
    }
    let mut symmetry_classes: Vec<Vec<Triple>> = groups.into_iter().map(|(_, m)| m).collect();
    symmetry_classes.sort_by(|a, b| b.last().cmp(&a.last()));
    Ok(AlphaTable {
        n_sites,
        entries,
        symmetry_classes,
    })
}

impl AlphaTable {
    pub fn entry(&self, t: Triple) -> &RLaurentPoly {
        &self.entries[&t]
    }

    pub fn class_of(&self, t: Triple) -> &[Triple] {
        self.symmetry_classes
            .iter()
            .find(|c| c.contains(&t))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Triples whose entry differs from the coefficient of
    /// `X_{p1}^x X_{p2}^y X_{p3}^z` in the reduced expansion.
    pub fn expansion_disagreements(&self) -> Result<Vec<Triple>> {
        let core = reduced_expansion(self.n_sites)?;
        let [p1, p2, p3] = core_pair_indices(self.n_sites)?;
        Ok(self
            .entries
            .iter()
            .filter(|&(&(x, y, z), poly)| core.coefficient(&XMonomial::from_pairs([(p1, x), (p2, y), (p3, z)])) != *poly)
            .map(|(&t, _)| t)
            .collect())
    }

    /// Fixed-width text table with one row per triple.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<7}  {}\n", "x,y,z", "alpha");
        for (&t, poly) in &self.entries {
            out.push_str(&format!("{:<7}  {}\n", triple_key(t), poly.factored()));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignVerdict {
    pub r: u32,
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
    /// `≤ 0` everywhere for `r = 2`, `≥ 0` everywhere for `r ≥ 3`.
    pub expected_sign: &'static str,
    pub violations: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignReport {
    pub n_sites: usize,
    pub verdicts: Vec<SignVerdict>,
    pub passed: bool,
}

/// Signs of all entries at each `r`, checked against the dichotomy: all
/// entries non-positive at `r = 2` and non-negative at `r ≥ 3`.
pub fn sign_report(table: &AlphaTable, r_values: &[u32]) -> Result<SignReport> {
    let mut verdicts = Vec::new();
    for &r in r_values {
        if r < 2 {
            return Err(GhsError::InvalidR(r));
        }
        let (mut positive, mut zero, mut negative) = (0, 0, 0);
        let mut violations = Vec::new();
        for (&t, poly) in &table.entries {
            let s = poly.sign_at(i64::from(r))?;
            match s {
                1 => positive += 1,
                0 => zero += 1,
                _ => negative += 1,
            }
            if (r == 2 && s > 0) || (r >= 3 && s < 0) {
                violations.push(triple_key(t));
            }
        }
        verdicts.push(SignVerdict {
            r,
            positive,
            zero,
            negative,
            expected_sign: if r == 2 { "<= 0" } else { ">= 0" },
            passed: violations.is_empty(),
            violations,
        });
    }
    Ok(SignReport {
        n_sites: table.n_sites,
        passed: verdicts.iter().all(|v| v.passed),
        verdicts,
    })
}

/// A published closed form for one class of triples, `r^{3n+shift}` times a
/// polynomial given by descending coefficients (empty for zero).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PublishedForm {
    pub members: &'static [Triple],
    /// The class as printed, including any slips in the member list.
    pub source_members: &'static str,
    /// The closed form as printed.
    pub source: &'static str,
    pub shift: i32,
    pub descending: &'static [i64],
}

impl PublishedForm {
    /// The closed form with `n = N` substituted.
    pub fn polynomial(&self, n_sites: usize) -> RLaurentPoly {
        RLaurentPoly::shifted_dense(3 * n_sites as i32 + self.shift, self.descending)
    }
}

macro_rules! form {
    ([$($m:expr),*], $sm:expr, $src:expr, $shift:expr, [$($c:expr),*]) => {
        PublishedForm {
            members: &[$($m),*],
            source_members: $sm,
            source: $src,
            shift: $shift,
            descending: &[$($c),*],
        }
    };
}

/// The eighteen published classes.
pub const PUBLISHED_FORMS: [PublishedForm; 18] = [
    form!([(3, 3, 3), (3, 0, 3), (0, 3, 3), (3, 3, 0)],
        "α(3,3,3)=α(3,0,3)=α(0,3,3)=α(3,3,0)", "r^{3n-6}(r^2-3r+2)", -6, [1, -3, 2]),
    form!([(3, 2, 3), (2, 3, 3), (3, 3, 2), (3, 1, 3), (1, 3, 3), (3, 3, 1)],
        "α(3,2,3)=α(2,3,3)=α(3,3,2)=α(3,1,3)=α(1,3,3)=α(3,3,1)", "3r^{3n-6}(r^2-3r+2)", -6, [3, -9, 6]),
    form!([(3, 2, 2), (2, 3, 2), (2, 2, 3)],
        "α(3,2,2)=α(2,3,2)=α(2,2,3)", "r^{3n-6}(2r^{3}-15r+12)", -6, [2, 0, -15, 12]),
    form!([(3, 2, 1), (2, 3, 1), (3, 1, 2), (1, 3, 2), (1, 2, 3), (2, 1, 3)],
        "α(3,2,1)=α(2,3,1)=α(3,1,2)=α(1,3,2)=α(1,2,3)=α(2,1,3)", "r^{3n-6}(4r^{3}-9r^2-3r+6)", -6, [4, -9, -3, 6]),
    form!([(3, 2, 0), (2, 3, 0), (3, 0, 2), (0, 3, 2), (0, 2, 3), (2, 0, 3)],
        "α(3,2,0)=α(2,3,0)=α(3,0,2)=α(0,3,2)=α(0,2,3)=α(2,0,3)", "r^{3n-5}(2r^2-6r+3)", -5, [2, -6, 3]),
    form!([(3, 1, 1), (1, 3, 1), (1, 1, 3)],
        "α(3,1,1)=α(1,3,1)=α(1,1,3)", "r^{3n-5}(r^{3}+r^2-10r+6)", -5, [1, 1, -10, 6]),
    form!([(3, 1, 0), (0, 3, 1), (0, 1, 3), (3, 0, 1), (1, 0, 3), (1, 3, 0)],
        "α(3,1,0)=α(0,3,1)=α(0,1,3)=α(3,0,1)=α(1,0,3)=α(1,3,0)", "r^{3n-4}(r^2-3r+2)", -4, [1, -3, 2]),
    form!([(3, 0, 0), (0, 3, 0), (0, 0, 3)],
        "α(3,0,0)=α(0,3,0)=α(0,0,3)", "0", 0, []),
    form!([(2, 2, 2)],
        "α(2,2,2)", "r^{3n-6}(2r^4+6r^3-28r^2+8r+12)", -6, [2, 6, -28, 8, 12]),
    form!([(2, 2, 1), (2, 1, 2), (1, 2, 2)],
        "α(2,2,1)=α(2,1,2)=α(1,2,2)", "r^{3n-5}(5r^3-7r^2-22r+24)", -5, [5, -7, -22, 24]),
    form!([(2, 2, 0), (2, 0, 2), (0, 2, 2)],
        "α(2,2,0)=α(2,0,2)=α(0,2,2)", "r^{3n-5}(4r^3-12r^2+6r+2)", -5, [4, -12, 6, 2]),
    form!([(2, 1, 1), (1, 1, 2), (1, 2, 1)],
        "α(2,1,1)=α(1,1,2)=α(1,2,1)", "r^{3n-5}(2r^4+3r^3-23r^2+14r+4)", -5, [2, 3, -23, 14, 4]),
    form!([(2, 1, 0), (0, 1, 2), (0, 2, 1), (2, 0, 1), (1, 0, 2), (1, 2, 0)],
        "α(2,1,0)=α(0,1,2)=α(0,2,1)=α(2,0,1)=α(1,0,2)=α(1,2,0)", "r^{3n-3}(2r^2-6r+4)", -3, [2, -6, 4]),
    form!([(2, 0, 0), (0, 2, 0), (0, 0, 2)],
        "α(2,0,0)=α(0,0,2)=α(2,0,0)", "0", 0, []),
    form!([(1, 1, 1)],
        "α(1,1,1)", "r^{3n-3}(r^3+3r^2-16r+12)", -3, [1, 3, -16, 12]),
    form!([(1, 1, 0), (1, 0, 1), (0, 1, 1)],
        "α(1,1,0)=α(1,0,1)=α(0,1,1)", "r^{3n-2}(r^2-3r+2)", -2, [1, -3, 2]),
    form!([(1, 0, 0), (0, 0, 1), (0, 1, 0)],
        "α(1,0,0)=α(0,0,1)=α(0,1,0)", "0", 0, []),
    form!([(0, 0, 0)],
        "α(0,0,0)", "0", 0, []),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Match,
    PossibleErratum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberDiff {
    pub triple: String,
    pub computed: String,
    pub factored: String,
    pub matches: bool,
    /// The entry equals the reduced-expansion coefficient.
    pub oracle_agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassDiff {
    pub class: String,
    pub source: String,
    pub published: String,
    pub verdict: Verdict,
    pub members: Vec<MemberDiff>,
}

/// Compares every entry with its published class form. The enumeration is
/// authoritative; a disagreement is reported, never corrected.
pub fn compare_paper(table: &AlphaTable) -> Result<Vec<ClassDiff>> {
    let disagreeing = table.expansion_disagreements()?;
    Ok(PUBLISHED_FORMS
        .iter()
        .map(|form| {
            let published = form.polynomial(table.n_sites);
            let members: Vec<MemberDiff> = form
                .members
                .iter()
                .map(|&t| {
                    let computed = table.entry(t);
                    MemberDiff {
                        triple: triple_key(t),
                        computed: computed.to_string(),
                        factored: computed.factored(),
                        matches: *computed == published,
                        oracle_agrees: !disagreeing.contains(&t),
                    }
                })
                .collect();
            ClassDiff {
                class: form.source_members.to_string(),
                source: form.source.to_string(),
                published: published.to_string(),
                verdict: if members.iter().all(|m| m.matches) {
                    Verdict::Match
                } else {
                    Verdict::PossibleErratum
                },
                members,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivatives::ghs_i;
    use crate::model::GhostWeightVector;
    use num_rational::BigRational;
    use num_traits::{ToPrimitive, Zero};
    use std::sync::OnceLock;

    fn table3() -> &'static AlphaTable {
        static CELL: OnceLock<AlphaTable> = OnceLock::new();
        CELL.get_or_init(|| alpha_table(3).unwrap())
    }

    #[test]
    fn fixtures_cover_every_triple_once() {
        let mut seen: Vec<Triple> = PUBLISHED_FORMS.iter().flat_map(|f| f.members.iter().copied()).collect();
        assert_eq!(seen.len(), 64);
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn argument_checks() {
        assert_eq!(alpha(4, 0, 0, 3), Err(GhsError::WeightOutOfRange(4)));
        assert_eq!(alpha(0, 0, 0, 2), Err(GhsError::NeedThreeSites(2)));
        assert!(matches!(sign_report(table3(), &[1]), Err(GhsError::InvalidR(1))));
    }

    #[test]
    fn known_entries() {
        let t = table3();
        assert!(t.entry((0, 0, 0)).is_zero());
        assert!(t.entry((1, 0, 0)).is_zero());
        assert!(t.entry((3, 0, 0)).is_zero());
        assert_eq!(*t.entry((3, 3, 3)), RLaurentPoly::shifted_dense(3, &[1, -3, 2]));
        assert_eq!(*t.entry((1, 1, 0)), RLaurentPoly::shifted_dense(7, &[1, -3, 2]));
        assert_eq!(*t.entry((3, 2, 3)), RLaurentPoly::shifted_dense(3, &[3, -9, 6]));
    }

    #[test]
    fn classes_are_unions_of_permutation_orbits() {
        let t = table3();
        let covered: usize = t.symmetry_classes.iter().map(Vec::len).sum();
        assert_eq!(covered, 64);
        for (x, y, z) in all_triples() {
            for p in [(x, z, y), (y, x, z), (y, z, x), (z, x, y), (z, y, x)] {
                assert_eq!(t.entry((x, y, z)), t.entry(p));
            }
        }
        let top = t.class_of((3, 3, 3));
        for m in [(3, 0, 3), (0, 3, 3), (3, 3, 0)] {
            assert!(top.contains(&m));
        }
    }

    #[test]
    fn table_agrees_with_reduced_expansion() {
        assert!(table3().expansion_disagreements().unwrap().is_empty());
    }

    #[test]
    fn adding_a_site_scales_by_r_cubed() {
        let t4 = alpha_table(4).unwrap();
        for (k, v) in &table3().entries {
            assert_eq!(t4.entries[k], v.shift(3));
        }
    }

    #[test]
    fn every_entry_vanishes_at_r_one() {
        for v in table3().entries.values() {
            assert!(v.eval_int(1).unwrap().is_zero());
        }
    }

    /// Recovers `α` at a fixed `r` from `I` alone: at `B = 0` the quantity
    /// `I` is a polynomial of degree ≤ 3 in each of `X_12, X_13, X_23`, so 64
    /// evaluations on a 4×4×4 grid determine its coefficients.
    fn alpha_by_interpolation(r: u32) -> BTreeMap<Triple, BigRational> {
        let nodes = [0i64, 1, 2, 3];
        let mut values = BTreeMap::new();
        for &a in &nodes {
            for &b in &nodes {
                for &c in &nodes {
                    let one = BigRational::from_integer(1.into());
                    let t = |x: i64| &one + BigRational::from_integer(x.into());
                    let w = GhostWeightVector::from_pairs(3, r, [((1, 2), t(a)), ((1, 3), t(b)), ((2, 3), t(c))]).unwrap();
                    values.insert((a, b, c), ghs_i(&w).unwrap());
                }
            }
        }
        // solve the 4×4 Vandermonde system along each axis in turn
        let vandermonde_inverse = |v: [BigRational; 4]| -> [BigRational; 4] {
            // coefficients c_e with Σ c_e x^e = v(x) at x = 0..3
            let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
            let inv = [
                [q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
                [q(-11, 6), q(3, 1), q(-3, 2), q(1, 3)],
                [q(1, 1), q(-5, 2), q(2, 1), q(-1, 2)],
                [q(-1, 6), q(1, 2), q(-1, 2), q(1, 6)],
            ];
            std::array::from_fn(|e| (0..4).map(|k| &inv[e][k] * &v[k]).sum())
        };
        let mut grid = values;
        for axis in 0..3 {
            let mut next = BTreeMap::new();
            for i in 0..4i64 {
                for j in 0..4i64 {
                    let key = |k: i64| match axis {
                        0 => (k, i, j),
                        1 => (i, k, j),
                        _ => (i, j, k),
                    };
                    let coeffs = vandermonde_inverse(std::array::from_fn(|k| grid[&key(k as i64)].clone()));
                    for (e, c) in coeffs.into_iter().enumerate() {
                        next.insert(key(e as i64), c);
                    }
                }
            }
            grid = next;
        }
        grid.into_iter().map(|((a, b, c), v)| ((a as u8, b as u8, c as u8), v)).collect()
    }

    #[test]
    fn interpolated_from_i_matches_enumeration() {
        for r in [2u32, 3] {
            let interp = alpha_by_interpolation(r);
            for (t, poly) in &table3().entries {
                assert_eq!(interp[t], poly.eval_int(r as i64).unwrap(), "{t:?} r={r}");
            }
        }
    }

    #[test]
    fn sign_pattern() {
        let rep = sign_report(table3(), &[2, 3, 4, 5, 6, 7, 8, 9, 10]).unwrap();
        assert!(rep.passed);
        let at2 = &rep.verdicts[0];
        assert_eq!(at2.positive, 0);
        assert_eq!(at2.zero, 64);
        assert!(table3().entry((1, 1, 1)).eval_int(2).unwrap().is_zero());
    }

    #[test]
    fn comparison_reports_every_class() {
        let diffs = compare_paper(table3()).unwrap();
        assert_eq!(diffs.len(), 18);
        assert!(diffs.iter().all(|d| d.members.iter().all(|m| m.oracle_agrees)));
        let verdict = |src: &str| diffs.iter().find(|d| d.class.starts_with(src)).unwrap().verdict;
        for class in ["α(3,3,3)", "α(3,2,3)", "α(3,0,0)", "α(2,0,0)", "α(1,0,0)", "α(0,0,0)", "α(1,1,0)", "α(2,1,0)", "α(1,1,1)", "α(3,1,0)"] {
            assert_eq!(verdict(class), Verdict::Match, "{class}");
        }
        // computed value of the single-member class α(2,2,2) at N = 3, r = 3
        let v = table3().entry((2, 2, 2)).eval_int(3).unwrap();
        assert_eq!(v.to_i64(), Some(3240));
    }

    #[test]
    fn text_table_has_a_row_per_triple() {
        assert_eq!(table3().to_text().lines().count(), 65);
    }
}
