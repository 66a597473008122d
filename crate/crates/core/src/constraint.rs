//! Constraint matrices and their coefficients `I_A`.
//!
//! A matrix assigns to each pair `p` a triple `(a_{p,1}, a_{p,2}, a_{p,3})`.
//! Column `c` adds the equality `σ_i = σ_j` for every pair with
//! `a_{p,c} = 1` to factor `c` of each of the five triple-product terms of
//! `I`. With all weights switched off a constrained sum is `r^S`, `S` the
//! number of blocks, so `I_A` is a signed sum of powers of `r`.
//!
//! The five terms carry these built-in constraints (ghost summed):
//!
//! | term | sign | factor 1  | factor 2  | factor 3     |
//! |------|------|-----------|-----------|--------------|
//! | F1   | +1   |           |           | 0=1=2=3      |
//! | F2   | -1   |           | 0=1=2     | 0=3          |
//! | F3   | -1   |           | 0=1=3     | 0=2          |
//! | F4   | -1   |           | 0=2=3     | 0=1          |
//! | F5   | +2   | 0=1       | 0=2       | 0=3          |

use std::collections::BTreeMap;

use num_rational::BigRational;

use crate::error::{GhsError, Result};
use crate::laurent::RLaurentPoly;
use crate::model::{pair_count, ActivePairs, Ensemble, GhostMode, GhostWeightVector, PairOrder, O2};
use crate::partition::{count_blocks, merge_constraints};
use crate::xpoly::XMonomial;

/// One triple-product term: sign and the built-in equalities of its three
/// factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GhsTerm {
    pub sign: i64,
    pub factors: [&'static [(usize, usize)]; 3],
}

pub const GHS_TERMS: [GhsTerm; 5] = [
    GhsTerm {
        sign: 1,
        factors: [&[], &[], &[(0, 1), (0, 2), (0, 3)]],
    },
    GhsTerm {
        sign: -1,
        factors: [&[], &[(0, 1), (0, 2)], &[(0, 3)]],
    },
    GhsTerm {
        sign: -1,
        factors: [&[], &[(0, 1), (0, 3)], &[(0, 2)]],
    },
    GhsTerm {
        sign: -1,
        factors: [&[], &[(0, 2), (0, 3)], &[(0, 1)]],
    },
    GhsTerm {
        sign: 2,
        factors: [&[(0, 1)], &[(0, 2)], &[(0, 3)]],
    },
];

/// A 0/1 matrix with one row per pair and three columns, stored as a bit
/// mask per nonzero row (bit `c` is column `c + 1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConstraintMatrix {
    n_sites: usize,
    window: usize,
    rows: BTreeMap<usize, u8>,
}

impl ConstraintMatrix {
    /// The zero matrix whose nonzero rows must lie among the last `window`
    /// pairs.
    pub fn zero(n_sites: usize, window: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(GhsError::NoSites);
        }
        let max = pair_count(n_sites);
        if window == 0 || window > max {
            return Err(GhsError::WindowOutOfRange { s: window, max });
        }
        Ok(ConstraintMatrix {
            n_sites,
            window,
            rows: BTreeMap::new(),
        })
    }

    /// Zero matrix with every row active.
    pub fn full(n_sites: usize) -> Result<Self> {
        Self::zero(n_sites, pair_count(n_sites))
    }

    /// Matrix supported on `p1, p2, p3` with the given row masks.
    pub fn from_o2_rows(n_sites: usize, masks: [u8; 3]) -> Result<Self> {
        if n_sites < 3 {
            return Err(GhsError::NeedThreeSites(n_sites));
        }
        let mut a = Self::full(n_sites)?;
        let order = PairOrder::unchecked(n_sites);
        for (pair, mask) in O2.iter().zip(masks) {
            let p = order.index_of(pair.0, pair.1).expect("O2 pair exists for N >= 3");
            a.set_row(p, mask)?;
        }
        Ok(a)
    }

    pub fn set_row(&mut self, p: usize, mask: u8) -> Result<()> {
        if mask > 0b111 {
            return Err(GhsError::InvalidModel(format!("row mask {mask:#b} has more than three columns")));
        }
        let c = pair_count(self.n_sites);
        if p >= c || p < c - self.window {
            return Err(GhsError::RowOutsideWindow {
                row: p,
                window: self.window,
            });
        }
        if mask == 0 {
            self.rows.remove(&p);
        } else {
            self.rows.insert(p, mask);
        }
        Ok(())
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn is_full_window(&self) -> bool {
        self.window == pair_count(self.n_sites)
    }

    pub fn row(&self, p: usize) -> u8 {
        self.rows.get(&p).copied().unwrap_or(0)
    }

    /// `a_{p,c}` for `c ∈ {1, 2, 3}`.
    pub fn entry(&self, p: usize, c: usize) -> bool {
        (1..=3).contains(&c) && self.row(p) & (1 << (c - 1)) != 0
    }

    /// Row weight `n(p)`.
    pub fn row_weight(&self, p: usize) -> u8 {
        self.row(p).count_ones() as u8
    }

    /// Nonzero rows as `(p, mask)`.
    pub fn rows(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.rows.iter().map(|(&p, &m)| (p, m))
    }

    /// The pairs selected by column `c ∈ {1, 2, 3}`.
    pub fn column_pairs(&self, c: usize) -> Vec<(usize, usize)> {
        let order = PairOrder::unchecked(self.n_sites);
        self.rows
            .iter()
            .filter(|&(_, &m)| c >= 1 && c <= 3 && m & (1 << (c - 1)) != 0)
            .map(|(&p, _)| order.pair(p))
            .collect()
    }

    /// `∏_p X_p^{n(p)}`.
    pub fn monomial(&self) -> XMonomial {
        XMonomial::from_pairs(self.rows.iter().map(|(&p, &m)| (p, m.count_ones() as u8)))
    }
}

/// Sum over ghost-summed assignments satisfying the equalities of
/// `∏_{p active} t_p^{δ(σ_i,σ_j)}`.
pub fn constrained_sum(
    weights: &GhostWeightVector,
    equalities: &[(usize, usize)],
    active: &ActivePairs,
) -> Result<BigRational> {
    let partition = merge_constraints(weights.n_sites(), equalities)?;
    Ok(weights.block_sum(&partition, GhostMode::Summed, active))
}

/// Block counts `S` of the three factors of every term for the given
/// column constraint sets.
pub(crate) fn term_exponents(n_sites: usize, columns: &[Vec<(usize, usize)>; 3]) -> [i32; 5] {
    let mut out = [0; 5];
    for (k, term) in GHS_TERMS.iter().enumerate() {
        out[k] = (0..3)
            .map(|c| count_blocks(n_sites + 1, term.factors[c].iter().chain(&columns[c])) as i32)
            .sum();
    }
    out
}

/// `I_A = Σ_k sign_k ∏_c r^{S_{k,c}}` as a Laurent polynomial in `r`.
pub fn ia_eval(a: &ConstraintMatrix) -> Result<RLaurentPoly> {
    if !a.is_full_window() {
        return Err(GhsError::PartialWindow);
    }
    if a.n_sites < 3 {
        return Err(GhsError::NeedThreeSites(a.n_sites));
    }
    let columns = [a.column_pairs(1), a.column_pairs(2), a.column_pairs(3)];
    let exps = term_exponents(a.n_sites, &columns);
    Ok(RLaurentPoly::from_terms(
        GHS_TERMS.iter().zip(exps).map(|(t, e)| (e, t.sign)),
    ))
}
