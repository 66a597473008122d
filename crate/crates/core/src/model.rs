//! Potts model instances, spin configurations and Gibbs averages.
//!
//! Exact computations work in the weight domain `t_p = e^{J_p}` over all
//! pairs of `{0, …, N}`, where site 0 is the ghost spin and `J_{0,i} = B_i`.
//! Every Boltzmann weight is then a product of `t_p` over the pairs whose
//! spins agree, so partition functions and correlators are exact rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Zero};

use crate::error::{GhsError, Result};
use crate::partition::{merge_constraints, Partition};

/// Index of the ghost site.
pub const GHOST: usize = 0;

/// The pairs `p1 = (1,2)`, `p2 = (1,3)`, `p3 = (2,3)` carrying the core
/// variables.
pub const P1: (usize, usize) = (1, 2);
pub const P2: (usize, usize) = (1, 3);
pub const P3: (usize, usize) = (2, 3);
/// The first field pair `(0,1)`.
pub const P4: (usize, usize) = (0, 1);

/// Couplings among the sites 1, 2, 3.
pub const O2: [(usize, usize); 3] = [P1, P2, P3];
/// Field pairs of the sites 1, 2, 3.
pub const O3: [(usize, usize); 3] = [(0, 1), (0, 2), (0, 3)];

/// Whether a pair belongs to `O1 = O2 ∪ O3`.
pub fn in_o1(pair: (usize, usize)) -> bool {
    O2.contains(&pair) || O3.contains(&pair)
}

/// Number of pairs over `{0, …, N}`, i.e. `C(N+1, 2)`.
pub fn pair_count(n_sites: usize) -> usize {
    (n_sites + 1) * n_sites / 2
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(GhsError::SiteOutOfRange {
            site,
            lo: 1,
            hi: n_sites,
        });
    }
    Ok(())
}

fn check_shape(n_sites: usize, n_states: u32) -> Result<()> {
    if n_sites == 0 {
        return Err(GhsError::NoSites);
    }
    if n_states < 2 {
        return Err(GhsError::TooFewStates(n_states));
    }
    Ok(())
}

/// A physical instance: `N` sites, `r` states, couplings `J_{i,j}` and fields
/// `B_i`, all non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    n_sites: usize,
    n_states: u32,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
}

impl ModelSpec {
    pub fn new<I>(n_sites: usize, n_states: u32, couplings: I, fields: Vec<f64>) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), f64)>,
    {
        check_shape(n_sites, n_states)?;
        if fields.len() != n_sites {
            return Err(GhsError::LengthMismatch {
                expected: n_sites,
                found: fields.len(),
            });
        }
        let mut map = BTreeMap::new();
        for ((i, j), value) in couplings {
            if i >= j {
                return Err(GhsError::InvalidModel(format!(
                    "coupling key ({i}, {j}) is not strictly ordered"
                )));
            }
            check_site(i, n_sites)?;
            check_site(j, n_sites)?;
            if !(value.is_finite() && value >= 0.0) {
                return Err(GhsError::InvalidModel(format!(
                    "coupling J({i},{j}) = {value} is not a finite non-negative number"
                )));
            }
            if map.insert((i, j), value).is_some() {
                return Err(GhsError::InvalidModel(format!("duplicate coupling ({i}, {j})")));
            }
        }
        for (i, &b) in fields.iter().enumerate() {
            if !(b.is_finite() && b >= 0.0) {
                return Err(GhsError::InvalidModel(format!(
                    "field B{} = {b} is not a finite non-negative number",
                    i + 1
                )));
            }
        }
        Ok(ModelSpec {
            n_sites,
            n_states,
            couplings: map,
            fields,
        })
    }

    /// All couplings and fields zero.
    pub fn free(n_sites: usize, n_states: u32) -> Result<Self> {
        Self::new(n_sites, n_states, [], vec![0.0; n_sites])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    /// `J_{i,j}` for `1 ≤ i < j ≤ N`; absent pairs are 0.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0)
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i - 1]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    /// Ghost-extended coupling: `B_j` for `(0, j)`, `J_{i,j}` otherwise.
    pub fn pair_value(&self, i: usize, j: usize) -> f64 {
        if i == GHOST {
            self.field(j)
        } else {
            self.coupling(i, j)
        }
    }

    pub fn with_field(&self, i: usize, value: f64) -> Result<Self> {
        check_site(i, self.n_sites)?;
        let mut fields = self.fields.clone();
        fields[i - 1] = value;
        Self::new(
            self.n_sites,
            self.n_states,
            self.couplings.clone(),
            fields,
        )
    }

    /// `E(σ) = Σ_{i<j} J_{i,j} δ(σ_i,σ_j) + Σ_i B_i δ(1,σ_i)` for a physical
    /// configuration. The Gibbs weight is `e^{+E}`.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        let spins = config.physical();
        if spins.len() != self.n_sites {
            return Err(GhsError::LengthMismatch {
                expected: self.n_sites,
                found: spins.len(),
            });
        }
        let mut e = 0.0;
        for (&(i, j), &value) in &self.couplings {
            if spins[i - 1] == spins[j - 1] {
                e += value;
            }
        }
        for (b, &s) in self.fields.iter().zip(spins) {
            if s == 1 {
                e += b;
            }
        }
        Ok(e)
    }

    /// Float weights `t_p = e^{J_p}` in pair order.
    pub fn float_weights(&self) -> FloatWeights<f64> {
        let order = PairOrder::unchecked(self.n_sites);
        let weights = order
            .iter()
            .map(|(i, j)| self.pair_value(i, j).exp())
            .collect();
        FloatWeights {
            n_sites: self.n_sites,
            n_states: self.n_states,
            weights,
        }
    }
}

/// A spin assignment with states in `1..=r`, optionally led by the ghost spin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfig {
    spins: Vec<u32>,
    ghost_included: bool,
}

impl SpinConfig {
    pub fn new(spins: Vec<u32>, ghost_included: bool, n_states: u32) -> Result<Self> {
        if let Some(&bad) = spins.iter().find(|&&s| s == 0 || s > n_states) {
            return Err(GhsError::InvalidModel(format!(
                "spin value {bad} outside 1..={n_states}"
            )));
        }
        Ok(SpinConfig {
            spins,
            ghost_included,
        })
    }

    pub fn spins(&self) -> &[u32] {
        &self.spins
    }

    pub fn ghost_included(&self) -> bool {
        self.ghost_included
    }

    /// Spins of the physical sites `1..=N`.
    pub fn physical(&self) -> &[u32] {
        if self.ghost_included {
            &self.spins[1..]
        } else {
            &self.spins
        }
    }

    /// Number of physical sites.
    pub fn n_sites(&self) -> usize {
        self.physical().len()
    }

    /// Spin at site `i`, where site 0 is the ghost (state 1 when absent).
    pub fn spin(&self, i: usize) -> u32 {
        if self.ghost_included {
            self.spins[i]
        } else if i == GHOST {
            1
        } else {
            self.spins[i - 1]
        }
    }
}

/// Row-major enumeration of `Σ^N` (or `Σ^{N+1}` with the ghost), last site
/// fastest.
#[derive(Debug, Clone)]
pub struct Configurations {
    current: Option<Vec<u32>>,
    n_states: u32,
    ghost_included: bool,
}

pub fn configurations(n_sites: usize, n_states: u32, ghost_included: bool) -> Configurations {
    let len = n_sites + usize::from(ghost_included);
    Configurations {
        current: (n_states > 0).then(|| vec![1; len]),
        n_states,
        ghost_included,
    }
}

impl Iterator for Configurations {
    type Item = SpinConfig;

    fn next(&mut self) -> Option<SpinConfig> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut pos = cur.len();
        loop {
            if pos == 0 {
                self.current = None;
                break;
            }
            pos -= 1;
            if cur[pos] < self.n_states {
                cur[pos] += 1;
                break;
            }
            cur[pos] = 1;
        }
        Some(SpinConfig {
            spins: out,
            ghost_included: self.ghost_included,
        })
    }
}

/// The lexicographic pair order `(0,1), (0,2), …, (N-1,N)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOrder {
    n_sites: usize,
    pairs: Vec<(usize, usize)>,
}

impl PairOrder {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(GhsError::NoSites);
        }
        Ok(Self::unchecked(n_sites))
    }

    pub(crate) fn unchecked(n_sites: usize) -> Self {
        let pairs = (0..=n_sites)
            .flat_map(|i| (i + 1..=n_sites).map(move |j| (i, j)))
            .collect();
        PairOrder { n_sites, pairs }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, p: usize) -> (usize, usize) {
        self.pairs[p]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Position of a pair (in either orientation).
    pub fn index_of(&self, a: usize, b: usize) -> Option<usize> {
        let (i, j) = (a.min(b), a.max(b));
        if i == j || j > self.n_sites {
            return None;
        }
        // rows 0..i contribute N, N-1, …, N-i+1 pairs
        let before: usize = (0..i).map(|row| self.n_sites - row).sum();
        Some(before + (j - i - 1))
    }
}

/// Pair order for `N` sites.
pub fn pair_order(n_sites: usize) -> Result<PairOrder> {
    PairOrder::new(n_sites)
}

/// Which pair weights take part in a weighted sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActivePairs {
    All,
    None,
    /// The first `k` pairs in pair order (the truncated weight `H_s` with
    /// `k = C - s`).
    Prefix(usize),
    Subset(BTreeSet<usize>),
}

impl ActivePairs {
    pub fn contains(&self, p: usize) -> bool {
        match self {
            ActivePairs::All => true,
            ActivePairs::None => false,
            ActivePairs::Prefix(k) => p < *k,
            ActivePairs::Subset(set) => set.contains(&p),
        }
    }
}

/// Whether the ghost spin is pinned to state 1 or summed like other sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GhostMode {
    FixedAtOne,
    Summed,
}

/// A weight system over which configuration sums can be taken.
pub trait Ensemble {
    type Value: Num + Clone + fmt::Debug;

    fn n_sites(&self) -> usize;
    fn n_states(&self) -> u32;

    /// `Σ ∏_{p active} t_p^{δ(σ_i,σ_j)}` over configurations constant on the
    /// blocks of `partition` (a partition of `{0, …, N}`).
    fn block_sum(&self, partition: &Partition, ghost: GhostMode, active: &ActivePairs) -> Self::Value;
}

/// Sums `∏_p (eq_p if σ_i = σ_j else neq_p)` over all block-constant
/// configurations, assigning block states depth-first in row-major order.
fn enumerate_blocks<T, F>(
    n_states: u32,
    pairs: &[(usize, usize)],
    partition: &Partition,
    ghost: GhostMode,
    mut factor: F,
) -> T
where
    T: Num + Clone,
    F: FnMut(usize) -> Option<(T, T)>,
{
    let blocks = partition.block_count();
    let block_of = partition.block_indices();
    let mut internal = T::one();
    // cross[b][a] for a < b: (product if equal, product if different)
    let mut cross: Vec<Vec<Option<(T, T)>>> = (0..blocks).map(|b| vec![None; b]).collect();
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let Some((eq, neq)) = factor(p) else { continue };
        let (bi, bj) = (block_of[i], block_of[j]);
        if bi == bj {
            internal = internal * eq;
            continue;
        }
        let (a, b) = (bi.min(bj), bi.max(bj));
        let slot = &mut cross[b][a];
        *slot = Some(match slot.take() {
            None => (eq, neq),
            Some((e, n)) => (e * eq, n * neq),
        });
    }

    fn descend<T: Num + Clone>(
        b: usize,
        states: &mut [u32],
        partial: T,
        cross: &[Vec<Option<(T, T)>>],
        n_states: u32,
        pinned_first: bool,
    ) -> T {
        if b == states.len() {
            return partial;
        }
        let top = if b == 0 && pinned_first { 1 } else { n_states };
        let mut acc = T::zero();
        for s in 0..top {
            states[b] = s;
            let mut w = partial.clone();
            for (a, f) in cross[b].iter().enumerate() {
                if let Some((eq, neq)) = f {
                    w = w * if states[a] == s { eq.clone() } else { neq.clone() };
                }
            }
            acc = acc + descend(b + 1, states, w, cross, n_states, pinned_first);
        }
        acc
    }

    let mut states = vec![0u32; blocks];
    // block 0 always holds the ghost site 0
    let pinned = ghost == GhostMode::FixedAtOne;
    descend(0, &mut states, T::one(), &cross, n_states, pinned) * internal
}

/// Exact weights `t_p ≥ 1` over all ghost-extended pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GhostWeightVector {
    n_sites: usize,
    n_states: u32,
    weights: Vec<BigRational>,
}

impl GhostWeightVector {
    pub fn new(n_sites: usize, n_states: u32, weights: Vec<BigRational>) -> Result<Self> {
        check_shape(n_sites, n_states)?;
        let expected = pair_count(n_sites);
        if weights.len() != expected {
            return Err(GhsError::LengthMismatch {
                expected,
                found: weights.len(),
            });
        }
        let order = PairOrder::unchecked(n_sites);
        for (p, t) in weights.iter().enumerate() {
            if *t < BigRational::one() {
                let (i, j) = order.pair(p);
                return Err(GhsError::InvalidModel(format!(
                    "weight t({i},{j}) = {t} is below 1 (negative coupling)"
                )));
            }
        }
        Ok(GhostWeightVector {
            n_sites,
            n_states,
            weights,
        })
    }

    /// All `t_p = 1`, i.e. `J = B = 0`.
    pub fn uniform(n_sites: usize, n_states: u32) -> Result<Self> {
        Self::new(n_sites, n_states, vec![BigRational::one(); pair_count(n_sites)])
    }

    /// Weights given per pair; missing pairs get `t = 1`.
    pub fn from_pairs<I>(n_sites: usize, n_states: u32, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), BigRational)>,
    {
        check_shape(n_sites, n_states)?;
        let order = PairOrder::unchecked(n_sites);
        let mut weights = vec![BigRational::one(); order.len()];
        let mut seen = BTreeSet::new();
        for ((i, j), t) in entries {
            let p = order.index_of(i, j).ok_or_else(|| {
                GhsError::InvalidModel(format!("pair ({i}, {j}) is not a pair of 0..={n_sites}"))
            })?;
            if !seen.insert(p) {
                return Err(GhsError::InvalidModel(format!("duplicate pair ({i}, {j})")));
            }
            weights[p] = t;
        }
        Self::new(n_sites, n_states, weights)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn weight(&self, p: usize) -> &BigRational {
        &self.weights[p]
    }

    pub fn weight_of(&self, i: usize, j: usize) -> Option<&BigRational> {
        PairOrder::unchecked(self.n_sites)
            .index_of(i, j)
            .map(|p| &self.weights[p])
    }

    /// `X_p = t_p - 1` for every pair.
    pub fn x_values(&self) -> Vec<BigRational> {
        self.weights.iter().map(|t| t - BigRational::one()).collect()
    }

    pub fn with_weight(&self, p: usize, t: BigRational) -> Result<Self> {
        let mut weights = self.weights.clone();
        weights[p] = t;
        Self::new(self.n_sites, self.n_states, weights)
    }

    pub fn with_states(&self, n_states: u32) -> Result<Self> {
        Self::new(self.n_sites, n_states, self.weights.clone())
    }

    /// Relabels physical sites: site `i` becomes `perm[i-1]`. The ghost stays
    /// at 0.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_sites {
            return Err(GhsError::LengthMismatch {
                expected: self.n_sites,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; self.n_sites + 1];
        for &target in perm {
            check_site(target, self.n_sites)?;
            if std::mem::replace(&mut seen[target], true) {
                return Err(GhsError::InvalidModel(format!(
                    "relabeling maps two sites onto {target}"
                )));
            }
        }
        let map = |s: usize| if s == GHOST { GHOST } else { perm[s - 1] };
        let order = PairOrder::unchecked(self.n_sites);
        let mut weights = vec![BigRational::one(); order.len()];
        for (p, (i, j)) in order.iter().enumerate() {
            let q = order.index_of(map(i), map(j)).expect("relabeled pair in range");
            weights[q] = self.weights[p].clone();
        }
        Self::new(self.n_sites, self.n_states, weights)
    }

    pub fn to_float(&self) -> FloatWeights<f64> {
        use num_traits::ToPrimitive;
        FloatWeights {
            n_sites: self.n_sites,
            n_states: self.n_states,
            weights: self
                .weights
                .iter()
                .map(|t| t.to_f64().unwrap_or(f64::INFINITY))
                .collect(),
        }
    }

    /// Weights as `p/q` strings in pair order.
    pub fn to_strings(&self) -> Vec<String> {
        self.weights.iter().map(format_rational).collect()
    }
}

impl Ensemble for GhostWeightVector {
    type Value = BigRational;

    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn n_states(&self) -> u32 {
        self.n_states
    }

    fn block_sum(&self, partition: &Partition, ghost: GhostMode, active: &ActivePairs) -> BigRational {
        let order = PairOrder::unchecked(self.n_sites);
        // D·H(σ) = ∏_p (numer_p if equal else denom_p), D = ∏ denom_p
        let mut denominator = BigInt::one();
        let total: BigInt = enumerate_blocks(self.n_states, order.pairs(), partition, ghost, |p| {
            if !active.contains(p) {
                return None;
            }
            let t = &self.weights[p];
            if t.is_integer() {
                return Some((t.numer().clone(), BigInt::one()));
            }
            denominator *= t.denom();
            Some((t.numer().clone(), t.denom().clone()))
        });
        BigRational::new(total, denominator)
    }
}

/// Floating-point weights over ghost-extended pairs, generic over the float
/// type so the finite-difference oracle can run in double-double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatWeights<T> {
    n_sites: usize,
    n_states: u32,
    weights: Vec<T>,
}

impl<T: Clone> FloatWeights<T> {
    pub fn from_fn<F>(n_sites: usize, n_states: u32, mut weight: F) -> Result<Self>
    where
        F: FnMut((usize, usize)) -> T,
    {
        check_shape(n_sites, n_states)?;
        let weights = PairOrder::unchecked(n_sites).iter().map(&mut weight).collect();
        Ok(FloatWeights {
            n_sites,
            n_states,
            weights,
        })
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

impl<T: Num + Clone + fmt::Debug> Ensemble for FloatWeights<T> {
    type Value = T;

    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn n_states(&self) -> u32 {
        self.n_states
    }

    fn block_sum(&self, partition: &Partition, ghost: GhostMode, active: &ActivePairs) -> T {
        let order = PairOrder::unchecked(self.n_sites);
        enumerate_blocks(self.n_states, order.pairs(), partition, ghost, |p| {
            active
                .contains(p)
                .then(|| (self.weights[p].clone(), T::one()))
        })
    }
}

/// `∏_p t_p^{δ(σ_i,σ_j)}` for a single configuration; a physical
/// configuration has its ghost at state 1.
pub fn boltzmann_weight(weights: &GhostWeightVector, config: &SpinConfig) -> Result<BigRational> {
    if config.n_sites() != weights.n_sites {
        return Err(GhsError::LengthMismatch {
            expected: weights.n_sites,
            found: config.n_sites(),
        });
    }
    let order = PairOrder::unchecked(weights.n_sites);
    let mut h = BigRational::one();
    for (p, (i, j)) in order.iter().enumerate() {
        if config.spin(i) == config.spin(j) {
            h *= &weights.weights[p];
        }
    }
    Ok(h)
}

/// `Z_N` with the ghost pinned to state 1, or `r·Z_N` with the ghost summed.
pub fn partition_function<E: Ensemble>(ensemble: &E, ghost: GhostMode) -> E::Value {
    let free = Partition::singletons(ensemble.n_sites() + 1);
    ensemble.block_sum(&free, ghost, &ActivePairs::All)
}

fn aligned_sum<E: Ensemble>(ensemble: &E, sites: &[usize]) -> Result<E::Value> {
    let n = ensemble.n_sites();
    for &s in sites {
        check_site(s, n)?;
    }
    // with σ_0 = 1, δ(1, σ_i) is the constraint σ_i = σ_0
    let eqs: Vec<(usize, usize)> = sites.iter().map(|&s| (GHOST, s)).collect();
    let partition = merge_constraints(n, &eqs)?;
    Ok(ensemble.block_sum(&partition, GhostMode::FixedAtOne, &ActivePairs::All))
}

/// `⟨∏_{i ∈ sites} δ(1, σ_i)⟩`. Repeated sites act once.
pub fn correlator<E: Ensemble>(ensemble: &E, sites: &[usize]) -> Result<E::Value> {
    let numerator = aligned_sum(ensemble, sites)?;
    Ok(numerator / partition_function(ensemble, GhostMode::FixedAtOne))
}

/// Local magnetization `m_i = ⟨δ(1, σ_i)⟩`.
pub fn magnetization<E: Ensemble>(ensemble: &E, i: usize) -> Result<E::Value> {
    correlator(ensemble, &[i])
}

/// Correlators sharing one partition-function evaluation.
pub(crate) struct Correlators<'a, E: Ensemble> {
    ensemble: &'a E,
    z: E::Value,
}

impl<'a, E: Ensemble> Correlators<'a, E> {
    pub(crate) fn new(ensemble: &'a E) -> Self {
        Correlators {
            ensemble,
            z: partition_function(ensemble, GhostMode::FixedAtOne),
        }
    }

    pub(crate) fn get(&self, sites: &[usize]) -> Result<E::Value> {
        Ok(aligned_sum(self.ensemble, sites)? / self.z.clone())
    }
}

/// `p/q` text for a rational, denominator always present.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `[+-]?digits/digits` with a nonzero denominator.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || GhsError::Parse(format!("`{text}` is not a rational of the form p/q"));
    let (num, den) = text.split_once('/').ok_or_else(bad)?;
    let digits = num.strip_prefix(['+', '-']).unwrap_or(num);
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(digits) || !all_digits(den) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(GhsError::Parse(format!("`{text}` has a zero denominator")));
    }
    Ok(BigRational::new(n, d))
}
