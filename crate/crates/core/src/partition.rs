//! Disjoint-set bookkeeping for spin-equality constraints.
//!
//! A set of constraints `σ_a = σ_b` over the sites `{0, …, N}` (site 0 is the
//! ghost) splits the sites into blocks; summing any site-independent quantity
//! over the consistent configurations then gives `r^S` with `S` the number of
//! blocks.

use crate::error::{GhsError, Result};

/// Union-find with path compression and union by rank.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
            components: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the sets holding `a` and `b`. Returns false if they were
    /// already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        self.components -= 1;
        true
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn into_partition(mut self) -> Partition {
        let n = self.len();
        let mut min_of_root = vec![usize::MAX; n];
        let roots: Vec<usize> = (0..n).map(|x| self.find(x)).collect();
        for (x, &root) in roots.iter().enumerate() {
            min_of_root[root] = min_of_root[root].min(x);
        }
        let labels = roots.iter().map(|&root| min_of_root[root]).collect();
        Partition {
            labels,
            block_count: self.components,
        }
    }
}

/// A set partition of `{0, …, n-1}`. Every element is labelled by the minimum
/// element of its block, so equal partitions compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    block_count: usize,
}

impl Partition {
    pub fn singletons(n_elements: usize) -> Self {
        Partition {
            labels: (0..n_elements).collect(),
            block_count: n_elements,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.labels.len()
    }

    /// Number of blocks `S`.
    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Minimum element of the block containing `x`.
    pub fn representative(&self, x: usize) -> usize {
        self.labels[x]
    }

    pub fn same_block(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    /// Blocks in increasing order of their minimum element, each sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(self.block_count);
        let mut slot = vec![usize::MAX; self.labels.len()];
        for (x, &rep) in self.labels.iter().enumerate() {
            if rep == x {
                slot[x] = blocks.len();
                blocks.push(vec![x]);
            } else {
                blocks[slot[rep]].push(x);
            }
        }
        blocks
    }

    /// Index of the block holding each element, consistent with [`Self::blocks`].
    pub fn block_indices(&self) -> Vec<usize> {
        let mut slot = vec![usize::MAX; self.labels.len()];
        let mut next = 0;
        self.labels
            .iter()
            .enumerate()
            .map(|(x, &rep)| {
                if rep == x {
                    slot[x] = next;
                    next += 1;
                }
                slot[rep]
            })
            .collect()
    }
}

/// Finest partition of the sites `{0, …, n_sites}` in which every listed
/// pair shares a block.
pub fn merge_constraints(n_sites: usize, equalities: &[(usize, usize)]) -> Result<Partition> {
    let mut uf = UnionFind::new(n_sites + 1);
    for &(a, b) in equalities {
        for site in [a, b] {
            if site > n_sites {
                return Err(GhsError::SiteOutOfRange {
                    site,
                    lo: 0,
                    hi: n_sites,
                });
            }
        }
        uf.union(a, b);
    }
    Ok(uf.into_partition())
}

/// Block count of the constraint closure. Indices must already be in range.
pub(crate) fn count_blocks<'a, I>(n_elements: usize, equalities: I) -> usize
where
    I: IntoIterator<Item = &'a (usize, usize)>,
{
    let mut uf = UnionFind::new(n_elements);
    for &(a, b) in equalities {
        uf.union(a, b);
    }
    uf.components()
}
