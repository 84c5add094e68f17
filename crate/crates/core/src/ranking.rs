use std::fmt;

use crate::element::{ElementId, ElementSet, PairRelation};
use crate::error::CoreError;

/// A bijection from elements to positions. Positions are 1-based in the
/// public API (`position`) and 0-based in `order`/`rank_of`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Ranking {
    elements: ElementSet,
    /// Element indices, most preferred first.
    order: Vec<usize>,
    /// `rank[i]` is the 0-based position of element index `i`.
    rank: Vec<usize>,
}

impl Ranking {
    /// Build from element indices listed most-preferred first.
    pub fn from_order(elements: ElementSet, order: Vec<usize>) -> Result<Self, CoreError> {
        let n = elements.len();
        if order.len() != n {
            return Err(CoreError::NotAPermutation(n));
        }
        let mut rank = vec![usize::MAX; n];
        for (pos, &i) in order.iter().enumerate() {
            if i >= n || rank[i] != usize::MAX {
                return Err(CoreError::NotAPermutation(n));
            }
            rank[i] = pos;
        }
        Ok(Self {
            elements,
            order,
            rank,
        })
    }

    /// Build from element ids listed most-preferred first.
    pub fn from_ids(elements: ElementSet, ids: &[ElementId]) -> Result<Self, CoreError> {
        let listed = ElementSet::new(ids.to_vec())?;
        if listed.len() != elements.len() {
            return Err(CoreError::NotAPermutation(elements.len()));
        }
        let order = elements.indices_of(&listed)?;
        Self::from_order(elements, order)
    }

    /// Build from 1-based positions, one per element index.
    pub fn from_positions(elements: ElementSet, positions: &[usize]) -> Result<Self, CoreError> {
        let n = elements.len();
        if positions.len() != n {
            return Err(CoreError::NotAPermutation(n));
        }
        let mut order = vec![usize::MAX; n];
        for (i, &p) in positions.iter().enumerate() {
            if p == 0 || p > n || order[p - 1] != usize::MAX {
                return Err(CoreError::NotAPermutation(n));
            }
            order[p - 1] = i;
        }
        Self::from_order(elements, order)
    }

    /// The ranking listing elements in element-set order.
    pub fn identity(elements: ElementSet) -> Self {
        let n = elements.len();
        Self {
            elements,
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    pub fn elements(&self) -> &ElementSet {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn ids(&self) -> Vec<ElementId> {
        self.order.iter().map(|&i| self.elements.id(i)).collect()
    }

    /// 0-based position of element index `i`.
    #[inline]
    pub fn rank_of(&self, i: usize) -> usize {
        self.rank[i]
    }

    /// 1-based position of `id`.
    pub fn position(&self, id: ElementId) -> Option<usize> {
        self.elements.index_of(id).map(|i| self.rank[i] + 1)
    }

    /// σ(i, j): element `i` is ahead of element `j`.
    #[inline]
    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.rank[i] < self.rank[j]
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Self::from_order(self.elements.clone(), order).expect("reversal of a permutation")
    }

    /// Keep the relative order of the members of `subset`; positions are
    /// re-compacted to `1..=|subset|`. The result is indexed by `subset`.
    pub fn restrict(&self, subset: &ElementSet) -> Result<Self, CoreError> {
        let idx = self.elements.indices_of(subset)?;
        let mut local: Vec<usize> = (0..idx.len()).collect();
        local.sort_by_key(|&k| self.rank[idx[k]]);
        Self::from_order(subset.clone(), local)
    }

    /// All n! rankings of `elements`, in lexicographic order of `order`.
    pub fn enumerate_all(elements: ElementSet) -> impl Iterator<Item = Ranking> {
        use itertools::Itertools;
        let n = elements.len();
        (0..n)
            .permutations(n)
            .map(move |order| Ranking::from_order(elements.clone(), order).expect("permutation"))
    }
}

impl PairRelation for Ranking {
    fn elements(&self) -> &ElementSet {
        &self.elements
    }

    #[inline]
    fn holds(&self, i: usize, j: usize) -> bool {
        self.prefers(i, j)
    }
}

impl fmt::Debug for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.order.iter().map(|&i| self.elements.id(i).0))
            .finish()
    }
}
