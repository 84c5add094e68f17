use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Opaque element identifier. The numeric order is the canonical order used
/// only for tie-breaking, never as a ranking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An ordered list of distinct elements. Positions in this list are the
/// *indices* used by every matrix-backed type in the crate.
///
/// Cloning is cheap (shared storage).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    ids: Arc<[ElementId]>,
}

impl ElementSet {
    pub fn new(ids: Vec<ElementId>) -> Result<Self, CoreError> {
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(*id) {
                return Err(CoreError::DuplicateElement(*id));
            }
        }
        Ok(Self { ids: ids.into() })
    }

    /// Elements `0..n`.
    pub fn range(n: usize) -> Self {
        Self {
            ids: (0..n as u32).map(ElementId).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[ElementId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> ElementId {
        self.ids[index]
    }

    pub fn index_of(&self, id: ElementId) -> Option<usize> {
        self.ids.iter().position(|&e| e == id)
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.ids.contains(&id)
    }

    /// Map every id of `subset` to its index in `self`, preserving the
    /// order of `subset`.
    pub fn indices_of(&self, subset: &ElementSet) -> Result<Vec<usize>, CoreError> {
        let lookup: HashMap<ElementId, usize> =
            self.ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        subset
            .ids
            .iter()
            .map(|id| lookup.get(id).copied().ok_or(CoreError::ForeignElement(*id)))
            .collect()
    }

    /// Same members, irrespective of order.
    pub fn same_members(&self, other: &ElementSet) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut a = self.ids.to_vec();
        let mut b = other.ids.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// Indices sorted by canonical id order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| self.ids[i]);
        idx
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.ids.iter().map(|e| e.0)).finish()
    }
}

/// A binary relation on the indices of an element set: `holds(i, j)` is the
/// pair indicator X(u, v) for the elements at indices `i` and `j`.
///
/// Tournaments, rankings and partitions all expose their pair indicators
/// through this trait so a single loss routine covers all of them.
pub trait PairRelation {
    fn elements(&self) -> &ElementSet;

    fn holds(&self, i: usize, j: usize) -> bool;

    fn size(&self) -> usize {
        self.elements().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates() {
        let err = ElementSet::new(vec![ElementId(1), ElementId(2), ElementId(1)]).unwrap_err();
        assert!(matches!(err, CoreError::DuplicateElement(ElementId(1))));
        assert!(ElementSet::new(vec![]).unwrap().is_empty());
    }

    #[test]
    fn indices_of_subset() {
        let set = ElementSet::new(vec![ElementId(7), ElementId(3), ElementId(5)]).unwrap();
        let sub = ElementSet::new(vec![ElementId(5), ElementId(7)]).unwrap();
        assert_eq!(set.indices_of(&sub).unwrap(), vec![2, 0]);
        let foreign = ElementSet::new(vec![ElementId(9)]).unwrap();
        assert!(set.indices_of(&foreign).is_err());
        assert_eq!(set.canonical_order(), vec![1, 2, 0]);
    }
}
