use crate::element::{ElementSet, PairRelation};
use crate::error::CoreError;

/// A bipartite ground truth: label 0 is the preferred (positive) class,
/// label 1 the negative one. τ(u, v) = 1 iff label(u) < label(v), so pairs
/// inside a class are tied.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    elements: ElementSet,
    labels: Vec<u8>,
}

impl Partition {
    pub fn new(elements: ElementSet, labels: Vec<u8>) -> Result<Self, CoreError> {
        if labels.len() != elements.len() {
            return Err(CoreError::Shape {
                expected: elements.len(),
                found: labels.len(),
            });
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(CoreError::BadLabel {
                id: elements.id(i),
                label: labels[i],
            });
        }
        Ok(Self { elements, labels })
    }

    /// Partition whose positive class is the set bits of `mask`.
    pub fn from_mask(elements: ElementSet, mask: u64) -> Self {
        let labels = (0..elements.len())
            .map(|i| if mask >> i & 1 == 1 { 0 } else { 1 })
            .collect();
        Self { elements, labels }
    }

    /// All 2^n partitions.
    pub fn enumerate_all(elements: ElementSet) -> impl Iterator<Item = Partition> {
        let n = elements.len();
        (0..1u64 << n).map(move |m| Partition::from_mask(elements.clone(), m))
    }

    pub fn elements(&self) -> &ElementSet {
        &self.elements
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    #[inline]
    pub fn prefers(&self, i: usize, j: usize) -> bool {
        self.labels[i] < self.labels[j]
    }

    /// Number of positive (label 0) elements.
    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    /// Unordered pairs with different labels.
    pub fn mixed_pairs(&self) -> usize {
        let k = self.positives();
        k * (self.labels.len() - k)
    }

    /// Element indices with all positives first; within a class the element
    /// set order is kept.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.sort_by_key(|&i| self.labels[i]);
        idx
    }

    pub fn restrict(&self, subset: &ElementSet) -> Result<Self, CoreError> {
        let idx = self.elements.indices_of(subset)?;
        Ok(Self {
            elements: subset.clone(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

impl PairRelation for Partition {
    fn elements(&self) -> &ElementSet {
        &self.elements
    }

    #[inline]
    fn holds(&self, i: usize, j: usize) -> bool {
        self.prefers(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_within_class() {
        let p = Partition::new(ElementSet::range(3), vec![0, 1, 1]).unwrap();
        assert!(p.prefers(0, 1));
        assert!(!p.prefers(1, 2) && !p.prefers(2, 1));
        assert_eq!(p.mixed_pairs(), 2);
    }

    #[test]
    fn all_equal_labels_are_legal() {
        let p = Partition::new(ElementSet::range(3), vec![1, 1, 1]).unwrap();
        assert_eq!(p.mixed_pairs(), 0);
        assert!((0..3).all(|i| (0..3).all(|j| !p.prefers(i, j))));
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(Partition::new(ElementSet::range(2), vec![0, 2]).is_err());
        assert!(Partition::new(ElementSet::range(2), vec![0]).is_err());
    }
}
