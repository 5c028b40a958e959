//! Sparse feature vectors and feature-name interning.

use std::collections::{BTreeMap, HashMap};

/// Bidirectional map between feature name strings and dense ids.
/// Ids are allocated sequentially in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct FeatureInterner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl FeatureInterner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `name`, allocating a fresh one on first sight.
    pub fn intern(&mut self, name: &str) -> u32 {
        debug_assert!(!name.is_empty());
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_owned());
        self.ids.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Names in id order.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|s| s.as_str())
    }
}

/// Sparse real vector keyed by interned feature ids. Absent entries are 0.0.
/// Backed by a BTreeMap so iteration (and thus float accumulation) order is
/// deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<u32, f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: u32) -> f64 {
        self.entries.get(&id).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, id: u32, value: f64) {
        if value == 0.0 {
            self.entries.remove(&id);
        } else {
            self.entries.insert(id, value);
        }
    }

    pub fn add(&mut self, id: u32, delta: f64) {
        let v = self.entries.entry(id).or_insert(0.0);
        *v += delta;
    }

    pub fn scale(&mut self, c: f64) {
        for v in self.entries.values_mut() {
            *v *= c;
        }
    }

    /// Adds `c * other` into `self`.
    pub fn add_scaled(&mut self, other: &SparseVector, c: f64) {
        for (&id, &v) in &other.entries {
            self.add(id, c * v);
        }
    }

    /// Exact sparse inner product; iterates the smaller operand.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .map(|(id, v)| v * large.get(*id))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&id, &v)| (id, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(u32, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (u32, f64)>>(iter: I) -> Self {
        let mut v = SparseVector::new();
        for (id, x) in iter {
            v.add(id, x);
        }
        v
    }
}

/// Sparse vector keyed by feature *names* rather than ids.
///
/// Scoring paths accumulate in lexicographic name order, which makes the
/// floating-point result independent of how ids happen to be allocated in a
/// given process (required for save/load determinism).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NamedVector {
    entries: BTreeMap<String, f64>,
}

impl NamedVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, delta: f64) {
        let v = self.entries.entry(name.into()).or_insert(0.0);
        *v += delta;
    }

    pub fn get(&self, name: &str) -> f64 {
        self.entries.get(name).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(n, &v)| (n.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Squared L2 norm of the difference `self - other`.
    pub fn diff_norm_sq(&self, other: &NamedVector) -> f64 {
        let mut sum = 0.0;
        for (n, v) in self.iter() {
            let d = v - other.get(n);
            sum += d * d;
        }
        for (n, v) in other.iter() {
            if self.entries.get(n).is_none() {
                sum += v * v;
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn intern_is_deterministic() {
        let mut it = FeatureInterner::new();
        let a = it.intern("tok[0]=a");
        let b = it.intern("tok[0]=a");
        assert_eq!(a, b);
    }

    #[test]
    fn intern_distinct_names_get_distinct_ids() {
        let mut it = FeatureInterner::new();
        assert_ne!(it.intern("A"), it.intern("B"));
    }

    #[test]
    fn intern_allocates_sequentially() {
        let mut it = FeatureInterner::new();
        for i in 0..1000 {
            let id = it.intern(&format!("f{i}"));
            assert_eq!(id, i as u32);
        }
        assert_eq!(it.len(), 1000);
    }

    #[test]
    fn intern_round_trips_names() {
        let mut it = FeatureInterner::new();
        for name in ["x", "y=1", "prev1=B"] {
            let id = it.intern(name);
            assert_eq!(it.name(id), name);
        }
    }

    #[test]
    fn dot_of_empty_is_zero() {
        let empty = SparseVector::new();
        let v: SparseVector = [(1, 2.0), (3, -1.0)].into_iter().collect();
        assert_eq!(empty.dot(&v), 0.0);
        assert_eq!(v.dot(&empty), 0.0);
    }

    #[test]
    fn dot_single_overlap() {
        let a: SparseVector = [(1, 2.0), (3, -1.0)].into_iter().collect();
        let b: SparseVector = [(3, 4.0)].into_iter().collect();
        assert_eq!(a.dot(&b), -4.0);
        assert_eq!(b.dot(&a), -4.0);
    }

    #[test]
    fn dot_self_product() {
        let v: SparseVector = [(0, 3.0), (5, 4.0)].into_iter().collect();
        assert_eq!(v.dot(&v), 25.0);
    }

    fn sparse_strategy() -> impl Strategy<Value = SparseVector> {
        proptest::collection::btree_map(0u32..32, -4.0f64..4.0, 0..12)
            .prop_map(|m| m.into_iter().collect())
    }

    proptest! {
        #[test]
        fn dot_is_bilinear(a in sparse_strategy(), b in sparse_strategy(), c in sparse_strategy()) {
            let mut ab = a.clone();
            ab.add_scaled(&b, 1.0);
            let lhs = ab.dot(&c);
            let rhs = a.dot(&c) + b.dot(&c);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn dot_is_commutative(a in sparse_strategy(), b in sparse_strategy()) {
            prop_assert_eq!(a.dot(&b), b.dot(&a));
        }
    }
}
