use serde::{Deserialize, Serialize};

/// Retained observations, kept sorted ascending.
///
/// NaNs are rejected at insertion so ordering is total.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SampleSet {
    sorted: Vec<f64>,
    sum: f64,
}

/// Equal when the sorted values are equal; the cached sum may differ in
/// rounding with insertion order.
impl PartialEq for SampleSet {
    fn eq(&self, other: &Self) -> bool {
        self.sorted == other.sorted
    }
}

impl SampleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(capacity: usize) -> Self {
        SampleSet {
            sorted: Vec::with_capacity(capacity),
            sum: 0.0,
        }
    }

    /// Builds a set from unsorted values. Panics on NaN.
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut sorted: Vec<f64> = values.into_iter().collect();
        assert!(sorted.iter().all(|v| !v.is_nan()), "NaN observation");
        sorted.sort_by(f64::total_cmp);
        let sum = sorted.iter().sum();
        SampleSet { sorted, sum }
    }

    /// Binary-search insertion.
    pub fn insert(&mut self, value: f64) {
        assert!(!value.is_nan(), "NaN observation");
        let at = self.sorted.partition_point(|&v| v <= value);
        self.sorted.insert(at, value);
        self.sum += value;
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `k`-th smallest value, 1-based.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.sorted[k - 1]
    }

    pub fn min(&self) -> Option<f64> {
        self.sorted.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.sum / self.len() as f64)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.sorted
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.sorted.iter().copied()
    }

    /// Returns a copy with every value shifted by `s`.
    pub fn shifted(&self, s: f64) -> SampleSet {
        SampleSet::from_values(self.iter().map(|v| v + s))
    }
}

impl FromIterator<f64> for SampleSet {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        SampleSet::from_values(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_keeps_order() {
        let mut s = SampleSet::new();
        for v in [3.0, -1.0, 2.0, 2.0, 10.0, -5.0] {
            s.insert(v);
        }
        assert_eq!(s.as_slice(), &[-5.0, -1.0, 2.0, 2.0, 3.0, 10.0]);
        assert_eq!(s.order_stat(1), -5.0);
        assert_eq!(s.order_stat(6), 10.0);
        assert_eq!(s.mean(), Some(11.0 / 6.0));
    }

    #[test]
    fn empty_has_no_stats() {
        let s = SampleSet::new();
        assert!(s.is_empty());
        assert_eq!(s.mean(), None);
        assert_eq!(s.min(), None);
    }

    #[test]
    #[should_panic(expected = "NaN")]
    fn nan_rejected() {
        SampleSet::new().insert(f64::NAN);
    }
}
