//! Incremental refits for a stream of observations from one arm.
//!
//! Each tracker retains every observation and returns the same value as
//! [`fit`](super::fit) on the samples seen so far.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use super::{quantile_rank, LossFamily, LossSpec, RankSums, SampleSet};

#[derive(Debug, Clone, Default)]
pub struct RunningMean {
    sum: f64,
    count: u64,
}

impl RunningMean {
    pub fn push(&mut self, y: f64) {
        self.sum += y;
        self.count += 1;
    }

    pub fn estimate(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Rank {
    /// Midpoint of the central pair for even counts.
    Median,
    /// Lower `⌈qn⌉`-th order statistic.
    Lower(f64),
}

/// Two-heap order statistic: `lower` holds the smallest `m(n)` values, so the
/// answer sits on top of `lower` (and, for an even-count median, on top of
/// `upper`). O(log n) insertion, O(1) lookup.
#[derive(Debug, Clone)]
pub struct RunningOrderStat {
    rank: Rank,
    lower: BinaryHeap<OrderedFloat<f64>>,
    upper: BinaryHeap<Reverse<OrderedFloat<f64>>>,
}

impl RunningOrderStat {
    pub fn median() -> Self {
        Self::with_rank(Rank::Median)
    }

    pub fn quantile(level: f64) -> Self {
        Self::with_rank(Rank::Lower(level))
    }

    fn with_rank(rank: Rank) -> Self {
        RunningOrderStat {
            rank,
            lower: BinaryHeap::new(),
            upper: BinaryHeap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.lower.len() + self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lower_size(&self, n: usize) -> usize {
        match self.rank {
            Rank::Median => n.div_ceil(2),
            Rank::Lower(level) => quantile_rank(level, n),
        }
    }

    pub fn push(&mut self, y: f64) {
        assert!(!y.is_nan(), "NaN observation");
        let y = OrderedFloat(y);
        match self.lower.peek() {
            Some(&top) if y <= top => self.lower.push(y),
            _ => self.upper.push(Reverse(y)),
        }
        let target = self.lower_size(self.len());
        while self.lower.len() > target {
            let v = self.lower.pop().unwrap();
            self.upper.push(Reverse(v));
        }
        while self.lower.len() < target {
            let Reverse(v) = self.upper.pop().unwrap();
            self.lower.push(v);
        }
    }

    pub fn estimate(&self) -> Option<f64> {
        let low = self.lower.peek()?.0;
        Some(match self.rank {
            Rank::Median if self.len().is_multiple_of(2) => 0.5 * (low + self.upper.peek().unwrap().0 .0),
            _ => low,
        })
    }

    pub fn values(&self) -> SampleSet {
        self.lower
            .iter()
            .map(|v| v.0)
            .chain(self.upper.iter().map(|v| v.0 .0))
            .collect()
    }
}

/// Huber refit on the full retained sample, warm-started at the previous estimate.
#[derive(Debug, Clone)]
pub struct RunningHuber {
    threshold: f64,
    samples: RankSums,
    current: Option<f64>,
}

impl RunningHuber {
    pub fn new(threshold: f64) -> Self {
        RunningHuber {
            threshold,
            samples: RankSums::new(),
            current: None,
        }
    }

    pub fn push(&mut self, y: f64) {
        self.samples.insert(y);
        self.current = self.samples.huber_fit(self.threshold, self.current.unwrap_or(y));
    }

    pub fn estimate(&self) -> Option<f64> {
        self.current
    }

    pub fn values(&self) -> SampleSet {
        SampleSet::from_values(self.samples.to_sorted_vec())
    }
}

/// Online counterpart of [`fit`](super::fit) for any loss family.
#[derive(Debug, Clone)]
pub enum OnlineEstimator {
    Mean(RunningMean, Vec<f64>),
    OrderStat(RunningOrderStat),
    Huber(RunningHuber),
}

impl OnlineEstimator {
    pub fn for_loss(loss: &LossSpec) -> Self {
        match loss.family {
            LossFamily::Square => OnlineEstimator::Mean(RunningMean::default(), Vec::new()),
            LossFamily::Absolute => OnlineEstimator::OrderStat(RunningOrderStat::median()),
            LossFamily::Quantile { level } => OnlineEstimator::OrderStat(RunningOrderStat::quantile(level)),
            LossFamily::Huber { threshold } => OnlineEstimator::Huber(RunningHuber::new(threshold)),
        }
    }

    pub fn mean() -> Self {
        OnlineEstimator::Mean(RunningMean::default(), Vec::new())
    }

    pub fn push(&mut self, y: f64) {
        match self {
            OnlineEstimator::Mean(m, kept) => {
                m.push(y);
                kept.push(y);
            }
            OnlineEstimator::OrderStat(o) => o.push(y),
            OnlineEstimator::Huber(h) => h.push(y),
        }
    }

    pub fn estimate(&self) -> Option<f64> {
        match self {
            OnlineEstimator::Mean(m, _) => m.estimate(),
            OnlineEstimator::OrderStat(o) => o.estimate(),
            OnlineEstimator::Huber(h) => h.estimate(),
        }
    }

    /// Every observation pushed so far.
    pub fn samples(&self) -> SampleSet {
        match self {
            OnlineEstimator::Mean(_, kept) => kept.iter().copied().collect(),
            OnlineEstimator::OrderStat(o) => o.values(),
            OnlineEstimator::Huber(h) => h.values(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::fit;
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn online_matches_batch(values in prop::collection::vec(-20.0f64..20.0, 1..60), level in 0.05f64..0.95) {
            let losses = [
                LossSpec::square(1.0),
                LossSpec::absolute(1.0, 1.0),
                LossSpec::quantile(level, 1.0, 1.0),
                LossSpec::huber(0.8, 0.1),
            ];
            for loss in losses {
                let mut online = OnlineEstimator::for_loss(&loss);
                let mut batch = SampleSet::new();
                for &y in &values {
                    online.push(y);
                    batch.insert(y);
                    let want = fit(&loss, &batch).unwrap();
                    let got = online.estimate().unwrap();
                    prop_assert!((want - got).abs() <= 1e-8 * (1.0 + want.abs()), "{:?}: {} vs {}", loss.family, got, want);
                }
                prop_assert_eq!(online.samples(), batch.clone());
            }
        }
    }

    #[test]
    fn empty_trackers() {
        assert_eq!(RunningOrderStat::median().estimate(), None);
        assert_eq!(RunningMean::default().estimate(), None);
        assert_eq!(RunningHuber::new(1.0).estimate(), None);
    }
}
