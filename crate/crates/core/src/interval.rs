//! Sorted, disjoint sets of half-open time intervals.

use alloc::vec::Vec;

use crate::time::Time;

/// Union of `[start, end)` spans, kept sorted and non-touching.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntervalSet {
    spans: Vec<(Time, Time)>,
}

impl IntervalSet {
    pub fn new() -> Self {
        IntervalSet { spans: Vec::new() }
    }

    /// Normalizes arbitrary spans: empty ones are dropped, overlapping or
    /// touching ones are merged.
    pub fn from_spans<I>(spans: I) -> Self
    where
        I: IntoIterator<Item = (Time, Time)>,
    {
        let mut raw: Vec<(Time, Time)> = spans.into_iter().filter(|(s, e)| s < e).collect();
        raw.sort();
        let mut merged: Vec<(Time, Time)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match merged.last_mut() {
                Some(last) if s <= last.1 => {
                    if e > last.1 {
                        last.1 = e;
                    }
                }
                _ => merged.push((s, e)),
            }
        }
        IntervalSet { spans: merged }
    }

    pub fn spans(&self) -> &[(Time, Time)] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn total_length(&self) -> Time {
        self.spans.iter().map(|&(s, e)| e - s).sum()
    }

    pub fn contains(&self, t: Time) -> bool {
        let idx = self.spans.partition_point(|&(s, _)| s <= t);
        idx > 0 && t < self.spans[idx - 1].1
    }

    /// Restriction to `[lo, hi)`.
    pub fn clip(&self, lo: Time, hi: Time) -> IntervalSet {
        let spans = self
            .spans
            .iter()
            .filter_map(|&(s, e)| {
                let s = s.max(lo);
                let e = e.min(hi);
                (s < e).then_some((s, e))
            })
            .collect();
        IntervalSet { spans }
    }

    /// Total length of `self ∩ other`, by a merge sweep over both lists.
    pub fn intersection_length(&self, other: &IntervalSet) -> Time {
        let mut total = Time::ZERO;
        self.sweep(other, |s, e| total += e - s);
        total
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut spans = Vec::new();
        self.sweep(other, |s, e| spans.push((s, e)));
        IntervalSet { spans }
    }

    fn sweep<F: FnMut(Time, Time)>(&self, other: &IntervalSet, mut emit: F) {
        let (a, b) = (&self.spans, &other.spans);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let s = a[i].0.max(b[j].0);
            let e = a[i].1.min(b[j].1);
            if s < e {
                emit(s, e);
            }
            if a[i].1 <= b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
    }
}
