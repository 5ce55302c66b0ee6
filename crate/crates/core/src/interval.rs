//! Half-open nanosecond intervals and their intersection.

use serde::{Deserialize, Serialize};

pub const NS_PER_SEC: f64 = 1e9;

pub fn ns_to_secs(ns: u64) -> f64 {
    ns as f64 / NS_PER_SEC
}

pub fn secs_to_ns(secs: f64) -> u64 {
    (secs * NS_PER_SEC).round() as u64
}

/// `[start, end)` in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
}

impl Interval {
    pub fn new(start: u64, end: u64) -> Self {
        debug_assert!(start <= end);
        Interval { start, end }
    }

    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn len_secs(&self) -> f64 {
        ns_to_secs(self.len())
    }
}

/// Intersection of two sorted, disjoint interval lists. Touching results
/// are merged so the output is maximal.
pub fn intersect(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let start = a[i].start.max(b[j].start);
        let end = a[i].end.min(b[j].end);
        if start < end {
            push_merged(&mut out, Interval::new(start, end));
        }
        if a[i].end < b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Times covered by every list at once.
pub fn intersect_all<L: AsRef<[Interval]>>(lists: &[L]) -> Vec<Interval> {
    let Some((first, rest)) = lists.split_first() else {
        return Vec::new();
    };
    let mut acc = normalize(first.as_ref().to_vec());
    for list in rest {
        if acc.is_empty() {
            break;
        }
        acc = intersect(&acc, list.as_ref());
    }
    acc
}

/// Sorts, drops empty intervals, and merges overlapping or touching ones.
pub fn normalize(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|iv| !iv.is_empty());
    v.sort_unstable();
    let mut out = Vec::with_capacity(v.len());
    for iv in v {
        push_merged(&mut out, iv);
    }
    out
}

fn push_merged(out: &mut Vec<Interval>, iv: Interval) {
    if let Some(last) = out.last_mut() {
        if iv.start <= last.end {
            last.end = last.end.max(iv.end);
            return;
        }
    }
    out.push(iv);
}

pub fn total_len(v: &[Interval]) -> u64 {
    v.iter().map(Interval::len).sum()
}
