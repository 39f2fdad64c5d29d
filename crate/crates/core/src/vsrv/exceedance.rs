//! Single-pass collection of the largest radii of a trajectory.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write;

use super::norm::{log_vs_norm, scale_by_radius, spectral_exact, vs_norm};
use crate::engine::Sink;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_RECORDS: usize = 50;
const SLACK: f64 = 0.25;

/// Number of observations above the empirical `q`-quantile of `n` values,
/// `ceil(n (1 - q))` with rounding noise in `1 - q` ignored.
pub fn tail_count(n: u64, q: f64) -> usize {
    let t = n as f64 * (1.0 - q);
    let r = t.round();
    if (t - r).abs() <= 1e-6 * t.max(1.0) {
        r as usize
    } else {
        t.ceil() as usize
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    log_radius: f64,
    time: u64,
    x: Vec<f64>,
    /// Raw forward states `X_{t+1}, ..., X_{t+h}`, flattened.
    ahead: Vec<f64>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    /// Greater means ranked lower: smaller radius, then later time.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .log_radius
            .total_cmp(&self.log_radius)
            .then(self.time.cmp(&other.time))
    }
}

/// Keeps the top records by `||X_t||_alpha` together with `h` forward states.
///
/// Ties in radius rank earlier time indices first.
#[derive(Debug, Clone)]
pub struct ExceedanceSink {
    alpha: Vec<f64>,
    quantile: f64,
    horizon: usize,
    capacity: usize,
    min_records: usize,
    count: u64,
    heap: BinaryHeap<Candidate>,
    pending: VecDeque<Candidate>,
}

impl ExceedanceSink {
    /// Sized for a trajectory of `expected_len` observations.
    pub fn new(alpha: Vec<f64>, quantile: f64, horizon: usize, expected_len: u64) -> Result<Self> {
        if !(quantile > 0.0 && quantile < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile {quantile} outside (0, 1)")));
        }
        if alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidArgument("tail indices must be positive".into()));
        }
        let k = tail_count(expected_len, quantile);
        let capacity = (k + 1).max((k as f64 * (1.0 + SLACK)).ceil() as usize);
        Ok(ExceedanceSink {
            alpha,
            quantile,
            horizon,
            capacity,
            min_records: DEFAULT_MIN_RECORDS,
            count: 0,
            heap: BinaryHeap::with_capacity(capacity + 1),
            pending: VecDeque::new(),
        })
    }

    pub fn min_records(mut self, n: usize) -> Self {
        self.min_records = n;
        self
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn accepts(&self, lr: f64) -> bool {
        if self.heap.len() < self.capacity {
            return true;
        }
        // a later record only beats the worst kept one with a strictly larger radius
        self.heap.peek().is_some_and(|w| lr > w.log_radius)
    }

    fn admit(&mut self, c: Candidate) {
        self.heap.push(c);
        if self.heap.len() > self.capacity {
            self.heap.pop();
        }
    }

    fn feed_pending(&mut self, x: &[f64]) {
        let full = self.horizon * x.len();
        for c in self.pending.iter_mut() {
            c.ahead.extend_from_slice(x);
        }
        while self.pending.front().is_some_and(|c| c.ahead.len() >= full) {
            let c = self.pending.pop_front().expect("front exists");
            self.admit(c);
        }
    }

    fn flush(&mut self) {
        while let Some(c) = self.pending.pop_front() {
            self.admit(c);
        }
    }

    /// Fixes the threshold at the empirical quantile of all observed radii and
    /// keeps the records above it, in time order.
    pub fn finish(mut self) -> Result<ExceedanceSet> {
        self.flush();
        let k = tail_count(self.count, self.quantile);
        if k + 1 > self.capacity && (k as u64) < self.count {
            return Err(Error::InvalidArgument(format!(
                "sink sized for {} records but {} observations need {}",
                self.capacity,
                self.count,
                k + 1
            )));
        }
        let mut ranked = self.heap.into_sorted_vec();
        let threshold = ranked.get(k).map_or(0.0, |c| vs_norm(&c.x, &self.alpha));
        ranked.truncate(k);
        if ranked.len() < self.min_records {
            return Err(Error::InsufficientExceedances {
                found: ranked.len(),
                required: self.min_records,
            });
        }
        ranked.sort_by_key(|c| c.time);
        let d = self.alpha.len();
        let records = ranked
            .into_iter()
            .map(|c| {
                let radius = vs_norm(&c.x, &self.alpha);
                let spectral = spectral_exact(&c.x, &self.alpha, c.log_radius);
                let mut window = vec![spectral.clone()];
                for y in c.ahead.chunks_exact(d) {
                    window.push(scale_by_radius(y, &self.alpha, radius, c.log_radius));
                }
                ExceedanceRecord {
                    time_index: c.time,
                    radius,
                    log_radius: c.log_radius,
                    spectral,
                    window,
                }
            })
            .collect();
        Ok(ExceedanceSet {
            alpha: self.alpha,
            quantile: self.quantile,
            threshold,
            n_observed: self.count,
            horizon: self.horizon,
            records,
        })
    }
}

impl Sink for ExceedanceSink {
    fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    fn observe(&mut self, t: u64, x: &[f64]) {
        self.count += 1;
        if self.horizon > 0 && !self.pending.is_empty() {
            self.feed_pending(x);
        }
        let lr = log_vs_norm(x, &self.alpha);
        if lr == f64::NEG_INFINITY || !self.accepts(lr) {
            return;
        }
        let c = Candidate {
            log_radius: lr,
            time: t,
            x: x.to_vec(),
            ahead: Vec::new(),
        };
        if self.horizon == 0 {
            self.admit(c);
        } else {
            self.pending.push_back(c);
        }
    }

    fn observe_tail(&mut self, x: &[f64]) {
        if !self.pending.is_empty() {
            self.feed_pending(x);
        }
    }

    fn fresh(&self) -> Self {
        ExceedanceSink {
            count: 0,
            heap: BinaryHeap::with_capacity(self.capacity + 1),
            pending: VecDeque::new(),
            alpha: self.alpha.clone(),
            ..*self
        }
    }

    fn merge(&mut self, mut later: Self) {
        self.flush();
        later.flush();
        self.count += later.count;
        for c in later.heap.into_vec() {
            self.admit(c);
        }
    }
}

/// One observation above the radius threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceRecord {
    pub time_index: u64,
    pub radius: f64,
    pub log_radius: f64,
    /// `||X_t||^{-1/alpha} X_t`.
    pub spectral: Vec<f64>,
    /// `||X_t||^{-1/alpha} X_{t+s}` for `s = 0..=h`.
    pub window: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceSet {
    pub alpha: Vec<f64>,
    pub quantile: f64,
    pub threshold: f64,
    pub n_observed: u64,
    pub horizon: usize,
    pub records: Vec<ExceedanceRecord>,
}

impl ExceedanceSet {
    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn spectral(&self) -> impl Iterator<Item = &[f64]> {
        self.records.iter().map(|r| r.spectral.as_slice())
    }

    /// Columns `time_index, radius, spectral_1..d`, then `window_{s}_{i}`
    /// for every forward step `s >= 1`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("time_index,radius");
        for i in 1..=d {
            let _ = write!(out, ",spectral_{i}");
        }
        for s in 1..=self.horizon {
            for i in 1..=d {
                let _ = write!(out, ",window_{s}_{i}");
            }
        }
        out.push('\n');
        for r in &self.records {
            let _ = write!(out, "{},{}", r.time_index, r.radius);
            for v in r.window.iter().flatten() {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
