//! Upper order statistics of each coordinate, collected in one pass.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write;

use serde::Serialize;

use crate::engine::Sink;
use crate::error::{Error, Result};
use crate::vsrv::tail_count;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    value: f64,
    time: u64,
}

impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    /// Greater means ranked higher: larger value, then earlier time.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value.total_cmp(&other.value).then(other.time.cmp(&self.time))
    }
}

/// Keeps the `capacity` largest values of every coordinate with their times.
#[derive(Debug, Clone)]
pub struct MarginalTailSink {
    capacity: usize,
    count: u64,
    heaps: Vec<BinaryHeap<Reverse<Entry>>>,
}

impl MarginalTailSink {
    pub fn new(d: usize, capacity: usize) -> Self {
        MarginalTailSink {
            capacity: capacity.max(1),
            count: 0,
            heaps: vec![BinaryHeap::new(); d],
        }
    }

    /// Capacity large enough for every tail probability in `tails` and for
    /// `extra` order statistics, on a trajectory of `n` observations.
    pub fn for_quantiles(d: usize, n: u64, quantiles: &[f64], extra: usize) -> Self {
        let k = quantiles.iter().map(|&q| tail_count(n, q) + 1).max().unwrap_or(0);
        Self::new(d, k.max(extra + 1))
    }

    pub fn finish(self) -> MarginalTails {
        let top = self
            .heaps
            .into_iter()
            .map(|h| {
                let mut v: Vec<Entry> = h.into_iter().map(|r| r.0).collect();
                v.sort_by(|a, b| b.cmp(a));
                v.into_iter().map(|e| (e.value, e.time)).collect()
            })
            .collect();
        MarginalTails { n: self.count, top }
    }
}

impl Sink for MarginalTailSink {
    #[inline]
    fn observe(&mut self, t: u64, x: &[f64]) {
        self.count += 1;
        for (h, &v) in self.heaps.iter_mut().zip(x) {
            if h.len() < self.capacity {
                h.push(Reverse(Entry { value: v, time: t }));
            } else if h.peek().is_some_and(|w| v > w.0.value) {
                h.pop();
                h.push(Reverse(Entry { value: v, time: t }));
            }
        }
    }

    fn fresh(&self) -> Self {
        MarginalTailSink::new(self.heaps.len(), self.capacity)
    }

    fn merge(&mut self, later: Self) {
        self.count += later.count;
        for (h, other) in self.heaps.iter_mut().zip(later.heaps) {
            for e in other {
                h.push(e);
                if h.len() > self.capacity {
                    h.pop();
                }
            }
        }
    }
}

/// Descending upper order statistics `(value, time)` per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalTails {
    pub n: u64,
    pub top: Vec<Vec<(f64, u64)>>,
}

impl MarginalTails {
    pub fn from_samples(columns: &[Vec<f64>]) -> Self {
        let mut sink = MarginalTailSink::new(columns.len(), columns.first().map_or(1, |c| c.len()));
        let n = columns.first().map_or(0, |c| c.len());
        let mut x = vec![0.0; columns.len()];
        for t in 0..n {
            for (xi, c) in x.iter_mut().zip(columns) {
                *xi = c[t];
            }
            sink.observe(t as u64, &x);
        }
        sink.finish()
    }

    pub fn values(&self, i: usize) -> Vec<f64> {
        self.top[i].iter().map(|e| e.0).collect()
    }

    /// Empirical `q`-quantile: the `(K+1)`-th largest value with
    /// `K = ceil(n (1-q))`, and `K`.
    pub fn quantile(&self, i: usize, q: f64) -> Result<(f64, usize)> {
        let k = tail_count(self.n, q);
        match self.top[i].get(k) {
            Some(e) => Ok((e.0, k)),
            None => Err(Error::InsufficientExceedances {
                found: self.top[i].len(),
                required: k + 1,
            }),
        }
    }

    /// Hill estimate of coordinate `i` from its `k` largest values.
    pub fn hill(&self, i: usize, k: usize) -> Result<f64> {
        hill_estimator(&self.values(i), k)
    }

    /// `u^{alpha_i} P(X_i > u)` at the empirical `q`-quantile `u` of each coordinate.
    pub fn kesten_constants(&self, alpha: &[f64], q: f64) -> Result<Vec<f64>> {
        (0..self.top.len())
            .map(|i| {
                let (u, k) = self.quantile(i, q)?;
                if !(u > 0.0) {
                    return Err(Error::NonPositiveConstant { index: i, value: u });
                }
                Ok(u.powf(alpha[i]) * k as f64 / self.n as f64)
            })
            .collect()
    }

    /// Joint and conditional exceedance of coordinates `i` and `j` above their
    /// own empirical quantiles, for each quantile of the grid.
    pub fn joint_exceedance_curve(&self, i: usize, j: usize, grid: &[f64]) -> Result<Vec<JointExceedance>> {
        grid.iter()
            .map(|&q| {
                let k = tail_count(self.n, q);
                let (ti, ki) = (self.top[i].get(k), k);
                let (tj, kj) = (self.top[j].get(k), k);
                if ti.is_none() || tj.is_none() {
                    return Err(Error::InsufficientExceedances {
                        found: self.top[i].len(),
                        required: k + 1,
                    });
                }
                let above = |col: &[(f64, u64)], thr: f64| -> Vec<u64> {
                    let mut t: Vec<u64> = col.iter().take_while(|e| e.0 > thr).map(|e| e.1).collect();
                    t.sort_unstable();
                    t
                };
                let si = above(&self.top[i][..ki], ti.unwrap().0);
                let sj = above(&self.top[j][..kj], tj.unwrap().0);
                let joint = intersection_size(&si, &sj);
                let u = 1.0 / (1.0 - q);
                let n = self.n as f64;
                Ok(JointExceedance {
                    quantile: q,
                    u,
                    count_i: si.len(),
                    count_j: sj.len(),
                    count_joint: joint,
                    joint_scaled: u * joint as f64 / n,
                    conditional: if si.is_empty() {
                        0.0
                    } else {
                        joint as f64 / si.len() as f64
                    },
                    empty: si.is_empty() || sj.is_empty(),
                })
            })
            .collect()
    }
}

fn intersection_size(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// One point of the joint exceedance curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointExceedance {
    pub quantile: f64,
    /// `1 / (1 - quantile)`.
    pub u: f64,
    pub count_i: usize,
    pub count_j: usize,
    pub count_joint: usize,
    /// `u P(X_i > t_i, X_j > t_j)`.
    pub joint_scaled: f64,
    /// `P(X_j > t_j | X_i > t_i)`.
    pub conditional: f64,
    /// No exceedance of one of the thresholds.
    pub empty: bool,
}

pub fn joint_curve_csv(curve: &[JointExceedance]) -> String {
    let mut out = String::from("quantile,u,joint_scaled,conditional,count_i,count_j,count_joint\n");
    for p in curve {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.quantile, p.u, p.joint_scaled, p.conditional, p.count_i, p.count_j, p.count_joint
        );
    }
    out
}

/// `k / sum_{j<=k} log(x_(j) / x_(k+1))` for descending `top`.
pub fn hill_estimator(top: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k >= top.len() {
        return Err(Error::InvalidArgument(format!(
            "Hill needs 0 < k < {}, got {k}",
            top.len()
        )));
    }
    let base = top[k];
    if !(base > 0.0) {
        return Err(Error::InvalidArgument("Hill needs positive order statistics".into()));
    }
    let lb = base.ln();
    let s: f64 = top[..k].iter().map(|x| x.ln() - lb).sum();
    if !(s > 0.0) {
        return Err(Error::DegenerateSample);
    }
    Ok(k as f64 / s)
}

/// `floor(2 sqrt(n))`, capped at 5000.
pub fn default_hill_k(n: u64) -> usize {
    ((2.0 * (n as f64).sqrt()).floor() as usize).min(5000)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hill_on_pareto() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut xs: Vec<f64> = (0..100_000).map(|_| (1.0 - rng.random::<f64>()).powf(-0.5)).collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        let a = hill_estimator(&xs, 1000).unwrap();
        assert!((a - 2.0).abs() < 0.2, "{a}");
    }

    #[test]
    fn hill_degenerate_and_scale_invariant() {
        assert!(matches!(hill_estimator(&[3.0; 10], 5), Err(Error::DegenerateSample)));
        let xs = [9.0, 7.5, 4.0, 2.0, 1.5, 1.0];
        let ys: Vec<f64> = xs.iter().map(|x| x * 13.7).collect();
        let (a, b) = (hill_estimator(&xs, 4).unwrap(), hill_estimator(&ys, 4).unwrap());
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn comonotone_pair_is_fully_dependent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<f64> = (0..100_000).map(|_| 1.0 / (1.0 - rng.random::<f64>())).collect();
        let tails = MarginalTails::from_samples(&[x.clone(), x]);
        for p in tails.joint_exceedance_curve(0, 1, &[0.99, 0.999]).unwrap() {
            assert_eq!(p.conditional, 1.0);
        }
    }

    #[test]
    fn sink_merge_matches_samples() {
        let x: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        let all = MarginalTails::from_samples(&[x.clone(), y.clone()]);
        let mut a = MarginalTailSink::new(2, 500);
        let mut b = a.fresh();
        for t in 0..500 {
            let s = if t < 200 { &mut a } else { &mut b };
            s.observe(t as u64, &[x[t], y[t]]);
        }
        a.merge(b);
        assert_eq!(a.finish(), all);
    }

    #[test]
    fn default_k_policy() {
        assert_eq!(default_hill_k(10_000), 200);
        assert_eq!(default_hill_k(100_000_000), 5000);
    }
}
