//! Globally adaptive Gauss–Legendre quadrature.
//!
//! Each segment is integrated twice, once with the base rule on the whole
//! segment and once on its two halves; the difference is the error estimate.
//! The segment with the largest estimated error is bisected until the total
//! error estimate meets the tolerance. Semi-infinite pieces are mapped onto
//! `(0, 1)` with `x = a + t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 12;

/// An integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, abs_error: 0.0 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-10,
            rel: 1e-12,
            max_segments: 20_000,
        }
    }
}

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(legendre_rule::<ORDER>)
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
fn legendre_rule<const N: usize>() -> ([f64; N], [f64; N]) {
    let n = N;
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `[a, inf)` from `t in [0, 1)`
    Upper(f64),
    /// `(-inf, b]` from `t in [0, 1)`
    Lower(f64),
}

impl Map {
    #[inline]
    fn apply<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        match *self {
            Map::Identity => f(t),
            Map::Upper(a) => {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            }
            Map::Lower(b) => {
                let s = 1.0 - t;
                f(b - t / s) / (s * s)
            }
        }
    }
}

struct Segment {
    map: Map,
    lo: f64,
    hi: f64,
    /// rule applied to the two halves
    fine: f64,
    left: f64,
    right: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gauss<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64) -> f64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * map.apply(f, mid + half * x);
    }
    acc * half
}

fn segment<F: Fn(f64) -> f64>(f: &F, map: Map, lo: f64, hi: f64, coarse: f64) -> Segment {
    let mid = 0.5 * (lo + hi);
    let left = gauss(f, map, lo, mid);
    let right = gauss(f, map, mid, hi);
    let fine = left + right;
    Segment {
        map,
        lo,
        hi,
        fine,
        left,
        right,
        err: (fine - coarse).abs(),
    }
}

/// Integrates `f` over `[a, b]` (either end may be infinite), splitting
/// first at the interior `breaks` so that kinks and integrable endpoint
/// singularities sit on segment boundaries.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidArgument("NaN integration bound".into()));
    }
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    if a > b {
        let e = integrate(f, b, a, breaks, tol)?;
        return Ok(Estimate { value: -e.value, ..e });
    }
    let mut points: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    if a.is_infinite() && b.is_infinite() && points.is_empty() {
        points.push(0.0);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut ends = Vec::with_capacity(points.len() + 2);
    ends.push(a);
    ends.extend(points);
    ends.push(b);

    let mut heap = BinaryHeap::new();
    for w in ends.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let map = match (lo.is_infinite(), hi.is_infinite()) {
            (false, false) => Map::Identity,
            (false, true) => Map::Upper(lo),
            (true, false) => Map::Lower(hi),
            (true, true) => unreachable!("infinite pieces are split at a finite point"),
        };
        let (tlo, thi) = match map {
            Map::Identity => (lo, hi),
            _ => (0.0, 1.0),
        };
        let coarse = gauss(&f, map, tlo, thi);
        heap.push(segment(&f, map, tlo, thi, coarse));
    }

    let (mut total, mut err) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s: &Segment| (v + s.fine, e + s.err));
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NonIntegrable(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= tol.abs.max(tol.rel * total.abs()) {
            // resum to shed drift from the running totals
            let (value, abs_error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.fine, e + s.err));
            if abs_error <= tol.abs.max(tol.rel * value.abs()) {
                return Ok(Estimate { value, abs_error });
            }
            total = value;
            err = abs_error;
        }
        if heap.len() >= tol.max_segments {
            return Err(Error::NonIntegrable(format!(
                "error estimate {err:e} after {} segments on [{a}, {b}]",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::NonIntegrable(format!(
                "segment collapsed near {mid} with error {:e}",
                worst.err
            )));
        }
        let l = segment(&f, worst.map, worst.lo, mid, worst.left);
        let r = segment(&f, worst.map, mid, worst.hi, worst.right);
        total += l.fine + r.fine - worst.fine;
        err = (err + l.err + r.err - worst.err).max(0.0);
        heap.push(l);
        heap.push(r);
    }
}
