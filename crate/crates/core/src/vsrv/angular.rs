//! Summaries of the spectral records: angles, block masses, tail process.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use rand::Rng;

use super::exceedance::ExceedanceSet;
use super::norm::max_norm;
use crate::engine::DiagSREModel;
use crate::error::{Error, Result};
use crate::stats::{ks_two_sample, KsResult};

pub const DEFAULT_BINS: usize = 100;

/// `arctan(|t1| / |t2|)` in `[0, pi/2]`, or `arctan(t1 / t2)` in
/// `[-pi/2, pi/2]` when `absolute` is off. `t2 = 0` maps to `±pi/2`.
pub fn angle(t1: f64, t2: f64, absolute: bool) -> f64 {
    if absolute {
        t1.abs().atan2(t2.abs())
    } else if t2 == 0.0 {
        if t1 == 0.0 {
            0.0
        } else {
            FRAC_PI_2.copysign(t1)
        }
    } else {
        (t1 / t2).atan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngularHistogram {
    pub bins: usize,
    pub absolute: bool,
    /// `bins + 1` increasing edges.
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
    pub n_exceedances: usize,
}

impl AngularHistogram {
    /// Equal-width histogram of weighted angles on `[0, pi/2]`
    /// (`[-pi/2, pi/2]` for signed angles).
    pub fn from_weighted(angles: &[(f64, f64)], bins: usize, absolute: bool) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
        }
        let lo = if absolute { 0.0 } else { -FRAC_PI_2 };
        let width = (FRAC_PI_2 - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
        let mut mass = vec![0.0; bins];
        let total: f64 = angles.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::DegenerateSample);
        }
        for &(a, w) in angles {
            let k = (((a - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            mass[k] += w;
        }
        // sum in index order so the result does not depend on record order
        for m in mass.iter_mut() {
            *m /= total;
        }
        Ok(AngularHistogram {
            bins,
            absolute,
            edges,
            mass,
            n_exceedances: angles.len(),
        })
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// Mass of the bins whose centre lies within `radius` of any target.
    pub fn mass_near(&self, targets: &[f64], radius: f64) -> f64 {
        self.centers()
            .zip(&self.mass)
            .filter(|(c, _)| targets.iter().any(|t| (c - t).abs() <= radius))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,mass\n");
        for (w, m) in self.edges.windows(2).zip(&self.mass) {
            let _ = writeln!(out, "{},{},{}", w[0], w[1], m);
        }
        out
    }
}

/// Histogram of the spectral angles of a bivariate exceedance set.
pub fn angular_histogram(set: &ExceedanceSet, bins: usize, absolute: bool) -> Result<AngularHistogram> {
    if set.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: set.dim(),
        });
    }
    let angles: Vec<(f64, f64)> = set.spectral().map(|s| (angle(s[0], s[1], absolute), 1.0)).collect();
    AngularHistogram::from_weighted(&angles, bins, absolute)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockMass {
    /// Fraction of records whose largest coordinate lies in each block.
    pub mass: Vec<f64>,
    /// Mean over records of the largest `|theta_i|` outside the assigned block.
    pub leakage: f64,
}

pub fn block_mass(set: &ExceedanceSet, blocks: &[Vec<usize>]) -> Result<BlockMass> {
    let d = set.dim();
    let mut owner = vec![usize::MAX; d];
    for (l, blk) in blocks.iter().enumerate() {
        for &i in blk {
            if i >= d || owner[i] != usize::MAX {
                return Err(Error::InvalidArgument("blocks must partition the coordinates".into()));
            }
            owner[i] = l;
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(Error::InvalidArgument("blocks must partition the coordinates".into()));
    }
    let mut mass = vec![0.0; blocks.len()];
    let mut leak = 0.0;
    for s in set.spectral() {
        let arg = (0..d).fold(0, |b, i| if s[i].abs() > s[b].abs() { i } else { b });
        let l = owner[arg];
        mass[l] += 1.0;
        leak += (0..d)
            .filter(|&i| owner[i] != l)
            .map(|i| s[i].abs())
            .fold(0.0, f64::max);
    }
    let n = set.len().max(1) as f64;
    for m in mass.iter_mut() {
        *m /= n;
    }
    Ok(BlockMass {
        mass,
        leakage: leak / n,
    })
}

/// Sample of `Theta_t` proxies: the `t`-th scaled forward state of each record.
pub fn empirical_tail_process(set: &ExceedanceSet, lag: usize) -> Result<Vec<Vec<f64>>> {
    if lag > set.horizon {
        return Err(Error::WindowTooShort {
            lag,
            horizon: set.horizon,
        });
    }
    Ok(set.records.iter().map(|r| r.window[lag].clone()).collect())
}

/// Coordinate-wise two-sample KS tests between the empirical `Theta_t` and
/// `Diag(b + c M) Theta_{t-1}` with fresh draws of `M`.
pub fn spectral_recursion_check<R: Rng + ?Sized>(
    set: &ExceedanceSet,
    model: &DiagSREModel,
    lag: usize,
    rng: &mut R,
) -> Result<Vec<KsResult>> {
    if lag == 0 {
        return Err(Error::InvalidArgument("lag must be at least 1".into()));
    }
    let now = empirical_tail_process(set, lag)?;
    let before = empirical_tail_process(set, lag - 1)?;
    let pushed: Vec<Vec<f64>> = before
        .iter()
        .map(|th| {
            let m = model.m_law().sample(rng);
            th.iter()
                .enumerate()
                .map(|(i, v)| (model.b()[i] + model.c()[i] * m) * v)
                .collect()
        })
        .collect();
    (0..set.dim())
        .map(|i| {
            let a: Vec<f64> = now.iter().map(|v| v[i]).collect();
            let b: Vec<f64> = pushed.iter().map(|v| v[i]).collect();
            ks_two_sample(&a, &b)
        })
        .collect()
}

/// Weighted angular sample under the non-standard normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAngular {
    pub directions: Vec<Vec<f64>>,
    /// `||a^{-1} theta^alpha||` before normalization.
    pub raw_weights: Vec<f64>,
    /// Raw weights divided by their sum.
    pub weights: Vec<f64>,
}

impl WeightedAngular {
    pub fn histogram(&self, bins: usize, absolute: bool) -> Result<AngularHistogram> {
        if self.directions.first().is_some_and(|v| v.len() != 2) {
            return Err(Error::Dimension {
                expected: 2,
                found: self.directions[0].len(),
            });
        }
        let angles: Vec<(f64, f64)> = self
            .directions
            .iter()
            .zip(&self.weights)
            .map(|(v, w)| (angle(v[0], v[1], absolute), *w))
            .collect();
        AngularHistogram::from_weighted(&angles, bins, absolute)
    }
}

/// Maps each spectral record to `v / ||v||` with `v_i = sign(t_i) |t_i|^{alpha_i} / a_i`
/// and weight `||v||` (max-norm), the empirical angular measure of the
/// standardized vector.
pub fn nonstandard_angular(set: &ExceedanceSet, a_hat: &[f64], alpha: &[f64]) -> Result<WeightedAngular> {
    let d = set.dim();
    if a_hat.len() != d || alpha.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: a_hat.len().min(alpha.len()),
        });
    }
    if let Some(i) = a_hat.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
        return Err(Error::NonPositiveConstant {
            index: i,
            value: a_hat[i],
        });
    }
    let mut out = WeightedAngular {
        directions: vec![],
        raw_weights: vec![],
        weights: vec![],
    };
    for th in set.spectral() {
        let v: Vec<f64> = (0..d)
            .map(|i| th[i].signum() * th[i].abs().powf(alpha[i]) / a_hat[i])
            .collect();
        let n = max_norm(&v);
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        out.directions.push(v.iter().map(|x| x / n).collect());
        out.raw_weights.push(n);
    }
    let total: f64 = out.raw_weights.iter().sum();
    out.weights = out.raw_weights.iter().map(|w| w / total).collect();
    Ok(out)
}
