//! First passage of the backward marginal process above `u^{1/alpha}` under
//! the tilted law of `M`.

use rand::Rng;
use serde::Serialize;

use super::drift::tilted_log_mean;
use crate::distributions::{AffineFactor, MeanEstimate, TiltedSampler};
use crate::engine::rng::replica_rng;
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const DEFAULT_WINDOW_C: f64 = 2.0;
pub const DEFAULT_REPLICAS: usize = 10_000;
pub const PASSAGE_CAP: u64 = 1_000_000;

/// `sqrt(log u * log log u)`.
pub fn window_width(u: f64) -> f64 {
    (u.ln() * u.ln().ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstPassageStats {
    pub u: f64,
    /// `log u / (alpha_1 mu_{1|1})`.
    pub center: f64,
    pub window: f64,
    pub passage_times: Vec<u64>,
    /// `S_{T_u} = sum_{l <= T_u} log|b + c M_l|`.
    pub log_sums: Vec<f64>,
    pub window_violation_rate: f64,
}

impl FirstPassageStats {
    pub fn mean_drift(&self) -> f64 {
        let r: Vec<f64> = self
            .log_sums
            .iter()
            .zip(&self.passage_times)
            .map(|(s, t)| s / *t as f64)
            .collect();
        MeanEstimate::from_samples(&r).mean
    }
}

#[derive(Debug, Clone)]
pub struct FirstPassageConfig {
    pub u_grid: Vec<f64>,
    pub replicas: usize,
    pub window_c: f64,
    pub seed: u64,
    pub cap: u64,
}

impl Default for FirstPassageConfig {
    fn default() -> Self {
        FirstPassageConfig {
            u_grid: vec![1e3, 1e4, 1e5],
            replicas: DEFAULT_REPLICAS,
            window_c: DEFAULT_WINDOW_C,
            seed: 0,
            cap: PASSAGE_CAP,
        }
    }
}

/// One replica: `(T_u, S_{T_u})`.
pub fn passage_once<R: Rng + ?Sized>(
    sampler: &TiltedSampler,
    q_law: &AffineFactor,
    level: f64,
    cap: u64,
    rng: &mut R,
) -> Result<(u64, f64)> {
    let f = sampler.factor();
    let mut prod = 1.0f64;
    let mut sum = 0.0f64;
    let mut log_sum = 0.0f64;
    for n in 1..=cap {
        sum += prod * q_law.sample(rng);
        let a = f.at(sampler.sample(rng));
        log_sum += a.abs().ln();
        if sum > level {
            return Ok((n, log_sum));
        }
        prod *= a;
    }
    Err(Error::PassageTimeout { cap })
}

/// Passage statistics for each `u` of the grid.
pub fn first_passage(
    factor_1: &AffineFactor,
    alpha_1: f64,
    q_law: &AffineFactor,
    config: &FirstPassageConfig,
    exec: Execution,
) -> Result<Vec<FirstPassageStats>> {
    let sampler = TiltedSampler::new(factor_1, alpha_1)?;
    let mu = tilted_log_mean(factor_1, factor_1, alpha_1)?;
    if !(mu > 0.0) {
        return Err(Error::InvalidModel(format!("tilted drift {mu} is not positive")));
    }
    let mut out = Vec::with_capacity(config.u_grid.len());
    for (ui, &u) in config.u_grid.iter().enumerate() {
        if !(u > std::f64::consts::E) {
            return Err(Error::InvalidArgument(format!("u = {u} needs log log u > 0")));
        }
        let level = u.powf(1.0 / alpha_1);
        let runs = exec.map_ordered(config.replicas, |r| {
            let mut rng = replica_rng(config.seed, ((ui as u64) << 40) | r as u64);
            passage_once(&sampler, q_law, level, config.cap, &mut rng)
        });
        let runs: Vec<(u64, f64)> = runs.into_iter().collect::<Result<_>>()?;
        let center = u.ln() / (mu * alpha_1);
        let window = window_width(u);
        let bad = runs
            .iter()
            .filter(|(t, _)| (*t as f64 - center).abs() >= config.window_c * window)
            .count();
        out.push(FirstPassageStats {
            u,
            center,
            window,
            window_violation_rate: bad as f64 / runs.len().max(1) as f64,
            passage_times: runs.iter().map(|r| r.0).collect(),
            log_sums: runs.iter().map(|r| r.1).collect(),
        });
    }
    Ok(out)
}
