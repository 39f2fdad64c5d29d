//! Drifts of the log-factors under the exponential change of measure.

use rand::Rng;
use serde::Serialize;

use crate::distributions::{AffineFactor, MeanEstimate, ScalarDist, TiltedSampler};
use crate::error::Result;
use crate::tail_index::{solve_alpha, DEFAULT_MAX_ALPHA};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Tilted drifts `mu_{1|1}`, `mu_{j|1}` and the gap
/// `alpha_j mu_{j|1} - alpha_1 mu_{1|1}`, by quadrature with a Monte Carlo
/// cross-check under the tilted law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedDriftPair {
    pub alpha_1: f64,
    pub alpha_j: f64,
    pub mu_1_given_1: f64,
    pub mu_j_given_1: f64,
    pub jensen_gap: f64,
    /// 99% half-width of the Monte Carlo gap estimate.
    pub ci_halfwidth: f64,
    pub mc_mu_1_given_1: f64,
    pub mc_mu_j_given_1: f64,
    pub mc_jensen_gap: f64,
    pub mc_std_err: f64,
    pub mc_samples: usize,
}

impl TiltedDriftPair {
    /// Monte Carlo 99% interval of the gap.
    pub fn ci(&self) -> (f64, f64) {
        (
            self.mc_jensen_gap - self.ci_halfwidth,
            self.mc_jensen_gap + self.ci_halfwidth,
        )
    }

    /// Both the quadrature value and the Monte Carlo interval sit below zero.
    pub fn gap_is_negative(&self) -> bool {
        self.jensen_gap < 0.0 && self.ci().1 < 0.0
    }
}

/// `mu_{j|1} = E[log|b_j + c_j M| |b_1 + c_1 M|^{alpha_1}]` by quadrature.
pub fn tilted_log_mean(factor_1: &AffineFactor, factor_j: &AffineFactor, alpha_1: f64) -> Result<f64> {
    if let ScalarDist::PointMass(v) = factor_1.dist {
        // a point mass tilts to itself
        return Ok(factor_j.at(v).abs().ln());
    }
    if factor_j.is_constant() {
        let v = factor_j.at(0.0).abs().ln();
        return Ok(v * factor_1.abs_moment(alpha_1)?.value);
    }
    let breaks: Vec<f64> = factor_j.kink().into_iter().collect();
    Ok(factor_1
        .tilted_expect(alpha_1, |m| factor_j.at(m).abs().ln(), &breaks)?
        .value)
}

/// Computes the drift pair; `alpha_j` is the Kesten index of `factor_j`.
pub fn tilted_drift<R: Rng + ?Sized>(
    factor_1: &AffineFactor,
    factor_j: &AffineFactor,
    alpha_1: f64,
    mc_samples: usize,
    rng: &mut R,
) -> Result<TiltedDriftPair> {
    let sampler = TiltedSampler::new(factor_1, alpha_1)?;
    let alpha_j = if factor_j == factor_1 {
        alpha_1
    } else {
        solve_alpha(factor_j, DEFAULT_MAX_ALPHA)?
    };
    let mu11 = tilted_log_mean(factor_1, factor_1, alpha_1)?;
    let muj1 = tilted_log_mean(factor_1, factor_j, alpha_1)?;

    let n = mc_samples.max(2);
    let mut l1 = Vec::with_capacity(n);
    let mut lj = Vec::with_capacity(n);
    let mut gap = Vec::with_capacity(n);
    for _ in 0..n {
        let m = sampler.sample(rng);
        let a = factor_1.at(m).abs().ln();
        let b = factor_j.at(m).abs().ln();
        l1.push(a);
        lj.push(b);
        gap.push(alpha_j * b - alpha_1 * a);
    }
    let g = MeanEstimate::from_samples(&gap);
    Ok(TiltedDriftPair {
        alpha_1,
        alpha_j,
        mu_1_given_1: mu11,
        mu_j_given_1: muj1,
        jensen_gap: alpha_j * muj1 - alpha_1 * mu11,
        ci_halfwidth: Z99 * g.std_err,
        mc_mu_1_given_1: MeanEstimate::from_samples(&l1).mean,
        mc_mu_j_given_1: MeanEstimate::from_samples(&lj).mean,
        mc_jensen_gap: g.mean,
        mc_std_err: g.std_err,
        mc_samples: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn case_one_drift_difference_is_log_ratio() {
        let f1 = AffineFactor::new(0.0, (1.0f64 / 3.0).powf(0.25), ScalarDist::StandardNormal);
        let fj = AffineFactor::new(0.0, 1.0, ScalarDist::StandardNormal);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = tilted_drift(&f1, &fj, 4.0, 10_000, &mut rng).unwrap();
        assert!((p.mu_j_given_1 - p.mu_1_given_1 - (1.0f64.ln() - f1.c.ln())).abs() < 1e-9);
        assert!(p.mu_1_given_1 > 0.0);
    }

    #[test]
    fn identical_factors_have_zero_gap() {
        let f = AffineFactor::new(0.1, 0.9, ScalarDist::ChiSquare1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = tilted_drift(&f, &f, 1.0, 1000, &mut rng).unwrap();
        assert_eq!(p.jensen_gap, 0.0);
        assert_eq!(p.mc_jensen_gap, 0.0);
    }
}
