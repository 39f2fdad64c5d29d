//! Kesten indices: the positive roots of `E|b_i + c_i M|^s = 1`.

use std::fmt;

use crate::distributions::{AffineFactor, ScalarDist};
use crate::engine::{DiagSREModel, QLaw};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_ALPHA: f64 = 64.0;
/// Largest accepted `|m(alpha) - 1|`.
pub const RESIDUAL_TOL: f64 = 1e-9;
const TARGET: f64 = 1e-12;

/// Root of the moment equation for one factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KestenRoot {
    pub alpha: f64,
    pub residual: f64,
}

/// Solves `E|b + cM|^alpha = 1` for `alpha` in `(0, max_alpha]`.
pub fn solve_alpha(factor: &AffineFactor, max_alpha: f64) -> Result<f64> {
    solve_root(factor, max_alpha).map(|r| r.alpha)
}

pub fn solve_root(factor: &AffineFactor, max_alpha: f64) -> Result<KestenRoot> {
    let lm = factor.log_moment()?.value;
    if !(lm < 0.0) {
        return Err(Error::StationarityViolated {
            coordinate: 0,
            log_moment: lm,
        });
    }
    let g = |s: f64| -> Result<f64> { Ok(factor.abs_moment(s)?.value.ln()) };

    // g is convex with g(0) = 0 and g'(0) < 0, so it is negative on (0, alpha)
    // and positive beyond.
    let mut hi = 1.0f64.min(max_alpha);
    let mut g_hi = g(hi)?;
    while g_hi <= 0.0 {
        if hi >= max_alpha {
            return Err(Error::NoRootInRange { max_alpha });
        }
        hi = (2.0 * hi).min(max_alpha);
        g_hi = g(hi)?;
    }
    let mut lo = hi;
    let mut g_lo = g_hi;
    while g_lo > 0.0 {
        lo *= 0.5;
        g_lo = g(lo)?;
        if lo < 1e-300 {
            return Err(Error::NoRootInRange { max_alpha });
        }
    }

    let mut best = if g_lo.abs() < g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    // Illinois variant of regula falsi: the stale end's value is halved
    // when the same end is replaced twice in a row
    let mut side = 0i8;
    for _ in 0..200 {
        if best.1.exp_m1().abs() <= TARGET || hi - lo <= 1e-15 * hi {
            break;
        }
        let mut s = lo - g_lo * (hi - lo) / (g_hi - g_lo);
        if !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let gs = g(s)?;
        if gs.abs() < best.1.abs() {
            best = (s, gs);
        }
        if gs > 0.0 {
            hi = s;
            g_hi = gs;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = s;
            g_lo = gs;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
    }
    let residual = best.1.exp_m1().abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::NonIntegrable(format!(
            "moment equation solved only to residual {residual:e}"
        )));
    }
    Ok(KestenRoot {
        alpha: best.0,
        residual,
    })
}

/// Per-coordinate tail indices of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TailIndexProfile {
    pub alpha: Vec<f64>,
    pub residual: Vec<f64>,
    pub log_moment: Vec<f64>,
}

impl TailIndexProfile {
    pub fn solve(model: &DiagSREModel) -> Result<Self> {
        Self::from_factors(&model.factors(), DEFAULT_MAX_ALPHA)
    }

    pub fn from_factors(factors: &[AffineFactor], max_alpha: f64) -> Result<Self> {
        let mut p = TailIndexProfile {
            alpha: vec![],
            residual: vec![],
            log_moment: vec![],
        };
        for (i, f) in factors.iter().enumerate() {
            let lm = f.log_moment()?.value;
            if !(lm < 0.0) {
                return Err(Error::StationarityViolated {
                    coordinate: i,
                    log_moment: lm,
                });
            }
            let root = solve_root(f, max_alpha)?;
            p.alpha.push(root.alpha);
            p.residual.push(root.residual);
            p.log_moment.push(lm);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn max_alpha(&self) -> f64 {
        self.alpha.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// Negative top Lyapunov exponent per coordinate.
    A1,
    /// Kesten index exists.
    A2,
    /// `M` and `Q` have moments slightly beyond the largest index.
    A3,
    /// `log|b_i + c_i M|` is non-arithmetic.
    A4,
    /// Non-degeneracy and `P(Q_i > 0) > 0`.
    A5,
    /// Light ratio tails `|Q_j| / |Q_i|` for `alpha_i > alpha_j`.
    A6,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
    /// Holds by construction of the law but cannot be checked numerically.
    Assumed(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail(_) => "fail",
            Verdict::Assumed(_) => "assumed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub verdicts: Vec<(Assumption, Verdict)>,
}

impl AssumptionReport {
    pub fn get(&self, a: Assumption) -> &Verdict {
        &self
            .verdicts
            .iter()
            .find(|v| v.0 == a)
            .expect("every assumption is reported")
            .1
    }

    /// No assumption failed.
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|(_, v)| !matches!(v, Verdict::Fail(_)))
    }
}

const A3_EPS: f64 = 0.5;

/// Checks the standing assumptions of the tail theory numerically where
/// possible and structurally otherwise.
pub fn validate_assumptions(model: &DiagSREModel, profile: &TailIndexProfile) -> AssumptionReport {
    let d = model.dim();
    let mut out = Vec::with_capacity(6);

    let a1 = match profile.log_moment.iter().position(|&l| !(l < 0.0)) {
        None if profile.dim() == d => Verdict::Pass,
        None => Verdict::Fail("profile dimension does not match the model".into()),
        Some(i) => Verdict::Fail(format!(
            "E log|b+cM| = {} >= 0 at coordinate {i}",
            profile.log_moment[i]
        )),
    };
    out.push((Assumption::A1, a1));

    let a2 = match profile.residual.iter().position(|&r| !(r <= RESIDUAL_TOL)) {
        None if profile.alpha.iter().all(|a| a.is_finite() && *a > 0.0) => Verdict::Pass,
        None => Verdict::Fail("non-positive tail index".into()),
        Some(i) => Verdict::Fail(format!("residual {} at coordinate {i}", profile.residual[i])),
    };
    out.push((Assumption::A2, a2));

    let s = profile.max_alpha() + A3_EPS;
    let finite = |f: &AffineFactor| f.abs_moment(s).map(|e| e.value.is_finite()).unwrap_or(false);
    let a3 = if !finite(&AffineFactor::new(0.0, 1.0, model.m_law().clone())) {
        Verdict::Fail(format!("E|M|^{s} is not finite"))
    } else if let Some(i) = (0..d).find(|&i| !finite(&model.q_marginal(i))) {
        Verdict::Fail(format!("E|Q_{i}|^{s} is not finite"))
    } else {
        Verdict::Pass
    };
    out.push((Assumption::A3, a3));

    let a4 = match model.m_law() {
        ScalarDist::PointMass(_) => Verdict::Fail("M is degenerate, so log|b+cM| is arithmetic".into()),
        _ if model.c().contains(&0.0) => Verdict::Fail("a coefficient c_i is zero".into()),
        ScalarDist::StandardNormal | ScalarDist::ChiSquare1 => Verdict::Pass,
        ScalarDist::TabulatedPositive(_) => Verdict::Assumed("continuous law given on a finite grid".into()),
    };
    out.push((Assumption::A4, a4));

    out.push((Assumption::A5, non_degeneracy(model)));
    out.push((Assumption::A6, ratio_tails(model, profile)));
    AssumptionReport { verdicts: out }
}

fn q_charges_positive(model: &DiagSREModel, i: usize) -> bool {
    match model.q_law() {
        QLaw::Gaussian(g) => g.variance(i) > 0.0,
        QLaw::Constant(q) => q[i] > 0.0,
        QLaw::Independent(v) => v[i].charges_positive_half_line(),
    }
}

fn non_degeneracy(model: &DiagSREModel) -> Verdict {
    for i in 0..model.dim() {
        if !q_charges_positive(model, i) {
            return Verdict::Fail(format!("P(Q_{i} > 0) = 0"));
        }
        // with M non-degenerate and independent of Q, (b+cM)x + Q = x a.s.
        // is impossible for x != 0 and Q_i is not a.s. zero; a constant
        // factor with constant Q has the fixed point q/(1-rho)
        if model.factor(i).is_constant() && matches!(model.q_law(), QLaw::Constant(_)) {
            return Verdict::Fail(format!("coordinate {i} is deterministic"));
        }
    }
    Verdict::Pass
}

fn ratio_tails(model: &DiagSREModel, profile: &TailIndexProfile) -> Verdict {
    let d = model.dim();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter(|&(i, j)| profile.alpha[i] > profile.alpha[j])
        .collect();
    if pairs.is_empty() {
        return Verdict::Pass;
    }
    match model.q_law() {
        // Gaussian ratios are Cauchy: P(|Q_j/Q_i| > v) = O(1/v)
        QLaw::Gaussian(g) => match pairs.iter().find(|&&(i, _)| g.variance(i) == 0.0) {
            None => Verdict::Pass,
            Some(&(i, _)) => Verdict::Fail(format!("Q_{i} vanishes a.s.")),
        },
        QLaw::Constant(q) => match pairs.iter().find(|&&(i, _)| q[i] == 0.0) {
            None => Verdict::Pass,
            Some(&(i, _)) => Verdict::Fail(format!("Q_{i} vanishes")),
        },
        QLaw::Independent(_) => Verdict::Assumed("ratio tails of custom laws are not checked".into()),
    }
}
