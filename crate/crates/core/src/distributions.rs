//! Scalar innovation laws and the moment functionals built on them.
//!
//! [`AffineFactor`] represents the random coefficient `b + c M` of one
//! coordinate. Its absolute moments `E|b + cM|^s` drive the tail-index
//! solver, and its exponential tilt drives the large-deviation diagnostics.

use std::f64::consts::{LN_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Estimate, Tolerance};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Law of the scalar innovation `M`.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarDist {
    StandardNormal,
    /// Law of `Z^2` for standard normal `Z`.
    ChiSquare1,
    PointMass(f64),
    TabulatedPositive(Tabulated),
}

/// Piecewise-linear density on a grid of nonnegative points.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    points: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl Tabulated {
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn densities(&self) -> &[f64] {
        &self.density
    }

    fn density_at(&self, x: f64) -> f64 {
        let p = &self.points;
        if x < p[0] || x > p[p.len() - 1] {
            return 0.0;
        }
        let k = p.partition_point(|&g| g <= x).clamp(1, p.len() - 1);
        let (x0, x1) = (p[k - 1], p[k]);
        let (f0, f1) = (self.density[k - 1], self.density[k]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let total = self.cdf[self.cdf.len() - 1];
        let r = u * total;
        let k = self.cdf.partition_point(|&c| c <= r).clamp(1, self.points.len() - 1);
        let (x0, x1) = (self.points[k - 1], self.points[k]);
        let (f0, f1) = (self.density[k - 1], self.density[k]);
        let slope = (f1 - f0) / (x1 - x0);
        let rem = (r - self.cdf[k - 1]).max(0.0);
        // solve f0 t + slope t^2 / 2 = rem in the stable form
        let disc = (f0 * f0 + 2.0 * slope * rem).max(0.0);
        let denom = f0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * rem / denom } else { 0.0 };
        (x0 + t).min(x1)
    }
}

impl ScalarDist {
    pub fn point_mass(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "point mass at non-finite value {value}"
            )));
        }
        Ok(ScalarDist::PointMass(value))
    }

    /// Builds a piecewise-linear density from `(point, density)` pairs.
    /// Points must be nonnegative and strictly increasing, densities
    /// nonnegative, and the total mass 1 within 1e-8.
    pub fn tabulated(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::InvalidDistribution("need at least two grid points".into()));
        }
        let mut points = Vec::with_capacity(pairs.len());
        let mut density = Vec::with_capacity(pairs.len());
        for (i, &(x, f)) in pairs.iter().enumerate() {
            if !(x.is_finite() && f.is_finite()) || x < 0.0 || f < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "grid entry {i} = ({x}, {f}) must be finite and nonnegative"
                )));
            }
            if i > 0 && x <= points[i - 1] {
                return Err(Error::InvalidDistribution("grid points must increase".into()));
            }
            points.push(x);
            density.push(f);
        }
        let mut cdf = vec![0.0; points.len()];
        for k in 1..points.len() {
            cdf[k] = cdf[k - 1] + 0.5 * (density[k] + density[k - 1]) * (points[k] - points[k - 1]);
        }
        let mass = cdf[cdf.len() - 1];
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidDistribution(format!(
                "tabulated density integrates to {mass}, not 1"
            )));
        }
        Ok(ScalarDist::TabulatedPositive(Tabulated { points, density, cdf }))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ScalarDist::StandardNormal => rng.sample(StandardNormal),
            ScalarDist::ChiSquare1 => {
                let z: f64 = rng.sample(StandardNormal);
                z * z
            }
            ScalarDist::PointMass(v) => *v,
            ScalarDist::TabulatedPositive(t) => t.inverse_cdf(rng.random::<f64>()),
        }
    }

    /// Closed support interval.
    pub fn support(&self) -> (f64, f64) {
        match self {
            ScalarDist::StandardNormal => (f64::NEG_INFINITY, f64::INFINITY),
            ScalarDist::ChiSquare1 => (0.0, f64::INFINITY),
            ScalarDist::PointMass(v) => (*v, *v),
            ScalarDist::TabulatedPositive(t) => (t.points[0], t.points[t.points.len() - 1]),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, ScalarDist::PointMass(_))
    }

    /// `M >= 0` almost surely.
    pub fn is_nonnegative(&self) -> bool {
        self.support().0 >= 0.0
    }

    /// `M > 0` almost surely.
    pub fn is_positive(&self) -> bool {
        match self {
            ScalarDist::PointMass(v) => *v > 0.0,
            // continuous laws put no mass on 0
            _ => self.support().0 >= 0.0,
        }
    }

    /// `P(M > 0) > 0`.
    pub fn charges_positive_half_line(&self) -> bool {
        match self {
            ScalarDist::StandardNormal | ScalarDist::ChiSquare1 => true,
            ScalarDist::PointMass(v) => *v > 0.0,
            ScalarDist::TabulatedPositive(t) => t
                .points
                .windows(2)
                .zip(t.density.windows(2))
                .any(|(x, f)| x[1] > 0.0 && (f[0] > 0.0 || f[1] > 0.0)),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            ScalarDist::StandardNormal => INV_SQRT_2PI * (-0.5 * x * x).exp(),
            ScalarDist::ChiSquare1 => {
                if x <= 0.0 {
                    0.0
                } else {
                    INV_SQRT_2PI * (-0.5 * x).exp() / x.sqrt()
                }
            }
            ScalarDist::PointMass(_) => 0.0,
            ScalarDist::TabulatedPositive(t) => t.density_at(x),
        }
    }

    /// `E[h(M)]`, with `breaks` marking points where `h` is not smooth.
    pub fn expect<F: Fn(f64) -> f64>(&self, h: F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
        let (lo, hi) = self.support();
        self.expect_over(h, lo, hi, breaks, tol)
    }

    /// `E[h(M) 1(lo <= M <= hi)]`.
    pub fn expect_over<F: Fn(f64) -> f64>(
        &self,
        h: F,
        lo: f64,
        hi: f64,
        breaks: &[f64],
        tol: Tolerance,
    ) -> Result<Estimate> {
        let (slo, shi) = self.support();
        let (lo, hi) = (lo.max(slo), hi.min(shi));
        if lo > hi {
            return Ok(Estimate::exact(0.0));
        }
        match self {
            ScalarDist::PointMass(v) => Ok(Estimate::exact(h(*v))),
            ScalarDist::StandardNormal => {
                integrate(|x| h(x) * INV_SQRT_2PI * (-0.5 * x * x).exp(), lo, hi, breaks, tol)
            }
            ScalarDist::ChiSquare1 => {
                // On (0, 1) substitute x = u^2, which absorbs the x^{-1/2} singularity.
                let mut total = Estimate::exact(0.0);
                if lo < 1.0 {
                    let top = hi.min(1.0);
                    let ubreaks: Vec<f64> = breaks.iter().filter(|&&x| x > 0.0).map(|x| x.sqrt()).collect();
                    let e = integrate(
                        |u| h(u * u) * 2.0 * INV_SQRT_2PI * (-0.5 * u * u).exp(),
                        lo.sqrt(),
                        top.sqrt(),
                        &ubreaks,
                        tol,
                    )?;
                    total = add(total, e);
                }
                if hi > 1.0 {
                    let e = integrate(
                        |x| h(x) * INV_SQRT_2PI * (-0.5 * x).exp() / x.sqrt(),
                        lo.max(1.0),
                        hi,
                        breaks,
                        tol,
                    )?;
                    total = add(total, e);
                }
                Ok(total)
            }
            ScalarDist::TabulatedPositive(t) => {
                let mut all: Vec<f64> = t.points.clone();
                all.extend_from_slice(breaks);
                integrate(|x| h(x) * t.density_at(x), lo, hi, &all, tol)
            }
        }
    }
}

fn add(a: Estimate, b: Estimate) -> Estimate {
    Estimate {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
    }
}

/// The random coefficient `b + c M`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFactor {
    pub b: f64,
    pub c: f64,
    pub dist: ScalarDist,
}

impl AffineFactor {
    pub fn new(b: f64, c: f64, dist: ScalarDist) -> Self {
        AffineFactor { b, c, dist }
    }

    #[inline]
    pub fn at(&self, m: f64) -> f64 {
        self.b + self.c * m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.at(self.dist.sample(rng))
    }

    /// Zero of `b + c m`, where `|b + cm|^s` has its kink.
    pub fn kink(&self) -> Option<f64> {
        (self.c != 0.0).then(|| -self.b / self.c)
    }

    fn breaks(&self) -> Vec<f64> {
        self.kink().into_iter().collect()
    }

    /// `b + cM` is almost surely constant.
    pub fn is_constant(&self) -> bool {
        self.c == 0.0 || self.dist.is_degenerate()
    }

    fn constant_value(&self) -> Option<f64> {
        match self.dist {
            _ if self.c == 0.0 => Some(self.b),
            ScalarDist::PointMass(v) => Some(self.at(v)),
            _ => None,
        }
    }

    /// `E|b + cM|^s` with an error estimate.
    pub fn abs_moment(&self, s: f64) -> Result<Estimate> {
        self.abs_moment_with(s, Tolerance::default())
    }

    pub fn abs_moment_with(&self, s: f64, tol: Tolerance) -> Result<Estimate> {
        if !(s >= 0.0) {
            return Err(Error::InvalidArgument(format!("moment order {s} must be >= 0")));
        }
        if s == 0.0 {
            return Ok(Estimate::exact(1.0));
        }
        if let Some(v) = self.constant_value() {
            return Ok(Estimate::exact(v.abs().powf(s)));
        }
        if self.b == 0.0 && self.dist == ScalarDist::StandardNormal {
            return Ok(Estimate::exact(normal_abs_moment(self.c, s)));
        }
        let e = self.dist.expect(|m| self.at(m).abs().powf(s), &self.breaks(), tol)?;
        if !e.value.is_finite() {
            return Err(Error::NonIntegrable(format!("E|b+cM|^{s} is not finite")));
        }
        Ok(e)
    }

    /// `E log|b + cM|`.
    pub fn log_moment(&self) -> Result<Estimate> {
        if let Some(v) = self.constant_value() {
            return Ok(Estimate::exact(v.abs().ln()));
        }
        self.dist
            .expect(|m| self.at(m).abs().ln(), &self.breaks(), Tolerance::default())
    }

    /// `E[h(M) |b + cM|^alpha]`, the tilted expectation when `alpha` is the
    /// factor's Kesten index.
    pub fn tilted_expect<F: Fn(f64) -> f64>(&self, alpha: f64, h: F, extra_breaks: &[f64]) -> Result<Estimate> {
        let mut breaks = self.breaks();
        breaks.extend_from_slice(extra_breaks);
        self.dist
            .expect(|m| h(m) * self.at(m).abs().powf(alpha), &breaks, Tolerance::default())
    }
}

/// `E|cN|^s = |c|^s 2^{s/2} Gamma((s+1)/2) / sqrt(pi)` for standard normal `N`.
pub fn normal_abs_moment(c: f64, s: f64) -> f64 {
    (s * c.abs().ln() + 0.5 * s * LN_2 + ln_gamma(0.5 * (s + 1.0)) - 0.5 * PI.ln()).exp()
}

/// Tilted mass left outside the rejection window.
const TILT_TAIL_MASS: f64 = 1e-6;

/// Sampler for `M` under the tilted law `P^alpha(M in .) = E[|b+cM|^alpha 1(M in .)]`.
///
/// A window holding all but `1e-6` of the tilted mass is cut into cells with
/// the kink of `|b + cm|` and the mode of the base density on cell edges. A
/// draw picks a cell by its exact tilted mass and then rejects uniform
/// proposals against a per-cell bound, so the acceptance rate does not
/// degrade with `alpha`. The two tails beyond the window are drawn by
/// numerical inversion of the tilted distribution function.
#[derive(Debug, Clone)]
pub struct TiltedSampler {
    factor: AffineFactor,
    alpha: f64,
    lo: f64,
    hi: f64,
    mass_below: f64,
    mass_above: f64,
    /// Cell edges over `[lo, hi]`.
    edges: Vec<f64>,
    /// Cumulative tilted mass at the right edge of each cell.
    cum: Vec<f64>,
    /// Upper bound of the proposal-space tilted density on each cell.
    bound: Vec<f64>,
}

const TILT_CELLS: usize = 512;

impl TiltedSampler {
    pub fn new(factor: &AffineFactor, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tilt exponent {alpha} must be positive"
            )));
        }
        let degenerate = factor.dist.is_degenerate();
        if !degenerate {
            // a point mass tilts to itself; for anything else the tilt must be a probability
            let m = factor.abs_moment(alpha)?.value;
            if (m - 1.0).abs() > 1e-6 {
                return Err(Error::TiltNotNormalized { residual: m - 1.0 });
            }
        }
        let (slo, shi) = factor.dist.support();
        let mut s = TiltedSampler {
            factor: factor.clone(),
            alpha,
            lo: slo,
            hi: shi,
            mass_below: 0.0,
            mass_above: 0.0,
            edges: Vec::new(),
            cum: Vec::new(),
            bound: Vec::new(),
        };
        if degenerate {
            return Ok(s);
        }
        if shi.is_infinite() {
            let mut hi = slo.max(0.0) + 1.0;
            loop {
                let tail = s.tilted_mass(hi, f64::INFINITY)?;
                if tail <= 0.5 * TILT_TAIL_MASS {
                    s.hi = hi;
                    s.mass_above = tail;
                    break;
                }
                hi = hi * 1.25 + 0.25;
            }
        }
        if slo.is_infinite() {
            let mut lo = shi.min(0.0) - 1.0;
            loop {
                let tail = s.tilted_mass(f64::NEG_INFINITY, lo)?;
                if tail <= 0.5 * TILT_TAIL_MASS {
                    s.lo = lo;
                    s.mass_below = tail;
                    break;
                }
                lo = lo * 1.25 - 0.25;
            }
        }
        s.build_cells()?;
        Ok(s)
    }

    fn build_cells(&mut self) -> Result<()> {
        let (lo, hi) = (self.lo, self.hi);
        let mut edges: Vec<f64> = (0..=TILT_CELLS)
            .map(|k| lo + (hi - lo) * k as f64 / TILT_CELLS as f64)
            .collect();
        edges[TILT_CELLS] = hi;
        for p in self.factor.kink().into_iter().chain([0.0]) {
            if p > lo && p < hi {
                edges.push(p);
            }
        }
        if let ScalarDist::TabulatedPositive(t) = &self.factor.dist {
            edges.extend(t.points().iter().copied().filter(|&p| p > lo && p < hi));
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut cum = Vec::with_capacity(edges.len() - 1);
        let mut bound = Vec::with_capacity(edges.len() - 1);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            acc += self.tilted_mass(w[0], w[1])?;
            cum.push(acc);
            bound.push(self.cell_bound(w[0], w[1]) * (1.0 + 1e-9));
        }
        self.edges = edges;
        self.cum = cum;
        self.bound = bound;
        Ok(())
    }

    /// Cells of the chi-square law that start at 0 are proposed in `y = sqrt(m)`,
    /// where the density stays bounded.
    fn sqrt_cell(&self, x0: f64) -> bool {
        matches!(self.factor.dist, ScalarDist::ChiSquare1) && x0 <= 0.0
    }

    /// `|b + cm|^alpha` is monotone between kinks, so its sup over a cell sits
    /// at an edge; the base density is bounded through its mode.
    fn cell_bound(&self, x0: f64, x1: f64) -> f64 {
        let w = |m: f64| self.factor.at(m).abs().powf(self.alpha);
        let w_max = w(x0).max(w(x1));
        let f_max = match &self.factor.dist {
            ScalarDist::StandardNormal => self.factor.dist.density(0.0f64.clamp(x0, x1)),
            ScalarDist::ChiSquare1 if self.sqrt_cell(x0) => 2.0 * INV_SQRT_2PI,
            // decreasing on (0, inf)
            ScalarDist::ChiSquare1 => self.factor.dist.density(x0),
            // linear between grid points, and grid points are cell edges
            d => d.density(x0).max(d.density(x1)),
        };
        w_max * f_max
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn factor(&self) -> &AffineFactor {
        &self.factor
    }

    /// The rejection window `[lo, hi]`.
    pub fn window(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn tilted_mass(&self, lo: f64, hi: f64) -> Result<f64> {
        let f = &self.factor;
        let breaks = f.breaks();
        Ok(f.dist
            .expect_over(
                |m| f.at(m).abs().powf(self.alpha),
                lo,
                hi,
                &breaks,
                Tolerance {
                    abs: 1e-14,
                    ..Tolerance::default()
                },
            )?
            .value)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if let ScalarDist::PointMass(v) = self.factor.dist {
            return v;
        }
        let u: f64 = rng.random();
        if u < self.mass_above {
            return self.tail_draw(rng.random(), false);
        }
        if u < self.mass_above + self.mass_below {
            return self.tail_draw(rng.random(), true);
        }
        let total = self.cum[self.cum.len() - 1];
        let v = rng.random::<f64>() * total;
        let k = self.cum.partition_point(|&c| c <= v).min(self.cum.len() - 1);
        let (x0, x1) = (self.edges[k], self.edges[k + 1]);
        let w = |m: f64| self.factor.at(m).abs().powf(self.alpha);
        loop {
            let (m, dens) = if self.sqrt_cell(x0) {
                let y = rng.random::<f64>() * x1.sqrt();
                let m = y * y;
                (m, 2.0 * INV_SQRT_2PI * (-0.5 * m).exp() * w(m))
            } else {
                let m = x0 + rng.random::<f64>() * (x1 - x0);
                (m, self.factor.dist.density(m) * w(m))
            };
            if rng.random::<f64>() * self.bound[k] < dens {
                return m;
            }
        }
    }

    /// Inverts the tilted distribution function on one tail by bisection.
    fn tail_draw(&self, v: f64, lower: bool) -> f64 {
        let total = if lower { self.mass_below } else { self.mass_above };
        let target = v * total;
        let mass_to = |x: f64| -> f64 {
            let r = if lower {
                self.tilted_mass(f64::NEG_INFINITY, x)
            } else {
                self.tilted_mass(self.hi, x)
            };
            r.unwrap_or(f64::NAN)
        };
        let (mut a, mut b) = if lower {
            let mut a = self.lo - 1.0;
            while mass_to(a) > target {
                a = 2.0 * a - 1.0;
            }
            (a, self.lo)
        } else {
            let mut b = self.hi + 1.0;
            while mass_to(b) < target {
                b = 2.0 * b + 1.0;
            }
            (self.hi, b)
        };
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if mass_to(mid) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
        MeanEstimate {
            mean,
            std_err: (var / n as f64).sqrt(),
            n,
        }
    }

    /// Two-sided normal-approximation interval at the given z-value.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.mean - z * self.std_err, self.mean + z * self.std_err)
    }
}

/// Self-normalized importance-weighting estimate of tilted means: base draws
/// of `M`, weights `|b + cM|^alpha`. Independent of [`TiltedSampler`].
pub fn importance_weighted_means<R, F>(
    factor: &AffineFactor,
    alpha: f64,
    tests: &[F],
    n: usize,
    rng: &mut R,
) -> Vec<MeanEstimate>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> f64,
{
    let draws: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let m = factor.dist.sample(rng);
            (m, factor.at(m).abs().powf(alpha))
        })
        .collect();
    let wsum: f64 = draws.iter().map(|d| d.1).sum();
    tests
        .iter()
        .map(|h| {
            let mean = draws.iter().map(|&(m, w)| w * h(m)).sum::<f64>() / wsum;
            let var = draws
                .iter()
                .map(|&(m, w)| {
                    let r = w * (h(m) - mean);
                    r * r
                })
                .sum::<f64>()
                / (wsum * wsum);
            MeanEstimate {
                mean,
                std_err: var.sqrt(),
                n,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    fn normal(b: f64, c: f64) -> AffineFactor {
        AffineFactor::new(b, c, ScalarDist::StandardNormal)
    }

    fn chi2(b: f64, c: f64) -> AffineFactor {
        AffineFactor::new(b, c, ScalarDist::ChiSquare1)
    }

    #[test]
    fn sample_point_mass_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = AffineFactor::new(0.0, 1.0, ScalarDist::point_mass(3.0).unwrap());
        assert_eq!(f.sample(&mut rng), 3.0);
    }

    #[test]
    fn chi_square_factor_is_bounded_below_by_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = chi2(0.1, 0.9);
        assert!((0..100_000).all(|_| f.sample(&mut rng) >= 0.1));
    }

    #[test]
    fn chi_square_factor_mean_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = chi2(0.1, 0.9);
        let xs: Vec<f64> = (0..1_000_000).map(|_| f.sample(&mut rng)).collect();
        let est = MeanEstimate::from_samples(&xs);
        assert!((est.mean - 1.0).abs() < 3.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn abs_moment_examples() {
        assert!((normal(0.0, 1.0).abs_moment(2.0).unwrap().value - 1.0).abs() < 1e-12);
        let c2 = (1.0f64 / 3.0).powf(0.25);
        assert!((normal(0.0, c2).abs_moment(4.0).unwrap().value - 1.0).abs() < 1e-12);
        assert!((chi2(0.1, 0.9).abs_moment(1.0).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn abs_moment_closed_form_matches_quadrature() {
        // b = 0 takes the closed form; a tiny b forces quadrature
        for s in [0.5, 1.0, 2.0, 3.7] {
            let closed = normal(0.0, 0.8).abs_moment(s).unwrap().value;
            let quad = normal(1e-300, 0.8).abs_moment(s).unwrap().value;
            assert!((closed - quad).abs() < 1e-10, "s={s}: {closed} vs {quad}");
        }
    }

    #[test]
    fn abs_moment_order_zero_is_exactly_one() {
        for f in [normal(0.3, -1.2), chi2(0.1, 0.9), normal(0.0, 2.0)] {
            assert_eq!(f.abs_moment(0.0).unwrap().value, 1.0);
        }
    }

    #[test]
    fn chi_square_moments_match_polynomial_identities() {
        // E[(b + cZ^2)^2] = b^2 + 2bc + 3c^2
        let (b, c) = (0.1, 0.5421);
        let m = chi2(b, c).abs_moment(2.0).unwrap();
        assert!((m.value - (b * b + 2.0 * b * c + 3.0 * c * c)).abs() < 1e-10);
        assert!(m.abs_error <= 1e-10);
    }

    #[test]
    fn log_moment_examples() {
        let pm = AffineFactor::new(0.0, 1.0, ScalarDist::point_mass(0.5).unwrap());
        assert!((pm.log_moment().unwrap().value - 0.5f64.ln()).abs() < 1e-15);
        let want = -(EULER_GAMMA + LN_2) / 2.0;
        let got = normal(0.0, 1.0).log_moment().unwrap().value;
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        assert!((want + 0.6352).abs() < 1e-4);
        assert!(chi2(0.1, 0.9).log_moment().unwrap().value < 0.0);
    }

    #[test]
    fn log_moment_with_interior_singularity() {
        // b + cN crosses zero at -b/c; compare against plain Monte Carlo
        let f = normal(0.5, 1.0);
        let q = f.log_moment().unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xs: Vec<f64> = (0..1_000_000).map(|_| f.sample(&mut rng).abs().ln()).collect();
        let est = MeanEstimate::from_samples(&xs);
        assert!((q - est.mean).abs() < 4.0 * est.std_err, "{q} vs {est:?}");
    }

    #[test]
    fn tabulated_validation() {
        assert!(ScalarDist::tabulated(&[(0.0, 1.0), (1.0, 1.0)]).is_ok());
        assert!(ScalarDist::tabulated(&[(0.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(ScalarDist::tabulated(&[(0.0, -1.0), (1.0, 3.0)]).is_err());
        assert!(ScalarDist::tabulated(&[(1.0, 1.0), (0.5, 1.0)]).is_err());
        assert!(ScalarDist::point_mass(f64::NAN).is_err());
    }

    #[test]
    fn tabulated_triangle_moments_and_sampling() {
        // density 2x on [0, 1]: E M = 2/3, E M^2 = 1/2
        let d = ScalarDist::tabulated(&[(0.0, 0.0), (0.5, 1.0), (1.0, 2.0)]).unwrap();
        let f = AffineFactor::new(0.0, 1.0, d.clone());
        assert!((f.abs_moment(1.0).unwrap().value - 2.0 / 3.0).abs() < 1e-12);
        assert!((f.abs_moment(2.0).unwrap().value - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xs: Vec<f64> = (0..200_000).map(|_| d.sample(&mut rng)).collect();
        let est = MeanEstimate::from_samples(&xs);
        assert!((est.mean - 2.0 / 3.0).abs() < 4.0 * est.std_err);
    }

    #[test]
    fn tilted_point_mass_returns_the_point() {
        let f = AffineFactor::new(0.0, 1.0, ScalarDist::point_mass(0.7).unwrap());
        let s = TiltedSampler::new(&f, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(s.sample(&mut rng), 0.7);
    }

    #[test]
    fn tilt_requires_normalization() {
        let r = TiltedSampler::new(&normal(0.0, 1.0), 3.0);
        assert!(matches!(r, Err(Error::TiltNotNormalized { .. })));
    }

    #[test]
    fn tilted_normal_second_moment_is_three() {
        let s = TiltedSampler::new(&normal(0.0, 1.0), 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<f64> = (0..400_000).map(|_| s.sample(&mut rng).powi(2)).collect();
        let est = MeanEstimate::from_samples(&xs);
        assert!((est.mean - 3.0).abs() < 4.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn tilted_log_factor_has_positive_mean_matching_quadrature() {
        let f = chi2(0.1, 0.9);
        let s = TiltedSampler::new(&f, 1.0).unwrap();
        let quad = f.tilted_expect(1.0, |m| f.at(m).ln(), &[]).unwrap().value;
        assert!(quad > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let xs: Vec<f64> = (0..300_000).map(|_| f.at(s.sample(&mut rng)).ln()).collect();
        let est = MeanEstimate::from_samples(&xs);
        assert!((est.mean - quad).abs() < 4.0 * est.std_err, "{quad} vs {est:?}");
    }

    #[test]
    fn large_tilt_exponents_sample_quickly() {
        // alpha well above 8, where plain rejection from the base law almost never accepts
        for f in [normal(0.0, 0.35), chi2(0.05, 0.1)] {
            let alpha = crate::tail_index::solve_alpha(&f, 64.0).unwrap();
            assert!(alpha > 8.0, "{alpha}");
            let s = TiltedSampler::new(&f, alpha).unwrap();
            let quad = f.tilted_expect(alpha, |m| f.at(m).abs().ln(), &[]).unwrap().value;
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            let xs: Vec<f64> = (0..200_000).map(|_| f.at(s.sample(&mut rng)).abs().ln()).collect();
            let est = MeanEstimate::from_samples(&xs);
            assert!((est.mean - quad).abs() < 4.0 * est.std_err, "{quad} vs {est:?}");
        }
    }

    #[test]
    fn tail_draws_land_beyond_the_window() {
        let s = TiltedSampler::new(&normal(0.0, 1.0), 2.0).unwrap();
        let (lo, hi) = s.window();
        assert!(lo < -4.0 && hi > 4.0);
        let up = s.tail_draw(0.5, false);
        let down = s.tail_draw(0.5, true);
        assert!(up > hi && down < lo, "{up} {down}");
    }
}
