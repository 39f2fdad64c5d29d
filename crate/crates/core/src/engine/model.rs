use crate::distributions::{AffineFactor, ScalarDist};
use crate::error::{Error, Result};

/// Law of the additive innovation `Q_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum QLaw {
    Gaussian(GaussianVector),
    Constant(Vec<f64>),
    /// Independent coordinates with the given marginal laws.
    Independent(Vec<ScalarDist>),
}

/// Centered Gaussian vector with covariance `cov` (row-major, `d x d`).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVector {
    d: usize,
    cov: Vec<f64>,
    chol: Vec<f64>,
}

impl GaussianVector {
    pub fn new(d: usize, cov: Vec<f64>) -> Result<Self> {
        let chol = cholesky_psd(d, &cov)?;
        Ok(GaussianVector { d, cov, chol })
    }

    /// Unit variances with a common pairwise correlation.
    pub fn equicorrelated(d: usize, rho: f64) -> Result<Self> {
        let cov = (0..d * d).map(|k| if k / d == k % d { 1.0 } else { rho }).collect();
        Self::new(d, cov)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn covariance(&self) -> &[f64] {
        &self.cov
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.cov[i * self.d + i]
    }

    /// Lower-triangular factor, row-major.
    pub fn cholesky(&self) -> &[f64] {
        &self.chol
    }

    /// Writes `L z` into `out`.
    #[inline]
    pub fn transform(&self, z: &[f64], out: &mut [f64]) {
        let d = self.d;
        for i in 0..d {
            let row = &self.chol[i * d..i * d + i + 1];
            out[i] = row.iter().zip(z).map(|(l, z)| l * z).sum();
        }
    }
}

/// Cholesky factorization that accepts positive-semidefinite matrices:
/// vanishing pivots produce zero columns.
pub fn cholesky_psd(d: usize, a: &[f64]) -> Result<Vec<f64>> {
    if a.len() != d * d {
        return Err(Error::Dimension {
            expected: d * d,
            found: a.len(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidModel("covariance has non-finite entries".into()));
    }
    for i in 0..d {
        for j in 0..i {
            if (a[i * d + j] - a[j * d + i]).abs() > 1e-12 * (1.0 + a[i * d + j].abs()) {
                return Err(Error::InvalidModel("covariance is not symmetric".into()));
            }
        }
    }
    let scale = (0..d).map(|i| a[i * d + i].abs()).fold(0.0, f64::max).max(1.0);
    let eps = 1e-12 * scale;
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let pivot = a[j * d + j] - (0..j).map(|k| l[j * d + k] * l[j * d + k]).sum::<f64>();
        if pivot < -eps {
            return Err(Error::InvalidModel(format!(
                "covariance is not positive semidefinite (pivot {pivot:e} at {j})"
            )));
        }
        let positive = pivot > eps;
        let ljj = if positive { pivot.sqrt() } else { 0.0 };
        l[j * d + j] = ljj;
        for i in j + 1..d {
            let r = a[i * d + j] - (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum::<f64>();
            if positive {
                l[i * d + j] = r / ljj;
            } else if r.abs() > 1e-9 * scale {
                return Err(Error::InvalidModel(
                    "covariance is not positive semidefinite (zero pivot with nonzero column)".into(),
                ));
            }
        }
    }
    Ok(l)
}

/// Coefficient configuration of a diagonal SRE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelCase {
    /// `b = 0` in every coordinate.
    CaseI,
    /// `b > 0` in every coordinate and `M >= 0`.
    CaseII,
    /// All coordinates share `(b, c)`.
    EqualCoefficients,
    Mixed,
}

/// `X_t = Diag(b + c M_t) X_{t-1} + Q_t` with a single scalar innovation `M_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagSREModel {
    b: Vec<f64>,
    c: Vec<f64>,
    m_law: ScalarDist,
    q_law: QLaw,
    blocks: Vec<Vec<usize>>,
    case: ModelCase,
}

impl DiagSREModel {
    pub fn new(b: Vec<f64>, c: Vec<f64>, m_law: ScalarDist, q_law: QLaw) -> Result<Self> {
        let d = b.len();
        if d == 0 {
            return Err(Error::InvalidModel("dimension must be positive".into()));
        }
        if c.len() != d {
            return Err(Error::Dimension {
                expected: d,
                found: c.len(),
            });
        }
        if b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("coefficients must be finite".into()));
        }
        let qd = match &q_law {
            QLaw::Gaussian(g) => g.dim(),
            QLaw::Constant(q) => {
                if q.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel("constant Q must be finite".into()));
                }
                q.len()
            }
            QLaw::Independent(v) => v.len(),
        };
        if qd != d {
            return Err(Error::Dimension { expected: d, found: qd });
        }
        let blocks = coefficient_blocks(&b, &c);
        let case = if blocks.len() == 1 {
            ModelCase::EqualCoefficients
        } else if b.iter().all(|&v| v == 0.0) {
            ModelCase::CaseI
        } else if b.iter().all(|&v| v > 0.0) && m_law.is_nonnegative() {
            ModelCase::CaseII
        } else {
            ModelCase::Mixed
        };
        Ok(DiagSREModel {
            b,
            c,
            m_law,
            q_law,
            blocks,
            case,
        })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn m_law(&self) -> &ScalarDist {
        &self.m_law
    }

    pub fn q_law(&self) -> &QLaw {
        &self.q_law
    }

    /// Groups of coordinates with identical `(b, c)`, ordered by first index.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn case(&self) -> ModelCase {
        self.case
    }

    pub fn factor(&self, i: usize) -> AffineFactor {
        AffineFactor::new(self.b[i], self.c[i], self.m_law.clone())
    }

    pub fn factors(&self) -> Vec<AffineFactor> {
        (0..self.dim()).map(|i| self.factor(i)).collect()
    }

    /// Law of `Q_{t,i}` written as an affine factor.
    pub fn q_marginal(&self, i: usize) -> AffineFactor {
        match &self.q_law {
            QLaw::Gaussian(g) => AffineFactor::new(0.0, g.variance(i).sqrt(), ScalarDist::StandardNormal),
            QLaw::Constant(q) => AffineFactor::new(q[i], 0.0, ScalarDist::PointMass(0.0)),
            QLaw::Independent(v) => AffineFactor::new(0.0, 1.0, v[i].clone()),
        }
    }

    pub fn log_moments(&self) -> Result<Vec<f64>> {
        self.factors().iter().map(|f| f.log_moment().map(|e| e.value)).collect()
    }

    /// `((b_i + c_i m) x_i + q_i)_i`.
    pub fn step(&self, x: &[f64], m: f64, q: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.apply(&mut out, m, q);
        out
    }

    #[inline]
    pub(crate) fn apply(&self, x: &mut [f64], m: f64, q: &[f64]) {
        for i in 0..x.len() {
            x[i] = (self.b[i] + self.c[i] * m) * x[i] + q[i];
        }
    }
}

/// Partition of `0..d` by exact `(b, c)` equality, blocks ordered by first index.
pub fn coefficient_blocks(b: &[f64], c: &[f64]) -> Vec<Vec<usize>> {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for i in 0..b.len() {
        match blocks.iter_mut().find(|blk| b[blk[0]] == b[i] && c[blk[0]] == c[i]) {
            Some(blk) => blk.push(i),
            None => blocks.push(vec![i]),
        }
    }
    blocks
}
