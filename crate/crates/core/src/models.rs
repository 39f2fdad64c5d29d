//! Named specializations (diagonal BEKK-ARCH(1), CCC-GARCH(1,1) volatility)
//! and the block structure that predicts the spectral support.

use serde::Serialize;

use crate::diagnostics::stationarity_check;
use crate::distributions::{AffineFactor, ScalarDist};
use crate::engine::rng::Noise;
use crate::engine::{worst, DiagSREModel, Dynamics, GaussianVector, QLaw};
use crate::error::{Error, Result};
use crate::tail_index::TailIndexProfile;

/// Tail indices closer than this across blocks trigger a warning.
const NEAR_TIE: f64 = 1e-3;

/// Diagonal BEKK-ARCH(1): `b = 0`, `M ~ N(0, 1)`, `Q ~ N(0, sigma)`.
pub fn build_bekk(c: &[f64], sigma: &[f64]) -> Result<DiagSREModel> {
    let d = c.len();
    if let Some(i) = c.iter().position(|&v| v == 0.0) {
        return Err(Error::InvalidModel(format!("c_{i} must be non-zero")));
    }
    let q = GaussianVector::new(d, sigma.to_vec())?;
    let model = DiagSREModel::new(vec![0.0; d], c.to_vec(), ScalarDist::StandardNormal, QLaw::Gaussian(q))?;
    let report = stationarity_check(&model)?;
    if let Some(i) = report
        .coordinates
        .iter()
        .position(|c| !c.stationary || c.closed_form_stationary == Some(false))
    {
        return Err(Error::StationarityViolated {
            coordinate: i,
            log_moment: report.coordinates[i].log_moment,
        });
    }
    TailIndexProfile::solve(&model)?;
    Ok(model)
}

/// Volatility recursion of the CCC-GARCH(1,1) model with a single shock:
/// `M = Z^2`, `Q = a`.
pub fn build_ccc_degenerate(a: &[f64], b: &[f64], c: &[f64]) -> Result<DiagSREModel> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    let model = DiagSREModel::new(
        b.to_vec(),
        c.to_vec(),
        ScalarDist::ChiSquare1,
        QLaw::Constant(a.to_vec()),
    )?;
    let profile = TailIndexProfile::solve(&model)?;
    check_ccc_ordering(b, c, &profile.alpha)?;
    Ok(model)
}

fn check_positive(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
        Some(i) => Err(Error::InvalidModel(format!("{name}_{i} must be positive"))),
        None => Ok(()),
    }
}

/// `c_j / c_i >= b_j / b_i` whenever `alpha_i > alpha_j`.
fn check_ccc_ordering(b: &[f64], c: &[f64], alpha: &[f64]) -> Result<()> {
    for i in 0..b.len() {
        for j in 0..b.len() {
            let distinct = b[i] != b[j] || c[i] != c[j];
            if distinct && alpha[i] > alpha[j] && c[j] / c[i] < b[j] / b[i] {
                return Err(Error::CaseOrderingViolated { higher: i, lower: j });
            }
        }
    }
    Ok(())
}

/// How a pair of blocks with `alpha_i > alpha_j` fits the two-coordinate
/// asymptotic independence conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PairCase {
    /// `b_i = b_j = 0`, `c_j > c_i > 0`.
    CaseI,
    /// `b_j >= b_i > 0`, `c_j > c_i > 0`, `c_j / c_i >= b_j / b_i`, `M > 0`.
    CaseII,
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockPair {
    /// Block with the larger tail index.
    pub higher: usize,
    pub lower: usize,
    pub case: PairCase,
}

/// Predicted support of the spectral component restricted to one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SupportPrediction {
    /// The whole max-norm sphere of the block's coordinates.
    FullSphere(Vec<usize>),
    /// A single direction in `R^d`.
    ConvexConeAtom(Vec<f64>),
    /// `±e_i` for the block's only coordinate.
    Axes(usize),
    /// No closed-form prediction for this innovation law.
    Unpredicted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockStructure {
    /// Coordinate groups with equal `(b, c)`, by decreasing tail index.
    pub blocks: Vec<Vec<usize>>,
    pub alpha: Vec<f64>,
    pub case_matrix: Vec<BlockPair>,
    pub predicted_support: Vec<SupportPrediction>,
    pub warnings: Vec<String>,
}

impl BlockStructure {
    /// Coordinates ordered so that the tail index decreases.
    pub fn permutation(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn all_supported(&self) -> bool {
        self.case_matrix.iter().all(|p| p.case != PairCase::Unsupported)
    }

    /// Predicted spectral angles `arctan(|t_1| / |t_2|)` for a bivariate model,
    /// when every block has a finite prediction.
    pub fn predicted_angles(&self) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        for p in &self.predicted_support {
            match p {
                SupportPrediction::Axes(i) => out.push(if *i == 0 { std::f64::consts::FRAC_PI_2 } else { 0.0 }),
                SupportPrediction::ConvexConeAtom(v) if v.len() == 2 => out.push(v[0].abs().atan2(v[1].abs())),
                _ => return None,
            }
        }
        Some(out)
    }
}

pub fn block_partition(model: &DiagSREModel, profile: &TailIndexProfile) -> Result<BlockStructure> {
    let d = model.dim();
    if profile.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            found: profile.dim(),
        });
    }
    let mut blocks: Vec<Vec<usize>> = model.blocks().to_vec();
    blocks.sort_by(|x, y| {
        profile.alpha[y[0]]
            .total_cmp(&profile.alpha[x[0]])
            .then(x[0].cmp(&y[0]))
    });
    let alpha: Vec<f64> = blocks.iter().map(|blk| profile.alpha[blk[0]]).collect();
    let (b, c) = (model.b(), model.c());
    let m_positive = model.m_law().is_positive();

    let mut case_matrix = Vec::new();
    let mut warnings = Vec::new();
    for l in 0..blocks.len() {
        for k in l + 1..blocks.len() {
            let (i, j) = (blocks[l][0], blocks[k][0]);
            if (alpha[l] - alpha[k]).abs() < NEAR_TIE {
                warnings.push(format!(
                    "blocks {l} and {k} have nearly equal tail indices {} and {}",
                    alpha[l], alpha[k]
                ));
            }
            let case = if !(alpha[l] > alpha[k]) {
                PairCase::Unsupported
            } else if b[i] == 0.0 && b[j] == 0.0 && c[j] > c[i] && c[i] > 0.0 {
                PairCase::CaseI
            } else if b[j] >= b[i]
                && b[i] > 0.0
                && c[j] > c[i]
                && c[i] > 0.0
                && c[j] / c[i] >= b[j] / b[i]
                && m_positive
            {
                PairCase::CaseII
            } else {
                PairCase::Unsupported
            };
            case_matrix.push(BlockPair {
                higher: l,
                lower: k,
                case,
            });
        }
    }

    let predicted_support = blocks
        .iter()
        .map(|blk| {
            if blk.len() == 1 {
                return SupportPrediction::Axes(blk[0]);
            }
            match model.q_law() {
                QLaw::Gaussian(_) => SupportPrediction::FullSphere(blk.clone()),
                QLaw::Constant(q) => {
                    let top = blk.iter().map(|&i| q[i].abs()).fold(0.0, f64::max);
                    let mut v = vec![0.0; d];
                    for &i in blk {
                        v[i] = q[i] / top;
                    }
                    SupportPrediction::ConvexConeAtom(v)
                }
                QLaw::Independent(_) => SupportPrediction::Unpredicted(blk.clone()),
            }
        })
        .collect();

    Ok(BlockStructure {
        blocks,
        alpha,
        case_matrix,
        predicted_support,
        warnings,
    })
}

/// CCC-GARCH(1,1) volatility with correlated shocks: coordinate `i` is driven
/// by its own `N_i^2`, where `N ~ N(0, R)` has unit variances.
///
/// The first standard normal of each step comes from the `M` stream and the
/// rest from the `Q` stream, so at full correlation this reproduces the
/// single-shock model draw for draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CccGeneral {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    shocks: GaussianVector,
}

pub fn build_ccc_general(a: &[f64], b: &[f64], c: &[f64], correlation: &[f64]) -> Result<CccGeneral> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    check_positive("c", c)?;
    let d = a.len();
    if b.len() != d || c.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: if b.len() != d { b.len() } else { c.len() },
        });
    }
    let shocks = GaussianVector::new(d, correlation.to_vec())?;
    if (0..d).any(|i| (shocks.variance(i) - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidModel(
            "shock correlation matrix must have a unit diagonal".into(),
        ));
    }
    let m = CccGeneral {
        a: a.to_vec(),
        b: b.to_vec(),
        c: c.to_vec(),
        shocks,
    };
    let (i, lm) = m.max_log_moment()?;
    if !(lm < 0.0) {
        return Err(Error::StationarityViolated {
            coordinate: i,
            log_moment: lm,
        });
    }
    Ok(m)
}

impl CccGeneral {
    /// Marginal factor `b_i + c_i N_i^2` with `N_i^2 ~ chi^2_1`.
    pub fn factor(&self, i: usize) -> AffineFactor {
        AffineFactor::new(self.b[i], self.c[i], ScalarDist::ChiSquare1)
    }

    pub fn factors(&self) -> Vec<AffineFactor> {
        (0..self.a.len()).map(|i| self.factor(i)).collect()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn correlation(&self) -> &[f64] {
        self.shocks.covariance()
    }

    pub fn profile(&self) -> Result<TailIndexProfile> {
        TailIndexProfile::from_factors(&self.factors(), crate::tail_index::DEFAULT_MAX_ALPHA)
    }
}

impl Dynamics for CccGeneral {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn max_log_moment(&self) -> Result<(usize, f64)> {
        worst(
            self.factors()
                .iter()
                .map(|f| f.log_moment().map(|e| e.value))
                .collect::<Result<_>>()?,
        )
    }

    #[inline]
    fn advance(&self, x: &mut [f64], noise: &mut Noise, scratch: &mut [f64]) {
        use rand::Rng;
        use rand_distr::StandardNormal;
        let d = self.a.len();
        let mut buf = [0.0f64; 16];
        let mut big = Vec::new();
        let z: &mut [f64] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            big.resize(d, 0.0);
            &mut big
        };
        z[0] = noise.m.sample(StandardNormal);
        for zi in z.iter_mut().skip(1) {
            *zi = noise.q.sample(StandardNormal);
        }
        self.shocks.transform(z, scratch);
        for i in 0..d {
            let n = scratch[i];
            x[i] = (self.b[i] + self.c[i] * (n * n)) * x[i] + self.a[i];
        }
    }
}

/// Any of the trajectory sources, behind one type.
#[derive(Debug, Clone, PartialEq)]
pub enum Simulator {
    Diag(DiagSREModel),
    CccGeneral(CccGeneral),
}

impl Simulator {
    pub fn profile(&self) -> Result<TailIndexProfile> {
        match self {
            Simulator::Diag(m) => TailIndexProfile::solve(m),
            Simulator::CccGeneral(m) => m.profile(),
        }
    }

    pub fn factors(&self) -> Vec<AffineFactor> {
        match self {
            Simulator::Diag(m) => m.factors(),
            Simulator::CccGeneral(m) => m.factors(),
        }
    }

    /// The single-shock model behind the simulator; for correlated CCC shocks
    /// this is the fully correlated counterpart with the same marginals.
    pub fn diagonal(&self) -> Result<DiagSREModel> {
        match self {
            Simulator::Diag(m) => Ok(m.clone()),
            Simulator::CccGeneral(m) => DiagSREModel::new(
                m.b.clone(),
                m.c.clone(),
                ScalarDist::ChiSquare1,
                QLaw::Constant(m.a.clone()),
            ),
        }
    }

    /// Block structure of the simulator. Correlated CCC shocks give every
    /// coordinate its own factor, so each coordinate is a block of its own
    /// and no support is predicted.
    pub fn block_structure(&self, profile: &TailIndexProfile) -> Result<BlockStructure> {
        let mut s = block_partition(&self.diagonal()?, profile)?;
        let Simulator::CccGeneral(m) = self else {
            return Ok(s);
        };
        let d = m.dim();
        if m.correlation().iter().all(|r| (r.abs() - 1.0).abs() < 1e-12) {
            return Ok(s);
        }
        let owner = |i: usize| s.blocks.iter().position(|blk| blk.contains(&i)).expect("partition");
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&x, &y| profile.alpha[y].total_cmp(&profile.alpha[x]).then(x.cmp(&y)));
        let mut case_matrix = Vec::new();
        for l in 0..d {
            for k in l + 1..d {
                let (bl, bk) = (owner(order[l]), owner(order[k]));
                let case = s
                    .case_matrix
                    .iter()
                    .find(|p| p.higher == bl && p.lower == bk)
                    .map_or(PairCase::Unsupported, |p| p.case);
                case_matrix.push(BlockPair {
                    higher: l,
                    lower: k,
                    case,
                });
            }
        }
        s.warnings
            .push("correlated shocks: the spectral support is not predicted".into());
        Ok(BlockStructure {
            alpha: order.iter().map(|&i| profile.alpha[i]).collect(),
            predicted_support: order.iter().map(|&i| SupportPrediction::Unpredicted(vec![i])).collect(),
            blocks: order.into_iter().map(|i| vec![i]).collect(),
            case_matrix,
            warnings: s.warnings,
        })
    }
}

impl Dynamics for Simulator {
    fn dim(&self) -> usize {
        match self {
            Simulator::Diag(m) => Dynamics::dim(m),
            Simulator::CccGeneral(m) => m.dim(),
        }
    }

    fn max_log_moment(&self) -> Result<(usize, f64)> {
        match self {
            Simulator::Diag(m) => m.max_log_moment(),
            Simulator::CccGeneral(m) => m.max_log_moment(),
        }
    }

    #[inline]
    fn advance(&self, x: &mut [f64], noise: &mut Noise, scratch: &mut [f64]) {
        match self {
            Simulator::Diag(m) => m.advance(x, noise, scratch),
            Simulator::CccGeneral(m) => m.advance(x, noise, scratch),
        }
    }
}

/// `c_2` of the two-index CCC example: the positive root of `3c^2 + 0.2c + 0.01 = 1`,
/// which makes `E(0.1 + c Z^2)^2 = 1`.
pub fn ccc_second_coefficient() -> f64 {
    (-0.2 + (0.04f64 + 12.0 * 0.99).sqrt()) / 6.0
}
