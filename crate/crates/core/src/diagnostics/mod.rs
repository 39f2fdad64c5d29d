//! Numerical checks of the tail predictions: marginal indices, asymptotic
//! independence, tilted drifts, first passage and stationarity.

mod drift;
mod marginal;
mod passage;
mod stationarity;

pub use drift::{tilted_drift, tilted_log_mean, TiltedDriftPair, Z99};
pub use marginal::{default_hill_k, hill_estimator, joint_curve_csv, JointExceedance, MarginalTailSink, MarginalTails};
pub use passage::{
    first_passage, passage_once, window_width, FirstPassageConfig, FirstPassageStats, DEFAULT_REPLICAS,
    DEFAULT_WINDOW_C, PASSAGE_CAP,
};
pub use stationarity::{bekk_bound, stationarity_check, CoordinateStationarity, StationarityReport, EULER_GAMMA};
