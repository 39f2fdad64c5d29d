use serde::Serialize;

use crate::distributions::ScalarDist;
use crate::engine::DiagSREModel;
use crate::error::Result;

/// Euler's constant to ten significant digits.
pub const EULER_GAMMA: f64 = 0.577_215_664_9;

/// Bound of the closed-form Gaussian criterion `c^2 < 2 e^gamma`.
pub fn bekk_bound() -> f64 {
    2.0 * EULER_GAMMA.exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateStationarity {
    pub log_moment: f64,
    pub stationary: bool,
    /// `c_i^2` when the coordinate is a Gaussian `c_i M` factor.
    pub closed_form_c2: Option<f64>,
    pub closed_form_stationary: Option<bool>,
    /// Both criteria agree (true when only one applies).
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityReport {
    pub coordinates: Vec<CoordinateStationarity>,
}

impl StationarityReport {
    pub fn stationary(&self) -> bool {
        self.coordinates.iter().all(|c| c.stationary)
    }

    pub fn consistent(&self) -> bool {
        self.coordinates.iter().all(|c| c.agree)
    }
}

/// `E log|b_i + c_i M| < 0` per coordinate, plus `c_i^2 < 2 e^gamma` when
/// `b_i = 0` and `M` is standard normal.
pub fn stationarity_check(model: &DiagSREModel) -> Result<StationarityReport> {
    let lms = model.log_moments()?;
    let gaussian = *model.m_law() == ScalarDist::StandardNormal;
    let coordinates = lms
        .into_iter()
        .enumerate()
        .map(|(i, lm)| {
            let stationary = lm < 0.0;
            let (c2, cf) = if gaussian && model.b()[i] == 0.0 {
                let c2 = model.c()[i] * model.c()[i];
                (Some(c2), Some(c2 < bekk_bound()))
            } else {
                (None, None)
            };
            CoordinateStationarity {
                log_moment: lm,
                stationary,
                closed_form_c2: c2,
                closed_form_stationary: cf,
                agree: cf.is_none_or(|v| v == stationary),
            }
        })
        .collect();
    Ok(StationarityReport { coordinates })
}
