//! TOML model files.
//!
//! ```toml
//! [model]
//! seed = 7
//! length = 10000000
//! burn_in = 10000
//!
//! [bekk]
//! c = [1.0, 0.7598356856515925]
//! sigma = [1.0, 0.9, 0.9, 1.0]
//! ```
//!
//! A file describes exactly one model: a `[bekk]` section, a `[ccc]` section
//! (with an optional shock correlation `sigma`), or the generic keys
//! `b, c, m_dist, q_law` (plus `a` or `sigma`) directly under `[model]`.

use serde::{Deserialize, Serialize};

use crate::distributions::ScalarDist;
use crate::engine::{DiagSREModel, GaussianVector, QLaw, DEFAULT_BURN_IN};
use crate::error::{Error, Result};
use crate::models::{build_bekk, build_ccc_degenerate, build_ccc_general, Simulator};

pub const DEFAULT_LENGTH: u64 = 10_000_000;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    model: RawModel,
    bekk: Option<RawBekk>,
    ccc: Option<RawCcc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    d: Option<usize>,
    seed: Option<u64>,
    length: Option<u64>,
    burn_in: Option<u64>,
    b: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
    a: Option<Vec<f64>>,
    sigma: Option<Vec<f64>>,
    m_dist: Option<String>,
    m_point: Option<f64>,
    m_grid: Option<Vec<[f64; 2]>>,
    q_law: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBekk {
    c: Vec<f64>,
    sigma: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCcc {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    sigma: Option<Vec<f64>>,
}

/// Law of `M` as written in a model file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MLawSpec {
    Normal,
    Chi2,
    Point { value: f64 },
    Tabulated { grid: Vec<[f64; 2]> },
}

impl MLawSpec {
    pub fn build(&self) -> Result<ScalarDist> {
        match self {
            MLawSpec::Normal => Ok(ScalarDist::StandardNormal),
            MLawSpec::Chi2 => Ok(ScalarDist::ChiSquare1),
            MLawSpec::Point { value } => ScalarDist::point_mass(*value),
            MLawSpec::Tabulated { grid } => {
                let pairs: Vec<(f64, f64)> = grid.iter().map(|p| (p[0], p[1])).collect();
                ScalarDist::tabulated(&pairs)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Generic {
        b: Vec<f64>,
        c: Vec<f64>,
        m: MLawSpec,
        q: QSpec,
    },
    Bekk {
        c: Vec<f64>,
        sigma: Vec<f64>,
    },
    Ccc {
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
    },
    CccCorrelated {
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
        correlation: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QSpec {
    Gaussian { sigma: Vec<f64> },
    Constant { a: Vec<f64> },
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match self {
            ModelSpec::Generic { c, .. } | ModelSpec::Bekk { c, .. } => c.len(),
            ModelSpec::Ccc { c, .. } | ModelSpec::CccCorrelated { c, .. } => c.len(),
        }
    }

    /// Builds and validates the model.
    pub fn build(&self) -> Result<Simulator> {
        match self {
            ModelSpec::Generic { b, c, m, q } => {
                let q_law = match q {
                    QSpec::Gaussian { sigma } => QLaw::Gaussian(GaussianVector::new(c.len(), sigma.clone())?),
                    QSpec::Constant { a } => QLaw::Constant(a.clone()),
                };
                Ok(Simulator::Diag(DiagSREModel::new(
                    b.clone(),
                    c.clone(),
                    m.build()?,
                    q_law,
                )?))
            }
            ModelSpec::Bekk { c, sigma } => Ok(Simulator::Diag(build_bekk(c, sigma)?)),
            ModelSpec::Ccc { a, b, c } => Ok(Simulator::Diag(build_ccc_degenerate(a, b, c)?)),
            ModelSpec::CccCorrelated { a, b, c, correlation } => {
                Ok(Simulator::CccGeneral(build_ccc_general(a, b, c, correlation)?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSettings {
    pub seed: u64,
    pub length: u64,
    pub burn_in: u64,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            seed: 0,
            length: DEFAULT_LENGTH,
            burn_in: DEFAULT_BURN_IN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub run: RunSettings,
    pub model: ModelSpec,
}

fn missing(section: &str, key: &str) -> Error {
    Error::Config(format!("missing key `{key}` in [{section}]"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        let m = raw.model;
        let run = RunSettings {
            seed: m.seed.unwrap_or(0),
            length: m.length.unwrap_or(DEFAULT_LENGTH),
            burn_in: m.burn_in.unwrap_or(DEFAULT_BURN_IN),
        };
        let generic_keys = m.b.is_some()
            || m.c.is_some()
            || m.a.is_some()
            || m.sigma.is_some()
            || m.m_dist.is_some()
            || m.q_law.is_some();
        let sections = raw.bekk.is_some() as u8 + raw.ccc.is_some() as u8 + generic_keys as u8;
        if sections == 0 {
            return Err(Error::Config(
                "no model given: add [bekk], [ccc] or model keys under [model]".into(),
            ));
        }
        if sections > 1 {
            return Err(Error::Config("more than one model given".into()));
        }
        let model = if let Some(b) = raw.bekk {
            ModelSpec::Bekk { c: b.c, sigma: b.sigma }
        } else if let Some(c) = raw.ccc {
            match c.sigma {
                Some(correlation) => ModelSpec::CccCorrelated {
                    a: c.a,
                    b: c.b,
                    c: c.c,
                    correlation,
                },
                None => ModelSpec::Ccc { a: c.a, b: c.b, c: c.c },
            }
        } else {
            let b = m.b.ok_or_else(|| missing("model", "b"))?;
            let c = m.c.ok_or_else(|| missing("model", "c"))?;
            let law = match m.m_dist.as_deref().ok_or_else(|| missing("model", "m_dist"))? {
                "normal" => MLawSpec::Normal,
                "chi2" => MLawSpec::Chi2,
                "point" => MLawSpec::Point {
                    value: m.m_point.ok_or_else(|| missing("model", "m_point"))?,
                },
                "tabulated" => MLawSpec::Tabulated {
                    grid: m.m_grid.ok_or_else(|| missing("model", "m_grid"))?,
                },
                other => return Err(Error::Config(format!("unknown m_dist `{other}`"))),
            };
            let q = match m.q_law.as_deref().ok_or_else(|| missing("model", "q_law"))? {
                "gaussian" => QSpec::Gaussian {
                    sigma: m.sigma.ok_or_else(|| missing("model", "sigma"))?,
                },
                "constant" => QSpec::Constant {
                    a: m.a.ok_or_else(|| missing("model", "a"))?,
                },
                other => return Err(Error::Config(format!("unknown q_law `{other}`"))),
            };
            ModelSpec::Generic { b, c, m: law, q }
        };
        if let Some(d) = m.d {
            if d != model.dim() {
                return Err(Error::Config(format!(
                    "d = {d} but the coefficients have length {}",
                    model.dim()
                )));
            }
        }
        Ok(Config { run, model })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical TOML rendering, stable across equivalent input files.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bekk_file() {
        let c =
            Config::parse("[model]\nseed = 3\nlength = 100\n[bekk]\nc = [1.0, 0.5]\nsigma = [1.0, 0.9, 0.9, 1.0]\n")
                .unwrap();
        assert_eq!(
            c.run,
            RunSettings {
                seed: 3,
                length: 100,
                burn_in: DEFAULT_BURN_IN
            }
        );
        assert!(matches!(c.model.build().unwrap(), Simulator::Diag(_)));
    }

    #[test]
    fn ccc_files() {
        let c = Config::parse("[ccc]\na = [0.2, 0.1]\nb = [0.1, 0.1]\nc = [0.9, 0.9]\n").unwrap();
        assert!(matches!(c.model, ModelSpec::Ccc { .. }));
        let c =
            Config::parse("[ccc]\na = [0.2, 0.1]\nb = [0.1, 0.1]\nc = [0.9, 0.9]\nsigma = [1, 0.5, 0.5, 1]\n").unwrap();
        assert!(matches!(c.model.build().unwrap(), Simulator::CccGeneral(_)));
    }

    #[test]
    fn generic_file() {
        let text = "[model]\nd = 1\nb = [0.0]\nc = [0.5]\nm_dist = \"point\"\nm_point = 1.0\nq_law = \"constant\"\na = [1.0]\n";
        let c = Config::parse(text).unwrap();
        assert!(c.model.build().is_ok());
    }

    #[test]
    fn missing_key_is_named() {
        let e = Config::parse("[bekk]\nsigma = [1.0]\n").unwrap_err().to_string();
        assert!(e.contains("`c`"), "{e}");
        let e = Config::parse("[model]\nb = [0.0]\nm_dist = \"normal\"\nq_law = \"gaussian\"\nsigma = [1.0]\n")
            .unwrap_err()
            .to_string();
        assert!(e.contains("`c`"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::parse("[bekk]\nc = [1.0]\nsigma = [1.0]\nrho = 0.5\n").is_err());
        assert!(Config::parse("[other]\nx = 1\n").is_err());
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = Config::parse("[bekk]\nc = [1.0]\nsigma = [1.0]\n").unwrap();
        let b = Config::parse("[bekk]\nsigma = [ 1.0 ]\n\n\nc=[1.0]\n[model]\nseed=0\n").unwrap();
        assert_eq!(a.canonical(), b.canonical());
    }
}
