//! The bivariate simulation study: six reference models and the pipeline
//! that turns one long trajectory into spectral and marginal summaries.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write;

use crate::config::ModelSpec;
use crate::diagnostics::{default_hill_k, joint_curve_csv, JointExceedance, MarginalTailSink, MarginalTails};
use crate::engine::{Dynamics, TrajectoryStream, DEFAULT_BURN_IN, DEFAULT_CHUNK};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::models::{ccc_second_coefficient, BlockStructure, Simulator};
use crate::svg;
use crate::tail_index::TailIndexProfile;
use crate::vsrv::{angular_histogram, block_mass, AngularHistogram, BlockMass, ExceedanceSet, ExceedanceSink};

pub const FIGURES: std::ops::RangeInclusive<u8> = 1..=6;
pub const DEFAULT_TAIL: f64 = 1e-5;
pub const DEFAULT_JOINT_GRID: [f64; 4] = [0.99, 0.999, 0.9999, 0.99999];

const BEKK_CORRELATION: f64 = 0.9;
const CCC_CORRELATION: f64 = 0.5;
const CCC_A: [f64; 2] = [0.2, 0.1];
const CCC_B: [f64; 2] = [0.1, 0.1];

fn check_figure(which: u8) -> Result<()> {
    if FIGURES.contains(&which) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "figure {which} does not exist; choose 1 to 6"
        )))
    }
}

/// Reference model behind figure `which`: 1 and 2 are diagonal BEKK with
/// shock correlation 0.9, 3 and 4 the fully correlated CCC-GARCH, 5 and 6
/// the CCC-GARCH with shock correlation 0.5. Odd figures have distinct
/// tail indices, even ones equal coefficients.
pub fn figure_spec(which: u8) -> Result<ModelSpec> {
    check_figure(which)?;
    let r = |rho: f64| vec![1.0, rho, rho, 1.0];
    let c_ccc = |distinct: bool| vec![0.9, if distinct { ccc_second_coefficient() } else { 0.9 }];
    let (a, b) = (CCC_A.to_vec(), CCC_B.to_vec());
    Ok(match which {
        1 => ModelSpec::Bekk {
            c: vec![1.0, (1.0f64 / 3.0).powf(0.25)],
            sigma: r(BEKK_CORRELATION),
        },
        2 => ModelSpec::Bekk {
            c: vec![1.0, 1.0],
            sigma: r(BEKK_CORRELATION),
        },
        3 | 4 => ModelSpec::Ccc {
            a,
            b,
            c: c_ccc(which == 3),
        },
        _ => ModelSpec::CccCorrelated {
            a,
            b,
            c: c_ccc(which == 5),
            correlation: r(CCC_CORRELATION),
        },
    })
}

pub fn figure_model(which: u8) -> Result<Simulator> {
    figure_spec(which)?.build()
}

pub fn figure_title(which: u8) -> String {
    match which {
        1 => "BEKK-ARCH, c = (1, 3^-1/4)".into(),
        2 => "BEKK-ARCH, c = (1, 1)".into(),
        3 => "CCC-GARCH, fully correlated, distinct indices".into(),
        4 => "CCC-GARCH, fully correlated, c = (0.9, 0.9)".into(),
        5 => "CCC-GARCH, correlation 0.5, distinct indices".into(),
        6 => "CCC-GARCH, correlation 0.5, c = (0.9, 0.9)".into(),
        _ => format!("figure {which}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyOptions {
    pub length: u64,
    pub seed: u64,
    pub burn_in: u64,
    /// Tail probability of the radius threshold.
    pub tail: f64,
    pub bins: usize,
    pub absolute: bool,
    pub exec: Execution,
    pub chunk_size: u64,
    /// Order statistics per Hill estimate; defaults to `default_hill_k(length)`.
    pub hill_k: Option<usize>,
    pub joint_grid: Vec<f64>,
    /// Forward steps kept after each exceedance.
    pub horizon: usize,
    pub force: bool,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            length: 10_000_000,
            seed: 0,
            burn_in: DEFAULT_BURN_IN,
            tail: DEFAULT_TAIL,
            bins: crate::vsrv::DEFAULT_BINS,
            absolute: true,
            exec: Execution::default(),
            chunk_size: DEFAULT_CHUNK,
            hill_k: None,
            joint_grid: DEFAULT_JOINT_GRID.to_vec(),
            horizon: 1,
            force: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    pub profile: TailIndexProfile,
    pub structure: BlockStructure,
    pub exceedances: ExceedanceSet,
    pub histogram: AngularHistogram,
    pub marginals: MarginalTails,
    pub hill_k: usize,
    pub hill: Vec<f64>,
    /// Joint exceedance of coordinates 0 and 1; empty for `d = 1`.
    pub joint: Vec<JointExceedance>,
    pub block_mass: BlockMass,
}

/// Simulates `sim` once and computes every summary of the study.
pub fn run_study(sim: &Simulator, opts: &StudyOptions) -> Result<StudyOutput> {
    let profile = sim.profile()?;
    let structure = sim.block_structure(&profile)?;
    let d = sim.dim();
    let hill_k = opts.hill_k.unwrap_or_else(|| default_hill_k(opts.length));
    let grid: Vec<f64> = if d >= 2 { opts.joint_grid.clone() } else { Vec::new() };

    let exceed = ExceedanceSink::new(profile.alpha.clone(), 1.0 - opts.tail, opts.horizon, opts.length)?;
    let marg = MarginalTailSink::for_quantiles(d, opts.length, &grid, hill_k);
    let mut sinks = (exceed, marg);
    TrajectoryStream::new(sim, opts.seed, opts.length)
        .burn_in(opts.burn_in)
        .chunk_size(opts.chunk_size)
        .force(opts.force)
        .simulate(&mut sinks, opts.exec)?;
    let (exceed, marg) = sinks;
    let exceedances = exceed.finish()?;
    let marginals = marg.finish();

    let histogram = angular_histogram(&exceedances, opts.bins, opts.absolute)?;
    let hill = (0..d).map(|i| marginals.hill(i, hill_k)).collect::<Result<Vec<_>>>()?;
    let joint = if d >= 2 {
        marginals.joint_exceedance_curve(0, 1, &grid)?
    } else {
        Vec::new()
    };
    let block_mass = block_mass(&exceedances, &structure.blocks)?;
    Ok(StudyOutput {
        profile,
        structure,
        exceedances,
        histogram,
        marginals,
        hill_k,
        hill,
        joint,
        block_mass,
    })
}

pub fn run_figure(which: u8, opts: &StudyOptions) -> Result<StudyOutput> {
    run_study(&figure_model(which)?, opts)
}

impl StudyOutput {
    pub fn histogram_csv(&self) -> String {
        self.histogram.to_csv()
    }

    pub fn exceedances_csv(&self) -> String {
        self.exceedances.to_csv()
    }

    pub fn joint_csv(&self) -> String {
        joint_curve_csv(&self.joint)
    }

    /// Long format `metric,key,value`.
    pub fn diagnostics_csv(&self) -> String {
        let mut out = String::from("metric,key,value\n");
        let mut row = |m: &str, k: &dyn std::fmt::Display, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{m},{k},{v}");
        };
        for (i, a) in self.profile.alpha.iter().enumerate() {
            row("alpha", &i, a);
        }
        row("threshold", &"radius", &self.exceedances.threshold);
        row("exceedances", &"count", &self.exceedances.len());
        row("hill_k", &"k", &self.hill_k);
        for (i, h) in self.hill.iter().enumerate() {
            row("hill", &i, h);
        }
        for (l, m) in self.block_mass.mass.iter().enumerate() {
            let coords: Vec<String> = self.structure.blocks[l].iter().map(|i| i.to_string()).collect();
            row("block_mass", &coords.join(" "), m);
        }
        row("block_leakage", &"mean", &self.block_mass.leakage);
        for p in &self.joint {
            row("joint_scaled", &p.quantile, &p.joint_scaled);
            row("conditional", &p.quantile, &p.conditional);
            row("joint_count", &p.quantile, &p.count_joint);
        }
        out
    }

    pub fn histogram_svg(&self, title: &str) -> String {
        let ticks: Vec<(f64, &str)> = if self.histogram.absolute {
            vec![(0.0, "0"), (FRAC_PI_4, "pi/4"), (FRAC_PI_2, "pi/2")]
        } else {
            vec![(-FRAC_PI_2, "-pi/2"), (0.0, "0"), (FRAC_PI_2, "pi/2")]
        };
        svg::bar_chart(title, "angle", &self.histogram.edges, &self.histogram.mass, &ticks)
    }

    pub fn joint_svg(&self, title: &str) -> String {
        let pts: Vec<(f64, f64)> = self.joint.iter().map(|p| (p.u, p.conditional)).collect();
        svg::log_x_line_chart(title, "u = 1/(1-q)", "P(X_2 > t_2 | X_1 > t_1)", &pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_indices() {
        let want = [(2.0, 4.0), (2.0, 2.0), (1.0, 2.0), (1.0, 1.0), (1.0, 2.0), (1.0, 1.0)];
        for (k, (a1, a2)) in FIGURES.zip(want) {
            let p = figure_model(k).unwrap().profile().unwrap();
            assert!(
                (p.alpha[0] - a1).abs() < 1e-4 && (p.alpha[1] - a2).abs() < 1e-4,
                "figure {k}: {:?}",
                p.alpha
            );
        }
        assert!(figure_model(0).is_err());
        assert!(figure_model(7).is_err());
    }

    #[test]
    fn correlated_ccc_has_singleton_blocks() {
        let s = figure_model(6).unwrap();
        let st = s.block_structure(&s.profile().unwrap()).unwrap();
        assert_eq!(st.blocks, vec![vec![0], vec![1]]);
        let s = figure_model(4).unwrap();
        let st = s.block_structure(&s.profile().unwrap()).unwrap();
        assert_eq!(st.blocks, vec![vec![0, 1]]);
    }

    #[test]
    fn small_study_runs() {
        let opts = StudyOptions {
            length: 200_000,
            tail: 1e-3,
            chunk_size: 50_000,
            ..Default::default()
        };
        let out = run_figure(4, &opts).unwrap();
        assert_eq!(out.exceedances.len(), 200);
        assert!((out.histogram.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(out.joint.len(), 4);
        assert!(out.diagnostics_csv().lines().count() > 10);
        assert!(out.histogram_svg("t").contains("<rect"));
    }

    #[test]
    fn too_short_run_is_reported() {
        let opts = StudyOptions {
            length: 1_000,
            ..Default::default()
        };
        assert!(matches!(
            run_figure(1, &opts),
            Err(Error::InsufficientExceedances { .. })
        ));
    }
}
