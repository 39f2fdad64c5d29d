use std::fmt::Write;
use std::path::Path;

use diagsre::config::{Config, ModelSpec, RunSettings};
use diagsre::diagnostics::{
    first_passage, joint_curve_csv, stationarity_check, tilted_drift, FirstPassageConfig, JointExceedance,
    MarginalTailSink, StationarityReport, TiltedDriftPair,
};
use diagsre::engine::rng::replica_rng;
use diagsre::engine::{DumpSink, Dynamics, TrajectoryStream, DEFAULT_CHUNK};
use diagsre::error::{Error, Result};
use diagsre::exec::Execution;
use diagsre::study::{figure_spec, figure_title, run_study, StudyOptions};
use diagsre::svg;
use diagsre::tail_index::{validate_assumptions, Verdict};
use diagsre::vsrv::{angular_histogram, ExceedanceSink};
use serde::Serialize;

use crate::manifest::{model_hash, RunManifest, RunSpec};
use crate::RunArgs;

/// Longest trajectory `--dump` will write.
pub const DUMP_MAX_STEPS: u64 = 1_000_000;
/// Stream offset of the drift Monte Carlo, clear of the trajectory streams.
const DRIFT_STREAM: u64 = 1 << 62;

fn load(path: &Path) -> Result<Config> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Config::parse(&text)
}

struct Resolved {
    settings: RunSettings,
    exec: Execution,
    absolute: bool,
}

fn resolve(run: &RunArgs, base: RunSettings) -> Result<Resolved> {
    if !(run.quantile > 0.0 && run.quantile < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "--quantile {} outside (0, 1)",
            run.quantile
        )));
    }
    if run.bins == 0 {
        return Err(Error::InvalidArgument("--bins must be positive".into()));
    }
    Ok(Resolved {
        settings: RunSettings {
            seed: run.seed.unwrap_or(base.seed),
            length: run.length.unwrap_or(base.length),
            burn_in: run.burn_in.unwrap_or(base.burn_in),
        },
        exec: Execution::from_workers(run.workers),
        absolute: !run.signed,
    })
}

fn manifest(
    command: &str,
    config: Option<&Path>,
    model: &ModelSpec,
    run: &RunArgs,
    r: &Resolved,
    extra: Vec<String>,
) -> RunManifest {
    let spec = RunSpec {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config_path: config.map(|p| p.display().to_string()),
        model_hash: model_hash(model),
        seed: r.settings.seed,
        length: r.settings.length,
        burn_in: r.settings.burn_in,
        tail: run.quantile,
        bins: run.bins,
        absolute: r.absolute,
        force: run.force,
        extra,
        model: model.clone(),
    };
    RunManifest::new(spec, &run.outdir, run.workers)
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn alpha(config: &Path) -> Result<()> {
    let cfg = load(config)?;
    let sim = cfg.model.build()?;
    let profile = sim.profile()?;
    println!("alpha = {}", list(&profile.alpha));
    println!("residual = {}", list(&profile.residual));
    println!("log_moment = {}", list(&profile.log_moment));
    let report = validate_assumptions(&sim.diagonal()?, &profile);
    for (a, v) in &report.verdicts {
        match v {
            Verdict::Pass => println!("{a}: pass"),
            Verdict::Fail(why) | Verdict::Assumed(why) => println!("{a}: {} ({why})", v.label()),
        }
    }
    let blocks = sim.block_structure(&profile)?;
    for w in &blocks.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

pub fn simulate(config: &Path, run: &RunArgs, dump: bool, horizon: usize) -> Result<()> {
    let cfg = load(config)?;
    let r = resolve(run, cfg.run.clone())?;
    let sim = cfg.model.build()?;
    let profile = sim.profile()?;
    let d = sim.dim();
    let n = r.settings.length;
    if dump && n > DUMP_MAX_STEPS {
        return Err(Error::InvalidArgument(format!(
            "--dump is limited to {DUMP_MAX_STEPS} steps"
        )));
    }
    let hill_k = diagsre::diagnostics::default_hill_k(n);
    let extra = vec![
        format!("horizon={horizon}"),
        format!("dump={dump}"),
        format!("hill_k={hill_k}"),
    ];
    let m = manifest("simulate", Some(config), &cfg.model, run, &r, extra);
    m.write()?;

    let exceed = ExceedanceSink::new(profile.alpha.clone(), 1.0 - run.quantile, horizon, n)?;
    let marg = MarginalTailSink::for_quantiles(d, n, &[1.0 - run.quantile], hill_k);
    let raw = DumpSink::new(d, if dump { n as usize } else { 0 });
    let mut sinks = (exceed, marg, raw);
    TrajectoryStream::new(&sim, r.settings.seed, n)
        .burn_in(r.settings.burn_in)
        .chunk_size(DEFAULT_CHUNK)
        .force(run.force)
        .simulate(&mut sinks, r.exec)?;
    let (exceed, marg, raw) = sinks;
    let marginals = marg.finish();
    let set = exceed.finish()?;

    let mut tails = String::from("coordinate,rank,value,time_index\n");
    for (i, top) in marginals.top.iter().enumerate() {
        for (rank, (v, t)) in top.iter().enumerate() {
            let _ = writeln!(tails, "{i},{},{v},{t}", rank + 1);
        }
    }
    let mut summary = String::from("metric,key,value\n");
    for i in 0..d {
        let _ = writeln!(summary, "alpha,{i},{}", profile.alpha[i]);
        if let Ok(h) = marginals.hill(i, hill_k) {
            let _ = writeln!(summary, "hill,{i},{h}");
        }
    }
    if dump {
        let mut bytes = Vec::new();
        raw.write_to(&mut bytes)?;
        m.write_plain("trajectory.bin", &bytes)?;
    }
    m.write_tagged("marginal_tails.csv", &tails)?;
    m.write_tagged("summary.csv", &summary)?;
    m.write_tagged("exceedances.csv", &set.to_csv())?;
    if d == 2 {
        let h = angular_histogram(&set, run.bins, r.absolute)?;
        m.write_tagged("histogram.csv", &h.to_csv())?;
    }
    println!("alpha = {}", list(&profile.alpha));
    println!("exceedances = {} above radius {}", set.len(), set.threshold);
    println!("wrote {}", run.outdir.display());
    Ok(())
}

pub fn figures(which: u8, run: &RunArgs) -> Result<()> {
    let spec = figure_spec(which)?;
    let r = resolve(run, RunSettings::default())?;
    let opts = StudyOptions {
        length: r.settings.length,
        seed: r.settings.seed,
        burn_in: r.settings.burn_in,
        tail: run.quantile,
        bins: run.bins,
        absolute: r.absolute,
        exec: r.exec,
        force: run.force,
        ..StudyOptions::default()
    };
    let extra = vec![format!("figure={which}"), format!("horizon={}", opts.horizon)];
    let m = manifest("figures", None, &spec, run, &r, extra);
    m.write()?;
    let out = run_study(&spec.build()?, &opts)?;

    let stem = format!("fig{which}");
    let title = format!("Figure {which}: {}", figure_title(which));
    m.write_tagged(&format!("{stem}_histogram.csv"), &out.histogram_csv())?;
    m.write_tagged(&format!("{stem}_diagnostics.csv"), &out.diagnostics_csv())?;
    m.write_tagged(&format!("{stem}_joint.csv"), &out.joint_csv())?;
    m.write_tagged(&format!("{stem}_exceedances.csv"), &out.exceedances_csv())?;
    m.write_plain(&format!("{stem}_histogram.svg"), out.histogram_svg(&title).as_bytes())?;
    m.write_plain(&format!("{stem}_joint.svg"), out.joint_svg(&title).as_bytes())?;

    println!("{title}");
    println!("alpha = {}", list(&out.profile.alpha));
    println!(
        "exceedances = {} above radius {}",
        out.exceedances.len(),
        out.exceedances.threshold
    );
    if let Some(targets) = out.structure.predicted_angles() {
        println!(
            "mass within 0.1 of predicted angles = {}",
            out.histogram.mass_near(&targets, 0.1)
        );
    }
    println!("hill (k = {}) = {}", out.hill_k, list(&out.hill));
    for p in &out.joint {
        println!("P(X_2 > t | X_1 > t) at q = {}: {}", p.quantile, p.conditional);
    }
    println!("wrote {}", run.outdir.display());
    Ok(())
}

pub struct DiagnoseOptions {
    pub pair: (usize, usize),
    pub grid: Vec<f64>,
    pub mc_samples: usize,
    pub first_passage: bool,
    pub replicas: usize,
    pub window_c: f64,
}

#[derive(Serialize)]
struct PassageSummary {
    u: f64,
    center: f64,
    window: f64,
    window_violation_rate: f64,
    mean_drift: f64,
    replicas: usize,
}

#[derive(Serialize)]
struct Verdicts {
    stationary: bool,
    stationarity_criteria_agree: bool,
    assumptions_hold: bool,
    jensen_gap_negative: bool,
    conditional_decreasing: bool,
    window_violations_decreasing: Option<bool>,
}

#[derive(Serialize)]
struct AssumptionEntry {
    name: String,
    verdict: &'static str,
    detail: Option<String>,
}

#[derive(Serialize)]
struct DiagnosticsReport {
    alpha: Vec<f64>,
    pair: (usize, usize),
    /// Coordinate of the pair with the larger tail index.
    first: usize,
    stationarity: StationarityReport,
    assumptions: Vec<AssumptionEntry>,
    drift: TiltedDriftPair,
    joint: Vec<JointExceedance>,
    first_passage: Option<Vec<PassageSummary>>,
    verdicts: Verdicts,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

pub fn diagnose(config: &Path, run: &RunArgs, opts: &DiagnoseOptions) -> Result<()> {
    let cfg = load(config)?;
    let r = resolve(run, cfg.run.clone())?;
    let sim = cfg.model.build()?;
    let profile = sim.profile()?;
    let d = sim.dim();
    let (i, j) = opts.pair;
    if i >= d || j >= d || i == j {
        return Err(Error::InvalidArgument(format!(
            "--pair {i},{j} needs two distinct coordinates below {d}"
        )));
    }
    if opts.grid.is_empty() || opts.grid.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(Error::InvalidArgument("--grid needs quantiles in (0, 1)".into()));
    }
    let (first, other) = if profile.alpha[j] > profile.alpha[i] {
        (j, i)
    } else {
        (i, j)
    };
    let extra = vec![
        format!("pair={i},{j}"),
        format!("grid={}", list(&opts.grid)),
        format!("mc_samples={}", opts.mc_samples),
        format!("first_passage={}", opts.first_passage),
        format!("replicas={}", opts.replicas),
        format!("window_c={}", opts.window_c),
    ];
    let m = manifest("diagnose", Some(config), &cfg.model, run, &r, extra);
    m.write()?;

    let diag = sim.diagonal()?;
    let stationarity = stationarity_check(&diag)?;
    let assumptions = validate_assumptions(&diag, &profile);
    let factors = sim.factors();
    let mut rng = replica_rng(r.settings.seed, DRIFT_STREAM);
    let drift = tilted_drift(
        &factors[first],
        &factors[other],
        profile.alpha[first],
        opts.mc_samples,
        &mut rng,
    )?;

    let n = r.settings.length;
    let mut sink = MarginalTailSink::for_quantiles(d, n, &opts.grid, 0);
    TrajectoryStream::new(&sim, r.settings.seed, n)
        .burn_in(r.settings.burn_in)
        .chunk_size(DEFAULT_CHUNK)
        .force(run.force)
        .simulate(&mut sink, r.exec)?;
    let joint = sink.finish().joint_exceedance_curve(first, other, &opts.grid)?;

    let passage = if opts.first_passage {
        let cfg = FirstPassageConfig {
            replicas: opts.replicas,
            window_c: opts.window_c,
            seed: r.settings.seed,
            ..FirstPassageConfig::default()
        };
        let stats = first_passage(
            &factors[first],
            profile.alpha[first],
            &diag.q_marginal(first),
            &cfg,
            r.exec,
        )?;
        Some(
            stats
                .iter()
                .map(|s| PassageSummary {
                    u: s.u,
                    center: s.center,
                    window: s.window,
                    window_violation_rate: s.window_violation_rate,
                    mean_drift: s.mean_drift(),
                    replicas: s.passage_times.len(),
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let conditional: Vec<f64> = joint.iter().map(|p| p.conditional).collect();
    let verdicts = Verdicts {
        stationary: stationarity.stationary(),
        stationarity_criteria_agree: stationarity.consistent(),
        assumptions_hold: assumptions.all_pass(),
        jensen_gap_negative: drift.gap_is_negative(),
        conditional_decreasing: strictly_decreasing(&conditional),
        window_violations_decreasing: passage
            .as_ref()
            .map(|p| strictly_decreasing(&p.iter().map(|s| s.window_violation_rate).collect::<Vec<_>>())),
    };
    let report = DiagnosticsReport {
        alpha: profile.alpha.clone(),
        pair: (i, j),
        first,
        stationarity,
        assumptions: assumptions
            .verdicts
            .iter()
            .map(|(a, v)| AssumptionEntry {
                name: a.to_string(),
                verdict: v.label(),
                detail: match v {
                    Verdict::Pass => None,
                    Verdict::Fail(s) | Verdict::Assumed(s) => Some(s.clone()),
                },
            })
            .collect(),
        drift,
        joint,
        first_passage: passage,
        verdicts,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    m.write_plain("report.json", format!("{json}\n").as_bytes())?;
    m.write_tagged("joint.csv", &joint_curve_csv(&report.joint))?;
    let pts: Vec<(f64, f64)> = report.joint.iter().map(|p| (p.u, p.conditional)).collect();
    let title = format!("Conditional exceedance, coordinates {first} and {other}");
    m.write_plain(
        "joint.svg",
        svg::log_x_line_chart(&title, "u = 1/(1-q)", "conditional", &pts).as_bytes(),
    )?;

    println!("alpha = {}", list(&report.alpha));
    println!(
        "jensen gap = {} (99% MC interval {:?})",
        report.drift.jensen_gap,
        report.drift.ci()
    );
    for p in &report.joint {
        println!(
            "q = {}: conditional = {}, joint_scaled = {}",
            p.quantile, p.conditional, p.joint_scaled
        );
    }
    if let Some(ps) = &report.first_passage {
        for p in ps {
            println!("u = {}: window violation rate = {}", p.u, p.window_violation_rate);
        }
    }
    println!("wrote {}", run.outdir.display());
    Ok(())
}
