//! Acceptance run: every criterion prints one PASS/FAIL line, and the process
//! exits non-zero if any of them fails.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use diagsre::diagnostics::{first_passage, stationarity_check, tilted_drift, FirstPassageConfig};
use diagsre::distributions::{importance_weighted_means, AffineFactor, MeanEstimate, ScalarDist, TiltedSampler};
use diagsre::engine::{DiagSREModel, GaussianVector, QLaw, Sink};
use diagsre::exec::Execution;
use diagsre::models::{build_bekk, ccc_second_coefficient};
use diagsre::study::{figure_model, run_study, StudyOptions, StudyOutput};
use diagsre::tail_index::{solve_alpha, TailIndexProfile, DEFAULT_MAX_ALPHA};
use diagsre::vsrv::{spectral_recursion_check, tail_count, vs_norm, ExceedanceSink};
use diagsre_validation::{rel, run, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const LENGTH: u64 = 10_000_000;
const SEED: u64 = 20_240_601;

fn fig1_c() -> [f64; 2] {
    [1.0, (1.0f64 / 3.0).powf(0.25)]
}

fn fig1_model() -> DiagSREModel {
    build_bekk(&fig1_c(), &[1.0, 0.9, 0.9, 1.0]).expect("figure 1 model")
}

fn study(which: u8) -> (StudyOutput, f64) {
    let opts = StudyOptions {
        length: LENGTH,
        seed: SEED,
        hill_k: Some(2000),
        joint_grid: vec![0.99, 0.999, 0.9999],
        ..StudyOptions::default()
    };
    let start = Instant::now();
    let out = run_study(&figure_model(which).expect("figure model"), &opts).expect("study");
    (out, start.elapsed().as_secs_f64())
}

fn c1_fig1_indices() -> (bool, String) {
    let start = Instant::now();
    let p = TailIndexProfile::solve(&fig1_model()).expect("solve");
    let t = start.elapsed().as_secs_f64();
    let (e1, e2) = ((p.alpha[0] - 2.0).abs(), (p.alpha[1] - 4.0).abs());
    (
        e1 < 1e-6 && e2 < 1e-6 && t < 1.0,
        format!("alpha = {:?}, errors ({e1:.1e}, {e2:.1e}), {t:.3}s", p.alpha),
    )
}

fn c2_ccc_indices() -> (bool, String) {
    let start = Instant::now();
    let a1 = solve_alpha(&AffineFactor::new(0.1, 0.9, ScalarDist::ChiSquare1), DEFAULT_MAX_ALPHA).expect("solve");
    let a2 = solve_alpha(
        &AffineFactor::new(0.1, ccc_second_coefficient(), ScalarDist::ChiSquare1),
        DEFAULT_MAX_ALPHA,
    )
    .expect("solve");
    let t = start.elapsed().as_secs_f64();
    let (e1, e2) = ((a1 - 1.0).abs(), (a2 - 2.0).abs());
    (
        e1 < 1e-9 && e2 < 1e-4 && t < 1.0,
        format!("alpha = ({a1}, {a2}), errors ({e1:.1e}, {e2:.1e}), {t:.3}s"),
    )
}

fn c3_jensen_gap() -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let normal = |c: f64| AffineFactor::new(0.0, c, ScalarDist::StandardNormal);
    let chi = |c: f64| AffineFactor::new(0.1, c, ScalarDist::ChiSquare1);
    let [c1, c2] = fig1_c();
    // the coordinate with the larger index plays the role of the first one
    let fig1 = tilted_drift(&normal(c2), &normal(c1), 4.0, 200_000, &mut rng).expect("fig 1 drift");
    let fig3 = tilted_drift(&chi(ccc_second_coefficient()), &chi(0.9), 2.0, 200_000, &mut rng).expect("fig 3 drift");
    let t = start.elapsed().as_secs_f64();
    let pass = fig1.gap_is_negative() && fig3.gap_is_negative() && t < 10.0;
    (
        pass,
        format!(
            "fig 1 gap {:.4} CI ({:.4}, {:.4}); fig 3 gap {:.4} CI ({:.4}, {:.4}); {t:.2}s",
            fig1.jensen_gap,
            fig1.ci().0,
            fig1.ci().1,
            fig3.jensen_gap,
            fig3.ci().0,
            fig3.ci().1
        ),
    )
}

fn c4_independence_decay(fig1: &StudyOutput, secs: f64) -> (bool, String) {
    let cond: Vec<f64> = fig1.joint.iter().map(|p| p.conditional).collect();
    let decreasing = cond.windows(2).all(|w| w[1] < w[0]);
    let last = *cond.last().expect("grid");
    (
        decreasing && last < 0.05 && secs < 60.0,
        format!(
            "conditional over (0.99, 0.999, 0.9999) = {cond:?}; decreasing {decreasing}, last < 0.05 {}",
            last < 0.05
        ),
    )
}

fn c5_axes(fig1: &StudyOutput, fig3: &StudyOutput) -> (bool, String) {
    let targets = [0.0, FRAC_PI_2];
    let m1 = fig1.histogram.mass_near(&targets, 0.1);
    let m3 = fig3.histogram.mass_near(&targets, 0.1);
    (
        m1 >= 0.9 && m3 >= 0.9,
        format!("mass within 0.1 rad of {{0, pi/2}}: fig 1 {m1:.3}, fig 3 {m3:.3} (need 0.9)"),
    )
}

fn c6_atom(fig4: &StudyOutput) -> (bool, String) {
    let m = fig4.histogram.mass_near(&[2.0f64.atan()], 0.05);
    (m >= 0.95, format!("mass within 0.05 rad of arctan 2: {m:.3}"))
}

fn c7_spread(fig2: &StudyOutput) -> (bool, String) {
    let n = fig2.histogram.mass.iter().filter(|m| **m > 1e-3).count();
    (n >= 20, format!("{n} of {} bins above 1e-3", fig2.histogram.bins))
}

fn c8_hill(fig1: &StudyOutput, fig3: &StudyOutput) -> (bool, String) {
    let pairs = [
        (fig1.hill[0], 2.0),
        (fig1.hill[1], 4.0),
        (fig3.hill[0], 1.0),
        (fig3.hill[1], 2.0),
    ];
    let worst = pairs.iter().map(|&(h, a)| rel(h, a)).fold(0.0, f64::max);
    let shown: Vec<String> = pairs.iter().map(|(h, a)| format!("{h:.3}/{a}")).collect();
    (
        worst <= 0.15 && fig1.hill_k == 2000,
        format!("hill/alpha at k=2000: {}; worst rel {worst:.3}", shown.join(", ")),
    )
}

fn c9_spectral_recursion(fig1: &StudyOutput) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let ks = spectral_recursion_check(&fig1.exceedances, &fig1_model(), 1, &mut rng).expect("ks");
    let p: Vec<f64> = ks.iter().map(|k| k.p_value).collect();
    (
        p.iter().all(|&v| v > 0.001),
        format!("KS p-values {p:?} on {} records", fig1.exceedances.len()),
    )
}

fn c10_first_passage() -> (bool, String) {
    let model = fig1_model();
    let cfg = FirstPassageConfig {
        seed: SEED,
        ..FirstPassageConfig::default()
    };
    let stats =
        first_passage(&model.factor(0), 2.0, &model.q_marginal(0), &cfg, Execution::default()).expect("passage");
    let rates: Vec<f64> = stats.iter().map(|s| s.window_violation_rate).collect();
    (
        rates.windows(2).all(|w| w[1] < w[0]) && stats.iter().all(|s| s.passage_times.len() == 10_000),
        format!("violation rates at u = 1e3, 1e4, 1e5: {rates:?}"),
    )
}

fn random_factor<R: Rng>(rng: &mut R) -> AffineFactor {
    if rng.random_bool(0.5) {
        AffineFactor::new(
            rng.random_range(-0.5..0.5),
            rng.random_range(0.2..1.5),
            ScalarDist::StandardNormal,
        )
    } else {
        AffineFactor::new(
            rng.random_range(0.0..0.5),
            rng.random_range(0.1..1.0),
            ScalarDist::ChiSquare1,
        )
    }
}

fn c11a_moment_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x11a);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let f = random_factor(&mut rng);
        let s = rng.random_range(0.25..3.0);
        let quad = f.abs_moment(s).expect("quadrature").value;
        let xs: Vec<f64> = (0..200_000).map(|_| f.sample(&mut rng).abs().powf(s)).collect();
        let mc = MeanEstimate::from_samples(&xs);
        worst = worst.max((quad - mc.mean).abs() / mc.std_err);
    }
    (
        worst <= 4.0,
        format!("largest |quadrature - MC| / SE over 50 factors: {worst:.2}"),
    )
}

fn brute_force(xs: &[[f64; 2]], alpha: &[f64], k: usize) -> (f64, Vec<(u64, f64)>) {
    let mut r: Vec<(u64, f64)> = xs
        .iter()
        .enumerate()
        .map(|(t, x)| (t as u64, vs_norm(x, alpha)))
        .collect();
    r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut top = r[..k].to_vec();
    top.sort_by_key(|e| e.0);
    (r[k].1, top)
}

fn c11b_collect_vs_sort() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x11b);
    let mut bad = 0;
    let streams = 300;
    for s in 0..streams {
        let n = rng.random_range(20..=10_000usize);
        let alpha = [rng.random_range(0.5..4.0), rng.random_range(0.5..4.0)];
        let ties = s % 3 == 0;
        let xs: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let mut v: [f64; 2] = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
                if ties {
                    v = [v[0].round(), v[1].round()];
                }
                v
            })
            .collect();
        let q = 1.0 - rng.random_range(1.0..(n as f64 / 2.0)) / n as f64;
        let k = tail_count(n as u64, q);
        let (thr, top) = brute_force(&xs, &alpha, k);
        // a single pass and a split-and-merge pass must both reproduce the sort
        let mut one = ExceedanceSink::new(alpha.to_vec(), q, 0, n as u64)
            .expect("sink")
            .min_records(1);
        let split = rng.random_range(0..n);
        let mut left = one.fresh();
        let mut right = one.fresh();
        for (t, x) in xs.iter().enumerate() {
            one.observe(t as u64, x);
            if t < split {
                left.observe(t as u64, x)
            } else {
                right.observe(t as u64, x)
            }
        }
        left.merge(right);
        for sink in [one, left] {
            let set = sink.finish().expect("finish");
            let got: Vec<(u64, f64)> = set.records.iter().map(|r| (r.time_index, r.radius)).collect();
            if set.threshold != thr || got != top {
                bad += 1;
            }
        }
    }
    (
        bad == 0,
        format!("{bad} mismatches over {streams} streams (single pass and split merge)"),
    )
}

fn c11c_homogeneity() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x11c);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let d = rng.random_range(1..=5usize);
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let alpha: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..5.0)).collect();
        let lambda = 10f64.powf(rng.random_range(-3.0..3.0));
        let scaled: Vec<f64> = x.iter().zip(&alpha).map(|(xi, a)| lambda.powf(1.0 / a) * xi).collect();
        let base = vs_norm(&x, &alpha);
        if base > 0.0 {
            worst = worst.max(rel(vs_norm(&scaled, &alpha), lambda * base));
        }
    }
    (
        worst <= 1e-12,
        format!("largest relative error over 10^4 draws: {worst:.2e}"),
    )
}

fn c11d_tilted_oracle() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 0x11d);
    let z = diagsre::diagnostics::Z99;
    let (mut done, mut disjoint) = (0, 0);
    while done < 20 {
        let f = random_factor(&mut rng);
        let Ok(alpha) = solve_alpha(&f, 16.0) else { continue };
        let sampler = TiltedSampler::new(&f, alpha).expect("sampler");
        let g = |m: f64| f.at(m).abs().ln();
        let xs: Vec<f64> = (0..100_000).map(|_| g(sampler.sample(&mut rng))).collect();
        let rej = MeanEstimate::from_samples(&xs).interval(z);
        let iw = importance_weighted_means(&f, alpha, &[g], 400_000, &mut rng)[0].interval(z);
        if rej.1 < iw.0 || iw.1 < rej.0 {
            disjoint += 1;
        }
        done += 1;
    }
    (
        disjoint == 0,
        format!("{disjoint} of 20 factors with disjoint 99% intervals"),
    )
}

fn figure_csv_digest(which: u8, exec: Execution) -> String {
    let opts = StudyOptions {
        length: 1_000_000,
        seed: SEED,
        tail: 1e-4,
        chunk_size: 150_000,
        exec,
        ..StudyOptions::default()
    };
    let out = run_study(&figure_model(which).expect("model"), &opts).expect("study");
    let mut h = Sha256::new();
    for csv in [
        out.histogram_csv(),
        out.diagnostics_csv(),
        out.joint_csv(),
        out.exceedances_csv(),
    ] {
        h.update(csv.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn c11e_determinism() -> (bool, String) {
    let mut mismatched = Vec::new();
    for which in 1..=6u8 {
        let digests: Vec<String> = [
            Execution::Sequential,
            Execution::Parallel { workers: 2 },
            Execution::Parallel { workers: 8 },
        ]
        .into_iter()
        .map(|e| figure_csv_digest(which, e))
        .collect();
        if digests.iter().any(|d| *d != digests[0]) {
            mismatched.push(which);
        }
    }
    (
        mismatched.is_empty(),
        format!("figures with differing CSV digests across 1/2/8 workers: {mismatched:?}"),
    )
}

fn c12_stationarity_gate() -> (bool, String) {
    let bekk = |c: f64| {
        DiagSREModel::new(
            vec![0.0],
            vec![c],
            ScalarDist::StandardNormal,
            QLaw::Gaussian(GaussianVector::new(1, vec![1.0]).expect("law")),
        )
        .expect("model")
    };
    let ok = stationarity_check(&bekk(1.0)).expect("check").coordinates[0].clone();
    let bad = stationarity_check(&bekk(1.9)).expect("check").coordinates[0].clone();
    let pass = ok.closed_form_stationary == Some(true)
        && ok.stationary
        && ok.agree
        && bad.closed_form_stationary == Some(false)
        && !bad.stationary
        && bad.agree;
    (
        pass,
        format!(
            "c=1: log moment {:.4}, closed form {:?}; c=1.9: log moment {:.4}, closed form {:?}",
            ok.log_moment, ok.closed_form_stationary, bad.log_moment, bad.closed_form_stationary
        ),
    )
}

fn main() {
    let mut results: Vec<Outcome> = Vec::new();
    results.push(run("1", "tail indices, BEKK figure 1", c1_fig1_indices));
    results.push(run("2", "tail indices, CCC", c2_ccc_indices));
    results.push(run("3", "Jensen drift gap", c3_jensen_gap));

    let (fig1, t1) = study(1);
    let (fig2, _) = study(2);
    let (fig3, _) = study(3);
    let (fig4, _) = study(4);
    println!("(figure studies at length {LENGTH}: figure 1 took {t1:.1}s)");
    results.push(run("4", "asymptotic independence decay", || {
        c4_independence_decay(&fig1, t1)
    }));
    results.push(run("5", "angular concentration, distinct indices", || {
        c5_axes(&fig1, &fig3)
    }));
    results.push(run("6", "angular atom, equal-coefficient CCC", || c6_atom(&fig4)));
    results.push(run("7", "angular spread, equal-coefficient BEKK", || c7_spread(&fig2)));
    results.push(run("8", "Hill estimates", || c8_hill(&fig1, &fig3)));
    results.push(run("9", "spectral recursion", || c9_spectral_recursion(&fig1)));
    results.push(run("10", "first-passage window", c10_first_passage));
    results.push(run("11a", "moment quadrature vs Monte Carlo", c11a_moment_oracle));
    results.push(run("11b", "exceedance collection vs full sort", c11b_collect_vs_sort));
    results.push(run("11c", "vs_norm homogeneity", c11c_homogeneity));
    results.push(run(
        "11d",
        "tilted rejection vs importance weighting",
        c11d_tilted_oracle,
    ));
    results.push(run("11e", "determinism across worker counts", c11e_determinism));
    results.push(run("12", "stationarity gate", c12_stationarity_gate));

    let failed: Vec<&str> = results.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    println!(
        "\n{} of {} acceptance checks passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
