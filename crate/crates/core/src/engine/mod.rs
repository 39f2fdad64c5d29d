//! Streaming simulation of diagonal stochastic recurrence equations.
//!
//! A trajectory starts from the zero state. Observation `t` is the state
//! after global step `burn_in + t`. The observation range is cut into chunks
//! that run independently: every chunk after the first restarts from zero
//! `W` steps before its first observation, with `W` large enough that
//! `exp(W * max_i E log|b_i + c_i M|) < 1e-40`. Because all randomness is
//! addressed by global step, the emitted observations do not depend on the
//! chunk size or on the number of workers.

pub mod model;
pub mod rng;
pub mod sink;

use rand::Rng;
use rand_distr::StandardNormal;

pub use model::{cholesky_psd, DiagSREModel, GaussianVector, ModelCase, QLaw};
pub use sink::{DumpSink, Sink};

use crate::error::{Error, Result};
use crate::exec::Execution;
use rng::{Cursor, Noise};

pub const DEFAULT_BURN_IN: u64 = 10_000;
pub const DEFAULT_CHUNK: u64 = 1 << 20;
/// Warm-up used when the stationarity gate is overridden.
const FORCED_WARMUP: u64 = 10_000;

/// A Markov recursion driven by the two noise streams.
pub trait Dynamics: Sync {
    fn dim(&self) -> usize;

    /// `(i, E log|b_i + c_i M|)` for the least contracting coordinate `i`;
    /// sizes the chunk warm-up.
    fn max_log_moment(&self) -> Result<(usize, f64)>;

    /// Draws one step of innovations and applies it to `x`. `scratch` has
    /// length `dim()`. Must consume the same number of draws for any `x`.
    fn advance(&self, x: &mut [f64], noise: &mut Noise, scratch: &mut [f64]);
}

impl Dynamics for DiagSREModel {
    fn dim(&self) -> usize {
        DiagSREModel::dim(self)
    }

    fn max_log_moment(&self) -> Result<(usize, f64)> {
        worst(self.log_moments()?)
    }

    #[inline]
    fn advance(&self, x: &mut [f64], noise: &mut Noise, scratch: &mut [f64]) {
        let m = self.m_law().sample(&mut noise.m);
        draw_q(self.q_law(), &mut noise.q, scratch);
        self.apply(x, m, scratch);
    }
}

pub(crate) fn worst(moments: Vec<f64>) -> Result<(usize, f64)> {
    moments
        .into_iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::InvalidModel("dimension must be positive".into()))
}

#[inline]
fn draw_q<R: Rng + ?Sized>(law: &QLaw, rng: &mut R, out: &mut [f64]) {
    match law {
        QLaw::Constant(q) => out.copy_from_slice(q),
        QLaw::Gaussian(g) => {
            let d = out.len();
            let mut z = [0.0f64; 16];
            if d <= z.len() {
                for zi in z.iter_mut().take(d) {
                    *zi = rng.sample(StandardNormal);
                }
                g.transform(&z[..d], out);
            } else {
                let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                g.transform(&z, out);
            }
        }
        QLaw::Independent(laws) => {
            for (o, law) in out.iter_mut().zip(laws) {
                *o = law.sample(rng);
            }
        }
    }
}

/// One trajectory request.
#[derive(Debug, Clone, Copy)]
pub struct TrajectoryStream<'a, D: Dynamics> {
    pub model: &'a D,
    pub seed: u64,
    pub burn_in: u64,
    pub length: u64,
    pub chunk_size: u64,
    /// Override of the coupling warm-up `W`.
    pub warmup: Option<u64>,
    /// Simulate even when some `E log|b_i + c_i M| >= 0`.
    pub force: bool,
}

impl<'a, D: Dynamics> TrajectoryStream<'a, D> {
    pub fn new(model: &'a D, seed: u64, length: u64) -> Self {
        TrajectoryStream {
            model,
            seed,
            burn_in: DEFAULT_BURN_IN,
            length,
            chunk_size: DEFAULT_CHUNK,
            warmup: None,
            force: false,
        }
    }

    pub fn burn_in(mut self, burn_in: u64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size.max(1);
        self
    }

    pub fn warmup(mut self, warmup: u64) -> Self {
        self.warmup = Some(warmup);
        self
    }

    pub fn force(mut self, force: bool) -> Self {
        self.force = force;
        self
    }

    /// Coupling warm-up `W` for chunk restarts.
    pub fn coupling_warmup(&self) -> Result<u64> {
        if let Some(w) = self.warmup {
            return Ok(w);
        }
        let (coordinate, lm) = self.model.max_log_moment()?;
        if lm < 0.0 {
            Ok(((40.0 * std::f64::consts::LN_10) / -lm).ceil().max(1.0) as u64)
        } else if self.force {
            Ok(FORCED_WARMUP)
        } else {
            Err(Error::StationarityViolated {
                coordinate,
                log_moment: lm,
            })
        }
    }

    /// Runs the trajectory and merges every observation into `sink`.
    pub fn simulate<S: Sink>(&self, sink: &mut S, exec: Execution) -> Result<()> {
        if self.length == 0 {
            return Ok(());
        }
        let warmup = self.coupling_warmup()?;
        let chunk = self.chunk_size.max(1);
        let n_chunks = self.length.div_ceil(chunk);
        let wave = (exec.width() * 2).max(1) as u64;
        let mut next = 0;
        while next < n_chunks {
            let end = (next + wave).min(n_chunks);
            let fresh: Vec<std::sync::Mutex<Option<S>>> =
                (next..end).map(|_| std::sync::Mutex::new(Some(sink.fresh()))).collect();
            let parts = exec.map_ordered(fresh.len(), |k| {
                let part = fresh[k].lock().expect("sink slot").take().expect("sink slot");
                self.run_chunk(next + k as u64, warmup, part)
            });
            for part in parts {
                sink.merge(part);
            }
            next = end;
        }
        Ok(())
    }

    fn run_chunk<S: Sink>(&self, k: u64, warmup: u64, mut sink: S) -> S {
        let d = self.model.dim();
        let chunk = self.chunk_size.max(1);
        let obs_start = k * chunk;
        let obs_end = (obs_start + chunk).min(self.length);
        let first_step = self.burn_in + obs_start;
        let start = if k == 0 { 0 } else { first_step.saturating_sub(warmup) };

        let mut x = vec![0.0; d];
        let mut scratch = vec![0.0; d];
        let mut cursor = Cursor::at_block_of(self.seed, start);
        {
            // replay the block prefix so the streams sit at `start`
            let mut dummy = vec![0.0; d];
            while cursor.step() < start {
                self.model.advance(&mut dummy, cursor.next(), &mut scratch);
            }
        }
        while cursor.step() < first_step {
            self.model.advance(&mut x, cursor.next(), &mut scratch);
        }
        for t in obs_start..obs_end {
            self.model.advance(&mut x, cursor.next(), &mut scratch);
            sink.observe(t, &x);
        }
        for _ in 0..sink.horizon() {
            self.model.advance(&mut x, cursor.next(), &mut scratch);
            sink.observe_tail(&x);
        }
        sink
    }
}

/// One draw of the backward series `sum_{k=1}^n M_1 ... M_{k-1} Q_k`,
/// a sampler of the stationary law truncated at `n` terms.
pub fn backward_partial_sums<R: Rng + ?Sized>(model: &DiagSREModel, n: usize, rng: &mut R) -> Vec<f64> {
    let d = model.dim();
    let mut sum = vec![0.0; d];
    let mut prod = vec![1.0; d];
    let mut q = vec![0.0; d];
    for k in 0..n {
        draw_q(model.q_law(), rng, &mut q);
        for i in 0..d {
            sum[i] += prod[i] * q[i];
        }
        if k + 1 < n {
            let m = model.m_law().sample(rng);
            for i in 0..d {
                prod[i] *= model.b()[i] + model.c()[i] * m;
            }
        }
    }
    sum
}
