//! Monte-Carlo correlation functions of the semiflow under `nu_tau`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flow::flow_step;
use super::observables::FlowObservable;
use super::sampling::{shard_len, shard_rng, NuTauSampler, SHARDS};
use crate::error::{Error, Result};
use crate::holder::PiecewiseField;
use crate::phase_space::Semiflow;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub t: Vec<f64>,
    /// `C(t) = E[conj(f) g o T_t] - conj(E f) E g`
    pub c: Vec<Complex64>,
    /// Jackknife standard errors over the shards.
    pub stderr: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub mean_f: Complex64,
    /// `E g` (time-independent under `nu_tau`; reported at `t = t_0`).
    pub mean_g: Complex64,
}

#[derive(Clone)]
struct ShardSums {
    n: usize,
    f: Complex64,
    g: Vec<Complex64>,
    fg: Vec<Complex64>,
}

impl ShardSums {
    fn zero(m: usize) -> Self {
        Self {
            n: 0,
            f: Complex64::new(0.0, 0.0),
            g: vec![Complex64::new(0.0, 0.0); m],
            fg: vec![Complex64::new(0.0, 0.0); m],
        }
    }

    fn add(&mut self, o: &ShardSums) {
        self.n += o.n;
        self.f += o.f;
        for i in 0..self.g.len() {
            self.g[i] += o.g[i];
            self.fg[i] += o.fg[i];
        }
    }

    fn sub(&self, o: &ShardSums) -> ShardSums {
        let mut r = self.clone();
        r.n -= o.n;
        r.f -= o.f;
        for i in 0..r.g.len() {
            r.g[i] -= o.g[i];
            r.fg[i] -= o.fg[i];
        }
        r
    }

    fn estimate(&self) -> Vec<Complex64> {
        let n = self.n as f64;
        let mf = self.f / n;
        (0..self.g.len())
            .map(|i| self.fg[i] / n - mf.conj() * (self.g[i] / n))
            .collect()
    }
}

/// Estimates `C(t)` on a non-decreasing time grid from `n` samples of
/// `nu_tau`. Each shard samples, flows and accumulates on its own stream;
/// shard sums are merged in shard order, so results do not depend on the
/// number of threads.
#[allow(clippy::too_many_arguments)]
pub fn mc_correlation<const D: usize>(
    sys: &Semiflow<D>,
    density: &PiecewiseField<f64, D>,
    f: &FlowObservable,
    g: &FlowObservable,
    t_grid: &[f64],
    n: usize,
    seed: u64,
) -> Result<CorrelationCurve> {
    if t_grid.is_empty() || t_grid[0] < 0.0 || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("time grid must be non-empty, non-negative and sorted".into()));
    }
    if n < 2 * SHARDS {
        return Err(Error::Precondition(format!("need at least {} samples", 2 * SHARDS)));
    }
    let sampler = NuTauSampler::new(sys, density)?;
    let m = t_grid.len();
    let shards: Vec<ShardSums> = (0..SHARDS)
        .into_par_iter()
        .map(|j| {
            let mut rng = shard_rng(seed, j);
            let mut sums = ShardSums::zero(m);
            for _ in 0..shard_len(n, j) {
                let s0 = sampler.draw(&mut rng)?;
                let fv = f.eval(sys, &s0).conj();
                sums.n += 1;
                sums.f += fv.conj();
                let mut s = s0;
                let mut t_prev = 0.0;
                for (i, &t) in t_grid.iter().enumerate() {
                    s = flow_step(sys, s, t - t_prev);
                    t_prev = t;
                    let gv = g.eval(sys, &s);
                    sums.g[i] += gv;
                    sums.fg[i] += fv * gv;
                }
            }
            Ok(sums)
        })
        .collect::<Result<_>>()?;

    let mut total = ShardSums::zero(m);
    for s in &shards {
        total.add(s);
    }
    let c = total.estimate();
    let loo: Vec<Vec<Complex64>> = shards.iter().map(|s| total.sub(s).estimate()).collect();
    let b = SHARDS as f64;
    let stderr = (0..m)
        .map(|i| {
            let mean: Complex64 = loo.iter().map(|v| v[i]).sum::<Complex64>() / b;
            let ss: f64 = loo.iter().map(|v| (v[i] - mean).norm_sqr()).sum();
            ((b - 1.0) / b * ss).sqrt()
        })
        .collect();
    let nf = total.n as f64;
    Ok(CorrelationCurve {
        t: t_grid.to_vec(),
        c,
        stderr,
        samples: total.n,
        seed,
        mean_f: total.f / nf,
        mean_g: total.g[0] / nf,
    })
}
