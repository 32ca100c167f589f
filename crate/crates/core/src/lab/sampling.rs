//! Sampling from the suspension measure
//! `nu_tau = (h tau m) x Lebesgue(fiber) / nu(tau)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::flow::FlowState;
use crate::error::{Error, Result};
use crate::holder::{integral, PiecewiseField};
use crate::linalg::Point;
use crate::phase_space::Semiflow;

/// Samples are split into this many shards, each with its own stream of the
/// master seed, and merged in shard order.
pub const SHARDS: usize = 100;

/// Rejection efficiency below which sampling is refused.
pub const MIN_EFFICIENCY: f64 = 0.01;

/// Rejection sampler for the base marginal `h tau / nu(tau)`.
#[derive(Debug, Clone)]
pub struct NuTauSampler<'a, const D: usize> {
    sys: &'a Semiflow<D>,
    density: &'a PiecewiseField<f64, D>,
    envelope: f64,
    /// `nu(tau) = int h tau dm`
    pub mean_roof: f64,
    pub efficiency: f64,
}

impl<'a, const D: usize> NuTauSampler<'a, D> {
    pub fn new(sys: &'a Semiflow<D>, density: &'a PiecewiseField<f64, D>) -> Result<Self> {
        let h_max = density.all_values().copied().fold(0.0, f64::max);
        let envelope = h_max * sys.constants.c4 * 1.001;
        let h_tau = PiecewiseField::from_fn(sys.map.cells(), density.res(), |e, x| {
            density.eval(e, x) * sys.roof.value(e, x)
        });
        let roof_min = h_tau
            .cells()
            .iter()
            .enumerate()
            .flat_map(|(e, _)| (0..h_tau.nodes_per_element()).map(move |i| (e, i)))
            .map(|(e, i)| sys.roof.value(e, &h_tau.node(e, i)))
            .fold(f64::INFINITY, f64::min);
        if !(roof_min > 0.0) {
            return Err(Error::Precondition(format!("roof minimum {roof_min} is not positive")));
        }
        let mean_roof = integral(&h_tau);
        let efficiency = mean_roof / (envelope * sys.map.bounds().measure());
        if efficiency < MIN_EFFICIENCY {
            return Err(Error::Precondition(format!(
                "rejection efficiency {efficiency:.2e} is below {MIN_EFFICIENCY}"
            )));
        }
        Ok(Self {
            sys,
            density,
            envelope,
            mean_roof,
            efficiency,
        })
    }

    /// One draw from `nu_tau`.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<FlowState<D>> {
        let bounds = self.sys.map.bounds();
        for _ in 0..((100.0 / self.efficiency) as usize).max(10_000) {
            let x = Point::<D>::from_fn(|k, _| bounds.lo[k] + rng.gen::<f64>() * bounds.side(k));
            let Some(elem) = self.sys.map.locate(&x) else {
                continue;
            };
            let tau = self.sys.roof.value(elem, &x);
            let ratio = self.density.eval(elem, &x) * tau / self.envelope;
            if ratio > 1.0 {
                return Err(Error::Inconsistent(format!(
                    "h tau exceeds the rejection envelope by {ratio}"
                )));
            }
            if rng.gen::<f64>() < ratio {
                let u = rng.gen::<f64>() * tau;
                return Ok(FlowState { elem, x, u });
            }
        }
        Err(Error::numerical("rejection sampler made no progress", self.efficiency))
    }
}

/// Number of samples in shard `j` when `n` are split over [`SHARDS`].
pub fn shard_len(n: usize, j: usize) -> usize {
    n / SHARDS + usize::from(j < n % SHARDS)
}

pub fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// `n` i.i.d. draws from `nu_tau`, identical for every thread count.
pub fn sample_nu_tau<const D: usize>(
    sys: &Semiflow<D>,
    density: &PiecewiseField<f64, D>,
    n: usize,
    seed: u64,
) -> Result<Vec<FlowState<D>>> {
    let sampler = NuTauSampler::new(sys, density)?;
    let shards: Vec<Vec<FlowState<D>>> = (0..SHARDS)
        .into_par_iter()
        .map(|j| {
            let mut rng = shard_rng(seed, j);
            (0..shard_len(n, j)).map(|_| sampler.draw(&mut rng)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(shards.into_iter().flatten().collect())
}
