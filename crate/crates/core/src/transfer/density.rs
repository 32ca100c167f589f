//! The absolutely continuous invariant density.

use num_complex::Complex64;

use super::operator::{DiscreteOperator, OneStepKernel, TwistParameter};
use crate::error::{Error, Result};
use crate::holder::{integral, sup_norm, PiecewiseField};
use crate::phase_space::Semiflow;

#[derive(Debug, Clone, Copy)]
pub struct DensityOptions {
    pub res: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self {
            res: 4097,
            tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InvariantDensity<const D: usize> {
    pub density: PiecewiseField<f64, D>,
    pub iterations: usize,
    pub residual: f64,
    pub min_value: f64,
}

/// Power iteration of `L_0` on the grid, started from `f = 1`, until
/// successive iterates agree to `tol` in sup norm; normalized to unit mass.
pub fn invariant_density<const D: usize>(sys: &Semiflow<D>, opts: &DensityOptions) -> Result<InvariantDensity<D>> {
    let op = OneStepKernel::build(sys, opts.res)?.discretize(TwistParameter::zero());
    invariant_density_with(&op, sys, opts)
}

pub fn invariant_density_with<const D: usize>(
    op: &DiscreteOperator<D>,
    sys: &Semiflow<D>,
    opts: &DensityOptions,
) -> Result<InvariantDensity<D>> {
    let mut h = PiecewiseField::constant(sys.map.cells(), op.res(), Complex64::new(1.0, 0.0));
    let mass = |f: &PiecewiseField<Complex64, D>| integral(f).re;
    let m0 = mass(&h);
    h = h.scale(Complex64::new(1.0 / m0, 0.0));
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let next = op.apply(&h);
        let next = next.scale(Complex64::new(1.0 / mass(&next), 0.0));
        residual = sup_norm(&(&next - &h));
        h = next;
        if residual < opts.tol {
            let density = h.map(|v| v.re);
            let min_value = density.all_values().copied().fold(f64::INFINITY, f64::min);
            if !(min_value > 0.0) {
                return Err(Error::numerical("invariant density is not positive", min_value));
            }
            return Ok(InvariantDensity {
                density,
                iterations: it,
                residual,
                min_value,
            });
        }
    }
    Err(Error::numerical("invariant density power iteration did not converge", residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::{doubling, tripling};
    use crate::phase_space::Roof;

    #[test]
    fn lebesgue_is_invariant_for_affine_maps() {
        for map in [doubling(), tripling()] {
            let sys = Semiflow::new(map, Roof::constant(1.0), 257).unwrap().0;
            let h = invariant_density(&sys, &DensityOptions { res: 257, ..Default::default() }).unwrap();
            assert!(h.density.all_values().all(|v| (v - 1.0).abs() < 1e-10));
        }
    }
}
