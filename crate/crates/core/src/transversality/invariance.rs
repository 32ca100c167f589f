//! One-step invariance of the cone field.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::linalg::Point;
use crate::phase_space::Semiflow;

/// Contraction factor `q` with `D(x) K ⊂ {|b'| <= q C5 |a'|}`.
///
/// From `|b'| <= C3 |a'| + C5 e^{-lambda} |a'|` and
/// `C5 = 2 C3 / (1 - e^{-lambda})` one gets `q = (1 + e^{-lambda}) / 2`,
/// which is below one but in general above one half; the doubling map with
/// `tau(x) = x` attains it.
pub fn invariance_factor(lambda: f64) -> f64 {
    0.5 * (1.0 + (-lambda).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub factor: f64,
    /// `min (q C5 |a'| - |b'|) / |a'|` over the samples.
    pub worst_margin: f64,
    /// The same margin with `q = 1/2`.
    pub worst_half_margin: f64,
    pub pass: bool,
    pub half_pass: bool,
}

/// Maps random boundary vectors `(a, +-C5 |a|)` of the cone at random points
/// through one step of the block Jacobian and measures how far inside the
/// contracted cone the image lands.
pub fn cone_invariance_check<const D: usize>(sys: &Semiflow<D>, samples: usize, seed: u64) -> InvarianceReport {
    let c5 = sys.constants.c5;
    let q = invariance_factor(sys.constants.lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut worst_half) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..samples {
        let e = rng.gen_range(0..sys.map.len());
        let cell = sys.map.cell(e);
        let x = Point::<D>::from_fn(|k, _| cell.lo[k] + rng.gen::<f64>() * cell.side(k));
        let mut a = Point::<D>::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        a /= a.norm();
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let b = sign * c5;
        let a2 = sys.map.jacobian(e, &x) * a;
        let b2 = (sys.roof.gradient(e, &x) * a)[0] + b;
        let norm = a2.norm();
        worst = worst.min((q * c5 * norm - b2.abs()) / norm);
        worst_half = worst_half.min((0.5 * c5 * norm - b2.abs()) / norm);
    }
    let slack = 1e-12 * c5.max(1.0);
    InvarianceReport {
        samples,
        factor: q,
        worst_margin: worst,
        worst_half_margin: worst_half,
        pass: worst >= -slack,
        half_pass: worst_half >= -slack,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::doubling;
    use crate::phase_space::Roof;

    #[test]
    fn identity_roof_on_doubling_is_tight() {
        let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
        let r = cone_invariance_check(&sys, 1000, 7);
        assert!(r.pass);
        assert!(r.worst_margin.abs() < 1e-12);
        // b' = 3a against |a'| = 2|a| and C5 = 2: the half-width claim fails
        assert!(!r.half_pass);
    }

    #[test]
    fn constant_roof_passes_both() {
        let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
        let r = cone_invariance_check(&sys, 1000, 7);
        assert!(r.pass && r.half_pass);
    }
}
