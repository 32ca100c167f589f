//! The sup-norm interpolation estimate
//! `||f||_inf <= C eps^-d ||f||_{L^1} + eps^alpha |f|_alpha`.

use serde::{Deserialize, Serialize};

use crate::holder::{holder_seminorm, l1_norm, sup_norm, FieldScalar, PiecewiseField};

/// Constant for boxes of diameter at most `eps` inside partition elements:
/// a side of `eps / sqrt(d)` rounded down to divide each element gives
/// boxes of side at least `eps / (1 + sqrt(d))` whenever `eps` is below
/// every element side.
pub fn interpolation_constant(d: usize) -> f64 {
    (1.0 + (d as f64).sqrt()).powi(d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupInterpolationReport {
    pub epsilon: f64,
    pub epsilon_max: f64,
    pub epsilon_in_range: bool,
    pub constant: f64,
    pub sup: f64,
    pub l1: f64,
    pub seminorm: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn sup_interpolation_check<S: FieldScalar, const D: usize>(
    f: &PiecewiseField<S, D>,
    epsilon: f64,
    alpha: f64,
) -> SupInterpolationReport {
    let epsilon_max = f
        .cells()
        .iter()
        .map(|c| c.min_side())
        .fold(f64::INFINITY, f64::min);
    let constant = interpolation_constant(D);
    let sup = sup_norm(f);
    let l1 = l1_norm(f);
    let seminorm = holder_seminorm(f, alpha);
    let rhs = constant * epsilon.powi(-(D as i32)) * l1 + epsilon.powf(alpha) * seminorm;
    SupInterpolationReport {
        epsilon,
        epsilon_max,
        epsilon_in_range: epsilon > 0.0 && epsilon < epsilon_max,
        constant,
        sup,
        l1,
        seminorm,
        rhs,
        holds: sup <= rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Point;
    use crate::phase_space::Cell;

    #[test]
    fn constants_by_dimension() {
        assert_eq!(interpolation_constant(1), 2.0);
        assert!((interpolation_constant(2) - (1.0 + 2f64.sqrt()).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn sine_and_spike() {
        let cells = [Cell::interval(0.0, 1.0)];
        let f = PiecewiseField::<f64, 1>::from_fn(&cells, 4097, |_, x| (2.0 * std::f64::consts::PI * x[0]).sin());
        let r = sup_interpolation_check(&f, 0.1, 1.0);
        assert!(r.holds && r.epsilon_in_range);
        let mut spike = PiecewiseField::<f64, 1>::zeros(&cells, 1025);
        spike.values_mut(0)[300] = 1.0;
        for eps in [1e-4, 1e-3, 0.01, 0.5] {
            assert!(sup_interpolation_check(&spike, eps, 0.5).holds);
        }
        let cells2 = [Cell::new(Point::<2>::new(0.0, 0.0), Point::<2>::new(1.0, 1.0))];
        let mut spike2 = PiecewiseField::<f64, 2>::zeros(&cells2, 65);
        spike2.values_mut(0)[65 * 30 + 30] = 1.0;
        for eps in [1e-3, 0.01, 0.05, 0.5] {
            assert!(sup_interpolation_check(&spike2, eps, 1.0).holds);
        }
    }
}
