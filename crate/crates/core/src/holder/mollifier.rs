//! Mollification of `k / theta'` by a rescaled C^1 bump.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::PiecewiseField;
use super::norms::holder_seminorm;
use super::quadrature::{integrate_real, QuadOptions};
use crate::error::{Error, Result};
use crate::phase_space::Cell;

/// `rho(z) = (15/16)(1 - z^2)^2` on `(-1, 1)`.
pub fn bump(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - z * z;
        15.0 / 16.0 * w * w
    }
}

pub fn bump_derivative(z: f64) -> f64 {
    if z.abs() >= 1.0 {
        0.0
    } else {
        -15.0 / 4.0 * z * (1.0 - z * z)
    }
}

/// `int |rho'|`.
pub const BUMP_DERIVATIVE_L1: f64 = 15.0 / 8.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MollifyReport {
    pub b: f64,
    pub alpha: f64,
    pub kappa: f64,
    /// Measured `|k / theta'|_alpha`.
    pub quotient_seminorm: f64,
    /// `||g_b - k / theta'||_inf` on the grid.
    pub sup_error: f64,
    /// `||g_b'||_inf` on the grid.
    pub sup_derivative: f64,
    /// `b^-alpha |k / theta'|_alpha`
    pub error_bound: f64,
    /// `2 b^(1 - alpha) |k / theta'|_alpha`
    pub derivative_bound: f64,
    pub holds: bool,
    #[serde(skip)]
    pub smoothed: Option<PiecewiseField<f64, 1>>,
    #[serde(skip)]
    pub smoothed_derivative: Option<PiecewiseField<f64, 1>>,
}

/// Convolves `q = k / theta'` (extended by constants outside `j`) with
/// `rho_b(z) = b rho(b z)` and measures both approximation bounds on a grid
/// of `res` nodes.
pub fn mollify(
    k: impl Fn(f64) -> f64,
    theta_prime: impl Fn(f64) -> f64,
    b: f64,
    alpha: f64,
    j: (f64, f64),
    res: usize,
) -> Result<MollifyReport> {
    let (lo, hi) = j;
    if !(b > 1.0) {
        return Err(Error::Precondition(format!("mollifier scale b = {b} must exceed 1")));
    }
    if !(hi > lo) || res < 2 {
        return Err(Error::Precondition("empty interval or grid".into()));
    }
    let cells = [Cell::interval(lo, hi)];
    let tp = PiecewiseField::<f64, 1>::from_fn(&cells, res, |_, x| theta_prime(x[0]));
    let kappa = tp.values(0).iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let signs_agree = tp.values(0).iter().all(|v| v.signum() == tp.values(0)[0].signum());
    if !(kappa > 0.0) || !signs_agree {
        return Err(Error::Precondition(format!(
            "|theta'| is not bounded away from zero (kappa = {kappa})"
        )));
    }
    let q = |t: f64| {
        let t = t.clamp(lo, hi);
        k(t) / theta_prime(t)
    };
    let qf = PiecewiseField::<f64, 1>::from_fn(&cells, res, |_, x| q(x[0]));
    let seminorm = holder_seminorm(&qf, alpha);

    let opts = QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_panels: 20_000,
    };
    let mut smoothed = PiecewiseField::<f64, 1>::zeros(&cells, res);
    let mut deriv = PiecewiseField::<f64, 1>::zeros(&cells, res);
    let mut sup_error: f64 = 0.0;
    let mut sup_derivative: f64 = 0.0;
    for i in 0..res {
        let x = qf.node(0, i)[0];
        // split where x - z / b crosses an endpoint of j
        let mut cuts = vec![-1.0, 1.0];
        for c in [b * (x - lo), b * (x - hi)] {
            if c > -1.0 && c < 1.0 {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut g = 0.0;
        let mut dg = 0.0;
        for w in cuts.windows(2) {
            g += integrate_real(|z| bump(z) * q(x - z / b), w[0], w[1], 2, &opts)?.0;
            dg += integrate_real(|z| bump_derivative(z) * q(x - z / b), w[0], w[1], 2, &opts)?.0;
        }
        dg *= b;
        smoothed.values_mut(0)[i] = g;
        deriv.values_mut(0)[i] = dg;
        sup_error = sup_error.max((g - qf.values(0)[i]).abs());
        sup_derivative = sup_derivative.max(dg.abs());
    }
    let error_bound = b.powf(-alpha) * seminorm;
    let derivative_bound = 2.0 * b.powf(1.0 - alpha) * seminorm;
    // quadrature noise floor for constant quotients
    let slack = 1e-10 * (1.0 + qf.values(0).iter().map(|v| v.abs()).fold(0.0, f64::max));
    Ok(MollifyReport {
        b,
        alpha,
        kappa,
        quotient_seminorm: seminorm,
        sup_error,
        sup_derivative,
        error_bound,
        derivative_bound,
        holds: sup_error <= error_bound + slack && sup_derivative <= derivative_bound + b * slack,
        smoothed: Some(smoothed),
        smoothed_derivative: Some(deriv),
    })
}

/// Same as [`mollify`] for a complex numerator, applied to real and
/// imaginary parts separately; returns the worse of the two reports.
pub fn mollify_complex(
    k: impl Fn(f64) -> Complex64,
    theta_prime: impl Fn(f64) -> f64 + Copy,
    b: f64,
    alpha: f64,
    j: (f64, f64),
    res: usize,
) -> Result<(MollifyReport, MollifyReport)> {
    let re = mollify(|x| k(x).re, theta_prime, b, alpha, j, res)?;
    let im = mollify(|x| k(x).im, theta_prime, b, alpha, j, res)?;
    Ok((re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_normalization() {
        let opts = QuadOptions::default();
        let (mass, _) = integrate_real(bump, -1.0, 1.0, 1, &opts).unwrap();
        let (var, _) = integrate_real(|z| bump_derivative(z).abs(), -1.0, 1.0, 2, &opts).unwrap();
        assert!((mass - 1.0).abs() < 1e-13);
        assert!((var - BUMP_DERIVATIVE_L1).abs() < 1e-12);
        assert!(var <= 2.0);
        let h = 1e-6;
        for z in [-0.7, 0.1, 0.55] {
            let fd = (bump(z + h) - bump(z - h)) / (2.0 * h);
            assert!((fd - bump_derivative(z)).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_quotient_is_fixed() {
        let r = mollify(|_| 1.0, |_| 1.0, 7.0, 0.5, (0.0, 1.0), 65).unwrap();
        assert!(r.sup_error < 1e-12 && r.sup_derivative < 1e-10);
        assert!(r.holds);
    }

    #[test]
    fn identity_at_high_frequency() {
        let r = mollify(|x| x, |_| 1.0, 100.0, 1.0, (0.0, 1.0), 10_001).unwrap();
        assert!(r.sup_error <= 0.01);
        assert!(r.holds);
    }

    #[test]
    fn square_root_cusp() {
        let r = mollify(|x| (x - 0.5).abs().sqrt(), |_| 1.0, 16.0, 0.5, (0.0, 1.0), 4097).unwrap();
        assert!((r.quotient_seminorm - 1.0).abs() < 1e-9);
        assert!(r.holds, "{r:?}");
    }

    #[test]
    fn vanishing_derivative_is_rejected() {
        assert!(matches!(
            mollify(|x| x, |x| x - 0.5, 4.0, 1.0, (0.0, 1.0), 33),
            Err(Error::Precondition(_))
        ));
    }
}
