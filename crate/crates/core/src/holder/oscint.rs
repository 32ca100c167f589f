//! Oscillatory integrals `int_J e^{i b theta} k` and their a priori bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::field::PiecewiseField;
use super::norms::{holder_norm, holder_seminorm, sup_norm};
use super::quadrature::{integrate, QuadOptions};
use crate::error::{Error, Result};
use crate::phase_space::Cell;

#[derive(Debug, Clone, Copy)]
pub struct OscIntOptions {
    /// Grid nodes used to measure the Hölder quantities.
    pub res: usize,
    pub quad: QuadOptions,
}

impl Default for OscIntOptions {
    fn default() -> Self {
        Self {
            res: 4097,
            quad: QuadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscIntResult {
    pub value: Complex64,
    pub b: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub theta_prime_sup: f64,
    pub theta_prime_seminorm: f64,
    pub k_holder_norm: f64,
    /// `(||theta'||_inf + 6)(1 + |theta'|_alpha)`
    pub constant: f64,
    /// `constant * kappa^-2 * |b|^-alpha * ||k||_{C^alpha}`
    pub bound: f64,
    pub bound_satisfied: bool,
    pub nodes_per_period: f64,
}

pub fn oscint_constant(theta_prime_sup: f64, theta_prime_seminorm: f64) -> f64 {
    (theta_prime_sup + 6.0) * (1.0 + theta_prime_seminorm)
}

/// Integrates `e^{i b theta(x)} k(x)` over `j` with panels of half an
/// oscillation period and compares with the bound.
pub fn oscillatory_integral(
    k: impl Fn(f64) -> Complex64,
    theta: impl Fn(f64) -> f64,
    theta_prime: impl Fn(f64) -> f64,
    b: f64,
    j: (f64, f64),
    alpha: f64,
    opts: &OscIntOptions,
) -> Result<OscIntResult> {
    let (lo, hi) = j;
    if !(lo >= 0.0 && hi <= 1.0 && hi > lo) {
        return Err(Error::Precondition(format!("interval [{lo}, {hi}] is not inside [0, 1]")));
    }
    if !(b.abs() > 1.0) {
        return Err(Error::Precondition(format!("|b| = {} must exceed 1", b.abs())));
    }
    let cells = [Cell::interval(lo, hi)];
    let tp = PiecewiseField::<f64, 1>::from_fn(&cells, opts.res, |_, x| theta_prime(x[0]));
    let first = tp.values(0)[0].signum();
    let kappa = tp.values(0).iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if !(kappa > 0.0) || tp.values(0).iter().any(|v| v.signum() != first) {
        return Err(Error::Precondition(format!(
            "|theta'| is not bounded away from zero on J (kappa = {kappa})"
        )));
    }
    let theta_prime_sup = sup_norm(&tp);
    let theta_prime_seminorm = holder_seminorm(&tp, alpha);
    let kf = PiecewiseField::<Complex64, 1>::from_fn(&cells, opts.res, |_, x| k(x[0]));
    let k_holder_norm = holder_norm(&kf, alpha);

    let half_period = std::f64::consts::PI / (b.abs() * theta_prime_sup);
    let panels = ((hi - lo) / half_period).ceil().max(1.0) as usize;
    let integrand = |x: f64| Complex64::new(0.0, b * theta(x)).exp() * k(x);
    let (value, _) = integrate(integrand, lo, hi, panels, &opts.quad)?;
    let period = 2.0 * half_period;
    // every initial panel carries a full 15-node Kronrod rule
    let nodes_per_period = 15.0 * period / ((hi - lo) / panels as f64);

    let constant = oscint_constant(theta_prime_sup, theta_prime_seminorm);
    let bound = constant / (kappa * kappa * b.abs().powf(alpha)) * k_holder_norm;
    Ok(OscIntResult {
        value,
        b,
        alpha,
        kappa,
        theta_prime_sup,
        theta_prime_seminorm,
        k_holder_norm,
        constant,
        bound,
        bound_satisfied: value.norm() <= bound,
        nodes_per_period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn linear_phase_closed_form() {
        let r = oscillatory_integral(one, |x| x, |_| 1.0, 100.0, (0.0, 1.0), 1.0, &OscIntOptions::default()).unwrap();
        let exact = (Complex64::new(0.0, 100.0).exp() - 1.0) / Complex64::new(0.0, 100.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.value.norm() <= 0.02);
        assert!((r.constant - 7.0).abs() < 1e-12);
        assert!((r.bound - 0.07).abs() < 1e-12);
        assert!(r.bound_satisfied);
        assert!(r.nodes_per_period >= 20.0);
    }

    #[test]
    fn full_periods_vanish() {
        for m in 1..5 {
            let b = 2.0 * std::f64::consts::PI * m as f64;
            let r = oscillatory_integral(one, |x| x, |_| 1.0, b, (0.0, 1.0), 0.5, &OscIntOptions::default()).unwrap();
            assert!(r.value.norm() < 1e-13);
        }
    }

    #[test]
    fn negative_frequency_conjugates() {
        let k = |x: f64| Complex64::new(x * x + 0.3, 0.0);
        let th = |x: f64| x + 0.25 * x * x;
        let tp = |x: f64| 1.0 + 0.5 * x;
        let o = OscIntOptions::default();
        let p = oscillatory_integral(k, th, tp, 37.0, (0.1, 0.9), 1.0, &o).unwrap();
        let m = oscillatory_integral(k, th, tp, -37.0, (0.1, 0.9), 1.0, &o).unwrap();
        assert!((p.value - m.value.conj()).norm() < 1e-14);
    }

    #[test]
    fn flat_phase_is_rejected() {
        let r = oscillatory_integral(one, |x| (x - 0.5).powi(2), |x| 2.0 * (x - 0.5), 10.0, (0.0, 1.0), 1.0, &OscIntOptions::default());
        assert!(matches!(r, Err(Error::Precondition(_))));
    }
}
