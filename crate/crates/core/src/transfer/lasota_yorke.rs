//! Empirical Lasota-Yorke constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{apply_twisted_upto_many, TwistParameter};
use crate::error::{Error, Result};
use crate::holder::{holder_seminorm, norms::b_norm_from_parts, sup_norm, PiecewiseField};
use crate::phase_space::{Semiflow, SystemConstants};

/// Constants `(A, B)` for
/// `||L_z^n f||_{C^a} <= A e^{-(a lambda - sigma) n} |f|_a + B e^{sigma n} (1 + |b|^a) ||f||_inf`
/// assembled from the measured system constants.
pub fn theoretical_ly_constants(c: &SystemConstants, z: TwistParameter) -> (f64, f64) {
    let half = 0.5 * c.c5;
    let a = z.a.abs();
    let diam = c.domain_diameter;
    let big_a = c.c7;
    let big_b = c.c7
        * (2.0 * half.powf(c.alpha)
            + a * half * diam.powf(1.0 - c.alpha) * (a * half * diam).exp()
            + c.c6 * (c.c6 * diam.powf(c.alpha)).exp()
            + 1.0);
    (big_a, big_b)
}

/// Growth rate of `||L_a^n 1||_inf / C7`; equals `sigma` unless a negative
/// damping times `sup tau` exceeds it.
pub fn effective_sigma(c: &SystemConstants, z: TwistParameter, sigma: f64) -> f64 {
    sigma.max((-z.a).max(0.0) * c.c4)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyCell {
    pub probe: usize,
    pub n: usize,
    pub lhs: f64,
    pub contraction_term: f64,
    pub mass_term: f64,
    pub holds: bool,
    pub adapted_lhs: f64,
    pub adapted_rhs: f64,
    pub adapted_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyReport {
    pub z: TwistParameter,
    pub sigma: f64,
    pub sigma_effective: f64,
    pub n_max: usize,
    pub theoretical_a: f64,
    pub theoretical_b: f64,
    /// Least `C` with `lhs <= C (contraction_term + mass_term)` on every cell.
    pub empirical_common: f64,
    pub violations: usize,
    /// Constant used for the (b)-norm form at this `b`.
    pub adapted_constant: f64,
    pub adapted_empirical: f64,
    pub adapted_violations: usize,
    pub cells: Vec<LyCell>,
}

impl LyReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

/// Measures both sides of the inequality for every probe and `n <= n_max`.
///
/// The (b)-norm form is checked with `2 max(A, B (1 + |b|^a))` and
/// `e^{-a lambda n}`, which is what the two-norm inequality implies for the
/// (b)-norm as defined; the constant therefore grows with `|b|`.
pub fn ly_constants<const D: usize>(
    sys: &Semiflow<D>,
    z: TwistParameter,
    n_max: usize,
    probes: &[PiecewiseField<Complex64, D>],
    sigma: f64,
    word_budget: u128,
) -> Result<LyReport> {
    z.validate(sigma)?;
    if probes.is_empty() {
        return Err(Error::Precondition("no probe fields".into()));
    }
    let c = &sys.constants;
    let alpha = c.alpha;
    let sigma_effective = effective_sigma(c, z, sigma);
    let (ta, tb) = theoretical_ly_constants(c, z);
    let bfac = 1.0 + z.b.abs().powf(alpha);
    let adapted_constant = 2.0 * ta.max(tb * bfac);
    let res = probes[0].res();
    if probes.iter().any(|f| f.res() != res) {
        return Err(Error::Precondition("probe fields differ in resolution".into()));
    }
    let all_iterates = apply_twisted_upto_many(sys, z, n_max, probes, res, word_budget)?;
    let mut cells = Vec::new();
    for ((p, f), iterates) in probes.iter().enumerate().zip(all_iterates) {
        let f_sup = sup_norm(f);
        if f_sup == 0.0 {
            return Err(Error::Precondition(format!("probe {p} vanishes")));
        }
        let f_semi = holder_seminorm(f, alpha);
        let f_b = b_norm_from_parts(f_semi, f_sup, alpha, z.b);
        for (n, g) in iterates.iter().enumerate().skip(1) {
            let nf = n as f64;
            let g_sup = sup_norm(g);
            let g_semi = holder_seminorm(g, alpha);
            let lhs = g_semi + g_sup;
            let contraction_term = (-(alpha * c.lambda - sigma_effective) * nf).exp() * f_semi;
            let mass_term = (sigma_effective * nf).exp() * bfac * f_sup;
            let adapted_lhs = b_norm_from_parts(g_semi, g_sup, alpha, z.b);
            let adapted_rhs =
                adapted_constant * (sigma_effective * nf).exp() * ((-alpha * c.lambda * nf).exp() * f_b + f_sup);
            cells.push(LyCell {
                probe: p,
                n,
                lhs,
                contraction_term,
                mass_term,
                holds: lhs <= ta * contraction_term + tb * mass_term,
                adapted_lhs,
                adapted_rhs,
                adapted_holds: adapted_lhs <= adapted_rhs,
            });
        }
    }
    let empirical_common = cells
        .iter()
        .map(|c| c.lhs / (c.contraction_term + c.mass_term))
        .fold(0.0, f64::max);
    let adapted_empirical = cells
        .iter()
        .map(|c| c.adapted_lhs / (c.adapted_rhs / adapted_constant))
        .fold(0.0, f64::max);
    Ok(LyReport {
        z,
        sigma,
        sigma_effective,
        n_max,
        theoretical_a: ta,
        theoretical_b: tb,
        empirical_common,
        violations: cells.iter().filter(|c| !c.holds).count(),
        adapted_constant,
        adapted_empirical,
        adapted_violations: cells.iter().filter(|c| !c.adapted_holds).count(),
        cells,
    })
}
