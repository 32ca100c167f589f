//! Detection of roofs cohomologous to a piecewise constant function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mass::{phi_envelope, phi_table, y_grid, PhiTable};
use super::omega::{omega_depth, omega_limit, theta_series, BranchPolicy};
use crate::error::Result;
use crate::holder::PiecewiseField;
use crate::linalg::Point;
use crate::phase_space::Semiflow;
use crate::transfer::DEFAULT_WORD_BUDGET;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Cohomologous,
    NotCohomologous,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohomologyOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    /// Grid resolution per element for the returned `theta`.
    pub theta_res: usize,
    /// Depths at which `phi(n)` is tabulated as decay evidence.
    pub phi_depths: Vec<usize>,
    /// Grid points per axis per element for the `phi` supremum.
    pub phi_grid: usize,
    pub word_budget: u128,
}

impl Default for CohomologyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            samples: 50,
            seed: 0,
            theta_res: 65,
            phi_depths: (2..=8).collect(),
            phi_grid: 4,
            word_budget: DEFAULT_WORD_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohomologyVerdict<const D: usize> {
    pub verdict: Verdict,
    pub tol: f64,
    /// Largest `|Omega_1 - Omega_2|` between the two branch policies.
    pub discrepancy: f64,
    /// `sup |D(tau + theta - theta o T)|` over the sample points, when
    /// `theta` was built.
    pub residual: Option<f64>,
    /// Mean of `tau + theta - theta o T` per element.
    pub chi: Vec<f64>,
    /// Whether all entries of `chi` agree to `tol`.
    pub chi_all_equal: bool,
    pub phi: Option<PhiTable>,
    pub phi_slope: Option<f64>,
    /// `(C9, gamma)` fitted to the `phi` table.
    pub phi_envelope: Option<(f64, f64)>,
    pub depth: usize,
    #[serde(skip)]
    pub theta: Option<PiecewiseField<f64, D>>,
}

/// Sample points spread over the elements in turn, each uniform inside its
/// element away from the boundary by `margin` of the side.
fn samples<const D: usize>(sys: &Semiflow<D>, count: usize, seed: u64, margin: f64) -> Vec<(usize, Point<D>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.map.len();
    (0..count.max(n))
        .map(|i| {
            let e = i % n;
            let c = sys.map.cell(e);
            let p = Point::<D>::from_fn(|k, _| {
                let t = margin + (1.0 - 2.0 * margin) * rng.gen::<f64>();
                c.lo[k] + t * c.side(k)
            });
            (e, p)
        })
        .collect()
}

/// `tau + theta - theta o T` at `x` in element `e`.
fn residual_fn<const D: usize>(
    sys: &Semiflow<D>,
    e: usize,
    x: &Point<D>,
    base: (usize, &Point<D>),
    policy: &BranchPolicy,
    depth: usize,
) -> Result<f64> {
    let (theta, _) = theta_series(sys, e, x, base, policy, depth)?;
    let y = sys.map.apply_branch(e, x);
    let ey = sys.map.locate(&y).unwrap_or(e);
    let (theta_ty, _) = theta_series(sys, ey, &y, base, policy, depth)?;
    Ok(sys.roof.value(e, x) + theta - theta_ty)
}

/// Decides whether the roof is cohomologous to a function constant on
/// partition elements.
///
/// `Omega` is compared under the lowest and highest branch policies at the
/// sample points. A discrepancy above `10 tol` yields `NotCohomologous`
/// with `phi(n)` decay evidence. Otherwise `theta` is built from the
/// lowest-branch series and the derivative of `tau + theta - theta o T` is
/// measured by central differences: below `tol` the verdict is
/// `Cohomologous` with `chi` the per-element mean, and `Inconclusive`
/// otherwise.
pub fn cohomology_detect<const D: usize>(
    sys: &Semiflow<D>,
    opts: &CohomologyOptions,
) -> Result<CohomologyVerdict<D>> {
    let tol = opts.tol;
    let series_tol = tol * 1e-3;
    let c = &sys.constants;
    let depth = omega_depth(c.c3, c.lambda, series_tol);
    let pts = samples(sys, opts.samples, opts.seed, 1e-3);

    let discrepancy = pts
        .par_iter()
        .map(|(e, x)| {
            let a = omega_limit(sys, *e, x, &BranchPolicy::Lowest, series_tol)?;
            let b = omega_limit(sys, *e, x, &BranchPolicy::Highest, series_tol)?;
            Ok((a.value - b.value).norm())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let mut out = CohomologyVerdict {
        verdict: Verdict::Inconclusive,
        tol,
        discrepancy,
        residual: None,
        chi: Vec::new(),
        chi_all_equal: false,
        phi: None,
        phi_slope: None,
        phi_envelope: None,
        depth,
        theta: None,
    };

    if discrepancy > 10.0 * tol {
        let ys = y_grid(sys, opts.phi_grid);
        let table = phi_table(sys, &opts.phi_depths, &ys, opts.word_budget)?;
        out.phi_slope = table.log_slope;
        out.phi_envelope = Some(phi_envelope(&table));
        out.phi = Some(table);
        out.verdict = Verdict::NotCohomologous;
        return Ok(out);
    }

    let policy = BranchPolicy::Lowest;
    let x0 = sys.map.cell(0).midpoint();
    let base = (0usize, &x0);
    let per_point = pts
        .par_iter()
        .map(|(e, x)| {
            let cell = sys.map.cell(*e);
            let r = residual_fn(sys, *e, x, base, &policy, depth)?;
            let mut grad: f64 = 0.0;
            for k in 0..D {
                let h = 1e-5 * cell.side(k);
                let mut xp = *x;
                let mut xm = *x;
                xp[k] += h;
                xm[k] -= h;
                let d = (residual_fn(sys, *e, &xp, base, &policy, depth)?
                    - residual_fn(sys, *e, &xm, base, &policy, depth)?)
                    / (2.0 * h);
                grad += d * d;
            }
            Ok((*e, r, grad.sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;

    let residual = per_point.iter().map(|p| p.2).fold(0.0, f64::max);
    let mut sums = vec![(0.0, 0usize); sys.map.len()];
    for &(e, r, _) in &per_point {
        sums[e].0 += r;
        sums[e].1 += 1;
    }
    let chi: Vec<f64> = sums.iter().map(|&(s, n)| s / n as f64).collect();
    let (lo, hi) = chi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    out.chi_all_equal = hi - lo < tol;
    out.chi = chi;
    out.residual = Some(residual);
    if residual < tol {
        out.verdict = Verdict::Cohomologous;
        let theta = PiecewiseField::from_fn(sys.map.cells(), opts.theta_res, |e, x| {
            theta_series(sys, e, x, base, &policy, depth).map_or(f64::NAN, |t| t.0)
        });
        out.theta = Some(theta);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::doubling;
    use crate::phase_space::Roof;

    #[test]
    fn doubling_constant_roof() {
        let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
        let v = cohomology_detect(&sys, &CohomologyOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Cohomologous);
        assert_eq!(v.residual, Some(0.0));
        assert!(v.chi.iter().all(|c| (c - 1.0).abs() < 1e-15));
        assert!(v.chi_all_equal);
        let theta = v.theta.unwrap();
        assert!(theta.all_values().all(|t| *t == 0.0));
    }

    #[test]
    fn doubling_identity_roof() {
        // theta(x) = x - 1/4 and x = theta(2x mod 1) - theta(x) + chi with
        // chi = 0 on [0, 1/2) and 1 on [1/2, 1)
        let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
        let v = cohomology_detect(&sys, &CohomologyOptions::default()).unwrap();
        assert_eq!(v.verdict, Verdict::Cohomologous);
        assert!(v.chi[0].abs() < 1e-8 && (v.chi[1] - 1.0).abs() < 1e-8, "{:?}", v.chi);
        assert!(!v.chi_all_equal);
        let theta = v.theta.unwrap();
        let x = Point::<1>::new(0.8);
        assert!((theta.eval(1, &x) - (0.8 - 0.25)).abs() < 1e-8);
    }
}
