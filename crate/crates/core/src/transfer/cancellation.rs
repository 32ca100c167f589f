//! Pairwise cancellation between inverse branches in `|L_z^n f|^2`.
//!
//! For branches `w`, `v` of length `n = n1 + n2` over an element `E`,
//! `I(w, v) = int_E K_w conj(K_v) e^{-ib (tau_n o l_w - tau_n o l_v)}` with
//! `K_w = (J_n f e^{-a tau_n}) o l_w`. Summed over all ordered pairs these
//! give `int_E |L_z^n f|^2`. Pairs are split by transversality of their
//! `n2`-step image cones at the midpoint of `E`: transversal pairs are
//! oscillatory integrals with a phase derivative bounded away from zero,
//! non-transversal pairs carry no cancellation.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holder::oscint::oscint_constant;
use crate::holder::{FieldScalar, Observable};
use crate::linalg::Point;
use crate::phase_space::{inverse_chain, Semiflow};
use crate::transfer::DEFAULT_WORD_BUDGET;
use crate::transversality::{cones_transversal, preimages};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationOptions {
    pub a: f64,
    pub b: f64,
    pub n1: usize,
    pub n2: usize,
    /// Lower limit on the number of quadrature nodes per element.
    pub min_nodes: usize,
    pub nodes_per_period: usize,
    /// `(C9, gamma)` of a `phi(n) <= C9 e^{-gamma n}` envelope, for the
    /// non-transversal mass comparison.
    pub phi_envelope: Option<(f64, f64)>,
    /// Keep the per-pair table (large: one entry per ordered pair).
    pub keep_pairs: bool,
    pub word_budget: u128,
}

impl Default for CancellationOptions {
    fn default() -> Self {
        Self {
            a: 0.0,
            b: 60.0,
            n1: 4,
            n2: 4,
            min_nodes: 513,
            nodes_per_period: 20,
            phi_envelope: None,
            keep_pairs: false,
            word_budget: DEFAULT_WORD_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub elem: usize,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub transversal: bool,
    pub integral: Complex64,
    /// Oscillatory-integral bound, for transversal pairs whose phase
    /// derivative keeps one sign on `E`.
    pub bound: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CancellationTable {
    pub a: f64,
    pub b: f64,
    pub n1: usize,
    pub n2: usize,
    /// Quadrature nodes per element.
    pub nodes: usize,
    pub transversal_pairs: usize,
    pub nontransversal_pairs: usize,
    /// `|sum I|` over transversal pairs.
    pub transversal_subtotal: f64,
    /// `sum |I|` over transversal pairs.
    pub transversal_magnitude: f64,
    pub nontransversal_subtotal: f64,
    pub nontransversal_magnitude: f64,
    /// Sum over all pairs, equal to `int |L_z^n f|^2`.
    pub total: Complex64,
    /// Sum of the per-pair bounds.
    pub bound_sum: f64,
    pub bounded_pairs: usize,
    pub bounds_satisfied: usize,
    /// Transversal pairs whose phase derivative vanishes somewhere on `E`.
    pub unbounded_pairs: usize,
    /// `max_w sum_{v not transversal to w} J_n(l_v y)` at element midpoints.
    pub nontransversal_mass: f64,
    /// `C7 C9 e^{-gamma n2}`.
    pub mass_bound: Option<f64>,
    pub mass_bound_holds: Option<bool>,
    pub pairs: Vec<PairEntry>,
}

/// Values of one branch at the quadrature nodes.
struct BranchData {
    word: Vec<usize>,
    prefix: usize,
    /// `K_w e^{-ib tau_n o l_w}`
    full: Vec<Complex64>,
    amplitude: Vec<Complex64>,
    slope: Vec<f64>,
}

fn simpson_weights(m: usize, h: f64) -> Vec<f64> {
    (0..m)
        .map(|i| {
            let c = if i == 0 || i == m - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Dyadic-pair Hölder seminorm of samples with spacing `h`, the same
/// estimator as [`crate::holder::holder_seminorm`] restricted to one interval.
fn seminorm_1d<S: FieldScalar>(values: &[S], h: f64, alpha: f64) -> f64 {
    let m = values.len();
    let mut best: f64 = 0.0;
    let mut step = 1;
    while step < m {
        let scale = (step as f64 * h).powf(alpha);
        for i in 0..m - step {
            best = best.max((values[i + step] - values[i]).modulus() / scale);
        }
        step *= 2;
    }
    best
}

/// The pair table for `f` at `z = a + ib` over every element.
pub fn pairwise_cancellation<O: Observable<Complex64, 1>>(
    sys: &Semiflow<1>,
    f: &O,
    opts: &CancellationOptions,
) -> Result<CancellationTable> {
    let n = opts.n1 + opts.n2;
    if opts.n2 == 0 || n == 0 {
        return Err(Error::Precondition("n2 must be positive".into()));
    }
    let c = &sys.constants;
    let (a, b, alpha) = (opts.a, opts.b, sys.alpha());
    let mut table = CancellationTable {
        a,
        b,
        n1: opts.n1,
        n2: opts.n2,
        nodes: 0,
        transversal_pairs: 0,
        nontransversal_pairs: 0,
        transversal_subtotal: 0.0,
        transversal_magnitude: 0.0,
        nontransversal_subtotal: 0.0,
        nontransversal_magnitude: 0.0,
        total: Complex64::new(0.0, 0.0),
        bound_sum: 0.0,
        bounded_pairs: 0,
        bounds_satisfied: 0,
        unbounded_pairs: 0,
        nontransversal_mass: 0.0,
        mass_bound: opts.phi_envelope.map(|(c9, gamma)| c.c7 * c9 * (-gamma * opts.n2 as f64).exp()),
        mass_bound_holds: None,
        pairs: Vec::new(),
    };
    let (mut trans_sum, mut non_sum) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));

    for (e, cell) in sys.map.cells().iter().enumerate() {
        let width = cell.side(0);
        // |theta'| <= C5, so this many nodes resolve every pair's period
        let periods = b.abs() * c.c5 * width / (2.0 * std::f64::consts::PI);
        let mut m = ((opts.nodes_per_period as f64 * periods).ceil() as usize + 1).max(opts.min_nodes);
        if m % 2 == 0 {
            m += 1;
        }
        table.nodes = table.nodes.max(m);
        let h = width / (m - 1) as f64;
        let ys: Vec<Point<1>> = (0..m).map(|i| Point::<1>::new(cell.lo[0] + i as f64 * h)).collect();
        let weights = simpson_weights(m, h);

        let mid = cell.midpoint();
        let prefixes = preimages(sys, opts.n2, e, &mid, opts.word_budget)?;
        let prefix_index: HashMap<Vec<usize>, usize> = prefixes
            .iter()
            .enumerate()
            .map(|(i, p)| (p.word.symbols().to_vec(), i))
            .collect();
        let full = preimages(sys, n, e, &mid, opts.word_budget)?;
        let mid_jac: Vec<f64> = full.iter().map(|p| p.jacobian).collect();

        let branches: Vec<BranchData> = full
            .par_iter()
            .map(|p| {
                let mut fullv = Vec::with_capacity(m);
                let mut amp = Vec::with_capacity(m);
                let mut slope = Vec::with_capacity(m);
                let last = p.word.last().expect("non-empty word");
                for y in &ys {
                    let ch = inverse_chain(&sys.map, &sys.roof, &p.word, y)?;
                    let k = f.eval(last, &ch.point) * (ch.jacobian * (-a * ch.roof_sum).exp());
                    amp.push(k);
                    fullv.push(k * Complex64::new(0.0, -b * ch.roof_sum).exp());
                    slope.push(ch.roof_derivative[0]);
                }
                Ok(BranchData {
                    word: p.word.symbols().to_vec(),
                    prefix: prefix_index[p.word.prefix(opts.n2).symbols()],
                    full: fullv,
                    amplitude: amp,
                    slope,
                })
            })
            .collect::<Result<_>>()?;

        let transversal = |i: usize, j: usize| {
            cones_transversal(&prefixes[branches[i].prefix].cone, &prefixes[branches[j].prefix].cone, c.c5)
        };
        let mass = (0..branches.len())
            .map(|i| (0..branches.len()).filter(|&j| !transversal(i, j)).map(|j| mid_jac[j]).sum::<f64>())
            .fold(0.0, f64::max);
        table.nontransversal_mass = table.nontransversal_mass.max(mass);

        let rows: Vec<Vec<PairEntry>> = (0..branches.len())
            .into_par_iter()
            .map(|i| {
                (0..branches.len())
                    .map(|j| {
                        let (bi, bj) = (&branches[i], &branches[j]);
                        let integral: Complex64 = (0..m).map(|t| bi.full[t] * bj.full[t].conj() * weights[t]).sum();
                        let tr = transversal(i, j);
                        let (mut bound, mut kappa) = (None, None);
                        if tr {
                            let tp: Vec<f64> = (0..m).map(|t| bi.slope[t] - bj.slope[t]).collect();
                            let sign = tp[0].signum();
                            let k_min = tp.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                            if k_min > 0.0 && tp.iter().all(|v| v.signum() == sign) {
                                let tp_sup = tp.iter().map(|v| v.abs()).fold(0.0, f64::max);
                                let amp: Vec<Complex64> =
                                    (0..m).map(|t| bi.amplitude[t] * bj.amplitude[t].conj()).collect();
                                let amp_sup = amp.iter().map(|v| v.norm()).fold(0.0, f64::max);
                                let k_norm = amp_sup + seminorm_1d(&amp, h, alpha);
                                let constant = oscint_constant(tp_sup, seminorm_1d(&tp, h, alpha));
                                bound = Some(constant / (k_min * k_min * b.abs().powf(alpha)) * k_norm);
                                kappa = Some(k_min);
                            }
                        }
                        PairEntry {
                            elem: e,
                            first: bi.word.clone(),
                            second: bj.word.clone(),
                            transversal: tr,
                            integral,
                            bound,
                            kappa,
                        }
                    })
                    .collect()
            })
            .collect();

        for entry in rows.into_iter().flatten() {
            table.total += entry.integral;
            if entry.transversal {
                table.transversal_pairs += 1;
                trans_sum += entry.integral;
                table.transversal_magnitude += entry.integral.norm();
                match entry.bound {
                    Some(bd) => {
                        table.bounded_pairs += 1;
                        table.bound_sum += bd;
                        if entry.integral.norm() <= bd {
                            table.bounds_satisfied += 1;
                        }
                    }
                    None => table.unbounded_pairs += 1,
                }
            } else {
                table.nontransversal_pairs += 1;
                non_sum += entry.integral;
                table.nontransversal_magnitude += entry.integral.norm();
            }
            if opts.keep_pairs {
                table.pairs.push(entry);
            }
        }
    }
    table.transversal_subtotal = trans_sum.norm();
    table.nontransversal_subtotal = non_sum.norm();
    table.mass_bound_holds = table.mass_bound.map(|mb| table.nontransversal_mass <= mb);
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::doubling;
    use crate::phase_space::Roof;

    #[test]
    fn constant_roof_has_no_transversal_pairs() {
        let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
        let one = |_: usize, _: &Point<1>| Complex64::new(1.0, 0.0);
        let opts = CancellationOptions {
            n1: 2,
            n2: 2,
            b: 30.0,
            ..Default::default()
        };
        let t = pairwise_cancellation(&sys, &one, &opts).unwrap();
        assert_eq!(t.transversal_pairs, 0);
        assert_eq!(t.nontransversal_pairs, 2 * 16 * 16);
        assert!((t.nontransversal_mass - 1.0).abs() < 1e-14);
        // |L^n 1|^2 = 1 on [0, 1]
        assert!((t.total - 1.0).norm() < 1e-12);
    }

    #[test]
    fn zero_observable_gives_zero_table() {
        let sys = Semiflow::new(doubling(), Roof::affine(1.0, 0.5), 257).unwrap().0;
        let zero = |_: usize, _: &Point<1>| Complex64::new(0.0, 0.0);
        let opts = CancellationOptions {
            n1: 1,
            n2: 2,
            keep_pairs: true,
            ..Default::default()
        };
        let t = pairwise_cancellation(&sys, &zero, &opts).unwrap();
        assert!(t.pairs.iter().all(|p| p.integral == Complex64::new(0.0, 0.0)));
        assert_eq!(t.total, Complex64::new(0.0, 0.0));
    }
}
