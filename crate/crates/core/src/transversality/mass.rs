//! The mass sums `phi` (non-transversal preimages) and `varphi`
//! (preimages whose image cone contains a given plane).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cone::{cones_transversal, ConeImage, CONE_MARGIN};
use crate::error::{Error, Result};
use crate::holder::PiecewiseField;
use crate::linalg::{self, Mat, Point, Row};
use crate::phase_space::{count_words, BranchWord, Semiflow};

/// One preimage `x = l_w(y)` with the data of its image cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Preimage<const D: usize> {
    pub word: BranchWord,
    pub point: Point<D>,
    pub cone: ConeImage<D>,
    /// `J_n(x)`
    pub jacobian: f64,
    pub roof_sum: f64,
}

/// All of `T^-n(y)` for `y` in element `elem`, in depth-first order.
pub fn preimages<const D: usize>(
    sys: &Semiflow<D>,
    n: usize,
    elem: usize,
    y: &Point<D>,
    word_budget: u128,
) -> Result<Vec<Preimage<D>>> {
    let words = count_words(&sys.map, n);
    if words > word_budget {
        return Err(Error::Budget {
            words,
            budget: word_budget,
        });
    }
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    #[allow(clippy::too_many_arguments)]
    fn rec<const D: usize>(
        sys: &Semiflow<D>,
        n: usize,
        elem: usize,
        x: &Point<D>,
        deriv: &Mat<D>,
        roof_sum: f64,
        roof_deriv: &Row<D>,
        stack: &mut Vec<usize>,
        out: &mut Vec<Preimage<D>>,
    ) -> Result<()> {
        if stack.len() == n {
            out.push(Preimage {
                word: BranchWord::new(stack.clone()),
                point: *x,
                cone: ConeImage {
                    slope: *roof_deriv,
                    contraction: *deriv,
                },
                jacobian: linalg::det(deriv).abs(),
                roof_sum,
            });
            return Ok(());
        }
        for &s in sys.map.predecessors(elem) {
            let xs = sys.map.invert_branch(s, x)?;
            let inv = linalg::inverse(&sys.map.jacobian(s, &xs))
                .ok_or_else(|| Error::numerical("singular branch Jacobian", 0.0))?;
            let d = inv * deriv;
            let rd = roof_deriv + sys.roof.gradient(s, &xs) * d;
            stack.push(s);
            rec(sys, n, s, &xs, &d, roof_sum + sys.roof.value(s, &xs), &rd, stack, out)?;
            stack.pop();
        }
        Ok(())
    }
    rec(
        sys,
        n,
        elem,
        y,
        &Mat::<D>::identity(),
        0.0,
        &Row::<D>::zeros(),
        &mut stack,
        &mut out,
    )?;
    Ok(out)
}

/// `sum J_n(x)` over preimages `x` whose image cone is not transversal to
/// that of `pre[reference]`.
pub fn phi_sum<const D: usize>(pre: &[Preimage<D>], reference: usize, c5: f64) -> f64 {
    let r = &pre[reference].cone;
    pre.iter()
        .filter(|p| !cones_transversal(&p.cone, r, c5))
        .map(|p| p.jacobian)
        .sum()
}

/// `max` over reference preimages of [`phi_sum`].
pub fn phi_at<const D: usize>(pre: &[Preimage<D>], c5: f64) -> f64 {
    if D == 1 {
        return phi_at_1d(pre, c5);
    }
    (0..pre.len())
        .map(|i| phi_sum(pre, i, c5))
        .fold(0.0, f64::max)
}

// O(N^2) with the scalar test inlined
fn phi_at_1d<const D: usize>(pre: &[Preimage<D>], c5: f64) -> f64 {
    let s: Vec<f64> = pre.iter().map(|p| p.cone.slope[0]).collect();
    let a: Vec<f64> = pre.iter().map(|p| p.cone.contraction[(0, 0)].abs()).collect();
    let mut best: f64 = 0.0;
    for i in 0..pre.len() {
        let mut sum = 0.0;
        for j in 0..pre.len() {
            let transversal = (s[i] - s[j]).abs() > c5 * (a[i] + a[j]) * (1.0 + CONE_MARGIN);
            if !transversal {
                sum += pre[j].jacobian;
            }
        }
        best = best.max(sum);
    }
    best
}

/// Uniform grid of `per_axis` points per axis in every element, excluding
/// element boundaries.
pub fn y_grid<const D: usize>(sys: &Semiflow<D>, per_axis: usize) -> Vec<(usize, Point<D>)> {
    let mut out = Vec::new();
    for (e, cell) in sys.map.cells().iter().enumerate() {
        for idx in 0..per_axis.pow(D as u32) {
            let mut rem = idx;
            let p = Point::<D>::from_fn(|k, _| {
                let t = (rem % per_axis) as f64 + 0.5;
                rem /= per_axis;
                cell.lo[k] + t / per_axis as f64 * cell.side(k)
            });
            out.push((e, p));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiRow {
    pub n: usize,
    pub y_index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiTable {
    pub rows: Vec<PhiRow>,
    /// `phi(n)` = max over the y grid.
    pub phi: Vec<(usize, f64)>,
    /// Least-squares slope of `ln phi(n)` against `n`.
    pub log_slope: Option<f64>,
}

/// `phi(n)` for each `n`, as a supremum over a y grid and all reference
/// preimages.
pub fn phi_table<const D: usize>(
    sys: &Semiflow<D>,
    ns: &[usize],
    ys: &[(usize, Point<D>)],
    word_budget: u128,
) -> Result<PhiTable> {
    let c5 = sys.constants.c5;
    let mut rows = Vec::new();
    let mut phi = Vec::new();
    for &n in ns {
        let values: Vec<f64> = ys
            .par_iter()
            .map(|(e, y)| Ok(phi_at(&preimages(sys, n, *e, y, word_budget)?, c5)))
            .collect::<Result<_>>()?;
        let max = values.iter().copied().fold(0.0, f64::max);
        rows.extend(values.into_iter().enumerate().map(|(i, v)| PhiRow {
            n,
            y_index: i,
            value: v,
        }));
        phi.push((n, max));
    }
    Ok(PhiTable {
        log_slope: log_slope(&phi),
        rows,
        phi,
    })
}

pub(crate) fn log_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.1 > 0.0)
        .map(|&(n, v)| (n as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `(C9, gamma)` with `phi(n) <= C9 e^{-gamma n}` on the table: `gamma` from
/// the log-slope (floored at zero), `C9` the smallest constant making the
/// envelope hold at every tabulated `n`.
pub fn phi_envelope(table: &PhiTable) -> (f64, f64) {
    let gamma = table.log_slope.map_or(0.0, |s| (-s).max(0.0));
    let c9 = table
        .phi
        .iter()
        .map(|&(n, v)| v * (gamma * n as f64).exp())
        .fold(0.0, f64::max);
    (c9, gamma)
}

/// `varphi(n, P, y)` for the plane `P = {(v, p v)}`.
pub fn varphi_sum<const D: usize>(
    pre: &[Preimage<D>],
    p: &Row<D>,
    c5: f64,
    density: &PiecewiseField<f64, D>,
    elem: usize,
    y: &Point<D>,
) -> f64 {
    let hy = density.eval(elem, y);
    pre.iter()
        .filter(|q| q.cone.contains_plane(p, c5))
        .map(|q| {
            let e = q.word.last().expect("non-empty word");
            q.jacobian * density.eval(e, &q.point) / hy
        })
        .sum()
}

/// `sup_P varphi(n, P, y)`.
///
/// In dimension one the planes contained in an image cone form the open
/// slope interval `(s - C5 |A|, s + C5 |A|)`, and the supremum is found
/// exactly by sweeping interval endpoints. In dimension two the supremum is
/// taken over a grid of `slope_grid^2` slopes in `[-C5, C5]^2`.
pub fn varphi_sup<const D: usize>(
    pre: &[Preimage<D>],
    c5: f64,
    density: &PiecewiseField<f64, D>,
    elem: usize,
    y: &Point<D>,
    slope_grid: usize,
) -> (f64, Row<D>) {
    let hy = density.eval(elem, y);
    let weights: Vec<f64> = pre
        .iter()
        .map(|q| q.jacobian * density.eval(q.word.last().expect("non-empty word"), &q.point) / hy)
        .collect();
    if D == 1 {
        // (position, is_open, weight); closings sort before openings at ties
        let mut events: Vec<(f64, bool, f64)> = Vec::with_capacity(2 * pre.len());
        for (q, w) in pre.iter().zip(&weights) {
            let r = c5 * q.cone.contraction[(0, 0)].abs() * (1.0 - CONE_MARGIN);
            let s = q.cone.slope[0];
            events.push((s - r, true, *w));
            events.push((s + r, false, *w));
        }
        events.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let (mut cur, mut best, mut best_p) = (0.0, 0.0, 0.0);
        for i in 0..events.len() {
            let (pos, open, w) = events[i];
            if open {
                cur += w;
                // the open interval starts just right of pos
                if cur > best {
                    best = cur;
                    let next = events.get(i + 1).map_or(pos, |e| e.0);
                    best_p = 0.5 * (pos + next);
                }
            } else {
                cur -= w;
            }
        }
        return (best, Row::<D>::repeat(best_p));
    }
    let m = slope_grid.max(2);
    let mut best = (0.0, Row::<D>::zeros());
    for idx in 0..m.pow(D as u32) {
        let mut rem = idx;
        let p = Row::<D>::from_fn(|_, _| {
            let t = (rem % m) as f64 / (m - 1) as f64;
            rem /= m;
            c5 * (2.0 * t - 1.0)
        });
        let v: f64 = pre
            .iter()
            .zip(&weights)
            .filter(|(q, _)| q.cone.contains_plane(&p, c5))
            .map(|(_, w)| w)
            .sum();
        if v > best.0 {
            best = (v, p);
        }
    }
    best
}

/// `varphi(n) = sup_y sup_P varphi(n, P, y)` over a y grid.
pub fn varphi_table<const D: usize>(
    sys: &Semiflow<D>,
    ns: &[usize],
    ys: &[(usize, Point<D>)],
    density: &PiecewiseField<f64, D>,
    slope_grid: usize,
    word_budget: u128,
) -> Result<Vec<(usize, f64, Vec<f64>)>> {
    let c5 = sys.constants.c5;
    ns.iter()
        .map(|&n| {
            let per_y: Vec<f64> = ys
                .par_iter()
                .map(|(e, y)| {
                    let pre = preimages(sys, n, *e, y, word_budget)?;
                    Ok(varphi_sup(&pre, c5, density, *e, y, slope_grid).0)
                })
                .collect::<Result<_>>()?;
            let sup = per_y.iter().copied().fold(0.0, f64::max);
            Ok((n, sup, per_y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::doubling;
    use crate::phase_space::Roof;

    #[test]
    fn doubling_preimages() {
        let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
        let pre = preimages(&sys, 3, 0, &Point::<1>::new(0.3), 1 << 20).unwrap();
        assert_eq!(pre.len(), 8);
        assert!(pre.iter().all(|p| (p.jacobian - 0.125).abs() < 1e-15));
        assert!(pre.iter().all(|p| (p.cone.slope[0] - 0.875).abs() < 1e-15));
        assert!((phi_at(&pre, sys.constants.c5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interval_sweep_matches_brute_force() {
        let sys = Semiflow::new(
            crate::phase_space::map::perturbed_doubling(0.05).unwrap(),
            Roof::trig(1.0, 0.2, 1.0),
            1025,
        )
        .unwrap()
        .0;
        let h = PiecewiseField::<f64, 1>::from_fn(sys.map.cells(), 65, |_, x| 1.0 + 0.1 * x[0]);
        let y = Point::<1>::new(0.4);
        let pre = preimages(&sys, 5, 0, &y, 1 << 20).unwrap();
        let c5 = sys.constants.c5;
        let (best, _) = varphi_sup(&pre, c5, &h, 0, &y, 0);
        let mut brute: f64 = 0.0;
        for i in 0..=20_000 {
            let p = Row::<1>::new(-2.0 * c5 + 4.0 * c5 * i as f64 / 20_000.0);
            brute = brute.max(varphi_sum(&pre, &p, c5, &h, 0, &y));
        }
        assert!(brute <= best + 1e-15);
        assert!(best - brute < 1e-9 || best <= brute * 1.05, "{best} vs {brute}");
    }
}
