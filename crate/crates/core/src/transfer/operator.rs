//! The twisted transfer operator `L_z`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::holder::{Observable, PiecewiseField};
use crate::linalg::{self, Point};
use crate::phase_space::{count_words, MarkovMap, Semiflow};

/// Default cap on the number of branch words enumerated per application.
pub const DEFAULT_WORD_BUDGET: u128 = 1 << 20;

/// `z = a + ib`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistParameter {
    pub a: f64,
    pub b: f64,
}

impl TwistParameter {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn zero() -> Self {
        Self { a: 0.0, b: 0.0 }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    /// Requires `a > -sigma`.
    pub fn validate(&self, sigma: f64) -> Result<()> {
        if self.a > -sigma {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "damping a = {} must exceed -sigma = {}",
                self.a, -sigma
            )))
        }
    }
}

fn check_budget<const D: usize>(map: &MarkovMap<D>, n: usize, budget: u128) -> Result<()> {
    let words = count_words(map, n);
    if words > budget {
        return Err(Error::Budget { words, budget });
    }
    Ok(())
}

/// Depth-first walk over all inverse branches of length `n_max` ending in
/// element `elem` at `y`, calling `visit(depth, symbol, x, tau_sum, jac)` at
/// every depth `1..=n_max`.
pub(crate) fn walk_preimages<const D: usize>(
    sys: &Semiflow<D>,
    elem: usize,
    y: &Point<D>,
    n_max: usize,
    visit: &mut impl FnMut(usize, usize, &Point<D>, f64, f64),
) -> Result<()> {
    fn rec<const D: usize>(
        sys: &Semiflow<D>,
        elem: usize,
        y: &Point<D>,
        depth: usize,
        n_max: usize,
        tau: f64,
        jac: f64,
        visit: &mut impl FnMut(usize, usize, &Point<D>, f64, f64),
    ) -> Result<()> {
        for &s in sys.map.predecessors(elem) {
            let x = sys.map.invert_branch(s, y)?;
            let t = tau + sys.roof.value(s, &x);
            let j = jac / linalg::det(&sys.map.jacobian(s, &x)).abs();
            visit(depth + 1, s, &x, t, j);
            if depth + 1 < n_max {
                rec(sys, s, &x, depth + 1, n_max, t, j, visit)?;
            }
        }
        Ok(())
    }
    if n_max == 0 {
        return Ok(());
    }
    rec(sys, elem, y, 0, n_max, 0.0, 1.0, visit)
}

/// `L_z^n f` at the grid nodes of `f`, evaluated exactly through inverse
/// branches. `f` is read off-grid by interpolation.
pub fn apply_twisted<const D: usize>(
    sys: &Semiflow<D>,
    z: TwistParameter,
    n: usize,
    f: &PiecewiseField<Complex64, D>,
    word_budget: u128,
) -> Result<PiecewiseField<Complex64, D>> {
    apply_twisted_observable(sys, z, n, f, f.res(), word_budget)
}

/// `L_z^n f` for any observable, on a fresh grid of `res` nodes per axis.
pub fn apply_twisted_observable<const D: usize, O: Observable<Complex64, D>>(
    sys: &Semiflow<D>,
    z: TwistParameter,
    n: usize,
    f: &O,
    res: usize,
    word_budget: u128,
) -> Result<PiecewiseField<Complex64, D>> {
    Ok(apply_twisted_upto(sys, z, n, f, res, word_budget)?.pop().expect("n + 1 iterates"))
}

/// `[f, L_z f, ..., L_z^{n_max} f]` from a single enumeration of the
/// inverse-branch tree.
pub fn apply_twisted_upto<const D: usize, O: Observable<Complex64, D>>(
    sys: &Semiflow<D>,
    z: TwistParameter,
    n_max: usize,
    f: &O,
    res: usize,
    word_budget: u128,
) -> Result<Vec<PiecewiseField<Complex64, D>>> {
    let mut out = apply_twisted_upto_many(sys, z, n_max, std::slice::from_ref(f), res, word_budget)?;
    Ok(out.pop().expect("one observable"))
}

/// [`apply_twisted_upto`] for several observables sharing one walk of the
/// inverse-branch tree; entry `j` holds the iterates of `fs[j]`.
pub fn apply_twisted_upto_many<const D: usize, O: Observable<Complex64, D>>(
    sys: &Semiflow<D>,
    z: TwistParameter,
    n_max: usize,
    fs: &[O],
    res: usize,
    word_budget: u128,
) -> Result<Vec<Vec<PiecewiseField<Complex64, D>>>> {
    check_budget(&sys.map, n_max, word_budget)?;
    let cells = sys.map.cells();
    let grid = PiecewiseField::<Complex64, D>::zeros(cells, res);
    let per = grid.nodes_per_element();
    let zc = -z.z();
    let m = fs.len();
    // per node: acc[depth * m + j]
    let columns: Vec<Vec<Complex64>> = (0..cells.len() * per)
        .into_par_iter()
        .map(|g| {
            let (e, i) = (g / per, g % per);
            let y = grid.node(e, i);
            let mut acc = vec![Complex64::new(0.0, 0.0); (n_max + 1) * m];
            for (j, f) in fs.iter().enumerate() {
                acc[j] = f.eval(e, &y);
            }
            walk_preimages(sys, e, &y, n_max, &mut |depth, s, x, tau, jac| {
                let w = (zc * tau).exp() * jac;
                for (j, f) in fs.iter().enumerate() {
                    acc[depth * m + j] += w * f.eval(s, x);
                }
            })?;
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<PiecewiseField<Complex64, D>>> =
        (0..m).map(|_| (0..=n_max).map(|_| grid.clone()).collect()).collect();
    for (g, col) in columns.into_iter().enumerate() {
        let (e, i) = (g / per, g % per);
        for (k, v) in col.into_iter().enumerate() {
            out[k % m][k / m].values_mut(e)[i] = v;
        }
    }
    Ok(out)
}

/// Geometric data of one application of `L_z` on a fixed grid: for every
/// node, its one-step preimages together with their roof values, Jacobians
/// and interpolation stencils.
///
/// Iterating the discretized operator composes `n` single steps, so each
/// step adds one interpolation of the previous iterate.
#[derive(Debug, Clone)]
pub struct OneStepKernel<const D: usize> {
    cells: Vec<crate::phase_space::Cell<D>>,
    res: usize,
    row_start: Vec<usize>,
    roof: Vec<f64>,
    jac: Vec<f64>,
    stencil_start: Vec<usize>,
    stencil: Vec<(u32, f64)>,
}

impl<const D: usize> OneStepKernel<D> {
    pub fn build(sys: &Semiflow<D>, res: usize) -> Result<Self> {
        let cells = sys.map.cells().to_vec();
        let grid = PiecewiseField::<f64, D>::zeros(&cells, res);
        let per = grid.nodes_per_element();
        type Row = Vec<(f64, f64, Vec<(u32, f64)>)>;
        let rows: Vec<Row> = (0..cells.len() * per)
            .into_par_iter()
            .map(|g| {
                let (e, i) = (g / per, g % per);
                let y = grid.node(e, i);
                let mut row = Vec::new();
                for &s in sys.map.predecessors(e) {
                    let x = sys.map.invert_branch(s, &y)?;
                    let tau = sys.roof.value(s, &x);
                    let jac = 1.0 / linalg::det(&sys.map.jacobian(s, &x)).abs();
                    row.push((tau, jac, stencil(&grid, s, &x)));
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut k = Self {
            cells,
            res,
            row_start: vec![0],
            roof: Vec::new(),
            jac: Vec::new(),
            stencil_start: vec![0],
            stencil: Vec::new(),
        };
        for row in rows {
            for (tau, jac, st) in row {
                k.roof.push(tau);
                k.jac.push(jac);
                k.stencil.extend(st);
                k.stencil_start.push(k.stencil.len());
            }
            k.row_start.push(k.roof.len());
        }
        Ok(k)
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn cells(&self) -> &[crate::phase_space::Cell<D>] {
        &self.cells
    }

    /// Sparse matrix of `L_z` on this grid.
    pub fn discretize(&self, z: TwistParameter) -> DiscreteOperator<D> {
        let zc = -z.z();
        let mut coeffs = Vec::with_capacity(self.stencil.len());
        let mut row_start = Vec::with_capacity(self.row_start.len());
        row_start.push(0);
        for r in 0..self.row_start.len() - 1 {
            for entry in self.row_start[r]..self.row_start[r + 1] {
                let w = (zc * self.roof[entry]).exp() * self.jac[entry];
                for &(col, sw) in &self.stencil[self.stencil_start[entry]..self.stencil_start[entry + 1]] {
                    coeffs.push((col, w * sw));
                }
            }
            row_start.push(coeffs.len());
        }
        DiscreteOperator {
            cells: self.cells.clone(),
            res: self.res,
            row_start,
            coeffs,
        }
    }
}

fn stencil<const D: usize>(grid: &PiecewiseField<f64, D>, elem: usize, x: &Point<D>) -> Vec<(u32, f64)> {
    let cell = &grid.cells()[elem];
    let res = grid.res();
    let per = grid.nodes_per_element();
    let mut base = [0usize; D];
    let mut frac = [0.0f64; D];
    for k in 0..D {
        let t = ((x[k] - cell.lo[k]) / cell.side(k)).clamp(0.0, 1.0) * (res - 1) as f64;
        let i = (t.floor() as usize).min(res - 2);
        base[k] = i;
        frac[k] = t - i as f64;
    }
    let mut out = Vec::with_capacity(1 << D);
    for corner in 0..(1usize << D) {
        let mut w = 1.0;
        let mut idx = base;
        for k in 0..D {
            if corner >> k & 1 == 1 {
                idx[k] += 1;
                w *= frac[k];
            } else {
                w *= 1.0 - frac[k];
            }
        }
        if w != 0.0 {
            out.push(((elem * per + grid.flat_index(&idx)) as u32, w));
        }
    }
    out
}

/// `L_z` on a fixed grid as a sparse matrix acting on node values.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<const D: usize> {
    cells: Vec<crate::phase_space::Cell<D>>,
    res: usize,
    row_start: Vec<usize>,
    coeffs: Vec<(u32, Complex64)>,
}

impl<const D: usize> DiscreteOperator<D> {
    pub fn res(&self) -> usize {
        self.res
    }

    pub fn apply(&self, f: &PiecewiseField<Complex64, D>) -> PiecewiseField<Complex64, D> {
        assert!(
            f.res() == self.res && f.cells() == self.cells.as_slice(),
            "field grid does not match the operator grid"
        );
        let per = f.nodes_per_element();
        let flat: Vec<Complex64> = f.all_values().copied().collect();
        let out: Vec<Complex64> = (0..self.row_start.len() - 1)
            .into_par_iter()
            .map(|r| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(c, w) in &self.coeffs[self.row_start[r]..self.row_start[r + 1]] {
                    acc += w * flat[c as usize];
                }
                acc
            })
            .collect();
        let values = out.chunks(per).map(<[Complex64]>::to_vec).collect();
        PiecewiseField::from_values(&self.cells, self.res, values)
    }

    pub fn power(&self, f: &PiecewiseField<Complex64, D>, n: usize) -> PiecewiseField<Complex64, D> {
        (0..n).fold(f.clone(), |g, _| self.apply(&g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::holder::sup_norm;
    use crate::phase_space::map::doubling;
    use crate::phase_space::{Roof, Semiflow};

    fn doubling_system(roof: Roof<1>) -> Semiflow<1> {
        Semiflow::new(doubling(), roof, 1025).unwrap().0
    }

    #[test]
    fn doubling_preserves_constants() {
        let sys = doubling_system(Roof::constant(1.0));
        let one = PiecewiseField::constant(sys.map.cells(), 33, Complex64::new(1.0, 0.0));
        for n in 1..6 {
            let g = apply_twisted(&sys, TwistParameter::zero(), n, &one, DEFAULT_WORD_BUDGET).unwrap();
            assert!(g.all_values().all(|v| (v - 1.0).norm() < 1e-14));
        }
    }

    #[test]
    fn constant_roof_twist_is_a_phase() {
        let sys = doubling_system(Roof::constant(1.0));
        let one = PiecewiseField::constant(sys.map.cells(), 17, Complex64::new(1.0, 0.0));
        let b = 3.7;
        for n in 1..5 {
            let g = apply_twisted(&sys, TwistParameter::new(0.0, b), n, &one, DEFAULT_WORD_BUDGET).unwrap();
            let expect = Complex64::new(0.0, -b * n as f64).exp();
            assert!(g.all_values().all(|v| (v - expect).norm() < 1e-13));
        }
    }

    #[test]
    fn budget_overflow_is_reported() {
        let sys = doubling_system(Roof::constant(1.0));
        let one = PiecewiseField::constant(sys.map.cells(), 5, Complex64::new(1.0, 0.0));
        let err = apply_twisted(&sys, TwistParameter::zero(), 11, &one, 1 << 10).unwrap_err();
        assert!(matches!(err, Error::Budget { words: 2048, .. }));
    }

    #[test]
    fn kernel_matches_exact_single_step() {
        let sys = doubling_system(Roof::trig(1.0, 0.2, 1.0));
        let f = PiecewiseField::from_fn(sys.map.cells(), 65, |_, x| {
            Complex64::new((2.0 * std::f64::consts::PI * x[0]).sin(), x[0])
        });
        let z = TwistParameter::new(0.01, 12.0);
        let exact = apply_twisted(&sys, z, 1, &f, DEFAULT_WORD_BUDGET).unwrap();
        let disc = OneStepKernel::build(&sys, 65).unwrap().discretize(z).apply(&f);
        assert!(sup_norm(&(&exact - &disc)) < 1e-13);
    }

    #[test]
    fn upto_returns_every_power() {
        let sys = doubling_system(Roof::affine(0.5, 0.3));
        let f = PiecewiseField::from_fn(sys.map.cells(), 17, |_, x| Complex64::new(x[0] * x[0], 0.0));
        let z = TwistParameter::new(0.0, 5.0);
        let all = apply_twisted_upto(&sys, z, 4, &f, 17, DEFAULT_WORD_BUDGET).unwrap();
        assert_eq!(all.len(), 5);
        assert_eq!(all[0], f);
        for n in 1..=4 {
            let one = apply_twisted(&sys, z, n, &f, DEFAULT_WORD_BUDGET).unwrap();
            assert!(sup_norm(&(&one - &all[n])) < 1e-15);
        }
    }

    #[test]
    fn batched_walk_matches_single() {
        let sys = doubling_system(Roof::affine(0.5, 0.3));
        let fs: Vec<_> = (1..4)
            .map(|k| PiecewiseField::from_fn(sys.map.cells(), 33, move |_, x| Complex64::new(0.0, (k as f64 * x[0]).sin())))
            .collect();
        let z = TwistParameter::new(0.01, -7.0);
        let many = apply_twisted_upto_many(&sys, z, 5, &fs, 33, DEFAULT_WORD_BUDGET).unwrap();
        for (f, got) in fs.iter().zip(&many) {
            assert_eq!(*got, apply_twisted_upto(&sys, z, 5, f, 33, DEFAULT_WORD_BUDGET).unwrap());
        }
    }
}
