//! Piecewise expanding Markov maps on boxes of R^d.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Point};

/// Inversion tolerance in dimension one.
pub const INVERSION_TOL_1D: f64 = 1e-12;
/// Inversion tolerance in dimension two and above.
pub const INVERSION_TOL_ND: f64 = 1e-10;

const BOUNDARY_SLACK: f64 = 1e-12;

/// An open axis-aligned box (an open interval when `D = 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell<const D: usize> {
    pub lo: Point<D>,
    pub hi: Point<D>,
}

impl<const D: usize> Cell<D> {
    pub fn new(lo: Point<D>, hi: Point<D>) -> Self {
        Self { lo, hi }
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn measure(&self) -> f64 {
        (0..D).map(|k| self.side(k)).product()
    }

    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn min_side(&self) -> f64 {
        (0..D).map(|k| self.side(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn midpoint(&self) -> Point<D> {
        (self.lo + self.hi) * 0.5
    }

    /// Half-open membership `lo <= x < hi` on every axis.
    pub fn contains(&self, x: &Point<D>) -> bool {
        (0..D).all(|k| x[k] >= self.lo[k] && x[k] < self.hi[k])
    }

    /// Membership in the closure, with an absolute slack.
    pub fn contains_closed(&self, x: &Point<D>, slack: f64) -> bool {
        (0..D).all(|k| x[k] >= self.lo[k] - slack && x[k] <= self.hi[k] + slack)
    }

    pub fn contains_cell(&self, other: &Cell<D>, slack: f64) -> bool {
        self.contains_closed(&other.lo, slack) && self.contains_closed(&other.hi, slack)
    }

    pub fn clamp(&self, x: &Point<D>) -> Point<D> {
        Point::<D>::from_fn(|k, _| x[k].clamp(self.lo[k], self.hi[k]))
    }

    pub fn overlap(&self, other: &Cell<D>) -> f64 {
        (0..D)
            .map(|k| (self.hi[k].min(other.hi[k]) - self.lo[k].max(other.lo[k])).max(0.0))
            .product()
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Cell<D>) -> Cell<D> {
        Cell::new(self.lo.inf(&other.lo), self.hi.sup(&other.hi))
    }

    /// Corner `i`: bit `k` of `i` selects `hi` on axis `k`.
    pub fn corner(&self, i: usize) -> Point<D> {
        Point::<D>::from_fn(|k, _| if i >> k & 1 == 1 { self.hi[k] } else { self.lo[k] })
    }
}

impl Cell<1> {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Cell::new(Point::<1>::new(lo), Point::<1>::new(hi))
    }
}

/// One branch of a piecewise map: a C^1 diffeomorphism from its partition
/// element onto its image.
pub trait Branch<const D: usize>: Send + Sync + fmt::Debug {
    fn apply(&self, x: &Point<D>) -> Point<D>;

    fn jacobian(&self, x: &Point<D>) -> Mat<D>;

    fn has_closed_form_inverse(&self) -> bool {
        false
    }

    /// Preimage of `y` inside the closure of `cell`.
    fn invert(&self, y: &Point<D>, cell: &Cell<D>) -> Result<Point<D>> {
        newton_inverse(self, y, cell)
    }
}

/// Damped Newton iteration confined to the closed cell.
fn newton_inverse<const D: usize, B: Branch<D> + ?Sized>(
    branch: &B,
    y: &Point<D>,
    cell: &Cell<D>,
) -> Result<Point<D>> {
    let tol = if D == 1 { INVERSION_TOL_1D } else { INVERSION_TOL_ND };
    let mut x = cell.midpoint();
    let mut residual = branch.apply(&x) - y;
    for _ in 0..200 {
        if residual.norm() < tol * 1e-2 {
            break;
        }
        let jac_inv = linalg::inverse(&branch.jacobian(&x))
            .ok_or_else(|| Error::numerical("singular Jacobian in branch inversion", residual.norm()))?;
        let step = jac_inv * residual;
        let mut damping = 1.0;
        loop {
            let candidate = cell.clamp(&(x - step * damping));
            let r = branch.apply(&candidate) - y;
            if r.norm() < residual.norm() || damping < 1e-6 {
                x = candidate;
                residual = r;
                break;
            }
            damping *= 0.5;
        }
    }
    if residual.norm() < tol {
        Ok(x)
    } else {
        Err(Error::numerical("branch inversion did not converge", residual.norm()))
    }
}

/// Safeguarded Newton for a monotone scalar branch on `[lo, hi]`.
pub(crate) fn invert_monotone(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    y: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let (flo, fhi) = (f(lo) - y, f(hi) - y);
    let scale = 1.0 + y.abs();
    if flo.abs() <= BOUNDARY_SLACK * scale {
        return Ok(lo);
    }
    if fhi.abs() <= BOUNDARY_SLACK * scale {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "{y} is outside the branch image [{}, {}]",
            f(lo).min(f(hi)),
            f(lo).max(f(hi))
        )));
    }
    let increasing = fhi > flo;
    let (mut a, mut b) = (lo, hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let r = f(x) - y;
        if r == 0.0 {
            return Ok(x);
        }
        if (r > 0.0) == increasing {
            b = x;
        } else {
            a = x;
        }
        let slope = df(x);
        let mut next = x - r / slope;
        if !(next > a && next < b) || !next.is_finite() {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-16 * (1.0 + x.abs()) || b - a <= 1e-16 {
            x = next;
            break;
        }
        x = next;
    }
    let residual = (f(x) - y).abs();
    if residual < INVERSION_TOL_1D {
        Ok(x)
    } else {
        Err(Error::numerical("scalar branch inversion did not converge", residual))
    }
}

/// `x -> slope * x + offset`.
#[derive(Debug, Clone, Copy)]
pub struct AffineBranch {
    pub slope: f64,
    pub offset: f64,
}

impl Branch<1> for AffineBranch {
    fn apply(&self, x: &Point<1>) -> Point<1> {
        Point::<1>::new(self.slope * x[0] + self.offset)
    }

    fn jacobian(&self, _x: &Point<1>) -> Mat<1> {
        Mat::<1>::new(self.slope)
    }

    fn has_closed_form_inverse(&self) -> bool {
        true
    }

    fn invert(&self, y: &Point<1>, cell: &Cell<1>) -> Result<Point<1>> {
        let x = (y[0] - self.offset) / self.slope;
        if !cell.contains_closed(&Point::<1>::new(x), BOUNDARY_SLACK) {
            return Err(Error::Domain(format!("{} is outside the branch image", y[0])));
        }
        Ok(cell.clamp(&Point::<1>::new(x)))
    }
}

/// `x -> slope * x + amplitude * sin(2 pi freq x) + offset`.
#[derive(Debug, Clone, Copy)]
pub struct TrigBranch {
    pub slope: f64,
    pub amplitude: f64,
    pub freq: f64,
    pub offset: f64,
}

impl TrigBranch {
    fn value(&self, x: f64) -> f64 {
        self.slope * x + self.amplitude * (2.0 * PI * self.freq * x).sin() + self.offset
    }

    fn derivative(&self, x: f64) -> f64 {
        self.slope + 2.0 * PI * self.freq * self.amplitude * (2.0 * PI * self.freq * x).cos()
    }
}

impl Branch<1> for TrigBranch {
    fn apply(&self, x: &Point<1>) -> Point<1> {
        Point::<1>::new(self.value(x[0]))
    }

    fn jacobian(&self, x: &Point<1>) -> Mat<1> {
        Mat::<1>::new(self.derivative(x[0]))
    }

    fn invert(&self, y: &Point<1>, cell: &Cell<1>) -> Result<Point<1>> {
        let x = invert_monotone(
            |t| self.value(t),
            |t| self.derivative(t),
            y[0],
            cell.lo[0],
            cell.hi[0],
        )?;
        Ok(Point::<1>::new(x))
    }
}

/// Product of two scalar branches acting on separate coordinates.
#[derive(Debug, Clone)]
pub struct ProductBranch {
    pub first: Arc<dyn Branch<1>>,
    pub second: Arc<dyn Branch<1>>,
}

impl Branch<2> for ProductBranch {
    fn apply(&self, x: &Point<2>) -> Point<2> {
        Point::<2>::new(
            self.first.apply(&Point::<1>::new(x[0]))[0],
            self.second.apply(&Point::<1>::new(x[1]))[0],
        )
    }

    fn jacobian(&self, x: &Point<2>) -> Mat<2> {
        Mat::<2>::new(
            self.first.jacobian(&Point::<1>::new(x[0]))[(0, 0)],
            0.0,
            0.0,
            self.second.jacobian(&Point::<1>::new(x[1]))[(0, 0)],
        )
    }

    fn has_closed_form_inverse(&self) -> bool {
        self.first.has_closed_form_inverse() && self.second.has_closed_form_inverse()
    }

    fn invert(&self, y: &Point<2>, cell: &Cell<2>) -> Result<Point<2>> {
        let c0 = Cell::interval(cell.lo[0], cell.hi[0]);
        let c1 = Cell::interval(cell.lo[1], cell.hi[1]);
        let a = self.first.invert(&Point::<1>::new(y[0]), &c0)?;
        let b = self.second.invert(&Point::<1>::new(y[1]), &c1)?;
        Ok(Point::<2>::new(a[0], b[0]))
    }
}

/// A uniformly expanding Markov map: partition, branches and transition table.
#[derive(Clone)]
pub struct MarkovMap<const D: usize> {
    name: String,
    cells: Vec<Cell<D>>,
    branches: Vec<Arc<dyn Branch<D>>>,
    images: Vec<Cell<D>>,
    transitions: Vec<Vec<usize>>,
    predecessors: Vec<Vec<usize>>,
    bounds: Cell<D>,
}

impl<const D: usize> fmt::Debug for MarkovMap<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarkovMap")
            .field("name", &self.name)
            .field("dim", &D)
            .field("elements", &self.cells.len())
            .field("transitions", &self.transitions)
            .finish()
    }
}

impl<const D: usize> MarkovMap<D> {
    /// Builds the map and its transition table.
    ///
    /// Each branch must be monotone along every axis on its element so that
    /// the image of a box is the box spanned by the images of its corners.
    pub fn new(
        name: impl Into<String>,
        cells: Vec<Cell<D>>,
        branches: Vec<Arc<dyn Branch<D>>>,
    ) -> Result<Self> {
        if cells.is_empty() || cells.len() != branches.len() {
            return Err(Error::Structural(format!(
                "{} elements but {} branches",
                cells.len(),
                branches.len()
            )));
        }
        for (i, a) in cells.iter().enumerate() {
            if (0..D).any(|k| a.side(k) <= 0.0) {
                return Err(Error::Structural(format!("element {i} is empty")));
            }
            for (j, b) in cells.iter().enumerate().skip(i + 1) {
                if a.overlap(b) > 1e-12 * a.measure().min(b.measure()) {
                    return Err(Error::Structural(format!("elements {i} and {j} overlap")));
                }
            }
        }
        let bounds = cells.iter().skip(1).fold(cells[0], |acc, c| acc.hull(c));
        let covered: f64 = cells.iter().map(Cell::measure).sum();
        if (covered - bounds.measure()).abs() > 1e-9 * bounds.measure() {
            return Err(Error::Structural(
                "partition elements do not tile their bounding box".into(),
            ));
        }

        let mut images = Vec::with_capacity(cells.len());
        for (i, (cell, branch)) in cells.iter().zip(&branches).enumerate() {
            check_injective(i, cell, branch.as_ref())?;
            let mut lo = branch.apply(&cell.corner(0));
            let mut hi = lo;
            for c in 1..(1usize << D) {
                let p = branch.apply(&cell.corner(c));
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
            images.push(Cell::new(lo, hi));
        }

        let mut transitions = vec![Vec::new(); cells.len()];
        for (i, image) in images.iter().enumerate() {
            let slack = 1e-9 * (1.0 + image.diameter());
            if !bounds.contains_cell(image, slack) {
                return Err(Error::Structural(format!("image of element {i} leaves X")));
            }
            let mut mass = 0.0;
            for (j, cell) in cells.iter().enumerate() {
                if image.contains_cell(cell, slack) {
                    transitions[i].push(j);
                    mass += cell.measure();
                }
            }
            if (mass - image.measure()).abs() > 1e-9 * image.measure().max(1e-300) {
                return Err(Error::Structural(format!(
                    "image of element {i} is not a union of partition elements (non-Markov)"
                )));
            }
        }
        let mut predecessors = vec![Vec::new(); cells.len()];
        for (i, targets) in transitions.iter().enumerate() {
            for &j in targets {
                predecessors[j].push(i);
            }
        }
        Ok(Self {
            name: name.into(),
            cells,
            branches,
            images,
            transitions,
            predecessors,
            bounds,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[Cell<D>] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell<D> {
        &self.cells[i]
    }

    pub fn branch(&self, i: usize) -> &dyn Branch<D> {
        self.branches[i].as_ref()
    }

    /// Image box `T(omega_i)`.
    pub fn image(&self, i: usize) -> &Cell<D> {
        &self.images[i]
    }

    /// Elements contained in `T(omega_i)`.
    pub fn transitions(&self, i: usize) -> &[usize] {
        &self.transitions[i]
    }

    /// Elements whose image contains element `j`.
    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.predecessors[j]
    }

    pub fn is_full_branch(&self, i: usize) -> bool {
        self.transitions[i].len() == self.cells.len()
    }

    pub fn full_branches(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_full_branch(i)).collect()
    }

    /// Bounding box of X.
    pub fn bounds(&self) -> &Cell<D> {
        &self.bounds
    }

    pub fn measure(&self) -> f64 {
        self.cells.iter().map(Cell::measure).sum()
    }

    /// Element containing `x`, using half-open cells and falling back to
    /// closed cells on the outer boundary.
    pub fn locate(&self, x: &Point<D>) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.contains(x))
            .or_else(|| {
                self.cells
                    .iter()
                    .position(|c| c.contains_closed(x, BOUNDARY_SLACK))
            })
    }

    /// Applies the branch of element `elem` and clamps round-off back into X.
    pub fn apply_branch(&self, elem: usize, x: &Point<D>) -> Point<D> {
        self.bounds.clamp(&self.branches[elem].apply(x))
    }

    /// `T(x)` together with the element `x` lies in.
    pub fn apply(&self, x: &Point<D>) -> Option<(usize, Point<D>)> {
        let e = self.locate(x)?;
        Some((e, self.apply_branch(e, x)))
    }

    /// Inverse of branch `elem` at `y`, which must lie in the closed image.
    pub fn invert_branch(&self, elem: usize, y: &Point<D>) -> Result<Point<D>> {
        let image = &self.images[elem];
        if !image.contains_closed(y, BOUNDARY_SLACK * (1.0 + image.diameter())) {
            return Err(Error::Domain(format!(
                "point {:?} is outside the image of element {elem}",
                y.as_slice()
            )));
        }
        let x = self.branches[elem].invert(&image.clamp(y), &self.cells[elem])?;
        Ok(self.cells[elem].clamp(&x))
    }

    pub fn jacobian(&self, elem: usize, x: &Point<D>) -> Mat<D> {
        self.branches[elem].jacobian(x)
    }
}

fn check_injective<const D: usize>(i: usize, cell: &Cell<D>, branch: &dyn Branch<D>) -> Result<()> {
    const SAMPLES: usize = 33;
    let total = SAMPLES.pow(D as u32);
    let mut sign = 0.0;
    for idx in 0..total {
        let mut rem = idx;
        let x = Point::<D>::from_fn(|k, _| {
            let t = (rem % SAMPLES) as f64 / (SAMPLES - 1) as f64;
            rem /= SAMPLES;
            cell.lo[k] + t * cell.side(k)
        });
        let d = linalg::det(&branch.jacobian(&x));
        if d == 0.0 || (sign != 0.0 && d.signum() != sign) {
            return Err(Error::Structural(format!(
                "branch {i} is not injective (Jacobian determinant changes sign or vanishes)"
            )));
        }
        sign = d.signum();
    }
    Ok(())
}

/// `T(x) = 2x mod 1`.
pub fn doubling() -> MarkovMap<1> {
    full_branch_affine("doubling", 2)
}

/// `T(x) = 3x mod 1`.
pub fn tripling() -> MarkovMap<1> {
    full_branch_affine("tripling", 3)
}

fn full_branch_affine(name: &str, k: usize) -> MarkovMap<1> {
    let cells = (0..k)
        .map(|j| Cell::interval(j as f64 / k as f64, (j + 1) as f64 / k as f64))
        .collect();
    let branches = (0..k)
        .map(|j| {
            Arc::new(AffineBranch {
                slope: k as f64,
                offset: -(j as f64),
            }) as Arc<dyn Branch<1>>
        })
        .collect();
    MarkovMap::new(name, cells, branches).expect("affine full-branch map is Markov")
}

/// Piecewise affine Markov map on [0, 1] from breakpoints and per-element
/// `(slope, offset)` pairs.
pub fn piecewise_affine(
    name: &str,
    breakpoints: &[f64],
    branches: &[(f64, f64)],
) -> Result<MarkovMap<1>> {
    let cells = breakpoints
        .windows(2)
        .map(|w| Cell::interval(w[0], w[1]))
        .collect();
    let branches = branches
        .iter()
        .map(|&(slope, offset)| Arc::new(AffineBranch { slope, offset }) as Arc<dyn Branch<1>>)
        .collect();
    MarkovMap::new(name, cells, branches)
}

fn perturbed_doubling_branch(eps: f64, j: usize) -> TrigBranch {
    TrigBranch {
        slope: 2.0,
        amplitude: eps,
        freq: 1.0,
        offset: -(j as f64),
    }
}

/// `T(x) = 2x + eps sin(2 pi x) mod 1`.
pub fn perturbed_doubling(eps: f64) -> Result<MarkovMap<1>> {
    let cells = vec![Cell::interval(0.0, 0.5), Cell::interval(0.5, 1.0)];
    let branches = (0..2)
        .map(|j| Arc::new(perturbed_doubling_branch(eps, j)) as Arc<dyn Branch<1>>)
        .collect();
    MarkovMap::new(format!("perturbed_doubling({eps})"), cells, branches)
}

/// Product of `perturbed_doubling(eps)` in the first coordinate and the
/// tripling map in the second, on the unit square.
pub fn markov_2d_product(eps: f64) -> Result<MarkovMap<2>> {
    let mut cells = Vec::new();
    let mut branches: Vec<Arc<dyn Branch<2>>> = Vec::new();
    for i in 0..2 {
        for j in 0..3 {
            cells.push(Cell::new(
                Point::<2>::new(i as f64 / 2.0, j as f64 / 3.0),
                Point::<2>::new((i + 1) as f64 / 2.0, (j + 1) as f64 / 3.0),
            ));
            let first: Arc<dyn Branch<1>> = if eps == 0.0 {
                Arc::new(AffineBranch {
                    slope: 2.0,
                    offset: -(i as f64),
                })
            } else {
                Arc::new(perturbed_doubling_branch(eps, i))
            };
            branches.push(Arc::new(ProductBranch {
                first,
                second: Arc::new(AffineBranch {
                    slope: 3.0,
                    offset: -(j as f64),
                }),
            }));
        }
    }
    MarkovMap::new(format!("markov_2d_product({eps})"), cells, branches)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubling_transitions_are_full() {
        let m = doubling();
        assert_eq!(m.transitions(0), &[0, 1]);
        assert_eq!(m.transitions(1), &[0, 1]);
        assert_eq!(m.full_branches(), vec![0, 1]);
    }

    #[test]
    fn non_markov_image_is_rejected() {
        // second branch maps [1/2, 1) onto [0, 0.8), which splits element 1
        let err = piecewise_affine("bad", &[0.0, 0.5, 1.0], &[(2.0, 0.0), (1.6, -0.8)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)), "{err}");
    }

    #[test]
    fn non_full_markov_map_has_partial_transitions() {
        let third = 1.0 / 3.0;
        let m = piecewise_affine(
            "three-interval",
            &[0.0, third, 2.0 * third, 1.0],
            &[(3.0, 0.0), (2.0, -2.0 * third), (2.0, -1.0)],
        )
        .unwrap();
        assert_eq!(m.transitions(0), &[0, 1, 2]);
        assert_eq!(m.transitions(1), &[0, 1]);
        assert_eq!(m.transitions(2), &[1, 2]);
        assert_eq!(m.predecessors(0), &[0, 1]);
    }

    #[test]
    fn folding_branch_is_not_injective() {
        let cells = vec![Cell::interval(0.0, 1.0)];
        let branches: Vec<Arc<dyn Branch<1>>> = vec![Arc::new(TrigBranch {
            slope: 0.0,
            amplitude: 0.5,
            freq: 1.0,
            offset: 0.0,
        })];
        assert!(matches!(
            MarkovMap::new("fold", cells, branches),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn perturbed_inverse_hits_target() {
        let m = perturbed_doubling(0.05).unwrap();
        let x = m.invert_branch(1, &Point::<1>::new(0.3)).unwrap();
        let y = m.apply_branch(1, &x);
        assert!((y[0] - 0.3).abs() < 1e-12);
        assert!(x[0] >= 0.5 && x[0] <= 1.0);
    }

    #[test]
    fn outside_image_is_a_domain_error() {
        let m = doubling();
        assert!(matches!(
            m.invert_branch(0, &Point::<1>::new(1.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn product_map_is_full_branch() {
        let m = markov_2d_product(0.05).unwrap();
        assert_eq!(m.len(), 6);
        assert!((0..6).all(|i| m.is_full_branch(i)));
        let y = Point::<2>::new(0.3, 0.7);
        for e in 0..6 {
            let x = m.invert_branch(e, &y).unwrap();
            assert!((m.apply_branch(e, &x) - y).norm() < 1e-10);
            assert!(m.cell(e).contains_closed(&x, 0.0));
        }
    }

    #[test]
    fn locate_uses_half_open_cells() {
        let m = doubling();
        assert_eq!(m.locate(&Point::<1>::new(0.5)), Some(1));
        assert_eq!(m.locate(&Point::<1>::new(1.0)), Some(1));
        assert_eq!(m.locate(&Point::<1>::new(0.0)), Some(0));
        assert_eq!(m.locate(&Point::<1>::new(1.5)), None);
    }
}
