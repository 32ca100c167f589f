//! The cone `K = {(a, b) : |b| <= C5 |a|}`, block Jacobians and the
//! transversality predicate.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Point, Row};
use crate::phase_space::{inverse_chain, BranchWord, Semiflow};

/// Relative margin required by every strict cone inequality.
pub const CONE_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub width: f64,
}

impl Cone {
    pub fn new(width: f64) -> Result<Self> {
        if width > 0.0 {
            Ok(Self { width })
        } else {
            Err(Error::Precondition(format!("cone width {width} must be positive")))
        }
    }

    pub fn contains<const D: usize>(&self, a: &Point<D>, b: f64) -> bool {
        b.abs() <= self.width * a.norm()
    }
}

/// `[[DT^n(x), 0], [D tau_n(x), 1]]` at `x = l_w(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockJacobian<const D: usize> {
    pub base: Point<D>,
    pub n: usize,
    pub dtn: Mat<D>,
    pub dtau: Row<D>,
}

impl<const D: usize> BlockJacobian<D> {
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(D + 1, D + 1);
        for i in 0..D {
            for j in 0..D {
                m[(i, j)] = self.dtn[(i, j)];
            }
            m[(D, i)] = self.dtau[i];
        }
        m[(D, D)] = 1.0;
        m
    }

    /// `D tau_n(x) DT^-n(x)`, the slope of the image cone's axis.
    pub fn slope(&self) -> Result<Row<D>> {
        Ok(self.dtau * self.inverse_dtn()?)
    }

    pub fn inverse_dtn(&self) -> Result<Mat<D>> {
        linalg::inverse(&self.dtn).ok_or_else(|| Error::numerical("singular DT^n", 0.0))
    }

    /// `self` after `first`: the block Jacobian of length `first.n + self.n`.
    pub fn compose(&self, first: &BlockJacobian<D>) -> BlockJacobian<D> {
        BlockJacobian {
            base: first.base,
            n: first.n + self.n,
            dtn: self.dtn * first.dtn,
            dtau: self.dtau * first.dtn + first.dtau,
        }
    }
}

/// Block Jacobian at `l_w(y)` from the inverse-branch chain.
pub fn block_jacobian<const D: usize>(sys: &Semiflow<D>, word: &BranchWord, y: &Point<D>) -> Result<BlockJacobian<D>> {
    let c = inverse_chain(&sys.map, &sys.roof, word, y)?;
    let dtn = linalg::inverse(&c.derivative).ok_or_else(|| Error::numerical("singular D l_w", 0.0))?;
    Ok(BlockJacobian {
        base: c.point,
        n: word.len(),
        dtn,
        dtau: c.roof_derivative * dtn,
    })
}

/// Block Jacobian of length `n` along the forward orbit of `x`.
pub fn block_jacobian_forward<const D: usize>(sys: &Semiflow<D>, x: &Point<D>, n: usize) -> Result<BlockJacobian<D>> {
    let mut p = *x;
    let mut dtn = Mat::<D>::identity();
    let mut dtau = Row::<D>::zeros();
    for _ in 0..n {
        let (e, next) = sys
            .map
            .apply(&p)
            .ok_or_else(|| Error::Domain(format!("{:?} is outside X", p.as_slice())))?;
        dtau += sys.roof.gradient(e, &p) * dtn;
        dtn = sys.map.jacobian(e, &p) * dtn;
        p = next;
    }
    Ok(BlockJacobian {
        base: *x,
        n,
        dtn,
        dtau,
    })
}

/// Slope `s = D(tau_n o l_w)(y)` and contraction `A = D l_w(y)` describing
/// the image cone `{(v, s v + b) : |b| <= C5 |A v|}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeImage<const D: usize> {
    pub slope: Row<D>,
    pub contraction: Mat<D>,
}

impl<const D: usize> ConeImage<D> {
    pub fn from_block(bj: &BlockJacobian<D>) -> Result<Self> {
        Ok(Self {
            slope: bj.slope()?,
            contraction: bj.inverse_dtn()?,
        })
    }

    /// Whether the graph `{(v, p v)}` lies inside the image cone, with the
    /// conservative margin.
    pub fn contains_plane(&self, p: &Row<D>, c5: f64) -> bool {
        match linalg::inverse(&self.contraction) {
            Some(inv) => linalg::row_norm(&((p - self.slope) * inv)) < c5 * (1.0 - CONE_MARGIN),
            None => false,
        }
    }
}

fn gap_ratio<const D: usize>(c1: &ConeImage<D>, c2: &ConeImage<D>, c5: f64, v: &Point<D>) -> f64 {
    let lhs = ((c1.slope - c2.slope) * v)[0].abs();
    let rhs = c5 * ((c1.contraction * v).norm() + (c2.contraction * v).norm());
    lhs / rhs
}

/// Largest `|(s1 - s2) v| / (C5 (|A1 v| + |A2 v|))` over unit `v`.
pub fn transversality_ratio<const D: usize>(c1: &ConeImage<D>, c2: &ConeImage<D>, c5: f64) -> f64 {
    if D == 1 {
        return gap_ratio(c1, c2, c5, &Point::<D>::repeat(1.0));
    }
    let unit = |t: f64| Point::<D>::from_fn(|k, _| if k == 0 { t.cos() } else if k == 1 { t.sin() } else { 0.0 });
    let f = |t: f64| gap_ratio(c1, c2, c5, &unit(t));
    // v and -v give the same ratio, so half a circle suffices
    const SWEEP: usize = 720;
    let step = std::f64::consts::PI / SWEEP as f64;
    let (mut best_t, mut best) = (0.0, f(0.0));
    for i in 1..SWEEP {
        let t = i as f64 * step;
        let v = f(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Transversality of two image cones over the same point: some direction
/// separates them by the strict inequality with relative margin.
pub fn cones_transversal<const D: usize>(c1: &ConeImage<D>, c2: &ConeImage<D>, c5: f64) -> bool {
    transversality_ratio(c1, c2, c5) > 1.0 + CONE_MARGIN
}

/// [`cones_transversal`] for two block Jacobians of equal length.
pub fn block_jacobians_transversal<const D: usize>(
    d1: &BlockJacobian<D>,
    d2: &BlockJacobian<D>,
    c5: f64,
) -> Result<bool> {
    if d1.n != d2.n {
        return Err(Error::Precondition(format!("lengths {} and {} differ", d1.n, d2.n)));
    }
    Ok(cones_transversal(&ConeImage::from_block(d1)?, &ConeImage::from_block(d2)?, c5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::{doubling, markov_2d_product, perturbed_doubling};
    use crate::phase_space::Roof;

    #[test]
    fn doubling_blocks() {
        let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
        let bj = block_jacobian(&sys, &BranchWord::new(vec![1, 0, 1]), &Point::<1>::new(0.3)).unwrap();
        assert_eq!(bj.matrix(), DMatrix::from_row_slice(2, 2, &[8.0, 0.0, 0.0, 1.0]));
        let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
        let bj = block_jacobian(&sys, &BranchWord::new(vec![0, 1]), &Point::<1>::new(0.77)).unwrap();
        let m = bj.matrix();
        assert!((m - DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 3.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn cocycle_on_random_splits() {
        let sys = Semiflow::new(perturbed_doubling(0.05).unwrap(), Roof::trig(1.0, 0.2, 1.0), 1025).unwrap().0;
        let x = Point::<1>::new(0.2345);
        let d5 = block_jacobian_forward(&sys, &x, 5).unwrap();
        let d3 = block_jacobian_forward(&sys, &x, 3).unwrap();
        let mut p = x;
        for _ in 0..3 {
            p = sys.map.apply(&p).unwrap().1;
        }
        let d2 = block_jacobian_forward(&sys, &p, 2).unwrap();
        let comp = d2.compose(&d3);
        assert!((comp.matrix() - d5.matrix()).norm() <= 1e-9 * d5.matrix().norm());
    }

    #[test]
    fn two_dimensional_cocycle() {
        let sys = Semiflow::new(markov_2d_product(0.05).unwrap(), Roof::trig(1.0, 0.2, 1.0), 64).unwrap().0;
        let x = Point::<2>::new(0.31, 0.72);
        let d4 = block_jacobian_forward(&sys, &x, 4).unwrap();
        let d1 = block_jacobian_forward(&sys, &x, 1).unwrap();
        let d3 = block_jacobian_forward(&sys, &sys.map.apply(&x).unwrap().1, 3).unwrap();
        assert!((d3.compose(&d1).matrix() - d4.matrix()).norm() <= 1e-9 * d4.matrix().norm());
    }

    #[test]
    fn transversality_is_symmetric_and_conservative() {
        let a = ConeImage::<1> {
            slope: Row::<1>::new(0.0),
            contraction: Mat::<1>::new(0.25),
        };
        let b = ConeImage::<1> {
            slope: Row::<1>::new(1.0),
            contraction: Mat::<1>::new(0.25),
        };
        // |0 - 1| = 2 (0.25 + 0.25): an exact tie is not transversal
        assert!(!cones_transversal(&a, &b, 2.0));
        assert!(cones_transversal(&a, &b, 1.9));
        assert_eq!(cones_transversal(&a, &b, 1.9), cones_transversal(&b, &a, 1.9));
    }

    #[test]
    fn planar_sweep_finds_separating_direction() {
        let c1 = ConeImage::<2> {
            slope: Row::<2>::new(0.0, 0.0),
            contraction: Mat::<2>::new(0.1, 0.0, 0.0, 0.5),
        };
        let c2 = ConeImage::<2> {
            slope: Row::<2>::new(1.0, 0.0),
            contraction: Mat::<2>::new(0.1, 0.0, 0.0, 0.5),
        };
        // along e1: 1 > C5 * 0.2 for C5 < 5
        let r = transversality_ratio(&c1, &c2, 2.0);
        assert!((r - 2.5).abs() < 1e-9, "{r}");
        assert!(cones_transversal(&c1, &c2, 2.0));
        assert!(!cones_transversal(&c1, &c2, 5.0));
    }
}
