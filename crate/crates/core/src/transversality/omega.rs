//! The series `Omega(x) = sum_k D(tau o l_{w_k})(G_{k-1} x) DG_{k-1}(x)` and
//! the transfer function `theta` built from the same branch sequence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Point, Row};
use crate::phase_space::Semiflow;

/// How the inverse branch `w_k` is chosen at each step. The branch must be
/// admissible at the current point, i.e. a predecessor of the element that
/// contains it; for full-branch maps every symbol qualifies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchPolicy {
    /// Smallest admissible symbol ("all-0" on full-branch maps).
    Lowest,
    /// Largest admissible symbol ("all-1" on the doubling map).
    Highest,
    /// Symbols of a fixed word, repeated cyclically.
    Fixed(Vec<usize>),
    /// Uniform choice among admissible symbols, from a seeded stream.
    Random(u64),
}

struct Chooser<'a> {
    policy: &'a BranchPolicy,
    rng: Option<ChaCha8Rng>,
    k: usize,
}

impl<'a> Chooser<'a> {
    fn new(policy: &'a BranchPolicy) -> Self {
        let rng = match policy {
            BranchPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        Self { policy, rng, k: 0 }
    }

    fn next(&mut self, admissible: &[usize]) -> Result<usize> {
        let k = self.k;
        self.k += 1;
        let s = match self.policy {
            BranchPolicy::Lowest => admissible.iter().copied().min(),
            BranchPolicy::Highest => admissible.iter().copied().max(),
            BranchPolicy::Fixed(w) => {
                if w.is_empty() {
                    return Err(Error::Precondition("empty fixed branch word".into()));
                }
                let s = w[k % w.len()];
                if !admissible.contains(&s) {
                    return Err(Error::Domain(format!(
                        "symbol {s} at step {} is not admissible here",
                        k + 1
                    )));
                }
                Some(s)
            }
            BranchPolicy::Random(_) => {
                let rng = self.rng.as_mut().expect("seeded");
                (!admissible.is_empty()).then(|| admissible[rng.gen_range(0..admissible.len())])
            }
        };
        s.ok_or_else(|| Error::Structural("element without predecessors".into()))
    }
}

/// `(C3 e^{-lambda K} / (1 - e^{-lambda}))`, the bound on the terms of the
/// series beyond depth `K`.
pub fn omega_tail_bound(c3: f64, lambda: f64, depth: usize) -> f64 {
    c3 * (-lambda * depth as f64).exp() / (1.0 - (-lambda).exp())
}

/// Smallest depth whose tail bound is below `tol`.
pub fn omega_depth(c3: f64, lambda: f64, tol: f64) -> usize {
    let mut k = 0;
    while omega_tail_bound(c3, lambda, k) >= tol && k < 100_000 {
        k += 1;
    }
    k
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaValue<const D: usize> {
    pub value: Row<D>,
    pub depth: usize,
    /// Certified bound on `|Omega - partial sum|`.
    pub tail_bound: f64,
    pub symbols: Vec<usize>,
}

/// The branch sequence from `x`, with the points `G_k x` and derivatives
/// `DG_k(x)` for `k = 0..=depth`.
#[allow(clippy::type_complexity)]
fn orbit<const D: usize>(
    sys: &Semiflow<D>,
    elem: usize,
    x: &Point<D>,
    policy: &BranchPolicy,
    depth: usize,
) -> Result<(Vec<usize>, Vec<Point<D>>, Vec<Mat<D>>)> {
    let mut chooser = Chooser::new(policy);
    let (mut e, mut p, mut dg) = (elem, *x, Mat::<D>::identity());
    let mut syms = Vec::with_capacity(depth);
    let mut pts = vec![p];
    let mut ders = vec![dg];
    for _ in 0..depth {
        let s = chooser.next(sys.map.predecessors(e))?;
        p = sys.map.invert_branch(s, &p)?;
        let inv = linalg::inverse(&sys.map.jacobian(s, &p))
            .ok_or_else(|| Error::numerical("singular branch Jacobian", 0.0))?;
        dg = inv * dg;
        e = s;
        syms.push(s);
        pts.push(p);
        ders.push(dg);
    }
    Ok((syms, pts, ders))
}

/// `Omega(x)` for `x` in element `elem`, truncated once the tail bound drops
/// below `tol`.
pub fn omega_limit<const D: usize>(
    sys: &Semiflow<D>,
    elem: usize,
    x: &Point<D>,
    policy: &BranchPolicy,
    tol: f64,
) -> Result<OmegaValue<D>> {
    if tol <= 0.0 {
        return Err(Error::Precondition(format!("tol {tol} must be positive")));
    }
    let c = &sys.constants;
    let depth = omega_depth(c.c3, c.lambda, tol);
    let (syms, pts, ders) = orbit(sys, elem, x, policy, depth)?;
    let mut value = Row::<D>::zeros();
    for k in 1..=depth {
        value += sys.roof.gradient(syms[k - 1], &pts[k]) * ders[k];
    }
    Ok(OmegaValue {
        value,
        depth,
        tail_bound: omega_tail_bound(c.c3, c.lambda, depth),
        symbols: syms,
    })
}

/// `theta(x) = sum_k (tau(G_k x) - tau(G_k x0))`, where each point follows
/// its own admissible branch sequence under `policy`.
///
/// Returns the value and a bound on the truncation error,
/// `diam(X) C3 e^{-lambda K} / (1 - e^{-lambda})` for each of the two sums.
pub fn theta_series<const D: usize>(
    sys: &Semiflow<D>,
    elem: usize,
    x: &Point<D>,
    base: (usize, &Point<D>),
    policy: &BranchPolicy,
    depth: usize,
) -> Result<(f64, f64)> {
    let (sx, px, _) = orbit(sys, elem, x, policy, depth)?;
    let (s0, p0, _) = orbit(sys, base.0, base.1, policy, depth)?;
    let mut sum = 0.0;
    for k in 1..=depth {
        sum += sys.roof.value(sx[k - 1], &px[k]) - sys.roof.value(s0[k - 1], &p0[k]);
    }
    let c = &sys.constants;
    let bound = 2.0 * c.domain_diameter * omega_tail_bound(c.c3, c.lambda, depth);
    Ok((sum, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::map::{doubling, perturbed_doubling};
    use crate::phase_space::Roof;

    #[test]
    fn doubling_identity_roof_gives_one() {
        let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
        for policy in [BranchPolicy::Lowest, BranchPolicy::Highest, BranchPolicy::Random(3)] {
            for x in [0.1, 0.5, 0.9] {
                let p = Point::<1>::new(x);
                let e = sys.map.locate(&p).unwrap();
                let om = omega_limit(&sys, e, &p, &policy, 1e-12).unwrap();
                assert!((om.value[0] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_roof_gives_zero() {
        let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
        let p = Point::<1>::new(0.3);
        let om = omega_limit(&sys, 0, &p, &BranchPolicy::Lowest, 1e-10).unwrap();
        assert_eq!(om.value[0], 0.0);
    }

    #[test]
    fn fixed_policy_checks_admissibility() {
        let map = crate::phase_space::map::piecewise_affine(
            "three",
            &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            &[(3.0, 0.0), (3.0, -1.0), (3.0, -2.0)],
        )
        .unwrap();
        let sys = Semiflow::new(map, Roof::affine(0.0, 1.0), 257).unwrap().0;
        let p = Point::<1>::new(0.5);
        assert!(omega_limit(&sys, 1, &p, &BranchPolicy::Fixed(vec![2, 0]), 1e-6).is_ok());
    }

    #[test]
    fn fixed_point_relation_along_shifted_policy() {
        let sys = Semiflow::new(perturbed_doubling(0.05).unwrap(), Roof::trig(1.0, 0.2, 1.0), 1025)
            .unwrap()
            .0;
        let x = Point::<1>::new(0.3);
        let tol = 1e-12;
        let om = omega_limit(&sys, 0, &x, &BranchPolicy::Lowest, tol).unwrap();
        let lx = sys.map.invert_branch(0, &x).unwrap();
        let dl = 1.0 / sys.map.jacobian(0, &lx)[(0, 0)];
        let inner = omega_limit(&sys, 0, &lx, &BranchPolicy::Lowest, tol).unwrap();
        let rhs = sys.roof.gradient(0, &lx)[0] * dl + inner.value[0] * dl;
        assert!((om.value[0] - rhs).abs() < 4.0 * tol);
    }
}
