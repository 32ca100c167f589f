//! Numerical verification of the standing hypotheses and the derived
//! constants.

use serde::{Deserialize, Serialize};

use super::map::{Cell, MarkovMap};
use super::roof::Roof;
use crate::error::{Error, Result};
use crate::linalg::{self, Point};

/// Lower bound used for `C3` when deriving the cone width, so that the cone
/// stays non-degenerate for roofs with vanishing derivative.
pub const C3_FLOOR: f64 = 1e-6;

/// Constants of a semiflow, measured on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConstants {
    pub alpha: f64,
    /// `ln` of the minimal expansion `min sigma_min(DT)`.
    pub lambda: f64,
    /// `ln` of the maximal expansion `max ||DT||`.
    pub big_lambda: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub covering_index: usize,
    pub min_image_measure: f64,
    pub domain_measure: f64,
    pub domain_diameter: f64,
}

impl SystemConstants {
    #[allow(clippy::too_many_arguments)]
    pub fn from_measured(
        alpha: f64,
        lambda: f64,
        big_lambda: f64,
        c2: f64,
        c3: f64,
        c4: f64,
        covering_index: usize,
        min_image_measure: f64,
        domain_measure: f64,
        domain_diameter: f64,
    ) -> Self {
        let c5 = 2.0 * c3.max(C3_FLOOR) / (1.0 - (-lambda).exp());
        let c6 = c2 / (1.0 - (-lambda * alpha).exp());
        let c7 = c6.exp() * domain_measure / min_image_measure;
        Self {
            alpha,
            lambda,
            big_lambda,
            c2,
            c3,
            c4,
            c5,
            c6,
            c7,
            covering_index,
            min_image_measure,
            domain_measure,
            domain_diameter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub pass: bool,
    pub constant: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
    pub constants: SystemConstants,
    pub roof_positive: bool,
    pub roof_min: f64,
    /// `sup tau <= 1`
    pub roof_normalized: bool,
    pub domain_normalized: bool,
    pub grid_density: usize,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Closed tensor grid with `n` nodes per axis.
pub(crate) fn cell_grid<const D: usize>(cell: &Cell<D>, n: usize) -> Vec<Point<D>> {
    let n = n.max(2);
    let total = n.pow(D as u32);
    (0..total)
        .map(|idx| {
            let mut rem = idx;
            Point::<D>::from_fn(|k, _| {
                let t = (rem % n) as f64 / (n - 1) as f64;
                rem /= n;
                cell.lo[k] + t * cell.side(k)
            })
        })
        .collect()
}

/// Least `n` such that `T^n(omega)` covers X for every element, or `None`
/// if the transition graph is not eventually full.
pub fn covering_index<const D: usize>(map: &MarkovMap<D>) -> Option<usize> {
    let k = map.len();
    let mut worst = 0;
    for start in 0..k {
        let mut reach = vec![false; k];
        for &j in map.transitions(start) {
            reach[j] = true;
        }
        let mut n = 1;
        while !reach.iter().all(|&r| r) {
            if n > k * k + 1 {
                return None;
            }
            let mut next = vec![false; k];
            for (j, _) in reach.iter().enumerate().filter(|(_, &r)| r) {
                for &t in map.transitions(j) {
                    next[t] = true;
                }
            }
            reach = next;
            n += 1;
        }
        worst = worst.max(n);
    }
    Some(worst)
}

/// Measures every constant on a grid of `grid_density` nodes per axis in
/// each element and evaluates each hypothesis.
pub fn verify_assumptions<const D: usize>(
    map: &MarkovMap<D>,
    roof: &Roof<D>,
    grid_density: usize,
) -> Result<AssumptionReport> {
    let alpha = roof.alpha();
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Precondition(format!("alpha = {alpha} is not in (0, 1]")));
    }
    if grid_density < 2 {
        return Err(Error::Precondition("grid density must be at least 2".into()));
    }
    // the number of grid points grows like density^D
    let density = if D == 1 { grid_density } else { grid_density.min(256) };

    let mut min_sv = f64::INFINITY;
    let mut max_norm: f64 = 0.0;
    let mut c2: f64 = 0.0;
    let mut c3: f64 = 0.0;
    let mut c4 = f64::NEG_INFINITY;
    let mut roof_min = f64::INFINITY;
    let mut roof_finite = true;

    for e in 0..map.len() {
        let cell = map.cell(e);
        let grid = cell_grid(cell, density);
        let mut log_det = Vec::with_capacity(grid.len());
        let mut images = Vec::with_capacity(grid.len());
        for x in &grid {
            let jac = map.jacobian(e, x);
            let sv = linalg::singular_values(&jac);
            min_sv = min_sv.min(sv[D - 1]);
            max_norm = max_norm.max(sv[0]);
            log_det.push(linalg::det(&jac).abs().ln());
            images.push(map.branch(e).apply(x));
            let t = roof.value(e, x);
            roof_finite &= t.is_finite();
            c4 = c4.max(t);
            roof_min = roof_min.min(t);
            if let Some(inv) = linalg::inverse(&jac) {
                c3 = c3.max(linalg::row_norm(&(roof.gradient(e, x) * inv)));
            }
        }
        // distortion on dyadic pairs along each axis and both diagonals
        let n = density;
        let index = |coords: &[usize]| coords.iter().rev().fold(0, |acc, &c| acc * n + c);
        let total = grid.len();
        for idx in 0..total {
            let mut coords = [0usize; 8];
            let mut rem = idx;
            for c in coords.iter_mut().take(D) {
                *c = rem % n;
                rem /= n;
            }
            let mut step = 1;
            while step < n {
                for dir in directions::<D>() {
                    let mut other = coords;
                    let mut ok = true;
                    for k in 0..D {
                        let t = coords[k] as i64 + dir[k] * step as i64;
                        if t < 0 || t >= n as i64 {
                            ok = false;
                            break;
                        }
                        other[k] = t as usize;
                    }
                    if !ok {
                        continue;
                    }
                    let j = index(&other[..D]);
                    let dist = linalg::dist(&images[idx], &images[j]);
                    if dist > 0.0 {
                        c2 = c2.max((log_det[idx] - log_det[j]).abs() / dist.powf(alpha));
                    }
                }
                step *= 2;
            }
        }
    }

    if min_sv <= 1.0 {
        return Err(Error::Normalization { min_expansion: min_sv });
    }
    let lambda = min_sv.ln();
    let big_lambda = max_norm.ln();
    let cover = covering_index(map);
    let min_image_measure = (0..map.len())
        .map(|e| map.image(e).measure())
        .fold(f64::INFINITY, f64::min);
    let domain_measure = map.measure();
    let constants = SystemConstants::from_measured(
        alpha,
        lambda,
        big_lambda,
        c2,
        c3,
        c4,
        cover.unwrap_or(0),
        min_image_measure,
        domain_measure,
        map.bounds().diameter(),
    );

    let checks = vec![
        AssumptionCheck {
            name: "Markov".into(),
            pass: true,
            constant: map.len() as f64,
            detail: "every image is a union of partition elements".into(),
        },
        AssumptionCheck {
            name: "Expanding".into(),
            pass: min_sv > 1.0,
            constant: (-lambda).exp(),
            detail: format!("min sigma_min(DT) = {min_sv:.6}"),
        },
        AssumptionCheck {
            name: "Covering".into(),
            pass: cover.is_some(),
            constant: cover.unwrap_or(0) as f64,
            detail: match cover {
                Some(n) => format!("T^{n}(omega) = X for every element"),
                None => "transition graph is not eventually full".into(),
            },
        },
        AssumptionCheck {
            name: "Distortion".into(),
            pass: c2.is_finite(),
            constant: c2,
            detail: format!("C2 measured on {density} nodes per axis"),
        },
        AssumptionCheck {
            name: "Roof".into(),
            pass: c3.is_finite(),
            constant: c3,
            detail: "C3 = sup ||D tau DT^-1||".into(),
        },
        AssumptionCheck {
            name: "BoundTau".into(),
            pass: roof_finite && c4.is_finite(),
            constant: c4,
            detail: "C4 = sup tau".into(),
        },
    ];

    let bounds = map.bounds();
    Ok(AssumptionReport {
        checks,
        constants,
        roof_positive: roof_min > 0.0,
        roof_min,
        roof_normalized: c4 <= 1.0,
        domain_normalized: bounds.diameter() <= 1.0 + 1e-12 && domain_measure <= 1.0 + 1e-12,
        grid_density: density,
    })
}

fn directions<const D: usize>() -> Vec<[i64; 8]> {
    let mut out = Vec::new();
    for k in 0..D {
        let mut d = [0i64; 8];
        d[k] = 1;
        out.push(d);
    }
    if D == 2 {
        out.push([1, 1, 0, 0, 0, 0, 0, 0]);
        out.push([1, -1, 0, 0, 0, 0, 0, 0]);
    }
    out
}
