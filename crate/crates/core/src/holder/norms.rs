//! Sup norm, per-element Hölder seminorm, the (b)-norm and L^1 quantities.

use serde::{Deserialize, Serialize};

use super::field::{FieldScalar, PiecewiseField};

pub fn sup_norm<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>) -> f64 {
    f.all_values().map(|v| v.modulus()).fold(0.0, f64::max)
}

/// Lower bound for `sup_omega sup_{x != y in omega} |f(x) - f(y)| / |x - y|^alpha`
/// from node pairs at dyadic separations `h, 2h, 4h, ...` along each axis
/// (and both diagonals in two dimensions).
pub fn holder_seminorm<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>, alpha: f64) -> f64 {
    let res = f.res();
    let mut dirs: Vec<[i64; D]> = (0..D)
        .map(|k| std::array::from_fn(|j| i64::from(j == k)))
        .collect();
    if D == 2 {
        dirs.push(std::array::from_fn(|_| 1));
        dirs.push(std::array::from_fn(|j| if j == 0 { 1 } else { -1 }));
    }
    let mut best: f64 = 0.0;
    for e in 0..f.num_elements() {
        let h: [f64; D] = std::array::from_fn(|k| f.spacing(e, k));
        let vals = f.values(e);
        for i in 0..f.nodes_per_element() {
            let idx = f.node_index(i);
            let mut step = 1usize;
            while step < res {
                for dir in &dirs {
                    let mut other = idx;
                    let mut inside = true;
                    let mut dist2 = 0.0;
                    for k in 0..D {
                        let t = idx[k] as i64 + dir[k] * step as i64;
                        if t < 0 || t >= res as i64 {
                            inside = false;
                            break;
                        }
                        other[k] = t as usize;
                        dist2 += (dir[k] as f64 * step as f64 * h[k]).powi(2);
                    }
                    if !inside {
                        continue;
                    }
                    let diff = (vals[i] - vals[f.flat_index(&other)]).modulus();
                    if diff > 0.0 {
                        best = best.max(diff / dist2.sqrt().powf(alpha));
                    }
                }
                step *= 2;
            }
        }
    }
    best
}

/// `|f|_alpha + ||f||_inf`.
pub fn holder_norm<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>, alpha: f64) -> f64 {
    holder_seminorm(f, alpha) + sup_norm(f)
}

/// `|f|_alpha / (1 + |b|^alpha) + |f|_alpha + ||f||_inf`.
pub fn b_norm<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>, alpha: f64, b: f64) -> f64 {
    b_norm_from_parts(holder_seminorm(f, alpha), sup_norm(f), alpha, b)
}

pub fn b_norm_from_parts(seminorm: f64, sup: f64, alpha: f64, b: f64) -> f64 {
    seminorm / (1.0 + b.abs().powf(alpha)) + seminorm + sup
}

fn trapezoid_weights<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>, e: usize) -> Vec<f64> {
    let res = f.res();
    (0..f.nodes_per_element())
        .map(|i| {
            let idx = f.node_index(i);
            (0..D)
                .map(|k| {
                    let h = f.spacing(e, k);
                    if idx[k] == 0 || idx[k] == res - 1 {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .product()
        })
        .collect()
}

/// Trapezoid-rule integral over X.
pub fn integral<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>) -> S {
    let mut total = S::default();
    for e in 0..f.num_elements() {
        let w = trapezoid_weights(f, e);
        let mut acc = S::default();
        for (v, wi) in f.values(e).iter().zip(&w) {
            acc += *v * *wi;
        }
        total += acc;
    }
    total
}

/// Trapezoid-rule `||f||_{L^1}`.
pub fn l1_norm<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>) -> f64 {
    integral(&f.map(|v| v.modulus()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub alpha: f64,
    pub b: f64,
    pub sup: f64,
    pub seminorm: f64,
    pub holder: f64,
    pub b_norm: f64,
}

pub fn norm_report<S: FieldScalar, const D: usize>(f: &PiecewiseField<S, D>, alpha: f64, b: f64) -> NormReport {
    let sup = sup_norm(f);
    let seminorm = holder_seminorm(f, alpha);
    NormReport {
        alpha,
        b,
        sup,
        seminorm,
        holder: seminorm + sup,
        b_norm: b_norm_from_parts(seminorm, sup, alpha, b),
    }
}
