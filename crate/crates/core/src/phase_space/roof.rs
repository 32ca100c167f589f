//! Roof functions.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::linalg::{Point, Row};

/// A roof evaluated on a given partition element.
///
/// The element index lets roofs be defined piecewise, which is needed for
/// coboundaries `theta o T - theta + chi` with a locally constant `chi`.
pub trait RoofFunction<const D: usize>: Send + Sync {
    fn value(&self, elem: usize, x: &Point<D>) -> f64;
    fn gradient(&self, elem: usize, x: &Point<D>) -> Row<D>;
}

/// Scalar profile applied to the coordinate mean `s(x) = (x_1 + ... + x_d) / d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `a + b s`
    Affine(f64, f64),
    /// `c0 + c1 cos(2 pi k s)`
    Trig { c0: f64, c1: f64, k: f64 },
    /// `sum_i c_i s^i`
    Poly(Vec<f64>),
}

impl Profile {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Affine(a, b) => a + b * s,
            Profile::Trig { c0, c1, k } => c0 + c1 * (2.0 * PI * k * s).cos(),
            Profile::Poly(c) => c.iter().rev().fold(0.0, |acc, ci| acc * s + ci),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Constant(_) => 0.0,
            Profile::Affine(_, b) => *b,
            Profile::Trig { c1, k, .. } => -2.0 * PI * k * c1 * (2.0 * PI * k * s).sin(),
            Profile::Poly(c) => c
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, ci)| acc * s + i as f64 * ci),
        }
    }
}

struct ProfileRoof(Profile);

impl<const D: usize> RoofFunction<D> for ProfileRoof {
    fn value(&self, _elem: usize, x: &Point<D>) -> f64 {
        self.0.value(x.sum() / D as f64)
    }

    fn gradient(&self, _elem: usize, x: &Point<D>) -> Row<D> {
        Row::<D>::repeat(self.0.derivative(x.sum() / D as f64) / D as f64)
    }
}

struct ClosureRoof<V, G> {
    value: V,
    gradient: G,
}

impl<const D: usize, V, G> RoofFunction<D> for ClosureRoof<V, G>
where
    V: Fn(usize, &Point<D>) -> f64 + Send + Sync,
    G: Fn(usize, &Point<D>) -> Row<D> + Send + Sync,
{
    fn value(&self, elem: usize, x: &Point<D>) -> f64 {
        (self.value)(elem, x)
    }

    fn gradient(&self, elem: usize, x: &Point<D>) -> Row<D> {
        (self.gradient)(elem, x)
    }
}

/// A roof with its Hölder exponent.
#[derive(Clone)]
pub struct Roof<const D: usize> {
    name: String,
    alpha: f64,
    func: Arc<dyn RoofFunction<D>>,
}

impl<const D: usize> fmt::Debug for Roof<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Roof")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .finish()
    }
}

impl<const D: usize> Roof<D> {
    pub fn new(name: impl Into<String>, alpha: f64, func: Arc<dyn RoofFunction<D>>) -> Self {
        Self {
            name: name.into(),
            alpha,
            func,
        }
    }

    pub fn from_profile(name: impl Into<String>, alpha: f64, profile: Profile) -> Self {
        Self::new(name, alpha, Arc::new(ProfileRoof(profile)))
    }

    pub fn from_fns<V, G>(name: impl Into<String>, alpha: f64, value: V, gradient: G) -> Self
    where
        V: Fn(usize, &Point<D>) -> f64 + Send + Sync + 'static,
        G: Fn(usize, &Point<D>) -> Row<D> + Send + Sync + 'static,
    {
        Self::new(name, alpha, Arc::new(ClosureRoof { value, gradient }))
    }

    pub fn constant(c: f64) -> Self {
        Self::from_profile(format!("constant({c})"), 1.0, Profile::Constant(c))
    }

    pub fn affine(a: f64, b: f64) -> Self {
        Self::from_profile(format!("affine({a},{b})"), 1.0, Profile::Affine(a, b))
    }

    pub fn trig(c0: f64, c1: f64, k: f64) -> Self {
        Self::from_profile(
            format!("trig({c0},{c1},{k})"),
            1.0,
            Profile::Trig { c0, c1, k },
        )
    }

    pub fn poly(coeffs: Vec<f64>) -> Self {
        let name = format!("poly({coeffs:?})");
        Self::from_profile(name, 1.0, Profile::Poly(coeffs))
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self, elem: usize, x: &Point<D>) -> f64 {
        self.func.value(elem, x)
    }

    pub fn gradient(&self, elem: usize, x: &Point<D>) -> Row<D> {
        self.func.gradient(elem, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_derivatives_match_finite_differences() {
        let profiles = [
            Profile::Constant(1.0),
            Profile::Affine(0.5, 0.3),
            Profile::Trig {
                c0: 1.0,
                c1: 0.2,
                k: 3.0,
            },
            Profile::Poly(vec![0.5, -0.1, 0.3, 0.2]),
        ];
        let h = 1e-6;
        for p in &profiles {
            for &s in &[0.1, 0.37, 0.8] {
                let fd = (p.value(s + h) - p.value(s - h)) / (2.0 * h);
                assert!((fd - p.derivative(s)).abs() < 1e-7, "{p:?} at {s}");
            }
        }
    }

    #[test]
    fn two_dimensional_gradient_splits_evenly() {
        let r = Roof::<2>::affine(1.0, 0.4);
        let g = r.gradient(0, &Point::<2>::new(0.2, 0.6));
        assert!((g[0] - 0.2).abs() < 1e-15 && (g[1] - 0.2).abs() < 1e-15);
        assert!((r.value(0, &Point::<2>::new(0.2, 0.6)) - 1.16).abs() < 1e-15);
    }
}
