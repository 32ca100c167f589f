//! Smooth observables on the suspension space.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flow::FlowState;
use crate::phase_space::Semiflow;

/// Catalog of observables `X_tau -> C`. All of them are continuous across
/// the identification `(x, tau(x)) ~ (Tx, 0)`, except [`Self::FiberWave`]
/// when the roof is not an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlowObservable {
    Constant { value: f64 },
    /// `u`
    Height,
    /// `e^{2 pi i k u}`
    FiberWave { k: f64 },
    /// `e^{2 pi i k u / tau(x)}`
    FiberPhase { k: f64 },
    /// `sin(2 pi k s(x)) sin^2(pi u / tau(x))` with `s` the coordinate mean.
    TrigBump { k: f64 },
    /// `cos(2 pi k s(x))`, ignoring the fiber.
    BaseCos { k: f64 },
    /// `base + shift`
    Shifted { base: Box<FlowObservable>, shift: f64 },
}

impl FlowObservable {
    pub fn eval<const D: usize>(&self, sys: &Semiflow<D>, s: &FlowState<D>) -> Complex64 {
        let mean = s.x.sum() / D as f64;
        match self {
            FlowObservable::Constant { value } => Complex64::new(*value, 0.0),
            FlowObservable::Height => Complex64::new(s.u, 0.0),
            FlowObservable::FiberWave { k } => Complex64::new(0.0, 2.0 * PI * k * s.u).exp(),
            FlowObservable::FiberPhase { k } => Complex64::new(0.0, 2.0 * PI * k * s.u / s.roof(sys)).exp(),
            FlowObservable::TrigBump { k } => {
                let v = (2.0 * PI * k * mean).sin() * (PI * s.u / s.roof(sys)).sin().powi(2);
                Complex64::new(v, 0.0)
            }
            FlowObservable::BaseCos { k } => Complex64::new((2.0 * PI * k * mean).cos(), 0.0),
            FlowObservable::Shifted { base, shift } => base.eval(sys, s) + shift,
        }
    }
}
