//! The suspension semiflow on `X_tau = {(x, u) : 0 <= u < tau(x)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::phase_space::Semiflow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState<const D: usize> {
    /// Partition element containing `x`.
    pub elem: usize,
    #[serde(with = "point_serde")]
    pub x: Point<D>,
    pub u: f64,
}

mod point_serde {
    use super::Point;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(p: &Point<D>, s: S) -> Result<S::Ok, S::Error> {
        p.as_slice().serialize(s)
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(d: De) -> Result<Point<D>, De::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        if v.len() != D {
            return Err(serde::de::Error::invalid_length(v.len(), &"one coordinate per axis"));
        }
        Ok(Point::<D>::from_fn(|k, _| v[k]))
    }
}

impl<const D: usize> FlowState<D> {
    /// `(x, u)` with the roll-over applied.
    pub fn new(sys: &Semiflow<D>, x: Point<D>, u: f64) -> Result<Self> {
        let elem = sys
            .map
            .locate(&x)
            .ok_or_else(|| Error::Domain(format!("{:?} is outside X", x.as_slice())))?;
        if u < 0.0 {
            return Err(Error::Domain(format!("fiber coordinate {u} is negative")));
        }
        Ok(flow_step(sys, Self { elem, x, u: 0.0 }, u))
    }

    pub fn roof(&self, sys: &Semiflow<D>) -> f64 {
        sys.roof.value(self.elem, &self.x)
    }
}

/// `T_t(x, u)`: move up the fiber by `t` and re-inject through `T` at the
/// roof, `(x, tau(x)) ~ (Tx, 0)`.
///
/// # Panics
///
/// If the orbit meets a point where the roof is not positive.
pub fn flow_step<const D: usize>(sys: &Semiflow<D>, s: FlowState<D>, t: f64) -> FlowState<D> {
    flow_step_counted(sys, s, t).0
}

/// [`flow_step`] together with the number of applications of `T`.
pub fn flow_step_counted<const D: usize>(sys: &Semiflow<D>, s: FlowState<D>, t: f64) -> (FlowState<D>, usize) {
    debug_assert!(t >= 0.0);
    let FlowState { mut elem, mut x, mut u } = s;
    u += t;
    let mut steps = 0;
    loop {
        let tau = sys.roof.value(elem, &x);
        if u < tau {
            break;
        }
        assert!(tau > 0.0, "roof {tau} at {:?} is not positive", x.as_slice());
        u -= tau;
        x = sys.map.apply_branch(elem, &x);
        elem = sys.map.locate(&x).unwrap_or(elem);
        steps += 1;
    }
    (FlowState { elem, x, u }, steps)
}
