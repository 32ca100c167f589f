//! Markov maps, roofs, words and the assumption verifier.

pub mod assumptions;
pub mod map;
pub mod roof;
pub mod word;

pub use assumptions::{verify_assumptions, C3_FLOOR, AssumptionCheck, AssumptionReport, SystemConstants};
pub use map::{Branch, Cell, MarkovMap};
pub use roof::{Profile, Roof, RoofFunction};
pub use word::{
    count_words, enumerate_words, forward_roof_sum, inverse_branch, inverse_chain, jacobian_j,
    roof_sum_and_derivative, BranchWord, InverseChain,
};

use crate::error::{Error, Result};
use crate::linalg::{self, Point, Row};

/// A map, a roof over it and the constants measured for the pair.
#[derive(Debug, Clone)]
pub struct Semiflow<const D: usize> {
    pub map: MarkovMap<D>,
    pub roof: Roof<D>,
    pub constants: SystemConstants,
}

impl<const D: usize> Semiflow<D> {
    /// Verifies the hypotheses and keeps the measured constants.
    pub fn new(map: MarkovMap<D>, roof: Roof<D>, grid_density: usize) -> Result<(Self, AssumptionReport)> {
        let report = verify_assumptions(&map, &roof, grid_density)?;
        let constants = report.constants;
        Ok((
            Self {
                map,
                roof,
                constants,
            },
            report,
        ))
    }

    pub fn with_constants(map: MarkovMap<D>, roof: Roof<D>, constants: SystemConstants) -> Self {
        Self {
            map,
            roof,
            constants,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.constants.alpha
    }

    /// `tau_n(l_w y)` and `D(tau_n o l_w)(y)`, checked against `C5 / 2`.
    ///
    /// A violation means the measured `C3` or `lambda` is too optimistic,
    /// usually because the verification grid was too coarse.
    pub fn roof_sum_and_derivative(&self, word: &BranchWord, y: &Point<D>) -> Result<(f64, Row<D>)> {
        let (sum, deriv) = roof_sum_and_derivative(&self.map, &self.roof, word, y)?;
        let norm = linalg::row_norm(&deriv);
        let bound = 0.5 * self.constants.c5;
        if norm > bound * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::Inconsistent(format!(
                "||D(tau_n o l_w)|| = {norm} exceeds C5/2 = {bound}; refine the verification grid"
            )));
        }
        Ok((sum, deriv))
    }
}
