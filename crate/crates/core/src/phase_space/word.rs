//! Branch words and inverse chains.
//!
//! A word `(w_1, ..., w_n)` lists inverse branches in the order they are
//! applied: `l_w = g_{w_n} o ... o g_{w_1}`. The point `l_w(y)` therefore
//! lies in element `w_n` and `T^{n-1} l_w(y)` lies in `w_1`. A word is
//! admissible when `w_{k-1}` is contained in `T(w_k)` for every `k`.

use serde::{Deserialize, Serialize};

use super::map::MarkovMap;
use super::roof::Roof;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, Point, Row};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchWord(Vec<usize>);

impl BranchWord {
    pub fn new(symbols: Vec<usize>) -> Self {
        Self(symbols)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    /// First symbol applied; its image `T(w_1)` is the domain of `l_w`.
    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    /// Element containing `l_w(y)`.
    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// `self` applied first, then `other`.
    pub fn then(&self, other: &BranchWord) -> BranchWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BranchWord(v)
    }

    pub fn prefix(&self, n: usize) -> BranchWord {
        BranchWord(self.0[..n].to_vec())
    }

    pub fn suffix_from(&self, n: usize) -> BranchWord {
        BranchWord(self.0[n..].to_vec())
    }

    pub fn is_admissible<const D: usize>(&self, map: &MarkovMap<D>) -> bool {
        self.0.iter().all(|&s| s < map.len())
            && self
                .0
                .windows(2)
                .all(|w| map.transitions(w[1]).contains(&w[0]))
    }
}

impl From<Vec<usize>> for BranchWord {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// Number of admissible words of length `n`.
pub fn count_words<const D: usize>(map: &MarkovMap<D>, n: usize) -> u128 {
    if n == 0 {
        return 1;
    }
    // ending[e]: admissible words of the current length whose last symbol is e
    let mut ending = vec![1u128; map.len()];
    for _ in 1..n {
        let mut next = vec![0u128; map.len()];
        for (e, cnt) in next.iter_mut().enumerate() {
            *cnt = map
                .transitions(e)
                .iter()
                .map(|&p| ending[p])
                .fold(0u128, u128::saturating_add);
        }
        ending = next;
    }
    ending.into_iter().fold(0u128, u128::saturating_add)
}

/// Admissible words of length `n` in lexicographic order.
pub fn enumerate_words<const D: usize>(map: &MarkovMap<D>, n: usize) -> Vec<BranchWord> {
    let mut out = Vec::new();
    let mut stack = Vec::with_capacity(n);
    fn rec<const D: usize>(
        map: &MarkovMap<D>,
        n: usize,
        stack: &mut Vec<usize>,
        out: &mut Vec<BranchWord>,
    ) {
        if stack.len() == n {
            out.push(BranchWord(stack.clone()));
            return;
        }
        for s in 0..map.len() {
            if stack.last().is_none_or(|&prev| map.transitions(s).contains(&prev)) {
                stack.push(s);
                rec(map, n, stack, out);
                stack.pop();
            }
        }
    }
    rec(map, n, &mut stack, &mut out);
    out
}

/// Everything computed along one inverse branch `l_w` at a point `y`.
#[derive(Debug, Clone)]
pub struct InverseChain<const D: usize> {
    /// `l_w(y)`
    pub point: Point<D>,
    /// `D l_w(y)`
    pub derivative: Mat<D>,
    /// `J_n(l_w y) = |det D l_w(y)|`
    pub jacobian: f64,
    /// `tau_n(l_w y)`
    pub roof_sum: f64,
    /// `D(tau_n o l_w)(y)`
    pub roof_derivative: Row<D>,
}

fn check_word<const D: usize>(map: &MarkovMap<D>, word: &BranchWord) -> Result<()> {
    if !word.is_admissible(map) {
        return Err(Error::Domain(format!(
            "word {:?} is not admissible",
            word.symbols()
        )));
    }
    Ok(())
}

/// `l_w(y)`.
pub fn inverse_branch<const D: usize>(
    map: &MarkovMap<D>,
    word: &BranchWord,
    y: &Point<D>,
) -> Result<Point<D>> {
    check_word(map, word)?;
    let mut x = *y;
    for &s in word.symbols() {
        x = map.invert_branch(s, &x)?;
    }
    Ok(x)
}

/// `J_n(l_w y)` and `D l_w(y)`.
pub fn jacobian_j<const D: usize>(
    map: &MarkovMap<D>,
    word: &BranchWord,
    y: &Point<D>,
) -> Result<(f64, Mat<D>)> {
    check_word(map, word)?;
    let mut x = *y;
    let mut deriv = Mat::<D>::identity();
    for &s in word.symbols() {
        x = map.invert_branch(s, &x)?;
        let inv = linalg::inverse(&map.jacobian(s, &x))
            .ok_or_else(|| Error::numerical("singular branch Jacobian", 0.0))?;
        deriv = inv * deriv;
    }
    Ok((linalg::det(&deriv).abs(), deriv))
}

/// Full chain data for `l_w` at `y`: preimage, derivative, Jacobian and
/// Birkhoff roof sum with its derivative.
pub fn inverse_chain<const D: usize>(
    map: &MarkovMap<D>,
    roof: &Roof<D>,
    word: &BranchWord,
    y: &Point<D>,
) -> Result<InverseChain<D>> {
    check_word(map, word)?;
    let mut x = *y;
    let mut deriv = Mat::<D>::identity();
    let mut roof_sum = 0.0;
    let mut roof_derivative = Row::<D>::zeros();
    for &s in word.symbols() {
        x = map.invert_branch(s, &x)?;
        let inv = linalg::inverse(&map.jacobian(s, &x))
            .ok_or_else(|| Error::numerical("singular branch Jacobian", 0.0))?;
        deriv = inv * deriv;
        roof_sum += roof.value(s, &x);
        roof_derivative += roof.gradient(s, &x) * deriv;
    }
    Ok(InverseChain {
        point: x,
        derivative: deriv,
        jacobian: linalg::det(&deriv).abs(),
        roof_sum,
        roof_derivative,
    })
}

/// `tau_n(l_w y)` and `D(tau_n o l_w)(y)`.
pub fn roof_sum_and_derivative<const D: usize>(
    map: &MarkovMap<D>,
    roof: &Roof<D>,
    word: &BranchWord,
    y: &Point<D>,
) -> Result<(f64, Row<D>)> {
    let c = inverse_chain(map, roof, word, y)?;
    Ok((c.roof_sum, c.roof_derivative))
}

/// Birkhoff sum `tau_n(x) = sum_{j<n} tau(T^j x)` along the forward orbit.
pub fn forward_roof_sum<const D: usize>(
    map: &MarkovMap<D>,
    roof: &Roof<D>,
    x: &Point<D>,
    n: usize,
) -> Option<f64> {
    let mut x = *x;
    let mut sum = 0.0;
    for _ in 0..n {
        let (e, next) = map.apply(&x)?;
        sum += roof.value(e, &x);
        x = next;
    }
    Some(sum)
}
