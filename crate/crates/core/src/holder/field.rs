//! Piecewise fields on a tensor grid per partition element.

use std::fmt::Debug;
use std::io::{self, Write};
use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::linalg::Point;
use crate::phase_space::Cell;

/// Real or complex scalar stored in a field.
pub trait FieldScalar:
    Copy
    + Debug
    + Default
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
    fn to_complex(self) -> Complex64;
    fn conj(self) -> Self;
}

impl FieldScalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
}

impl FieldScalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn to_complex(self) -> Complex64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

/// Anything that can be evaluated on a partition element.
pub trait Observable<S, const D: usize>: Sync {
    fn eval(&self, elem: usize, x: &Point<D>) -> S;
}

impl<S, const D: usize, F> Observable<S, D> for F
where
    F: Fn(usize, &Point<D>) -> S + Sync,
{
    fn eval(&self, elem: usize, x: &Point<D>) -> S {
        self(elem, x)
    }
}

/// Values on a uniform tensor grid of `res` nodes per axis (endpoints
/// included) in every element, interpolated multilinearly inside each
/// element.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseField<S, const D: usize> {
    cells: Vec<Cell<D>>,
    res: usize,
    values: Vec<Vec<S>>,
}

impl<S: FieldScalar, const D: usize> PiecewiseField<S, D> {
    pub fn zeros(cells: &[Cell<D>], res: usize) -> Self {
        assert!(res >= 2, "a field needs at least two nodes per axis");
        let n = res.pow(D as u32);
        Self {
            cells: cells.to_vec(),
            res,
            values: vec![vec![S::default(); n]; cells.len()],
        }
    }

    pub fn from_fn(cells: &[Cell<D>], res: usize, f: impl Fn(usize, &Point<D>) -> S) -> Self {
        let mut out = Self::zeros(cells, res);
        for e in 0..cells.len() {
            for i in 0..out.nodes_per_element() {
                let x = out.node(e, i);
                out.values[e][i] = f(e, &x);
            }
        }
        out
    }

    pub fn constant(cells: &[Cell<D>], res: usize, c: S) -> Self {
        Self::from_fn(cells, res, |_, _| c)
    }

    pub fn from_values(cells: &[Cell<D>], res: usize, values: Vec<Vec<S>>) -> Self {
        let n = res.pow(D as u32);
        assert!(
            values.len() == cells.len() && values.iter().all(|v| v.len() == n),
            "value layout does not match the grid"
        );
        Self {
            cells: cells.to_vec(),
            res,
            values,
        }
    }

    pub fn cells(&self) -> &[Cell<D>] {
        &self.cells
    }

    pub fn res(&self) -> usize {
        self.res
    }

    pub fn num_elements(&self) -> usize {
        self.cells.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.res.pow(D as u32)
    }

    /// Grid spacing along `axis` in element `e`.
    pub fn spacing(&self, e: usize, axis: usize) -> f64 {
        self.cells[e].side(axis) / (self.res - 1) as f64
    }

    /// Multi-index of flat node `i`; axis 0 varies fastest.
    pub fn node_index(&self, i: usize) -> [usize; D] {
        let mut rem = i;
        std::array::from_fn(|_| {
            let c = rem % self.res;
            rem /= self.res;
            c
        })
    }

    pub fn flat_index(&self, idx: &[usize; D]) -> usize {
        idx.iter().rev().fold(0, |acc, &c| acc * self.res + c)
    }

    pub fn node(&self, e: usize, i: usize) -> Point<D> {
        let idx = self.node_index(i);
        let cell = &self.cells[e];
        Point::<D>::from_fn(|k, _| {
            if idx[k] == self.res - 1 {
                cell.hi[k]
            } else {
                cell.lo[k] + idx[k] as f64 * self.spacing(e, k)
            }
        })
    }

    pub fn values(&self, e: usize) -> &[S] {
        &self.values[e]
    }

    pub fn values_mut(&mut self, e: usize) -> &mut [S] {
        &mut self.values[e]
    }

    pub fn all_values(&self) -> impl Iterator<Item = &S> {
        self.values.iter().flatten()
    }

    /// Multilinear interpolation inside element `e`; `x` is clamped to the
    /// closed element.
    pub fn eval(&self, e: usize, x: &Point<D>) -> S {
        let cell = &self.cells[e];
        let mut base = [0usize; D];
        let mut frac = [0.0f64; D];
        for k in 0..D {
            let t = ((x[k] - cell.lo[k]) / cell.side(k)).clamp(0.0, 1.0) * (self.res - 1) as f64;
            let i = (t.floor() as usize).min(self.res - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let vals = &self.values[e];
        let mut acc = S::default();
        for corner in 0..(1usize << D) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..D {
                if corner >> k & 1 == 1 {
                    idx[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += vals[self.flat_index(&idx)] * w;
            }
        }
        acc
    }

    pub fn same_grid<T>(&self, other: &PiecewiseField<T, D>) -> bool {
        self.res == other.res && self.cells == other.cells
    }

    pub fn map<T: FieldScalar>(&self, f: impl Fn(S) -> T) -> PiecewiseField<T, D> {
        PiecewiseField {
            cells: self.cells.clone(),
            res: self.res,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|&s| f(s)).collect())
                .collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        assert!(self.same_grid(other), "fields live on different grids");
        PiecewiseField {
            cells: self.cells.clone(),
            res: self.res,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn scale(&self, c: S) -> Self {
        self.map(|s| s * c)
    }

    pub fn to_complex(&self) -> PiecewiseField<Complex64, D> {
        self.map(FieldScalar::to_complex)
    }

    /// Writes `elem,i0[,i1],re,im` rows.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let axes: Vec<String> = (0..D).map(|k| format!("i{k}")).collect();
        writeln!(w, "elem,{},re,im", axes.join(","))?;
        for (e, vals) in self.values.iter().enumerate() {
            for (i, v) in vals.iter().enumerate() {
                let idx = self.node_index(i);
                let idx: Vec<String> = idx.iter().map(usize::to_string).collect();
                let c = v.to_complex();
                writeln!(w, "{e},{},{:e},{:e}", idx.join(","), c.re, c.im)?;
            }
        }
        Ok(())
    }
}

impl<S: FieldScalar, const D: usize> Observable<S, D> for PiecewiseField<S, D> {
    fn eval(&self, elem: usize, x: &Point<D>) -> S {
        PiecewiseField::eval(self, elem, x)
    }
}

impl<S: FieldScalar, const D: usize> Add for &PiecewiseField<S, D> {
    type Output = PiecewiseField<S, D>;
    fn add(self, rhs: Self) -> Self::Output {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<S: FieldScalar, const D: usize> Sub for &PiecewiseField<S, D> {
    type Output = PiecewiseField<S, D>;
    fn sub(self, rhs: Self) -> Self::Output {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<S: FieldScalar, const D: usize> Mul for &PiecewiseField<S, D> {
    type Output = PiecewiseField<S, D>;
    fn mul(self, rhs: Self) -> Self::Output {
        self.zip_with(rhs, |a, b| a * b)
    }
}
