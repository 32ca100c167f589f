//! Small dense linear algebra on fixed-size matrices.
//!
//! Dimensions one and two are handled with closed formulas; larger sizes
//! fall back to nalgebra's dynamic decompositions.

use nalgebra::{DMatrix, RowSVector, SMatrix, SVector};

pub type Point<const D: usize> = SVector<f64, D>;
pub type Mat<const D: usize> = SMatrix<f64, D, D>;
pub type Row<const D: usize> = RowSVector<f64, D>;

fn to_dynamic<const D: usize>(m: &Mat<D>) -> DMatrix<f64> {
    DMatrix::from_fn(D, D, |i, j| m[(i, j)])
}

pub fn det<const D: usize>(m: &Mat<D>) -> f64 {
    match D {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => to_dynamic(m).determinant(),
    }
}

pub fn inverse<const D: usize>(m: &Mat<D>) -> Option<Mat<D>> {
    match D {
        1 => {
            let a = m[(0, 0)];
            (a != 0.0).then(|| Mat::<D>::from_element(1.0 / a))
        }
        2 => {
            let d = det(m);
            if d == 0.0 {
                return None;
            }
            let mut inv = Mat::<D>::zeros();
            inv[(0, 0)] = m[(1, 1)] / d;
            inv[(0, 1)] = -m[(0, 1)] / d;
            inv[(1, 0)] = -m[(1, 0)] / d;
            inv[(1, 1)] = m[(0, 0)] / d;
            Some(inv)
        }
        _ => {
            let inv = to_dynamic(m).try_inverse()?;
            Some(Mat::<D>::from_fn(|i, j| inv[(i, j)]))
        }
    }
}

/// Singular values in decreasing order.
pub fn singular_values<const D: usize>(m: &Mat<D>) -> Vec<f64> {
    match D {
        1 => vec![m[(0, 0)].abs()],
        2 => {
            let frob = m.iter().map(|v| v * v).sum::<f64>();
            let d = det(m);
            let disc = (frob * frob - 4.0 * d * d).max(0.0).sqrt();
            let hi = ((frob + disc) / 2.0).sqrt();
            // hi * lo = |det|, which is more accurate than the subtraction
            let lo = if hi > 0.0 { d.abs() / hi } else { 0.0 };
            vec![hi, lo]
        }
        _ => {
            let mut s: Vec<f64> = to_dynamic(m).singular_values().iter().copied().collect();
            s.sort_by(|a, b| b.total_cmp(a));
            s
        }
    }
}

/// Euclidean operator norm.
pub fn spectral_norm<const D: usize>(m: &Mat<D>) -> f64 {
    singular_values(m)[0]
}

pub fn min_singular_value<const D: usize>(m: &Mat<D>) -> f64 {
    *singular_values(m).last().expect("non-empty")
}

pub fn row_norm<const D: usize>(r: &Row<D>) -> f64 {
    r.norm()
}

/// Distance between two points.
pub fn dist<const D: usize>(x: &Point<D>, y: &Point<D>) -> f64 {
    (x - y).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_by_two_singular_values_match_nalgebra() {
        let m = Mat::<2>::new(2.0, 0.3, -0.7, 1.4);
        let ours = singular_values(&m);
        let reference = to_dynamic(&m).singular_values();
        let mut r: Vec<f64> = reference.iter().copied().collect();
        r.sort_by(|a, b| b.total_cmp(a));
        assert_relative_eq!(ours[0], r[0], epsilon = 1e-13);
        assert_relative_eq!(ours[1], r[1], epsilon = 1e-13);
    }

    #[test]
    fn inverse_round_trip() {
        let m = Mat::<2>::new(2.0, 0.3, -0.7, 1.4);
        let inv = inverse(&m).unwrap();
        assert_relative_eq!(m * inv, Mat::<2>::identity(), epsilon = 1e-14);
        let m1 = Mat::<1>::new(4.0);
        assert_eq!(inverse(&m1).unwrap()[(0, 0)], 0.25);
        assert!(inverse(&Mat::<2>::zeros()).is_none());
    }

    #[test]
    fn generic_fallback_for_three_dimensions() {
        let m = Mat::<3>::new(3.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0);
        assert_relative_eq!(det(&m), 30.0, epsilon = 1e-12);
        assert_relative_eq!(spectral_norm(&m), 5.0, epsilon = 1e-12);
        assert_relative_eq!(min_singular_value(&m), 2.0, epsilon = 1e-12);
    }
}
