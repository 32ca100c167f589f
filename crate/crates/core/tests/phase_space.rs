use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiflow_core::linalg::{self, Point};
use semiflow_core::phase_space::map::{doubling, perturbed_doubling, tripling};
use semiflow_core::phase_space::{
    enumerate_words, inverse_branch, inverse_chain, jacobian_j, verify_assumptions, BranchWord, Roof, Semiflow,
};

const EPS: f64 = 0.05;

fn t_perturbed(x: f64) -> f64 {
    (2.0 * x + EPS * (2.0 * PI * x).sin()).rem_euclid(1.0)
}

#[test]
fn affine_catalog_constants() {
    let r = verify_assumptions(&doubling(), &Roof::constant(1.0), 257).unwrap();
    let c = r.constants;
    assert!((c.lambda - 2f64.ln()).abs() < 1e-12 && (c.big_lambda - 2f64.ln()).abs() < 1e-12);
    assert_eq!((c.c2, c.c3, c.c4, c.covering_index), (0.0, 0.0, 1.0, 1));
    assert!(r.all_pass());

    let r = verify_assumptions(&tripling(), &Roof::constant(1.0), 257).unwrap();
    assert!((r.constants.lambda - 3f64.ln()).abs() < 1e-12);
    assert!((r.constants.big_lambda - 3f64.ln()).abs() < 1e-12);
    assert!(r.all_pass());
}

#[test]
fn perturbed_expansion_matches_dense_grid() {
    let n = 1_000_000;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..=n {
        let x = i as f64 / n as f64;
        let d = (2.0 + 2.0 * PI * EPS * (2.0 * PI * x).cos()).abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let r = verify_assumptions(&perturbed_doubling(EPS).unwrap(), &Roof::constant(1.0), 4097).unwrap();
    assert!(r.all_pass());
    assert!(r.constants.lambda > 0.0 && r.constants.big_lambda > 0.0);
    assert!((r.constants.lambda - lo.ln()).abs() < 1e-9, "{} vs {}", r.constants.lambda, lo.ln());
    assert!((r.constants.big_lambda - hi.ln()).abs() < 1e-9);
}

#[test]
fn perturbed_inverse_agrees_with_bisection() {
    let map = perturbed_doubling(EPS).unwrap();
    let x = inverse_branch(&map, &BranchWord::new(vec![1]), &Point::<1>::new(0.3)).unwrap()[0];
    assert!((t_perturbed(x) - 0.3).abs() < 1e-12);
    // branch 1 covers [1/2, 1) and T rises monotonically from 1 to 2 there
    let (mut a, mut b) = (0.5f64, 1.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if 2.0 * m + EPS * (2.0 * PI * m).sin() - 1.0 < 0.3 {
            a = m;
        } else {
            b = m;
        }
    }
    assert!((x - 0.5 * (a + b)).abs() < 1e-12);
}

#[test]
fn doubling_jacobians_of_length_three() {
    let map = doubling();
    let y = Point::<1>::new(0.37);
    let words = enumerate_words(&map, 3);
    assert_eq!(words.len(), 8);
    let total: f64 = words
        .iter()
        .map(|w| {
            let (j, d) = jacobian_j(&map, w, &y).unwrap();
            assert_eq!(j, 0.125);
            assert_eq!(d[(0, 0)], 0.125);
            j
        })
        .sum();
    assert_eq!(total, 1.0);
}

#[test]
fn jacobian_mass_is_bounded_by_c7() {
    let sys = Semiflow::new(perturbed_doubling(EPS).unwrap(), Roof::constant(1.0), 4097).unwrap().0;
    let ys: Vec<Point<1>> = (0..=32).map(|i| Point::<1>::new(i as f64 / 32.0 * (1.0 - 1e-12))).collect();
    for n in 1..=12 {
        let words = enumerate_words(&sys.map, n);
        let mass: f64 = words
            .iter()
            .map(|w| {
                ys.iter()
                    .map(|y| jacobian_j(&sys.map, w, y).unwrap().0)
                    .fold(0.0, f64::max)
            })
            .sum();
        assert!(mass <= sys.constants.c7, "n={n}: {mass} > C7 = {}", sys.constants.c7);
        assert!(mass >= 1.0 - 1e-9);
    }
}

#[test]
fn distortion_is_holder_with_c6() {
    let sys = Semiflow::new(perturbed_doubling(EPS).unwrap(), Roof::constant(1.0), 4097).unwrap().0;
    let c6 = sys.constants.c6;
    assert!(c6 > 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=10);
        let w = BranchWord::new((0..n).map(|_| rng.gen_range(0..2)).collect());
        let (x, y) = (rng.gen::<f64>(), rng.gen::<f64>());
        let jx = jacobian_j(&sys.map, &w, &Point::<1>::new(x)).unwrap().0;
        let jy = jacobian_j(&sys.map, &w, &Point::<1>::new(y)).unwrap().0;
        let ratio = (jx / jy).ln().abs() / (c6 * (x - y).abs().powf(sys.alpha()));
        worst = worst.max(ratio);
    }
    assert!(worst <= 1.0, "worst distortion ratio {worst}");
}

#[test]
fn identity_roof_derivative_is_a_geometric_sum() {
    let sys = Semiflow::new(doubling(), Roof::affine(0.0, 1.0), 257).unwrap().0;
    assert!((sys.constants.c3 - 0.5).abs() < 1e-12);
    assert!((sys.constants.c5 - 2.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=10 {
        let w = BranchWord::new((0..n).map(|_| rng.gen_range(0..2)).collect());
        let (_, d) = sys.roof_sum_and_derivative(&w, &Point::<1>::new(rng.gen())).unwrap();
        let expected: f64 = (1..=n).map(|k| 0.5f64.powi(k)).sum();
        assert!((d[0] - expected).abs() < 1e-14);
        assert!(d[0] < 0.5 * sys.constants.c5);
    }
}

#[test]
fn constant_roof_sum_is_the_length() {
    let sys = Semiflow::new(perturbed_doubling(EPS).unwrap(), Roof::constant(1.0), 257).unwrap().0;
    let w = BranchWord::new(vec![0, 1, 1, 0, 1]);
    let (s, d) = sys.roof_sum_and_derivative(&w, &Point::<1>::new(0.42)).unwrap();
    assert_eq!((s, d[0]), (5.0, 0.0));
}

#[test]
fn roof_derivative_respects_half_cone_width() {
    let sys = Semiflow::new(perturbed_doubling(EPS).unwrap(), Roof::trig(1.0, 0.1, 1.0), 4097)
        .unwrap()
        .0;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let w = BranchWord::new((0..10).map(|_| rng.gen_range(0..2)).collect());
        let y = Point::<1>::new(rng.gen());
        let (_, d) = sys.roof_sum_and_derivative(&w, &y).unwrap();
        assert!(linalg::row_norm(&d) <= 0.5 * sys.constants.c5);
    }
}

#[test]
fn roof_sum_matches_forward_orbit() {
    let sys = Semiflow::new(perturbed_doubling(EPS).unwrap(), Roof::trig(1.0, 0.2, 1.0), 4097)
        .unwrap()
        .0;
    let w = BranchWord::new(vec![1, 0, 0, 1, 1, 0]);
    let y = Point::<1>::new(0.3);
    let c = inverse_chain(&sys.map, &sys.roof, &w, &y).unwrap();
    let mut x = c.point[0];
    let mut sum = 0.0;
    for _ in 0..6 {
        sum += 1.0 + 0.2 * (2.0 * PI * x).cos();
        x = t_perturbed(x);
    }
    assert!((x - 0.3).abs() < 1e-9);
    assert!((sum - c.roof_sum).abs() < 1e-12);
}
