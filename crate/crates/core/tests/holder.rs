use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiflow_core::holder::{mollify, oscillatory_integral, OscIntOptions};

/// Composite Simpson with `n` (even) panels.
fn simpson<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, n: usize) -> Complex64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += f(a + i as f64 * h) * w;
    }
    s * (h / 3.0)
}

#[test]
fn oscillatory_integral_against_dense_simpson() {
    let theta = |x: f64| x + x * x / 4.0;
    let k = |x: f64| Complex64::new(x, 0.0);
    let b = 50.0;
    let r = oscillatory_integral(k, theta, |x| 1.0 + x / 2.0, b, (0.0, 1.0), 1.0, &OscIntOptions::default()).unwrap();
    let oracle = simpson(|x| Complex64::new(0.0, b * theta(x)).exp() * k(x), 0.0, 1.0, 1_000_000);
    assert!((r.value - oracle).norm() < 1e-8, "{} vs {}", r.value, oracle);
    assert!((r.kappa - 1.0).abs() < 1e-12);
    assert!(r.bound_satisfied);
    assert!(r.nodes_per_period >= 20.0);
}

#[test]
fn oscillatory_bound_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for case in 0..100 {
        let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phase: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let c = rng.gen_range(-0.4..0.4);
        let alpha = if rng.gen_bool(0.5) { 1.0 } else { 0.5 };
        let lo = rng.gen_range(0.0..0.5);
        let hi = rng.gen_range(lo + 0.1..=1.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = sign * 10f64.powf(rng.gen_range(2f64.log10()..3.0));
        let k = |x: f64| {
            let v = a[0] + (1..4).map(|j| a[j] * (2.0 * PI * j as f64 * x + phase[j]).cos()).sum::<f64>();
            Complex64::new(v, 0.0)
        };
        let theta = |x: f64| x + c * x * x;
        let theta_prime = |x: f64| 1.0 + 2.0 * c * x;
        let opts = OscIntOptions::default();
        let r = oscillatory_integral(k, theta, theta_prime, b, (lo, hi), alpha, &opts).unwrap();
        assert!(r.bound_satisfied, "case {case}: |{}| > {}", r.value.norm(), r.bound);
        let mirrored = oscillatory_integral(k, theta, theta_prime, -b, (lo, hi), alpha, &opts).unwrap();
        assert!((mirrored.value - r.value.conj()).norm() < 1e-12 * (1.0 + r.value.norm()));
    }
}

#[test]
fn linear_phase_closed_form_over_frequencies() {
    let one = |_: f64| Complex64::new(1.0, 0.0);
    for b in [2.0, 17.5, 2.0 * PI * 3.0, 333.0, 1000.0] {
        let r = oscillatory_integral(one, |x| x, |_| 1.0, b, (0.0, 1.0), 1.0, &OscIntOptions::default()).unwrap();
        let ib = Complex64::new(0.0, b);
        assert!((r.value - (ib.exp() - 1.0) / ib).norm() < 1e-10);
        assert!(r.bound_satisfied);
    }
}

fn rho(z: f64) -> f64 {
    if z.abs() < 1.0 {
        15.0 / 16.0 * (1.0 - z * z).powi(2)
    } else {
        0.0
    }
}

#[test]
fn mollified_identity_matches_direct_convolution() {
    let b = 100.0;
    let res = 10_001;
    let r = mollify(|x| x, |_| 1.0, b, 1.0, (0.0, 1.0), res).unwrap();
    let g = r.smoothed.as_ref().unwrap();
    let mut worst = 0.0f64;
    for i in 0..res {
        let x = i as f64 / (res - 1) as f64;
        let q = |z: f64| Complex64::new(rho(z) * (x - z / b).clamp(0.0, 1.0), 0.0);
        // split at the kinks of the clamped extension
        let mut cuts = vec![-1.0, 1.0];
        for c in [b * x, b * (x - 1.0)] {
            if c > -1.0 && c < 1.0 {
                cuts.push(c);
            }
        }
        cuts.sort_by(f64::total_cmp);
        let oracle: f64 = cuts.windows(2).map(|w| simpson(q, w[0], w[1], 4000).re).sum();
        worst = worst.max((g.values(0)[i] - oracle).abs());
    }
    assert!(worst < 1e-10, "worst deviation {worst}");
    assert!(r.sup_error <= 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn mollifier_bounds_hold(
        a in prop::collection::vec(-1.0f64..1.0, 4),
        c in -0.3f64..0.3,
        b in 2.0f64..200.0,
        half in any::<bool>(),
    ) {
        let alpha = if half { 0.5 } else { 1.0 };
        let k = |x: f64| a[0] + a[1] * (2.0 * PI * x).sin() + a[2] * (4.0 * PI * x).cos() + a[3] * x * x;
        let r = mollify(k, |x| 1.0 + c * (2.0 * PI * x).sin(), b, alpha, (0.0, 1.0), 513).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }
}
