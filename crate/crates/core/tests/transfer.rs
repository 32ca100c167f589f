use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semiflow_core::holder::{integral, sup_norm, PiecewiseField};
use semiflow_core::linalg::Point;
use semiflow_core::phase_space::map::{doubling, perturbed_doubling, tripling};
use semiflow_core::phase_space::{Roof, Semiflow};
use semiflow_core::transfer::{
    apply_twisted, apply_twisted_observable, invariant_density, ly_constants, norm_decay_scan, random_trig_probes,
    DensityOptions, ScanOptions, Schedule, ScheduleOverrides, TwistParameter, DEFAULT_WORD_BUDGET,
};

const EPS: f64 = 0.05;
const ULAM_BINS: usize = 1_000_000;

fn perturbed(roof: Roof<1>) -> Semiflow<1> {
    Semiflow::new(perturbed_doubling(EPS).unwrap(), roof, 4097).unwrap().0
}

/// Ulam discretization of the Perron-Frobenius operator of the perturbed
/// doubling map on equal bins, with the map linearized inside each bin.
struct Ulam {
    images: Vec<(f64, f64)>,
}

impl Ulam {
    fn new() -> Self {
        let t = |x: f64| 2.0 * x + EPS * (2.0 * PI * x).sin();
        let h = 1.0 / ULAM_BINS as f64;
        let images = (0..ULAM_BINS)
            .map(|i| {
                let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
                let shift = if i >= ULAM_BINS / 2 { 1.0 } else { 0.0 };
                (t(a) - shift, t(b) - shift)
            })
            .collect();
        Self { images }
    }

    /// Pushes bin densities forward once.
    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = ULAM_BINS as f64;
        let mut out = vec![0.0; ULAM_BINS];
        for (i, &(lo, hi)) in self.images.iter().enumerate() {
            let mass = f[i] / n;
            let len = hi - lo;
            let first = ((lo * n).floor() as usize).min(ULAM_BINS - 1);
            let last = ((hi * n).ceil() as usize).min(ULAM_BINS);
            for (j, o) in out.iter_mut().enumerate().take(last).skip(first) {
                let (a, b) = (j as f64 / n, (j + 1) as f64 / n);
                let overlap = hi.min(b) - lo.max(a);
                if overlap > 0.0 {
                    *o += mass * overlap / len * n;
                }
            }
        }
        out
    }
}

fn l1_against_bins(f: &PiecewiseField<Complex64, 1>, sys: &Semiflow<1>, bins: &[f64]) -> f64 {
    let n = bins.len() as f64;
    bins.iter()
        .enumerate()
        .map(|(i, &v)| {
            let x = Point::<1>::new((i as f64 + 0.5) / n);
            let e = sys.map.locate(&x).unwrap();
            (f.eval(e, &x).re - v).abs()
        })
        .sum::<f64>()
        / n
}

#[test]
fn operator_matches_ulam_oracle() {
    let sys = perturbed(Roof::constant(1.0));
    let ulam = Ulam::new();
    let n = ULAM_BINS as f64;
    let mut bins: Vec<f64> = (0..ULAM_BINS)
        .map(|i| {
            let (a, b) = (i as f64 / n, (i + 1) as f64 / n);
            ((2.0 * PI * a).cos() - (2.0 * PI * b).cos()) / (2.0 * PI * (b - a))
        })
        .collect();
    let sine = |_: usize, x: &Point<1>| Complex64::new((2.0 * PI * x[0]).sin(), 0.0);
    for step in 1..=10 {
        bins = ulam.apply(&bins);
        if step == 1 || step == 10 {
            let g = apply_twisted_observable(&sys, TwistParameter::zero(), step, &sine, 4097, DEFAULT_WORD_BUDGET)
                .unwrap();
            let err = l1_against_bins(&g, &sys, &bins);
            assert!(err < 1e-3, "n={step}: L1 error {err}");
        }
    }
}

#[test]
fn density_matches_ulam_oracle() {
    let sys = perturbed(Roof::constant(1.0));
    let h = invariant_density(&sys, &DensityOptions::default()).unwrap();
    assert!(h.residual < 1e-10 && h.min_value > 0.0);
    assert!((integral(&h.density) - 1.0).abs() < 1e-12);

    let ulam = Ulam::new();
    let mut bins = vec![1.0; ULAM_BINS];
    for _ in 0..200 {
        let next = ulam.apply(&bins);
        let change: f64 = next.iter().zip(&bins).map(|(a, b)| (a - b).abs()).sum::<f64>() / ULAM_BINS as f64;
        bins = next;
        if change < 1e-13 {
            break;
        }
    }
    let err = l1_against_bins(&h.density.to_complex(), &sys, &bins);
    assert!(err < 1e-3, "L1 error {err}");
}

#[test]
fn affine_maps_have_lebesgue_density() {
    for map in [doubling(), tripling()] {
        let sys = Semiflow::new(map, Roof::constant(1.0), 65).unwrap().0;
        let h = invariant_density(&sys, &DensityOptions::default()).unwrap().density;
        let err = h.all_values().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "sup error {err}");
    }
}

#[test]
fn density_is_a_fixed_point_of_the_exact_operator() {
    let sys = perturbed(Roof::constant(1.0));
    let h = invariant_density(&sys, &DensityOptions::default()).unwrap().density.to_complex();
    let lh = apply_twisted(&sys, TwistParameter::zero(), 1, &h, DEFAULT_WORD_BUDGET).unwrap();
    assert!(sup_norm(&(&lh - &h)) < 1e-8);
}

#[test]
fn powers_compose() {
    let sys = perturbed(Roof::trig(1.0, 0.2, 1.0));
    let f = random_trig_probes(sys.map.cells(), 16385, 1, 3, 5).pop().unwrap();
    for z in [TwistParameter::zero(), TwistParameter::new(0.0, 5.0)] {
        let whole = apply_twisted(&sys, z, 5, &f, DEFAULT_WORD_BUDGET).unwrap();
        let inner = apply_twisted(&sys, z, 3, &f, DEFAULT_WORD_BUDGET).unwrap();
        let outer = apply_twisted(&sys, z, 2, &inner, DEFAULT_WORD_BUDGET).unwrap();
        let err = sup_norm(&(&whole - &outer));
        assert!(err < 1e-8, "z={:?}: {err}", z);
    }
}

#[test]
fn transfer_operator_preserves_mass_and_positivity() {
    let sys = perturbed(Roof::trig(1.0, 0.2, 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shift = c.iter().map(|v| v.abs()).sum::<f64>();
        // nonnegative by construction
        let f = move |_: usize, x: &Point<1>| {
            let s: f64 = (0..5).map(|k| c[k] * (2.0 * PI * (k + 1) as f64 * x[0]).cos()).sum();
            Complex64::new(shift + s, 0.0)
        };
        let before = integral(&PiecewiseField::from_fn(sys.map.cells(), 4097, |e, x| f(e, x)));
        let after = apply_twisted_observable(&sys, TwistParameter::zero(), 3, &f, 4097, DEFAULT_WORD_BUDGET).unwrap();
        assert!((integral(&after) - before).norm() < 1e-6);
        assert!(after.all_values().all(|v| v.re >= 0.0 && v.im == 0.0));
    }
}

#[test]
fn twisted_sup_norm_bound() {
    let sys = perturbed(Roof::trig(1.0, 0.2, 1.0));
    let probes = random_trig_probes(sys.map.cells(), 1025, 6, 4, 8);
    let c7 = sys.constants.c7;
    for z in [TwistParameter::zero(), TwistParameter::new(0.005, 50.0), TwistParameter::new(-0.005, -50.0)] {
        for f in &probes {
            let f_sup = sup_norm(f);
            for n in 1..=8 {
                let g = apply_twisted(&sys, z, n, f, DEFAULT_WORD_BUDGET).unwrap();
                // |e^{-z tau_n}| <= e^{-a n tau} with tau the extreme roof value on the damping side
                let tau = if z.a >= 0.0 { 0.8 } else { 1.2 };
                let bound = c7 * (-z.a * tau * n as f64).exp() * f_sup;
                assert!(sup_norm(&g) <= bound, "z={z:?} n={n}");
            }
        }
    }
}

#[test]
fn lasota_yorke_examples() {
    let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
    let cells = sys.map.cells();
    let probes = vec![
        PiecewiseField::constant(cells, 1025, Complex64::new(1.0, 0.0)),
        PiecewiseField::from_fn(cells, 1025, |_, x| Complex64::new(x[0], 0.0)),
        PiecewiseField::from_fn(cells, 1025, |_, x| Complex64::new((2.0 * PI * x[0]).sin(), 0.0)),
    ];
    let r = ly_constants(&sys, TwistParameter::zero(), 5, &probes, 0.01, DEFAULT_WORD_BUDGET).unwrap();
    assert!(r.pass() && r.theoretical_a.is_finite() && r.theoretical_b.is_finite());

    let one = &probes[..1];
    let r = ly_constants(&sys, TwistParameter::new(0.0, 30.0), 6, one, 0.01, DEFAULT_WORD_BUDGET).unwrap();
    assert!(r.pass());
    assert!(r.cells.iter().all(|c| c.contraction_term == 0.0));

    let sys = perturbed(Roof::trig(1.0, 0.1, 1.0));
    let probes = random_trig_probes(sys.map.cells(), 1025, 20, 4, 17);
    let r = ly_constants(&sys, TwistParameter::new(0.005, 50.0), 8, &probes, 0.01, DEFAULT_WORD_BUDGET).unwrap();
    assert!(r.pass(), "{} violations", r.violations);
    assert_eq!(r.adapted_violations, 0);
}

#[test]
fn unit_roof_scan_has_no_contraction() {
    let sys = Semiflow::new(doubling(), Roof::constant(1.0), 257).unwrap().0;
    let schedule = Schedule::from_constants(&sys.constants).with_overrides(&ScheduleOverrides {
        big_b: Some(0.0),
        ..Default::default()
    });
    let opts = ScanOptions {
        res: 257,
        ..Default::default()
    };
    let r = norm_decay_scan(&sys, 0.0, &[2.0 * PI], &[0, 2, 4, 6, 8], &schedule, &opts).unwrap();
    let row = &r.rows[0];
    assert!(row.no_contraction && row.zeta.unwrap() <= 1e-6);
    for c in &r.cells {
        assert!(c.ratio >= 1.0 - 1e-12);
        if c.n == 0 {
            assert!((c.ratio - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn identity_cells_have_unit_ratio() {
    let sys = perturbed(Roof::trig(1.0, 0.2, 1.0));
    let schedule = Schedule::from_constants(&sys.constants);
    let opts = ScanOptions {
        res: 513,
        ..Default::default()
    };
    let r = norm_decay_scan(&sys, 0.0, &[10.0, 40.0], &[0], &schedule, &opts).unwrap();
    assert!(r.cells.iter().all(|c| (c.ratio - 1.0).abs() < 1e-15));
}
