//! (b)-norm decay scan of `L_z^n`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::operator::{OneStepKernel, TwistParameter};
use crate::error::Result;
use crate::holder::{holder_seminorm, norms::b_norm_from_parts, sup_norm, PiecewiseField};
use crate::linalg::Point;
use crate::phase_space::{Cell, Semiflow, SystemConstants};

/// Constants of the iteration schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub sigma: f64,
    pub b0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub q: f64,
    pub big_b: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleOverrides {
    pub sigma: Option<f64>,
    pub b0: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub q: Option<f64>,
    pub big_b: Option<f64>,
}

impl Schedule {
    /// `beta1 = 2 / lambda`, `beta2 = alpha / (8 Lambda)`, `q = alpha lambda / 2`,
    /// `B = 4 (beta1 + beta2)`, `sigma = 0.01`, `b0 = 10`.
    pub fn from_constants(c: &SystemConstants) -> Self {
        let beta1 = 2.0 / c.lambda;
        let beta2 = c.alpha / (8.0 * c.big_lambda);
        Self {
            sigma: 0.01,
            b0: 10.0,
            beta1,
            beta2,
            q: c.alpha * c.lambda / 2.0,
            big_b: 4.0 * (beta1 + beta2),
        }
    }

    /// Applies overrides; `B` follows overridden betas unless set itself.
    pub fn with_overrides(mut self, o: &ScheduleOverrides) -> Self {
        if let Some(v) = o.sigma {
            self.sigma = v;
        }
        if let Some(v) = o.b0 {
            self.b0 = v;
        }
        if let Some(v) = o.beta1 {
            self.beta1 = v;
        }
        if let Some(v) = o.beta2 {
            self.beta2 = v;
        }
        if let Some(v) = o.q {
            self.q = v;
        }
        self.big_b = o.big_b.unwrap_or(4.0 * (self.beta1 + self.beta2));
        self
    }

    pub fn n1(&self, b: f64) -> usize {
        (self.beta1 * b.abs().ln()).floor().max(0.0) as usize
    }

    pub fn n2(&self, b: f64) -> usize {
        (self.beta2 * b.abs().ln()).floor().max(0.0) as usize
    }

    /// `floor(B ln |b|)`, the first iterate of the fit window.
    pub fn n_min(&self, b: f64) -> usize {
        (self.big_b * b.abs().ln()).floor().max(0.0) as usize
    }
}

/// Seeded band-limited trigonometric fields
/// `sum_{|k|_inf <= K} c_k e^{2 pi i k.x}` with Gaussian `c_k / (1 + |k|^2)`.
pub fn random_trig_probes<const D: usize>(
    cells: &[Cell<D>],
    res: usize,
    count: usize,
    bandwidth: usize,
    seed: u64,
) -> Vec<PiecewiseField<Complex64, D>> {
    let k = bandwidth as i64;
    let side = (2 * k + 1) as usize;
    let modes: Vec<[i64; D]> = (0..side.pow(D as u32))
        .map(|m| {
            let mut rem = m;
            std::array::from_fn(|_| {
                let c = (rem % side) as i64 - k;
                rem /= side;
                c
            })
        })
        .collect();
    (0..count)
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let coeffs: Vec<Complex64> = modes
                .iter()
                .map(|m| {
                    let norm2: i64 = m.iter().map(|c| c * c).sum();
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) / (1.0 + norm2 as f64)
                })
                .collect();
            PiecewiseField::from_fn(cells, res, |_, x: &Point<D>| {
                modes
                    .iter()
                    .zip(&coeffs)
                    .map(|(m, c)| {
                        let phase: f64 = (0..D).map(|j| m[j] as f64 * x[j]).sum();
                        c * Complex64::new(0.0, 2.0 * std::f64::consts::PI * phase).exp()
                    })
                    .sum()
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeFamily {
    pub count: usize,
    pub bandwidth: usize,
    pub seed: u64,
}

impl Default for ProbeFamily {
    fn default() -> Self {
        Self {
            count: 32,
            bandwidth: 4,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub b: f64,
    pub n: usize,
    /// Largest `||L_z^n f||_(b) / ||f||_(b)` over the probes.
    pub ratio: f64,
    pub worst_probe: usize,
    /// `|b| >= b0` and `n >= floor(B ln |b|)`.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub b: f64,
    pub n1: usize,
    pub n2: usize,
    pub n_min: usize,
    pub window_points: usize,
    /// `-max_f slope(ln ratio_f(n))` over the fit window.
    pub zeta: Option<f64>,
    pub no_contraction: bool,
    /// Probes with `|f|_a > e^{q n} |b|^a ||f||_inf` for `n = n1 + n2`.
    pub hypothesis_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayScanResult {
    pub a: f64,
    pub schedule: Schedule,
    pub res: usize,
    pub probes: usize,
    pub cells: Vec<ScanCell>,
    pub rows: Vec<ScanRow>,
    pub min_zeta: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub res: usize,
    pub probes: ProbeFamily,
    /// `zeta` at or below this is reported as no contraction.
    pub contraction_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            res: 4097,
            probes: ProbeFamily::default(),
            contraction_tol: 1e-6,
        }
    }
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Estimates the (b)-norm contraction of `L_{a+ib}^n` for every `b` and
/// `n` by maximizing over the probe family, then refitting with the worst
/// final iterate as an extra probe.
///
/// The operator is discretized once per `b` and iterated, so `L^n` carries
/// one interpolation per step. Ratios are lower bounds for the operator
/// norm, never certificates.
pub fn norm_decay_scan<const D: usize>(
    sys: &Semiflow<D>,
    a: f64,
    b_list: &[f64],
    n_list: &[usize],
    schedule: &Schedule,
    opts: &ScanOptions,
) -> Result<DecayScanResult> {
    let alpha = sys.constants.alpha;
    let kernel = OneStepKernel::build(sys, opts.res)?;
    let cells = sys.map.cells();
    let mut probes = vec![PiecewiseField::constant(cells, opts.res, Complex64::new(1.0, 0.0))];
    probes.extend(random_trig_probes(
        cells,
        opts.res,
        opts.probes.count,
        opts.probes.bandwidth,
        opts.probes.seed,
    ));
    let mut n_sorted: Vec<usize> = n_list.to_vec();
    n_sorted.sort_unstable();
    n_sorted.dedup();
    let n_max = n_sorted.last().copied().unwrap_or(0);

    let mut all_cells = Vec::new();
    let mut rows = Vec::new();
    for &b in b_list {
        let op = kernel.discretize(TwistParameter::new(a, b));
        let n_min = schedule.n_min(b);
        let n_sched = schedule.n1(b) + schedule.n2(b);
        let bnorm = |f: &PiecewiseField<Complex64, D>| b_norm_from_parts(holder_seminorm(f, alpha), sup_norm(f), alpha, b);
        let run = |f: &PiecewiseField<Complex64, D>| -> (Vec<f64>, PiecewiseField<Complex64, D>) {
            let f0 = bnorm(f);
            let mut g = f.clone();
            let mut ratios = Vec::with_capacity(n_sorted.len());
            let mut k = 0;
            for &n in &n_sorted {
                while k < n {
                    g = op.apply(&g);
                    k += 1;
                }
                ratios.push(bnorm(&g) / f0);
            }
            (ratios, g)
        };
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(probes.len() + 1);
        let mut worst: Option<(f64, PiecewiseField<Complex64, D>)> = None;
        let mut hypothesis_violations = 0;
        for f in &probes {
            let semi = holder_seminorm(f, alpha);
            let sup = sup_norm(f);
            if semi > (schedule.q * n_sched as f64).exp() * b.abs().powf(alpha) * sup {
                hypothesis_violations += 1;
            }
            let (ratios, last) = run(f);
            let fin = ratios.last().copied().unwrap_or(1.0);
            if worst.as_ref().is_none_or(|(w, _)| fin > *w) {
                worst = Some((fin, last));
            }
            table.push(ratios);
        }
        if let Some((_, g)) = worst {
            if n_max > 0 && sup_norm(&g) > 0.0 {
                table.push(run(&g).0);
            }
        }
        for (j, &n) in n_sorted.iter().enumerate() {
            let (worst_probe, ratio) = table
                .iter()
                .enumerate()
                .map(|(p, r)| (p, r[j]))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            all_cells.push(ScanCell {
                b,
                n,
                ratio,
                worst_probe,
                certified: b.abs() >= schedule.b0 && n >= n_min,
            });
        }
        let window: Vec<usize> = (0..n_sorted.len()).filter(|&j| n_sorted[j] >= n_min).collect();
        let zeta = if window.len() >= 2 {
            let max_slope = table
                .iter()
                .filter(|r| window.iter().all(|&j| r[j] > 0.0))
                .map(|r| slope(&window.iter().map(|&j| (n_sorted[j] as f64, r[j].ln())).collect::<Vec<_>>()))
                .fold(f64::NEG_INFINITY, f64::max);
            Some(-max_slope)
        } else {
            None
        };
        rows.push(ScanRow {
            b,
            n1: schedule.n1(b),
            n2: schedule.n2(b),
            n_min,
            window_points: window.len(),
            zeta,
            no_contraction: zeta.is_some_and(|z| z <= opts.contraction_tol),
            hypothesis_violations,
        });
    }
    let min_zeta = rows.iter().filter_map(|r| r.zeta).reduce(f64::min);
    Ok(DecayScanResult {
        a,
        schedule: *schedule,
        res: opts.res,
        probes: probes.len() + 1,
        cells: all_cells,
        rows,
        min_zeta,
        notes: vec![
            "L^n is composed from n single steps on the grid, with one interpolation per step".into(),
            "ratios maximize over a finite probe family and are lower bounds for the operator norm".into(),
            "probes are not projected onto |f|_a <= e^{qn}|b|^a ||f||_inf; see hypothesis_violations".into(),
        ],
    })
}
