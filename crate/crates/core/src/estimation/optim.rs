//! Nelder–Mead maximiser with seeded restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Controls for [`maximize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    /// Objective evaluations allowed per simplex run.
    pub max_evals: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Edge length of the initial simplex, scaled by `max(1, |x_i|)`.
    pub initial_step: f64,
    /// Simplex diameter (max-norm) below which a run may stop.
    pub xtol: f64,
    /// Value spread tolerance, relative to `max(1, |f|)`.
    pub ftol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_evals: 20_000,
            restarts: 5,
            seed: 0,
            initial_step: 0.1,
            xtol: 1e-8,
            ftol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub restarts_used: usize,
}

struct Run {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    evals: usize,
    converged: bool,
}

/// Maximises `objective` from `start`. Non-finite values are treated as the
/// worst possible value. Deterministic for a fixed `budget.seed`.
pub fn maximize<F>(mut objective: F, start: &[f64], budget: &Budget) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    if start.is_empty() {
        return Err(Error::InvalidInput("empty start vector".into()));
    }
    let mut neg = |x: &[f64]| {
        let f = objective(x);
        if f.is_finite() {
            -f
        } else {
            f64::INFINITY
        }
    };
    if !neg(start).is_finite() {
        return Err(Error::Optimizer("objective is not finite at the start point".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let steps: Vec<f64> = start.iter().map(|x| budget.initial_step * x.abs().max(1.0)).collect();
    let first = nelder_mead(&mut neg, start, &steps, budget);
    let (mut iterations, mut evals) = (first.iterations, first.evals);
    let mut converged = first.converged;
    let (mut best_x, mut best_f) = (first.x, first.f);
    let mut restarts_used = 0;

    for _ in 0..budget.restarts {
        restarts_used += 1;
        let jittered: Vec<f64> = steps
            .iter()
            .map(|s| s * rng.random_range(0.5..1.5) * if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let run = nelder_mead(&mut neg, &best_x, &jittered, budget);
        iterations += run.iterations;
        evals += run.evals;
        let gain = best_f - run.f;
        let improved = run.f < best_f;
        if improved {
            best_x = run.x;
            best_f = run.f;
            converged = run.converged;
        }
        if gain <= budget.ftol * best_f.abs().max(1.0) && converged {
            break;
        }
    }

    Ok(OptimResult {
        argmax: best_x,
        value: -best_f,
        iterations,
        evaluations: evals,
        converged,
        restarts_used,
    })
}

/// Minimises `f` with the dimension-adaptive coefficients of Gao and Han.
fn nelder_mead<F>(f: &mut F, x0: &[f64], steps: &[f64], budget: &Budget) -> Run
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let nf = n as f64;
    // n = 1 falls back to the standard coefficients
    let na = nf.max(2.0);
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / na);
    let rho = 0.75 - 1.0 / (2.0 * na);
    let sigma = 1.0 - 1.0 / na;

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for (i, s) in steps.iter().enumerate() {
        let mut p = x0.to_vec();
        p[i] += s;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut iterations = 0;
    let mut order: Vec<usize> = (0..=n).collect();

    let point = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };

    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let (best, second, worst) = (order[0], order[n - 1], order[n]);

        let diameter = pts
            .iter()
            .map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = vals[worst] - vals[best];
        if diameter < budget.xtol && spread <= budget.ftol * vals[best].abs().max(1.0) {
            return Run {
                x: pts[best].clone(),
                f: vals[best],
                iterations,
                evals,
                converged: true,
            };
        }
        if evals >= budget.max_evals {
            return Run {
                x: pts[best].clone(),
                f: vals[best],
                iterations,
                evals,
                converged: false,
            };
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x / nf;
            }
        }

        let xr = point(&centroid, &pts[worst], -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[best] {
            let xe = point(&centroid, &pts[worst], -alpha * gamma);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let xc = point(&centroid, &xr, rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = point(&centroid, &pts[worst], rho);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            pts[i] = point(&anchor, &pts[i], sigma);
            vals[i] = f(&pts[i]);
        }
        evals += n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = maximize(|x| -(x[0] - 3.0).powi(2), &[0.0], &Budget::default()).unwrap();
        assert!((r.argmax[0] - 3.0).abs() < 1e-6, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn two_dimensional_bowl() {
        let f = |x: &[f64]| -((x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2));
        let r = maximize(f, &[0.0, 0.0], &Budget::default()).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-6 && (r.argmax[1] + 2.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let r = maximize(f, &[-1.2, 1.0], &Budget::default()).unwrap();
        assert!(
            (r.argmax[0] - 1.0).abs() < 1e-4 && (r.argmax[1] - 1.0).abs() < 1e-4,
            "{r:?}"
        );
    }

    #[test]
    fn rosenbrock_in_four_dimensions() {
        let f = |x: &[f64]| {
            -x.windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
                .sum::<f64>()
        };
        let r = maximize(f, &[-1.2, 1.0, -1.2, 1.0], &Budget::default()).unwrap();
        for x in &r.argmax {
            assert!((x - 1.0).abs() < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn non_finite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] <= 0.0 { f64::NAN } else { x[0].ln() - x[0] };
        let r = maximize(f, &[3.0], &Budget::default()).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn start_must_be_finite() {
        assert!(maximize(|_| f64::NEG_INFINITY, &[0.0], &Budget::default()).is_err());
    }

    #[test]
    fn restarts_never_lose_ground_and_are_deterministic() {
        let f = |x: &[f64]| -((x[0] * 3.0).sin() + 0.1 * x[0] * x[0]);
        let one = Budget {
            restarts: 0,
            ..Budget::default()
        };
        let a = maximize(f, &[2.0], &one).unwrap();
        let b = maximize(f, &[2.0], &Budget::default()).unwrap();
        let c = maximize(f, &[2.0], &Budget::default()).unwrap();
        assert!(b.value >= a.value);
        assert_eq!(b, c);
    }
}
