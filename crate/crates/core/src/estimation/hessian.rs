//! Central-difference Hessian and the standard errors it implies.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::PENALTY;
use crate::error::{Error, Result};

/// Relative finite-difference step; the absolute step never drops below it.
pub const DEFAULT_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdErrors {
    pub hessian: Vec<Vec<f64>>,
    /// Inverse of the negative Hessian, absent when it is not positive definite.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub se: Option<Vec<f64>>,
}

impl StdErrors {
    /// True when the Hessian could not be inverted.
    pub fn flagged(&self) -> bool {
        self.se.is_none()
    }
}

/// Hessian of `f` at `x` with steps `h_i = max(step, step·|x_i|)`.
pub fn hessian<F>(mut f: F, x: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x.len();
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(Error::NonFinite("objective at the Hessian centre".into()));
    }
    let h: Vec<f64> = x.iter().map(|xi| step.max(step * xi.abs())).collect();
    let mut y = x.to_vec();
    let mut eval = |y: &[f64]| -> Result<f64> {
        let v = f(y);
        if !v.is_finite() || f0 - v > 0.5 * PENALTY {
            return Err(Error::Optimizer(
                "finite-difference stencil reaches the penalty region".into(),
            ));
        }
        Ok(v)
    };

    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        y[i] = x[i] + h[i];
        let fp = eval(&y)?;
        y[i] = x[i] - h[i];
        let fm = eval(&y)?;
        y[i] = x[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                y[i] = x[i] + si * h[i];
                y[j] = x[j] + sj * h[j];
                let v = eval(&y);
                y[i] = x[i];
                y[j] = x[j];
                v
            };
            let d = corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?;
            let hij = d / (4.0 * h[i] * h[j]);
            hess[(i, j)] = hij;
            hess[(j, i)] = hij;
        }
    }
    Ok(hess)
}

/// Standard errors from the inverse negative Hessian at a maximum.
pub fn std_errors<F>(f: F, argmax: &[f64]) -> Result<StdErrors>
where
    F: FnMut(&[f64]) -> f64,
{
    std_errors_with_step(f, argmax, DEFAULT_STEP)
}

pub fn std_errors_with_step<F>(f: F, argmax: &[f64], step: f64) -> Result<StdErrors>
where
    F: FnMut(&[f64]) -> f64,
{
    let hess = hessian(f, argmax, step)?;
    let rows = |m: &DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
    let cov = (-&hess).cholesky().map(|c| c.inverse());
    let se = cov.as_ref().and_then(|c| {
        let d: Vec<f64> = c.diagonal().iter().map(|v| v.sqrt()).collect();
        d.iter().all(|s| s.is_finite()).then_some(d)
    });
    Ok(StdErrors {
        hessian: rows(&hess),
        covariance: se.as_ref().and(cov.as_ref()).map(rows),
        se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_curvature() {
        let sigma: f64 = 0.5;
        let r = std_errors(|x| -x[0] * x[0] / (2.0 * sigma * sigma), &[0.0]).unwrap();
        assert!((r.se.unwrap()[0] - 0.5).abs() < 1e-4);
    }

    #[test]
    fn mean_of_normal_sample() {
        // deterministic "sample": normal quantiles at (i − ½)/n
        let n = 400;
        let xs: Vec<f64> = (0..n)
            .map(|i| crate::special::norm_quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let ll = |p: &[f64]| -0.5 * xs.iter().map(|x| (x - p[0]).powi(2)).sum::<f64>();
        let r = std_errors(ll, &[0.0]).unwrap();
        let se = r.se.unwrap()[0];
        assert!((se - 0.05).abs() < 0.005, "{se}");
    }

    #[test]
    fn flat_direction_is_flagged() {
        let r = std_errors(|x| -x[0] * x[0], &[0.0, 1.0]).unwrap();
        assert!(r.flagged());
        assert!(r.covariance.is_none());
    }

    #[test]
    fn penalty_in_stencil_is_an_error() {
        let f = |x: &[f64]| {
            if x[0] > 0.0 {
                -x[0] * x[0] - PENALTY
            } else {
                -x[0] * x[0]
            }
        };
        assert!(std_errors(f, &[0.0]).is_err());
    }

    #[test]
    fn quadratic_hessian_is_symmetric_and_step_independent() {
        let a = [[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 0.5]];
        let c = [0.2, -1.0, 3.0];
        let f = |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&c).map(|(xi, ci)| xi - ci).collect();
            let mut q = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    q += d[i] * a[i][j] * d[j];
                }
            }
            -0.5 * q
        };
        let reference = std_errors_with_step(f, &c, 1e-5).unwrap().se.unwrap();
        for step in [1e-6, 3e-6, 1e-5, 3e-5, 1e-4] {
            let h = hessian(f, &c, step).unwrap();
            assert!((&h - h.transpose()).norm() <= 1e-6 * h.norm());
            let se = std_errors_with_step(f, &c, step).unwrap().se.unwrap();
            for (s, r) in se.iter().zip(&reference) {
                assert!(((s - r) / r).abs() < 1e-6, "step {step}: {s} vs {r}");
            }
        }
    }
}
