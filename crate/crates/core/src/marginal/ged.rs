//! Unit-variance generalized error distribution with shape `nu`
//! (`nu = 2` is the standard normal, `nu = 1` the Laplace).

use crate::error::{Error, Result};
use crate::special::{gamma_inv, gamma_p, gamma_q, ln_gamma};

/// Precomputed constants for one shape value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ged {
    nu: f64,
    lambda: f64,
    ln_const: f64,
}

impl Ged {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("GED shape {nu} must be positive")));
        }
        Ok(Self::new_unchecked(nu))
    }

    pub(crate) fn new_unchecked(nu: f64) -> Self {
        let lg1 = ln_gamma(1.0 / nu);
        let ln_lambda = 0.5 * (-2.0 / nu * std::f64::consts::LN_2 + lg1 - ln_gamma(3.0 / nu));
        let ln_const = nu.ln() - ln_lambda - (1.0 + 1.0 / nu) * std::f64::consts::LN_2 - lg1;
        Ged {
            nu,
            lambda: ln_lambda.exp(),
            ln_const,
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Scale `λ` making the variance one.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn ln_pdf(&self, z: f64) -> f64 {
        self.ln_const - 0.5 * (z / self.lambda).abs().powf(self.nu)
    }

    pub fn cdf(&self, z: f64) -> f64 {
        let s = 0.5 * (z / self.lambda).abs().powf(self.nu);
        let a = 1.0 / self.nu;
        if z >= 0.0 {
            0.5 + 0.5 * gamma_p(a, s)
        } else {
            0.5 * gamma_q(a, s)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        let a = 1.0 / self.nu;
        let (s, sign) = if p >= 0.5 {
            // P(a, s) = 2p − 1, or Q(a, s) = 2(1 − p) in the far tail
            if p > 0.75 {
                (gamma_inv(a, 2.0 * (1.0 - p), true), 1.0)
            } else {
                (gamma_inv(a, 2.0 * p - 1.0, false), 1.0)
            }
        } else if p < 0.25 {
            (gamma_inv(a, 2.0 * p, true), -1.0)
        } else {
            (gamma_inv(a, 1.0 - 2.0 * p, false), -1.0)
        };
        sign * self.lambda * (2.0 * s).powf(1.0 / self.nu)
    }
}

pub fn ged_logpdf(z: f64, nu: f64) -> Result<f64> {
    Ok(Ged::new(nu)?.ln_pdf(z))
}

pub fn ged_cdf(z: f64, nu: f64) -> Result<f64> {
    Ok(Ged::new(nu)?.cdf(z))
}

pub fn ged_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("probability {p} outside (0, 1)")));
    }
    Ok(Ged::new(nu)?.quantile(p))
}
