//! Normal and Student-t copulas. Arguments `x`, `y` are the marginal
//! quantiles (`Φ⁻¹(u)` or `T_ν⁻¹(u)`).

use std::f64::consts::PI;

use crate::special::{bvn_cdf, ln_gamma, norm_quantile, t_cdf, t_quantile, tanh_sinh_unit, StudentT};
use std::sync::OnceLock;

pub fn normal_cdf(rho: f64, u: f64, v: f64) -> f64 {
    bvn_cdf(norm_quantile(u), norm_quantile(v), rho)
}

pub fn normal_ln_pdf_q(rho: f64, x: f64, y: f64) -> f64 {
    let r2 = rho * rho;
    -0.5 * (1.0 - r2).ln() - (r2 * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * (1.0 - r2))
}

/// Conditional CDF `P(V ≤ v | U = u)` of the Gaussian copula.
pub fn normal_h(rho: f64, u: f64, v: f64) -> f64 {
    crate::special::norm_cdf((norm_quantile(v) - rho * norm_quantile(u)) / (1.0 - rho * rho).sqrt())
}

/// Constant part of the Student-t copula log density for a given `nu`.
#[derive(Debug, Clone, Copy)]
pub struct StudentConst {
    nu: f64,
    ln_biv: f64,
    ln_uni: f64,
    dist: StudentT,
}

impl StudentConst {
    pub fn new(nu: f64) -> Self {
        let ln_biv = ln_gamma(0.5 * (nu + 2.0)) - ln_gamma(0.5 * nu) - (nu * PI).ln();
        let ln_uni = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
        StudentConst {
            nu,
            ln_biv,
            ln_uni,
            dist: StudentT::new(nu),
        }
    }

    /// Marginal quantile `T_ν⁻¹(u)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.dist.quantile(u)
    }

    /// Log copula density as the log-ratio of the bivariate t density to the
    /// product of its univariate margins.
    pub fn ln_pdf_q(&self, rho: f64, x: f64, y: f64) -> f64 {
        let nu = self.nu;
        let one_r2 = 1.0 - rho * rho;
        let quad = (x * x - 2.0 * rho * x * y + y * y) / (nu * one_r2);
        let biv = self.ln_biv - 0.5 * one_r2.ln() - 0.5 * (nu + 2.0) * quad.ln_1p();
        let marg = 2.0 * self.ln_uni - 0.5 * (nu + 1.0) * ((x * x / nu).ln_1p() + (y * y / nu).ln_1p());
        biv - marg
    }
}

pub fn student_ln_pdf(rho: f64, nu: f64, u: f64, v: f64) -> f64 {
    let k = StudentConst::new(nu);
    k.ln_pdf_q(rho, k.quantile(u), k.quantile(v))
}

/// Conditional CDF `P(V ≤ v | U = u)` of the Student-t copula.
pub fn student_h(rho: f64, nu: f64, u: f64, v: f64) -> f64 {
    let x = t_quantile(u, nu);
    let y = t_quantile(v, nu);
    student_h_q(rho, nu, x, y)
}

fn student_h_q(rho: f64, nu: f64, x: f64, y: f64) -> f64 {
    let scale = ((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0)).sqrt();
    t_cdf((y - rho * x) / scale, nu + 1.0)
}

fn unit_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| tanh_sinh_unit(5))
}

/// Student-t copula CDF as `∫_0^u P(V ≤ v | U = w) dw`, tanh-sinh rule.
pub fn student_cdf(rho: f64, nu: f64, u: f64, v: f64) -> f64 {
    let dist = StudentT::new(nu);
    let y = dist.quantile(v);
    let total: f64 = unit_rule()
        .iter()
        .map(|&(s, w)| {
            let x = dist.quantile(u * s);
            w * student_h_q(rho, nu, x, y)
        })
        .sum();
    (u * total).clamp(0.0, u.min(v))
}

/// `λ_U = λ_L = 2·T_{ν+1}(−√((ν+1)(1−ρ)/(1+ρ)))`; valid for any `ν > 0`.
pub fn student_tail(rho: f64, nu: f64) -> f64 {
    if rho <= -1.0 {
        return 0.0;
    }
    2.0 * t_cdf(-((nu + 1.0) * (1.0 - rho) / (1.0 + rho)).sqrt(), nu + 1.0)
}
