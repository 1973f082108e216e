//! Bivariate copula families: CDF, log density, conditional CDF and tail
//! dependence.

mod archimedean;
mod elliptical;
mod sjc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::norm_quantile;

pub use archimedean::{clayton_h_inv, gumbel_h};
pub use elliptical::{student_tail, StudentConst};
pub use sjc::{joe_clayton_cdf, joe_clayton_ln_pdf, sjc_cdf as sjc_cdf_raw};

/// Arguments of the log density are clamped into `[EPS, 1 − EPS]`.
pub const CLAMP_EPS: f64 = 1e-10;
/// Upper bound on the Student-t degrees of freedom.
pub const MAX_DOF: f64 = 200.0;
pub const MIN_DOF: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Normal,
    StudentT,
    Gumbel,
    Clayton,
    Sjc,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Normal,
        Family::StudentT,
        Family::Gumbel,
        Family::Clayton,
        Family::Sjc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::StudentT => "student-t",
            Family::Gumbel => "gumbel",
            Family::Clayton => "clayton",
            Family::Sjc => "sjc",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Normal => &["rho"],
            Family::StudentT => &["rho", "nu"],
            Family::Gumbel => &["theta"],
            Family::Clayton => &["delta"],
            Family::Sjc => &["lambda_u", "lambda_l"],
        }
    }

    pub fn n_params(self) -> usize {
        self.param_names().len()
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normal" | "gaussian" => Ok(Family::Normal),
            "student-t" | "student" | "t" | "studentt" => Ok(Family::StudentT),
            "gumbel" => Ok(Family::Gumbel),
            "clayton" => Ok(Family::Clayton),
            "sjc" => Ok(Family::Sjc),
            other => Err(Error::InvalidInput(format!("unknown copula family `{other}`"))),
        }
    }
}

/// A copula family together with its static parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Copula {
    Normal {
        rho: f64,
    },
    StudentT {
        rho: f64,
        nu: f64,
    },
    /// `theta ≥ 1`; `theta = 1` is independence.
    Gumbel {
        theta: f64,
    },
    /// `delta ∈ (−1, ∞) \ {0}`.
    Clayton {
        delta: f64,
    },
    Sjc {
        lambda_u: f64,
        lambda_l: f64,
    },
}

/// Upper and lower tail-dependence coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailDep {
    pub lambda_u: f64,
    pub lambda_l: f64,
}

impl TailDep {
    pub const ZERO: TailDep = TailDep {
        lambda_u: 0.0,
        lambda_l: 0.0,
    };
}

fn clamp_unit(x: f64) -> f64 {
    if x < CLAMP_EPS || x > 1.0 - CLAMP_EPS {
        log::trace!("clamping copula argument {x}");
        x.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
    } else {
        x
    }
}

fn check_unit_open(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
        return Err(Error::InvalidInput(format!("({u}, {v}) is not inside (0,1)²")));
    }
    Ok(())
}

impl Copula {
    pub fn family(&self) -> Family {
        match self {
            Copula::Normal { .. } => Family::Normal,
            Copula::StudentT { .. } => Family::StudentT,
            Copula::Gumbel { .. } => Family::Gumbel,
            Copula::Clayton { .. } => Family::Clayton,
            Copula::Sjc { .. } => Family::Sjc,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Copula::Normal { rho } => vec![rho],
            Copula::StudentT { rho, nu } => vec![rho, nu],
            Copula::Gumbel { theta } => vec![theta],
            Copula::Clayton { delta } => vec![delta],
            Copula::Sjc { lambda_u, lambda_l } => vec![lambda_u, lambda_l],
        }
    }

    /// Builds and validates a copula from a flat parameter slice.
    pub fn from_params(family: Family, p: &[f64]) -> Result<Copula> {
        let c = Self::from_params_unchecked(family, p)?;
        c.validate()?;
        Ok(c)
    }

    pub(crate) fn from_params_unchecked(family: Family, p: &[f64]) -> Result<Copula> {
        if p.len() != family.n_params() {
            return Err(Error::InvalidParameter(format!(
                "{family} takes {} parameters, got {}",
                family.n_params(),
                p.len()
            )));
        }
        Ok(match family {
            Family::Normal => Copula::Normal { rho: p[0] },
            Family::StudentT => Copula::StudentT { rho: p[0], nu: p[1] },
            Family::Gumbel => Copula::Gumbel { theta: p[0] },
            Family::Clayton => Copula::Clayton { delta: p[0] },
            Family::Sjc => Copula::Sjc {
                lambda_u: p[0],
                lambda_l: p[1],
            },
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        match *self {
            Copula::Normal { rho } | Copula::StudentT { rho, .. } if !(rho > -1.0 && rho < 1.0) => {
                bad(format!("rho = {rho} outside (-1, 1)"))
            }
            Copula::StudentT { nu, .. } if !(nu > MIN_DOF && nu <= MAX_DOF) => {
                bad(format!("nu = {nu} outside ({MIN_DOF}, {MAX_DOF}]"))
            }
            Copula::Gumbel { theta } if !(theta >= 1.0 && theta.is_finite()) => {
                bad(format!("theta = {theta} outside [1, inf)"))
            }
            Copula::Clayton { delta } if !(delta > -1.0 && delta.is_finite() && delta != 0.0) => {
                bad(format!("delta = {delta} outside (-1, inf) \\ {{0}}"))
            }
            Copula::Sjc { lambda_u, lambda_l }
                if !(lambda_u > 0.0 && lambda_u < 1.0 && lambda_l > 0.0 && lambda_l < 1.0) =>
            {
                bad(format!("SJC tails ({lambda_u}, {lambda_l}) outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// Copula CDF on the closed unit square.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        if !((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidInput(format!("({u}, {v}) is not inside [0,1]²")));
        }
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        if u == 1.0 {
            return Ok(v);
        }
        if v == 1.0 {
            return Ok(u);
        }
        Ok(self.cdf_unchecked(u, v))
    }

    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        match *self {
            Copula::Normal { rho } => elliptical::normal_cdf(rho, u, v),
            Copula::StudentT { rho, nu } => elliptical::student_cdf(rho, nu, u, v),
            Copula::Gumbel { theta } => archimedean::gumbel_cdf(theta, u, v),
            Copula::Clayton { delta } => archimedean::clayton_cdf(delta, u, v),
            Copula::Sjc { lambda_u, lambda_l } => sjc::sjc_cdf(u, v, lambda_u, lambda_l),
        }
    }

    /// `ln c(u, v)`; `−∞` outside the support (Clayton with `δ < 0`).
    pub fn ln_pdf(&self, u: f64, v: f64) -> Result<f64> {
        self.validate()?;
        check_unit_open(u, v)?;
        let l = self.ln_pdf_unchecked(u, v);
        if l.is_nan() || l == f64::INFINITY {
            return Err(Error::NonFinite(format!("{} log density at ({u}, {v})", self.family())));
        }
        Ok(l)
    }

    pub(crate) fn ln_pdf_unchecked(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        match *self {
            Copula::Normal { rho } => elliptical::normal_ln_pdf_q(rho, norm_quantile(u), norm_quantile(v)),
            Copula::StudentT { rho, nu } => elliptical::student_ln_pdf(rho, nu, u, v),
            Copula::Gumbel { theta } => {
                if theta == 1.0 {
                    0.0
                } else {
                    archimedean::gumbel_ln_pdf(theta, u, v)
                }
            }
            Copula::Clayton { delta } => archimedean::clayton_ln_pdf(delta, u, v),
            Copula::Sjc { lambda_u, lambda_l } => sjc::sjc_ln_pdf(u, v, lambda_u, lambda_l),
        }
    }

    /// Conditional CDF `P(V ≤ v | U = u)`.
    pub fn h(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        match *self {
            Copula::Normal { rho } => elliptical::normal_h(rho, u, v),
            Copula::StudentT { rho, nu } => elliptical::student_h(rho, nu, u, v),
            Copula::Gumbel { theta } => archimedean::gumbel_h(theta, u, v),
            Copula::Clayton { delta } => archimedean::clayton_h(delta, u, v),
            Copula::Sjc { lambda_u, lambda_l } => sjc::sjc_h(u, v, lambda_u, lambda_l),
        }
    }

    pub fn tail_dependence(&self) -> Result<TailDep> {
        self.validate()?;
        Ok(self.tail_dependence_unchecked())
    }

    pub(crate) fn tail_dependence_unchecked(&self) -> TailDep {
        match *self {
            Copula::Normal { .. } => TailDep::ZERO,
            Copula::StudentT { rho, nu } => {
                let l = student_tail(rho, nu);
                TailDep {
                    lambda_u: l,
                    lambda_l: l,
                }
            }
            Copula::Gumbel { theta } => TailDep {
                lambda_u: 2.0 - 2f64.powf(1.0 / theta),
                lambda_l: 0.0,
            },
            Copula::Clayton { delta } => TailDep {
                lambda_u: 0.0,
                lambda_l: if delta > 0.0 { 2f64.powf(-1.0 / delta) } else { 0.0 },
            },
            Copula::Sjc { lambda_u, lambda_l } => TailDep { lambda_u, lambda_l },
        }
    }

    /// Closed-form Kendall's τ where one exists (not for SJC).
    pub fn kendall_tau(&self) -> Option<f64> {
        match *self {
            Copula::Normal { rho } | Copula::StudentT { rho, .. } => Some(2.0 / std::f64::consts::PI * rho.asin()),
            Copula::Gumbel { theta } => Some(1.0 - 1.0 / theta),
            Copula::Clayton { delta } => Some(delta / (delta + 2.0)),
            Copula::Sjc { .. } => None,
        }
    }
}

/// Copula CDF, validated.
pub fn copula_cdf(copula: &Copula, u: f64, v: f64) -> Result<f64> {
    copula.cdf(u, v)
}

/// Copula log density, validated.
pub fn copula_logpdf(copula: &Copula, u: f64, v: f64) -> Result<f64> {
    copula.ln_pdf(u, v)
}

pub fn tail_dependence(copula: &Copula) -> Result<TailDep> {
    copula.tail_dependence()
}

/// Joe–Clayton CDF with tail parameters in (0, 1).
pub fn jc_cdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> Result<f64> {
    check_tails(lambda_u, lambda_l)?;
    check_unit_open(u, v)?;
    Ok(joe_clayton_cdf(u, v, lambda_u, lambda_l))
}

/// Symmetrised Joe–Clayton CDF with tail parameters in (0, 1).
pub fn sjc_cdf(u: f64, v: f64, lambda_u: f64, lambda_l: f64) -> Result<f64> {
    check_tails(lambda_u, lambda_l)?;
    check_unit_open(u, v)?;
    Ok(sjc::sjc_cdf(u, v, lambda_u, lambda_l))
}

fn check_tails(lambda_u: f64, lambda_l: f64) -> Result<()> {
    Copula::Sjc { lambda_u, lambda_l }.validate()
}

pub(crate) fn check_pit(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput(format!(
            "length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if let Some(x) = u.iter().chain(v).find(|x| !(**x >= 0.0 && **x <= 1.0)) {
        return Err(Error::InvalidInput(format!("PIT value {x} outside [0,1]")));
    }
    Ok(())
}

/// `Σ_t ln c(u_t, v_t)`.
pub fn static_loglik(copula: &Copula, u: &[f64], v: &[f64]) -> Result<f64> {
    copula.validate()?;
    check_pit(u, v)?;
    let ll = static_loglik_unchecked(copula, u, v);
    if ll.is_nan() || ll == f64::INFINITY {
        return Err(Error::NonFinite(format!("{} log-likelihood", copula.family())));
    }
    Ok(ll)
}

pub(crate) fn static_loglik_unchecked(copula: &Copula, u: &[f64], v: &[f64]) -> f64 {
    match *copula {
        Copula::StudentT { rho, nu } => {
            let k = StudentConst::new(nu);
            u.iter()
                .zip(v)
                .map(|(&a, &b)| k.ln_pdf_q(rho, k.quantile(clamp_unit(a)), k.quantile(clamp_unit(b))))
                .sum()
        }
        _ => u.iter().zip(v).map(|(&a, &b)| copula.ln_pdf_unchecked(a, b)).sum(),
    }
}
