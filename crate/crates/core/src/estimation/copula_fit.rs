//! Static and time-varying copula fits on fixed PIT data.

use serde::{Deserialize, Serialize};

use super::{maximize, std_errors, Budget, Estimate, FitReport, Mode, StdErrors};
use crate::copula::{check_pit, static_loglik_unchecked, Copula, Family, MAX_DOF};
use crate::dynamic::{
    dynamic_loglik_unchecked, filter_dynamic, link_inverse, link_transform, EvolutionParams, ParamPath, Role,
};
use crate::error::{Error, Result};
use crate::simulation::kendall_tau;
use crate::special::{norm_quantile, StudentT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaticFit {
    pub copula: Copula,
    pub report: FitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicFit {
    pub evo: EvolutionParams,
    pub path: ParamPath,
    pub report: FitReport,
}

/// Unconstrained coordinates used by the optimiser.
fn to_natural(family: Family, z: &[f64]) -> Vec<f64> {
    match family {
        Family::Normal => vec![link_transform(Role::Correlation, z[0])],
        Family::StudentT => vec![link_transform(Role::Correlation, z[0]), link_transform(Role::Dof, z[1])],
        Family::Gumbel => vec![link_transform(Role::GumbelTheta, z[0])],
        Family::Clayton => vec![z[0].exp() - 1.0],
        Family::Sjc => vec![link_transform(Role::Tail, z[0]), link_transform(Role::Tail, z[1])],
    }
}

fn to_unconstrained(family: Family, p: &[f64]) -> Vec<f64> {
    match family {
        Family::Normal => vec![link_inverse(Role::Correlation, p[0])],
        Family::StudentT => vec![link_inverse(Role::Correlation, p[0]), link_inverse(Role::Dof, p[1])],
        Family::Gumbel => vec![link_inverse(Role::GumbelTheta, p[0])],
        Family::Clayton => vec![(1.0 + p[0]).max(1e-9).ln()],
        Family::Sjc => vec![link_inverse(Role::Tail, p[0]), link_inverse(Role::Tail, p[1])],
    }
}

/// Like `validate`, but admits the Clayton independence limit `δ = 0`.
fn admissible(c: &Copula) -> bool {
    match *c {
        Copula::Clayton { delta } => delta > -1.0 && delta.is_finite(),
        _ => c.validate().is_ok(),
    }
}

fn starts(family: Family, tau: f64) -> Vec<Vec<f64>> {
    let tau = tau.clamp(-0.9, 0.9);
    let rho = (std::f64::consts::FRAC_PI_2 * tau).sin();
    let pos = tau.max(0.02);
    match family {
        Family::Normal => vec![vec![rho]],
        Family::StudentT => vec![vec![rho, 6.0], vec![rho, 30.0]],
        Family::Gumbel => vec![vec![1.0 / (1.0 - pos)]],
        Family::Clayton => vec![vec![(2.0 * tau / (1.0 - tau)).max(-0.5).clamp(-0.5, 20.0)]],
        Family::Sjc => {
            let l = (pos * 0.8).clamp(0.02, 0.9);
            vec![vec![l, l], vec![0.1, 0.3], vec![0.3, 0.1]]
        }
    }
}

fn estimates(names: &[String], values: &[f64], se: &Result<StdErrors>) -> Vec<Estimate> {
    let se = se.as_ref().ok().and_then(|s| s.se.clone());
    names
        .iter()
        .enumerate()
        .map(|(i, name)| Estimate {
            name: name.clone(),
            value: values[i],
            std_error: se.as_ref().map(|s| s[i]),
        })
        .collect()
}

fn se_warning(se: &Result<StdErrors>) -> Option<String> {
    match se {
        Err(e) => Some(format!("standard errors unavailable: {e}")),
        Ok(s) if s.flagged() => Some("Hessian not invertible; standard errors omitted".into()),
        Ok(_) => None,
    }
}

/// Maximum likelihood fit of a static copula.
pub fn fit_static(family: Family, u: &[f64], v: &[f64], budget: &Budget) -> Result<StaticFit> {
    check_pit(u, v)?;
    if u.len() < 2 {
        return Err(Error::InvalidInput("need at least two observations".into()));
    }
    let tau = kendall_tau(u, v)?;
    let objective = |z: &[f64]| {
        let p = to_natural(family, z);
        match Copula::from_params_unchecked(family, &p) {
            Ok(c) if admissible(&c) => static_loglik_unchecked(&c, u, v),
            _ => f64::NEG_INFINITY,
        }
    };
    let start = starts(family, tau)
        .into_iter()
        .map(|p| to_unconstrained(family, &p))
        .max_by(|a, b| objective(a).total_cmp(&objective(b)))
        .expect("at least one start");
    let opt = maximize(objective, &start, budget)?;
    let params = to_natural(family, &opt.argmax);
    let copula = Copula::from_params_unchecked(family, &params)?;

    let natural = |p: &[f64]| match Copula::from_params_unchecked(family, p) {
        Ok(c) if admissible(&c) => static_loglik_unchecked(&c, u, v),
        _ => f64::NEG_INFINITY,
    };
    let se = std_errors(natural, &params);
    let names: Vec<String> = family.param_names().iter().map(|s| s.to_string()).collect();
    let mut report = FitReport::new(
        family,
        Mode::Static,
        estimates(&names, &params, &se),
        opt.value,
        u.len(),
    );
    report.converged = opt.converged;
    report.warnings.extend(se_warning(&se));
    if !opt.converged {
        report
            .warnings
            .push("optimizer stopped on its evaluation budget".into());
    }
    if let Copula::StudentT { nu, .. } = copula {
        if nu > MAX_DOF - 1.0 {
            report.warnings.push(format!(
                "degrees of freedom {nu:.1} at the cap; copula is near-Gaussian"
            ));
        }
    }
    if let Copula::Clayton { delta } = copula {
        if delta <= 0.0 {
            report
                .warnings
                .push("non-positive Clayton parameter; tail dependence reported as 0".into());
        }
    }
    Ok(StaticFit { copula, report })
}

/// Sample mean of the forcing statistic at fixed static parameters.
fn mean_forcing(copula: &Copula, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len() as f64;
    let c = |x: f64| x.clamp(crate::copula::CLAMP_EPS, 1.0 - crate::copula::CLAMP_EPS);
    match *copula {
        Copula::Normal { .. } => {
            u.iter()
                .zip(v)
                .map(|(&a, &b)| norm_quantile(c(a)) * norm_quantile(c(b)))
                .sum::<f64>()
                / n
        }
        Copula::StudentT { nu, .. } => {
            let t = StudentT::new(nu);
            u.iter()
                .zip(v)
                .map(|(&a, &b)| t.quantile(c(a)) * t.quantile(c(b)))
                .sum::<f64>()
                / n
        }
        _ => u.iter().zip(v).map(|(a, b)| (a - b).abs()).sum::<f64>() / n,
    }
}

/// Candidate starting coefficients for a dynamic fit around a static fit.
fn dynamic_starts(copula: &Copula, u: &[f64], v: &[f64]) -> Vec<Vec<f64>> {
    let family = copula.family();
    let roles = Role::for_family(family);
    // dynamic Clayton lives on δ > 0
    let params: Vec<f64> = match *copula {
        Copula::Clayton { delta } => vec![delta.max(0.05)],
        _ => copula.params(),
    };
    let fbar = mean_forcing(copula, u, v);
    let (alpha, beta) = (0.05, 0.8);
    let mut fixed_point = Vec::new();
    let mut nested = Vec::new();
    let mut literal = Vec::new();
    for (&role, &p) in roles.iter().zip(&params) {
        let l = link_inverse(role, p);
        fixed_point.extend([l - beta * p - alpha * fbar, alpha, beta]);
        nested.extend([l, 0.0, 0.0]);
        literal.extend([l, alpha, beta]);
    }
    vec![fixed_point, nested, literal]
}

/// Maximum likelihood fit of the time-varying recursion, started from the
/// best of several candidates built around `static_fit`.
pub fn fit_dynamic(static_fit: &Copula, u: &[f64], v: &[f64], budget: &Budget) -> Result<DynamicFit> {
    check_pit(u, v)?;
    let family = static_fit.family();
    let objective = |x: &[f64]| match EvolutionParams::from_slice(family, x) {
        Ok(evo) => dynamic_loglik_unchecked(&evo, u, v),
        Err(_) => f64::NEG_INFINITY,
    };
    let start = dynamic_starts(static_fit, u, v)
        .into_iter()
        .map(|s| (objective(&s), s))
        .filter(|(f, _)| f.is_finite())
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s)
        .ok_or_else(|| Error::Optimizer(format!("no finite starting point for dynamic {family}")))?;
    let opt = maximize(objective, &start, budget)?;
    let evo = EvolutionParams::from_slice(family, &opt.argmax)?;
    let path = filter_dynamic(&evo, u, v)?;

    let se = std_errors(objective, &opt.argmax);
    let names = EvolutionParams::names(family);
    let mut report = FitReport::new(
        family,
        Mode::Dynamic,
        estimates(&names, &opt.argmax, &se),
        opt.value,
        u.len(),
    );
    report.converged = opt.converged;
    report.warnings.extend(se_warning(&se));
    if !opt.converged {
        report
            .warnings
            .push("optimizer stopped on its evaluation budget".into());
    }
    Ok(DynamicFit { evo, path, report })
}
