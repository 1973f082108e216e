//! ARMA(m,n)-EGARCH(p,q) marginal models with GED innovations.
//!
//! Mean: `y_t = a0 + Σ a_i y_{t−i} + Σ b_j ε_{t−j} + ε_t`.
//! Variance: `ln h_t = w + Σ κ_i (|μ_{t−i}| + γ_i μ_{t−i}) + Σ β_j ln h_{t−j}`
//! with `μ_t = ε_t/√h_t ~ GED(ν)`.

mod ged;

use serde::{Deserialize, Serialize};

pub use ged::{ged_cdf, ged_logpdf, ged_quantile, Ged};

use crate::diagnostics::{ks_uniform, TestResult};
use crate::error::{Error, Result};
use crate::estimation::{bic, maximize, std_errors, Budget, Estimate, PENALTY};

/// PIT values are kept this far inside (0, 1).
pub const PIT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArmaEgarchSpec {
    /// AR order.
    pub m: usize,
    /// MA order.
    pub n: usize,
    /// Number of shock (κ, γ) terms.
    pub p: usize,
    /// Number of lagged log-variance terms.
    pub q: usize,
}

impl ArmaEgarchSpec {
    pub fn new(m: usize, n: usize, p: usize, q: usize) -> Result<Self> {
        let s = ArmaEgarchSpec { m, n, p, q };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q >= 1 && self.p == 0 {
            return Err(Error::InvalidInput("EGARCH with q ≥ 1 needs p ≥ 1".into()));
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        3 + self.m + self.n + 2 * self.p + self.q
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v = vec!["a0".to_string()];
        v.extend((1..=self.m).map(|i| format!("ar{i}")));
        v.extend((1..=self.n).map(|i| format!("ma{i}")));
        v.push("w".into());
        v.extend((1..=self.p).map(|i| format!("kappa{i}")));
        v.extend((1..=self.p).map(|i| format!("gamma{i}")));
        v.extend((1..=self.q).map(|i| format!("beta{i}")));
        v.push("nu".into());
        v
    }

    /// Every order combination with all orders at most `max`.
    pub fn grid(max: usize) -> Vec<ArmaEgarchSpec> {
        let mut out = Vec::new();
        for m in 0..=max {
            for n in 0..=max {
                for p in 0..=max {
                    for q in 0..=max {
                        let s = ArmaEgarchSpec { m, n, p, q };
                        if s.validate().is_ok() {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    }
}

impl Default for ArmaEgarchSpec {
    fn default() -> Self {
        ArmaEgarchSpec { m: 0, n: 0, p: 1, q: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalParams {
    pub a0: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub w: f64,
    pub kappa: Vec<f64>,
    pub gamma_asym: Vec<f64>,
    pub beta_pers: Vec<f64>,
    pub nu: f64,
}

impl MarginalParams {
    /// Parameters with the mean at zero and a constant log-variance `w`.
    pub fn constant(spec: &ArmaEgarchSpec, w: f64, nu: f64) -> Self {
        MarginalParams {
            a0: 0.0,
            ar: vec![0.0; spec.m],
            ma: vec![0.0; spec.n],
            w,
            kappa: vec![0.0; spec.p],
            gamma_asym: vec![0.0; spec.p],
            beta_pers: vec![0.0; spec.q],
            nu,
        }
    }

    /// Packed as `[a0, ar.., ma.., w, kappa.., gamma.., beta.., nu]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = vec![self.a0];
        v.extend(&self.ar);
        v.extend(&self.ma);
        v.push(self.w);
        v.extend(&self.kappa);
        v.extend(&self.gamma_asym);
        v.extend(&self.beta_pers);
        v.push(self.nu);
        v
    }

    pub fn from_slice(spec: &ArmaEgarchSpec, x: &[f64]) -> Result<Self> {
        if x.len() != spec.n_params() {
            return Err(Error::InvalidParameter(format!(
                "spec needs {} parameters, got {}",
                spec.n_params(),
                x.len()
            )));
        }
        let mut it = x.iter().copied();
        let mut take = |k: usize| -> Vec<f64> { it.by_ref().take(k).collect() };
        let a0 = take(1)[0];
        let ar = take(spec.m);
        let ma = take(spec.n);
        let w = take(1)[0];
        let kappa = take(spec.p);
        let gamma_asym = take(spec.p);
        let beta_pers = take(spec.q);
        let nu = take(1)[0];
        Ok(MarginalParams {
            a0,
            ar,
            ma,
            w,
            kappa,
            gamma_asym,
            beta_pers,
            nu,
        })
    }

    fn persistence(&self) -> f64 {
        self.beta_pers.iter().map(|b| b.abs()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.to_vec().iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite marginal parameter".into()));
        }
        if self.nu <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "GED shape {} must be positive",
                self.nu
            )));
        }
        if self.persistence() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "sum of |beta| = {} is not below 1",
                self.persistence()
            )));
        }
        Ok(())
    }
}

/// Output of [`egarch_filter`].
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered {
    pub residuals: Vec<f64>,
    pub cond_variance: Vec<f64>,
    /// Per-observation log-likelihood contributions.
    pub loglik: Vec<f64>,
}

impl Filtered {
    pub fn std_residuals(&self) -> Vec<f64> {
        self.residuals
            .iter()
            .zip(&self.cond_variance)
            .map(|(e, h)| e / h.sqrt())
            .collect()
    }

    pub fn total_loglik(&self) -> f64 {
        self.loglik.iter().sum()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

/// ARMA residuals with pre-sample `y` at `ybar` and pre-sample `ε` at 0.
fn arma_residuals(y: &[f64], prm: &MarginalParams, ybar: f64) -> Vec<f64> {
    let mut eps = Vec::with_capacity(y.len());
    for t in 0..y.len() {
        let mut e = y[t] - prm.a0;
        for (i, a) in prm.ar.iter().enumerate() {
            e -= a * if t > i { y[t - i - 1] } else { ybar };
        }
        for (j, b) in prm.ma.iter().enumerate() {
            if t > j {
                e -= b * eps[t - j - 1];
            }
        }
        eps.push(e);
    }
    eps
}

/// Runs the recursion. `sink` receives `(ε_t, ln h_t, ℓ_t)`; returns false
/// if a non-finite variance was met.
fn run_filter(y: &[f64], prm: &MarginalParams, ybar: f64, mut sink: impl FnMut(f64, f64, f64)) -> bool {
    let eps = arma_residuals(y, prm, ybar);
    let lh0 = variance(&eps).ln();
    if !lh0.is_finite() {
        return false;
    }
    let ged = Ged::new_unchecked(prm.nu);
    let (p, q) = (prm.kappa.len(), prm.beta_pers.len());
    let mut lh_hist = vec![lh0; q.max(1)];
    let mut mu_hist = vec![0.0f64; p.max(1)];
    for &e in &eps {
        let mut lh = prm.w;
        for i in 0..p {
            let mu = mu_hist[i];
            lh += prm.kappa[i] * (mu.abs() + prm.gamma_asym[i] * mu);
        }
        for j in 0..q {
            lh += prm.beta_pers[j] * lh_hist[j];
        }
        if !lh.is_finite() || lh.abs() > 700.0 {
            return false;
        }
        let mu = e * (-0.5 * lh).exp();
        sink(e, lh, ged.ln_pdf(mu) - 0.5 * lh);
        if q > 0 {
            lh_hist.rotate_right(1);
            lh_hist[0] = lh;
        }
        if p > 0 {
            mu_hist.rotate_right(1);
            mu_hist[0] = mu;
        }
    }
    true
}

/// Filters `y` through the model; pre-sample log-variance is the log of the
/// variance of the ARMA residuals.
pub fn egarch_filter(y: &[f64], spec: &ArmaEgarchSpec, params: &MarginalParams) -> Result<Filtered> {
    spec.validate()?;
    check_shape(spec, params)?;
    params.validate()?;
    if y.is_empty() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series must be non-empty and finite".into()));
    }
    let mut out = Filtered {
        residuals: Vec::with_capacity(y.len()),
        cond_variance: Vec::with_capacity(y.len()),
        loglik: Vec::with_capacity(y.len()),
    };
    let ok = run_filter(y, params, mean(y), |e, lh, l| {
        out.residuals.push(e);
        out.cond_variance.push(lh.exp());
        out.loglik.push(l);
    });
    if !ok {
        return Err(Error::NonFinite("conditional variance".into()));
    }
    Ok(out)
}

fn check_shape(spec: &ArmaEgarchSpec, p: &MarginalParams) -> Result<()> {
    if p.ar.len() != spec.m
        || p.ma.len() != spec.n
        || p.kappa.len() != spec.p
        || p.gamma_asym.len() != spec.p
        || p.beta_pers.len() != spec.q
    {
        return Err(Error::InvalidParameter(
            "parameter lengths do not match the spec".into(),
        ));
    }
    Ok(())
}

/// Log-likelihood with the stationarity penalty, `−∞` where undefined.
fn penalised_loglik(y: &[f64], prm: &MarginalParams, ybar: f64) -> f64 {
    if !(prm.nu > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut ll = 0.0;
    if !run_filter(y, prm, ybar, |_, _, l| ll += l) || !ll.is_finite() {
        return f64::NEG_INFINITY;
    }
    if prm.persistence() >= 1.0 {
        ll - PENALTY
    } else {
        ll
    }
}

/// How PIT values are produced from standardized residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PitMode {
    /// GED CDF at the fitted shape.
    #[default]
    Parametric,
    /// `rank/(n+1)`.
    Empirical,
}

impl std::str::FromStr for PitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parametric" => Ok(PitMode::Parametric),
            "empirical" => Ok(PitMode::Empirical),
            other => Err(Error::InvalidInput(format!("unknown PIT mode `{other}`"))),
        }
    }
}

/// Probability integral transform of standardized residuals.
pub fn pit(std_residuals: &[f64], nu: f64, mode: PitMode) -> Result<Vec<f64>> {
    let u = match mode {
        PitMode::Parametric => {
            let g = Ged::new(nu)?;
            std_residuals.iter().map(|&z| g.cdf(z)).collect()
        }
        PitMode::Empirical => {
            let n = std_residuals.len();
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| std_residuals[a].total_cmp(&std_residuals[b]));
            let mut u = vec![0.0; n];
            for (rank, &i) in idx.iter().enumerate() {
                u[i] = (rank + 1) as f64 / (n + 1) as f64;
            }
            u
        }
    };
    Ok(u.into_iter().map(|x: f64| x.clamp(PIT_EPS, 1.0 - PIT_EPS)).collect())
}

/// Kolmogorov–Smirnov test of PIT values against Uniform(0, 1).
pub fn pit_uniformity_check(pit: &[f64]) -> Result<TestResult> {
    ks_uniform(pit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalFit {
    pub spec: ArmaEgarchSpec,
    pub params: MarginalParams,
    pub estimates: Vec<Estimate>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub std_residuals: Vec<f64>,
    pub cond_variance: Vec<f64>,
    pub pit: Vec<f64>,
}

/// Starting points on the standardized scale.
fn starts(spec: &ArmaEgarchSpec) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let betas: &[f64] = if spec.q > 0 { &[0.9, 0.5] } else { &[0.0] };
    for &b in betas {
        for nu in [1.5, 2.0] {
            let mut p = MarginalParams::constant(spec, 0.0, nu);
            if spec.p > 0 {
                p.kappa[0] = 0.1;
            }
            if spec.q > 0 {
                p.beta_pers[0] = b;
            }
            // E|μ| ≈ 0.8 keeps E ln h near zero for unit-variance data
            p.w = -0.8 * p.kappa.first().copied().unwrap_or(0.0);
            let mut x = p.to_vec();
            let last = x.len() - 1;
            x[last] = nu.ln();
            out.push(x);
        }
    }
    out
}

/// Maximum likelihood fit. The series is standardized internally and the
/// estimates mapped back, so the fit is equivariant to location and scale.
pub fn fit_marginal(y: &[f64], spec: &ArmaEgarchSpec, pit_mode: PitMode, budget: &Budget) -> Result<MarginalFit> {
    spec.validate()?;
    let k = spec.n_params();
    if y.len() < k + 10 {
        return Err(Error::InvalidInput(format!(
            "{} observations are too few for {k} parameters",
            y.len()
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("series contains non-finite values".into()));
    }
    let (m, s) = (mean(y), variance(y).sqrt());
    if !(s > 0.0) {
        return Err(Error::Degenerate("constant series".into()));
    }
    let z: Vec<f64> = y.iter().map(|v| (v - m) / s).collect();
    let zbar = mean(&z);

    // search coordinates carry ln ν in the last slot
    let search = |x: &[f64]| {
        let mut v = x.to_vec();
        let last = v.len() - 1;
        v[last] = v[last].exp();
        match MarginalParams::from_slice(spec, &v) {
            Ok(p) => penalised_loglik(&z, &p, zbar),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let start = starts(spec)
        .into_iter()
        .map(|x| (search(&x), x))
        .filter(|(f, _)| f.is_finite())
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, x)| x)
        .ok_or_else(|| Error::Optimizer("no finite starting point".into()))?;
    let opt = maximize(search, &start, budget)?;
    let mut theta_z = opt.argmax.clone();
    let last = theta_z.len() - 1;
    theta_z[last] = theta_z[last].exp();
    let pz = MarginalParams::from_slice(spec, &theta_z)?;

    let natural = |x: &[f64]| match MarginalParams::from_slice(spec, x) {
        Ok(p) => penalised_loglik(&z, &p, zbar),
        Err(_) => f64::NEG_INFINITY,
    };
    let se_z = std_errors(natural, &theta_z);

    // back to the original scale
    let mut py = pz.clone();
    let sum_ar: f64 = pz.ar.iter().sum();
    let sum_beta: f64 = pz.beta_pers.iter().sum();
    py.a0 = m * (1.0 - sum_ar) + s * pz.a0;
    py.w = pz.w + 2.0 * s.ln() * (1.0 - sum_beta);

    let mut jac = nalgebra::DMatrix::<f64>::identity(k, k);
    jac[(0, 0)] = s;
    for i in 0..spec.m {
        jac[(0, 1 + i)] = -m;
    }
    let w_idx = 1 + spec.m + spec.n;
    let beta0 = w_idx + 1 + 2 * spec.p;
    for j in 0..spec.q {
        jac[(w_idx, beta0 + j)] = -2.0 * s.ln();
    }

    let mut warnings = Vec::new();
    let se_y: Option<Vec<f64>> = match &se_z {
        Ok(r) => match &r.covariance {
            Some(c) => {
                let cz = nalgebra::DMatrix::from_fn(k, k, |i, j| c[i][j]);
                let cy = &jac * cz * jac.transpose();
                Some((0..k).map(|i| cy[(i, i)].sqrt()).collect())
            }
            None => {
                warnings.push("Hessian not invertible; standard errors omitted".to_string());
                None
            }
        },
        Err(e) => {
            warnings.push(format!("standard errors unavailable: {e}"));
            None
        }
    };
    if !opt.converged {
        warnings.push("optimizer stopped on its evaluation budget".into());
    }
    if py.persistence() >= 1.0 {
        warnings.push("log-variance persistence at the stationarity boundary".into());
    }

    let filtered = {
        let mut out = Filtered {
            residuals: vec![],
            cond_variance: vec![],
            loglik: vec![],
        };
        let ok = run_filter(y, &py, m, |e, lh, l| {
            out.residuals.push(e);
            out.cond_variance.push(lh.exp());
            out.loglik.push(l);
        });
        if !ok {
            return Err(Error::NonFinite("conditional variance at the estimate".into()));
        }
        out
    };
    let loglik = filtered.total_loglik();
    let std_residuals = filtered.std_residuals();
    let pit = pit(&std_residuals, py.nu, pit_mode)?;
    let estimates = spec
        .param_names()
        .into_iter()
        .zip(py.to_vec())
        .enumerate()
        .map(|(i, (name, value))| Estimate {
            name,
            value,
            std_error: se_y.as_ref().map(|s| s[i]),
        })
        .collect();

    Ok(MarginalFit {
        spec: *spec,
        params: py,
        estimates,
        loglik,
        aic: crate::estimation::aic(loglik, k),
        bic: bic(loglik, k, y.len()),
        converged: opt.converged,
        warnings,
        std_residuals,
        cond_variance: filtered.cond_variance,
        pit,
    })
}

/// Fits every spec in [`ArmaEgarchSpec::grid`] and keeps the lowest AIC.
pub fn fit_marginal_auto(y: &[f64], max_order: usize, pit_mode: PitMode, budget: &Budget) -> Result<MarginalFit> {
    let grid = ArmaEgarchSpec::grid(max_order);
    let fit_one = |s: &ArmaEgarchSpec| fit_marginal(y, s, pit_mode, budget).ok();
    #[cfg(feature = "parallel")]
    let fits: Vec<Option<MarginalFit>> = {
        use rayon::prelude::*;
        grid.par_iter().map(fit_one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let fits: Vec<Option<MarginalFit>> = grid.iter().map(fit_one).collect();
    fits.into_iter()
        .flatten()
        .min_by(|a, b| a.aic.total_cmp(&b.aic))
        .ok_or_else(|| Error::Optimizer("no marginal order could be fitted".into()))
}
