//! Observation-driven time-varying copula parameters:
//! `param_t = Λ(ω + β·param_{t−1} + α·F_t)` where `F_t` averages a forcing
//! statistic over the previous (at most ten) observations.

use serde::{Deserialize, Serialize};

use crate::copula::{check_pit, Copula, Family, TailDep, MAX_DOF, MIN_DOF};
use crate::error::{Error, Result};
use crate::special::{norm_quantile, StudentT};

/// Number of lags in the forcing average.
pub const WINDOW: usize = 10;

const TINY: f64 = 1e-12;

/// What a time-varying parameter means, which fixes its link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Correlation,
    Dof,
    GumbelTheta,
    ClaytonDelta,
    Tail,
}

impl Role {
    pub fn for_family(family: Family) -> &'static [Role] {
        match family {
            Family::Normal => &[Role::Correlation],
            Family::StudentT => &[Role::Correlation, Role::Dof],
            Family::Gumbel => &[Role::GumbelTheta],
            Family::Clayton => &[Role::ClaytonDelta],
            Family::Sjc => &[Role::Tail, Role::Tail],
        }
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

fn softplus_inv(y: f64) -> f64 {
    if y > 30.0 {
        y + (-(-y).exp()).ln_1p()
    } else {
        y.exp_m1().ln()
    }
}

/// Maps an unconstrained state into the parameter range of `role`. Results
/// are kept a hair inside open bounds so that saturation never produces an
/// invalid copula.
pub fn link_transform(role: Role, x: f64) -> f64 {
    match role {
        Role::Correlation => {
            // (1 − e^{−x})/(1 + e^{−x}) written as tanh(x/2)
            (0.5 * x).tanh().clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON)
        }
        Role::Dof => (MIN_DOF + (MAX_DOF - MIN_DOF) * logistic(x)).max(MIN_DOF + TINY),
        Role::GumbelTheta => 1.0 + softplus(x),
        Role::ClaytonDelta => softplus(x).max(TINY),
        Role::Tail => logistic(x).clamp(TINY, 1.0 - TINY),
    }
}

/// Inverse of [`link_transform`]; values outside the range are pulled just
/// inside it first.
pub fn link_inverse(role: Role, y: f64) -> f64 {
    match role {
        Role::Correlation => {
            let r = y.clamp(-1.0 + 1e-9, 1.0 - 1e-9);
            ((1.0 + r) / (1.0 - r)).ln()
        }
        Role::Dof => {
            let p = ((y - MIN_DOF) / (MAX_DOF - MIN_DOF)).clamp(1e-9, 1.0 - 1e-9);
            (p / (1.0 - p)).ln()
        }
        Role::GumbelTheta => softplus_inv((y - 1.0).max(1e-9)),
        Role::ClaytonDelta => softplus_inv(y.max(1e-9)),
        Role::Tail => {
            let p = y.clamp(1e-9, 1.0 - 1e-9);
            (p / (1.0 - p)).ln()
        }
    }
}

/// Coefficients of one evolving parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub family: Family,
    /// One triple per entry of [`Role::for_family`].
    pub triples: Vec<Triple>,
}

impl EvolutionParams {
    /// From `[ω₁, α₁, β₁, ω₂, α₂, β₂]` (the second triple only for two-parameter families).
    pub fn from_slice(family: Family, x: &[f64]) -> Result<Self> {
        let k = Role::for_family(family).len();
        if x.len() != 3 * k {
            return Err(Error::InvalidParameter(format!(
                "dynamic {family} takes {} coefficients, got {}",
                3 * k,
                x.len()
            )));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coefficient {bad}")));
        }
        let triples = x
            .chunks(3)
            .map(|c| Triple {
                omega: c[0],
                alpha: c[1],
                beta: c[2],
            })
            .collect();
        Ok(EvolutionParams { family, triples })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.triples.iter().flat_map(|t| [t.omega, t.alpha, t.beta]).collect()
    }

    pub fn names(family: Family) -> Vec<String> {
        let params = family.param_names();
        params
            .iter()
            .flat_map(|p| ["omega", "alpha", "beta"].map(|c| format!("{c}_{p}")))
            .collect()
    }

    /// `Λ(ω/(1−β))` when `|β| < 1`, otherwise `Λ(ω)`.
    pub fn initial_params(&self) -> Vec<f64> {
        Role::for_family(self.family)
            .iter()
            .zip(&self.triples)
            .map(|(&role, t)| {
                let x = if t.beta.abs() < 1.0 {
                    t.omega / (1.0 - t.beta)
                } else {
                    t.omega
                };
                link_transform(role, x)
            })
            .collect()
    }
}

/// Per-observation forcing statistic for the families whose forcing does not
/// depend on the current parameters.
fn pair_forcing(family: Family, u: f64, v: f64) -> f64 {
    match family {
        Family::Normal => norm_quantile(clamp(u)) * norm_quantile(clamp(v)),
        _ => (u - v).abs(),
    }
}

fn clamp(x: f64) -> f64 {
    x.clamp(crate::copula::CLAMP_EPS, 1.0 - crate::copula::CLAMP_EPS)
}

/// Forcing at 1-based time `t`: the mean over the `min(10, t−1)` previous
/// observations, 0 when `t = 1`. `dof` is the Student-t degrees of freedom
/// used for the quantile products and is ignored by other families.
pub fn forcing_term(family: Family, u: &[f64], v: &[f64], t: usize, dof: f64) -> Result<f64> {
    check_pit(u, v)?;
    if t == 0 || t > u.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "time index {t} out of range 1..={}",
            u.len() + 1
        )));
    }
    let hi = t - 1;
    let lo = hi.saturating_sub(WINDOW);
    if hi == lo {
        return Ok(0.0);
    }
    let dist = StudentT::new(dof);
    let sum: f64 = (lo..hi)
        .map(|j| match family {
            Family::StudentT => dist.quantile(clamp(u[j])) * dist.quantile(clamp(v[j])),
            _ => pair_forcing(family, u[j], v[j]),
        })
        .sum();
    Ok(sum / (hi - lo) as f64)
}

/// Recursion state shared by the filter and the sampler.
#[derive(Debug, Clone)]
pub(crate) struct Recursion {
    family: Family,
    evo: Vec<Triple>,
    roles: &'static [Role],
    params: Vec<f64>,
    /// Last observations, oldest first.
    hist: Vec<(f64, f64)>,
    /// Cached pair forcing for the parameter-free families.
    hist_f: Vec<f64>,
}

impl Recursion {
    pub(crate) fn new(evo: &EvolutionParams) -> Self {
        Recursion {
            family: evo.family,
            evo: evo.triples.clone(),
            roles: Role::for_family(evo.family),
            params: evo.initial_params(),
            hist: Vec::with_capacity(WINDOW),
            hist_f: Vec::with_capacity(WINDOW),
        }
    }

    pub(crate) fn params(&self) -> &[f64] {
        &self.params
    }

    pub(crate) fn copula(&self) -> Copula {
        let p = &self.params;
        match self.family {
            Family::Normal => Copula::Normal { rho: p[0] },
            Family::StudentT => Copula::StudentT { rho: p[0], nu: p[1] },
            Family::Gumbel => Copula::Gumbel { theta: p[0] },
            Family::Clayton => Copula::Clayton { delta: p[0] },
            Family::Sjc => Copula::Sjc {
                lambda_u: p[0],
                lambda_l: p[1],
            },
        }
    }

    /// Records `(u, v)` and moves the parameters one step forward.
    pub(crate) fn advance(&mut self, u: f64, v: f64) {
        if self.hist.len() == WINDOW {
            self.hist.remove(0);
            self.hist_f.remove(0);
        }
        self.hist.push((u, v));
        self.hist_f.push(match self.family {
            Family::StudentT => 0.0,
            f => pair_forcing(f, u, v),
        });
        let forcing = match self.family {
            Family::StudentT => {
                let dist = StudentT::new(self.params[1]);
                self.hist
                    .iter()
                    .map(|&(a, b)| dist.quantile(clamp(a)) * dist.quantile(clamp(b)))
                    .sum::<f64>()
                    / self.hist.len() as f64
            }
            _ => self.hist_f.iter().sum::<f64>() / self.hist_f.len() as f64,
        };
        for ((p, t), &role) in self.params.iter_mut().zip(&self.evo).zip(self.roles) {
            let x = t.omega + t.beta * *p + t.alpha * forcing;
            *p = link_transform(role, x);
        }
    }
}

/// Filtered parameter path with its tail dependence and log-likelihood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPath {
    pub family: Family,
    /// `params[t]` holds the family's parameters at time `t`.
    pub params: Vec<Vec<f64>>,
    pub tail: Vec<TailDep>,
    pub loglik: f64,
}

impl ParamPath {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Constant path for a static fit.
    pub fn constant(copula: &Copula, n: usize, loglik: f64) -> Self {
        let td = copula.tail_dependence_unchecked();
        ParamPath {
            family: copula.family(),
            params: vec![copula.params(); n],
            tail: vec![td; n],
            loglik,
        }
    }
}

/// Runs the recursion over the data, accumulating the copula log density at
/// each step's parameters.
pub fn filter_dynamic(evo: &EvolutionParams, u: &[f64], v: &[f64]) -> Result<ParamPath> {
    check_pit(u, v)?;
    let path = filter_unchecked(evo, u, v, true);
    if path.loglik.is_nan() || path.loglik == f64::INFINITY {
        return Err(Error::NonFinite(format!("dynamic {} log-likelihood", evo.family)));
    }
    Ok(path)
}

pub fn dynamic_loglik(evo: &EvolutionParams, u: &[f64], v: &[f64]) -> Result<f64> {
    filter_dynamic(evo, u, v).map(|p| p.loglik)
}

/// Log-likelihood only, no validation; used inside the optimiser.
pub(crate) fn dynamic_loglik_unchecked(evo: &EvolutionParams, u: &[f64], v: &[f64]) -> f64 {
    filter_unchecked(evo, u, v, false).loglik
}

fn filter_unchecked(evo: &EvolutionParams, u: &[f64], v: &[f64], keep: bool) -> ParamPath {
    let mut rec = Recursion::new(evo);
    let n = u.len();
    let (mut params, mut tail) = if keep {
        (Vec::with_capacity(n), Vec::with_capacity(n))
    } else {
        (Vec::new(), Vec::new())
    };
    let mut ll = 0.0;
    for (&a, &b) in u.iter().zip(v) {
        let c = rec.copula();
        ll += c.ln_pdf_unchecked(a, b);
        if keep {
            params.push(rec.params().to_vec());
            tail.push(c.tail_dependence_unchecked());
        }
        rec.advance(a, b);
    }
    ParamPath {
        family: evo.family,
        params,
        tail,
        loglik: ll,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::static_loglik;
    use crate::special::{norm_cdf, t_quantile};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ROLES: [Role; 5] = [
        Role::Correlation,
        Role::Dof,
        Role::GumbelTheta,
        Role::ClaytonDelta,
        Role::Tail,
    ];

    fn uniforms(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).unzip()
    }

    #[test]
    fn link_examples() {
        assert_eq!(link_transform(Role::Correlation, 0.0), 0.0);
        assert_eq!(link_transform(Role::Tail, 0.0), 0.5);
        let d = link_transform(Role::Dof, 40.0);
        assert!(d <= 200.0 && 200.0 - d < 1e-10);
        assert!((link_transform(Role::GumbelTheta, 0.0) - (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((link_transform(Role::ClaytonDelta, 0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn links_strictly_increasing_and_in_range() {
        for role in ROLES {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..1000 {
                let x = -20.0 + 40.0 * i as f64 / 999.0;
                let y = link_transform(role, x);
                assert!(y > prev, "{role:?} at {x}");
                prev = y;
                let ok = match role {
                    Role::Correlation => y > -1.0 && y < 1.0,
                    Role::Dof => y > 2.0 && y <= 200.0,
                    Role::GumbelTheta => y > 1.0,
                    Role::ClaytonDelta => y > 0.0,
                    Role::Tail => y > 0.0 && y < 1.0,
                };
                assert!(ok, "{role:?}({x}) = {y}");
            }
        }
    }

    proptest! {
        #[test]
        fn link_inverse_round_trip(x in -15.0f64..15.0) {
            for role in ROLES {
                let back = link_inverse(role, link_transform(role, x));
                prop_assert!((back - x).abs() < 1e-6 * (1.0 + x.abs()), "{:?}: {} vs {}", role, back, x);
            }
        }
    }

    #[test]
    fn forcing_examples() {
        let half = vec![0.5; 12];
        assert_eq!(forcing_term(Family::Gumbel, &half, &half, 11, 0.0).unwrap(), 0.0);

        let p = norm_cdf(1.0);
        let u = vec![p; 10];
        let f = forcing_term(Family::Normal, &u, &u, 11, 0.0).unwrap();
        assert!((f - 1.0).abs() < 1e-12);

        let u = [0.1, 0.7, 0.4];
        let v = [0.6, 0.2, 0.9];
        let f = forcing_term(Family::Clayton, &u, &v, 3, 0.0).unwrap();
        assert!((f - 0.5).abs() < 1e-15);
        assert_eq!(forcing_term(Family::Clayton, &u, &v, 1, 0.0).unwrap(), 0.0);

        let f = forcing_term(Family::StudentT, &u, &v, 3, 5.0).unwrap();
        let hand = (t_quantile(0.1, 5.0) * t_quantile(0.6, 5.0) + t_quantile(0.7, 5.0) * t_quantile(0.2, 5.0)) / 2.0;
        assert!((f - hand).abs() < 1e-14);
    }

    #[test]
    fn forcing_uses_at_most_ten_lags() {
        let (u, v) = uniforms(30, 1);
        let f = forcing_term(Family::Sjc, &u, &v, 25, 0.0).unwrap();
        let hand: f64 = (14..24).map(|j| (u[j] - v[j]).abs()).sum::<f64>() / 10.0;
        assert!((f - hand).abs() < 1e-15);
    }

    #[test]
    fn gumbel_hand_unrolled() {
        let u = [0.2, 0.9, 0.4, 0.55, 0.3, 0.8, 0.1, 0.6, 0.75, 0.35, 0.5, 0.95, 0.05];
        let v = [0.3, 0.7, 0.45, 0.5, 0.1, 0.85, 0.2, 0.65, 0.6, 0.4, 0.55, 0.9, 0.15];
        let (w, a, b) = (0.3, -1.2, 0.4);
        let evo = EvolutionParams::from_slice(Family::Gumbel, &[w, a, b]).unwrap();
        let path = filter_dynamic(&evo, &u, &v).unwrap();
        let sp = |x: f64| (1.0 + x.exp()).ln();
        let t0 = 1.0 + sp(w / (1.0 - b));
        let t1 = 1.0 + sp(w + b * t0 + a * (0.2f64 - 0.3).abs());
        let t2 = 1.0 + sp(w + b * t1 + a * ((0.1 + 0.2) / 2.0));
        let t3 = 1.0 + sp(w + b * t2 + a * ((0.1 + 0.2 + 0.05) / 3.0));
        for (got, want) in path.params.iter().zip([t0, t1, t2, t3]) {
            assert!((got[0] - want).abs() < 1e-10, "{} vs {}", got[0], want);
        }
        let ll: f64 = (0..4)
            .map(|t| {
                Copula::Gumbel {
                    theta: [t0, t1, t2, t3][t],
                }
                .ln_pdf(u[t], v[t])
                .unwrap()
            })
            .sum();
        let ll_path: f64 = (0..4)
            .map(|t| {
                Copula::Gumbel {
                    theta: path.params[t][0],
                }
                .ln_pdf(u[t], v[t])
                .unwrap()
            })
            .sum();
        assert!((ll - ll_path).abs() < 1e-10);
    }

    #[test]
    fn collapse_to_static_for_every_family() {
        let (u, v) = uniforms(500, 7);
        let omegas: [&[f64]; 5] = [&[0.6], &[0.4, 1.0], &[0.5], &[0.7], &[-0.3, 0.2]];
        for (fam, om) in Family::ALL.into_iter().zip(omegas) {
            let coeffs: Vec<f64> = om.iter().flat_map(|&w| [w, 0.0, 0.0]).collect();
            let evo = EvolutionParams::from_slice(fam, &coeffs).unwrap();
            let roles = Role::for_family(fam);
            let params: Vec<f64> = roles
                .iter()
                .zip(om.iter())
                .map(|(&r, &w)| link_transform(r, w))
                .collect();
            let c = Copula::from_params(fam, &params).unwrap();
            let stat = static_loglik(&c, &u, &v).unwrap();
            let dyn_ll = dynamic_loglik(&evo, &u, &v).unwrap();
            assert!((stat - dyn_ll).abs() < 1e-10, "{fam}: {stat} vs {dyn_ll}");
            let path = filter_dynamic(&evo, &u, &v).unwrap();
            assert!(path.params.iter().all(|p| p == &params));
        }
    }

    #[test]
    fn finite_on_coefficient_grid() {
        let (u, v) = uniforms(500, 3);
        let g = [-2.0, 0.0, 2.0];
        for fam in Family::ALL {
            for &w in &g {
                for &a in &g {
                    for &b in &g {
                        let coeffs: Vec<f64> = (0..Role::for_family(fam).len()).flat_map(|_| [w, a, b]).collect();
                        let evo = EvolutionParams::from_slice(fam, &coeffs).unwrap();
                        let path = filter_dynamic(&evo, &u, &v).unwrap();
                        assert!(path.loglik.is_finite(), "{fam} ({w},{a},{b})");
                        for p in &path.params {
                            Copula::from_params(fam, p).unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sjc_tails_evolve_independently() {
        let (u, v) = uniforms(200, 11);
        let a = EvolutionParams::from_slice(Family::Sjc, &[-0.5, 1.0, 0.3, 0.2, -2.0, 0.5]).unwrap();
        let b = EvolutionParams::from_slice(Family::Sjc, &[0.9, 1.0, 0.3, 0.2, -2.0, 0.5]).unwrap();
        let pa = filter_dynamic(&a, &u, &v).unwrap();
        let pb = filter_dynamic(&b, &u, &v).unwrap();
        for (x, y) in pa.params.iter().zip(&pb.params) {
            assert_eq!(x[1].to_bits(), y[1].to_bits());
        }
        assert!(pa.params.iter().zip(&pb.params).any(|(x, y)| x[0] != y[0]));
    }

    #[test]
    fn filter_is_deterministic() {
        let (u, v) = uniforms(300, 5);
        let evo = EvolutionParams::from_slice(Family::StudentT, &[0.3, 0.2, 0.5, 0.5, -0.3, 0.01]).unwrap();
        let a = filter_dynamic(&evo, &u, &v).unwrap();
        let b = filter_dynamic(&evo, &u, &v).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 300);
    }

    #[test]
    fn wrong_coefficient_count_is_rejected() {
        assert!(EvolutionParams::from_slice(Family::Sjc, &[0.0; 3]).is_err());
        assert!(EvolutionParams::from_slice(Family::Normal, &[f64::NAN, 0.0, 0.0]).is_err());
    }
}
