//! Samplers for every copula family and for ARMA-EGARCH-GED paths.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`; independent
//! replications use distinct seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Exp1, Gamma, Open01, StandardNormal};

use crate::copula::{clayton_h_inv, Copula};
use crate::dynamic::{EvolutionParams, ParamPath, Recursion};
use crate::error::{Error, Result};
use crate::marginal::{ArmaEgarchSpec, Ged, MarginalParams};
use crate::special::{norm_cdf, t_cdf};

pub type Seed = u64;

/// Observations discarded at the start of [`simulate_egarch`].
pub const BURN_IN: usize = 500;

pub fn rng_from_seed(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn open_unit(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Positive stable variate with Laplace transform `exp(−s^α)`, `α ∈ (0, 1]`
/// (Kanter's representation).
fn positive_stable<R: Rng>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let u = std::f64::consts::PI * uniform(rng);
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

/// `v` with `P(V ≤ v | U = u) = w`, by bisection on the conditional CDF.
fn invert_h(copula: &Copula, u: f64, w: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if copula.h(u, mid) < w {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One draw from a validated copula.
pub(crate) fn draw_pair<R: Rng>(copula: &Copula, rng: &mut R) -> (f64, f64) {
    let (u, v) = match *copula {
        Copula::Normal { rho } => {
            let z1: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * e;
            (norm_cdf(z1), norm_cdf(z2))
        }
        Copula::StudentT { rho, nu } => {
            let z1: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            let z2 = rho * z1 + (1.0 - rho * rho).sqrt() * e;
            let chi: f64 = rng.sample(ChiSquared::new(nu).expect("validated dof"));
            let s = (nu / chi).sqrt();
            (t_cdf(z1 * s, nu), t_cdf(z2 * s, nu))
        }
        Copula::Gumbel { theta } => {
            let alpha = 1.0 / theta;
            let s = positive_stable(alpha, rng);
            let e1: f64 = rng.sample(Exp1);
            let e2: f64 = rng.sample(Exp1);
            ((-(e1 / s).powf(alpha)).exp(), (-(e2 / s).powf(alpha)).exp())
        }
        Copula::Clayton { delta } if delta > 0.0 => {
            let g: f64 = rng.sample(Gamma::new(1.0 / delta, 1.0).expect("validated delta"));
            let e1: f64 = rng.sample(Exp1);
            let e2: f64 = rng.sample(Exp1);
            let f = |e: f64| (-(e / g).ln_1p() / delta).exp();
            (f(e1), f(e2))
        }
        Copula::Clayton { delta } => {
            let u = uniform(rng);
            let w = uniform(rng);
            (u, clayton_h_inv(delta, u, w))
        }
        Copula::Sjc { .. } => {
            let u = uniform(rng);
            let w = uniform(rng);
            (u, invert_h(copula, u, w))
        }
    };
    (open_unit(u), open_unit(v))
}

/// `n` pairs from a static copula.
pub fn sample_copula(copula: &Copula, n: usize, seed: Seed) -> Result<(Vec<f64>, Vec<f64>)> {
    copula.validate()?;
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    Ok((0..n).map(|_| draw_pair(copula, &mut rng)).unzip())
}

/// `n` pairs from the time-varying recursion, drawing each pair at the
/// current parameters before advancing. Returns the data and the true path.
pub fn sample_dynamic(evo: &EvolutionParams, n: usize, seed: Seed) -> Result<(Vec<f64>, Vec<f64>, ParamPath)> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut rec = Recursion::new(evo);
    let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut params = Vec::with_capacity(n);
    let mut tail = Vec::with_capacity(n);
    let mut ll = 0.0;
    for _ in 0..n {
        let c = rec.copula();
        c.validate()?;
        let (a, b) = draw_pair(&c, &mut rng);
        ll += c.ln_pdf_unchecked(a, b);
        params.push(rec.params().to_vec());
        tail.push(c.tail_dependence_unchecked());
        u.push(a);
        v.push(b);
        rec.advance(a, b);
    }
    Ok((
        u,
        v,
        ParamPath {
            family: evo.family,
            params,
            tail,
            loglik: ll,
        },
    ))
}

/// Simulates `n` observations of the ARMA-EGARCH-GED model after a burn-in
/// of [`BURN_IN`]; innovations are GED quantiles of uniforms.
pub fn simulate_egarch(spec: &ArmaEgarchSpec, params: &MarginalParams, n: usize, seed: Seed) -> Result<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let uniforms: Vec<f64> = (0..n + BURN_IN).map(|_| uniform(&mut rng)).collect();
    let mut y = egarch_path(spec, params, &uniforms)?;
    Ok(y.split_off(BURN_IN))
}

/// Runs the ARMA-EGARCH recursion forward from its unconditional levels, one
/// observation per uniform, with innovation `μ_t = F⁻¹(uniforms[t])`. Nothing
/// is discarded.
pub fn egarch_path(spec: &ArmaEgarchSpec, params: &MarginalParams, uniforms: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    params.validate()?;
    let ged = Ged::new(params.nu)?;
    let total = uniforms.len();

    let sum_ar: f64 = params.ar.iter().sum();
    let mean = if (1.0 - sum_ar).abs() > 1e-12 {
        params.a0 / (1.0 - sum_ar)
    } else {
        0.0
    };
    let sum_beta: f64 = params.beta_pers.iter().sum();
    let lh_start = params.w / (1.0 - sum_beta);

    let (m, nn, p, q) = (spec.m, spec.n, spec.p, spec.q);
    let mut y: Vec<f64> = Vec::with_capacity(total);
    let mut eps: Vec<f64> = Vec::with_capacity(total);
    let mut mu: Vec<f64> = Vec::with_capacity(total);
    let mut lh: Vec<f64> = Vec::with_capacity(total);
    for (t, &w) in uniforms.iter().enumerate() {
        let mut l = params.w;
        for i in 0..p {
            let z = if t > i { mu[t - i - 1] } else { 0.0 };
            l += params.kappa[i] * (z.abs() + params.gamma_asym[i] * z);
        }
        for j in 0..q {
            l += params.beta_pers[j] * if t > j { lh[t - j - 1] } else { lh_start };
        }
        if !l.is_finite() || l.abs() > 700.0 {
            return Err(Error::NonFinite(format!("log-variance {l} at step {t}")));
        }
        let z = ged.quantile(w);
        let e = z * (0.5 * l).exp();
        let mut yt = params.a0 + e;
        for i in 0..m {
            yt += params.ar[i] * if t > i { y[t - i - 1] } else { mean };
        }
        for j in 0..nn {
            if t > j {
                yt += params.ma[j] * eps[t - j - 1];
            }
        }
        if !yt.is_finite() {
            return Err(Error::NonFinite(format!("explosive path at step {t}")));
        }
        y.push(yt);
        eps.push(e);
        mu.push(z);
        lh.push(l);
    }
    Ok(y)
}

/// Kendall's τ_b in O(n log n) (Knight's merge-sort algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("length mismatch".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput("need at least two pairs".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("NaN in input".into()));
    }
    let pairs_of = |t: u64| t * (t - 1) / 2;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let (mut ties_x, mut ties_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for w in idx.windows(2) {
        let (a, b) = (w[0], w[1]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                ties_xy += pairs_of(run_xy);
                run_xy = 1;
            }
        } else {
            ties_x += pairs_of(run_x);
            ties_xy += pairs_of(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    ties_x += pairs_of(run_x);
    ties_xy += pairs_of(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut ties_y = 0u64;
    let mut run_y = 1u64;
    for w in ys.windows(2) {
        if w[0] == w[1] {
            run_y += 1;
        } else {
            ties_y += pairs_of(run_y);
            run_y = 1;
        }
    }
    ties_y += pairs_of(run_y);

    let n0 = pairs_of(n as u64) as f64;
    let (tx, ty) = (ties_x as f64, ties_y as f64);
    let num = n0 - tx - ty + ties_xy as f64 - 2.0 * swaps as f64;
    let den = ((n0 - tx) * (n0 - ty)).sqrt();
    if den == 0.0 {
        return Err(Error::Degenerate("a constant sample has no Kendall's tau".into()));
    }
    Ok(num / den)
}

/// Sorts ascending and returns the number of strict inversions.
fn merge_count(a: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = a.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if a[j] < a[i] {
            buf[k] = a[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = a[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&a[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&a[j..n]);
    a.copy_from_slice(&buf[..n]);
    swaps
}
