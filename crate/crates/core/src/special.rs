//! Scalar distribution functions shared by the marginal, copula and
//! diagnostic layers.
//!
//! Incomplete gamma comes from `statrs` and the error function from
//! `libm`; the incomplete beta, the Student-t quantile, the bivariate normal CDF and the quadrature rules
//! are implemented here.

use std::f64::consts::{PI, SQRT_2};
use std::sync::OnceLock;

use statrs::function::gamma;

pub use statrs::function::gamma::ln_gamma;

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Standard normal quantile.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let x = -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p);
    // one Halley step on Φ(x) − p restores full double precision
    let e = if x < 0.0 {
        norm_cdf(x) - p
    } else {
        (1.0 - p) - norm_cdf(-x)
    };
    let t = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - t / (1.0 + 0.5 * x * t)
}

/// Log density of the Student-t distribution with `nu` degrees of freedom.
pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    StudentT::new(nu).ln_pdf(x)
}

/// Regularized incomplete beta `I_x(a, b)` by the modified Lentz continued
/// fraction, switching to `1 − I_{1−x}(b, a)` past the mode.
pub fn beta_reg(a: f64, b: f64, x: f64) -> f64 {
    beta_reg_ln(a, b, x, ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// [`beta_reg`] with `ln B(a, b)` supplied.
fn beta_reg_ln(a: f64, b: f64, x: f64, ln_beta: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta;
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let guard = |v: f64| if v.abs() < TINY { TINY } else { v };
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Student-t CDF.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    StudentT::new(nu).cdf(x)
}

/// Hill's approximation to the upper quantile `t` with two-sided tail
/// probability `p2 = P(|T| > t)` (ACM Algorithm 396), accurate to about six
/// digits for any real `nu ≥ 1`.
fn hill_start(p2: f64, nu: f64) -> f64 {
    let half_pi = 0.5 * PI;
    if nu == 2.0 {
        return (2.0 / (p2 * (2.0 - p2)) - 2.0).sqrt();
    }
    if nu == 1.0 {
        return (p2 * half_pi).cos() / (p2 * half_pi).sin();
    }
    let a = 1.0 / (nu - 0.5);
    let b = 48.0 / (a * a);
    let mut c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
    let d = ((94.5 / (b + c) - 3.0) / b + 1.0) * (a * half_pi).sqrt() * nu;
    let x = d * p2;
    let mut y = x.powf(2.0 / nu);
    if y > 0.05 + a {
        let x = norm_quantile(0.5 * p2);
        y = x * x;
        if nu < 5.0 {
            c += 0.3 * (nu - 4.5) * (x + 0.6);
        }
        c += (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b;
        y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
        y = a * y * y;
        y = if y > 0.002 { y.exp_m1() } else { 0.5 * y * y + y };
    } else {
        y = ((1.0 / (((nu + 6.0) / (nu * y) - 0.089 * d - 0.822) * (nu + 2.0) * 3.0) + 0.5 / (nu + 4.0)) * y - 1.0)
            * (nu + 1.0)
            / (nu + 2.0)
            + 1.0 / y;
    }
    (nu * y).sqrt()
}

/// Student-t quantile by safeguarded Halley iteration on [`t_cdf`]
/// (relative tolerance about 1e-13).
pub fn t_quantile(p: f64, nu: f64) -> f64 {
    StudentT::new(nu).quantile(p)
}

/// Student-t distribution with its `nu`-dependent constants computed once,
/// for repeated evaluation at a fixed `nu`.
#[derive(Debug, Clone, Copy)]
pub struct StudentT {
    nu: f64,
    /// `ln B(ν/2, 1/2)`
    ln_beta: f64,
    /// log density at 0
    ln_norm: f64,
}

impl StudentT {
    pub fn new(nu: f64) -> Self {
        let (g_half, g_up) = (ln_gamma(0.5 * nu), ln_gamma(0.5 * (nu + 1.0)));
        let ln_beta = g_half + 0.5 * PI.ln() - g_up;
        StudentT {
            nu,
            ln_beta,
            ln_norm: g_up - g_half - 0.5 * (nu * PI).ln(),
        }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_norm - 0.5 * (self.nu + 1.0) * (x * x / self.nu).ln_1p()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let nu = self.nu;
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_infinite() {
            return if x > 0.0 { 1.0 } else { 0.0 };
        }
        let x2 = x * x;
        let z = nu / (nu + x2);
        // the tail form I_z(ν/2, 1/2) avoids cancellation wherever its continued
        // fraction converges directly; nearer the centre use the complement
        if z >= (0.5 * nu + 1.0) / (0.5 * nu + 2.5) {
            let half = 0.5 * beta_reg_ln(0.5, 0.5 * nu, x2 / (nu + x2), self.ln_beta);
            if x >= 0.0 {
                0.5 + half
            } else {
                0.5 - half
            }
        } else {
            let tail = 0.5 * beta_reg_ln(0.5 * nu, 0.5, z, self.ln_beta);
            if x >= 0.0 {
                1.0 - tail
            } else {
                tail
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let nu = self.nu;
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if p >= 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        if p > 0.5 {
            return -self.quantile(1.0 - p);
        }
        // lower half: solution is negative
        let mut x = -hill_start(2.0 * p, nu);
        if !x.is_finite() || x >= 0.0 {
            x = norm_quantile(p);
        }
        let (mut lo, mut hi) = (f64::NEG_INFINITY, 0.0_f64);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f == 0.0 {
                return x;
            }
            if f > 0.0 {
                hi = hi.min(x);
            } else {
                lo = lo.max(x);
            }
            let x2 = x * x;
            let t = f / self.ln_pdf(x).exp();
            // f''/f' = −(ν+1)x/(ν+x²)
            let mut next = x - t / (1.0 + 0.5 * t * (nu + 1.0) * x / (nu + x2));
            let halley = next > lo && next < hi && next.is_finite();
            if !halley {
                next = if lo.is_finite() {
                    0.5 * (lo + hi)
                } else {
                    // expand downward until the bracket closes
                    2.0 * hi.min(x) - 1.0
                };
            }
            let step = (next - x).abs();
            // after a Halley step of relative size s the error is O(s³)
            if step <= 1e-13 * (1.0 + x.abs()) || (halley && step <= 2e-5 * (1.0 + x.abs())) {
                return next;
            }
            x = next;
        }
        x
    }
}

/// Upper tail of the chi-square distribution, `P(X > x)` with `df` degrees
/// of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma::gamma_ur(0.5 * df, 0.5 * x).clamp(0.0, 1.0)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    gamma::gamma_lr(a, x)
}

/// Regularized upper incomplete gamma `Q(a, x) = 1 − P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma::gamma_ur(a, x)
}

/// Solves `P(a, x) = p` (or `Q(a, x) = p` when `upper`) for `x ≥ 0` by Newton
/// steps kept inside a shrinking bracket.
pub fn gamma_inv(a: f64, p: f64, upper: bool) -> f64 {
    if p <= 0.0 {
        return if upper { f64::INFINITY } else { 0.0 };
    }
    if p >= 1.0 {
        return if upper { 0.0 } else { f64::INFINITY };
    }
    // g is increasing in x in both cases
    let g = |x: f64| if upper { p - gamma_q(a, x) } else { gamma_p(a, x) - p };
    let ln_norm = ln_gamma(a);
    let dens = |x: f64| ((a - 1.0) * x.ln() - x - ln_norm).exp();

    // small lower tail: P ≈ x^a / Γ(a+1)
    let lower_p = if upper { 1.0 - p } else { p };
    let mut x = if lower_p < 0.05 {
        ((lower_p.ln() + ln_gamma(a + 1.0)) / a).exp()
    } else {
        a.max(0.5)
    };
    if !(x > 0.0 && x.is_finite()) {
        x = f64::MIN_POSITIVE;
    }
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..400 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = dens(x);
        let mut next = x - gx / d;
        if !(next > lo && next < hi) {
            next = if hi.is_infinite() {
                2.0 * x
            } else if lo == 0.0 {
                0.125 * hi
            } else {
                (lo * hi).sqrt()
            };
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || (hi.is_finite() && hi - lo <= 4.0 * f64::EPSILON * hi) {
            return next;
        }
        x = next;
    }
    x
}

/// Bivariate standard normal upper orthant probability `P(X > h, Y > k)`
/// with correlation `r` (Genz's method, double precision).
pub fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let (nodes, weights) = if r.abs() < 0.3 {
        gauss_legendre_cached(6)
    } else if r.abs() < 0.75 {
        gauss_legendre_cached(12)
    } else {
        gauss_legendre_cached(20)
    };
    let mut k = k;
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = r.asin();
        for (x, w) in nodes.iter().zip(weights) {
            let sn = (0.5 * asr * (1.0 + x)).sin();
            bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
        }
        // full node set on [-1, 1] integrates asr/2 · ∫ over [0, 1]
        bvn = bvn * asr / (4.0 * PI) + norm_cdf(-h) * norm_cdf(-k);
        return bvn.clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let bs = (h - k).powi(2);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        bvn = a
            * (-0.5 * (bs / a_s + hk)).exp()
            * (1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        if hk > -160.0 {
            let b = bs.sqrt();
            bvn -= (-0.5 * hk).exp()
                * (2.0 * PI).sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for (x, w) in nodes.iter().zip(weights) {
            let xs = (a * (x + 1.0)).powi(2);
            let rs = (1.0 - xs).sqrt();
            let asr = -0.5 * (bs / xs + hk);
            if asr > -100.0 {
                bvn += a
                    * w
                    * asr.exp()
                    * ((-hk * xs / (2.0 * (1.0 + rs).powi(2))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / (2.0 * PI);
    }
    if r > 0.0 {
        bvn += norm_cdf(-h.max(k));
    } else {
        bvn = -bvn + (norm_cdf(-h) - norm_cdf(-k)).max(0.0);
    }
    bvn.clamp(0.0, 1.0)
}

/// Bivariate standard normal CDF `P(X ≤ x, Y ≤ y)` with correlation `r`.
pub fn bvn_cdf(x: f64, y: f64, r: f64) -> f64 {
    bvn_upper(-x, -y, r)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gauss_legendre_cached(n: usize) -> (&'static [f64], &'static [f64]) {
    static GL6: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static GL12: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static GL20: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    let cell = match n {
        6 => &GL6,
        12 => &GL12,
        _ => &GL20,
    };
    let (x, w) = cell.get_or_init(|| gauss_legendre(n));
    (x, w)
}

/// Tanh-sinh (double exponential) nodes and weights on (0, 1), suitable for
/// integrands with endpoint singularities. `level` controls the step
/// `h = 2^-level`.
pub fn tanh_sinh_unit(level: u32) -> Vec<(f64, f64)> {
    let h = 0.5_f64.powi(level as i32);
    let mut out = Vec::new();
    let kmax = (4.0 / h).ceil() as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let s = 0.5 * PI * t.sinh();
        let cosh_s = s.cosh();
        // x = tanh(s) mapped to (0, 1); 1 - x and x computed without cancellation
        let e = (-2.0 * s.abs()).exp();
        let small = e / (1.0 + e);
        let x = if s >= 0.0 { 1.0 - small } else { small };
        let w = 0.5 * h * 0.5 * PI * t.cosh() / (cosh_s * cosh_s);
        if small > 0.0 && w > 0.0 && x > 0.0 && x < 1.0 {
            out.push((x, w));
        }
    }
    out
}

/// Kolmogorov distribution upper tail `P(K > x)` used for KS p-values.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * x * x).exp();
        sum += if (j as i64) % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_quantile_round_trip() {
        for &p in &[1e-12, 1e-6, 0.025, 0.3, 0.5, 0.8, 0.975, 1.0 - 1e-9] {
            assert_abs_diff_eq!(norm_cdf(norm_quantile(p)), p, epsilon = 1e-14 + p * 1e-12);
        }
        assert_abs_diff_eq!(norm_quantile(0.975), 1.959963984540054, epsilon = 1e-12);
    }

    #[test]
    fn t_cdf_closed_form_two_dof() {
        // T_2(x) = 1/2 + x / (2 sqrt(2 + x²))
        for &x in &[-30.0f64, -3.0, -1.3, -0.1, 0.0, 0.7, 2.5, 40.0] {
            let exact = 0.5 + x / (2.0 * (2.0 + x * x).sqrt());
            assert_abs_diff_eq!(t_cdf(x, 2.0), exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn t_quantile_round_trip() {
        for &nu in &[2.05, 3.0, 5.5, 30.0, 199.9] {
            for &p in &[1e-10, 1e-4, 0.01, 0.2, 0.49, 0.5, 0.51, 0.9, 0.9999] {
                let x = t_quantile(p, nu);
                assert!((t_cdf(x, nu) - p).abs() < 1e-12 + 1e-9 * p, "nu={nu} p={p}");
            }
        }
    }

    #[test]
    fn t_ln_pdf_integrates_to_one() {
        let (x, w) = gauss_legendre(200);
        // substitution t = tan(πs/2) maps (-1,1) onto the real line
        let total: f64 = x
            .iter()
            .zip(&w)
            .map(|(&s, &wi)| {
                let a = 0.5 * PI * s;
                let t = a.tan();
                let jac = 0.5 * PI / (a.cos() * a.cos());
                wi * t_ln_pdf(t, 4.0).exp() * jac
            })
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn chi2_sf_known_values() {
        assert_abs_diff_eq!(chi2_sf(0.0, 2.0), 1.0);
        // df = 2 has sf = exp(-x/2)
        assert_abs_diff_eq!(chi2_sf(3.0, 2.0), (-1.5_f64).exp(), epsilon = 1e-14);
        assert_abs_diff_eq!(chi2_sf(3.841458820694124, 1.0), 0.05, epsilon = 1e-10);
    }

    #[test]
    fn bvn_independence_and_limits() {
        for &(x, y) in &[(-1.0, 0.5), (0.0, 0.0), (2.0, -0.3)] {
            assert_abs_diff_eq!(bvn_cdf(x, y, 0.0), norm_cdf(x) * norm_cdf(y), epsilon = 1e-15);
        }
        // P(X<0,Y<0) = 1/4 + asin(r)/(2π)
        for &r in &[-0.99f64, -0.95, -0.5, 0.1, 0.5, 0.8, 0.93, 0.999] {
            let exact = 0.25 + r.asin() / (2.0 * PI);
            assert_abs_diff_eq!(bvn_cdf(0.0, 0.0, r), exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn bvn_matches_conditional_integral() {
        // P(X≤x, Y≤y) = ∫_{-∞}^{x} φ(s) Φ((y − r s)/√(1−r²)) ds
        let (gx, gw) = gauss_legendre(400);
        for &(x, y, r) in &[
            (0.3, -0.7, 0.6),
            (-1.2, 1.5, -0.8),
            (1.0, 1.0, 0.95),
            (0.5, -0.2, -0.97),
        ] {
            let lo = -12.0;
            let half = 0.5 * (x - lo);
            let quad: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(&t, &w)| {
                    let s = lo + half * (t + 1.0);
                    w * half * norm_pdf(s) * norm_cdf((y - r * s) / (1.0 - r * r).sqrt())
                })
                .sum();
            assert_abs_diff_eq!(bvn_cdf(x, y, r), quad, epsilon = 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert_abs_diff_eq!(int, 2.0 / 13.0, epsilon = 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let rule = tanh_sinh_unit(6);
        let int: f64 = rule.iter().map(|(x, w)| w / x.sqrt()).sum();
        assert_abs_diff_eq!(int, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn kolmogorov_reference_point() {
        // standard 5% critical value
        assert_abs_diff_eq!(kolmogorov_sf(1.3580986), 0.05, epsilon = 1e-6);
    }

    #[test]
    fn incomplete_gamma_inverse_round_trip() {
        for a in [0.2, 0.5, 1.0, 1.25, 2.5, 10.0] {
            for p in [1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999] {
                let x = gamma_inv(a, p, false);
                assert!((gamma_p(a, x) - p).abs() < 1e-12 * p.max(1e-3), "P a={a} p={p}");
                let x = gamma_inv(a, p, true);
                assert!((gamma_q(a, x) - p).abs() < 1e-12 * p.max(1e-3), "Q a={a} p={p}");
            }
        }
        // exponential: P(1, x) = 1 − e^{−x}
        assert!((gamma_inv(1.0, 0.5, false) - 2f64.ln()).abs() < 1e-14);
    }
}
