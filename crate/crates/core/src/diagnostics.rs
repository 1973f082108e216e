//! Descriptive statistics and the residual test battery: Jarque–Bera,
//! Ljung–Box, Engle's ARCH-LM and the one-sample KS uniformity test.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{chi2_sf, kolmogorov_sf};

/// Lag count used when none is given (`Q(30)`, `Q²(30)`).
pub const DEFAULT_LAGS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Lag count / degrees of freedom (2 for Jarque–Bera).
    pub df: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Biased (1/n) variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticReport {
    pub moments: Moments,
    pub jarque_bera: TestResult,
    pub ljung_box: TestResult,
    /// Ljung–Box on the squared (demeaned) series.
    pub ljung_box_sq: TestResult,
    pub arch_lm: TestResult,
}

/// Sample moments with 1/n normalisation.
pub fn moments(x: &[f64]) -> Result<Moments> {
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidInput("empty sample".into()));
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let (skewness, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Moments {
        n,
        mean,
        variance: m2,
        skewness,
        excess_kurtosis,
    })
}

fn non_degenerate(x: &[f64]) -> Result<Moments> {
    let m = moments(x)?;
    if !(m.variance > f64::EPSILON * m.mean.abs().max(1.0) * 1e-6) || !m.variance.is_finite() {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok(m)
}

/// `JB = n/6 · (S² + (K−3)²/4)`, p-value from χ²(2).
pub fn jarque_bera(x: &[f64]) -> Result<TestResult> {
    if x.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "Jarque-Bera needs n >= 4, got {}",
            x.len()
        )));
    }
    let m = non_degenerate(x)?;
    Ok(jb_from_moments(m.n, m.skewness, m.excess_kurtosis + 3.0))
}

/// Jarque–Bera statistic from given skewness and raw kurtosis.
pub fn jb_from_moments(n: usize, skewness: f64, kurtosis: f64) -> TestResult {
    let k = kurtosis - 3.0;
    let statistic = n as f64 / 6.0 * (skewness * skewness + 0.25 * k * k);
    TestResult {
        statistic,
        p_value: chi2_sf(statistic, 2.0),
        df: 2,
    }
}

/// Sample autocorrelations `ρ̂_1..ρ̂_lags` (denominator: total sum of squares).
pub fn autocorrelations(x: &[f64], lags: usize) -> Result<Vec<f64>> {
    let m = non_degenerate(x)?;
    let c: Vec<f64> = x.iter().map(|v| v - m.mean).collect();
    let ss: f64 = c.iter().map(|v| v * v).sum();
    Ok((1..=lags)
        .map(|k| c[k..].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / ss)
        .collect())
}

/// `Q = n(n+2) Σ_{k=1..lags} ρ̂_k² / (n−k)`, p-value from χ²(lags).
pub fn ljung_box(x: &[f64], lags: usize) -> Result<TestResult> {
    let n = x.len();
    if lags == 0 || lags >= n {
        return Err(Error::InvalidInput(format!(
            "Ljung-Box needs 0 < lags < n (lags={lags}, n={n})"
        )));
    }
    let acf = autocorrelations(x, lags)?;
    let nf = n as f64;
    let statistic = nf
        * (nf + 2.0)
        * acf
            .iter()
            .enumerate()
            .map(|(i, r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    Ok(TestResult {
        statistic,
        p_value: chi2_sf(statistic, lags as f64),
        df: lags,
    })
}

/// Engle's LM test: `T·R²` from regressing the squared demeaned series on
/// an intercept and its own first `lags` lags (`T = n − lags`).
pub fn arch_lm(x: &[f64], lags: usize) -> Result<TestResult> {
    let n = x.len();
    if lags == 0 || lags + 1 >= n {
        return Err(Error::InvalidInput(format!(
            "ARCH-LM needs 0 < lags < n-1 (lags={lags}, n={n})"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let sq: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
    let t = n - lags;
    let y = DVector::from_iterator(t, sq[lags..].iter().copied());
    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    if tss <= f64::EPSILON * ybar.abs().max(f64::MIN_POSITIVE) * t as f64 {
        // squared series carries no variation to explain
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df: lags,
        });
    }
    let design = DMatrix::from_fn(
        t,
        lags + 1,
        |row, col| {
            if col == 0 {
                1.0
            } else {
                sq[lags + row - col]
            }
        },
    );
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-10 * smax) {
        return Err(Error::Singular("ARCH-LM auxiliary regression is rank deficient".into()));
    }
    let coef = svd
        .solve(&y, 1e-12 * smax)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let resid = &y - &design * coef;
    let rss = resid.norm_squared();
    let r2 = (1.0 - rss / tss).clamp(0.0, 1.0);
    let statistic = t as f64 * r2;
    Ok(TestResult {
        statistic,
        p_value: chi2_sf(statistic, lags as f64),
        df: lags,
    })
}

/// One-sample Kolmogorov–Smirnov test against Uniform(0,1); asymptotic
/// p-value with Stephens' small-sample correction.
pub fn ks_uniform(u: &[f64]) -> Result<TestResult> {
    if u.is_empty() {
        return Err(Error::InvalidInput("KS test on empty sample".into()));
    }
    let mut s = u.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let d = s
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let i = i as f64;
            ((i + 1.0) / n - v).max(v - i / n)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    let p_value = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    Ok(TestResult {
        statistic: d,
        p_value,
        df: s.len(),
    })
}

/// Two-sample Kolmogorov–Smirnov test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("KS test on empty sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d);
    Ok(TestResult {
        statistic: d,
        p_value,
        df: 0,
    })
}

/// Full battery on one series.
pub fn diagnose(x: &[f64], lags: usize) -> Result<DiagnosticReport> {
    let m = non_degenerate(x)?;
    let sq: Vec<f64> = x.iter().map(|v| (v - m.mean).powi(2)).collect();
    Ok(DiagnosticReport {
        moments: m,
        jarque_bera: jarque_bera(x)?,
        ljung_box: ljung_box(x, lags)?,
        ljung_box_sq: ljung_box(&sq, lags)?,
        arch_lm: arch_lm(x, lags)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn jb_zero_for_normal_moments() {
        let r = jb_from_moments(100, 0.0, 3.0);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        // symmetric sample with K = 3 exactly: {−a, 0×k, a} chosen so m4/m2² = 3
        // values ±1 with weight p each and 0 otherwise: K = 1/(2p) → p = 1/6
        let mut x = vec![0.0; 4];
        x.push(1.0);
        x.push(-1.0);
        let r = jarque_bera(&x).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn jb_formula_value() {
        assert_abs_diff_eq!(jb_from_moments(100, 1.0, 3.0).statistic, 16.6667, epsilon = 1e-3);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(matches!(jarque_bera(&[2.0; 10]), Err(Error::Degenerate(_))));
        assert!(jarque_bera(&[1.0, 2.0, 3.0]).is_err());
        assert!(ljung_box(&[1.0, 2.0, 3.0], 3).is_err());
        assert!(ks_uniform(&[]).is_err());
    }

    #[test]
    fn ljung_box_zero_for_uncorrelated_construction() {
        // period-4 pattern [1,0,-1,0]: zero mean and every lag-1 product vanishes
        let x: Vec<f64> = (0..40).map(|t| [1.0, 0.0, -1.0, 0.0][t % 4]).collect();
        let acf = autocorrelations(&x, 1).unwrap();
        assert_abs_diff_eq!(acf[0], 0.0, epsilon = 1e-15);
        let r = ljung_box(&x, 1).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ljung_box_matches_direct_autocorrelation() {
        // repeated-block series, oracle: explicit ρ̂_k sums
        let x = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 1.0, 1.0, 2.0, 2.0];
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let den: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
        let mut q = 0.0;
        for k in 1..=3 {
            let mut num = 0.0;
            for t in k..x.len() {
                num += (x[t] - mean) * (x[t - k] - mean);
            }
            let rho = num / den;
            q += rho * rho / (n - k as f64);
        }
        q *= n * (n + 2.0);
        assert_abs_diff_eq!(ljung_box(&x, 3).unwrap().statistic, q, epsilon = 1e-12);
    }

    fn normal_equations_r2(x: &[f64], lags: usize) -> f64 {
        // brute force: build X'X, X'y and solve by Gauss–Jordan elimination
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let sq: Vec<f64> = x.iter().map(|v| (v - mean).powi(2)).collect();
        let p = lags + 1;
        let mut a = vec![vec![0.0; p + 1]; p];
        for t in lags..n {
            let mut row = vec![1.0];
            row.extend((1..=lags).map(|k| sq[t - k]));
            for i in 0..p {
                for j in 0..p {
                    a[i][j] += row[i] * row[j];
                }
                a[i][p] += row[i] * sq[t];
            }
        }
        for c in 0..p {
            let piv = (c..p).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
            a.swap(c, piv);
            for r in 0..p {
                if r != c {
                    let f = a[r][c] / a[c][c];
                    for k in c..=p {
                        a[r][k] -= f * a[c][k];
                    }
                }
            }
        }
        let beta: Vec<f64> = (0..p).map(|i| a[i][p] / a[i][i]).collect();
        let ys = &sq[lags..];
        let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
        let (mut rss, mut tss) = (0.0, 0.0);
        for (i, t) in (lags..n).enumerate() {
            let fit = beta[0] + (1..=lags).map(|k| beta[k] * sq[t - k]).sum::<f64>();
            rss += (ys[i] - fit).powi(2);
            tss += (ys[i] - ybar).powi(2);
        }
        1.0 - rss / tss
    }

    #[test]
    fn arch_lm_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..300)
            .map(|t| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * if t % 3 == 0 { 2.0 } else { 1.0 }
            })
            .collect();
        for lags in [1, 4, 7] {
            let r2 = normal_equations_r2(&x, lags);
            let got = arch_lm(&x, lags).unwrap();
            assert_abs_diff_eq!(got.statistic, (300 - lags) as f64 * r2, epsilon = 1e-8);
        }
    }

    #[test]
    fn arch_lm_constant_square_is_zero() {
        let x: Vec<f64> = (0..50).map(|t| if t % 2 == 0 { 0.3 } else { -0.3 }).collect();
        let r = arch_lm(&x, 5).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn ks_examples() {
        let n = 99;
        let grid: Vec<f64> = (1..=n).map(|k| k as f64 / (n + 1) as f64).collect();
        let r = ks_uniform(&grid).unwrap();
        assert_abs_diff_eq!(r.statistic, 1.0 / (n + 1) as f64, epsilon = 1e-12);
        assert!(r.p_value > 0.999);
        let r = ks_uniform(&[0.5; 20]).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn statistics_shift_and_scale_invariant(
            x in prop::collection::vec(-3.0f64..3.0, 40..80),
            shift in -50.0f64..50.0,
            scale in 0.1f64..20.0,
        ) {
            let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
            let scaled: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let jb = jarque_bera(&x).unwrap();
            let lb = ljung_box(&x, 5).unwrap();
            let lm = arch_lm(&x, 3).unwrap();
            let tol = |a: f64| 1e-7 * (1.0 + a.abs());
            prop_assert!((jarque_bera(&shifted).unwrap().statistic - jb.statistic).abs() < tol(jb.statistic));
            prop_assert!((jarque_bera(&scaled).unwrap().statistic - jb.statistic).abs() < tol(jb.statistic));
            prop_assert!((ljung_box(&shifted, 5).unwrap().statistic - lb.statistic).abs() < tol(lb.statistic));
            prop_assert!((ljung_box(&scaled, 5).unwrap().statistic - lb.statistic).abs() < tol(lb.statistic));
            prop_assert!((arch_lm(&shifted, 3).unwrap().statistic - lm.statistic).abs() < 1e-6 * (1.0 + lm.statistic));
            for r in [jb, lb, lm] {
                prop_assert!((0.0..=1.0).contains(&r.p_value));
                prop_assert!(r.statistic >= 0.0);
            }
        }
    }
}
