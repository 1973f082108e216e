//! Browser bindings: copula samples, log-density grids and simulated
//! time-varying tail-dependence paths.

use wasm_bindgen::prelude::*;

use tailcop::dynamic::EvolutionParams;
use tailcop::simulation::{sample_copula, sample_dynamic};
use tailcop::{Copula, Family};

fn copula(family: &str, params: &[f64]) -> Result<Copula, String> {
    let family: Family = family.parse().map_err(|e: tailcop::Error| e.to_string())?;
    let c = Copula::from_params(family, params).map_err(|e| e.to_string())?;
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

/// `[λ_U, λ_L, τ]`; τ is NaN where it has no closed form.
pub fn summary_impl(family: &str, params: &[f64]) -> Result<Vec<f64>, String> {
    let c = copula(family, params)?;
    let t = c.tail_dependence().map_err(|e| e.to_string())?;
    Ok(vec![t.lambda_u, t.lambda_l, c.kendall_tau().unwrap_or(f64::NAN)])
}

/// Interleaved `u₀, v₀, u₁, v₁, …`.
pub fn sample_impl(family: &str, params: &[f64], n: usize, seed: u64) -> Result<Vec<f64>, String> {
    let (u, v) = sample_copula(&copula(family, params)?, n, seed).map_err(|e| e.to_string())?;
    Ok(u.into_iter().zip(v).flat_map(|(a, b)| [a, b]).collect())
}

/// Row-major `size × size` log density on the cell midpoints of the unit
/// square; row `i` is `v = (i + ½)/size`.
pub fn density_impl(family: &str, params: &[f64], size: usize) -> Result<Vec<f64>, String> {
    let c = copula(family, params)?;
    if size == 0 {
        return Err("grid size must be positive".into());
    }
    let at = |k: usize| (k as f64 + 0.5) / size as f64;
    let mut out = Vec::with_capacity(size * size);
    for i in 0..size {
        for j in 0..size {
            out.push(c.ln_pdf(at(j), at(i)).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Simulated path as interleaved `param, λ_U, λ_L` per step.
pub fn path_impl(family: &str, coefficients: &[f64], n: usize, seed: u64) -> Result<Vec<f64>, String> {
    let family: Family = family.parse().map_err(|e: tailcop::Error| e.to_string())?;
    let evo = EvolutionParams::from_slice(family, coefficients).map_err(|e| e.to_string())?;
    let (_, _, path) = sample_dynamic(&evo, n, seed).map_err(|e| e.to_string())?;
    Ok(path
        .params
        .iter()
        .zip(&path.tail)
        .flat_map(|(p, t)| [p[0], t.lambda_u, t.lambda_l])
        .collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn summary(family: &str, params: &[f64]) -> Result<Vec<f64>, JsError> {
    js(summary_impl(family, params))
}

#[wasm_bindgen]
pub fn sample(family: &str, params: &[f64], n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    js(sample_impl(family, params, n, seed))
}

#[wasm_bindgen]
pub fn density_grid(family: &str, params: &[f64], size: usize) -> Result<Vec<f64>, JsError> {
    js(density_impl(family, params, size))
}

#[wasm_bindgen]
pub fn dynamic_path(family: &str, coefficients: &[f64], n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    js(path_impl(family, coefficients, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gumbel_summary() {
        let s = summary_impl("gumbel", &[2.0]).unwrap();
        assert!((s[0] - (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(s[1], 0.0);
        assert!((s[2] - 0.5).abs() < 1e-12);
        assert!(summary_impl("gumbel", &[0.5]).is_err());
        assert!(summary_impl("frank", &[2.0]).is_err());
    }

    #[test]
    fn shapes() {
        let s = sample_impl("clayton", &[1.5], 50, 3).unwrap();
        assert_eq!(s.len(), 100);
        assert!(s.iter().all(|&x| x > 0.0 && x < 1.0));
        assert_eq!(s, sample_impl("clayton", &[1.5], 50, 3).unwrap());

        let g = density_impl("student-t", &[0.4, 5.0], 8).unwrap();
        assert_eq!(g.len(), 64);
        // exchangeable
        assert!((g[8 + 3] - g[3 * 8 + 1]).abs() < 1e-12);

        let p = path_impl("sjc", &[-1.0, 1.0, 0.5, -1.0, 1.0, 0.5], 40, 1).unwrap();
        assert_eq!(p.len(), 120);
        assert!(path_impl("sjc", &[0.0; 3], 40, 1).is_err());
    }
}
