use serde::{Deserialize, Serialize};

use crate::copula::Family;
use crate::error::{Error, Result};

pub fn aic(loglik: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

pub fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    k as f64 * (n as f64).ln() - 2.0 * loglik
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Static,
    Dynamic,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Static => "static",
            Mode::Dynamic => "dynamic",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(Mode::Static),
            "dynamic" | "time-varying" => Ok(Mode::Dynamic),
            other => Err(Error::InvalidInput(format!("unknown mode `{other}`"))),
        }
    }
}

/// A named point estimate; `std_error` is `None` when the Hessian was not
/// invertible or its stencil left the admissible region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub family: Family,
    pub mode: Mode,
    pub estimates: Vec<Estimate>,
    pub loglik: f64,
    pub k: usize,
    pub aic: f64,
    pub bic: f64,
    pub n: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl FitReport {
    pub fn new(family: Family, mode: Mode, estimates: Vec<Estimate>, loglik: f64, n: usize) -> Self {
        let k = estimates.len();
        FitReport {
            family,
            mode,
            estimates,
            loglik,
            k,
            aic: aic(loglik, k),
            bic: bic(loglik, k, n),
            n,
            converged: true,
            warnings: Vec::new(),
        }
    }

    pub fn estimate(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

/// Lowest AIC; ties go to fewer parameters, then family order, then static
/// before dynamic.
pub fn select_best(reports: &[FitReport]) -> Result<&FitReport> {
    reports
        .iter()
        .min_by(|a, b| {
            a.aic
                .total_cmp(&b.aic)
                .then(a.k.cmp(&b.k))
                .then(a.family.cmp(&b.family))
                .then(a.mode.cmp(&b.mode))
        })
        .ok_or_else(|| Error::InvalidInput("no fit reports to select from".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(family: Family, mode: Mode, k: usize, loglik: f64) -> FitReport {
        let est = (0..k)
            .map(|i| Estimate {
                name: format!("p{i}"),
                value: 0.0,
                std_error: None,
            })
            .collect();
        FitReport::new(family, mode, est, loglik, 100)
    }

    #[test]
    fn information_criteria() {
        assert_eq!(aic(0.0, 0), 0.0);
        assert_eq!(aic(10.0, 2), -16.0);
        assert!((aic(28.07, 1) + 54.14).abs() < 1e-12);
        assert!((bic(10.0, 2, 100) - (2.0 * 100f64.ln() - 20.0)).abs() < 1e-12);
    }

    #[test]
    fn selection() {
        assert!(select_best(&[]).is_err());
        let one = [report(Family::Gumbel, Mode::Static, 1, 3.0)];
        assert_eq!(select_best(&one).unwrap(), &one[0]);
        // aic 3 vs aic −5
        let two = [
            report(Family::Normal, Mode::Static, 1, -0.5),
            report(Family::Clayton, Mode::Static, 1, 3.5),
        ];
        assert_eq!(select_best(&two).unwrap().aic, -5.0);
    }

    #[test]
    fn ties_prefer_fewer_parameters_then_family_order() {
        let a = report(Family::StudentT, Mode::Static, 2, 6.0);
        let b = report(Family::Gumbel, Mode::Static, 1, 5.0);
        let c = report(Family::Normal, Mode::Static, 1, 5.0);
        assert_eq!(a.aic, b.aic);
        let all = [a.clone(), b.clone(), c];
        assert_eq!(select_best(&all).unwrap().family, Family::Normal);
        let two = [a, b];
        assert_eq!(select_best(&two).unwrap().family, Family::Gumbel);
    }

    proptest! {
        #[test]
        fn selection_ignores_order(lls in proptest::collection::vec(-50i32..50, 1..10), rot in 0usize..10) {
            let fams = Family::ALL;
            let reports: Vec<FitReport> = lls
                .iter()
                .enumerate()
                .map(|(i, &ll)| {
                    let mode = if i % 2 == 0 { Mode::Static } else { Mode::Dynamic };
                    report(fams[i % 5], mode, 1 + i % 3, ll as f64)
                })
                .collect();
            let mut rotated = reports.clone();
            rotated.rotate_left(rot % reports.len());
            rotated.reverse();
            let a = select_best(&reports).unwrap();
            let b = select_best(&rotated).unwrap();
            prop_assert_eq!((a.aic, a.k, a.family, a.mode), (b.aic, b.k, b.family, b.mode));
        }

        #[test]
        fn report_identities(ll in -1e4f64..1e4, k in 0usize..8, n in 1usize..10_000) {
            let est = (0..k)
                .map(|i| Estimate { name: format!("p{i}"), value: 0.5, std_error: Some(0.1) })
                .collect();
            let r = FitReport::new(Family::Normal, Mode::Static, est, ll, n);
            prop_assert_eq!(r.aic, 2.0 * k as f64 - 2.0 * ll);
            prop_assert_eq!(r.bic, k as f64 * (n as f64).ln() - 2.0 * ll);
        }
    }
}
