//! TOML run configurations for `fit` and `simulate`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::copula::{Copula, Family};
use crate::data::Transform;
use crate::error::{Error, Result};
use crate::estimation::{Budget, Mode};
use crate::marginal::{ArmaEgarchSpec, MarginalParams, PitMode};

/// One input series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    /// Label used in reports and file names; defaults to `column`.
    #[serde(default)]
    pub name: Option<String>,
    pub path: PathBuf,
    pub column: String,
    #[serde(default)]
    pub transform: Transform,
    /// Overrides the run-wide marginal choice for this series.
    #[serde(default)]
    pub marginal: Option<MarginalChoice>,
}

impl SeriesConfig {
    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.column)
    }
}

/// `"auto"` or a fixed `{ m, n, p, q }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MarginalChoice {
    Fixed(ArmaEgarchSpec),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

impl Default for MarginalChoice {
    fn default() -> Self {
        MarginalChoice::Fixed(ArmaEgarchSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CopulaMenu {
    #[serde(default = "all_families")]
    pub families: Vec<Family>,
    #[serde(default = "both_modes")]
    pub modes: Vec<Mode>,
}

fn all_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn both_modes() -> Vec<Mode> {
    vec![Mode::Static, Mode::Dynamic]
}

impl Default for CopulaMenu {
    fn default() -> Self {
        CopulaMenu {
            families: all_families(),
            modes: both_modes(),
        }
    }
}

impl CopulaMenu {
    /// Requested cells in family order, static before dynamic.
    pub fn cells(&self) -> Vec<(Family, Mode)> {
        let mut out = Vec::new();
        for f in Family::ALL {
            if !self.families.contains(&f) {
                continue;
            }
            for m in [Mode::Static, Mode::Dynamic] {
                if self.modes.contains(&m) {
                    out.push((f, m));
                }
            }
        }
        out
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("tailcop-out")
}

fn default_lags() -> usize {
    crate::diagnostics::DEFAULT_LAGS
}

fn default_max_order() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub series: Vec<SeriesConfig>,
    #[serde(default)]
    pub marginal: MarginalChoice,
    /// Largest order per component searched by `marginal = "auto"`.
    #[serde(default = "default_max_order")]
    pub max_order: usize,
    #[serde(default)]
    pub copula: CopulaMenu,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pit_mode: PitMode,
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default)]
    pub budget: Budget,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative series paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_text(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for s in &mut cfg.series {
            if s.path.is_relative() {
                s.path = base.join(&s.path);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.series.len() < 2 {
            return Err(Error::Config("at least two series are required".into()));
        }
        let mut labels: Vec<&str> = self.series.iter().map(|s| s.label()).collect();
        labels.sort_unstable();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate series name `{}`", w[0])));
        }
        if self.copula.cells().is_empty() {
            return Err(Error::Config("copula menu is empty".into()));
        }
        for choice in std::iter::once(&self.marginal).chain(self.series.iter().filter_map(|s| s.marginal.as_ref())) {
            if let MarginalChoice::Fixed(spec) = choice {
                spec.validate()?;
            }
        }
        if self.lags == 0 {
            return Err(Error::Config("lags must be positive".into()));
        }
        Ok(())
    }

    /// Budget with the run seed applied.
    pub fn effective_budget(&self) -> Budget {
        Budget {
            seed: self.seed,
            ..self.budget
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Marginal model used to turn simulated uniforms into returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimMarginal {
    pub spec: ArmaEgarchSpec,
    pub params: MarginalParams,
}

/// Dependence used by `simulate`: a static copula, or a family with
/// `(ω, α, β)` coefficients for the time-varying recursion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SimDependence {
    Dynamic { family: Family, coefficients: Vec<f64> },
    Static(Copula),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    pub copula: SimDependence,
    /// Margins for the two return columns; without them only `u, v` are written.
    #[serde(default)]
    pub marginals: Option<[SimMarginal; 2]>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// First date of the synthetic calendar (consecutive days).
    #[serde(default = "default_start")]
    pub start_date: chrono::NaiveDate,
}

fn default_start() -> chrono::NaiveDate {
    chrono::NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date")
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.n < 11 {
            return Err(Error::Config("n must be at least 11".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&read_text(path.as_ref())?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [[series]]
        path = "a.csv"
        column = "x"

        [[series]]
        path = "b.csv"
        column = "y"
        transform = "level"
    "#;

    #[test]
    fn defaults() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.series[1].transform, Transform::Level);
        assert_eq!(c.series[0].transform, Transform::LogReturn);
        assert_eq!(c.marginal, MarginalChoice::Fixed(ArmaEgarchSpec::default()));
        assert_eq!(c.copula.cells().len(), 10);
        assert_eq!(c.lags, 30);
        assert_eq!(c.budget, Budget::default());
        assert_eq!(c.series[0].label(), "x");
    }

    #[test]
    fn marginal_choices_and_menu() {
        let text = format!(
            "marginal = \"auto\"\nmax_order = 2\nseed = 9\n[copula]\nfamilies = [\"gumbel\", \"normal\"]\nmodes = [\"static\"]\n{MINIMAL}"
        );
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(c.marginal, MarginalChoice::Keyword(AutoKeyword::Auto));
        // family order follows the enumeration, not the file
        assert_eq!(
            c.copula.cells(),
            vec![(Family::Normal, Mode::Static), (Family::Gumbel, Mode::Static)]
        );
        assert_eq!(c.effective_budget().seed, 9);

        let text = format!("marginal = {{ m = 1, n = 0, p = 1, q = 1 }}\n{MINIMAL}");
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(
            c.marginal,
            MarginalChoice::Fixed(ArmaEgarchSpec::new(1, 0, 1, 1).unwrap())
        );
    }

    #[test]
    fn rejects_bad_configs() {
        let one = "[[series]]\npath = \"a.csv\"\ncolumn = \"x\"\n";
        assert!(matches!(RunConfig::from_toml(one), Err(Error::Config(_))));
        let empty = format!("[copula]\nfamilies = []\n{MINIMAL}");
        assert!(RunConfig::from_toml(&empty).is_err());
        let bad = format!("marginal = {{ m = 0, n = 0, p = 0, q = 1 }}\n{MINIMAL}");
        assert!(RunConfig::from_toml(&bad).is_err());
        assert!(RunConfig::from_toml(&format!("marginal = \"fancy\"\n{MINIMAL}")).is_err());
        assert!(RunConfig::from_toml(&format!("colour = 1\n{MINIMAL}")).is_err());
        let dup = MINIMAL.replace("column = \"y\"", "column = \"x\"");
        assert!(RunConfig::from_toml(&dup).is_err());
    }

    #[test]
    fn simulation_configs() {
        let s = SimConfig::from_toml("n = 100\n[copula]\nfamily = \"gumbel\"\ntheta = 2.0\n").unwrap();
        assert_eq!(s.copula, SimDependence::Static(Copula::Gumbel { theta: 2.0 }));
        let d =
            SimConfig::from_toml("n = 100\nseed = 4\n[copula]\nfamily = \"gumbel\"\ncoefficients = [-2.0, 1.5, 0.7]\n")
                .unwrap();
        assert_eq!(
            d.copula,
            SimDependence::Dynamic {
                family: Family::Gumbel,
                coefficients: vec![-2.0, 1.5, 0.7]
            }
        );
        assert!(SimConfig::from_toml("n = 5\n[copula]\nfamily = \"normal\"\nrho = 0.1\n").is_err());
    }
}
