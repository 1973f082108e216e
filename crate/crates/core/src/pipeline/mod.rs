//! End-to-end runs: ingest, diagnostics, marginal fits, PIT, the copula
//! comparison matrix per pair of series, and path export.

mod config;
mod export;

pub use config::{
    AutoKeyword, CopulaMenu, MarginalChoice, RunConfig, SeriesConfig, SimConfig, SimDependence, SimMarginal,
};
pub use export::{export_columns, export_path_csv, read_path_csv, sig10, write_path, PathColumns};

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::copula::Family;
use crate::data::{align, load_csv, transform, ReturnSeries, Transform};
use crate::diagnostics::{diagnose, DiagnosticReport, TestResult};
use crate::dynamic::{EvolutionParams, ParamPath};
use crate::error::{Error, Result};
use crate::estimation::{fit_dynamic, fit_static, select_best, Budget, Estimate, FitReport, Mode};
use crate::marginal::{
    fit_marginal, fit_marginal_auto, pit_uniformity_check, ArmaEgarchSpec, MarginalFit, MarginalParams, PitMode,
};
use crate::simulation::{egarch_path, kendall_tau, sample_copula, sample_dynamic, BURN_IN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub spec: ArmaEgarchSpec,
    pub params: MarginalParams,
    pub estimates: Vec<Estimate>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl From<&MarginalFit> for MarginalSummary {
    fn from(f: &MarginalFit) -> Self {
        MarginalSummary {
            spec: f.spec,
            params: f.params.clone(),
            estimates: f.estimates.clone(),
            loglik: f.loglik,
            aic: f.aic,
            bic: f.bic,
            converged: f.converged,
            warnings: f.warnings.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesArtifact {
    pub name: String,
    pub column: String,
    pub transform: Transform,
    pub n: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    pub diagnostics: Option<DiagnosticReport>,
    pub marginal: Option<MarginalSummary>,
    /// Battery on the standardized residuals.
    pub residual_diagnostics: Option<DiagnosticReport>,
    pub pit_uniformity: Option<TestResult>,
    pub pit_file: Option<String>,
    pub errors: Vec<String>,
    #[serde(skip)]
    fitted: Option<FittedSeries>,
}

#[derive(Debug, Clone, PartialEq)]
struct FittedSeries {
    dates: Vec<NaiveDate>,
    std_residuals: Vec<f64>,
    cond_variance: Vec<f64>,
    pit: Vec<f64>,
}

/// One (family, mode) entry of the comparison matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub family: Family,
    pub mode: Mode,
    pub report: Option<FitReport>,
    pub error: Option<String>,
    #[serde(skip)]
    path: Option<ParamPath>,
}

impl Cell {
    fn failed(family: Family, mode: Mode, why: impl Into<String>) -> Self {
        Cell {
            family,
            mode,
            report: None,
            error: Some(why.into()),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub family: Family,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairArtifact {
    pub first: String,
    pub second: String,
    pub n: usize,
    pub kendall_tau: Option<f64>,
    pub cells: Vec<Cell>,
    pub best: Option<Selection>,
    pub comparison_file: String,
    pub path_file: Option<String>,
    pub error: Option<String>,
    #[serde(skip)]
    dates: Vec<NaiveDate>,
}

impl PairArtifact {
    pub fn cell(&self, family: Family, mode: Mode) -> Option<&Cell> {
        self.cells.iter().find(|c| c.family == family && c.mode == mode)
    }

    pub fn best_report(&self) -> Option<&FitReport> {
        let b = self.best?;
        self.cell(b.family, b.mode)?.report.as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Complete,
    /// At least one series stage or matrix cell failed.
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub tool: String,
    pub seed: u64,
    pub pit_mode: PitMode,
    pub lags: usize,
    pub budget: Budget,
    pub series: Vec<SeriesArtifact>,
    pub pairs: Vec<PairArtifact>,
    pub status: RunStatus,
}

impl RunArtifacts {
    pub fn failures(&self) -> usize {
        self.series.iter().map(|s| s.errors.len()).sum::<usize>()
            + self
                .pairs
                .iter()
                .map(|p| p.cells.iter().filter(|c| c.error.is_some()).count() + p.error.is_some() as usize)
                .sum::<usize>()
    }
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn load_series(cfg: &SeriesConfig) -> Result<ReturnSeries> {
    let raw = load_csv(&cfg.path, &cfg.column)?;
    transform(&raw, cfg.transform)
}

fn fit_one_marginal(y: &[f64], choice: MarginalChoice, cfg: &RunConfig, budget: &Budget) -> Result<MarginalFit> {
    match choice {
        MarginalChoice::Fixed(spec) => fit_marginal(y, &spec, cfg.pit_mode, budget),
        MarginalChoice::Keyword(AutoKeyword::Auto) => fit_marginal_auto(y, cfg.max_order, cfg.pit_mode, budget),
    }
}

fn series_stage(cfg: &RunConfig, sc: &SeriesConfig, data: &ReturnSeries, budget: &Budget) -> SeriesArtifact {
    let mut art = SeriesArtifact {
        name: sc.label().to_string(),
        column: sc.column.clone(),
        transform: sc.transform,
        n: data.len(),
        first_date: data.dates[0],
        last_date: *data.dates.last().expect("non-empty"),
        diagnostics: None,
        marginal: None,
        residual_diagnostics: None,
        pit_uniformity: None,
        pit_file: None,
        errors: Vec::new(),
        fitted: None,
    };
    match diagnose(&data.returns, cfg.lags) {
        Ok(d) => art.diagnostics = Some(d),
        Err(e) => art.errors.push(format!("diagnostics: {e}")),
    }
    let choice = sc.marginal.unwrap_or(cfg.marginal);
    let fit = match fit_one_marginal(&data.returns, choice, cfg, budget) {
        Ok(f) => f,
        Err(e) => {
            art.errors.push(format!("marginal fit: {e}"));
            return art;
        }
    };
    match diagnose(&fit.std_residuals, cfg.lags) {
        Ok(d) => art.residual_diagnostics = Some(d),
        Err(e) => art.errors.push(format!("residual diagnostics: {e}")),
    }
    art.pit_uniformity = pit_uniformity_check(&fit.pit).ok();
    art.pit_file = Some(format!("pit_{}.csv", file_stem(&art.name)));
    art.marginal = Some(MarginalSummary::from(&fit));
    art.fitted = Some(FittedSeries {
        dates: data.dates.clone(),
        std_residuals: fit.std_residuals,
        cond_variance: fit.cond_variance,
        pit: fit.pit,
    });
    art
}

fn guarded<T>(what: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(Error::Optimizer(format!("{what} aborted: {msg}")))
    })
}

/// Static and/or dynamic cells for one family. The static fit also seeds
/// the dynamic one, so it runs whenever either mode is requested.
fn family_cells(family: Family, modes: &[Mode], u: &[f64], v: &[f64], budget: &Budget) -> Vec<Cell> {
    let n = u.len();
    let mut out = Vec::new();
    let st = guarded("static fit", || fit_static(family, u, v, budget));
    if modes.contains(&Mode::Static) {
        out.push(match &st {
            Ok(f) => Cell {
                family,
                mode: Mode::Static,
                report: Some(f.report.clone()),
                error: None,
                path: Some(ParamPath::constant(&f.copula, n, f.report.loglik)),
            },
            Err(e) => Cell::failed(family, Mode::Static, e.to_string()),
        });
    }
    if modes.contains(&Mode::Dynamic) {
        out.push(match &st {
            Ok(f) => match guarded("dynamic fit", || fit_dynamic(&f.copula, u, v, budget)) {
                Ok(d) => Cell {
                    family,
                    mode: Mode::Dynamic,
                    report: Some(d.report),
                    error: None,
                    path: Some(d.path),
                },
                Err(e) => Cell::failed(family, Mode::Dynamic, e.to_string()),
            },
            Err(e) => Cell::failed(family, Mode::Dynamic, format!("no static starting point: {e}")),
        });
    }
    out
}

fn matrix(menu: &CopulaMenu, u: &[f64], v: &[f64], budget: &Budget) -> Vec<Cell> {
    let cells = menu.cells();
    let mut families: Vec<Family> = cells.iter().map(|c| c.0).collect();
    families.dedup();
    let run = |&f: &Family| {
        let modes: Vec<Mode> = cells.iter().filter(|c| c.0 == f).map(|c| c.1).collect();
        family_cells(f, &modes, u, v, budget)
    };
    #[cfg(feature = "parallel")]
    let out: Vec<Vec<Cell>> = {
        use rayon::prelude::*;
        families.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<Vec<Cell>> = families.iter().map(run).collect();
    out.into_iter().flatten().collect()
}

fn pair_stage(cfg: &RunConfig, a: &SeriesArtifact, b: &SeriesArtifact, budget: &Budget) -> PairArtifact {
    let stem = format!("{}-vs-{}", file_stem(&a.name), file_stem(&b.name));
    let mut art = PairArtifact {
        first: a.name.clone(),
        second: b.name.clone(),
        n: 0,
        kendall_tau: None,
        cells: Vec::new(),
        best: None,
        comparison_file: format!("comparison_{stem}.csv"),
        path_file: None,
        error: None,
        dates: Vec::new(),
    };
    let fail_all = |art: &mut PairArtifact, why: String| {
        art.cells = cfg
            .copula
            .cells()
            .into_iter()
            .map(|(f, m)| Cell::failed(f, m, why.clone()))
            .collect();
        art.error = Some(why);
    };
    let (Some(fa), Some(fb)) = (&a.fitted, &b.fitted) else {
        fail_all(&mut art, "a marginal fit is unavailable".into());
        return art;
    };
    let sa = ReturnSeries {
        dates: fa.dates.clone(),
        returns: fa.pit.clone(),
    };
    let sb = ReturnSeries {
        dates: fb.dates.clone(),
        returns: fb.pit.clone(),
    };
    let (sa, sb) = match align(&sa, &sb) {
        Ok(x) => x,
        Err(e) => {
            fail_all(&mut art, format!("alignment: {e}"));
            return art;
        }
    };
    art.n = sa.len();
    art.dates = sa.dates;
    art.kendall_tau = kendall_tau(&sa.returns, &sb.returns).ok();
    art.cells = matrix(&cfg.copula, &sa.returns, &sb.returns, budget);
    let reports: Vec<FitReport> = art.cells.iter().filter_map(|c| c.report.clone()).collect();
    if let Ok(best) = select_best(&reports) {
        art.best = Some(Selection {
            family: best.family,
            mode: best.mode,
        });
        art.path_file = Some(format!("path_{stem}.csv"));
    }
    art
}

/// Runs every stage and returns the artifacts without touching disk. Only
/// unreadable input is a hard error; later failures are recorded per cell.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let budget = cfg.effective_budget();
    let data: Vec<ReturnSeries> = cfg.series.iter().map(load_series).collect::<Result<_>>()?;
    let series: Vec<SeriesArtifact> = cfg
        .series
        .iter()
        .zip(&data)
        .map(|(sc, d)| series_stage(cfg, sc, d, &budget))
        .collect();
    let mut pairs = Vec::new();
    for i in 0..series.len() {
        for j in i + 1..series.len() {
            pairs.push(pair_stage(cfg, &series[i], &series[j], &budget));
        }
    }
    let mut art = RunArtifacts {
        tool: format!("tailcop {}", env!("CARGO_PKG_VERSION")),
        seed: cfg.seed,
        pit_mode: cfg.pit_mode,
        lags: cfg.lags,
        budget,
        series,
        pairs,
        status: RunStatus::Complete,
    };
    if art.failures() > 0 {
        art.status = RunStatus::Partial;
    }
    Ok(art)
}

fn opt_num(x: Option<f64>) -> String {
    x.map(sig10).unwrap_or_default()
}

fn write_comparison(pair: &PairArtifact, file: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(file)?;
    w.write_record([
        "family",
        "mode",
        "parameter",
        "estimate",
        "std_error",
        "loglik",
        "k",
        "aic",
        "bic",
        "selected",
        "note",
    ])?;
    for c in &pair.cells {
        let selected = pair.best
            == Some(Selection {
                family: c.family,
                mode: c.mode,
            });
        let fam = c.family.to_string();
        let mode = c.mode.to_string();
        match &c.report {
            Some(r) => {
                let note = r.warnings.join("; ");
                for e in &r.estimates {
                    w.write_record([
                        fam.as_str(),
                        &mode,
                        &e.name,
                        &sig10(e.value),
                        &opt_num(e.std_error),
                        &sig10(r.loglik),
                        &r.k.to_string(),
                        &sig10(r.aic),
                        &sig10(r.bic),
                        if selected { "yes" } else { "" },
                        &note,
                    ])?;
                }
            }
            None => {
                let note = c.error.clone().unwrap_or_default();
                w.write_record([
                    fam.as_str(),
                    &mode,
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    "",
                    &format!("failed: {note}"),
                ])?;
            }
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: file.to_path_buf(),
        source,
    })
}

/// Writes `report.json`, per-series PIT tables, and per-pair comparison and
/// best-model path CSVs into `dir`. Returns the files written, in order.
pub fn write_artifacts(art: &RunArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for s in &art.series {
        if let (Some(f), Some(name)) = (&s.fitted, &s.pit_file) {
            let file = dir.join(name);
            export_columns(
                &file,
                &f.dates,
                &["std_residual", "cond_variance", "pit"],
                &[&f.std_residuals, &f.cond_variance, &f.pit],
            )?;
            written.push(file);
        }
    }
    for p in &art.pairs {
        let file = dir.join(&p.comparison_file);
        write_comparison(p, &file)?;
        written.push(file);
        if let (Some(best), Some(name)) = (p.best, &p.path_file) {
            let path = p
                .cell(best.family, best.mode)
                .and_then(|c| c.path.as_ref())
                .expect("selected cell carries its path");
            let file = dir.join(name);
            export_path_csv(path, &p.dates, &file)?;
            written.push(file);
        }
    }
    let file = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(art)?;
    text.push('\n');
    std::fs::write(&file, text).map_err(|source| Error::Io {
        path: file.clone(),
        source,
    })?;
    written.push(file);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimArtifacts {
    pub dates: Vec<NaiveDate>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// Return series built from `u` and `v` when margins were configured.
    pub returns: Option<(Vec<f64>, Vec<f64>)>,
    /// True parameter path (constant for a static copula).
    pub path: ParamPath,
}

fn tail_of(path: ParamPath, skip: usize) -> ParamPath {
    ParamPath {
        family: path.family,
        params: path.params[skip..].to_vec(),
        tail: path.tail[skip..].to_vec(),
        loglik: f64::NAN,
    }
}

/// Draws dependent uniforms and, optionally, ARMA-EGARCH-GED returns whose
/// innovations are their GED quantiles. With margins the first [`BURN_IN`]
/// draws are discarded.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimArtifacts> {
    let burn = if cfg.marginals.is_some() { BURN_IN } else { 0 };
    let total = cfg.n + burn;
    let (mut u, mut v, path) = match &cfg.copula {
        SimDependence::Static(c) => {
            let (u, v) = sample_copula(c, total, cfg.seed)?;
            (u, v, ParamPath::constant(c, total, f64::NAN))
        }
        SimDependence::Dynamic { family, coefficients } => {
            let evo = EvolutionParams::from_slice(*family, coefficients)?;
            sample_dynamic(&evo, total, cfg.seed)?
        }
    };
    let returns = match &cfg.marginals {
        Some([a, b]) => {
            let mut x = egarch_path(&a.spec, &a.params, &u)?;
            let mut y = egarch_path(&b.spec, &b.params, &v)?;
            Some((x.split_off(burn), y.split_off(burn)))
        }
        None => None,
    };
    let u = u.split_off(burn);
    let v = v.split_off(burn);
    let dates = (0..cfg.n as u64)
        .map(|i| cfg.start_date + chrono::Days::new(i))
        .collect();
    Ok(SimArtifacts {
        dates,
        u,
        v,
        returns,
        path: tail_of(path, burn),
    })
}

/// Writes `simulated.csv` (`date,u,v[,x,y]`) and `true_path.csv`.
pub fn write_simulation(sim: &SimArtifacts, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let data = dir.join("simulated.csv");
    match &sim.returns {
        Some((x, y)) => export_columns(&data, &sim.dates, &["u", "v", "x", "y"], &[&sim.u, &sim.v, x, y])?,
        None => export_columns(&data, &sim.dates, &["u", "v"], &[&sim.u, &sim.v])?,
    }
    let path = dir.join("true_path.csv");
    export_path_csv(&sim.path, &sim.dates, &path)?;
    Ok(vec![data, path])
}
