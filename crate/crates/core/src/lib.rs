//! Tail dependence between two time series through a two-stage pipeline:
//! ARMA-EGARCH marginals with GED innovations, probability integral
//! transforms, then static and time-varying (observation-driven) copulas
//! selected by AIC.

pub mod copula;
pub mod data;
pub mod diagnostics;
pub mod dynamic;
pub mod error;
pub mod estimation;
pub mod marginal;
pub mod pipeline;
pub mod simulation;
pub mod special;

pub use copula::{Copula, Family, TailDep};
pub use error::{Error, Result};
