//! Maximum likelihood machinery shared by the marginal and copula stages.

mod copula_fit;
mod hessian;
mod optim;
mod report;

pub use copula_fit::{fit_dynamic, fit_static, DynamicFit, StaticFit};
pub use hessian::{hessian, std_errors, std_errors_with_step, StdErrors, DEFAULT_STEP};
pub use optim::{maximize, Budget, OptimResult};
pub use report::{aic, bic, select_best, Estimate, FitReport, Mode};

/// Size of the soft penalty subtracted outside the admissible region.
pub const PENALTY: f64 = 1e6;
