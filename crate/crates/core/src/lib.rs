//! Numerical tools for weighted Bergman spaces on the unit disk.

pub mod analytic;
pub mod carleson;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod norms;
pub mod ode;
pub mod operators;
pub mod profile;
pub mod quadrature;
pub mod summation;

pub use analytic::{AnalyticFunction, FunctionSpec, SelfMap, SeriesConfig, TaylorPoly, C64};
pub use error::{LabError, Result};
pub use quadrature::{build_disk_rule, build_graded_rule, GradedSpec, QuadratureRule, RingGrid};
