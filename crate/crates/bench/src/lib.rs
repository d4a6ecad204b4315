//! Fixtures shared by the benchmarks.

use bergman_core::{AnalyticFunction, GradedSpec, C64};

/// Rule used by the norm benchmarks: default grading with a modest cap.
pub fn bench_spec() -> GradedSpec {
    GradedSpec {
        angular_cap: 1024,
        ..GradedSpec::default()
    }
}

pub fn boundary_symbol() -> AnalyticFunction {
    AnalyticFunction::boundary_power(1.0).expect("exponent is positive")
}

pub fn test_polynomial() -> AnalyticFunction {
    AnalyticFunction::polynomial(&[1.0, -0.5, 0.25, 0.0, 2.0])
}

pub fn near_boundary() -> C64 {
    C64::new(0.95, 0.1)
}
