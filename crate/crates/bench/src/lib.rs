//! Fixtures shared by the benchmarks.

use mvstable_core::density::{DensityRequest, Route, SphereRule};
use mvstable_core::verify::four_atom_measure;
use mvstable_core::{KernelParams, ToleranceSpec};

/// Kernel parameter sets covering the main branches: plain, exceptional
/// segment, imaginary axis, α = 1.
pub fn kernel_cases() -> Vec<(&'static str, KernelParams, f64, u32)> {
    vec![
        ("alpha0.5_beta0", KernelParams::new(0.5, 0.0).unwrap(), 1.0, 0),
        ("alpha1.5_beta0.5_n2", KernelParams::new(1.5, 0.5).unwrap(), 2.0, 2),
        ("alpha0.7_beta1_n1", KernelParams::new(0.7, 1.0).unwrap(), 1.0, 1),
        ("alpha0.5_beta-1", KernelParams::new(0.5, -1.0).unwrap(), 1.0, 1),
        ("alpha1_beta0.7", KernelParams::new(1.0, 0.7).unwrap(), -0.5, 1),
    ]
}

/// One-point d = 2 density request on the four-atom measure.
pub fn density_request(alpha: f64, route: Route) -> DensityRequest {
    DensityRequest {
        points: vec![vec![0.5, -0.25]],
        measure: four_atom_measure(alpha, vec![0.3, -0.2]).unwrap(),
        route,
        rule: SphereRule::default_for(2, 0).unwrap(),
        tol: ToleranceSpec::default(),
    }
}
