#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod density;
pub mod error;
pub mod kernel;
pub mod projection;
pub mod quad;
pub mod spectral;
pub mod verify;

pub use density::{density_at, density_grid, make_sphere_rule, DensityRequest, DensityResult, Lattice, Route, SphereRule, SphereRuleKind};
pub use error::{Error, Result};
pub use kernel::{h_n, h_n_angular, h_n_direct, ComplexValue, KernelMethod, KernelParams, KernelResult};
pub use projection::{g_eval, GQuery, GValue, OneDimRep};
pub use quad::{QuadratureOutcome, ToleranceSpec};
pub use spectral::{functionals_at, Atom, DirectionFunctionals, DiscreteSpectralMeasure, Representation, UnitVector};
