//! Oracle cross-check grids shared by the test suites and `mvstable check`.
//!
//! Each suite evaluates a fixed grid two independent ways and records the
//! discrepancy of every point against its allowance.

use rayon::prelude::*;

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::density::{density_at, make_sphere_rule, DensityRequest, Route, SphereRuleKind};
use crate::error::Result;
use crate::kernel::{h_n, h_n_direct, KernelParams};
use crate::projection::{g_direct, g_eval, GQuery, OneDimRep};
use crate::quad::ToleranceSpec;
use crate::spectral::{functionals_at, uniform_measure, Atom, DiscreteSpectralMeasure, Representation, UnitVector};

/// One compared quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckCase {
    pub label: String,
    pub value: f64,
    pub reference: f64,
    pub allowed: f64,
}

impl CheckCase {
    pub fn error(&self) -> f64 {
        (self.value - self.reference).abs()
    }

    pub fn passed(&self) -> bool {
        self.error() <= self.allowed
    }

    /// Discrepancy as a fraction of the allowance.
    pub fn severity(&self) -> f64 {
        if self.allowed > 0.0 {
            self.error() / self.allowed
        } else if self.error() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub suite: &'static str,
    pub cases: Vec<CheckCase>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(CheckCase::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckCase> {
        self.cases.iter().filter(|c| !c.passed())
    }

    /// The `k` cases closest to (or furthest past) their allowance.
    pub fn worst(&self, k: usize) -> Vec<&CheckCase> {
        let mut all: Vec<&CheckCase> = self.cases.iter().collect();
        all.sort_by(|a, b| b.severity().total_cmp(&a.severity()));
        all.truncate(k);
        all
    }
}

pub const KERNEL_ALPHAS: [f64; 6] = [0.3, 0.5, 0.8, 1.2, 1.5, 1.9];
pub const KERNEL_BETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const KERNEL_XS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
pub const KERNEL_ONE_BETAS: [f64; 3] = [0.3, 0.7, 1.0];
pub const KERNEL_ONE_XS: [f64; 3] = [-2.0, 0.0, 1.0];

/// Every `(α, β, x, n)` point of the kernel grid.
pub fn kernel_grid() -> Vec<(f64, f64, f64, u32)> {
    let mut grid = Vec::new();
    for n in 0..4 {
        for &a in &KERNEL_ALPHAS {
            for &b in &KERNEL_BETAS {
                for &x in &KERNEL_XS {
                    grid.push((a, b, x, n));
                }
            }
        }
        for &b in &KERNEL_ONE_BETAS {
            for &x in &KERNEL_ONE_XS {
                grid.push((1.0, b, x, n));
            }
        }
    }
    grid
}

fn oracle_tol() -> ToleranceSpec {
    ToleranceSpec {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        max_subdivisions: 400_000,
    }
}

/// Angular representation against the ray integral, both components, with
/// allowance `tol · (1 + |oracle|)`.
pub fn kernel_suite(tol: f64) -> Result<CheckReport> {
    let spec = ToleranceSpec::default();
    let cases = kernel_grid()
        .into_par_iter()
        .map(|(a, b, x, n)| -> Result<Vec<CheckCase>> {
            let params = KernelParams::new(a, b)?;
            let fin = h_n(x, n, &params, &spec)?.value;
            let dir = h_n_direct(x, n, &params, &oracle_tol())?;
            let label = format!("h^{n}(x={x}; alpha={a}, beta={b})");
            Ok(vec![
                CheckCase {
                    label: format!("Re {label}"),
                    value: fin.re,
                    reference: dir.re,
                    allowed: tol * (1.0 + dir.re.abs()),
                },
                CheckCase {
                    label: format!("Im {label}"),
                    value: fin.im,
                    reference: dir.im,
                    allowed: tol * (1.0 + dir.im.abs()),
                },
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(CheckReport {
        suite: "kernel",
        cases,
    })
}

pub const PROJECTION_ALPHAS: [f64; 5] = [0.5, 0.8, 1.0, 1.2, 1.7];
pub const PROJECTION_BETAS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
pub const PROJECTION_VS: [f64; 5] = [-2.0, -0.5, 0.0, 0.5, 2.0];

fn g_case(q: GQuery, tol: f64, label: String) -> Result<CheckCase> {
    let value = g_eval(&q, &ToleranceSpec::default())?.value;
    let reference = g_direct(&q, &oracle_tol())?;
    Ok(CheckCase {
        label,
        value,
        reference,
        allowed: tol * (1.0 + reference.abs()),
    })
}

/// `g` against its defining cosine integral over every representation,
/// the even-dimension exceptional case, and the closed-form anchors.
pub fn projection_suite(tol: f64) -> Result<CheckReport> {
    let mut queries = Vec::new();
    for rep in [OneDimRep::A, OneDimRep::B, OneDimRep::M] {
        for &alpha in &PROJECTION_ALPHAS {
            for &beta in &PROJECTION_BETAS {
                for &v in &PROJECTION_VS {
                    for d in 1..=4 {
                        let label = format!("g^{rep}(v={v}, beta={beta}; alpha={alpha}, d={d})");
                        queries.push((GQuery { v, beta, alpha, d, rep }, label));
                    }
                }
            }
        }
    }
    for rep in [OneDimRep::A, OneDimRep::B] {
        for d in [2, 4] {
            for v in [-1.0, 0.3, 1.5] {
                let label = format!("exceptional g^{rep}(v={v}, beta=1; alpha=0.7, d={d})");
                queries.push((GQuery { v, beta: 1.0, alpha: 0.7, d, rep }, label));
            }
        }
    }
    let mut cases = queries
        .into_par_iter()
        .map(|(q, label)| g_case(q, tol, label))
        .collect::<Result<Vec<_>>>()?;

    let spec = ToleranceSpec::default();
    let at = |v: f64, alpha: f64, d: u32| g_eval(&GQuery { v, beta: 0.0, alpha, d, rep: OneDimRep::A }, &spec).map(|g| g.value);
    for alpha in [0.5, 1.0, 1.5] {
        for d in 1..=3 {
            let df = d as f64;
            cases.push(CheckCase {
                label: format!("g(0, 0; alpha={alpha}, d={d}) = Gamma(d/alpha)/(alpha (2 pi)^d)"),
                value: at(0.0, alpha, d)?,
                reference: gamma(df / alpha) / (alpha * (2.0 * PI).powf(df)),
                allowed: 1e-8,
            });
        }
    }
    for k in 0..=20 {
        let v = -5.0 + 0.5 * k as f64;
        cases.push(CheckCase {
            label: format!("g({v}, 0; 1, 1) = 1/(2 pi (1 + v^2))"),
            value: at(v, 1.0, 1)?,
            reference: 1.0 / (2.0 * PI * (1.0 + v * v)),
            allowed: 1e-8,
        });
    }
    cases.push(CheckCase {
        label: "g(1, 0; 1, 2) = 0".into(),
        value: at(1.0, 1.0, 2)?,
        reference: 0.0,
        allowed: 1e-10,
    });
    Ok(CheckReport {
        suite: "projection",
        cases,
    })
}

/// The asymmetric four-atom measure on the circle used by the route checks.
pub fn four_atom_measure(alpha: f64, shift: Vec<f64>) -> Result<DiscreteSpectralMeasure> {
    let atoms = [([1.0, 0.0], 0.5), ([0.6, 0.8], 0.3), ([-0.8, 0.6], 0.15), ([0.0, -1.0], 0.05)]
        .iter()
        .map(|(s, w)| {
            Ok(Atom {
                point: UnitVector::new(s.to_vec())?,
                weight: *w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteSpectralMeasure::new(alpha, Representation::A, atoms, shift)
}

/// Isotropic bivariate Cauchy density with scale `c`.
pub fn isotropic_cauchy(c: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    c / (2.0 * PI * (c * c + r2).powf(1.5))
}

/// Pairwise route agreement, α = 1 route collapse, translation, and the
/// isotropic Cauchy closed form (allowance 1e-3 relative: the 256-atom
/// measure is only approximately isotropic).
pub fn density_suite(tol: f64) -> Result<CheckReport> {
    let spec = ToleranceSpec::default();
    let rule = make_sphere_rule(2, 256, SphereRuleKind::TrapezoidD2, 0)?;
    let grid: Vec<Vec<f64>> = [-2.0, 0.0, 2.0]
        .iter()
        .flat_map(|&a| [-2.0, 0.0, 2.0].map(|b| vec![a, b]))
        .collect();
    let run = |m: &DiscreteSpectralMeasure, route: Route, points: Vec<Vec<f64>>, rule: &crate::density::SphereRule| {
        density_at(&DensityRequest {
            points,
            measure: m.clone(),
            route,
            rule: rule.clone(),
            tol: spec,
        })
    };
    let mut cases = Vec::new();

    for alpha in [0.7, 1.4] {
        let m = four_atom_measure(alpha, vec![0.3, -0.2])?;
        let results = Route::ALL
            .par_iter()
            .map(|&r| run(&m, r, grid.clone(), &rule))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..Route::ALL.len() {
            for j in i + 1..Route::ALL.len() {
                for (k, x) in grid.iter().enumerate() {
                    let (a, b) = (results[i][k].value, results[j][k].value);
                    cases.push(CheckCase {
                        label: format!("alpha={alpha} {} vs {} at {x:?}", Route::ALL[i], Route::ALL[j]),
                        value: a,
                        reference: b,
                        allowed: tol.max(tol * b.abs()),
                    });
                }
            }
        }
    }

    let one = four_atom_measure(1.0, vec![0.3, -0.2])?;
    let aa = run(&one, Route::AA, grid.clone(), &rule)?;
    let mm = run(&one, Route::MM, grid.clone(), &rule)?;
    for ((x, a), b) in grid.iter().zip(&aa).zip(&mm) {
        cases.push(CheckCase {
            label: format!("alpha=1 AA vs MM at {x:?}"),
            value: a.value,
            reference: b.value,
            allowed: a.err_est.max(b.err_est),
        });
    }

    let nu = vec![0.4, -1.1];
    let shifted = run(&four_atom_measure(1.4, nu.clone())?, Route::AA, vec![vec![0.7, 0.2]], &rule)?;
    let centered = run(&four_atom_measure(1.4, vec![0.0, 0.0])?, Route::AA, vec![vec![0.7 - nu[0], 0.2 - nu[1]]], &rule)?;
    cases.push(CheckCase {
        label: "translation f(x; nu) = f(x - nu; 0)".into(),
        value: shifted[0].value,
        reference: centered[0].value,
        allowed: 0.0,
    });

    let iso = uniform_measure(2, 256, 1.0, 1.0, Representation::A)?;
    let c = functionals_at(&UnitVector::new(vec![1.0, 0.0])?, &iso)?.sigma;
    let pts: Vec<Vec<f64>> = [(0.0, 0.0), (0.5, 0.0), (0.6, 0.8), (-1.2, 1.6), (0.0, -3.0), (2.1, 2.1)]
        .iter()
        .map(|&(a, b)| vec![a, b])
        .collect();
    let fine = make_sphere_rule(2, 512, SphereRuleKind::TrapezoidD2, 0)?;
    for (x, r) in pts.iter().zip(run(&iso, Route::Auto, pts.clone(), &fine)?) {
        let reference = isotropic_cauchy(c, x);
        cases.push(CheckCase {
            label: format!("isotropic Cauchy at {x:?}"),
            value: r.value,
            reference,
            allowed: 1e-3 * reference,
        });
    }
    Ok(CheckReport { suite: "density", cases })
}
