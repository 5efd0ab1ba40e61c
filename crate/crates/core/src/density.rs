//! Multivariate stable densities by integrating a projection function over
//! the unit sphere:
//!
//! `f(x) = ∫_{S^{d-1}} g_rep((⟨x - ν, s⟩ - shift(s)) / σ_rep(s), β_rep(s)) σ_rep(s)^{-d} ds`
//!
//! where `ν` is the shift stored in the measure and the route picks the
//! one-dimensional form and the per-direction parameters.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{domain, Error, Result};
use crate::projection::{g_eval, GQuery, OneDimRep};
use crate::quad::ToleranceSpec;
use crate::spectral::{convert_measure, dot, functionals_at, DiscreteSpectralMeasure, Representation, UnitVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SphereRuleKind {
    /// Equally spaced points on the circle.
    TrapezoidD2,
    /// Gauss-Legendre in the polar cosine times uniform azimuth.
    GaussProductD3,
    MonteCarlo,
}

impl std::fmt::Display for SphereRuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SphereRuleKind::TrapezoidD2 => "trapezoid-d2",
            SphereRuleKind::GaussProductD3 => "gauss-product-d3",
            SphereRuleKind::MonteCarlo => "montecarlo",
        })
    }
}

impl std::str::FromStr for SphereRuleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid-d2" => Ok(SphereRuleKind::TrapezoidD2),
            "gauss-product-d3" => Ok(SphereRuleKind::GaussProductD3),
            "montecarlo" => Ok(SphereRuleKind::MonteCarlo),
            _ => Err(domain("SphereRuleKind", format!("unknown rule {s:?}"))),
        }
    }
}

/// Nodes and weights on `S^{d-1}`.
///
/// Deterministic rules carry an embedded coarse rule on a subset of the
/// nodes (every other node on the circle, every other azimuth on the
/// sphere); the difference of the two is the reported error.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub nodes: Vec<UnitVector>,
    pub weights: Vec<f64>,
    pub kind: SphereRuleKind,
    pub seed: Option<u64>,
    coarse: Option<Vec<f64>>,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.nodes[0].dim()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weights of the embedded coarse rule (zero off its nodes).
    pub fn coarse_weights(&self) -> Option<&[f64]> {
        self.coarse.as_deref()
    }

    /// The rule with every node mapped by the orthogonal matrix `q`.
    pub fn rotate(&self, q: &DMatrix<f64>) -> Result<SphereRule> {
        let d = self.dim();
        if q.nrows() != d || q.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: q.nrows(),
            });
        }
        let nodes = self
            .nodes
            .iter()
            .map(|s| UnitVector::normalized(rotate(q, s.as_slice())))
            .collect::<Result<Vec<_>>>()?;
        Ok(SphereRule {
            nodes,
            ..self.clone()
        })
    }

    /// The default rule for dimension `d`: 512 circle points, 32 × 64
    /// sphere points, or 2·10^5 random points for `d ≥ 4`.
    pub fn default_for(d: usize, seed: u64) -> Result<SphereRule> {
        match d {
            2 => make_sphere_rule(2, 512, SphereRuleKind::TrapezoidD2, seed),
            3 => make_sphere_rule(3, 32, SphereRuleKind::GaussProductD3, seed),
            _ => make_sphere_rule(d, 200_000, SphereRuleKind::MonteCarlo, seed),
        }
    }
}

pub(crate) fn rotate(q: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..q.nrows()).map(|i| (0..q.ncols()).map(|j| q[(i, j)] * x[j]).sum()).collect()
}

/// `|S^{d-1}| = 2π^{d/2} / Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma(d as f64 / 2.0)
}

/// Builds a sphere rule. For `gauss-product-d3`, `n` is the number of polar
/// nodes and the azimuth gets `2n`.
pub fn make_sphere_rule(d: usize, n: usize, kind: SphereRuleKind, seed: u64) -> Result<SphereRule> {
    if d < 2 {
        return Err(domain("make_sphere_rule", format!("d must be >= 2, got {d}")));
    }
    if n < 4 {
        return Err(domain("make_sphere_rule", format!("n must be >= 4, got {n}")));
    }
    match kind {
        SphereRuleKind::TrapezoidD2 => {
            if d != 2 {
                return Err(domain("make_sphere_rule", "trapezoid-d2 requires d = 2"));
            }
            let nodes = (0..n)
                .map(|k| {
                    let (s, c) = (2.0 * PI * k as f64 / n as f64).sin_cos();
                    UnitVector::normalized(vec![c, s])
                })
                .collect::<Result<Vec<_>>>()?;
            let w = 2.0 * PI / n as f64;
            let coarse = n.is_multiple_of(2).then(|| (0..n).map(|k| if k % 2 == 0 { 2.0 * w } else { 0.0 }).collect());
            Ok(SphereRule {
                nodes,
                weights: vec![w; n],
                kind,
                seed: None,
                coarse,
            })
        }
        SphereRuleKind::GaussProductD3 => {
            if d != 3 {
                return Err(domain("make_sphere_rule", "gauss-product-d3 requires d = 3"));
            }
            let (xs, ws) = gauss_legendre(n);
            let m = 2 * n;
            let dphi = 2.0 * PI / m as f64;
            let mut nodes = Vec::with_capacity(n * m);
            let mut weights = Vec::with_capacity(n * m);
            let mut coarse = Vec::with_capacity(n * m);
            for (z, wz) in xs.iter().zip(&ws) {
                let r = (1.0 - z * z).sqrt();
                for j in 0..m {
                    let (s, c) = (dphi * j as f64).sin_cos();
                    nodes.push(UnitVector::normalized(vec![r * c, r * s, *z])?);
                    weights.push(wz * dphi);
                    coarse.push(if j % 2 == 0 { 2.0 * wz * dphi } else { 0.0 });
                }
            }
            Ok(SphereRule {
                nodes,
                weights,
                kind,
                seed: None,
                coarse: Some(coarse),
            })
        }
        SphereRuleKind::MonteCarlo => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut nodes = Vec::with_capacity(n);
            while nodes.len() < n {
                let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                if let Ok(u) = UnitVector::normalized(v) {
                    nodes.push(u);
                }
            }
            Ok(SphereRule {
                nodes,
                weights: vec![sphere_area(d) / n as f64; n],
                kind,
                seed: Some(seed),
                coarse: None,
            })
        }
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton's method on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}

/// Which multivariate representation the measure is read in, and which
/// one-dimensional form is integrated over the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    Auto,
    AA,
    AB,
    AM,
    MM,
    MA,
    MB,
}

impl Route {
    pub const ALL: [Route; 6] = [Route::AA, Route::AB, Route::AM, Route::MM, Route::MA, Route::MB];

    /// Representation the measure must be in for this route.
    pub fn measure_rep(&self) -> Option<Representation> {
        match self {
            Route::Auto => None,
            Route::AA | Route::AB | Route::AM => Some(Representation::A),
            Route::MM | Route::MA | Route::MB => Some(Representation::M),
        }
    }

    /// The route actually evaluated for a measure with this `α` and
    /// representation. At α = 1 the (A) and (M) forms coincide, so AM
    /// becomes AA and MA, MB become MM.
    pub fn resolve(&self, alpha: f64, rep: Representation) -> Route {
        let route = match self {
            Route::Auto if (alpha - 1.0).abs() < AUTO_M_BAND => Route::MM,
            Route::Auto if rep == Representation::A => Route::AA,
            Route::Auto => Route::MM,
            r => *r,
        };
        if alpha == 1.0 {
            match route {
                Route::AM => Route::AA,
                Route::MA | Route::MB => Route::MM,
                r => r,
            }
        } else {
            route
        }
    }
}

/// `auto` prefers the (M) route within this distance of α = 1.
pub const AUTO_M_BAND: f64 = 0.05;

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Auto => "auto",
            Route::AA => "AA",
            Route::AB => "AB",
            Route::AM => "AM",
            Route::MM => "MM",
            Route::MA => "MA",
            Route::MB => "MB",
        })
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Route::Auto),
            "AA" => Ok(Route::AA),
            "AB" => Ok(Route::AB),
            "AM" => Ok(Route::AM),
            "MM" => Ok(Route::MM),
            "MA" => Ok(Route::MA),
            "MB" => Ok(Route::MB),
            _ => Err(domain("Route", format!("unknown route {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DensityRequest {
    pub points: Vec<Vec<f64>>,
    pub measure: DiscreteSpectralMeasure,
    pub route: Route,
    pub rule: SphereRule,
    pub tol: ToleranceSpec,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityResult {
    pub value: f64,
    pub err_est: f64,
    pub route_used: Route,
    /// Every projection evaluation met its tolerance.
    pub converged: bool,
}

/// `σ_rep` below this at a node makes the measure unusable for the route.
pub const MIN_NODE_SCALE: f64 = 1e-12;

/// Per-node data of a route: `(rep, σ_rep, β_rep, shift_rep)`.
#[derive(Debug, Clone, Copy)]
struct NodeParams {
    rep: OneDimRep,
    sigma: f64,
    beta: f64,
    shift: f64,
}

fn node_params(rule: &SphereRule, m: &DiscreteSpectralMeasure, route: Route) -> Result<Vec<NodeParams>> {
    let a = m.alpha();
    rule.nodes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let f = functionals_at(s, m)?;
            let p = match route {
                Route::AA => NodeParams {
                    rep: OneDimRep::A,
                    sigma: f.sigma,
                    beta: f.beta,
                    shift: if a == 1.0 { f.mu_mm } else { 0.0 },
                },
                Route::AB => NodeParams {
                    rep: OneDimRep::B,
                    sigma: f.sigma_b,
                    beta: f.beta_b,
                    shift: f.mu_b,
                },
                Route::AM => NodeParams {
                    rep: OneDimRep::M,
                    sigma: f.sigma,
                    beta: f.beta,
                    shift: f.mu_m,
                },
                Route::MM => NodeParams {
                    rep: OneDimRep::M,
                    sigma: f.sigma,
                    beta: f.beta,
                    shift: f.mu_mm,
                },
                Route::MA => NodeParams {
                    rep: OneDimRep::A,
                    sigma: f.sigma,
                    beta: f.beta,
                    shift: f.mu_am,
                },
                Route::MB => NodeParams {
                    rep: OneDimRep::B,
                    sigma: f.sigma_b,
                    beta: f.beta_b,
                    shift: f.mu_am,
                },
                Route::Auto => unreachable!("route is resolved before node setup"),
            };
            if !(p.sigma >= MIN_NODE_SCALE) {
                return Err(Error::Degenerate(format!(
                    "scale {:e} at sphere node {k} ({:?}) is below {MIN_NODE_SCALE:e}",
                    p.sigma,
                    s.as_slice()
                )));
            }
            Ok(p)
        })
        .collect()
}

/// Brings the measure into the representation the route reads.
fn measure_for(route: Route, m: &DiscreteSpectralMeasure) -> Result<DiscreteSpectralMeasure> {
    let want = route.measure_rep().expect("resolved route");
    convert_measure(m, want).map_err(|e| Error::Route {
        route: route.to_string(),
        reason: format!("cannot express the measure in ({want}): {e}"),
    })
}

/// Density at each requested point, in input order.
pub fn density_at(req: &DensityRequest) -> Result<Vec<DensityResult>> {
    let m = &req.measure;
    let d = m.dim();
    if req.rule.is_empty() || req.rule.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: if req.rule.is_empty() { 0 } else { req.rule.dim() },
        });
    }
    for p in &req.points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(domain("density_at", "query points must be finite"));
        }
    }
    m.require_full_dimensional()?;

    let route = req.route.resolve(m.alpha(), m.rep());
    let measure = measure_for(route, m)?;
    let nodes = node_params(&req.rule, &measure, route)?;
    let nu = measure.shift();
    let a = measure.alpha();
    let dim = d as u32;

    req.points
        .par_iter()
        .map(|x| {
            let centered: Vec<f64> = x.iter().zip(nu).map(|(xi, ni)| xi - ni).collect();
            let mut fine = 0.0;
            let mut coarse = 0.0;
            let mut g_err = 0.0;
            let mut sum_sq = 0.0;
            let mut converged = true;
            for (k, (s, p)) in req.rule.nodes.iter().zip(&nodes).enumerate() {
                let v = (dot(&centered, s.as_slice()) - p.shift) / p.sigma;
                let q = GQuery {
                    v,
                    beta: p.beta,
                    alpha: a,
                    d: dim,
                    rep: p.rep,
                };
                let g = g_eval(&q, &req.tol)?;
                let jac = p.sigma.powi(-(dim as i32));
                let term = g.value * jac;
                fine += req.rule.weights[k] * term;
                if let Some(cw) = req.rule.coarse_weights() {
                    coarse += cw[k] * term;
                }
                sum_sq += term * term;
                g_err += req.rule.weights[k] * g.err_est * jac;
                converged &= g.converged;
            }
            let rule_err = match req.rule.coarse_weights() {
                Some(_) => (fine - coarse).abs(),
                None => {
                    let n = req.rule.len() as f64;
                    let area = sphere_area(d);
                    let mean = fine / area;
                    let var = (sum_sq / n - mean * mean).max(0.0);
                    area * (var / n).sqrt()
                }
            };
            Ok(DensityResult {
                value: fine,
                err_est: rule_err + g_err,
                route_used: route,
                converged,
            })
        })
        .collect()
}

/// An axis-aligned lattice: per axis `(start, stop, step)`, endpoints
/// included when they fall on the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub axes: Vec<(f64, f64, f64)>,
}

impl Lattice {
    pub fn new(axes: Vec<(f64, f64, f64)>) -> Result<Self> {
        if axes.is_empty() {
            return Err(domain("Lattice", "at least one axis is required"));
        }
        for &(a, b, h) in &axes {
            if !(a.is_finite() && b.is_finite()) {
                return Err(domain("Lattice", "bounds must be finite"));
            }
            if !(h > 0.0 && h.is_finite()) {
                return Err(domain("Lattice", format!("step must be positive, got {h}")));
            }
            if b < a {
                return Err(domain("Lattice", format!("stop {b} is below start {a}")));
            }
        }
        Ok(Lattice { axes })
    }

    pub fn axis_values(&self, i: usize) -> Vec<f64> {
        let (a, b, h) = self.axes[i];
        let count = ((b - a) / h + 1e-9).floor() as usize + 1;
        (0..count).map(|k| a + h * k as f64).collect()
    }

    /// All lattice points, last axis varying fastest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![Vec::new()];
        for i in 0..self.axes.len() {
            let vals = self.axis_values(i);
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    vals.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Density over a lattice, row-major. Returns the points with the results.
pub fn density_grid(
    lattice: &Lattice,
    measure: &DiscreteSpectralMeasure,
    route: Route,
    rule: &SphereRule,
    tol: &ToleranceSpec,
) -> Result<Vec<(Vec<f64>, DensityResult)>> {
    if lattice.axes.len() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: lattice.axes.len(),
        });
    }
    let points = lattice.points();
    let req = DensityRequest {
        points,
        measure: measure.clone(),
        route,
        rule: rule.clone(),
        tol: *tol,
    };
    let results = density_at(&req)?;
    Ok(req.points.into_iter().zip(results).collect())
}
