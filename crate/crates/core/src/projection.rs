//! The one-dimensional projection functions `g_{α,d}(v, β)` in the (A), (B)
//! and (M) parameterizations.
//!
//! `g^A_{α,d}(v, β) = (2π)^{-d} ∫_0^∞ cos(vu - β tan(πα/2) u^α) u^{d-1} e^{-u^α} du`,
//! with the (B) and (M) analogs listed at [`g_direct`]. [`g_eval`] maps each
//! of them onto the kernel `h^{d-1}` of [`crate::kernel`], with exact closed
//! forms where the kernel is not defined and [`g_direct`] where it is
//! numerically poor.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};
use crate::kernel::{h_n, kappa_of, ray_laplace, KernelMethod, KernelParams};
use crate::quad::{integrate_damped_tail, truncation_point, QuadratureOutcome, TailEnvelope, ToleranceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OneDimRep {
    A,
    B,
    M,
}

impl std::fmt::Display for OneDimRep {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OneDimRep::A => "A",
            OneDimRep::B => "B",
            OneDimRep::M => "M",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for OneDimRep {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(OneDimRep::A),
            "B" | "b" => Ok(OneDimRep::B),
            "M" | "m" => Ok(OneDimRep::M),
            _ => Err(domain("OneDimRep", format!("unknown representation {s:?}"))),
        }
    }
}

/// A point at which to evaluate `g`. `beta` is the skewness in `rep`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GQuery {
    pub v: f64,
    pub beta: f64,
    pub alpha: f64,
    pub d: u32,
    pub rep: OneDimRep,
}

impl GQuery {
    pub fn new(v: f64, beta: f64, alpha: f64, d: u32, rep: OneDimRep) -> Result<Self> {
        let q = GQuery {
            v,
            beta,
            alpha,
            d,
            rep,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(domain("GQuery", format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.beta.abs() <= 1.0) {
            return Err(domain("GQuery", format!("|beta| must be <= 1, got {}", self.beta)));
        }
        if self.d < 1 {
            return Err(domain("GQuery", "d must be >= 1"));
        }
        if !self.v.is_finite() {
            return Err(domain("GQuery", "v must be finite"));
        }
        Ok(())
    }

    /// The same query with `(v, β)` replaced by `(-v, -β)`.
    pub fn mirrored(&self) -> Self {
        GQuery {
            v: -self.v,
            beta: -self.beta,
            ..*self
        }
    }
}

/// `β_B = (2/(πK(α))) atan(β tan(πα/2))`.
pub fn beta_to_b(beta: f64, alpha: f64) -> Result<f64> {
    let k = kappa_of(alpha)?;
    if !(beta.abs() <= 1.0) {
        return Err(domain("beta_to_b", format!("|beta| must be <= 1, got {beta}")));
    }
    if beta.abs() == 1.0 {
        // Exact: atan(tan(πα/2)) = πK/2 up to sign on both sides of α = 1.
        return Ok(beta);
    }
    let b = 2.0 / (PI * k) * (beta * (FRAC_PI_2 * alpha).tan()).atan();
    Ok(b.clamp(-1.0, 1.0))
}

/// The quantities that carry an (A) or (M) query over to the (B) kernel.
///
/// At α = 1 there is no separate (B) skewness: `beta_b = β`, `theta_b = 0`,
/// `scale = 1`, and the kernel abscissa is `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BConversion {
    pub beta_b: f64,
    pub theta_b: f64,
    pub scale: f64,
    pub x: f64,
    pub y: f64,
}

impl BConversion {
    pub fn new(q: &GQuery) -> Result<Self> {
        q.validate()?;
        let y = FRAC_PI_2 * q.v + q.beta * FRAC_PI_2.ln();
        if q.alpha == 1.0 {
            return Ok(BConversion {
                beta_b: q.beta,
                theta_b: 0.0,
                scale: 1.0,
                x: y,
                y,
            });
        }
        let (beta_b, x_shift) = match q.rep {
            OneDimRep::B => (q.beta, 0.0),
            _ => {
                let bb = beta_to_b(q.beta, q.alpha)?;
                let shift = if q.rep == OneDimRep::M {
                    // tan(παθ_B/2) = β tan(πα/2) exactly; this form stays finite
                    // as α → 1.
                    q.beta * (FRAC_PI_2 * q.alpha).tan()
                } else {
                    0.0
                };
                (bb, shift)
            }
        };
        let theta_b = beta_b * kappa_of(q.alpha)? / q.alpha;
        let scale = match q.rep {
            OneDimRep::B => 1.0,
            _ => (FRAC_PI_2 * q.alpha * theta_b).cos().powf(1.0 / q.alpha),
        };
        Ok(BConversion {
            beta_b,
            theta_b,
            scale,
            x: scale * (q.v + x_shift),
            y,
        })
    }
}

/// When [`g_eval`] prefers [`g_direct`] to the kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FallbackThresholds {
    /// `0 < |α - 1|` below this: the kernel exponent `α/(α-1)` is unusable.
    pub alpha_band: f64,
    /// `0 < |x|` below this (α ≠ 1): the kernel weight is nearly flat.
    pub small_x: f64,
    /// At α = 1, `|β|` below this (and above [`ALPHA_ONE_ZERO_BETA`]):
    /// the path grows like `e^{1/β}` before turning back.
    pub alpha_one_beta: f64,
}

impl Default for FallbackThresholds {
    fn default() -> Self {
        FallbackThresholds {
            alpha_band: 0.005,
            small_x: 1e-2,
            alpha_one_beta: 0.02,
        }
    }
}

/// At α = 1, `|β|` up to this is evaluated as β = 0.
pub const ALPHA_ONE_ZERO_BETA: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GValue {
    pub value: f64,
    pub err_est: f64,
    pub method: KernelMethod,
    pub converged: bool,
}

/// `g_{α,d}(v, β)` in the representation of the query.
pub fn g_eval(q: &GQuery, tol: &ToleranceSpec) -> Result<GValue> {
    g_eval_with(q, tol, &FallbackThresholds::default())
}

pub fn g_eval_with(q: &GQuery, tol: &ToleranceSpec, limits: &FallbackThresholds) -> Result<GValue> {
    q.validate()?;
    let d = q.d as i32;
    let n = q.d - 1;
    let denom = Complex64::new(0.0, PI).powi(d - 1) * 2f64.powi(d);

    if q.alpha == 1.0 {
        if q.beta.abs() <= ALPHA_ONE_ZERO_BETA {
            return Ok(closed(alpha_one_symmetric(q.v, q.d, q.rep)));
        }
        if q.beta.abs() < limits.alpha_one_beta {
            return direct(q, tol);
        }
        let (abscissa, prefactor) = match q.rep {
            OneDimRep::B => (q.v * q.beta.signum(), 1.0 / denom),
            _ => {
                let y = FRAC_PI_2 * q.v + q.beta * FRAC_PI_2.ln();
                let pref = PI * 4f64.powi(-d) * Complex64::new(0.0, 1.0).powi(1 - d);
                (y * q.beta.signum(), pref)
            }
        };
        let params = KernelParams::new(1.0, q.beta.abs())?;
        let h = h_n(abscissa, n, &params, tol)?;
        return Ok(GValue {
            value: (prefactor * h.value).re,
            err_est: prefactor.norm() * h.err_est,
            method: h.method,
            converged: h.converged,
        });
    }

    if (q.alpha - 1.0).abs() < limits.alpha_band {
        return direct(q, tol);
    }
    let conv = BConversion::new(q)?;
    if conv.x == 0.0 {
        return Ok(closed(origin_value(q)?));
    }
    if conv.x.abs() < limits.small_x {
        return direct(q, tol);
    }
    let params = KernelParams::new(q.alpha, conv.beta_b * conv.x.signum())?;
    let h = h_n(conv.x.abs(), n, &params, tol)?;
    let prefactor = conv.scale.powi(d) / denom;
    Ok(GValue {
        value: (prefactor * h.value).re,
        err_est: prefactor.norm() * h.err_est,
        method: h.method,
        converged: h.converged,
    })
}

fn closed(value: f64) -> GValue {
    GValue {
        value,
        err_est: 0.0,
        method: KernelMethod::ClosedForm,
        converged: true,
    }
}

/// The cosine integral of `q` as `Re[scale ∫ u^n exp(i v' u - c u^α) du]`,
/// for α ≠ 1: `(v', c, scale)`.
fn laplace_form(q: &GQuery) -> Result<(f64, Complex64, f64)> {
    let t = (FRAC_PI_2 * q.alpha).tan();
    let b = q.beta;
    let (shifted, c) = match q.rep {
        OneDimRep::A => (q.v, Complex64::new(1.0, b * t)),
        OneDimRep::M => (q.v + b * t, Complex64::new(1.0, b * t)),
        OneDimRep::B => (q.v, Complex64::from_polar(1.0, FRAC_PI_2 * kappa_of(q.alpha)? * b)),
    };
    Ok((shifted, c, (2.0 * PI).powi(-(q.d as i32))))
}

const SERIES_MAX_TERMS: usize = 200;

/// `Re[scale Σ_k (iv)^k/k! · Γ((n+1+k)/α) / (α c^{(n+1+k)/α})]`, the power
/// series of `e^{ivu}` integrated term by term. Entire for α > 1 and
/// asymptotic for α < 1; accepted only if the terms drop below the
/// tolerance while still decreasing. Returns `(value, err_est)`.
pub fn moment_series(v: f64, c: Complex64, alpha: f64, n: u32, scale: f64, tol: &ToleranceSpec) -> Option<(f64, f64)> {
    let (modulus, phase) = c.to_polar();
    let term = |k: usize| {
        let m = (n as usize + 1 + k) as f64;
        let ln_mag = scale.ln() + k as f64 * v.abs().ln() - ln_gamma(k as f64 + 1.0) + ln_gamma(m / alpha)
            - alpha.ln()
            - m / alpha * modulus.ln();
        let arg = k as f64 * FRAC_PI_2 * v.signum() - m / alpha * phase;
        Complex64::from_polar(ln_mag.exp(), arg)
    };
    if v == 0.0 {
        let t0 = term(0);
        return Some((t0.re, 0.0));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f64::INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let t = term(k);
        let mag = t.norm();
        if !mag.is_finite() || (k > 2 && mag > prev) {
            return None;
        }
        sum += t;
        if k > 2 && mag <= 0.01 * tol.target(sum.re.abs()) {
            // The next term bounds the remainder once the ratio is below 1/2.
            let next = term(k + 1).norm();
            if next <= 0.5 * mag {
                return Some((sum.re, 2.0 * next + 8.0 * f64::EPSILON * (k as f64) * sum.norm()));
            }
        }
        prev = mag;
    }
    None
}

fn direct(q: &GQuery, tol: &ToleranceSpec) -> Result<GValue> {
    if q.alpha != 1.0 {
        let (shifted, c, scale) = laplace_form(q)?;
        if let Some((value, err_est)) = moment_series(shifted, c, q.alpha, q.d - 1, scale, tol) {
            return Ok(GValue {
                value,
                err_est,
                method: KernelMethod::MomentSeries,
                converged: true,
            });
        }
    }
    let out = g_direct_outcome(q, tol)?;
    Ok(GValue {
        value: out.value,
        err_est: out.err_est,
        method: KernelMethod::DirectFallback,
        converged: out.converged,
    })
}

/// `g` where the kernel abscissa vanishes (α ≠ 1): `Re[Γ(d/α) / (α (2π)^d c^{d/α})]`
/// with `c = 1 + iβ tan(πα/2)` for (A)/(M) and `c = e^{iπKβ/2}` for (B).
fn origin_value(q: &GQuery) -> Result<f64> {
    let a = q.alpha;
    let d = q.d as f64;
    let c = match q.rep {
        OneDimRep::B => Complex64::from_polar(1.0, FRAC_PI_2 * kappa_of(a)? * q.beta),
        _ => Complex64::new(1.0, q.beta * (FRAC_PI_2 * a).tan()),
    };
    let val = gamma(d / a) / (a * (2.0 * PI).powf(d)) * c.powf(-d / a);
    Ok(val.re)
}

/// α = 1, β = 0: `Γ(d)/(2π)^d · Re[(c - iv)^{-d}]`, `c = 1` in (A)/(M) and
/// `π/2` in (B).
fn alpha_one_symmetric(v: f64, d: u32, rep: OneDimRep) -> f64 {
    let c = if rep == OneDimRep::B { FRAC_PI_2 } else { 1.0 };
    let di = d as i32;
    gamma(d as f64) / (2.0 * PI).powi(di) * Complex64::new(c, -v).powi(-di).re
}

/// `g` by direct quadrature of its defining cosine integral, divided by `(2π)^d`:
///
/// * (A): `cos(vu - β tan(πα/2) u^α) u^{d-1} e^{-u^α}`
/// * (M): `cos(vu + β tan(πα/2)(u - u^α)) u^{d-1} e^{-u^α}`
/// * (B): `cos(vu - u^α sin(πKβ/2)) u^{d-1} e^{-u^α cos(πKβ/2)}`
/// * α = 1, (A)/(M): `cos(vu + (2/π)β u log u) u^{d-1} e^{-u}`
/// * α = 1, (B): `cos(vu + β u log u) u^{d-1} e^{-πu/2}`
pub fn g_direct(q: &GQuery, tol: &ToleranceSpec) -> Result<f64> {
    Ok(g_direct_outcome(q, tol)?.value)
}

pub fn g_direct_outcome(q: &GQuery, tol: &ToleranceSpec) -> Result<QuadratureOutcome<f64>> {
    q.validate()?;
    let a = q.alpha;
    let v = q.v;
    let b = q.beta;
    let n = q.d - 1;
    let scale = (2.0 * PI).powi(-(q.d as i32));

    if a == 1.0 {
        let tol = tol.with_max_subdivisions(tol.max_subdivisions.max(DIRECT_MIN_SUBDIVISIONS));
        let (rate, log_coef) = match q.rep {
            OneDimRep::B => (FRAC_PI_2, b),
            _ => (1.0, 2.0 / PI * b),
        };
        let env = TailEnvelope::new(rate, 1.0).with_bound(scale, n as f64);
        let u_max = truncation_point(&env, tol.abs_tol)?;
        let env = env.with_frequency(v.abs() + log_coef.abs() * (u_max.ln().abs() + 1.0));
        let at_zero = if n == 0 { scale } else { 0.0 };
        let f = |u: f64| {
            if u == 0.0 {
                return at_zero;
            }
            (v * u + log_coef * u * u.ln()).cos() * u.powi(n as i32) * (-rate * u).exp() * scale
        };
        return integrate_damped_tail(f, &env, &tol);
    }

    // Each cosine integrand is Re[u^{d-1} exp(i v' u - c u^α)].
    let (shifted, c, scale) = laplace_form(q)?;
    let out = ray_laplace(shifted, c, a, n, scale, tol)?;
    Ok(QuadratureOutcome {
        value: out.value.re,
        err_est: out.err_est,
        n_evals: out.n_evals,
        converged: out.converged,
    })
}

/// Subdivision budget for the α = 1 cosine integrals.
const DIRECT_MIN_SUBDIVISIONS: usize = 200_000;
