//! The complex inversion kernel `h^n(x; α, β)` in the (B) parameterization.
//!
//! `h^n(x) = (1/π) ∫_0^∞ (iz)^n exp(izx + ψ(z; α, -β)) dz` is the n-th
//! derivative of the one-dimensional inversion integral, imaginary part
//! included. [`h_n`] evaluates it by deforming the ray onto the path where the
//! exponent is real, which turns it into a non-oscillatory integral over a
//! bounded angle. [`h_n_direct`] integrates the defining ray integral directly
//! and serves as the independent check.
//!
//! Angles: the `φ` arguments of [`u_alpha`], [`u_one`], [`v_weight`] and
//! [`w_weight`] are normalized (`φ ∈ (-θ, 1)`, or `(-1, 1)` at α = 1);
//! [`contour_radius`] takes the geometric angle `(π/2)φ`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::quad::{
    integrate_breakpoints, integrate_damped_tail, truncation_point, QuadValue, QuadratureOutcome,
    TailEnvelope, ToleranceSpec,
};

pub type ComplexValue = Complex64;

/// Below this distance from α = 1 the angular representation is numerically
/// unusable and [`h_n`] evaluates the ray integral instead.
pub const ALPHA_ONE_BAND: f64 = 0.005;

/// `|β|` this close to 1 is treated as exactly ±1.
const BETA_SNAP: f64 = 1e-13;

/// Stability index and (B)-skewness, with the derived `K(α)` and `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    beta: f64,
    kappa: Option<f64>,
    theta: Option<f64>,
}

impl KernelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(domain("KernelParams", format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(beta.abs() <= 1.0 + 1e-12) {
            return Err(domain("KernelParams", format!("|beta| must be <= 1, got {beta}")));
        }
        let beta = if 1.0 - beta.abs() < BETA_SNAP {
            beta.signum()
        } else {
            beta
        };
        let (kappa, theta) = if alpha == 1.0 {
            (None, None)
        } else {
            let k = kappa_of(alpha)?;
            (Some(k), Some(beta * k / alpha))
        };
        Ok(KernelParams {
            alpha,
            beta,
            kappa,
            theta,
        })
    }

    /// α = 1 with an arbitrary positive skew. Only the path functions
    /// ([`contour_radius`], [`v_weight`], ...) make sense outside `|β| ≤ 1`.
    pub fn alpha_one_path(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(domain("KernelParams", format!("beta must be positive, got {beta}")));
        }
        Ok(KernelParams {
            alpha: 1.0,
            beta,
            kappa: None,
            theta: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `K(α)`; `None` at α = 1.
    pub fn kappa(&self) -> Option<f64> {
        self.kappa
    }

    /// `θ = β K(α) / α`; `None` at α = 1.
    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn is_alpha_one(&self) -> bool {
        self.alpha == 1.0
    }

    /// Same α with the skewness reversed.
    pub fn reflected(&self) -> Self {
        KernelParams {
            beta: -self.beta,
            theta: self.theta.map(|t| -t),
            ..*self
        }
    }

    /// Lower end of the normalized angular range.
    fn phi_lower(&self) -> f64 {
        match self.theta {
            Some(t) => -t,
            None => -1.0,
        }
    }
}

/// How a [`KernelResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMethod {
    /// Bounded-angle integral, plus the straight correction segment when β = ±1.
    FiniteInterval,
    /// α < 1 with β = -1: the path collapses onto the imaginary axis and `h`
    /// reduces to a single non-oscillatory Laplace-type integral.
    ImaginaryAxis,
    /// Ray integral (near α = 1).
    DirectFallback,
    /// Term-by-term integration of the power series of `e^{ivu}` (small `v`).
    MomentSeries,
    ClosedForm,
}

impl KernelMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            KernelMethod::FiniteInterval => "finite-interval",
            KernelMethod::ImaginaryAxis => "imaginary-axis",
            KernelMethod::DirectFallback => "direct-fallback",
            KernelMethod::MomentSeries => "moment-series",
            KernelMethod::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelResult {
    pub value: ComplexValue,
    pub err_est: f64,
    pub method: KernelMethod,
    pub n_evals: usize,
    pub converged: bool,
}

/// `K(α) = α - 1 + sign(1 - α)`.
pub fn kappa_of(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(domain("kappa_of", format!("alpha must lie in (0, 2), got {alpha}")));
    }
    if alpha == 1.0 {
        return Err(domain("kappa_of", "K(alpha) is undefined at alpha = 1"));
    }
    Ok(if alpha < 1.0 { alpha } else { alpha - 2.0 })
}

fn require_not_one(params: &KernelParams, what: &'static str) -> Result<f64> {
    params
        .theta
        .ok_or_else(|| domain(what, "requires alpha != 1"))
}

/// `U_α(φ; θ) = (sin(πα(φ+θ)/2) / cos(πφ/2))^{α/(1-α)} · cos(π((α-1)φ+αθ)/2) / cos(πφ/2)`.
pub fn u_alpha(phi: f64, params: &KernelParams) -> Result<f64> {
    let theta = require_not_one(params, "u_alpha")?;
    if !(phi > -theta && phi < 1.0) {
        return Err(domain("u_alpha", format!("phi = {phi} outside ({}, 1)", -theta)));
    }
    let a = params.alpha;
    let c = (FRAC_PI_2 * phi).cos();
    let s = (FRAC_PI_2 * a * (phi + theta)).sin();
    Ok((s / c).powf(a / (1.0 - a)) * (FRAC_PI_2 * ((a - 1.0) * phi + a * theta)).cos() / c)
}

/// `U_1(φ; β) = (π/2) (1 + βφ)/cos(πφ/2) · exp((π/2)(φ + 1/β) tan(πφ/2))`.
pub fn u_one(phi: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(domain("u_one", format!("beta must lie in (0, 1], got {beta}")));
    }
    if !(phi > -1.0 && phi < 1.0) {
        return Err(domain("u_one", format!("phi = {phi} outside (-1, 1)")));
    }
    let ang = FRAC_PI_2 * phi;
    Ok(FRAC_PI_2 * (1.0 + beta * phi) / ang.cos() * (FRAC_PI_2 * (phi + 1.0 / beta) * ang.tan()).exp())
}

fn check_radius_domain(angle: f64, x: f64, params: &KernelParams, what: &'static str) -> Result<()> {
    match params.theta {
        Some(theta) => {
            if !(x > 0.0) {
                return Err(domain(what, format!("x must be > 0 for alpha != 1, got {x}")));
            }
            let lo = -FRAC_PI_2 * theta;
            if !(angle > lo && angle < FRAC_PI_2) {
                return Err(domain(what, format!("angle {angle} outside ({lo}, pi/2)")));
            }
        }
        None => {
            if !(params.beta > 0.0) {
                return Err(domain(what, format!("beta must be > 0 at alpha = 1, got {}", params.beta)));
            }
            if !(angle > -FRAC_PI_2 && angle < FRAC_PI_2) {
                return Err(domain(what, format!("angle {angle} outside (-pi/2, pi/2)")));
            }
        }
    }
    if !x.is_finite() {
        return Err(domain(what, "x must be finite"));
    }
    Ok(())
}

fn finite_or(value: f64, angle: f64, what: &'static str) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(what, format!("non-finite value at angle {angle}")))
    }
}

/// Modulus `r(φ)` of the path on which `izx + ψ(z; α, -β)` is real, as a
/// function of the geometric angle `φ = arg z`.
pub fn contour_radius(angle: f64, x: f64, params: &KernelParams) -> Result<f64> {
    check_radius_domain(angle, x, params, "contour_radius")?;
    let r = match params.theta {
        Some(theta) => {
            let a = params.alpha;
            ((a * (angle + FRAC_PI_2 * theta)).sin() / (x * angle.cos())).powf(1.0 / (1.0 - a))
        }
        None => (-x / params.beta + (angle + FRAC_PI_2 / params.beta) * angle.tan()).exp(),
    };
    finite_or(r, angle, "contour_radius")
}

/// `r'(φ)` by logarithmic differentiation of [`contour_radius`].
pub fn contour_radius_deriv(angle: f64, x: f64, params: &KernelParams) -> Result<f64> {
    let r = contour_radius(angle, x, params)?;
    let d = r * log_radius_slope(angle, params);
    finite_or(d, angle, "contour_radius_deriv")
}

/// `r'/r` at geometric angle `angle`.
fn log_radius_slope(angle: f64, params: &KernelParams) -> f64 {
    match params.theta {
        Some(theta) => {
            let a = params.alpha;
            let arg = a * (angle + FRAC_PI_2 * theta);
            (a * arg.cos() / arg.sin() + angle.tan()) / (1.0 - a)
        }
        None => {
            let c = angle.cos();
            angle.tan() + (angle + FRAC_PI_2 / params.beta) / (c * c)
        }
    }
}

/// Radius where the path meets the imaginary axis: `(α/x)^{1/(1-α)}`, or
/// `exp(-x-1)` at α = 1.
pub fn tau_of(x: f64, params: &KernelParams) -> Result<f64> {
    if params.is_alpha_one() {
        if !x.is_finite() {
            return Err(domain("tau_of", "x must be finite"));
        }
        return Ok((-x - 1.0).exp());
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("tau_of", format!("x must be > 0 for alpha != 1, got {x}")));
    }
    Ok((params.alpha / x).powf(1.0 / (1.0 - params.alpha)))
}

fn weight_parts(phi: f64, n: u32, x: f64, params: &KernelParams) -> Result<(f64, f64, f64, f64)> {
    let angle = FRAC_PI_2 * phi;
    let r = contour_radius(angle, x, params)?;
    let dr = contour_radius_deriv(angle, x, params)?;
    let (s, c) = (FRAC_PI_2 * (n as f64 + 1.0) * (phi + 1.0)).sin_cos();
    Ok((r, dr, s, c))
}

/// `V_n(φ) = r^n { r' sin((π/2)(n+1)(φ+1)) + r cos((π/2)(n+1)(φ+1)) }`, with
/// `r` and `r'` taken at angle `(π/2)φ`.
pub fn v_weight(phi: f64, n: u32, x: f64, params: &KernelParams) -> Result<f64> {
    let (r, dr, s, c) = weight_parts(phi, n, x, params)?;
    Ok(r.powi(n as i32) * (dr * s + r * c))
}

/// `W_n(φ) = r^n { r sin((π/2)(n+1)(φ+1)) - r' cos((π/2)(n+1)(φ+1)) }`.
pub fn w_weight(phi: f64, n: u32, x: f64, params: &KernelParams) -> Result<f64> {
    let (r, dr, s, c) = weight_parts(phi, n, x, params)?;
    Ok(r.powi(n as i32) * (r * s - dr * c))
}

/// `ψ(z; α, β)`, the log characteristic function continued from the
/// positive axis: `-z^α exp(-iπθα/2)`, or `-(π/2)z - iβ z log z` at α = 1.
pub fn psi_direct(z: f64, params: &KernelParams) -> ComplexValue {
    match params.theta {
        Some(theta) => {
            let za = z.powf(params.alpha);
            -Complex64::from_polar(za, -FRAC_PI_2 * theta * params.alpha)
        }
        None => Complex64::new(-FRAC_PI_2 * z, -params.beta * z * z.ln()),
    }
}

/// Normalized distance from the endpoint where the path meets the imaginary
/// axis below which `r'/r` is taken from its series.
const EDGE: f64 = 0.0125;

/// `α cot(αu) - cot u` without the cancellation of the two poles at small `u`.
fn cot_gap(alpha: f64, u: f64) -> f64 {
    if u < FRAC_PI_2 * EDGE {
        let u2 = u * u;
        let a2 = alpha * alpha;
        let a4 = a2 * a2;
        let a6 = a4 * a2;
        u * ((1.0 - a2) / 3.0
            + u2 * ((1.0 - a4) / 45.0 + u2 * (2.0 * (1.0 - a6) / 945.0 + u2 * (1.0 - a6 * a2) / 4725.0)))
    } else {
        alpha / (alpha * u).tan() - 1.0 / u.tan()
    }
}

/// The integrand of the angular representation, computed in log space.
struct AngularIntegrand {
    params: KernelParams,
    x: f64,
    n: u32,
    ln_x: f64,
    orientation: f64,
}

impl AngularIntegrand {
    fn new(params: KernelParams, x: f64, n: u32) -> Self {
        let orientation = if params.alpha > 1.0 { -0.5 } else { 0.5 };
        AngularIntegrand {
            params,
            x,
            n,
            ln_x: x.ln(),
            orientation,
        }
    }

    /// `(ln E, ln r, r'/r)` where `E` is the argument of the exponential
    /// weight: `x^{α/(α-1)} U_α` or `e^{-x/β} U_1`.
    fn log_terms(&self, phi: f64) -> Option<(f64, f64, f64)> {
        let angle = FRAC_PI_2 * phi;
        let cos_angle = angle.cos();
        if !(cos_angle > 0.0) {
            return None;
        }
        let ln_cos = cos_angle.ln();
        match self.params.theta {
            Some(theta) => {
                let a = self.params.alpha;
                let arg = FRAC_PI_2 * a * (phi + theta);
                let s = arg.sin();
                let mixed = (arg - angle).cos();
                if !(s > 0.0) || !(mixed > 0.0) {
                    return None;
                }
                let ln_s = s.ln();
                let ln_r = (ln_s - self.ln_x - ln_cos) / (1.0 - a);
                let b = self.params.beta;
                let slope = if a < 1.0 && b == 1.0 && phi + 1.0 < EDGE {
                    cot_gap(a, FRAC_PI_2 * (phi + 1.0)) / (1.0 - a)
                } else if a > 1.0 && b == -1.0 && 1.0 - phi < EDGE {
                    cot_gap(a, FRAC_PI_2 * (1.0 - phi)) / (a - 1.0)
                } else {
                    (a * arg.cos() / s + angle.tan()) / (1.0 - a)
                };
                let ln_u = a / (1.0 - a) * (ln_s - ln_cos) + mixed.ln() - ln_cos;
                let ln_e = a / (a - 1.0) * self.ln_x + ln_u;
                Some((ln_e, ln_r, slope))
            }
            None => {
                let b = self.params.beta;
                let one_plus = 1.0 + b * phi;
                if !(one_plus > 0.0) {
                    return None;
                }
                let tan = angle.tan();
                let ln_r = -self.x / b + (angle + FRAC_PI_2 / b) * tan;
                let slope = if b == 1.0 && phi + 1.0 < EDGE {
                    let u = FRAC_PI_2 * (phi + 1.0);
                    let u2 = u * u;
                    u * (2.0 / 3.0 + u2 * (4.0 / 45.0 + u2 * (4.0 / 315.0 + u2 * 8.0 / 4725.0)))
                } else {
                    tan + FRAC_PI_2 * (phi + 1.0 / b) / (cos_angle * cos_angle)
                };
                let ln_e = ln_r + FRAC_PI_2.ln() + one_plus.ln() - ln_cos;
                Some((ln_e, ln_r, slope))
            }
        }
    }

    fn eval(&self, phi: f64) -> Complex64 {
        let Some((ln_e, ln_r, slope)) = self.log_terms(phi) else {
            return Complex64::new(0.0, 0.0);
        };
        if ln_e > 700.0 {
            return Complex64::new(0.0, 0.0);
        }
        let ln_mag = -ln_e.exp() + (self.n as f64 + 1.0) * ln_r;
        if ln_mag < -745.0 || ln_mag.is_nan() {
            return Complex64::new(0.0, 0.0);
        }
        let mag = ln_mag.exp() * self.orientation;
        let (s, c) = (FRAC_PI_2 * (self.n as f64 + 1.0) * (phi + 1.0)).sin_cos();
        Complex64::new(mag * (slope * s + c), mag * (s - slope * c))
    }

    /// Approximate log-magnitude of the integrand.
    fn log_magnitude(&self, phi: f64) -> Option<f64> {
        let (ln_e, ln_r, slope) = self.log_terms(phi)?;
        let l = -ln_e.min(700.0).exp() + (self.n as f64 + 1.0) * ln_r + slope.abs().ln_1p();
        l.is_finite().then_some(l)
    }

    /// Close to α = 1 the integrand can be a spike far narrower than any
    /// uniform panel. Locate the largest value on a coarse grid, refine it,
    /// and bracket it with points where the log-magnitude has dropped by
    /// fixed amounts.
    fn peak_points(&self, lo: f64, hi: f64, pts: &mut Vec<f64>) {
        const GRID: usize = 128;
        let step = (hi - lo) / GRID as f64;
        let samples: Vec<(f64, f64)> = (1..GRID)
            .filter_map(|i| {
                let phi = lo + step * i as f64;
                self.log_magnitude(phi).map(|l| (phi, l))
            })
            .collect();
        let Some(&(coarse, _)) = samples.iter().max_by(|x, y| x.1.total_cmp(&y.1)) else {
            return;
        };
        let score = |phi: f64| self.log_magnitude(phi).unwrap_or(f64::NEG_INFINITY);

        // Golden-section search on the two cells around the coarse maximum.
        let (mut a, mut b) = ((coarse - step).max(lo), (coarse + step).min(hi));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (score(c), score(d));
        for _ in 0..60 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = score(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = score(d);
            }
        }
        let peak = 0.5 * (a + b);
        let top = score(peak);
        if !top.is_finite() {
            return;
        }
        pts.push(peak);
        for drop in [1.0, 4.0, 16.0, 64.0] {
            let level = top - drop;
            for outer in [lo, hi] {
                // Walk outwards geometrically to bracket the crossing.
                let room = outer - peak;
                let mut near = peak;
                let mut far = outer;
                let mut frac = 1e-12;
                while frac < 1.0 {
                    let probe = peak + room * frac;
                    if score(probe) < level {
                        far = probe;
                        break;
                    }
                    near = probe;
                    frac *= 2.0;
                }
                if score(far) >= level {
                    continue;
                }
                for _ in 0..50 {
                    let m = 0.5 * (near + far);
                    if score(m) >= level {
                        near = m;
                    } else {
                        far = m;
                    }
                }
                pts.push(0.5 * (near + far));
            }
        }
    }

    /// Initial partition: uniform panels plus the points where the weight
    /// exponent crosses a few decades around 1, and geometric clustering
    /// towards the endpoint where the path turns sharply when β is close
    /// to its exceptional value.
    fn breakpoints(&self) -> Vec<f64> {
        let lo = self.params.phi_lower();
        let hi = 1.0;
        let width = hi - lo;
        let mut pts: Vec<f64> = (0..=8).map(|i| lo + width * i as f64 / 8.0).collect();

        let ln_e = |phi: f64| self.log_terms(phi).map(|t| t.0);
        let eps = 1e-12 * width;
        if let (Some(e_lo), Some(e_hi)) = (ln_e(lo + eps), ln_e(hi - eps)) {
            for level in [-4.6, -2.3, 0.0, 2.3, 4.6] {
                if (e_lo - level) * (e_hi - level) >= 0.0 {
                    continue;
                }
                let (mut a, mut b) = (lo + eps, hi - eps);
                let rising = e_hi > e_lo;
                for _ in 0..80 {
                    let m = 0.5 * (a + b);
                    match ln_e(m) {
                        Some(v) if (v < level) == rising => a = m,
                        Some(_) => b = m,
                        None => break,
                    }
                }
                pts.push(0.5 * (a + b));
            }
        }

        self.peak_points(lo, hi, &mut pts);

        let a = self.params.alpha;
        let b = self.params.beta;
        let cluster_low = (a <= 1.0 && b > 0.9) || (a == 1.0);
        let cluster_high = a > 1.0 && b < -0.9;
        for j in 4..48 {
            let off = width * 0.5f64.powi(j);
            if cluster_low {
                pts.push(lo + off);
            }
            if cluster_high {
                pts.push(hi - off);
            }
        }
        pts.retain(|p| *p >= lo && *p <= hi);
        pts.sort_by(|x, y| x.total_cmp(y));
        pts.dedup();
        pts
    }
}

fn check_kernel_pre(x: f64, params: &KernelParams) -> Result<()> {
    if !x.is_finite() {
        return Err(domain("h_n", "x must be finite"));
    }
    if params.is_alpha_one() {
        if !(params.beta > 0.0) {
            return Err(domain("h_n", format!("beta must be > 0 at alpha = 1, got {}", params.beta)));
        }
    } else if !(x > 0.0) {
        return Err(domain("h_n", format!("x must be > 0 for alpha != 1, got {x}")));
    }
    Ok(())
}

/// `h^n(x; α, β)` from its bounded-angle representation.
///
/// Requires `x > 0` for α ≠ 1 and `β > 0` at α = 1. For β = 1 (α ≤ 1) and
/// β = -1 (α > 1) the path starts at `∓iτ` instead of the origin and the
/// segment along the imaginary axis is added; for α < 1, β = -1 the whole
/// path lies on the imaginary axis.
pub fn h_n(x: f64, n: u32, params: &KernelParams, tol: &ToleranceSpec) -> Result<KernelResult> {
    check_kernel_pre(x, params)?;
    let a = params.alpha;
    let b = params.beta;

    if !params.is_alpha_one() && (a - 1.0).abs() < ALPHA_ONE_BAND {
        return direct_result(x, n, params, tol);
    }

    if a < 1.0 && b == -1.0 {
        return imaginary_axis(x, n, params, tol);
    }

    let main = h_n_angular(x, n, params, tol)?;
    let mut value = main.value;
    let mut err_est = main.err_est;
    let mut n_evals = main.n_evals;
    let mut converged = main.converged;

    let nf = n as f64;
    // Segment of the imaginary axis between the origin and the start of the
    // path. On [0, τ] each integrand is bounded by r^n e^{-c r^p}, which caps
    // the range when τ is astronomically large.
    type Segment = (f64, Box<dyn Fn(f64) -> f64>, TailEnvelope);
    let segment: Option<Segment> = if b == 1.0 && a < 1.0 {
        let f = move |r: f64| (x * r - r.powf(a)).exp() * r.powf(nf);
        Some((-1.0 / PI, Box::new(f), TailEnvelope::new(1.0 - a, a)))
    } else if b == 1.0 && a == 1.0 {
        let f = move |r: f64| (x * r + r * r.ln()).exp() * r.powf(nf);
        Some((-1.0 / PI, Box::new(f), TailEnvelope::new(1.0, 1.0)))
    } else if b == -1.0 && a > 1.0 {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        let f = move |s: f64| (s.powf(a) - s * x).exp() * s.powf(nf);
        Some((sign / PI, Box::new(f), TailEnvelope::new(x * (a - 1.0) / a, 1.0)))
    } else {
        None
    };
    if let Some((factor, f, env)) = segment {
        let env = env.with_bound(1.0, nf);
        let end = tau_of(x, params)?.min(truncation_point(&env, tol.abs_tol * PI)?);
        if end > 0.0 {
            let mut pts: Vec<f64> = (0..60).map(|j| end * 0.5f64.powi(j)).collect();
            pts.push(0.0);
            pts.reverse();
            let seg = integrate_breakpoints(|r| if r > 0.0 { f(r) } else { f64::from(n == 0) }, &pts, tol)?;
            value.im += factor * seg.value;
            err_est += factor.abs() * seg.err_est;
            n_evals += seg.n_evals;
            converged &= seg.converged;
        }
    }

    Ok(KernelResult {
        value,
        err_est,
        method: KernelMethod::FiniteInterval,
        n_evals,
        converged,
    })
}

/// The bounded-angle integral of [`h_n`] alone, without the segment on the
/// imaginary axis. Equal to `h_n` except for β = 1 (α ≤ 1) and β = -1
/// (α > 1); α < 1, β = -1 and the band around α = 1 are not covered.
pub fn h_n_angular(x: f64, n: u32, params: &KernelParams, tol: &ToleranceSpec) -> Result<KernelResult> {
    check_kernel_pre(x, params)?;
    let a = params.alpha;
    if !params.is_alpha_one() && (a - 1.0).abs() < ALPHA_ONE_BAND {
        return Err(domain("h_n_angular", format!("alpha = {a} is inside the direct band")));
    }
    if a < 1.0 && params.beta == -1.0 {
        return Err(domain("h_n_angular", "alpha < 1, beta = -1 has no angular part"));
    }
    let integrand = AngularIntegrand::new(*params, x, n);
    let out = integrate_breakpoints(|phi| integrand.eval(phi), &integrand.breakpoints(), tol)?;
    Ok(KernelResult {
        value: out.value,
        err_est: out.err_est,
        method: KernelMethod::FiniteInterval,
        n_evals: out.n_evals,
        converged: out.converged,
    })
}

/// α < 1, β = -1: with `z = is`, `h^n = i (-1)^n/π ∫_0^∞ s^n e^{-sx - s^α} ds`.
fn imaginary_axis(x: f64, n: u32, params: &KernelParams, tol: &ToleranceSpec) -> Result<KernelResult> {
    let a = params.alpha;
    let nf = n as f64;
    let bound = 1.0 / PI;
    let by_x = TailEnvelope::new(x, 1.0).with_bound(bound, nf);
    let by_alpha = TailEnvelope::new(1.0, a).with_bound(bound, nf);
    let env = if truncation_point(&by_x, tol.abs_tol)? <= truncation_point(&by_alpha, tol.abs_tol)? {
        by_x
    } else {
        by_alpha
    };
    let out = integrate_damped_tail(|s: f64| s.powf(nf) * (-s * x - s.powf(a)).exp() / PI, &env, tol)?;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(KernelResult {
        value: Complex64::new(0.0, sign * out.value),
        err_est: out.err_est,
        method: KernelMethod::ImaginaryAxis,
        n_evals: out.n_evals,
        converged: out.converged,
    })
}

fn direct_result(x: f64, n: u32, params: &KernelParams, tol: &ToleranceSpec) -> Result<KernelResult> {
    let out = h_n_direct_outcome(x, n, params, tol)?;
    Ok(KernelResult {
        value: out.value,
        err_est: out.err_est,
        method: KernelMethod::DirectFallback,
        n_evals: out.n_evals,
        converged: out.converged,
    })
}

/// Subdivision budget for ray integrals, which start from one panel per
/// oscillation and therefore need more room than the angular ones.
const DIRECT_MIN_SUBDIVISIONS: usize = 200_000;

/// `h^n(x; α, β)` by direct integration of the defining ray integral.
///
/// Independent of the angular representation; used as the reference in
/// tests and as the fallback near α = 1. Any finite `x` is accepted.
///
/// For α ≠ 1 the integral is evaluated by [`ray_laplace`], which turns the
/// ray into the sector where the integrand decays exponentially; at α = 1
/// the positive axis is already damped by `e^{-πz/2}` and is used as is.
pub fn h_n_direct(x: f64, n: u32, params: &KernelParams, tol: &ToleranceSpec) -> Result<ComplexValue> {
    Ok(h_n_direct_outcome(x, n, params, tol)?.value)
}

/// As [`h_n_direct`], with the quadrature diagnostics.
pub fn h_n_direct_outcome(
    x: f64,
    n: u32,
    params: &KernelParams,
    tol: &ToleranceSpec,
) -> Result<QuadratureOutcome<ComplexValue>> {
    if !x.is_finite() {
        return Err(domain("h_n_direct", "x must be finite"));
    }
    let i_pow = Complex64::new(0.0, 1.0).powu(n);
    match params.theta {
        Some(theta) => {
            // ψ(z; α, -β) = -z^α e^{iπθα/2}.
            let phase = FRAC_PI_2 * theta * params.alpha;
            assert!(phase.cos() > 0.0, "damping rate must be positive for |theta| <= min(1, 2/alpha - 1)");
            let c = Complex64::from_polar(1.0, phase);
            let mut out = ray_laplace(x, c, params.alpha, n, 1.0 / PI, tol)?;
            out.value *= i_pow;
            Ok(out)
        }
        None => {
            let tol = tol.with_max_subdivisions(tol.max_subdivisions.max(DIRECT_MIN_SUBDIVISIONS));
            let nf = n as f64;
            let reflected = params.reflected();
            let f = |z: f64| -> Complex64 {
                if z == 0.0 {
                    return if n == 0 { Complex64::new(1.0 / PI, 0.0) } else { Complex64::zero() };
                }
                let e = Complex64::new(0.0, z * x) + psi_direct(z, &reflected);
                i_pow * z.powf(nf) * e.exp() / PI
            };
            let env = TailEnvelope::new(FRAC_PI_2, 1.0).with_bound(1.0 / PI, nf);
            let u = truncation_point(&env, tol.abs_tol)?;
            let env = env.with_frequency(x.abs() + params.beta.abs() * (u.ln().abs() + 1.0));
            integrate_damped_tail(f, &env, &tol)
        }
    }
}

/// Angle of the ray used by [`ray_laplace`] for `exp(ivu - c u^α)` with
/// `arg c = phase`: half-way from the real axis to the edge of the sector
/// in which both factors decay, on the side where `e^{ivu}` decays.
pub fn ray_angle(v: f64, phase: f64, alpha: f64) -> f64 {
    let upper = (FRAC_PI_2 - phase) / alpha;
    let lower = (-FRAC_PI_2 - phase) / alpha;
    if v > 0.0 {
        0.5 * upper.min(FRAC_PI_2)
    } else if v < 0.0 {
        0.5 * lower.max(-FRAC_PI_2)
    } else {
        -phase / alpha
    }
}

/// Log of `∫_0^∞ t^n exp(-a t - r t^p) dt` on a geometric grid; the L1 mass
/// of the integrand along a ray, up to the common prefactor.
fn ln_ray_mass(n: f64, a: f64, r: f64, p: f64) -> f64 {
    let terms = (0..=240).map(|k| {
        let ln_t = -30.0 + 0.25 * k as f64;
        let t = ln_t.exp();
        (n + 1.0) * ln_t - a * t - r * t.powf(p)
    });
    let (max, last) = terms.clone().fold((f64::NEG_INFINITY, 0.0), |(m, _), x| (m.max(x), x));
    if !max.is_finite() || last > max - 40.0 {
        return f64::INFINITY;
    }
    max + terms.map(|x| (x - max).exp()).sum::<f64>().ln() + (0.25f64).ln()
}

/// Ray angle for [`ray_laplace`]: among [`ray_angle`] and interior points of
/// the admissible range, the one with the least integrand mass. For α ≤ 1
/// `e^{ivu}` must not grow along the ray; for α > 1 the power term
/// dominates and a slow growth is allowed.
/// Largest value of `g t - (r/2) t^α` over `t ≥ 0` (α > 1, g > 0).
fn ray_growth(g: f64, r: f64, alpha: f64) -> f64 {
    let t_star = (2.0 * g / (r * alpha)).powf(1.0 / (alpha - 1.0));
    (g * t_star - 0.5 * r * t_star.powf(alpha)).max(0.0)
}

/// Admissible growth of `e^{ivu}` along the ray, in units of its log.
const MAX_RAY_GROWTH: f64 = 10.0;

fn choose_ray(v: f64, modulus: f64, phase: f64, alpha: f64, n: f64) -> f64 {
    let mut lo = ((-FRAC_PI_2 - phase) / alpha).max(-FRAC_PI_2);
    let mut hi = ((FRAC_PI_2 - phase) / alpha).min(FRAC_PI_2);
    if alpha <= 1.0 {
        if v > 0.0 {
            lo = lo.max(0.0);
        } else if v < 0.0 {
            hi = hi.min(0.0);
        }
    }
    let score = |w: f64| {
        let r = modulus * (alpha * w + phase).cos();
        let a = v * w.sin();
        if !(r > 0.0) || (a < 0.0 && !(ray_growth(-a, r, alpha) <= MAX_RAY_GROWTH)) {
            return f64::INFINITY;
        }
        ln_ray_mass(n, a, r, alpha)
    };
    let first = ray_angle(v, phase, alpha);
    let mut best = (score(first), first);
    if hi > lo {
        for i in 0..12 {
            let w = lo + (hi - lo) * (i as f64 + 0.5) / 12.0;
            let sc = score(w);
            if sc < best.0 {
                best = (sc, w);
            }
        }
    }
    best.1
}

/// `scale · ∫_0^∞ u^n exp(ivu - c u^α) du` for `Re c > 0`.
///
/// The integrand is analytic off the negative axis, so the integral may be
/// taken along any ray `u = t e^{iω}` in the sector where `|exp(-c u^α)|`
/// still decays. Along the real axis it only decays like `exp(-Re(c) u^α)`,
/// which for small α leaves an oscillatory integral with cancellation of many
/// orders of magnitude. The ray is chosen to minimize `∫|integrand|`.
pub fn ray_laplace(
    v: f64,
    c: Complex64,
    alpha: f64,
    n: u32,
    scale: f64,
    tol: &ToleranceSpec,
) -> Result<QuadratureOutcome<Complex64>> {
    if !(c.re > 0.0) || !(alpha > 0.0) || !v.is_finite() {
        return Err(domain("ray_laplace", format!("need Re c > 0, alpha > 0, finite v; got c = {c}, alpha = {alpha}")));
    }
    let tol = tol.with_max_subdivisions(tol.max_subdivisions.max(DIRECT_MIN_SUBDIVISIONS));
    let nf = n as f64;
    let (modulus, phase) = c.to_polar();
    let omega = choose_ray(v, modulus, phase, alpha, nf);
    let turn = Complex64::from_polar(1.0, omega);
    let lead = scale * Complex64::from_polar(1.0, nf * omega) * turn;
    let f = |t: f64| -> Complex64 {
        if t == 0.0 {
            return if n == 0 { lead } else { Complex64::zero() };
        }
        let e = Complex64::new(0.0, v) * turn * t - Complex64::from_polar(modulus * t.powf(alpha), alpha * omega + phase);
        lead * t.powf(nf) * e.exp()
    };
    let rate = modulus * (alpha * omega + phase).cos();
    let linear = v * omega.sin();
    let env = if linear >= 0.0 {
        let by_power = TailEnvelope::new(rate, alpha).with_bound(scale, nf);
        if linear > 0.0 {
            let by_linear = TailEnvelope::new(linear, 1.0).with_bound(scale, nf);
            if truncation_point(&by_linear, tol.abs_tol)? < truncation_point(&by_power, tol.abs_tol)? {
                by_linear
            } else {
                by_power
            }
        } else {
            by_power
        }
    } else {
        let growth = ray_growth(-linear, rate, alpha);
        TailEnvelope::new(0.5 * rate, alpha).with_bound(scale * growth.exp(), nf)
    };
    let u = truncation_point(&env, tol.abs_tol)?;
    let sweep = modulus * (alpha * omega + phase).sin().abs();
    let chirp = alpha * sweep * if alpha > 1.0 { u.powf(alpha - 1.0) } else { 1.0 };
    let env = env.with_frequency(v.abs() * omega.cos() + chirp);
    integrate_damped_tail(f, &env, &tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(alpha: f64, beta: f64) -> KernelParams {
        KernelParams::new(alpha, beta).unwrap()
    }

    fn oracle_tol() -> ToleranceSpec {
        ToleranceSpec::new(1e-11, 1e-13, 400_000).unwrap()
    }

    #[test]
    fn kappa_branches() {
        assert_eq!(kappa_of(0.5).unwrap(), 0.5);
        assert_eq!(kappa_of(1.5).unwrap(), -0.5);
        assert!(kappa_of(1.0).is_err());
        assert!(kappa_of(2.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(KernelParams::new(0.0, 0.0).is_err());
        assert!(KernelParams::new(1.2, 1.5).is_err());
        let k = p(1.5, 1.0);
        assert_eq!(k.kappa(), Some(-0.5));
        assert_relative_eq!(k.theta().unwrap(), -1.0 / 3.0);
        assert_eq!(p(1.0, 0.3).theta(), None);
        assert_eq!(p(0.7, 1.0 - 1e-15).beta(), 1.0);
    }

    #[test]
    fn u_alpha_values() {
        assert_relative_eq!(u_alpha(0.5, &p(0.5, 0.0)).unwrap(), 0.707_106_781_186_547_5, epsilon = 1e-14);
        // θ = 0.5 at α = 0.5 needs β = 0.5; the first factor vanishes at φ = -θ.
        let k = p(0.5, 0.5);
        assert!(u_alpha(-0.5 + 1e-12, &k).unwrap().abs() < 1e-10);
        let k = p(1.5, 1.0);
        assert_relative_eq!(u_alpha(0.5, &k).unwrap(), 8.242_640_687_119_285, max_relative = 1e-13);
        assert!(u_alpha(0.2, &k).is_err());
        assert!(u_alpha(0.5, &p(1.0, 0.5)).is_err());
    }

    #[test]
    fn u_one_values() {
        assert_relative_eq!(u_one(0.0, 0.7).unwrap(), FRAC_PI_2, epsilon = 1e-15);
        assert_relative_eq!(u_one(0.5, 0.5).unwrap(), 140.933_854_582_277_47, max_relative = 1e-13);
        assert!(u_one(1.0, 0.5).is_err());
        assert!(u_one(-1.0, 0.5).is_err());
        // β = 1: e^{-x/β} U_1 stays bounded as φ → -1, so the weight does too.
        let u = u_one(-1.0 + 1e-9, 1.0).unwrap();
        assert!(u.is_finite() && u < 2.0);
    }

    #[test]
    fn radius_values() {
        let wide = KernelParams::alpha_one_path(2.0).unwrap();
        assert_relative_eq!(contour_radius(0.0, 1.0, &wide).unwrap(), 0.606_530_659_712_633_4, epsilon = 1e-15);
        assert_relative_eq!(contour_radius_deriv(0.0, 1.0, &wide).unwrap(), 0.476_368_066_182_545, epsilon = 1e-14);
        // θ = 1 at α = 0.5 (β = 1), x = 2.
        let k = p(0.5, 1.0);
        assert_relative_eq!(contour_radius(0.0, 2.0, &k).unwrap(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(contour_radius_deriv(0.0, 2.0, &k).unwrap(), 0.125, epsilon = 1e-14);
        let tau = contour_radius(-FRAC_PI_2 + 1e-7, 0.0, &p(1.0, 1.0)).unwrap();
        assert_relative_eq!(tau, (-1.0f64).exp(), max_relative = 1e-6);
        assert!(contour_radius(0.0, -1.0, &k).is_err());
        assert!(contour_radius(0.0, 1.0, &p(1.0, 0.0)).is_err());
        assert!(KernelParams::alpha_one_path(0.0).is_err());
    }

    #[test]
    fn tau_values() {
        assert_relative_eq!(tau_of(2.0, &p(0.5, 0.0)).unwrap(), 0.0625, epsilon = 1e-15);
        assert_relative_eq!(tau_of(0.0, &p(1.0, 0.5)).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(tau_of(3.0, &p(1.5, 0.0)).unwrap(), 4.0, epsilon = 1e-14);
        assert!(tau_of(0.0, &p(0.5, 0.0)).is_err());
    }

    #[test]
    fn weights_at_lower_end() {
        // (n+1)(φ+1) = 0 at φ = -1, so V_0 → r and W_0 → -r'.
        let k = p(1.0, 1.0);
        let phi = -1.0 + 1e-9;
        let ang = FRAC_PI_2 * phi;
        let r = contour_radius(ang, 0.0, &k).unwrap();
        let dr = contour_radius_deriv(ang, 0.0, &k).unwrap();
        assert_relative_eq!(v_weight(phi, 0, 0.0, &k).unwrap(), r, max_relative = 1e-6);
        assert_relative_eq!(w_weight(phi, 0, 0.0, &k).unwrap(), -dr, max_relative = 1e-6, epsilon = 1e-9);
    }

    #[test]
    fn weights_match_high_precision() {
        // 50-digit references.
        let wide = KernelParams::alpha_one_path(2.0).unwrap();
        assert_relative_eq!(v_weight(0.0, 2, 1.0, &wide).unwrap(), -0.175_246_017_979_155_3, max_relative = 1e-14);
        assert_relative_eq!(w_weight(0.0, 2, 1.0, &wide).unwrap(), -0.223_130_160_148_429_83, max_relative = 1e-14);
    }

    #[test]
    fn cot_gap_series_matches_direct() {
        for a in [0.3, 0.7, 1.4, 1.9] {
            let u = FRAC_PI_2 * EDGE * 0.999;
            let direct = a / (a * u).tan() - 1.0 / u.tan();
            assert_relative_eq!(cot_gap(a, u), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn psi_values() {
        let v = psi_direct(4.0, &p(0.5, 0.0));
        assert_relative_eq!(v.re, -2.0, epsilon = 1e-15);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
        let v = psi_direct(1.0, &p(1.0, 1.0));
        assert_relative_eq!(v.re, -FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(v.im, 0.0);
        let v = psi_direct(1.0, &p(1.5, 1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(v.re, -h, epsilon = 1e-15);
        assert_relative_eq!(v.im, -h, epsilon = 1e-15);
    }

    #[test]
    fn log_space_integrand_matches_weights() {
        for (a, b, x, n, phi) in [(0.6, 0.3, 1.3, 2u32, 0.1), (1.4, -0.4, 0.8, 1, 0.5), (1.0, 0.6, -0.5, 3, 0.2)] {
            let k = p(a, b);
            let integ = AngularIntegrand::new(k, x, n);
            let e = if k.is_alpha_one() {
                (-x / b).exp() * u_one(phi, b).unwrap()
            } else {
                x.powf(a / (a - 1.0)) * u_alpha(phi, &k).unwrap()
            };
            let sign = if a > 1.0 { -0.5 } else { 0.5 };
            let got = integ.eval(phi);
            assert_relative_eq!(got.re, sign * (-e).exp() * v_weight(phi, n, x, &k).unwrap(), max_relative = 1e-11);
            assert_relative_eq!(got.im, sign * (-e).exp() * w_weight(phi, n, x, &k).unwrap(), max_relative = 1e-11);
        }
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        let scale = 1.0 + b.re.abs().max(b.im.abs());
        assert!((a.re - b.re).abs() <= tol * scale && (a.im - b.im).abs() <= tol * scale, "{a} vs {b}");
    }

    #[test]
    fn symmetric_half_stable_matches_oracle() {
        let k = p(0.5, 0.0);
        let tol = ToleranceSpec::default();
        let fin = h_n(1.0, 0, &k, &tol).unwrap();
        let dir = h_n_direct(1.0, 0, &k, &oracle_tol()).unwrap();
        assert_eq!(fin.method, KernelMethod::FiniteInterval);
        assert_close(fin.value, dir, 1e-8);
        assert!(fin.value.re >= 0.0);
    }

    #[test]
    fn alpha_one_beta_one_matches_oracle() {
        let k = p(1.0, 1.0);
        let fin = h_n(0.0, 0, &k, &ToleranceSpec::default()).unwrap();
        let dir = h_n_direct(0.0, 0, &k, &oracle_tol()).unwrap();
        assert_close(fin.value, dir, 1e-7);
    }

    #[test]
    fn totally_skewed_alpha_above_one_matches_oracle() {
        let k = p(1.8, -1.0);
        let fin = h_n(2.0, 3, &k, &ToleranceSpec::default()).unwrap();
        let dir = h_n_direct(2.0, 3, &k, &oracle_tol()).unwrap();
        assert_close(fin.value, dir, 1e-6);
    }

    #[test]
    fn imaginary_axis_case() {
        let k = p(0.5, -1.0);
        let fin = h_n(1.0, 1, &k, &ToleranceSpec::default()).unwrap();
        assert_eq!(fin.method, KernelMethod::ImaginaryAxis);
        assert_eq!(fin.value.re, 0.0);
        let dir = h_n_direct(1.0, 1, &k, &oracle_tol()).unwrap();
        assert_close(fin.value, dir, 1e-7);
    }

    #[test]
    fn exceptional_term_is_needed() {
        let k = p(0.7, 1.0);
        let tol = ToleranceSpec::default();
        let full = h_n(1.0, 1, &k, &tol).unwrap().value;
        let dir = h_n_direct(1.0, 1, &k, &oracle_tol()).unwrap();
        assert_close(full, dir, 1e-6);
        let bare = h_n_angular(1.0, 1, &k, &tol).unwrap();
        assert!((bare.value.im - dir.im).abs() > 1e-3);
        assert_eq!(h_n_angular(1.0, 1, &p(0.7, 0.5), &tol).unwrap().value, h_n(1.0, 1, &p(0.7, 0.5), &tol).unwrap().value);
    }

    #[test]
    fn rotated_ray_matches_real_axis() {
        // Real-axis quadrature of the defining integrand where it is well damped.
        for (a, b, x, n) in [(1.5, 0.4, 1.0, 0u32), (1.7, -1.0, 0.5, 2), (0.9, 0.5, -0.7, 1), (1.3, 0.0, 0.0, 3)] {
            let k = p(a, b);
            let reflected = k.reflected();
            let i_pow = Complex64::new(0.0, 1.0).powu(n);
            let f = |z: f64| {
                if z == 0.0 {
                    return Complex64::new(if n == 0 { 1.0 / PI } else { 0.0 }, 0.0);
                }
                i_pow * z.powi(n as i32) * (Complex64::new(0.0, z * x) + psi_direct(z, &reflected)).exp() / PI
            };
            let pts: Vec<f64> = (0..=4000).map(|i| 60.0 * i as f64 / 4000.0).collect();
            let real_axis = integrate_breakpoints(f, &pts, &ToleranceSpec::default()).unwrap().value;
            assert_close(h_n_direct(x, n, &k, &oracle_tol()).unwrap(), real_axis, 1e-9);
        }
    }

    #[test]
    fn near_one_uses_direct() {
        let r = h_n(0.7, 0, &p(1.002, 0.3), &ToleranceSpec::default()).unwrap();
        assert_eq!(r.method, KernelMethod::DirectFallback);
        assert!(r.value.re > 0.0);
    }

    #[test]
    fn preconditions() {
        let tol = ToleranceSpec::default();
        assert!(h_n(0.0, 0, &p(0.5, 0.0), &tol).is_err());
        assert!(h_n(-1.0, 0, &p(1.5, 0.0), &tol).is_err());
        assert!(h_n(1.0, 0, &p(1.0, 0.0), &tol).is_err());
        assert!(h_n(1.0, 0, &p(1.0, -0.5), &tol).is_err());
    }

    #[test]
    fn first_derivative_by_finite_difference() {
        let k = p(1.3, 0.5);
        let tol = ToleranceSpec::new(1e-13, 1e-15, 4000).unwrap();
        let x = 0.7;
        let step = 1e-4;
        let up = h_n(x + step, 0, &k, &tol).unwrap().value.re;
        let dn = h_n(x - step, 0, &k, &tol).unwrap().value.re;
        let fd = (up - dn) / (2.0 * step);
        let d1 = h_n(x, 1, &k, &tol).unwrap().value.re;
        assert_relative_eq!(d1, fd, max_relative = 1e-5);
    }

    fn any_params() -> impl Strategy<Value = KernelParams> {
        (0.05f64..1.95, -1.0f64..=1.0)
            .prop_filter("alpha away from 1", |(a, _)| (a - 1.0).abs() > 1e-6)
            .prop_map(|(a, b)| p(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn theta_bound(k in any_params()) {
            let a = k.alpha();
            prop_assert!(k.theta().unwrap().abs() <= 1.0f64.min(2.0 / a - 1.0) + 1e-15);
        }

        #[test]
        fn radius_derivative_matches_finite_difference(
            a in 0.2f64..1.9, b in -0.9f64..0.9, x in 0.2f64..4.0, u in 0.05f64..0.95,
        ) {
            prop_assume!((a - 1.0).abs() > 0.05);
            let k = p(a, b);
            let theta = k.theta().unwrap();
            let lo = -FRAC_PI_2 * theta;
            let angle = lo + (FRAC_PI_2 - lo) * u;
            let h = 1e-6;
            let fd = (contour_radius(angle + h, x, &k).unwrap() - contour_radius(angle - h, x, &k).unwrap()) / (2.0 * h);
            let d = contour_radius_deriv(angle, x, &k).unwrap();
            prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-3), "{} vs {}", d, fd);
        }

        #[test]
        fn alpha_one_radius_derivative(b in 0.1f64..1.0, x in -2.0f64..2.0, u in 0.05f64..0.95) {
            let k = p(1.0, b);
            let angle = -FRAC_PI_2 + PI * u;
            let h = 1e-6;
            let fd = (contour_radius(angle + h, x, &k).unwrap() - contour_radius(angle - h, x, &k).unwrap()) / (2.0 * h);
            let d = contour_radius_deriv(angle, x, &k).unwrap();
            prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1e-3));
        }

        #[test]
        fn agrees_with_ray_integral(
            a in 0.1f64..1.98, b in -1.0f64..=1.0, edge in 0usize..4, lx in -4.6f64..2.5, n in 0u32..4,
        ) {
            prop_assume!((a - 1.0).abs() > 0.006);
            let b = match edge { 0 => 1.0, 1 => -1.0, _ => b };
            let x = lx.exp();
            let k = p(a, b);
            let fin = h_n(x, n, &k, &ToleranceSpec::default()).unwrap().value;
            let dir = h_n_direct(x, n, &k, &oracle_tol()).unwrap();
            let allowed = 1e-6 * (1.0 + dir.norm());
            prop_assert!((fin.re - dir.re).abs() <= allowed && (fin.im - dir.im).abs() <= allowed, "{} vs {}", fin, dir);
        }

        #[test]
        fn alpha_one_agrees_with_ray_integral(b in 0.02f64..=1.0, one in proptest::bool::ANY, x in -6.0f64..6.0, n in 0u32..4) {
            let k = p(1.0, if one { 1.0 } else { b });
            let fin = h_n(x, n, &k, &ToleranceSpec::default()).unwrap().value;
            let dir = h_n_direct(x, n, &k, &oracle_tol()).unwrap();
            let allowed = 1e-6 * (1.0 + dir.norm());
            prop_assert!((fin.re - dir.re).abs() <= allowed && (fin.im - dir.im).abs() <= allowed, "{} vs {}", fin, dir);
        }

        #[test]
        fn density_value_is_nonnegative(a in 0.3f64..1.9, b in -1.0f64..=1.0, x in 0.05f64..6.0) {
            prop_assume!((a - 1.0).abs() > 0.01);
            let r = h_n(x, 0, &p(a, b), &ToleranceSpec::default()).unwrap();
            prop_assert!(r.value.re >= -1e-10, "{:?}", r);
        }
    }
}
