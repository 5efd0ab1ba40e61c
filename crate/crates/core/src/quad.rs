//! One-dimensional integration engines.
//!
//! [`integrate_breakpoints`] is a globally adaptive Gauss–Kronrod (10/21
//! point) integrator: the panel with the largest error estimate is bisected
//! until the summed estimate meets the tolerance or the subdivision budget is
//! spent. Both rules only use interior nodes, so integrands may be singular
//! (or merely undefined) at the panel endpoints.
//!
//! [`integrate_damped_tail`] handles `∫_0^∞ f` for integrands bounded by
//! `M u^k exp(-c u^p)`. The range is truncated where the envelope tail drops
//! below the absolute tolerance, and the finite part is split geometrically
//! towards the origin and, if a frequency hint is given, into panels of one
//! oscillation period.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{domain, Error, Result};

/// Requested accuracy of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections performed after the initial partition.
    pub max_subdivisions: usize,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl ToleranceSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(domain("ToleranceSpec", format!("rel_tol must be > 0, got {rel_tol}")));
        }
        if !(abs_tol >= 0.0) || !abs_tol.is_finite() {
            return Err(domain("ToleranceSpec", format!("abs_tol must be >= 0, got {abs_tol}")));
        }
        if max_subdivisions == 0 {
            return Err(domain("ToleranceSpec", "max_subdivisions must be >= 1"));
        }
        Ok(ToleranceSpec {
            rel_tol,
            abs_tol,
            max_subdivisions,
        })
    }

    /// Error level accepted for an integral of magnitude `magnitude`.
    pub fn target(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude)
    }

    /// Copy with a different subdivision budget.
    pub fn with_max_subdivisions(self, max_subdivisions: usize) -> Self {
        ToleranceSpec {
            max_subdivisions: max_subdivisions.max(1),
            ..self
        }
    }
}

/// Result of an integration. `converged == false` means the subdivision
/// budget ran out (or round-off prevented further progress); `value` is then
/// the best available estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOutcome<T = f64> {
    pub value: T,
    pub err_est: f64,
    pub n_evals: usize,
    pub converged: bool,
}

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
    /// One Neumaier-compensated summation step.
    fn compensated_add(sum: &mut Self, comp: &mut Self, x: Self);
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
    fn compensated_add(sum: &mut Self, comp: &mut Self, x: Self) {
        neumaier(sum, comp, x);
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    // Componentwise maximum: tolerances apply to each part separately.
    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn compensated_add(sum: &mut Self, comp: &mut Self, x: Self) {
        neumaier(&mut sum.re, &mut comp.re, x.re);
        neumaier(&mut sum.im, &mut comp.im, x.im);
    }
}

// Kronrod 21-point abscissae on [-1, 1] (positive half, descending); the
// odd-indexed entries are the 10-point Gauss abscissae.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_980_515_730,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const EVALS_PER_PANEL: usize = 21;

#[derive(Clone, Copy)]
struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Gauss–Kronrod 10/21 on one panel. Returns the panel and whether it can
/// still be improved by bisection.
fn gk21<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Result<(Panel<T>, bool)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<T> {
        let v = f(x);
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(Error::NonFinite { abscissa: x })
        }
    };
    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = T::zero();
    let mut res_abs = fc.magnitude() * WGK[10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        let s = f1 + f2;
        res_k = res_k + s * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + s * WG[j / 2];
        }
    }
    let value = res_k * half;
    let err = ((res_k - res_g) * half).magnitude();
    let roundoff = 50.0 * f64::EPSILON * res_abs * half.abs();
    let mid = center;
    let splittable = mid > a && mid < b && err > roundoff;
    Ok((
        Panel {
            a,
            b,
            value,
            err: err.max(roundoff),
        },
        splittable,
    ))
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy)]
struct Accum<T> {
    sum: T,
    comp: T,
}

impl<T: QuadValue> Accum<T> {
    fn new() -> Self {
        Accum {
            sum: T::zero(),
            comp: T::zero(),
        }
    }
    fn add(&mut self, x: T) {
        T::compensated_add(&mut self.sum, &mut self.comp, x);
    }
    fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Adaptive integration over `[a, b]`.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: &ToleranceSpec,
) -> Result<QuadratureOutcome> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(domain("integrate_interval", format!("need finite a < b, got [{a}, {b}]")));
    }
    integrate_breakpoints(f, &[a, b], tol)
}

/// Adaptive integration over `[points[0], points[last]]` with the given
/// initial partition. Points must be finite and non-decreasing; repeated
/// points are skipped.
pub fn integrate_breakpoints<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    points: &[f64],
    tol: &ToleranceSpec,
) -> Result<QuadratureOutcome<T>> {
    if points.len() < 2 {
        return Err(domain("integrate_breakpoints", "need at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
        return Err(domain("integrate_breakpoints", "points must be finite and sorted"));
    }
    if !(points[0] < points[points.len() - 1]) {
        return Err(domain("integrate_breakpoints", "empty interval"));
    }

    let mut settled = Accum::new();
    let mut settled_err = 0.0;
    let mut heap: BinaryHeap<Panel<T>> = BinaryHeap::new();
    let mut active = Accum::new();
    let mut active_err = 0.0;
    let mut n_evals = 0;

    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (panel, splittable) = gk21(&f, w[0], w[1])?;
        n_evals += EVALS_PER_PANEL;
        if splittable {
            active.add(panel.value);
            active_err += panel.err;
            heap.push(panel);
        } else {
            settled.add(panel.value);
            settled_err += panel.err;
        }
    }

    let mut subdivisions = 0;
    let mut converged = false;
    loop {
        let total = settled.total() + active.total();
        let err = settled_err + active_err;
        if err <= tol.target(total.magnitude()) {
            converged = true;
            break;
        }
        if subdivisions >= tol.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let (left, ls) = gk21(&f, worst.a, mid)?;
        let (right, rs) = gk21(&f, mid, worst.b)?;
        n_evals += 2 * EVALS_PER_PANEL;
        subdivisions += 1;
        active.add(worst.value * -1.0);
        active_err -= worst.err;
        for (panel, splittable) in [(left, ls), (right, rs)] {
            if splittable {
                active.add(panel.value);
                active_err += panel.err;
                heap.push(panel);
            } else {
                settled.add(panel.value);
                settled_err += panel.err;
            }
        }
    }

    // Re-sum the remaining panels to remove drift from the running totals.
    let mut value = settled;
    let mut err_est = settled_err;
    for p in heap.iter() {
        value.add(p.value);
        err_est += p.err;
    }
    let value = value.total();
    if !converged {
        converged = err_est <= tol.target(value.magnitude());
    }
    Ok(QuadratureOutcome {
        value,
        err_est,
        n_evals,
        converged,
    })
}

/// Bound `|f(u)| ≤ bound · u^degree · exp(-rate · u^power)` on `[0, ∞)`.
///
/// `frequency` is an optional angular-frequency hint for oscillatory
/// integrands (0 disables period-based panelling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEnvelope {
    pub rate: f64,
    pub power: f64,
    pub bound: f64,
    pub degree: f64,
    pub frequency: f64,
}

impl TailEnvelope {
    pub fn new(rate: f64, power: f64) -> Self {
        TailEnvelope {
            rate,
            power,
            bound: 1.0,
            degree: 0.0,
            frequency: 0.0,
        }
    }

    pub fn with_bound(self, bound: f64, degree: f64) -> Self {
        TailEnvelope {
            bound,
            degree,
            ..self
        }
    }

    pub fn with_frequency(self, frequency: f64) -> Self {
        TailEnvelope { frequency, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(domain("TailEnvelope", format!("rate must be > 0, got {}", self.rate)));
        }
        if !(self.power > 0.0) || !self.power.is_finite() {
            return Err(domain("TailEnvelope", format!("power must be > 0, got {}", self.power)));
        }
        if !(self.bound >= 0.0) || !(self.degree > -1.0) {
            return Err(domain("TailEnvelope", "need bound >= 0 and degree > -1"));
        }
        Ok(())
    }

    /// `ln ∫_U^∞ M u^k e^{-c u^p} du` expressed through `t = c U^p`.
    fn ln_tail_at(&self, t: f64) -> f64 {
        let s = (self.degree + 1.0) / self.power;
        let q = gamma_ur(s, t);
        self.bound.ln() - self.power.ln() - s * self.rate.ln() + ln_gamma(s) + q.ln()
    }

    /// Upper bound on the envelope mass beyond `u`.
    pub fn tail_mass(&self, u: f64) -> f64 {
        if self.bound == 0.0 {
            return 0.0;
        }
        self.ln_tail_at(self.rate * u.powf(self.power)).exp()
    }
}

/// Smallest `U` (to bisection accuracy) with envelope tail mass beyond `U`
/// at most `abs_tol`.
pub fn truncation_point(env: &TailEnvelope, abs_tol: f64) -> Result<f64> {
    env.validate()?;
    if env.bound == 0.0 {
        return Ok(1.0);
    }
    let ln_target = abs_tol.max(1e-300).ln();
    let s = (env.degree + 1.0) / env.power;
    let mut lo = 0.0;
    let mut hi = s.max(1.0);
    while env.ln_tail_at(hi) > ln_target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if env.ln_tail_at(mid) > ln_target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok((hi / env.rate).powf(1.0 / env.power))
}

const GEOMETRIC_LEVELS: i32 = 48;
const TAIL_SHARE: f64 = 0.1;
const MAX_OSCILLATION_PANELS: f64 = 4.0e6;

/// Integrate `f` over `[0, ∞)` given an envelope bounding it. The reported
/// error includes the envelope tail beyond the truncation point, which is
/// held to a tenth of the absolute tolerance.
pub fn integrate_damped_tail<T: QuadValue, F: Fn(f64) -> T>(
    f: F,
    env: &TailEnvelope,
    tol: &ToleranceSpec,
) -> Result<QuadratureOutcome<T>> {
    let u_max = truncation_point(env, TAIL_SHARE * tol.abs_tol)?;
    let mut geometric: Vec<f64> = (0..=GEOMETRIC_LEVELS)
        .rev()
        .map(|j| u_max * 0.5f64.powi(j))
        .collect();
    geometric.insert(0, 0.0);

    let mut points = Vec::with_capacity(geometric.len());
    points.push(0.0);
    let period = if env.frequency > 0.0 {
        let p = 2.0 * std::f64::consts::PI / env.frequency;
        p.max(u_max / MAX_OSCILLATION_PANELS)
    } else {
        f64::INFINITY
    };
    for w in geometric.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) / period).ceil().max(1.0) as usize;
        for i in 1..=pieces {
            points.push(if i == pieces { b } else { a + (b - a) * i as f64 / pieces as f64 });
        }
    }

    let mut outcome = integrate_breakpoints(f, &points, tol)?;
    outcome.err_est += env.tail_mass(u_max);
    outcome.converged = outcome.converged && outcome.err_est <= tol.target(outcome.value.magnitude());
    Ok(outcome)
}
