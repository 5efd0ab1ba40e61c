//! Discrete spectral measures and the per-direction parameters of their
//! one-dimensional projections.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::kernel::kappa_of;
use crate::projection::beta_to_b;

/// Multivariate parameterization of a measure's shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    A,
    M,
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::A => "A",
            Representation::M => "M",
        })
    }
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Representation::A),
            "M" | "m" => Ok(Representation::M),
            _ => Err(domain("Representation", format!("expected A or M, got {s:?}"))),
        }
    }
}

/// Tolerance on `‖s‖ - 1` accepted by [`UnitVector::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(domain("UnitVector", "dimension must be at least 2"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(domain("UnitVector", "components must be finite"));
        }
        let norm = norm(&components);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(domain("UnitVector", format!("norm is {norm}, not 1")));
        }
        Ok(UnitVector(components))
    }

    /// Scales a nonzero vector onto the sphere.
    pub fn normalized(components: Vec<f64>) -> Result<Self> {
        let n = norm(&components);
        if !(n > 0.0) || !n.is_finite() {
            return Err(domain("UnitVector", "cannot normalize a zero or non-finite vector"));
        }
        UnitVector::new(components.into_iter().map(|c| c / n).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        UnitVector::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: UnitVector,
    pub weight: f64,
}

/// A spectral measure with finitely many atoms, plus the shift vector of
/// its representation (`μ` for (A), `μ0` for (M)).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpectralMeasure {
    alpha: f64,
    rep: Representation,
    atoms: Vec<Atom>,
    shift: Vec<f64>,
}

impl DiscreteSpectralMeasure {
    pub fn new(alpha: f64, rep: Representation, atoms: Vec<Atom>, shift: Vec<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(domain("DiscreteSpectralMeasure", format!("alpha must lie in (0, 2), got {alpha}")));
        }
        let Some(first) = atoms.first() else {
            return Err(domain("DiscreteSpectralMeasure", "at least one atom is required"));
        };
        let dim = first.point.dim();
        for atom in &atoms {
            if atom.point.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: atom.point.dim(),
                });
            }
            if !(atom.weight > 0.0 && atom.weight.is_finite()) {
                return Err(domain("DiscreteSpectralMeasure", format!("weights must be positive, got {}", atom.weight)));
            }
        }
        if shift.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: shift.len(),
            });
        }
        if shift.iter().any(|c| !c.is_finite()) {
            return Err(domain("DiscreteSpectralMeasure", "shift must be finite"));
        }
        Ok(DiscreteSpectralMeasure {
            alpha,
            rep,
            atoms,
            shift,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].point.dim()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `Σ w_i s_i`.
    pub fn resultant(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.dim()];
        for atom in &self.atoms {
            for (acc, s) in r.iter_mut().zip(atom.point.as_slice()) {
                *acc += atom.weight * s;
            }
        }
        r
    }

    /// Rank of the matrix whose rows are the atoms.
    pub fn rank(&self) -> usize {
        let d = self.dim();
        let rows = self.atoms.len();
        let m = DMatrix::from_fn(rows, d, |i, j| self.atoms[i].point.as_slice()[j]);
        m.rank(1e-10)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.rank() == self.dim()
    }

    /// Errors unless the atoms span `ℝ^d`.
    pub fn require_full_dimensional(&self) -> Result<()> {
        let rank = self.rank();
        if rank < self.dim() {
            return Err(Error::Degenerate(format!(
                "atoms span a subspace of dimension {rank} in R^{}",
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn with_shift(&self, shift: Vec<f64>) -> Result<Self> {
        DiscreteSpectralMeasure::new(self.alpha, self.rep, self.atoms.clone(), shift)
    }
}

/// Parameters of the projection `⟨X, t⟩` in each one-dimensional form.
///
/// At α = 1 the (A) and (M) forms coincide and `mu_m` and `mu_am` equal
/// `mu_mm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionFunctionals {
    pub sigma: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma_b: f64,
    pub beta_b: f64,
    pub mu_b: f64,
    pub mu_m: f64,
    pub mu_am: f64,
    pub mu_mm: f64,
    /// Every atom is orthogonal to `t`, so `σ(t) = 0`.
    pub degenerate: bool,
}

/// Functionals at a unit direction.
pub fn functionals_at(t: &UnitVector, m: &DiscreteSpectralMeasure) -> Result<DirectionFunctionals> {
    functionals_along(t.as_slice(), m)
}

/// Functionals at an arbitrary vector `t`; the defining sums make sense for
/// any `t`, which is what the homogeneity relations are stated for.
pub fn functionals_along(t: &[f64], m: &DiscreteSpectralMeasure) -> Result<DirectionFunctionals> {
    if t.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: t.len(),
        });
    }
    let a = m.alpha();
    let mut mass = 0.0;
    let mut signed = 0.0;
    let mut linear = 0.0;
    let mut log_sum = 0.0;
    for atom in m.atoms() {
        let p = atom.point.dot(t);
        let w = atom.weight;
        let pa = p.abs().powf(a);
        mass += w * pa;
        signed += w * p.signum() * pa * f64::from(p != 0.0);
        linear += w * p;
        if p != 0.0 {
            log_sum += w * p * p.abs().ln();
        }
    }

    let degenerate = mass == 0.0;
    let sigma = mass.powf(1.0 / a);
    let beta = if degenerate { 0.0 } else { (signed / mass).clamp(-1.0, 1.0) };

    if a == 1.0 {
        let mu = -2.0 / PI * log_sum;
        let sigma_log = if degenerate { 0.0 } else { sigma * sigma.ln() };
        let mu_mm = mu + 2.0 / PI * beta * sigma_log;
        let sigma_b = 2.0 / PI * sigma;
        let mu_b = if degenerate { mu } else { sigma_b * beta * sigma_b.ln() + mu };
        return Ok(DirectionFunctionals {
            sigma,
            beta,
            mu,
            sigma_b,
            beta_b: beta,
            mu_b,
            mu_m: mu_mm,
            mu_am: mu_mm,
            mu_mm,
            degenerate,
        });
    }

    let tan = (FRAC_PI_2 * a).tan();
    let beta_b = beta_to_b(beta, a)?;
    let k = kappa_of(a)?;
    let sigma_b = sigma / (FRAC_PI_2 * k * beta_b).cos().powf(1.0 / a);
    let mu_m = sigma * beta * tan;
    let mu_am = -tan * linear;
    Ok(DirectionFunctionals {
        sigma,
        beta,
        mu: 0.0,
        sigma_b,
        beta_b,
        mu_b: 0.0,
        mu_m,
        mu_am,
        mu_mm: tan * (beta * sigma - linear),
        degenerate,
    })
}

/// Below this distance from α = 1 (and away from 1 itself) a change of
/// representation is refused: the shift grows like `tan(πα/2)`.
pub const CONVERSION_ALPHA_BAND: f64 = 1e-8;

/// Re-expresses the shift in another representation:
/// `μ0 = μ + tan(πα/2) Σ w_i s_i`, the shift that makes the two
/// characteristic functions equal. At α = 1 the two coincide.
pub fn convert_measure(m: &DiscreteSpectralMeasure, to: Representation) -> Result<DiscreteSpectralMeasure> {
    if to == m.rep() {
        return Ok(m.clone());
    }
    let a = m.alpha();
    let mut out = m.clone();
    out.rep = to;
    if a == 1.0 {
        return Ok(out);
    }
    if (a - 1.0).abs() < CONVERSION_ALPHA_BAND {
        return Err(Error::NearUnitAlpha { alpha: a });
    }
    let tan = (FRAC_PI_2 * a).tan();
    let sign = if to == Representation::M { 1.0 } else { -1.0 };
    for (s, r) in out.shift.iter_mut().zip(m.resultant()) {
        *s += sign * tan * r;
    }
    Ok(out)
}

/// Equal-weight atoms spread over the circle (d = 2, equally spaced angles)
/// or the sphere (d = 3, Fibonacci spiral), with zero shift.
pub fn uniform_measure(
    d: usize,
    n_atoms: usize,
    total_mass: f64,
    alpha: f64,
    rep: Representation,
) -> Result<DiscreteSpectralMeasure> {
    if n_atoms < 2 * d {
        return Err(domain("uniform_measure", format!("need at least {} atoms, got {n_atoms}", 2 * d)));
    }
    if !(total_mass > 0.0) {
        return Err(domain("uniform_measure", "total mass must be positive"));
    }
    let w = total_mass / n_atoms as f64;
    let points: Vec<Vec<f64>> = match d {
        2 => (0..n_atoms)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / n_atoms as f64).sin_cos();
                vec![c, s]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n_atoms)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / n_atoms as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * k as f64).sin_cos();
                    vec![r * c, r * s, z]
                })
                .collect()
        }
        _ => return Err(domain("uniform_measure", format!("supported for d = 2 or 3, got {d}"))),
    };
    let atoms = points
        .into_iter()
        .map(|p| {
            Ok(Atom {
                point: UnitVector::normalized(p)?,
                weight: w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DiscreteSpectralMeasure::new(alpha, rep, atoms, vec![0.0; d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uv(c: &[f64]) -> UnitVector {
        UnitVector::new(c.to_vec()).unwrap()
    }

    fn four_atoms(alpha: f64, rep: Representation) -> DiscreteSpectralMeasure {
        let atoms = [([1.0, 0.0], 0.5), ([0.6, 0.8], 0.3), ([-0.8, 0.6], 0.15), ([0.0, -1.0], 0.05)]
            .iter()
            .map(|(s, w)| Atom {
                point: uv(s),
                weight: *w,
            })
            .collect();
        DiscreteSpectralMeasure::new(alpha, rep, atoms, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn unit_vector_checks() {
        assert!(UnitVector::new(vec![1.0]).is_err());
        assert!(UnitVector::new(vec![1.0, 1e-5]).is_err());
        assert!(UnitVector::new(vec![f64::NAN, 1.0]).is_err());
        let u = UnitVector::normalized(vec![3.0, 4.0]).unwrap();
        assert_relative_eq!(u.as_slice()[0], 0.6);
        assert!(UnitVector::normalized(vec![0.0, 0.0]).is_err());
        assert_eq!(Vec::from(u), vec![0.6, 0.8]);
    }

    #[test]
    fn measure_validation() {
        let a = Atom {
            point: uv(&[1.0, 0.0]),
            weight: 1.0,
        };
        assert!(DiscreteSpectralMeasure::new(1.0, Representation::A, vec![], vec![0.0, 0.0]).is_err());
        assert!(DiscreteSpectralMeasure::new(2.0, Representation::A, vec![a.clone()], vec![0.0, 0.0]).is_err());
        assert!(DiscreteSpectralMeasure::new(1.0, Representation::A, vec![a.clone()], vec![0.0]).is_err());
        let bad = Atom {
            weight: 0.0,
            ..a.clone()
        };
        assert!(DiscreteSpectralMeasure::new(1.0, Representation::A, vec![bad], vec![0.0, 0.0]).is_err());
        let three = Atom {
            point: uv(&[0.0, 0.0, 1.0]),
            weight: 1.0,
        };
        assert!(matches!(
            DiscreteSpectralMeasure::new(1.0, Representation::A, vec![a.clone(), three], vec![0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let line = DiscreteSpectralMeasure::new(
            1.0,
            Representation::A,
            vec![
                a.clone(),
                Atom {
                    point: uv(&[-1.0, 0.0]),
                    weight: 2.0,
                },
            ],
            vec![0.0, 0.0],
        )
        .unwrap();
        assert_eq!(line.rank(), 1);
        assert!(matches!(line.require_full_dimensional(), Err(Error::Degenerate(_))));
        assert!(four_atoms(1.4, Representation::A).is_full_dimensional());
    }

    #[test]
    fn single_atom() {
        for a in [0.5, 1.4] {
            let m = DiscreteSpectralMeasure::new(
                a,
                Representation::A,
                vec![Atom {
                    point: uv(&[0.0, 1.0]),
                    weight: 1.0,
                }],
                vec![0.0, 0.0],
            )
            .unwrap();
            let f = functionals_at(&uv(&[0.0, 1.0]), &m).unwrap();
            assert_eq!(f.sigma, 1.0);
            assert_eq!(f.beta, 1.0);
            assert_relative_eq!(f.mu_am, -(FRAC_PI_2 * a).tan(), max_relative = 1e-15);
            let orth = functionals_at(&uv(&[1.0, 0.0]), &m).unwrap();
            assert!(orth.degenerate);
            assert_eq!(orth.sigma, 0.0);
        }
    }

    #[test]
    fn antipodal_pair_at_one() {
        let m = DiscreteSpectralMeasure::new(
            1.0,
            Representation::A,
            vec![
                Atom {
                    point: uv(&[0.6, 0.8]),
                    weight: 0.7,
                },
                Atom {
                    point: uv(&[-0.6, -0.8]),
                    weight: 0.7,
                },
            ],
            vec![0.0, 0.0],
        )
        .unwrap();
        for t in [[1.0, 0.0], [0.28, 0.96], [0.0, -1.0]] {
            let f = functionals_at(&uv(&t), &m).unwrap();
            assert_eq!(f.beta, 0.0);
            assert!(f.mu.abs() < 1e-16);
        }
    }

    #[test]
    fn four_atoms_high_precision() {
        let m = four_atoms(1.4, Representation::A);
        let f = functionals_at(&uv(&[1.0, 0.0]), &m).unwrap();
        assert_relative_eq!(f.sigma, 0.819_275_597_749_308_9, max_relative = 1e-14);
        assert_relative_eq!(f.beta, 0.709_834_877_758_619_6, max_relative = 1e-14);
        assert_eq!(f.mu, 0.0);
        assert_relative_eq!(f.sigma_b, 1.040_816_663_926_904_4, max_relative = 1e-13);
        assert_relative_eq!(f.beta_b, 0.820_992_170_076_398_3, max_relative = 1e-13);
        assert_relative_eq!(f.mu_m, -0.800_435_447_840_308_4, max_relative = 1e-13);
        assert_relative_eq!(f.mu_am, 0.770_773_875_463_857_4, max_relative = 1e-13);
        assert_relative_eq!(f.mu_mm, -0.029_661_572_376_451_03, max_relative = 1e-11);

        let m = four_atoms(1.0, Representation::A);
        let f = functionals_at(&uv(&[0.28, 0.96]), &m).unwrap();
        assert_relative_eq!(f.sigma, 0.5216, max_relative = 1e-14);
        assert_relative_eq!(f.beta, 0.815_950_920_245_398_8, max_relative = 1e-14);
        assert_relative_eq!(f.mu, 0.159_127_917_359_475_2, max_relative = 1e-13);
        assert_relative_eq!(f.sigma_b, 0.332_060_873_266_930_4, max_relative = 1e-14);
        assert_eq!(f.beta_b, f.beta);
        assert_relative_eq!(f.mu_b, -0.139_572_282_014_366_4, max_relative = 1e-13);
        assert_relative_eq!(f.mu_mm, -0.017_218_036_532_172_03, max_relative = 1e-12);
    }

    #[test]
    fn conversion_examples() {
        let axes = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
            .iter()
            .map(|s| Atom {
                point: uv(s),
                weight: 0.3,
            })
            .collect();
        let sym = DiscreteSpectralMeasure::new(0.7, Representation::A, axes, vec![0.0, 0.0]).unwrap();
        let m = convert_measure(&sym, Representation::M).unwrap();
        assert_eq!(m.shift(), &[0.0, 0.0]);
        assert_eq!(m.rep(), Representation::M);

        let single = DiscreteSpectralMeasure::new(
            0.5,
            Representation::A,
            vec![Atom {
                point: uv(&[1.0, 0.0]),
                weight: 1.0,
            }],
            vec![0.0, 0.0],
        )
        .unwrap();
        let m = convert_measure(&single, Representation::M).unwrap();
        assert_relative_eq!(m.shift()[0], 1.0, max_relative = 1e-15);
        assert_eq!(m.shift()[1], 0.0);
        let back = convert_measure(&m, Representation::A).unwrap();
        assert_eq!(back, single);

        let one = four_atoms(1.0, Representation::A).with_shift(vec![0.3, -0.2]).unwrap();
        let as_m = convert_measure(&one, Representation::M).unwrap();
        assert_eq!(as_m.shift(), one.shift());
        let near = four_atoms(1.0 + 1e-9, Representation::A);
        assert!(matches!(convert_measure(&near, Representation::M), Err(Error::NearUnitAlpha { .. })));
    }

    /// Log characteristic function straight from the (A) or (M) definition.
    fn log_chf(m: &DiscreteSpectralMeasure, t: &[f64]) -> (f64, f64) {
        let a = m.alpha();
        let tan = (FRAC_PI_2 * a).tan();
        let (mut re, mut im) = (0.0, dot(t, m.shift()));
        for atom in m.atoms() {
            let p = atom.point.dot(t);
            if p == 0.0 {
                continue;
            }
            let pa = p.abs().powf(a);
            re -= atom.weight * pa;
            im -= atom.weight
                * pa
                * match m.rep() {
                    Representation::A => -p.signum() * tan,
                    Representation::M => p.signum() * tan * (p.abs().powf(1.0 - a) - 1.0),
                };
        }
        (re, im)
    }

    #[test]
    fn conversion_preserves_characteristic_function() {
        let m = four_atoms(1.4, Representation::A).with_shift(vec![0.3, -0.2]).unwrap();
        for alpha in [0.5, 0.9, 1.4, 1.8] {
            let a = DiscreteSpectralMeasure::new(alpha, Representation::A, m.atoms().to_vec(), m.shift().to_vec()).unwrap();
            let mm = convert_measure(&a, Representation::M).unwrap();
            for t in [[0.3, 0.0], [1.7, -0.4], [-0.2, 2.5]] {
                let (r1, i1) = log_chf(&a, &t);
                let (r2, i2) = log_chf(&mm, &t);
                assert!((r1 - r2).abs() < 1e-13);
                assert!((i1 - i2).abs() < 1e-12 * (1.0 + i1.abs()), "{alpha} {t:?}: {i1} vs {i2}");
            }
        }
    }

    #[test]
    fn uniform_examples() {
        let m = uniform_measure(2, 4, 1.0, 1.0, Representation::A).unwrap();
        let angles: Vec<f64> = m.atoms().iter().map(|a| a.point.as_slice()[1].atan2(a.point.as_slice()[0])).collect();
        for (k, ang) in angles.iter().enumerate() {
            let expect = FRAC_PI_2 * k as f64;
            let expect = if expect > PI { expect - 2.0 * PI } else { expect };
            assert!((ang - expect).abs() < 1e-15);
        }
        assert!(m.atoms().iter().all(|a| a.weight == 0.25));

        let m = uniform_measure(2, 256, 1.0, 1.0, Representation::A).unwrap();
        let f = functionals_at(&uv(&[1.0, 0.0]), &m).unwrap();
        assert!(f.beta.abs() <= 1e-12);
        for k in 0..16 {
            let (s, c) = (0.37 * k as f64).sin_cos();
            let f = functionals_at(&uv(&[c, s]), &m).unwrap();
            assert_relative_eq!(f.sigma, 2.0 / PI, max_relative = 1e-4);
        }

        let m3 = uniform_measure(3, 200, 2.0, 1.5, Representation::M).unwrap();
        assert!(m3.resultant().iter().all(|r| r.abs() < 1e-2));
        assert_relative_eq!(m3.total_mass(), 2.0, max_relative = 1e-14);
        assert!(uniform_measure(4, 100, 1.0, 1.0, Representation::A).is_err());
        assert!(uniform_measure(2, 3, 1.0, 1.0, Representation::A).is_err());
    }

    #[test]
    fn mismatched_direction() {
        let m = four_atoms(1.4, Representation::A);
        assert!(matches!(functionals_along(&[1.0, 0.0, 0.0], &m), Err(Error::DimensionMismatch { .. })));
    }

    fn measure_from(alpha: f64, raw: Vec<(f64, f64, f64)>) -> DiscreteSpectralMeasure {
        let mut atoms: Vec<Atom> = raw
            .into_iter()
            .filter(|(x, y, _)| x.hypot(*y) > 1e-3)
            .map(|(x, y, w)| Atom {
                point: UnitVector::normalized(vec![x, y]).unwrap(),
                weight: w,
            })
            .collect();
        if atoms.is_empty() {
            atoms.push(Atom {
                point: uv(&[1.0, 0.0]),
                weight: 1.0,
            });
        }
        DiscreteSpectralMeasure::new(alpha, Representation::A, atoms, vec![0.0, 0.0]).unwrap()
    }

    fn raw_atoms() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..2.0), 1..8)
    }

    fn random_measure() -> impl Strategy<Value = DiscreteSpectralMeasure> {
        (0.1f64..1.95, proptest::bool::weighted(0.2), raw_atoms())
            .prop_map(|(a, one, raw)| measure_from(if one { 1.0 } else { a }, raw))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn beta_is_bounded(m in random_measure(), ang in 0.0f64..6.3) {
            let f = functionals_along(&[ang.cos(), ang.sin()], &m).unwrap();
            prop_assert!(f.beta.abs() <= 1.0);
            prop_assert!(f.beta_b.abs() <= 1.0);
        }

        #[test]
        fn homogeneity(m in random_measure(), ang in 0.0f64..6.3, r in 0.05f64..20.0) {
            let t = [ang.cos(), ang.sin()];
            let f = functionals_along(&t, &m).unwrap();
            prop_assume!(!f.degenerate);
            let g = functionals_along(&[r * t[0], r * t[1]], &m).unwrap();
            prop_assert!((g.sigma - r * f.sigma).abs() <= 1e-12 * r * f.sigma);
            prop_assert!((g.beta - f.beta).abs() <= 1e-12);
            prop_assert!((g.mu_mm - r * f.mu_mm).abs() <= 1e-11 * (1.0 + r * f.mu_mm.abs() + r * f.sigma));
        }

        #[test]
        fn alpha_one_identity(raw in raw_atoms(), ang in 0.0f64..6.3) {
            let m = measure_from(1.0, raw);
            let f = functionals_along(&[ang.cos(), ang.sin()], &m).unwrap();
            prop_assume!(!f.degenerate);
            let expect = f.mu + 2.0 / PI * f.beta * f.sigma * f.sigma.ln();
            prop_assert!((f.mu_mm - expect).abs() <= 1e-14 * (1.0 + expect.abs()));
        }

        #[test]
        fn round_trip(m in random_measure(), sx in -5.0f64..5.0, sy in -5.0f64..5.0) {
            prop_assume!((m.alpha() - 1.0).abs() > 1e-3 || m.alpha() == 1.0);
            let m = m.with_shift(vec![sx, sy]).unwrap();
            let there = convert_measure(&m, Representation::M).unwrap();
            let back = convert_measure(&there, Representation::A).unwrap();
            let tan = (FRAC_PI_2 * m.alpha()).tan().abs();
            for (b, s) in back.shift().iter().zip(m.shift()) {
                prop_assert!((b - s).abs() <= 1e-15 * (1.0 + s.abs() + tan * m.total_mass()) * 4.0);
            }
            prop_assert_eq!(back.atoms(), m.atoms());
        }
    }
}
