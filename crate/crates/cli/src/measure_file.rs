//! JSON spectral-measure files.
//!
//! ```json
//! {"alpha": 1.4, "representation": "A", "dim": 2,
//!  "atoms": [{"s": [1.0, 0.0], "w": 0.5}], "shift": [0.0, 0.0]}
//! ```

use anyhow::{bail, Context};
use mvstable_core::{Atom, DiscreteSpectralMeasure, Representation, UnitVector};
use serde::{Deserialize, Serialize};

/// Atom norms may be off by this much; they are renormalized on load.
pub const NORM_REJECT: f64 = 1e-9;
/// Renormalizing beyond this prints a warning.
pub const NORM_WARN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomEntry {
    pub s: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub alpha: f64,
    pub representation: Representation,
    pub dim: usize,
    pub atoms: Vec<AtomEntry>,
    pub shift: Vec<f64>,
}

impl MeasureFile {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        serde_json::from_str(text).context("invalid measure file")
    }

    pub fn read(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    /// Validates the file and builds the measure. Warnings go to `warn`.
    pub fn to_measure(&self, mut warn: impl FnMut(String)) -> anyhow::Result<DiscreteSpectralMeasure> {
        if self.shift.len() != self.dim {
            bail!("field shift: expected {} components, got {}", self.dim, self.shift.len());
        }
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for (i, a) in self.atoms.iter().enumerate() {
            if a.s.len() != self.dim {
                bail!("field atoms[{i}].s: expected {} components, got {}", self.dim, a.s.len());
            }
            let norm = a.s.iter().map(|c| c * c).sum::<f64>().sqrt();
            let off = (norm - 1.0).abs();
            if !(off <= NORM_REJECT) {
                bail!("field atoms[{i}].s: norm {norm} is not 1 (tolerance {NORM_REJECT:e})");
            }
            let point = if off > NORM_WARN {
                warn(format!("atoms[{i}].s has norm {norm}; renormalized"));
                UnitVector::normalized(a.s.clone())
            } else {
                UnitVector::new(a.s.clone())
            }
            .with_context(|| format!("field atoms[{i}].s"))?;
            atoms.push(Atom { point, weight: a.w });
        }
        DiscreteSpectralMeasure::new(self.alpha, self.representation, atoms, self.shift.clone()).map_err(anyhow::Error::from)
    }

    pub fn from_measure(m: &DiscreteSpectralMeasure) -> Self {
        MeasureFile {
            alpha: m.alpha(),
            representation: m.rep(),
            dim: m.dim(),
            atoms: m
                .atoms()
                .iter()
                .map(|a| AtomEntry {
                    s: a.point.as_slice().to_vec(),
                    w: a.weight,
                })
                .collect(),
            shift: m.shift().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("measure serializes");
        s.push('\n');
        s
    }
}
