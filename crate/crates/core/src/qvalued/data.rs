//! Analytic boundary and interface data, and builders for initial maps.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::domain::{DomainMesh, Node, Side};
use super::tuple::QTuple;
use super::{cardinality, QHalfMap};
use crate::error::{Error, Result};

/// Re(c·z^k) with c = re + i·im.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub degree: u32,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Scalar functions of the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScalarData {
    Constant { value: f64 },
    /// Σ Re(c_j z^{k_j}).
    Harmonic { terms: Vec<HarmonicTerm> },
    /// `amplitude`·Re(z^{1/2}) on the principal branch, cut along the
    /// negative x₁ axis.
    Branch { amplitude: f64 },
    Sum { parts: Vec<ScalarData> },
}

impl ScalarData {
    pub fn harmonic(degree: u32, re: f64) -> Self {
        ScalarData::Harmonic { terms: vec![HarmonicTerm { degree, re, im: 0.0 }] }
    }

    pub fn eval(&self, x: [f64; 2]) -> f64 {
        match self {
            ScalarData::Constant { value } => *value,
            ScalarData::Harmonic { terms } => terms
                .iter()
                .map(|t| {
                    let r = x[0].hypot(x[1]);
                    let theta = x[1].atan2(x[0]);
                    let k = t.degree as f64;
                    r.powf(k) * (t.re * (k * theta).cos() - t.im * (k * theta).sin())
                })
                .sum(),
            ScalarData::Branch { amplitude } => {
                let r = x[0].hypot(x[1]);
                let theta = x[1].atan2(x[0]);
                amplitude * r.sqrt() * (theta / 2.0).cos()
            }
            ScalarData::Sum { parts } => parts.iter().map(|p| p.eval(x)).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            ScalarData::Constant { value } => value.is_finite(),
            ScalarData::Harmonic { terms } => terms.iter().all(|t| t.re.is_finite() && t.im.is_finite()),
            ScalarData::Branch { amplitude } => amplitude.is_finite(),
            ScalarData::Sum { parts } => return parts.iter().try_for_each(ScalarData::validate),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("non-finite coefficient in {self:?}")))
        }
    }
}

/// Dirichlet data of a (Q−½)-valued problem, one scalar function per sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfMapData {
    pub plus: Vec<ScalarData>,
    pub minus: Vec<ScalarData>,
    pub interface: ScalarData,
}

impl HalfMapData {
    /// Q copies of `h` above, Q−1 below, `h` on the interface.
    pub fn collapsed(q: usize, h: ScalarData) -> Self {
        Self { plus: vec![h.clone(); q], minus: vec![h.clone(); q.saturating_sub(1)], interface: h }
    }

    /// Q = 2 data with plus sheets h ± amplitude·Re(z^{1/2}), which stay
    /// apart along the outer circle.
    pub fn branched(h: ScalarData, amplitude: f64) -> Self {
        let sheet = |a: f64| ScalarData::Sum { parts: vec![h.clone(), ScalarData::Branch { amplitude: a }] };
        Self { plus: vec![sheet(amplitude), sheet(-amplitude)], minus: vec![h.clone()], interface: h }
    }

    pub fn q(&self) -> usize {
        self.plus.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.plus.is_empty() || self.minus.len() + 1 != self.plus.len() {
            return Err(Error::InvalidConfig(format!(
                "need Q plus sheets and Q−1 minus sheets, got {} and {}",
                self.plus.len(),
                self.minus.len()
            )));
        }
        self.plus.iter().chain(&self.minus).chain([&self.interface]).try_for_each(ScalarData::validate)
    }

    fn sheets(&self, side: Side) -> Vec<&ScalarData> {
        match side {
            Side::Plus => self.plus.iter().collect(),
            Side::Minus => self.minus.iter().collect(),
            Side::Interface => vec![&self.interface],
        }
    }

    /// Data on the outer boundary and the interface; interior sheets start
    /// from the same formulas pushed apart by
    /// split·(rank − mean rank)·|cos πx₁ cos πx₂|.
    pub fn initial_map(&self, mesh: Arc<DomainMesh>, split: f64) -> Result<QHalfMap> {
        self.validate()?;
        let q = self.q();
        QHalfMap::from_fn(mesh, q, 1, |nd: &Node| {
            let sheets = self.sheets(nd.side);
            debug_assert_eq!(sheets.len(), cardinality(q, nd.side));
            let fixed = nd.boundary || nd.side == Side::Interface;
            let bump = (PI * nd.position[0]).cos().abs() * (PI * nd.position[1]).cos().abs();
            let centre = (sheets.len() as f64 - 1.0) / 2.0;
            let values: Vec<f64> = sheets
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let base = s.eval(nd.position);
                    if fixed {
                        base
                    } else {
                        base + split * (k as f64 - centre) * bump
                    }
                })
                .collect();
            QTuple::scalars(&values)
        })
    }
}

/// Interior Q-valued map {s(x) : s ∈ sheets} with no interface.
pub fn interior_map(mesh: Arc<DomainMesh>, sheets: &[ScalarData]) -> Result<QHalfMap> {
    if mesh.interface().is_some() {
        return Err(Error::InvalidInput("interior maps live on meshes without an interface".into()));
    }
    sheets.iter().try_for_each(ScalarData::validate)?;
    QHalfMap::from_fn(mesh, sheets.len(), 1, |nd| {
        QTuple::scalars(&sheets.iter().map(|s| s.eval(nd.position)).collect::<Vec<_>>())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_terms_match_complex_powers() {
        let s = ScalarData::Harmonic {
            terms: vec![HarmonicTerm { degree: 2, re: 1.0, im: 0.0 }, HarmonicTerm { degree: 1, re: 0.0, im: 2.0 }],
        };
        let (x, y) = (0.3, -0.7);
        // Re(z²) + Re(2i z) = x² − y² − 2y
        assert!((s.eval([x, y]) - (x * x - y * y - 2.0 * y)).abs() < 1e-14);
    }

    #[test]
    fn branch_squares_to_the_real_part() {
        let b = ScalarData::Branch { amplitude: 1.0 };
        for &(x, y) in &[(0.4, 0.1), (-0.3, 0.5), (-0.3, -0.5), (0.0, -0.9)] {
            let v = b.eval([x, y]);
            let r = f64::hypot(x, y);
            assert!((2.0 * v * v - (r + x)).abs() < 1e-14);
        }
    }
}
