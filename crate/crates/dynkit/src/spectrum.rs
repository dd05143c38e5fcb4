//! Multiplier classification for hyperbolic periodic points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("multiplier list is empty")]
    Empty,
    #[error("non-hyperbolic multiplier {0} (modulus within tolerance of 1)")]
    NonHyperbolic(Complex64),
    #[error("complex multiplier {0} has no conjugate partner")]
    ConjugacyViolation(Complex64),
    #[error("span dimension {0} outside [1, 3]")]
    OutOfRange(i64),
    #[error("cannot parse multiplier literal '{0}'")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSet {
    pub values: Vec<Complex64>,
    pub period: u32,
}

impl MultiplierSet {
    pub fn new(values: Vec<Complex64>) -> Self {
        MultiplierSet { values, period: 1 }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Parses a comma-separated list such as `0.5+0.2i, 0.5-0.2i, 3`.
    pub fn parse(text: &str) -> Result<Self, SpectrumError> {
        let mut values = Vec::new();
        for tok in text.split(',') {
            let t: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
            if t.is_empty() {
                return Err(SpectrumError::Parse(tok.to_string()));
            }
            let z: Complex64 = t
                .replace('j', "i")
                .parse()
                .map_err(|_| SpectrumError::Parse(tok.trim().to_string()))?;
            values.push(z);
        }
        Ok(Self::new(values))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TatjerCase {
    NotApplicable,
    CaseA,
    CaseB,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub unstable_index: usize,
    pub dissipative: bool,
    pub sectionally_dissipative: bool,
    pub satisfies_eq1: bool,
    pub tatjer_case: TatjerCase,
    pub leading_complex: bool,
}

fn check_conjugates(values: &[Complex64], tol: f64) -> Result<(), SpectrumError> {
    let mut used = vec![false; values.len()];
    for i in 0..values.len() {
        if used[i] || values[i].im.abs() <= tol {
            continue;
        }
        let partner = (0..values.len()).find(|&j| {
            j != i
                && !used[j]
                && values[j].im.abs() > tol
                && (values[j].re - values[i].re).abs() <= tol
                && (values[j].im + values[i].im).abs() <= tol
        });
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(SpectrumError::ConjugacyViolation(values[i])),
        }
    }
    Ok(())
}

pub fn classify(mults: &MultiplierSet, tol: f64) -> Result<SpectrumClass, SpectrumError> {
    let vals = &mults.values;
    if vals.is_empty() {
        return Err(SpectrumError::Empty);
    }
    if let Some(v) = vals.iter().find(|v| (v.norm() - 1.0).abs() <= tol) {
        return Err(SpectrumError::NonHyperbolic(*v));
    }
    check_conjugates(vals, tol)?;

    let moduli: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let unstable_index = moduli.iter().filter(|&&m| m > 1.0).count();
    let dissipative = moduli.iter().product::<f64>() < 1.0;
    let sectionally_dissipative = if vals.len() == 1 {
        dissipative
    } else {
        (0..vals.len()).all(|i| (i + 1..vals.len()).all(|j| moduli[i] * moduli[j] < 1.0))
    };

    // Contracting multipliers, largest modulus first.
    let mut contracting: Vec<Complex64> = vals.iter().copied().filter(|v| v.norm() < 1.0).collect();
    contracting.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let leading_complex = match contracting.first() {
        Some(top) => {
            let group: Vec<&Complex64> = contracting
                .iter()
                .filter(|v| (v.norm() - top.norm()).abs() <= tol)
                .collect();
            group.len() == 2 && group.iter().all(|v| v.im.abs() > tol)
        }
        None => false,
    };

    let satisfies_eq1 = unstable_index == 1 && leading_complex && {
        let lam = contracting[0];
        let l = lam.norm();
        let arg = lam.arg().abs();
        let g = moduli.iter().copied().find(|&m| m > 1.0).unwrap_or(0.0);
        arg > tol
            && (std::f64::consts::PI - arg) > tol
            && contracting[2..].iter().all(|v| v.norm() < l)
            && l * l * g < 1.0
            && l * g > 1.0
    };

    let tatjer_case = tatjer(&moduli);

    Ok(SpectrumClass {
        unstable_index,
        dissipative,
        sectionally_dissipative,
        satisfies_eq1,
        tatjer_case,
        leading_complex,
    })
}

fn tatjer(moduli: &[f64]) -> TatjerCase {
    if moduli.len() != 3 {
        return TatjerCase::NotApplicable;
    }
    let mut m = moduli.to_vec();
    m.sort_by(f64::total_cmp);
    let (s, c, u) = (m[0], m[1], m[2]);
    if !(s < c && c < u && s < 1.0 && u > 1.0 && s * c * u < 1.0) {
        return TatjerCase::NotApplicable;
    }
    if c < 1.0 && c * u > 1.0 {
        TatjerCase::CaseA
    } else if c > 1.0 {
        TatjerCase::CaseB
    } else {
        TatjerCase::NotApplicable
    }
}

/// Codimension of a tangency whose tangent spaces span `span_dim` dimensions in 3-space.
pub fn tangency_codimension(span_dim: i64) -> Result<u32, SpectrumError> {
    if !(1..=3).contains(&span_dim) {
        return Err(SpectrumError::OutOfRange(span_dim));
    }
    Ok((3 - span_dim) as u32)
}
