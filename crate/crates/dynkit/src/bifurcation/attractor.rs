//! Attractor labels from orbit recurrence and Lyapunov exponents.

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ghm::{self, GhmParams, PlanarState, Stability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttractorLabel {
    Sink,
    InvariantCircle,
    Strange,
    Escape,
    Undetermined,
}

impl AttractorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttractorLabel::Sink => "Sink",
            AttractorLabel::InvariantCircle => "InvariantCircle",
            AttractorLabel::Strange => "Strange",
            AttractorLabel::Escape => "Escape",
            AttractorLabel::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractorClass {
    pub label: AttractorLabel,
    pub lyap: (f64, f64),
    pub rotation: f64,
    pub period: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyOptions {
    pub transient: usize,
    pub samples: usize,
    pub strange_tol: f64,
    /// |lyap1| below this counts as zero.
    pub circle_tol: f64,
    pub max_period: usize,
    pub recurrence_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            transient: 60_000,
            samples: 40_000,
            strange_tol: 0.01,
            circle_tol: 1e-4,
            max_period: 512,
            recurrence_tol: 1e-6,
        }
    }
}

fn detect_period(s: PlanarState, p: &GhmParams, opts: &ClassifyOptions) -> Option<usize> {
    let mut z = s;
    for k in 1..=opts.max_period {
        z = ghm::map(z, p);
        if z.dist(&s) < opts.recurrence_tol {
            return Some(k);
        }
    }
    None
}

fn cycle_contracting(s: PlanarState, p: &GhmParams, k: usize) -> bool {
    let mut j = Matrix2::identity();
    let mut z = s;
    for _ in 0..k {
        j = ghm::jacobian(z, p) * j;
        z = ghm::map(z, p);
    }
    let ev = ghm::eigenvalues(&j);
    ev.iter().all(|e| e.norm() < 1.0)
}

/// Mean angular increment about the centroid of `pts`, in turns per step.
pub fn rotation_number(pts: &[PlanarState]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let cx = pts.iter().map(|s| s.x).sum::<f64>() / n;
    let cy = pts.iter().map(|s| s.y).sum::<f64>() / n;
    let mut total = 0.0;
    for w in pts.windows(2) {
        let a0 = (w[0].y - cy).atan2(w[0].x - cx);
        let a1 = (w[1].y - cy).atan2(w[1].x - cx);
        let mut d = a1 - a0;
        while d <= -std::f64::consts::PI {
            d += std::f64::consts::TAU;
        }
        while d > std::f64::consts::PI {
            d -= std::f64::consts::TAU;
        }
        total += d;
    }
    total / ((pts.len() - 1) as f64 * std::f64::consts::TAU)
}

pub fn classify_attractor(p: &GhmParams, s0: PlanarState) -> AttractorClass {
    classify_attractor_with(p, s0, &ClassifyOptions::default())
}

pub fn classify_attractor_with(p: &GhmParams, s0: PlanarState, opts: &ClassifyOptions) -> AttractorClass {
    let escape = AttractorClass { label: AttractorLabel::Escape, lyap: (f64::NAN, f64::NAN), rotation: f64::NAN, period: None };
    let lyap = match ghm::lyapunov_spectrum_from(p, s0, opts.transient, opts.samples) {
        Ok(l) => l,
        Err(_) => return escape,
    };
    let mut s = s0;
    for _ in 0..opts.transient {
        s = ghm::map(s, p);
    }
    let period = detect_period(s, p, opts);
    let orbit = ghm::orbit(s, p, opts.samples, 0);
    if orbit.escaped {
        return escape;
    }
    let rotation = rotation_number(&orbit.states);
    let label = if period.map_or(false, |k| cycle_contracting(s, p, k)) {
        AttractorLabel::Sink
    } else if lyap.0 > opts.strange_tol {
        AttractorLabel::Strange
    } else if lyap.0 < -opts.circle_tol {
        AttractorLabel::Sink
    } else if period.is_none() && lyap.0.abs() <= opts.circle_tol && lyap.1 < -opts.circle_tol {
        AttractorLabel::InvariantCircle
    } else {
        AttractorLabel::Undetermined
    };
    AttractorClass { label, lyap, rotation, period }
}

/// Initial state for a parameter cell: next to the non-saddle fixed point, else the origin.
pub fn seed_state(p: &GhmParams) -> PlanarState {
    let fps = ghm::fixed_points(p).unwrap_or_default();
    let pick = fps.iter().find(|f| f.stability != Stability::Saddle).or(fps.first());
    match pick {
        Some(f) => PlanarState::new(f.state.x + 1e-3, f.state.y),
        None => PlanarState::new(0.0, 0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub m_range: (f64, f64),
    pub b_range: (f64, f64),
    pub nm: usize,
    pub nb: usize,
}

impl SweepGrid {
    fn axis(range: (f64, f64), n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![0.5 * (range.0 + range.1)];
        }
        (0..n).map(|i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn m_values(&self) -> Vec<f64> {
        Self::axis(self.m_range, self.nm)
    }

    pub fn b_values(&self) -> Vec<f64> {
        Self::axis(self.b_range, self.nb)
    }

    pub fn cells(&self) -> Vec<(f64, f64)> {
        let bs = self.b_values();
        self.m_values().iter().flat_map(|&m| bs.iter().map(move |&b| (m, b))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub m: f64,
    pub b: f64,
    pub class: AttractorClass,
}

/// Classifies every cell; rows are M-major regardless of how the work is split.
pub fn sweep(r: f64, grid: &SweepGrid) -> Vec<SweepCell> {
    sweep_with(r, grid, &ClassifyOptions::default())
}

pub fn sweep_with(r: f64, grid: &SweepGrid, opts: &ClassifyOptions) -> Vec<SweepCell> {
    grid.cells()
        .par_iter()
        .map(|&(m, b)| {
            let p = GhmParams::new(m, b, r);
            SweepCell { m, b, class: classify_attractor_with(&p, seed_state(&p), opts) }
        })
        .collect()
}
