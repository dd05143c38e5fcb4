//! Birkhoff-average oscillation and wandering-domain probes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ghm::{self, GhmParams, PlanarState};
use crate::renorm::ModelMap;

pub const HIST_TOL: f64 = 0.05;
pub const CONV_TOL: f64 = 0.005;
pub const OMEGA_TOL: f64 = 1e-4;
pub const DEFAULT_TAIL: f64 = 0.5;
pub const MAX_OMEGA_PERIOD: usize = 64;
pub const PROBE_ESCAPE: f64 = 1e6;
/// Bounding boxes are inflated by this multiple of the cloud's largest neighbour gap.
pub const BOX_INFLATION: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErgodicError {
    #[error("orbit is empty")]
    EmptyOrbit,
    #[error("unknown observable {0:?} (expected x, y or box:x0,x1,y0,y1)")]
    UnknownObservable(String),
    #[error("series has {0} terms, at least 100 needed")]
    TooShort(usize),
    #[error("tail fraction {0} outside (0, 1)")]
    BadTail(f64),
    #[error("invalid probe: {0}")]
    BadProbe(String),
    #[error("cloud escaped at iterate {0}")]
    Escaped(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    X,
    Y,
    /// Indicator of [x0, x1] x [y0, y1].
    Box { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl Observable {
    pub fn parse(spec: &str) -> Result<Self, ErgodicError> {
        let bad = || ErgodicError::UnknownObservable(spec.to_string());
        match spec.trim() {
            "x" => Ok(Observable::X),
            "y" => Ok(Observable::Y),
            s => {
                let body = s.strip_prefix("box:").ok_or_else(bad)?;
                let v: Vec<f64> = body.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
                match v[..] {
                    [x0, x1, y0, y1] if x0 <= x1 && y0 <= y1 => Ok(Observable::Box { x0, x1, y0, y1 }),
                    _ => Err(bad()),
                }
            }
        }
    }

    pub fn id(&self) -> String {
        match self {
            Observable::X => "x".into(),
            Observable::Y => "y".into(),
            Observable::Box { x0, x1, y0, y1 } => format!("box:{x0},{x1},{y0},{y1}"),
        }
    }

    pub fn eval(&self, s: &PlanarState) -> f64 {
        match *self {
            Observable::X => s.x,
            Observable::Y => s.y,
            Observable::Box { x0, x1, y0, y1 } => (s.x >= x0 && s.x <= x1 && s.y >= y0 && s.y <= y1) as u8 as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffSeries {
    pub partials: Vec<f64>,
    pub observable_id: String,
    /// sup |psi| over the orbit.
    pub sup_abs: f64,
}

pub fn birkhoff(orbit: &[PlanarState], observable: &str) -> Result<BirkhoffSeries, ErgodicError> {
    let obs = Observable::parse(observable)?;
    birkhoff_with(orbit, &obs)
}

pub fn birkhoff_with(orbit: &[PlanarState], obs: &Observable) -> Result<BirkhoffSeries, ErgodicError> {
    if orbit.is_empty() {
        return Err(ErgodicError::EmptyOrbit);
    }
    let mut partials = Vec::with_capacity(orbit.len());
    let mut mean = 0.0;
    let mut sup_abs: f64 = 0.0;
    for (k, s) in orbit.iter().enumerate() {
        let v = obs.eval(s);
        sup_abs = sup_abs.max(v.abs());
        mean += (v - mean) / (k + 1) as f64;
        partials.push(mean);
    }
    Ok(BirkhoffSeries { partials, observable_id: obs.id(), sup_abs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergentLike,
    HistoricLike,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricReport {
    pub oscillation: f64,
    pub window: f64,
    pub verdict: Verdict,
    pub tail_max: f64,
    pub tail_min: f64,
    /// Alternations between the tail's high and low levels after index sqrt(n).
    pub level_switches: usize,
    pub interleaved: bool,
}

pub fn oscillation(series: &BirkhoffSeries, tail_fraction: f64) -> Result<HistoricReport, ErgodicError> {
    let p = &series.partials;
    let n = p.len();
    if n < 100 {
        return Err(ErgodicError::TooShort(n));
    }
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(ErgodicError::BadTail(tail_fraction));
    }
    let start = n - ((tail_fraction * n as f64).ceil() as usize).clamp(1, n);
    let tail = &p[start..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let osc = hi - lo;

    // Count visits alternating between the top and bottom quarter of [lo, hi].
    let band = 0.25 * osc;
    let mut switches = 0;
    let mut last: Option<bool> = None;
    if osc > 0.0 {
        for &v in &p[(n as f64).sqrt() as usize..] {
            let level = if v >= hi - band {
                Some(true)
            } else if v <= lo + band {
                Some(false)
            } else {
                None
            };
            if let Some(l) = level {
                if last.map_or(false, |prev| prev != l) {
                    switches += 1;
                }
                last = Some(l);
            }
        }
    }
    let interleaved = switches >= 3;
    let verdict = if osc > HIST_TOL && interleaved {
        Verdict::HistoricLike
    } else if osc < CONV_TOL {
        Verdict::ConvergentLike
    } else {
        Verdict::Inconclusive
    };
    Ok(HistoricReport { oscillation: osc, window: tail_fraction, verdict, tail_max: hi, tail_min: lo, level_switches: switches, interleaved })
}

/// A map on R^dim iterated by the wandering probe.
pub trait MapHandle: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, s: &[f64]) -> Vec<f64>;
}

pub struct GhmHandle(pub GhmParams);

impl MapHandle for GhmHandle {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        let q = ghm::map(PlanarState::new(s[0], s[1]), &self.0);
        vec![q.x, q.y]
    }
}

/// First-return map T_n of the three-dimensional model.
pub struct ModelHandle {
    pub model: ModelMap,
    pub n: usize,
}

impl MapHandle for ModelHandle {
    fn dim(&self) -> usize {
        3
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        let q = self.model.return_point(nalgebra::Vector3::new(s[0], s[1], s[2]), self.n);
        vec![q[0], q[1], q[2]]
    }
}

pub struct FnMap<F: Fn(&[f64]) -> Vec<f64> + Sync> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> MapHandle for FnMap<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        (self.f)(s)
    }
}

/// Rigid rotation of the plane by `turns` full turns about the origin.
pub struct Rotation(pub f64);

impl MapHandle for Rotation {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        let (sn, c) = (std::f64::consts::TAU * self.0).sin_cos();
        vec![c * s[0] - sn * s[1], sn * s[0] + c * s[1]]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WanderingVerdicts {
    pub contractive: bool,
    pub nontrivial_omega: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WanderingReport {
    /// Largest n such that the inflated boxes of D, f(D), ..., f^n(D) are pairwise disjoint.
    pub disjoint_up_to: usize,
    pub diameters: Vec<f64>,
    /// Late images of the centre.
    pub omega_sample: Vec<Vec<f64>>,
    pub omega_period: Option<usize>,
    pub verdicts: WanderingVerdicts,
    pub box_inflation: f64,
    pub caveat: String,
}

/// Centre plus `cloud` points on the boundary of the ball.
pub fn ball_cloud(center: &[f64], radius: f64, cloud: usize) -> Vec<Vec<f64>> {
    let d = center.len();
    let mut pts = vec![center.to_vec()];
    for k in 0..cloud {
        let off: Vec<f64> = match d {
            1 => vec![radius * (-1.0 + 2.0 * k as f64 / (cloud - 1) as f64)],
            2 => {
                let t = std::f64::consts::TAU * k as f64 / cloud as f64;
                vec![radius * t.cos(), radius * t.sin()]
            }
            _ => {
                // Fibonacci sphere in the first three coordinates.
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / cloud as f64;
                let r = (1.0 - z * z).sqrt();
                let t = std::f64::consts::PI * (3.0 - 5f64.sqrt()) * k as f64;
                let mut v = vec![0.0; d];
                v[0] = radius * r * t.cos();
                v[1] = radius * r * t.sin();
                v[2] = radius * z;
                v
            }
        };
        pts.push(center.iter().zip(&off).map(|(c, o)| c + o).collect());
    }
    pts
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn diameter(pts: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(dist(&pts[i], &pts[j]));
        }
    }
    d
}

/// Half-open box [lo, hi] per coordinate, inflated by the cloud's largest nearest-neighbour gap.
fn inflated_box(pts: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let d = pts[0].len();
    let mut gap: f64 = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let nn = pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, q)| dist(p, q)).fold(f64::INFINITY, f64::min);
        if nn.is_finite() {
            gap = gap.max(nn);
        }
    }
    let pad = BOX_INFLATION * gap;
    (0..d)
        .map(|k| {
            let lo = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
            (lo - pad, hi + pad)
        })
        .collect()
}

fn boxes_overlap(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.0 <= y.1 && y.0 <= x.1)
}

fn omega_period(late: &[Vec<f64>]) -> Option<usize> {
    (1..=MAX_OMEGA_PERIOD.min(late.len().saturating_sub(1))).find(|&p| (0..late.len() - p).all(|i| dist(&late[i], &late[i + p]) < OMEGA_TOL))
}

pub fn wandering_probe(map: &dyn MapHandle, center: &[f64], radius: f64, n: usize, cloud: usize) -> Result<WanderingReport, ErgodicError> {
    if center.len() != map.dim() {
        return Err(ErgodicError::BadProbe(format!("centre has {} coordinates, map has {}", center.len(), map.dim())));
    }
    if !(radius > 0.0) || cloud < 8 || n == 0 {
        return Err(ErgodicError::BadProbe(format!("need radius > 0, cloud >= 8, n >= 1 (got {radius}, {cloud}, {n})")));
    }
    let mut pts = ball_cloud(center, radius, cloud);
    let mut diameters = vec![diameter(&pts)];
    let mut boxes = vec![inflated_box(&pts)];
    let mut centres = vec![pts[0].clone()];
    let mut disjoint_up_to = 0;
    let mut still_disjoint = true;
    for k in 1..=n {
        pts = pts.iter().map(|p| map.apply(p)).collect();
        if pts.iter().flatten().any(|v| !(v.abs() < PROBE_ESCAPE)) {
            return Err(ErgodicError::Escaped(k));
        }
        diameters.push(diameter(&pts));
        let b = inflated_box(&pts);
        if still_disjoint {
            if boxes.iter().any(|o| boxes_overlap(o, &b)) {
                still_disjoint = false;
            } else {
                disjoint_up_to = k;
            }
        }
        boxes.push(b);
        centres.push(pts[0].clone());
    }
    let late_from = centres.len() - (centres.len() / 4).clamp(1, 4 * MAX_OMEGA_PERIOD);
    let omega_sample = centres[late_from..].to_vec();
    let period = omega_period(&omega_sample);
    let contractive = diameters[diameters.len() - 1] < 0.1 * diameters[0];
    Ok(WanderingReport {
        disjoint_up_to,
        diameters,
        omega_sample,
        omega_period: period,
        verdicts: WanderingVerdicts { contractive, nontrivial_omega: period.is_none() },
        box_inflation: BOX_INFLATION,
        caveat: "axis-aligned bounding boxes can overlap while the images are disjoint".into(),
    })
}
