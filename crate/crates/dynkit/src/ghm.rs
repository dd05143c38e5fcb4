//! Generalized Hénon family x' = y, y' = M - Bx - y^2 - Rxy.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ESCAPE_RADIUS: f64 = 1e6;
pub const FP_TOL: f64 = 1e-12;
const HYPERBOLIC_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GhmError {
    #[error("step produced a non-finite state")]
    Overflow,
    #[error("1+R = 0, 1+B = 0 and M = 0: every point of the diagonal is fixed")]
    DegenerateFamily,
    #[error("|R| = {0} is outside the small-R regime |R| < 1")]
    OutOfRegime(f64),
    #[error("orbit left the escape radius at step {0}")]
    Escaped(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhmParams {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "R")]
    pub r: f64,
}

impl GhmParams {
    pub fn new(m: f64, b: f64, r: f64) -> Self {
        GhmParams { m, b, r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarState {
    pub x: f64,
    pub y: f64,
}

impl PlanarState {
    pub fn new(x: f64, y: f64) -> Self {
        PlanarState { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, o: &PlanarState) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn as_vec(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Sink,
    Saddle,
    Source,
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointInfo {
    pub state: PlanarState,
    pub eigenvalues: [Complex64; 2],
    pub stability: Stability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub states: Vec<PlanarState>,
    pub escaped: bool,
}

#[inline]
pub fn map(s: PlanarState, p: &GhmParams) -> PlanarState {
    PlanarState {
        x: s.y,
        y: p.m - p.b * s.x - s.y * s.y - p.r * s.x * s.y,
    }
}

pub fn step(s: PlanarState, p: &GhmParams) -> Result<PlanarState, GhmError> {
    let n = map(s, p);
    if n.x.is_finite() && n.y.is_finite() {
        Ok(n)
    } else {
        Err(GhmError::Overflow)
    }
}

/// Explicit inverse; `None` where B + R x' vanishes.
pub fn inverse(s: PlanarState, p: &GhmParams) -> Option<PlanarState> {
    let den = p.b + p.r * s.x;
    if den.abs() < 1e-14 {
        return None;
    }
    Some(PlanarState {
        x: (p.m - s.x * s.x - s.y) / den,
        y: s.x,
    })
}

fn escaped(s: &PlanarState) -> bool {
    !(s.x.abs() <= ESCAPE_RADIUS && s.y.abs() <= ESCAPE_RADIUS)
}

pub fn orbit(s0: PlanarState, p: &GhmParams, n: usize, transient: usize) -> Orbit {
    let mut s = s0;
    for _ in 0..transient {
        s = map(s, p);
        if escaped(&s) {
            return Orbit { states: Vec::new(), escaped: true };
        }
    }
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        s = map(s, p);
        if escaped(&s) {
            return Orbit { states, escaped: true };
        }
        states.push(s);
    }
    Orbit { states, escaped: false }
}

pub fn jacobian(s: PlanarState, p: &GhmParams) -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -p.b - p.r * s.y, -2.0 * s.y - p.r * s.x)
}

/// Eigenvalues of a real 2x2 matrix, largest modulus first.
pub fn eigenvalues(m: &Matrix2<f64>) -> [Complex64; 2] {
    let t = m.trace();
    let d = m.determinant();
    let mut disc = 0.25 * t * t - d;
    if disc.abs() <= 16.0 * f64::EPSILON * (0.25 * t * t + d.abs()) {
        disc = 0.0;
    }
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = 0.5 * t + if t >= 0.0 { s } else { -s };
        let small = if big != 0.0 { d / big } else { 0.0 };
        if big.abs() >= small.abs() {
            [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
        } else {
            [Complex64::new(small, 0.0), Complex64::new(big, 0.0)]
        }
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(0.5 * t, s), Complex64::new(0.5 * t, -s)]
    }
}

pub fn stability_of(ev: &[Complex64; 2]) -> Stability {
    let m = [ev[0].norm(), ev[1].norm()];
    if m.iter().any(|v| (v - 1.0).abs() <= HYPERBOLIC_TOL) {
        Stability::NonHyperbolic
    } else if m[0] < 1.0 && m[1] < 1.0 {
        Stability::Sink
    } else if m[0] > 1.0 && m[1] > 1.0 {
        Stability::Source
    } else {
        Stability::Saddle
    }
}

pub fn fixed_point_info(y: f64, p: &GhmParams) -> FixedPointInfo {
    let state = PlanarState::new(y, y);
    let eigenvalues = eigenvalues(&jacobian(state, p));
    FixedPointInfo { state, eigenvalues, stability: stability_of(&eigenvalues) }
}

pub fn fixed_points(p: &GhmParams) -> Result<Vec<FixedPointInfo>, GhmError> {
    // (1+R) y^2 + (1+B) y - M = 0 on the diagonal x = y.
    let a = 1.0 + p.r;
    let b = 1.0 + p.b;
    let c = -p.m;
    let f = |y: f64| (a * y + b) * y + c;
    let polish = |y: f64| {
        let df = 2.0 * a * y + b;
        if df != 0.0 {
            let z = y - f(y) / df;
            if f(z).abs() <= f(y).abs() {
                return z;
            }
        }
        y
    };
    let mut roots = Vec::new();
    if a == 0.0 {
        if b == 0.0 {
            if c == 0.0 {
                return Err(GhmError::DegenerateFamily);
            }
        } else {
            roots.push(-c / b);
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        let scale = b * b + (4.0 * a * c).abs();
        if disc.abs() <= 64.0 * f64::EPSILON * scale {
            roots.push(-b / (2.0 * a));
        } else if disc > 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let (r1, r2) = if q != 0.0 { (q / a, c / q) } else { (0.0, 0.0) };
            roots.push(polish(r1));
            roots.push(polish(r2));
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots.into_iter().map(|y| fixed_point_info(y, p)).collect())
}

pub fn bt_point(r: f64) -> Result<GhmParams, GhmError> {
    if !(r.abs() < 1.0) {
        return Err(GhmError::OutOfRegime(r));
    }
    let h = 1.0 + 0.5 * r;
    Ok(GhmParams { m: (-1.0 - r) / (h * h), b: 1.0 + r / h, r })
}

/// The fixed point carrying the double +1 eigenvalue at `bt_point(r)`: the root nearest (-1,-1).
pub fn bt_fixed_point(r: f64) -> Result<FixedPointInfo, GhmError> {
    let p = bt_point(r)?;
    let target = PlanarState::new(-1.0, -1.0);
    let fps = fixed_points(&p)?;
    let nearest = fps
        .into_iter()
        .min_by(|u, v| u.state.dist(&target).total_cmp(&v.state.dist(&target)));
    Ok(nearest.unwrap_or_else(|| fixed_point_info(-1.0 / (1.0 + 0.5 * r), &p)))
}

pub fn lyapunov_transient(n: usize) -> usize {
    (n / 10).min(1000)
}

/// QR-accumulated Lyapunov exponents over `n` steps, largest first. The tangent
/// frame is re-orthogonalized through the transient too, but only the last `n`
/// steps are averaged.
pub fn lyapunov_spectrum(p: &GhmParams, s0: PlanarState, n: usize) -> Result<(f64, f64), GhmError> {
    lyapunov_spectrum_from(p, s0, lyapunov_transient(n), n)
}

pub fn lyapunov_spectrum_from(p: &GhmParams, s0: PlanarState, transient: usize, n: usize) -> Result<(f64, f64), GhmError> {
    let mut s = s0;
    let mut q1 = Vector2::new(1.0, 0.0);
    let mut q2 = Vector2::new(0.0, 1.0);
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..transient + n {
        let j = jacobian(s, p);
        let v1 = j * q1;
        let mut v2 = j * q2;
        let r11 = v1.norm();
        q1 = v1 / r11;
        v2 -= q1 * q1.dot(&v2);
        let r22 = v2.norm();
        q2 = v2 / r22;
        if i >= transient {
            s1 += r11.ln();
            s2 += r22.ln();
        }
        s = map(s, p);
        if escaped(&s) {
            return Err(GhmError::Escaped(i + 1));
        }
    }
    let (a, b) = (s1 / n as f64, s2 / n as f64);
    Ok(if a >= b { (a, b) } else { (b, a) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        let s = step(PlanarState::new(0.0, 0.0), &GhmParams::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(s, PlanarState::new(0.0, 1.0));
        let s = step(PlanarState::new(1.0, 1.0), &GhmParams::new(0.0, 1.0, 0.0)).unwrap();
        assert_eq!(s, PlanarState::new(1.0, -2.0));
        let s = step(PlanarState::new(2.0, 1.0), &GhmParams::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(s, PlanarState::new(1.0, -3.0));
        assert_eq!(
            step(PlanarState::new(0.0, 1e200), &GhmParams::new(0.0, 0.0, 0.0)),
            Err(GhmError::Overflow)
        );
    }

    #[test]
    fn inverse_undoes_step() {
        let p = GhmParams::new(0.3, 0.7, 0.1);
        let s = PlanarState::new(0.2, -0.4);
        let back = inverse(map(s, &p), &p).unwrap();
        assert!(back.dist(&s) < 1e-14);
        assert!(inverse(PlanarState::new(0.0, 1.0), &GhmParams::new(0.0, 0.0, 0.0)).is_none());
    }

    #[test]
    fn orbit_cases() {
        let p = GhmParams::new(0.0, 0.0, 0.0);
        let o = orbit(PlanarState::new(0.0, 0.0), &p, 50, 0);
        assert!(!o.escaped && o.states.iter().all(|s| *s == PlanarState::new(0.0, 0.0)));
        let o = orbit(PlanarState::new(10.0, 10.0), &p, 50, 0);
        assert!(o.escaped && o.states.len() < 5);
    }

    #[test]
    fn jacobian_examples() {
        let p = GhmParams::new(-1.0, 1.0, 0.0);
        let j = jacobian(PlanarState::new(-1.0, -1.0), &p);
        assert_eq!(j, Matrix2::new(0.0, 1.0, -1.0, 2.0));
        let ev = eigenvalues(&j);
        assert!((ev[0] - 1.0).norm() < 1e-7 && (ev[1] - 1.0).norm() < 1e-7);
        let p = GhmParams::new(0.4, -0.7, 0.3);
        assert_eq!(jacobian(PlanarState::new(0.0, 0.0), &p), Matrix2::new(0.0, 1.0, 0.7, 0.0));
        let s = PlanarState::new(0.3, 1.1);
        assert!((jacobian(s, &p).determinant() - (p.b + p.r * s.y)).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_examples() {
        let f = fixed_points(&GhmParams::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].state, PlanarState::new(-1.0, -1.0));
        assert_eq!(f[1].state, PlanarState::new(0.0, 0.0));
        let f = fixed_points(&GhmParams::new(-1.0, 1.0, 0.0)).unwrap();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].state, PlanarState::new(-1.0, -1.0));
        assert_eq!(f[0].stability, Stability::NonHyperbolic);
        assert!(fixed_points(&GhmParams::new(-2.0, 1.0, 0.0)).unwrap().is_empty());
        assert_eq!(fixed_points(&GhmParams::new(0.0, -1.0, -1.0)), Err(GhmError::DegenerateFamily));
        let lin = fixed_points(&GhmParams::new(2.0, 1.0, -1.0)).unwrap();
        assert_eq!(lin.len(), 1);
        assert_eq!(lin[0].state.y, 1.0);
    }

    #[test]
    fn bt_examples() {
        assert_eq!(bt_point(0.0).unwrap(), GhmParams::new(-1.0, 1.0, 0.0));
        let p = bt_point(0.1).unwrap();
        assert!((p.m + 0.9977324).abs() < 1e-7 && (p.b - 1.0952381).abs() < 1e-7);
        let p = bt_point(-0.1).unwrap();
        assert!((p.m + 0.9 / (0.95 * 0.95)).abs() < 1e-15);
        assert!((p.b - (1.0 - 0.1 / 0.95)).abs() < 1e-15);
        assert!(bt_point(1.0).is_err());
        for r in [-0.05, 0.0, 0.05] {
            let fp = bt_fixed_point(r).unwrap();
            for ev in fp.eigenvalues {
                assert!((ev - 1.0).norm() < 1e-6, "R={r} ev={ev}");
            }
        }
    }

    #[test]
    fn lyapunov_at_sink() {
        let p = GhmParams::new(0.0, 0.3, 0.0);
        let (l1, l2) = lyapunov_spectrum(&p, PlanarState::new(0.0, 0.0), 5000).unwrap();
        let expect = 0.3f64.sqrt().ln();
        assert!((l1 - expect).abs() < 1e-6 && (l2 - expect).abs() < 1e-6);
    }

    #[test]
    fn lyapunov_sum_matches_determinant() {
        let p = GhmParams::new(1.4, -0.3, 0.02);
        let s0 = PlanarState::new(0.1, 0.1);
        let n = 20000;
        let (l1, l2) = lyapunov_spectrum(&p, s0, n).unwrap();
        let mut s = s0;
        for _ in 0..lyapunov_transient(n) {
            s = map(s, &p);
        }
        let mut sum = 0.0;
        for _ in 0..n {
            sum += (p.b + p.r * s.y).abs().ln();
            s = map(s, &p);
        }
        assert!((l1 + l2 - sum / n as f64).abs() < 1e-8);
    }

    #[test]
    fn henon_conjugate_is_chaotic() {
        let p = GhmParams::new(1.4, -0.3, 0.0);
        let (l1, _) = lyapunov_spectrum(&p, PlanarState::new(0.0, 0.0), 1_000_000).unwrap();
        assert!(l1 > 0.3, "l1 = {l1}");
    }

    #[test]
    fn steeper_contraction_escapes() {
        let o = orbit(PlanarState::new(0.0, 0.0), &GhmParams::new(1.4, -0.42, 0.0), 100_000, 0);
        assert!(o.escaped);
    }
}
