//! One-dimensional invariant manifolds of planar saddles.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::BifError;
use crate::ghm::{self, FixedPointInfo, GhmParams, PlanarState, Stability};

pub const ANGLE_TOL: f64 = 1e-4;
pub const MAX_TURN: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldArc {
    pub side: Side,
    pub polyline: Vec<PlanarState>,
    pub base: FixedPointInfo,
}

#[derive(Debug, Clone, Copy)]
pub struct ManifoldOptions {
    /// Offset of the first fundamental domain from the saddle.
    pub delta: f64,
    pub arc_spacing: f64,
    pub max_turn: f64,
    /// Growth stops once a point leaves this sup-norm box.
    pub window: f64,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        ManifoldOptions { delta: 1e-7, arc_spacing: 1e-2, max_turn: MAX_TURN, window: 100.0 }
    }
}

/// W(s) = G^floor(s)(q(frac(s))), where q runs from q0 = p + delta * v to G(q0)
/// geometrically in lam, and G is the map (or its inverse), squared when the
/// relevant multiplier is negative. W is continuous at integer s.
#[derive(Debug, Clone, Copy)]
pub struct Parametrization {
    pub params: GhmParams,
    pub side: Side,
    pub base: Vector2<f64>,
    pub dir: Vector2<f64>,
    /// Expansion factor of G along `dir`; always > 1.
    pub lam: f64,
    pub squared: bool,
    pub delta: f64,
    q0: Vector2<f64>,
    q1: Vector2<f64>,
}

impl Parametrization {
    pub fn new(p: &GhmParams, fp: &FixedPointInfo, side: Side, branch: f64, delta: f64) -> Result<Self, BifError> {
        if fp.stability != Stability::Saddle || fp.eigenvalues.iter().any(|e| e.im != 0.0) {
            return Err(BifError::NotASaddle);
        }
        let (lu, ls) = (fp.eigenvalues[0].re, fp.eigenvalues[1].re);
        let mult = match side {
            Side::Unstable => lu,
            Side::Stable => ls,
        };
        // The Jacobian [[0,1],[c,d]] has eigenvector (1, mult).
        let v = Vector2::new(1.0, mult).normalize() * branch.signum();
        let squared = mult < 0.0;
        let growth = if squared { mult * mult } else { mult };
        let lam = match side {
            Side::Unstable => growth,
            Side::Stable => 1.0 / growth,
        };
        let base = fp.state.as_vec();
        let q0 = base + v * delta;
        let mut par = Parametrization { params: *p, side, base, dir: v, lam, squared, delta, q0, q1: q0 };
        par.q1 = par.apply(PlanarState::new(q0[0], q0[1]))?.as_vec();
        Ok(par)
    }

    pub fn apply(&self, q: PlanarState) -> Result<PlanarState, BifError> {
        let once = |q: PlanarState| match self.side {
            Side::Unstable => Ok(ghm::map(q, &self.params)),
            Side::Stable => ghm::inverse(q, &self.params).ok_or(BifError::InverseUndefined(q.x)),
        };
        let q = once(q)?;
        if self.squared {
            once(q)
        } else {
            Ok(q)
        }
    }

    pub fn seed(&self, frac: f64) -> PlanarState {
        let w = (self.lam.powf(frac) - 1.0) / (self.lam - 1.0);
        let q = self.q0 + (self.q1 - self.q0) * w;
        PlanarState::new(q[0], q[1])
    }

    pub fn point(&self, s: f64) -> Result<PlanarState, BifError> {
        let k = s.floor();
        let mut q = self.seed(s - k);
        for _ in 0..(k as i64).max(0) {
            q = self.apply(q)?;
            if !(q.x.abs() < 1e12 && q.y.abs() < 1e12) {
                return Ok(q);
            }
        }
        Ok(q)
    }
}

fn default_branch(p: &GhmParams, fp: &FixedPointInfo) -> f64 {
    let others: Vec<PlanarState> = ghm::fixed_points(p)
        .unwrap_or_default()
        .into_iter()
        .map(|f| f.state)
        .filter(|s| s.dist(&fp.state) > 1e-9)
        .collect();
    // Eigenvectors (1, mult) always have positive x, so the branch sign is the x-direction.
    match others.first() {
        Some(o) if o.x < fp.state.x => -1.0,
        _ => 1.0,
    }
}

pub fn saddle_manifold(p: &GhmParams, fp: &FixedPointInfo, side: Side, arclength: f64) -> Result<ManifoldArc, BifError> {
    saddle_manifold_with(p, fp, side, default_branch(p, fp), arclength, &ManifoldOptions::default())
}

pub fn saddle_manifold_with(
    p: &GhmParams,
    fp: &FixedPointInfo,
    side: Side,
    branch: f64,
    arclength: f64,
    opts: &ManifoldOptions,
) -> Result<ManifoldArc, BifError> {
    let par = Parametrization::new(p, fp, side, branch, opts.delta)?;
    let mut poly = vec![fp.state, par.point(0.0)?];
    let mut len = poly[0].dist(&poly[1]);
    let mut s = 0.0;
    let mut ds = 1.0 / 64.0;
    let s_max = 1e4;
    while len < arclength && s < s_max {
        let last = poly[poly.len() - 1];
        let prev = poly[poly.len() - 2];
        let cand = par.point(s + ds)?;
        let step = cand.dist(&last);
        if step == 0.0 {
            s += ds;
            ds = (2.0 * ds).min(0.125);
            continue;
        }
        let turn = {
            let a = last.as_vec() - prev.as_vec();
            let b = cand.as_vec() - last.as_vec();
            let c = a.dot(&b) / (a.norm() * b.norm());
            if c.is_finite() { c.clamp(-1.0, 1.0).acos() } else { 0.0 }
        };
        let resolved = step < 1e-3 * opts.arc_spacing;
        if (step > opts.arc_spacing || (turn > opts.max_turn && !resolved)) && ds > 1e-14 {
            ds *= 0.5;
            continue;
        }
        s += ds;
        len += step;
        poly.push(cand);
        if !(cand.x.abs() <= opts.window && cand.y.abs() <= opts.window) {
            break;
        }
        if step < 0.25 * opts.arc_spacing && turn < 0.25 * opts.max_turn {
            ds = (2.0 * ds).min(0.125);
        }
    }
    Ok(ManifoldArc { side, polyline: poly, base: *fp })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saddle(p: &GhmParams) -> FixedPointInfo {
        ghm::fixed_points(p).unwrap().into_iter().find(|f| f.stability == Stability::Saddle).unwrap()
    }

    #[test]
    fn first_domain_is_linear() {
        let p = GhmParams::new(-0.9, 1.015, 0.02);
        let fp = saddle(&p);
        for side in [Side::Stable, Side::Unstable] {
            let par = Parametrization::new(&p, &fp, side, 1.0, 1e-7).unwrap();
            for i in 0..=20 {
                let q = par.point(i as f64 / 20.0).unwrap().as_vec() - par.base;
                let perp = (q[0] * par.dir[1] - q[1] * par.dir[0]).abs() / q.norm();
                assert!(perp < 1e-6, "{side:?} {perp}");
            }
            let arc = saddle_manifold(&p, &fp, side, 0.5).unwrap();
            let seg = arc.polyline[1].as_vec() - arc.polyline[0].as_vec();
            let ang = (seg.normalize().dot(&par.dir.normalize()).abs()).clamp(0.0, 1.0).acos();
            assert!(ang < ANGLE_TOL);
        }
    }

    #[test]
    fn spacing_and_turn_respected() {
        let p = GhmParams::new(-0.9, 1.015, 0.02);
        let arc = saddle_manifold(&p, &saddle(&p), Side::Unstable, 3.0).unwrap();
        for w in arc.polyline.windows(2) {
            assert!(w[0].dist(&w[1]) <= 1e-2 + 1e-15);
        }
        for w in arc.polyline.windows(3).skip(1) {
            let a = w[1].as_vec() - w[0].as_vec();
            let b = w[2].as_vec() - w[1].as_vec();
            if b.norm() < 1e-5 {
                continue;
            }
            assert!((a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos() <= MAX_TURN + 1e-9);
        }
    }

    fn dist_to_polyline(q: &PlanarState, poly: &[PlanarState]) -> f64 {
        poly.windows(2)
            .map(|w| {
                let (a, b) = (w[0].as_vec(), w[1].as_vec());
                let t = ((q.as_vec() - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
                (q.as_vec() - (a + (b - a) * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn time_reversal_swaps_arcs() {
        // The forward map carries the stable arc into itself, the inverse carries the unstable arc into itself.
        let p = GhmParams::new(-0.5, 0.8, 0.0);
        let fp = saddle(&p);
        let opts = ManifoldOptions { arc_spacing: 1e-3, ..Default::default() };
        let st = saddle_manifold_with(&p, &fp, Side::Stable, 1.0, 1.0, &opts).unwrap();
        let un = saddle_manifold_with(&p, &fp, Side::Unstable, 1.0, 1.0, &opts).unwrap();
        for q in st.polyline.iter().skip(1).step_by(5) {
            assert!(dist_to_polyline(&ghm::map(*q, &p), &st.polyline) < 1e-6);
        }
        for q in un.polyline.iter().skip(1).step_by(5) {
            assert!(dist_to_polyline(&ghm::inverse(*q, &p).unwrap(), &un.polyline) < 1e-6);
        }
    }

    #[test]
    fn unstable_arc_accumulates_on_attractor() {
        let p = GhmParams::new(1.4, -0.3, 0.0);
        let fp = ghm::fixed_points(&p).unwrap().into_iter().find(|f| f.state.x > 0.0).unwrap();
        let opts = ManifoldOptions { arc_spacing: 2e-3, ..Default::default() };
        let arcs: Vec<ManifoldArc> = [1.0, -1.0]
            .iter()
            .map(|&b| saddle_manifold_with(&p, &fp, Side::Unstable, b, 60.0, &opts).unwrap())
            .collect();
        let orb = ghm::orbit(PlanarState::new(0.0, 0.0), &p, 200, 1000);
        for q in &orb.states {
            let d = arcs
                .iter()
                .flat_map(|a| a.polyline.iter())
                .map(|a| a.dist(q))
                .fold(f64::INFINITY, f64::min);
            assert!(d < 5e-3, "{d}");
        }
    }

    #[test]
    fn rejects_non_saddle() {
        let p = GhmParams::new(0.0, 0.3, 0.0);
        let fp = ghm::fixed_points(&p).unwrap().into_iter().find(|f| f.stability == Stability::Sink).unwrap();
        assert_eq!(saddle_manifold(&p, &fp, Side::Unstable, 1.0), Err(BifError::NotASaddle));
    }
}
