//! Fold and Hopf curves by pseudo-arclength continuation in (M, B, y).

use nalgebra::{Matrix2x3, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::BifError;
use crate::ghm::{self, GhmParams};

pub const CURVE_TOL: f64 = 1e-8;
const NEWTON_MAX: usize = 20;
const NEWTON_TOL: f64 = 1e-13;
const STEP_FLOOR: f64 = 1e-6;
const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    Fold,
    Hopf,
    TangencyPlus,
    TangencyMinus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub r: f64,
    pub step: f64,
    pub residuals: Vec<f64>,
    /// y-coordinate of the fixed point on the diagonal; empty for tangency curves.
    pub fixed_y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationCurve {
    pub kind: CurveKind,
    pub points: Vec<(f64, f64)>,
    pub meta: CurveMeta,
}

impl BifurcationCurve {
    pub fn params(&self, i: usize) -> GhmParams {
        GhmParams::new(self.points[i].0, self.points[i].1, self.meta.r)
    }
}

/// Defining system for a one-parameter family of fixed points at fixed R.
trait System {
    fn r(&self) -> f64;
    fn second(&self, u: &Vector3<f64>) -> f64;
    fn second_grad(&self, u: &Vector3<f64>) -> Vector3<f64>;

    fn eval(&self, u: &Vector3<f64>) -> Vector2<f64> {
        let (m, b, y) = (u[0], u[1], u[2]);
        Vector2::new((1.0 + self.r()) * y * y + (1.0 + b) * y - m, self.second(u))
    }

    fn jac(&self, u: &Vector3<f64>) -> Matrix2x3<f64> {
        let (b, y) = (u[1], u[2]);
        let g = self.second_grad(u);
        Matrix2x3::new(-1.0, y, 2.0 * (1.0 + self.r()) * y + 1.0 + b, g[0], g[1], g[2])
    }

    fn tangent(&self, u: &Vector3<f64>) -> Vector3<f64> {
        let j = self.jac(u);
        let a = Vector3::new(j[(0, 0)], j[(0, 1)], j[(0, 2)]);
        let b = Vector3::new(j[(1, 0)], j[(1, 1)], j[(1, 2)]);
        a.cross(&b).normalize()
    }
}

/// det(J - I) = 0 at the fixed point.
struct FoldSys(f64);
/// det J = 1 at the fixed point.
struct HopfSys(f64);

impl System for FoldSys {
    fn r(&self) -> f64 {
        self.0
    }
    fn second(&self, u: &Vector3<f64>) -> f64 {
        1.0 + u[1] + 2.0 * (1.0 + self.0) * u[2]
    }
    fn second_grad(&self, _u: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(0.0, 1.0, 2.0 * (1.0 + self.0))
    }
}

impl System for HopfSys {
    fn r(&self) -> f64 {
        self.0
    }
    fn second(&self, u: &Vector3<f64>) -> f64 {
        u[1] + self.0 * u[2] - 1.0
    }
    fn second_grad(&self, _u: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(0.0, 1.0, self.0)
    }
}

/// Newton on F(u) = 0 augmented by one extra linear condition `c . u = rhs`.
fn correct<S: System>(sys: &S, mut u: Vector3<f64>, c: &Vector3<f64>, rhs: f64) -> Option<(Vector3<f64>, f64)> {
    for _ in 0..NEWTON_MAX {
        let f = sys.eval(&u);
        let g = c.dot(&u) - rhs;
        let res = f.amax().max(g.abs());
        if res < NEWTON_TOL {
            return Some((u, f.amax()));
        }
        let j = sys.jac(&u);
        let a = Matrix3::new(
            j[(0, 0)], j[(0, 1)], j[(0, 2)],
            j[(1, 0)], j[(1, 1)], j[(1, 2)],
            c[0], c[1], c[2],
        );
        let du = a.lu().solve(&Vector3::new(-f[0], -f[1], -g))?;
        u += du;
        if !u.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    let f = sys.eval(&u);
    let res = f.amax().max((c.dot(&u) - rhs).abs());
    (res < 1e3 * NEWTON_TOL).then(|| (u, f.amax()))
}

struct Branch {
    pts: Vec<Vector3<f64>>,
    res: Vec<f64>,
}

/// Walks from `u0` along `dir` until `stop` reports a crossing of a boundary
/// `c . u = rhs`; the boundary point itself is appended.
fn walk<S: System>(
    sys: &S,
    u0: Vector3<f64>,
    dir: Vector3<f64>,
    h_max: f64,
    stop: &dyn Fn(&Vector3<f64>) -> Option<(Vector3<f64>, f64)>,
) -> Result<Branch, BifError> {
    let mut u = u0;
    let mut t = sys.tangent(&u);
    if t.dot(&dir) < 0.0 {
        t = -t;
    }
    let mut h = h_max;
    let mut br = Branch { pts: Vec::new(), res: Vec::new() };
    for _ in 0..MAX_STEPS {
        let pred = u + t * h;
        match correct(sys, pred, &t, t.dot(&pred)) {
            Some((next, res)) => {
                if let Some((c, rhs)) = stop(&next) {
                    let end = correct(sys, next, &c, rhs).ok_or(BifError::NoSeed)?;
                    br.pts.push(end.0);
                    br.res.push(end.1);
                    return Ok(br);
                }
                let mut nt = sys.tangent(&next);
                if nt.dot(&t) < 0.0 {
                    nt = -nt;
                }
                br.pts.push(next);
                br.res.push(res);
                u = next;
                t = nt;
                h = (2.0 * h).min(h_max);
            }
            None => {
                h *= 0.5;
                if h < STEP_FLOOR {
                    return Err(BifError::NoSeed);
                }
            }
        }
    }
    Ok(br)
}

fn seed(r: f64) -> Result<Vector3<f64>, BifError> {
    let p = ghm::bt_point(r).map_err(|_| BifError::OutOfRegime(r))?;
    Ok(Vector3::new(p.m, p.b, -1.0 / (1.0 + 0.5 * r)))
}

fn check_range(r: f64, range: (f64, f64), step: f64) -> Result<(), BifError> {
    if !(r.abs() < 1.0) {
        return Err(BifError::OutOfRegime(r));
    }
    if !(range.0 < range.1) || !(step > 0.0) || !step.is_finite() {
        return Err(BifError::BadInput(format!("range {:?}, step {}", range, step)));
    }
    Ok(())
}

fn to_curve(kind: CurveKind, r: f64, step: f64, pts: Vec<Vector3<f64>>, res: Vec<f64>) -> BifurcationCurve {
    BifurcationCurve {
        kind,
        points: pts.iter().map(|u| (u[0], u[1])).collect(),
        meta: CurveMeta { r, step, residuals: res, fixed_y: pts.iter().map(|u| u[2]).collect() },
    }
}

pub fn fold_curve(r: f64, b_range: (f64, f64), step: f64) -> Result<BifurcationCurve, BifError> {
    check_range(r, b_range, step)?;
    let sys = FoldSys(r);
    let u0 = seed(r)?;
    let (u0, res0) = correct(&sys, u0, &Vector3::new(0.0, 1.0, 0.0), u0[1]).ok_or(BifError::NoSeed)?;
    let eb = Vector3::new(0.0, 1.0, 0.0);
    let lo = b_range.0;
    let hi = b_range.1;
    let stop_hi = move |u: &Vector3<f64>| (u[1] >= hi).then_some((eb, hi));
    let stop_lo = move |u: &Vector3<f64>| (u[1] <= lo).then_some((eb, lo));

    let up = if u0[1] < hi { walk(&sys, u0, eb, step, &stop_hi)? } else { Branch { pts: vec![], res: vec![] } };
    let down = if u0[1] > lo { walk(&sys, u0, -eb, step, &stop_lo)? } else { Branch { pts: vec![], res: vec![] } };

    let mut pts = Vec::new();
    let mut res = Vec::new();
    for (p, e) in down.pts.iter().zip(&down.res).rev() {
        pts.push(*p);
        res.push(*e);
    }
    pts.push(u0);
    res.push(res0);
    pts.extend(up.pts);
    res.extend(up.res);
    let keep: Vec<usize> = (0..pts.len()).filter(|&i| pts[i][1] >= lo && pts[i][1] <= hi).collect();
    let pts: Vec<_> = keep.iter().map(|&i| pts[i]).collect();
    let res: Vec<_> = keep.iter().map(|&i| res[i]).collect();
    Ok(to_curve(CurveKind::Fold, r, step, pts, res))
}

/// Hopf curve from its trace = 2 endpoint (the BT point) to the trace = -2 endpoint,
/// clipped to `b_range`.
pub fn hopf_curve(r: f64, b_range: (f64, f64), step: f64) -> Result<BifurcationCurve, BifError> {
    check_range(r, b_range, step)?;
    let sys = HopfSys(r);
    let u0 = seed(r)?;
    let ey = Vector3::new(0.0, 0.0, 1.0);
    let (u0, res0) = correct(&sys, u0, &ey, u0[2]).ok_or(BifError::NoSeed)?;
    // trace J = -(2+R) y, so trace = -2 at y = 2/(2+R).
    let y_end = 2.0 / (2.0 + r);
    let (lo, hi) = b_range;
    let eb = Vector3::new(0.0, 1.0, 0.0);
    let stop = move |u: &Vector3<f64>| {
        if u[2] >= y_end {
            Some((ey, y_end))
        } else if u[1] > hi {
            Some((eb, hi))
        } else if u[1] < lo {
            Some((eb, lo))
        } else {
            None
        }
    };
    let br = walk(&sys, u0, ey, step, &stop)?;
    let mut pts = vec![u0];
    let mut res = vec![res0];
    pts.extend(br.pts);
    res.extend(br.res);
    let keep: Vec<usize> = (0..pts.len())
        .filter(|&i| pts[i][1] >= lo - 1e-12 && pts[i][1] <= hi + 1e-12)
        .collect();
    let pts: Vec<_> = keep.iter().map(|&i| pts[i]).collect();
    let res: Vec<_> = keep.iter().map(|&i| res[i]).collect();
    Ok(to_curve(CurveKind::Hopf, r, step, pts, res))
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> (f64, (f64, f64)) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    let q = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - q.0).hypot(p.1 - q.1), q)
}

/// Closest approach of two polylines: (distance, midpoint of the closest pair).
pub fn closest_approach(a: &BifurcationCurve, b: &BifurcationCurve) -> Option<(f64, (f64, f64))> {
    let mut best: Option<(f64, (f64, f64))> = None;
    let mut consider = |p: (f64, f64), line: &[(f64, f64)]| {
        let segs: Vec<((f64, f64), (f64, f64))> = if line.len() == 1 {
            vec![(line[0], line[0])]
        } else {
            line.windows(2).map(|w| (w[0], w[1])).collect()
        };
        for (s0, s1) in segs {
            let (d, q) = seg_dist(p, s0, s1);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, (0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1))));
            }
        }
    };
    for &p in &a.points {
        consider(p, &b.points);
    }
    for &p in &b.points {
        consider(p, &a.points);
    }
    best
}

/// Parameter-space distance from (m, b) to the nearest vertex or segment of `curve`.
pub fn distance_to_curve(curve: &BifurcationCurve, m: f64, b: f64) -> f64 {
    let pts = &curve.points;
    if pts.len() == 1 {
        return (pts[0].0 - m).hypot(pts[0].1 - b);
    }
    pts.windows(2)
        .map(|w| seg_dist((m, b), w[0], w[1]).0)
        .fold(f64::INFINITY, f64::min)
}
