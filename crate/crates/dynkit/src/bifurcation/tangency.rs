//! Splitting of the homoclinic loop of the dissipative saddle and the T± curves.

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::curves::{BifurcationCurve, CurveKind, CurveMeta};
use super::manifold::{Parametrization, Side};
use super::BifError;
use crate::ghm::{self, FixedPointInfo, GhmParams, PlanarState, Stability};

pub const GAP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct GapOptions {
    pub delta: f64,
    /// Samples of the section-scan per unit of the manifold parameter.
    pub scan_density: usize,
    /// Samples over one fundamental domain of the unstable arc.
    pub domain_samples: usize,
    /// Samples of the stable arc used to seed nearest-point searches.
    pub stable_samples: usize,
    pub window: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions { delta: 1e-7, scan_density: 50, domain_samples: 400, stable_samples: 3000, window: 10.0 }
    }
}

impl GapOptions {
    /// Same functional sampled at twice the resolution.
    pub fn refined(&self) -> Self {
        GapOptions {
            scan_density: 2 * self.scan_density,
            domain_samples: 2 * self.domain_samples,
            stable_samples: 2 * self.stable_samples,
            ..*self
        }
    }
}

/// Extremal signed offsets of one fundamental domain of W^u from W^s.
/// Both share a sign before the first tangency and after the second; the
/// zero of `min_offset` and of `max_offset` are the two tangency families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencyGap {
    pub max_offset: f64,
    pub min_offset: f64,
    pub saddle: PlanarState,
}

impl TangencyGap {
    pub fn branch(&self, kind: CurveKind) -> f64 {
        match kind {
            CurveKind::TangencyPlus => self.max_offset,
            _ => self.min_offset,
        }
    }
}

struct Loop {
    saddle: FixedPointInfo,
    center: Vector2<f64>,
    axis: Vector2<f64>,
}

fn setup(p: &GhmParams) -> Result<Loop, BifError> {
    let fps = ghm::fixed_points(p).map_err(|_| BifError::NoSaddle)?;
    let saddle = fps
        .iter()
        .copied()
        .find(|f| f.stability == Stability::Saddle && f.eigenvalues.iter().all(|e| e.im == 0.0 && e.re > 0.0))
        .ok_or(BifError::NoSaddle)?;
    let center = fps
        .iter()
        .find(|f| f.state.dist(&saddle.state) > 0.0)
        .ok_or(BifError::NoSaddle)?
        .state
        .as_vec();
    let axis = (center - saddle.state.as_vec()).normalize();
    Ok(Loop { saddle, center, axis })
}

/// Branch of W^side leaving the saddle toward the other fixed point.
fn param(p: &GhmParams, lp: &Loop, side: Side, delta: f64) -> Result<Parametrization, BifError> {
    let par = Parametrization::new(p, &lp.saddle, side, 1.0, delta)?;
    let sign = if par.dir.dot(&lp.axis) < 0.0 { -1.0 } else { 1.0 };
    Parametrization::new(p, &lp.saddle, side, sign, delta)
}

fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// First parameter value where the arc crosses the ray from the center pointing away from the saddle.
fn first_crossing(par: &Parametrization, lp: &Loop, opts: &GapOptions) -> Result<f64, BifError> {
    let k_max = ((opts.window / par.delta).ln() / par.lam.ln()).ceil() as usize + 60;
    let m = opts.scan_density;
    let mut rows: Vec<PlanarState> = (0..m).map(|j| par.seed(j as f64 / m as f64)).collect();
    let mut prev: Option<f64> = None;
    for k in 0..k_max {
        for (j, q) in rows.iter().enumerate() {
            let rel = q.as_vec() - lp.center;
            if !(q.x.abs() <= opts.window && q.y.abs() <= opts.window) {
                return Err(BifError::ArcEscape);
            }
            let c = cross2(lp.axis, rel);
            if let Some(pc) = prev {
                if pc * c <= 0.0 && lp.axis.dot(&rel) > 0.0 {
                    return Ok(k as f64 + j as f64 / m as f64);
                }
            }
            prev = Some(c);
        }
        for q in rows.iter_mut() {
            *q = par.apply(*q)?;
        }
    }
    Err(BifError::ArcEscape)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd { (c, fc) } else { (d, fd) }
}

struct StableArc {
    par: Parametrization,
    s: Vec<f64>,
    pts: Vec<Vector2<f64>>,
}

impl StableArc {
    fn at(&self, s: f64) -> Vector2<f64> {
        self.par.point(s).map(|q| q.as_vec()).unwrap_or(Vector2::new(f64::NAN, f64::NAN))
    }

    /// Signed distance from q to the stable arc; positive on the left of its direction of growth.
    fn signed_distance(&self, q: Vector2<f64>) -> f64 {
        let mut j = 0;
        let mut best = f64::INFINITY;
        for (i, p) in self.pts.iter().enumerate() {
            let d = (p - q).norm_squared();
            if d < best {
                best = d;
                j = i;
            }
        }
        let j = j.clamp(1, self.pts.len() - 2);
        let (a, b) = (self.s[j - 1], self.s[j + 1]);
        let (s, _) = golden_min(&|s| (self.at(s) - q).norm_squared(), a, b, 60);
        let foot = self.at(s);
        // Seeds near the saddle resolve s only to ~1e-8.
        let h = 0.25 * (b - a);
        let tan = self.at(s + h) - self.at(s - h);
        let d = (q - foot).norm();
        if cross2(tan, q - foot) >= 0.0 { d } else { -d }
    }
}

pub fn tangency_gap(p: &GhmParams) -> Result<TangencyGap, BifError> {
    tangency_gap_with(p, &GapOptions::default())
}

pub fn tangency_gap_with(p: &GhmParams, opts: &GapOptions) -> Result<TangencyGap, BifError> {
    let lp = setup(p)?;
    let pu = param(p, &lp, Side::Unstable, opts.delta)?;
    let ps = param(p, &lp, Side::Stable, opts.delta)?;
    let su = first_crossing(&pu, &lp, opts)?;
    let ss = first_crossing(&ps, &lp, opts)?;

    let n = opts.stable_samples;
    let s: Vec<f64> = (0..n).map(|i| ss - 1.5 + 3.0 * i as f64 / (n - 1) as f64).collect();
    let pts: Vec<Vector2<f64>> = s.iter().map(|&t| ps.point(t).map(|q| q.as_vec())).collect::<Result<_, _>>()?;
    let arc = StableArc { par: ps, s, pts };

    let m = opts.domain_samples;
    let grid: Vec<f64> = (0..m).map(|i| su - 0.5 + i as f64 / m as f64).collect();
    let g = |t: f64| pu.point(t).map(|q| arc.signed_distance(q.as_vec())).unwrap_or(f64::NAN);
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(BifError::ArcEscape);
    }
    let h = 1.0 / m as f64;
    let refine = |sign: f64| {
        let (i, _) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if sign * v > acc.1 { (i, sign * v) } else { acc });
        let (_, v) = golden_min(&|t| -sign * g(t), grid[i] - h, grid[i] + h, 50);
        (-v).max(sign * vals[i]) * sign
    };
    let max_offset = refine(1.0);
    let min_offset = refine(-1.0);
    Ok(TangencyGap { max_offset, min_offset, saddle: lp.saddle.state })
}

/// B on the Hopf curve for a given M at fixed R, if the Hopf curve reaches that M.
fn hopf_b(m: f64, r: f64) -> Option<f64> {
    // M = y^2 + 2y and B = 1 - R y on the Hopf curve.
    (m >= -1.0).then(|| 1.0 - r * (-1.0 + (1.0 + m).sqrt()))
}

fn bisect(f: &dyn Fn(f64) -> Option<f64>, mut a: f64, mut b: f64, fa: f64, tol: f64) -> Option<(f64, f64)> {
    let mut sa = fa.signum();
    let mut last = (a, fa);
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let fc = f(c)?;
        last = (c, fc);
        if fc.abs() < tol || (b - a).abs() < 1e-15 {
            break;
        }
        if fc.signum() == sa {
            a = c;
            sa = fc.signum();
        } else {
            b = c;
        }
    }
    Some(last)
}

#[derive(Debug, Clone, Copy)]
pub struct TangencySearch {
    pub rays: usize,
    pub b_step: f64,
    pub b_reach: f64,
    pub gap: GapOptions,
}

impl Default for TangencySearch {
    fn default() -> Self {
        TangencySearch { rays: 12, b_step: 2.5e-4, b_reach: 0.02, gap: GapOptions::default() }
    }
}

/// Both tangency families inside `seed_box = ((m_lo, m_hi), (b_lo, b_hi))`, traced along
/// constant-M rays spaced by `step` (or by the default ray count when `step` is 0).
/// The family whose zero lies nearer the Hopf curve is labelled TangencyMinus.
pub fn tangency_curve(
    r: f64,
    seed_box: ((f64, f64), (f64, f64)),
    step: f64,
) -> Result<(BifurcationCurve, BifurcationCurve), BifError> {
    tangency_curve_with(r, seed_box, step, &TangencySearch::default())
}

pub fn tangency_curve_with(
    r: f64,
    seed_box: ((f64, f64), (f64, f64)),
    step: f64,
    search: &TangencySearch,
) -> Result<(BifurcationCurve, BifurcationCurve), BifError> {
    let ((m_lo, m_hi), (b_lo, b_hi)) = seed_box;
    if !(m_lo < m_hi && b_lo < b_hi) {
        return Err(BifError::BadInput(format!("seed box {:?}", seed_box)));
    }
    let bt = ghm::bt_point(r).map_err(|_| BifError::OutOfRegime(r))?;
    let start = m_lo.max(bt.m);
    let rays: Vec<f64> = if step > 0.0 {
        let n = ((m_hi - start) / step).floor() as usize;
        (1..=n).map(|i| start + i as f64 * step).collect()
    } else {
        let n = search.rays;
        (1..=n).map(|i| start + (m_hi - start) * i as f64 / n as f64).collect()
    };

    use rayon::prelude::*;
    let found: Vec<(f64, Vec<(f64, f64, f64)>)> = rays
        .par_iter()
        .map(|&m| (m, scan_ray(r, m, (b_lo, b_hi), search)))
        .collect();

    let mut minus = Vec::new();
    let mut plus = Vec::new();
    for (m, zeros) in found {
        for (b, g, which) in zeros {
            if which < 0.0 {
                minus.push((m, b, g));
            } else {
                plus.push((m, b, g));
            }
        }
    }
    if minus.is_empty() || plus.is_empty() {
        return Err(BifError::NoCrossing);
    }
    let mk = |kind, v: Vec<(f64, f64, f64)>| BifurcationCurve {
        kind,
        points: v.iter().map(|t| (t.0, t.1)).collect(),
        meta: CurveMeta { r, step, residuals: v.iter().map(|t| t.2.abs()).collect(), fixed_y: Vec::new() },
    };
    Ok((mk(CurveKind::TangencyMinus, minus), mk(CurveKind::TangencyPlus, plus)))
}

/// Zeros of the two gap branches along B at fixed M: (B, gap, -1 for min / +1 for max branch).
fn scan_ray(r: f64, m: f64, b_win: (f64, f64), search: &TangencySearch) -> Vec<(f64, f64, f64)> {
    let Some(bh) = hopf_b(m, r) else { return Vec::new() };
    let n = (search.b_reach / search.b_step).round() as i64;
    let eval = |b: f64| tangency_gap_with(&GhmParams::new(m, b, r), &search.gap).ok();
    let samples: Vec<(f64, TangencyGap)> = (-n..=n)
        .map(|j| bh + j as f64 * search.b_step)
        .filter(|b| *b >= b_win.0 && *b <= b_win.1)
        .filter_map(|b| eval(b).map(|g| (b, g)))
        .collect();
    let mut out = Vec::new();
    for (which, kind) in [(-1.0, CurveKind::TangencyMinus), (1.0, CurveKind::TangencyPlus)] {
        for w in samples.windows(2) {
            let (b0, g0) = (w[0].0, w[0].1.branch(kind));
            let (b1, g1) = (w[1].0, w[1].1.branch(kind));
            if (b1 - b0) > 1.5 * search.b_step || g0.signum() == g1.signum() {
                continue;
            }
            let f = |b: f64| eval(b).map(|g| g.branch(kind));
            if let Some((b, g)) = bisect(&f, b0, b1, g0, 0.1 * GAP_TOL) {
                if g.abs() < GAP_TOL {
                    out.push((b, g, which));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_saddle_far_below_fold() {
        assert_eq!(tangency_gap(&GhmParams::new(-3.0, 1.0, 0.02)), Err(BifError::NoSaddle));
    }

    #[test]
    fn gap_signs_across_wedge() {
        let r = 0.02;
        let m = -0.9;
        let before = tangency_gap(&GhmParams::new(m, 1.0145, r)).unwrap();
        let inside = tangency_gap(&GhmParams::new(m, 1.01545, r)).unwrap();
        let after = tangency_gap(&GhmParams::new(m, 1.0165, r)).unwrap();
        assert_eq!(before.max_offset.signum(), before.min_offset.signum());
        assert_eq!(after.max_offset.signum(), after.min_offset.signum());
        assert_ne!(before.min_offset.signum(), after.min_offset.signum());
        assert!(inside.min_offset < 0.0 && inside.max_offset > 0.0);
    }

    #[test]
    fn single_sign_flip_along_segment() {
        let r = 0.02;
        let m = -0.8;
        let mut flips = [0, 0];
        let mut prev: Option<TangencyGap> = None;
        for i in 0..=40 {
            let b = 1.010 + i as f64 * 2.5e-4;
            let g = tangency_gap(&GhmParams::new(m, b, r)).unwrap();
            if let Some(p) = prev {
                flips[0] += (p.min_offset.signum() != g.min_offset.signum()) as usize;
                flips[1] += (p.max_offset.signum() != g.max_offset.signum()) as usize;
            }
            prev = Some(g);
        }
        assert_eq!(flips, [1, 1]);
    }
}
