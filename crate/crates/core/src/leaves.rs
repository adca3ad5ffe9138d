//! Leaves as double covers of the `y`-plane: the paths `sigma_y` from `y` to
//! `D(y)`, their lifts, the figure-eight loop, and transport of the perturbed
//! foliation along a lifted path.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{log_h, principal_power, Cpx, Eps};
use crate::dulac::{dulac_integrable, dulac_real, negative_ray_level};
use crate::error::{Error, Result};
use crate::foliation::{Branch, FoliationParams};
use crate::isoclines::{classify_point, component_point, theta_of, Region, Side, TOL_ISO};
use crate::ode::{Dopri5, Tolerances};

/// Points per constant-`|h|` sweep before refinement.
const SWEEP_POINTS: usize = 24;
/// Points on a middle piece.
const MIDDLE_POINTS: usize = 32;
/// Maximum subdivision depth of a lift segment.
const LIFT_DEPTH: usize = 40;

fn c0() -> Cpx {
    Cpx::new(0.0, 0.0)
}

/// `(y0, D(y0))`, the two ramification points of the projection of the leaf
/// through `(0, y0)` inside the working domain.
pub fn ramification_pair(y0: Cpx, eps: Eps) -> Result<(Cpx, Cpx)> {
    if y0 == Cpx::new(eps.y_center(), 0.0) {
        return Ok((y0, y0));
    }
    Ok((y0, dulac_integrable(y0, eps)?))
}

/// `x^2` on the leaf through `(0, y0)`: `y - f(y0) (1 - y)^{-1/eps}`, which
/// equals `(f(y) - f(y0)) (1 - y)^{-1/eps}`.
pub fn leaf_x_squared(y: Cpx, y0: Cpx, eps: Eps) -> Result<Cpx> {
    let inv = 1.0 / eps.get();
    let f0 = y0 * principal_power(1.0 - y0, inv)?;
    Ok(y - f0 * principal_power(1.0 - y, -inv)?)
}

/// Signed square root of [`leaf_x_squared`] (principal root times `sign`).
/// Continuity along a path is the job of [`lift_path`].
pub fn leaf_x(y: Cpx, y0: Cpx, eps: Eps, sign: f64) -> Result<Cpx> {
    if y == y0 {
        return Ok(c0());
    }
    let q = leaf_x_squared(y, y0, eps)?;
    Ok(q.sqrt() * sign.signum())
}

/// A path in the `y`-plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaPath {
    pub points: Vec<Cpx>,
}

impl SigmaPath {
    pub fn start(&self) -> Cpx {
        self.points[0]
    }

    pub fn end(&self) -> Cpx {
        *self.points.last().unwrap()
    }

    pub fn reversed(&self) -> SigmaPath {
        SigmaPath { points: self.points.iter().rev().copied().collect() }
    }

    pub fn conj(&self) -> SigmaPath {
        SigmaPath { points: self.points.iter().map(|p| p.conj()).collect() }
    }
}

fn gap_limit(p: Cpx, eps: Eps) -> f64 {
    0.1 * (eps.y_center() + 0.2 * p.norm())
}

fn push_point(out: &mut Vec<Cpx>, p: Cpx) {
    if out.last().map_or(true, |q| (*q - p).norm() > 1e-14) {
        out.push(p);
    }
}

/// Point of modulus `m` on the `side` component of `C_theta`; `|theta| = pi`
/// on the `D0` side is the negative ray.
fn level_point(theta: f64, m: f64, side: Side, eps: Eps, hint: f64) -> Result<Cpx> {
    if side == Side::D0 && theta.abs() >= PI {
        return Ok(Cpx::new(-negative_ray_level(m, eps)?, 0.0));
    }
    component_point(theta, m, side, eps, hint)
}

/// Constant-`|h|` sweep of `theta` from `ta` to `tb` on one side, refined until
/// consecutive points are close.
fn sweep(ta: f64, tb: f64, m: f64, side: Side, eps: Eps, hint: f64) -> Result<Vec<Cpx>> {
    let mut thetas: Vec<f64> = (0..=SWEEP_POINTS).map(|k| ta + (tb - ta) * k as f64 / SWEEP_POINTS as f64).collect();
    let mut pts = thetas.iter().map(|&t| level_point(t, m, side, eps, hint)).collect::<Result<Vec<_>>>()?;
    let mut i = 0;
    let mut inserted = 0;
    while i + 1 < pts.len() {
        if (pts[i + 1] - pts[i]).norm() > gap_limit(pts[i], eps) && (thetas[i + 1] - thetas[i]).abs() > 1e-12 {
            inserted += 1;
            if inserted > 20_000 {
                return Err(Error::TraceStall { at: pts[i], steps: inserted });
            }
            let tm = 0.5 * (thetas[i] + thetas[i + 1]);
            let pm = level_point(tm, m, side, eps, hint)?;
            thetas.insert(i + 1, tm);
            pts.insert(i + 1, pm);
        } else {
            i += 1;
        }
    }
    Ok(pts)
}

fn segment(a: Cpx, b: Cpx, n: usize) -> Vec<Cpx> {
    (0..=n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect()
}

/// `sigma_y`: a path from `y` to `D(y)` through `D1 ∪ D0`.
///
/// Constant-`|h|` sweep on the `D1` side from `theta(y)` to `0`, then the
/// real segment `[y_r, D(y_r)]` (or, above `h(y_c)`, the `theta = 0` curve
/// through the center), then the sweep back to `theta(y)` on the `D0` side.
/// Points of `D0` get the reversed path of their image.
pub fn build_sigma(y: Cpx, eps: Eps) -> Result<SigmaPath> {
    let yc = eps.y_center();
    if y.im == 0.0 {
        if y.re == yc {
            return Err(Error::AtRamification(y));
        }
        let w = dulac_real(y.re, eps)?;
        return Ok(SigmaPath { points: segment(y, Cpx::new(w, 0.0), MIDDLE_POINTS * 2) });
    }
    let ell = log_h(y, eps)?;
    let theta0 = ell.im / eps.get();
    let m = ell.re.exp();
    let near_real_d0 = theta0.abs() <= TOL_ISO && m <= eps.h_center() && y.re < yc;
    if near_real_d0 || classify_point(y, eps)? == Region::D0 {
        let image = dulac_integrable(y, eps)?;
        let mut path = build_sigma(image, eps)?.reversed();
        path.points[0] = y;
        return Ok(path);
    }
    let image = dulac_integrable(y, eps)?;
    let s = if theta0 != 0.0 { theta0.signum() } else { -y.im.signum() };
    let mut out = Vec::new();
    if theta0.abs() <= TOL_ISO && m > eps.h_center() {
        // on C_{±0}: go through the center to the conjugate
        for p in center_passage(y, m, eps, -y.im.signum())? {
            push_point(&mut out, p);
        }
        *out.last_mut().unwrap() = image;
        return Ok(SigmaPath { points: out });
    }
    for p in sweep(theta0, 0.0, m, Side::D1, eps, -s)? {
        push_point(&mut out, p);
    }
    let yr = *out.last().unwrap();
    let middle = if m <= eps.h_center() {
        let w = component_point(0.0, m, Side::D0, eps, s)?;
        segment(yr, w, MIDDLE_POINTS)
    } else {
        center_passage(yr, m, eps, -s)?
    };
    for p in middle {
        push_point(&mut out, p);
    }
    let t_end = theta0.clamp(-PI, PI);
    for p in sweep(0.0, t_end, m, Side::D0, eps, s)? {
        push_point(&mut out, p);
    }
    if theta0.abs() > PI {
        push_point(&mut out, image);
    }
    *out.last_mut().unwrap() = image;
    out[0] = y;
    Ok(SigmaPath { points: out })
}

/// From a point of modulus `m` on the half of the `theta = 0` curve in the
/// half plane `half`, through `y_c`, to its conjugate.
fn center_passage(start: Cpx, m: f64, eps: Eps, half: f64) -> Result<Vec<Cpx>> {
    let hc = eps.h_center();
    let yc = Cpx::new(eps.y_center(), 0.0);
    let mut pts = vec![start];
    // |h| - h_c grows quadratically with the distance from the center
    for k in (1..MIDDLE_POINTS).rev() {
        let u = k as f64 / MIDDLE_POINTS as f64;
        pts.push(component_point(0.0, hc + (m - hc) * u * u, Side::D1, eps, half)?);
    }
    pts.push(yc);
    for k in 1..MIDDLE_POINTS {
        let u = k as f64 / MIDDLE_POINTS as f64;
        pts.push(component_point(0.0, hc + (m - hc) * u * u, Side::D1, eps, -half)?);
    }
    pts.push(start.conj());
    Ok(pts)
}

/// A path on a leaf, given by its projection and the continuous `x` over it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafPath {
    pub y_samples: Vec<Cpx>,
    pub x_samples: Vec<Cpx>,
    /// `±1` per segment: which principal square root the lift follows.
    pub sign_track: Vec<i8>,
    /// Value of `h` on the leaf.
    pub level: Cpx,
}

impl LeafPath {
    pub fn len(&self) -> usize {
        self.y_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y_samples.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (Cpx, Cpx)> + '_ {
        self.x_samples.iter().copied().zip(self.y_samples.iter().copied())
    }

    /// Largest `|x^2 - (f(y) - f(y0))(1 - y)^{-1/eps}|` over the samples.
    pub fn covering_residual(&self, y0: Cpx, eps: Eps) -> f64 {
        self.points()
            .filter_map(|(x, y)| leaf_x_squared(y, y0, eps).ok().map(|q| (x * x - q).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest relative drift of `(y - x^2)(1 - y)^{1/eps}` along the path,
    /// the branch-free form of the leaf equation `H = const`.
    pub fn h_drift(&self, eps: Eps) -> f64 {
        let inv = 1.0 / eps.get();
        let g = |x: Cpx, y: Cpx| principal_power(1.0 - y, inv).map(|p| (y - x * x) * p);
        let Ok(g0) = g(self.x_samples[0], self.y_samples[0]) else {
            return f64::INFINITY;
        };
        self.points()
            .map(|(x, y)| g(x, y).map_or(f64::INFINITY, |v| (v - g0).norm() / g0.norm().max(1e-300)))
            .fold(0.0, f64::max)
    }

    pub fn negate(&self) -> LeafPath {
        LeafPath {
            y_samples: self.y_samples.clone(),
            x_samples: self.x_samples.iter().map(|x| -x).collect(),
            sign_track: self.sign_track.iter().map(|s| -s).collect(),
            level: self.level,
        }
    }

    pub fn conj(&self) -> LeafPath {
        LeafPath {
            y_samples: self.y_samples.iter().map(|y| y.conj()).collect(),
            x_samples: self.x_samples.iter().map(|x| x.conj()).collect(),
            sign_track: self.sign_track.clone(),
            level: self.level.conj(),
        }
    }
}

struct Lifter {
    y0: Cpx,
    eps: Eps,
    ys: Vec<Cpx>,
    xs: Vec<Cpx>,
    signs: Vec<i8>,
}

impl Lifter {
    fn root(&self, y: Cpx) -> Result<Cpx> {
        Ok(leaf_x_squared(y, self.y0, self.eps)?.sqrt())
    }

    fn accept(&mut self, y: Cpx, x: Cpx, r: Cpx) {
        let s = if (x - r).norm() <= (x + r).norm() { 1 } else { -1 };
        self.ys.push(y);
        self.xs.push(x);
        self.signs.push(s);
    }

    /// Lift the straight piece from the last accepted point to `b`.
    fn extend(&mut self, b: Cpx, final_point: bool, depth: usize) -> Result<()> {
        let a = *self.ys.last().unwrap();
        let xa = *self.xs.last().unwrap();
        let r = self.root(b)?;
        let c = if (r - xa).norm() <= (r + xa).norm() { r } else { -r };
        let unambiguous = (c - xa).norm() < 0.5 * (c + xa).norm();
        if final_point && r.norm() < 1e-6 {
            // the path ends on a ramification point
            self.accept(b, c0(), r);
            return Ok(());
        }
        if unambiguous {
            self.accept(b, c, r);
            return Ok(());
        }
        if depth >= LIFT_DEPTH {
            return Err(Error::LiftAmbiguity { at: b });
        }
        let mid = 0.5 * (a + b);
        if self.root(mid)?.norm() < 1e-12 {
            return Err(Error::LiftAmbiguity { at: mid });
        }
        self.extend(mid, false, depth + 1)?;
        self.extend(b, final_point, depth + 1)
    }
}

/// Continuous lift of `sigma` (starting at the ramification point `y0`) to
/// the leaf through `(0, y0)`; `initial_sign` picks the sheet at the first
/// step.
pub fn lift_path(sigma: &SigmaPath, y0: Cpx, eps: Eps, initial_sign: f64) -> Result<LeafPath> {
    let pts = &sigma.points;
    if pts.len() < 2 {
        return Err(Error::InvalidParameter("path needs at least two points".into()));
    }
    let level = crate::analytic::h_section(y0, eps)?;
    let mut lifter = Lifter { y0, eps, ys: vec![pts[0]], xs: vec![c0()], signs: Vec::new() };
    let sign = if initial_sign < 0.0 { -1.0 } else { 1.0 };
    // first step from the ramification point: the sign picks the sheet
    let mut first = pts[1];
    let mut r = lifter.root(first)?;
    let mut k = 1;
    while r.norm() == 0.0 {
        k += 1;
        if k >= pts.len() {
            return Err(Error::AtRamification(y0));
        }
        first = pts[k];
        r = lifter.root(first)?;
    }
    lifter.accept(first, r * sign, r);
    let last = pts.len() - 1;
    for (i, &b) in pts.iter().enumerate().skip(k + 1) {
        lifter.extend(b, i == last, 0)?;
    }
    Ok(LeafPath { y_samples: lifter.ys, x_samples: lifter.xs, sign_track: lifter.signs, level })
}

/// Base lift of `sigma_y` for the given realization of the Dulac map.
pub fn base_lift(y: Cpx, eps: Eps, branch: Branch) -> Result<LeafPath> {
    let sigma = build_sigma(y, eps)?;
    lift_path(&sigma, y, eps, branch.sign())
}

/// The figure-eight loop on the leaf through `(0, y_+)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FigureEight {
    pub loop_path: LeafPath,
    pub base: (Cpx, Cpx),
    pub y_plus: Cpx,
    /// `D(y_+)`, on the negative ray.
    pub w: Cpx,
    /// Index of `base` in `loop_path`.
    pub base_index: usize,
}

impl FigureEight {
    /// `|first point - last point|`.
    pub fn closure_residual(&self) -> f64 {
        let n = self.loop_path.len();
        let (x0, y0) = (self.loop_path.x_samples[0], self.loop_path.y_samples[0]);
        let (x1, y1) = (self.loop_path.x_samples[n - 1], self.loop_path.y_samples[n - 1]);
        (x0 - x1).norm().max((y0 - y1).norm())
    }
}

/// `gamma^1_{y+} (gamma^2_{y-})^{-1}` followed by its conjugate, where
/// `y- = conj(y+)`.
///
/// `gamma^1_{y-}` is the conjugate of `gamma^1_{y+}` and `gamma^2 = -gamma^1`,
/// so the half loop is the lift of `sigma_{y+}` followed by the reversed,
/// negated conjugate. The switch of sheets happens at `(0, D(y_+))`, a
/// regular point of the leaf where only the projection ramifies; the loop
/// passes it in the `x` chart instead of detouring in the `y`-plane.
pub fn figure_eight(y_plus: Cpx, eps: Eps) -> Result<FigureEight> {
    let theta = theta_of(y_plus, eps)?;
    if (theta.abs() - PI).abs() > 1e-6 {
        return Err(Error::InvalidParameter(format!("{y_plus} is not on C_{{±pi}} (theta = {theta})")));
    }
    let sigma = build_sigma(y_plus, eps)?;
    let w = sigma.end();
    if w.re >= 0.0 || w.im.abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("D({y_plus}) = {w} is not on the negative ray")));
    }
    let g1 = lift_path(&sigma, y_plus, eps, 1.0)?;
    let n = g1.len();
    let mut half = g1.clone();
    // (gamma^2_{y-})^{-1}: negated conjugate, walked backwards
    for k in (0..n - 1).rev() {
        half.x_samples.push(-g1.x_samples[k].conj());
        half.y_samples.push(g1.y_samples[k].conj());
    }
    half.sign_track.extend(g1.sign_track.iter().rev().map(|s| -s));
    let mirror = half.conj();
    let mut full = half;
    for (x, y) in mirror.points().skip(1) {
        full.x_samples.push(x);
        full.y_samples.push(y);
    }
    full.sign_track.extend(mirror.sign_track.iter().copied());
    let base = (full.x_samples[0], full.y_samples[0]);
    Ok(FigureEight { loop_path: full, base, y_plus, w: Cpx::new(w.re, 0.0), base_index: 0 })
}

/// How a transport ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportEnd {
    /// On `{x = c}`.
    Section(Cpx),
    /// On `{y = c}`.
    YSection(Cpx),
    /// At the last base point, in the chart coordinate of the last leg.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// `x` is the parameter, `y` follows `dy/dx = -A/B`.
    X,
    /// `y` is the parameter, `x` follows `dx/dy = -B/A`.
    Y,
}

fn transport_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-12, atol: 1e-14, h_max: 0.25, max_steps: 20_000, ..Default::default() }
}

/// Integrates the perturbed leaf from `(x, y)` along the straight leg to
/// `target` of the chart coordinate.
fn leg(params: &FoliationParams, chart: Chart, p: (Cpx, Cpx), target: Cpx) -> Result<(Cpx, Cpx)> {
    let (x, y) = p;
    let (from, other) = match chart {
        Chart::X => (x, y),
        Chart::Y => (y, x),
    };
    let d = target - from;
    if d.norm() == 0.0 {
        return Ok(p);
    }
    let mut worst = f64::INFINITY;
    let rhs = |s: f64, u: &[f64; 2]| -> [f64; 2] {
        let free = Cpx::new(u[0], u[1]);
        let param = from + d * s;
        let (a, b) = match chart {
            Chart::X => params.one_form_c(param, free),
            Chart::Y => params.one_form_c(free, param),
        };
        let v = match chart {
            Chart::X => -a / b * d,
            Chart::Y => -b / a * d,
        };
        [v.re, v.im]
    };
    let mut solver = Dopri5::new(rhs, 0.0, [other.re, other.im], 0.25, transport_tolerances());
    while solver.t() < 1.0 {
        let step = solver.step_toward(1.0).map_err(|e| Error::ContinuationBreakdown {
            at: p.1,
            x: p.0,
            reason: format!("leg integration failed: {e}"),
        })?;
        let u = step.y1;
        let free = Cpx::new(u[0], u[1]);
        let param = from + d * step.t1;
        let (xx, yy) = match chart {
            Chart::X => (param, free),
            Chart::Y => (free, param),
        };
        let (a, b) = params.one_form_c(xx, yy);
        let ratio = match chart {
            Chart::X => b.norm() / a.norm().max(1e-300),
            Chart::Y => a.norm() / b.norm().max(1e-300),
        };
        worst = worst.min(ratio);
        if !free.re.is_finite() || !free.im.is_finite() || worst < 1e-4 {
            return Err(Error::ContinuationBreakdown {
                at: yy,
                x: xx,
                reason: "leaf tangent to the chart fibre".into(),
            });
        }
    }
    let u = solver.y();
    let free = Cpx::new(u[0], u[1]);
    Ok(match chart {
        Chart::X => (target, free),
        Chart::Y => (free, target),
    })
}

fn pick_chart(params: &FoliationParams, x: Cpx, y: Cpx, current: Option<Chart>) -> Chart {
    let (a, b) = params.one_form_c(x, y);
    let (na, nb) = (a.norm(), b.norm());
    match current {
        Some(Chart::X) if nb >= 0.5 * na => Chart::X,
        Some(Chart::Y) if na >= 0.5 * nb => Chart::Y,
        _ => {
            if na <= nb {
                Chart::X
            } else {
                Chart::Y
            }
        }
    }
}

/// Bisections of a base segment allowed when a leg runs into a tangency.
const SEGMENT_DEPTH: usize = 12;

fn transport_segment(
    params: &FoliationParams,
    cur: (Cpx, Cpx),
    a: (Cpx, Cpx),
    b: (Cpx, Cpx),
    chart: &mut Option<Chart>,
    depth: usize,
) -> Result<(Cpx, Cpx)> {
    let mid = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let next = pick_chart(params, mid.0, mid.1, *chart);
    let legs = match next {
        Chart::X => leg(params, Chart::X, cur, a.0).and_then(|p| leg(params, Chart::X, p, b.0)),
        Chart::Y => leg(params, Chart::Y, cur, a.1).and_then(|p| leg(params, Chart::Y, p, b.1)),
    };
    match legs {
        Ok(p) => {
            *chart = Some(next);
            Ok(p)
        }
        Err(Error::ContinuationBreakdown { .. }) if depth < SEGMENT_DEPTH => {
            // the leaf turned within the segment: re-pick charts on halves
            *chart = None;
            let p = transport_segment(params, cur, a, mid, chart, depth + 1)?;
            transport_segment(params, p, mid, b, chart, depth + 1)
        }
        Err(e) => Err(e),
    }
}

/// Follows the perturbed foliation from `start` alongside the base path
/// (a lift of the unperturbed foliation), switching between the `x` and `y`
/// charts where the leaf becomes tangent to one of them.
pub fn transport(base: &LeafPath, start: (Cpx, Cpx), params: &FoliationParams, end: TransportEnd) -> Result<(Cpx, Cpx)> {
    let n = base.len();
    if n < 2 {
        return Err(Error::InvalidParameter("base path too short".into()));
    }
    let mut cur = start;
    let mut chart: Option<Chart> = None;
    for k in 0..n - 1 {
        let a = (base.x_samples[k], base.y_samples[k]);
        let b = (base.x_samples[k + 1], base.y_samples[k + 1]);
        cur = transport_segment(params, cur, a, b, &mut chart, 0)?;
    }
    match end {
        TransportEnd::Section(c) => leg(params, Chart::X, cur, c),
        TransportEnd::YSection(c) => leg(params, Chart::Y, cur, c),
        TransportEnd::Free => Ok(cur),
    }
}

/// Holonomy of the perturbed foliation along the figure-eight loop, on the
/// transversal `{x = 0}` through the base point `(0, y_+)`: starts at
/// `y_+ + offset` and returns the transported offset. At `delta = 0` this is
/// `offset` (to integration accuracy).
pub fn holonomy_transport(loop8: &FigureEight, params: &FoliationParams, offset: f64) -> Result<Cpx> {
    let (x0, y0) = loop8.base;
    let start = (x0, y0 + offset);
    let end = transport(&loop8.loop_path, start, params, TransportEnd::Section(x0))?;
    Ok(end.1 - y0)
}
