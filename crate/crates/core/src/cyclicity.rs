//! Argument principle for `D^1 - D^2`: the perturbed curves
//! `C^b_{±pi} = {Im D^b = 0}`, the contour around the domain they bound,
//! winding and Petrov counts, and the bound-versus-cycles experiment.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{log_h_prime, Cpx, Eps};
use crate::dulac::{dulac_integrable, dulac_pair, dulac_perturbed};
use crate::error::{Error, Result};
use crate::foliation::{find_focus, find_real_cycles, level_to_y, melnikov_zeros, Branch, FoliationParams, Poly};
use crate::isoclines::{trace_boundary_curve, BoundaryCurve};

/// `|f|` below which a contour sample counts as a zero on the boundary.
pub const TOL_ZERO_ON_BOUNDARY: f64 = 1e-14;
/// Largest accepted phase step between consecutive samples.
pub const MAX_PHASE_STEP: f64 = PI / 4.0;
/// Bisection depth per original contour gap.
const MAX_REFINE_DEPTH: usize = 30;

/// Which `Im D^b = 0` curve: branch and the side (`+1` for `C_{+pi}`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CurveId {
    pub branch: Branch,
    pub sign: i8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImZeroCurve {
    pub id: CurveId,
    /// Ordered from near `y = 1` outwards.
    pub points: Vec<Cpx>,
    /// Signed normal offsets from the unperturbed seeds.
    pub offsets: Vec<f64>,
    /// Largest `|Im D^b|` over the samples.
    pub max_residual: f64,
}

impl ImZeroCurve {
    pub fn conj(&self) -> ImZeroCurve {
        ImZeroCurve {
            id: CurveId { branch: self.id.branch, sign: -self.id.sign },
            points: self.points.iter().map(|p| p.conj()).collect(),
            offsets: self.offsets.iter().map(|o| -o).collect(),
            max_residual: self.max_residual,
        }
    }
}

/// Tracing and contour options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourOptions {
    /// Truncation radius.
    pub r_max: f64,
    /// Radius of the arc cutting out `y = 1` (where the saddle sits).
    pub r_one: f64,
    /// Offset of the vertical segment to the right of the focus.
    pub inset: f64,
    /// Chord tolerance for the unperturbed seeds.
    pub chord_tol: f64,
    /// Samples on the vertical segment and on each circular arc.
    pub segment_points: usize,
    pub arc_points: usize,
}

impl Default for ContourOptions {
    fn default() -> Self {
        ContourOptions { r_max: 4.0, r_one: 0.02, inset: 0.02, chord_tol: 2e-3, segment_points: 48, arc_points: 32 }
    }
}

/// `D'(y) = l'(y) / l'(D(y))` for the integrable map.
fn integrable_derivative(y: Cpx, eps: Eps) -> Result<Cpx> {
    let w = dulac_integrable(y, eps)?;
    Ok(log_h_prime(y, eps) / log_h_prime(w, eps))
}

/// Continuation of `{Im D^b = 0}` from the unperturbed `C_{±pi}`: each seed
/// is corrected along its normal by Newton steps using the integrable
/// derivative, warm-started from the previous offset.
pub fn trace_im_zero_curve(branch: Branch, sign: i8, params: &FoliationParams, opts: &ContourOptions) -> Result<ImZeroCurve> {
    let eps = params.eps;
    let curve = if sign > 0 { BoundaryCurve::PlusPi } else { BoundaryCurve::MinusPi };
    let seeds: Vec<Cpx> = trace_boundary_curve(curve, eps, opts.r_max * 1.05, opts.chord_tol)?
        .samples
        .into_iter()
        .filter(|p| (p - 1.0).norm() > 0.5 * opts.r_one)
        .collect();
    if seeds.len() < 3 {
        return Err(Error::SeedInvalid(Cpx::new(1.0, 0.0)));
    }
    let mut points = Vec::with_capacity(seeds.len());
    let mut offsets = Vec::with_capacity(seeds.len());
    let mut max_residual: f64 = 0.0;
    let mut t: f64 = 0.0;
    for k in 0..seeds.len() {
        let s = seeds[k];
        let tangent = if k + 1 < seeds.len() { seeds[k + 1] - s } else { s - seeds[k - 1] };
        let normal = Cpx::i() * tangent / tangent.norm();
        let slope = (integrable_derivative(s, eps)? * normal).im;
        if slope.abs() < 1e-14 {
            return Err(Error::SeedInvalid(s));
        }
        let g = |t: f64| -> Result<f64> { Ok(dulac_perturbed(s + normal * t, params, branch)?.im) };
        let mut gt = g(t)?;
        let scale = 1.0 + s.norm();
        let mut converged = gt.abs() < 1e-13 * scale;
        for _ in 0..8 {
            if converged {
                break;
            }
            let step = gt / slope;
            t -= step;
            gt = g(t)?;
            converged = gt.abs() < 1e-13 * scale || step.abs() < 1e-15 * scale;
        }
        if !converged && gt.abs() > 1e-9 * scale {
            return Err(if k == 0 { Error::SeedInvalid(s) } else { Error::TraceStall { at: s, steps: k } });
        }
        max_residual = max_residual.max(gt.abs());
        points.push(s + normal * t);
        offsets.push(t);
    }
    Ok(ImZeroCurve { id: CurveId { branch, sign }, points, offsets, max_residual })
}

/// Piece of a contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    /// Part of `{Im D^b = 0}`.
    ImZero(CurveId),
    /// The vertical segment next to the focus.
    Segment,
    /// Arc of the truncation circle.
    Truncation,
    /// Small arc around `y = 1`.
    Corner,
    /// Anything else (synthetic contours).
    Free,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourArc {
    pub kind: ArcKind,
    pub points: Vec<Cpx>,
}

/// Closed, positively oriented contour made of consecutive arcs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContourD {
    pub arcs: Vec<ContourArc>,
}

impl ContourD {
    /// Counterclockwise circle.
    pub fn circle(center: Cpx, radius: f64, n: usize) -> ContourD {
        let points = (0..=n).map(|k| center + Cpx::from_polar(radius, TAU * k as f64 / n as f64)).collect();
        ContourD { arcs: vec![ContourArc { kind: ArcKind::Free, points }] }
    }

    /// All samples in order, closing point included.
    pub fn polygon(&self) -> Vec<Cpx> {
        let mut out: Vec<Cpx> = Vec::new();
        for arc in &self.arcs {
            for &p in &arc.points {
                if out.last().map_or(true, |q| (*q - p).norm() > 1e-15) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Largest gap between the end of an arc and the start of the next.
    pub fn max_joint_gap(&self) -> f64 {
        let n = self.arcs.len();
        (0..n)
            .map(|i| (*self.arcs[i].points.last().unwrap() - self.arcs[(i + 1) % n].points[0]).norm())
            .fold(0.0, f64::max)
    }

    /// Winding number of the polygon around `z`.
    pub fn winding_around(&self, z: Cpx) -> i64 {
        let poly = self.polygon();
        let mut total = 0.0;
        for w in poly.windows(2) {
            total += ((w[1] - z) / (w[0] - z)).arg();
        }
        let (a, b) = (*poly.last().unwrap(), poly[0]);
        total += ((b - z) / (a - z)).arg();
        (total / TAU).round() as i64
    }

    pub fn contains(&self, z: Cpx) -> bool {
        self.winding_around(z) != 0
    }

    pub fn conj(&self) -> ContourD {
        // conjugation reverses orientation; walk backwards to restore it
        let arcs = self
            .arcs
            .iter()
            .rev()
            .map(|a| ContourArc {
                kind: match a.kind {
                    ArcKind::ImZero(id) => ArcKind::ImZero(CurveId { branch: id.branch, sign: -id.sign }),
                    k => k,
                },
                points: a.points.iter().rev().map(|p| p.conj()).collect(),
            })
            .collect();
        ContourD { arcs }
    }

    pub fn bounding_box(&self) -> (Cpx, Cpx) {
        let poly = self.polygon();
        let mut lo = poly[0];
        let mut hi = poly[0];
        for p in &poly {
            lo = Cpx::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Cpx::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        (lo, hi)
    }
}

fn arc_between(center: Cpx, radius: f64, a0: f64, a1: f64, n: usize) -> Vec<Cpx> {
    (0..=n).map(|k| center + Cpx::from_polar(radius, a0 + (a1 - a0) * k as f64 / n as f64)).collect()
}

/// Where a curve leaves the region `{Re y > y_left, |y| < r_max}`.
enum Exit {
    Line(usize, Cpx),
    Circle(usize, Cpx),
}

fn find_exit(points: &[Cpx], y_left: f64, r_max: f64) -> Exit {
    for k in 1..points.len() {
        let (a, b) = (points[k - 1], points[k]);
        if b.re <= y_left {
            let s = (a.re - y_left) / (a.re - b.re);
            return Exit::Line(k, a + (b - a) * s);
        }
        if b.norm() >= r_max {
            // solve |a + s (b - a)| = r_max
            let d = b - a;
            let (qa, qb, qc) = (d.norm_sqr(), 2.0 * (a.re * d.re + a.im * d.im), a.norm_sqr() - r_max * r_max);
            let s = (-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa);
            return Exit::Circle(k, a + d * s);
        }
    }
    Exit::Circle(points.len(), *points.last().unwrap())
}

impl ContourD {
    /// Boundary of the domain between `C^1_{+pi}` (below) and `C^1_{-pi}`
    /// (above), right of `Re y = y_c' + inset`, inside `|y| < r_max`, with a
    /// small disc around `y = 1` removed. The upper curve is the conjugate of
    /// the lower one (real coefficients).
    pub fn build(params: &FoliationParams, opts: &ContourOptions) -> Result<ContourD> {
        let (_, yc_focus) = find_focus(params)?;
        let lower = trace_im_zero_curve(Branch::One, 1, params, opts)?;
        Self::from_curve(&lower, yc_focus + opts.inset, opts)
    }

    /// Contour from an already traced lower curve.
    pub fn from_curve(lower: &ImZeroCurve, y_left: f64, opts: &ContourOptions) -> Result<ContourD> {
        let pts = &lower.points;
        let one = Cpx::new(1.0, 0.0);
        // start where the curve leaves the small disc around 1
        let start = pts.iter().position(|p| (p - one).norm() >= opts.r_one).ok_or(Error::SeedInvalid(one))?;
        let pts = &pts[start..];
        let exit = find_exit(pts, y_left, opts.r_max);
        let (end_idx, end_pt, on_line) = match exit {
            Exit::Line(k, p) => (k, p, true),
            Exit::Circle(k, p) => (k, p, false),
        };
        let mut lower_arc: Vec<Cpx> = pts[..end_idx].to_vec();
        lower_arc.push(end_pt);
        let id = lower.id;
        let upper_id = CurveId { branch: id.branch, sign: -id.sign };
        let mut arcs = Vec::new();
        // vertical segment, top to bottom
        let (top, bottom) = if on_line {
            (end_pt.conj(), end_pt)
        } else {
            let h = (opts.r_max * opts.r_max - y_left * y_left).sqrt();
            (Cpx::new(y_left, h), Cpx::new(y_left, -h))
        };
        let n = opts.segment_points;
        arcs.push(ContourArc { kind: ArcKind::Segment, points: (0..=n).map(|k| top + (bottom - top) * (k as f64 / n as f64)).collect() });
        if !on_line {
            let a0 = bottom.arg();
            let a1 = end_pt.arg();
            arcs.push(ContourArc { kind: ArcKind::Truncation, points: arc_between(Cpx::new(0.0, 0.0), opts.r_max, a0, a1, opts.arc_points) });
        }
        // C^1_{+pi} towards 1
        arcs.push(ContourArc { kind: ArcKind::ImZero(id), points: lower_arc.iter().rev().copied().collect() });
        // around 1 through its left side
        let p = lower_arc[0];
        let alpha = (p - one).arg();
        let alpha = if alpha > 0.0 { alpha - TAU } else { alpha };
        let r = (p - one).norm();
        arcs.push(ContourArc { kind: ArcKind::Corner, points: arc_between(one, r, alpha, -TAU - alpha, opts.arc_points) });
        // C^1_{-pi} outwards
        arcs.push(ContourArc { kind: ArcKind::ImZero(upper_id), points: lower_arc.iter().map(|q| q.conj()).collect() });
        if !on_line {
            let a0 = end_pt.conj().arg();
            let a1 = top.arg();
            arcs.push(ContourArc { kind: ArcKind::Truncation, points: arc_between(Cpx::new(0.0, 0.0), opts.r_max, a0, a1, opts.arc_points) });
        }
        let contour = ContourD { arcs };
        if contour.max_joint_gap() > 1e-6 {
            return Err(Error::InvalidParameter(format!("contour pieces do not connect (gap {})", contour.max_joint_gap())));
        }
        Ok(contour)
    }
}

/// Argument bookkeeping along a contour.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindingReport {
    /// Accumulated continuous argument over the whole contour.
    pub total_variation: f64,
    /// `total_variation / 2 pi`.
    pub winding: f64,
    /// Distance of `winding` to the nearest integer.
    pub residual: f64,
    /// `winding` rounded, clamped at zero.
    pub bound: u32,
    pub arc_kinds: Vec<ArcKind>,
    pub arc_variations: Vec<f64>,
    /// Sign changes of `Im f` along each arc.
    pub petrov_zero_counts: Vec<usize>,
    /// Argument increase along the vertical segment.
    pub segment_variation: f64,
    /// Bound from the Petrov counts on `Im`-zero arcs plus the measured
    /// variation elsewhere.
    pub petrov_bound: u32,
    pub samples: usize,
}

impl WindingReport {
    /// Discrete Petrov inequality on every arc: `n >= |var|/pi - 1`.
    pub fn petrov_inequality_holds(&self) -> bool {
        self.arc_variations.iter().zip(&self.petrov_zero_counts).all(|(v, &n)| n as f64 >= v.abs() / PI - 1.0 - 1e-9)
    }
}

struct ArcWalk {
    variation: f64,
    sign_changes: usize,
    samples: usize,
}

fn walk_arc<F>(f: &F, pts: &[Cpx], first_value: Option<Cpx>) -> Result<(ArcWalk, Cpx)>
where
    F: Fn(Cpx) -> Result<Cpx> + Sync,
{
    let eval = |z: Cpx| -> Result<Cpx> {
        let v = f(z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite("contour function"));
        }
        if v.norm() < TOL_ZERO_ON_BOUNDARY {
            return Err(Error::ZeroOnBoundary(z));
        }
        Ok(v)
    };
    let values: Vec<Cpx> = pts.par_iter().map(|&z| eval(z)).collect::<Result<_>>()?;
    let mut walk = ArcWalk { variation: 0.0, sign_changes: 0, samples: pts.len() };
    let mut last_im_sign = 0.0;
    let mut prev_v = first_value.unwrap_or(values[0]);
    let track_sign = |v: Cpx, last: &mut f64, count: &mut usize| {
        if v.im != 0.0 {
            let s = v.im.signum();
            if *last != 0.0 && s != *last {
                *count += 1;
            }
            *last = s;
        }
    };
    track_sign(prev_v, &mut last_im_sign, &mut walk.sign_changes);
    if let Some(fv) = first_value {
        // joint from the previous arc
        walk.variation += (values[0] / fv).arg();
        track_sign(values[0], &mut last_im_sign, &mut walk.sign_changes);
        prev_v = values[0];
    }
    for k in 1..pts.len() {
        let (a, b) = (pts[k - 1], pts[k]);
        let vb = values[k];
        // refine the gap until the phase steps are small
        let mut stack = vec![(a, prev_v, b, vb, 0usize)];
        let mut local = Vec::new();
        while let Some((za, va, zb, vb, depth)) = stack.pop() {
            let step = (vb / va).arg();
            if step.abs() < MAX_PHASE_STEP {
                local.push((step, vb));
                continue;
            }
            if depth >= MAX_REFINE_DEPTH {
                return Err(Error::RefinementLimit(za));
            }
            let zm = 0.5 * (za + zb);
            let vm = eval(zm)?;
            walk.samples += 1;
            // push the second half first so the first half is processed first
            stack.push((zm, vm, zb, vb, depth + 1));
            stack.push((za, va, zm, vm, depth + 1));
        }
        for (step, v) in local {
            walk.variation += step;
            track_sign(v, &mut last_im_sign, &mut walk.sign_changes);
        }
        prev_v = vb;
    }
    Ok((walk, prev_v))
}

/// Continuous argument of `f` along the contour with adaptive refinement
/// (steps below [`MAX_PHASE_STEP`]), plus the per-arc Petrov counts.
pub fn variation_of_argument<F>(f: F, contour: &ContourD) -> Result<WindingReport>
where
    F: Fn(Cpx) -> Result<Cpx> + Sync,
{
    let mut arc_variations = Vec::new();
    let mut counts = Vec::new();
    let mut kinds = Vec::new();
    let mut samples = 0;
    let mut prev: Option<Cpx> = None;
    let mut first: Option<Cpx> = None;
    for arc in &contour.arcs {
        let (walk, last) = walk_arc(&f, &arc.points, prev)?;
        if first.is_none() {
            first = Some(f(arc.points[0])?);
        }
        arc_variations.push(walk.variation);
        counts.push(walk.sign_changes);
        kinds.push(arc.kind);
        samples += walk.samples;
        prev = Some(last);
    }
    // close the loop
    let closing = (first.unwrap() / prev.unwrap()).arg();
    if let Some(v) = arc_variations.last_mut() {
        *v += closing;
    }
    let total: f64 = arc_variations.iter().sum();
    let winding = total / TAU;
    let segment_variation = kinds.iter().zip(&arc_variations).filter(|(k, _)| **k == ArcKind::Segment).map(|(_, v)| v).sum();
    let petrov_total: f64 = kinds
        .iter()
        .zip(arc_variations.iter().zip(&counts))
        .map(|(k, (v, &n))| match k {
            ArcKind::ImZero(_) => PI * (n as f64 + 1.0),
            _ => v.abs(),
        })
        .sum();
    Ok(WindingReport {
        total_variation: total,
        winding,
        residual: (winding - winding.round()).abs(),
        bound: winding.round().max(0.0) as u32,
        arc_kinds: kinds,
        arc_variations,
        petrov_zero_counts: counts,
        segment_variation,
        petrov_bound: (petrov_total / TAU).floor() as u32,
        samples,
    })
}

/// `D^1(y) - D^2(y)`.
pub fn displacement_complex(y: Cpx, params: &FoliationParams) -> Result<Cpx> {
    let (a, b) = dulac_pair(y, params)?;
    Ok(a - b)
}

/// Crossing of two sampled curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub point: Cpx,
    /// Segment indices in the first and second curve.
    pub i: usize,
    pub j: usize,
    /// Crossing angle in `[0, pi/2]`.
    pub angle: f64,
    /// Small crossing angle: possibly a tangency (multiplicity > 1).
    pub tangential: bool,
}

fn cross(a: Cpx, b: Cpx) -> f64 {
    a.re * b.im - a.im * b.re
}

fn distance_to_polyline(p: Cpx, c: &[Cpx]) -> f64 {
    c.windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let s = (((p - w[0]) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (p - (w[0] + d * s)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Proper crossings between two polylines. Curves that coincide within
/// `1e-10` (relative) give [`Error::DegenerateCoincidence`].
pub fn count_curve_intersections(c1: &[Cpx], c2: &[Cpx]) -> Result<Vec<Intersection>> {
    if c1.len() < 2 || c2.len() < 2 {
        return Ok(Vec::new());
    }
    let scale = c1.iter().chain(c2).map(|p| p.norm()).fold(1.0, f64::max);
    let dev = c1.iter().map(|p| distance_to_polyline(*p, c2)).fold(0.0, f64::max);
    let dev2 = c2.iter().map(|p| distance_to_polyline(*p, c1)).fold(0.0, f64::max);
    if dev.max(dev2) < 1e-10 * scale {
        return Err(Error::DegenerateCoincidence);
    }
    let mut out: Vec<Intersection> = Vec::new();
    for i in 0..c1.len() - 1 {
        let (p, r) = (c1[i], c1[i + 1] - c1[i]);
        for j in 0..c2.len() - 1 {
            let (q, s) = (c2[j], c2[j + 1] - c2[j]);
            let denom = cross(r, s);
            if denom == 0.0 {
                continue;
            }
            let t = cross(q - p, s) / denom;
            let u = cross(q - p, r) / denom;
            // half-open on the far end so shared vertices count once
            if (0.0..1.0).contains(&t) && (0.0..1.0).contains(&u) {
                let mut angle = (denom / (r.norm() * s.norm())).abs().asin();
                if angle.is_nan() {
                    angle = 0.0;
                }
                out.push(Intersection { point: p + r * t, i, j, angle, tangential: angle < 1e-3 });
            }
        }
    }
    Ok(out)
}

/// Newton iteration for zeros of an analytic `f` from a grid of seeds inside
/// the contour. Returns distinct zeros lying inside.
pub fn newton_zeros<F>(f: F, contour: &ContourD, grid: usize) -> Vec<Cpx>
where
    F: Fn(Cpx) -> Result<Cpx> + Sync,
{
    let (lo, hi) = contour.bounding_box();
    let mut seeds = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let z = Cpx::new(
                lo.re + (hi.re - lo.re) * (i as f64 + 0.5) / grid as f64,
                lo.im + (hi.im - lo.im) * (j as f64 + 0.5) / grid as f64,
            );
            if contour.contains(z) {
                seeds.push(z);
            }
        }
    }
    let found: Vec<Cpx> = seeds.par_iter().filter_map(|&z| newton_from(&f, z).ok()).collect();
    let mut zeros: Vec<Cpx> = Vec::new();
    for z in found {
        if contour.contains(z) && zeros.iter().all(|w| (w - z).norm() > 1e-6 * (1.0 + z.norm())) {
            zeros.push(z);
        }
    }
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    zeros
}

fn newton_from<F: Fn(Cpx) -> Result<Cpx>>(f: &F, mut z: Cpx) -> Result<Cpx> {
    let mut v = f(z)?;
    let v0 = v.norm();
    for _ in 0..40 {
        let h = 1e-6 * (1.0 + z.norm());
        let d = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if d.norm() == 0.0 {
            break;
        }
        let mut step = v / d;
        // damp long jumps
        if step.norm() > 0.25 * (1.0 + z.norm()) {
            step *= 0.25 * (1.0 + z.norm()) / step.norm();
        }
        z -= step;
        v = f(z)?;
        if step.norm() < 1e-12 * (1.0 + z.norm()) {
            break;
        }
    }
    if v.norm() < 1e-8 * v0.max(1e-300) || v.norm() < 1e-16 {
        Ok(z)
    } else {
        Err(Error::NoConvergence { what: "newton_zeros", residual: v.norm() })
    }
}

/// Experiment knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOptions {
    pub contour: ContourOptions,
    /// Section points for the real displacement scan.
    pub real_grid: usize,
    /// Levels for the Melnikov scan.
    pub melnikov_levels: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions { contour: ContourOptions::default(), real_grid: 60, melnikov_levels: 40 }
    }
}

/// One `(eps, delta)` cell of the experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub eps: f64,
    pub delta: f64,
    pub bound: Option<u32>,
    pub winding: Option<f64>,
    pub petrov_bound: Option<u32>,
    pub real_cycles: Option<usize>,
    pub melnikov_zeros: Option<usize>,
    /// `bound < real_cycles`: the argument principle would be violated.
    pub violation: bool,
    pub error: Option<String>,
}

/// Smallest scanned level relative to `h(y_c)`.
pub const OUTER_LEVEL: f64 = 1e-2;
/// Smallest gap `y - x^2` between a scanned oval and the parabola.
pub const OUTER_GAP: f64 = 1e-3;

/// Level of the outermost oval scanned for real cycles and Melnikov zeros.
///
/// The oval `h = c` comes within `c^{1/eps}` of the parabola, so for small
/// `eps` even moderate levels are exponentially close to it and perturbed
/// orbits cross it; the level is raised until the gap is at least
/// [`OUTER_GAP`].
pub fn outer_level(eps: Eps) -> f64 {
    let hc = eps.h_center();
    (OUTER_LEVEL * hc).max(OUTER_GAP.powf(eps.get())).min(0.9 * hc)
}

/// Grid of `y` on the real section between the focus and the oval of level
/// [`outer_level`].
pub fn real_section_grid(params: &FoliationParams, n: usize) -> Result<Vec<f64>> {
    let (_, yc) = find_focus(params)?;
    let b = level_to_y(outer_level(params.eps), params.eps)?;
    let a = yc + 1e-3 * (b - yc);
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

/// Levels between [`outer_level`] and the center, geometrically spaced.
pub fn melnikov_level_grid(eps: Eps, n: usize) -> Vec<f64> {
    let hc = eps.h_center();
    let (a, b) = (outer_level(eps), hc * (1.0 - 1e-3));
    (0..n).map(|k| a * (b / a).powf(k as f64 / (n - 1) as f64)).collect()
}

fn run_cell(eps: f64, delta: f64, p_dir: &Poly, q_dir: &Poly, opts: &ExperimentOptions) -> ExperimentRow {
    let mut row = ExperimentRow {
        eps,
        delta,
        bound: None,
        winding: None,
        petrov_bound: None,
        real_cycles: None,
        melnikov_zeros: None,
        violation: false,
        error: None,
    };
    let mut errors = Vec::new();
    let params = match FoliationParams::new(eps, delta, p_dir.clone(), q_dir.clone()) {
        Ok(p) => p,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match real_section_grid(&params, opts.real_grid).and_then(|g| find_real_cycles(&params, &g)) {
        Ok(c) => row.real_cycles = Some(c.len()),
        Err(e) => errors.push(format!("real cycles: {e}")),
    }
    let levels = melnikov_level_grid(params.eps, opts.melnikov_levels);
    match melnikov_zeros(&params, &levels) {
        Ok(z) => row.melnikov_zeros = Some(z.len()),
        Err(e) => errors.push(format!("melnikov: {e}")),
    }
    if params.is_integrable() {
        errors.push("bound: D1 - D2 vanishes identically without perturbation".into());
    } else {
        let report = ContourD::build(&params, &opts.contour)
            .and_then(|c| variation_of_argument(|y| displacement_complex(y, &params), &c));
        match report {
            Ok(r) => {
                row.bound = Some(r.bound);
                row.winding = Some(r.winding);
                row.petrov_bound = Some(r.petrov_bound);
            }
            Err(e) => errors.push(format!("bound: {e}")),
        }
    }
    if let (Some(b), Some(c)) = (row.bound, row.real_cycles) {
        row.violation = (b as usize) < c;
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

/// Bound, real-cycle count and Melnikov zero count on an `(eps, delta)` grid
/// for one perturbation direction. Cells run in parallel; failures are
/// recorded per cell.
pub fn cyclicity_experiment(eps_grid: &[f64], p_dir: &Poly, q_dir: &Poly, delta_seq: &[f64], opts: &ExperimentOptions) -> Vec<ExperimentRow> {
    let cells: Vec<(f64, f64)> = eps_grid.iter().flat_map(|&e| delta_seq.iter().map(move |&d| (e, d))).collect();
    cells.par_iter().map(|&(e, d)| run_cell(e, d, p_dir, q_dir, opts)).collect()
}
