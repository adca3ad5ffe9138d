//! Isoclines `C_theta = { y : eps arg y + arg(1 - y) = eps theta }` of `h`.
//!
//! In polar form `y = rho e^{i phi}` every isocline is
//! `rho = sin(eps (phi - theta)) / sin((1 + eps) phi - eps theta)`.
//! For `0 < |theta| < pi` it has two components: one leaving `y = 1` (on the
//! `D1` side) and one leaving `y = 0` (on the `D0` side). Both run off to
//! infinity at a pole of the radius.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{h_section, log_h, Cpx, Eps};
use crate::error::{Error, Result};

pub const TOL_ISO: f64 = 1e-9;
pub const DEFAULT_R_MAX: f64 = 10.0;
pub const DEFAULT_CHORD_TOL: f64 = 1e-4;

/// Offset from the `|h| = 0` end of a component at which tracing starts.
const START_OFFSET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    D0,
    D1,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::D0 => Side::D1,
            Side::D1 => Side::D0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    D0,
    D1,
    Boundary,
    Outside,
}

/// The four curves bounding `D1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryCurve {
    /// Upper half of the `theta = 0` curve through the center.
    PlusZero,
    /// Lower half of the `theta = 0` curve through the center.
    MinusZero,
    /// `theta = pi`, lower half plane.
    PlusPi,
    /// `theta = -pi`, upper half plane.
    MinusPi,
}

impl BoundaryCurve {
    pub const ALL: [BoundaryCurve; 4] = [
        BoundaryCurve::PlusZero,
        BoundaryCurve::MinusZero,
        BoundaryCurve::PlusPi,
        BoundaryCurve::MinusPi,
    ];

    pub fn theta(self) -> f64 {
        match self {
            BoundaryCurve::PlusZero | BoundaryCurve::MinusZero => 0.0,
            BoundaryCurve::PlusPi => PI,
            BoundaryCurve::MinusPi => -PI,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BoundaryCurve::PlusZero => "C+0",
            BoundaryCurve::MinusZero => "C-0",
            BoundaryCurve::PlusPi => "C+pi",
            BoundaryCurve::MinusPi => "C-pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSample {
    pub rho: f64,
    pub phi: f64,
}

impl PolarSample {
    pub fn point(&self) -> Cpx {
        Cpx::from_polar(self.rho, self.phi)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsoclineCurve {
    pub theta: f64,
    pub eps: f64,
    pub side: Side,
    pub polar: Vec<PolarSample>,
    pub samples: Vec<Cpx>,
    pub phi_range: (f64, f64),
}

impl IsoclineCurve {
    /// Largest isocline-identity residual over the samples.
    pub fn max_residual(&self) -> f64 {
        let eps = Eps::new(self.eps).expect("curve built from a valid eps");
        self.samples
            .iter()
            .map(|&y| isocline_residual(y, self.theta, eps))
            .fold(0.0, f64::max)
    }

    pub fn conj(&self) -> IsoclineCurve {
        IsoclineCurve {
            theta: -self.theta,
            eps: self.eps,
            side: self.side,
            polar: self.polar.iter().map(|p| PolarSample { rho: p.rho, phi: -p.phi }).collect(),
            samples: self.samples.iter().map(|y| y.conj()).collect(),
            phi_range: (-self.phi_range.0, -self.phi_range.1),
        }
    }
}

/// `(eps arg y + arg(1 - y)) / eps`, the continuous argument of `h` scaled by
/// `1/eps`. Inside `D0 ∪ D1` the value lies in `(-pi, pi)`; it is not folded,
/// so points of `C_{-pi}` report `-pi` rather than `pi`.
pub fn theta_of(y: Cpx, eps: Eps) -> Result<f64> {
    if y.im == 0.0 && y.re >= 1.0 {
        return Err(Error::BranchCut(y));
    }
    Ok(log_h(y, eps)?.im / eps.get())
}

/// `|eps arg y + arg(1 - y) - eps theta|`.
pub fn isocline_residual(y: Cpx, theta: f64, eps: Eps) -> f64 {
    let e = eps.get();
    (e * y.arg() + (1.0 - y).arg() - e * theta).abs()
}

/// Radius of `C_theta` in direction `phi`.
pub fn isocline_radius(phi: f64, theta: f64, eps: Eps) -> Result<f64> {
    let e = eps.get();
    let num = (e * (phi - theta)).sin();
    let den_arg = (1.0 + e) * phi - e * theta;
    let den = den_arg.sin();
    if num == 0.0 && den == 0.0 {
        // phi = theta = 0: the theta = 0 curve crosses the axis at the center
        return Ok(eps.y_center());
    }
    if den == 0.0 || (num / den).abs() > 1e15 {
        return Err(Error::Pole { phi });
    }
    Ok(num / den)
}

/// `phi` interval of a component of `C_theta`, ordered from the `|h| = 0`
/// end to the pole. `theta = 0` means the non-real branch through the center:
/// upper half for `D0`-side indexing is not meaningful there, so callers use
/// [`boundary_range`] instead.
pub fn component_range(theta: f64, side: Side, eps: Eps) -> Result<(f64, f64)> {
    let e = eps.get();
    if theta == 0.0 {
        return Err(Error::InvalidParameter("theta = 0 has no polar components".into()));
    }
    let s = theta.signum();
    let t = theta.abs();
    let (a, b) = match side {
        Side::D1 => (0.0, (e * t - PI) / (1.0 + e)),
        Side::D0 => (t, (PI + e * t) / (1.0 + e)),
    };
    let empty = match side {
        Side::D1 => b >= 0.0,
        Side::D0 => b <= a,
    };
    if empty {
        return Err(Error::InvalidEps {
            eps: e,
            reason: "isocline component has an empty phi range",
        });
    }
    Ok((s * a, s * b))
}

/// `phi` interval of a boundary curve, from its finite end to the pole.
pub fn boundary_range(curve: BoundaryCurve, eps: Eps) -> Result<(f64, f64)> {
    let e = eps.get();
    match curve {
        BoundaryCurve::PlusZero => Ok((0.0, PI / (1.0 + e))),
        BoundaryCurve::MinusZero => Ok((0.0, -PI / (1.0 + e))),
        BoundaryCurve::PlusPi => component_range(PI, Side::D1, eps),
        BoundaryCurve::MinusPi => component_range(-PI, Side::D1, eps),
    }
}

#[inline]
fn log_modulus_h(y: Cpx, eps: Eps) -> f64 {
    eps.get() * y.norm().ln() + (1.0 - y).norm().ln()
}

fn point_at(phi: f64, theta: f64, eps: Eps) -> Result<Cpx> {
    Ok(Cpx::from_polar(isocline_radius(phi, theta, eps)?, phi))
}

/// Point of the `side` component of `C_theta` with `|h| = modulus`, found by
/// bisection in `phi` (`|h|` grows monotonically from the finite end to the
/// pole). `theta = 0` selects the real segment for modulus below `h(y_c)` and
/// the curve through the center above it; `sign_hint` then picks the half
/// plane (`+1` upper).
pub fn component_point(theta: f64, modulus: f64, side: Side, eps: Eps, sign_hint: f64) -> Result<Cpx> {
    if !(modulus > 0.0) || !modulus.is_finite() {
        return Err(Error::InvalidParameter(format!("modulus {modulus}")));
    }
    let target = modulus.ln();
    if theta == 0.0 {
        let hc = eps.h_center();
        if modulus <= hc {
            return crate::dulac::solve_real_level(modulus, side, eps).map(|y| Cpx::new(y, 0.0));
        }
        let curve = if sign_hint >= 0.0 { BoundaryCurve::PlusZero } else { BoundaryCurve::MinusZero };
        let (a, b) = boundary_range(curve, eps)?;
        return bisect_phi(a, b, 0.0, target, eps);
    }
    let (a, b) = component_range(theta, side, eps)?;
    bisect_phi(a, b, theta, target, eps)
}

fn bisect_phi(a: f64, b: f64, theta: f64, target: f64, eps: Eps) -> Result<Cpx> {
    let g = |phi: f64| -> f64 {
        match point_at(phi, theta, eps) {
            Ok(y) if y.norm() > 0.0 => log_modulus_h(y, eps) - target,
            _ => f64::NAN,
        }
    };
    let (mut lo, mut hi) = (a, b);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm.is_nan() {
            // pole side: the radius blew up, treat as above target
            hi = mid;
        } else if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (lo + hi);
    let y = point_at(phi, theta, eps)?;
    Ok(y)
}

/// Checks `|h|` increases along `n` evenly spaced parameters of a component.
pub fn assert_monotone_component(theta: f64, side: Side, eps: Eps, n: usize) -> Result<()> {
    let (a, b) = component_range(theta, side, eps)?;
    let mut prev = f64::NEG_INFINITY;
    for k in 1..n {
        let phi = a + (b - a) * k as f64 / n as f64;
        let y = point_at(phi, theta, eps)?;
        let v = log_modulus_h(y, eps);
        if v <= prev {
            return Err(Error::MonotonicityViolation { at: y });
        }
        prev = v;
    }
    Ok(())
}

fn chord_deviation(a: Cpx, m: Cpx, b: Cpx) -> f64 {
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return (m - a).norm();
    }
    ((m - a) * d.conj()).im.abs() / len
}

/// Samples `phi -> rho(phi) e^{i phi}` on `[phi_a, phi_b]` until the chord
/// deviation is below `chord_tol`.
fn adaptive_polar(phi_a: f64, phi_b: f64, theta: f64, eps: Eps, chord_tol: f64) -> Result<Vec<PolarSample>> {
    const INITIAL: usize = 32;
    const MAX_DEPTH: u32 = 40;
    let sample = |phi: f64| -> Result<PolarSample> {
        Ok(PolarSample { rho: isocline_radius(phi, theta, eps)?, phi })
    };
    fn refine(
        a: PolarSample,
        b: PolarSample,
        depth: u32,
        out: &mut Vec<PolarSample>,
        sample: &dyn Fn(f64) -> Result<PolarSample>,
        tol: f64,
    ) -> Result<()> {
        let m = sample(0.5 * (a.phi + b.phi))?;
        if depth < MAX_DEPTH && chord_deviation(a.point(), m.point(), b.point()) > tol {
            refine(a, m, depth + 1, out, sample, tol)?;
            refine(m, b, depth + 1, out, sample, tol)?;
        } else {
            out.push(m);
            out.push(b);
        }
        Ok(())
    }
    let mut out = vec![sample(phi_a)?];
    let mut prev = out[0];
    for k in 1..=INITIAL {
        let phi = phi_a + (phi_b - phi_a) * k as f64 / INITIAL as f64;
        let next = sample(phi)?;
        refine(prev, next, 0, &mut out, &sample, chord_tol)?;
        prev = next;
    }
    Ok(out)
}

/// `phi` in `(a, b)` where the radius first reaches `r_max`, searching from `a`.
fn phi_at_radius(a: f64, b: f64, theta: f64, eps: Eps, r_max: f64) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match isocline_radius(mid, theta, eps) {
            Ok(r) if r < r_max && r >= 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    lo
}

fn trace_range(theta: f64, side: Side, eps: Eps, start: f64, pole: f64, r_max: f64, chord_tol: f64) -> Result<IsoclineCurve> {
    let end = phi_at_radius(start, pole, theta, eps, r_max);
    let polar = adaptive_polar(start, end, theta, eps, chord_tol)?;
    let samples: Vec<Cpx> = polar.iter().map(PolarSample::point).collect();
    let mut prev = f64::NEG_INFINITY;
    for &y in &samples {
        let v = h_section(y, eps)?.norm();
        if v <= prev {
            return Err(Error::MonotonicityViolation { at: y });
        }
        prev = v;
    }
    Ok(IsoclineCurve {
        theta,
        eps: eps.get(),
        side,
        polar,
        samples,
        phi_range: (start, end),
    })
}

/// Traces one component of `C_theta` (`theta != 0`) from near its `|h| = 0`
/// end out to radius `r_max`.
pub fn trace_isocline(theta: f64, side: Side, eps: Eps, r_max: f64, chord_tol: f64) -> Result<IsoclineCurve> {
    let (a, b) = component_range(theta, side, eps)?;
    let dir = (b - a).signum();
    let start = match side {
        Side::D1 => a + dir * START_OFFSET,
        // the D0 end sits at rho = 0: step by a relative amount
        Side::D0 => a + dir * START_OFFSET * a.abs().max(1e-3),
    };
    trace_range(theta, side, eps, start, b, r_max, chord_tol)
}

pub fn trace_boundary_curve(curve: BoundaryCurve, eps: Eps, r_max: f64, chord_tol: f64) -> Result<IsoclineCurve> {
    let (a, b) = boundary_range(curve, eps)?;
    let start = match curve {
        BoundaryCurve::PlusZero | BoundaryCurve::MinusZero => a,
        _ => a + (b - a).signum() * START_OFFSET,
    };
    trace_range(curve.theta(), Side::D1, eps, start, b, r_max, chord_tol)
}

/// The four curves bounding `D1`, in the order `C+0, C-0, C+pi, C-pi`.
/// Requires `eps < 1` for the `C_{±pi}` ranges to be non-empty.
pub fn trace_boundary(eps: Eps, r_max: f64) -> Result<[IsoclineCurve; 4]> {
    let [a, b, c, d] = BoundaryCurve::ALL;
    Ok([
        trace_boundary_curve(a, eps, r_max, DEFAULT_CHORD_TOL)?,
        trace_boundary_curve(b, eps, r_max, DEFAULT_CHORD_TOL)?,
        trace_boundary_curve(c, eps, r_max, DEFAULT_CHORD_TOL)?,
        trace_boundary_curve(d, eps, r_max, DEFAULT_CHORD_TOL)?,
    ])
}

/// Membership in `D0`, `D1`, their common boundary, or neither.
///
/// For `theta != 0` the `D1` component of `C_theta` lies in the half plane
/// opposite to the sign of `theta` (it leaves `y = 1`), the `D0` component on
/// the same side (it leaves `y = 0`); the half plane therefore decides.
pub fn classify_point(y: Cpx, eps: Eps) -> Result<Region> {
    if y == Cpx::new(1.0, 0.0) {
        return Err(Error::BranchCut(y));
    }
    if y.im == 0.0 {
        let yc = eps.y_center();
        return Ok(if y.re <= 0.0 || y.re > 1.0 {
            Region::Outside
        } else if (y.re - yc).abs() <= TOL_ISO * yc {
            Region::Boundary
        } else if y.re < yc {
            Region::D0
        } else {
            Region::D1
        });
    }
    let theta = theta_of(y, eps)?;
    let t = theta.abs();
    if t > PI + TOL_ISO {
        return Ok(Region::Outside);
    }
    if (t - PI).abs() <= TOL_ISO || t <= TOL_ISO {
        return Ok(Region::Boundary);
    }
    let d1 = (theta > 0.0) == (y.im < 0.0);
    Ok(if d1 { Region::D1 } else { Region::D0 })
}

/// Level set `|f(y)| = |f(y_c)|` through the center, as closed loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularCurve {
    pub eps: f64,
    /// Loop enclosing `y = 1`, then loop enclosing `y = 0`; both start and
    /// end at the center.
    pub loops: Vec<Vec<Cpx>>,
}

fn log_abs_f(y: Cpx, eps: Eps) -> f64 {
    y.norm().ln() + (1.0 - y).norm().ln() / eps.get()
}

/// `f'/f`; `conj` of it is the gradient of `log |f|`.
fn log_f_prime(y: Cpx, eps: Eps) -> Cpx {
    1.0 / y - 1.0 / (eps.get() * (1.0 - y))
}

/// Traces `{ |f| = |f(y_c)| }` by tangent predictor and gradient corrector,
/// leaving the center along two of the four crossing directions.
pub fn trace_singular_curve(eps: Eps) -> Result<SingularCurve> {
    let e = eps.get();
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::InvalidEps { eps: e, reason: "singular curve traced for 0 < eps <= 1" });
    }
    let yc = Cpx::new(eps.y_center(), 0.0);
    let level = log_abs_f(yc, eps);
    let scale = eps.y_center().min(1.0 - eps.y_center());
    let loops = [PI / 4.0, 3.0 * PI / 4.0]
        .iter()
        .map(|&dir| trace_level_loop(yc, Cpx::from_polar(1.0, dir), level, scale, eps))
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularCurve { eps: e, loops })
}

fn correct_level(mut y: Cpx, level: f64, eps: Eps) -> Option<Cpx> {
    for _ in 0..8 {
        let g = log_f_prime(y, eps);
        let r = log_abs_f(y, eps) - level;
        if r.abs() < 1e-13 {
            return Some(y);
        }
        y -= r * g.conj() / g.norm_sqr();
    }
    let r = log_abs_f(y, eps) - level;
    (r.abs() < 1e-11).then_some(y)
}

fn trace_level_loop(center: Cpx, dir0: Cpx, level: f64, scale: f64, eps: Eps) -> Result<Vec<Cpx>> {
    let r0 = 1e-3 * scale;
    let mut pts = vec![center];
    let mut y = correct_level(center + dir0 * r0, level, eps).ok_or(Error::SeedInvalid(center + dir0 * r0))?;
    pts.push(y);
    let mut tangent = dir0;
    let mut h = 0.01 * scale;
    let mut travelled = r0;
    for steps in 0..200_000 {
        let g = log_f_prime(y, eps);
        let mut t = Cpx::i() * g.conj();
        t /= t.norm();
        if (t * tangent.conj()).re < 0.0 {
            t = -t;
        }
        let pred = y + t * h;
        match correct_level(pred, level, eps) {
            Some(next) if (next - pred).norm() < 0.2 * h && (t * tangent.conj()).arg().abs() < 0.3 => {
                travelled += (next - y).norm();
                y = next;
                tangent = t;
                pts.push(y);
                if travelled > 10.0 * r0 && (y - center).norm() < 2.0 * h.max(r0) {
                    pts.push(center);
                    return Ok(pts);
                }
                let dist = (y - center).norm();
                h = (h * 1.25).min(0.05 * (1.0 + y.norm())).min(0.25 * dist.max(r0));
            }
            _ => {
                h *= 0.5;
                if h < 1e-13 {
                    return Err(Error::TraceStall { at: y, steps });
                }
            }
        }
    }
    Err(Error::TraceStall { at: y, steps: 200_000 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eps(e: f64) -> Eps {
        Eps::new(e).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_of(Cpx::new(0.4, 0.0), eps(0.3)).unwrap(), 0.0);
        let t = theta_of(Cpx::new(0.0, 1.0), eps(1.0)).unwrap();
        assert!((t - PI / 4.0).abs() < 1e-15);
        assert!(theta_of(Cpx::new(-1.0, 0.0), eps(0.5)).is_err());
        assert!(theta_of(Cpx::new(2.0, 0.0), eps(0.5)).is_err());
    }

    #[test]
    fn radius_limits() {
        for e in [0.2, 0.5, 0.8] {
            let e = eps(e);
            let r = isocline_radius(1e-9, 0.0, e).unwrap();
            assert!((r - e.y_center()).abs() < 1e-12);
            let r = isocline_radius(1e-9, -PI, e).unwrap();
            assert!((r - 1.0).abs() < 1e-8);
            let pole = PI / (1.0 + e.get());
            assert!(isocline_radius(pole - 1e-9, 0.0, e).unwrap() > 1e6);
            assert!(matches!(isocline_radius(pole, 0.0, e), Err(Error::Pole { .. })));
        }
    }

    /// Solve `eps arg y + arg(1 - y) = eps theta` along the ray `arg y = phi`
    /// by bisection on `rho`, independent of the closed form.
    fn radius_by_bisection(phi: f64, theta: f64, e: f64, lo: f64, hi: f64) -> f64 {
        let g = |r: f64| e * phi + (1.0 - Cpx::from_polar(r, phi)).arg() - e * theta;
        let (mut a, mut b) = (lo, hi);
        let ga = g(a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if (g(m) > 0.0) == (ga > 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn closed_form_radius_matches_arg_identity() {
        // arg(1 - rho e^{i phi}) is monotone in rho along a ray, so bisection
        // over (0, R) isolates the isocline point.
        for &(e, theta, phi) in &[(0.5, -PI, 0.4), (0.5, PI, -0.7), (0.3, 1.0, -0.5), (0.3, 1.0, 1.5), (0.7, -2.0, 0.6)] {
            let closed = isocline_radius(phi, theta, eps(e)).unwrap();
            let brute = radius_by_bisection(phi, theta, e, 1e-9, 1e3);
            assert!((closed - brute).abs() < 1e-9 * (1.0 + closed), "{e} {theta} {phi}: {closed} vs {brute}");
        }
    }

    #[test]
    fn boundary_curves_satisfy_identity() {
        for e in [0.1, 0.3, 0.5, 0.8] {
            let curves = trace_boundary(eps(e), DEFAULT_R_MAX).unwrap();
            for c in &curves {
                assert!(c.max_residual() < TOL_ISO, "eps {e} theta {} residual {}", c.theta, c.max_residual());
                assert!(c.samples.len() > 10);
            }
            // C±pi emanate from y = 1
            assert!((curves[2].samples[0] - 1.0).norm() < 1e-4);
            assert!((curves[3].samples[0] - 1.0).norm() < 1e-4);
            // and reach the truncation radius
            assert!(curves[3].samples.last().unwrap().norm() > 0.99 * DEFAULT_R_MAX);
        }
    }

    #[test]
    fn minus_pi_range_for_half() {
        let (a, b) = boundary_range(BoundaryCurve::MinusPi, eps(0.5)).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_curves_share_formula() {
        let e = eps(0.4);
        let up = trace_boundary_curve(BoundaryCurve::PlusZero, e, 5.0, 1e-4).unwrap();
        for p in &up.polar {
            let r = (e.get() * p.phi).sin() / ((1.0 + e.get()) * p.phi).sin();
            if p.phi != 0.0 {
                assert!((r - p.rho).abs() < 1e-14 * (1.0 + r));
            }
        }
        let down = trace_boundary_curve(BoundaryCurve::MinusZero, e, 5.0, 1e-4).unwrap();
        for (a, b) in up.samples.iter().zip(&down.samples) {
            assert!((a.conj() - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pi_curves_are_conjugate() {
        let e = eps(0.5);
        let p = trace_boundary_curve(BoundaryCurve::PlusPi, e, 10.0, 1e-4).unwrap();
        let m = trace_boundary_curve(BoundaryCurve::MinusPi, e, 10.0, 1e-4).unwrap();
        assert_eq!(p.samples.len(), m.samples.len());
        for (a, b) in p.samples.iter().zip(&m.samples) {
            assert!((a.conj() - *b).norm() < 1e-12);
        }
    }

    #[test]
    fn empty_range_for_large_eps() {
        assert!(matches!(trace_boundary(eps(1.5), 10.0), Err(Error::InvalidEps { .. })));
    }

    #[test]
    fn fan_components_are_monotone() {
        for e in [0.2, 0.5] {
            for k in 1..8 {
                let theta = -PI + 2.0 * PI * k as f64 / 8.0;
                if theta == 0.0 {
                    continue;
                }
                for side in [Side::D0, Side::D1] {
                    assert_monotone_component(theta, side, eps(e), 200).unwrap();
                    let c = trace_isocline(theta, side, eps(e), 10.0, 1e-4).unwrap();
                    assert!(c.max_residual() < TOL_ISO);
                }
            }
        }
    }

    #[test]
    fn classify_examples() {
        let e = eps(0.5);
        let yc = e.y_center();
        assert_eq!(classify_point(Cpx::new(0.5 * (yc + 1.0), 0.0), e).unwrap(), Region::D1);
        assert_eq!(classify_point(Cpx::new(0.5 * yc, 0.0), e).unwrap(), Region::D0);
        assert_eq!(classify_point(Cpx::new(-1.0, 0.0), e).unwrap(), Region::Outside);
        let up = trace_boundary_curve(BoundaryCurve::PlusZero, e, 5.0, 1e-4).unwrap();
        for &y in up.samples.iter().skip(1).step_by(7) {
            assert_eq!(classify_point(y, e).unwrap(), Region::Boundary, "{y}");
        }
        let pi = trace_boundary_curve(BoundaryCurve::PlusPi, e, 5.0, 1e-4).unwrap();
        for &y in pi.samples.iter().step_by(7) {
            assert_eq!(classify_point(y, e).unwrap(), Region::Boundary, "{y}");
        }
        // between C-pi and C+pi around (1, inf)
        assert_eq!(classify_point(Cpx::new(3.0, 0.01), e).unwrap(), Region::Outside);
        assert!(classify_point(Cpx::new(1.0, 0.0), e).is_err());
    }

    #[test]
    fn classify_is_conjugation_invariant() {
        let e = eps(0.35);
        for i in 0..40 {
            for j in 1..40 {
                let y = Cpx::new(-2.0 + 4.0 * i as f64 / 40.0, 2.0 * j as f64 / 40.0);
                assert_eq!(classify_point(y, e).unwrap(), classify_point(y.conj(), e).unwrap());
            }
        }
    }

    #[test]
    fn singular_curve_properties() {
        for e in [0.25, 0.5, 0.9] {
            let e = eps(e);
            let c = trace_singular_curve(e).unwrap();
            let yc = e.y_center();
            let level = yc * (1.0 - yc).powf(1.0 / e.get());
            assert_eq!(c.loops.len(), 2);
            for l in &c.loops {
                assert_eq!(l[0], Cpx::new(yc, 0.0));
                for &y in l {
                    let v = y.norm() * (1.0 - y).norm().powf(1.0 / e.get());
                    assert!((v - level).abs() < 1e-10 * level);
                }
                // conjugate samples lie on the traced loop
                for &y in l.iter().step_by(11) {
                    let d = l.iter().map(|z| (z - y.conj()).norm()).fold(f64::INFINITY, f64::min);
                    assert!(d < 0.02, "{d}");
                }
            }
        }
    }

    #[test]
    fn singular_curve_at_eps_one_is_lemniscate_level() {
        let c = trace_singular_curve(eps(1.0)).unwrap();
        for l in &c.loops {
            for &y in l {
                assert!(((y * (1.0 - y)).norm() - 0.25).abs() < 1e-8);
            }
        }
    }
}
