//! The Dulac map `D` of the integrable foliation (solve `h(w) = h(y)` on the
//! opposite component) and the two perturbed half-maps `D^1`, `D^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{log_h, log_h_prime, Cpx, Eps};
use crate::error::{Error, Result};
use crate::foliation::{find_focus, Branch, FoliationParams};
use crate::isoclines::{assert_monotone_component, classify_point, component_point, Region, Side, TOL_ISO};
use crate::leaves::{base_lift, transport, TransportEnd};

/// `eps` ranges over which `|theta|` may exceed `pi` and the map is still
/// continued (the collar around `C_{±pi}`), in units of `theta`.
pub const DEFAULT_COLLAR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DulacQuery {
    pub y: Cpx,
    pub eps: Eps,
    pub branch: Branch,
}

fn real_log_h(y: f64, eps: f64) -> f64 {
    eps * y.ln() + (1.0 - y).ln()
}

/// Real `y` on the `side` half of `(0, 1)` with `h(y) = modulus`.
pub fn solve_real_level(modulus: f64, side: Side, eps: Eps) -> Result<f64> {
    let e = eps.get();
    let yc = eps.y_center();
    let hc = eps.h_center();
    if !(modulus > 0.0) {
        return Err(Error::InvalidParameter(format!("level {modulus}")));
    }
    if modulus >= hc {
        if modulus <= hc * (1.0 + 1e-14) {
            return Ok(yc);
        }
        return Err(Error::InvalidParameter(format!("level {modulus} above h(y_c) = {hc}")));
    }
    let target = modulus.ln();
    let (mut lo, mut hi) = match side {
        Side::D0 => (0.0, yc),
        Side::D1 => (yc, 1.0),
    };
    // g increases towards y_c on both sides
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let below = real_log_h(mid, e) < target;
        match (side, below) {
            (Side::D0, true) | (Side::D1, false) => lo = mid,
            _ => hi = mid,
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The real involution on `(0, 1)`: the point `w` across `y_c` with
/// `h(w) = h(y)`.
///
/// Solved for `d = w - y` as the non-trivial root of
/// `(eps log1p(d/y) + log1p(-d/(1-y))) / d`, which stays well conditioned
/// as `y -> y_c`.
pub fn dulac_real(y: f64, eps: Eps) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::InvalidParameter(format!("dulac_real needs y in (0, 1), got {y}")));
    }
    let e = eps.get();
    let yc = eps.y_center();
    if y == yc {
        return Ok(yc);
    }
    let g = |d: f64| (e * (d / y).ln_1p() + (-d / (1.0 - y)).ln_1p()) / d;
    // one sign change between d = y_c - y (near end) and the far end of (0, 1)
    let (near, far) = if y > yc { (yc - y, -y) } else { (yc - y, 1.0 - y) };
    let s_near = g(near) > 0.0;
    let (mut lo, mut hi) = (near, far);
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if !gm.is_nan() && (gm > 0.0) == s_near {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = y + 0.5 * (lo + hi);
    // near 0 or 1 the image needs relative accuracy that d cannot carry
    let target = real_log_h(y, e);
    if w < 0.5 * yc {
        return Ok(geometric_root(|w| e * w.ln() + (-w).ln_1p() - target, w));
    }
    if 1.0 - w < 0.5 * (1.0 - yc) {
        return Ok(1.0 - geometric_root(|u| e * (-u).ln_1p() + u.ln() - target, 1.0 - w));
    }
    Ok(w)
}

/// Root of an increasing `g` on `(0, 2 guess]`, bisecting in `log`.
fn geometric_root(g: impl Fn(f64) -> f64, guess: f64) -> f64 {
    let guess = guess.max(1e-300);
    let (mut lo, mut hi) = (guess * 0.5, guess * 2.0);
    while g(lo) > 0.0 && lo > 1e-300 {
        lo *= 1e-3;
    }
    while g(hi) < 0.0 {
        hi = 0.5 * (hi + 1.0);
    }
    for _ in 0..400 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// `log h` with the argument of `y` continued past the negative ray towards
/// the side selected by `upper` (`Some(true)` keeps `arg y` in `[0, 2 pi)`).
fn log_h_branch(w: Cpx, eps: Eps, upper: Option<bool>) -> Cpx {
    let mut arg = w.arg();
    match upper {
        Some(true) if arg < 0.0 => arg += 2.0 * PI,
        Some(false) if arg > 0.0 => arg -= 2.0 * PI,
        _ => {}
    }
    Cpx::new(w.norm().ln(), arg) * eps.get() + (1.0 - w).ln()
}

/// `t > 0` with `t^eps (1 + t) = modulus`.
pub fn negative_ray_level(modulus: f64, eps: Eps) -> Result<f64> {
    let e = eps.get();
    let target = modulus.ln();
    let g = |t: f64| e * t.ln() + t.ln_1p() - target;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NoConvergence { what: "negative_ray_level", residual: g(hi) });
        }
    }
    for _ in 0..2000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid == lo || mid == hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn newton_polish(mut w: Cpx, target: Cpx, eps: Eps, upper: Option<bool>) -> Result<Cpx> {
    let mut r = log_h_branch(w, eps, upper) - target;
    for _ in 0..8 {
        if r.norm() < 1e-14 {
            break;
        }
        let step = r / log_h_prime(w, eps);
        w -= step;
        r = log_h_branch(w, eps, upper) - target;
        if step.norm() < 1e-16 * w.norm() {
            break;
        }
    }
    if r.norm() > 1e-10 {
        return Err(Error::NoConvergence { what: "dulac Newton polish", residual: r.norm() });
    }
    Ok(w)
}

/// Holomorphic extension of `D` to `D0 ∪ D1`, their common boundary and a
/// collar of width [`DEFAULT_COLLAR`] around `C_{±pi}`.
pub fn dulac_integrable(y: Cpx, eps: Eps) -> Result<Cpx> {
    dulac_integrable_with_collar(y, eps, DEFAULT_COLLAR)
}

pub fn dulac_integrable_with_collar(y: Cpx, eps: Eps, collar: f64) -> Result<Cpx> {
    if y.im == 0.0 {
        if y.re > 0.0 && y.re < 1.0 {
            return dulac_real(y.re, eps).map(|w| Cpx::new(w, 0.0));
        }
        return Err(Error::BranchCut(y));
    }
    let ell = log_h(y, eps)?;
    let theta = ell.im / eps.get();
    let modulus = ell.re.exp();
    let region = classify_point(y, eps)?;
    let t = theta.abs();
    if region == Region::Outside && t > PI + collar {
        return Err(Error::InvalidParameter(format!("{y} outside D0 ∪ D1 and its collar (theta = {theta})")));
    }
    if t <= TOL_ISO {
        if modulus > eps.h_center() {
            // C_{±0}: h is real there, so the conjugate is the other solution
            return newton_polish(y.conj(), ell, eps, None);
        }
        // next to the real segment: start from the real image
        let guess = Cpx::new(dulac_real(y.re.clamp(1e-300, 1.0 - 1e-16), eps)?, -y.im);
        return newton_polish(guess, ell, eps, None);
    }
    let target = if region == Region::D0 { Side::D1 } else { Side::D0 };
    let upper = if target == Side::D0 && t > PI / 2.0 { Some(theta > 0.0) } else { None };
    let guess = if target == Side::D0 && t >= PI - TOL_ISO {
        Cpx::new(-negative_ray_level(modulus, eps)?, 0.0)
    } else {
        assert_monotone_component(theta, target, eps, 16)?;
        component_point(theta, modulus, target, eps, theta.signum())?
    };
    newton_polish(guess, ell, eps, upper)
}

/// End point of the lifted path of the perturbed foliation that starts at
/// `(x_c, y)` and follows the `branch` realization of `D`, on `{x = x_c}`.
pub fn dulac_perturbed(y: Cpx, params: &FoliationParams, branch: Branch) -> Result<Cpx> {
    let (xc, _) = find_focus(params)?;
    let base = base_lift(y, params.eps, branch)?;
    let end = transport(&base, (Cpx::new(xc, 0.0), y), params, TransportEnd::Section(Cpx::new(xc, 0.0)))?;
    Ok(end.1)
}

/// `(D^1(y), D^2(y))`.
pub fn dulac_pair(y: Cpx, params: &FoliationParams) -> Result<(Cpx, Cpx)> {
    let (xc, _) = find_focus(params)?;
    let section = Cpx::new(xc, 0.0);
    let mut out = [Cpx::new(0.0, 0.0); 2];
    for (slot, branch) in out.iter_mut().zip([Branch::One, Branch::Two]) {
        let base = base_lift(y, params.eps, branch)?;
        *slot = transport(&base, (section, y), params, TransportEnd::Section(section))?.1;
    }
    Ok((out[0], out[1]))
}
