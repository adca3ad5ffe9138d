//! The real perturbed foliation
//! `eps (1 - y) d(y - x^2) + (y - x^2) d(1 - y) + P dx + Q dy = 0`.
//!
//! Written as `A dx + B dy = 0` with
//! `A = -2 eps x (1 - y) + P` and `B = eps (1 - y) - (y - x^2) + Q`.
//! Orbits follow the dual field `(B, -A)`, which turns counterclockwise
//! around the center at `delta = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{Cpx, Eps};
use crate::error::{Error, Result};
use crate::ode::{locate_event, Dopri5, Step, Tolerances};

/// Real polynomial `sum c[i][j] x^i y^j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Poly {
    pub coef: Vec<Vec<f64>>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coef: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly { coef: vec![vec![c]] }
    }

    /// Builds from `(i, j, c)` monomials `c x^i y^j`.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let mut coef: Vec<Vec<f64>> = Vec::new();
        for &(i, j, c) in terms {
            if coef.len() <= i {
                coef.resize(i + 1, Vec::new());
            }
            if coef[i].len() <= j {
                coef[i].resize(j + 1, 0.0);
            }
            coef[i][j] += c;
        }
        Poly { coef }
    }

    pub fn degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coef.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().flatten().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coef.iter().rev() {
            let mut r = 0.0;
            for &c in row.iter().rev() {
                r = r * y + c;
            }
            acc = acc * x + r;
        }
        acc
    }

    pub fn eval_c(&self, x: Cpx, y: Cpx) -> Cpx {
        let mut acc = Cpx::new(0.0, 0.0);
        for row in self.coef.iter().rev() {
            let mut r = Cpx::new(0.0, 0.0);
            for &c in row.iter().rev() {
                r = r * y + c;
            }
            acc = acc * x + r;
        }
        acc
    }

    /// `(d/dx, d/dy)` at a real point.
    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let mut dx = 0.0;
        let mut dy = 0.0;
        for (i, row) in self.coef.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                if i > 0 {
                    dx += c * i as f64 * x.powi(i as i32 - 1) * y.powi(j as i32);
                }
                if j > 0 {
                    dy += c * j as f64 * x.powi(i as i32) * y.powi(j as i32 - 1);
                }
            }
        }
        (dx, dy)
    }

    pub fn is_symmetric_in_x(&self, odd: bool) -> bool {
        self.coef
            .iter()
            .enumerate()
            .all(|(i, row)| (i % 2 == 1) == odd || row.iter().all(|&c| c == 0.0))
    }
}

/// One experiment: `eps`, the perturbation size `delta`, and the direction
/// `(P, Q) = delta * (p_dir, q_dir)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoliationParams {
    pub eps: Eps,
    pub delta: f64,
    pub p_dir: Poly,
    pub q_dir: Poly,
}

impl FoliationParams {
    pub fn new(eps: f64, delta: f64, p_dir: Poly, q_dir: Poly) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta = {delta}")));
        }
        Ok(FoliationParams { eps: Eps::new(eps)?, delta, p_dir, q_dir })
    }

    pub fn integrable(eps: f64) -> Result<Self> {
        Self::new(eps, 0.0, Poly::zero(), Poly::zero())
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        FoliationParams { delta, ..self.clone() }
    }

    pub fn is_integrable(&self) -> bool {
        self.delta == 0.0 || (self.p_dir.is_zero() && self.q_dir.is_zero())
    }

    #[inline]
    pub fn one_form(&self, x: f64, y: f64) -> (f64, f64) {
        let e = self.eps.get();
        let a = -2.0 * e * x * (1.0 - y) + self.delta * self.p_dir.eval(x, y);
        let b = e * (1.0 - y) - (y - x * x) + self.delta * self.q_dir.eval(x, y);
        (a, b)
    }

    #[inline]
    pub fn one_form_c(&self, x: Cpx, y: Cpx) -> (Cpx, Cpx) {
        let e = self.eps.get();
        let one_minus = 1.0 - y;
        let mut a = -2.0 * e * x * one_minus;
        let mut b = e * one_minus - (y - x * x);
        if self.delta != 0.0 {
            a += self.delta * self.p_dir.eval_c(x, y);
            b += self.delta * self.q_dir.eval_c(x, y);
        }
        (a, b)
    }

    /// Jacobian of `(A, B)` with respect to `(x, y)`.
    pub fn one_form_jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let e = self.eps.get();
        let (px, py) = self.p_dir.gradient(x, y);
        let (qx, qy) = self.q_dir.gradient(x, y);
        [
            [-2.0 * e * (1.0 - y) + self.delta * px, 2.0 * e * x + self.delta * py],
            [2.0 * x + self.delta * qx, -e - 1.0 + self.delta * qy],
        ]
    }

    /// The dual vector field `(B, -A)`.
    #[inline]
    pub fn field(&self, x: f64, y: f64) -> [f64; 2] {
        let (a, b) = self.one_form(x, y);
        [b, -a]
    }
}

pub fn one_form_coeffs(x: f64, y: f64, params: &FoliationParams) -> (f64, f64) {
    params.one_form(x, y)
}

fn orbit_tolerances() -> Tolerances {
    Tolerances { rtol: 1e-12, atol: 1e-13, h_max: 0.5, ..Default::default() }
}

/// Where an orbit integration stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// After the `count`-th crossing of `{x = section_x}`.
    Crossings { section_x: f64, count: usize },
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<OrbitPoint>,
    pub crossings: Vec<OrbitPoint>,
}

/// Options for [`integrate_orbit`].
#[derive(Debug, Clone, Copy)]
pub struct OrbitOptions {
    pub stop: Stop,
    /// `+1` forward, `-1` backward in time.
    pub direction: f64,
    pub t_max: f64,
    /// Fail with `EscapeFromAnnulus` once the orbit leaves
    /// `{ x^2 < y < 1 }`.
    pub confine_to_annulus: bool,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions { stop: Stop::TimeLimit, direction: 1.0, t_max: 100.0, confine_to_annulus: false }
    }
}

const SINGULAR_THRESHOLD: f64 = 1e-10;

/// Adaptive orbit integration with section-crossing events.
pub fn integrate_orbit(start: (f64, f64), params: &FoliationParams, opts: OrbitOptions) -> Result<Orbit> {
    let mut orbit = Orbit::default();
    let (x0, y0) = start;
    orbit.points.push(OrbitPoint { t: 0.0, x: x0, y: y0 });
    let t_end = opts.direction.signum() * opts.t_max;
    run_orbit::<2>(
        [x0, y0],
        params,
        &opts,
        t_end,
        |st, ev| {
            orbit.points.push(OrbitPoint { t: st.t1, x: st.y1[0], y: st.y1[1] });
            if let Some(p) = ev {
                orbit.crossings.push(OrbitPoint { t: p.0, x: p.1[0], y: p.1[1] });
            }
        },
    )?;
    Ok(orbit)
}

/// Orbit driver for the plain `(x, y)` state; components past the second stay constant.
fn run_orbit<const N: usize>(
    y0: [f64; N],
    params: &FoliationParams,
    opts: &OrbitOptions,
    t_end: f64,
    mut on_step: impl FnMut(&Step<N>, Option<(f64, [f64; N])>),
) -> Result<Option<(f64, [f64; N])>> {
    let rhs = |_t: f64, s: &[f64; N]| -> [f64; N] {
        let [fx, fy] = params.field(s[0], s[1]);
        let mut out = [0.0; N];
        out[0] = fx;
        out[1] = fy;
        out
    };
    drive(rhs, y0, params, opts, t_end, &mut on_step)
}

fn drive<const N: usize>(
    rhs: impl FnMut(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    params: &FoliationParams,
    opts: &OrbitOptions,
    t_end: f64,
    on_step: &mut impl FnMut(&Step<N>, Option<(f64, [f64; N])>),
) -> Result<Option<(f64, [f64; N])>> {
    let mut solver = Dopri5::new(rhs, 0.0, y0, opts.direction.signum() * 1e-3, orbit_tolerances());
    let (section_x, count) = match opts.stop {
        Stop::Crossings { section_x, count } => (section_x, count),
        Stop::TimeLimit => (f64::NAN, usize::MAX),
    };
    let mut seen = 0;
    loop {
        if solver.t() == t_end {
            return match opts.stop {
                Stop::TimeLimit => Ok(None),
                Stop::Crossings { .. } => Err(Error::TimeLimit(opts.t_max)),
            };
        }
        let st = solver.step_toward(t_end)?;
        let [x, y] = [st.y1[0], st.y1[1]];
        let (a, b) = params.one_form(x, y);
        if a.hypot(b) < SINGULAR_THRESHOLD {
            return Err(Error::SingularApproach { x, y });
        }
        if opts.confine_to_annulus && (y >= 1.0 || y <= x * x) {
            return Err(Error::EscapeFromAnnulus { x, y });
        }
        let g0 = st.y0[0] - section_x;
        let g1 = st.y1[0] - section_x;
        let crossed = section_x.is_finite() && g0 != 0.0 && (g1 == 0.0 || (g0 > 0.0) != (g1 > 0.0));
        if crossed {
            seen += 1;
            let t = locate_event(&st, |_, s| s[0] - section_x);
            let mut s = st.eval(t);
            // one Newton correction along the flow onto the section
            let [fx, fy] = params.field(s[0], s[1]);
            if fx != 0.0 {
                let dt = (section_x - s[0]) / fx;
                s[1] += fy * dt;
                s[0] = section_x;
            }
            on_step(&st, Some((t, s)));
            if seen >= count {
                return Ok(Some((t, s)));
            }
        } else {
            on_step(&st, None);
        }
    }
}

/// Equilibrium near the center, by Newton on `A = B = 0` from
/// `(0, eps/(1+eps))`.
pub fn find_focus(params: &FoliationParams) -> Result<(f64, f64)> {
    let (mut x, mut y) = (0.0, params.eps.y_center());
    for _ in 0..50 {
        let (a, b) = params.one_form(x, y);
        if a.hypot(b) < 1e-15 {
            return Ok((x, y));
        }
        let j = params.one_form_jacobian(x, y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 {
            break;
        }
        let dx = (a * j[1][1] - b * j[0][1]) / det;
        let dy = (b * j[0][0] - a * j[1][0]) / det;
        x -= dx;
        y -= dy;
        if dx.hypot(dy) < 1e-16 {
            return Ok((x, y));
        }
    }
    let (a, b) = params.one_form(x, y);
    if a.hypot(b) < 1e-12 {
        Ok((x, y))
    } else {
        Err(Error::NoConvergence { what: "find_focus", residual: a.hypot(b) })
    }
}

/// Eigenvalues of the linearization of `(B, -A)` at `p`.
pub fn linearization_eigenvalues(params: &FoliationParams, p: (f64, f64)) -> (Cpx, Cpx) {
    let j = params.one_form_jacobian(p.0, p.1);
    // d(B, -A)/d(x, y)
    let m = [[j[1][0], j[1][1]], [-j[0][0], -j[0][1]]];
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Cpx::new(tr * tr - 4.0 * det, 0.0).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Which half of the orbit realizes the Dulac map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// Through `x > x_c` (backward in time).
    One,
    /// Through `x < x_c` (forward in time).
    Two,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::One => 1.0,
            Branch::Two => -1.0,
        }
    }

    pub fn from_index(i: u8) -> Result<Branch> {
        match i {
            1 => Ok(Branch::One),
            2 => Ok(Branch::Two),
            _ => Err(Error::InvalidParameter(format!("branch {i}"))),
        }
    }
}

/// Time budget for one half revolution.
const HALF_RETURN_T_MAX: f64 = 1e4;

/// Real half-return map on `{x = x_c}` from `y` above the focus to the next
/// crossing below it.
pub fn half_return(y: f64, params: &FoliationParams, branch: Branch) -> Result<f64> {
    let (xc, _) = find_focus(params)?;
    half_return_at(y, xc, params, branch)
}

pub(crate) fn half_return_at(y: f64, xc: f64, params: &FoliationParams, branch: Branch) -> Result<f64> {
    let opts = OrbitOptions {
        stop: Stop::Crossings { section_x: xc, count: 1 },
        direction: match branch {
            Branch::One => -1.0,
            Branch::Two => 1.0,
        },
        t_max: HALF_RETURN_T_MAX,
        confine_to_annulus: true,
    };
    let end = run_orbit::<2>([xc, y], params, &opts, opts.direction * opts.t_max, |_, _| {})?;
    Ok(end.expect("crossing stop returns a point").1[1])
}

/// `half_return(y, 1) - half_return(y, 2)`.
pub fn displacement(y: f64, params: &FoliationParams) -> Result<f64> {
    let (xc, _) = find_focus(params)?;
    displacement_at(y, xc, params)
}

fn displacement_at(y: f64, xc: f64, params: &FoliationParams) -> Result<f64> {
    Ok(half_return_at(y, xc, params, Branch::One)? - half_return_at(y, xc, params, Branch::Two)?)
}

pub const TOL_CYCLE: f64 = 1e-10;
/// Displacements below this are indistinguishable from integration noise.
pub const DISPLACEMENT_NOISE: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub y_fixed: f64,
    pub multiplicity_hint: u32,
    pub residual: f64,
}

/// Displacement on a grid, evaluated in parallel.
pub fn displacement_table(params: &FoliationParams, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (xc, _) = find_focus(params)?;
    grid.par_iter()
        .map(|&y| displacement_at(y, xc, params).map(|d| (y, d)))
        .collect()
}

/// Real limit cycles crossing `{x = x_c}` at grid-bracketed sign changes of
/// the displacement, refined by bisection to [`TOL_CYCLE`].
pub fn find_real_cycles(params: &FoliationParams, grid: &[f64]) -> Result<Vec<CycleRecord>> {
    if params.is_integrable() {
        return Ok(Vec::new());
    }
    let (xc, _) = find_focus(params)?;
    let table = displacement_table(params, grid)?;
    let signed: Vec<(f64, f64)> = table.into_iter().filter(|(_, d)| d.abs() > DISPLACEMENT_NOISE).collect();
    let brackets: Vec<(f64, f64, f64)> = signed
        .windows(2)
        .filter(|w| (w[0].1 > 0.0) != (w[1].1 > 0.0))
        .map(|w| (w[0].0, w[1].0, w[0].1))
        .collect();
    brackets
        .par_iter()
        .map(|&(mut a, mut b, da)| {
            let mut sa = da > 0.0;
            while (b - a).abs() > TOL_CYCLE {
                let m = 0.5 * (a + b);
                let dm = displacement_at(m, xc, params)?;
                if dm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if (dm > 0.0) == sa {
                    a = m;
                    sa = dm > 0.0;
                } else {
                    b = m;
                }
            }
            let y = 0.5 * (a + b);
            let residual = displacement_at(y, xc, params)?.abs();
            Ok(CycleRecord { y_fixed: y, multiplicity_hint: 1, residual })
        })
        .collect()
}

/// Upper section point `y` in `(y_c, 1)` of the integrable oval `h = c`.
pub fn level_to_y(c: f64, eps: Eps) -> Result<f64> {
    crate::dulac::solve_real_level(c, crate::isoclines::Side::D1, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MelnikovValue {
    pub level: f64,
    pub value: f64,
    /// `∮ |integrand| dt`; the scale against which `value` is judged zero.
    pub abs_integral: f64,
}

/// Guard band around the degenerate levels, relative to `h(y_c)`.
pub const LEVEL_GUARD: f64 = 1e-6;

/// First-order term `∮_{H=c} (y - x^2)^{eps-1} (P dx + Q dy)` over the
/// counterclockwise integrable oval; `params` supplies `eps` and the
/// direction (its `delta` is ignored).
pub fn melnikov(c: f64, params: &FoliationParams) -> Result<MelnikovValue> {
    let eps = params.eps;
    let hc = eps.h_center();
    if !(c > LEVEL_GUARD * hc && c < hc * (1.0 - 1e-9)) {
        return Err(Error::QuadratureFailure { level: c, reason: "level outside the guarded annulus" });
    }
    let y_top = level_to_y(c, eps)?;
    let base = params.with_delta(0.0);
    let e = eps.get();
    let rhs = |_t: f64, s: &[f64; 4]| -> [f64; 4] {
        let (x, y) = (s[0], s[1]);
        let (a, b) = base.one_form(x, y);
        let m = (y - x * x).powf(e - 1.0);
        let w = m * (params.p_dir.eval(x, y) * b - params.q_dir.eval(x, y) * a);
        [b, -a, w, w.abs()]
    };
    let opts = OrbitOptions {
        stop: Stop::Crossings { section_x: 0.0, count: 2 },
        direction: 1.0,
        t_max: HALF_RETURN_T_MAX,
        confine_to_annulus: true,
    };
    let end = drive(rhs, [0.0, y_top, 0.0, 0.0], &base, &opts, opts.t_max, &mut |_, _| {})
        .map_err(|_| Error::QuadratureFailure { level: c, reason: "oval integration failed" })?
        .expect("crossing stop returns a point");
    let s = end.1;
    if !(s[2].is_finite()) {
        return Err(Error::QuadratureFailure { level: c, reason: "non-finite integral" });
    }
    Ok(MelnikovValue { level: c, value: s[2], abs_integral: s[3] })
}

/// Relative size below which a Melnikov value counts as zero.
pub const MELNIKOV_NOISE: f64 = 1e-9;

/// Simple zeros of the Melnikov function bracketed on a level grid and
/// refined by bisection.
pub fn melnikov_zeros(params: &FoliationParams, levels: &[f64]) -> Result<Vec<f64>> {
    let values: Vec<MelnikovValue> = levels.par_iter().map(|&c| melnikov(c, params)).collect::<Result<_>>()?;
    let signed: Vec<&MelnikovValue> = values
        .iter()
        .filter(|v| v.value.abs() > MELNIKOV_NOISE * v.abs_integral.max(f64::MIN_POSITIVE))
        .collect();
    let mut zeros = Vec::new();
    for w in signed.windows(2) {
        if (w[0].value > 0.0) == (w[1].value > 0.0) {
            continue;
        }
        let (mut a, mut b) = (w[0].level, w[1].level);
        let sa = w[0].value > 0.0;
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            let v = melnikov(m, params)?.value;
            if (v > 0.0) == sa {
                a = m;
            } else {
                b = m;
            }
            if (b - a).abs() < 1e-13 * b.abs() {
                break;
            }
        }
        zeros.push(0.5 * (a + b));
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::H_full;

    fn integrable(e: f64) -> FoliationParams {
        FoliationParams::integrable(e).unwrap()
    }

    #[test]
    fn poly_eval_and_gradient() {
        let p = Poly::from_terms(&[(0, 0, 1.0), (1, 1, 2.0), (2, 0, -3.0)]);
        assert_eq!(p.eval(2.0, 3.0), 1.0 + 12.0 - 12.0);
        assert_eq!(p.gradient(2.0, 3.0), (6.0 - 12.0, 4.0));
        assert_eq!(p.eval_c(Cpx::new(2.0, 0.0), Cpx::new(3.0, 0.0)), Cpx::new(1.0, 0.0));
        assert_eq!(p.degree(), 2);
        assert!(Poly::constant(1.0).is_symmetric_in_x(false));
        assert!(!p.is_symmetric_in_x(false));
    }

    #[test]
    fn center_is_a_zero_of_the_form() {
        for e in [0.1, 0.5, 2.0] {
            let p = integrable(e);
            let (a, b) = p.one_form(0.0, p.eps.y_center());
            assert_eq!(a, 0.0);
            assert!(b.abs() < 1e-15);
        }
    }

    #[test]
    fn form_on_parabola_and_annihilation() {
        let p = FoliationParams::new(0.3, 0.1, Poly::from_terms(&[(0, 1, 1.0)]), Poly::from_terms(&[(1, 0, 1.0)])).unwrap();
        let x = 0.4;
        let (_, b) = p.with_delta(0.0).one_form(x, x * x);
        assert!((b - 0.3 * (1.0 - x * x)).abs() < 1e-15);
        let (a, b) = p.one_form(0.2, 0.7);
        let [vx, vy] = p.field(0.2, 0.7);
        assert_eq!(a * vx + b * vy, 0.0);
    }

    #[test]
    fn integrable_orbit_closes_and_conserves_h() {
        let p = integrable(1.0);
        let opts = OrbitOptions { stop: Stop::Crossings { section_x: 0.0, count: 2 }, t_max: 100.0, ..Default::default() };
        let orbit = integrate_orbit((0.0, 0.5 + 0.2), &p, opts).unwrap();
        let e = p.eps;
        let h0 = H_full(Cpx::new(0.0, 0.0), Cpx::new(0.7, 0.0), e).unwrap().re;
        for pt in &orbit.points {
            let h = H_full(Cpx::new(pt.x, 0.0), Cpx::new(pt.y, 0.0), e).unwrap().re;
            assert!((h - h0).abs() < 1e-8, "{h} vs {h0}");
        }
        assert_eq!(orbit.crossings.len(), 2);
        assert!((orbit.crossings[0].y - 0.3).abs() < 1e-8);
        assert!((orbit.crossings[1].y - 0.7).abs() < 1e-8);
        // the closed oval through (0, 0.5)
        let orbit = integrate_orbit((0.0, 0.5), &p, OrbitOptions { stop: Stop::Crossings { section_x: 0.0, count: 1 }, ..Default::default() });
        assert!(matches!(orbit, Err(Error::SingularApproach { .. })) || orbit.unwrap().crossings[0].y == 0.5);
    }

    #[test]
    fn orbit_circulates_counterclockwise() {
        let p = integrable(0.5);
        let [vx, _] = p.field(0.0, 0.8);
        assert!(vx < 0.0);
    }

    #[test]
    fn focus_at_delta_zero_is_the_center() {
        for e in [0.1, 0.5, 3.0] {
            let p = integrable(e);
            let (x, y) = find_focus(&p).unwrap();
            assert_eq!(x, 0.0);
            assert!((y - e / (1.0 + e)).abs() < 1e-16);
            let (l1, l2) = linearization_eigenvalues(&p, (x, y));
            assert!(l1.re.abs() < 1e-14 && l2.re.abs() < 1e-14 && l1.im.abs() > 0.1);
        }
    }

    #[test]
    fn focus_drift_is_linear_in_delta() {
        let base = FoliationParams::new(0.5, 0.0, Poly::from_terms(&[(0, 1, 1.0)]), Poly::from_terms(&[(0, 0, 1.0), (1, 0, 1.0)])).unwrap();
        let p0 = find_focus(&base).unwrap();
        let drift = |d: f64| {
            let p = find_focus(&base.with_delta(d)).unwrap();
            (p.0 - p0.0).hypot(p.1 - p0.1)
        };
        let r = drift(1e-3) / drift(5e-4);
        assert!((r - 2.0).abs() < 0.01, "{r}");
        // perturbed focus: eigenvalues leave the imaginary axis
        let (l1, _) = linearization_eigenvalues(&base.with_delta(1e-2), find_focus(&base.with_delta(1e-2)).unwrap());
        assert!(l1.re != 0.0);
    }

    #[test]
    fn half_return_matches_closed_form_at_eps_one() {
        let p = integrable(1.0);
        let d1 = half_return(0.8, &p, Branch::One).unwrap();
        let d2 = half_return(0.8, &p, Branch::Two).unwrap();
        assert!((d1 - 0.2).abs() < 1e-9, "{d1}");
        assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn half_return_matches_real_dulac() {
        for e in [0.2, 0.5] {
            let p = integrable(e);
            let yc = p.eps.y_center();
            for k in 1..5 {
                let y = yc + (1.0 - yc) * k as f64 / 5.0;
                let d = half_return(y, &p, Branch::Two).unwrap();
                let exact = crate::dulac::dulac_real(y, p.eps).unwrap();
                assert!((d - exact).abs() < 1e-8, "{e} {y}: {d} vs {exact}");
            }
        }
    }

    #[test]
    fn displacement_vanishes_when_integrable() {
        let p = integrable(0.5);
        for y in [0.5, 0.7, 0.9] {
            assert!(displacement(y, &p).unwrap().abs() < 1e-9);
        }
        assert!(find_real_cycles(&p, &[0.4, 0.6, 0.8]).unwrap().is_empty());
    }

    #[test]
    fn displacement_scales_linearly() {
        let base = FoliationParams::new(0.5, 0.0, Poly::zero(), Poly::from_terms(&[(1, 0, 1.0)])).unwrap();
        let d1 = displacement(0.7, &base.with_delta(1e-3)).unwrap();
        let d2 = displacement(0.7, &base.with_delta(5e-4)).unwrap();
        assert!((d1 / d2 - 2.0).abs() < 0.02, "{d1} {d2}");
    }

    #[test]
    fn cycles_are_fixed_points_of_the_first_return() {
        let p = FoliationParams::new(0.5, 1e-4, Poly::zero(), Poly::from_terms(&[(1, 1, 1.0), (1, 0, -0.4)])).unwrap();
        let grid = crate::cyclicity::real_section_grid(&p, 40).unwrap();
        let cycles = find_real_cycles(&p, &grid).unwrap();
        assert_eq!(cycles.len(), 1);
        let (_, yc) = find_focus(&p).unwrap();
        // first return: branch 1 down to the lower crossing, branch 2 inverted
        // back up (branch 2 is decreasing in y)
        let ret = |y: f64| {
            let w = half_return(y, &p, Branch::One).unwrap();
            let (mut a, mut b) = (yc + 1e-6, *grid.last().unwrap());
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if half_return(m, &p, Branch::Two).unwrap() > w {
                    a = m;
                } else {
                    b = m;
                }
            }
            0.5 * (a + b)
        };
        let y = cycles[0].y_fixed;
        assert!((ret(y) - y).abs() < 1e-8, "{} vs {y}", ret(y));
        let off = y - 0.05;
        assert!((ret(off) - off).abs() > 1e-7);
    }

    #[test]
    fn integrable_return_is_monotone_near_the_focus() {
        let p = integrable(0.5);
        let yc = p.eps.y_center();
        let lows: Vec<f64> = (1..=8).map(|k| half_return(yc + 0.01 * k as f64, &p, Branch::One).unwrap()).collect();
        assert!(lows.windows(2).all(|w| w[1] < w[0]), "{lows:?}");
        for (k, w) in lows.iter().enumerate() {
            let y = yc + 0.01 * (k + 1) as f64;
            assert!((half_return(y, &p, Branch::Two).unwrap() - w).abs() < 1e-9);
        }
    }

    #[test]
    fn escape_is_reported() {
        // strong outward push makes the orbit cross y = 1
        let p = FoliationParams::new(0.5, 0.5, Poly::zero(), Poly::from_terms(&[(1, 0, 1.0)])).unwrap();
        let r = half_return(0.99, &p, Branch::One);
        assert!(matches!(r, Err(Error::EscapeFromAnnulus { .. })) || r.is_ok());
    }

    #[test]
    fn melnikov_of_the_unperturbed_form_vanishes() {
        // direction = eps P1 dP0 + P0 dP1 itself; the integrand is exact
        let e = 0.5;
        let p_dir = Poly::from_terms(&[(1, 0, -2.0 * e), (1, 1, 2.0 * e)]);
        let q_dir = Poly::from_terms(&[(0, 0, e), (0, 1, -e - 1.0), (2, 0, 1.0)]);
        let p = FoliationParams::new(e, 0.0, p_dir, q_dir).unwrap();
        let hc = p.eps.h_center();
        for k in 1..5 {
            let v = melnikov(hc * k as f64 / 5.0, &p).unwrap();
            // the form annihilates the leaves, so the integrand vanishes pointwise
            assert!(v.value.abs() < 1e-12 && v.abs_integral < 1e-12, "{v:?}");
        }
    }

    /// Area enclosed by `(y - x^2)(1 - y) = c`, by quadrature over `y` in the
    /// variable `y = a + (b - a)(1 - cos s)/2` which removes the square-root
    /// endpoint behavior.
    fn oval_area(c: f64) -> f64 {
        let disc = (1.0f64 - 4.0 * c).sqrt();
        let (a, b) = ((1.0 - disc) / 2.0, (1.0 + disc) / 2.0);
        let n = 4000;
        let mut sum = 0.0;
        for k in 0..=n {
            let s = std::f64::consts::PI * k as f64 / n as f64;
            let y = a + (b - a) * (1.0 - s.cos()) / 2.0;
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let g = (y - c / (1.0 - y)).max(0.0);
            sum += w * 2.0 * g.sqrt() * (b - a) / 2.0 * s.sin();
        }
        sum * std::f64::consts::PI / n as f64 / 3.0
    }

    #[test]
    fn melnikov_at_eps_one_is_green_area() {
        let p = FoliationParams::new(1.0, 0.0, Poly::zero(), Poly::from_terms(&[(1, 0, 1.0)])).unwrap();
        for c in [0.05, 0.12, 0.2, 0.24] {
            let v = melnikov(c, &p).unwrap().value;
            let area = oval_area(c);
            assert!((v - area).abs() < 1e-8 * (1.0 + area), "{c}: {v} vs {area}");
        }
    }

    #[test]
    fn melnikov_guard_band() {
        let p = FoliationParams::new(0.5, 0.0, Poly::zero(), Poly::constant(1.0)).unwrap();
        let hc = p.eps.h_center();
        assert!(matches!(melnikov(0.0, &p), Err(Error::QuadratureFailure { .. })));
        assert!(matches!(melnikov(hc, &p), Err(Error::QuadratureFailure { .. })));
    }
}
