//! Dormand–Prince 5(4) with the fourth-order continuous extension.
//!
//! The stepper hands back every accepted step together with its dense-output
//! coefficients; stop conditions and event location are the caller's business.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Absolute bound on the step length; `f64::INFINITY` for none.
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rtol: 1e-11,
            atol: 1e-12,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Dense output at `t` (meaningful for `t` between `t0` and `t1`).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / (self.t1 - self.t0);
        let s1 = 1.0 - s;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

pub struct Dopri5<F, const N: usize> {
    rhs: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    tol: Tolerances,
    steps: usize,
}

#[inline]
fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    /// `h0` carries the integration direction through its sign.
    pub fn new(mut rhs: F, t0: f64, y0: [f64; N], h0: f64, tol: Tolerances) -> Self {
        let k1 = rhs(t0, &y0);
        Dopri5 {
            rhs,
            t: t0,
            y: y0,
            k1,
            h: h0,
            tol,
            steps: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Takes one accepted step without passing `t_limit`.
    pub fn step_toward(&mut self, t_limit: f64) -> Result<Step<N>> {
        let dir = if t_limit >= self.t { 1.0 } else { -1.0 };
        loop {
            self.steps += 1;
            if self.steps > self.tol.max_steps {
                return Err(Error::NoConvergence {
                    what: "ode step budget",
                    residual: (t_limit - self.t).abs(),
                });
            }
            let mut h = dir * self.h.abs().min(self.tol.h_max);
            let last = (self.t + h - t_limit) * dir >= 0.0;
            if last {
                h = t_limit - self.t;
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let rhs = &mut self.rhs;
            let k2 = rhs(t + C2 * h, &comb(&y, h, &[(A21, &k1)]));
            let k3 = rhs(t + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = rhs(t + C4 * h, &comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = rhs(
                t + C5 * h,
                &comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &comb(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y1 = comb(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = rhs(t + h, &y1);

            let mut err = 0.0;
            let mut bad = false;
            for i in 0..N {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y1[i].abs());
                err += (e / sc).powi(2);
                bad |= !y1[i].is_finite();
            }
            let err = if bad { f64::INFINITY } else { (err / N as f64).sqrt() };

            if err <= 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let rcont = std::array::from_fn(|j| {
                    std::array::from_fn(|i| {
                        let dy = y1[i] - y[i];
                        match j {
                            0 => y[i],
                            1 => dy,
                            2 => h * k1[i] - dy,
                            3 => dy - h * k7[i] - (h * k1[i] - dy),
                            _ => h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]),
                        }
                    })
                });
                let step = Step { t0: t, t1: t + h, y0: y, y1, rcont };
                self.t = if last { t_limit } else { t + h };
                self.y = y1;
                self.k1 = k7;
                if !last || fac < 1.0 {
                    self.h = h.abs() * fac;
                }
                return Ok(step);
            }
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            self.h = h.abs() * fac;
            if self.h < self.tol.h_min {
                return Err(Error::NoConvergence {
                    what: "ode step size underflow",
                    residual: err,
                });
            }
        }
    }

    /// Integrates to `t_end` and returns the final state.
    pub fn run_to(&mut self, t_end: f64) -> Result<[f64; N]> {
        while self.t != t_end {
            self.step_toward(t_end)?;
        }
        Ok(self.y)
    }
}

/// Locates a sign change of `g` inside an accepted step using the dense output.
/// Returns the crossing time; `g(t0)` and `g(t1)` must have opposite signs.
pub fn locate_event<const N: usize>(step: &Step<N>, g: impl Fn(f64, &[f64; N]) -> f64) -> f64 {
    let (mut a, mut b) = (step.t0, step.t1);
    let mut ga = g(a, &step.y0);
    for _ in 0..200 {
        // Illinois-free bisection on the interpolant; cheap and robust
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let gm = g(m, &step.eval(m));
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
