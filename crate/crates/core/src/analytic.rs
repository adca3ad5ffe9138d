//! Principal-branch kernels.
//!
//! Cuts: `y^eps` and every `Log` on `(-inf, 0]`, `(1 - y)^{1/eps}` on `[1, inf)`.
//! Arguments within [`CUT_ENDPOINT_TOL`] of a cut endpoint evaluate to the
//! analytic limit `0` instead of failing.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Cpx = Complex64;

pub const CUT_ENDPOINT_TOL: f64 = 1e-14;

/// The exponent of the Darboux first integral, validated positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
pub struct Eps(f64);

impl Eps {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 {
            Ok(Eps(eps))
        } else {
            Err(Error::InvalidEps {
                eps,
                reason: "must be positive and finite",
            })
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// Ordinate of the center, `eps / (1 + eps)`.
    #[inline]
    pub fn y_center(self) -> f64 {
        self.0 / (1.0 + self.0)
    }

    /// `h` at the center; the maximum of `h` on `(0, 1)`.
    pub fn h_center(self) -> f64 {
        let yc = self.y_center();
        yc.powf(self.0) * (1.0 - yc)
    }
}

#[inline]
fn on_negative_ray(z: Cpx) -> bool {
    z.im == 0.0 && z.re <= 0.0
}

fn finite(z: Cpx, what: &'static str) -> Result<Cpx> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Principal logarithm with the cut on `(-inf, 0]`.
pub fn principal_log(z: Cpx) -> Result<Cpx> {
    if on_negative_ray(z) {
        return Err(Error::BranchCut(z));
    }
    finite(z.ln(), "principal_log")
}

/// `exp(a Log z)` with `arg z` in `(-pi, pi)`.
pub fn principal_power(z: Cpx, a: f64) -> Result<Cpx> {
    if on_negative_ray(z) {
        return Err(Error::BranchCut(z));
    }
    if z == Cpx::new(1.0, 0.0) {
        return Ok(z);
    }
    finite((z.ln() * a).exp(), "principal_power")
}

/// `h(y) = y^eps (1 - y)`, the first integral restricted to `{x = 0}`.
pub fn h_section(y: Cpx, eps: Eps) -> Result<Cpx> {
    if y.norm() < CUT_ENDPOINT_TOL {
        return Ok(Cpx::new(0.0, 0.0));
    }
    Ok(principal_power(y, eps.get())? * (1.0 - y))
}

/// `ell(y) = eps Log y + Log(1 - y)`, a continuous logarithm of `h` on the
/// slit plane minus `[1, inf)`. Its imaginary part is `eps * theta`.
pub fn log_h(y: Cpx, eps: Eps) -> Result<Cpx> {
    let one_minus = Cpx::new(1.0, 0.0) - y;
    Ok(principal_log(y)? * eps.get() + principal_log(one_minus)?)
}

/// Derivative of [`log_h`].
#[inline]
pub fn log_h_prime(y: Cpx, eps: Eps) -> Cpx {
    eps.get() / y - 1.0 / (1.0 - y)
}

/// `f(y) = y (1 - y)^{1/eps}`.
pub fn f_rs(y: Cpx, eps: Eps) -> Result<Cpx> {
    let one_minus = Cpx::new(1.0, 0.0) - y;
    if one_minus.norm() < CUT_ENDPOINT_TOL {
        return Ok(Cpx::new(0.0, 0.0));
    }
    Ok(y * principal_power(one_minus, 1.0 / eps.get())?)
}

/// The Darboux first integral `(y - x^2)^eps (1 - y)`.
#[allow(non_snake_case)]
pub fn H_full(x: Cpx, y: Cpx, eps: Eps) -> Result<Cpx> {
    Ok(principal_power(y - x * x, eps.get())? * (1.0 - y))
}

/// Section restriction of the rescaled first integral, `y (1 - eps y)^{1/eps}`.
pub fn g_rescaled(y: Cpx, eps: Eps) -> Result<Cpx> {
    let base = 1.0 - y * eps.get();
    if base.norm() < CUT_ENDPOINT_TOL {
        return Ok(Cpx::new(0.0, 0.0));
    }
    Ok(y * principal_power(base, 1.0 / eps.get())?)
}

/// The `eps -> 0` limit of [`g_rescaled`]: `y e^{-y}`.
pub fn g_limit(y: Cpx) -> Cpx {
    y * (-y).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cpx {
        Cpx::new(re, im)
    }

    fn eps(e: f64) -> Eps {
        Eps::new(e).unwrap()
    }

    #[test]
    fn power_examples() {
        assert_eq!(principal_power(c(1.0, 0.0), 3.7).unwrap(), c(1.0, 0.0));
        assert_abs_diff_eq!((principal_power(c(4.0, 0.0), 0.5).unwrap() - 2.0).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((principal_power(c(0.0, 1.0), 2.0).unwrap() + 1.0).norm(), 0.0, epsilon = 1e-15);
        assert!(matches!(principal_power(c(-2.0, 0.0), 0.5), Err(Error::BranchCut(_))));
        assert!(matches!(principal_power(c(0.0, 0.0), 0.5), Err(Error::BranchCut(_))));
        assert!(matches!(principal_power(c(1e300, 0.0), 5.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn section_examples() {
        assert_abs_diff_eq!(h_section(c(0.5, 0.0), eps(1.0)).unwrap().re, 0.25, epsilon = 1e-15);
        assert_eq!(h_section(c(1.0, 0.0), eps(0.3)).unwrap(), c(0.0, 0.0));
        assert_abs_diff_eq!(h_section(c(0.25, 0.0), eps(0.5)).unwrap().re, 0.375, epsilon = 1e-15);
        assert_eq!(h_section(c(1e-15, 0.0), eps(0.3)).unwrap(), c(0.0, 0.0));
        assert!(h_section(c(-1.0, 0.0), eps(0.3)).is_err());
        assert_abs_diff_eq!(f_rs(c(0.5, 0.0), eps(1.0)).unwrap().re, 0.25, epsilon = 1e-15);
        assert!(f_rs(c(2.0, 0.0), eps(0.5)).is_err());
        assert_eq!(f_rs(c(1.0, 0.0), eps(0.5)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn f_has_critical_point_at_center() {
        for e in [0.2, 0.5, 1.0] {
            let e = eps(e);
            let yc = e.y_center();
            let step = 1e-5;
            let d = (f_rs(c(yc + step, 0.0), e).unwrap() - f_rs(c(yc - step, 0.0), e).unwrap()) / (2.0 * step);
            assert!(d.norm() < 1e-9, "f'(y_c) = {d}");
        }
    }

    #[test]
    fn f_to_the_eps_is_h_on_unit_interval() {
        for e in [0.1, 0.5, 2.0] {
            let e = eps(e);
            for k in 1..50 {
                let y = c(k as f64 / 50.0, 0.0);
                let lhs = principal_power(f_rs(y, e).unwrap(), e.get()).unwrap();
                let rhs = h_section(y, e).unwrap();
                assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn full_integral_reduces_and_fails_on_parabola() {
        let e = eps(1.0);
        assert_abs_diff_eq!(H_full(c(0.0, 0.0), c(0.5, 0.0), e).unwrap().re, 0.25, epsilon = 1e-15);
        let x = c(0.7, 0.0);
        assert!(matches!(H_full(x, x * x, e), Err(Error::BranchCut(_))));
    }

    #[test]
    fn rescaled_kernel() {
        assert_eq!(g_limit(c(0.0, 0.0)), c(0.0, 0.0));
        assert_abs_diff_eq!(g_limit(c(1.0, 0.0)).re, (-1.0f64).exp(), epsilon = 1e-16);
        let y = c(0.3, 0.2);
        let a = g_rescaled(y, eps(1.0)).unwrap();
        let b = h_section(y, eps(1.0)).unwrap();
        assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rescaled_kernel_converges_linearly() {
        // sup over |y| <= 2 on a polar grid
        let sup = |e: f64| {
            let mut m: f64 = 0.0;
            for i in 0..=20 {
                for j in 0..64 {
                    let r = 2.0 * i as f64 / 20.0;
                    let t = std::f64::consts::TAU * j as f64 / 64.0;
                    let y = Cpx::from_polar(r, t);
                    let d = g_rescaled(y, eps(e)).unwrap() - g_limit(y);
                    m = m.max(d.norm());
                }
            }
            m
        };
        let s = [sup(0.01), sup(0.005), sup(0.0025)];
        let slope = ((s[0] / s[2]).ln()) / (4.0f64).ln();
        assert!((slope - 1.0).abs() < 0.1, "slope {slope}, sups {s:?}");
    }

    proptest! {
        #[test]
        fn power_exponents_add(re in 0.01f64..5.0, im in -5.0f64..5.0, a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let z = c(re, im);
            let lhs = principal_power(z, a).unwrap() * principal_power(z, b).unwrap();
            let rhs = principal_power(z, a + b).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn schwarz_reflection(re in -3.0f64..3.0, im in 0.01f64..3.0, e in 0.05f64..3.0) {
            let e = eps(e);
            let y = c(re, im);
            let tol = |v: Cpx| 1e-12 * (1.0 + v.norm());
            let h = h_section(y, e).unwrap();
            prop_assert!((h_section(y.conj(), e).unwrap() - h.conj()).norm() <= tol(h));
            let f = f_rs(y, e).unwrap();
            prop_assert!((f_rs(y.conj(), e).unwrap() - f.conj()).norm() <= tol(f));
            let g = g_rescaled(y, e).unwrap();
            prop_assert!((g_rescaled(y.conj(), e).unwrap() - g.conj()).norm() <= tol(g));
            let x = c(0.3, -0.2);
            if let Ok(hf) = H_full(x, y, e) {
                prop_assert!((H_full(x.conj(), y.conj(), e).unwrap() - hf.conj()).norm() <= tol(hf));
            }
            prop_assert!((H_full(c(0.0, 0.0), y, e).unwrap() - h).norm() <= tol(h));
        }
    }
}
