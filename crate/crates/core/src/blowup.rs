//! Weighted blow-up chart `x = sqrt(eps) X`, `y = eps Y` at the turning point.

use serde::{Deserialize, Serialize};

use crate::analytic::{Cpx, Eps};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupChart {
    pub eps: Eps,
}

impl BlowupChart {
    pub fn new(eps: f64) -> Result<Self> {
        Ok(BlowupChart { eps: Eps::new(eps)? })
    }

    /// Chart point `(X, Y)` to the original plane: `(sqrt(eps) X, eps Y)`.
    pub fn rescale(&self, p: (f64, f64)) -> (f64, f64) {
        let e = self.eps.get();
        (e.sqrt() * p.0, e * p.1)
    }

    /// Inverse of [`BlowupChart::rescale`].
    pub fn unrescale(&self, p: (f64, f64)) -> (f64, f64) {
        let e = self.eps.get();
        (p.0 / e.sqrt(), p.1 / e)
    }

    pub fn unrescale_c(&self, p: (Cpx, Cpx)) -> (Cpx, Cpx) {
        let e = self.eps.get();
        (p.0 / e.sqrt(), p.1 / e)
    }

    /// The center `y_c` in chart coordinates, `1 / (1 + eps)`.
    pub fn center(&self) -> f64 {
        self.eps.y_center() / self.eps.get()
    }
}

/// Compact box `|X| <= x_max`, `|Y| <= y_max` sampled on an `n x n` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_max: f64,
    pub y_max: f64,
    pub n: usize,
}

impl Default for Region {
    fn default() -> Self {
        Region { x_max: 1.0, y_max: 2.0, n: 201 }
    }
}

/// `(1 - eps Y)^{1/eps}`, the rescaled line factor; negative bases are
/// allowed only for integer `1/eps`.
fn line_factor(y: f64, eps: f64) -> Result<f64> {
    let base = 1.0 - eps * y;
    let k = 1.0 / eps;
    if base < 0.0 {
        if (k - k.round()).abs() > 1e-12 {
            return Err(Error::BranchCut(Cpx::new(y, 0.0)));
        }
        return Ok(base.powi(k.round() as i32));
    }
    Ok((k * (-eps * y).ln_1p()).exp())
}

/// `sup |(1 - eps Y)^{1/eps} (Y - X^2) - e^{-Y} (Y - X^2)|` over the region:
/// how far the rescaled first integral is from its `eps -> 0` limit.
pub fn rescaled_integral_residual(eps: f64, region: &Region) -> Result<f64> {
    let e = Eps::new(eps)?.get();
    let n = region.n.max(2);
    let mut sup: f64 = 0.0;
    for j in 0..n {
        let y = -region.y_max + 2.0 * region.y_max * j as f64 / (n - 1) as f64;
        let diff = line_factor(y, e)? - (-y).exp();
        for i in 0..n {
            let x = -region.x_max + 2.0 * region.x_max * i as f64 / (n - 1) as f64;
            sup = sup.max((diff * (y - x * x)).abs());
        }
    }
    Ok(sup)
}

/// Points of a `y`-plane curve in chart coordinates `Y = y / eps`.
pub fn rescale_curve(points: &[Cpx], eps: Eps) -> Vec<Cpx> {
    points.iter().map(|p| p / eps.get()).collect()
}

/// Smallest `|Y - X^2|` along a path of the original plane, in chart
/// coordinates: how far the path stays from the slow parabola after
/// rescaling.
pub fn parabola_gap(points: impl IntoIterator<Item = (Cpx, Cpx)>, eps: Eps) -> f64 {
    points.into_iter().map(|(x, y)| ((y - x * x) / eps.get()).norm()).fold(f64::INFINITY, f64::min)
}
