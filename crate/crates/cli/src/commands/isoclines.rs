use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::export::{CsvTable, Svg};
use slowfast_core::isoclines::{trace_boundary_curve, trace_isocline, trace_singular_curve, BoundaryCurve, IsoclineCurve, Side};
use slowfast_core::Error;

use super::{eps, xy, PALETTE};
use crate::config::ExperimentConfig;
use crate::output::{tag, Artifacts, CliResult};

#[derive(Serialize)]
struct CurveSummary {
    label: String,
    theta: f64,
    side: Side,
    samples: usize,
    max_residual: f64,
}

#[derive(Serialize)]
struct EpsSummary {
    eps: f64,
    curves: Vec<CurveSummary>,
    /// Components that are empty for this `eps`.
    empty: Vec<String>,
    singular_loops: usize,
}

/// `None` for a component with an empty angular range.
fn optional(r: slowfast_core::Result<IsoclineCurve>) -> slowfast_core::Result<Option<IsoclineCurve>> {
    match r {
        Ok(c) => Ok(Some(c)),
        Err(Error::InvalidEps { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn side_label(s: Side) -> &'static str {
    match s {
        Side::D0 => "D0",
        Side::D1 => "D1",
    }
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "isoclines")?;
    let tol = &cfg.tolerances;
    let mut table = CsvTable::new(&["eps", "curve", "theta", "side", "phi", "rho", "re", "im"]);
    let mut singular = CsvTable::new(&["eps", "loop", "re", "im"]);
    let mut summaries = Vec::new();
    for &e in &cfg.eps {
        let ee = eps(e)?;
        let mut curves: Vec<(String, IsoclineCurve)> = Vec::new();
        let mut empty = Vec::new();
        for b in BoundaryCurve::ALL {
            match optional(trace_boundary_curve(b, ee, tol.r_max, tol.chord_tol))? {
                Some(c) => curves.push((b.label().to_string(), c)),
                None => empty.push(b.label().to_string()),
            }
        }
        let n = cfg.grids.theta_fan;
        for k in 1..n {
            let theta = -PI + 2.0 * PI * k as f64 / n as f64;
            if theta.abs() < 1e-12 {
                continue;
            }
            for side in [Side::D0, Side::D1] {
                let label = format!("C_theta[{k}/{n}]");
                match optional(trace_isocline(theta, side, ee, tol.r_max, tol.chord_tol))? {
                    Some(c) => curves.push((label, c)),
                    None => empty.push(format!("{label} {}", side_label(side))),
                }
            }
        }
        for (label, c) in &curves {
            for (p, y) in c.polar.iter().zip(&c.samples) {
                table.push(vec![
                    format!("{e:?}"),
                    label.clone(),
                    format!("{:?}", c.theta),
                    side_label(c.side).into(),
                    format!("{:?}", p.phi),
                    format!("{:?}", p.rho),
                    format!("{:?}", y.re),
                    format!("{:?}", y.im),
                ]);
            }
        }
        let loops = if e <= 1.0 { trace_singular_curve(ee)?.loops } else { Vec::new() };
        for (i, l) in loops.iter().enumerate() {
            for y in l {
                singular.push(vec![format!("{e:?}"), i.to_string(), format!("{:?}", y.re), format!("{:?}", y.im)]);
            }
        }

        let visible = |p: &(f64, f64)| p.0.abs() < 3.0 && p.1.abs() < 3.0;
        let mut svg = Svg::fit(640.0, 640.0, curves.iter().flat_map(|(_, c)| c.samples.iter().map(|y| xy(*y))).filter(visible));
        svg.axes();
        for (label, c) in &curves {
            let pts: Vec<(f64, f64)> = c.samples.iter().map(|y| xy(*y)).filter(visible).collect();
            let (color, w) = if label.starts_with("C_theta") { ("#bbbbbb", 0.8) } else { (PALETTE[0], 1.6) };
            svg.polyline(&pts, color, w);
        }
        for l in &loops {
            svg.polyline(&l.iter().map(|y| xy(*y)).collect::<Vec<_>>(), PALETTE[1], 1.2);
        }
        svg.marker((ee.y_center(), 0.0), 3.0, "black");
        svg.marker((1.0, 0.0), 3.0, "black");
        svg.text((ee.y_center(), 0.0), &format!(" eps = {e}"));
        out.svg(&format!("isoclines_eps{}", tag(e)), "isocline fans, boundary of D1 and singular curve", &svg)?;

        summaries.push(EpsSummary {
            eps: e,
            curves: curves
                .iter()
                .map(|(l, c)| CurveSummary { label: l.clone(), theta: c.theta, side: c.side, samples: c.samples.len(), max_residual: c.max_residual() })
                .collect(),
            empty,
            singular_loops: loops.len(),
        });
    }
    out.csv("isoclines", &table)?;
    out.csv("singular", &singular)?;
    out.json("isoclines", "isoclines", &summaries)?;
    Ok(out.written)
}
