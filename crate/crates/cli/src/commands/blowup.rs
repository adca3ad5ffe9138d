use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::blowup::{rescale_curve, rescaled_integral_residual, BlowupChart, Region};
use slowfast_core::export::{CsvTable, Svg};
use slowfast_core::isoclines::{trace_boundary_curve, BoundaryCurve};

use super::{eps, xy, PALETTE};
use crate::config::ExperimentConfig;
use crate::output::{tag, Artifacts, CliResult};

#[derive(Serialize)]
struct Row {
    eps: f64,
    residual: Option<f64>,
    /// `residual / residual` of the previous `eps` in the list.
    ratio_to_previous: Option<f64>,
    rescaled_center: f64,
    /// `min |Y|` over the rescaled `C_{±pi}`, when they exist.
    min_abs_y: Option<f64>,
    error: Option<String>,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "blowup")?;
    let region = Region { n: cfg.grids.blowup_box, ..Region::default() };
    let mut table = CsvTable::new(&["eps", "residual", "ratio_to_previous", "rescaled_center", "min_abs_y"]);
    let mut curves = CsvTable::new(&["eps", "curve", "re_y", "im_y"]);
    let mut rows: Vec<Row> = Vec::new();
    let mut svg_curves = Vec::new();
    for &e in &cfg.eps {
        let ee = eps(e)?;
        let chart = BlowupChart { eps: ee };
        let (residual, error) = match rescaled_integral_residual(e, &region) {
            Ok(r) => (Some(r), None),
            Err(err) => (None, Some(err.to_string())),
        };
        let ratio = match (rows.last().and_then(|r| r.residual), residual) {
            (Some(a), Some(b)) => Some(b / a),
            _ => None,
        };
        let mut min_abs_y = None;
        if e < 1.0 {
            for b in [BoundaryCurve::PlusPi, BoundaryCurve::MinusPi] {
                let c = trace_boundary_curve(b, ee, cfg.tolerances.r_max, cfg.tolerances.chord_tol)?;
                let r = rescale_curve(&c.samples, ee);
                let m = r.iter().map(|y| y.norm()).fold(f64::INFINITY, f64::min);
                min_abs_y = Some(min_abs_y.map_or(m, |v: f64| v.min(m)));
                for y in &r {
                    curves.push(vec![format!("{e:?}"), b.label().into(), format!("{:?}", y.re), format!("{:?}", y.im)]);
                }
                svg_curves.push((e, r));
            }
        }
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| format!("{v:?}"));
        table.push(vec![format!("{e:?}"), opt(residual), opt(ratio), format!("{:?}", chart.center()), opt(min_abs_y)]);
        rows.push(Row { eps: e, residual, ratio_to_previous: ratio, rescaled_center: chart.center(), min_abs_y, error });
    }
    if !svg_curves.is_empty() {
        let window = |p: &(f64, f64)| p.0.abs() < 40.0 && p.1.abs() < 40.0;
        let mut svg = Svg::fit(640.0, 640.0, svg_curves.iter().flat_map(|(_, c)| c.iter().map(|y| xy(*y))).filter(window));
        svg.axes();
        let mut last = f64::NAN;
        let mut color = 0;
        for (e, c) in &svg_curves {
            if *e != last {
                color += 1;
                last = *e;
                if let Some(p) = c.iter().map(|y| xy(*y)).find(window) {
                    svg.text(p, &format!("eps = {e}"));
                }
            }
            svg.polyline(&c.iter().map(|y| xy(*y)).filter(window).collect::<Vec<_>>(), PALETTE[color % PALETTE.len()], 1.2);
        }
        svg.marker((0.0, 0.0), 3.0, "black");
        out.svg(&format!("rescaled_boundary_{}", tag(cfg.eps[0])), "rescaled C+pi and C-pi", &svg)?;
    }
    out.csv("residuals", &table)?;
    out.csv("rescaled_curves", &curves)?;
    out.json("blowup", "blowup_report", &rows)?;
    Ok(out.written)
}
