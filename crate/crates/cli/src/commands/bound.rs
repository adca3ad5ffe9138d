use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::cyclicity::{cyclicity_experiment, displacement_complex, variation_of_argument, ContourD, ExperimentRow, WindingReport};
use slowfast_core::export::{CsvTable, Svg};
use slowfast_core::foliation::FoliationParams;

use super::{xy, PALETTE};
use crate::config::ExperimentConfig;
use crate::output::{tag, Artifacts, CliError, CliResult};

#[derive(Serialize)]
struct BoundDocument<'a> {
    experiment: &'a [ExperimentRow],
    winding: Vec<CellWinding>,
}

#[derive(Serialize)]
struct CellWinding {
    eps: f64,
    delta: f64,
    report: WindingReport,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "bound")?;
    let (p_dir, q_dir) = cfg.direction.polys();
    let deltas = cfg.deltas();
    let opts = cfg.experiment_options();
    let rows = cyclicity_experiment(&cfg.eps, &p_dir, &q_dir, &deltas, &opts);

    let mut table = CsvTable::new(&["eps", "delta", "bound", "winding", "petrov_bound", "real_cycles", "melnikov_zeros", "violation", "error"]);
    for r in &rows {
        table.push(vec![
            format!("{:?}", r.eps),
            format!("{:?}", r.delta),
            opt(r.bound),
            r.winding.map_or_else(String::new, |w| format!("{:.9}", if w.abs() < 5e-10 { 0.0 } else { w })),
            opt(r.petrov_bound),
            opt(r.real_cycles),
            opt(r.melnikov_zeros),
            r.violation.to_string(),
            r.error.as_deref().map_or_else(String::new, |e| format!("\"{}\"", e.replace('"', "'"))),
        ]);
    }

    let mut contour_table = CsvTable::new(&["eps", "delta", "arc", "kind", "re", "im"]);
    let mut windings = Vec::new();
    for &e in &cfg.eps {
        for &delta in deltas.iter().filter(|d| **d != 0.0) {
            let params = FoliationParams::new(e, delta, p_dir.clone(), q_dir.clone())?;
            let contour = match ContourD::build(&params, &opts.contour) {
                Ok(c) => c,
                // already recorded in the experiment row
                Err(_) => continue,
            };
            let mut svg = Svg::fit(640.0, 640.0, contour.polygon().into_iter().map(xy));
            svg.axes();
            for (i, arc) in contour.arcs.iter().enumerate() {
                for p in &arc.points {
                    contour_table.push(vec![format!("{e:?}"), format!("{delta:?}"), i.to_string(), format!("{:?}", arc.kind), format!("{:?}", p.re), format!("{:?}", p.im)]);
                }
                svg.polyline(&arc.points.iter().map(|p| xy(*p)).collect::<Vec<_>>(), PALETTE[i % PALETTE.len()], 1.4);
            }
            if let Ok(report) = variation_of_argument(|y| displacement_complex(y, &params), &contour) {
                svg.text(xy(contour.arcs[0].points[0]), &format!("bound {} (winding {:.4})", report.bound, report.winding));
                windings.push(CellWinding { eps: e, delta, report });
            }
            out.svg(&format!("contour_eps{}_delta{}", tag(e), tag(delta)), "contour of the bound domain", &svg)?;
        }
    }
    out.csv("experiment", &table)?;
    out.csv("contour", &contour_table)?;
    out.json("bound", "bound_report", &BoundDocument { experiment: &rows, winding: windings })?;
    if let Some(r) = rows.iter().find(|r| r.violation) {
        return Err(CliError::Numeric(slowfast_core::Error::InvalidParameter(format!(
            "bound {:?} below the real cycle count {:?} at eps {}, delta {}",
            r.bound, r.real_cycles, r.eps, r.delta
        ))));
    }
    Ok(out.written)
}
