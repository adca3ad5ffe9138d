use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::cyclicity::{outer_level, real_section_grid};
use slowfast_core::export::{CsvTable, Svg};
use slowfast_core::foliation::{find_focus, integrate_orbit, level_to_y, FoliationParams, OrbitOptions, Stop};

use super::PALETTE;
use crate::config::ExperimentConfig;
use crate::output::{tag, Artifacts, CliResult};

/// Section crossings followed per perturbed orbit.
const TURNS: usize = 6;

#[derive(Serialize)]
struct PortraitSummary {
    eps: f64,
    delta: f64,
    focus: (f64, f64),
    orbits: usize,
    /// Orbits that left the period annulus before finishing.
    escaped: Vec<f64>,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "portrait")?;
    let (p_dir, q_dir) = cfg.direction.polys();
    let mut table = CsvTable::new(&["eps", "delta", "orbit", "t", "x", "y"]);
    let mut summaries = Vec::new();
    for &e in &cfg.eps {
        // integrable portrait first, then each perturbation
        let mut deltas = vec![0.0];
        deltas.extend(cfg.deltas().into_iter().filter(|d| *d != 0.0));
        for delta in deltas {
            let params = FoliationParams::new(e, delta, p_dir.clone(), q_dir.clone())?;
            let (xc, yc) = find_focus(&params)?;
            let starts = real_section_grid(&params, cfg.grids.portrait_orbits + 1)?;
            let mut svg = Svg::new(640.0, 520.0, (-1.15, 1.15), (-0.05, 1.1));
            let parabola: Vec<(f64, f64)> = (0..=200).map(|k| -1.1 + 2.2 * k as f64 / 200.0).map(|x| (x, x * x)).collect();
            svg.polyline(&parabola, "black", 1.2);
            svg.polyline(&[(-1.1, 1.0), (1.1, 1.0)], "black", 1.2);
            let mut escaped = Vec::new();
            let mut drawn = 0;
            for (i, &y0) in starts.iter().skip(1).enumerate() {
                let opts = OrbitOptions {
                    stop: Stop::Crossings { section_x: xc, count: if delta == 0.0 { 2 } else { 2 * TURNS } },
                    direction: 1.0,
                    t_max: 1e4,
                    confine_to_annulus: true,
                };
                let orbit = match integrate_orbit((xc, y0), &params, opts) {
                    Ok(o) => o,
                    Err(slowfast_core::Error::EscapeFromAnnulus { .. }) => {
                        escaped.push(y0);
                        continue;
                    }
                    Err(err) => return Err(err.into()),
                };
                for p in &orbit.points {
                    table.push_f64(&[e, delta, i as f64, p.t, p.x, p.y]);
                }
                let pts: Vec<(f64, f64)> = orbit.points.iter().map(|p| (p.x, p.y)).collect();
                svg.polyline(&pts, PALETTE[i % PALETTE.len()], 0.9);
                drawn += 1;
            }
            let edge = level_to_y(outer_level(params.eps), params.eps)?;
            svg.marker((xc, yc), 3.0, "black");
            svg.marker((xc, edge), 2.0, "#888");
            svg.text((-1.1, 1.07), &format!("eps = {e}, delta = {delta}"));
            out.svg(&format!("portrait_eps{}_delta{}", tag(e), tag(delta)), "phase portrait", &svg)?;
            summaries.push(PortraitSummary { eps: e, delta, focus: (xc, yc), orbits: drawn, escaped });
        }
    }
    out.csv("orbits", &table)?;
    out.json("portrait", "portrait_summary", &summaries)?;
    Ok(out.written)
}
