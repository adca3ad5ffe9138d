use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::cyclicity::{melnikov_level_grid, real_section_grid};
use slowfast_core::export::CsvTable;
use slowfast_core::foliation::{displacement_table, find_real_cycles, level_to_y, melnikov, CycleRecord, FoliationParams};

use crate::config::ExperimentConfig;
use crate::output::{Artifacts, CliResult};

#[derive(Serialize)]
struct CellReport {
    eps: f64,
    delta: f64,
    cycles: Vec<CycleRecord>,
    /// Simple zeros of the Melnikov function, as levels and as section points.
    melnikov_levels: Vec<f64>,
    melnikov_points: Vec<f64>,
    /// `|cycle - nearest Melnikov point|` per cycle.
    match_distance: Vec<f64>,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "cycles")?;
    let (p_dir, q_dir) = cfg.direction.polys();
    let mut disp = CsvTable::new(&["eps", "delta", "y", "displacement"]);
    let mut mel = CsvTable::new(&["eps", "level", "y", "value", "abs_integral"]);
    let mut reports = Vec::new();
    for &e in &cfg.eps {
        let direction = FoliationParams::new(e, 0.0, p_dir.clone(), q_dir.clone())?;
        let levels = melnikov_level_grid(direction.eps, cfg.grids.melnikov_levels);
        let mut values = Vec::with_capacity(levels.len());
        for &c in &levels {
            let v = melnikov(c, &direction)?;
            mel.push_f64(&[e, c, level_to_y(c, direction.eps)?, v.value, v.abs_integral]);
            values.push(v);
        }
        let zeros = slowfast_core::foliation::melnikov_zeros(&direction, &levels)?;
        let points = zeros.iter().map(|&c| level_to_y(c, direction.eps)).collect::<Result<Vec<_>, _>>()?;
        for delta in cfg.deltas() {
            let params = direction.with_delta(delta);
            let grid = real_section_grid(&params, cfg.grids.real_section)?;
            for (y, d) in displacement_table(&params, &grid)? {
                disp.push_f64(&[e, delta, y, d]);
            }
            let cycles = find_real_cycles(&params, &grid)?;
            let match_distance = cycles
                .iter()
                .map(|c| points.iter().map(|p| (p - c.y_fixed).abs()).fold(f64::INFINITY, f64::min))
                .collect();
            reports.push(CellReport { eps: e, delta, cycles, melnikov_levels: zeros.clone(), melnikov_points: points.clone(), match_distance });
        }
    }
    out.csv("displacement", &disp)?;
    out.csv("melnikov", &mel)?;
    out.json("cycles", "cycle_report", &reports)?;
    Ok(out.written)
}
