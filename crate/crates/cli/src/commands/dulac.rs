use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use slowfast_core::analytic::h_section;
use slowfast_core::dulac::{dulac_integrable, dulac_real};
use slowfast_core::export::CsvTable;
use slowfast_core::isoclines::{classify_point, Region};
use slowfast_core::Cpx;

use super::eps;
use crate::config::ExperimentConfig;
use crate::output::{Artifacts, CliResult};

#[derive(Serialize)]
struct Report {
    eps: f64,
    real_points: usize,
    /// `max |D(D(y)) - y|` on the real grid.
    real_involution: f64,
    /// `|D(y_c) - y_c|`.
    fixed_point: f64,
    complex_points: usize,
    complex_involution: f64,
    /// `max | |h(D(y))| / |h(y)| - 1 |`.
    complex_level_drift: f64,
}

pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut out = Artifacts::new(cfg, "dulac")?;
    let n = cfg.grids.dulac_points;
    let mut real = CsvTable::new(&["eps", "y", "dulac", "involution_residual"]);
    let mut complex = CsvTable::new(&["eps", "re_y", "im_y", "region", "re_dulac", "im_dulac", "involution_residual"]);
    let mut reports = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for &e in &cfg.eps {
        let ee = eps(e)?;
        let mut inv = 0.0f64;
        for k in 0..n {
            let y = (k as f64 + 0.5) / n as f64;
            let w = dulac_real(y, ee)?;
            let r = (dulac_real(w, ee)? - y).abs();
            inv = inv.max(r);
            real.push_f64(&[e, y, w, r]);
        }
        let yc = ee.y_center();
        let fixed = (dulac_real(yc, ee)? - yc).abs();

        let (mut cinv, mut drift, mut count) = (0.0f64, 0.0f64, 0usize);
        let mut attempts = 0;
        while count < n && attempts < 50 * n {
            attempts += 1;
            let y = Cpx::new(rng.gen_range(-0.5..1.5), rng.gen_range(-1.0..1.0));
            let region = match classify_point(y, ee) {
                Ok(r @ Region::D1) => r,
                _ => continue,
            };
            let w = dulac_integrable(y, ee)?;
            let r = (dulac_integrable(w, ee)? - y).norm();
            drift = drift.max((h_section(w, ee)?.norm() / h_section(y, ee)?.norm() - 1.0).abs());
            cinv = cinv.max(r);
            count += 1;
            complex.push(vec![
                format!("{e:?}"),
                format!("{:?}", y.re),
                format!("{:?}", y.im),
                format!("{region:?}"),
                format!("{:?}", w.re),
                format!("{:?}", w.im),
                format!("{r:?}"),
            ]);
        }
        reports.push(Report {
            eps: e,
            real_points: n,
            real_involution: inv,
            fixed_point: fixed,
            complex_points: count,
            complex_involution: cinv,
            complex_level_drift: drift,
        });
    }
    out.csv("dulac_real", &real)?;
    out.csv("dulac_complex", &complex)?;
    out.json("dulac", "dulac_report", &reports)?;
    Ok(out.written)
}
