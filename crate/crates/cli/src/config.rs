//! Experiment configuration: a TOML file validated before any computation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use slowfast_core::cyclicity::{ContourOptions, ExperimentOptions};
use slowfast_core::foliation::Poly;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub eps: Vec<f64>,
    #[serde(default)]
    pub delta: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub output: Output,
}

/// Perturbation `P dx + Q dy` as `[i, j, c]` monomials `c x^i y^j`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Direction {
    #[serde(default)]
    pub p: Vec<(usize, usize, f64)>,
    #[serde(default)]
    pub q: Vec<(usize, usize, f64)>,
}

impl Direction {
    pub fn polys(&self) -> (Poly, Poly) {
        (Poly::from_terms(&self.p), Poly::from_terms(&self.q))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TolerancesConfig {
    /// Chord tolerance for traced isoclines.
    pub chord_tol: f64,
    /// Truncation radius for isoclines and the bound contour.
    pub r_max: f64,
    /// Radius of the contour arc around `y = 1`.
    pub r_one: f64,
    /// Inset of the contour segment from the focus.
    pub inset: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        let c = ContourOptions::default();
        TolerancesConfig { chord_tol: 1e-3, r_max: c.r_max, r_one: c.r_one, inset: c.inset }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Grids {
    /// Points of real (and random complex) Dulac tables.
    pub dulac_points: usize,
    /// Number of `theta` values in isocline fans.
    pub theta_fan: usize,
    /// Section points for the real displacement scan.
    pub real_section: usize,
    pub melnikov_levels: usize,
    /// Orbits per phase portrait.
    pub portrait_orbits: usize,
    /// Grid resolution of the blow-up residual box.
    pub blowup_box: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { dulac_points: 100, theta_fan: 8, real_section: 60, melnikov_levels: 40, portrait_orbits: 8, blowup_box: 201 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Output {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for Output {
    fn default() -> Self {
        Output { dir: PathBuf::from("out"), formats: vec![Format::Csv, Format::Json, Format::Svg] }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if cfg.output.dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output.dir = parent.join(&cfg.output.dir);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if self.eps.is_empty() {
            return bad("eps: at least one value required".into());
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return bad(format!("eps: {e} is not positive"));
        }
        if let Some(d) = self.delta.iter().find(|d| !d.is_finite() || d.abs() >= 1.0) {
            return bad(format!("delta: {d} must be finite with |delta| < 1"));
        }
        let t = &self.tolerances;
        for (name, v) in [("chord_tol", t.chord_tol), ("r_max", t.r_max), ("r_one", t.r_one), ("inset", t.inset)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerances.{name}: {v} is not positive"));
            }
        }
        if t.r_max <= 1.0 {
            return bad(format!("tolerances.r_max: {} must exceed 1", t.r_max));
        }
        let g = &self.grids;
        for (name, v, min) in [
            ("dulac_points", g.dulac_points, 2),
            ("theta_fan", g.theta_fan, 2),
            ("real_section", g.real_section, 3),
            ("melnikov_levels", g.melnikov_levels, 3),
            ("portrait_orbits", g.portrait_orbits, 1),
            ("blowup_box", g.blowup_box, 2),
        ] {
            if v < min {
                return bad(format!("grids.{name}: {v} is below the minimum {min}"));
            }
        }
        for (name, terms) in [("p", &self.direction.p), ("q", &self.direction.q)] {
            if let Some(t) = terms.iter().find(|t| !t.2.is_finite() || t.0 + t.1 > 8) {
                return bad(format!("direction.{name}: term {t:?} must be finite with degree <= 8"));
            }
        }
        if self.output.formats.is_empty() {
            return bad("output.formats: at least one format required".into());
        }
        Ok(())
    }

    /// `delta` values, with the unperturbed baseline when none are given.
    pub fn deltas(&self) -> Vec<f64> {
        if self.delta.is_empty() {
            vec![0.0]
        } else {
            self.delta.clone()
        }
    }

    pub fn contour_options(&self) -> ContourOptions {
        let t = &self.tolerances;
        ContourOptions { r_max: t.r_max, r_one: t.r_one, inset: t.inset, ..ContourOptions::default() }
    }

    pub fn experiment_options(&self) -> ExperimentOptions {
        ExperimentOptions {
            contour: self.contour_options(),
            real_grid: self.grids.real_section,
            melnikov_levels: self.grids.melnikov_levels,
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.output.formats.contains(&f)
    }

    /// SHA-256 of the canonical JSON form of the computational settings
    /// (the output location is excluded), truncated to 16 hex digits.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output.dir = PathBuf::new();
        let json = serde_json::to_string(&canon).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
