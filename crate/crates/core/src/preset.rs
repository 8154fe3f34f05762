//! Named sweep configurations and the runner that turns a config into tables.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{parse_angle_list, parse_observable, FlatConfig};
use crate::error::{Error, Result};
use crate::sweep::{
    boundary_curves, extrema_report, extrema_vs_theta_i, observable_sweep, state_grid_sweep, sx_branches,
    sx_parametric, BoundaryCurve, GridSpec, ObservableScenario, Range, SweepTable, GAP_NONE,
};

const PRESETS: [(&str, &str); 14] = [
    ("fig2", include_str!("../../../presets/fig2.cfg")),
    ("fig3", include_str!("../../../presets/fig3.cfg")),
    ("fig4", include_str!("../../../presets/fig4.cfg")),
    ("fig5", include_str!("../../../presets/fig5.cfg")),
    ("fig6", include_str!("../../../presets/fig6.cfg")),
    ("fig7", include_str!("../../../presets/fig7.cfg")),
    ("fig8", include_str!("../../../presets/fig8.cfg")),
    ("fig9", include_str!("../../../presets/fig9.cfg")),
    ("fig10a", include_str!("../../../presets/fig10a.cfg")),
    ("fig10b", include_str!("../../../presets/fig10b.cfg")),
    ("fig11", include_str!("../../../presets/fig11.cfg")),
    ("fig12", include_str!("../../../presets/fig12.cfg")),
    ("fig13", include_str!("../../../presets/fig13.cfg")),
    ("fig14", include_str!("../../../presets/fig14.cfg")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// The preset as a config, with `id` set to its name.
pub fn preset(name: &str) -> Result<FlatConfig> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::NotFound(format!("preset {name} (available: {})", preset_names().join(", "))))?;
    let mut cfg = FlatConfig::parse(text)?;
    cfg.set("id", name);
    Ok(cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub tables: Vec<SweepTable>,
    pub curves: Vec<BoundaryCurve>,
    pub summary: BTreeMap<String, String>,
}

impl SweepRun {
    /// Write every table, plus `<stem>__curves.json` when curves exist.
    pub fn write(&self, dir: &Path, json: bool) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for t in &self.tables {
            out.push(t.write(dir, json)?);
        }
        if let (Some(t), false) = (self.tables.first(), self.curves.is_empty()) {
            let path = dir.join(format!("{}__curves.json", t.file_stem()));
            let body = serde_json::to_string(&self.curves).map_err(|e| Error::Io(e.to_string()))?;
            std::fs::write(&path, body)?;
            out.push(path);
        }
        Ok(out)
    }
}

fn full_range(steps: usize) -> Range {
    Range {
        lo: 0.0,
        hi: FRAC_PI_2,
        steps,
    }
}

fn angle_list(cfg: &FlatConfig, key: &str) -> Result<Vec<f64>> {
    parse_angle_list(cfg.require(key)?)
}

pub fn grid_spec(cfg: &FlatConfig) -> Result<GridSpec> {
    let label = cfg.require("observable")?;
    let mut g = GridSpec::new(parse_observable(label)?, label, 2)?;
    g.theta_i = cfg.range_or("theta_i", full_range(400))?;
    g.theta_f = cfg.range_or("theta_f", full_range(400))?;
    g.fixed_phases = (cfg.angle_or("xi_i", 0.0)?, cfg.angle_or("xi_f", 0.0)?);
    for key in ["alpha_i", "chi1_i", "chi2_i", "alpha_f", "chi1_f", "chi2_f"] {
        if cfg.get(key).is_some() {
            g.extra_params.insert(key.to_string(), cfg.angle_or(key, 0.0)?);
        }
    }
    g.validate()?;
    Ok(g)
}

fn scenario(cfg: &FlatConfig) -> Result<ObservableScenario> {
    let s = ObservableScenario {
        theta_i: 0.0,
        theta_f: cfg.angle_or("theta_f", 0.0)?,
        xi_i: cfg.angle_or("xi_i", 0.0)?,
        xi_f: cfg.angle_or("xi_f", 0.0)?,
        phi: cfg.angle_or("phi", 0.0)?,
    };
    s.validate()?;
    Ok(s)
}

fn grid_summary(t: &SweepTable, summary: &mut BTreeMap<String, String>) {
    let wv = t.field("wv_abs").unwrap_or(&[]);
    let gap = t.field("gap").unwrap_or(&[]);
    let mut best: Option<usize> = None;
    for k in 0..wv.len() {
        if gap[k] == GAP_NONE && best.is_none_or(|b| wv[k] > wv[b]) {
            best = Some(k);
        }
    }
    let valid = gap.iter().filter(|&&g| g == GAP_NONE).count();
    let amplifying: usize = t.meta.get("amplifying_count").and_then(|v| v.parse().ok()).unwrap_or(0);
    summary.insert("points".into(), t.len().to_string());
    summary.insert("gap_count".into(), (t.len() - valid).to_string());
    summary.insert(
        "amplifying_fraction".into(),
        (if valid == 0 {
            0.0
        } else {
            amplifying as f64 / valid as f64
        })
        .to_string(),
    );
    if let Some(b) = best {
        let c = t.coords(b);
        summary.insert("max_wv".into(), wv[b].to_string());
        summary.insert("max_wv_site".into(), format!("{},{}", c[0], c[1]));
    }
}

/// Run the sweep described by `cfg` (see the `presets/` directory for the keys).
pub fn run_config(cfg: &FlatConfig) -> Result<SweepRun> {
    let id = cfg.get("id").unwrap_or("sweep");
    let kind = cfg.require("kind")?;
    let mut summary = BTreeMap::new();
    summary.insert("kind".to_string(), kind.to_string());
    let mut curves = Vec::new();
    let tables = match kind {
        "grid" => {
            let t = state_grid_sweep(id, &grid_spec(cfg)?)?;
            grid_summary(&t, &mut summary);
            let levels = parse_angle_list(cfg.get("levels").unwrap_or("1,2"))?;
            for level in levels {
                let c = boundary_curves(&t, level)?;
                summary.insert(format!("curves.{level}"), c.len().to_string());
                curves.extend(c);
            }
            vec![t]
        }
        "observable" => {
            let theta = cfg.range_or("theta", full_range(2000))?;
            let t = observable_sweep(id, theta, scenario(cfg)?, &angle_list(cfg, "theta_i_list")?)?;
            let rows = t.axes[0].values.len();
            for row in 0..rows {
                let e = extrema_report(&t, row)?;
                summary.insert(format!("max_wv.{row}"), e.max_wv.to_string());
                summary.insert(format!("argmax_wv.{row}"), e.argmax_wv.to_string());
            }
            vec![t]
        }
        "extrema" => {
            let theta = cfg.range_or("theta", full_range(2000))?;
            let theta_i = cfg.range_or("theta_i", Range::new(0.05, 1.55, 61)?)?;
            vec![extrema_vs_theta_i(id, theta, scenario(cfg)?, theta_i)?]
        }
        "sigma-x-parametric" => vec![sx_parametric(
            id,
            cfg.angle_or("theta_i", 5.0 * std::f64::consts::PI / 12.0)?,
            cfg.angle_or("xi_f", 0.0)?,
            &angle_list(cfg, "xi_i_list")?,
            cfg.range_or("theta_f", full_range(400))?,
        )?],
        "sigma-x-branches" => vec![sx_branches(
            id,
            cfg.angle_or("theta_i", 5.0 * std::f64::consts::PI / 12.0)?,
            cfg.angle_or("xi_f", 0.0)?,
            &angle_list(cfg, "xi_i_list")?,
            cfg.usize_or("steps", 400)?,
        )?],
        other => return Err(Error::InvalidConfig(format!("unknown sweep kind {other:?}"))),
    };
    Ok(SweepRun {
        tables,
        curves,
        summary,
    })
}
