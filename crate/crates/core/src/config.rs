//! Run configuration. Lengths marked "Rs units" are multiplied by the grid
//! resolution once it is known.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ExtentMode, GridConfig};
use crate::layout::LayoutParams;
use crate::metrics::DEFAULT_THRESHOLDS;
use crate::render::SvgConfig;
use crate::search::SearchParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Weight of the downstream length in a candidate's path length.
    pub omega: f64,
    /// Radius of the potential-accumulation window, in cells.
    pub k: usize,
    /// Exclusion radius around other destinations, in cells.
    pub k_rc3: usize,
    /// Acute flow-in threshold, degrees.
    pub t_a: f64,
    /// Short hang-edge threshold, Rs units.
    pub t_d: f64,
    /// Accumulation scale for direction weights; defaults to the largest
    /// destination volume.
    pub t_f: Option<f64>,
    /// Penalty per violated constraint, Rs units.
    pub pl_pen: f64,
    /// Importance bonus for paths flowing straight into the origin, Rs units.
    pub g_im: f64,
    pub w_max: f64,
    pub w_min: f64,
    pub extent: ExtentMode,
    /// Fixed grid resolution in map units instead of the automatic one.
    pub rs: Option<f64>,
    /// Acute flow-in penalty.
    pub st1: bool,
    /// Short hang-edge penalty.
    pub st2: bool,
    /// Restrict the search to the three directions facing the origin.
    pub st3: bool,
    /// Order equal-length frontier cells by direction weight.
    pub st4: bool,
    /// Committed cells are impassable and committed diagonals cannot be crossed.
    pub st5: bool,
    /// Exclusion windows around other destinations.
    pub st6: bool,
    /// Importance bonus for paths into the origin.
    pub st7: bool,
    pub canvas_width_mm: f64,
    pub thick_first: bool,
    pub stroke: String,
    /// Hang-edge length thresholds for the metrics counts, map units.
    pub thresholds: Vec<f64>,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let svg = SvgConfig::default();
        Self {
            omega: 0.65,
            k: 4,
            k_rc3: 0,
            t_a: 120.0,
            t_d: std::f64::consts::SQRT_2,
            t_f: None,
            pl_pen: 20.0,
            g_im: 10_000.0,
            w_max: 2.0,
            w_min: 0.1,
            extent: ExtentMode::Points,
            rs: None,
            st1: true,
            st2: true,
            st3: true,
            st4: true,
            st5: true,
            st6: true,
            st7: true,
            canvas_width_mm: svg.canvas_width_mm,
            thick_first: svg.thick_first,
            stroke: svg.stroke,
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            threads: 1,
        }
    }
}

/// Parse a command-line value: `on`/`off` are booleans, `none` clears an
/// optional field, anything TOML can read as a scalar or array is taken as
/// such, and everything else is a string.
fn parse_value(raw: &str) -> Option<toml::Value> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" => return Some(toml::Value::Boolean(true)),
        "off" | "false" | "no" => return Some(toml::Value::Boolean(false)),
        "none" => return None,
        _ => {}
    }
    let wrapped = format!("v = {}", raw.trim());
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v"),
        Err(_) => Some(toml::Value::String(raw.trim().to_string())),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Merge a TOML document over the current values.
    pub fn merge_toml(&mut self, text: &str) -> Result<()> {
        let overlay: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut table = self.to_table()?;
        for (k, v) in overlay {
            table.insert(k, v);
        }
        let updated: Self =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Set one field from a `key=value` pair.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let key = key.trim();
        let mut table = self.to_table()?;
        match parse_value(raw) {
            Some(v) => {
                table.insert(key.to_string(), v);
            }
            None => {
                table.remove(key);
            }
        }
        let updated: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("{key}={raw}: {e}")))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }

    /// Apply `key=value`; `raw` without `=` is read as a TOML file path.
    pub fn apply_arg(&mut self, raw: &str) -> Result<()> {
        match raw.split_once('=') {
            Some((k, v)) => self.set(k, v),
            None => self.merge_toml(&std::fs::read_to_string(raw)?),
        }
    }

    fn to_table(&self) -> Result<toml::Table> {
        toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return bad(format!("omega must lie in (0, 1], got {}", self.omega));
        }
        if !(self.t_a > 0.0 && self.t_a < 180.0) {
            return bad(format!("t_a must lie in (0, 180), got {}", self.t_a));
        }
        for (name, v) in [("t_d", self.t_d), ("pl_pen", self.pl_pen), ("g_im", self.g_im)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if let Some(t_f) = self.t_f {
            if !(t_f > 0.0 && t_f.is_finite()) {
                return bad(format!("t_f must be positive, got {t_f}"));
            }
        }
        if let Some(rs) = self.rs {
            if !(rs > 0.0 && rs.is_finite()) {
                return bad(format!("rs must be positive, got {rs}"));
            }
        }
        if !(self.w_min > 0.0 && self.w_max >= self.w_min) {
            return bad(format!("need 0 < w_min <= w_max, got {} and {}", self.w_min, self.w_max));
        }
        if !(self.canvas_width_mm > 0.0) {
            return bad(format!("canvas_width_mm must be positive, got {}", self.canvas_width_mm));
        }
        Ok(())
    }

    pub fn grid_config(&self) -> GridConfig {
        GridConfig { extent_mode: self.extent, resolution: self.rs }
    }

    pub fn search_params(&self, rs: f64, max_volume: f64) -> SearchParams {
        SearchParams {
            omega: self.omega,
            k: self.k,
            k_rc3: self.k_rc3,
            t_a: self.t_a,
            t_d: self.t_d * rs,
            t_f: self.t_f.unwrap_or(max_volume),
            pl_pen: self.pl_pen * rs,
            penalize_acute: self.st1,
            penalize_short: self.st2,
            restrict_directions: self.st3,
            order_by_accumulation: self.st4,
            block_committed: self.st5,
            exclude_destinations: self.st6,
        }
    }

    pub fn layout_params(&self, rs: f64, max_volume: f64) -> LayoutParams {
        LayoutParams {
            search: self.search_params(rs, max_volume),
            g_im: if self.st7 { self.g_im * rs } else { 0.0 },
            threads: self.threads.max(1),
        }
    }

    pub fn svg_config(&self) -> SvgConfig {
        SvgConfig {
            canvas_width_mm: self.canvas_width_mm,
            thick_first: self.thick_first,
            stroke: self.stroke.clone(),
            ..SvgConfig::default()
        }
    }

    /// Switch ablation strategy `n` (1..=7).
    pub fn set_strategy(&mut self, n: usize, on: bool) -> Result<()> {
        let slot = match n {
            1 => &mut self.st1,
            2 => &mut self.st2,
            3 => &mut self.st3,
            4 => &mut self.st4,
            5 => &mut self.st5,
            6 => &mut self.st6,
            7 => &mut self.st7,
            _ => return Err(Error::Config(format!("no strategy st{n}"))),
        };
        *slot = on;
        Ok(())
    }
}
