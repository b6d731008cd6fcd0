//! Forward design maps and inverse design over discrete parameter grids.
//!
//! The physical design space is discrete (band types, printed layer counts)
//! except for hook spacing, so both directions work on an explicit grid:
//! [`sweep`] solves every grid point and [`inverse_design`] picks the point
//! whose equilibrium angle is closest to a target.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, GridPoint, Result};
use crate::model::{solve_equilibrium, BandSpec, FoldSolution, HingeSpec, JointConfig};

pub use crate::polyhedron::{polyhedron_targets, polyhedron_targets_by_name, Polyhedron};

/// Header line of the design map CSV.
pub const MAP_CSV_HEADER: &str = "band,layers,hook_spacing_mm,alpha_deg,band_slack,stop_limited";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    /// Strictly increasing hook spacings (m).
    pub hook_spacings: Vec<f64>,
    pub bands: Vec<BandSpec>,
    pub hinge_variants: Vec<HingeSpec>,
}

impl SweepGrid {
    pub fn new(hook_spacings: Vec<f64>, bands: Vec<BandSpec>, hinge_variants: Vec<HingeSpec>) -> Result<Self> {
        let grid = SweepGrid {
            hook_spacings,
            bands,
            hinge_variants,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hook_spacings.is_empty() {
            return Err(Error::invalid("hook_spacings", "grid has no hook spacings"));
        }
        if self.bands.is_empty() {
            return Err(Error::invalid("bands", "grid has no bands"));
        }
        if self.hinge_variants.is_empty() {
            return Err(Error::invalid("hinge_variants", "grid has no hinges"));
        }
        if self.hook_spacings.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("hook_spacings", "must be strictly increasing"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.hook_spacings.len() * self.bands.len() * self.hinge_variants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point `index` in (band, hinge, spacing) order.
    fn point(&self, index: usize) -> (usize, usize, usize) {
        let ns = self.hook_spacings.len();
        let nh = self.hinge_variants.len();
        (index / (nh * ns), (index / ns) % nh, index % ns)
    }

    fn config(&self, band: usize, hinge: usize, spacing: usize) -> JointConfig {
        JointConfig {
            hinge: self.hinge_variants[hinge].clone(),
            band: self.bands[band].clone(),
            hook_spacing: self.hook_spacings[spacing],
            stop_angle: None,
        }
    }
}

/// Evenly spaced values from `from` to `to` inclusive (within half a step).
pub fn spacing_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
        return Err(Error::invalid(
            "hook_spacings",
            format!("bad range {from}..{to} step {step}"),
        ));
    }
    let n = ((to - from) / step + 0.5).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub band_index: usize,
    pub hinge_index: usize,
    pub spacing_index: usize,
    pub config: JointConfig,
    pub solution: FoldSolution,
}

impl MapEntry {
    pub fn band_label(&self) -> &str {
        &self.config.band.label
    }

    pub fn layers(&self) -> Option<u32> {
        self.config.hinge.layers
    }
}

/// Solved grid, one entry per point in (band, hinge, spacing) order.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMapGrid {
    pub entries: Vec<MapEntry>,
}

impl DesignMapGrid {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, band: usize, hinge: usize, spacing: usize) -> Option<&MapEntry> {
        self.entries
            .iter()
            .find(|e| e.band_index == band && e.hinge_index == hinge && e.spacing_index == spacing)
    }
}

/// Solves every point of the grid. Points are independent and evaluated in
/// parallel; the result order does not depend on scheduling.
pub fn sweep(grid: &SweepGrid) -> Result<DesignMapGrid> {
    grid.validate()?;
    let entries = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (b, h, s) = grid.point(i);
            let config = grid.config(b, h, s);
            let solution = solve_equilibrium(&config).map_err(|e| Error::GridPoint {
                point: GridPoint {
                    band: config.band.label.clone(),
                    layers: config.hinge.layers,
                    hook_spacing: config.hook_spacing,
                },
                source: Box::new(e),
            })?;
            Ok(MapEntry {
                band_index: b,
                hinge_index: h,
                spacing_index: s,
                config,
                solution,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignMapGrid { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignQuery {
    /// Target fold angle (rad) in (0, PI).
    pub target_angle: f64,
    /// Accepted deviation from the target (rad).
    pub tolerance: f64,
    pub candidates: SweepGrid,
}

impl DesignQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_angle > 0.0 && self.target_angle < std::f64::consts::PI) {
            return Err(Error::invalid(
                "target_angle",
                format!("{} rad is outside (0, pi)", self.target_angle),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", format!("{} must be > 0", self.tolerance)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub config: JointConfig,
    pub predicted: FoldSolution,
    /// `|predicted.alpha - target|` (rad).
    pub error: f64,
    pub within_tolerance: bool,
}

/// Picks the grid configuration whose equilibrium is closest to the target.
///
/// Ties go to the thinner hinge (fewer layers), then the shorter hook
/// spacing, then the earlier band in the grid.
pub fn inverse_design(query: &DesignQuery) -> Result<DesignResult> {
    query.validate()?;
    let grid = &query.candidates;
    if grid.hook_spacings.is_empty() || grid.bands.is_empty() || grid.hinge_variants.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let map = sweep(grid)?;
    let target = query.target_angle;
    let best = map
        .entries
        .iter()
        .min_by(|a, b| {
            let ea = (a.solution.alpha - target).abs();
            let eb = (b.solution.alpha - target).abs();
            ea.total_cmp(&eb)
                .then_with(|| a.config.hinge.thickness.total_cmp(&b.config.hinge.thickness))
                .then_with(|| a.config.hook_spacing.total_cmp(&b.config.hook_spacing))
                .then_with(|| a.band_index.cmp(&b.band_index))
                .then(Ordering::Equal)
        })
        .ok_or(Error::EmptyCandidates)?;

    // Re-solve so the reported prediction is never a stale copy.
    let predicted = solve_equilibrium(&best.config)?;
    let error = (predicted.alpha - target).abs();
    Ok(DesignResult {
        config: best.config.clone(),
        predicted,
        error,
        within_tolerance: error <= query.tolerance,
    })
}

/// Renders the map as CSV (see [`MAP_CSV_HEADER`]).
pub fn export_map(map: &DesignMapGrid) -> String {
    let mut out = Vec::new();
    write_map(map, &mut out).expect("writing to a Vec cannot fail");
    String::from_utf8(out).expect("CSV output is UTF-8")
}

pub fn write_map<W: Write>(map: &DesignMapGrid, mut out: W) -> Result<()> {
    writeln!(out, "{MAP_CSV_HEADER}")?;
    for e in &map.entries {
        let layers = e.layers().map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{:.4},{:.4},{},{}",
            csv_field(e.band_label()),
            layers,
            e.config.hook_spacing * 1e3,
            e.solution.alpha.to_degrees(),
            e.solution.band_slack,
            e.solution.stop_limited,
        )?;
    }
    out.flush()?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row of an exported design map.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct MapRow {
    pub band: String,
    pub layers: Option<u32>,
    pub hook_spacing_mm: f64,
    pub alpha_deg: f64,
    pub band_slack: bool,
    pub stop_limited: bool,
}

/// Parses a CSV produced by [`export_map`].
pub fn import_map(csv_text: &str) -> Result<Vec<MapRow>> {
    let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != MAP_CSV_HEADER {
        return Err(Error::Parse(format!(
            "expected header `{MAP_CSV_HEADER}`, got `{header}`"
        )));
    }
    Ok(reader.deserialize().collect::<std::result::Result<Vec<MapRow>, _>>()?)
}
