//! Run configuration: TOML file, named presets and `key=value` overrides.

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::charges::{CensusOptions, Region};
use crate::spinops::Coupling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format {other:?}, expected csv or json")),
        }
    }
}

/// Coupling as written in config files, angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub j: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_deg: f64,
}

impl CouplingConfig {
    pub fn to_coupling(&self) -> Coupling {
        Coupling::with_degrees(self.j, self.d, self.theta_deg)
    }
}

impl Default for CouplingConfig {
    fn default() -> Self {
        CouplingConfig {
            j: 1.0,
            d: 0.3,
            theta_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            from: [0.0, 0.0, -3.0],
            to: [0.0, 0.0, 3.0],
            points: 601,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// In-plane axes `(u, v)` for a plane with this normal.
    pub fn in_plane(self) -> (usize, usize) {
        match self {
            Axis::X => (1, 2),
            Axis::Y => (0, 2),
            Axis::Z => (0, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub normal: Axis,
    pub offset: f64,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub resolution: [usize; 2],
    /// State labels ψ₁…ψ₄ to export.
    pub states: Vec<usize>,
    /// Vectors longer than this are rescaled to this length and flagged.
    pub clip: Option<f64>,
    /// Also export `∇×B` per state.
    pub current: bool,
    pub current_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            normal: Axis::Y,
            offset: 0.0,
            u_range: [-3.0, 3.0],
            v_range: [-3.0, 3.0],
            resolution: [41, 41],
            states: vec![1, 2, 3, 4],
            clip: None,
            current: false,
            current_step: crate::berry::DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CensusConfig {
    pub region_min: [f64; 3],
    pub region_max: [f64; 3],
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            region_min: [-4.0; 3],
            region_max: [4.0; 3],
        }
    }
}

impl CensusConfig {
    pub fn region(&self) -> Region {
        Region::new(self.region_min, self.region_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub angles_deg: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            angles_deg: vec![0.0, 45.0, 60.0, 70.0, 80.0, 90.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub gap_tolerance: f64,
    pub n_seeds: usize,
    pub seed: u64,
    pub quadrature_order: usize,
    pub quadrature_tolerance: f64,
    pub lattice_mesh: usize,
    pub max_radius: f64,
    pub agreement_tolerance: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        let c = CensusOptions::default();
        NumericsConfig {
            gap_tolerance: c.flux.gap_tolerance,
            n_seeds: c.locator.n_seeds,
            seed: c.locator.seed,
            quadrature_order: c.flux.initial_order,
            quadrature_tolerance: c.flux.tolerance,
            lattice_mesh: c.lattice.initial_mesh,
            max_radius: c.max_radius,
            agreement_tolerance: c.agreement_tolerance,
        }
    }
}

impl NumericsConfig {
    pub fn census_options(&self) -> CensusOptions {
        let mut o = CensusOptions::default();
        o.locator.n_seeds = self.n_seeds;
        o.locator.seed = self.seed;
        o.flux.initial_order = self.quadrature_order;
        o.flux.tolerance = self.quadrature_tolerance;
        o.flux.gap_tolerance = self.gap_tolerance;
        o.lattice.initial_mesh = self.lattice_mesh;
        o.lattice.gap_tolerance = self.gap_tolerance;
        o.max_radius = self.max_radius;
        o.agreement_tolerance = self.agreement_tolerance;
        o
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub coupling: CouplingConfig,
    pub spectrum: SpectrumConfig,
    pub grid: GridConfig,
    pub census: CensusConfig,
    pub sweep: SweepConfig,
    pub numerics: NumericsConfig,
    pub output: OutputConfig,
}

pub const PRESET_NAMES: [&str; 4] = ["fig1-theta0", "fig1-theta60", "fig1-theta90", "fig2-sweep"];

const FIG1_BASE: &str = r#"
[coupling]
j = 1.0
d = 0.3

[grid]
normal = "y"
offset = 0.0
u_range = [-3.0, 3.0]
v_range = [-3.0, 3.0]
resolution = [41, 41]
states = [1, 2, 3]

[census]
region_min = [-4.0, -4.0, -4.0]
region_max = [4.0, 4.0, 4.0]
"#;

/// Source text of a bundled preset.
pub fn preset_source(name: &str) -> Option<String> {
    let text = match name {
        "fig1-theta0" => format!("{FIG1_BASE}\n[sweep]\nangles_deg = [0.0]\n")
            .replace("d = 0.3", "d = 0.3\ntheta_deg = 0.0"),
        "fig1-theta60" => format!("{FIG1_BASE}\n[sweep]\nangles_deg = [60.0]\n")
            .replace("d = 0.3", "d = 0.3\ntheta_deg = 60.0"),
        "fig1-theta90" => format!("{FIG1_BASE}\n[sweep]\nangles_deg = [90.0]\n")
            .replace("d = 0.3", "d = 0.3\ntheta_deg = 90.0"),
        // the 80° crossing pair sits near |b_z| = 4.25, so the region is wider
        "fig2-sweep" => r#"
[coupling]
j = 1.0
d = 0.3
theta_deg = 0.0

[grid]
normal = "y"
u_range = [-3.0, 3.0]
v_range = [-3.0, 3.0]
resolution = [41, 41]
states = [4]

[census]
region_min = [-6.0, -6.0, -6.0]
region_max = [6.0, 6.0, 6.0]

[sweep]
angles_deg = [0.0, 45.0, 60.0, 70.0, 80.0, 90.0]
"#
        .to_string(),
        _ => return None,
    };
    Some(text)
}

fn parse_table(source: &str, origin: &str) -> Result<toml::Table, CliError> {
    source
        .parse::<toml::Table>()
        .map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

/// Parses a `key.path=value` override. The value is read as a TOML value,
/// falling back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set {assignment:?}: expected key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!(
            "--set {assignment:?}: empty key segment"
        )));
    }
    let mut cursor = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!("--set {assignment:?}: {part} is not a section"))
        })?;
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Builds a configuration from optional preset and file sources plus
    /// overrides, applied in that order.
    pub fn load(
        preset: Option<&str>,
        file: Option<(&str, &str)>,
        overrides: &[String],
    ) -> Result<RunConfig, CliError> {
        let mut table = toml::Table::try_from(RunConfig::default()).expect("defaults serialize");
        if let Some(name) = preset {
            let src = preset_source(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    PRESET_NAMES.join(", ")
                ))
            })?;
            merge(&mut table, parse_table(&src, name)?);
        }
        if let Some((path, text)) = file {
            merge(&mut table, parse_table(text, path)?);
        }
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let config: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml_str(text: &str) -> Result<RunConfig, CliError> {
        RunConfig::load(None, Some(("<config>", text)), &[])
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let c = &self.coupling;
        if !(c.j.is_finite() && c.d.is_finite() && c.theta_deg.is_finite()) {
            return bad("coupling values must be finite".into());
        }
        let n = &self.numerics;
        for (name, v) in [
            ("numerics.gap_tolerance", n.gap_tolerance),
            ("numerics.quadrature_tolerance", n.quadrature_tolerance),
            ("numerics.max_radius", n.max_radius),
            ("numerics.agreement_tolerance", n.agreement_tolerance),
            ("grid.current_step", self.grid.current_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if n.n_seeds == 0 || n.quadrature_order == 0 || n.lattice_mesh < 2 {
            return bad(
                "numerics: n_seeds and quadrature_order must be ≥ 1, lattice_mesh ≥ 2".into(),
            );
        }
        let g = &self.grid;
        if g.resolution.iter().any(|&r| r < 2) {
            return bad(format!(
                "grid.resolution must be at least 2 per axis, got {:?}",
                g.resolution
            ));
        }
        if g.states.is_empty() || g.states.iter().any(|s| !(1..=4).contains(s)) {
            return bad(format!(
                "grid.states must list labels 1..=4, got {:?}",
                g.states
            ));
        }
        if let Some(clip) = g.clip {
            if clip.is_nan() || clip <= 0.0 {
                return bad(format!("grid.clip must be positive, got {clip}"));
            }
        }
        if self.spectrum.points < 2 {
            return bad("spectrum.points must be at least 2".into());
        }
        if !self.census.region().is_valid() {
            return bad("census region must have finite bounds with min ≤ max".into());
        }
        if self.sweep.angles_deg.is_empty() {
            return bad("sweep.angles_deg must not be empty".into());
        }
        if let Some(a) = self
            .sweep
            .angles_deg
            .iter()
            .find(|a| !(0.0..=180.0).contains(*a))
        {
            return bad(format!("sweep angle {a} outside [0, 180] degrees"));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
