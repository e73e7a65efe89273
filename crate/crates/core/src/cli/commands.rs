//! The four subcommands as library calls returning report structures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Axis, CouplingConfig, RunConfig};
use super::CliError;
use crate::berry::FieldModel;
use crate::charges::{charge_census, state_band, ChargeCensus, Region};
use crate::eigen;
use crate::linalg::{vec3, Vec3};
use crate::spinops::{Coupling, FieldPoint, SpinSystem};

pub const SCHEMA: &str = "monopole-atlas/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub b: [f64; 3],
    /// Energies by band index: ascending, except that without DMI the
    /// singlet is always last.
    pub energies: [f64; 4],
    /// Distance from each band to the nearest band it couples to; absent for
    /// a decoupled singlet.
    pub gaps: [Option<f64>; 4],
    pub min_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub schema: String,
    pub coupling: CouplingConfig,
    pub rows: Vec<SpectrumRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneSpec {
    pub normal: Axis,
    pub offset: f64,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub resolution: [usize; 2],
}

impl PlaneSpec {
    /// Point of the plane at in-plane coordinates `(u, v)`.
    pub fn point(&self, u: f64, v: f64) -> FieldPoint {
        let (iu, iv) = self.normal.in_plane();
        let mut b = [0.0; 3];
        b[self.normal.index()] = self.offset;
        b[iu] = u;
        b[iv] = v;
        FieldPoint(b)
    }

    /// Row-major sample coordinates, `u` varying fastest.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let axis = |range: [f64; 2], n: usize, i: usize| {
            if i + 1 == n {
                range[1]
            } else {
                range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64
            }
        };
        let [nu, nv] = self.resolution;
        (0..nv)
            .flat_map(|j| (0..nu).map(move |i| (i, j)))
            .map(|(i, j)| (axis(self.u_range, nu, i), axis(self.v_range, nv, j)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateField {
    /// Field vector, rescaled to the clip length when `clipped`.
    pub field: [f64; 3],
    /// Magnitude before clipping.
    pub norm: f64,
    pub clipped: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub u: f64,
    pub v: f64,
    pub b: [f64; 3],
    pub min_gap: f64,
    pub masked: bool,
    /// One entry per exported state; `None` on masked points.
    pub fields: Vec<Option<StateField>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldGrid {
    pub schema: String,
    pub coupling: CouplingConfig,
    pub plane: PlaneSpec,
    pub gap_tolerance: f64,
    pub clip: Option<f64>,
    pub current: bool,
    /// State labels ψ₁…ψ₄ in column order.
    pub states: Vec<usize>,
    pub points: Vec<GridPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub schema: String,
    pub coupling: CouplingConfig,
    pub seed: u64,
    pub census: ChargeCensus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub theta_deg: f64,
    pub census: Option<ChargeCensus>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub theta_deg: f64,
    /// Totals per state label, absent when the census failed.
    pub state_totals: Option<[f64; 4]>,
    pub grand_total: Option<f64>,
    pub sum_rule_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema: String,
    pub j: f64,
    pub d: f64,
    pub region: Region,
    pub seed: u64,
    pub entries: Vec<SweepEntry>,
    pub summary: Vec<SweepSummaryRow>,
}

impl SweepReport {
    pub fn failures(&self) -> Vec<&SweepEntry> {
        self.entries.iter().filter(|e| e.error.is_some()).collect()
    }
}

/// Band energies and gaps along the straight line `spectrum.from → spectrum.to`.
pub fn cmd_spectrum(config: &RunConfig) -> Result<SpectrumTable, CliError> {
    let g = config.coupling.to_coupling();
    let s = &config.spectrum;
    let n = s.points;
    let rows = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let b: Vec3 = std::array::from_fn(|a| s.from[a] + t * (s.to[a] - s.from[a]));
            let spec = eigen::spectrum_at(&FieldPoint(b), &g, SpinSystem::standard())
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            Ok(SpectrumRow {
                b,
                energies: spec.energies,
                gaps: spec.gaps.map(|x| x.is_finite().then_some(x)),
                min_gap: spec.min_gap(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SpectrumTable {
        schema: SCHEMA.into(),
        coupling: config.coupling,
        rows,
    })
}

fn clip_field(field: Vec3, clip: Option<f64>) -> (Vec3, f64, bool) {
    let norm = vec3::norm(field);
    match clip {
        Some(c) if norm > c => (vec3::scale(field, c / norm), norm, true),
        _ => (field, norm, false),
    }
}

/// Field texture of the selected states over a plane in `b`-space.
pub fn cmd_field_grid(config: &RunConfig) -> Result<FieldGrid, CliError> {
    let g = config.coupling.to_coupling();
    let gc = &config.grid;
    let tol = config.numerics.gap_tolerance;
    let model = FieldModel::new(g).with_gap_tolerance(tol);
    let plane = PlaneSpec {
        normal: gc.normal,
        offset: gc.offset,
        u_range: gc.u_range,
        v_range: gc.v_range,
        resolution: gc.resolution,
    };
    let bands: Vec<usize> = gc.states.iter().map(|&s| state_band(s, &g)).collect();
    let points = plane
        .samples()
        .into_par_iter()
        .map(|(u, v)| -> Result<GridPoint, CliError> {
            let b = plane.point(u, v);
            let spec = model
                .spectrum(&b)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let min_gap = spec.min_gap();
            if min_gap < tol {
                return Ok(GridPoint {
                    u,
                    v,
                    b: b.0,
                    min_gap,
                    masked: true,
                    fields: vec![None; bands.len()],
                });
            }
            let all = model
                .all_fields(&b)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let fields = bands
                .iter()
                .map(|&k| {
                    let (field, norm, clipped) = clip_field(all[k], gc.clip);
                    // a neighbour of the stencil may hit a degeneracy; the
                    // current is then left out rather than the whole point
                    let current = gc
                        .current
                        .then(|| model.current_density(&b, k, gc.current_step).ok())
                        .flatten();
                    Some(StateField {
                        field,
                        norm,
                        clipped,
                        current,
                    })
                })
                .collect();
            Ok(GridPoint {
                u,
                v,
                b: b.0,
                min_gap,
                masked: false,
                fields,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FieldGrid {
        schema: SCHEMA.into(),
        coupling: config.coupling,
        plane,
        gap_tolerance: tol,
        clip: gc.clip,
        current: gc.current,
        states: gc.states.clone(),
        points,
    })
}

fn census_at(g: &Coupling, config: &RunConfig) -> Result<ChargeCensus, CliError> {
    charge_census(
        g,
        &config.census.region(),
        &config.numerics.census_options(),
    )
    .map_err(CliError::from)
}

/// Charge census over the configured region.
pub fn cmd_census(config: &RunConfig) -> Result<CensusReport, CliError> {
    let census = census_at(&config.coupling.to_coupling(), config)?;
    Ok(CensusReport {
        schema: SCHEMA.into(),
        coupling: config.coupling,
        seed: config.numerics.seed,
        census,
    })
}

/// One census per DMI angle in `sweep.angles_deg`. Failures are recorded
/// per angle and do not stop the sweep.
pub fn cmd_sweep(config: &RunConfig) -> SweepReport {
    let entries: Vec<SweepEntry> = config
        .sweep
        .angles_deg
        .par_iter()
        .map(|&theta_deg| {
            let g = Coupling::with_degrees(config.coupling.j, config.coupling.d, theta_deg);
            match census_at(&g, config) {
                Ok(c) => SweepEntry {
                    theta_deg,
                    census: Some(c),
                    error: None,
                },
                Err(e) => SweepEntry {
                    theta_deg,
                    census: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let summary = entries
        .iter()
        .map(|e| SweepSummaryRow {
            theta_deg: e.theta_deg,
            state_totals: e.census.as_ref().map(|c| c.state_totals),
            grand_total: e.census.as_ref().map(|c| c.grand_total),
            sum_rule_ok: e.census.as_ref().map(|c| c.sum_rule_ok),
        })
        .collect();
    SweepReport {
        schema: SCHEMA.into(),
        j: config.coupling.j,
        d: config.coupling.d,
        region: config.census.region(),
        seed: config.numerics.seed,
        entries,
        summary,
    }
}
