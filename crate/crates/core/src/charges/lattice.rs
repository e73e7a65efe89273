//! Plaquette (link-variable) charge on a latitude/longitude sphere mesh.
//!
//! Each plaquette contributes `−arg Π ⟨ψ_a|ψ_b⟩` taken counterclockwise about
//! the outward normal. Every link appears twice with opposite orientation,
//! so the sum over a closed mesh is an exact multiple of 2π and the charge
//! is an exact multiple of ½.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::ChargeError;
use crate::berry::{FieldModel, DEFAULT_GAP_TOLERANCE};
use crate::linalg::{self, vec3, CVec, C64};
use crate::spinops::{Coupling, FieldPoint};

pub const DEFAULT_LATTICE_MESH: usize = 32;
/// Plaquette phases above this are treated as unresolved.
const PHASE_LIMIT: f64 = PI / 2.0;
/// Link overlaps below this mean the band changed character between vertices.
const MIN_LINK: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeOptions {
    pub initial_mesh: usize,
    pub max_mesh: usize,
    pub gap_tolerance: f64,
}

impl Default for LatticeOptions {
    fn default() -> Self {
        LatticeOptions {
            initial_mesh: DEFAULT_LATTICE_MESH,
            max_mesh: 512,
            gap_tolerance: DEFAULT_GAP_TOLERANCE,
        }
    }
}

fn state_at(model: &FieldModel, b: FieldPoint, k: usize) -> Result<CVec<4>, ChargeError> {
    let spec = model.spectrum(&b)?;
    if spec.gaps[k] < model.gap_tolerance {
        return Err(ChargeError::DegeneracyOnSurface {
            band: k,
            b: b.0,
            gap: spec.gaps[k],
        });
    }
    Ok(spec.states[k])
}

/// Product of overlaps around a closed loop of states.
fn loop_product(states: &[&CVec<4>]) -> (C64, f64) {
    let mut prod = C64::new(1.0, 0.0);
    let mut weakest = f64::INFINITY;
    for i in 0..states.len() {
        let ov = linalg::inner(states[i], states[(i + 1) % states.len()]);
        weakest = weakest.min(ov.norm());
        prod *= ov;
    }
    (prod, weakest)
}

pub(crate) fn lattice_with_model(
    model: &FieldModel,
    center: &FieldPoint,
    radius: f64,
    k: usize,
    mesh: usize,
) -> Result<f64, ChargeError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(ChargeError::InvalidSphere(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if mesh < 2 {
        return Err(ChargeError::InvalidSphere(
            "lattice mesh must be at least 2".into(),
        ));
    }
    let n_theta = mesh;
    let n_phi = 2 * mesh;
    let point = |theta: f64, phi: f64| {
        let n = [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ];
        center.offset(vec3::scale(n, radius))
    };
    let north = state_at(model, point(0.0, 0.0), k)?;
    let south = state_at(model, point(PI, 0.0), k)?;
    // rings[i] holds latitude θ = π (i + 1) / n_theta
    let rings: Vec<Vec<CVec<4>>> = (1..n_theta)
        .into_par_iter()
        .map(|i| {
            let theta = PI * i as f64 / n_theta as f64;
            (0..n_phi)
                .map(|j| state_at(model, point(theta, 2.0 * PI * j as f64 / n_phi as f64), k))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let mut phases = Vec::with_capacity(n_theta * n_phi);
    let mut weakest = f64::INFINITY;
    let mut push = |loop_states: &[&CVec<4>]| {
        let (prod, w) = loop_product(loop_states);
        weakest = weakest.min(w);
        phases.push(-prod.arg());
    };
    let last = rings.len() - 1;
    for j in 0..n_phi {
        let jn = (j + 1) % n_phi;
        push(&[&north, &rings[0][j], &rings[0][jn]]);
        for i in 0..last {
            push(&[
                &rings[i][j],
                &rings[i + 1][j],
                &rings[i + 1][jn],
                &rings[i][jn],
            ]);
        }
        push(&[&rings[last][j], &south, &rings[last][jn]]);
    }
    let max_phase = phases.iter().map(|p| p.abs()).fold(0.0, f64::max);
    if max_phase > PHASE_LIMIT || weakest < MIN_LINK {
        return Err(ChargeError::PlaquettePhaseOverflow { max_phase, mesh });
    }
    Ok(phases.iter().sum::<f64>() / (4.0 * PI))
}

/// Enclosed charge of band `k` from the plaquette sum on a mesh with `mesh`
/// latitude bands and `2·mesh` longitude bands.
pub fn lattice_charge(
    center: &FieldPoint,
    radius: f64,
    g: &Coupling,
    k: usize,
    mesh: usize,
) -> Result<f64, ChargeError> {
    lattice_with_model(&FieldModel::new(*g), center, radius, k, mesh)
}

/// Doubles the mesh while plaquette phases are unresolved.
pub fn lattice_charge_adaptive(
    center: &FieldPoint,
    radius: f64,
    g: &Coupling,
    k: usize,
    opts: &LatticeOptions,
) -> Result<(f64, usize), ChargeError> {
    let model = FieldModel::new(*g).with_gap_tolerance(opts.gap_tolerance);
    let mut mesh = opts.initial_mesh.max(2);
    loop {
        match lattice_with_model(&model, center, radius, k, mesh) {
            Err(ChargeError::PlaquettePhaseOverflow { .. }) if mesh * 2 <= opts.max_mesh => {
                mesh *= 2
            }
            other => return other.map(|q| (q, mesh)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeeman_top_band_has_charge_minus_one() {
        let q = lattice_charge(&FieldPoint::ORIGIN, 1.0, &Coupling::ZERO, 2, 16).unwrap();
        assert!((q + 1.0).abs() < 1e-12, "{q}");
        let q = lattice_charge(&FieldPoint::ORIGIN, 1.0, &Coupling::ZERO, 0, 16).unwrap();
        assert!((q - 1.0).abs() < 1e-12, "{q}");
    }

    #[test]
    fn empty_sphere_has_no_charge() {
        let g = Coupling::with_degrees(1.0, 0.3, 60.0);
        for k in 0..4 {
            let q = lattice_charge(&FieldPoint::new(2.0, 1.0, -3.0), 0.4, &g, k, 16).unwrap();
            assert!(q.abs() < 1e-9, "band {k}: {q}");
        }
    }

    #[test]
    fn coarse_mesh_is_flagged() {
        let err = lattice_charge(&FieldPoint::ORIGIN, 1.0, &Coupling::ZERO, 0, 2).unwrap_err();
        assert!(
            matches!(err, ChargeError::PlaquettePhaseOverflow { mesh: 2, .. }),
            "{err:?}"
        );
    }
}
