//! Monopole location and magnetic-charge extraction.
//!
//! Charges are obtained two independent ways: Gauss' law over a sphere with
//! product quadrature ([`flux_charge`]) and a gauge-invariant plaquette sum of
//! eigenvector overlaps ([`lattice_charge`]). Degeneracies are found by
//! multistart Nelder–Mead on the squared gap ([`locate_degeneracies`]).

mod census;
mod flux;
mod lattice;
mod locate;
pub mod quadrature;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::berry::BerryError;
use crate::eigen::EigenError;
use crate::linalg::Vec3;
use crate::spinops::{Coupling, FieldPoint};

pub use census::{charge_census, CensusOptions, ChargeCensus};
pub use flux::{flux_charge, flux_charge_adaptive, FluxOptions, DEFAULT_QUADRATURE_ORDER};
pub use lattice::{lattice_charge, lattice_charge_adaptive, LatticeOptions, DEFAULT_LATTICE_MESH};
pub use locate::{
    coupled_band_pairs, halton, locate_degeneracies, locate_degeneracies_with, nelder_mead,
    LocatorOptions, NelderMeadOptions, NelderMeadResult,
};

/// Largest accepted distance of a charge from the nearest half-integer.
pub const QUANTIZATION_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChargeError {
    #[error("band {band} is degenerate on the integration surface near b = {b:?} (gap {gap:e})")]
    DegeneracyOnSurface { band: usize, b: Vec3, gap: f64 },
    #[error("plaquette phase {max_phase:.3} too large at mesh {mesh}; refine the mesh")]
    PlaquettePhaseOverflow { max_phase: f64, mesh: usize },
    #[error(
        "flux ({flux}) and lattice ({lattice}) charges of band {band} at {location:?} disagree"
    )]
    MethodDisagreement {
        band: usize,
        location: Vec3,
        flux: f64,
        lattice: f64,
    },
    #[error("charge {charge} of band {band} at {location:?} is not a multiple of 1/2")]
    Unquantized {
        band: usize,
        location: Vec3,
        charge: f64,
    },
    #[error("flux quadrature did not settle below {tolerance:e} by order {order}")]
    QuadratureNotConverged { order: usize, tolerance: f64 },
    #[error("invalid integration sphere: {0}")]
    InvalidSphere(String),
    #[error(transparent)]
    Berry(#[from] BerryError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Nearest multiple of ½ and the distance to it. Exact quarter-integer ties
/// go to the even numerator (0.25 → 0.0, 0.75 → 1.0).
pub fn quantize(q: f64) -> (f64, f64) {
    let half = (2.0 * q).round_ties_even() / 2.0;
    (half, (q - half).abs())
}

/// Axis-aligned box in parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub min: Vec3,
    pub max: Vec3,
}

impl Region {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Region { min, max }
    }

    /// `[-half, half]³`.
    pub fn cube(half: f64) -> Self {
        Region::new([-half; 3], [half; 3])
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|i| {
            self.min[i].is_finite() && self.max[i].is_finite() && self.min[i] <= self.max[i]
        })
    }

    pub fn contains(&self, b: &FieldPoint) -> bool {
        (0..3).all(|i| b.0[i] >= self.min[i] && b.0[i] <= self.max[i])
    }

    pub fn clamp(&self, x: Vec3) -> Vec3 {
        std::array::from_fn(|i| x[i].clamp(self.min[i], self.max[i]))
    }

    pub fn extent(&self) -> Vec3 {
        std::array::from_fn(|i| self.max[i] - self.min[i])
    }

    pub fn expanded(&self, margin: f64) -> Region {
        Region::new(self.min.map(|x| x - margin), self.max.map(|x| x + margin))
    }
}

/// One located degeneracy as seen by one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonopoleRecord {
    pub band: usize,
    pub location: FieldPoint,
    /// Lowest-index band that crosses `band` here.
    pub partner_band: usize,
    /// Gauss-law flux charge.
    pub charge: f64,
    /// Plaquette-sum charge of the same sphere.
    pub lattice_charge: f64,
    pub quantized: f64,
    pub residual: f64,
    pub sphere_radius: f64,
}

impl MonopoleRecord {
    pub fn is_accepted(&self) -> bool {
        self.residual <= QUANTIZATION_TOLERANCE
    }
}

/// Band index carrying the state label ψ₁…ψ₄ (1-based) for coupling `g`.
///
/// ψ₁ is the lowest band and ψ₃ the highest, so that far from the origin
/// they are the M = −1 and M = +1 triplet states. ψ₂ and ψ₄ are the lower and
/// upper middle bands. Without DMI the singlet decouples and is ψ₄, with the
/// triplet bands in ascending order.
pub fn state_band(label: usize, g: &Coupling) -> usize {
    assert!((1..=4).contains(&label), "state labels run from 1 to 4");
    if g.is_exchange_symmetric() {
        label - 1
    } else {
        [0, 1, 3, 2][label - 1]
    }
}

/// Total charge `Q` of each band index for coupling `g`; these do not depend
/// on the coupling strength.
pub fn reference_totals(g: &Coupling) -> [f64; 4] {
    let by_label = [1.0, 0.0, -1.0, 0.0];
    let mut out = [0.0; 4];
    for (label, q) in by_label.iter().enumerate() {
        out[state_band(label + 1, g)] = *q;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_rounds_to_halves() {
        let (q, r) = quantize(0.4999);
        assert_eq!(q, 0.5);
        assert!((r - 1e-4).abs() < 1e-12);
        let (q, r) = quantize(-1.0006);
        assert_eq!(q, -1.0);
        assert!((r - 6e-4).abs() < 1e-12);
    }

    #[test]
    fn quantize_ties_go_to_even_numerator() {
        assert_eq!(quantize(0.25), (0.0, 0.25));
        assert_eq!(quantize(0.75), (1.0, 0.25));
        assert_eq!(quantize(-0.25), (0.0, 0.25));
        assert_eq!(quantize(1.25), (1.0, 0.25));
    }

    #[test]
    fn state_labels_are_permutations() {
        for g in [Coupling::ZERO, Coupling::with_degrees(1.0, 0.3, 60.0)] {
            let mut seen: Vec<usize> = (1..=4).map(|l| state_band(l, &g)).collect();
            seen.sort();
            assert_eq!(seen, vec![0, 1, 2, 3]);
        }
        assert_eq!(
            reference_totals(&Coupling::new(1.0, 0.3, 0.0)),
            [1.0, 0.0, 0.0, -1.0]
        );
        assert_eq!(
            reference_totals(&Coupling::new(1.0, 0.0, 0.0)),
            [1.0, 0.0, -1.0, 0.0]
        );
    }

    #[test]
    fn region_helpers() {
        let r = Region::cube(4.0);
        assert!(r.contains(&FieldPoint::new(4.0, -4.0, 0.0)));
        assert!(!r.contains(&FieldPoint::new(4.1, 0.0, 0.0)));
        assert_eq!(r.clamp([5.0, -7.0, 1.0]), [4.0, -4.0, 1.0]);
        assert!(!Region::new([1.0, 0.0, 0.0], [0.0, 1.0, 1.0]).is_valid());
    }
}
