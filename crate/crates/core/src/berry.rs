//! Synthetic magnetic fields over the external-field parameter space.
//!
//! For band `k` the field is
//!
//! ```text
//! B⁽ᵏ⁾(b; g) = i Σ_{l≠k} (S_kl × S_lk) / (E_l − E_k)²
//! ```
//!
//! where the cross product is taken componentwise over complex 3-vectors
//! without conjugation. The result is real up to rounding; a sizeable
//! imaginary part is reported as an error rather than discarded.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charges::MonopoleRecord;
use crate::eigen::{self, matrix_elements, EigenError, Spectrum, SpinMatrixElements};
use crate::linalg::{vec3, Vec3, C64, ZERO};
use crate::spinops::{Coupling, FieldPoint, SpinSystem};

pub const DEFAULT_GAP_TOLERANCE: f64 = 1e-6;
/// Default central-difference step for curl and divergence.
pub const DEFAULT_STEP: f64 = 1e-4;
const IMAGINARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BerryError {
    #[error(
        "band {band} is within {gap:e} of a degeneracy at b = {b:?} (tolerance {tolerance:e})"
    )]
    NearDegeneracy {
        b: Vec3,
        band: usize,
        gap: f64,
        tolerance: f64,
    },
    #[error("band index {0} out of range")]
    BandOutOfRange(usize),
    #[error("field of band {band} has imaginary residue {imag:e}")]
    NonRealField { band: usize, imag: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Field of one band at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub b: FieldPoint,
    pub band: usize,
    pub field: Vec3,
    /// `∇×B`, when requested.
    pub current: Option<Vec3>,
    pub min_gap: f64,
}

fn complex_cross(u: [C64; 3], v: [C64; 3]) -> [C64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Evaluates the field formula for band `k` from precomputed eigen-data.
///
/// Terms between bands of different symmetry sectors vanish identically and
/// are skipped. No gap check is made here.
pub fn field_from_elements(
    spec: &Spectrum,
    elements: &SpinMatrixElements,
    k: usize,
) -> Result<Vec3, BerryError> {
    if k >= 4 {
        return Err(BerryError::BandOutOfRange(k));
    }
    let mut acc = [ZERO; 3];
    for l in 0..4 {
        if l == k || !spec.coupled(k, l) {
            continue;
        }
        let de = spec.energies[l] - spec.energies[k];
        let c = complex_cross(elements.get(k, l), elements.get(l, k));
        for a in 0..3 {
            acc[a] += c[a] / (de * de);
        }
    }
    let field: [C64; 3] = std::array::from_fn(|a| acc[a] * C64::new(0.0, 1.0));
    let scale = field.iter().map(|x| x.re.abs()).fold(1.0, f64::max);
    let imag = field.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    if imag > IMAGINARY_TOLERANCE * scale {
        return Err(BerryError::NonRealField { band: k, imag });
    }
    Ok([field[0].re, field[1].re, field[2].re])
}

/// Synthetic-field evaluator for a fixed coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    pub coupling: Coupling,
    pub gap_tolerance: f64,
}

impl FieldModel {
    pub fn new(coupling: Coupling) -> Self {
        FieldModel {
            coupling,
            gap_tolerance: DEFAULT_GAP_TOLERANCE,
        }
    }

    pub fn with_gap_tolerance(mut self, tol: f64) -> Self {
        self.gap_tolerance = tol;
        self
    }

    pub fn spectrum(&self, b: &FieldPoint) -> Result<Spectrum, EigenError> {
        eigen::spectrum_at(b, &self.coupling, SpinSystem::standard())
    }

    fn check_gap(&self, b: &FieldPoint, spec: &Spectrum, k: usize) -> Result<(), BerryError> {
        if spec.gaps[k] < self.gap_tolerance {
            return Err(BerryError::NearDegeneracy {
                b: b.0,
                band: k,
                gap: spec.gaps[k],
                tolerance: self.gap_tolerance,
            });
        }
        Ok(())
    }

    /// `B⁽ᵏ⁾(b)`; refused if band `k` is closer than the gap tolerance to
    /// another band it couples to.
    pub fn field(&self, b: &FieldPoint, k: usize) -> Result<Vec3, BerryError> {
        if k >= 4 {
            return Err(BerryError::BandOutOfRange(k));
        }
        let spec = self.spectrum(b)?;
        self.check_gap(b, &spec, k)?;
        field_from_elements(&spec, &matrix_elements(&spec, SpinSystem::standard()), k)
    }

    pub fn sample(&self, b: &FieldPoint, k: usize) -> Result<FieldSample, BerryError> {
        if k >= 4 {
            return Err(BerryError::BandOutOfRange(k));
        }
        let spec = self.spectrum(b)?;
        self.check_gap(b, &spec, k)?;
        let field = field_from_elements(&spec, &matrix_elements(&spec, SpinSystem::standard()), k)?;
        Ok(FieldSample {
            b: *b,
            band: k,
            field,
            current: None,
            min_gap: spec.min_gap(),
        })
    }

    /// Fields of all four bands from a single eigensolve; every band must
    /// clear the gap tolerance.
    pub fn all_fields(&self, b: &FieldPoint) -> Result<[Vec3; 4], BerryError> {
        let spec = self.spectrum(b)?;
        for k in 0..4 {
            self.check_gap(b, &spec, k)?;
        }
        let elements = matrix_elements(&spec, SpinSystem::standard());
        let mut out = [[0.0; 3]; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = field_from_elements(&spec, &elements, k)?;
        }
        Ok(out)
    }

    /// `Σ_k B⁽ᵏ⁾(b)`, which vanishes identically.
    pub fn field_sum(&self, b: &FieldPoint) -> Result<Vec3, BerryError> {
        let fields = self.all_fields(b)?;
        Ok(fields.iter().fold([0.0; 3], |acc, f| vec3::add(acc, *f)))
    }

    /// Partial derivatives `∂B_a/∂b_c` by central differences, indexed `[c][a]`.
    fn jacobian(&self, b: &FieldPoint, k: usize, h: f64) -> Result<[[f64; 3]; 3], BerryError> {
        let mut d = [[0.0; 3]; 3];
        for (c, row) in d.iter_mut().enumerate() {
            let mut step = [0.0; 3];
            step[c] = h;
            let plus = self.field(&b.offset(step), k)?;
            let minus = self.field(&b.offset(vec3::scale(step, -1.0)), k)?;
            for a in 0..3 {
                row[a] = (plus[a] - minus[a]) / (2.0 * h);
            }
        }
        Ok(d)
    }

    /// Synthetic current density `j = ∇×B⁽ᵏ⁾` by second-order central
    /// differences with step `h`.
    pub fn current_density(&self, b: &FieldPoint, k: usize, h: f64) -> Result<Vec3, BerryError> {
        let d = self.jacobian(b, k, h)?;
        Ok([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])
    }

    /// Richardson extrapolation of [`current_density`](Self::current_density)
    /// from steps `h` and `h/2`.
    pub fn current_density_richardson(
        &self,
        b: &FieldPoint,
        k: usize,
        h: f64,
    ) -> Result<Vec3, BerryError> {
        let coarse = self.current_density(b, k, h)?;
        let fine = self.current_density(b, k, h / 2.0)?;
        Ok(std::array::from_fn(|a| (4.0 * fine[a] - coarse[a]) / 3.0))
    }

    /// `∇·B⁽ᵏ⁾` on the same stencil as the curl.
    pub fn divergence(&self, b: &FieldPoint, k: usize, h: f64) -> Result<f64, BerryError> {
        let d = self.jacobian(b, k, h)?;
        Ok(d[0][0] + d[1][1] + d[2][2])
    }

    /// Richardson extrapolation of [`divergence`](Self::divergence) from
    /// steps `h` and `h/2`.
    pub fn divergence_richardson(
        &self,
        b: &FieldPoint,
        k: usize,
        h: f64,
    ) -> Result<f64, BerryError> {
        let coarse = self.divergence(b, k, h)?;
        let fine = self.divergence(b, k, h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Field sample including the current density.
    pub fn sample_with_current(
        &self,
        b: &FieldPoint,
        k: usize,
        h: f64,
    ) -> Result<FieldSample, BerryError> {
        let mut s = self.sample(b, k)?;
        s.current = Some(self.current_density(b, k, h)?);
        Ok(s)
    }

    /// `B⁽ᵏ⁾(b) − Σ_μ q_μ (b − b_μ)/|b − b_μ|³` over the records of band `k`.
    pub fn monopolar_residual(
        &self,
        b: &FieldPoint,
        k: usize,
        monopoles: &[MonopoleRecord],
    ) -> Result<Vec3, BerryError> {
        let field = self.field(b, k)?;
        let coulomb = coulomb_field(
            b,
            monopoles
                .iter()
                .filter(|m| m.band == k)
                .map(|m| (m.location, m.charge)),
        );
        Ok(vec3::sub(field, coulomb))
    }
}

/// Superposed point-charge field `Σ q (b − b₀)/|b − b₀|³`.
pub fn coulomb_field(b: &FieldPoint, charges: impl IntoIterator<Item = (FieldPoint, f64)>) -> Vec3 {
    charges.into_iter().fold([0.0; 3], |acc, (at, q)| {
        let r = vec3::sub(b.0, at.0);
        let d = vec3::norm(r);
        vec3::add(acc, vec3::scale(r, q / (d * d * d)))
    })
}

/// Convenience: `B⁽ᵏ⁾(b; g)` with the default gap tolerance.
pub fn synthetic_field(b: &FieldPoint, g: &Coupling, k: usize) -> Result<FieldSample, BerryError> {
    FieldModel::new(*g).sample(b, k)
}

pub fn field_sum(b: &FieldPoint, g: &Coupling) -> Result<Vec3, BerryError> {
    FieldModel::new(*g).field_sum(b)
}

pub fn current_density(b: &FieldPoint, g: &Coupling, k: usize, h: f64) -> Result<Vec3, BerryError> {
    FieldModel::new(*g).current_density(b, k, h)
}

pub fn monopolar_residual(
    b: &FieldPoint,
    g: &Coupling,
    k: usize,
    monopoles: &[MonopoleRecord],
) -> Result<Vec3, BerryError> {
    FieldModel::new(*g).monopolar_residual(b, k, monopoles)
}
