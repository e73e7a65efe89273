use std::f64::consts::PI;

use rayon::prelude::*;

use super::quadrature::gauss_legendre;
use super::ChargeError;
use crate::berry::{BerryError, FieldModel, DEFAULT_GAP_TOLERANCE};
use crate::linalg::vec3;
use crate::spinops::{Coupling, FieldPoint};

/// Gauss–Legendre points in cos θ; φ uses twice as many trapezoid points.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxOptions {
    pub initial_order: usize,
    pub max_order: usize,
    /// Doubling stops once successive estimates differ by less than this.
    pub tolerance: f64,
    pub gap_tolerance: f64,
}

impl Default for FluxOptions {
    fn default() -> Self {
        FluxOptions {
            initial_order: DEFAULT_QUADRATURE_ORDER,
            max_order: 1024,
            tolerance: 1e-7,
            gap_tolerance: DEFAULT_GAP_TOLERANCE,
        }
    }
}

fn check_sphere(radius: f64, order: usize) -> Result<(), ChargeError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(ChargeError::InvalidSphere(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if order == 0 {
        return Err(ChargeError::InvalidSphere(
            "quadrature order must be positive".into(),
        ));
    }
    Ok(())
}

pub(crate) fn flux_with_model(
    model: &FieldModel,
    center: &FieldPoint,
    radius: f64,
    k: usize,
    order: usize,
) -> Result<f64, ChargeError> {
    check_sphere(radius, order)?;
    let (nodes, weights) = gauss_legendre(order);
    let n_phi = 2 * order;
    let dphi = 2.0 * PI / n_phi as f64;
    let rings: Vec<f64> = nodes
        .par_iter()
        .zip(weights.par_iter())
        .map(|(&ct, &w)| -> Result<f64, ChargeError> {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            let mut ring = 0.0;
            for j in 0..n_phi {
                let phi = dphi * j as f64;
                let n = [st * phi.cos(), st * phi.sin(), ct];
                let b = center.offset(vec3::scale(n, radius));
                let field = model.field(&b, k).map_err(|e| match e {
                    BerryError::NearDegeneracy { b, band, gap, .. } => {
                        ChargeError::DegeneracyOnSurface { band, b, gap }
                    }
                    other => other.into(),
                })?;
                ring += vec3::dot(field, n);
            }
            Ok(w * ring)
        })
        .collect::<Result<_, _>>()?;
    // sequential sum keeps the result independent of thread scheduling
    let total: f64 = rings.iter().sum();
    Ok(total * dphi * radius * radius / (4.0 * PI))
}

/// Enclosed charge `(1/4π) ∮ B⁽ᵏ⁾·dS` over the sphere `|b − center| = radius`.
pub fn flux_charge(
    center: &FieldPoint,
    radius: f64,
    g: &Coupling,
    k: usize,
    order: usize,
) -> Result<f64, ChargeError> {
    flux_with_model(&FieldModel::new(*g), center, radius, k, order)
}

/// Doubles the quadrature order until the estimate settles. Returns the
/// charge and the order reached.
pub fn flux_charge_adaptive(
    center: &FieldPoint,
    radius: f64,
    g: &Coupling,
    k: usize,
    opts: &FluxOptions,
) -> Result<(f64, usize), ChargeError> {
    let model = FieldModel::new(*g).with_gap_tolerance(opts.gap_tolerance);
    let mut order = opts.initial_order.max(1);
    let mut prev = flux_with_model(&model, center, radius, k, order)?;
    while order * 2 <= opts.max_order {
        order *= 2;
        let next = flux_with_model(&model, center, radius, k, order)?;
        if (next - prev).abs() < opts.tolerance {
            return Ok((next, order));
        }
        prev = next;
    }
    Err(ChargeError::QuadratureNotConverged {
        order,
        tolerance: opts.tolerance,
    })
}
