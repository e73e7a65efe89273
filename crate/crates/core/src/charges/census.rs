use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flux::flux_charge_adaptive;
use super::lattice::lattice_charge_adaptive;
use super::locate::{coupled_band_pairs, locate_degeneracies_with};
use super::{
    quantize, reference_totals, state_band, ChargeError, FluxOptions, LatticeOptions,
    LocatorOptions, MonopoleRecord, Region, QUANTIZATION_TOLERANCE,
};
use crate::spinops::{Coupling, FieldPoint};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusOptions {
    pub locator: LocatorOptions,
    pub flux: FluxOptions,
    pub lattice: LatticeOptions,
    /// Upper bound on the integration radius around each degeneracy.
    pub max_radius: f64,
    /// The locator searches this far beyond the region so that spheres near
    /// the boundary know about crossings just outside it.
    pub search_margin: f64,
    /// Allowed difference between the flux and lattice charges.
    pub agreement_tolerance: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            locator: LocatorOptions::default(),
            flux: FluxOptions::default(),
            lattice: LatticeOptions::default(),
            max_radius: 0.5,
            search_margin: 1.0,
            agreement_tolerance: 1e-3,
        }
    }
}

/// Monopoles of every band inside a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeCensus {
    pub coupling: Coupling,
    pub region: Region,
    pub records: Vec<MonopoleRecord>,
    /// Sum of quantized charges per band index.
    pub per_band_total: [f64; 4],
    /// The same totals indexed by state label ψ₁…ψ₄.
    pub state_totals: [f64; 4],
    pub grand_total: f64,
    /// Total charge each band carries over all of parameter space.
    pub reference_total: [f64; 4],
    /// Bands whose in-region total differs from the reference, i.e. some of
    /// their charge sits outside the region or at infinity.
    pub escaped: [bool; 4],
    /// Whether the grand total vanishes.
    pub sum_rule_ok: bool,
}

struct Site {
    location: FieldPoint,
    /// band → partners crossing it here
    bands: BTreeMap<usize, Vec<usize>>,
}

fn group_sites(crossings: &[(FieldPoint, (usize, usize))], merge: f64) -> Vec<Site> {
    let mut sites: Vec<Site> = Vec::new();
    for (p, (k, l)) in crossings {
        let site = match sites
            .iter_mut()
            .position(|s| s.location.distance(p) <= merge)
        {
            Some(i) => &mut sites[i],
            None => {
                sites.push(Site {
                    location: *p,
                    bands: BTreeMap::new(),
                });
                sites.last_mut().expect("just pushed")
            }
        };
        site.bands.entry(*k).or_default().push(*l);
        site.bands.entry(*l).or_default().push(*k);
    }
    sites
}

/// Locates every degeneracy in `region`, assigns charges by Gauss' law and
/// cross-checks each against the plaquette sum.
pub fn charge_census(
    g: &Coupling,
    region: &Region,
    opts: &CensusOptions,
) -> Result<ChargeCensus, ChargeError> {
    if !region.is_valid() {
        return Err(ChargeError::InvalidSphere(format!(
            "invalid census region {region:?}"
        )));
    }
    let search = region.expanded(opts.search_margin);
    let pairs = coupled_band_pairs(g);
    let crossings: Vec<(FieldPoint, (usize, usize))> = pairs
        .par_iter()
        .map(|&pair| {
            locate_degeneracies_with(g, pair, &search, &opts.locator)
                .into_iter()
                .map(move |p| (p, pair))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let sites = group_sites(&crossings, opts.locator.merge_distance);

    let mut jobs = Vec::new();
    for (i, site) in sites.iter().enumerate() {
        if !region.contains(&site.location) {
            continue;
        }
        let nearest = sites
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, s)| s.location.distance(&site.location))
            .fold(f64::INFINITY, f64::min);
        let radius = (0.5 * nearest).min(opts.max_radius);
        for (&band, partners) in &site.bands {
            let partner = *partners.iter().min().expect("each band has a partner");
            jobs.push((site.location, band, partner, radius));
        }
    }

    let evaluated: Vec<Option<MonopoleRecord>> = jobs
        .par_iter()
        .map(|&(location, band, partner_band, radius)| -> Result<Option<MonopoleRecord>, ChargeError> {
            let (charge, _) = flux_charge_adaptive(&location, radius, g, band, &opts.flux)?;
            let (lattice, _) = lattice_charge_adaptive(&location, radius, g, band, &opts.lattice)?;
            if (charge - lattice).abs() > opts.agreement_tolerance {
                return Err(ChargeError::MethodDisagreement {
                    band,
                    location: location.0,
                    flux: charge,
                    lattice,
                });
            }
            let (quantized, residual) = quantize(charge);
            if residual > QUANTIZATION_TOLERANCE {
                return Err(ChargeError::Unquantized {
                    band,
                    location: location.0,
                    charge,
                });
            }
            if quantized == 0.0 {
                return Ok(None);
            }
            Ok(Some(MonopoleRecord {
                band,
                location,
                partner_band,
                charge,
                lattice_charge: lattice,
                quantized,
                residual,
                sphere_radius: radius,
            }))
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<MonopoleRecord> = evaluated.into_iter().flatten().collect();

    let mut per_band_total = [0.0; 4];
    for r in &records {
        per_band_total[r.band] += r.quantized;
    }
    let grand_total: f64 = per_band_total.iter().sum();
    let reference_total = reference_totals(g);
    let escaped = std::array::from_fn(|k| {
        (per_band_total[k] - reference_total[k]).abs() > QUANTIZATION_TOLERANCE
    });
    let state_totals = std::array::from_fn(|i| per_band_total[state_band(i + 1, g)]);
    Ok(ChargeCensus {
        coupling: *g,
        region: *region,
        records,
        per_band_total,
        state_totals,
        grand_total,
        reference_total,
        escaped,
        sum_rule_ok: grand_total.abs() <= QUANTIZATION_TOLERANCE,
    })
}
