//! Multistart search for point degeneracies between adjacent bands.
//!
//! Generic level crossings have codimension three, so the three components
//! of `b` are enough to reach them; the squared gap is driven to zero by
//! Nelder–Mead from quasi-random (Halton) seeds.

use rayon::prelude::*;

use super::Region;
use crate::eigen::{self, Spectrum};
use crate::linalg::Vec3;
use crate::spinops::{Coupling, FieldPoint, SpinSystem};

/// Radical-inverse Halton point `index` in bases (2, 3, 5).
pub fn halton(index: u64) -> Vec3 {
    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let inv = 1.0 / base as f64;
        let mut f = inv;
        let mut r = 0.0;
        while i > 0 {
            r += f * (i % base) as f64;
            i /= base;
            f *= inv;
        }
        r
    }
    [
        radical_inverse(index, 2),
        radical_inverse(index, 3),
        radical_inverse(index, 5),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Stop when the simplex diameter falls below this.
    pub x_tolerance: f64,
    /// Stop when the best value falls below this.
    pub f_target: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 4000,
            x_tolerance: 1e-14,
            f_target: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec3,
    pub f: f64,
    pub evaluations: usize,
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½, shrink ½)
/// from an axis-aligned initial simplex of edge `step`.
pub fn nelder_mead<F: Fn(Vec3) -> f64>(
    f: F,
    x0: Vec3,
    step: f64,
    opts: &NelderMeadOptions,
) -> NelderMeadResult {
    let mut simplex: Vec<(Vec3, f64)> = Vec::with_capacity(4);
    simplex.push((x0, f(x0)));
    for i in 0..3 {
        let mut x = x0;
        x[i] += step;
        simplex.push((x, f(x)));
    }
    let mut evals = 4;
    let combine =
        |a: Vec3, b: Vec3, t: f64| -> Vec3 { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|i| (x[i] - best.0[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.1 <= opts.f_target || diameter < opts.x_tolerance || evals >= opts.max_evaluations {
            return NelderMeadResult {
                x: best.0,
                f: best.1,
                evaluations: evals,
            };
        }
        let centroid: Vec3 =
            std::array::from_fn(|i| simplex[..3].iter().map(|(x, _)| x[i]).sum::<f64>() / 3.0);
        let worst = simplex[3];
        let reflected = combine(centroid, worst.0, -1.0);
        let fr = f(reflected);
        evals += 1;
        if fr < simplex[0].1 {
            let expanded = combine(centroid, worst.0, -2.0);
            let fe = f(expanded);
            evals += 1;
            simplex[3] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = combine(centroid, reflected, 0.5);
            (c, f(c))
        } else {
            let c = combine(centroid, worst.0, 0.5);
            (c, f(c))
        };
        evals += 1;
        if fc < worst.1.min(fr) {
            simplex[3] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0;
        for v in simplex[1..].iter_mut() {
            let x = combine(anchor, v.0, 0.5);
            *v = (x, f(x));
            evals += 1;
        }
    }
}

/// Pairs `(k, k+1)` of bands adjacent in the spectrum ordering that can
/// carry Berry flux between them.
pub fn coupled_band_pairs(g: &Coupling) -> Vec<(usize, usize)> {
    let probe = eigen::spectrum_at(&FieldPoint::new(0.1, 0.2, 0.3), g, SpinSystem::standard())
        .expect("finite coupling gives a Hermitian matrix");
    (0..3)
        .filter(|&k| probe.coupled(k, k + 1))
        .map(|k| (k, k + 1))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocatorOptions {
    pub n_seeds: usize,
    /// Offset into the Halton sequence.
    pub seed: u64,
    /// A point is a degeneracy when its gap is below this.
    pub gap_threshold: f64,
    /// Points closer than this are merged.
    pub merge_distance: f64,
    pub nelder_mead: NelderMeadOptions,
    pub restarts: usize,
}

impl Default for LocatorOptions {
    fn default() -> Self {
        LocatorOptions {
            n_seeds: 256,
            seed: 0,
            gap_threshold: 1e-9,
            merge_distance: 1e-5,
            nelder_mead: NelderMeadOptions::default(),
            restarts: 6,
        }
    }
}

fn pair_gap(spec: &Spectrum, pair: (usize, usize)) -> f64 {
    spec.pair_gap(pair.0, pair.1)
}

/// Minimizes the squared gap of `pair` from one seed inside `region`.
fn refine_from(
    g: &Coupling,
    pair: (usize, usize),
    region: &Region,
    seed: Vec3,
    opts: &LocatorOptions,
) -> (Vec3, f64) {
    let sys = SpinSystem::standard();
    let gap_at = |x: Vec3| -> f64 {
        eigen::spectrum_at(&FieldPoint(x), g, sys)
            .map(|s| pair_gap(&s, pair))
            .unwrap_or(f64::INFINITY)
    };
    // outside the box the objective continues from the clamped point plus a
    // quadratic wall, which keeps the simplex inside
    let objective = |x: Vec3| -> f64 {
        let c = region.clamp(x);
        let wall: f64 = (0..3).map(|i| (x[i] - c[i]).powi(2)).sum();
        gap_at(c).powi(2) + wall
    };
    let extent = region.extent().iter().copied().fold(0.0, f64::max);
    let mut step = 0.05 * extent.max(1e-3);
    let mut x = seed;
    let mut best = f64::INFINITY;
    for _ in 0..=opts.restarts {
        let r = nelder_mead(objective, x, step, &opts.nelder_mead);
        let improved = r.f < best;
        if improved {
            x = r.x;
            best = r.f;
        }
        if best == 0.0 {
            break;
        }
        step = (step * 1e-2).max(1e-12);
    }
    let x = region.clamp(x);
    (x, gap_at(x))
}

/// Degeneracies of the band pair inside `region`, with explicit options.
pub fn locate_degeneracies_with(
    g: &Coupling,
    pair: (usize, usize),
    region: &Region,
    opts: &LocatorOptions,
) -> Vec<FieldPoint> {
    if opts.n_seeds == 0 || !region.is_valid() || pair.1 != pair.0 + 1 || pair.1 > 3 {
        return Vec::new();
    }
    if !coupled_band_pairs(g).contains(&pair) {
        return Vec::new();
    }
    let extent = region.extent();
    let candidates: Vec<(Vec3, f64)> = (0..opts.n_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let u = halton(opts.seed + i + 1);
            let seed = std::array::from_fn(|a| region.min[a] + u[a] * extent[a]);
            refine_from(g, pair, region, seed, opts)
        })
        .collect();

    let mut hits: Vec<(Vec3, f64)> = candidates
        .into_iter()
        .filter(|(x, gap)| *gap < opts.gap_threshold && region.contains(&FieldPoint(*x)))
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut clusters: Vec<Vec3> = Vec::new();
    for (x, _) in hits {
        let p = FieldPoint(x);
        if clusters
            .iter()
            .all(|c| FieldPoint(*c).distance(&p) > opts.merge_distance)
        {
            clusters.push(x);
        }
    }
    clusters.sort_by(|a, b| {
        a[2].total_cmp(&b[2])
            .then(a[0].total_cmp(&b[0]))
            .then(a[1].total_cmp(&b[1]))
    });
    clusters.into_iter().map(FieldPoint).collect()
}

/// Degeneracies between bands `pair.0` and `pair.1 = pair.0 + 1` inside
/// `region`, using `n_seeds` Halton seeds.
pub fn locate_degeneracies(
    g: &Coupling,
    pair: (usize, usize),
    region: &Region,
    n_seeds: usize,
) -> Vec<FieldPoint> {
    let opts = LocatorOptions {
        n_seeds,
        ..LocatorOptions::default()
    };
    locate_degeneracies_with(g, pair, region, &opts)
}
