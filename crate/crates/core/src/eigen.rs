//! Hermitian eigendecomposition with deterministic band ordering.
//!
//! The solver is a cyclic complex Jacobi iteration, which is unconditionally
//! stable for the 3×3 and 4×4 matrices that occur here.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMat, CVec, Mat4, C64, ZERO};
use crate::spinops::{build_hamiltonian, Coupling, FieldPoint, SpinSystem};

/// Off-diagonal Frobenius norm at which the Jacobi sweeps stop, relative to
/// `max(1, ‖A‖_F)`.
pub const JACOBI_TOLERANCE: f64 = 1e-13;
/// Accepted deviation from Hermiticity on input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not Hermitian: max |A - A†| = {defect:e}")]
    NotHermitian { defect: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("Jacobi iteration did not converge (off-diagonal norm {off_norm:e})")]
    NoConvergence { off_norm: f64 },
}

fn off_diagonal_norm<const N: usize>(a: &CMat<N>) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        for j in 0..N {
            if i != j {
                s += a[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Returns unsorted eigenvalues and the unitary whose columns are the
/// eigenvectors.
pub fn jacobi_eigen<const N: usize>(input: &CMat<N>) -> Result<([f64; N], CMat<N>), EigenError> {
    if input
        .iter()
        .flatten()
        .any(|x| !x.re.is_finite() || !x.im.is_finite())
    {
        return Err(EigenError::NonFinite);
    }
    let defect = linalg::hermiticity_defect(input);
    if defect > HERMITIAN_TOLERANCE {
        return Err(EigenError::NotHermitian { defect });
    }
    // symmetrize so rounding in the input cannot leak into the rotations
    let mut a = *input;
    for i in 0..N {
        a[i][i] = C64::new(a[i][i].re, 0.0);
        for j in (i + 1)..N {
            let m = (a[i][j] + a[j][i].conj()) * 0.5;
            a[i][j] = m;
            a[j][i] = m.conj();
        }
    }
    let frob: f64 = a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let threshold = JACOBI_TOLERANCE * frob.max(1.0);
    let mut v = linalg::identity::<N>();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = a[p][q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[q][q].re - a[p][p].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = [[c, s e^{iφ}], [-s e^{-iφ}, c]] on the (p, q) plane
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                // A <- A J
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = akp * c + akq * jqp;
                    row[q] = akp * jpq + akq * c;
                }
                // A <- J† A
                for k in 0..N {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = apk * c + aqk * jqp.conj();
                    a[q][k] = apk * jpq.conj() + aqk * c;
                }
                a[p][q] = ZERO;
                a[q][p] = ZERO;
                a[p][p] = C64::new(a[p][p].re, 0.0);
                a[q][q] = C64::new(a[q][q].re, 0.0);
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = vkp * c + vkq * jqp;
                    row[q] = vkp * jpq + vkq * c;
                }
            }
        }
    }
    let off_norm = off_diagonal_norm(&a);
    if off_norm >= threshold {
        return Err(EigenError::NoConvergence { off_norm });
    }
    let mut values = [0.0; N];
    for i in 0..N {
        values[i] = a[i][i].re;
    }
    Ok((values, v))
}

fn column<const N: usize>(m: &CMat<N>, j: usize) -> CVec<N> {
    let mut out = [ZERO; N];
    for i in 0..N {
        out[i] = m[i][j];
    }
    out
}

/// Index of the largest-magnitude component; the first one wins among
/// components equal to within rounding.
fn pivot_index<const N: usize>(v: &CVec<N>) -> usize {
    let max = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
    v.iter()
        .position(|x| x.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0)
}

/// Rotates `v` so its pivot component is real and positive.
pub fn fix_phase<const N: usize>(v: &mut CVec<N>) {
    let idx = pivot_index(v);
    let p = v[idx];
    let r = p.norm();
    if r == 0.0 {
        return;
    }
    let rot = p.conj() / r;
    for x in v.iter_mut() {
        *x *= rot;
    }
    v[idx] = C64::new(r, 0.0);
}

/// Symmetry sector of a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    /// No conserved exchange parity; all bands couple.
    Full,
    Triplet,
    Singlet,
}

/// Singlet/triplet character along `n = b/|b|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeemanLabel {
    MinusOne,
    TripletZero,
    SingletZero,
    PlusOne,
}

impl ZeemanLabel {
    pub fn m(self) -> i32 {
        match self {
            ZeemanLabel::MinusOne => -1,
            ZeemanLabel::TripletZero | ZeemanLabel::SingletZero => 0,
            ZeemanLabel::PlusOne => 1,
        }
    }
}

/// Eigen-data of the Hamiltonian at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub energies: [f64; 4],
    /// `states[k]` is the eigenvector of band `k`.
    pub states: [CVec<4>; 4],
    /// Distance to the nearest band of the same sector, `+∞` if alone.
    pub gaps: [f64; 4],
    pub sectors: [Sector; 4],
    pub zeeman_labels: Option<[ZeemanLabel; 4]>,
}

impl Spectrum {
    fn assemble(energies: [f64; 4], mut states: [CVec<4>; 4], sectors: [Sector; 4]) -> Self {
        for s in states.iter_mut() {
            fix_phase(s);
        }
        let mut gaps = [f64::INFINITY; 4];
        for k in 0..4 {
            for l in 0..4 {
                if l != k && sectors[k] == sectors[l] {
                    gaps[k] = gaps[k].min((energies[l] - energies[k]).abs());
                }
            }
        }
        Spectrum {
            energies,
            states,
            gaps,
            sectors,
            zeeman_labels: None,
        }
    }

    /// Whether bands `k` and `l` can have nonzero spin matrix elements.
    pub fn coupled(&self, k: usize, l: usize) -> bool {
        self.sectors[k] == self.sectors[l]
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Gap between two specific bands.
    pub fn pair_gap(&self, k: usize, l: usize) -> f64 {
        (self.energies[l] - self.energies[k]).abs()
    }

    pub fn residual(&self, h: &Mat4, k: usize) -> f64 {
        let hv = linalg::matvec(h, &self.states[k]);
        let mut r = 0.0;
        for i in 0..4 {
            r += (hv[i] - self.states[k][i] * self.energies[k]).norm_sqr();
        }
        r.sqrt()
    }
}

/// Ascending-energy decomposition of a Hermitian 4×4 matrix.
pub fn decompose(h: &Mat4) -> Result<Spectrum, EigenError> {
    let (values, vectors) = jacobi_eigen(h)?;
    let mut order: Vec<(f64, usize, CVec<4>)> = (0..4)
        .map(|j| {
            let c = column(&vectors, j);
            (values[j], pivot_index(&c), c)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let energies = [order[0].0, order[1].0, order[2].0, order[3].0];
    let states = [order[0].2, order[1].2, order[2].2, order[3].2];
    Ok(Spectrum::assemble(energies, states, [Sector::Full; 4]))
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `(|↑↓⟩ − |↓↑⟩)/√2`.
pub fn singlet_state() -> CVec<4> {
    [
        ZERO,
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(-FRAC_1_SQRT_2, 0.0),
        ZERO,
    ]
}

/// Columns |↑↑⟩, (|↑↓⟩ + |↓↑⟩)/√2, |↓↓⟩.
fn triplet_basis() -> [CVec<4>; 3] {
    let one = C64::new(1.0, 0.0);
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    [
        [one, ZERO, ZERO, ZERO],
        [ZERO, h, h, ZERO],
        [ZERO, ZERO, ZERO, one],
    ]
}

/// Decomposition that respects exchange parity: the three triplet bands in
/// ascending order, then the singlet.
pub fn decompose_exchange_symmetric(h: &Mat4) -> Result<Spectrum, EigenError> {
    let basis = triplet_basis();
    let mut block = linalg::zeros::<3>();
    for i in 0..3 {
        for j in 0..3 {
            block[i][j] = linalg::sandwich(&basis[i], h, &basis[j]);
        }
    }
    let (values, vectors) = jacobi_eigen(&block)?;
    let mut order: Vec<(f64, usize)> = (0..3).map(|j| (values[j], j)).collect();
    order.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(pivot_index(&column(&vectors, a.1)).cmp(&pivot_index(&column(&vectors, b.1))))
    });
    let lift = |j: usize| -> CVec<4> {
        let mut out = [ZERO; 4];
        for (i, b) in basis.iter().enumerate() {
            for (o, x) in out.iter_mut().zip(b) {
                *o += *x * vectors[i][j];
            }
        }
        out
    };
    let singlet = singlet_state();
    let e_singlet = linalg::sandwich(&singlet, h, &singlet).re;
    let energies = [order[0].0, order[1].0, order[2].0, e_singlet];
    let states = [
        lift(order[0].1),
        lift(order[1].1),
        lift(order[2].1),
        singlet,
    ];
    Ok(Spectrum::assemble(
        energies,
        states,
        [
            Sector::Triplet,
            Sector::Triplet,
            Sector::Triplet,
            Sector::Singlet,
        ],
    ))
}

/// Singlet/triplet eigenbasis of `n·S`, labelled.
fn zeeman_basis(n: [f64; 3], sys: &SpinSystem) -> Result<[(ZeemanLabel, CVec<4>); 4], EigenError> {
    let mut op = linalg::zeros::<4>();
    for a in 0..3 {
        op = linalg::add(&op, &linalg::scale(&sys.total[a], C64::new(n[a], 0.0)));
    }
    // push the singlet far below so it separates from the M = 0 triplet
    let s = singlet_state();
    for i in 0..4 {
        for j in 0..4 {
            op[i][j] -= s[i] * s[j].conj() * 5.0;
        }
    }
    let spec = decompose(&op)?;
    Ok([
        (ZeemanLabel::SingletZero, spec.states[0]),
        (ZeemanLabel::MinusOne, spec.states[1]),
        (ZeemanLabel::TripletZero, spec.states[2]),
        (ZeemanLabel::PlusOne, spec.states[3]),
    ])
}

/// Spectrum of `H(b; g)`.
///
/// For exchange-symmetric couplings (no DMI) the bands are ordered by sector
/// (triplet ascending, then singlet) because singlet/triplet crossings are
/// then whole surfaces that carry no Berry flux. Otherwise bands are in
/// ascending energy.
pub fn spectrum_at(b: &FieldPoint, g: &Coupling, sys: &SpinSystem) -> Result<Spectrum, EigenError> {
    let h = build_hamiltonian(b, g, sys);
    let mut spec = if g.is_exchange_symmetric() {
        decompose_exchange_symmetric(&h)?
    } else {
        decompose(&h)?
    };
    if let Some(n) = b.direction() {
        let basis = zeeman_basis(n, sys)?;
        let mut labels = [ZeemanLabel::SingletZero; 4];
        for (k, label) in labels.iter_mut().enumerate() {
            let best = basis
                .iter()
                .max_by(|x, y| {
                    linalg::inner(&x.1, &spec.states[k])
                        .norm()
                        .total_cmp(&linalg::inner(&y.1, &spec.states[k]).norm())
                })
                .expect("four basis states");
            *label = best.0;
        }
        spec.zeeman_labels = Some(labels);
    }
    Ok(spec)
}

/// `S_kl = ⟨ψ_k| S |ψ_l⟩` for all ordered band pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrixElements {
    elements: [[[C64; 3]; 4]; 4],
}

impl SpinMatrixElements {
    pub fn get(&self, k: usize, l: usize) -> [C64; 3] {
        self.elements[k][l]
    }
}

pub fn matrix_elements(spec: &Spectrum, sys: &SpinSystem) -> SpinMatrixElements {
    let mut elements = [[[ZERO; 3]; 4]; 4];
    for a in 0..3 {
        let applied: [CVec<4>; 4] =
            std::array::from_fn(|l| linalg::matvec(&sys.total[a], &spec.states[l]));
        for k in 0..4 {
            for l in 0..4 {
                elements[k][l][a] = linalg::inner(&spec.states[k], &applied[l]);
            }
        }
    }
    SpinMatrixElements { elements }
}
