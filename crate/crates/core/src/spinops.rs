//! Spin operators for coupled spin-½ particles and the two-spin Hamiltonian
//!
//! `H = b·S + 4J s1ᶻ s2ᶻ + 4D·(s1 × s2)` with `S = s1 + s2` and the DMI
//! vector `D = D (sin ϑ, 0, cos ϑ)` confined to the `b_x b_z` plane.
//!
//! Units: ħ = 1, spin operators are σ/2. The product basis is ordered
//! (↑↑, ↑↓, ↓↑, ↓↓) everywhere in this crate.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, vec3, CMat, Mat4, Vec3, C64, ONE, ZERO};

/// Dense operator on the `2^n`-dimensional space of `n` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<C64>,
}

impl Operator {
    fn from_2x2(m: [[C64; 2]; 2]) -> Self {
        Operator {
            dim: 2,
            data: vec![m[0][0], m[0][1], m[1][0], m[1][1]],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Operator { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        let dim = self.dim * other.dim;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        data[(i * other.dim + k) * dim + j * other.dim + l] = a * other.get(k, l);
                    }
                }
            }
        }
        Operator { dim, data }
    }

    /// Converts to a fixed-size matrix; panics if the dimensions differ.
    pub fn to_fixed<const N: usize>(&self) -> CMat<N> {
        assert_eq!(self.dim, N, "operator dimension mismatch");
        let mut m = linalg::zeros::<N>();
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.get(i, j);
            }
        }
        m
    }
}

/// Single-site spin-½ operators (σˣ/2, σʸ/2, σᶻ/2).
pub fn spin_half() -> [Operator; 3] {
    let h = 0.5;
    [
        Operator::from_2x2([[ZERO, C64::new(h, 0.0)], [C64::new(h, 0.0), ZERO]]),
        Operator::from_2x2([[ZERO, C64::new(0.0, -h)], [C64::new(0.0, h), ZERO]]),
        Operator::from_2x2([[C64::new(h, 0.0), ZERO], [ZERO, C64::new(-h, 0.0)]]),
    ]
}

/// Embeds the spin-½ operators of every site into the `n`-spin product space.
///
/// Site 0 is the leftmost tensor factor, so for `n = 2` the basis order is
/// (↑↑, ↑↓, ↓↑, ↓↓).
pub fn site_operators(n_spins: usize) -> Vec<[Operator; 3]> {
    assert!(n_spins >= 1, "need at least one spin");
    let single = spin_half();
    let id2 = Operator::identity(2);
    (0..n_spins)
        .map(|site| {
            let embed = |op: &Operator| {
                let mut acc = Operator::identity(1);
                for s in 0..n_spins {
                    acc = acc.kron(if s == site { op } else { &id2 });
                }
                acc
            };
            [embed(&single[0]), embed(&single[1]), embed(&single[2])]
        })
        .collect()
}

/// Spin operators of the two-spin system.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub s1: [Mat4; 3],
    pub s2: [Mat4; 3],
    /// Total spin `S = s1 + s2`.
    pub total: [Mat4; 3],
}

impl SpinSystem {
    pub const N_SPINS: usize = 2;

    pub fn new() -> Self {
        let sites = site_operators(Self::N_SPINS);
        let fix = |ops: &[Operator; 3]| -> [Mat4; 3] {
            [ops[0].to_fixed(), ops[1].to_fixed(), ops[2].to_fixed()]
        };
        let s1 = fix(&sites[0]);
        let s2 = fix(&sites[1]);
        let total = [
            linalg::add(&s1[0], &s2[0]),
            linalg::add(&s1[1], &s2[1]),
            linalg::add(&s1[2], &s2[2]),
        ];
        SpinSystem { s1, s2, total }
    }

    /// Shared instance; the operators are constants.
    pub fn standard() -> &'static SpinSystem {
        static SYSTEM: OnceLock<SpinSystem> = OnceLock::new();
        SYSTEM.get_or_init(SpinSystem::new)
    }

    /// Components of `s1 × s2`.
    pub fn cross(&self) -> [Mat4; 3] {
        let (a, b) = (&self.s1, &self.s2);
        [
            linalg::sub(&linalg::matmul(&a[1], &b[2]), &linalg::matmul(&a[2], &b[1])),
            linalg::sub(&linalg::matmul(&a[2], &b[0]), &linalg::matmul(&a[0], &b[2])),
            linalg::sub(&linalg::matmul(&a[0], &b[1]), &linalg::matmul(&a[1], &b[0])),
        ]
    }
}

impl Default for SpinSystem {
    fn default() -> Self {
        SpinSystem::new()
    }
}

/// Spin-spin coupling `g = (J, D, ϑ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// Ising strength.
    pub j: f64,
    /// DMI magnitude.
    pub d: f64,
    /// Angle between the DMI vector and the Ising (z) axis, radians.
    pub theta: f64,
}

impl Coupling {
    pub const ZERO: Coupling = Coupling {
        j: 0.0,
        d: 0.0,
        theta: 0.0,
    };

    pub fn new(j: f64, d: f64, theta: f64) -> Self {
        Coupling { j, d, theta }
    }

    pub fn with_degrees(j: f64, d: f64, theta_deg: f64) -> Self {
        Coupling::new(j, d, theta_deg.to_radians())
    }

    /// `D (sin ϑ, 0, cos ϑ)`.
    pub fn dmi_vector(&self) -> Vec3 {
        [self.d * self.theta.sin(), 0.0, self.d * self.theta.cos()]
    }

    /// Without DMI the Hamiltonian commutes with the exchange of the two
    /// spins, so singlet and triplet never mix.
    pub fn is_exchange_symmetric(&self) -> bool {
        self.d == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.j.is_finite() && self.d.is_finite() && self.theta.is_finite()
    }
}

/// A point `b` of the external-field parameter space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FieldPoint(pub Vec3);

impl FieldPoint {
    pub const ORIGIN: FieldPoint = FieldPoint([0.0; 3]);

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        FieldPoint([x, y, z])
    }

    pub fn norm(&self) -> f64 {
        vec3::norm(self.0)
    }

    /// `n = b/|b|`; `None` at the origin.
    pub fn direction(&self) -> Option<Vec3> {
        let r = self.norm();
        (r > 0.0).then(|| vec3::scale(self.0, 1.0 / r))
    }

    pub fn distance(&self, other: &FieldPoint) -> f64 {
        vec3::dist(self.0, other.0)
    }

    pub fn offset(&self, d: Vec3) -> FieldPoint {
        FieldPoint(vec3::add(self.0, d))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl From<Vec3> for FieldPoint {
    fn from(v: Vec3) -> Self {
        FieldPoint(v)
    }
}

/// Assembles `H(b; g)` for the two-spin system.
pub fn build_hamiltonian(b: &FieldPoint, g: &Coupling, sys: &SpinSystem) -> Mat4 {
    let mut h = linalg::zeros::<4>();
    let mut accumulate = |m: &Mat4, coeff: f64| {
        if coeff == 0.0 {
            return;
        }
        for i in 0..4 {
            for j in 0..4 {
                h[i][j] += m[i][j] * coeff;
            }
        }
    };
    for a in 0..3 {
        accumulate(&sys.total[a], b.0[a]);
    }
    accumulate(&linalg::matmul(&sys.s1[2], &sys.s2[2]), 4.0 * g.j);
    let dmi = g.dmi_vector();
    let cross = sys.cross();
    for a in 0..3 {
        accumulate(&cross[a], 4.0 * dmi[a]);
    }
    h
}

/// Convenience wrapper using the shared [`SpinSystem`].
pub fn hamiltonian(b: &FieldPoint, g: &Coupling) -> Mat4 {
    build_hamiltonian(b, g, SpinSystem::standard())
}
