//! Test-only reference implementations, written independently of the
//! library: an explicit 4×4 Hamiltonian, dense complex linear algebra,
//! inverse iteration and the Wilson-loop field.
#![allow(dead_code)]

use num_complex::Complex64 as C;

pub type M4 = [[C; 4]; 4];

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Single-spin operators σ/2, index 0..3 = x, y, z.
fn half_pauli(a: usize) -> [[C; 2]; 2] {
    let h = 0.5;
    match a {
        0 => [[c(0.0, 0.0), c(h, 0.0)], [c(h, 0.0), c(0.0, 0.0)]],
        1 => [[c(0.0, 0.0), c(0.0, -h)], [c(0.0, h), c(0.0, 0.0)]],
        _ => [[c(h, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-h, 0.0)]],
    }
}

/// `A ⊗ B` with the first factor on the first spin, basis ↑↑, ↑↓, ↓↑, ↓↓.
fn kron(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> M4 {
    let mut m = [[C::default(); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    m
}

fn id2() -> [[C; 2]; 2] {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

/// `H = b·(s1+s2) + 4J s1ᶻs2ᶻ + 4D·(s1×s2)` with `D = d (sin θ, 0, cos θ)`.
pub fn reference_hamiltonian(b: [f64; 3], j: f64, d: f64, theta: f64) -> M4 {
    let s1: Vec<M4> = (0..3).map(|a| kron(&half_pauli(a), &id2())).collect();
    let s2: Vec<M4> = (0..3).map(|a| kron(&id2(), &half_pauli(a))).collect();
    let dv = [d * theta.sin(), 0.0, d * theta.cos()];
    let mut h = [[C::default(); 4]; 4];
    let add = |h: &mut M4, m: &M4, w: f64| {
        for r in 0..4 {
            for col in 0..4 {
                h[r][col] += m[r][col] * w;
            }
        }
    };
    for a in 0..3 {
        add(&mut h, &s1[a], b[a]);
        add(&mut h, &s2[a], b[a]);
    }
    add(&mut h, &mul(&s1[2], &s2[2]), 4.0 * j);
    for a in 0..3 {
        let (p, q) = ((a + 1) % 3, (a + 2) % 3);
        let mut cross = mul(&s1[p], &s2[q]);
        add(&mut cross, &mul(&s1[q], &s2[p]), -1.0);
        add(&mut h, &cross, 4.0 * dv[a]);
    }
    h
}

pub fn mul(a: &M4, b: &M4) -> M4 {
    let mut m = [[C::default(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                m[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    m
}

pub fn trace(a: &M4) -> C {
    (0..4).map(|i| a[i][i]).sum()
}

/// Solves `A x = y` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: M4, mut y: [C; 4]) -> [C; 4] {
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
            .unwrap();
        a.swap(col, p);
        y.swap(col, p);
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                let t = a[col][k];
                a[r][k] -= f * t;
            }
            let t = y[col];
            y[r] -= f * t;
        }
    }
    let mut x = [C::default(); 4];
    for r in (0..4).rev() {
        let s: C = (r + 1..4).map(|k| a[r][k] * x[k]).sum();
        x[r] = (y[r] - s) / a[r][r];
    }
    x
}

pub fn determinant(mut a: M4) -> C {
    let mut det = c(1.0, 0.0);
    for col in 0..4 {
        let p = (col..4)
            .max_by(|&r, &s| a[r][col].norm().total_cmp(&a[s][col].norm()))
            .unwrap();
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        det *= a[col][col];
        if a[col][col].norm() == 0.0 {
            return c(0.0, 0.0);
        }
        for r in col + 1..4 {
            let f = a[r][col] / a[col][col];
            for k in col..4 {
                let t = a[col][k];
                a[r][k] -= f * t;
            }
        }
    }
    det
}

fn normalize(v: [C; 4]) -> [C; 4] {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.map(|z| z / n)
}

pub fn braket(a: &[C; 4], b: &[C; 4]) -> C {
    (0..4).map(|i| a[i].conj() * b[i]).sum()
}

/// Eigenvector of `h` for the eigenvalue nearest `energy`, by shifted inverse
/// iteration.
pub fn inverse_iteration(h: &M4, energy: f64) -> [C; 4] {
    let mut shifted = *h;
    let mu = energy + 1e-9 * (1.0 + energy.abs());
    for i in 0..4 {
        shifted[i][i] -= mu;
    }
    let mut v = normalize([c(0.3, 0.1), c(-0.2, 0.5), c(0.7, -0.4), c(0.1, 0.2)]);
    for _ in 0..4 {
        v = normalize(solve(shifted, v));
    }
    v
}

/// Ascending eigenvalues from the library, used only as shifts.
fn library_energies(b: [f64; 3], j: f64, d: f64, theta: f64) -> [f64; 4] {
    use monopole_atlas::spinops::{hamiltonian, Coupling, FieldPoint};
    monopole_atlas::eigen::decompose(&hamiltonian(&FieldPoint(b), &Coupling::new(j, d, theta)))
        .unwrap()
        .energies
}

/// State of the `rank`-th lowest level, computed from the reference
/// Hamiltonian.
pub fn reference_state(b: [f64; 3], j: f64, d: f64, theta: f64, rank: usize) -> [C; 4] {
    let e = library_energies(b, j, d, theta)[rank];
    inverse_iteration(&reference_hamiltonian(b, j, d, theta), e)
}

/// Berry flux `−arg Π⟨ψ_i|ψ_{i+1}⟩` through a square of side `eps` centred on
/// `b`, normal to axis `a`, traversed counterclockwise about that axis.
fn plaquette(b: [f64; 3], j: f64, d: f64, theta: f64, rank: usize, a: usize, eps: f64) -> f64 {
    let (p, q) = ((a + 1) % 3, (a + 2) % 3);
    let h = eps / 2.0;
    let corners = [(-h, -h), (h, -h), (h, h), (-h, h)];
    let states: Vec<[C; 4]> = corners
        .iter()
        .map(|&(u, v)| {
            let mut x = b;
            x[p] += u;
            x[q] += v;
            reference_state(x, j, d, theta, rank)
        })
        .collect();
    let prod: C = (0..4)
        .map(|i| braket(&states[i], &states[(i + 1) % 4]))
        .product();
    -prod.arg()
}

/// Field of the `rank`-th level from Wilson loops, Richardson-extrapolated in
/// the loop size.
pub fn wilson_field(b: [f64; 3], j: f64, d: f64, theta: f64, rank: usize, eps: f64) -> [f64; 3] {
    std::array::from_fn(|a| {
        let coarse = plaquette(b, j, d, theta, rank, a, eps) / (eps * eps);
        let fine = plaquette(b, j, d, theta, rank, a, eps / 2.0) / (eps * eps / 4.0);
        (4.0 * fine - coarse) / 3.0
    })
}

/// Gauss–Legendre nodes on [−1, 1] for order 8, tabulated.
pub const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Circulation of `field` around a square of side `eps` centred on `b`,
/// normal to axis `a`, divided by its area.
pub fn stokes_curl_component(
    field: impl Fn([f64; 3]) -> [f64; 3],
    b: [f64; 3],
    a: usize,
    eps: f64,
) -> f64 {
    let (p, q) = ((a + 1) % 3, (a + 2) % 3);
    let h = eps / 2.0;
    // sides as (start, direction axis, sign)
    let sides = [
        ((-h, -h), p, 1.0),
        ((h, -h), q, 1.0),
        ((h, h), p, -1.0),
        ((-h, h), q, -1.0),
    ];
    let mut circ = 0.0;
    for ((u0, v0), axis, sign) in sides {
        for (x, w) in GL8 {
            let t = sign * h * x;
            let mut pt = b;
            pt[p] += u0 + if axis == p { h * sign + t } else { 0.0 };
            pt[q] += v0 + if axis == q { h * sign + t } else { 0.0 };
            circ += sign * w * h * field(pt)[axis];
        }
    }
    circ / (eps * eps)
}
