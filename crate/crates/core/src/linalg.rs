//! Small dense complex matrices and real 3-vectors.
//!
//! Everything in this crate lives in a 4-dimensional Hilbert space and a
//! 3-dimensional parameter space, so fixed-size arrays are used throughout.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense N×N complex matrix, row-major.
pub type CMat<const N: usize> = [[C64; N]; N];
pub type Mat4 = CMat<4>;
pub type CVec<const N: usize> = [C64; N];
pub type Vec3 = [f64; 3];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn zeros<const N: usize>() -> CMat<N> {
    [[ZERO; N]; N]
}

pub fn identity<const N: usize>() -> CMat<N> {
    let mut m = zeros::<N>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn diag<const N: usize>(d: [f64; N]) -> CMat<N> {
    let mut m = zeros::<N>();
    for i in 0..N {
        m[i][i] = C64::new(d[i], 0.0);
    }
    m
}

pub fn matmul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut c = zeros::<N>();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..N {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn add<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] += b[i][j];
        }
    }
    c
}

pub fn sub<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut c = *a;
    for i in 0..N {
        for j in 0..N {
            c[i][j] -= b[i][j];
        }
    }
    c
}

pub fn scale<const N: usize>(a: &CMat<N>, s: C64) -> CMat<N> {
    let mut c = *a;
    for row in c.iter_mut() {
        for x in row.iter_mut() {
            *x *= s;
        }
    }
    c
}

pub fn adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut c = zeros::<N>();
    for i in 0..N {
        for j in 0..N {
            c[j][i] = a[i][j].conj();
        }
    }
    c
}

pub fn trace<const N: usize>(a: &CMat<N>) -> C64 {
    (0..N).map(|i| a[i][i]).sum()
}

/// Largest elementwise modulus of `a - a†`.
pub fn hermiticity_defect<const N: usize>(a: &CMat<N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((a[i][j] - a[j][i].conj()).norm());
        }
    }
    worst
}

pub fn max_abs_diff<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            worst = worst.max((a[i][j] - b[i][j]).norm());
        }
    }
    worst
}

pub fn matvec<const N: usize>(a: &CMat<N>, v: &CVec<N>) -> CVec<N> {
    let mut out = [ZERO; N];
    for i in 0..N {
        for j in 0..N {
            out[i] += a[i][j] * v[j];
        }
    }
    out
}

/// `<u|v>`, antilinear in the first argument.
pub fn inner<const N: usize>(u: &CVec<N>, v: &CVec<N>) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// `<u|A|v>`.
pub fn sandwich<const N: usize>(u: &CVec<N>, a: &CMat<N>, v: &CVec<N>) -> C64 {
    inner(u, &matvec(a, v))
}

pub fn vnorm<const N: usize>(v: &CVec<N>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub mod vec3 {
    use super::Vec3;

    pub fn add(a: Vec3, b: Vec3) -> Vec3 {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale(a: Vec3, s: f64) -> Vec3 {
        [a[0] * s, a[1] * s, a[2] * s]
    }

    pub fn dot(a: Vec3, b: Vec3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn norm(a: Vec3) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn dist(a: Vec3, b: Vec3) -> f64 {
        norm(sub(a, b))
    }
}
