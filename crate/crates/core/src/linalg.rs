//! Fixed-size 2×2 helpers and a few 4×4 routines.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// A 2×2 real block, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Quad2(pub [[f64; 2]; 2]);

/// Proper-rotation singular value decomposition `m = R(left) · diag(s0, s1) · R(right)`
/// with `s0 ≥ |s1|` and `sign(s1) = sign(det m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Svd2 {
    pub left: f64,
    pub s0: f64,
    pub s1: f64,
    pub right: f64,
}

impl Quad2 {
    pub const IDENTITY: Quad2 = Quad2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Quad2 = Quad2([[0.0, 0.0], [0.0, 0.0]]);
    /// The standard symplectic form on one mode.
    pub const J: Quad2 = Quad2([[0.0, 1.0], [-1.0, 0.0]]);
    /// `diag(1, -1)`.
    pub const Z: Quad2 = Quad2([[1.0, 0.0], [0.0, -1.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quad2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Quad2::new(a, 0.0, 0.0, d)
    }

    pub fn scalar(x: f64) -> Self {
        Quad2::diag(x, x)
    }

    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Quad2::new(c, -s, s, c)
    }

    pub fn squeeze(gamma: f64) -> Self {
        Quad2::diag(gamma, 1.0 / gamma)
    }

    pub fn shear(kappa: f64) -> Self {
        Quad2::new(1.0, 0.0, kappa, 1.0)
    }

    pub fn fourier() -> Self {
        Quad2::new(0.0, -1.0, 1.0, 0.0)
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Quad2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    /// Adjugate; the inverse of a unit-determinant block.
    pub fn adjugate(&self) -> Self {
        let m = &self.0;
        Quad2::new(m[1][1], -m[0][1], -m[1][0], m[0][0])
    }

    /// General inverse, `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(self.adjugate().scale(1.0 / d))
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = &self.0;
        Quad2::new(k * m[0][0], k * m[0][1], k * m[1][0], k * m[1][1])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a, &x| a.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn col(&self, j: usize) -> [f64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    /// Angle of a rotation block (meaningful only for rotations).
    pub fn rotation_angle(&self) -> f64 {
        self.0[1][0].atan2(self.0[0][0])
    }

    /// Distance from the nearest rotation, measured as `‖mᵀm − I‖_max`.
    pub fn rotation_defect(&self) -> f64 {
        (self.transpose() * *self - Quad2::IDENTITY).max_abs()
    }

    pub fn svd(&self) -> Svd2 {
        let m = &self.0;
        let e = 0.5 * (m[0][0] + m[1][1]);
        let f = 0.5 * (m[0][0] - m[1][1]);
        let g = 0.5 * (m[1][0] + m[0][1]);
        let h = 0.5 * (m[1][0] - m[0][1]);
        let q = e.hypot(h);
        let r = f.hypot(g);
        let a1 = g.atan2(f);
        let a2 = h.atan2(e);
        Svd2 {
            left: 0.5 * (a2 + a1),
            s0: q + r,
            s1: q - r,
            right: 0.5 * (a2 - a1),
        }
    }

    /// Largest singular value.
    pub fn norm2(&self) -> f64 {
        self.svd().s0
    }
}

impl Svd2 {
    pub fn rebuild(&self) -> Quad2 {
        Quad2::rotation(self.left) * Quad2::diag(self.s0, self.s1) * Quad2::rotation(self.right)
    }
}

impl Mul for Quad2 {
    type Output = Quad2;
    fn mul(self, o: Quad2) -> Quad2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Quad2(r)
    }
}

impl Add for Quad2 {
    type Output = Quad2;
    fn add(self, o: Quad2) -> Quad2 {
        let (a, b) = (&self.0, &o.0);
        Quad2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Quad2 {
    type Output = Quad2;
    fn sub(self, o: Quad2) -> Quad2 {
        self + (-o)
    }
}

impl Neg for Quad2 {
    type Output = Quad2;
    fn neg(self) -> Quad2 {
        self.scale(-1.0)
    }
}

pub fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

pub fn angle(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0])
}

/// Unit-determinant block sending the nonzero vector `from` to `to`.
pub fn sl2_mapping(from: [f64; 2], to: [f64; 2]) -> Quad2 {
    Quad2::rotation(angle(to)) * Quad2::squeeze(norm(to) / norm(from)) * Quad2::rotation(-angle(from))
}

/// Eigenvalues of a symmetric 4×4 matrix by cyclic Jacobi sweeps.
pub fn sym_eigenvalues4(mut a: [[f64; 4]; 4]) -> [f64; 4] {
    for _ in 0..60 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..4).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    [a[0][0], a[1][1], a[2][2], a[3][3]]
}
