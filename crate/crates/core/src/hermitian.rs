//! 3x3 Hermitian matrices and a dedicated Jacobi eigensolver.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

/// Lower-triangle slots: (1,0), (2,0), (2,1), 0-based.
const LOWER: [(usize, usize); 3] = [(1, 0), (2, 0), (2, 1)];

/// A 3x3 Hermitian matrix stored as three real diagonal entries and the
/// three strictly-lower entries. The upper triangle is derived by conjugation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hermitian3 {
    pub diag: [f64; 3],
    /// Entries (1,0), (2,0), (2,1).
    pub lower: [Complex64; 3],
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct Eigen3 {
    pub values: [f64; 3],
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: [[Complex64; 3]; 3],
}

impl Hermitian3 {
    pub const ZERO: Hermitian3 = Hermitian3 {
        diag: [0.0; 3],
        lower: [Complex64 { re: 0.0, im: 0.0 }; 3],
    };

    pub fn identity() -> Self {
        Self::scaled_identity(1.0)
    }

    pub fn scaled_identity(s: f64) -> Self {
        Hermitian3 {
            diag: [s; 3],
            ..Self::ZERO
        }
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        Hermitian3 {
            diag: d,
            ..Self::ZERO
        }
    }

    /// Entry `(i, j)`, 0-based.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match (i, j) {
            _ if i == j => Complex64::new(self.diag[i], 0.0),
            (1, 0) => self.lower[0],
            (2, 0) => self.lower[1],
            (2, 1) => self.lower[2],
            _ => self.get(j, i).conj(),
        }
    }

    pub fn to_array(&self) -> [[Complex64; 3]; 3] {
        let mut a = [[Complex64::default(); 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        a
    }

    /// Reads the lower triangle and the real part of the diagonal.
    pub fn from_array(a: &[[Complex64; 3]; 3]) -> Self {
        Hermitian3 {
            diag: [a[0][0].re, a[1][1].re, a[2][2].re],
            lower: LOWER.map(|(i, j)| a[i][j]),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.diag.iter().all(|d| d.is_finite())
            && self
                .lower
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Frobenius inner product `tr(A B)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Hermitian3) -> f64 {
        let d: f64 = self.diag.iter().zip(&other.diag).map(|(a, b)| a * b).sum();
        let l: f64 = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        d + 2.0 * l
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self)
    }

    /// `A + s I`.
    pub fn shift(mut self, s: f64) -> Self {
        for d in &mut self.diag {
            *d += s;
        }
        self
    }

    /// Rank-one matrix `s v v^H`.
    pub fn outer(v: &[Complex64; 3], s: f64) -> Self {
        Hermitian3 {
            diag: [0, 1, 2].map(|i| s * v[i].norm_sqr()),
            lower: LOWER.map(|(i, j)| v[i] * v[j].conj() * s),
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::default(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.get(i, j) * v[j]).sum();
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let a = self.to_array();
        let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
        det.re
    }

    pub fn eigen(&self) -> Eigen3 {
        jacobi_eigen(self)
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        self.eigen().values
    }

    /// Frobenius-nearest negative semidefinite matrix: positive eigenvalues
    /// are clamped to zero.
    pub fn project_nsd(&self) -> Hermitian3 {
        let eig = self.eigen();
        let positive = eig.values.iter().filter(|&&v| v > 0.0).count();
        match positive {
            0 => *self,
            3 => Hermitian3::ZERO,
            // Subtract the positive part when it is the smaller sum; either
            // way the result only depends on eigenspaces.
            1 => {
                let mut out = *self;
                for (v, vec) in eig.values.iter().zip(&eig.vectors) {
                    if *v > 0.0 {
                        out = out - Hermitian3::outer(vec, *v);
                    }
                }
                out
            }
            _ => {
                let mut out = Hermitian3::ZERO;
                for (v, vec) in eig.values.iter().zip(&eig.vectors) {
                    if *v < 0.0 {
                        out += Hermitian3::outer(vec, *v);
                    }
                }
                out
            }
        }
    }
}

impl Add for Hermitian3 {
    type Output = Hermitian3;
    fn add(mut self, rhs: Hermitian3) -> Hermitian3 {
        self += rhs;
        self
    }
}

impl AddAssign for Hermitian3 {
    fn add_assign(&mut self, rhs: Hermitian3) {
        for i in 0..3 {
            self.diag[i] += rhs.diag[i];
            self.lower[i] += rhs.lower[i];
        }
    }
}

impl Sub for Hermitian3 {
    type Output = Hermitian3;
    fn sub(self, rhs: Hermitian3) -> Hermitian3 {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Hermitian3 {
    type Output = Hermitian3;
    fn mul(self, s: f64) -> Hermitian3 {
        Hermitian3 {
            diag: self.diag.map(|d| d * s),
            lower: self.lower.map(|z| z * s),
        }
    }
}

const MAX_SWEEPS: usize = 32;
const PIVOTS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Cyclic complex Jacobi. Each pivot first rotates the phase of column `q`
/// so the pivot becomes real, then applies a real Givens rotation.
fn jacobi_eigen(m: &Hermitian3) -> Eigen3 {
    let mut a = m.to_array();
    let mut v = [[Complex64::default(); 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    let scale = m.norm_sqr().sqrt();
    if scale > 0.0 {
        let threshold = f64::EPSILON * scale * 1e-2;
        for _ in 0..MAX_SWEEPS {
            let off = (a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr()).sqrt();
            if off <= threshold {
                break;
            }
            for &(p, q) in &PIVOTS {
                let h = a[p][q].norm();
                if h <= threshold * 1e-3 {
                    continue;
                }
                // column q *= conj(phase), row q *= phase
                let phase = a[p][q] / h;
                let dq = phase.conj();
                for k in 0..3 {
                    a[k][q] *= dq;
                    v[k][q] *= dq;
                }
                for z in a[q].iter_mut() {
                    *z *= phase;
                }
                a[q][q] = Complex64::new(a[q][q].re, 0.0);
                a[p][q] = Complex64::new(h, 0.0);
                a[q][p] = Complex64::new(h, 0.0);

                let theta = (a[q][q].re - a[p][p].re) / (2.0 * h);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..3 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = akp * c - akq * s;
                    a[k][q] = akp * s + akq * c;
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = vkp * c - vkq * s;
                    v[k][q] = vkp * s + vkq * c;
                }
                let (rp, rq) = (a[p], a[q]);
                a[p] = std::array::from_fn(|k| rp[k] * c - rq[k] * s);
                a[q] = std::array::from_fn(|k| rp[k] * s + rq[k] * c);
                a[p][q] = Complex64::default();
                a[q][p] = Complex64::default();
                a[p][p].im = 0.0;
                a[q][q].im = 0.0;
            }
        }
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].re.total_cmp(&a[j][j].re));
    Eigen3 {
        values: order.map(|i| a[i][i].re),
        vectors: order.map(|i| [v[0][i], v[1][i], v[2][i]]),
    }
}
