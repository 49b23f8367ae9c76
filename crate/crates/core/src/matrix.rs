//! Dense real symmetric matrices with small brute-force spectral routines.
//!
//! These routines exist to cross-check closed-form eigenvalue and determinant
//! expressions, so they favor simplicity and verifiability over speed: a
//! cyclic Jacobi sweep for eigenvalues and Gaussian elimination with partial
//! pivoting for determinants.

use crate::error::{Error, Result};

/// Largest dimension accepted by [`max_eigenvalue`].
pub const MAX_EIGEN_DIM: usize = 128;
/// Largest dimension accepted by [`det_bruteforce`].
pub const MAX_DET_DIM: usize = 12;

/// Hard ceiling for the internal Jacobi routine; the joint-space verifier
/// diagonalizes operators slightly above the public [`MAX_EIGEN_DIM`] cap.
const JACOBI_DIM_CAP: usize = 256;
const JACOBI_MAX_SWEEPS: usize = 64;
const JACOBI_OFF_NORM_TOL: f64 = 1e-12;

/// A real symmetric matrix stored densely in row-major order.
///
/// Symmetry is enforced structurally: every mutation writes both `(i, j)` and
/// `(j, i)`, so stored entries are always bitwise mirror-equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of the given dimension (`dim >= 1`).
    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("matrix dimension must be >= 1"));
        }
        Ok(SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        })
    }

    /// Identity matrix of the given dimension.
    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = SymMatrix::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        Ok(m)
    }

    /// Build from a generator evaluated on the upper triangle (`i <= j`) and
    /// mirrored, guaranteeing exact symmetry.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = SymMatrix::zeros(dim)?;
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Add `v` to both `(i, j)` and `(j, i)` (only once on the diagonal).
    pub fn add_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] += v;
        if i != j {
            self.data[j * self.dim + i] += v;
        }
    }

    /// In-place `self += c * other`.
    pub fn add_scaled(&mut self, other: &SymMatrix, c: f64) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
        Ok(())
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Symmetric conjugation product `p * self * p` for matching dimensions.
    pub fn sandwich(&self, p: &SymMatrix) -> Result<SymMatrix> {
        if self.dim != p.dim {
            return Err(Error::domain(format!(
                "dimension mismatch: {} vs {}",
                self.dim, p.dim
            )));
        }
        let n = self.dim;
        // t = self * p
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    t[i * n + j] += a * p.data[k * n + j];
                }
            }
        }
        // r = p * t, symmetrized against roundoff drift
        let mut r = SymMatrix::zeros(n)?;
        for i in 0..n {
            for k in 0..n {
                let a = p.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    r.data[i * n + j] += a * t[k * n + j];
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (r.data[i * n + j] + r.data[j * n + i]);
                r.data[i * n + j] = v;
                r.data[j * n + i] = v;
            }
        }
        Ok(r)
    }

    fn off_diagonal_norm(data: &[f64], n: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = data[i * n + j];
                s += 2.0 * v * v;
            }
        }
        s.sqrt()
    }
}

/// Largest eigenvalue of a symmetric matrix via cyclic Jacobi rotations.
///
/// Iterates full sweeps until the off-diagonal Frobenius norm falls below
/// `1e-12 * max(1, ||A||_F)`, which pins the returned eigenvalue to within
/// `1e-10` absolute for the moderately scaled matrices used here. Dimensions
/// above [`MAX_EIGEN_DIM`] are rejected.
pub fn max_eigenvalue(m: &SymMatrix) -> Result<f64> {
    if m.dim > MAX_EIGEN_DIM {
        return Err(Error::resource(format!(
            "max_eigenvalue supports dim <= {MAX_EIGEN_DIM}, got {}",
            m.dim
        )));
    }
    jacobi_max_eigenvalue(m)
}

/// Jacobi driver shared with the joint-space verifier, which needs slightly
/// larger operators than the public entry point admits.
pub(crate) fn jacobi_max_eigenvalue(m: &SymMatrix) -> Result<f64> {
    let n = m.dim;
    if n > JACOBI_DIM_CAP {
        return Err(Error::resource(format!(
            "jacobi eigensolver supports dim <= {JACOBI_DIM_CAP}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(m.data[0]);
    }
    let mut a = m.data.clone();
    let tol = JACOBI_OFF_NORM_TOL * m.frobenius_norm().max(1.0);

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if SymMatrix::off_diagonal_norm(&a, n) <= tol {
            let max = a
                .iter()
                .step_by(n + 1)
                .take(n)
                .fold(f64::NEG_INFINITY, |acc, &d| acc.max(d));
            return Ok(max);
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a[j * n + p];
                    let ajq = a[j * n + q];
                    let new_jp = ajp - s * (ajq + tau * ajp);
                    let new_jq = ajq + s * (ajp - tau * ajq);
                    a[j * n + p] = new_jp;
                    a[p * n + j] = new_jp;
                    a[j * n + q] = new_jq;
                    a[q * n + j] = new_jq;
                }
            }
        }
    }

    Err(Error::numeric(format!(
        "jacobi eigensolver did not converge within {JACOBI_MAX_SWEEPS} sweeps (dim {n})"
    )))
}

/// Determinant by Gaussian elimination with partial pivoting.
///
/// Intended as an independent oracle for closed-form determinant identities,
/// so the dimension is capped at [`MAX_DET_DIM`].
pub fn det_bruteforce(m: &SymMatrix) -> Result<f64> {
    if m.dim > MAX_DET_DIM {
        return Err(Error::resource(format!(
            "det_bruteforce supports dim <= {MAX_DET_DIM}, got {}",
            m.dim
        )));
    }
    let n = m.dim;
    let mut a = m.data.clone();
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].abs();
        for r in (col + 1)..n {
            let mag = a[r * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag == 0.0 {
            return Ok(0.0);
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det *= pivot;
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= factor * a[col * n + j];
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_is_symmetric() {
        // An asymmetric generator is mirrored off the upper triangle.
        let m = SymMatrix::from_fn(4, |i, j| (3 * i + j) as f64).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(SymMatrix::zeros(0), Err(Error::Domain(_))));
    }

    #[test]
    fn eigenvalue_of_identity_and_diagonal() {
        let id = SymMatrix::identity(5).unwrap();
        assert!((max_eigenvalue(&id).unwrap() - 1.0).abs() < 1e-12);

        let mut d = SymMatrix::zeros(3).unwrap();
        d.set(0, 0, -4.0);
        d.set(1, 1, 2.5);
        d.set(2, 2, 1.0);
        assert!((max_eigenvalue(&d).unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_of_all_ones_matrix() {
        // Rank-one all-ones matrix has spectrum {d, 0, ..., 0}.
        let m = SymMatrix::from_fn(6, |_, _| 1.0).unwrap();
        assert!((max_eigenvalue(&m).unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn eigenvalue_of_two_by_two_with_known_spectrum() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let mut m = SymMatrix::zeros(2).unwrap();
        m.set(0, 0, 2.0);
        m.set(0, 1, 1.0);
        m.set(1, 1, 2.0);
        assert!((max_eigenvalue(&m).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_dimension_cap() {
        let m = SymMatrix::identity(MAX_EIGEN_DIM + 1).unwrap();
        assert!(matches!(max_eigenvalue(&m), Err(Error::Resource(_))));
    }

    #[test]
    fn determinant_reference_values() {
        assert!((det_bruteforce(&SymMatrix::identity(4).unwrap()).unwrap() - 1.0).abs() < 1e-12);

        let mut d = SymMatrix::zeros(2).unwrap();
        d.set(0, 0, 2.0);
        d.set(1, 1, 3.0);
        assert!((det_bruteforce(&d).unwrap() - 6.0).abs() < 1e-12);

        // [[3, 1], [1, 2]] -> 5.
        let mut m = SymMatrix::zeros(2).unwrap();
        m.set(0, 0, 3.0);
        m.set(0, 1, 1.0);
        m.set(1, 1, 2.0);
        assert!((det_bruteforce(&m).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_of_singular_matrix_is_zero() {
        let m = SymMatrix::from_fn(3, |_, _| 1.0).unwrap();
        assert_eq!(det_bruteforce(&m).unwrap(), 0.0);
    }

    #[test]
    fn determinant_dimension_cap() {
        let m = SymMatrix::identity(MAX_DET_DIM + 1).unwrap();
        assert!(matches!(det_bruteforce(&m), Err(Error::Resource(_))));
    }

    #[test]
    fn sandwich_with_identity_is_identity_map() {
        let m = SymMatrix::from_fn(4, |i, j| ((i + 1) * (j + 2)) as f64).unwrap();
        let id = SymMatrix::identity(4).unwrap();
        let r = m.sandwich(&id).unwrap();
        assert!(r.max_abs_diff(&m).unwrap() < 1e-12);
    }
}
