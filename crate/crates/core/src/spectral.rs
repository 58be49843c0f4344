//! Dense symmetric linear algebra: square matrices, cyclic-Jacobi
//! eigendecomposition, condition numbers, the combined metric g(c) = F² + cF,
//! and Frobenius norms. Everything here targets small (≤ 10×10) matrices.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::{Error, Result};

/// Relative tolerance for the symmetry check on eigendecomposition input.
const SYMMETRY_TOL: f64 = 1e-10;
/// Convergence threshold for Jacobi sweeps, relative to the Frobenius norm.
const JACOBI_OFF_TOL: f64 = 1e-14;
/// Hard cap on Jacobi sweeps before reporting non-convergence.
const JACOBI_MAX_SWEEPS: usize = 100;
/// A spectrum counts as numerically singular below this relative floor.
pub const COND_FLOOR: f64 = 1e-10;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.n + j] = x;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "vector length {} does not match dimension {}",
                x.len(),
                self.n
            )));
        }
        Ok((0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect())
    }

    /// self + scale·other.
    pub fn add_scaled(&self, other: &Matrix, scale: f64) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::Dimension("matrix sizes differ".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Largest absolute difference |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        self.asymmetry() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

// Serialized as a list of rows so reports stay readable.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = self.rows();
        let mut seq = serializer.serialize_seq(Some(rows.len()))?;
        for row in rows {
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Square root of the sum of squared entries.
pub fn frobenius(a: &Matrix) -> f64 {
    a.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Eigenvalues (ascending) with paired orthonormal eigenvector columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl Spectrum {
    /// Builds a spectrum from parts, validating ascending order and
    /// orthonormality (used mainly by tests and synthetic inputs).
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Matrix) -> Result<Self> {
        if eigenvalues.len() != eigenvectors.dim() {
            return Err(Error::Dimension("eigenvalue/eigenvector count mismatch".into()));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("eigenvalues must be sorted ascending".into()));
        }
        let s = Self { eigenvalues, eigenvectors };
        if s.orthonormality_error() > 1e-10 {
            return Err(Error::Domain("eigenvector columns are not orthonormal".into()));
        }
        Ok(s)
    }

    /// Spectrum of a diagonal matrix with the given ascending entries.
    pub fn diagonal(eigenvalues: &[f64]) -> Result<Self> {
        let v = Matrix::identity(eigenvalues.len());
        Self::from_parts(eigenvalues.to_vec(), v)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Column k as a vector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|r| self.eigenvectors.get(r, k)).collect()
    }

    /// Max deviation of VᵀV from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let vtv = self
            .eigenvectors
            .transpose()
            .matmul(&self.eigenvectors)
            .expect("square by construction");
        let mut worst = 0.0f64;
        for i in 0..vtv.dim() {
            for j in 0..vtv.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vtv.get(i, j) - target).abs());
            }
        }
        worst
    }

    /// VΛVᵀ.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.eigenvectors.get(i, k)
                        * self.eigenvalues[k]
                        * self.eigenvectors.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Groups eigenvalues into multiplets: values within `1e-9·max|λ|` of
    /// their neighbor share a group. Returns (mean value, multiplicity).
    pub fn multiplets(&self) -> Vec<(f64, usize)> {
        let scale = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
            .max(f64::MIN_POSITIVE);
        let tol = 1e-9 * scale;
        let mut groups: Vec<(f64, usize)> = Vec::new();
        let mut start = 0;
        for k in 1..=self.eigenvalues.len() {
            let split = k == self.eigenvalues.len()
                || self.eigenvalues[k] - self.eigenvalues[k - 1] > tol;
            if split {
                let slice = &self.eigenvalues[start..k];
                let mean = slice.iter().sum::<f64>() / slice.len() as f64;
                groups.push((mean, slice.len()));
                start = k;
            }
        }
        groups
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// `1e-14·‖A‖_F`; fails with a numeric error after 100 sweeps.
pub fn eig_sym(a: &Matrix) -> Result<Spectrum> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    if !a.is_symmetric(SYMMETRY_TOL) {
        return Err(Error::Domain(format!(
            "matrix is not symmetric: max |a_ij - a_ji| = {:.3e}",
            a.asymmetry()
        )));
    }

    let mut m = a.clone();
    // Work on the exact symmetric average so roundoff asymmetry cannot drift.
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, avg);
            m.set(j, i, avg);
        }
    }
    let mut v = Matrix::identity(n);
    let off_tol = JACOBI_OFF_TOL * frobenius(a);

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += 2.0 * m.get(p, q) * m.get(p, q);
            }
        }
        if off.sqrt() <= off_tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "Jacobi eigendecomposition did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).partial_cmp(&m.get(j, j)).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m.get(k, k)).collect();
    let mut vectors = Matrix::zeros(n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Fix the sign so the entry of largest magnitude is positive.
        let mut pivot = 0;
        for r in 1..n {
            if v.get(r, old_col).abs() > v.get(pivot, old_col).abs() {
                pivot = r;
            }
        }
        let sign = if v.get(pivot, old_col) < 0.0 { -1.0 } else { 1.0 };
        for r in 0..n {
            vectors.set(r, new_col, sign * v.get(r, old_col));
        }
    }

    Ok(Spectrum { eigenvalues, eigenvectors: vectors })
}

/// One Jacobi rotation zeroing m[p][q], accumulated into v.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (m.get(q, q) - m.get(p, p)) / (2.0 * apq);
    // tan of the rotation angle, smaller root for stability.
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let n = m.dim();
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    m.set(p, p, app - t * apq);
    m.set(q, q, aqq + t * apq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);
    for r in 0..n {
        if r != p && r != q {
            let arp = m.get(r, p);
            let arq = m.get(r, q);
            m.set(r, p, arp - s * (arq + tau * arp));
            m.set(p, r, m.get(r, p));
            m.set(r, q, arq + s * (arp - tau * arq));
            m.set(q, r, m.get(r, q));
        }
    }
    for r in 0..n {
        let vrp = v.get(r, p);
        let vrq = v.get(r, q);
        v.set(r, p, vrp - s * (vrq + tau * vrp));
        v.set(r, q, vrq + s * (vrp - tau * vrq));
    }
}

/// Condition number λ_max/λ_min of a numerically positive-definite spectrum.
pub fn cond(s: &Spectrum) -> Result<f64> {
    let lmax = s.lambda_max();
    let lmin = s.lambda_min();
    if lmax.is_nan() || lmax <= 0.0 || lmin <= COND_FLOOR * lmax {
        return Err(Error::Degenerate(format!(
            "condition number undefined for eigenvalue range [{lmin:.3e}, {lmax:.3e}]"
        )));
    }
    Ok(lmax / lmin)
}

/// Combined metric g(c) = F² + cF. Shares eigenvectors with F; its
/// eigenvalues are μ_k = λ_k(λ_k + c).
pub fn combined_metric(f: &Matrix, c: f64) -> Result<Matrix> {
    if c.is_nan() || c < 0.0 {
        return Err(Error::Domain(format!("combined metric requires c >= 0, got {c}")));
    }
    let ff = f.matmul(f)?;
    ff.add_scaled(f, c)
}

/// LU factorization with partial pivoting, for small dense solves.
pub(crate) struct LuFactor {
    lu: Matrix,
    perm: Vec<usize>,
    #[cfg_attr(not(test), allow(dead_code))]
    swaps: usize,
}

impl LuFactor {
    pub(crate) fn new(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let scale = lu.max_abs().max(f64::MIN_POSITIVE);
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if lu.get(r, col).abs() > lu.get(pivot, col).abs() {
                    pivot = r;
                }
            }
            if lu.get(pivot, col).abs() <= 1e-300 * scale {
                return Err(Error::Degenerate("singular matrix in LU factorization".into()));
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = lu.get(col, j);
                    lu.set(col, j, lu.get(pivot, j));
                    lu.set(pivot, j, tmp);
                }
                perm.swap(col, pivot);
                swaps += 1;
            }
            let d = lu.get(col, col);
            for r in col + 1..n {
                let factor = lu.get(r, col) / d;
                lu.set(r, col, factor);
                for j in col + 1..n {
                    lu.set(r, j, lu.get(r, j) - factor * lu.get(col, j));
                }
            }
        }
        Ok(Self { lu, perm, swaps })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.dim();
        if b.len() != n {
            return Err(Error::Dimension("right-hand side length mismatch".into()));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu.get(i, j) * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu.get(i, j) * x[j];
            }
            x[i] /= self.lu.get(i, i);
        }
        Ok(x)
    }

    pub(crate) fn inverse(&self) -> Result<Matrix> {
        let n = self.lu.dim();
        let mut inv = Matrix::zeros(n);
        for col in 0..n {
            let mut e = vec![0.0; n];
            e[col] = 1.0;
            let x = self.solve(&e)?;
            for (r, &val) in x.iter().enumerate() {
                inv.set(r, col, val);
            }
        }
        Ok(inv)
    }

    #[cfg(test)]
    pub(crate) fn det(&self) -> f64 {
        let sign = if self.swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        (0..self.lu.dim()).map(|i| self.lu.get(i, i)).product::<f64>() * sign
    }
}
