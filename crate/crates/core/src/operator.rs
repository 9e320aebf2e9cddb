//! Dense complex matrices and the validated operator types built on them.
//!
//! Everything here is sized for the handful of qubits the rest of the crate
//! works with (dimension at most [`MAX_DIM`]). Storage is row-major.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 64;

/// Elementwise tolerance for Hermiticity, idempotence and trace checks.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Tolerance for spectral statements (eigenvalue signs, reconstruction, rank).
pub const SPECTRAL_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// Wire form: separate real and imaginary row arrays.
#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl From<ComplexMatrix> for RawMatrix {
    fn from(m: ComplexMatrix) -> Self {
        let (re, im) = m.split_parts();
        RawMatrix {
            rows: m.rows,
            cols: m.cols,
            re,
            im,
        }
    }
}

impl TryFrom<RawMatrix> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawMatrix) -> Result<Self> {
        let m = ComplexMatrix::from_parts(&raw.re, &raw.im)?;
        if m.rows != raw.rows || m.cols != raw.cols {
            return Err(Error::invalid(format!(
                "declared shape {}x{} does not match data {}x{}",
                raw.rows, raw.cols, m.rows, m.cols
            )));
        }
        Ok(m)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from complex rows. Rejects ragged input and non-finite entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::invalid("matrix has no rows"));
        }
        let ncols = rows[0].len();
        if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("matrix rows are empty or ragged"));
        }
        let data: Vec<C64> = rows.iter().flatten().copied().collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Builds a matrix from separate real and imaginary row arrays of equal shape.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        if re.len() != im.len() || re.iter().zip(im).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::invalid("real and imaginary parts differ in shape"));
        }
        let rows: Vec<Vec<C64>> = re
            .iter()
            .zip(im)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Outer product `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn split_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let re = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)].re).collect())
            .collect();
        let im = (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)].im).collect())
            .collect();
        (re, im)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, k: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise deviation from Hermiticity, `max |M - M^dagger|`.
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    pub fn commutes_with(&self, other: &ComplexMatrix, tol: f64) -> bool {
        commutator(self, other)
            .map(|c| c.max_abs() <= tol)
            .unwrap_or(false)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * v[c]).sum())
            .collect()
    }

    /// Product of a list of square matrices, left to right.
    pub fn product<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<Self> {
        let mut iter = factors.into_iter();
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, m| &acc * m))
    }

    fn check_finite(&self) -> Result<()> {
        if self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("matrix has non-finite entries"))
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs.data[k * rhs.cols + c];
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

fn require_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "{what} must be square, got {}x{}",
            m.rows, m.cols
        )));
    }
    if m.rows == 0 || m.rows > MAX_DIM {
        return Err(Error::invalid(format!(
            "{what} dimension {} outside 1..={MAX_DIM}",
            m.rows
        )));
    }
    Ok(())
}

fn require_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    require_square(a, "left operand")?;
    require_square(b, "right operand")?;
    if a.rows != b.rows {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.rows, b.rows
        )));
    }
    Ok(())
}

/// Kronecker product. The first factor indexes the slow (outer) block.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_square(a, "left factor")?;
    require_square(b, "right factor")?;
    let (n, m) = (a.rows, b.rows);
    if n * m > MAX_DIM {
        return Err(Error::invalid(format!(
            "tensor product dimension {} exceeds {MAX_DIM}",
            n * m
        )));
    }
    Ok(ComplexMatrix::from_fn(n * m, n * m, |r, c| {
        a[(r / m, c / m)] * b[(r % m, c % m)]
    }))
}

/// Kronecker product of a list, first element outermost.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Result<ComplexMatrix> {
    let mut iter = factors.into_iter();
    let first = iter
        .next()
        .ok_or_else(|| Error::invalid("empty tensor product"))?
        .clone();
    iter.try_fold(first, |acc, m| tensor_product(&acc, m))
}

/// `ab + ba`, without the conventional factor of one half.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_same_dim(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// `ab - ba`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    require_same_dim(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(values) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::diagonal(
            &self
                .values
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        );
        &(&self.vectors * &d) * &self.vectors.adjoint()
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization of a Hermitian matrix.
///
/// Rotations are applied in the fixed row-major order `(p, q)`, `p < q`, so
/// repeated calls on the same input give bit-identical results.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    require_square(m, "matrix")?;
    m.check_finite()?;
    let herr = m.hermiticity_error();
    if herr > SPECTRAL_TOL {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (max |M - M^dagger| = {herr:e})"
        )));
    }
    let n = m.rows;
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let threshold = (f64::EPSILON * scale).powi(2);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence(MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// One complex Jacobi rotation zeroing `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let phase = apq / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows;
    let pc = phase.conj();

    // Columns: v_p = c e_p - s conj(phase) e_q, v_q = s e_p + c conj(phase) e_q.
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * pc * s;
        a[(k, q)] = akp * s + akq * pc * c;
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * pc * s;
        v[(k, q)] = vkp * s + vkq * pc * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * phase * s;
        a[(q, k)] = apk * s + aqk * phase * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(app - t * g, 0.0);
    a[(q, q)] = C64::new(aqq + t * g, 0.0);
}

/// Trace-one positive-semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        DensityMatrix::new(m)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.matrix
    }
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        require_square(&matrix, "density matrix")?;
        matrix.check_finite()?;
        let herr = matrix.hermiticity_error();
        if herr > STRUCTURAL_TOL {
            return Err(Error::Invariant {
                invariant: "Hermitian",
                detail: format!("max |rho - rho^dagger| = {herr:e}"),
            });
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > STRUCTURAL_TOL {
            return Err(Error::Invariant {
                invariant: "trace = 1",
                detail: format!("trace = {:.15}", tr.re),
            });
        }
        let min = hermitian_eigen(&matrix)?.min();
        if min < -SPECTRAL_TOL {
            return Err(Error::Invariant {
                invariant: "positive semidefinite",
                detail: format!("minimum eigenvalue {min:e}"),
            });
        }
        Ok(DensityMatrix {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Normalizes a positive operator to unit trace before validating it.
    pub fn from_unnormalized(m: &ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::invalid("operator has non-positive trace"));
        }
        Self::new(m.hermitian_part().scale_real(1.0 / tr))
    }

    /// `|psi><psi|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        Self::from_unnormalized(&ComplexMatrix::outer(psi, psi))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityMatrix {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix {
            matrix: tensor_product(&self.matrix, &other.matrix)?,
        })
    }

    /// Conjugation by a unitary, `U rho U^dagger`.
    pub fn evolve(&self, unitary: &ComplexMatrix) -> Result<DensityMatrix> {
        require_same_dim(&self.matrix, unitary)?;
        DensityMatrix::new((&(unitary * &self.matrix) * &unitary.adjoint()).hermitian_part())
    }

    /// Reduced state of one factor of a bipartite `d1 x d2` system.
    pub fn partial_trace(&self, d1: usize, d2: usize, keep_first: bool) -> Result<DensityMatrix> {
        if d1 * d2 != self.dim() {
            return Err(Error::invalid(format!(
                "subsystem dimensions {d1}x{d2} do not match state dimension {}",
                self.dim()
            )));
        }
        let m = &self.matrix;
        let reduced = if keep_first {
            ComplexMatrix::from_fn(d1, d1, |r, c| {
                (0..d2).map(|k| m[(r * d2 + k, c * d2 + k)]).sum()
            })
        } else {
            ComplexMatrix::from_fn(d2, d2, |r, c| {
                (0..d1).map(|k| m[(k * d2 + r, k * d2 + c)]).sum()
            })
        };
        DensityMatrix::new(reduced)
    }

    /// Mixture `sum_k w_k rho_k`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
        let first = parts
            .first()
            .ok_or_else(|| Error::invalid("empty mixture"))?;
        let dim = first.1.dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if *w < 0.0 || rho.dim() != dim {
                return Err(Error::invalid("mixture weights must be non-negative and dimensions equal"));
            }
            acc = &acc + &rho.matrix.scale_real(*w);
        }
        DensityMatrix::new(acc)
    }

    /// Short stable fingerprint of the entries (FNV-1a over the IEEE bit patterns).
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for z in self.matrix.entries() {
            for x in [z.re, z.im] {
                for b in x.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x0100_0000_01b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

/// Hermitian idempotent matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    matrix: ComplexMatrix,
    rank: usize,
}

impl Projector {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        require_square(&matrix, "projector")?;
        matrix.check_finite()?;
        let herr = matrix.hermiticity_error();
        if herr > STRUCTURAL_TOL {
            return Err(Error::Invariant {
                invariant: "Hermitian",
                detail: format!("max |pi - pi^dagger| = {herr:e}"),
            });
        }
        let ierr = (&matrix * &matrix).max_abs_diff(&matrix);
        if ierr > STRUCTURAL_TOL {
            return Err(Error::Invariant {
                invariant: "idempotent",
                detail: format!("max |pi^2 - pi| = {ierr:e}"),
            });
        }
        let tr = matrix.trace().re;
        let rank = tr.round();
        if (tr - rank).abs() > SPECTRAL_TOL || rank < 1.0 {
            return Err(Error::Invariant {
                invariant: "trace = rank",
                detail: format!("trace {tr} is not a positive integer"),
            });
        }
        Ok(Projector {
            matrix: matrix.hermitian_part(),
            rank: rank as usize,
        })
    }

    /// Projector onto the span of orthonormal columns.
    pub fn onto(vectors: &[Vec<C64>]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::invalid("projector needs at least one vector"))?;
        let n = first.len();
        let mut acc = ComplexMatrix::zeros(n, n);
        for v in vectors {
            acc = &acc + &ComplexMatrix::outer(v, v);
        }
        Self::new(acc)
    }

    pub fn identity(dim: usize) -> Self {
        Projector {
            matrix: ComplexMatrix::identity(dim),
            rank: dim,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    /// `1 - pi`. Fails for the identity, whose complement is zero.
    pub fn complement(&self) -> Result<Projector> {
        Projector::new(&ComplexMatrix::identity(self.dim()) - &self.matrix)
    }

    pub fn tensor(&self, other: &Projector) -> Result<Projector> {
        Ok(Projector {
            matrix: tensor_product(&self.matrix, &other.matrix)?,
            rank: self.rank * other.rank,
        })
    }

    /// The normalized state `pi / rank`.
    pub fn as_state(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.matrix.scale_real(1.0 / self.rank as f64),
        }
    }

    pub fn commutes_with(&self, other: &Projector) -> bool {
        self.matrix.commutes_with(&other.matrix, STRUCTURAL_TOL)
    }
}

/// `Tr(rho * op)`.
pub fn expectation(state: &DensityMatrix, op: &ComplexMatrix) -> Result<C64> {
    require_same_dim(state.matrix(), op)?;
    let rho = state.matrix();
    let n = rho.rows;
    let mut acc = ZERO;
    for r in 0..n {
        for k in 0..n {
            acc += rho[(r, k)] * op[(k, r)];
        }
    }
    Ok(acc)
}

/// Real part of `Tr(rho * op)` for a Hermitian `op`.
pub fn expectation_real(state: &DensityMatrix, op: &ComplexMatrix) -> Result<f64> {
    Ok(expectation(state, op)?.re)
}
