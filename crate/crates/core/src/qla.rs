//! Dense complex linear algebra for small quantum registers.
//!
//! Parties are laid out in Kronecker order: for local dimensions
//! `[d0, d1, .., dn]` the joint basis index is `sum_k digit_k * stride_k`
//! with party 0 the most significant digit. All entropies are in bits.

use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Eigenvalues down to this (negative) value are treated as numerical zero.
pub const PSD_TOLERANCE: f64 = 1e-9;
/// Allowed deviation of a density matrix trace from one.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Elementwise tolerance on `|m - m^dagger|`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid("matrix dimensions must be positive");
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
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

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Real matrix from row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// The outer product `|psi><psi|`.
    pub fn projector(psi: &[Complex64]) -> Self {
        let n = psi.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = psi[i] * psi[j].conj();
            }
        }
        m
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

    /// Row-major entries.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest elementwise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest elementwise modulus of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigenvalues of a Hermitian operator, sorted in descending order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Number of eigenvalues strictly above `threshold`.
    pub fn count_above(&self, threshold: f64) -> usize {
        self.0.iter().filter(|&&x| x > threshold).count()
    }

    /// Von Neumann entropy of a density-matrix spectrum, in bits.
    pub fn entropy(&self) -> Result<f64> {
        entropy_from_eigenvalues(&self.0)
    }
}

/// Discrete probability distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() {
            return invalid("probability vector is empty");
        }
        if let Some(p) = probabilities
            .iter()
            .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
        {
            return invalid(format!("probability {p} outside [0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("probabilities sum to {total}, not 1"));
        }
        Ok(Self(probabilities))
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.0
    }
}

/// `x log2 x` with `0 log 0 = 0`.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// `-sum x log2 x` over a density spectrum; tiny negative eigenvalues are clamped.
pub fn entropy_from_eigenvalues(eigenvalues: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &x in eigenvalues {
        if x < -PSD_TOLERANCE {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {x:e}")));
        }
        s -= xlog2x(x.max(0.0));
    }
    Ok(s.max(0.0))
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_layout(rho: &ComplexMatrix, dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return invalid("local dimensions must be a nonempty list of positive integers");
    }
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.rows() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: rho.rows().max(rho.cols()),
        });
    }
    Ok(total)
}

fn normalized_party_set(parties: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut set = parties.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() {
        return invalid("party set is empty");
    }
    if let Some(&p) = set.iter().find(|&&p| p >= n) {
        return invalid(format!("party index {p} out of range for {n} parties"));
    }
    Ok(set)
}

/// Reduced operator on the parties in `keep`, ordered by ascending party index.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total = check_layout(rho, dims)?;
    let keep = normalized_party_set(keep, dims.len())?;
    if keep.len() == dims.len() {
        return Ok(rho.clone());
    }
    let stride = strides(dims);
    let kept_dims: Vec<usize> = keep.iter().map(|&p| dims[p]).collect();
    let kept_stride = strides(&kept_dims);
    let dk: usize = kept_dims.iter().product();
    let dt = total / dk;

    // Bucket every joint index by its traced-out digits.
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for idx in 0..total {
        let mut k = 0;
        let mut t = 0;
        let mut ki = 0;
        for (p, (&d, &s)) in dims.iter().zip(&stride).enumerate() {
            let digit = (idx / s) % d;
            if ki < keep.len() && keep[ki] == p {
                k += digit * kept_stride[ki];
                ki += 1;
            } else {
                t = t * d + digit;
            }
        }
        groups[t].push((idx, k));
    }

    let mut out = ComplexMatrix::zeros(dk, dk);
    for group in &groups {
        for &(i, ki) in group {
            for &(j, kj) in group {
                out[(ki, kj)] += rho[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transpose of the tensor factor belonging to `party`.
pub fn partial_transpose(rho: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    let total = check_layout(rho, dims)?;
    if party >= dims.len() {
        return invalid(format!("party index {party} out of range"));
    }
    let s = strides(dims)[party];
    let d = dims[party];
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let dr = (r / s) % d;
        for c in 0..total {
            let dc = (c / s) % d;
            let r2 = r - dr * s + dc * s;
            let c2 = c - dc * s + dr * s;
            out[(r2, c2)] = rho[(r, c)];
        }
    }
    Ok(out)
}

/// Reorders tensor factors: party `j` of the result is party `order[j]` of the input.
pub fn permute_parties(rho: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let total = check_layout(rho, dims)?;
    let n = dims.len();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
        return invalid(format!("{order:?} is not a permutation of {n} parties"));
    }
    if order.iter().enumerate().all(|(j, &p)| j == p) {
        return Ok(rho.clone());
    }
    let old_stride = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    let new_stride = strides(&new_dims);
    let map: Vec<usize> = (0..total)
        .map(|idx| {
            order
                .iter()
                .zip(&new_stride)
                .map(|(&p, &ns)| ((idx / old_stride[p]) % dims[p]) * ns)
                .sum()
        })
        .collect();
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        for c in 0..total {
            out[(map[r], map[c])] = rho[(r, c)];
        }
    }
    Ok(out)
}

fn check_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOLERANCE || defect.is_nan() {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Eigenvalues of a matrix assumed Hermitian, descending. No validation.
pub(crate) fn hermitian_eigenvalues_unchecked(m: &ComplexMatrix) -> Vec<f64> {
    let mut values = match m.rows() {
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)];
            let mean = 0.5 * (a + d);
            let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            vec![mean + radius, mean - radius]
        }
        _ => m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect(),
    };
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

pub fn hermitian_spectrum(m: &ComplexMatrix) -> Result<Spectrum> {
    check_hermitian(m)?;
    Ok(Spectrum(hermitian_eigenvalues_unchecked(m)))
}

/// Spectral decomposition `m = V diag(values) V^dagger`, values descending and the
/// columns of `V` the matching orthonormal eigenvectors.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Spectrum, ComplexMatrix)> {
    check_hermitian(m)?;
    let eig = SymmetricEigen::new(m.to_nalgebra());
    let n = m.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let sorted = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((Spectrum(values), ComplexMatrix::from_nalgebra(&sorted)))
}

/// Checks Hermiticity, positivity and unit trace; returns the spectrum.
pub fn density_spectrum(rho: &ComplexMatrix) -> Result<Spectrum> {
    let spectrum = hermitian_spectrum(rho)?;
    if let Some(&low) = spectrum.0.last() {
        if low < -PSD_TOLERANCE {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {low:e}")));
        }
    }
    let trace: f64 = spectrum.0.iter().sum();
    if (trace - 1.0).abs() > TRACE_TOLERANCE {
        return Err(Error::NotDensityMatrix(format!("trace {trace} differs from 1")));
    }
    Ok(spectrum)
}

/// `S(rho) = -tr(rho log2 rho)`.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    density_spectrum(rho)?.entropy()
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    -p.0.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// `h(e) = -e log2 e - (1-e) log2 (1-e)`.
pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return invalid(format!("binary entropy argument {e} outside [0, 1]"));
    }
    Ok(-xlog2x(e) - xlog2x(1.0 - e))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_spectrum(m)?.0.iter().map(|x| x.abs()).sum())
}
