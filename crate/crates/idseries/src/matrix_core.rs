//! Dense real symmetric linear algebra at desk scale (d ≤ 200).
//!
//! Provides a cyclic Jacobi eigensolver, the dilation 𝔇(A) = [[0, A], [Aᵀ, 0]]
//! whose largest eigenvalue is the spectral norm ‖A‖, the series curvature
//! ρ = λ_max(Σ_k A_k²) for symmetric coefficients, and its rectangular
//! analogue ρ₁ = λ_max(Σ_k 𝔇(A_k)²) = max{λ_max(Σ A_kA_kᵀ), λ_max(Σ A_kᵀA_k)}.

use crate::error::{Error, Result};

const MODULE: &str = "matrix_core";

/// Dense rectangular real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::new(MODULE, "dim_mismatch", format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::new(MODULE, "dim_mismatch", "matrix entries must be finite"));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(Error::new(MODULE, "dim_mismatch", format!("cannot multiply {}x{} by {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn add_scaled(&mut self, other: &Mat, factor: f64) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::new(MODULE, "dim_mismatch", "shape mismatch in add_scaled"));
        }
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += factor * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for a in self.data.iter_mut() {
            *a *= factor;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Frobenius inner product A•B = Σ_ij A_ij B_ij.
    pub fn dot(&self, other: &Mat) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::new(MODULE, "dim_mismatch", "shape mismatch in dot"));
        }
        Ok(self.data.iter().zip(other.data.iter()).map(|(a, b)| a * b).sum())
    }

    /// Column-major stacking: entry (i, j) lands at index j*rows + i.
    pub fn vec_columns(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                v[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        v
    }

    /// Inverse of `vec_columns`: rebuilds the rows×cols matrix from a
    /// column-major stacked vector.
    pub fn unvec_columns(rows: usize, cols: usize, v: &[f64]) -> Result<Mat> {
        if v.len() != rows * cols {
            return Err(Error::new(MODULE, "dim_mismatch", format!("unvec needs {} entries, got {}", rows * cols, v.len())));
        }
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[i * cols + j] = v[j * rows + i];
            }
        }
        Ok(m)
    }
}

/// Symmetric matrix: a square [`Mat`] validated at construction so that
/// max |A_ij - A_ji| ≤ 1e-12·max(1, max|A_ij|).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: Mat,
}

impl SymMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::new(MODULE, "asymmetric", format!("{}x{} matrix is not square", m.rows, m.cols)));
        }
        let tol = 1e-12 * m.max_abs().max(1.0);
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if (m.get(i, j) - m.get(j, i)).abs() > tol {
                    return Err(Error::new(
                        MODULE,
                        "asymmetric",
                        format!("entry ({i},{j}) = {} vs ({j},{i}) = {}", m.get(i, j), m.get(j, i)),
                    ));
                }
            }
        }
        Ok(SymMatrix { m })
    }

    pub fn from_rows(d: usize, data: Vec<f64>) -> Result<Self> {
        SymMatrix::new(Mat::from_rows(d, d, data)?)
    }

    pub fn zeros(d: usize) -> Self {
        SymMatrix { m: Mat::zeros(d, d) }
    }

    pub fn identity(d: usize) -> Self {
        SymMatrix { m: Mat::identity(d) }
    }

    /// Builds (A + Aᵀ)/2 without the symmetry check, for cleaning up
    /// near-symmetric products.
    pub fn symmetrize(m: &Mat) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::new(MODULE, "asymmetric", "cannot symmetrize a non-square matrix"));
        }
        let mut s = Mat::zeros(m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                s.data[i * m.cols + j] = 0.5 * (m.get(i, j) + m.get(j, i));
            }
        }
        Ok(SymMatrix { m: s })
    }

    pub fn dim(&self) -> usize {
        self.m.rows
    }

    pub fn mat(&self) -> &Mat {
        &self.m
    }

    pub fn into_mat(self) -> Mat {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }
}

/// Full eigendecomposition A = V diag(λ) Vᵀ by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in descending order with matching eigenvector
/// columns; the sweep stops when the off-diagonal Frobenius mass drops to
/// 1e-14·‖A‖_F.
pub fn sym_eig(a: &SymMatrix) -> Result<(Vec<f64>, Mat)> {
    let (vals, vecs) = jacobi(a, true)?;
    Ok((vals, vecs.unwrap()))
}

/// Eigenvalues only (descending); skips eigenvector accumulation.
pub fn sym_eig_values(a: &SymMatrix) -> Result<Vec<f64>> {
    Ok(jacobi(a, false)?.0)
}

fn jacobi(a: &SymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Mat>)> {
    let n = a.dim();
    let mut m = a.m.clone();
    let mut v = if want_vectors { Some(Mat::identity(n)) } else { None };
    if n == 0 {
        return Err(Error::new(MODULE, "dim_mismatch", "empty matrix"));
    }
    let norm = m.frobenius_norm();
    let stop = 1e-14 * norm.max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let x = m.get(i, j);
                off += 2.0 * x * x;
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        let threshold = (off.sqrt() / (n * n) as f64).max(f64::MIN_POSITIVE);
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() < threshold * 1e-3 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m.get(k, p);
                    let mkq = m.get(k, q);
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k);
                    let mqk = m.get(q, k);
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm.get(k, p);
                        let vkq = vm.get(k, q);
                        vm.set(k, p, c * vkp - s * vkq);
                        vm.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap());
    let vals: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|vm| {
        let mut sorted = Mat::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for k in 0..n {
                sorted.set(k, new_col, vm.get(k, old_col));
            }
        }
        sorted
    });
    Ok((vals, vecs))
}

/// Largest eigenvalue of a symmetric matrix.
pub fn lambda_max(a: &SymMatrix) -> Result<f64> {
    Ok(sym_eig_values(a)?[0])
}

/// Applies f to the spectrum: V·diag(f(λ_i))·Vᵀ. Matrix square roots,
/// inverse square roots, and eigenvalue clamps are all instances.
pub fn sym_eig_transform(a: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    let (vals, v) = sym_eig(a)?;
    let n = a.dim();
    let mut out = Mat::zeros(n, n);
    for (k, &lam) in vals.iter().enumerate() {
        let flam = f(lam);
        if flam == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = v.get(i, k) * flam;
            if vik == 0.0 {
                continue;
            }
            for j in 0..n {
                let x = out.get(i, j) + vik * v.get(j, k);
                out.set(i, j, x);
            }
        }
    }
    SymMatrix::symmetrize(&out)
}

/// The symmetric dilation 𝔇(A) = [[0, A], [Aᵀ, 0]] of an M×N matrix;
/// λ_max(𝔇(A)) equals the largest singular value of A.
pub fn dilation(a: &Mat) -> SymMatrix {
    let (m, n) = (a.rows, a.cols);
    let mut d = Mat::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            let v = a.get(i, j);
            d.set(i, m + j, v);
            d.set(m + j, i, v);
        }
    }
    SymMatrix { m: d }
}

/// Spectral norm ‖A‖ = λ_max(𝔇(A)); for symmetric PSD input this equals
/// λ_max(A).
pub fn spectral_norm(a: &Mat) -> Result<f64> {
    lambda_max(&dilation(a))
}

/// Spectral norm of a symmetric matrix, max(λ_max, -λ_min), from one
/// eigenvalue pass without forming the dilation.
pub fn sym_spectral_norm(a: &SymMatrix) -> Result<f64> {
    let vals = sym_eig_values(a)?;
    Ok(vals[0].max(-vals[vals.len() - 1]))
}

/// Self-adjoint coefficients A_1..A_K of a matrix i.d. series, with the
/// derived curvature ρ = λ_max(Σ_k A_k²). Construction requires a common
/// dimension and λ_max(A_k) ≤ 1 + 1e-10 for every k.
#[derive(Debug, Clone)]
pub struct MatrixSeries {
    mats: Vec<SymMatrix>,
    d: usize,
    rho: f64,
}

impl MatrixSeries {
    pub fn new(mats: Vec<SymMatrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::new(MODULE, "empty_series", "a series needs at least one coefficient matrix"));
        }
        let d = mats[0].dim();
        for (k, a) in mats.iter().enumerate() {
            if a.dim() != d {
                return Err(Error::new(MODULE, "dim_mismatch", format!("coefficient {k} has dimension {} but the series is {d}-dimensional", a.dim())));
            }
            let lm = lambda_max(a)?;
            if lm > 1.0 + 1e-10 {
                return Err(Error::new(MODULE, "not_normalized", format!("lambda_max(A_{k}) = {lm} exceeds 1")));
            }
        }
        let mut sum_sq = Mat::zeros(d, d);
        for a in &mats {
            let sq = a.m.matmul(&a.m)?;
            sum_sq.add_scaled(&sq, 1.0)?;
        }
        let rho = lambda_max(&SymMatrix::symmetrize(&sum_sq)?)?.max(0.0);
        Ok(MatrixSeries { mats, d, rho })
    }

    pub fn coefficients(&self) -> &[SymMatrix] {
        &self.mats
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// ρ = λ_max(Σ_k A_k²).
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Σ_k x_k A_k for explicit coefficients x, the series value at a
    /// realized draw vector.
    pub fn combination(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.mats.len() {
            return Err(Error::new(MODULE, "dim_mismatch", format!("{} coefficients for a series of length {}", x.len(), self.mats.len())));
        }
        let mut s = Mat::zeros(self.d, self.d);
        for (xk, a) in x.iter().zip(self.mats.iter()) {
            s.add_scaled(&a.m, *xk)?;
        }
        Ok(SymMatrix { m: s })
    }
}

/// ρ of a series; identical to [`MatrixSeries::rho`], re-exported as a free
/// function for symmetry with `rect_series_rho1`.
pub fn series_rho(series: &MatrixSeries) -> f64 {
    series.rho()
}

/// Divides every coefficient by max_k λ_max(𝔇(A_k)) = max_k ‖A_k‖ so the
/// normalization precondition holds, returning the series and the scale.
pub fn normalize_series(mats: Vec<SymMatrix>) -> Result<(MatrixSeries, f64)> {
    if mats.is_empty() {
        return Err(Error::new(MODULE, "empty_series", "cannot normalize an empty series"));
    }
    let mut scale = 0.0f64;
    for a in &mats {
        scale = scale.max(sym_spectral_norm(a)?);
    }
    if !(scale > 0.0) {
        return Err(Error::new(MODULE, "not_normalized", "all coefficients are zero"));
    }
    let scaled = mats
        .into_iter()
        .map(|a| {
            let mut m = a.m;
            m.scale(1.0 / scale);
            SymMatrix { m }
        })
        .collect();
    Ok((MatrixSeries::new(scaled)?, scale))
}

/// ρ₁ = λ_max(Σ_k 𝔇(A_k)²) = max{λ_max(Σ A_kA_kᵀ), λ_max(Σ A_kᵀA_k)} for
/// rectangular M×N coefficients with ‖A_k‖ ≤ 1.
pub fn rect_series_rho1(mats: &[Mat]) -> Result<f64> {
    if mats.is_empty() {
        return Err(Error::new(MODULE, "empty_series", "rho1 of an empty series"));
    }
    let (m, n) = (mats[0].rows, mats[0].cols);
    let mut gram_left = Mat::zeros(m, m);
    let mut gram_right = Mat::zeros(n, n);
    for (k, a) in mats.iter().enumerate() {
        if a.rows != m || a.cols != n {
            return Err(Error::new(MODULE, "dim_mismatch", format!("coefficient {k} is {}x{}, expected {m}x{n}", a.rows, a.cols)));
        }
        let nrm = spectral_norm(a)?;
        if nrm > 1.0 + 1e-10 {
            return Err(Error::new(MODULE, "not_normalized", format!("norm of coefficient {k} is {nrm}, exceeds 1")));
        }
        let at = a.transpose();
        gram_left.add_scaled(&a.matmul(&at)?, 1.0)?;
        gram_right.add_scaled(&at.matmul(a)?, 1.0)?;
    }
    let l = lambda_max(&SymMatrix::symmetrize(&gram_left)?)?;
    let r = lambda_max(&SymMatrix::symmetrize(&gram_right)?)?;
    Ok(l.max(r).max(0.0))
}
