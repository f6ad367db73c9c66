//! Dense row-major matrices and the numeric kernels used by every solver.
//!
//! The regularized objective is
//!
//! ```text
//! J(B, C; β, α) = ½‖A − BC‖²_F + ½ Σ_m β_m ‖b_m‖² + ½ Σ_n α_n ‖c_n‖²
//! ```
//!
//! where `b_m` is row `m` of `B` and `c_n` is column `n` of `C`. The diagonal
//! weight matrices are never materialized: `βB` is a row scaling of `B` and
//! `Cα` a column scaling of `C`.

use std::fmt;

use crate::error::{Error, Result};

/// Dense real matrix stored in row-major order.
///
/// Constructors reject empty shapes and non-finite entries. Kernel outputs
/// are not re-validated; the solvers check finiteness once per iteration.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidDimensions {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::invalid("rows", "rows have unequal lengths"));
        }
        Self::new(rows.len(), ncols, rows.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Builds a matrix without validation. Callers guarantee the shape.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert!(value.is_finite(), "fill value must be finite");
        Self::from_raw(rows, cols, vec![value; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Column vector (n×1) from a slice.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Copy with one entry replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::invalid("index", format!("({i}, {j}) outside {}x{}", self.rows, self.cols)));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(format!("matrix entry ({i}, {j})")));
        }
        let mut out = self.clone();
        out.data[i * self.cols + j] = value;
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First negative entry, if any, as `(row, col, value)`.
    pub fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(|&v| v < 0.0)
            .map(|p| (p / self.cols, p % self.cols, self.data[p]))
    }

    pub(crate) fn ensure_nonnegative(&self, what: &str) -> Result<()> {
        match self.first_negative() {
            Some((row, col, value)) => Err(Error::NegativeEntry {
                what: what.to_string(),
                row,
                col,
                value,
            }),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&v| f(v)).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        Self::from_raw(self.cols, self.rows, data)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(self.mismatch("matmul", other));
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            let out = &mut data[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[p * n..(p + 1) * n];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(m, n, data))
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(self.mismatch("tr_matmul", other));
        }
        let (k, m, n) = (self.rows, self.cols, other.cols);
        let mut data = vec![0.0; m * n];
        for p in 0..k {
            let lhs = &self.data[p * m..(p + 1) * m];
            let rhs = &other.data[p * n..(p + 1) * n];
            for (i, &a) in lhs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in data[i * n..(i + 1) * n].iter_mut().zip(rhs) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(m, n, data))
    }

    /// `self · otherᵀ` without forming the transpose.
    pub fn matmul_tr(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(self.mismatch("matmul_tr", other));
        }
        let (m, n) = (self.rows, other.rows);
        let mut data = Vec::with_capacity(m * n);
        for i in 0..m {
            let lhs = self.row(i);
            for j in 0..n {
                data.push(dot(lhs, other.row(j)));
            }
        }
        Ok(Self::from_raw(m, n, data))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    pub fn hadamard_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with("hadamard_mul", other, |a, b| a * b)
    }

    /// Entrywise `self[i,j] / (other[i,j] + guard)`.
    pub fn hadamard_div_guarded(&self, other: &Self, guard: f64) -> Result<Self> {
        if !(guard >= 0.0) {
            return Err(Error::invalid("guard", format!("must be nonnegative, got {guard}")));
        }
        self.zip_with("hadamard_div_guarded", other, |a, b| a / (b + guard))
    }

    /// Row `m` multiplied by `weights[m]`, i.e. `diag(weights) · self`.
    pub fn scale_rows(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.rows {
            return Err(Error::ShapeMismatch {
                op: "scale_rows",
                left: self.shape(),
                right: (weights.len(), 1),
            });
        }
        let mut data = self.data.clone();
        for (row, &w) in data.chunks_exact_mut(self.cols).zip(weights) {
            row.iter_mut().for_each(|v| *v *= w);
        }
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Column `n` multiplied by `weights[n]`, i.e. `self · diag(weights)`.
    pub fn scale_cols(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "scale_cols",
                left: self.shape(),
                right: (1, weights.len()),
            });
        }
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.cols) {
            row.iter_mut().zip(weights).for_each(|(v, &w)| *v *= w);
        }
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// `Σ self ⊙ other`, which equals `tr(selfᵀ · other)`.
    pub fn frobenius_inner(&self, other: &Self) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("frobenius_inner", other));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        self.data
            .chunks_exact(self.cols)
            .map(|r| r.iter().map(|v| v * v).sum())
            .collect()
    }

    pub fn col_norms_sq(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * v;
            }
        }
        out
    }

    fn zip_with(&self, op: &'static str, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(self.mismatch(op, other));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    fn mismatch(&self, op: &'static str, other: &Self) -> Error {
        Error::ShapeMismatch {
            op,
            left: self.shape(),
            right: other.shape(),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn frobenius_norm_sq(m: &DenseMatrix) -> f64 {
    m.frobenius_norm_sq()
}

/// Per-row weights `β` (length M, one per row of `B`) and per-column
/// weights `α` (length N, one per column of `C`).
#[derive(Clone, Debug, PartialEq)]
pub struct RegParams {
    beta: Vec<f64>,
    alpha: Vec<f64>,
}

impl RegParams {
    pub fn new(beta: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        check_weights("beta", &beta)?;
        check_weights("alpha", &alpha)?;
        Ok(Self { beta, alpha })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self {
            beta: vec![0.0; m],
            alpha: vec![0.0; n],
        }
    }

    pub fn uniform(m: usize, n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; m], vec![value; n])
    }

    pub(crate) fn from_raw(beta: Vec<f64>, alpha: Vec<f64>) -> Self {
        Self { beta, alpha }
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn check_dims(&self, m: usize, n: usize) -> Result<()> {
        if self.beta.len() != m || self.alpha.len() != n {
            return Err(Error::ShapeMismatch {
                op: "regularization parameters",
                left: (m, n),
                right: (self.beta.len(), self.alpha.len()),
            });
        }
        Ok(())
    }
}

fn check_weights(name: &'static str, w: &[f64]) -> Result<()> {
    if let Some(v) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::invalid(name, format!("entries must be finite and >= 0, got {v}")));
    }
    Ok(())
}

/// Checks `A: M×N`, `B: M×R`, `C: R×N` and parameter lengths.
pub(crate) fn check_problem(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams) -> Result<()> {
    if b.rows() != a.rows() {
        return Err(Error::ShapeMismatch {
            op: "factor B against A",
            left: a.shape(),
            right: b.shape(),
        });
    }
    if c.cols() != a.cols() || c.rows() != b.cols() {
        return Err(Error::ShapeMismatch {
            op: "factor C against A and B",
            left: (b.cols(), a.cols()),
            right: c.shape(),
        });
    }
    params.check_dims(a.rows(), a.cols())
}

/// How [`objective`] evaluates `J`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ObjectiveForm {
    /// Forms the residual `A − BC` explicitly.
    #[default]
    Direct,
    /// `½tr(AᵀA) − tr(Cᵀ(BᵀA)) + ½tr(Cᵀ(BᵀB)C)` plus the penalties; avoids the
    /// M×N residual when `tr(AᵀA)` is cached.
    Trace,
}

pub fn objective(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams, form: ObjectiveForm) -> Result<f64> {
    check_problem(a, b, c, params)?;
    let penalty = 0.5 * dot(params.beta(), &b.row_norms_sq()) + 0.5 * dot(params.alpha(), &c.col_norms_sq());
    let fit = match form {
        ObjectiveForm::Direct => 0.5 * a.sub(&b.matmul(c)?)?.frobenius_norm_sq(),
        ObjectiveForm::Trace => {
            let bta = b.tr_matmul(a)?;
            let btb_c = b.tr_matmul(b)?.matmul(c)?;
            // Cancellation can leave a tiny negative value at an exact fit.
            (0.5 * a.frobenius_norm_sq() - c.frobenius_inner(&bta)? + 0.5 * c.frobenius_inner(&btb_c)?).max(0.0)
        }
    };
    Ok(fit + penalty)
}

/// `J(B, C; β, α)` in direct form.
pub fn objective_j(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams) -> Result<f64> {
    objective(a, b, c, params, ObjectiveForm::Direct)
}

/// `∇_B J = B(CCᵀ) − ACᵀ + βB`.
pub fn grad_b(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams) -> Result<DenseMatrix> {
    check_problem(a, b, c, params)?;
    let cct = c.matmul_tr(c)?;
    grad_b_with(a, b, c, &cct, params.beta())
}

pub(crate) fn grad_b_with(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    cct: &DenseMatrix,
    beta: &[f64],
) -> Result<DenseMatrix> {
    b.matmul(cct)?.sub(&a.matmul_tr(c)?)?.add(&b.scale_rows(beta)?)
}

/// `∇_C J = (BᵀB)C − BᵀA + Cα`.
pub fn grad_c(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams) -> Result<DenseMatrix> {
    check_problem(a, b, c, params)?;
    let btb = b.tr_matmul(b)?;
    grad_c_with(a, b, c, &btb, params.alpha())
}

pub(crate) fn grad_c_with(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    btb: &DenseMatrix,
    alpha: &[f64],
) -> Result<DenseMatrix> {
    btb.matmul(c)?.sub(&b.tr_matmul(a)?)?.add(&c.scale_cols(alpha)?)
}
