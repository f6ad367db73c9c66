//! Brute-force reference computations used to check the solvers.
//!
//! Nothing here calls the matrix kernels or the Cholesky solve used by the
//! production paths: every quantity is rebuilt from scalar loops over
//! individual entries.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, RegParams};
use crate::tikhonov::LinearInverseProblem;

/// Comparison of computed values against references, with relative error
/// `|computed − reference| / (1 + |reference|)`.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub case: String,
    pub computed: Vec<f64>,
    pub reference: Vec<f64>,
    pub max_rel_error: f64,
}

pub fn rel_error(computed: f64, reference: f64) -> f64 {
    (computed - reference).abs() / (1.0 + reference.abs())
}

impl OracleReport {
    pub fn compare(case: impl Into<String>, computed: Vec<f64>, reference: Vec<f64>) -> Self {
        assert_eq!(computed.len(), reference.len(), "oracle comparison lengths differ");
        let max_rel_error = computed
            .iter()
            .zip(&reference)
            .map(|(&c, &r)| rel_error(c, r))
            .fold(0.0, f64::max);
        Self {
            case: case.into(),
            computed,
            reference,
            max_rel_error,
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_rel_error <= tol
    }
}

/// The regularized objective by explicit loops.
pub fn naive_objective(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, params: &RegParams) -> Result<f64> {
    let (m, n) = a.shape();
    let r = b.cols();
    if b.rows() != m || c.rows() != r || c.cols() != n || params.beta().len() != m || params.alpha().len() != n {
        return Err(Error::ShapeMismatch {
            op: "naive_objective",
            left: a.shape(),
            right: (b.rows(), c.cols()),
        });
    }
    let mut fit = 0.0;
    for i in 0..m {
        for j in 0..n {
            let mut bc = 0.0;
            for k in 0..r {
                bc += b.get(i, k) * c.get(k, j);
            }
            let d = a.get(i, j) - bc;
            fit += d * d;
        }
    }
    let mut pen_b = 0.0;
    for i in 0..m {
        for k in 0..r {
            pen_b += params.beta()[i] * b.get(i, k) * b.get(i, k);
        }
    }
    let mut pen_c = 0.0;
    for j in 0..n {
        for k in 0..r {
            pen_c += params.alpha()[j] * c.get(k, j) * c.get(k, j);
        }
    }
    Ok(0.5 * (fit + pen_b + pen_c))
}

fn perturbed(m: &DenseMatrix, i: usize, j: usize, h: f64) -> Result<DenseMatrix> {
    m.with_entry(i, j, m.get(i, j) + h)
}

/// Central differences of [`naive_objective`] with respect to every entry
/// of `B` and `C`.
pub fn finite_diff_gradient(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    params: &RegParams,
    step: f64,
) -> Result<(DenseMatrix, DenseMatrix)> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid("step", format!("must be > 0, got {step}")));
    }
    let mut gb = Vec::with_capacity(b.rows() * b.cols());
    for i in 0..b.rows() {
        for k in 0..b.cols() {
            let up = naive_objective(a, &perturbed(b, i, k, step)?, c, params)?;
            let down = naive_objective(a, &perturbed(b, i, k, -step)?, c, params)?;
            gb.push((up - down) / (2.0 * step));
        }
    }
    let mut gc = Vec::with_capacity(c.rows() * c.cols());
    for k in 0..c.rows() {
        for j in 0..c.cols() {
            let up = naive_objective(a, b, &perturbed(c, k, j, step)?, params)?;
            let down = naive_objective(a, b, &perturbed(c, k, j, -step)?, params)?;
            gc.push((up - down) / (2.0 * step));
        }
    }
    Ok((DenseMatrix::new(b.rows(), b.cols(), gb)?, DenseMatrix::new(c.rows(), c.cols(), gc)?))
}

/// Solves `(AᵀA + λI)x = Aᵀy` by Gaussian elimination with partial pivoting.
pub fn reference_solve(problem: &LinearInverseProblem, lambda: f64) -> Result<Vec<f64>> {
    let a = problem.design();
    let y = problem.observation();
    let (n, m) = a.shape();
    let mut aug = vec![vec![0.0; m + 1]; m];
    for p in 0..m {
        for q in 0..m {
            let mut s = 0.0;
            for i in 0..n {
                s += a.get(i, p) * a.get(i, q);
            }
            aug[p][q] = s;
        }
        aug[p][p] += lambda;
        let mut s = 0.0;
        for i in 0..n {
            s += a.get(i, p) * y[i];
        }
        aug[p][m] = s;
    }
    let scale = aug.iter().flat_map(|r| r[..m].iter()).fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))
            .unwrap_or(col);
        if aug[piv][col].abs() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularSystem { lambda });
        }
        aug.swap(col, piv);
        for row in col + 1..m {
            let f = aug[row][col] / aug[col][col];
            for k in col..=m {
                aug[row][k] -= f * aug[col][k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for row in (0..m).rev() {
        let mut s = aug[row][m];
        for k in row + 1..m {
            s -= aug[row][k] * x[k];
        }
        x[row] = s / aug[row][row];
    }
    Ok(x)
}

/// `g(λ) = |γ| ρ²(λ) / η²(λ)` by the reference solver.
pub fn lambda_map(problem: &LinearInverseProblem, gamma: f64, lambda: f64) -> Result<f64> {
    let x = reference_solve(problem, lambda)?;
    let a = problem.design();
    let y = problem.observation();
    let mut rho2 = 0.0;
    for i in 0..a.rows() {
        let mut ax = 0.0;
        for j in 0..a.cols() {
            ax += a.get(i, j) * x[j];
        }
        rho2 += (y[i] - ax) * (y[i] - ax);
    }
    let eta2: f64 = x.iter().map(|v| v * v).sum();
    if eta2 == 0.0 {
        return Err(Error::DivisionByZero("solution norm is zero"));
    }
    Ok(gamma.abs() * rho2 / eta2)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixedPointScan {
    /// Grid intervals `[λ_i, λ_{i+1}]` on which `g(λ) − λ` changes sign, or
    /// degenerate `[λ_i, λ_i]` where it vanishes on a grid point.
    pub brackets: Vec<(f64, f64)>,
    /// `g(0) = 0`, i.e. `λ = 0` is itself a fixed point.
    pub zero_is_fixed_point: bool,
}

impl FixedPointScan {
    pub fn contains(&self, lambda: f64) -> bool {
        self.brackets.iter().any(|&(lo, hi)| lo <= lambda && lambda <= hi)
    }
}

/// Locates the fixed points of the λ update on an ascending positive grid.
pub fn scan_lambda_fixed_points(problem: &LinearInverseProblem, gamma: f64, grid: &[f64]) -> Result<FixedPointScan> {
    if grid.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: grid.len(),
        });
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("grid", "must be positive and strictly ascending"));
    }
    let residual: Vec<f64> = grid
        .iter()
        .map(|&l| lambda_map(problem, gamma, l).map(|g| g - l))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..grid.len() {
        if residual[i] == 0.0 {
            brackets.push((grid[i], grid[i]));
        } else if i + 1 < grid.len() && residual[i] * residual[i + 1] < 0.0 {
            brackets.push((grid[i], grid[i + 1]));
        }
    }
    let zero_is_fixed_point = gamma == 0.0 || lambda_map(problem, gamma, 0.0).map_or(false, |g| g == 0.0);
    Ok(FixedPointScan {
        brackets,
        zero_is_fixed_point,
    })
}
