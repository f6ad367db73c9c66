//! Scalar-λ Tikhonov least squares, iterative λ selection and L-curve sweeps.
//!
//! For a linear inverse problem `y = Ax` the regularized solution is
//! `x_λ = argmin ‖y − Ax‖² + λ‖x‖²`. The iterative selector alternates that
//! solve with `λ ← |γ| ρ²(λ) / η²(λ)`, where `ρ² = ‖y − Ax_λ‖²` and
//! `η² = ‖x_λ‖²`; its fixed points are the tangency points between the
//! L-curve and a straight line of slope `γ`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

/// λ beyond this is reported as divergence.
pub const LAMBDA_DIVERGENCE: f64 = 1e12;

/// Pivots of the Cholesky factor below this fraction of the largest one are
/// treated as a singular system.
const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// `y = Ax` with `A: N×M` and `y ∈ ℝ^N`.
#[derive(Clone, Debug)]
pub struct LinearInverseProblem {
    design: DenseMatrix,
    observation: Vec<f64>,
}

/// One sample of the L-curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LCurvePoint {
    pub lambda: f64,
    /// `ρ² = ‖y − Ax_λ‖²`
    pub residual_norm_sq: f64,
    /// `η² = ‖x_λ‖²`
    pub solution_norm_sq: f64,
}

impl LinearInverseProblem {
    pub fn new(design: DenseMatrix, observation: Vec<f64>) -> Result<Self> {
        if observation.len() != design.rows() {
            return Err(Error::ShapeMismatch {
                op: "observation against design",
                left: design.shape(),
                right: (observation.len(), 1),
            });
        }
        if observation.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation".into()));
        }
        Ok(Self { design, observation })
    }

    pub fn design(&self) -> &DenseMatrix {
        &self.design
    }

    pub fn observation(&self) -> &[f64] {
        &self.observation
    }

    /// Number of unknowns (columns of the design matrix).
    pub fn unknowns(&self) -> usize {
        self.design.cols()
    }

    /// Solves `(AᵀA + λI)x = Aᵀy` by Cholesky factorization.
    pub fn solve_regularized(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
        }
        let a = &self.design;
        let (n, m) = a.shape();
        let a_na = DMatrix::from_row_slice(n, m, a.as_slice());
        let mut normal = a_na.tr_mul(&a_na);
        for i in 0..m {
            normal[(i, i)] += lambda;
        }
        let rhs = a_na.tr_mul(&DVector::from_column_slice(&self.observation));

        let chol = normal.cholesky().ok_or(Error::SingularSystem { lambda })?;
        let l = chol.l_dirty();
        let (lo, hi) = (0..m).map(|i| l[(i, i)]).fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        if !(lo > SINGULAR_PIVOT_RATIO * hi) {
            return Err(Error::SingularSystem { lambda });
        }
        let x = chol.solve(&rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { lambda });
        }
        Ok(x.as_slice().to_vec())
    }

    /// `‖y − Ax‖²`
    pub fn residual_norm_sq(&self, x: &[f64]) -> f64 {
        (0..self.design.rows())
            .map(|i| {
                let r = self.observation[i] - dot(self.design.row(i), x);
                r * r
            })
            .sum()
    }

    pub fn lcurve_point(&self, lambda: f64) -> Result<LCurvePoint> {
        let x = self.solve_regularized(lambda)?;
        Ok(LCurvePoint {
            lambda,
            residual_norm_sq: self.residual_norm_sq(&x),
            solution_norm_sq: dot(&x, &x),
        })
    }
}

/// `|γ| · ρ² / (η² + guard)`.
pub fn lambda_update(residual_norm_sq: f64, solution_norm_sq: f64, gamma: f64, guard: f64) -> Result<f64> {
    if !(guard >= 0.0) {
        return Err(Error::invalid("guard", format!("must be >= 0, got {guard}")));
    }
    if ![residual_norm_sq, solution_norm_sq, gamma, guard].iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("lambda update inputs".into()));
    }
    let denom = solution_norm_sq + guard;
    if denom == 0.0 {
        return Err(Error::DivisionByZero("solution norm plus guard is zero"));
    }
    Ok(gamma.abs() * residual_norm_sq / denom)
}

/// Settings for [`run_lambda_iteration`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaIteration {
    pub gamma: f64,
    pub lambda0: f64,
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for LambdaIteration {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lambda0: 0.0,
            eps: 1e-3,
            max_iter: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LambdaOutcome {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `λ^(1), λ^(2), …`; the initial value is not included.
    pub lambda_history: Vec<f64>,
}

/// Alternates the regularized solve with the λ update until the relative
/// change of `x` drops to `eps`. `x^(0)` is the zero vector, so the first
/// change is measured in absolute terms.
pub fn run_lambda_iteration(problem: &LinearInverseProblem, settings: &LambdaIteration) -> Result<LambdaOutcome> {
    if !(settings.lambda0 >= 0.0) {
        return Err(Error::invalid("lambda0", format!("must be >= 0, got {}", settings.lambda0)));
    }
    if !(settings.eps > 0.0) {
        return Err(Error::invalid("eps", format!("must be > 0, got {}", settings.eps)));
    }
    if settings.max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be positive"));
    }

    let mut x_prev = vec![0.0; problem.unknowns()];
    let mut lambda = settings.lambda0;
    let mut history = Vec::new();

    for k in 1..=settings.max_iter {
        let x = problem.solve_regularized(lambda)?;
        let rho2 = problem.residual_norm_sq(&x);
        let eta2 = dot(&x, &x);
        lambda = lambda_update(rho2, eta2, settings.gamma, 0.0)?;
        if !(lambda <= LAMBDA_DIVERGENCE) {
            return Err(Error::LambdaDiverged { iteration: k, lambda });
        }
        history.push(lambda);

        let prev_norm = dot(&x_prev, &x_prev).sqrt();
        let change = x.iter().zip(&x_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let error = if prev_norm > 0.0 { change / prev_norm } else { change };
        x_prev = x;
        if error <= settings.eps {
            return Ok(LambdaOutcome {
                x: x_prev,
                lambda,
                iterations: k,
                converged: true,
                lambda_history: history,
            });
        }
    }

    Ok(LambdaOutcome {
        x: x_prev,
        lambda,
        iterations: settings.max_iter,
        converged: false,
        lambda_history: history,
    })
}

/// One L-curve point per λ, in input order.
pub fn lcurve_sweep(problem: &LinearInverseProblem, lambdas: &[f64]) -> Result<Vec<LCurvePoint>> {
    if let Some(w) = lambdas.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("lambdas", format!("must be ascending, found {} before {}", w[0], w[1])));
    }
    lambdas.par_iter().map(|&l| problem.lcurve_point(l)).collect()
}

/// `k` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, k: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::invalid("grid", format!("need 0 < min <= max, got [{lo}, {hi}]")));
    }
    match k {
        0 => Err(Error::invalid("points", "must be positive")),
        1 => Ok(vec![lo]),
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..k).map(|i| (a + (b - a) * i as f64 / (k - 1) as f64).exp()).collect();
            g[0] = lo;
            g[k - 1] = hi;
            Ok(g)
        }
    }
}
