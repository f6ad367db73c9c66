//! Factorization drivers: the multiplicative baseline, the zero-lock escape,
//! the additive updates and the KKT-based main loop.
//!
//! One iteration of the main loop updates, in order, `B` (with `C^{(k)}`),
//! `C` (with `B^{(k+1)}`), then `β` and `α`. Both factor updates use the
//! weights from the previous iteration. The loop stops when the absolute
//! complementary slackness `max |∇J ⊙ X|` of both factors drops to `tol`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{self, IterationState, IterationTrace};
use crate::error::{Error, Result};
use crate::matrix::{self, DenseMatrix, RegParams};
use crate::regularizer::{self, ParamTrajectory};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Variant {
    #[default]
    Additive,
    Multiplicative,
}

/// Scalar knobs of a factorization run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub rank: usize,
    /// Floor applied to zero entries whose gradient is negative.
    pub sigma: f64,
    pub delta_b: f64,
    pub delta_c: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub variant: Variant,
    pub update_regularization: bool,
    pub seed: u64,
    gamma_b: Vec<f64>,
    gamma_c: Vec<f64>,
}

impl SolverConfig {
    pub const DEFAULT_SIGMA: f64 = 1e-9;
    pub const DEFAULT_DELTA: f64 = 1e-9;
    pub const DEFAULT_TOL: f64 = 1e-9;
    pub const DEFAULT_MAX_ITER: usize = 1000;
    pub const DEFAULT_GAMMA: f64 = 0.1;

    /// Defaults for an `m × n` input factorized at `rank`.
    pub fn new(m: usize, n: usize, rank: usize) -> Self {
        Self {
            rank,
            sigma: Self::DEFAULT_SIGMA,
            delta_b: Self::DEFAULT_DELTA,
            delta_c: Self::DEFAULT_DELTA,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            variant: Variant::Additive,
            update_regularization: true,
            seed: 0,
            gamma_b: vec![Self::DEFAULT_GAMMA; m],
            gamma_c: vec![Self::DEFAULT_GAMMA; n],
        }
    }

    /// Slopes are stored as magnitudes.
    pub fn with_gamma_b(mut self, gamma: Vec<f64>) -> Self {
        self.gamma_b = gamma.into_iter().map(f64::abs).collect();
        self
    }

    pub fn with_gamma_c(mut self, gamma: Vec<f64>) -> Self {
        self.gamma_c = gamma.into_iter().map(f64::abs).collect();
        self
    }

    /// Broadcasts one slope to every row and column.
    pub fn with_gamma(self, gamma: f64) -> Self {
        let (m, n) = (self.gamma_b.len(), self.gamma_c.len());
        self.with_gamma_b(vec![gamma; m]).with_gamma_c(vec![gamma; n])
    }

    pub fn gamma_b(&self) -> &[f64] {
        &self.gamma_b
    }

    pub fn gamma_c(&self) -> &[f64] {
        &self.gamma_c
    }

    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::invalid("rank", "must be at least 1"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("must be > 0, got {}", self.sigma)));
        }
        for (name, d) in [("delta_b", self.delta_b), ("delta_c", self.delta_c)] {
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid(name, format!("must be >= 0, got {d}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be positive"));
        }
        if self.gamma_b.len() != m || self.gamma_c.len() != n {
            return Err(Error::invalid(
                "gamma",
                format!(
                    "expected {m} row and {n} column slopes, got {} and {}",
                    self.gamma_b.len(),
                    self.gamma_c.len()
                ),
            ));
        }
        if self.gamma_b.iter().chain(&self.gamma_c).any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gamma".into()));
        }
        Ok(())
    }
}

/// Nonnegative factors `B: M×R` and `C: R×N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorPair {
    pub b: DenseMatrix,
    pub c: DenseMatrix,
}

impl FactorPair {
    pub fn new(b: DenseMatrix, c: DenseMatrix) -> Result<Self> {
        if b.cols() != c.rows() {
            return Err(Error::ShapeMismatch {
                op: "factor pair",
                left: b.shape(),
                right: c.shape(),
            });
        }
        b.ensure_nonnegative("B")?;
        c.ensure_nonnegative("C")?;
        Ok(Self { b, c })
    }

    pub fn rank(&self) -> usize {
        self.b.cols()
    }

    pub fn product(&self) -> DenseMatrix {
        self.b.matmul(&self.c).expect("factor shapes checked at construction")
    }
}

/// Complementary-slackness summary at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KktResidual {
    /// `max |(∇_B J ⊙ B)_{mr}|`
    pub max_slack_b: f64,
    /// `max |(∇_C J ⊙ C)_{rn}|`
    pub max_slack_c: f64,
    /// Entries with `b = 0` and `∇_B J < 0`.
    pub neg_grad_at_zero_b: usize,
    pub neg_grad_at_zero_c: usize,
}

impl KktResidual {
    pub fn max_slack(&self) -> f64 {
        self.max_slack_b.max(self.max_slack_c)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max_slack_b <= tol && self.max_slack_c <= tol
    }
}

pub fn kkt_residual(a: &DenseMatrix, factors: &FactorPair, params: &RegParams) -> Result<KktResidual> {
    let gb = matrix::grad_b(a, &factors.b, &factors.c, params)?;
    let gc = matrix::grad_c(a, &factors.b, &factors.c, params)?;
    let (max_slack_b, neg_grad_at_zero_b) = slackness(&gb, &factors.b);
    let (max_slack_c, neg_grad_at_zero_c) = slackness(&gc, &factors.c);
    Ok(KktResidual {
        max_slack_b,
        max_slack_c,
        neg_grad_at_zero_b,
        neg_grad_at_zero_c,
    })
}

fn slackness(grad: &DenseMatrix, x: &DenseMatrix) -> (f64, usize) {
    grad.as_slice()
        .iter()
        .zip(x.as_slice())
        .fold((0.0f64, 0usize), |(mx, cnt), (&g, &v)| {
            (mx.max((g * v).abs()), cnt + usize::from(v == 0.0 && g < 0.0))
        })
}

/// `x̄ = x` where `grad ≥ 0`, `max(x, σ)` where `grad < 0`.
pub fn zero_lock_escape(x: &DenseMatrix, grad: &DenseMatrix, sigma: f64) -> Result<DenseMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be > 0, got {sigma}")));
    }
    if x.shape() != grad.shape() {
        return Err(Error::ShapeMismatch {
            op: "zero_lock_escape",
            left: x.shape(),
            right: grad.shape(),
        });
    }
    let data = x
        .as_slice()
        .iter()
        .zip(grad.as_slice())
        .map(|(&v, &g)| if g < 0.0 { v.max(sigma) } else { v })
        .collect();
    Ok(DenseMatrix::from_raw(x.rows(), x.cols(), data))
}

/// `X − X̄ ⊙ ∇ ⊘ (denominator + δ)`, with negative round-off projected to zero.
fn additive_update(x: &DenseMatrix, x_bar: &DenseMatrix, grad: &DenseMatrix, denom: &DenseMatrix, delta: f64) -> DenseMatrix {
    let data = x
        .as_slice()
        .iter()
        .zip(x_bar.as_slice())
        .zip(grad.as_slice())
        .zip(denom.as_slice())
        .map(|(((&v, &vb), &g), &d)| (v - vb * g / (d + delta)).max(0.0))
        .collect();
    DenseMatrix::from_raw(x.rows(), x.cols(), data)
}

/// `B ← B − B̄ ⊙ ∇_B J ⊘ (B̄CCᵀ + βB̄ + δ_B)`.
pub fn additive_step_b(a: &DenseMatrix, factors: &FactorPair, params: &RegParams, config: &SolverConfig) -> Result<DenseMatrix> {
    let FactorPair { b, c } = factors;
    matrix::check_problem(a, b, c, params)?;
    let cct = c.matmul_tr(c)?;
    let grad = matrix::grad_b_with(a, b, c, &cct, params.beta())?;
    let b_bar = zero_lock_escape(b, &grad, config.sigma)?;
    let denom = b_bar.matmul(&cct)?.add(&b_bar.scale_rows(params.beta())?)?;
    Ok(additive_update(b, &b_bar, &grad, &denom, config.delta_b))
}

/// `C ← C − C̄ ⊙ ∇_C J ⊘ (BᵀBC̄ + C̄α + δ_C)`; `factors.b` should already be updated.
pub fn additive_step_c(a: &DenseMatrix, factors: &FactorPair, params: &RegParams, config: &SolverConfig) -> Result<DenseMatrix> {
    let FactorPair { b, c } = factors;
    matrix::check_problem(a, b, c, params)?;
    let btb = b.tr_matmul(b)?;
    let grad = matrix::grad_c_with(a, b, c, &btb, params.alpha())?;
    let c_bar = zero_lock_escape(c, &grad, config.sigma)?;
    let denom = btb.matmul(&c_bar)?.add(&c_bar.scale_cols(params.alpha())?)?;
    Ok(additive_update(c, &c_bar, &grad, &denom, config.delta_c))
}

/// One multiplicative update of `B` then `C` (using the new `B`), with
/// `guard` added to every denominator.
pub fn multiplicative_step(a: &DenseMatrix, factors: &FactorPair, params: &RegParams, guard: f64) -> Result<FactorPair> {
    multiplicative_step_guarded(a, factors, params, guard, guard)
}

fn multiplicative_step_guarded(
    a: &DenseMatrix,
    factors: &FactorPair,
    params: &RegParams,
    guard_b: f64,
    guard_c: f64,
) -> Result<FactorPair> {
    let FactorPair { b, c } = factors;
    matrix::check_problem(a, b, c, params)?;

    let cct = c.matmul_tr(c)?;
    let denom = b.matmul(&cct)?.add(&b.scale_rows(params.beta())?)?;
    let b_new = b.hadamard_mul(&a.matmul_tr(c)?)?.hadamard_div_guarded(&denom, guard_b)?;

    let btb = b_new.tr_matmul(&b_new)?;
    let denom = btb.matmul(c)?.add(&c.scale_cols(params.alpha())?)?;
    let c_new = c.hadamard_mul(&b_new.tr_matmul(a)?)?.hadamard_div_guarded(&denom, guard_c)?;

    Ok(FactorPair { b: b_new, c: c_new })
}

/// How the starting factors are chosen.
#[derive(Clone, Debug, Default)]
pub enum FactorInit {
    /// Entries i.i.d. uniform on the open interval (0, 1).
    #[default]
    UniformRandom,
    Provided { b: DenseMatrix, c: DenseMatrix },
}

pub fn init_factors(m: usize, n: usize, r: usize, seed: u64, strategy: &FactorInit) -> Result<FactorPair> {
    if m == 0 || n == 0 || r == 0 {
        return Err(Error::invalid("dimensions", format!("{m}x{n} at rank {r} must all be positive")));
    }
    match strategy {
        FactorInit::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = DenseMatrix::from_fn(m, r, |_, _| rng.sample(Open01))?;
            let c = DenseMatrix::from_fn(r, n, |_, _| rng.sample(Open01))?;
            Ok(FactorPair { b, c })
        }
        FactorInit::Provided { b, c } => {
            if b.shape() != (m, r) || c.shape() != (r, n) {
                return Err(Error::ShapeMismatch {
                    op: "provided factors",
                    left: b.shape(),
                    right: c.shape(),
                });
            }
            FactorPair::new(b.clone(), c.clone())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    KktConverged,
    MaxIter,
}

/// Iterates the main loop one step at a time.
pub struct Factorizer<'a> {
    a: &'a DenseMatrix,
    config: &'a SolverConfig,
    factors: FactorPair,
    params: RegParams,
    iteration: usize,
    initial_objective: f64,
}

impl<'a> Factorizer<'a> {
    pub fn new(a: &'a DenseMatrix, config: &'a SolverConfig, init: FactorPair, init_params: RegParams) -> Result<Self> {
        a.ensure_nonnegative("input matrix")?;
        let (m, n) = a.shape();
        config.validate(m, n)?;
        if init.rank() != config.rank {
            return Err(Error::invalid(
                "rank",
                format!("configured {} but initial factors have rank {}", config.rank, init.rank()),
            ));
        }
        let init = FactorPair::new(init.b, init.c)?;
        matrix::check_problem(a, &init.b, &init.c, &init_params)?;
        let initial_objective = matrix::objective_j(a, &init.b, &init.c, &init_params)?;
        Ok(Self {
            a,
            config,
            factors: init,
            params: init_params,
            iteration: 0,
            initial_objective,
        })
    }

    pub fn factors(&self) -> &FactorPair {
        &self.factors
    }

    pub fn params(&self) -> &RegParams {
        &self.params
    }

    /// Completed iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// `J(B⁰, C⁰; β⁰, α⁰)`.
    pub fn initial_objective(&self) -> f64 {
        self.initial_objective
    }

    /// Runs one full iteration and returns its trace record.
    pub fn step(&mut self) -> Result<IterationTrace> {
        let k = self.iteration + 1;
        let (a, cfg) = (self.a, self.config);
        let old = &self.params;

        let next = match cfg.variant {
            Variant::Additive => {
                let b = additive_step_b(a, &self.factors, old, cfg)?;
                let half = FactorPair { b, c: self.factors.c.clone() };
                let c = additive_step_c(a, &half, old, cfg)?;
                FactorPair { b: half.b, c }
            }
            Variant::Multiplicative => multiplicative_step_guarded(a, &self.factors, old, cfg.delta_b, cfg.delta_c)?,
        };
        for (name, m) in [("B", &next.b), ("C", &next.c)] {
            if !m.is_finite() {
                return Err(Error::NonFiniteIterate {
                    iteration: k,
                    field: name.into(),
                });
            }
        }

        let params = if cfg.update_regularization {
            let beta = regularizer::update_beta(a, &next.b, &self.factors.c, cfg.gamma_b(), cfg.delta_b)?;
            let alpha = regularizer::update_alpha(a, &next.b, &next.c, cfg.gamma_c(), cfg.delta_c)?;
            if let Some(field) = [("beta", &beta), ("alpha", &alpha)]
                .into_iter()
                .find(|(_, v)| v.iter().any(|x| !x.is_finite()))
                .map(|(f, _)| f)
            {
                return Err(Error::NonFiniteIterate {
                    iteration: k,
                    field: field.into(),
                });
            }
            RegParams::from_raw(beta, alpha)
        } else {
            old.clone()
        };

        let trace = diagnostics::record(&IterationState {
            iteration: k,
            a,
            factors: &next,
            previous_params: old,
            params: &params,
        })
        .map_err(|e| match e {
            Error::NonFinite(field) => Error::NonFiniteIterate { iteration: k, field },
            other => other,
        })?;

        self.factors = next;
        self.params = params;
        self.iteration = k;
        Ok(trace)
    }
}

/// Outcome of [`run`].
#[derive(Clone, Debug)]
pub struct Factorization {
    pub factors: FactorPair,
    pub params: RegParams,
    pub traces: Vec<IterationTrace>,
    pub trajectory: ParamTrajectory,
    pub termination: Termination,
    pub initial_objective: f64,
}

impl Factorization {
    pub fn iterations(&self) -> usize {
        self.traces.len()
    }
}

/// Iterates until both slacks are within `config.tol` or `config.max_iter`
/// iterations have run.
pub fn run(a: &DenseMatrix, config: &SolverConfig, init: FactorPair, init_params: RegParams) -> Result<Factorization> {
    let mut solver = Factorizer::new(a, config, init, init_params)?;
    let mut traces = Vec::new();
    let mut trajectory = ParamTrajectory::new();
    let mut termination = Termination::MaxIter;
    while solver.iteration() < config.max_iter {
        let t = solver.step()?;
        trajectory.push(solver.params().clone());
        let done = t.max_slack_b <= config.tol && t.max_slack_c <= config.tol;
        traces.push(t);
        if done {
            termination = Termination::KktConverged;
            break;
        }
    }
    let initial_objective = solver.initial_objective();
    Ok(Factorization {
        factors: solver.factors,
        params: solver.params,
        traces,
        trajectory,
        termination,
        initial_objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn positive(seed: u64, r: usize, c: usize) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(r, c, |_, _| rng.random_range(0.1..1.0)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + b.abs())
    }

    #[test]
    fn escape_cases() {
        let x = DenseMatrix::from_rows(&[vec![0.0, 5.0, 0.0]]).unwrap();
        let g = DenseMatrix::from_rows(&[vec![-1.0, -1.0, 1.0]]).unwrap();
        let out = zero_lock_escape(&x, &g, 1e-9).unwrap();
        assert_eq!(out.as_slice(), &[1e-9, 5.0, 0.0]);
        assert!(zero_lock_escape(&x, &g, 0.0).is_err());
    }

    #[test]
    fn multiplicative_fixed_point_at_exact_fit() {
        let b = positive(1, 4, 2);
        let c = positive(2, 2, 3);
        let a = b.matmul(&c).unwrap();
        let f = FactorPair::new(b.clone(), c.clone()).unwrap();
        let out = multiplicative_step(&a, &f, &RegParams::zeros(4, 3), 0.0).unwrap();
        for (x, y) in out.b.as_slice().iter().zip(b.as_slice()).chain(out.c.as_slice().iter().zip(c.as_slice())) {
            assert!(rel(*x, *y) < 1e-14);
        }
    }

    #[test]
    fn multiplicative_locks_zeros() {
        let a = positive(3, 4, 3);
        let b = positive(4, 4, 2).with_entry(1, 0, 0.0).unwrap();
        let c = positive(5, 2, 3);
        let f = FactorPair::new(b, c).unwrap();
        let out = multiplicative_step(&a, &f, &RegParams::zeros(4, 3), 1e-9).unwrap();
        assert_eq!(out.b.get(1, 0), 0.0);
    }

    #[test]
    fn multiplicative_matches_scalar_loops() {
        let (m, n, r) = (4, 4, 2);
        let a = positive(6, m, n);
        let b = positive(7, m, r);
        let c = positive(8, r, n);
        let params = RegParams::uniform(m, n, 0.1).unwrap();
        let out = multiplicative_step(&a, &FactorPair::new(b.clone(), c.clone()).unwrap(), &params, 0.0).unwrap();

        let mut b2 = vec![vec![0.0; r]; m];
        for i in 0..m {
            for k in 0..r {
                let (mut num, mut den) = (0.0, 0.0);
                for j in 0..n {
                    num += a.get(i, j) * c.get(k, j);
                    let mut bc = 0.0;
                    for s in 0..r {
                        bc += b.get(i, s) * c.get(s, j);
                    }
                    den += bc * c.get(k, j);
                }
                den += 0.1 * b.get(i, k);
                b2[i][k] = b.get(i, k) * num / den;
            }
        }
        for k in 0..r {
            for j in 0..n {
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..m {
                    num += b2[i][k] * a.get(i, j);
                    let mut bc = 0.0;
                    for s in 0..r {
                        bc += b2[i][s] * c.get(s, j);
                    }
                    den += b2[i][k] * bc;
                }
                den += 0.1 * c.get(k, j);
                let expected = c.get(k, j) * num / den;
                assert!((out.c.get(k, j) - expected).abs() <= 1e-12 * expected);
            }
        }
        for i in 0..m {
            for k in 0..r {
                assert!((out.b.get(i, k) - b2[i][k]).abs() <= 1e-12 * b2[i][k]);
            }
        }
    }

    #[test]
    fn additive_step_is_identity_at_stationary_point() {
        let b = positive(9, 3, 2);
        let c = positive(10, 2, 4);
        let a = b.matmul(&c).unwrap();
        let f = FactorPair::new(b.clone(), c.clone()).unwrap();
        let cfg = SolverConfig::new(3, 4, 2);
        let params = RegParams::zeros(3, 4);
        let nb = additive_step_b(&a, &f, &params, &cfg).unwrap();
        let nc = additive_step_c(&a, &f, &params, &cfg).unwrap();
        for (x, y) in nb.as_slice().iter().zip(b.as_slice()).chain(nc.as_slice().iter().zip(c.as_slice())) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn additive_escape_fires_on_both_factors() {
        let a = positive(11, 4, 3);
        let b = positive(12, 4, 2).with_entry(0, 1, 0.0).unwrap();
        let c = positive(13, 2, 3).with_entry(1, 2, 0.0).unwrap();
        let params = RegParams::zeros(4, 3);
        let f = FactorPair::new(b, c).unwrap();
        let gb = matrix::grad_b(&a, &f.b, &f.c, &params).unwrap();
        assert!(gb.get(0, 1) < 0.0);
        let cfg = SolverConfig::new(4, 3, 2);
        assert!(additive_step_b(&a, &f, &params, &cfg).unwrap().get(0, 1) > 0.0);
        let gc = matrix::grad_c(&a, &f.b, &f.c, &params).unwrap();
        assert!(gc.get(1, 2) < 0.0);
        assert!(additive_step_c(&a, &f, &params, &cfg).unwrap().get(1, 2) > 0.0);
    }

    #[test]
    fn kkt_cases() {
        let b = positive(14, 3, 2);
        let c = positive(15, 2, 3);
        let a = b.matmul(&c).unwrap();
        let k = kkt_residual(&a, &FactorPair::new(b.clone(), c.clone()).unwrap(), &RegParams::zeros(3, 3)).unwrap();
        assert!(k.max_slack() < 1e-14);
        assert_eq!((k.neg_grad_at_zero_b, k.neg_grad_at_zero_c), (0, 0));

        let zero_row = DenseMatrix::from_fn(3, 2, |i, j| if i == 0 { 0.0 } else { b.get(i, j) }).unwrap();
        let k = kkt_residual(&a, &FactorPair::new(zero_row, c).unwrap(), &RegParams::zeros(3, 3)).unwrap();
        assert_eq!(k.neg_grad_at_zero_b, 2);
    }

    #[test]
    fn init_strategies() {
        let f1 = init_factors(10, 4, 3, 7, &FactorInit::UniformRandom).unwrap();
        let f2 = init_factors(10, 4, 3, 7, &FactorInit::UniformRandom).unwrap();
        assert_eq!(f1, f2);
        assert!(f1.b.min() > 0.0 && f1.b.max() < 1.0);
        assert!(f1.c.min() > 0.0 && f1.c.max() < 1.0);
        assert_ne!(f1, init_factors(10, 4, 3, 8, &FactorInit::UniformRandom).unwrap());

        let bad = FactorInit::Provided {
            b: DenseMatrix::filled(2, 1, 1.0).with_entry(0, 0, -1.0).unwrap(),
            c: DenseMatrix::filled(1, 2, 1.0),
        };
        assert!(matches!(init_factors(2, 2, 1, 0, &bad), Err(Error::NegativeEntry { .. })));
        assert!(init_factors(0, 2, 1, 0, &FactorInit::UniformRandom).is_err());
    }

    #[test]
    fn negative_input_rejected() {
        let a = DenseMatrix::from_rows(&[vec![1.0, -0.5]]).unwrap();
        let cfg = SolverConfig::new(1, 2, 1);
        let init = init_factors(1, 2, 1, 0, &FactorInit::UniformRandom).unwrap();
        assert!(matches!(run(&a, &cfg, init, RegParams::zeros(1, 2)), Err(Error::NegativeEntry { .. })));
    }

    #[test]
    fn exact_start_converges_immediately() {
        let b = positive(16, 5, 2);
        let c = positive(17, 2, 4);
        let a = b.matmul(&c).unwrap();
        let mut cfg = SolverConfig::new(5, 4, 2);
        cfg.update_regularization = false;
        let out = run(&a, &cfg, FactorPair::new(b.clone(), c.clone()).unwrap(), RegParams::zeros(5, 4)).unwrap();
        assert_eq!(out.termination, Termination::KktConverged);
        assert_eq!(out.iterations(), 1);
        for (x, y) in out.factors.b.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::new(3, 2, 1);
        assert!(cfg.validate(3, 2).is_ok());
        assert!(cfg.validate(3, 3).is_err());
        cfg.sigma = 0.0;
        assert!(cfg.validate(3, 2).is_err());
        let cfg = SolverConfig::new(3, 2, 1).with_gamma(-0.5);
        assert!(cfg.gamma_b().iter().all(|&g| g == 0.5));
    }
}
