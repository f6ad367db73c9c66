//! Automatic updates of the per-row `β` and per-column `α` weights and
//! diagnostics for their trajectories.
//!
//! Each weight is moved to the value that balances its row (or column) of
//! the L-curve against a line of slope `γ`:
//!
//! ```text
//! β_m ← |γ_m| ‖a_m − b_m C‖² / (‖b_m‖² + δ_B)
//! α_n ← |γ_n| ‖a_n − B c_n‖² / (‖c_n‖² + δ_C)
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, RegParams};

/// `β_m` for every row, from `B^{(k+1)}` and `C^{(k)}`.
pub fn update_beta(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, gamma_b: &[f64], delta_b: f64) -> Result<Vec<f64>> {
    check_shapes(a, b, c)?;
    check_gamma("gamma_b", gamma_b, a.rows())?;
    check_delta("delta_b", delta_b)?;
    let fitted = b.matmul(c)?;
    let residual = row_residual_norms_sq(a, &fitted);
    let norms = b.row_norms_sq();
    Ok(residual
        .par_iter()
        .zip(&norms)
        .zip(gamma_b)
        .map(|((&r, &s), &g)| g.abs() * r / (s + delta_b))
        .collect())
}

/// `α_n` for every column, from `B^{(k+1)}` and `C^{(k+1)}`.
pub fn update_alpha(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix, gamma_c: &[f64], delta_c: f64) -> Result<Vec<f64>> {
    check_shapes(a, b, c)?;
    check_gamma("gamma_c", gamma_c, a.cols())?;
    check_delta("delta_c", delta_c)?;
    let fitted = b.matmul(c)?;
    let residual = col_residual_norms_sq(a, &fitted);
    let norms = c.col_norms_sq();
    Ok(residual
        .par_iter()
        .zip(&norms)
        .zip(gamma_c)
        .map(|((&r, &s), &g)| g.abs() * r / (s + delta_c))
        .collect())
}

fn row_residual_norms_sq(a: &DenseMatrix, fitted: &DenseMatrix) -> Vec<f64> {
    (0..a.rows())
        .map(|i| a.row(i).iter().zip(fitted.row(i)).map(|(x, y)| (x - y) * (x - y)).sum())
        .collect()
}

fn col_residual_norms_sq(a: &DenseMatrix, fitted: &DenseMatrix) -> Vec<f64> {
    let mut out = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        for ((o, x), y) in out.iter_mut().zip(a.row(i)).zip(fitted.row(i)) {
            *o += (x - y) * (x - y);
        }
    }
    out
}

fn check_shapes(a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix) -> Result<()> {
    if b.rows() != a.rows() || c.cols() != a.cols() || b.cols() != c.rows() {
        return Err(Error::ShapeMismatch {
            op: "regularization update",
            left: a.shape(),
            right: (b.rows(), c.cols()),
        });
    }
    Ok(())
}

fn check_gamma(name: &'static str, gamma: &[f64], len: usize) -> Result<()> {
    if gamma.len() != len {
        return Err(Error::invalid(name, format!("expected {len} entries, got {}", gamma.len())));
    }
    if gamma.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite(name.into()));
    }
    Ok(())
}

fn check_delta(name: &'static str, delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::invalid(name, format!("must be finite and >= 0, got {delta}")));
    }
    Ok(())
}

/// Starting values for `β` and `α`.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum RegInit {
    #[default]
    Zeros,
    Provided { beta: Vec<f64>, alpha: Vec<f64> },
}

pub fn init_regularization(m: usize, n: usize, strategy: &RegInit) -> Result<RegParams> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidDimensions { rows: m, cols: n, len: 0 });
    }
    match strategy {
        RegInit::Zeros => Ok(RegParams::zeros(m, n)),
        RegInit::Provided { beta, alpha } => {
            let p = RegParams::new(beta.clone(), alpha.clone())?;
            p.check_dims(m, n)?;
            Ok(p)
        }
    }
}

/// Per-iteration snapshots of `β` and `α`.
#[derive(Clone, Debug, Default)]
pub struct ParamTrajectory {
    snapshots: Vec<RegParams>,
}

impl ParamTrajectory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, params: RegParams) {
        self.snapshots.push(params);
    }

    pub fn snapshots(&self) -> &[RegParams] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn beta_series(&self, m: usize) -> Vec<f64> {
        self.snapshots.iter().map(|p| p.beta()[m]).collect()
    }

    pub fn alpha_series(&self, n: usize) -> Vec<f64> {
        self.snapshots.iter().map(|p| p.alpha()[n]).collect()
    }

    /// True when the last two snapshots agree to `rel_tol` relative, entry by entry.
    pub fn stabilized(&self, rel_tol: f64) -> bool {
        let [.., prev, last] = self.snapshots.as_slice() else {
            return false;
        };
        let close = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(a, b)| (a - b).abs() <= rel_tol * a.abs().max(b.abs()));
        close(prev.beta(), last.beta()) && close(prev.alpha(), last.alpha())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Increasing,
    Decreasing,
    Converged,
    NonMonotone,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLabels {
    pub beta: Vec<Direction>,
    pub alpha: Vec<Direction>,
}

impl TrajectoryLabels {
    pub fn count(&self, d: Direction) -> usize {
        self.beta.iter().chain(&self.alpha).filter(|&&x| x == d).count()
    }
}

/// Labels one sequence. Steps with `|Δ| ≤ tol·(1 + |value|)` are ignored;
/// the remaining steps decide the direction.
pub fn classify_sequence(values: &[f64], tol: f64) -> Direction {
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= tol * (1.0 + w[1].abs()) {
            continue;
        }
        if d > 0.0 {
            up = true;
        } else {
            down = true;
        }
    }
    match (up, down) {
        (false, false) => Direction::Converged,
        (true, false) => Direction::Increasing,
        (false, true) => Direction::Decreasing,
        (true, true) => Direction::NonMonotone,
    }
}

pub fn classify_trajectory(trajectory: &ParamTrajectory, tol: f64) -> Result<TrajectoryLabels> {
    if trajectory.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: trajectory.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    let first = &trajectory.snapshots[0];
    Ok(TrajectoryLabels {
        beta: (0..first.beta().len())
            .map(|m| classify_sequence(&trajectory.beta_series(m), tol))
            .collect(),
        alpha: (0..first.alpha().len())
            .map(|n| classify_sequence(&trajectory.alpha_series(n), tol))
            .collect(),
    })
}

/// Per-index residuals of the guarded balance condition
/// `β_m(‖b_m‖² + δ_B) = |γ_m|‖a_m − b_m C‖²` and its column analogue.
#[derive(Clone, Debug)]
pub struct FixedPointResiduals {
    pub beta: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn fixed_point_residuals(
    a: &DenseMatrix,
    b: &DenseMatrix,
    c: &DenseMatrix,
    params: &RegParams,
    gamma_b: &[f64],
    gamma_c: &[f64],
    delta_b: f64,
    delta_c: f64,
) -> Result<FixedPointResiduals> {
    check_shapes(a, b, c)?;
    params.check_dims(a.rows(), a.cols())?;
    let fitted = b.matmul(c)?;
    let row_res = row_residual_norms_sq(a, &fitted);
    let col_res = col_residual_norms_sq(a, &fitted);
    let beta = params
        .beta()
        .iter()
        .zip(b.row_norms_sq())
        .zip(&row_res)
        .zip(gamma_b)
        .map(|(((&w, s), &r), g)| (w * (s + delta_b) - g.abs() * r).abs())
        .collect();
    let alpha = params
        .alpha()
        .iter()
        .zip(c.col_norms_sq())
        .zip(&col_res)
        .zip(gamma_c)
        .map(|(((&w, s), &r), g)| (w * (s + delta_c) - g.abs() * r).abs())
        .collect();
    Ok(FixedPointResiduals { beta, alpha })
}

/// `(min, max, mean)`, all zero for an empty slice.
pub(crate) fn summary(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max, values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn positive(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| rng.random_range(0.1..1.0)).unwrap()
    }

    #[test]
    fn exact_rows_give_zero_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = positive(&mut rng, 3, 2);
        let c = positive(&mut rng, 2, 4);
        let a = b.matmul(&c).unwrap();
        let beta = update_beta(&a, &b, &c, &[0.1; 3], 1e-9).unwrap();
        let alpha = update_alpha(&a, &b, &c, &[0.1; 4], 1e-9).unwrap();
        assert!(beta.iter().chain(&alpha).all(|&v| v < 1e-25));
    }

    #[test]
    fn zero_factor_rows_hit_the_guard() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 0.5]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let c = DenseMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let beta = update_beta(&a, &b, &c, &[0.1, 0.1], 1e-9).unwrap();
        assert!((beta[0] - 0.1 * 5.0 / 1e-9).abs() <= 1e-6 * beta[0]);
        let alpha = update_alpha(&a, &b, &c, &[0.1, 0.1], 1e-9).unwrap();
        assert!((alpha[0] - 0.1 * 10.0 / 1e-9).abs() <= 1e-6 * alpha[0]);
    }

    #[test]
    fn updates_match_scalar_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (m, n, r) = (5, 4, 2);
        let a = positive(&mut rng, m, n);
        let b = positive(&mut rng, m, r);
        let c = positive(&mut rng, r, n);
        let delta = 1e-9;
        let beta = update_beta(&a, &b, &c, &[0.1; 5], delta).unwrap();
        let alpha = update_alpha(&a, &b, &c, &[0.1; 4], delta).unwrap();
        for i in 0..m {
            let (mut res, mut nrm) = (0.0, 0.0);
            for j in 0..n {
                let mut bc = 0.0;
                for k in 0..r {
                    bc += b.get(i, k) * c.get(k, j);
                }
                res += (a.get(i, j) - bc).powi(2);
            }
            for k in 0..r {
                nrm += b.get(i, k).powi(2);
            }
            let expected = 0.1 * res / (nrm + delta);
            assert!((beta[i] - expected).abs() <= 1e-12 * expected);
        }
        for j in 0..n {
            let (mut res, mut nrm) = (0.0, 0.0);
            for i in 0..m {
                let mut bc = 0.0;
                for k in 0..r {
                    bc += b.get(i, k) * c.get(k, j);
                }
                res += (a.get(i, j) - bc).powi(2);
            }
            for k in 0..r {
                nrm += c.get(k, j).powi(2);
            }
            let expected = 0.1 * res / (nrm + delta);
            assert!((alpha[j] - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn negative_slope_uses_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = positive(&mut rng, 3, 3);
        let b = positive(&mut rng, 3, 1);
        let c = positive(&mut rng, 1, 3);
        let pos = update_beta(&a, &b, &c, &[0.3; 3], 0.0).unwrap();
        let neg = update_beta(&a, &b, &c, &[-0.3; 3], 0.0).unwrap();
        assert_eq!(pos, neg);
        assert!(update_beta(&a, &b, &c, &[0.3; 2], 0.0).is_err());
    }

    #[test]
    fn init_strategies() {
        let p = init_regularization(3, 4, &RegInit::Zeros).unwrap();
        assert_eq!(p.beta(), &[0.0; 3]);
        assert_eq!(p.alpha(), &[0.0; 4]);
        let p = init_regularization(2, 2, &RegInit::Provided { beta: vec![0.5; 2], alpha: vec![0.5; 2] }).unwrap();
        assert_eq!(p.beta(), &[0.5, 0.5]);
        assert!(init_regularization(2, 2, &RegInit::Provided { beta: vec![0.5; 2], alpha: vec![0.5, -1.0] }).is_err());
        assert!(init_regularization(2, 2, &RegInit::Provided { beta: vec![0.5; 3], alpha: vec![0.5; 2] }).is_err());
    }

    #[test]
    fn sequence_labels() {
        assert_eq!(classify_sequence(&[0.3, 0.3, 0.3], 1e-9), Direction::Converged);
        assert_eq!(classify_sequence(&[0.1, 0.2, 0.4], 1e-9), Direction::Increasing);
        assert_eq!(classify_sequence(&[0.4, 0.2, 0.2], 1e-9), Direction::Decreasing);
        assert_eq!(classify_sequence(&[0.1, 0.4, 0.2], 1e-9), Direction::NonMonotone);
    }

    #[test]
    fn trajectory_needs_two_snapshots() {
        let mut t = ParamTrajectory::new();
        t.push(RegParams::zeros(1, 1));
        assert!(matches!(classify_trajectory(&t, 1e-9), Err(Error::TooFewSamples { .. })));
        t.push(RegParams::uniform(1, 1, 0.5).unwrap());
        let labels = classify_trajectory(&t, 1e-9).unwrap();
        assert_eq!(labels.beta, vec![Direction::Increasing]);
        assert!(!t.stabilized(1e-10));
        t.push(RegParams::uniform(1, 1, 0.5).unwrap());
        assert!(t.stabilized(1e-10));
    }
}
