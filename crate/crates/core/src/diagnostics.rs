//! Per-iteration trace records and their CSV export.

use std::io::{Read, Write};

use crate::engine::{kkt_residual, FactorPair};
use crate::error::{Error, Result};
use crate::io::format_value;
use crate::matrix::{dot, DenseMatrix, RegParams};
use crate::regularizer::summary;

/// Column order of the exported trace.
pub const TRACE_HEADER: [&str; 14] = [
    "iteration",
    "objective_frozen",
    "objective_combined",
    "residual_norm_sq",
    "solution_norm_sq_b",
    "solution_norm_sq_c",
    "max_slack_b",
    "max_slack_c",
    "beta_min",
    "beta_max",
    "beta_mean",
    "alpha_min",
    "alpha_max",
    "alpha_mean",
];

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub iteration: usize,
    /// `J(B^{(k+1)}, C^{(k+1)}; β^{(k)}, α^{(k)})`
    pub objective_frozen: f64,
    /// `J(B^{(k+1)}, C^{(k+1)}; β^{(k+1)}, α^{(k+1)})`
    pub objective_combined: f64,
    pub residual_norm_sq: f64,
    pub solution_norm_sq_b: f64,
    pub solution_norm_sq_c: f64,
    pub max_slack_b: f64,
    pub max_slack_c: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_mean: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub alpha_mean: f64,
}

impl IterationTrace {
    fn values(&self) -> [f64; 13] {
        [
            self.objective_frozen,
            self.objective_combined,
            self.residual_norm_sq,
            self.solution_norm_sq_b,
            self.solution_norm_sq_c,
            self.max_slack_b,
            self.max_slack_c,
            self.beta_min,
            self.beta_max,
            self.beta_mean,
            self.alpha_min,
            self.alpha_max,
            self.alpha_mean,
        ]
    }

    fn from_values(iteration: usize, v: [f64; 13]) -> Self {
        Self {
            iteration,
            objective_frozen: v[0],
            objective_combined: v[1],
            residual_norm_sq: v[2],
            solution_norm_sq_b: v[3],
            solution_norm_sq_c: v[4],
            max_slack_b: v[5],
            max_slack_c: v[6],
            beta_min: v[7],
            beta_max: v[8],
            beta_mean: v[9],
            alpha_min: v[10],
            alpha_max: v[11],
            alpha_mean: v[12],
        }
    }
}

/// Everything needed to describe one completed iteration.
#[derive(Clone, Copy, Debug)]
pub struct IterationState<'a> {
    pub iteration: usize,
    pub a: &'a DenseMatrix,
    /// Factors after the update.
    pub factors: &'a FactorPair,
    /// Weights the factor updates used.
    pub previous_params: &'a RegParams,
    /// Weights after the update.
    pub params: &'a RegParams,
}

fn penalty(factors: &FactorPair, params: &RegParams) -> f64 {
    0.5 * dot(params.beta(), &factors.b.row_norms_sq()) + 0.5 * dot(params.alpha(), &factors.c.col_norms_sq())
}

/// Computes every trace field from the state. Slackness is measured with the
/// updated weights.
pub fn record(state: &IterationState<'_>) -> Result<IterationTrace> {
    let f = state.factors;
    let residual_norm_sq = state.a.sub(&f.product())?.frobenius_norm_sq();
    state.previous_params.check_dims(state.a.rows(), state.a.cols())?;
    let kkt = kkt_residual(state.a, f, state.params)?;
    let (beta_min, beta_max, beta_mean) = summary(state.params.beta());
    let (alpha_min, alpha_max, alpha_mean) = summary(state.params.alpha());
    let trace = IterationTrace {
        iteration: state.iteration,
        objective_frozen: 0.5 * residual_norm_sq + penalty(f, state.previous_params),
        objective_combined: 0.5 * residual_norm_sq + penalty(f, state.params),
        residual_norm_sq,
        solution_norm_sq_b: f.b.frobenius_norm_sq(),
        solution_norm_sq_c: f.c.frobenius_norm_sq(),
        max_slack_b: kkt.max_slack_b,
        max_slack_c: kkt.max_slack_c,
        beta_min,
        beta_max,
        beta_mean,
        alpha_min,
        alpha_max,
        alpha_mean,
    };
    if let Some(i) = trace.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(TRACE_HEADER[i + 1].to_string()));
    }
    Ok(trace)
}

/// Iterations whose combined objective rose by more than `1e-12·(1 + J)`.
pub fn count_combined_increases(traces: &[IterationTrace]) -> Result<usize> {
    if traces.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: traces.len(),
        });
    }
    Ok(traces
        .windows(2)
        .filter(|w| {
            let prev = w[0].objective_combined;
            w[1].objective_combined > prev + 1e-12 * (1.0 + prev.abs())
        })
        .count())
}

pub fn export_trace_csv<W: Write>(traces: &[IterationTrace], destination: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(destination);
    w.write_record(TRACE_HEADER)?;
    for t in traces {
        let mut row = Vec::with_capacity(TRACE_HEADER.len());
        row.push(t.iteration.to_string());
        row.extend(t.values().iter().map(|&v| format_value(v)));
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(source: R) -> Result<Vec<IterationTrace>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = r.headers()?.clone();
    if header.iter().ne(TRACE_HEADER.iter().copied()) {
        return Err(Error::invalid("trace header", format!("unexpected columns {header:?}")));
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |m: String| Error::invalid("trace row", format!("line {}: {m}", i + 2));
        let iteration = rec[0].parse::<usize>().map_err(|e| bad(e.to_string()))?;
        let mut v = [0.0; 13];
        for (slot, cell) in v.iter_mut().zip(rec.iter().skip(1)) {
            *slot = cell.parse::<f64>().map_err(|e| bad(format!("{cell:?}: {e}")))?;
        }
        out.push(IterationTrace::from_values(iteration, v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::objective_j;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn positive(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| rng.random_range(0.1..1.0)).unwrap()
    }

    fn synthetic(values: &[f64]) -> Vec<IterationTrace> {
        values
            .iter()
            .enumerate()
            .map(|(i, &j)| {
                let mut v = [0.0; 13];
                v[1] = j;
                IterationTrace::from_values(i + 1, v)
            })
            .collect()
    }

    #[test]
    fn stationary_state_has_zero_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = positive(&mut rng, 3, 2);
        let c = positive(&mut rng, 2, 3);
        let a = b.matmul(&c).unwrap();
        let f = FactorPair::new(b, c).unwrap();
        let p = RegParams::zeros(3, 3);
        let st = IterationState { iteration: 1, a: &a, factors: &f, previous_params: &p, params: &p };
        let t = record(&st).unwrap();
        assert!(t.residual_norm_sq < 1e-28);
        assert!(t.max_slack_b < 1e-14 && t.max_slack_c < 1e-14);
        assert_eq!(t, record(&st).unwrap());
    }

    #[test]
    fn frozen_objective_matches_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = positive(&mut rng, 5, 4);
        let f = FactorPair::new(positive(&mut rng, 5, 2), positive(&mut rng, 2, 4)).unwrap();
        let old = RegParams::uniform(5, 4, 0.3).unwrap();
        let new = RegParams::uniform(5, 4, 0.7).unwrap();
        let t = record(&IterationState { iteration: 3, a: &a, factors: &f, previous_params: &old, params: &new }).unwrap();
        let jf = objective_j(&a, &f.b, &f.c, &old).unwrap();
        let jc = objective_j(&a, &f.b, &f.c, &new).unwrap();
        assert!((t.objective_frozen - jf).abs() <= 1e-12 * jf);
        assert!((t.objective_combined - jc).abs() <= 1e-12 * jc);
        assert_eq!(t.beta_mean, 0.7);
    }

    #[test]
    fn increase_counter() {
        assert_eq!(count_combined_increases(&synthetic(&[3.0, 2.0, 1.0])).unwrap(), 0);
        assert_eq!(count_combined_increases(&synthetic(&[1.0, 1.5, 1.2])).unwrap(), 1);
        assert!(count_combined_increases(&synthetic(&[1.0])).is_err());
    }

    #[test]
    fn export_shapes() {
        let mut buf = Vec::new();
        export_trace_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), TRACE_HEADER.join(",") + "\n");

        let mut buf = Vec::new();
        export_trace_csv(&synthetic(&[0.5]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn export_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let traces: Vec<_> = (0..20)
            .map(|i| {
                let mut v = [0.0; 13];
                for x in v.iter_mut() {
                    *x = rng.random_range(0.0..1.0) * 10f64.powi(rng.random_range(-30..30));
                }
                IterationTrace::from_values(i, v)
            })
            .collect();
        let mut buf = Vec::new();
        export_trace_csv(&traces, &mut buf).unwrap();
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), traces);
    }
}
