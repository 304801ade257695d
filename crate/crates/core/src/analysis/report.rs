//! Measured competitive ratios.

use serde::Serialize;

use super::bounds::BoundSet;
use crate::algorithms::OnlineAlgorithm;
use crate::automata::{RunMode, RunOutcome, RNG_ID};
use crate::error::{Error, Result};
use crate::model::{BhInstance, FunctionSpec};

/// One measurement. Field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompetitiveReport {
    pub algorithm: String,
    pub instance_id: String,
    pub k: usize,
    pub t: usize,
    pub z: usize,
    pub r: u64,
    pub w: u64,
    pub mode: &'static str,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mean_cost: Option<f64>,
    pub stderr: Option<f64>,
    pub exact_cost: Option<f64>,
    pub opt_cost: u64,
    pub ratio: f64,
    pub c1: f64,
    pub c2: f64,
    pub cq: f64,
    pub c_det_unbounded: f64,
    /// Per-prisoner error rates, `;`-separated.
    pub epsilon_list: String,
    pub rng_id: &'static str,
    pub alpha: f64,
    pub branches: Option<usize>,
    /// Hash of the configuration that produced the row; filled in by callers.
    pub config_hash: String,
    pub schema_version: u32,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Writes reports as CSV with a header row.
pub fn write_csv<W: std::io::Write>(reports: &[CompetitiveReport], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in reports {
        writer
            .serialize(r)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

impl CompetitiveReport {
    /// Standard errors separating the sampled mean from `expected`.
    pub fn z_score(&self, expected: f64) -> Option<f64> {
        let (mean, se) = (self.mean_cost?, self.stderr?);
        if se == 0.0 {
            return Some(if (mean - expected).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            });
        }
        Some((mean - expected) / se)
    }
}

/// Runs `alg` on `instance` and reports its cost against the optimum `t·r`,
/// together with every closed-form bound at the instance's `(z, t, r, w)`.
/// `cq` uses the largest per-prisoner error when the algorithm is a composition,
/// and `ε = 0` otherwise.
pub fn empirical_ratio(
    alg: &OnlineAlgorithm,
    instance: &BhInstance,
    f: &FunctionSpec,
    mode: RunMode,
    instance_id: &str,
) -> Result<CompetitiveReport> {
    let params = instance.params();
    let g = instance.offline_optimum(f)?;
    let outcome = alg.run(instance.stream(), mode)?;
    let opt = params.opt_cost();
    let cost_of = |answers: &[_]| -> Result<f64> {
        Ok(crate::model::OutputTrace::score(params, &g, answers)?.total_cost as f64)
    };
    let (mut trials, mut seed, mut mean_cost, mut stderr, mut exact_cost, mut branches) =
        (None, None, None, None, None, None);
    let expected = match (&outcome, mode) {
        (RunOutcome::Exact(bs), _) => {
            let mass: f64 = bs.iter().map(|b| b.probability).sum();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(Error::ContractViolation(format!(
                    "branch probabilities sum to {mass}"
                )));
            }
            let mut e = 0.0;
            for b in bs {
                e += b.probability * cost_of(&b.answers)?;
            }
            exact_cost = Some(e);
            branches = Some(bs.len());
            e
        }
        (RunOutcome::Sampled(traces), RunMode::Sampled { seed: s, trials: n }) => {
            if n == 0 {
                return Err(Error::InvalidParams(
                    "sampled mode needs at least one trial".into(),
                ));
            }
            let costs = traces
                .iter()
                .map(|a| cost_of(a))
                .collect::<Result<Vec<f64>>>()?;
            let mean = costs.iter().sum::<f64>() / n as f64;
            let var = if n > 1 {
                costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            trials = Some(n);
            seed = Some(s);
            mean_cost = Some(mean);
            stderr = Some((var / n as f64).sqrt());
            mean
        }
        _ => unreachable!("outcome kind follows the mode"),
    };
    if exact_cost.is_some()
        && (expected < opt as f64 - 1e-9 || expected > params.worst_cost() as f64 + 1e-9)
    {
        return Err(Error::ContractViolation(format!(
            "expected cost {expected} outside [t·r, t·w]"
        )));
    }
    let eps = alg.prisoner_errors(instance, f)?.unwrap_or_default();
    let eps_max = eps.iter().copied().fold(0.0, f64::max);
    let bounds = BoundSet::evaluate(
        params.z(),
        params.t(),
        params.r(),
        params.w(),
        eps_max.min(0.5 - 1e-12),
    )?;
    Ok(CompetitiveReport {
        algorithm: alg.name().to_string(),
        instance_id: instance_id.to_string(),
        k: params.k(),
        t: params.t(),
        z: params.z(),
        r: params.r(),
        w: params.w(),
        mode: if exact_cost.is_some() { "exact" } else { "mc" },
        trials,
        seed,
        mean_cost,
        stderr,
        exact_cost,
        opt_cost: opt,
        ratio: expected / opt as f64,
        c1: bounds.c1,
        c2: bounds.c2,
        cq: bounds.cq,
        c_det_unbounded: bounds.c_det_unbounded,
        epsilon_list: eps
            .iter()
            .map(|e| format!("{e}"))
            .collect::<Vec<_>>()
            .join(";"),
        rng_id: RNG_ID,
        alpha: 0.0,
        branches,
        config_hash: String::new(),
        schema_version: REPORT_SCHEMA_VERSION,
    })
}
