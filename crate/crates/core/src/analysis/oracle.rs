//! Expected cost of guess-and-XOR compositions, by brute force and in closed form.
//!
//! `eps[j]` is the error probability of the subroutine on prisoner `j` (0-based,
//! `j < k - 1`); it decides whether guardian `j + 1` inherits the correctness of
//! guardian `j` or flips it.

use crate::error::{Error, Result};
use crate::model::BhParams;

/// Largest `k` the brute-force oracle enumerates.
pub const ORACLE_MAX_K: usize = 20;

fn check(eps: &[f64], params: &BhParams) -> Result<()> {
    if eps.len() + 1 != params.k() {
        return Err(Error::InvalidParams(format!(
            "{} error rates for {} guardians; need k - 1",
            eps.len(),
            params.k()
        )));
    }
    if let Some(e) = eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::InvalidParams(format!("error rate {e} out of range")));
    }
    Ok(())
}

/// Sums the cost of every guess/error pattern weighted by its probability.
pub fn expected_cost_oracle(eps: &[f64], params: &BhParams) -> Result<f64> {
    check(eps, params)?;
    let k = params.k();
    if k > ORACLE_MAX_K {
        return Err(Error::DomainTooLarge {
            bits: k,
            limit: ORACLE_MAX_K,
        });
    }
    let mut total = 0.0;
    let mut correct = vec![false; k];
    // Bit 0: the guess is right. Bit j + 1: subroutine j errs.
    for pattern in 0u64..1 << k {
        let mut weight = 0.5;
        correct[0] = pattern & 1 == 1;
        for j in 0..k - 1 {
            let err = (pattern >> (j + 1)) & 1 == 1;
            weight *= if err { eps[j] } else { 1.0 - eps[j] };
            correct[j + 1] = correct[j] ^ err;
        }
        if weight > 0.0 {
            total += weight * params.score(&correct).1 as f64;
        }
    }
    Ok(total)
}

/// Probability that each block is answered entirely correctly: one half times
/// the product of `1 - ε` over the prisoners strictly inside the block.
pub fn block_success_probabilities(eps: &[f64], params: &BhParams) -> Result<Vec<f64>> {
    check(eps, params)?;
    let z = params.z();
    Ok((0..params.t())
        .map(|b| {
            0.5 * eps[b * z..b * z + z - 1]
                .iter()
                .map(|e| 1.0 - e)
                .product::<f64>()
        })
        .collect())
}

/// `(r - w) Σ p_i + t w`.
pub fn expected_cost_closed_form(eps: &[f64], params: &BhParams) -> Result<f64> {
    let p: f64 = block_success_probabilities(eps, params)?.iter().sum();
    Ok((params.r() as f64 - params.w() as f64) * p + (params.t() as u64 * params.w()) as f64)
}

/// Independent fair coins: each block is right with probability `2^-z`.
pub fn guess_expected_cost(params: &BhParams) -> f64 {
    let p = 0.5f64.powi(params.z() as i32);
    params.t() as f64 * ((1.0 - p) * params.w() as f64 + p * params.r() as f64)
}
