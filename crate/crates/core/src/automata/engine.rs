//! Sampled and exact execution of streaming programs.
//!
//! Only answers emitted on separator symbols are recorded; these are the
//! guardian answers. Exact mode enumerates every measurement branch with its
//! probability, merging branches that carry the same answers and the same state.

use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::machines::{
    AnyMachine, DeterministicAlgorithm, QuantumOp, QuantumProgram, StochasticProgram,
};
use super::quantum::{sample_index, QuantumState};
use crate::error::{Error, Result};
use crate::model::{Answer, Symbol};

pub const DEFAULT_BRANCH_CAP: usize = 1 << 20;

/// Identifier of the per-trial generator, recorded in every report.
pub const RNG_ID: &str = "rand_chacha-0.3/ChaCha8Rng:seed_from_u64(seed)+set_stream(trial)";

/// Outcomes below this probability are dropped during exact enumeration.
const PRUNE: f64 = 1e-20;
/// Two branch states with fidelity above `1 - MERGE_TOL` are merged.
const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Exact { cap: usize },
    Sampled { seed: u64, trials: usize },
}

impl RunMode {
    pub fn exact() -> Self {
        RunMode::Exact {
            cap: DEFAULT_BRANCH_CAP,
        }
    }

    pub fn sampled(seed: u64, trials: usize) -> Self {
        RunMode::Sampled { seed, trials }
    }
}

/// One leaf of the exact outcome tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub probability: f64,
    pub answers: Vec<Answer>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunOutcome {
    Exact(Vec<Branch>),
    Sampled(Vec<Vec<Answer>>),
}

impl RunOutcome {
    pub fn is_exact(&self) -> bool {
        matches!(self, RunOutcome::Exact(_))
    }

    pub fn len(&self) -> usize {
        match self {
            RunOutcome::Exact(b) => b.len(),
            RunOutcome::Sampled(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn branches(&self) -> Option<&[Branch]> {
        match self {
            RunOutcome::Exact(b) => Some(b),
            RunOutcome::Sampled(_) => None,
        }
    }

    pub fn traces(&self) -> Option<&[Vec<Answer>]> {
        match self {
            RunOutcome::Exact(_) => None,
            RunOutcome::Sampled(t) => Some(t),
        }
    }

    /// Exact distribution of answer sequences; identical sequences are summed.
    pub fn distribution(&self) -> Option<BTreeMap<Vec<Answer>, f64>> {
        let branches = self.branches()?;
        let mut out = BTreeMap::new();
        for b in branches {
            *out.entry(b.answers.clone()).or_insert(0.0) += b.probability;
        }
        Some(out)
    }
}

/// Generator for trial `trial` under master seed `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs a deterministic black box once over `stream`, from a fresh reset.
pub fn run_deterministic(alg: &mut dyn DeterministicAlgorithm, stream: &[Symbol]) -> Vec<Answer> {
    alg.reset();
    stream
        .iter()
        .filter_map(|&sym| {
            let out = alg.step(sym);
            (sym == Symbol::Sep).then_some(out)
        })
        .collect()
}

/// Wraps a single deterministic trace as a run outcome.
pub fn deterministic_outcome(answers: Vec<Answer>, mode: RunMode) -> RunOutcome {
    match mode {
        RunMode::Exact { .. } => RunOutcome::Exact(vec![Branch {
            probability: 1.0,
            answers,
        }]),
        RunMode::Sampled { trials, .. } => RunOutcome::Sampled(vec![answers; trials]),
    }
}

pub fn run_stochastic<P>(program: &P, stream: &[Symbol], mode: RunMode) -> Result<RunOutcome>
where
    P: StochasticProgram + ?Sized,
{
    match mode {
        RunMode::Exact { cap } => exact_stochastic(program, stream, cap).map(RunOutcome::Exact),
        RunMode::Sampled { seed, trials } => {
            let traces = (0..trials as u64)
                .into_par_iter()
                .map(|i| sample_stochastic(program, stream, &mut trial_rng(seed, i)))
                .collect();
            Ok(RunOutcome::Sampled(traces))
        }
    }
}

pub fn sample_stochastic<P, R>(program: &P, stream: &[Symbol], rng: &mut R) -> Vec<Answer>
where
    P: StochasticProgram + ?Sized,
    R: rand::Rng + ?Sized,
{
    let mut buf = Vec::new();
    program.initial(&mut buf);
    let mut state = pick(&buf, rng);
    let mut answers = Vec::new();
    for (pos, &sym) in stream.iter().enumerate() {
        buf.clear();
        program.transition(pos, sym, state, &mut buf);
        state = pick(&buf, rng);
        if sym == Symbol::Sep {
            answers.push(program.output(pos, state));
        }
    }
    answers
}

fn pick<R: rand::Rng + ?Sized>(dist: &[(usize, f64)], rng: &mut R) -> usize {
    if dist.len() == 1 {
        return dist[0].0;
    }
    let weights: Vec<f64> = dist.iter().map(|&(_, p)| p).collect();
    dist[sample_index(&weights, rng)].0
}

fn exact_stochastic<P>(program: &P, stream: &[Symbol], cap: usize) -> Result<Vec<Branch>>
where
    P: StochasticProgram + ?Sized,
{
    let mut buf = Vec::new();
    program.initial(&mut buf);
    let mut groups: Vec<(Vec<Answer>, Vec<(usize, f64)>)> =
        vec![(Vec::new(), normalize_sparse(&buf))];
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for (pos, &sym) in stream.iter().enumerate() {
        let mut next_groups = Vec::with_capacity(groups.len());
        for (answers, dist) in groups {
            acc.clear();
            for &(state, p) in &dist {
                buf.clear();
                program.transition(pos, sym, state, &mut buf);
                for &(next, q) in &buf {
                    if q > 0.0 {
                        *acc.entry(next).or_insert(0.0) += p * q;
                    }
                }
            }
            let mut moved: Vec<(usize, f64)> = acc.drain().collect();
            moved.sort_unstable_by_key(|&(s, _)| s);
            if sym == Symbol::Sep {
                let mut split: BTreeMap<Answer, Vec<(usize, f64)>> = BTreeMap::new();
                for (state, p) in moved {
                    split
                        .entry(program.output(pos, state))
                        .or_default()
                        .push((state, p));
                }
                for (out, part) in split {
                    let mut a = answers.clone();
                    a.push(out);
                    next_groups.push((a, part));
                }
            } else {
                next_groups.push((answers, moved));
            }
            if next_groups.len() > cap {
                return Err(Error::CapExceeded { cap });
            }
        }
        groups = next_groups;
    }
    Ok(groups
        .into_iter()
        .map(|(answers, dist)| Branch {
            probability: dist.iter().map(|&(_, p)| p).sum(),
            answers,
        })
        .collect())
}

fn normalize_sparse(dist: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
    for &(s, p) in dist {
        if p > 0.0 {
            *acc.entry(s).or_insert(0.0) += p;
        }
    }
    acc.into_iter().collect()
}

pub fn run_quantum<P>(program: &P, stream: &[Symbol], mode: RunMode) -> Result<RunOutcome>
where
    P: QuantumProgram + ?Sized,
{
    match mode {
        RunMode::Exact { cap } => exact_quantum(program, stream, cap).map(RunOutcome::Exact),
        RunMode::Sampled { seed, trials } => {
            let traces = (0..trials as u64)
                .into_par_iter()
                .map(|i| sample_quantum(program, stream, &mut trial_rng(seed, i)))
                .collect::<Result<Vec<_>>>()?;
            Ok(RunOutcome::Sampled(traces))
        }
    }
}

pub fn sample_quantum<P, R>(program: &P, stream: &[Symbol], rng: &mut R) -> Result<Vec<Answer>>
where
    P: QuantumProgram + ?Sized,
    R: rand::Rng + ?Sized,
{
    let mut state = program.initial_state();
    let mut answers = Vec::new();
    for (pos, &sym) in stream.iter().enumerate() {
        let mut pending = None;
        for op in program.ops(pos, sym) {
            match op {
                QuantumOp::Unitary { targets, matrix } => state.apply_on(targets, matrix),
                QuantumOp::Measure { qubits, result } => {
                    let m = state.measure(qubits, rng)?;
                    pending = Some(result[m.outcome]);
                    state = m.state;
                }
                QuantumOp::MeasureReset { qubits } => {
                    let m = state.measure(qubits, rng)?;
                    state = m.state;
                    state.reset_work_register(qubits, m.outcome)?;
                }
            }
        }
        if sym == Symbol::Sep {
            answers.push(pending);
        }
    }
    Ok(answers)
}

struct QBranch {
    state: QuantumState,
    probability: f64,
    answers: Vec<Answer>,
    pending: Answer,
}

fn exact_quantum<P>(program: &P, stream: &[Symbol], cap: usize) -> Result<Vec<Branch>>
where
    P: QuantumProgram + ?Sized,
{
    let mut branches = vec![QBranch {
        state: program.initial_state(),
        probability: 1.0,
        answers: Vec::new(),
        pending: None,
    }];
    for (pos, &sym) in stream.iter().enumerate() {
        let ops = program.ops(pos, sym);
        let mut measured = false;
        for op in ops {
            match op {
                QuantumOp::Unitary { targets, matrix } => {
                    for b in &mut branches {
                        b.state.apply_on(targets, matrix);
                    }
                }
                QuantumOp::Measure { qubits, result } => {
                    measured = true;
                    branches = split(branches, qubits, cap, |b, outcome| {
                        b.pending = Some(result[outcome]);
                        Ok(())
                    })?;
                }
                QuantumOp::MeasureReset { qubits } => {
                    measured = true;
                    branches = split(branches, qubits, cap, |b, outcome| {
                        b.state.reset_work_register(qubits, outcome)
                    })?;
                }
            }
        }
        if sym == Symbol::Sep {
            for b in &mut branches {
                let out = b.pending.take();
                b.answers.push(out);
            }
        }
        if measured {
            branches = merge(branches);
        }
    }
    Ok(branches
        .into_iter()
        .map(|b| Branch {
            probability: b.probability,
            answers: b.answers,
        })
        .collect())
}

fn split<F>(
    branches: Vec<QBranch>,
    qubits: &[usize],
    cap: usize,
    mut finish: F,
) -> Result<Vec<QBranch>>
where
    F: FnMut(&mut QBranch, usize) -> Result<()>,
{
    let mut out = Vec::with_capacity(branches.len());
    for b in branches {
        let probs = b.state.outcome_probabilities(qubits);
        let live: Vec<usize> = (0..probs.len()).filter(|&u| probs[u] > PRUNE).collect();
        for &u in &live {
            let mut child = QBranch {
                state: b.state.clone(),
                probability: b.probability,
                answers: b.answers.clone(),
                pending: b.pending,
            };
            let p = child.state.collapse(qubits, u)?;
            child.probability *= p;
            finish(&mut child, u)?;
            out.push(child);
        }
        if out.len() > cap {
            return Err(Error::CapExceeded { cap });
        }
    }
    Ok(out)
}

fn merge(branches: Vec<QBranch>) -> Vec<QBranch> {
    let mut index: HashMap<(Vec<Answer>, Answer), Vec<usize>> = HashMap::new();
    let mut out: Vec<QBranch> = Vec::with_capacity(branches.len());
    for b in branches {
        let key = (b.answers.clone(), b.pending);
        let bucket = index.entry(key).or_default();
        if let Some(&j) = bucket
            .iter()
            .find(|&&j| out[j].state.fidelity(&b.state) > 1.0 - MERGE_TOL)
        {
            out[j].probability += b.probability;
        } else {
            bucket.push(out.len());
            out.push(b);
        }
    }
    out
}

/// Runs any machine kind over `stream`.
pub fn run_online(machine: &AnyMachine, stream: &[Symbol], mode: RunMode) -> Result<RunOutcome> {
    match machine {
        AnyMachine::Deterministic(m) => {
            let answers = run_deterministic(&mut m.runner(), stream);
            Ok(deterministic_outcome(answers, mode))
        }
        AnyMachine::Probabilistic(m) => run_stochastic(m, stream, mode),
        AnyMachine::Quantum(m) => run_quantum(m, stream, mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::machines::{DeterministicMachine, QuantumMachine};
    use crate::automata::quantum::Matrix;

    fn coin_guesser() -> QuantumMachine {
        let mut init = QuantumState::basis(1, 0);
        init.apply_unitary(&Matrix::hadamard()).unwrap();
        let layer = [
            vec![],
            vec![],
            vec![QuantumOp::Measure {
                qubits: vec![0],
                result: vec![0, 1],
            }],
        ];
        QuantumMachine::new(init, vec![layer]).unwrap()
    }

    #[test]
    fn deterministic_machine_has_one_branch() {
        let m = DeterministicMachine::new(0, vec![[0, 1, 0], [1, 0, 1]], vec![0, 1]).unwrap();
        let stream = [
            Symbol::Sep,
            Symbol::One,
            Symbol::Sep,
            Symbol::One,
            Symbol::Sep,
        ];
        let out = run_online(&m.clone().into(), &stream, RunMode::exact()).unwrap();
        let branches = out.branches().unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].probability, 1.0);
        assert_eq!(branches[0].answers, vec![Some(0), Some(1), Some(0)]);
        // The stochastic engine agrees.
        let via_program = run_stochastic(&m, &stream, RunMode::exact()).unwrap();
        assert_eq!(via_program, out);
        // Sampled runs are identical across seeds.
        let a = run_online(&m.clone().into(), &stream, RunMode::sampled(1, 5)).unwrap();
        let b = run_online(&m.into(), &stream, RunMode::sampled(2, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fair_coin_guesser_has_two_halves() {
        let m = coin_guesser();
        let out = run_quantum(&m, &[Symbol::Sep], RunMode::exact()).unwrap();
        let dist = out.distribution().unwrap();
        assert_eq!(dist.len(), 2);
        for p in dist.values() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        // Fresh coin on every separator: 2^4 answer sequences.
        let layer = [
            vec![],
            vec![],
            vec![
                QuantumOp::unitary(vec![0], Matrix::hadamard()),
                QuantumOp::Measure {
                    qubits: vec![0],
                    result: vec![0, 1],
                },
            ],
        ];
        let fresh = QuantumMachine::new(QuantumState::basis(1, 0), vec![layer]).unwrap();
        let stream = vec![Symbol::Sep; 4];
        let err = run_quantum(&fresh, &stream, RunMode::Exact { cap: 8 }).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { cap: 8 }));
        assert_eq!(
            run_quantum(&fresh, &stream, RunMode::Exact { cap: 16 })
                .unwrap()
                .len(),
            16
        );
        // Measuring a collapsed qubit again does not branch.
        let out = run_quantum(&coin_guesser(), &stream, RunMode::Exact { cap: 2 }).unwrap();
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let m = coin_guesser();
        let stream = vec![Symbol::Sep; 3];
        let a = run_quantum(&m, &stream, RunMode::sampled(42, 200)).unwrap();
        let b = run_quantum(&m, &stream, RunMode::sampled(42, 200)).unwrap();
        let c = run_quantum(&m, &stream, RunMode::sampled(43, 200)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // Repeated measurement of a collapsed qubit repeats the answer.
        for trace in a.traces().unwrap() {
            assert!(trace.iter().all(|x| *x == trace[0]));
        }
    }
}
