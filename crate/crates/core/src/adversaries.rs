//! Adversaries against deterministic online algorithms.
//!
//! Both adversaries treat the algorithm as a black box that can be reset and
//! replayed from the start of the stream. Stages and guardians are 0-based.

use std::collections::HashMap;

use serde::Serialize;

use crate::automata::{run_deterministic, DeterministicAlgorithm};
use crate::error::{Error, Result};
use crate::functions::domain;
use crate::model::{
    suffix_parity, Answer, BhInstance, BhParams, BitString, FunctionSpec, InstanceFile,
    OutputTrace, Symbol,
};

/// Two blocks with different `f` on which the algorithm gives the same answer at
/// the following guardian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConfusionTriple {
    pub stage: usize,
    /// Common answer at guardian `stage + 1`.
    pub answer: Answer,
    pub x0: BitString,
    pub x1: BitString,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TripleSearch {
    Found(ConfusionTriple),
    /// Every answer class holds only one `f` value: the algorithm computes `f`
    /// or its negation at this stage.
    Distinguishes,
    /// No block of this length has one of the two `f` values.
    EmptyDomain,
}

fn extend(prefix: &[Symbol], block: &BitString, closing: bool) -> Vec<Symbol> {
    let mut stream = prefix.to_vec();
    stream.push(Symbol::Sep);
    stream.extend(block.bits().iter().map(|&b| Symbol::from_bit(b)));
    if closing {
        stream.push(Symbol::Sep);
    }
    stream
}

/// Answer at the guardian that ends `stream`.
fn last_answer(alg: &mut dyn DeterministicAlgorithm, stream: &[Symbol]) -> Answer {
    run_deterministic(alg, stream).last().copied().flatten()
}

/// Replays `prefix · 2 · X · 2` for every length-`m` block `X` in `f`'s domain
/// (lexicographic order) and groups blocks by the final answer. Returns the
/// group whose first member is smallest among groups holding both `f` values,
/// with the smallest block of each value.
pub fn find_confusion_triple(
    alg: &mut dyn DeterministicAlgorithm,
    prefix: &[Symbol],
    stage: usize,
    m: usize,
    f: &FunctionSpec,
) -> Result<TripleSearch> {
    let blocks = domain(f, m)?;
    if !blocks.iter().any(|(_, v)| *v) || !blocks.iter().any(|(_, v)| !*v) {
        return Ok(TripleSearch::EmptyDomain);
    }
    // answer -> (order of first appearance, smallest f=0 block, smallest f=1 block)
    let mut groups: HashMap<Answer, (usize, Option<BitString>, Option<BitString>)> = HashMap::new();
    for (x, value) in blocks {
        let answer = last_answer(alg, &extend(prefix, &x, true));
        let order = groups.len();
        let entry = groups.entry(answer).or_insert((order, None, None));
        let slot = if value { &mut entry.2 } else { &mut entry.1 };
        slot.get_or_insert(x);
    }
    let best = groups
        .into_iter()
        .filter_map(|(answer, (order, x0, x1))| Some((order, answer, x0?, x1?)))
        .min_by_key(|(order, ..)| *order);
    Ok(match best {
        Some((_, answer, x0, x1)) => TripleSearch::Found(ConfusionTriple {
            stage,
            answer,
            x0,
            x1,
        }),
        None => TripleSearch::Distinguishes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    /// Answer at guardian `i`, observed before block `i` is read.
    pub y: Answer,
    #[serde(rename = "X0")]
    pub x0: BitString,
    #[serde(rename = "X1")]
    pub x1: BitString,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoolingReport {
    pub algorithm: String,
    pub indexing: &'static str,
    /// Confusion pairs for blocks `0..k-1`; the last block needs none.
    pub stages: Vec<StageRecord>,
    /// `σ_i = f(X_i)` of the chosen blocks.
    pub sigma: Vec<u8>,
    pub instance: InstanceFile,
    pub costs: OutputTrace,
    pub opt_cost: u64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FoolingOutcome {
    Fooled(FoolingReport),
    /// The triple search failed at `stage`.
    Certificate {
        stage: usize,
        search: TripleSearch,
    },
}

impl FoolingOutcome {
    pub fn into_result(self) -> Result<FoolingReport> {
        match self {
            FoolingOutcome::Fooled(r) => Ok(r),
            FoolingOutcome::Certificate { stage, search } => Err(Error::AdversaryFailed {
                stage,
                reason: match search {
                    TripleSearch::EmptyDomain => "a block value is missing from the domain".into(),
                    _ => "the algorithm distinguishes f at this stage".into(),
                },
            }),
        }
    }
}

/// Builds an instance on which every guardian answer of `alg` is wrong.
///
/// Stage by stage: with `y_i` observed, a confusion triple fixes `y_{i+1}` for
/// both candidate blocks, and choosing `f(X_i) = y_i ^ y_{i+1}` makes `y_i` wrong
/// once `y_{i+1}` is. The last block takes `f(X_k) = ¬y_k`. The chosen values
/// then satisfy `σ_i = y_i ^ 1 ^ σ_{i+1} ^ … ^ σ_k`, which is checked along with
/// an independent rerun of the algorithm on the finished instance.
pub fn build_fooling_input(
    alg: &mut dyn DeterministicAlgorithm,
    params: &BhParams,
    f: &FunctionSpec,
) -> Result<FoolingOutcome> {
    let k = params.k();
    let mut prefix: Vec<Symbol> = Vec::new();
    let mut stages = Vec::with_capacity(k);
    let mut blocks = Vec::with_capacity(k);
    let mut sigma = Vec::with_capacity(k);
    let mut observed = Vec::with_capacity(k);
    for (i, &m) in params.m().iter().enumerate() {
        let mut probe = prefix.clone();
        probe.push(Symbol::Sep);
        let y = last_answer(alg, &probe);
        observed.push(y);
        let yi = y.unwrap_or(0) & 1;
        let (block, s) = if i + 1 < k {
            let triple = match find_confusion_triple(alg, &prefix, i, m, f)? {
                TripleSearch::Found(t) => t,
                search => return Ok(FoolingOutcome::Certificate { stage: i, search }),
            };
            let s = yi ^ (triple.answer.unwrap_or(0) & 1);
            stages.push(StageRecord {
                y,
                x0: triple.x0.clone(),
                x1: triple.x1.clone(),
            });
            (if s == 1 { triple.x1 } else { triple.x0 }, s)
        } else {
            let want = yi == 0;
            match domain(f, m)?.into_iter().find(|(_, v)| *v == want) {
                Some((x, _)) => (x, want as u8),
                None => {
                    return Ok(FoolingOutcome::Certificate {
                        stage: i,
                        search: TripleSearch::EmptyDomain,
                    })
                }
            }
        };
        prefix = extend(&prefix, &block, false);
        blocks.push(block);
        sigma.push(s);
    }

    for i in 0..k {
        let rest = sigma[i + 1..].iter().fold(0, |a, b| a ^ b);
        let yi = observed[i].unwrap_or(0) & 1;
        if sigma[i] != yi ^ 1 ^ rest {
            return Err(Error::ContractViolation(format!(
                "sigma recurrence fails at stage {i}"
            )));
        }
    }

    let instance = BhInstance::encode_feasible(params.clone(), blocks, f)?;
    let answers = run_deterministic(alg, instance.stream());
    let g = suffix_parity(&instance.f_values(f)?);
    if answers != observed || answers.iter().zip(&g).any(|(a, &gj)| *a == Some(gj as u8)) {
        return Err(Error::ContractViolation(
            "fooling input leaves a correct answer".into(),
        ));
    }
    let costs = instance.cost(&answers, f)?;
    let opt_cost = params.opt_cost();
    Ok(FoolingOutcome::Fooled(FoolingReport {
        algorithm: alg.name(),
        indexing: "0-based",
        stages,
        sigma,
        instance: InstanceFile::new(&instance, f),
        ratio: costs.total_cost as f64 / opt_cost as f64,
        costs,
        opt_cost,
    }))
}

/// Candidate blocks per length, split by `f` value.
#[derive(Clone, Debug, Default)]
pub struct BlockPools {
    pools: HashMap<usize, [Vec<BitString>; 2]>,
}

impl BlockPools {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds blocks, sorting them by their `f` value; infeasible blocks are rejected.
    pub fn add(
        &mut self,
        f: &FunctionSpec,
        blocks: impl IntoIterator<Item = BitString>,
    ) -> Result<()> {
        for x in blocks {
            let v = f.evaluate(x.bits()).ok_or_else(|| {
                Error::Pool(format!("block {x} is outside the domain of {}", f.name()))
            })?;
            self.pools.entry(x.len()).or_default()[v as usize].push(x);
        }
        Ok(())
    }

    /// Pools holding the whole domain for each length.
    pub fn from_domain(f: &FunctionSpec, lengths: &[usize]) -> Result<Self> {
        let mut pools = Self::new();
        for &m in lengths {
            if !pools.pools.contains_key(&m) {
                pools.add(f, domain(f, m)?.into_iter().map(|(x, _)| x))?;
            }
        }
        Ok(pools)
    }

    pub fn pick(&self, m: usize, value: bool, index: usize) -> Result<&BitString> {
        let pool = self
            .pools
            .get(&m)
            .map(|p| &p[value as usize])
            .filter(|p| !p.is_empty());
        pool.map(|p| &p[index % p.len()])
            .ok_or_else(|| Error::Pool(format!("no block of length {m} with f = {}", value as u8)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnboundedReport {
    pub algorithm: String,
    pub answers: Vec<Answer>,
    pub b: u8,
    pub wrong_count: usize,
    pub required: usize,
    pub instance: InstanceFile,
    pub costs: OutputTrace,
    pub opt_cost: u64,
    pub ratio: f64,
}

/// Feeds `f = 0` blocks, reads all `k` answers, and then picks the last block
/// with `f(X_k) ≠ b` where `b = 1` iff at least `⌊(k+1)/2⌋` answers are 1. All
/// correct answers then equal `¬b`, so at least `⌊(k+1)/2⌋` answers are wrong.
/// Missing answers count as 0 in the vote and are always wrong.
pub fn unbounded_adversary(
    alg: &mut dyn DeterministicAlgorithm,
    params: &BhParams,
    f: &FunctionSpec,
    pools: &BlockPools,
) -> Result<UnboundedReport> {
    let k = params.k();
    let m = params.m();
    let mut blocks: Vec<BitString> = (0..k - 1)
        .map(|i| pools.pick(m[i], false, i).cloned())
        .collect::<Result<_>>()?;
    let mut probe = Vec::new();
    for x in &blocks {
        probe = extend(&probe, x, false);
    }
    probe.push(Symbol::Sep);
    let answers = run_deterministic(alg, &probe);
    let required = k.div_ceil(2);
    let ones = answers.iter().filter(|a| **a == Some(1)).count();
    let b = ones >= required;
    blocks.push(pools.pick(m[k - 1], !b, 0)?.clone());

    let instance = BhInstance::encode_feasible(params.clone(), blocks, f)?;
    let rerun = run_deterministic(alg, instance.stream());
    if rerun != answers {
        return Err(Error::ContractViolation(
            "algorithm answered differently on replay".into(),
        ));
    }
    let costs = instance.cost(&answers, f)?;
    let wrong_count = costs.correctness.iter().filter(|c| !**c).count();
    let opt_cost = params.opt_cost();
    Ok(UnboundedReport {
        algorithm: alg.name(),
        answers,
        b: b as u8,
        wrong_count,
        required,
        instance: InstanceFile::new(&instance, f),
        ratio: costs.total_cost as f64 / opt_cost as f64,
        costs,
        opt_cost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{
        build_constant_baseline, random_dfa, seeded_family, HistoryHash, ReferenceAlgorithm,
    };
    use crate::automata::DeterministicMachine;

    fn pm(beta: u32) -> FunctionSpec {
        FunctionSpec::Partialmod { beta }
    }

    #[test]
    fn constant_output_confuses_everything() {
        let mut alg = build_constant_baseline(false).instantiate().unwrap();
        match find_confusion_triple(alg.as_mut(), &[], 0, 6, &pm(1)).unwrap() {
            TripleSearch::Found(t) => {
                assert_eq!(t.x0.ones(), 4);
                assert_eq!(t.x1.ones(), 6);
                assert_eq!(t.answer, Some(0));
                assert_eq!(t.x0.to_string(), "001111");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reference_distinguishes() {
        let f = pm(1);
        let mut alg = ReferenceAlgorithm::new(f.clone());
        assert_eq!(
            find_confusion_triple(&mut alg, &[], 0, 6, &f).unwrap(),
            TripleSearch::Distinguishes
        );
        let params = BhParams::uniform(3, 1, 1, 3, 6).unwrap();
        let outcome = build_fooling_input(&mut alg, &params, &f).unwrap();
        assert!(matches!(
            outcome,
            FoolingOutcome::Certificate {
                stage: 0,
                search: TripleSearch::Distinguishes
            }
        ));
        assert!(matches!(
            outcome.into_result(),
            Err(Error::AdversaryFailed { stage: 0, .. })
        ));
    }

    #[test]
    fn empty_domain_is_flagged() {
        // beta = 3 needs at least 16 ones.
        let mut alg = build_constant_baseline(false).instantiate().unwrap();
        assert_eq!(
            find_confusion_triple(alg.as_mut(), &[], 0, 10, &pm(3)).unwrap(),
            TripleSearch::EmptyDomain
        );
    }

    #[test]
    fn const0_two_blocks_by_hand() {
        // y = (0, 0): σ_2 = 1, σ_1 = 0 ^ 1 ^ 1 = 0, so g = (1, 1).
        let f = pm(1);
        let params = BhParams::uniform(2, 2, 1, 3, 6).unwrap();
        let mut alg = build_constant_baseline(false).instantiate().unwrap();
        let report = build_fooling_input(alg.as_mut(), &params, &f)
            .unwrap()
            .into_result()
            .unwrap();
        assert_eq!(report.sigma, vec![0, 1]);
        assert_eq!(report.costs.total_cost, 6);
        assert_eq!(report.ratio, 3.0);
        let (inst, _) = report.instance.build().unwrap();
        assert_eq!(inst.offline_optimum(&f).unwrap(), vec![true, true]);
    }

    #[test]
    fn small_machines_are_fooled() {
        let f = pm(1);
        let params = BhParams::uniform(4, 2, 1, 3, 6).unwrap();
        let mut fooled = 0;
        for seed in 0..40 {
            let dfa = random_dfa(1 + seed as usize % 3, seed).unwrap();
            let mut runner = dfa.runner();
            match build_fooling_input(&mut runner, &params, &f).unwrap() {
                FoolingOutcome::Fooled(r) => {
                    fooled += 1;
                    assert_eq!(r.costs.total_cost, params.worst_cost());
                    assert!(r.costs.correctness.iter().all(|c| !c));
                }
                FoolingOutcome::Certificate { search, .. } => {
                    assert_eq!(search, TripleSearch::Distinguishes)
                }
            }
        }
        // None of these seeded machines computes f on length-6 blocks.
        assert_eq!(fooled, 40);
    }

    #[test]
    fn unbounded_against_constants() {
        let f = pm(1);
        let params = BhParams::uniform(3, 3, 1, 3, 6).unwrap();
        let pools = BlockPools::from_domain(&f, &[6]).unwrap();
        let mut c0 = build_constant_baseline(false).instantiate().unwrap();
        let r = unbounded_adversary(c0.as_mut(), &params, &f, &pools).unwrap();
        assert_eq!(r.b, 0);
        assert_eq!(r.wrong_count, 3);
        let (inst, _) = r.instance.build().unwrap();
        assert_eq!(inst.offline_optimum(&f).unwrap(), vec![true; 3]);
        let mut c1 = build_constant_baseline(true).instantiate().unwrap();
        let r = unbounded_adversary(c1.as_mut(), &params, &f, &pools).unwrap();
        assert_eq!(r.b, 1);
        assert!(r.wrong_count >= 2);
    }

    #[test]
    fn unbounded_is_universal_on_seeded_family() {
        let f = pm(1);
        let params = BhParams::uniform(5, 5, 1, 3, 6).unwrap();
        let pools = BlockPools::from_domain(&f, &[6]).unwrap();
        for alg in seeded_family(30, 6, true, 11).unwrap() {
            let mut a = alg.instantiate().unwrap();
            let r = unbounded_adversary(a.as_mut(), &params, &f, &pools).unwrap();
            assert!(r.wrong_count >= 3, "{}", alg.name());
            // Replaying gives the same instance.
            let again = unbounded_adversary(a.as_mut(), &params, &f, &pools).unwrap();
            assert_eq!(again.instance, r.instance);
        }
        let mut h = HistoryHash::new(3);
        assert!(
            unbounded_adversary(&mut h, &params, &f, &pools)
                .unwrap()
                .wrong_count
                >= 3
        );
    }

    #[test]
    fn pool_errors() {
        let f = pm(1);
        let mut pools = BlockPools::new();
        assert!(pools.add(&f, ["0111".parse().unwrap()]).is_err());
        pools.add(&f, ["1111".parse().unwrap()]).unwrap();
        let params = BhParams::uniform(2, 1, 1, 3, 4).unwrap();
        let mut c0 = DeterministicMachine::new(0, vec![[0, 0, 0]], vec![0])
            .unwrap()
            .runner();
        // No f = 1 block of length 4 is available.
        assert!(matches!(
            unbounded_adversary(&mut c0, &params, &f, &pools),
            Err(Error::Pool(_))
        ));
    }
}
