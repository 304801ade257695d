//! Acceptance checks shared by the `acceptance` test target and `blackhats verify`.
//!
//! Each check returns a one-line detail on success and a reason on failure. All
//! randomness is seeded from constants in this file.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversaries::{
    build_fooling_input, unbounded_adversary, BlockPools, FoolingOutcome, TripleSearch,
};
use crate::algorithms::{
    build_algorithm, build_bh_partialmod_single_qubit, build_random_guess, compose_bh_quantum,
    compose_bh_randomized, seeded_family, OnlineAlgorithm, ReferenceAlgorithm,
};
use crate::analysis::{
    bound_c1, bound_det_unbounded, empirical_ratio, expected_cost_oracle, state_lower_bound,
    to_f64, write_csv,
};
use crate::automata::{
    random_unitary, run_quantum, DeterministicMachine, Layer, QuantumMachine, QuantumOp,
    QuantumState, RunMode,
};
use crate::functions::{
    build_eq_fingerprint_quantum, build_eq_fingerprint_randomized, build_noisy_partialmod_quantum,
    build_partialmod_counter, build_partialmod_quantum, measure_error, partialmod_value,
    sample_block, with_output_noise, FingerprintConfig,
};
use crate::model::{suffix_parity, BhInstance, BhParams, FunctionSpec, Symbol};

pub const TOL: f64 = 1e-9;
/// Seed of the Monte Carlo runs in the separation check.
pub const MC_SEED: u64 = 42;
const INSTANCE_SEED: u64 = 2024;
const FAMILY_SEED: u64 = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {} ({}): {} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

type Check = fn() -> Result<String, String>;

/// `(id, name, suite, check)`.
pub const CRITERIA: [(u8, &str, &str, Check); 9] = [
    (
        1,
        "partialmod exactness",
        "partialmod",
        partialmod_exactness,
    ),
    (
        2,
        "noisy composition cost formula",
        "composition",
        composition_cost_formula,
    ),
    (3, "parity invariant", "composition", parity_invariant),
    (4, "separation demo", "separation", separation_demo),
    (
        5,
        "unbounded adversary",
        "adversary",
        unbounded_adversary_check,
    ),
    (6, "fooling input soundness", "adversary", fooling_soundness),
    (7, "EQ automata", "eq", eq_automata),
    (8, "engine invariants", "engine", engine_invariants),
    (9, "reproducibility", "reproducibility", reproducibility),
];

pub fn suites() -> Vec<&'static str> {
    let mut s: Vec<&str> = CRITERIA.iter().map(|c| c.2).collect();
    s.dedup();
    s
}

pub fn run_criterion(id: u8) -> Option<CriterionResult> {
    let &(id, name, _, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Some(CriterionResult {
        id,
        name,
        passed,
        detail,
        elapsed,
    })
}

/// Runs every criterion of `suite`, or all of them.
pub fn run_suite(suite: Option<&str>) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .filter(|c| suite.is_none_or(|s| s == c.2))
        .filter_map(|c| run_criterion(c.0))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: u64) -> Result<(), String> {
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < limit as f64, || {
        format!("took {secs:.1}s, limit {limit}s")
    })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn pm_instance(params: BhParams, beta: u32, seed: u64) -> Result<BhInstance, String> {
    let f = FunctionSpec::Partialmod { beta };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks = params
        .m()
        .iter()
        .map(|&m| sample_block(&f, m, None, &mut rng))
        .collect::<crate::Result<Vec<_>>>()
        .map_err(e)?;
    BhInstance::encode_feasible(params, blocks, &f).map_err(e)
}

fn exact_expected_cost(
    alg: &OnlineAlgorithm,
    inst: &BhInstance,
    f: &FunctionSpec,
) -> Result<f64, String> {
    let out = alg.run(inst.stream(), RunMode::exact()).map_err(e)?;
    let branches = out.branches().expect("exact");
    let mass: f64 = branches.iter().map(|b| b.probability).sum();
    ensure((mass - 1.0).abs() < TOL, || {
        format!("{}: branch mass {mass}", alg.name())
    })?;
    let mut total = 0.0;
    for b in branches {
        total += b.probability * inst.cost(&b.answers, f).map_err(e)?.total_cost as f64;
    }
    Ok(total)
}

/// Single-qubit machine: probability 1 of the right answer on every feasible
/// input of length at most 14, for `β ∈ {0, 1, 2, 3}`.
pub fn partialmod_exactness() -> Result<String, String> {
    let start = Instant::now();
    let mut inputs = 0;
    for beta in 0..=3u32 {
        let machine = build_partialmod_quantum(beta).into();
        let f = FunctionSpec::Partialmod { beta };
        for m in 0..=14 {
            let p = measure_error(&machine, &f, m).map_err(e)?;
            ensure(p.epsilon <= TOL, || {
                format!("beta {beta}, length {m}: error {}", p.epsilon)
            })?;
            inputs += p.inputs;
        }
    }
    within(start, 10)?;
    Ok(format!("{inputs} feasible inputs, all exact"))
}

fn noisy_algorithms(
    params: &BhParams,
    eps: &[f64],
    beta: u32,
) -> Result<[OnlineAlgorithm; 2], String> {
    let counter = build_partialmod_counter(beta);
    let rand = compose_bh_randomized("noisy-rand", params, |i, _| {
        with_output_noise(&counter, eps[i])
    })
    .map_err(e)?;
    let quant = compose_bh_quantum("noisy-quantum", params, |i, _| {
        build_noisy_partialmod_quantum(beta, eps[i])
    })
    .map_err(e)?;
    Ok([rand, quant])
}

/// The configurations of the cost-formula check: `(k, t, ε)` with `r = 1, w = 3`.
fn formula_grid() -> Vec<(usize, usize, f64)> {
    let mut grid = Vec::new();
    for k in [4usize, 12] {
        for z in [1usize, 2, 4] {
            for eps in [0.0, 0.1, 0.25] {
                grid.push((k, k / z, eps));
            }
        }
    }
    grid
}

/// Exact expected cost of both noisy compositions equals
/// `0.5 (1-ε)^(z-1) t (r-w) + t w` and the brute-force pattern oracle.
pub fn composition_cost_formula() -> Result<String, String> {
    let start = Instant::now();
    let f = FunctionSpec::Partialmod { beta: 1 };
    let mut checked = 0;
    for (k, t, eps) in formula_grid() {
        let params = BhParams::uniform(k, t, 1, 3, 8).map_err(e)?;
        let inst = pm_instance(params.clone(), 1, INSTANCE_SEED + k as u64)?;
        let z = params.z();
        let formula =
            0.5 * (1.0 - eps).powi(z as i32 - 1) * t as f64 * (1.0 - 3.0) + 3.0 * t as f64;
        let oracle = expected_cost_oracle(&vec![eps; k - 1], &params).map_err(e)?;
        ensure((oracle - formula).abs() < TOL, || {
            format!("oracle {oracle} vs formula {formula}")
        })?;
        for alg in noisy_algorithms(&params, &vec![eps; k], 1)? {
            let exact = exact_expected_cost(&alg, &inst, &f)?;
            ensure((exact - formula).abs() < TOL, || {
                format!(
                    "{} k={k} z={z} eps={eps}: exact {exact} vs formula {formula}",
                    alg.name()
                )
            })?;
            checked += 1;
        }
    }
    within(start, 30)?;
    Ok(format!("{checked} exact runs match formula and oracle"))
}

/// Every guardian answer is correct with marginal probability exactly 1/2.
pub fn parity_invariant() -> Result<String, String> {
    let pm = FunctionSpec::Partialmod { beta: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED);
    let mut algs_checked = 0;
    let mut worst: f64 = 0.0;
    let mut check =
        |alg: &OnlineAlgorithm, inst: &BhInstance, f: &FunctionSpec| -> Result<(), String> {
            let g = inst.offline_optimum(f).map_err(e)?;
            let out = alg.run(inst.stream(), RunMode::exact()).map_err(e)?;
            for (j, &gj) in g.iter().enumerate() {
                let p: f64 = out
                    .branches()
                    .expect("exact")
                    .iter()
                    .filter(|b| b.answers[j] == Some(gj as u8))
                    .map(|b| b.probability)
                    .sum();
                worst = worst.max((p - 0.5).abs());
                ensure((p - 0.5).abs() < TOL, || {
                    format!("{} guardian {j}: {p}", alg.name())
                })?;
            }
            algs_checked += 1;
            Ok(())
        };
    for (k, t) in [(6usize, 3usize), (8, 2), (5, 5)] {
        for _ in 0..4 {
            let eps: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..0.5)).collect();
            let params = BhParams::uniform(k, t, 1, 3, 8).map_err(e)?;
            let inst = pm_instance(params.clone(), 1, rng.gen())?;
            for alg in noisy_algorithms(&params, &eps, 1)? {
                check(&alg, &inst, &pm)?;
            }
        }
    }
    // EQ fingerprints err differently on each block.
    let params = BhParams::uniform(4, 2, 1, 3, 6).map_err(e)?;
    let blocks = ["001000", "101101", "000001", "110111"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let inst = BhInstance::encode(params.clone(), blocks).map_err(e)?;
    for id in ["bh-rand:eq", "bh-quantum:eq"] {
        check(
            &build_algorithm(id, &params, &FunctionSpec::Eq).map_err(e)?,
            &inst,
            &FunctionSpec::Eq,
        )?;
    }
    Ok(format!(
        "{algs_checked} compositions, max deviation {worst:.1e}"
    ))
}

fn dfas_up_to_two_states() -> Vec<DeterministicMachine> {
    let mut all = vec![
        DeterministicMachine::new(0, vec![[0, 0, 0]], vec![0]).unwrap(),
        DeterministicMachine::new(0, vec![[0, 0, 0]], vec![1]).unwrap(),
    ];
    for code in 0..1usize << 8 {
        let bit = |i: usize| (code >> i) & 1;
        let transitions = vec![[bit(0), bit(1), bit(2)], [bit(3), bit(4), bit(5)]];
        let outputs = vec![bit(6) as u8, bit(7) as u8];
        all.push(DeterministicMachine::new(0, transitions, outputs).unwrap());
    }
    all
}

/// `r=1, w=3, z=4, β=1, k=8`: exact quantum ratio 2, guessing ratio 2.875 by
/// Monte Carlo, and ratio 3 forced on small deterministic machines.
pub fn separation_demo() -> Result<String, String> {
    let start = Instant::now();
    let f = FunctionSpec::Partialmod { beta: 1 };
    let params = BhParams::uniform(8, 2, 1, 3, 8).map_err(e)?;
    let inst = pm_instance(params.clone(), 1, INSTANCE_SEED)?;

    let mut quantum = Vec::new();
    for alg in [
        build_bh_partialmod_single_qubit(1),
        build_algorithm("bh-quantum:partialmod", &params, &f).map_err(e)?,
    ] {
        let r = empirical_ratio(&alg, &inst, &f, RunMode::exact(), "separation").map_err(e)?;
        ensure((r.ratio - 2.0).abs() < TOL, || {
            format!("{} ratio {}", alg.name(), r.ratio)
        })?;
        quantum.push(r.ratio);
    }

    let trials = 100_000;
    let guess = empirical_ratio(
        &build_random_guess(),
        &inst,
        &f,
        RunMode::sampled(MC_SEED, trials),
        "separation",
    )
    .map_err(e)?;
    let zs = guess
        .z_score(2.875 * params.opt_cost() as f64)
        .expect("sampled");
    ensure(zs.abs() < 3.0, || {
        format!(
            "guess ratio {} is {zs:.2} standard errors from 2.875",
            guess.ratio
        )
    })?;

    let c1 = to_f64(&bound_c1(1, 3).map_err(e)?);
    let family = seeded_family(100, 2, false, FAMILY_SEED).map_err(e)?;
    for alg in &family {
        let outcome = build_fooling_input(
            alg.instantiate().expect("deterministic").as_mut(),
            &params,
            &f,
        )
        .map_err(e)?;
        let FoolingOutcome::Fooled(report) = outcome else {
            return Err(format!("{} was not fooled", alg.name()));
        };
        let (fooled, _) = report.instance.build().map_err(e)?;
        let r = empirical_ratio(alg, &fooled, &f, RunMode::exact(), "fooling").map_err(e)?;
        ensure(r.ratio == c1, || {
            format!("{}: ratio {}", alg.name(), r.ratio)
        })?;
    }
    let exhaustive = dfas_up_to_two_states();
    for dfa in &exhaustive {
        let outcome = build_fooling_input(&mut dfa.runner(), &params, &f).map_err(e)?;
        ensure(
            matches!(outcome, FoolingOutcome::Fooled(ref r) if r.ratio == c1),
            || {
                format!(
                    "a DFA with {} states escaped the adversary",
                    dfa.state_count()
                )
            },
        )?;
    }
    within(start, 60)?;
    Ok(format!(
        "quantum ratios {:?}; guess ratio {:.4} ± {:.4} (seed {MC_SEED}, N={trials}, z={zs:.2}); \
         {} seeded and all {} DFAs with <= 2 states forced to ratio {c1}",
        quantum,
        guess.ratio,
        guess.stderr.unwrap() / params.opt_cost() as f64,
        family.len(),
        exhaustive.len()
    ))
}

/// At least `⌊(k+1)/2⌋` wrong answers for 100 seeded deterministic algorithms.
pub fn unbounded_adversary_check() -> Result<String, String> {
    let f = FunctionSpec::Partialmod { beta: 1 };
    let params = BhParams::uniform(5, 5, 1, 3, 6).map_err(e)?;
    let pools = BlockPools::from_domain(&f, &[6]).map_err(e)?;
    let bound = to_f64(&bound_det_unbounded(5, 1, 3).map_err(e)?);
    let family = seeded_family(100, 8, true, FAMILY_SEED).map_err(e)?;
    let mut min_wrong = usize::MAX;
    let mut min_ratio = f64::INFINITY;
    for alg in &family {
        let report = unbounded_adversary(
            alg.instantiate().expect("deterministic").as_mut(),
            &params,
            &f,
            &pools,
        )
        .map_err(e)?;
        ensure(report.wrong_count >= 3, || {
            format!("{}: {} wrong", alg.name(), report.wrong_count)
        })?;
        ensure(report.ratio >= bound - TOL, || {
            format!("{}: ratio {}", alg.name(), report.ratio)
        })?;
        min_wrong = min_wrong.min(report.wrong_count);
        min_ratio = min_ratio.min(report.ratio);
    }
    let history = family
        .iter()
        .filter(|a| a.name().starts_with("history"))
        .count();
    Ok(format!(
        "{} algorithms ({history} history-keyed): min wrong {min_wrong} >= 3, min ratio {min_ratio} >= {bound}",
        family.len()
    ))
}

/// Successful fooling inputs are re-checked from scratch; the full-memory
/// reference algorithm yields a distinguishing certificate.
pub fn fooling_soundness() -> Result<String, String> {
    let f = FunctionSpec::Partialmod { beta: 1 };
    let params = BhParams::uniform(6, 3, 1, 3, 6).map_err(e)?;
    let family = seeded_family(100, 4, true, FAMILY_SEED + 1).map_err(e)?;
    let (mut fooled, mut certified) = (0, 0);
    for alg in &family {
        match build_fooling_input(
            alg.instantiate().expect("deterministic").as_mut(),
            &params,
            &f,
        )
        .map_err(e)?
        {
            FoolingOutcome::Fooled(report) => {
                // Rebuild from the report and evaluate f directly.
                let blocks = &report.instance.blocks;
                let values: Vec<bool> = blocks
                    .iter()
                    .map(|x| partialmod_value(x.bits(), 1).ok_or("infeasible block in report"))
                    .collect::<Result<_, _>>()?;
                let g = suffix_parity(&values);
                let inst = BhInstance::encode(params.clone(), blocks.clone()).map_err(e)?;
                let answers = crate::automata::run_deterministic(
                    alg.instantiate().expect("deterministic").as_mut(),
                    inst.stream(),
                );
                ensure(
                    answers.iter().zip(&g).all(|(a, &gj)| *a != Some(gj as u8)),
                    || format!("{}: a correct answer survived", alg.name()),
                )?;
                let cost = inst.cost(&answers, &f).map_err(e)?.total_cost;
                ensure(cost == params.worst_cost(), || {
                    format!("{}: cost {cost}", alg.name())
                })?;
                fooled += 1;
            }
            FoolingOutcome::Certificate { search, .. } => {
                ensure(search == TripleSearch::Distinguishes, || {
                    format!("{}: {search:?}", alg.name())
                })?;
                certified += 1;
            }
        }
    }
    ensure(fooled > 0, || "no algorithm was fooled".into())?;
    let outcome =
        build_fooling_input(&mut ReferenceAlgorithm::new(f.clone()), &params, &f).map_err(e)?;
    let stage = match outcome {
        FoolingOutcome::Certificate {
            stage,
            search: TripleSearch::Distinguishes,
        } => stage,
        other => return Err(format!("reference algorithm: {other:?}")),
    };
    Ok(format!(
        "{fooled} fooled and verified, {certified} certified; reference certified at stage {stage}"
    ))
}

/// One-sided fingerprints, their measured error, and the EQ width bound.
pub fn eq_automata() -> Result<String, String> {
    let start = Instant::now();
    let config = FingerprintConfig::default();
    let mut rand_eps: f64 = 0.0;
    let mut quant_eps: f64 = 0.0;
    let mut widths = Vec::new();
    for m in [6usize, 8, 10, 12] {
        let rand = build_eq_fingerprint_randomized(m, &config)
            .map_err(e)?
            .into();
        let quant = build_eq_fingerprint_quantum(m, &config).map_err(e)?.into();
        let pr = measure_error(&rand, &FunctionSpec::Eq, m).map_err(e)?;
        let pq = measure_error(&quant, &FunctionSpec::Eq, m).map_err(e)?;
        ensure(
            pr.max_false_reject <= TOL && pq.max_false_reject <= TOL,
            || {
                format!(
                    "false rejection at m={m}: {} / {}",
                    pr.max_false_reject, pq.max_false_reject
                )
            },
        )?;
        rand_eps = rand_eps.max(pr.epsilon);
        quant_eps = quant_eps.max(pq.epsilon);
        let width = state_lower_bound(&FunctionSpec::Eq, m).map_err(e)?.value;
        ensure(width >= 1 << (m / 2), || {
            format!("EQ width {width} at m={m}")
        })?;
        widths.push(width);
    }
    within(start, 60)?;
    let summary = format!(
        "no false rejections; EQ widths {widths:?}; worst error randomized {rand_eps:.6}, quantum {quant_eps:.6}"
    );
    // With the default primes the quantum acceptance amplitude at difference 1 is
    // the mean of cos(2π/p), which stays above 1/2.
    ensure(rand_eps <= 0.25 + TOL && quant_eps <= 0.25 + TOL, || {
        format!("{summary}; error budget 0.25 exceeded")
    })?;
    Ok(summary)
}

fn random_machine(rng: &mut ChaCha8Rng) -> QuantumMachine {
    let qubits = rng.gen_range(1..=3);
    let layer = |rng: &mut ChaCha8Rng| -> Layer {
        let ops = |with_measure: bool, rng: &mut ChaCha8Rng| {
            let mut v = vec![QuantumOp::unitary(
                (0..qubits).collect(),
                random_unitary(1 << qubits, rng),
            )];
            if with_measure {
                let q = rng.gen_range(0..qubits);
                v.push(QuantumOp::Measure {
                    qubits: vec![q],
                    result: vec![0, 1],
                });
            }
            v
        };
        let zero = ops(rng.gen_bool(0.3), rng);
        let one = ops(rng.gen_bool(0.3), rng);
        let sep = ops(true, rng);
        [zero, one, sep]
    };
    let layers = (0..rng.gen_range(1..=3)).map(|_| layer(rng)).collect();
    QuantumMachine::new(QuantumState::basis(qubits, 0), layers).expect("random machine is valid")
}

/// Norm preservation under random operations, unit branch mass, and
/// sampled/exact agreement on the configurations of the other checks.
pub fn engine_invariants() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(INSTANCE_SEED);
    let mut worst_norm: f64 = 0.0;
    for _ in 0..10_000 {
        let qubits = rng.gen_range(1..=4);
        let mut state = QuantumState::basis(qubits, 0);
        for _ in 0..6 {
            if rng.gen_bool(0.6) {
                let n = rng.gen_range(1..=qubits);
                let mut targets: Vec<usize> = (0..qubits).collect();
                rand::seq::SliceRandom::shuffle(targets.as_mut_slice(), &mut rng);
                targets.truncate(n);
                state.apply_on(&targets, &random_unitary(1 << n, &mut rng));
            } else {
                let q = rng.gen_range(0..qubits);
                state = state.measure(&[q], &mut rng).map_err(e)?.state;
            }
            worst_norm = worst_norm.max((state.norm() - 1.0).abs());
        }
    }
    ensure(worst_norm <= TOL, || format!("norm drift {worst_norm}"))?;

    let mut worst_mass: f64 = 0.0;
    for _ in 0..200 {
        let machine = random_machine(&mut rng);
        let len = rng.gen_range(1..=8);
        let stream: Vec<Symbol> = (0..len).map(|_| Symbol::ALL[rng.gen_range(0..3)]).collect();
        let out = run_quantum(&machine, &stream, RunMode::exact()).map_err(e)?;
        let mass: f64 = out
            .branches()
            .expect("exact")
            .iter()
            .map(|b| b.probability)
            .sum();
        worst_mass = worst_mass.max((mass - 1.0).abs());
    }
    ensure(worst_mass <= TOL, || {
        format!("branch mass drift {worst_mass}")
    })?;

    // Sampled vs exact on every composition configuration above.
    let f = FunctionSpec::Partialmod { beta: 1 };
    let mut compared = 0;
    let mut worst_z: f64 = 0.0;
    let mut compare = |alg: &OnlineAlgorithm, inst: &BhInstance| -> Result<(), String> {
        let exact = empirical_ratio(alg, inst, &f, RunMode::exact(), "engine").map_err(e)?;
        let mc = empirical_ratio(
            alg,
            inst,
            &f,
            RunMode::sampled(MC_SEED + compared, 4000),
            "engine",
        )
        .map_err(e)?;
        let z = mc
            .z_score(exact.exact_cost.expect("exact"))
            .expect("sampled");
        worst_z = worst_z.max(z.abs());
        ensure(z.abs() < 4.0, || {
            format!("{}: sampled mean {z:.2} standard errors off", alg.name())
        })?;
        compared += 1;
        Ok(())
    };
    for (k, t, eps) in formula_grid() {
        let params = BhParams::uniform(k, t, 1, 3, 8).map_err(e)?;
        let inst = pm_instance(params.clone(), 1, INSTANCE_SEED + k as u64)?;
        for alg in noisy_algorithms(&params, &vec![eps; k], 1)? {
            compare(&alg, &inst)?;
        }
    }
    let params = BhParams::uniform(8, 2, 1, 3, 8).map_err(e)?;
    let inst = pm_instance(params.clone(), 1, INSTANCE_SEED)?;
    for id in ["bh-pm-1qubit", "bh-quantum:partialmod", "guess"] {
        compare(&build_algorithm(id, &params, &f).map_err(e)?, &inst)?;
    }
    Ok(format!(
        "norm drift {worst_norm:.1e} over 10^4 sequences; mass drift {worst_mass:.1e}; \
         {compared} sampled/exact comparisons, max |z| {worst_z:.2}"
    ))
}

/// Same seed, same CSV bytes.
pub fn reproducibility() -> Result<String, String> {
    let f = FunctionSpec::Partialmod { beta: 1 };
    let params = BhParams::uniform(8, 2, 1, 3, 8).map_err(e)?;
    let inst = pm_instance(params.clone(), 1, INSTANCE_SEED)?;
    let csv_for = |id: &str, seed: u64| -> Result<Vec<u8>, String> {
        let alg = build_algorithm(id, &params, &f).map_err(e)?;
        let report =
            empirical_ratio(&alg, &inst, &f, RunMode::sampled(seed, 20_000), "repro").map_err(e)?;
        let mut buf = Vec::new();
        write_csv(&[report], &mut buf).map_err(e)?;
        Ok(buf)
    };
    let ids = [
        "guess",
        "bh-quantum:partialmod@0.1",
        "bh-rand:partialmod@0.25",
    ];
    for id in ids {
        let a = csv_for(id, MC_SEED)?;
        ensure(a == csv_for(id, MC_SEED)?, || {
            format!("{id}: CSV differs between identical runs")
        })?;
        ensure(a != csv_for(id, MC_SEED + 1)?, || {
            format!("{id}: seed has no effect")
        })?;
    }
    Ok(format!(
        "{} algorithms byte-identical under a fixed seed",
        ids.len()
    ))
}
