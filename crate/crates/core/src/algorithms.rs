//! Online algorithms for Black Hats instances.
//!
//! The compositions follow the guess-and-XOR scheme: guess `y_1`, then for every
//! block run a subroutine `R` computing `f` and fold its result into the running
//! answer `p`, so that `y_{i+1} = y_i ^ R(X_i)`. The last block is read but never
//! evaluated.
//!
//! Subroutines are built per block from the known block lengths, since a machine
//! for `f` on `m` bits has to be started before the block is read.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::quantum::MAX_QUBITS;
use crate::automata::{
    deterministic_outcome, run_deterministic, run_quantum, run_stochastic, AnyMachine,
    DeterministicAlgorithm, DeterministicMachine, Matrix, ProbabilisticMachine, QuantumMachine,
    QuantumOp, QuantumProgram, QuantumState, RunMode, RunOutcome, StochasticProgram, C64,
};
use crate::error::{Error, Result};
use crate::functions::{
    build_eq_fingerprint_quantum, build_eq_fingerprint_randomized, build_noisy_partialmod_quantum,
    build_partialmod_counter, build_partialmod_quantum, error_on, with_output_noise,
    FingerprintConfig,
};
use crate::model::{Answer, BhInstance, BhParams, FunctionSpec, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Deterministic,
    Randomized,
    Quantum,
}

type Factory = Arc<dyn Fn() -> Box<dyn DeterministicAlgorithm> + Send + Sync>;

#[derive(Clone)]
enum Body {
    Deterministic(Factory),
    Randomized(Arc<dyn StochasticProgram + Send>),
    Quantum(Arc<dyn QuantumProgram + Send>),
}

/// A named online algorithm with its memory footprint.
#[derive(Clone)]
pub struct OnlineAlgorithm {
    name: String,
    memory: usize,
    body: Body,
    /// Guardian positions the algorithm was built for, if it depends on them.
    layout: Option<Vec<usize>>,
    /// Per-block subroutines of a composition, or `None` when not applicable.
    subroutines: Option<Vec<AnyMachine>>,
}

impl std::fmt::Debug for OnlineAlgorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OnlineAlgorithm")
            .field("name", &self.name)
            .field("kind", &self.kind())
            .field("memory", &self.memory)
            .finish()
    }
}

impl OnlineAlgorithm {
    pub fn deterministic<F>(name: impl Into<String>, memory: usize, factory: F) -> Self
    where
        F: Fn() -> Box<dyn DeterministicAlgorithm> + Send + Sync + 'static,
    {
        OnlineAlgorithm {
            name: name.into(),
            memory,
            body: Body::Deterministic(Arc::new(factory)),
            layout: None,
            subroutines: None,
        }
    }

    /// Wraps a stand-alone machine.
    pub fn from_machine(name: impl Into<String>, machine: AnyMachine) -> Self {
        let name = name.into();
        match machine {
            AnyMachine::Deterministic(m) => {
                let memory = bits_for(m.state_count());
                OnlineAlgorithm::deterministic(name, memory, move || Box::new(m.runner()))
            }
            AnyMachine::Probabilistic(m) => OnlineAlgorithm {
                name,
                memory: bits_for(m.state_count()),
                body: Body::Randomized(Arc::new(m)),
                layout: None,
                subroutines: None,
            },
            AnyMachine::Quantum(m) => OnlineAlgorithm {
                name,
                memory: m.qubits(),
                body: Body::Quantum(Arc::new(m)),
                layout: None,
                subroutines: None,
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> AlgorithmKind {
        match self.body {
            Body::Deterministic(_) => AlgorithmKind::Deterministic,
            Body::Randomized(_) => AlgorithmKind::Randomized,
            Body::Quantum(_) => AlgorithmKind::Quantum,
        }
    }

    /// Bits (deterministic, randomized) or qubits (quantum) of working memory,
    /// excluding any classical position counter.
    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Fresh black-box instance of a deterministic algorithm.
    pub fn instantiate(&self) -> Option<Box<dyn DeterministicAlgorithm>> {
        match &self.body {
            Body::Deterministic(factory) => Some(factory()),
            _ => None,
        }
    }

    pub fn run(&self, stream: &[Symbol], mode: RunMode) -> Result<RunOutcome> {
        if let Some(layout) = &self.layout {
            let seps: Vec<usize> = (0..stream.len())
                .filter(|&i| stream[i] == Symbol::Sep)
                .collect();
            if &seps != layout {
                return Err(Error::InvalidInstance(format!(
                    "{} was built for guardian positions {layout:?}, stream has {seps:?}",
                    self.name
                )));
            }
        }
        match &self.body {
            Body::Deterministic(factory) => {
                let mut alg = factory();
                Ok(deterministic_outcome(
                    run_deterministic(alg.as_mut(), stream),
                    mode,
                ))
            }
            Body::Randomized(p) => run_stochastic(p.as_ref(), stream, mode),
            Body::Quantum(p) => run_quantum(p.as_ref(), stream, mode),
        }
    }

    /// Error probability of each evaluated subroutine on its actual block
    /// (`k - 1` values), when the algorithm is a composition.
    pub fn prisoner_errors(
        &self,
        instance: &BhInstance,
        f: &FunctionSpec,
    ) -> Result<Option<Vec<f64>>> {
        let Some(subs) = &self.subroutines else {
            return Ok(None);
        };
        let values = instance.f_values(f)?;
        let k = values.len();
        subs.iter()
            .zip(instance.blocks())
            .take(k.saturating_sub(1))
            .zip(&values)
            .map(|((machine, x), &v)| error_on(machine, x, v))
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

fn bits_for(states: usize) -> usize {
    (usize::BITS - states.saturating_sub(1).leading_zeros()) as usize
}

/// Where a stream position falls relative to the guardians.
enum Place {
    Guardian(usize),
    Bit { block: usize, offset: usize },
}

fn locate(positions: &[usize], pos: usize) -> Place {
    let c = positions.partition_point(|&p| p <= pos);
    debug_assert!(c > 0, "streams start with a guardian");
    let start = positions[c - 1];
    if start == pos {
        Place::Guardian(c - 1)
    } else {
        Place::Bit {
            block: c - 1,
            offset: pos - start - 1,
        }
    }
}

/// Builds the subroutine of every block from `(block index, block length)`.
fn per_block<M, F>(params: &BhParams, mut build: F) -> Result<Vec<M>>
where
    F: FnMut(usize, usize) -> Result<M>,
{
    params
        .m()
        .iter()
        .enumerate()
        .map(|(i, &m)| build(i, m))
        .collect()
}

/// State `2s + p`: subroutine state `s`, running answer `p`.
struct RandomizedComposition {
    machines: Vec<Arc<ProbabilisticMachine>>,
    positions: Vec<usize>,
    lengths: Vec<usize>,
}

impl StochasticProgram for RandomizedComposition {
    fn initial(&self, out: &mut Vec<(usize, f64)>) {
        out.push((0, 0.5));
        out.push((1, 0.5));
    }

    fn transition(&self, pos: usize, symbol: Symbol, state: usize, out: &mut Vec<(usize, f64)>) {
        let k = self.positions.len();
        let (p, s) = (state & 1, state >> 1);
        match locate(&self.positions, pos) {
            Place::Guardian(i) => {
                let mut finished = Vec::new();
                if i == 0 {
                    finished.push((p, 1.0));
                } else {
                    let r = &self.machines[i - 1];
                    let m = self.lengths[i - 1];
                    let mut buf = Vec::new();
                    r.transition(m, Symbol::Sep, s, &mut buf);
                    for (s2, q) in buf {
                        let bit = r.output(m, s2).unwrap_or(0) as usize & 1;
                        finished.push((p ^ bit, q));
                    }
                }
                if i + 1 < k {
                    let mut init = Vec::new();
                    self.machines[i].initial(&mut init);
                    for &(p2, q) in &finished {
                        out.extend(init.iter().map(|&(s3, q3)| ((s3 << 1) | p2, q * q3)));
                    }
                } else {
                    out.extend(finished);
                }
            }
            Place::Bit { block, offset } if block + 1 < k => {
                let start = out.len();
                self.machines[block].transition(offset, symbol, s, out);
                for entry in &mut out[start..] {
                    entry.0 = (entry.0 << 1) | p;
                }
            }
            Place::Bit { .. } => out.push((state, 1.0)),
        }
    }

    fn output(&self, _pos: usize, state: usize) -> Answer {
        Some((state & 1) as u8)
    }
}

/// Guess-and-XOR with a randomized subroutine for every block length.
pub fn compose_bh_randomized<F>(
    name: impl Into<String>,
    params: &BhParams,
    family: F,
) -> Result<OnlineAlgorithm>
where
    F: FnMut(usize, usize) -> Result<ProbabilisticMachine>,
{
    let machines: Vec<ProbabilisticMachine> = per_block(params, family)?;
    let memory = 1 + machines
        .iter()
        .map(|m| bits_for(m.state_count()))
        .max()
        .unwrap_or(0);
    let subroutines = machines.iter().cloned().map(AnyMachine::from).collect();
    let program = RandomizedComposition {
        machines: machines.into_iter().map(Arc::new).collect(),
        positions: params.guardian_positions(),
        lengths: params.m().to_vec(),
    };
    Ok(OnlineAlgorithm {
        name: name.into(),
        memory,
        body: Body::Randomized(Arc::new(program)),
        layout: Some(params.guardian_positions()),
        subroutines: Some(subroutines),
    })
}

/// Work register on qubits `0..s`, answer qubit `s`.
struct QuantumComposition {
    qubits: usize,
    initial: QuantumState,
    machines: Vec<Arc<QuantumMachine>>,
    positions: Vec<usize>,
    guardian_ops: Vec<Vec<QuantumOp>>,
}

impl QuantumProgram for QuantumComposition {
    fn qubits(&self) -> usize {
        self.qubits
    }

    fn initial_state(&self) -> QuantumState {
        self.initial.clone()
    }

    fn ops(&self, pos: usize, symbol: Symbol) -> &[QuantumOp] {
        match locate(&self.positions, pos) {
            Place::Guardian(i) => &self.guardian_ops[i],
            Place::Bit { block, offset } if block + 1 < self.positions.len() => {
                self.machines[block].ops(offset, symbol)
            }
            Place::Bit { .. } => &[],
        }
    }
}

/// Unitary taking `|0…0⟩` to the subroutine's initial state, if that differs.
fn preparation(machine: &QuantumMachine) -> Result<Option<QuantumOp>> {
    let init = machine.initial_state();
    let amps = init.amplitudes();
    if (amps[0] - C64::new(1.0, 0.0)).norm() < 1e-15 {
        return Ok(None);
    }
    let u = Matrix::with_first_column(amps)?;
    Ok(Some(QuantumOp::unitary((0..init.qubits()).collect(), u)))
}

/// `|u, p⟩ → |u, p ⊕ result(u)⟩` on the measured qubits and the answer qubit.
fn xor_coupling(measured: &[usize], result: &[u8], answer: usize) -> Result<QuantumOp> {
    if result.iter().any(|&b| b > 1) {
        return Err(Error::InvalidMachine(
            "subroutine answers must be bits".into(),
        ));
    }
    let n = measured.len();
    let perm: Vec<usize> = (0..1usize << (n + 1))
        .map(|l| {
            let u = l & ((1 << n) - 1);
            let p = l >> n;
            u | ((p ^ result[u] as usize) << n)
        })
        .collect();
    let mut targets = measured.to_vec();
    targets.push(answer);
    Ok(QuantumOp::unitary(targets, Matrix::permutation(&perm)?))
}

/// Guess-and-XOR with a quantum subroutine for every block length. The answer
/// qubit starts in `|+⟩` and is measured at each guardian; after each block the
/// subroutine's readout is XOR-coupled into it and the work register is measured
/// and reset to `|0…0⟩`.
pub fn compose_bh_quantum<F>(
    name: impl Into<String>,
    params: &BhParams,
    family: F,
) -> Result<OnlineAlgorithm>
where
    F: FnMut(usize, usize) -> Result<QuantumMachine>,
{
    let machines: Vec<QuantumMachine> = per_block(params, family)?;
    let k = params.k();
    let work = machines.iter().map(|m| m.qubits()).max().unwrap_or(0);
    let qubits = work + 1;
    if qubits > MAX_QUBITS {
        return Err(Error::InvalidParams(format!(
            "composition needs {qubits} qubits, cap is {MAX_QUBITS}"
        )));
    }
    let answer = work;
    let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
    amps[0] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    amps[1 << answer] = amps[0];
    let initial = QuantumState::new(amps)?;

    let lengths = params.m();
    let mut guardian_ops = Vec::with_capacity(k);
    for i in 0..k {
        let mut ops = Vec::new();
        if i > 0 {
            let (prefix, measured, result) = machines[i - 1].readout(lengths[i - 1])?;
            ops.extend(prefix.iter().cloned());
            ops.push(xor_coupling(measured, result, answer)?);
        }
        ops.push(QuantumOp::Measure {
            qubits: vec![answer],
            result: vec![0, 1],
        });
        if i > 0 && work > 0 {
            ops.push(QuantumOp::MeasureReset {
                qubits: (0..work).collect(),
            });
        }
        if i + 1 < k {
            ops.extend(preparation(&machines[i])?);
        }
        guardian_ops.push(ops);
    }
    let subroutines = machines.iter().cloned().map(AnyMachine::from).collect();
    let program = QuantumComposition {
        qubits,
        initial,
        machines: machines.into_iter().map(Arc::new).collect(),
        positions: params.guardian_positions(),
        guardian_ops,
    };
    Ok(OnlineAlgorithm {
        name: name.into(),
        memory: qubits,
        body: Body::Quantum(Arc::new(program)),
        layout: Some(params.guardian_positions()),
        subroutines: Some(subroutines),
    })
}

/// One qubit in `|+⟩`, rotated by `π/2^(β+1)` per `1` and measured at every guardian.
/// A block with `v·2^β` ones rotates by `v·π/2`, so measurement outcomes flip
/// exactly when `v` is odd.
pub fn build_bh_partialmod_single_qubit(beta: u32) -> OnlineAlgorithm {
    let plain = build_partialmod_quantum(beta);
    let mut plus = QuantumState::basis(1, 0);
    plus.apply_unitary(&Matrix::hadamard()).expect("one qubit");
    let machine = QuantumMachine::new(plus, plain.layers().to_vec()).expect("same layers");
    OnlineAlgorithm::from_machine("bh-pm-1qubit", machine.into())
}

/// Fresh fair coin at every guardian.
pub fn build_random_guess() -> OnlineAlgorithm {
    let half = vec![(0, 0.5), (1, 0.5)];
    let stay = |s: usize| vec![(s, 1.0)];
    let machine = ProbabilisticMachine::new(
        vec![0.5, 0.5],
        [
            vec![stay(0), stay(1)],
            vec![stay(0), stay(1)],
            vec![half.clone(), half],
        ],
        vec![0, 1],
    )
    .expect("valid coin");
    OnlineAlgorithm::from_machine("guess", machine.into())
}

pub fn build_constant_baseline(bit: bool) -> OnlineAlgorithm {
    let machine =
        DeterministicMachine::new(0, vec![[0, 0, 0]], vec![bit as u8]).expect("one state");
    let name = if bit { "const1" } else { "const0" };
    OnlineAlgorithm::deterministic(name, 0, move || Box::new(machine.runner()))
}

/// Buffers each block and evaluates `f` exactly: `y_1 = 0`, `y_{i+1} = y_i ^ f(X_i)`.
/// Undefined values count as 0.
#[derive(Clone, Debug)]
pub struct ReferenceAlgorithm {
    f: FunctionSpec,
    parity: bool,
    buffer: Option<Vec<bool>>,
}

impl ReferenceAlgorithm {
    pub fn new(f: FunctionSpec) -> Self {
        ReferenceAlgorithm {
            f,
            parity: false,
            buffer: None,
        }
    }
}

impl DeterministicAlgorithm for ReferenceAlgorithm {
    fn reset(&mut self) {
        self.parity = false;
        self.buffer = None;
    }

    fn step(&mut self, symbol: Symbol) -> Answer {
        match symbol {
            Symbol::Sep => {
                if let Some(block) = self.buffer.replace(Vec::new()) {
                    self.parity ^= self.f.evaluate(&block).unwrap_or(false);
                }
            }
            bit => {
                if let Some(buf) = &mut self.buffer {
                    buf.push(bit == Symbol::One);
                }
            }
        }
        Some(self.parity as u8)
    }

    fn name(&self) -> String {
        "reference".into()
    }
}

pub fn build_reference(f: &FunctionSpec, params: &BhParams) -> OnlineAlgorithm {
    let f = f.clone();
    let memory = params.m().iter().max().copied().unwrap_or(0) + 1;
    OnlineAlgorithm::deterministic("reference", memory, move || {
        Box::new(ReferenceAlgorithm::new(f.clone()))
    })
}

/// Random DFA over `{0,1,2}` with the given number of states.
pub fn random_dfa(states: usize, seed: u64) -> Result<DeterministicMachine> {
    if states == 0 {
        return Err(Error::InvalidParams(
            "a DFA needs at least one state".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let transitions = (0..states)
        .map(|_| {
            [
                rng.gen_range(0..states),
                rng.gen_range(0..states),
                rng.gen_range(0..states),
            ]
        })
        .collect();
    let outputs = (0..states).map(|_| rng.gen_range(0..2u8)).collect();
    DeterministicMachine::new(0, transitions, outputs)
}

/// Answers with a bit of a hash of the entire history read so far.
#[derive(Clone, Debug)]
pub struct HistoryHash {
    seed: u64,
    state: u64,
}

impl HistoryHash {
    pub fn new(seed: u64) -> Self {
        HistoryHash { seed, state: seed }
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl DeterministicAlgorithm for HistoryHash {
    fn reset(&mut self) {
        self.state = self.seed;
    }

    fn step(&mut self, symbol: Symbol) -> Answer {
        self.state = mix(self.state ^ (symbol.index() as u64 + 1));
        Some((self.state >> 33) as u8 & 1)
    }

    fn name(&self) -> String {
        format!("history:{}", self.seed)
    }
}

/// `count` seeded deterministic algorithms: random DFAs with up to `max_states`
/// states and, when `with_history` is set, full-history hashers interleaved.
pub fn seeded_family(
    count: usize,
    max_states: usize,
    with_history: bool,
    seed: u64,
) -> Result<Vec<OnlineAlgorithm>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let s: u64 = rng.gen();
            if with_history && i % 2 == 1 {
                Ok(OnlineAlgorithm::deterministic(
                    format!("history:{s}"),
                    64,
                    move || Box::new(HistoryHash::new(s)),
                ))
            } else {
                let states = rng.gen_range(1..=max_states);
                let dfa = random_dfa(states, s)?;
                Ok(OnlineAlgorithm::from_machine(
                    format!("random-dfa:{states}:{s}"),
                    dfa.into(),
                ))
            }
        })
        .collect()
}

fn parse_eps(text: Option<&str>) -> Result<f64> {
    match text {
        None => Ok(0.0),
        Some(e) => e
            .parse::<f64>()
            .map_err(|_| Error::InvalidParams(format!("bad error rate '{e}'"))),
    }
}

/// Resolves a registry identifier:
/// `bh-rand:<fn>[@eps]`, `bh-quantum:<fn>[@eps]`, `bh-pm-1qubit`, `guess`,
/// `const0`, `const1`, `reference`, `random-dfa:<states>:<seed>`, `history:<seed>`.
pub fn build_algorithm(id: &str, params: &BhParams, f: &FunctionSpec) -> Result<OnlineAlgorithm> {
    let unknown = || Error::InvalidParams(format!("unknown algorithm '{id}'"));
    let parts: Vec<&str> = id.split(':').collect();
    let num = |s: &str| s.parse::<u64>().map_err(|_| unknown());
    match parts.as_slice() {
        ["guess"] => Ok(build_random_guess()),
        ["const0"] => Ok(build_constant_baseline(false)),
        ["const1"] => Ok(build_constant_baseline(true)),
        ["reference"] => Ok(build_reference(f, params)),
        ["bh-pm-1qubit"] => match f {
            FunctionSpec::Partialmod { beta } => Ok(build_bh_partialmod_single_qubit(*beta)),
            _ => Err(Error::InvalidParams(
                "bh-pm-1qubit needs a partialmod instance".into(),
            )),
        },
        ["random-dfa", states, seed] => {
            let states = num(states)? as usize;
            let dfa = random_dfa(states, num(seed)?)?;
            Ok(OnlineAlgorithm::from_machine(id, dfa.into()))
        }
        ["history", seed] => {
            let seed = num(seed)?;
            Ok(OnlineAlgorithm::deterministic(id, 64, move || {
                Box::new(HistoryHash::new(seed))
            }))
        }
        [family @ ("bh-rand" | "bh-quantum"), spec] => {
            let mut split = spec.splitn(2, '@');
            let fname = split.next().unwrap_or_default();
            let eps_text = split.next();
            if fname != f.short_name() {
                return Err(Error::InvalidParams(format!(
                    "algorithm '{id}' does not match the instance function {}",
                    f.name()
                )));
            }
            let eps = parse_eps(eps_text)?;
            let quantum = *family == "bh-quantum";
            match (f, quantum) {
                (FunctionSpec::Partialmod { beta }, false) => {
                    let counter = build_partialmod_counter(*beta);
                    compose_bh_randomized(id, params, |_, _| with_output_noise(&counter, eps))
                }
                (FunctionSpec::Partialmod { beta }, true) => {
                    compose_bh_quantum(id, params, |_, _| {
                        build_noisy_partialmod_quantum(*beta, eps)
                    })
                }
                (FunctionSpec::Eq, _) if eps_text.is_some() => Err(Error::InvalidParams(
                    "EQ fingerprints take no designed error rate".into(),
                )),
                (FunctionSpec::Eq, false) => {
                    let config = FingerprintConfig::default();
                    compose_bh_randomized(id, params, |_, m| {
                        build_eq_fingerprint_randomized(m, &config)
                    })
                }
                (FunctionSpec::Eq, true) => {
                    let config = FingerprintConfig::default();
                    compose_bh_quantum(id, params, |_, m| build_eq_fingerprint_quantum(m, &config))
                }
                (FunctionSpec::OracleTable { .. }, _) => Err(Error::InvalidParams(
                    "no subroutine automaton for oracle tables".into(),
                )),
            }
        }
        _ => Err(unknown()),
    }
}
