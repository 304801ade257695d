//! Deterministic, probabilistic and quantum streaming machines.
//!
//! Engines in [`super::engine`] run anything implementing [`StochasticProgram`]
//! (deterministic and randomized machines) or [`QuantumProgram`]. Both traits see
//! the 0-based stream position, so a program may key its behavior on a classical
//! position counter the way an id-ordered branching program does.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quantum::{Matrix, QuantumState, C64, MAX_QUBITS, NORM_TOL};
use crate::error::{Error, Result};
use crate::model::{Answer, Symbol};

/// Markov program over integer states.
pub trait StochasticProgram: Sync {
    /// Appends the initial distribution to `out`.
    fn initial(&self, out: &mut Vec<(usize, f64)>);
    /// Appends the distribution of the next state to `out`.
    fn transition(&self, pos: usize, symbol: Symbol, state: usize, out: &mut Vec<(usize, f64)>);
    /// Output of `state`, read after the transition at `pos`.
    fn output(&self, pos: usize, state: usize) -> Answer;
}

/// A single quantum operation inside one step.
#[derive(Clone, Debug)]
pub enum QuantumOp {
    Unitary {
        targets: Vec<usize>,
        matrix: Arc<Matrix>,
    },
    /// Projective measurement; the step answer becomes `result[outcome]`.
    Measure { qubits: Vec<usize>, result: Vec<u8> },
    /// Measurement whose outcome is discarded after the qubits are returned to `|0⟩`.
    MeasureReset { qubits: Vec<usize> },
}

impl QuantumOp {
    pub fn unitary(targets: Vec<usize>, matrix: Matrix) -> Self {
        QuantumOp::Unitary {
            targets,
            matrix: Arc::new(matrix),
        }
    }

    fn validate(&self, qubits: usize) -> Result<()> {
        let check_qubits = |list: &[usize]| -> Result<()> {
            let mut seen = vec![false; qubits];
            for &q in list {
                if q >= qubits || std::mem::replace(&mut seen[q], true) {
                    return Err(Error::InvalidMachine(format!(
                        "qubit list {list:?} is invalid for {qubits} qubits"
                    )));
                }
            }
            Ok(())
        };
        match self {
            QuantumOp::Unitary { targets, matrix } => {
                check_qubits(targets)?;
                if matrix.dim() != 1 << targets.len() {
                    return Err(Error::InvalidMachine(format!(
                        "matrix of dimension {} acts on {} qubits",
                        matrix.dim(),
                        targets.len()
                    )));
                }
                let defect = matrix.unitarity_defect();
                if defect > NORM_TOL {
                    return Err(Error::InvalidMachine(format!(
                        "matrix is not unitary (defect {defect:e})"
                    )));
                }
            }
            QuantumOp::Measure {
                qubits: list,
                result,
            } => {
                check_qubits(list)?;
                if result.len() != 1 << list.len() {
                    return Err(Error::InvalidMachine(format!(
                        "result map has {} entries for {} measured qubits",
                        result.len(),
                        list.len()
                    )));
                }
            }
            QuantumOp::MeasureReset { qubits: list } => check_qubits(list)?,
        }
        Ok(())
    }

    pub fn is_measurement(&self) -> bool {
        !matches!(self, QuantumOp::Unitary { .. })
    }
}

/// Quantum program over a fixed register.
pub trait QuantumProgram: Sync {
    fn qubits(&self) -> usize;
    fn initial_state(&self) -> QuantumState;
    /// Operations applied on reading `symbol` at stream position `pos`.
    fn ops(&self, pos: usize, symbol: Symbol) -> &[QuantumOp];
}

/// Black-box deterministic online algorithm that can be reset and replayed.
pub trait DeterministicAlgorithm: Send {
    fn reset(&mut self);
    fn step(&mut self, symbol: Symbol) -> Answer;
    fn name(&self) -> String {
        "deterministic".into()
    }
}

/// `(d_0, D, Δ, Result)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicMachine {
    initial: usize,
    transitions: Vec<[usize; 3]>,
    outputs: Vec<u8>,
}

impl DeterministicMachine {
    /// `transitions[state][symbol]` is the next state.
    pub fn new(initial: usize, transitions: Vec<[usize; 3]>, outputs: Vec<u8>) -> Result<Self> {
        let n = transitions.len();
        if n == 0 || initial >= n || outputs.len() != n {
            return Err(Error::InvalidMachine(format!(
                "deterministic machine with {n} states, initial {initial}, {} outputs",
                outputs.len()
            )));
        }
        if transitions.iter().flatten().any(|&s| s >= n) {
            return Err(Error::InvalidMachine("transition to unknown state".into()));
        }
        Ok(DeterministicMachine {
            initial,
            transitions,
            outputs,
        })
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn outputs(&self) -> &[u8] {
        &self.outputs
    }

    pub fn next(&self, state: usize, symbol: Symbol) -> usize {
        self.transitions[state][symbol.index()]
    }

    /// `(Δ(symbol, state), Result(Δ(symbol, state)))`.
    pub fn step(&self, state: usize, symbol: Symbol) -> (usize, u8) {
        let next = self.next(state, symbol);
        (next, self.outputs[next])
    }

    pub fn runner(&self) -> DeterministicRunner {
        DeterministicRunner {
            machine: self.clone(),
            state: self.initial,
        }
    }
}

impl StochasticProgram for DeterministicMachine {
    fn initial(&self, out: &mut Vec<(usize, f64)>) {
        out.push((self.initial, 1.0));
    }

    fn transition(&self, _pos: usize, symbol: Symbol, state: usize, out: &mut Vec<(usize, f64)>) {
        out.push((self.next(state, symbol), 1.0));
    }

    fn output(&self, _pos: usize, state: usize) -> Answer {
        Some(self.outputs[state])
    }
}

/// A deterministic machine with its current state, usable as a black box.
#[derive(Clone, Debug)]
pub struct DeterministicRunner {
    machine: DeterministicMachine,
    state: usize,
}

impl DeterministicRunner {
    pub fn machine(&self) -> &DeterministicMachine {
        &self.machine
    }
}

impl DeterministicAlgorithm for DeterministicRunner {
    fn reset(&mut self) {
        self.state = self.machine.initial;
    }

    fn step(&mut self, symbol: Symbol) -> Answer {
        let (next, out) = self.machine.step(self.state, symbol);
        self.state = next;
        Some(out)
    }

    fn name(&self) -> String {
        format!("dfa({} states)", self.machine.state_count())
    }
}

/// Sparse stochastic transitions: `transitions[symbol][state]` lists `(next, prob)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilisticMachine {
    initial: Vec<f64>,
    transitions: [Vec<Vec<(usize, f64)>>; 3],
    outputs: Vec<u8>,
}

const STOCHASTIC_TOL: f64 = 1e-12;

impl ProbabilisticMachine {
    pub fn new(
        initial: Vec<f64>,
        transitions: [Vec<Vec<(usize, f64)>>; 3],
        outputs: Vec<u8>,
    ) -> Result<Self> {
        let n = initial.len();
        if n == 0 || outputs.len() != n {
            return Err(Error::InvalidMachine(format!(
                "probabilistic machine with {n} states and {} outputs",
                outputs.len()
            )));
        }
        check_distribution(&initial.iter().copied().enumerate().collect::<Vec<_>>(), n)
            .map_err(|e| Error::InvalidMachine(format!("initial distribution: {e}")))?;
        for (sym, table) in transitions.iter().enumerate() {
            if table.len() != n {
                return Err(Error::InvalidMachine(format!(
                    "symbol {sym}: {} rows for {n} states",
                    table.len()
                )));
            }
            for (state, row) in table.iter().enumerate() {
                check_distribution(row, n).map_err(|e| {
                    Error::InvalidMachine(format!("symbol {sym}, state {state}: {e}"))
                })?;
            }
        }
        Ok(ProbabilisticMachine {
            initial,
            transitions,
            outputs,
        })
    }

    /// Embeds a deterministic machine.
    pub fn from_deterministic(machine: &DeterministicMachine) -> Self {
        let n = machine.state_count();
        let mut initial = vec![0.0; n];
        initial[machine.initial] = 1.0;
        let transitions = Symbol::ALL.map(|sym| {
            (0..n)
                .map(|s| vec![(machine.next(s, sym), 1.0)])
                .collect::<Vec<_>>()
        });
        ProbabilisticMachine {
            initial,
            transitions,
            outputs: machine.outputs.clone(),
        }
    }

    pub fn state_count(&self) -> usize {
        self.initial.len()
    }

    pub fn outputs(&self) -> &[u8] {
        &self.outputs
    }

    pub fn row(&self, symbol: Symbol, state: usize) -> &[(usize, f64)] {
        &self.transitions[symbol.index()][state]
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial
    }
}

fn check_distribution(row: &[(usize, f64)], n: usize) -> std::result::Result<(), String> {
    let mut total = 0.0;
    for &(s, p) in row {
        if s >= n {
            return Err(format!("unknown state {s}"));
        }
        if !(0.0..=1.0 + STOCHASTIC_TOL).contains(&p) {
            return Err(format!("probability {p} out of range"));
        }
        total += p;
    }
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(format!("probabilities sum to {total}"));
    }
    Ok(())
}

impl StochasticProgram for ProbabilisticMachine {
    fn initial(&self, out: &mut Vec<(usize, f64)>) {
        out.extend(
            self.initial
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, p)| p > 0.0),
        );
    }

    fn transition(&self, _pos: usize, symbol: Symbol, state: usize, out: &mut Vec<(usize, f64)>) {
        out.extend_from_slice(self.row(symbol, state));
    }

    fn output(&self, _pos: usize, state: usize) -> Answer {
        Some(self.outputs[state])
    }
}

/// Operations for each symbol at one position.
pub type Layer = [Vec<QuantumOp>; 3];

/// Quantum streaming machine. Position `p` uses `layers[min(p, len - 1)]`; a
/// single layer is an ordinary automaton, more layers add a classical position
/// counter.
#[derive(Clone, Debug)]
pub struct QuantumMachine {
    qubits: usize,
    initial: QuantumState,
    layers: Vec<Layer>,
}

impl QuantumMachine {
    pub fn new(initial: QuantumState, layers: Vec<Layer>) -> Result<Self> {
        let qubits = initial.qubits();
        if qubits > MAX_QUBITS {
            return Err(Error::InvalidMachine(format!(
                "{qubits} qubits exceeds the cap of {MAX_QUBITS}"
            )));
        }
        if layers.is_empty() {
            return Err(Error::InvalidMachine(
                "quantum machine needs at least one layer".into(),
            ));
        }
        for op in layers.iter().flatten().flatten() {
            op.validate(qubits)?;
        }
        Ok(QuantumMachine {
            qubits,
            initial,
            layers,
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Classical counter bits needed to index the layers.
    pub fn counter_bits(&self) -> usize {
        let n = self.layers.len();
        if n <= 1 {
            0
        } else {
            (usize::BITS - (n - 1).leading_zeros()) as usize
        }
    }

    /// Splits the operations at `(pos, Sep)` into the unitary prefix and a final
    /// answer-producing measurement, as needed to couple the result elsewhere.
    pub fn readout(&self, pos: usize) -> Result<(&[QuantumOp], &[usize], &[u8])> {
        let ops = self.ops(pos, Symbol::Sep);
        match ops.split_last() {
            Some((QuantumOp::Measure { qubits, result }, prefix))
                if prefix.iter().all(|op| !op.is_measurement()) =>
            {
                Ok((prefix, qubits, result))
            }
            _ => Err(Error::InvalidMachine(format!(
                "end marker at position {pos} must be unitaries followed by one measurement"
            ))),
        }
    }
}

impl QuantumProgram for QuantumMachine {
    fn qubits(&self) -> usize {
        self.qubits
    }

    fn initial_state(&self) -> QuantumState {
        self.initial.clone()
    }

    fn ops(&self, pos: usize, symbol: Symbol) -> &[QuantumOp] {
        let layer = &self.layers[pos.min(self.layers.len() - 1)];
        &layer[symbol.index()]
    }
}

/// Any of the three machine kinds, as loaded from JSON.
#[derive(Clone, Debug)]
pub enum AnyMachine {
    Deterministic(DeterministicMachine),
    Probabilistic(ProbabilisticMachine),
    Quantum(QuantumMachine),
}

impl From<DeterministicMachine> for AnyMachine {
    fn from(m: DeterministicMachine) -> Self {
        AnyMachine::Deterministic(m)
    }
}

impl From<ProbabilisticMachine> for AnyMachine {
    fn from(m: ProbabilisticMachine) -> Self {
        AnyMachine::Probabilistic(m)
    }
}

impl From<QuantumMachine> for AnyMachine {
    fn from(m: QuantumMachine) -> Self {
        AnyMachine::Quantum(m)
    }
}

// JSON forms. Complex numbers are `[re, im]`; matrices are row-major lists of them.

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum MachineJson {
    Deterministic {
        initial: usize,
        transitions: Vec<[usize; 3]>,
        outputs: Vec<u8>,
    },
    Probabilistic {
        initial: Vec<f64>,
        transitions: SymbolTable<Vec<Vec<(usize, f64)>>>,
        outputs: Vec<u8>,
    },
    Quantum {
        initial: Vec<[f64; 2]>,
        layers: Vec<SymbolTable<Vec<OpJson>>>,
    },
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SymbolTable<T> {
    #[serde(rename = "0", default)]
    zero: T,
    #[serde(rename = "1", default)]
    one: T,
    #[serde(rename = "2", default)]
    sep: T,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
enum OpJson {
    Unitary {
        targets: Vec<usize>,
        matrix: Vec<[f64; 2]>,
    },
    Measure {
        qubits: Vec<usize>,
        result: Vec<u8>,
    },
    MeasureReset {
        qubits: Vec<usize>,
    },
}

impl OpJson {
    fn into_op(self) -> Result<QuantumOp> {
        Ok(match self {
            OpJson::Unitary { targets, matrix } => {
                let dim = 1usize << targets.len();
                let data = matrix
                    .into_iter()
                    .map(|[re, im]| C64::new(re, im))
                    .collect();
                QuantumOp::unitary(targets, Matrix::from_row_major(dim, data)?)
            }
            OpJson::Measure { qubits, result } => QuantumOp::Measure { qubits, result },
            OpJson::MeasureReset { qubits } => QuantumOp::MeasureReset { qubits },
        })
    }

    fn from_op(op: &QuantumOp) -> Self {
        match op {
            QuantumOp::Unitary { targets, matrix } => OpJson::Unitary {
                targets: targets.clone(),
                matrix: matrix.data().iter().map(|c| [c.re, c.im]).collect(),
            },
            QuantumOp::Measure { qubits, result } => OpJson::Measure {
                qubits: qubits.clone(),
                result: result.clone(),
            },
            QuantumOp::MeasureReset { qubits } => OpJson::MeasureReset {
                qubits: qubits.clone(),
            },
        }
    }
}

impl AnyMachine {
    /// Parses and validates a machine description.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MachineJson = serde_json::from_str(text)?;
        Ok(match raw {
            MachineJson::Deterministic {
                initial,
                transitions,
                outputs,
            } => {
                AnyMachine::Deterministic(DeterministicMachine::new(initial, transitions, outputs)?)
            }
            MachineJson::Probabilistic {
                initial,
                transitions,
                outputs,
            } => {
                let t = [transitions.zero, transitions.one, transitions.sep];
                AnyMachine::Probabilistic(ProbabilisticMachine::new(initial, t, outputs)?)
            }
            MachineJson::Quantum { initial, layers } => {
                let amps = initial
                    .into_iter()
                    .map(|[re, im]| C64::new(re, im))
                    .collect();
                let state = QuantumState::new(amps)?;
                let layers = layers
                    .into_iter()
                    .map(|table| -> Result<Layer> {
                        let conv = |ops: Vec<OpJson>| {
                            ops.into_iter()
                                .map(OpJson::into_op)
                                .collect::<Result<Vec<_>>>()
                        };
                        Ok([conv(table.zero)?, conv(table.one)?, conv(table.sep)?])
                    })
                    .collect::<Result<Vec<_>>>()?;
                AnyMachine::Quantum(QuantumMachine::new(state, layers)?)
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let raw = match self {
            AnyMachine::Deterministic(m) => MachineJson::Deterministic {
                initial: m.initial,
                transitions: m.transitions.clone(),
                outputs: m.outputs.clone(),
            },
            AnyMachine::Probabilistic(m) => {
                let [zero, one, sep] = m.transitions.clone();
                MachineJson::Probabilistic {
                    initial: m.initial.clone(),
                    transitions: SymbolTable { zero, one, sep },
                    outputs: m.outputs.clone(),
                }
            }
            AnyMachine::Quantum(m) => MachineJson::Quantum {
                initial: m
                    .initial
                    .amplitudes()
                    .iter()
                    .map(|c| [c.re, c.im])
                    .collect(),
                layers: m
                    .layers
                    .iter()
                    .map(|[zero, one, sep]| {
                        let conv = |ops: &Vec<QuantumOp>| ops.iter().map(OpJson::from_op).collect();
                        SymbolTable {
                            zero: conv(zero),
                            one: conv(one),
                            sep: conv(sep),
                        }
                    })
                    .collect(),
            },
        };
        Ok(serde_json::to_string(&raw)?)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AnyMachine::Deterministic(_) => "deterministic",
            AnyMachine::Probabilistic(_) => "probabilistic",
            AnyMachine::Quantum(_) => "quantum",
        }
    }
}
