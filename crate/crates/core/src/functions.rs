//! Concrete block functions and automata that compute them.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automata::{
    run_online, AnyMachine, DeterministicMachine, Layer, Matrix, ProbabilisticMachine,
    QuantumMachine, QuantumOp, QuantumState, RunMode, C64,
};
use crate::error::{Error, Result};
use crate::model::{BitString, FunctionSpec, Symbol};

/// Largest block length for exhaustive enumeration.
pub const MAX_ENUMERATION_BITS: usize = 16;

/// `v mod 2` if `x` has `v * 2^beta` ones with `v >= 2`.
pub fn partialmod_value(x: &[bool], beta: u32) -> Option<bool> {
    let ones = x.iter().filter(|&&b| b).count() as u64;
    let unit = 1u64.checked_shl(beta)?;
    if !ones.is_multiple_of(unit) {
        return None;
    }
    let v = ones / unit;
    (v >= 2).then_some(v % 2 == 1)
}

/// 1 iff the first `⌊n/2⌋` bits equal the remaining bits. Odd lengths split into
/// halves of different length and therefore never match; the empty string matches.
pub fn eq_value(x: &[bool]) -> bool {
    let h = x.len() / 2;
    x[..h] == x[h..]
}

/// Rotation angle `π / 2^(β+1)` of the single-qubit PartialMOD machine.
pub fn partialmod_angle(beta: u32) -> f64 {
    PI / 2f64.powi(beta as i32 + 1)
}

/// One qubit: rotate by `π / 2^(β+1)` on every `1`, measure on the end marker.
pub fn build_partialmod_quantum(beta: u32) -> QuantumMachine {
    build_noisy_partialmod_quantum(beta, 0.0).expect("noise-free machine is valid")
}

/// Like [`build_partialmod_quantum`] but rotates by `θ` with `sin²θ = eps` just
/// before the final measurement, so the answer is flipped with probability `eps`
/// on every feasible input.
pub fn build_noisy_partialmod_quantum(beta: u32, eps: f64) -> Result<QuantumMachine> {
    check_eps(eps)?;
    let mut readout = Vec::new();
    if eps > 0.0 {
        readout.push(QuantumOp::unitary(
            vec![0],
            Matrix::rotation(eps.sqrt().asin()),
        ));
    }
    readout.push(QuantumOp::Measure {
        qubits: vec![0],
        result: vec![0, 1],
    });
    let layer: Layer = [
        vec![],
        vec![QuantumOp::unitary(
            vec![0],
            Matrix::rotation(partialmod_angle(beta)),
        )],
        readout,
    ];
    QuantumMachine::new(QuantumState::basis(1, 0), vec![layer])
}

/// Counter of ones modulo `2^(β+1)`; the answer is bit `β` of the counter.
pub fn build_partialmod_counter(beta: u32) -> DeterministicMachine {
    let modulus = 1usize << (beta + 1);
    let transitions = (0..modulus).map(|c| [c, (c + 1) % modulus, c]).collect();
    let outputs = (0..modulus).map(|c| ((c >> beta) & 1) as u8).collect();
    DeterministicMachine::new(0, transitions, outputs).expect("counter is well formed")
}

/// Flips the answer given on the end marker with probability `eps`.
pub fn with_output_noise(machine: &DeterministicMachine, eps: f64) -> Result<ProbabilisticMachine> {
    check_eps(eps)?;
    if machine.outputs().iter().any(|&o| o > 1) {
        return Err(Error::InvalidMachine(
            "output noise needs a binary machine".into(),
        ));
    }
    let n = machine.state_count();
    // State 2s + flag: underlying state s, flag = answer flipped.
    let mut initial = vec![0.0; 2 * n];
    initial[2 * machine.initial()] = 1.0;
    let transitions = Symbol::ALL.map(|sym| {
        (0..2 * n)
            .map(|code| {
                let next = machine.next(code / 2, sym);
                if sym == Symbol::Sep && eps > 0.0 {
                    vec![(2 * next, 1.0 - eps), (2 * next + 1, eps)]
                } else {
                    vec![(2 * next, 1.0)]
                }
            })
            .collect::<Vec<_>>()
    });
    let outputs = (0..2 * n)
        .map(|code| machine.outputs()[code / 2] ^ (code % 2) as u8)
        .collect();
    ProbabilisticMachine::new(initial, transitions, outputs)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::InvalidParams(format!(
            "error rate {eps} must lie in [0, 0.5)"
        )));
    }
    Ok(())
}

/// Prime moduli used by the EQ fingerprints.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FingerprintConfig {
    pub primes: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

impl Default for FingerprintConfig {
    fn default() -> Self {
        FingerprintConfig::first_primes(8)
    }
}

impl FingerprintConfig {
    /// The first `d` primes `>= 3`.
    pub fn first_primes(d: usize) -> Self {
        let primes = (3u64..).filter(|&n| is_prime(n)).take(d).collect();
        FingerprintConfig { primes, d: Some(d) }
    }

    pub fn d(&self) -> usize {
        self.primes.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.primes.is_empty() {
            return Err(Error::InvalidParams(
                "fingerprint needs at least one prime".into(),
            ));
        }
        if let Some(d) = self.d {
            if d != self.primes.len() {
                return Err(Error::InvalidParams(format!(
                    "d = {d} but {} primes given",
                    self.primes.len()
                )));
            }
        }
        for (i, &p) in self.primes.iter().enumerate() {
            if p <= 2 || !is_prime(p) {
                return Err(Error::InvalidParams(format!("{p} is not an odd prime")));
            }
            if self.primes[..i].contains(&p) {
                return Err(Error::InvalidParams(format!("prime {p} repeated")));
            }
        }
        Ok(())
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

fn check_even(m: usize) -> Result<()> {
    if !m.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "EQ fingerprints need even length, got {m}"
        )));
    }
    Ok(())
}

/// Picks a prime uniformly, then reads the first half into `a = Σ x_j 2^(h-j) mod p`
/// and the second half into `b` the same way; accepts on the end marker iff `a = b`.
/// Each state records (prime, position, a, b).
pub fn build_eq_fingerprint_randomized(
    m: usize,
    config: &FingerprintConfig,
) -> Result<ProbabilisticMachine> {
    config.validate()?;
    check_even(m)?;
    let h = m / 2;
    let mut offsets = Vec::with_capacity(config.d());
    let mut total = 0usize;
    for &p in &config.primes {
        offsets.push(total);
        total += (m + 1) * (p * p) as usize;
    }
    let accept = total;
    let reject = total + 1;
    let n = total + 2;
    let code = |i: usize, j: usize, a: u64, b: u64| {
        let p = config.primes[i];
        offsets[i] + (j * p as usize + a as usize) * p as usize + b as usize
    };

    let mut initial = vec![0.0; n];
    for i in 0..config.d() {
        initial[code(i, 0, 0, 0)] = 1.0 / config.d() as f64;
    }
    let mut transitions: [Vec<Vec<(usize, f64)>>; 3] = Default::default();
    for table in &mut transitions {
        *table = vec![Vec::new(); n];
    }
    for (i, &p) in config.primes.iter().enumerate() {
        for j in 0..=m {
            for a in 0..p {
                for b in 0..p {
                    let s = code(i, j, a, b);
                    for bit in [0u64, 1] {
                        let next = if j == m {
                            reject
                        } else if j < h {
                            code(i, j + 1, (2 * a + bit) % p, b)
                        } else {
                            code(i, j + 1, a, (2 * b + bit) % p)
                        };
                        transitions[bit as usize][s] = vec![(next, 1.0)];
                    }
                    let end = if j == m && a == b { accept } else { reject };
                    transitions[Symbol::Sep.index()][s] = vec![(end, 1.0)];
                }
            }
        }
    }
    for table in &mut transitions {
        table[accept] = vec![(accept, 1.0)];
        table[reject] = vec![(reject, 1.0)];
    }
    let mut outputs = vec![0u8; n];
    outputs[accept] = 1;
    ProbabilisticMachine::new(initial, transitions, outputs)
}

/// Index register in uniform superposition over the `d` primes plus one target
/// qubit. A `1` at position `j` of the first half rotates the target, controlled
/// on index `i`, by `2π·2^(h-j)/p_i`; the second half rotates by the negative. The
/// end marker undoes the index preparation and measures everything, accepting on
/// the all-zero outcome. Position is tracked by a classical counter (one layer per
/// position).
pub fn build_eq_fingerprint_quantum(
    m: usize,
    config: &FingerprintConfig,
) -> Result<QuantumMachine> {
    config.validate()?;
    check_even(m)?;
    let d = config.d();
    if !d.is_power_of_two() {
        return Err(Error::InvalidParams(format!(
            "quantum fingerprint needs a power-of-two prime count, got {d}"
        )));
    }
    let index_qubits = d.trailing_zeros() as usize;
    let qubits = index_qubits + 1;
    let h = m / 2;

    let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
    for a in amps.iter_mut().take(d) {
        *a = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    let initial = QuantumState::new(amps)?;
    let all: Vec<usize> = (0..qubits).collect();

    let mut layers: Vec<Layer> = Vec::with_capacity(m + 1);
    for j in 0..m {
        let (exponent, sign) = if j < h {
            (h - 1 - j, 1.0)
        } else {
            (m - 1 - j, -1.0)
        };
        let rotations: Vec<Matrix> = config
            .primes
            .iter()
            .map(|&p| {
                let residue = mod_pow2(exponent, p);
                Matrix::rotation(sign * 2.0 * PI * residue as f64 / p as f64)
            })
            .collect();
        let u = controlled_rotations(&rotations);
        layers.push([vec![], vec![QuantumOp::unitary(all.clone(), u)], vec![]]);
    }
    let mut end = Vec::new();
    if index_qubits > 0 {
        let hadamards =
            (1..index_qubits).fold(Matrix::hadamard(), |acc, _| acc.kron(&Matrix::hadamard()));
        end.push(QuantumOp::unitary((0..index_qubits).collect(), hadamards));
    }
    let mut result = vec![0u8; 1 << qubits];
    result[0] = 1;
    end.push(QuantumOp::Measure {
        qubits: all,
        result,
    });
    layers.push([vec![], vec![], end]);
    QuantumMachine::new(initial, layers)
}

/// `Σ_i |i⟩⟨i| ⊗ R_i` with the index on the low-order qubits and the target on top.
fn controlled_rotations(rotations: &[Matrix]) -> Matrix {
    let d = rotations.len();
    let dim = 2 * d;
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for (i, r) in rotations.iter().enumerate() {
        for t_out in 0..2 {
            for t_in in 0..2 {
                data[(t_out * d + i) * dim + t_in * d + i] = r.get(t_out, t_in);
            }
        }
    }
    Matrix::from_row_major(dim, data).expect("square by construction")
}

fn mod_pow2(exponent: usize, p: u64) -> u64 {
    (0..exponent).fold(1 % p, |acc, _| (2 * acc) % p)
}

/// Every length-`m` input on which `f` is defined, with its value.
pub fn domain(f: &FunctionSpec, m: usize) -> Result<Vec<(BitString, bool)>> {
    if m > MAX_ENUMERATION_BITS {
        return Err(Error::DomainTooLarge {
            bits: m,
            limit: MAX_ENUMERATION_BITS,
        });
    }
    Ok(BitString::all(m)
        .filter_map(|x| f.evaluate(x.bits()).map(|v| (x, v)))
        .collect())
}

/// Exact probability that `machine`, run on `x` followed by the end marker,
/// answers something other than `expected`.
pub fn error_on(machine: &AnyMachine, x: &BitString, expected: bool) -> Result<f64> {
    let mut stream: Vec<Symbol> = x.bits().iter().map(|&b| Symbol::from_bit(b)).collect();
    stream.push(Symbol::Sep);
    let outcome = run_online(machine, &stream, RunMode::exact())?;
    let correct: f64 = outcome
        .branches()
        .expect("exact mode")
        .iter()
        .filter(|b| b.answers.last() == Some(&Some(expected as u8)))
        .map(|b| b.probability)
        .sum();
    Ok((1.0 - correct).max(0.0))
}

/// Worst-case error over a function's domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorProfile {
    pub epsilon: f64,
    /// Largest error on inputs with `f = 0`.
    pub max_false_accept: f64,
    /// Largest error on inputs with `f = 1`.
    pub max_false_reject: f64,
    pub inputs: usize,
}

impl ErrorProfile {
    pub const TOL: f64 = 1e-9;

    pub fn is_exact(&self) -> bool {
        self.epsilon <= Self::TOL
    }

    /// Errors happen on at most one output value.
    pub fn is_one_sided(&self) -> bool {
        self.max_false_accept <= Self::TOL || self.max_false_reject <= Self::TOL
    }
}

pub fn measure_error(machine: &AnyMachine, f: &FunctionSpec, m: usize) -> Result<ErrorProfile> {
    let mut profile = ErrorProfile {
        epsilon: 0.0,
        max_false_accept: 0.0,
        max_false_reject: 0.0,
        inputs: 0,
    };
    for (x, value) in domain(f, m)? {
        let err = error_on(machine, &x, value)?;
        profile.inputs += 1;
        profile.epsilon = profile.epsilon.max(err);
        if value {
            profile.max_false_reject = profile.max_false_reject.max(err);
        } else {
            profile.max_false_accept = profile.max_false_accept.max(err);
        }
    }
    Ok(profile)
}

/// Random block in `f`'s domain. PartialMOD draws `v` uniformly from
/// `[2, v_max]` (default: the largest that fits) and shuffles the ones; EQ
/// produces equal halves with probability 1/2.
pub fn sample_block<R: Rng + ?Sized>(
    f: &FunctionSpec,
    m: usize,
    v_max: Option<u64>,
    rng: &mut R,
) -> Result<BitString> {
    match f {
        FunctionSpec::Partialmod { beta } => {
            let unit = 1u64 << beta;
            let fit = m as u64 / unit;
            let hi = v_max.unwrap_or(fit).min(fit);
            if hi < 2 {
                return Err(Error::InvalidParams(format!(
                    "no feasible PartialMOD block of length {m} with beta = {beta}"
                )));
            }
            let v = rng.gen_range(2..=hi);
            let mut bits = vec![false; m];
            bits.iter_mut()
                .take((v * unit) as usize)
                .for_each(|b| *b = true);
            bits.shuffle(rng);
            Ok(BitString(bits))
        }
        FunctionSpec::Eq => {
            let h = m / 2;
            let first: Vec<bool> = (0..h).map(|_| rng.gen()).collect();
            let mut second: Vec<bool> = (0..m - h).map(|_| rng.gen()).collect();
            if m.is_multiple_of(2) && rng.gen::<bool>() {
                second = first.clone();
            }
            Ok(BitString([first, second].concat()))
        }
        FunctionSpec::OracleTable { .. } => {
            let dom = domain(f, m)?;
            dom.choose(rng).map(|(x, _)| x.clone()).ok_or_else(|| {
                Error::InvalidParams(format!("oracle table has no input of length {m}"))
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{run_deterministic, DeterministicAlgorithm, QuantumProgram};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(count: usize, len: usize) -> Vec<bool> {
        (0..len).map(|i| i < count).collect()
    }

    #[test]
    fn partialmod_values() {
        assert_eq!(partialmod_value(&ones(4, 8), 1), Some(false));
        assert_eq!(partialmod_value(&ones(6, 8), 1), Some(true));
        assert_eq!(partialmod_value(&ones(3, 8), 1), None);
        assert_eq!(partialmod_value(&ones(2, 8), 1), None);
        assert_eq!(partialmod_value(&ones(2, 2), 0), Some(false));
        assert_eq!(partialmod_value(&ones(0, 4), 0), None);
    }

    #[test]
    fn eq_values() {
        let b = |s: &str| s.parse::<BitString>().unwrap().0;
        assert!(eq_value(&b("0101")));
        assert!(!eq_value(&b("0100")));
        assert!(eq_value(&[]));
        assert!(!eq_value(&b("010")));
    }

    fn accept_probability(machine: &QuantumMachine, x: &[bool]) -> f64 {
        let m = AnyMachine::from(machine.clone());
        1.0 - error_on(&m, &BitString(x.to_vec()), true).unwrap()
    }

    #[test]
    fn single_qubit_partialmod_cases() {
        let q2 = build_partialmod_quantum(2);
        // 8 ones: angle π → |0⟩ up to sign.
        assert!(accept_probability(&q2, &ones(8, 10)) < 1e-12);
        // 12 ones: angle 3π/2 → |1⟩ up to sign.
        assert!((accept_probability(&q2, &ones(12, 12)) - 1.0).abs() < 1e-12);
        let q0 = build_partialmod_quantum(0);
        assert!(accept_probability(&q0, &ones(2, 3)) < 1e-12);
        assert_eq!(partialmod_value(&ones(2, 3), 0), Some(false));
        let profile = measure_error(&q2.into(), &FunctionSpec::Partialmod { beta: 2 }, 12).unwrap();
        assert!(profile.is_exact(), "{profile:?}");
    }

    #[test]
    fn counter_matches_definition_exhaustively() {
        assert_eq!(build_partialmod_counter(1).state_count(), 4);
        assert_eq!(build_partialmod_counter(0).state_count(), 2);
        // Four ones with β = 1.
        let c = build_partialmod_counter(1);
        let state = (0..4).fold(c.initial(), |s, _| c.next(s, Symbol::One));
        assert_eq!(c.step(state, Symbol::Sep).1, 0);
        for beta in 0..=3u32 {
            let mut runner = build_partialmod_counter(beta).runner();
            for len in 0..=14usize {
                for x in BitString::all(len) {
                    let Some(v) = partialmod_value(x.bits(), beta) else {
                        continue;
                    };
                    let mut stream: Vec<Symbol> =
                        x.bits().iter().map(|&b| Symbol::from_bit(b)).collect();
                    stream.push(Symbol::Sep);
                    let answers =
                        run_deterministic(&mut runner as &mut dyn DeterministicAlgorithm, &stream);
                    assert_eq!(answers, vec![Some(v as u8)], "beta {beta}, x {x}");
                }
            }
        }
    }

    #[test]
    fn noisy_oracles_have_designed_error() {
        for eps in [0.0, 0.1, 0.25] {
            let f = FunctionSpec::Partialmod { beta: 1 };
            let counter = with_output_noise(&build_partialmod_counter(1), eps).unwrap();
            let p = measure_error(&counter.into(), &f, 8).unwrap();
            assert!((p.epsilon - eps).abs() < 1e-12);
            assert!((p.max_false_accept - eps).abs() < 1e-12);
            let q = build_noisy_partialmod_quantum(1, eps).unwrap();
            let p = measure_error(&q.into(), &f, 8).unwrap();
            assert!((p.epsilon - eps).abs() < 1e-12, "{eps}: {p:?}");
        }
        assert!(build_noisy_partialmod_quantum(1, 0.5).is_err());
    }

    /// Fraction of primes dividing `a - b`, by direct arithmetic.
    fn dividing_fraction(x: &[bool], primes: &[u64]) -> f64 {
        let h = x.len() / 2;
        let val = |bits: &[bool]| bits.iter().fold(0i64, |acc, &b| 2 * acc + b as i64);
        let delta = val(&x[..h]) - val(&x[h..]);
        primes.iter().filter(|&&p| delta % p as i64 == 0).count() as f64 / primes.len() as f64
    }

    #[test]
    fn randomized_fingerprint_matches_counting_oracle() {
        let config = FingerprintConfig {
            primes: vec![3, 5, 7, 11],
            d: Some(4),
        };
        let machine = AnyMachine::from(build_eq_fingerprint_randomized(8, &config).unwrap());
        let mut worst: f64 = 0.0;
        for x in BitString::all(8) {
            let eq = eq_value(x.bits());
            let err = error_on(&machine, &x, eq).unwrap();
            if eq {
                assert!(err < 1e-12);
            } else {
                let oracle = dividing_fraction(x.bits(), &config.primes);
                assert!((err - oracle).abs() < 1e-12, "{x}");
                worst = worst.max(oracle);
            }
        }
        let profile = measure_error(&machine, &FunctionSpec::Eq, 8).unwrap();
        assert!((profile.epsilon - worst).abs() < 1e-12);
        assert!(profile.is_one_sided());
        // |Δ| < 16, so at most 3·5 divides it: two primes out of four.
        assert_eq!(worst, 0.5);
    }

    #[test]
    fn randomized_fingerprint_state_count() {
        let config = FingerprintConfig {
            primes: vec![3, 5, 7, 11],
            d: Some(4),
        };
        let m = build_eq_fingerprint_randomized(8, &config).unwrap();
        let bound = 4 * 11 * 11 * 9;
        assert_eq!(m.state_count(), (9 + 25 + 49 + 121) * 9 + 2);
        assert!(m.state_count() <= bound + 2);
    }

    #[test]
    fn quantum_fingerprint_matches_closed_form() {
        let config = FingerprintConfig {
            primes: vec![3, 5, 7, 11],
            d: Some(4),
        };
        let q = build_eq_fingerprint_quantum(8, &config).unwrap();
        assert_eq!(QuantumProgram::qubits(&q), 3);
        for x in BitString::all(8) {
            let h = 4;
            let val = |bits: &[bool]| bits.iter().fold(0i64, |acc, &b| 2 * acc + b as i64);
            let delta = (val(&x.bits()[..h]) - val(&x.bits()[h..])) as f64;
            let mean: f64 = config
                .primes
                .iter()
                .map(|&p| (2.0 * PI * delta / p as f64).cos())
                .sum::<f64>()
                / 4.0;
            let accept = accept_probability(&q, x.bits());
            assert!(
                (accept - mean * mean).abs() < 1e-9,
                "{x}: {accept} vs {}",
                mean * mean
            );
        }
    }

    #[test]
    fn single_prime_quantum_fingerprint() {
        let config = FingerprintConfig {
            primes: vec![7],
            d: Some(1),
        };
        let q = build_eq_fingerprint_quantum(6, &config).unwrap();
        for x in BitString::all(6) {
            let val = |bits: &[bool]| bits.iter().fold(0i64, |acc, &b| 2 * acc + b as i64);
            let delta = (val(&x.bits()[..3]) - val(&x.bits()[3..])) as f64;
            let expected = (2.0 * PI * delta / 7.0).cos().powi(2);
            assert!((accept_probability(&q, x.bits()) - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn fingerprint_error_shrinks_with_more_primes() {
        let small = FingerprintConfig {
            primes: vec![3, 5],
            d: None,
        };
        let large = FingerprintConfig {
            primes: vec![3, 5, 7, 11],
            d: None,
        };
        let e = |c: &FingerprintConfig| {
            measure_error(
                &build_eq_fingerprint_randomized(8, c).unwrap().into(),
                &FunctionSpec::Eq,
                8,
            )
            .unwrap()
            .epsilon
        };
        assert!(e(&large) <= e(&small));
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            FingerprintConfig::default().primes,
            vec![3, 5, 7, 11, 13, 17, 19, 23]
        );
        assert!(FingerprintConfig {
            primes: vec![3, 3],
            d: None
        }
        .validate()
        .is_err());
        assert!(FingerprintConfig {
            primes: vec![2, 3],
            d: None
        }
        .validate()
        .is_err());
        assert!(FingerprintConfig {
            primes: vec![9],
            d: None
        }
        .validate()
        .is_err());
        assert!(FingerprintConfig {
            primes: vec![3, 5],
            d: Some(3)
        }
        .validate()
        .is_err());
        let three = FingerprintConfig {
            primes: vec![3, 5, 7],
            d: None,
        };
        assert!(build_eq_fingerprint_quantum(6, &three).is_err());
        assert!(build_eq_fingerprint_randomized(7, &three).is_err());
        assert!(measure_error(&build_partialmod_counter(0).into(), &FunctionSpec::Eq, 17).is_err());
    }

    #[test]
    fn sampled_blocks_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for beta in 0..3u32 {
            let f = FunctionSpec::Partialmod { beta };
            for _ in 0..50 {
                let x = sample_block(&f, 12, None, &mut rng).unwrap();
                assert!(f.evaluate(x.bits()).is_some());
            }
        }
        assert!(sample_block(&FunctionSpec::Partialmod { beta: 3 }, 10, None, &mut rng).is_err());
        let x = sample_block(&FunctionSpec::Eq, 8, None, &mut rng).unwrap();
        assert_eq!(x.len(), 8);
    }
}
