//! The Black Hats problem family.
//!
//! An instance is a stream `2 X_1 2 X_2 ... 2 X_k` over the alphabet `{0, 1, 2}`.
//! Each `2` is a guardian whose answer `y_j` should equal the suffix parity
//! `g_j = f(X_j) ^ f(X_{j+1}) ^ ... ^ f(X_k)`. Guardians are grouped into `t`
//! blocks of `z = k / t` consecutive answers; a block costs `r` when every answer
//! in it is correct and `w` otherwise.
//!
//! Positions are 0-based throughout the code. Documentation that talks about
//! "guardian j" counts from 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::functions;

/// One input symbol. `Sep` is the guardian marker `2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Symbol {
    Zero = 0,
    One = 1,
    Sep = 2,
}

impl Symbol {
    pub const ALL: [Symbol; 3] = [Symbol::Zero, Symbol::One, Symbol::Sep];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn from_u8(value: u8) -> Option<Self> {
        match value {
            0 => Some(Symbol::Zero),
            1 => Some(Symbol::One),
            2 => Some(Symbol::Sep),
            _ => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u8)
    }
}

/// Output emitted by an online algorithm at one step. `None` means the step
/// produced no answer (a quantum step without measurement, for instance).
pub type Answer = Option<u8>;

/// A block of input bits, written as ASCII `0`/`1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(pub Vec<bool>);

impl BitString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// The `index`-th string of length `len` in lexicographic order (MSB first).
    pub fn from_index(index: u64, len: usize) -> Self {
        BitString(
            (0..len)
                .map(|i| (index >> (len - 1 - i)) & 1 == 1)
                .collect(),
        )
    }

    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
    }

    /// Every string of length `len` in lexicographic order.
    pub fn all(len: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << len).map(move |i| BitString::from_index(i, len))
    }
}

impl From<Vec<bool>> for BitString {
    fn from(bits: Vec<bool>) -> Self {
        BitString(bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInstance(format!(
                    "bit-string {s:?} contains {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Problem parameters `(k, t, r, w, m_1..m_k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BhParams {
    k: usize,
    t: usize,
    r: u64,
    w: u64,
    m: Vec<usize>,
}

impl BhParams {
    pub fn new(k: usize, t: usize, r: u64, w: u64, m: Vec<usize>) -> Result<Self> {
        if k == 0 || t == 0 {
            return Err(Error::InvalidParams("k and t must be positive".into()));
        }
        if !k.is_multiple_of(t) {
            return Err(Error::InvalidParams(format!(
                "k = {k} is not a multiple of t = {t}"
            )));
        }
        if r == 0 {
            return Err(Error::InvalidParams("r must be positive".into()));
        }
        if r >= w {
            return Err(Error::InvalidParams(format!(
                "need r < w, got r = {r}, w = {w}"
            )));
        }
        if m.len() != k {
            return Err(Error::InvalidParams(format!(
                "expected {k} block lengths, got {}",
                m.len()
            )));
        }
        if m.contains(&0) {
            return Err(Error::InvalidParams(
                "block lengths must be positive".into(),
            ));
        }
        Ok(BhParams { k, t, r, w, m })
    }

    /// Same length `len` for every block.
    pub fn uniform(k: usize, t: usize, r: u64, w: u64, len: usize) -> Result<Self> {
        Self::new(k, t, r, w, vec![len; k])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn w(&self) -> u64 {
        self.w
    }

    pub fn m(&self) -> &[usize] {
        &self.m
    }

    /// Guardians per block.
    pub fn z(&self) -> usize {
        self.k / self.t
    }

    pub fn stream_len(&self) -> usize {
        self.m.iter().map(|len| len + 1).sum()
    }

    pub fn opt_cost(&self) -> u64 {
        self.t as u64 * self.r
    }

    pub fn worst_cost(&self) -> u64 {
        self.t as u64 * self.w
    }

    /// 0-based stream positions of the `k` guardians. Guardian `j` (1-based) sits
    /// at 1-based position `j + m_1 + ... + m_{j-1}`.
    pub fn guardian_positions(&self) -> Vec<usize> {
        let mut pos = 0;
        self.m
            .iter()
            .map(|&len| {
                let here = pos;
                pos += len + 1;
                here
            })
            .collect()
    }

    /// Block scores for a correctness pattern over the `k` guardians.
    pub fn score(&self, correct: &[bool]) -> (Vec<u64>, u64) {
        debug_assert_eq!(correct.len(), self.k);
        let block_costs: Vec<u64> = correct
            .chunks(self.z())
            .map(|block| {
                if block.iter().all(|&c| c) {
                    self.r
                } else {
                    self.w
                }
            })
            .collect();
        let total = block_costs.iter().sum();
        (block_costs, total)
    }
}

/// Boolean function family applied to each block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum FunctionSpec {
    /// `v mod 2` when the block has `v * 2^beta` ones with `v >= 2`; undefined otherwise.
    Partialmod { beta: u32 },
    /// Equality of the two halves.
    Eq,
    /// Explicit truth table over inputs of length `arity`, indexed MSB-first.
    /// Characters are `0`, `1`, or `x` for undefined.
    OracleTable { arity: usize, table: String },
}

impl FunctionSpec {
    pub fn evaluate(&self, x: &[bool]) -> Option<bool> {
        match self {
            FunctionSpec::Partialmod { beta } => functions::partialmod_value(x, *beta),
            FunctionSpec::Eq => Some(functions::eq_value(x)),
            FunctionSpec::OracleTable { arity, table } => {
                if x.len() != *arity {
                    return None;
                }
                let idx = BitString(x.to_vec()).to_index() as usize;
                match table.as_bytes().get(idx) {
                    Some(b'0') => Some(false),
                    Some(b'1') => Some(true),
                    _ => None,
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            FunctionSpec::Partialmod { beta } => format!("partialmod(beta={beta})"),
            FunctionSpec::Eq => "eq".into(),
            FunctionSpec::OracleTable { arity, .. } => format!("oracle-table(arity={arity})"),
        }
    }

    /// Short registry name used by algorithm identifiers.
    pub fn short_name(&self) -> &'static str {
        match self {
            FunctionSpec::Partialmod { .. } => "partialmod",
            FunctionSpec::Eq => "eq",
            FunctionSpec::OracleTable { .. } => "oracle-table",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let FunctionSpec::OracleTable { arity, table } = self {
            if *arity > 24 {
                return Err(Error::InvalidParams(format!(
                    "oracle table arity {arity} too large"
                )));
            }
            if table.len() != 1 << arity {
                return Err(Error::InvalidParams(format!(
                    "oracle table has {} entries, expected {}",
                    table.len(),
                    1usize << arity
                )));
            }
            if let Some(c) = table.chars().find(|c| !matches!(c, '0' | '1' | 'x')) {
                return Err(Error::InvalidParams(format!("oracle table contains {c:?}")));
            }
        }
        Ok(())
    }
}

/// Concrete blocks plus their derived symbol stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BhInstance {
    params: BhParams,
    blocks: Vec<BitString>,
    stream: Vec<Symbol>,
}

impl BhInstance {
    pub fn encode(params: BhParams, blocks: Vec<BitString>) -> Result<Self> {
        if blocks.len() != params.k() {
            return Err(Error::InvalidInstance(format!(
                "expected {} blocks, got {}",
                params.k(),
                blocks.len()
            )));
        }
        for (i, (block, &len)) in blocks.iter().zip(params.m()).enumerate() {
            if block.len() != len {
                return Err(Error::InvalidInstance(format!(
                    "block {i} has length {}, expected m_{} = {len}",
                    block.len(),
                    i + 1
                )));
            }
        }
        let mut stream = Vec::with_capacity(params.stream_len());
        for block in &blocks {
            stream.push(Symbol::Sep);
            stream.extend(block.bits().iter().map(|&b| Symbol::from_bit(b)));
        }
        Ok(BhInstance {
            params,
            blocks,
            stream,
        })
    }

    /// Encodes and additionally rejects blocks outside `f`'s domain.
    pub fn encode_feasible(
        params: BhParams,
        blocks: Vec<BitString>,
        f: &FunctionSpec,
    ) -> Result<Self> {
        let instance = Self::encode(params, blocks)?;
        instance.f_values(f)?;
        Ok(instance)
    }

    /// Recovers blocks and lengths from a stream.
    pub fn decode(stream: &[Symbol], t: usize, r: u64, w: u64) -> Result<Self> {
        if stream.first() != Some(&Symbol::Sep) {
            return Err(Error::InvalidInstance(
                "stream must start with a separator".into(),
            ));
        }
        let blocks: Vec<BitString> = stream[1..]
            .split(|&s| s == Symbol::Sep)
            .map(|chunk| BitString(chunk.iter().map(|&s| s == Symbol::One).collect()))
            .collect();
        let m = blocks.iter().map(BitString::len).collect();
        let params = BhParams::new(blocks.len(), t, r, w, m)?;
        Self::encode(params, blocks)
    }

    pub fn params(&self) -> &BhParams {
        &self.params
    }

    pub fn blocks(&self) -> &[BitString] {
        &self.blocks
    }

    pub fn stream(&self) -> &[Symbol] {
        &self.stream
    }

    pub fn guardian_positions(&self) -> Vec<usize> {
        self.params.guardian_positions()
    }

    /// `f(X_1), ..., f(X_k)`.
    pub fn f_values(&self, f: &FunctionSpec) -> Result<Vec<bool>> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, block)| {
                f.evaluate(block.bits()).ok_or_else(|| Error::Infeasible {
                    block: i,
                    bits: block.to_string(),
                    function: f.name(),
                })
            })
            .collect()
    }

    /// The correct guardian answers `g_1..g_k` (suffix parities of the block values).
    pub fn offline_optimum(&self, f: &FunctionSpec) -> Result<Vec<bool>> {
        Ok(suffix_parity(&self.f_values(f)?))
    }

    pub fn cost(&self, answers: &[Answer], f: &FunctionSpec) -> Result<OutputTrace> {
        let g = self.offline_optimum(f)?;
        OutputTrace::score(&self.params, &g, answers)
    }
}

/// `g_j = v_j ^ g_{j+1}`, `g_k = v_k`.
pub fn suffix_parity(values: &[bool]) -> Vec<bool> {
    let mut g = vec![false; values.len()];
    let mut acc = false;
    for (j, &v) in values.iter().enumerate().rev() {
        acc ^= v;
        g[j] = acc;
    }
    g
}

/// Guardian answers of one run, scored against the optimum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputTrace {
    pub answers: Vec<Answer>,
    pub correctness: Vec<bool>,
    pub block_costs: Vec<u64>,
    pub total_cost: u64,
}

impl OutputTrace {
    /// Scores `answers` against known optimal answers `g`.
    pub fn score(params: &BhParams, g: &[bool], answers: &[Answer]) -> Result<Self> {
        if answers.len() != params.k() {
            return Err(Error::ContractViolation(format!(
                "expected {} guardian answers, got {}",
                params.k(),
                answers.len()
            )));
        }
        let correctness: Vec<bool> = answers
            .iter()
            .zip(g)
            .map(|(&a, &gj)| a == Some(gj as u8))
            .collect();
        let (block_costs, total_cost) = params.score(&correctness);
        Ok(OutputTrace {
            answers: answers.to_vec(),
            correctness,
            block_costs,
            total_cost,
        })
    }
}

/// On-disk instance description. The stream is derived, never stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub k: usize,
    pub t: usize,
    pub r: u64,
    pub w: u64,
    pub m: Vec<usize>,
    pub function: FunctionSpec,
    pub blocks: Vec<BitString>,
}

impl InstanceFile {
    pub const VERSION: u32 = 1;

    pub fn new(instance: &BhInstance, function: &FunctionSpec) -> Self {
        let p = instance.params();
        InstanceFile {
            version: Self::VERSION,
            k: p.k(),
            t: p.t(),
            r: p.r(),
            w: p.w(),
            m: p.m().to_vec(),
            function: function.clone(),
            blocks: instance.blocks().to_vec(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Validates and builds the instance; infeasible blocks are rejected here.
    pub fn build(&self) -> Result<(BhInstance, FunctionSpec)> {
        if self.version != Self::VERSION {
            return Err(Error::InvalidInstance(format!(
                "unsupported version {}",
                self.version
            )));
        }
        self.function.validate()?;
        let params = BhParams::new(self.k, self.t, self.r, self.w, self.m.clone())?;
        let instance = BhInstance::encode_feasible(params, self.blocks.clone(), &self.function)?;
        Ok((instance, self.function.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn syms(v: &[u8]) -> Vec<Symbol> {
        v.iter().map(|&x| Symbol::from_u8(x).unwrap()).collect()
    }

    #[test]
    fn encodes_definition_layout() {
        let p = BhParams::new(2, 1, 1, 2, vec![2, 2]).unwrap();
        let inst = BhInstance::encode(p, vec![bits("01"), bits("11")]).unwrap();
        assert_eq!(inst.stream(), syms(&[2, 0, 1, 2, 1, 1]).as_slice());

        let p = BhParams::new(1, 1, 1, 2, vec![1]).unwrap();
        let inst = BhInstance::encode(p, vec![bits("0")]).unwrap();
        assert_eq!(inst.stream(), syms(&[2, 0]).as_slice());
    }

    #[test]
    fn guardian_positions_match_formula() {
        // 1-based (1, 5) for m = (3, 2).
        let p = BhParams::new(2, 1, 1, 2, vec![3, 2]).unwrap();
        assert_eq!(p.guardian_positions(), vec![0, 4]);
        let p = BhParams::new(3, 1, 1, 2, vec![1, 1, 1]).unwrap();
        assert_eq!(p.guardian_positions(), vec![0, 2, 4]);
        let p = BhParams::new(1, 1, 1, 2, vec![4]).unwrap();
        assert_eq!(p.guardian_positions(), vec![0]);
    }

    #[test]
    fn rejects_bad_params_and_lengths() {
        assert!(BhParams::new(3, 2, 1, 2, vec![1, 1, 1]).is_err());
        assert!(BhParams::new(2, 1, 2, 2, vec![1, 1]).is_err());
        assert!(BhParams::new(2, 1, 3, 2, vec![1, 1]).is_err());
        assert!(BhParams::new(2, 1, 1, 2, vec![1]).is_err());
        assert!(BhParams::new(1, 1, 0, 2, vec![1]).is_err());
        let p = BhParams::new(2, 1, 1, 2, vec![2, 2]).unwrap();
        let err = BhInstance::encode(p.clone(), vec![bits("01"), bits("1")]).unwrap_err();
        assert!(matches!(err, Error::InvalidInstance(_)));
        assert!(BhInstance::encode(p, vec![bits("01")]).is_err());
    }

    #[test]
    fn suffix_parity_examples() {
        assert_eq!(suffix_parity(&[true, false, true]), vec![false, true, true]);
        assert_eq!(suffix_parity(&[false, false]), vec![false, false]);
    }

    #[test]
    fn eq_optimum_by_inspection() {
        let p = BhParams::new(2, 1, 1, 3, vec![4, 4]).unwrap();
        let inst = BhInstance::encode(p, vec![bits("0101"), bits("0001")]).unwrap();
        assert_eq!(
            inst.offline_optimum(&FunctionSpec::Eq).unwrap(),
            vec![true, false]
        );
    }

    #[test]
    fn infeasible_block_is_rejected_at_construction() {
        let p = BhParams::uniform(2, 1, 1, 3, 4).unwrap();
        let f = FunctionSpec::Partialmod { beta: 1 };
        let err = BhInstance::encode_feasible(p, vec![bits("1111"), bits("1110")], &f).unwrap_err();
        assert!(matches!(err, Error::Infeasible { block: 1, .. }));
    }

    #[test]
    fn cost_examples() {
        // t = 2, z = 1, r = 1, w = 3: one wrong answer costs one w.
        let p = BhParams::uniform(2, 2, 1, 3, 4).unwrap();
        let f = FunctionSpec::Eq;
        let inst = BhInstance::encode(p, vec![bits("0101"), bits("0001")]).unwrap();
        let g = inst.offline_optimum(&f).unwrap();
        let answers = vec![Some(g[0] as u8), Some(!g[1] as u8)];
        assert_eq!(inst.cost(&answers, &f).unwrap().total_cost, 4);

        let opt: Vec<Answer> = g.iter().map(|&b| Some(b as u8)).collect();
        assert_eq!(inst.cost(&opt, &f).unwrap().total_cost, 2);

        // t = 1: any wrong answer costs w.
        let p = BhParams::uniform(2, 1, 1, 3, 4).unwrap();
        let inst = BhInstance::encode(p, vec![bits("0101"), bits("0001")]).unwrap();
        let answers = vec![Some(g[0] as u8), None];
        let trace = inst.cost(&answers, &f).unwrap();
        assert_eq!(trace.total_cost, 3);
        assert_eq!(trace.correctness, vec![true, false]);
    }

    #[test]
    fn instance_file_round_trip() {
        let text = r#"{"version":1,"k":2,"t":1,"r":1,"w":3,"m":[4,6],
            "function":{"name":"partialmod","beta":1},"blocks":["1111","111111"]}"#;
        let file = InstanceFile::from_json(text).unwrap();
        let (inst, f) = file.build().unwrap();
        assert_eq!(f, FunctionSpec::Partialmod { beta: 1 });
        assert_eq!(inst.offline_optimum(&f).unwrap(), vec![true, true]);
        let again =
            InstanceFile::from_json(&InstanceFile::new(&inst, &f).to_json().unwrap()).unwrap();
        assert_eq!(again, file);
    }

    #[test]
    fn instance_file_rejects_garbage() {
        assert!(InstanceFile::from_json("{").is_err());
        let bad_bits = r#"{"version":1,"k":1,"t":1,"r":1,"w":3,"m":[2],
            "function":{"name":"eq"},"blocks":["0a"]}"#;
        assert!(InstanceFile::from_json(bad_bits).is_err());
        let bad_version = r#"{"version":2,"k":1,"t":1,"r":1,"w":3,"m":[2],
            "function":{"name":"eq"},"blocks":["01"]}"#;
        assert!(InstanceFile::from_json(bad_version)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn oracle_table_lookup() {
        let f = FunctionSpec::OracleTable {
            arity: 2,
            table: "01x1".into(),
        };
        f.validate().unwrap();
        assert_eq!(f.evaluate(&[false, false]), Some(false));
        assert_eq!(f.evaluate(&[false, true]), Some(true));
        assert_eq!(f.evaluate(&[true, false]), None);
        assert_eq!(f.evaluate(&[true]), None);
        assert!(FunctionSpec::OracleTable {
            arity: 2,
            table: "01".into()
        }
        .validate()
        .is_err());
    }

    fn eq_instance() -> impl Strategy<Value = (usize, Vec<BitString>)> {
        (1usize..=4, 1usize..=6).prop_flat_map(|(t, z)| {
            let k = t * z;
            (
                Just(t),
                proptest::collection::vec(
                    (1usize..=4).prop_flat_map(|h| proptest::collection::vec(any::<bool>(), 2 * h)),
                    k,
                )
                .prop_map(|v| v.into_iter().map(BitString).collect()),
            )
        })
    }

    proptest! {
        #[test]
        fn decode_inverts_encode((t, blocks) in eq_instance()) {
            let m = blocks.iter().map(BitString::len).collect();
            let p = BhParams::new(blocks.len(), t, 2, 5, m).unwrap();
            let inst = BhInstance::encode(p, blocks).unwrap();
            for pos in inst.guardian_positions() {
                prop_assert_eq!(inst.stream()[pos], Symbol::Sep);
            }
            prop_assert_eq!(inst.stream().len(), inst.params().stream_len());
            let back = BhInstance::decode(inst.stream(), t, 2, 5).unwrap();
            prop_assert_eq!(back, inst);
        }

        #[test]
        fn optimum_costs_t_times_r_and_flips_cost_w_minus_r(
            (t, blocks) in eq_instance(),
            flip in any::<prop::sample::Index>(),
        ) {
            let f = FunctionSpec::Eq;
            let m = blocks.iter().map(BitString::len).collect();
            let p = BhParams::new(blocks.len(), t, 2, 5, m).unwrap();
            let inst = BhInstance::encode(p.clone(), blocks).unwrap();
            let g = inst.offline_optimum(&f).unwrap();
            let values = inst.f_values(&f).unwrap();
            for j in 0..g.len() {
                let direct = values[j..].iter().fold(false, |a, &v| a ^ v);
                prop_assert_eq!(g[j], direct);
                if j + 1 < g.len() {
                    prop_assert_eq!(g[j], values[j] ^ g[j + 1]);
                }
            }
            let mut answers: Vec<Answer> = g.iter().map(|&b| Some(b as u8)).collect();
            let best = inst.cost(&answers, &f).unwrap().total_cost;
            prop_assert_eq!(best, p.opt_cost());
            let j = flip.index(answers.len());
            answers[j] = Some(!g[j] as u8);
            let worse = inst.cost(&answers, &f).unwrap().total_cost;
            prop_assert_eq!(worse - best, p.w() - p.r());
        }
    }
}
