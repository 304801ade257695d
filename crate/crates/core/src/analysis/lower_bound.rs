//! Lower bounds on the number of states a deterministic automaton needs to
//! compute `f` on inputs of one fixed length.
//!
//! Two prefixes of the same length must lead to different states whenever some
//! common suffix completes both into the domain with different values. For a
//! total function the prefixes of one length then split into equivalence classes
//! whose count is exactly the width at that level. For a partial function the
//! relation is not transitive, so the bound is the largest set of pairwise
//! distinguishable prefixes.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BitString, FunctionSpec};

pub const LOWER_BOUND_MAX_BITS: usize = 16;
/// Levels with at most this many candidate prefixes get an exact clique search.
const EXACT_CLIQUE_LIMIT: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Total function: count of prefix classes at the widest level.
    PrefixClasses,
    /// Partial function: a distinguishable set, maximum at every level when `exact`.
    DistinguishableSet { exact: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StateLowerBound {
    pub value: usize,
    /// Prefix length attaining the value.
    pub level: usize,
    pub kind: BoundKind,
}

pub fn state_lower_bound(f: &FunctionSpec, m: usize) -> Result<StateLowerBound> {
    if m > LOWER_BOUND_MAX_BITS {
        return Err(Error::DomainTooLarge {
            bits: m,
            limit: LOWER_BOUND_MAX_BITS,
        });
    }
    let table: Vec<Option<bool>> = (0..1u64 << m)
        .map(|i| f.evaluate(BitString::from_index(i, m).bits()))
        .collect();
    let total = table.iter().all(Option::is_some);
    let mut best = StateLowerBound {
        value: 1,
        level: 0,
        kind: if total {
            BoundKind::PrefixClasses
        } else {
            BoundKind::DistinguishableSet { exact: true }
        },
    };
    let mut all_exact = true;
    for level in 0..=m {
        let width = 1usize << (m - level);
        let signatures: HashSet<&[Option<bool>]> = table.chunks(width).collect();
        let (value, exact) = if total {
            (signatures.len(), true)
        } else {
            let vertices: Vec<&[Option<bool>]> = signatures
                .into_iter()
                .filter(|s| s.iter().any(Option::is_some))
                .collect();
            max_distinguishable(&vertices)
        };
        all_exact &= exact;
        if value > best.value {
            best.value = value;
            best.level = level;
        }
    }
    if !total {
        best.kind = BoundKind::DistinguishableSet { exact: all_exact };
    }
    Ok(best)
}

fn distinguishable(a: &[Option<bool>], b: &[Option<bool>]) -> bool {
    a.iter()
        .zip(b)
        .any(|(x, y)| matches!((x, y), (Some(p), Some(q)) if p != q))
}

/// Largest pairwise distinguishable subset: greedy, then exact when small.
fn max_distinguishable(vertices: &[&[Option<bool>]]) -> (usize, bool) {
    let n = vertices.len();
    if n == 0 {
        return (1, true);
    }
    let adjacent: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && distinguishable(vertices[i], vertices[j]))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(adjacent[i].iter().filter(|&&a| a).count()));
    let mut greedy: Vec<usize> = Vec::new();
    for &v in &order {
        if greedy.iter().all(|&u| adjacent[u][v]) {
            greedy.push(v);
        }
    }
    if n > EXACT_CLIQUE_LIMIT {
        return (greedy.len(), false);
    }
    let masks: Vec<u128> = adjacent
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &a)| a)
                .fold(0u128, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let all = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    let mut best = greedy.len();
    bron_kerbosch(&masks, 0, all, 0, &mut best);
    (best, true)
}

/// Maximum clique size with pivoting, over bitset candidate (`p`) and excluded (`x`) sets.
fn bron_kerbosch(adj: &[u128], size: usize, p: u128, x: u128, best: &mut usize) {
    if p == 0 {
        if x == 0 {
            *best = (*best).max(size);
        }
        return;
    }
    if size + p.count_ones() as usize <= *best {
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut candidates = p & !adj[pivot];
    let (mut p, mut x) = (p, x);
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        bron_kerbosch(adj, size + 1, p & adj[v], x & adj[v], best);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::DeterministicMachine;
    use crate::functions::measure_error;

    #[test]
    fn eq_needs_exponential_width() {
        let b = state_lower_bound(&FunctionSpec::Eq, 8).unwrap();
        assert_eq!(b.kind, BoundKind::PrefixClasses);
        assert_eq!(b.value, 16);
        assert_eq!(b.level, 4);
        for m in [2usize, 4, 6, 10] {
            assert!(state_lower_bound(&FunctionSpec::Eq, m).unwrap().value >= 1 << (m / 2));
        }
        // Odd lengths never have equal halves.
        assert_eq!(state_lower_bound(&FunctionSpec::Eq, 7).unwrap().value, 1);
    }

    #[test]
    fn constant_function_needs_one_state() {
        let f = FunctionSpec::OracleTable {
            arity: 3,
            table: "11111111".into(),
        };
        assert_eq!(state_lower_bound(&f, 3).unwrap().value, 1);
    }

    #[test]
    fn partialmod_at_fixed_length_is_cheap() {
        // At length 12 with beta = 2 the domain holds 8 or 12 ones, and two
        // prefixes are distinguishable only when their counts differ by 4, so
        // no three are pairwise distinguishable.
        let f = FunctionSpec::Partialmod { beta: 2 };
        let b = state_lower_bound(&f, 12).unwrap();
        assert_eq!(b.value, 2);
        assert_eq!(b.kind, BoundKind::DistinguishableSet { exact: true });
        // Matching upper bound: an all-ones detector decides it with two states.
        let detector =
            DeterministicMachine::new(0, vec![[1, 0, 0], [1, 1, 1]], vec![1, 0]).unwrap();
        assert!(measure_error(&detector.into(), &f, 12).unwrap().is_exact());
    }

    #[test]
    fn partialmod_without_room_is_trivial() {
        let f = FunctionSpec::Partialmod { beta: 1 };
        assert_eq!(state_lower_bound(&f, 3).unwrap().value, 1);
        assert!(state_lower_bound(&f, 17).is_err());
    }

    #[test]
    fn clique_search_agrees_with_brute_force() {
        // Random partial tables on 4 bits: compare against subset enumeration.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let table: String = (0..16)
                .map(|_| ['0', '1', 'x'][rng.gen_range(0..3)])
                .collect();
            let f = FunctionSpec::OracleTable { arity: 4, table };
            let got = state_lower_bound(&f, 4).unwrap().value;
            let mut brute = 1;
            for level in 0..=4usize {
                let width = 1 << (4 - level);
                let rows: Vec<Vec<Option<bool>>> = (0..1u64 << level)
                    .map(|p| {
                        (0..width as u64)
                            .map(|s| {
                                f.evaluate(BitString::from_index((p << (4 - level)) | s, 4).bits())
                            })
                            .collect()
                    })
                    .collect();
                for subset in 1u32..1 << rows.len() {
                    let members: Vec<usize> =
                        (0..rows.len()).filter(|i| subset >> i & 1 == 1).collect();
                    let ok = members.iter().all(|&a| {
                        members
                            .iter()
                            .all(|&b| a == b || distinguishable(&rows[a], &rows[b]))
                    });
                    if ok {
                        brute = brute.max(members.len());
                    }
                }
            }
            assert_eq!(got, brute);
        }
    }
}
