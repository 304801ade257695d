//! Dense state vectors and small dense unitaries.
//!
//! Basis index `i` has qubit `l` equal to bit `l` of `i`. When an operation acts on
//! a list of qubits `[q_0, q_1, ...]`, local index bit `b` corresponds to `q_b`;
//! measurement outcomes use the same convention.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `|‖ψ‖ - 1|` and on unitarity defects.
pub const NORM_TOL: f64 = 1e-9;
/// Below this norm a collapsed state cannot be renormalized.
pub const DEGENERATE_NORM: f64 = 1e-12;
/// Default limit on register size.
pub const MAX_QUBITS: usize = 12;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidMachine(format!(
                "matrix has {} entries, expected {dim}x{dim}",
                data.len()
            )));
        }
        Ok(Matrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = C64::new(1.0, 0.0);
        }
        Matrix { dim, data }
    }

    /// Real rotation `[[cos θ, -sin θ], [sin θ, cos θ]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Matrix {
            dim: 2,
            data: vec![
                C64::new(c, 0.0),
                C64::new(-s, 0.0),
                C64::new(s, 0.0),
                C64::new(c, 0.0),
            ],
        }
    }

    pub fn hadamard() -> Self {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        Matrix {
            dim: 2,
            data: vec![h, h, h, -h],
        }
    }

    /// Permutation matrix sending basis state `i` to `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let dim = perm.len();
        let mut seen = vec![false; dim];
        let mut m = Matrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        };
        for (i, &j) in perm.iter().enumerate() {
            if j >= dim || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidMachine("not a permutation".into()));
            }
            m.data[j * dim + i] = C64::new(1.0, 0.0);
        }
        Ok(m)
    }

    /// Block-diagonal matrix `diag(blocks[0], blocks[1], ...)`.
    pub fn block_diagonal(blocks: &[Matrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Matrix {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        };
        let mut off = 0;
        for b in blocks {
            for r in 0..b.dim {
                for c in 0..b.dim {
                    m.data[(off + r) * dim + off + c] = b.get(r, c);
                }
            }
            off += b.dim;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Matrix { dim: n, data }
    }

    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        Matrix { dim: n, data }
    }

    /// Tensor product `self ⊗ other`; `other` acts on the low-order index bits.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let n = self.dim * other.dim;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..self.dim {
            for b in 0..self.dim {
                let x = self.get(a, b);
                for c in 0..other.dim {
                    for d in 0..other.dim {
                        data[(a * other.dim + c) * n + b * other.dim + d] = x * other.get(c, d);
                    }
                }
            }
        }
        Matrix { dim: n, data }
    }

    /// `max |(G†G - I)_{ij}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let p = self.adjoint().mul(self);
        let id = Matrix::identity(self.dim);
        p.data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= NORM_TOL
    }

    /// A unitary whose first column is the unit vector `v` (Gram-Schmidt completion).
    pub fn with_first_column(v: &[C64]) -> Result<Matrix> {
        let dim = v.len();
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidMachine(format!(
                "vector norm {norm} is not 1"
            )));
        }
        let mut cols: Vec<Vec<C64>> = vec![v.to_vec()];
        for j in 0..dim {
            if cols.len() == dim {
                break;
            }
            let mut u = vec![C64::new(0.0, 0.0); dim];
            u[j] = C64::new(1.0, 0.0);
            orthogonalize(&mut u, &cols);
            let n = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n > 1e-6 {
                u.iter_mut().for_each(|a| *a /= n);
                cols.push(u);
            }
        }
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, &a) in col.iter().enumerate() {
                data[r * dim + c] = a;
            }
        }
        Ok(Matrix { dim, data })
    }
}

fn orthogonalize(u: &mut [C64], basis: &[Vec<C64>]) {
    // Two passes keep the completion orthonormal to ~1e-15.
    for _ in 0..2 {
        for c in basis {
            let proj: C64 = c.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in u.iter_mut().zip(c) {
                *x -= proj * a;
            }
        }
    }
}

/// Haar-like random unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut u: Vec<C64> = (0..dim).map(|_| gaussian_complex(rng)).collect();
        orthogonalize(&mut u, &cols);
        let n = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            u.iter_mut().for_each(|a| *a /= n);
            cols.push(u);
        }
    }
    let mut data = vec![C64::new(0.0, 0.0); dim * dim];
    for (c, col) in cols.iter().enumerate() {
        for (r, &a) in col.iter().enumerate() {
            data[r * dim + c] = a;
        }
    }
    Matrix { dim, data }
}

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // Box-Muller.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    C64::new(radius * angle.cos(), radius * angle.sin())
}

/// Result of a projective measurement on a subset of qubits.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub outcome: usize,
    pub state: QuantumState,
    pub probability: f64,
}

/// Pure state of a `q`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amps: Vec<C64>,
}

impl QuantumState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidMachine(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        let state = QuantumState { amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidMachine(format!(
                "initial state has norm {norm}"
            )));
        }
        Ok(state)
    }

    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << qubits];
        amps[index] = C64::new(1.0, 0.0);
        QuantumState { amps }
    }

    pub fn qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }

    /// Applies `u` to the whole register.
    pub fn apply_unitary(&mut self, u: &Matrix) -> Result<()> {
        if u.dim() != self.amps.len() {
            return Err(Error::InvalidMachine(format!(
                "matrix dimension {} does not match state dimension {}",
                u.dim(),
                self.amps.len()
            )));
        }
        let n = u.dim();
        let out: Vec<C64> = (0..n)
            .map(|r| (0..n).map(|c| u.data[r * n + c] * self.amps[c]).sum())
            .collect();
        self.amps = out;
        Ok(())
    }

    /// Applies `u` (of dimension `2^targets.len()`) to the listed qubits.
    pub fn apply_on(&mut self, targets: &[usize], u: &Matrix) {
        let local = u.dim();
        debug_assert_eq!(local, 1 << targets.len());
        if targets.len() == self.qubits() && targets.iter().enumerate().all(|(i, &q)| i == q) {
            self.apply_unitary(u).expect("dimension checked");
            return;
        }
        let offsets = local_offsets(targets);
        let mask: usize = targets.iter().map(|&q| 1 << q).sum();
        let mut gathered = vec![C64::new(0.0, 0.0); local];
        for base in 0..self.amps.len() {
            if base & mask != 0 {
                continue;
            }
            for (l, &off) in offsets.iter().enumerate() {
                gathered[l] = self.amps[base | off];
            }
            for (r, &off) in offsets.iter().enumerate() {
                let row = &u.data[r * local..(r + 1) * local];
                self.amps[base | off] = row.iter().zip(&gathered).map(|(a, b)| a * b).sum();
            }
        }
    }

    /// Outcome index of basis state `index` restricted to `qubits`.
    pub fn outcome_of(index: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .enumerate()
            .map(|(b, &q)| ((index >> q) & 1) << b)
            .sum()
    }

    /// Probability of each outcome `u ∈ 0..2^qubits.len()`.
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[Self::outcome_of(i, qubits)] += a.norm_sqr();
        }
        probs
    }

    /// Projects onto `outcome` and renormalizes; returns the outcome probability.
    pub fn collapse(&mut self, qubits: &[usize], outcome: usize) -> Result<f64> {
        let mut mass = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if Self::outcome_of(i, qubits) == outcome {
                mass += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        let norm = mass.sqrt();
        if norm < DEGENERATE_NORM {
            return Err(Error::NumericDegeneracy(format!(
                "outcome {outcome} on qubits {qubits:?} has norm {norm:e}"
            )));
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(mass)
    }

    /// Samples a measurement of `qubits`.
    pub fn measure<R: Rng + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<Measurement> {
        let probs = self.outcome_probabilities(qubits);
        let outcome = sample_index(&probs, rng);
        let mut state = self.clone();
        let probability = state.collapse(qubits, outcome)?;
        Ok(Measurement {
            outcome,
            state,
            probability,
        })
    }

    /// Moves the listed qubits, known to hold `known_outcome`, to `|0...0⟩` while
    /// leaving the rest of the register untouched.
    pub fn reset_work_register(&mut self, qubits: &[usize], known_outcome: usize) -> Result<()> {
        let mut stray = 0.0;
        for (i, a) in self.amps.iter().enumerate() {
            if Self::outcome_of(i, qubits) != known_outcome {
                stray += a.norm_sqr();
            }
        }
        if stray > NORM_TOL {
            return Err(Error::ContractViolation(format!(
                "state is not consistent with outcome {known_outcome} on qubits {qubits:?} \
                 (stray probability {stray:e})"
            )));
        }
        let flip: usize = qubits
            .iter()
            .enumerate()
            .filter(|(b, _)| (known_outcome >> b) & 1 == 1)
            .map(|(_, &q)| 1 << q)
            .sum();
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if Self::outcome_of(i, qubits) == known_outcome {
                out[i ^ flip] = a;
            }
        }
        self.amps = out;
        Ok(())
    }
}

fn local_offsets(targets: &[usize]) -> Vec<usize> {
    (0..1usize << targets.len())
        .map(|l| {
            targets
                .iter()
                .enumerate()
                .map(|(b, &q)| ((l >> b) & 1) << q)
                .sum()
        })
        .collect()
}

/// Draws an index with the given (unnormalized-tolerant) weights.
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &p) in weights.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last = i;
        if x < p {
            return i;
        }
        x -= p;
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn identity_leaves_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(4, &mut rng);
        let mut s = QuantumState::basis(2, 0);
        s.apply_unitary(&u).unwrap();
        let before = s.clone();
        s.apply_unitary(&Matrix::identity(4)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn quarter_rotation_maps_zero_to_one() {
        let mut s = QuantumState::basis(1, 0);
        s.apply_unitary(&Matrix::rotation(PI / 2.0)).unwrap();
        assert!(s.amplitudes()[0].norm() < 1e-15);
        assert!((s.amplitudes()[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eight_eighth_rotations_give_minus_zero() {
        let mut s = QuantumState::basis(1, 0);
        let r = Matrix::rotation(PI / 8.0);
        for _ in 0..8 {
            s.apply_unitary(&r).unwrap();
        }
        assert!(close(s.amplitudes()[0], C64::new(-1.0, 0.0)));
        assert!(s.amplitudes()[1].norm() < 1e-12);
    }

    #[test]
    fn measurement_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut plus = QuantumState::basis(1, 0);
        plus.apply_unitary(&Matrix::hadamard()).unwrap();
        let probs = plus.outcome_probabilities(&[0]);
        assert!((probs[1] - 0.5).abs() < 1e-15);

        let zero = QuantumState::basis(1, 0);
        let m = zero.measure(&[0], &mut rng).unwrap();
        assert_eq!(m.outcome, 0);
        assert_eq!(m.probability, 1.0);
        assert_eq!(m.state, zero);

        let h = FRAC_1_SQRT_2;
        let bell = QuantumState::new(vec![
            C64::new(h, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(h, 0.0),
        ])
        .unwrap();
        let mut collapsed = bell.clone();
        let p = collapsed.collapse(&[0], 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert_eq!(collapsed, QuantumState::basis(2, 0b00));
    }

    #[test]
    fn collapse_on_zero_mass_is_degenerate() {
        let mut s = QuantumState::basis(1, 0);
        assert!(matches!(
            s.collapse(&[0], 1),
            Err(Error::NumericDegeneracy(_))
        ));
    }

    #[test]
    fn apply_on_subset_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(2, &mut rng);
        let mut psi = QuantumState::basis(3, 0);
        psi.apply_unitary(&random_unitary(8, &mut rng)).unwrap();
        // Acting on qubit 1 of 3 equals I ⊗ U ⊗ I.
        let full = Matrix::identity(2).kron(&u).kron(&Matrix::identity(2));
        let mut a = psi.clone();
        a.apply_on(&[1], &u);
        let mut b = psi.clone();
        b.apply_unitary(&full).unwrap();
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!(close(*x, *y));
        }
    }

    #[test]
    fn reset_moves_measured_qubit_to_zero() {
        // |1⟩ on qubit 0 with an arbitrary state on qubit 1.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let phi = random_unitary(2, &mut rng);
        let mut s = QuantumState::basis(2, 0b01);
        s.apply_on(&[1], &phi);
        let mut expected = QuantumState::basis(2, 0);
        expected.apply_on(&[1], &phi);
        s.reset_work_register(&[0], 1).unwrap();
        for (x, y) in s.amplitudes().iter().zip(expected.amplitudes()) {
            assert!(close(*x, *y));
        }
        let zero = QuantumState::basis(1, 0);
        let mut z = zero.clone();
        z.reset_work_register(&[0], 0).unwrap();
        assert_eq!(z, zero);
        let mut bad = QuantumState::basis(1, 0);
        assert!(matches!(
            bad.reset_work_register(&[0], 1),
            Err(Error::ContractViolation(_))
        ));
    }

    /// Reduced density matrix of `keep` qubits, computed by brute force.
    fn reduced_density(s: &QuantumState, keep: &[usize]) -> Vec<C64> {
        let d = 1 << keep.len();
        let mut rho = vec![C64::new(0.0, 0.0); d * d];
        let amps = s.amplitudes();
        for i in 0..amps.len() {
            for j in 0..amps.len() {
                let rest_i = (0..s.qubits())
                    .filter(|q| !keep.contains(q))
                    .all(|q| ((i >> q) & 1) == ((j >> q) & 1));
                if rest_i {
                    let a = QuantumState::outcome_of(i, keep);
                    let b = QuantumState::outcome_of(j, keep);
                    rho[a * d + b] += amps[i] * amps[j].conj();
                }
            }
        }
        rho
    }

    #[test]
    fn reset_preserves_entangled_untouched_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = QuantumState::basis(3, 0);
        s.apply_unitary(&random_unitary(8, &mut rng)).unwrap();
        let m = s.measure(&[2], &mut rng).unwrap();
        let before = reduced_density(&m.state, &[0, 1]);
        let mut after_state = m.state.clone();
        after_state.reset_work_register(&[2], m.outcome).unwrap();
        let after = reduced_density(&after_state, &[0, 1]);
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!(after_state.outcome_probabilities(&[2])[0] > 1.0 - 1e-12);
        assert!((after_state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_column_completion_is_unitary() {
        let v = vec![
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.5, 0.0),
        ];
        let u = Matrix::with_first_column(&v).unwrap();
        assert!(u.is_unitary());
        for (r, a) in v.iter().enumerate() {
            assert!(close(u.get(r, 0), *a));
        }
    }

    #[test]
    fn permutation_and_block_diagonal_are_unitary() {
        assert!(Matrix::permutation(&[2, 0, 3, 1]).unwrap().is_unitary());
        assert!(Matrix::permutation(&[0, 0]).is_err());
        let bd = Matrix::block_diagonal(&[Matrix::rotation(0.3), Matrix::hadamard()]);
        assert_eq!(bd.dim(), 4);
        assert!(bd.is_unitary());
        let mut bad = Matrix::identity(2);
        bad.data[1] = C64::new(0.5, 0.0);
        assert!(!bad.is_unitary());
    }
}
