//! State vector and density matrix simulation with depolarizing and
//! readout noise.
//!
//! Basis index convention: qubit 0 is the leftmost character of a Pauli
//! word and the most significant bit of a basis index, so `|01⟩` on two
//! qubits is index 1 with qubit 1 set. Pure states up to 16 qubits use the
//! vector backend; depolarizing noise promotes to a density matrix, capped
//! at 6 qubits. All randomness flows through explicit seeds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{Observable, PauliOp, PauliString};

pub const STATEVECTOR_MAX_QUBITS: usize = 16;
pub const DENSITY_MAX_QUBITS: usize = 6;

/// Position of qubit `q` counted from the least significant bit of a basis
/// index on an `n`-qubit register.
pub fn qubit_bit_position(q: usize, n: usize) -> usize {
    assert!(q < n, "qubit {q} out of range for width {n}");
    n - 1 - q
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a base seed and a stream tag.
/// Used so that per-group, per-state, and per-iteration randomness is
/// reproducible regardless of evaluation order or thread count.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(tag)))
}

pub(crate) fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Depolarizing strengths per gate arity plus per-qubit readout confusion.
///
/// After every 1-qubit (2-qubit) gate the touched qubits are replaced by
/// the maximally mixed state with probability `p1` (`p2`). Readout flips
/// each sampled bit independently: a true 0 reads as 1 with probability
/// `readout[q].0` and a true 1 reads as 0 with probability `readout[q].1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    p1: f64,
    p2: f64,
    readout: Vec<(f64, f64)>,
}

impl NoiseModel {
    pub fn new(p1: f64, p2: f64, readout: Vec<(f64, f64)>) -> Result<Self> {
        let check = |name, value: f64| {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(Error::BadNoiseParameter { name, value })
            }
        };
        check("p1", p1)?;
        check("p2", p2)?;
        for &(p10, p01) in &readout {
            check("p(1|0)", p10)?;
            check("p(0|1)", p01)?;
        }
        Ok(NoiseModel { p1, p2, readout })
    }

    /// Same readout confusion on every qubit of a `width`-qubit register.
    pub fn uniform(p1: f64, p2: f64, p_read1_given_0: f64, p_read0_given_1: f64, width: usize) -> Result<Self> {
        NoiseModel::new(p1, p2, vec![(p_read1_given_0, p_read0_given_1); width])
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn readout(&self) -> &[(f64, f64)] {
        &self.readout
    }

    pub fn has_depolarizing(&self) -> bool {
        self.p1 > 0.0 || self.p2 > 0.0
    }

    pub fn has_readout(&self) -> bool {
        self.readout.iter().any(|&(a, b)| a > 0.0 || b > 0.0)
    }
}

/// Sampled measurement outcomes over the full register, as weights per
/// basis index. Raw samples are integer weights summing to the shot count;
/// mitigation produces real weights that keep the same total.
#[derive(Clone, Debug, PartialEq)]
pub struct Counts {
    width: usize,
    weights: Vec<f64>,
}

impl Counts {
    pub fn new(width: usize, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), 1 << width, "weights length must be 2^width");
        Counts { width, weights }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight of one outcome, indexed with qubit 0 as the most significant bit.
    pub fn weight(&self, outcome: usize) -> f64 {
        self.weights[outcome]
    }
}

#[derive(Clone, Debug)]
struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug)]
struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

/// Quantum state in either pure-vector or density-matrix form.
#[derive(Clone, Debug)]
pub struct QuantumState {
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Vector(StateVector),
    Density(DensityMatrix),
}

impl QuantumState {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        check_vector_width(n)?;
        let mut amps = vec![Complex64::ZERO; 1 << n];
        amps[0] = Complex64::ONE;
        Ok(QuantumState {
            repr: Repr::Vector(StateVector { n, amps }),
        })
    }

    /// Pure state from amplitudes; the norm must already be 1 within 1e-10.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amp_width(&amps)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(QuantumState {
            repr: Repr::Vector(StateVector { n, amps }),
        })
    }

    /// Pure state from unnormalized amplitudes.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = amp_width(&amps)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::ZeroNorm { norm });
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(QuantumState {
            repr: Repr::Vector(StateVector { n, amps }),
        })
    }

    pub fn num_qubits(&self) -> usize {
        match &self.repr {
            Repr::Vector(v) => v.n,
            Repr::Density(d) => d.n,
        }
    }

    pub fn is_density(&self) -> bool {
        matches!(self.repr, Repr::Density(_))
    }

    /// Amplitudes when the state is held as a vector.
    pub fn amplitudes(&self) -> Option<&[Complex64]> {
        match &self.repr {
            Repr::Vector(v) => Some(&v.amps),
            Repr::Density(_) => None,
        }
    }

    /// Density matrix entry `(row, col)`, promoting a pure state on the fly.
    pub fn density_entry(&self, row: usize, col: usize) -> Complex64 {
        match &self.repr {
            Repr::Vector(v) => v.amps[row] * v.amps[col].conj(),
            Repr::Density(d) => d.data[row * d.dim + col],
        }
    }

    /// Converts to the density-matrix representation.
    pub fn to_density(&self) -> Result<Self> {
        match &self.repr {
            Repr::Vector(v) => {
                check_density_width(v.n)?;
                Ok(QuantumState {
                    repr: Repr::Density(v.to_density()),
                })
            }
            Repr::Density(_) => Ok(self.clone()),
        }
    }

    /// Diagonal of the state in the computational basis. Tiny negative
    /// entries from floating point noise are clamped to zero.
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Vector(v) => v.amps.iter().map(|a| a.norm_sqr()).collect(),
            Repr::Density(d) => (0..d.dim)
                .map(|i| d.data[i * d.dim + i].re.max(0.0))
                .collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Vector(v) => v.amps.iter().map(|a| a.norm_sqr()).sum(),
            Repr::Density(d) => (0..d.dim).map(|i| d.data[i * d.dim + i].re).sum(),
        }
    }

    /// Runs the unitary part of `circuit` on the state. With a noise model
    /// that has depolarizing strength the state is promoted to a density
    /// matrix and each gate is followed by a depolarizing channel on the
    /// qubits it touched; the measurement marker is ignored. Readout noise
    /// only affects [`sample`].
    pub fn apply_circuit(&self, circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<Self> {
        if circuit.width() != self.num_qubits() {
            return Err(Error::CircuitWidthMismatch {
                circuit: circuit.width(),
                state: self.num_qubits(),
            });
        }
        let depolarizing = noise.is_some_and(NoiseModel::has_depolarizing);
        let mut state = if depolarizing { self.to_density()? } else { self.clone() };
        for gate in circuit.unitary_gates() {
            state.apply_gate(gate);
            if depolarizing {
                let noise = noise.unwrap();
                let p = match gate.qubits().len() {
                    1 => noise.p1(),
                    _ => noise.p2(),
                };
                if p > 0.0 {
                    if let Repr::Density(d) = &mut state.repr {
                        d.depolarize(&gate.qubits(), p);
                    }
                }
            }
        }
        Ok(state)
    }

    fn apply_gate(&mut self, gate: &Gate) {
        let n = self.num_qubits();
        match *gate {
            Gate::Cnot { control, target } => {
                let c = qubit_bit_position(control, n);
                let t = qubit_bit_position(target, n);
                match &mut self.repr {
                    Repr::Vector(v) => v.apply_cnot(c, t),
                    Repr::Density(d) => d.apply_cnot(c, t),
                }
            }
            Gate::MeasureAll => {}
            _ => {
                let q = gate.qubits()[0];
                let m = single_qubit_matrix(gate);
                let pos = qubit_bit_position(q, n);
                match &mut self.repr {
                    Repr::Vector(v) => v.apply_1q(&m, pos),
                    Repr::Density(d) => d.apply_1q(&m, pos),
                }
            }
        }
    }
}

fn check_vector_width(n: usize) -> Result<()> {
    if n == 0 || n > STATEVECTOR_MAX_QUBITS {
        return Err(Error::WidthExceeded {
            qubits: n,
            limit: STATEVECTOR_MAX_QUBITS,
            repr: "state vector",
        });
    }
    Ok(())
}

fn check_density_width(n: usize) -> Result<()> {
    if n > DENSITY_MAX_QUBITS {
        return Err(Error::WidthExceeded {
            qubits: n,
            limit: DENSITY_MAX_QUBITS,
            repr: "density matrix",
        });
    }
    Ok(())
}

fn amp_width(amps: &[Complex64]) -> Result<usize> {
    let len = amps.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::BadAmplitudeCount { found: len });
    }
    let n = len.trailing_zeros() as usize;
    check_vector_width(n)?;
    Ok(n)
}

type Mat2 = [[Complex64; 2]; 2];

fn single_qubit_matrix(gate: &Gate) -> Mat2 {
    let zero = Complex64::ZERO;
    let one = Complex64::ONE;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        Gate::H(_) => [
            [Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(-s, 0.0)],
        ],
        Gate::Sdg(_) => [[one, zero], [zero, Complex64::new(0.0, -1.0)]],
        Gate::X(_) => [[zero, one], [one, zero]],
        Gate::Z(_) => [[one, zero], [zero, -one]],
        Gate::Ry { theta, .. } => {
            let (sin, cos) = (theta / 2.0).sin_cos();
            [
                [Complex64::new(cos, 0.0), Complex64::new(-sin, 0.0)],
                [Complex64::new(sin, 0.0), Complex64::new(cos, 0.0)],
            ]
        }
        Gate::U2 { phi, lambda, .. } => {
            let s = Complex64::new(s, 0.0);
            [
                [s, -s * Complex64::cis(lambda)],
                [s * Complex64::cis(phi), s * Complex64::cis(phi + lambda)],
            ]
        }
        Gate::Cnot { .. } | Gate::MeasureAll => unreachable!("not a single-qubit gate"),
    }
}

impl StateVector {
    fn apply_1q(&mut self, m: &Mat2, pos: usize) {
        let stride = 1usize << pos;
        for base in 0..self.amps.len() {
            if base & stride == 0 {
                let a0 = self.amps[base];
                let a1 = self.amps[base | stride];
                self.amps[base] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[base | stride] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cnot(&mut self, cpos: usize, tpos: usize) {
        let (c, t) = (1usize << cpos, 1usize << tpos);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    fn to_density(&self) -> DensityMatrix {
        let dim = self.amps.len();
        let mut data = vec![Complex64::ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix { n: self.n, dim, data }
    }
}

impl DensityMatrix {
    /// ρ ← U ρ U†, one qubit at a time: U on columns, then conj(U) on rows.
    fn apply_1q(&mut self, m: &Mat2, pos: usize) {
        let dim = self.dim;
        let stride = 1usize << pos;
        for col in 0..dim {
            for row in 0..dim {
                if row & stride == 0 {
                    let a0 = self.data[row * dim + col];
                    let a1 = self.data[(row | stride) * dim + col];
                    self.data[row * dim + col] = m[0][0] * a0 + m[0][1] * a1;
                    self.data[(row | stride) * dim + col] = m[1][0] * a0 + m[1][1] * a1;
                }
            }
        }
        for row in 0..dim {
            for col in 0..dim {
                if col & stride == 0 {
                    let b0 = self.data[row * dim + col];
                    let b1 = self.data[row * dim + (col | stride)];
                    self.data[row * dim + col] = m[0][0].conj() * b0 + m[0][1].conj() * b1;
                    self.data[row * dim + (col | stride)] = m[1][0].conj() * b0 + m[1][1].conj() * b1;
                }
            }
        }
    }

    fn apply_cnot(&mut self, cpos: usize, tpos: usize) {
        let (c, t) = (1usize << cpos, 1usize << tpos);
        let dim = self.dim;
        for row in 0..dim {
            if row & c != 0 && row & t == 0 {
                for col in 0..dim {
                    self.data.swap(row * dim + col, (row | t) * dim + col);
                }
            }
        }
        for col in 0..dim {
            if col & c != 0 && col & t == 0 {
                for row in 0..dim {
                    self.data.swap(row * dim + col, row * dim + (col | t));
                }
            }
        }
    }

    /// ρ ← (1-p) ρ + p (maximally mixed on `qubits`, marginal elsewhere).
    fn depolarize(&mut self, qubits: &[usize], p: f64) {
        let dim = self.dim;
        let mask: usize = qubits
            .iter()
            .map(|&q| 1usize << qubit_bit_position(q, self.n))
            .sum();
        let k = qubits.len() as u32;
        let sub = subindices(mask, dim);
        let mixed_weight = p / f64::from(1u32 << k);
        let mut mixed = vec![Complex64::ZERO; dim * dim];
        for &i_out in &outer_indices(mask, dim) {
            for &j_out in &outer_indices(mask, dim) {
                let mut tr = Complex64::ZERO;
                for &b in &sub {
                    tr += self.data[(i_out | b) * dim + (j_out | b)];
                }
                for &b in &sub {
                    mixed[(i_out | b) * dim + (j_out | b)] = tr * mixed_weight;
                }
            }
        }
        for (d, m) in self.data.iter_mut().zip(mixed) {
            *d = *d * (1.0 - p) + m;
        }
    }
}

/// All indices whose set bits lie inside `mask`.
fn subindices(mask: usize, dim: usize) -> Vec<usize> {
    (0..dim).filter(|i| i & !mask == 0).collect()
}

/// All indices whose set bits avoid `mask`.
fn outer_indices(mask: usize, dim: usize) -> Vec<usize> {
    (0..dim).filter(|i| i & mask == 0).collect()
}

/// Circuit preparing `(|01⟩ - |10⟩)/√2` from `|00⟩`.
pub fn singlet_prep_circuit() -> Circuit {
    Circuit::with_gates(
        2,
        [
            Gate::H(0),
            Gate::X(1),
            Gate::Cnot { control: 0, target: 1 },
            Gate::Z(0),
        ],
    )
}

/// Pure state drawn from the unitarily invariant measure: i.i.d. complex
/// Gaussian amplitudes, normalized. Deterministic in `seed`.
pub fn haar_random_state(n: usize, seed: u64) -> Result<QuantumState> {
    check_vector_width(n)?;
    let mut rng = rng_from(seed);
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    QuantumState::normalized(amps)
}

/// Draws `shots` outcomes from the state's computational-basis distribution,
/// then pushes each through per-qubit readout confusion when the noise model
/// has any. Deterministic in `seed`.
pub fn sample(state: &QuantumState, shots: u64, noise: Option<&NoiseModel>, seed: u64) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::NoShots);
    }
    let n = state.num_qubits();
    let readout = match noise {
        Some(nm) if nm.has_readout() => {
            if nm.readout().len() != n {
                return Err(Error::InvalidInput(format!(
                    "readout noise covers {} qubits, state has {n}",
                    nm.readout().len()
                )));
            }
            Some(nm.readout())
        }
        _ => None,
    };
    let probs = state.probabilities();
    let total: f64 = probs.iter().sum();
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p / total;
        cumulative.push(acc);
    }
    let mut rng = rng_from(seed);
    let mut weights = vec![0.0f64; 1 << n];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let mut outcome = cumulative.partition_point(|&c| c <= u);
        if outcome >= weights.len() {
            outcome = weights.len() - 1;
        }
        if let Some(rates) = readout {
            for (q, &(p10, p01)) in rates.iter().enumerate() {
                let bit = 1usize << qubit_bit_position(q, n);
                let flip_p = if outcome & bit == 0 { p10 } else { p01 };
                if flip_p > 0.0 && rng.random::<f64>() < flip_p {
                    outcome ^= bit;
                }
            }
        }
        weights[outcome] += 1.0;
    }
    Ok(Counts::new(n, weights))
}

/// Exact `⟨P⟩` on the state.
///
/// # Panics
/// Panics if the string length differs from the state width.
pub fn expectation_pauli(state: &QuantumState, p: &PauliString) -> f64 {
    let n = state.num_qubits();
    assert_eq!(p.len(), n, "pauli length {} vs state width {n}", p.len());
    let mut xmask = 0usize;
    let mut zmask = 0usize;
    let mut y_count = 0u32;
    for q in 0..n {
        let op = p.op(q);
        let (x, z) = op.xz();
        let bit = 1usize << qubit_bit_position(q, n);
        if x {
            xmask |= bit;
        }
        if z {
            zmask |= bit;
        }
        if op == PauliOp::Y {
            y_count += 1;
        }
    }
    // P|b⟩ = i^{#Y} (-1)^{|b & zmask|} |b ⊕ xmask⟩
    let phase = Complex64::i().powu(y_count % 4);
    let dim = 1usize << n;
    let mut acc = Complex64::ZERO;
    match &state.repr {
        Repr::Vector(v) => {
            for b in 0..dim {
                let f = phase * parity_sign(b & zmask);
                acc += v.amps[b ^ xmask].conj() * f * v.amps[b];
            }
        }
        Repr::Density(d) => {
            for b in 0..dim {
                let f = phase * parity_sign(b & zmask);
                acc += d.data[b * dim + (b ^ xmask)] * f;
            }
        }
    }
    acc.re
}

fn parity_sign(bits: usize) -> f64 {
    if bits.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Exact `⟨A⟩ = Σ aᵢ ⟨Pᵢ⟩` on the state.
pub fn expectation_exact(state: &QuantumState, obs: &Observable) -> f64 {
    obs.terms()
        .iter()
        .map(|(coeff, p)| coeff * expectation_pauli(state, p))
        .sum()
}

/// Exact covariance `⟨PQ⟩ - ⟨P⟩⟨Q⟩`, with the product phase tracked through
/// Pauli multiplication. For anticommuting pairs `⟨PQ⟩` is purely imaginary
/// and the symmetrized value `Re⟨PQ⟩ - ⟨P⟩⟨Q⟩ = -⟨P⟩⟨Q⟩` is returned.
/// `covariance_exact(s, p, p)` is the variance `1 - ⟨P⟩²` for non-identity P.
pub fn covariance_exact(state: &QuantumState, p: &PauliString, q: &PauliString) -> f64 {
    let (quarter, r) = p.mul(q);
    let product_mean = match quarter {
        0 => expectation_pauli(state, &r),
        2 => -expectation_pauli(state, &r),
        _ => 0.0,
    };
    product_mean - expectation_pauli(state, p) * expectation_pauli(state, q)
}
