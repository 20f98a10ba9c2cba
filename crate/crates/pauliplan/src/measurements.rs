//! Measurement catalog: single-qubit basis changes and two-qubit entangled
//! measurements, with the circuits that rotate each into the computational
//! basis.
//!
//! Every kind owns a measurable set of Pauli tuples and a template circuit.
//! Conjugating a measurable tuple by the template unitary yields a signed
//! string of Z and I factors, so a sampled bit pattern converts to a ±1
//! eigenvalue by a parity count. The two-qubit templates each spend exactly
//! one CNOT.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{PauliOp, PauliString};
use crate::sim::QuantumState;

/// One entry of the measurement catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum MeasurementKind {
    #[serde(rename = "TPB-X")]
    TpbX,
    #[serde(rename = "TPB-Y")]
    TpbY,
    #[serde(rename = "TPB-Z")]
    TpbZ,
    Bell,
    OmegaXX,
    OmegaYY,
    OmegaZZ,
    Chi,
}

use MeasurementKind::*;
use PauliOp::{I, X, Y, Z};

impl MeasurementKind {
    pub fn all() -> [MeasurementKind; 8] {
        [TpbX, TpbY, TpbZ, Bell, OmegaXX, OmegaYY, OmegaZZ, Chi]
    }

    /// Number of qubits the measurement acts on.
    pub fn arity(self) -> usize {
        match self {
            TpbX | TpbY | TpbZ => 1,
            _ => 2,
        }
    }

    pub fn is_entangled(self) -> bool {
        self.arity() == 2
    }

    pub fn name(self) -> &'static str {
        match self {
            TpbX => "TPB-X",
            TpbY => "TPB-Y",
            TpbZ => "TPB-Z",
            Bell => "Bell",
            OmegaXX => "OmegaXX",
            OmegaYY => "OmegaYY",
            OmegaZZ => "OmegaZZ",
            Chi => "Chi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::all().into_iter().find(|k| k.name() == name)
    }

    /// Pauli tuples this kind measures jointly. Tuples are ordered: for the
    /// chi measurement `(Z, X)` is measurable but `(X, Z)` is not.
    pub fn measurable(self) -> &'static [&'static [PauliOp]] {
        match self {
            TpbX => &[&[X]],
            TpbY => &[&[Y]],
            TpbZ => &[&[Z]],
            Bell => &[&[X, X], &[Y, Y], &[Z, Z]],
            OmegaXX => &[&[X, X], &[Y, Z], &[Z, Y]],
            OmegaYY => &[&[Y, Y], &[X, Z], &[Z, X]],
            OmegaZZ => &[&[Z, Z], &[X, Y], &[Y, X]],
            Chi => &[&[X, Y], &[Y, Z], &[Z, X]],
        }
    }

    /// Basis-change circuit on `arity` local qubits, measurement marker not
    /// included. Conjugation by this unitary sends every measurable tuple to
    /// a signed Z/I string.
    pub fn template(self) -> Circuit {
        let cnot = Gate::Cnot { control: 0, target: 1 };
        match self {
            TpbX => Circuit::with_gates(1, [Gate::H(0)]),
            TpbY => Circuit::with_gates(1, [Gate::Sdg(0), Gate::H(0)]),
            TpbZ => Circuit::new(1),
            Bell => Circuit::with_gates(2, [cnot, Gate::H(0)]),
            OmegaXX => Circuit::with_gates(
                2,
                [Gate::Sdg(0), Gate::Sdg(1), Gate::H(0), cnot, Gate::H(0)],
            ),
            OmegaYY => Circuit::with_gates(2, [Gate::H(0), cnot, Gate::H(0)]),
            OmegaZZ => Circuit::with_gates(2, [Gate::Sdg(1), cnot, Gate::H(0)]),
            Chi => Circuit::with_gates(
                2,
                [
                    Gate::U2 { qubit: 0, phi: 0.0, lambda: std::f64::consts::FRAC_PI_2 },
                    cnot,
                    Gate::H(0),
                ],
            ),
        }
    }

    /// True when the restriction of `p` to `positions` is jointly measurable
    /// by this kind: all identity, or exactly a measurable tuple.
    ///
    /// # Panics
    /// Panics if `positions` does not match the kind's arity.
    pub fn compatible_at(self, p: &PauliString, positions: &[usize]) -> bool {
        assert_eq!(positions.len(), self.arity(), "{} takes {} positions", self.name(), self.arity());
        let ops = p.ops_at(positions);
        ops.iter().all(|&o| o == I) || self.measurable().contains(&ops.as_slice())
    }
}

impl std::fmt::Display for MeasurementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Which slice of the catalog a grouping run may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogSelector {
    Tpb,
    TpbBell,
    Tpb2Q,
}

/// Catalog in assignment-preference order: entangled kinds first, then the
/// single-qubit bases.
pub fn catalog(selector: CatalogSelector) -> Vec<MeasurementKind> {
    match selector {
        CatalogSelector::Tpb => vec![TpbX, TpbY, TpbZ],
        CatalogSelector::TpbBell => vec![Bell, TpbX, TpbY, TpbZ],
        CatalogSelector::Tpb2Q => vec![Bell, OmegaXX, OmegaYY, OmegaZZ, Chi, TpbX, TpbY, TpbZ],
    }
}

/// One measurement kind pinned to an ordered tuple of register positions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Placement {
    pub kind: MeasurementKind,
    pub positions: Vec<usize>,
}

impl Placement {
    /// # Panics
    /// Panics if the position count does not match the kind's arity or the
    /// positions repeat.
    pub fn new(kind: MeasurementKind, positions: Vec<usize>) -> Self {
        assert_eq!(positions.len(), kind.arity(), "{} takes {} positions", kind.name(), kind.arity());
        if positions.len() == 2 {
            assert_ne!(positions[0], positions[1], "placement positions repeat");
        }
        Placement { kind, positions }
    }
}

/// A set of placements with pairwise disjoint positions: the measurement
/// layout for one group's circuit.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MeasurementAssignment {
    placements: Vec<Placement>,
}

impl MeasurementAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_placements(placements: impl IntoIterator<Item = Placement>) -> Self {
        let mut a = Self::new();
        for p in placements {
            a.push(p);
        }
        a
    }

    /// # Panics
    /// Panics if the placement overlaps a position already covered.
    pub fn push(&mut self, placement: Placement) {
        for &q in &placement.positions {
            assert!(!self.covers(q), "position {q} already covered");
        }
        self.placements.push(placement);
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn covers(&self, q: usize) -> bool {
        self.placements.iter().any(|p| p.positions.contains(&q))
    }

    /// True when every placement is compatible with `p`.
    pub fn compatible_with(&self, p: &PauliString) -> bool {
        self.placements
            .iter()
            .all(|pl| pl.kind.compatible_at(p, &pl.positions))
    }
}

/// Builds the measurement circuit for an assignment on a `width`-qubit
/// register: each placement's template mapped onto its positions (uncovered
/// qubits stay in the Z basis), ending in a full-register measurement.
pub fn circuit_for(assignment: &MeasurementAssignment, width: usize) -> Result<Circuit> {
    let mut circuit = Circuit::new(width);
    for placement in assignment.placements() {
        if let Some(&q) = placement.positions.iter().find(|&&q| q >= width) {
            return Err(Error::InvalidInput(format!(
                "placement position {q} outside register of width {width}"
            )));
        }
        for gate in placement.kind.template().gates() {
            circuit.push(remap_gate(gate, &placement.positions));
        }
    }
    circuit.push(Gate::MeasureAll);
    Ok(circuit)
}

fn remap_gate(gate: &Gate, positions: &[usize]) -> Gate {
    match *gate {
        Gate::H(q) => Gate::H(positions[q]),
        Gate::Sdg(q) => Gate::Sdg(positions[q]),
        Gate::X(q) => Gate::X(positions[q]),
        Gate::Z(q) => Gate::Z(positions[q]),
        Gate::Ry { qubit, theta } => Gate::Ry { qubit: positions[qubit], theta },
        Gate::U2 { qubit, phi, lambda } => Gate::U2 { qubit: positions[qubit], phi, lambda },
        Gate::Cnot { control, target } => Gate::Cnot {
            control: positions[control],
            target: positions[target],
        },
        Gate::MeasureAll => Gate::MeasureAll,
    }
}

/// Signed Z/I string a measurable tuple becomes under a template unitary:
/// the conjugate is `sign · Z^{z_mask}` with bit `j` of `z_mask` marking a Z
/// factor on local qubit `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiagonalForm {
    pub sign: i8,
    pub z_mask: u8,
}

/// Diagonal form of `measured` under the template of `kind`, or `None` when
/// the tuple is not in the kind's measurable set. Computed by dense
/// conjugation of the template unitary.
pub fn diagonal_form(kind: MeasurementKind, measured: &[PauliOp]) -> Option<DiagonalForm> {
    if !kind.measurable().contains(&measured) {
        return None;
    }
    let u = circuit_unitary(&kind.template());
    let m = conjugate(&u, &pauli_dense(measured), kind.arity());
    Some(
        signed_z_form(&m, kind.arity())
            .expect("template conjugates its measurable set to signed Z strings"),
    )
}

/// ±1 eigenvalue of `measured` for one sampled outcome, where `bits[j]` is
/// the bit read from the qubit at `positions[j]` of the placement.
pub fn eigenvalue_sign(kind: MeasurementKind, measured: &[PauliOp], bits: &[bool]) -> Result<i8> {
    assert_eq!(bits.len(), kind.arity(), "expected {} outcome bits", kind.arity());
    let form = diagonal_form(kind, measured).ok_or_else(|| {
        Error::InvalidInput(format!(
            "{} does not measure {}",
            kind.name(),
            measured.iter().map(|o| o.as_char()).collect::<String>()
        ))
    })?;
    let mut parity = false;
    for (j, &bit) in bits.iter().enumerate() {
        if bit && form.z_mask >> j & 1 == 1 {
            parity = !parity;
        }
    }
    Ok(if parity { -form.sign } else { form.sign })
}

/// Checks the kind's template end to end: every measurable tuple conjugates
/// to a signed Z/I string, and on 100 seeded random states the eigenvalue
/// signs weighted by outcome probabilities reproduce the exact expectation
/// to 1e-10.
pub fn verify_diagonalization(kind: MeasurementKind) -> bool {
    verify_template(kind, &kind.template())
}

fn verify_template(kind: MeasurementKind, template: &Circuit) -> bool {
    let arity = kind.arity();
    if template.width() != arity {
        return false;
    }
    let u = circuit_unitary(template);
    let mut forms = Vec::new();
    for tuple in kind.measurable() {
        match signed_z_form(&conjugate(&u, &pauli_dense(tuple), arity), arity) {
            Some(form) => forms.push(form),
            None => return false,
        }
    }
    for seed in 0..100 {
        let psi = crate::sim::haar_random_state(arity, 0x5157_0000 + seed).unwrap();
        let rotated = psi.apply_circuit(template, None).unwrap();
        let probs = rotated.probabilities();
        for (tuple, form) in kind.measurable().iter().zip(&forms) {
            let induced: f64 = probs
                .iter()
                .enumerate()
                .map(|(outcome, p)| {
                    let mut sign = f64::from(form.sign);
                    for j in 0..arity {
                        let bit = outcome >> (arity - 1 - j) & 1 == 1;
                        if bit && form.z_mask >> j & 1 == 1 {
                            sign = -sign;
                        }
                    }
                    p * sign
                })
                .sum();
            let exact = crate::sim::expectation_pauli(&psi, &PauliString::from_ops(tuple));
            if (induced - exact).abs() > 1e-10 {
                return false;
            }
        }
    }
    true
}

/// Dense unitary of a circuit, row-major over `2^width` basis states,
/// built column by column from the simulator.
fn circuit_unitary(circuit: &Circuit) -> Vec<Complex64> {
    let dim = 1usize << circuit.width();
    let mut u = vec![Complex64::ZERO; dim * dim];
    for col in 0..dim {
        let mut amps = vec![Complex64::ZERO; dim];
        amps[col] = Complex64::ONE;
        let state = QuantumState::from_amplitudes(amps).unwrap();
        let out = state.apply_circuit(circuit, None).unwrap();
        for (row, amp) in out.amplitudes().unwrap().iter().enumerate() {
            u[row * dim + col] = *amp;
        }
    }
    u
}

fn pauli_dense(ops: &[PauliOp]) -> Vec<Complex64> {
    let zero = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::i();
    let mut acc = vec![one];
    let mut dim = 1;
    for op in ops {
        let m: [Complex64; 4] = match op {
            PauliOp::I => [one, zero, zero, one],
            PauliOp::X => [zero, one, one, zero],
            PauliOp::Y => [zero, -i, i, zero],
            PauliOp::Z => [one, zero, zero, -one],
        };
        let next_dim = dim * 2;
        let mut next = vec![zero; next_dim * next_dim];
        for r in 0..dim {
            for c in 0..dim {
                for br in 0..2 {
                    for bc in 0..2 {
                        next[(r * 2 + br) * next_dim + (c * 2 + bc)] = acc[r * dim + c] * m[br * 2 + bc];
                    }
                }
            }
        }
        acc = next;
        dim = next_dim;
    }
    acc
}

/// U · M · U†.
fn conjugate(u: &[Complex64], m: &[Complex64], arity: usize) -> Vec<Complex64> {
    let dim = 1usize << arity;
    let mut um = vec![Complex64::ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::ZERO;
            for k in 0..dim {
                acc += u[r * dim + k] * m[k * dim + c];
            }
            um[r * dim + c] = acc;
        }
    }
    let mut out = vec![Complex64::ZERO; dim * dim];
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::ZERO;
            for k in 0..dim {
                acc += um[r * dim + k] * u[c * dim + k].conj();
            }
            out[r * dim + c] = acc;
        }
    }
    out
}

/// Reads `m` as `sign · Z^{mask}` if it is one, entrywise to 1e-12.
fn signed_z_form(m: &[Complex64], arity: usize) -> Option<DiagonalForm> {
    let dim = 1usize << arity;
    let tol = 1e-12;
    for r in 0..dim {
        for c in 0..dim {
            if r != c && m[r * dim + c].norm() > tol {
                return None;
            }
        }
    }
    let diag: Vec<f64> = (0..dim).map(|b| m[b * dim + b].re).collect();
    for (b, d) in diag.iter().enumerate() {
        if (d.abs() - 1.0).abs() > tol || m[b * dim + b].im.abs() > tol {
            return None;
        }
    }
    let sign = if diag[0] > 0.0 { 1i8 } else { -1i8 };
    let mut z_mask = 0u8;
    for j in 0..arity {
        let flipped = 1usize << (arity - 1 - j);
        if diag[flipped] * diag[0] < 0.0 {
            z_mask |= 1 << j;
        }
    }
    for (b, d) in diag.iter().enumerate() {
        let mut expect = f64::from(sign);
        for j in 0..arity {
            if z_mask >> j & 1 == 1 && b >> (arity - 1 - j) & 1 == 1 {
                expect = -expect;
            }
        }
        if (d - expect).abs() > tol {
            return None;
        }
    }
    Some(DiagonalForm { sign, z_mask })
}
