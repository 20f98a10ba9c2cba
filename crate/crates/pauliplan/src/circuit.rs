//! Gate-level circuits for state preparation and measurement-basis changes.
//!
//! The gate set is deliberately small: H, Sdg, X, Z, Ry, U2, CNOT, plus a
//! terminal whole-register measurement marker. Circuits print one gate per
//! line in a plain text form (`H 0`, `RY 1.5707963267948966 1`,
//! `U2 <phi> <lambda> <qubit>`, `CNOT 0 1`, `MEASURE_ALL`).

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    Sdg(usize),
    X(usize),
    Z(usize),
    Ry { qubit: usize, theta: f64 },
    U2 { qubit: usize, phi: f64, lambda: f64 },
    Cnot { control: usize, target: usize },
    MeasureAll,
}

impl Gate {
    /// Qubits the gate acts on; empty for the measurement marker.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Sdg(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Ry { qubit, .. } | Gate::U2 { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::MeasureAll => vec![],
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Gate::MeasureAll)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "H {q}"),
            Gate::Sdg(q) => write!(f, "SDG {q}"),
            Gate::X(q) => write!(f, "X {q}"),
            Gate::Z(q) => write!(f, "Z {q}"),
            Gate::Ry { qubit, theta } => write!(f, "RY {theta} {qubit}"),
            Gate::U2 { qubit, phi, lambda } => write!(f, "U2 {phi} {lambda} {qubit}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::MeasureAll => write!(f, "MEASURE_ALL"),
        }
    }
}

/// Ordered gate list on a fixed-width register. At most one measurement
/// marker is allowed and it must come last.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
        }
    }

    pub fn with_gates(width: usize, gates: impl IntoIterator<Item = Gate>) -> Self {
        let mut c = Circuit::new(width);
        for g in gates {
            c.push(g);
        }
        c
    }

    /// # Panics
    /// Panics if a gate qubit is out of range, a control equals its target,
    /// or a gate is appended after the measurement marker.
    pub fn push(&mut self, gate: Gate) {
        assert!(
            self.gates.last().is_none_or(|g| !g.is_measurement()),
            "gate after measurement"
        );
        if let Gate::Cnot { control, target } = gate {
            assert_ne!(control, target, "CNOT control equals target");
        }
        for q in gate.qubits() {
            assert!(q < self.width, "qubit {q} out of range for width {}", self.width);
        }
        self.gates.push(gate);
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gates with any measurement marker dropped.
    pub fn unitary_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| !g.is_measurement())
    }

    pub fn has_measurement(&self) -> bool {
        self.gates.last().is_some_and(|g| g.is_measurement())
    }

    /// Number of gates, measurement marker excluded.
    pub fn gate_count(&self) -> usize {
        self.unitary_gates().count()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}
