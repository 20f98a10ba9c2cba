//! Frozen eigenbases for the entangled measurements, checked three ways:
//! against dense Pauli matrices built here from scratch, against the
//! template circuits, and against the parity rule used at sampling time.

use num_complex::Complex64;
use pauliplan::{eigenvalue_sign, MeasurementKind, PauliOp, QuantumState};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense 4x4 matrix of a two-qubit Pauli tuple, first factor most
/// significant. Independent of the library's internals.
fn dense(ops: [PauliOp; 2]) -> Vec<Complex64> {
    fn single(op: PauliOp) -> [Complex64; 4] {
        let o = Complex64::ZERO;
        let i = Complex64::i();
        match op {
            PauliOp::I => [r(1.0), o, o, r(1.0)],
            PauliOp::X => [o, r(1.0), r(1.0), o],
            PauliOp::Y => [o, -i, i, o],
            PauliOp::Z => [r(1.0), o, o, r(-1.0)],
        }
    }
    let a = single(ops[0]);
    let b = single(ops[1]);
    let mut out = vec![Complex64::ZERO; 16];
    for ar in 0..2 {
        for ac in 0..2 {
            for br in 0..2 {
                for bc in 0..2 {
                    out[(ar * 2 + br) * 4 + (ac * 2 + bc)] = a[ar * 2 + ac] * b[br * 2 + bc];
                }
            }
        }
    }
    out
}

struct FrozenBasis {
    kind: MeasurementKind,
    /// Four orthonormal eigenvectors over |00>, |01>, |10>, |11>.
    vectors: [[Complex64; 4]; 4],
    /// Per measurable tuple: eigenvalue of each vector, in vector order.
    eigenvalues: [([PauliOp; 2], [i8; 4]); 3],
}

fn frozen_bases() -> Vec<FrozenBasis> {
    use PauliOp::{X, Y, Z};
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        FrozenBasis {
            kind: MeasurementKind::Bell,
            // Phi+, Psi+, Phi-, Psi-.
            vectors: [
                [r(s), r(0.0), r(0.0), r(s)],
                [r(0.0), r(s), r(s), r(0.0)],
                [r(s), r(0.0), r(0.0), r(-s)],
                [r(0.0), r(s), r(-s), r(0.0)],
            ],
            eigenvalues: [
                ([X, X], [1, 1, -1, -1]),
                ([Y, Y], [-1, 1, 1, -1]),
                ([Z, Z], [1, -1, 1, -1]),
            ],
        },
        FrozenBasis {
            kind: MeasurementKind::OmegaXX,
            vectors: [
                [c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(-0.5, 0.0)],
                [c(-0.5, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(-0.5, 0.0)],
                [c(0.5, 0.0), c(0.0, -0.5), c(0.0, -0.5), c(0.5, 0.0)],
                [c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(-0.5, 0.0)],
            ],
            eigenvalues: [
                ([X, X], [-1, 1, 1, -1]),
                ([Y, Z], [1, 1, -1, -1]),
                ([Z, Y], [-1, 1, -1, 1]),
            ],
        },
        FrozenBasis {
            kind: MeasurementKind::OmegaYY,
            vectors: [
                [r(0.5), r(0.5), r(-0.5), r(0.5)],
                [r(-0.5), r(0.5), r(0.5), r(0.5)],
                [r(0.5), r(0.5), r(0.5), r(-0.5)],
                [r(0.5), r(-0.5), r(0.5), r(0.5)],
            ],
            eigenvalues: [
                ([Y, Y], [-1, 1, 1, -1]),
                ([X, Z], [-1, -1, 1, 1]),
                ([Z, X], [1, -1, 1, -1]),
            ],
        },
        FrozenBasis {
            kind: MeasurementKind::OmegaZZ,
            vectors: [
                [r(0.0), r(s), c(0.0, -s), r(0.0)],
                [r(0.0), r(s), c(0.0, s), r(0.0)],
                [r(s), r(0.0), r(0.0), c(0.0, -s)],
                [r(s), r(0.0), r(0.0), c(0.0, s)],
            ],
            eigenvalues: [
                ([Z, Z], [-1, -1, 1, 1]),
                ([X, Y], [1, -1, -1, 1]),
                ([Y, X], [-1, 1, -1, 1]),
            ],
        },
        FrozenBasis {
            kind: MeasurementKind::Chi,
            vectors: [
                [r(0.5), r(0.5), c(0.0, 0.5), c(0.0, -0.5)],
                [r(0.5), r(0.5), c(0.0, -0.5), c(0.0, 0.5)],
                [r(0.5), r(-0.5), c(0.0, 0.5), c(0.0, 0.5)],
                [r(-0.5), r(0.5), c(0.0, 0.5), c(0.0, 0.5)],
            ],
            eigenvalues: [
                ([X, Y], [-1, 1, 1, -1]),
                ([Y, Z], [1, -1, 1, -1]),
                ([Z, X], [1, 1, -1, -1]),
            ],
        },
    ]
}

#[test]
fn frozen_vectors_are_orthonormal() {
    for basis in frozen_bases() {
        for (i, vi) in basis.vectors.iter().enumerate() {
            for (j, vj) in basis.vectors.iter().enumerate() {
                let dot: Complex64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (dot - r(expect)).norm() < 1e-12,
                    "{}: <v{i}|v{j}> = {dot}",
                    basis.kind
                );
            }
        }
    }
}

#[test]
fn frozen_vectors_are_joint_eigenvectors() {
    for basis in frozen_bases() {
        for (ops, lambdas) in &basis.eigenvalues {
            let m = dense(*ops);
            for (v, &lambda) in basis.vectors.iter().zip(lambdas) {
                for row in 0..4 {
                    let mv: Complex64 = (0..4).map(|col| m[row * 4 + col] * v[col]).sum();
                    assert!(
                        (mv - r(f64::from(lambda)) * v[row]).norm() < 1e-12,
                        "{} {:?}: not an eigenvector",
                        basis.kind,
                        ops
                    );
                }
            }
        }
    }
}

#[test]
fn eigenvalue_weighted_projectors_resolve_each_measurable() {
    for basis in frozen_bases() {
        for (ops, lambdas) in &basis.eigenvalues {
            let m = dense(*ops);
            for row in 0..4 {
                for col in 0..4 {
                    let built: Complex64 = basis
                        .vectors
                        .iter()
                        .zip(lambdas)
                        .map(|(v, &l)| r(f64::from(l)) * v[row] * v[col].conj())
                        .sum();
                    assert!(
                        (built - m[row * 4 + col]).norm() < 1e-12,
                        "{} {:?}: projector sum mismatch at ({row},{col})",
                        basis.kind,
                        ops
                    );
                }
            }
        }
    }
}

/// The template sends each frozen eigenvector to a distinct computational
/// basis state, and the parity rule assigns that outcome the frozen
/// eigenvalue for every measurable tuple.
#[test]
fn templates_rotate_frozen_bases_to_computational_states() {
    for basis in frozen_bases() {
        let template = basis.kind.template();
        let mut outcomes = Vec::new();
        for (vi, v) in basis.vectors.iter().enumerate() {
            let state = QuantumState::from_amplitudes(v.to_vec()).unwrap();
            let rotated = state.apply_circuit(&template, None).unwrap();
            let amps = rotated.amplitudes().unwrap();
            let (outcome, amp) = amps
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .unwrap();
            assert!(
                (amp.norm() - 1.0).abs() < 1e-12,
                "{} v{vi}: rotation is not a basis state",
                basis.kind
            );
            outcomes.push(outcome);

            let bits = [outcome >> 1 & 1 == 1, outcome & 1 == 1];
            for (ops, lambdas) in &basis.eigenvalues {
                let sign = eigenvalue_sign(basis.kind, ops, &bits).unwrap();
                assert_eq!(
                    sign, lambdas[vi],
                    "{} {:?} outcome {outcome:02b}",
                    basis.kind, ops
                );
            }
        }
        let mut sorted = outcomes.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3], "{}: outcomes collide", basis.kind);
    }
}

#[test]
fn single_qubit_bases_rotate_to_computational_states() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let cases: [(MeasurementKind, PauliOp, [[Complex64; 2]; 2]); 3] = [
        (
            MeasurementKind::TpbX,
            PauliOp::X,
            [[r(s), r(s)], [r(s), r(-s)]],
        ),
        (
            MeasurementKind::TpbY,
            PauliOp::Y,
            [[r(s), c(0.0, s)], [r(s), c(0.0, -s)]],
        ),
        (
            MeasurementKind::TpbZ,
            PauliOp::Z,
            [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
        ),
    ];
    for (kind, op, vectors) in cases {
        let template = kind.template();
        for (vi, v) in vectors.iter().enumerate() {
            let rotated = QuantumState::from_amplitudes(v.to_vec())
                .unwrap()
                .apply_circuit(&template, None)
                .unwrap();
            let amps = rotated.amplitudes().unwrap();
            assert!((amps[vi].norm() - 1.0).abs() < 1e-12, "{kind} v{vi}");
            let expected = if vi == 0 { 1 } else { -1 };
            assert_eq!(eigenvalue_sign(kind, &[op], &[vi == 1]).unwrap(), expected);
        }
    }
}
