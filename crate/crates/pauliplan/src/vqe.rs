//! Variational energy minimization over the grouped estimator: a hardware-
//! style Ry ansatz driven by simultaneous-perturbation gradient steps, with
//! per-iteration circuit accounting so grouping savings show up directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{
    allocate_shots, calibrate, estimate_with_calibration, AllocationMode, CalibrationMatrix,
};
use crate::grouping::{group_observable, GroupingMethod, GroupingResult};
use crate::circuit::{Circuit, Gate};
use crate::pauli::Observable;
use crate::sim::{derive_seed, NoiseModel, QuantumState};

/// Layered Ry ansatz: one rotation layer, then `depth` repetitions of a
/// CNOT chain followed by another rotation layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AnsatzSpec {
    pub qubits: usize,
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(qubits: usize, depth: usize) -> Self {
        assert!(qubits >= 1, "ansatz needs at least one qubit");
        AnsatzSpec { qubits, depth }
    }

    pub fn parameter_count(&self) -> usize {
        self.qubits * (self.depth + 1)
    }
}

/// Builds the ansatz circuit for one parameter vector.
pub fn ansatz_circuit(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    if params.len() != spec.parameter_count() {
        return Err(Error::InvalidInput(format!(
            "ansatz takes {} parameters, got {}",
            spec.parameter_count(),
            params.len()
        )));
    }
    let mut circuit = Circuit::new(spec.qubits);
    let mut next = 0;
    let ry_layer = |circuit: &mut Circuit, next: &mut usize| {
        for q in 0..spec.qubits {
            circuit.push(Gate::Ry { qubit: q, theta: params[*next] });
            *next += 1;
        }
    };
    ry_layer(&mut circuit, &mut next);
    for _ in 0..spec.depth {
        for q in 0..spec.qubits.saturating_sub(1) {
            circuit.push(Gate::Cnot { control: q, target: q + 1 });
        }
        ry_layer(&mut circuit, &mut next);
    }
    Ok(circuit)
}

/// Gain schedule and bookkeeping knobs for the perturbation optimizer.
/// `a = None` calibrates the step scale from the first gradient estimate so
/// the first update moves about 0.1 rad.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpsaConfig {
    pub iterations: usize,
    pub a: Option<f64>,
    pub c: f64,
    pub big_a: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub seed: u64,
    pub recalibration_interval: usize,
    /// Overrides the seeded uniform start in [-pi, pi].
    pub initial_params: Option<Vec<f64>>,
}

impl SpsaConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        assert!(iterations >= 1, "optimizer needs at least one iteration");
        SpsaConfig {
            iterations,
            a: None,
            c: 0.1,
            big_a: iterations as f64 / 10.0,
            alpha: 0.602,
            gamma: 0.101,
            seed,
            recalibration_interval: 10,
            initial_params: None,
        }
    }
}

/// One optimizer step: the parameters it started from, the two perturbed
/// energies, and the cumulative circuit count after the step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeRecord {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub energy_plus: f64,
    pub energy_minus: f64,
    pub circuits_executed: u64,
}

/// Full optimization trace. Circuit counts grow by 2K per iteration, K the
/// group count of the measurement plan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VqeTrajectory {
    pub method: GroupingMethod,
    pub group_count: usize,
    pub records: Vec<VqeRecord>,
    pub final_params: Vec<f64>,
    pub recalibrations: u64,
}

/// Runs the perturbation optimizer on `obs` with energies measured through
/// the grouped estimator. Each circuit takes `shots_per_circuit` samples,
/// matching a fixed per-circuit budget rather than proportional allocation.
/// When mitigating, the calibration matrix refreshes every
/// `recalibration_interval` iterations. Deterministic in the config seed.
pub fn run_vqe(
    obs: &Observable,
    ansatz: &AnsatzSpec,
    method: GroupingMethod,
    shots_per_circuit: u64,
    spsa: &SpsaConfig,
    noise: Option<&NoiseModel>,
    mitigation: bool,
) -> Result<VqeTrajectory> {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    if method == GroupingMethod::All {
        return Err(Error::InvalidInput(
            "commuting-relation groups have no measurement circuits to run".into(),
        ));
    }
    if ansatz.qubits != obs.qubit_count() {
        return Err(Error::InvalidInput(format!(
            "ansatz is on {} qubits, observable on {}",
            ansatz.qubits,
            obs.qubit_count()
        )));
    }
    let grouping: GroupingResult = group_observable(obs, method);
    let plan = allocate_shots(&grouping, shots_per_circuit, AllocationMode::Uniform);
    let k = grouping.k() as u64;

    let dim = ansatz.parameter_count();
    let mut theta: Vec<f64> = match &spsa.initial_params {
        Some(p) => {
            if p.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "initial parameter vector has {} entries, ansatz takes {dim}",
                    p.len()
                )));
            }
            p.clone()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spsa.seed, tag(TAG_INIT, 0)));
            (0..dim)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect()
        }
    };

    let mut a = spsa.a;
    let mut calibration: Option<CalibrationMatrix> = None;
    let mut recalibrations = 0u64;
    let mut records = Vec::with_capacity(spsa.iterations);
    let mut circuits = 0u64;

    for iter in 0..spsa.iterations {
        if mitigation && iter % spsa.recalibration_interval.max(1) == 0 {
            calibration = Some(match noise {
                Some(nm) => calibrate(
                    nm,
                    obs.qubit_count(),
                    8192,
                    derive_seed(spsa.seed, tag(TAG_CALIBRATE, recalibrations)),
                )?,
                None => CalibrationMatrix::identity(obs.qubit_count()),
            });
            recalibrations += 1;
        }

        let c_k = spsa.c / ((iter + 1) as f64).powf(spsa.gamma);
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spsa.seed, tag(TAG_DELTA, iter as u64)));
        let delta: Vec<f64> = (0..dim)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();

        let energy_at = |shift: f64, eval_tag: u64| -> Result<(f64, f64)> {
            let shifted: Vec<f64> = theta
                .iter()
                .zip(&delta)
                .map(|(t, d)| t + shift * d)
                .collect();
            let circuit = ansatz_circuit(ansatz, &shifted)?;
            let state = QuantumState::zero(ansatz.qubits)?.apply_circuit(&circuit, noise)?;
            let report = estimate_with_calibration(
                &state,
                obs,
                &grouping,
                &plan,
                noise,
                calibration.as_ref(),
                derive_seed(spsa.seed, tag(eval_tag, iter as u64)),
            )?;
            Ok((report.value, report.standard_error))
        };
        let (energy_plus, se_plus) = energy_at(c_k, TAG_PLUS)?;
        let (energy_minus, se_minus) = energy_at(-c_k, TAG_MINUS)?;
        circuits += 2 * k;

        records.push(VqeRecord {
            iteration: iter,
            params: theta.clone(),
            energy_plus,
            energy_minus,
            circuits_executed: circuits,
        });

        // A difference buried in shot noise carries no direction; stepping
        // on it (or calibrating the gain from it) blows the walk up, so
        // such iterations hold position.
        let diff = energy_plus - energy_minus;
        let noise_floor = (se_plus * se_plus + se_minus * se_minus).sqrt();
        if diff.abs() <= 2.0 * noise_floor {
            continue;
        }
        let gradient_scale = diff / (2.0 * c_k);
        let a_value = *a.get_or_insert_with(|| {
            // Aim the first significant step at 0.1 rad per coordinate; the
            // floor keeps a weak first gradient from inflating the gain.
            0.1 * (spsa.big_a + 1.0).powf(spsa.alpha) / gradient_scale.abs().max(1.0)
        });
        let a_k = a_value / ((iter + 1) as f64 + spsa.big_a).powf(spsa.alpha);
        let step = (a_k * gradient_scale).clamp(-0.5, 0.5);
        for (t, d) in theta.iter_mut().zip(&delta) {
            *t -= step * d;
        }
    }

    Ok(VqeTrajectory {
        method,
        group_count: grouping.k(),
        records,
        final_params: theta,
        recalibrations,
    })
}

const TAG_INIT: u64 = 1;
const TAG_DELTA: u64 = 2;
const TAG_PLUS: u64 = 3;
const TAG_MINUS: u64 = 4;
const TAG_CALIBRATE: u64 = 5;

fn tag(kind: u64, index: u64) -> u64 {
    kind << 48 | index
}
