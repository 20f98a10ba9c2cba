//! Python bindings: the observable container plus the planning, estimation,
//! and optimization entry points, returning plain dicts and lists so callers
//! need no Rust-side types.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use pauliplan::{
    allocate_shots, build_pauli_graph, derive_seed, estimate, group_observable, haar_random_state,
    max_clique, run_vqe, singlet_prep_circuit, standard_error_grouped, standard_error_ungrouped,
    AllocationMode, AnsatzSpec, GraphMode, GroupingMethod, NoiseModel, QuantumState, SpsaConfig,
};

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

fn parse_method(name: &str) -> PyResult<GroupingMethod> {
    match name {
        "no-grouping" => Ok(GroupingMethod::NoGrouping),
        "tpb" => Ok(GroupingMethod::Tpb),
        "tpb-bell" => Ok(GroupingMethod::TpbBell),
        "tpb-2q" => Ok(GroupingMethod::Tpb2Q),
        "all" => Ok(GroupingMethod::All),
        _ => Err(value_err(format!(
            "unknown method {name:?}; use no-grouping, tpb, tpb-bell, tpb-2q, or all"
        ))),
    }
}

fn build_noise(
    noise: Option<(f64, f64, f64, f64)>,
    width: usize,
) -> PyResult<Option<NoiseModel>> {
    noise
        .map(|(p1, p2, p10, p01)| NoiseModel::uniform(p1, p2, p10, p01, width))
        .transpose()
        .map_err(value_err)
}

fn prepare_state(
    state: &str,
    qubits: usize,
    noise: Option<&NoiseModel>,
) -> PyResult<QuantumState> {
    match state {
        "zeros" => QuantumState::zero(qubits).map_err(value_err),
        "singlet" => {
            if qubits != 2 {
                return Err(value_err(format!(
                    "the singlet state needs a 2-qubit observable, got {qubits} qubits"
                )));
            }
            QuantumState::zero(2)
                .and_then(|z| z.apply_circuit(&singlet_prep_circuit(), noise))
                .map_err(value_err)
        }
        _ => Err(value_err(format!(
            "unknown state {state:?}; use zeros or singlet"
        ))),
    }
}

/// Real linear combination of Pauli strings on a common register.
#[pyclass]
struct Observable {
    inner: pauliplan::Observable,
}

#[pymethods]
impl Observable {
    /// Parses the line-oriented text format: `<coefficient> <pauli word>`
    /// per line, `#` starting a comment.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        pauliplan::Observable::parse(text)
            .map(|inner| Observable { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| value_err(format!("cannot read {path}: {e}")))?;
        Self::new(&text)
    }

    #[getter]
    fn qubit_count(&self) -> usize {
        self.inner.qubit_count()
    }

    #[getter]
    fn num_terms(&self) -> usize {
        self.inner.num_terms()
    }

    fn terms(&self) -> Vec<(f64, String)> {
        self.inner
            .terms()
            .iter()
            .map(|(c, s)| (*c, s.to_string()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Observable({} terms on {} qubits)",
            self.inner.num_terms(),
            self.inner.qubit_count()
        )
    }

    fn __str__(&self) -> String {
        self.inner.to_text()
    }
}

fn parse_word(word: &str) -> PyResult<pauliplan::PauliString> {
    word.parse().map_err(value_err)
}

/// True when the two Pauli words commute as operators.
#[pyfunction]
fn commutes(a: &str, b: &str) -> PyResult<bool> {
    let (a, b) = (parse_word(a)?, parse_word(b)?);
    if a.len() != b.len() {
        return Err(value_err("pauli words differ in length"));
    }
    Ok(a.commutes_with(&b))
}

/// True when the two Pauli words agree or hold identity at every position.
#[pyfunction]
fn qubitwise_compatible(a: &str, b: &str) -> PyResult<bool> {
    let (a, b) = (parse_word(a)?, parse_word(b)?);
    if a.len() != b.len() {
        return Err(value_err("pauli words differ in length"));
    }
    Ok(a.qubitwise_compatible(&b))
}

/// Partitions the observable's terms into jointly measurable groups.
#[pyfunction]
#[pyo3(signature = (obs, method = "tpb-bell"))]
fn group<'py>(py: Python<'py>, obs: &Observable, method: &str) -> PyResult<Bound<'py, PyDict>> {
    let m = parse_method(method)?;
    let grouping = group_observable(&obs.inner, m);
    let out = PyDict::new(py);
    out.set_item("method", m.name())?;
    out.set_item("k", grouping.k())?;
    let groups = PyList::empty(py);
    for g in grouping.groups() {
        let entry = PyDict::new(py);
        entry.set_item("members", g.members().to_vec())?;
        let terms: Vec<String> = g
            .members()
            .iter()
            .map(|&i| obs.inner.term(i).1.to_string())
            .collect();
        entry.set_item("terms", terms)?;
        let layout: Vec<String> = g
            .assignment()
            .map(|a| {
                a.placements()
                    .iter()
                    .map(|p| match p.positions.as_slice() {
                        [q] => format!("{}@{q}", p.kind.name()),
                        pos => format!("{}@({},{})", p.kind.name(), pos[0], pos[1]),
                    })
                    .collect()
            })
            .unwrap_or_default();
        entry.set_item("layout", layout)?;
        groups.append(entry)?;
    }
    out.set_item("groups", groups)?;
    Ok(out)
}

/// Exact maximum clique of the incompatibility graph, with an exactness
/// flag that drops when the time limit cuts the search short.
#[pyfunction]
#[pyo3(signature = (obs, mode = "tpb", time_limit = 10.0))]
fn clique_bound(obs: &Observable, mode: &str, time_limit: f64) -> PyResult<(usize, bool)> {
    let mode = match mode {
        "tpb" => GraphMode::Tpb,
        "all" => GraphMode::All,
        _ => return Err(value_err(format!("unknown graph mode {mode:?}; use tpb or all"))),
    };
    let g = build_pauli_graph(&obs.inner, mode);
    Ok(max_clique(&g, time_limit))
}

/// Samples the observable's expectation value through a grouped measurement
/// plan. Returns value, standard error, and the per-group breakdown.
#[pyfunction]
#[pyo3(signature = (obs, state = "zeros", method = "tpb-bell", shots = 2000, uniform = false,
                    mitigate = false, noise = None, seed = 7))]
#[allow(clippy::too_many_arguments)]
fn estimate_observable<'py>(
    py: Python<'py>,
    obs: &Observable,
    state: &str,
    method: &str,
    shots: u64,
    uniform: bool,
    mitigate: bool,
    noise: Option<(f64, f64, f64, f64)>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    if shots == 0 {
        return Err(value_err("shots must be positive"));
    }
    let m = parse_method(method)?;
    let noise_model = build_noise(noise, obs.inner.qubit_count())?;
    let prepared = prepare_state(state, obs.inner.qubit_count(), noise_model.as_ref())?;
    let grouping = group_observable(&obs.inner, m);
    let mode = if uniform {
        AllocationMode::Uniform
    } else {
        AllocationMode::Proportional
    };
    let plan = allocate_shots(&grouping, shots, mode);
    let report = estimate(
        &prepared,
        &obs.inner,
        &grouping,
        &plan,
        noise_model.as_ref(),
        mitigate,
        seed,
    )
    .map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("value", report.value)?;
    out.set_item("standard_error", report.standard_error)?;
    out.set_item("mitigated", report.mitigated)?;
    let per_group = PyList::empty(py);
    for g in &report.per_group {
        let entry = PyDict::new(py);
        entry.set_item("group", g.group)?;
        entry.set_item("estimate", g.estimate)?;
        entry.set_item("sample_variance", g.sample_variance)?;
        entry.set_item("shots", g.shots)?;
        per_group.append(entry)?;
    }
    out.set_item("per_group", per_group)?;
    Ok(out)
}

/// Runs the variational optimizer and returns the trajectory: one record
/// per iteration plus the final parameters.
#[pyfunction]
#[pyo3(signature = (obs, method = "tpb-bell", iterations = 40, depth = 1, shots = 8192,
                    seed = 7, gain_a = None, mitigate = false, noise = None,
                    recalibrate_every = 10))]
#[allow(clippy::too_many_arguments)]
fn run_vqe_loop<'py>(
    py: Python<'py>,
    obs: &Observable,
    method: &str,
    iterations: usize,
    depth: usize,
    shots: u64,
    seed: u64,
    gain_a: Option<f64>,
    mitigate: bool,
    noise: Option<(f64, f64, f64, f64)>,
    recalibrate_every: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if iterations == 0 || shots == 0 || recalibrate_every == 0 {
        return Err(value_err("iterations, shots, and recalibrate_every must be positive"));
    }
    let m = parse_method(method)?;
    let noise_model = build_noise(noise, obs.inner.qubit_count())?;
    let ansatz = AnsatzSpec::new(obs.inner.qubit_count(), depth);
    let mut spsa = SpsaConfig::new(iterations, seed);
    spsa.a = gain_a;
    spsa.recalibration_interval = recalibrate_every;
    let t = run_vqe(
        &obs.inner,
        &ansatz,
        m,
        shots,
        &spsa,
        noise_model.as_ref(),
        mitigate,
    )
    .map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("method", t.method.name())?;
    out.set_item("group_count", t.group_count)?;
    out.set_item("recalibrations", t.recalibrations)?;
    out.set_item("final_params", t.final_params.clone())?;
    let records = PyList::empty(py);
    for r in &t.records {
        let entry = PyDict::new(py);
        entry.set_item("iteration", r.iteration)?;
        entry.set_item("circuits", r.circuits_executed)?;
        entry.set_item("energy_plus", r.energy_plus)?;
        entry.set_item("energy_minus", r.energy_minus)?;
        entry.set_item("mean", 0.5 * (r.energy_plus + r.energy_minus))?;
        records.append(entry)?;
    }
    out.set_item("records", records)?;
    out.set_item(
        "final_mean_energy",
        t.records
            .last()
            .map(|r| 0.5 * (r.energy_plus + r.energy_minus)),
    )?;
    Ok(out)
}

/// Analytic grouped-versus-ungrouped squared standard errors averaged over
/// Haar-random two-qubit states, for the XX+YY+ZZ observable.
#[pyfunction]
#[pyo3(signature = (states = 10000, shots_per_pauli = 500, seed = 7))]
fn variance_experiment<'py>(
    py: Python<'py>,
    states: u64,
    shots_per_pauli: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    if states == 0 || shots_per_pauli == 0 {
        return Err(value_err("states and shots_per_pauli must be positive"));
    }
    let obs = pauliplan::Observable::parse("1 XX\n1 YY\n1 ZZ").expect("well-formed observable");
    let grouping = group_observable(&obs, GroupingMethod::TpbBell);
    let plan = allocate_shots(&grouping, shots_per_pauli, AllocationMode::Proportional);
    let mut sum_ungrouped = 0.0;
    let mut sum_grouped = 0.0;
    let mut violations = 0u64;
    for i in 0..states {
        let state = haar_random_state(2, derive_seed(seed, i)).map_err(value_err)?;
        let se_u = standard_error_ungrouped(&state, &obs, shots_per_pauli);
        let se_g = standard_error_grouped(&state, &obs, &grouping, &plan).map_err(value_err)?;
        sum_ungrouped += se_u * se_u;
        sum_grouped += se_g * se_g;
        if se_g * se_g > se_u * se_u + 1e-12 {
            violations += 1;
        }
    }
    let out = PyDict::new(py);
    out.set_item("mean_squared_se_ungrouped", sum_ungrouped / states as f64)?;
    out.set_item("mean_squared_se_grouped", sum_grouped / states as f64)?;
    out.set_item("inequality_violations", violations)?;
    Ok(out)
}

#[pymodule]
fn pauliplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Observable>()?;
    m.add_function(wrap_pyfunction!(commutes, m)?)?;
    m.add_function(wrap_pyfunction!(qubitwise_compatible, m)?)?;
    m.add_function(wrap_pyfunction!(group, m)?)?;
    m.add_function(wrap_pyfunction!(clique_bound, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_observable, m)?)?;
    m.add_function(wrap_pyfunction!(run_vqe_loop, m)?)?;
    m.add_function(wrap_pyfunction!(variance_experiment, m)?)?;
    Ok(())
}
