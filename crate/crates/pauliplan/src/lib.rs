//! Joint measurement planning for Pauli observables.

pub mod circuit;
pub mod error;
pub mod estimator;
pub mod grouping;
pub mod measurements;
pub mod pauli;
pub mod sim;
pub mod vqe;

pub use estimator::{
    allocate_shots, calibrate, estimate, estimate_with_calibration, standard_error_grouped,
    standard_error_ungrouped, AllocationMode, CalibrationMatrix, EstimateReport, GroupEstimate,
    ShotPlan,
};
pub use grouping::{
    assign_measurements, build_pauli_graph, greedy_group, group_observable, ldfc_coloring,
    max_clique, no_grouping, GraphMode, Group, GroupingMethod, GroupingResult, PauliGraph,
};

pub use circuit::{Circuit, Gate};
pub use error::{Error, Result};
pub use measurements::{
    catalog, circuit_for, diagonal_form, eigenvalue_sign, verify_diagonalization,
    CatalogSelector, DiagonalForm, MeasurementAssignment, MeasurementKind, Placement,
};
pub use pauli::{Observable, ParseError, PauliOp, PauliString};
pub use sim::{
    covariance_exact, derive_seed, expectation_exact, expectation_pauli, haar_random_state, sample,
    singlet_prep_circuit, Counts, NoiseModel, QuantumState,
};
pub use vqe::{ansatz_circuit, run_vqe, AnsatzSpec, SpsaConfig, VqeRecord, VqeTrajectory};
