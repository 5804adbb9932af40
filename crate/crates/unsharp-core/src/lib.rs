//! Finite-dimensional numerics for operational quantum measurement.
//!
//! The crate represents states, effects, sharp (PVM) and unsharp (POVM)
//! observables on Hilbert spaces of dimension 2..=64, computes Born
//! probabilities, tests sharpness/regularity/coexistence, builds smearings
//! and projective dilations, and simulates measurement ensembles with
//! reproducible counter-based randomness.
//!
//! Data-parallel batches (outcome sampling, trajectory ensembles, the
//! coexistence search sweeps) run on rayon when the default `parallel`
//! feature is enabled; every such operation also has a `*_serial`
//! reference path producing bit-identical results, and disabling the
//! feature makes the default entry points sequential.

pub mod effects;
pub mod error;
pub mod linalg;
pub mod naimark;
pub mod observables;
pub mod random;
pub mod simulator;

pub use effects::{
    born_probability, is_effect, is_real_in_state, spanning_states, DensityOperator, Effect,
    EffectClass,
};
pub use error::{Error, Result};
pub use linalg::{
    eig_hermitian, is_hermitian, is_positive_semidefinite, meet_projectors, sqrt_psd, tensor,
    CMatrix, CVector, C64, DEFAULT_GROUP_TOL, DEFAULT_TOL, MAX_DIM,
};
pub use naimark::{alternate_dilation, dilate, verify_dilation, DilationResult};
pub use observables::{
    chsh_value, coexist_binary_povms, expectation_variance, first_moment,
    is_informationally_complete, joint_pvm, projectors_coexistent, pvm_from_observable, smear,
    unsharp_spin, validate_povm, validate_pvm, CoexistenceOutcome, GeneralizedMeasure,
    OutcomeSpace, ProjectiveMeasure, SearchBudget, StochasticKernel,
};
pub use simulator::{
    filter_pass, luders_update, sample_outcomes, sequential_measurement, EnsembleConfig,
    MeasurementRecord, SequenceStats, Trajectory,
};
