//! Exact simulation of a single group: state preparation, the round-robin
//! measurement (directly and via its circuit), noise channels and circuit
//! emission.

pub mod channel;
pub mod circuit;
pub mod measure;
pub mod permutation;
pub mod state;

pub use channel::{apply_channel, estimate_pad_flip, NoiseChannel, Pauli};
pub use measure::{
    circuit_probabilities, pad_flip_probability, pipeline_distribution, povm_probabilities, rr_measure_group,
    rr_measure_with, PovmOutcome,
};
pub use permutation::{delta_pairs, MeasurementRecord, Permutation};
pub use state::{make_group_state, Density, GroupState};
