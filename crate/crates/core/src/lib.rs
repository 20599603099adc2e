//! Quantum representations of audio signals, simulated classically.
//!
//! The pipeline runs audio through an encoder ([`codecs::encode`]) into a
//! register-aware [`circuit::Circuit`], prepares the state on the statevector
//! [`sim::Simulator`], measures it ([`sim::sample`] or
//! [`sim::exact_probabilities`]) and decodes the outcomes back to audio
//! ([`codecs::decode`]). [`analysis`] scores the reconstruction.
//!
//! Seven representations are supported: QPAM, SQPAM, QSM, uQSM, fpQSM, MQSM
//! and MSQPAM (see [`circuit::Scheme`]).
//!
//! Qubit 0 is the least significant bit of a basis index. Registers are
//! stacked from qubit 0 upward as time, amplitude, channel, so an outcome
//! string printed highest qubit first reads `channel|amplitude|time`.

pub mod analysis;
pub mod audio;
pub mod circuit;
pub mod codecs;
pub mod sim;
