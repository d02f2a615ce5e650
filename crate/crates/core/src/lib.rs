//! Driver identification from in-vehicle telematics logs.
//!
//! The crate ingests driver-labeled OBD-II CSV logs, cuts them into
//! overlapping fixed-length windows, trains a from-scratch stacked
//! many-to-one LSTM classifier alongside per-row baselines (decision tree,
//! random forest, fully connected network), and measures how each model
//! degrades as Gaussian noise or multiplicative anomalies are injected into
//! the sensor data. Every run is seeded and reproducible.

pub mod baselines;
pub mod corruption;
pub mod data;
pub mod eval;
pub mod model;
pub mod numerics;
pub mod synth;
