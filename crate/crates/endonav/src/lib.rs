//! Desk-scale testbed for autonomous endovascular navigation.
//!
//! The crate simulates coaxial guidewire/catheter navigation through rigid
//! vascular centerline anatomy, defines the five aortic-arch navigation tasks,
//! and trains two recurrent agents on them: a soft actor-critic baseline and a
//! world-model agent with sampling-based planning. An evaluation harness
//! produces per-task metric tables with paired statistical comparisons.
//!
//! Module map:
//! - [`vessel`] — centerline anatomy: branch graph, geometric queries,
//!   augmentation, synthetic generation, file I/O
//! - [`devicesim`] — quasi-static kinematic device simulation with
//!   wall-contact force recording
//! - [`env`] — the multi-task RL environment (tasks, observations, reward,
//!   termination)
//! - [`approx`] — minimal reverse-mode autodiff, dense/LSTM layers, Adam
//! - [`replay`] — sequence-preserving replay buffer and its file format
//! - [`sac`] — recurrent soft actor-critic (single- and multi-task)
//! - [`tdmpc2`] — latent world model with cross-entropy planning
//! - [`evalharness`] — metrics, paired t-tests, report emission
//! - [`pipeline`] — run configuration and the two-stage training pipeline

pub mod approx;
pub mod devicesim;
pub mod env;
pub mod evalharness;
pub mod pipeline;
pub mod replay;
pub mod rng;
pub mod sac;
pub mod tdmpc2;
pub mod vessel;
