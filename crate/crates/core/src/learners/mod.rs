//! Bandit learners and the mini-batch wrapper.

pub mod exp3;
pub mod fkm;
pub mod simple;
pub mod wrapper;

pub use exp3::{exp3_learning_rate, Exp3};
pub use fkm::{one_point_gradient, Fkm};
pub use simple::{FixedAction, LookupTableLearner, ScriptedLearner, UniformRandom};
pub use wrapper::{choose_tau, choose_tau_bco, inner_rounds, MiniBatch};
