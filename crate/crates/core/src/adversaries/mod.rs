//! Loss and delay adversaries.

pub mod delays;
pub mod lower_bound;
pub mod oblivious;
pub mod state_machine;
pub mod theorem1;
pub mod walk;

pub use delays::{FullDelay, NoDelay, UniformSpread};
pub use lower_bound::{default_lb_params, trunc, trunc_half_one, LowerBoundLoss};
pub use oblivious::{ConstantLoss, IidBernoulliLoss, LaggedMatchLoss, QuadraticBallLoss};
pub use state_machine::{switch_bound, DelayStateMachine, DsmStep};
pub use theorem1::{thm1_split, ParityDelay, Theorem1Loss};
pub use walk::{delta, drift_threshold, parent, width, width_bound, MultiScaleWalk, ParentFunction};
