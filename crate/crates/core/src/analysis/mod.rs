//! Information-theoretic checks, regret audits and scaling fits.

pub mod audit;
pub mod fit;
pub mod kl;
pub mod normal;
pub mod quadrature;

pub use audit::{verify_theorem2_terms, InequalityCheck, Theorem2Audit};
pub use fit::{fit_exponent, ScalingFit};
pub use kl::{censored_kl, histogram_tv, kl_upper_bound, pinsker_tv, tv_budget, CensoredGaussian};
