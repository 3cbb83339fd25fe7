//! Per-run audit of the inequalities behind the mini-batch regret decomposition.

use serde::{Deserialize, Serialize};

use crate::game::Transcript;

/// Slack allowed for floating-point summation.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// One inequality `lower <= value <= bound` evaluated on a transcript. For the
/// per-batch checks `value` is the worst batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `bound - value`.
    pub slack: f64,
    pub passed: bool,
}

impl InequalityCheck {
    fn new(name: &str, value: f64, lower: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            bound,
            slack: bound - value,
            passed: value >= lower - AUDIT_TOLERANCE && value <= bound + AUDIT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Audit {
    pub tau: usize,
    pub delay_span: usize,
    pub batches: usize,
    /// `tau > max(d, m)`, the precondition of the regret bound. Reported only;
    /// the three inequalities below hold regardless.
    pub precondition: bool,
    /// `0 <= sum l_t - sum l_t^o <= d - 1`.
    pub observed_gap: InequalityCheck,
    /// Per batch, `sum l_t^o <= tau + d - 1`.
    pub batch_mass: InequalityCheck,
    /// Per batch, `sum l_t^o - tau * min(avg, 1) <= d - 1`.
    pub clip_loss: InequalityCheck,
}

impl Theorem2Audit {
    pub fn passed(&self) -> bool {
        self.observed_gap.passed && self.batch_mass.passed && self.clip_loss.passed
    }

    pub fn checks(&self) -> [&InequalityCheck; 3] {
        [&self.observed_gap, &self.batch_mass, &self.clip_loss]
    }
}

/// Audits a transcript of a wrapper run with batch size `tau`. `d` and `m` come
/// from the transcript's configuration. Full batches are `[(j-1) tau + 1, j tau]`
/// for `j <= floor(T / tau)`; leftover rounds belong to no batch.
pub fn verify_theorem2_terms(transcript: &Transcript, tau: usize) -> Theorem2Audit {
    let tau = tau.max(1);
    let d = transcript.config.delay_span;
    let m = transcript.config.memory_bound;
    let dm1 = (d - 1) as f64;

    let gap = transcript.realized_total() - transcript.observed_total();
    let observed_gap = InequalityCheck::new("observed gap", gap, 0.0, dm1);

    let batches = transcript.horizon() / tau;
    let mut worst_mass = 0.0f64;
    let mut worst_clip = 0.0f64;
    for chunk in transcript.observed.chunks_exact(tau) {
        let mass: f64 = chunk.iter().sum();
        let clipped = tau as f64 * (mass / tau as f64).min(1.0);
        worst_mass = worst_mass.max(mass);
        worst_clip = worst_clip.max(mass - clipped);
    }
    let mass_bound = (tau + d - 1) as f64;

    Theorem2Audit {
        tau,
        delay_span: d,
        batches,
        precondition: tau > d.max(m),
        observed_gap,
        batch_mass: InequalityCheck::new("batch mass", worst_mass, 0.0, mass_bound),
        clip_loss: InequalityCheck::new("clip loss", worst_clip, 0.0, dm1),
    }
}
