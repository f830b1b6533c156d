//! Fairness-aware selection: most-starved landmark first, cooperation once a
//! landmark reaches the minimum satisfaction level, and a warm-up round in
//! which robots only spread.

use std::cmp::Ordering;

use crate::model::{Landmark, LandmarkId};
use crate::variant::Variant;

/// `(landmark, remaining ratio D_rem / D, distance)`.
pub type Candidate = (LandmarkId, f64, f64);

/// Orders `a` before `b` when `a` is more starved, then nearer, then lower id.
pub fn compare_candidates(a: Candidate, b: Candidate) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.2.partial_cmp(&b.2).unwrap_or(Ordering::Equal))
        .then(a.0.cmp(&b.0))
}

pub fn fairness_select(dl: &[Candidate]) -> Option<LandmarkId> {
    dl.iter().copied().min_by(|a, b| compare_candidates(*a, *b)).map(|c| c.0)
}

/// True once the landmark's satisfied fraction reaches `min_ds`; from then on
/// it also advertises less-satisfied neighbors.
pub fn cooperation_gate(landmark: &Landmark, min_ds: f64) -> bool {
    landmark.satisfied_fraction().is_some_and(|f| f >= min_ds)
}

/// Association is withheld while a robot handles its first batch of replies.
pub fn warmup_active(variant: Variant, batches_processed: u32) -> bool {
    variant == Variant::Fairness && batches_processed <= 1
}
