use std::fmt;
use std::str::FromStr;

/// Deployment strategy selected for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Two-hop COVER; stuck robots park.
    TwoHop,
    /// Two-hop COVER followed by Trace Fingerprint search for stuck robots.
    TwoHopFingerprint,
    /// Two-hop COVER followed by random-waypoint search for stuck robots.
    TwoHopRwp,
    /// Fairness-aware Two-hop COVER.
    Fairness,
    /// One-hop COVER baseline with cooperative attraction.
    CoverBaseline,
    /// Centralized Hungarian assignment.
    Centralized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Fingerprint,
    RandomWaypoint,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::TwoHop,
        Variant::TwoHopFingerprint,
        Variant::TwoHopRwp,
        Variant::Fairness,
        Variant::CoverBaseline,
        Variant::Centralized,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::TwoHop => "two_hop",
            Variant::TwoHopFingerprint => "two_hop_fingerprint",
            Variant::TwoHopRwp => "two_hop_rwp",
            Variant::Fairness => "fairness",
            Variant::CoverBaseline => "cover_baseline",
            Variant::Centralized => "centralized",
        }
    }

    pub fn search_mode(self) -> Option<SearchMode> {
        match self {
            Variant::TwoHopFingerprint => Some(SearchMode::Fingerprint),
            Variant::TwoHopRwp => Some(SearchMode::RandomWaypoint),
            _ => None,
        }
    }

    /// Whether satisfied landmarks and associated robots relay demand one hop further.
    pub fn two_hop(self) -> bool {
        !matches!(self, Variant::CoverBaseline | Variant::Centralized)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown variant `{0}` (expected one of two_hop, two_hop_fingerprint, two_hop_rwp, fairness, cover_baseline, centralized)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "two_hop" => Variant::TwoHop,
            "two_hop_fingerprint" | "fingerprint" => Variant::TwoHopFingerprint,
            "two_hop_rwp" | "rwp" => Variant::TwoHopRwp,
            "fairness" => Variant::Fairness,
            "cover_baseline" | "cover" => Variant::CoverBaseline,
            "centralized" => Variant::Centralized,
            other => return Err(UnknownVariant(other.to_string())),
        })
    }
}
