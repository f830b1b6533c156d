//! Agents and the read-only world snapshot handed to slot handlers.

use std::fmt;

use crate::fingerprint::TraceSet;
use crate::forces::ForceInputs;
use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RobotId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LandmarkId(pub u32);

/// Address of anything that can send or receive a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentId {
    Robot(RobotId),
    Landmark(LandmarkId),
}

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}", self.0)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentId::Robot(r) => r.fmt(f),
            AgentId::Landmark(l) => l.fmt(f),
        }
    }
}

impl From<RobotId> for AgentId {
    fn from(r: RobotId) -> Self {
        AgentId::Robot(r)
    }
}

impl From<LandmarkId> for AgentId {
    fn from(l: LandmarkId) -> Self {
        AgentId::Landmark(l)
    }
}

/// A fixed node requesting `demand` robots.
#[derive(Debug, Clone, PartialEq)]
pub struct Landmark {
    pub id: LandmarkId,
    pub position: Point2,
    pub demand: u32,
    pub remaining: u32,
    /// Landmarks strictly within communication range, sorted by id.
    pub neighbors: Vec<LandmarkId>,
}

impl Landmark {
    pub fn new(id: LandmarkId, position: Point2, demand: u32) -> Self {
        Landmark { id, position, demand, remaining: demand, neighbors: Vec::new() }
    }

    pub fn satisfied(&self) -> u32 {
        self.demand - self.remaining
    }

    /// `D_rem / D`; `None` for zero-demand landmarks.
    pub fn remaining_ratio(&self) -> Option<f64> {
        (self.demand > 0).then(|| self.remaining as f64 / self.demand as f64)
    }

    /// `(D - D_rem) / D`; `None` for zero-demand landmarks.
    pub fn satisfied_fraction(&self) -> Option<f64> {
        self.remaining_ratio().map(|r| 1.0 - r)
    }
}

/// Where an associated robot is in its lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssociationPhase {
    /// Accepted directly; stays put so it can relay for its landmark.
    Holding,
    /// Accepted through a relay; travelling until its landmark is in range.
    Approaching,
    /// Travelling to the position assigned by the landmark.
    Relocating,
    /// Arrived at the assigned position.
    Settled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub landmark: LandmarkId,
    pub landmark_position: Point2,
    pub assigned: Point2,
    pub phase: AssociationPhase,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RobotStatus {
    Free,
    Associated(Association),
    Searching,
    /// Gave up: force-quiescent without a search phase, or nothing left to search.
    Parked,
}

impl RobotStatus {
    pub fn kind(&self) -> StatusKind {
        match self {
            RobotStatus::Free => StatusKind::Free,
            RobotStatus::Associated(_) => StatusKind::Associated,
            RobotStatus::Searching => StatusKind::Searching,
            RobotStatus::Parked => StatusKind::Parked,
        }
    }

    pub fn association(&self) -> Option<&Association> {
        match self {
            RobotStatus::Associated(a) => Some(a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatusKind {
    Free,
    Associated,
    Searching,
    Parked,
}

impl StatusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatusKind::Free => "free",
            StatusKind::Associated => "associated",
            StatusKind::Searching => "searching",
            StatusKind::Parked => "parked",
        }
    }
}

/// A demanding landmark a robot has heard of, directly or through a relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandEntry {
    pub landmark: LandmarkId,
    pub position: Point2,
    pub remaining: u32,
    pub demand: u32,
    /// `None` when the landmark itself replied.
    pub via: Option<(AgentId, Point2)>,
}

impl DemandEntry {
    pub fn remaining_ratio(&self) -> f64 {
        if self.demand == 0 {
            0.0
        } else {
            self.remaining as f64 / self.demand as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingRequest {
    pub landmark: LandmarkId,
    pub via: Option<AgentId>,
    /// Last slot at which the answer can arrive.
    pub deadline: u64,
}

/// Communication state of an unassociated robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exchange {
    /// Will broadcast a position inquiry this slot.
    Ready,
    /// Inquiry sent from `from`; replies arrive at slot `due`.
    Listening { due: u64, from: Point2 },
    /// Association request in flight; the robot holds position.
    Pending(PendingRequest),
    /// Random-waypoint leg in progress; no inquiry until arrival.
    Travelling,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotAgent {
    pub id: RobotId,
    pub position: Point2,
    pub status: RobotStatus,
    /// Cumulative meters moved.
    pub traveled: f64,
    /// Movement rounds, each followed by a neighbor exchange charged `wait_time`.
    pub comm_rounds: u64,
    pub dl: Vec<DemandEntry>,
    pub trace: TraceSet,
    pub zero_force_count: u32,
    pub repulsive_only_count: u32,
    /// Where the current progress window started, and force steps taken since.
    pub progress_anchor: Option<(Point2, u32)>,
    pub association_time: Option<u64>,
    /// Current goal: assigned slot, landmark to approach, or search target.
    pub target: Option<Point2>,
    pub exchange: Exchange,
    /// Force contributions gathered from the last reply batch.
    pub forces: ForceInputs,
    pub batches_processed: u32,
    /// Relay duty: the robot must not move before this slot has passed.
    pub hold_until: Option<u64>,
    /// Clock value when the robot reached its assigned position.
    pub arrival_clock: Option<f64>,
}

impl RobotAgent {
    pub fn new(id: RobotId, position: Point2) -> Self {
        RobotAgent {
            id,
            position,
            status: RobotStatus::Free,
            traveled: 0.0,
            comm_rounds: 0,
            dl: Vec::new(),
            trace: TraceSet::default(),
            zero_force_count: 0,
            repulsive_only_count: 0,
            progress_anchor: None,
            association_time: None,
            target: None,
            exchange: Exchange::Ready,
            forces: ForceInputs::default(),
            batches_processed: 0,
            hold_until: None,
            arrival_clock: None,
        }
    }

    pub fn agent_id(&self) -> AgentId {
        AgentId::Robot(self.id)
    }

    pub fn is_settled(&self) -> bool {
        matches!(self.status, RobotStatus::Associated(a) if a.phase == AssociationPhase::Settled)
    }

    /// `comm_rounds * wait_time + traveled / speed`.
    pub fn clock(&self, wait_time: f64, speed: f64) -> f64 {
        self.comm_rounds as f64 * wait_time + self.traveled / speed
    }

    pub fn holding_for_relay(&self, slot: u64) -> bool {
        self.hold_until.is_some_and(|until| slot <= until)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotView {
    pub id: RobotId,
    pub position: Point2,
    pub kind: StatusKind,
    pub landmark: Option<LandmarkId>,
}

/// Committed world state at the start of a slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub slot: u64,
    pub robots: Vec<RobotView>,
    pub landmarks: Vec<Landmark>,
}

impl Snapshot {
    pub fn new(slot: u64, robots: &[RobotAgent], landmarks: &[Landmark]) -> Self {
        Snapshot {
            slot,
            robots: robots
                .iter()
                .map(|r| RobotView {
                    id: r.id,
                    position: r.position,
                    kind: r.status.kind(),
                    landmark: r.status.association().map(|a| a.landmark),
                })
                .collect(),
            landmarks: landmarks.to_vec(),
        }
    }

    pub fn landmark(&self, id: LandmarkId) -> Option<&Landmark> {
        self.landmarks.iter().find(|l| l.id == id)
    }

    pub fn robot(&self, id: RobotId) -> Option<&RobotView> {
        self.robots.iter().find(|r| r.id == id)
    }

    pub fn position_of(&self, agent: AgentId) -> Option<Point2> {
        match agent {
            AgentId::Robot(r) => self.robot(r).map(|v| v.position),
            AgentId::Landmark(l) => self.landmark(l).map(|v| v.position),
        }
    }
}

/// Robots and landmarks strictly within range of a position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Neighborhood {
    pub robots: Vec<RobotId>,
    pub landmarks: Vec<LandmarkId>,
}

/// Agents at distance `< comm_range` from `position`, excluding `me`.
pub fn neighbors_of(position: Point2, me: Option<AgentId>, snapshot: &Snapshot, comm_range: f64) -> Neighborhood {
    let robots = snapshot
        .robots
        .iter()
        .filter(|r| Some(AgentId::Robot(r.id)) != me && r.position.distance_to(position) < comm_range)
        .map(|r| r.id)
        .collect();
    let landmarks = snapshot
        .landmarks
        .iter()
        .filter(|l| Some(AgentId::Landmark(l.id)) != me && l.position.distance_to(position) < comm_range)
        .map(|l| l.id)
        .collect();
    Neighborhood { robots, landmarks }
}
