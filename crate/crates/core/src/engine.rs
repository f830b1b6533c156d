//! Slot-synchronous scheduler and run metrics.
//!
//! Each slot: deliver last slot's messages, run landmarks, then associated
//! robots, then the rest, commit movements, update clocks. Messages sent in a
//! slot reach agents within range of the sender once that slot's movements
//! are committed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;

use crate::baselines;
use crate::config::SimConfig;
use crate::fingerprint;
use crate::forces::ForceParams;
use crate::geometry::Point2;
use crate::model::{AgentId, Landmark, LandmarkId, RobotAgent, RobotStatus, Snapshot, StatusKind};
use crate::protocol::{self, Message, Receiver, SlotContext, SlotOutput};
use crate::rng::stream_rng;
use crate::scenario::Scenario;
use crate::variant::{SearchMode, Variant};

/// RNG stream for force tie-breaking and waypoints.
const ENGINE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LandmarkOutcome {
    pub id: LandmarkId,
    pub demand: u32,
    pub remaining: u32,
    /// Slot in which the last unit of demand was granted.
    pub satisfied_slot: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub variant: Variant,
    pub satisfaction: f64,
    pub total_distance: f64,
    pub total_time: f64,
    pub total_messages: u64,
    pub jain_index: f64,
    pub per_landmark: Vec<LandmarkOutcome>,
    pub slots_elapsed: u64,
    pub truncated: bool,
    pub associated: usize,
    pub parked: usize,
    pub dropped_messages: u64,
    pub notes: Vec<String>,
}

impl SimReport {
    pub(crate) fn from_outcomes(variant: Variant, per_landmark: Vec<LandmarkOutcome>) -> Self {
        let fractions: Vec<f64> = per_landmark
            .iter()
            .filter(|l| l.demand > 0)
            .map(|l| (l.demand - l.remaining) as f64 / l.demand as f64)
            .collect();
        SimReport {
            variant,
            satisfaction: satisfaction(&per_landmark),
            total_distance: 0.0,
            total_time: 0.0,
            total_messages: 0,
            jain_index: jain_index(&fractions),
            per_landmark,
            slots_elapsed: 0,
            truncated: false,
            associated: 0,
            parked: 0,
            dropped_messages: 0,
            notes: Vec::new(),
        }
    }

    pub const CSV_COLUMNS: [&'static str; 10] = [
        "variant",
        "satisfaction",
        "total_distance",
        "total_time",
        "total_messages",
        "jain_index",
        "slots_elapsed",
        "truncated",
        "associated",
        "parked",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.variant.to_string(),
            self.satisfaction.to_string(),
            self.total_distance.to_string(),
            self.total_time.to_string(),
            self.total_messages.to_string(),
            self.jain_index.to_string(),
            self.slots_elapsed.to_string(),
            self.truncated.to_string(),
            self.associated.to_string(),
            self.parked.to_string(),
        ]
    }

    /// `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        for (k, v) in Self::CSV_COLUMNS.iter().zip(self.csv_record()) {
            let _ = writeln!(out, "{k}={v}");
        }
        for l in &self.per_landmark {
            let _ = writeln!(out, "landmark.{}={}/{}", l.id.0, l.demand - l.remaining, l.demand);
        }
        for n in &self.notes {
            let _ = writeln!(out, "note={n}");
        }
        out
    }
}

/// Met fraction of total demand; 1 when nothing was demanded.
pub fn satisfaction(per_landmark: &[LandmarkOutcome]) -> f64 {
    let demand: u64 = per_landmark.iter().map(|l| l.demand as u64).sum();
    if demand == 0 {
        return 1.0;
    }
    let met: u64 = per_landmark.iter().map(|l| (l.demand - l.remaining) as u64).sum();
    met as f64 / demand as f64
}

/// Jain's fairness index `(Σx)² / (n·Σx²)`; 0 when every share is zero or there are none.
pub fn jain_index(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    if x.is_empty() || sq == 0.0 {
        return 0.0;
    }
    sum * sum / (x.len() as f64 * sq)
}

/// The index with squares swapped between numerator and denominator. Kept for
/// comparison only; it does not stay within `[1/n, 1]`.
pub fn jain_index_swapped(x: &[f64]) -> f64 {
    let sum: f64 = x.iter().sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    if x.is_empty() || sum == 0.0 {
        return 0.0;
    }
    sq / (x.len() as f64 * sum * sum)
}

/// Hooks for logging a run as it happens.
pub trait Observer {
    fn on_message(&mut self, _slot: u64, _msg: &Message) {}
    fn on_slot(&mut self, _slot: u64, _robots: &[RobotAgent], _landmarks: &[Landmark]) {}
}

pub struct NoopObserver;

impl Observer for NoopObserver {}

/// `slot,agent,x,y,status` rows after every slot.
#[derive(Debug, Default)]
pub struct PositionLog {
    pub rows: Vec<String>,
}

impl PositionLog {
    pub const HEADER: &'static str = "slot,agent,x,y,status";
}

impl Observer for PositionLog {
    fn on_slot(&mut self, slot: u64, robots: &[RobotAgent], landmarks: &[Landmark]) {
        for r in robots {
            self.rows.push(format!("{slot},{},{},{},{}", r.id, r.position.x, r.position.y, r.status.kind().as_str()));
        }
        for l in landmarks {
            self.rows.push(format!("{slot},{},{},{},remaining={}", l.id, l.position.x, l.position.y, l.remaining));
        }
    }
}

#[derive(Debug, Default)]
pub struct MessageLog {
    pub entries: Vec<(u64, Message)>,
}

impl Observer for MessageLog {
    fn on_message(&mut self, slot: u64, msg: &Message) {
        self.entries.push((slot, msg.clone()));
    }
}

/// Coverage of each searching robot's virtual map: `slot,robot,square,fraction`.
#[derive(Debug)]
pub struct VirtualMapLog {
    pub config: SimConfig,
    pub rows: Vec<String>,
}

impl Observer for VirtualMapLog {
    fn on_slot(&mut self, slot: u64, robots: &[RobotAgent], _landmarks: &[Landmark]) {
        for r in robots.iter().filter(|r| r.status == RobotStatus::Searching) {
            let vm = fingerprint::coverage_levels(&r.trace, &self.config);
            for (i, f) in vm.fractions.iter().enumerate() {
                self.rows.push(format!("{slot},{},{i},{f}", r.id));
            }
        }
    }
}

/// Owns all mutable state of one distributed run.
pub struct Engine {
    config: SimConfig,
    variant: Variant,
    params: ForceParams,
    robots: Vec<RobotAgent>,
    landmarks: Vec<Landmark>,
    robot_index: BTreeMap<AgentId, usize>,
    inboxes: BTreeMap<AgentId, Vec<Message>>,
    rng: ChaCha8Rng,
    slot: u64,
    messages: u64,
    dropped: u64,
    satisfied_slot: Vec<Option<u64>>,
    finished: bool,
}

impl Engine {
    pub fn new(scenario: &Scenario, variant: Variant) -> Self {
        let mut robots = scenario.robots.clone();
        robots.sort_by_key(|r| r.id);
        let mut landmarks = scenario.landmarks.clone();
        landmarks.sort_by_key(|l| l.id);
        let robot_index = robots.iter().enumerate().map(|(i, r)| (r.agent_id(), i)).collect();
        let satisfied_slot = landmarks.iter().map(|l| (l.demand > 0 && l.remaining == 0).then_some(0)).collect();
        Engine {
            params: ForceParams::from_config(&scenario.config, robots.len()),
            config: scenario.config.clone(),
            variant,
            robots,
            landmarks,
            robot_index,
            inboxes: BTreeMap::new(),
            rng: stream_rng(scenario.config.rng_seed, ENGINE_STREAM),
            slot: 0,
            messages: 0,
            dropped: 0,
            satisfied_slot,
            finished: false,
        }
    }

    pub fn robots(&self) -> &[RobotAgent] {
        &self.robots
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn messages(&self) -> u64 {
        self.messages
    }

    pub fn is_finished(&self) -> bool {
        self.finished
    }

    fn remaining_demand(&self) -> u32 {
        self.landmarks.iter().map(|l| l.remaining).sum()
    }

    /// Whether the robot can no longer change the outcome.
    fn robot_done(&self, r: &RobotAgent, demand_left: bool) -> bool {
        match r.status {
            RobotStatus::Associated(_) => r.is_settled(),
            RobotStatus::Parked => true,
            RobotStatus::Searching => !demand_left && !matches!(r.exchange, crate::model::Exchange::Pending(_)),
            RobotStatus::Free => {
                !demand_left
                    && !matches!(r.exchange, crate::model::Exchange::Pending(_))
                    && (r.zero_force_count > 0 || r.repulsive_only_count > 0)
            }
        }
    }

    fn take_inbox(&mut self, agent: AgentId) -> Vec<Message> {
        self.inboxes.remove(&agent).unwrap_or_default()
    }

    /// Runs one slot. Returns true once the run has ended.
    pub fn step(&mut self, observer: &mut dyn Observer) -> bool {
        if self.finished {
            return true;
        }
        let slot = self.slot;
        let mut snapshot = Snapshot::new(slot, &self.robots, &self.landmarks);
        let mut sent: Vec<Message> = Vec::new();

        for i in 0..self.landmarks.len() {
            let inbox = self.take_inbox(AgentId::Landmark(self.landmarks[i].id));
            let ctx = SlotContext {
                slot,
                snapshot: &snapshot,
                config: &self.config,
                params: self.params,
                variant: self.variant,
            };
            let out = protocol::landmark_slot(&mut self.landmarks[i], &inbox, &ctx);
            self.dropped += out.dropped as u64;
            sent.extend(out.outbox);
            let l = &self.landmarks[i];
            if l.demand > 0 && l.remaining == 0 && self.satisfied_slot[i].is_none() {
                self.satisfied_slot[i] = Some(slot);
            }
        }
        snapshot.landmarks.clone_from(&self.landmarks);

        let mut moves: Vec<(usize, Point2)> = Vec::new();
        let associated_first: Vec<usize> = {
            let (a, b): (Vec<usize>, Vec<usize>) =
                (0..self.robots.len()).partition(|&i| self.robots[i].status.kind() == StatusKind::Associated);
            a.into_iter().chain(b).collect()
        };
        for i in associated_first {
            let inbox = self.take_inbox(self.robots[i].agent_id());
            let ctx = SlotContext {
                slot,
                snapshot: &snapshot,
                config: &self.config,
                params: self.params,
                variant: self.variant,
            };
            let robot = &mut self.robots[i];
            let out: SlotOutput = match robot.status {
                RobotStatus::Associated(_) => protocol::associated_robot_slot(robot, &inbox, &ctx),
                RobotStatus::Free => protocol::free_robot_slot(robot, &inbox, &ctx, &mut self.rng),
                RobotStatus::Searching => match self.variant.search_mode() {
                    Some(SearchMode::Fingerprint) => fingerprint::searching_slot(robot, &inbox, &ctx),
                    Some(SearchMode::RandomWaypoint) => baselines::rwp_search_slot(robot, &inbox, &ctx, &mut self.rng),
                    None => protocol::parked_slot(robot, &inbox),
                },
                RobotStatus::Parked => protocol::parked_slot(robot, &inbox),
            };
            self.dropped += out.dropped as u64;
            sent.extend(out.outbox);
            if let Some(p) = out.movement {
                moves.push((i, p));
            }
        }

        for (i, p) in moves {
            let r = &mut self.robots[i];
            let p = p.clamp_to(self.config.area_width, self.config.area_height);
            if p != r.position {
                r.traveled += r.position.distance_to(p);
                r.position = p;
                r.comm_rounds += 1;
            }
        }
        let (wait, speed) = (self.config.wait_time, self.config.speed);
        for r in &mut self.robots {
            if r.is_settled() && r.arrival_clock.is_none() {
                r.arrival_clock = Some(r.clock(wait, speed));
            }
        }

        self.messages += sent.len() as u64;
        for m in &sent {
            observer.on_message(slot, m);
        }
        self.deliver(sent);
        observer.on_slot(slot, &self.robots, &self.landmarks);

        self.slot += 1;
        let demand_left = self.remaining_demand() > 0;
        let done = self.robots.iter().all(|r| self.robot_done(r, demand_left));
        if done || self.slot >= self.config.max_slots {
            self.finished = true;
        }
        self.finished
    }

    fn position_of(&self, agent: AgentId) -> Option<Point2> {
        match agent {
            AgentId::Robot(_) => self.robot_index.get(&agent).map(|&i| self.robots[i].position),
            AgentId::Landmark(id) => self.landmarks.iter().find(|l| l.id == id).map(|l| l.position),
        }
    }

    fn deliver(&mut self, sent: Vec<Message>) {
        let range = self.config.comm_range;
        let agents: Vec<(AgentId, Point2)> = self
            .landmarks
            .iter()
            .map(|l| (AgentId::Landmark(l.id), l.position))
            .chain(self.robots.iter().map(|r| (r.agent_id(), r.position)))
            .collect();
        for m in sent {
            let Some(from) = self.position_of(m.sender) else { continue };
            match m.receiver {
                Receiver::Broadcast => {
                    for &(a, p) in &agents {
                        if a != m.sender && p.distance_to(from) < range {
                            self.inboxes.entry(a).or_default().push(m.clone());
                        }
                    }
                }
                Receiver::Agent(to) => {
                    if self.position_of(to).is_some_and(|p| p.distance_to(from) < range) {
                        self.inboxes.entry(to).or_default().push(m);
                    }
                }
            }
        }
    }

    pub fn report(&self) -> SimReport {
        let per_landmark = self
            .landmarks
            .iter()
            .zip(&self.satisfied_slot)
            .map(|(l, s)| LandmarkOutcome { id: l.id, demand: l.demand, remaining: l.remaining, satisfied_slot: *s })
            .collect();
        let mut report = SimReport::from_outcomes(self.variant, per_landmark);
        report.total_distance = self.robots.iter().map(|r| r.traveled).sum();
        report.total_time = account_time(&self.robots, &self.config);
        report.total_messages = self.messages;
        report.slots_elapsed = self.slot;
        let demand_left = self.remaining_demand() > 0;
        report.truncated = !self.robots.iter().all(|r| self.robot_done(r, demand_left));
        report.associated = self.robots.iter().filter(|r| r.status.kind() == StatusKind::Associated).count();
        report.parked = self.robots.iter().filter(|r| r.status == RobotStatus::Parked).count();
        report.dropped_messages = self.dropped;
        if report.associated == 0 {
            report.notes.push("no robot associated".into());
        }
        if report.truncated {
            report.notes.push(format!("stopped at max_slots={}", self.config.max_slots));
        }
        report
    }
}

/// Latest arrival clock over associated robots; robots still travelling count
/// with their clock at the end of the run.
pub fn account_time(robots: &[RobotAgent], config: &SimConfig) -> f64 {
    robots
        .iter()
        .filter(|r| r.status.kind() == StatusKind::Associated)
        .map(|r| r.arrival_clock.unwrap_or_else(|| r.clock(config.wait_time, config.speed)))
        .fold(0.0, f64::max)
}

pub fn run(scenario: &Scenario, variant: Variant) -> SimReport {
    run_with_observer(scenario, variant, &mut NoopObserver)
}

pub fn run_with_observer(scenario: &Scenario, variant: Variant, observer: &mut dyn Observer) -> SimReport {
    if variant == Variant::Centralized {
        return baselines::centralized_run(scenario);
    }
    let mut engine = Engine::new(scenario, variant);
    while !engine.step(observer) {}
    engine.report()
}
