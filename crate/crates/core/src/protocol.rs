//! Message vocabulary and per-slot behavior of landmarks, associated robots and
//! free robots.
//!
//! Every handler reads the committed [`Snapshot`] of the slot, consumes the
//! messages delivered to it, and returns an outbox plus an optional movement
//! intent. Messages emitted in slot `s` are delivered in slot `s + 1` to
//! receivers within range at the end of slot `s`.
//!
//! An unassociated robot works in cycles: it broadcasts a position inquiry,
//! holds for one slot while neighbors answer, then processes the replies two
//! slots after the inquiry. Association requests go to the landmark directly
//! or through one relay (a satisfied landmark or an associated robot), never
//! further.

use std::cmp::Ordering;

use rand::Rng;

use crate::config::SimConfig;
use crate::fairness;
use crate::fingerprint::{self, StuckOutcome};
use crate::forces::{self, Force2, ForceInputs, ForceParams};
use crate::geometry::Point2;
use crate::model::{
    AgentId, Association, AssociationPhase, DemandEntry, Exchange, Landmark, LandmarkId, PendingRequest, RobotAgent,
    RobotId, RobotStatus, Snapshot,
};
use crate::variant::Variant;

/// Slots between sending a direct request and its answer arriving.
pub const DIRECT_ROUND_TRIP: u64 = 2;
/// Same through one relay.
pub const RELAY_ROUND_TRIP: u64 = 4;
/// Slots between an inquiry and its replies arriving.
pub const INQUIRY_ROUND_TRIP: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandInfo {
    pub landmark: LandmarkId,
    pub position: Point2,
    pub remaining: u32,
    pub demand: u32,
}

impl DemandInfo {
    pub fn of(l: &Landmark) -> Self {
        DemandInfo { landmark: l.id, position: l.position, remaining: l.remaining, demand: l.demand }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessageKind {
    PositionInquiry,
    FreeRobotReply {
        position: Point2,
    },
    /// A demanding landmark, sent by the landmark itself or on its behalf by an associated robot at `from`.
    DemandReply {
        from: Point2,
        info: DemandInfo,
    },
    /// Demanding landmarks reachable through the sender at `from`.
    DemandListReply {
        from: Point2,
        entries: Vec<DemandInfo>,
    },
    RepulsiveReply {
        position: Point2,
    },
    /// COVER cooperation: pull toward `target`.
    AttractiveReply {
        position: Point2,
        target: Point2,
    },
    AssociateRequest {
        robot: RobotId,
        landmark: LandmarkId,
    },
    AssociateAccept {
        robot: RobotId,
        landmark: LandmarkId,
        assigned: Point2,
    },
    AssociateReject {
        robot: RobotId,
        landmark: LandmarkId,
    },
    /// Relay `inner` to `destination`. Never nested.
    Forward {
        inner: Box<MessageKind>,
        destination: AgentId,
    },
    TraceRequest,
    TraceReply {
        position: Point2,
        points: Vec<Point2>,
    },
}

impl MessageKind {
    pub fn name(&self) -> &'static str {
        match self {
            MessageKind::PositionInquiry => "position_inquiry",
            MessageKind::FreeRobotReply { .. } => "free_robot_reply",
            MessageKind::DemandReply { .. } => "demand_reply",
            MessageKind::DemandListReply { .. } => "demand_list_reply",
            MessageKind::RepulsiveReply { .. } => "repulsive_reply",
            MessageKind::AttractiveReply { .. } => "attractive_reply",
            MessageKind::AssociateRequest { .. } => "associate_request",
            MessageKind::AssociateAccept { .. } => "associate_accept",
            MessageKind::AssociateReject { .. } => "associate_reject",
            MessageKind::Forward { .. } => "forward",
            MessageKind::TraceRequest => "trace_request",
            MessageKind::TraceReply { .. } => "trace_reply",
        }
    }

    pub fn forward_depth(&self) -> usize {
        match self {
            MessageKind::Forward { inner, .. } => 1 + inner.forward_depth(),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Broadcast,
    Agent(AgentId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub sender: AgentId,
    pub receiver: Receiver,
    pub kind: MessageKind,
}

impl Message {
    pub fn broadcast(sender: AgentId, kind: MessageKind) -> Self {
        Message { sender, receiver: Receiver::Broadcast, kind }
    }

    pub fn to(sender: AgentId, receiver: AgentId, kind: MessageKind) -> Self {
        Message { sender, receiver: Receiver::Agent(receiver), kind }
    }

    pub fn forward(sender: AgentId, relay: AgentId, inner: MessageKind, destination: AgentId) -> Self {
        debug_assert_eq!(inner.forward_depth(), 0, "forwards never nest");
        Message::to(sender, relay, MessageKind::Forward { inner: Box::new(inner), destination })
    }

    /// Structural checks applied before a handler acts on a message.
    pub fn is_well_formed(&self) -> bool {
        fn finite(p: &Point2) -> bool {
            p.is_finite()
        }
        match &self.kind {
            MessageKind::Forward { inner, .. } => inner.forward_depth() == 0,
            MessageKind::DemandReply { from, info } => info.remaining > 0 && finite(from) && finite(&info.position),
            MessageKind::DemandListReply { from, entries } => {
                finite(from) && !entries.is_empty() && entries.iter().all(|e| e.remaining > 0 && finite(&e.position))
            }
            MessageKind::FreeRobotReply { position } | MessageKind::RepulsiveReply { position } => finite(position),
            MessageKind::AttractiveReply { position, target } => finite(position) && finite(target),
            MessageKind::AssociateAccept { assigned, .. } => finite(assigned),
            MessageKind::TraceReply { position, points } => finite(position) && points.iter().all(finite),
            _ => true,
        }
    }
}

/// Read-only context shared by all handlers in a slot.
#[derive(Debug, Clone, Copy)]
pub struct SlotContext<'a> {
    pub slot: u64,
    pub snapshot: &'a Snapshot,
    pub config: &'a SimConfig,
    pub params: ForceParams,
    pub variant: Variant,
}

impl SlotContext<'_> {
    pub fn in_range(&self, a: Point2, b: Point2) -> bool {
        a.distance_to(b) < self.config.comm_range
    }

    /// Landmarks within range of `p` that still have demand, sorted by id.
    fn demanding_landmarks_near(&self, p: Point2) -> impl Iterator<Item = &Landmark> {
        self.snapshot.landmarks.iter().filter(move |l| l.remaining > 0 && self.in_range(p, l.position))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SlotOutput {
    pub outbox: Vec<Message>,
    /// Desired position at the end of the slot.
    pub movement: Option<Point2>,
    /// Malformed or unexpected messages discarded.
    pub dropped: u32,
}

/// Slot `k` of a landmark's `demand` positions: equal angles on a circle of
/// radius `d_th / 2`, clamped to the area.
pub fn assigned_position(landmark: &Landmark, index: u32, config: &SimConfig) -> Point2 {
    let n = landmark.demand.max(1) as f64;
    let angle = std::f64::consts::TAU * index as f64 / n;
    landmark.position.offset(angle, config.dist_threshold / 2.0).clamp_to(config.area_width, config.area_height)
}

fn highest_demand<'a>(it: impl Iterator<Item = &'a Landmark>) -> Option<&'a Landmark> {
    it.max_by(|a, b| a.remaining.cmp(&b.remaining).then(b.id.cmp(&a.id)))
}

/// What a landmark answers to a position inquiry.
pub fn landmark_inquiry_reply(landmark: &Landmark, ctx: &SlotContext) -> MessageKind {
    let from = landmark.position;
    let demanding_neighbors: Vec<&Landmark> =
        landmark.neighbors.iter().filter_map(|id| ctx.snapshot.landmark(*id)).filter(|l| l.remaining > 0).collect();

    if landmark.remaining > 0 {
        if ctx.variant == Variant::Fairness && fairness::cooperation_gate(landmark, ctx.config.min_ds) {
            let own = landmark.satisfied_fraction().unwrap_or(1.0);
            let mut entries = vec![DemandInfo::of(landmark)];
            entries.extend(
                demanding_neighbors
                    .iter()
                    .filter(|l| l.satisfied_fraction().is_some_and(|f| f < own))
                    .map(|l| DemandInfo::of(l)),
            );
            if entries.len() > 1 {
                return MessageKind::DemandListReply { from, entries };
            }
        }
        return MessageKind::DemandReply { from, info: DemandInfo::of(landmark) };
    }
    if demanding_neighbors.is_empty() {
        return MessageKind::RepulsiveReply { position: from };
    }
    if ctx.variant == Variant::CoverBaseline {
        let target = highest_demand(demanding_neighbors.into_iter()).expect("nonempty");
        return MessageKind::AttractiveReply { position: from, target: target.position };
    }
    MessageKind::DemandListReply { from, entries: demanding_neighbors.into_iter().map(DemandInfo::of).collect() }
}

/// Landmark behavior for one slot. Requests are granted in ascending robot id
/// while demand remains; inquiries are answered after the grants.
pub fn landmark_slot(landmark: &mut Landmark, inbox: &[Message], ctx: &SlotContext) -> SlotOutput {
    let me = AgentId::Landmark(landmark.id);
    let mut out = SlotOutput::default();
    let mut requests: Vec<(RobotId, AgentId)> = Vec::new();
    let mut inquirers: Vec<AgentId> = Vec::new();

    for msg in inbox {
        if !msg.is_well_formed() {
            out.dropped += 1;
            continue;
        }
        match &msg.kind {
            MessageKind::PositionInquiry => inquirers.push(msg.sender),
            MessageKind::AssociateRequest { robot, landmark: l } if *l == landmark.id => {
                requests.push((*robot, msg.sender))
            }
            MessageKind::Forward { inner, destination } => match (inner.as_ref(), *destination) {
                (MessageKind::AssociateRequest { robot, landmark: l }, AgentId::Landmark(dest)) if *l == dest => {
                    if dest == landmark.id {
                        requests.push((*robot, msg.sender));
                    } else if landmark.neighbors.contains(&dest) {
                        out.outbox.push(Message::to(me, AgentId::Landmark(dest), (**inner).clone()));
                    } else {
                        out.outbox.push(Message::to(
                            me,
                            msg.sender,
                            MessageKind::AssociateReject { robot: *robot, landmark: dest },
                        ));
                    }
                }
                (
                    MessageKind::AssociateAccept { robot, .. } | MessageKind::AssociateReject { robot, .. },
                    AgentId::Robot(r),
                ) if *robot == r => {
                    out.outbox.push(Message::to(me, AgentId::Robot(r), (**inner).clone()));
                }
                _ => out.dropped += 1,
            },
            MessageKind::TraceRequest => {}
            _ => out.dropped += 1,
        }
    }

    requests.sort_by_key(|(r, _)| *r);
    requests.dedup_by_key(|(r, _)| *r);
    for (robot, reply_to) in requests {
        let kind = if landmark.remaining > 0 {
            let index = landmark.demand - landmark.remaining;
            landmark.remaining -= 1;
            MessageKind::AssociateAccept {
                robot,
                landmark: landmark.id,
                assigned: assigned_position(landmark, index, ctx.config),
            }
        } else {
            MessageKind::AssociateReject { robot, landmark: landmark.id }
        };
        let msg = if reply_to == AgentId::Robot(robot) {
            Message::to(me, reply_to, kind)
        } else {
            Message::forward(me, reply_to, kind, AgentId::Robot(robot))
        };
        out.outbox.push(msg);
    }

    if !inquirers.is_empty() {
        let reply = landmark_inquiry_reply(landmark, ctx);
        out.outbox.extend(inquirers.into_iter().map(|to| Message::to(me, to, reply.clone())));
    }
    out
}

/// What an associated robot answers to a position inquiry.
pub fn associated_inquiry_reply(robot: &RobotAgent, assoc: &Association, ctx: &SlotContext) -> MessageKind {
    let from = robot.position;
    let own = ctx.snapshot.landmark(assoc.landmark).filter(|l| ctx.in_range(from, l.position));

    if ctx.variant == Variant::CoverBaseline {
        return match highest_demand(ctx.demanding_landmarks_near(from)) {
            Some(l) => MessageKind::AttractiveReply { position: from, target: l.position },
            None => MessageKind::RepulsiveReply { position: from },
        };
    }

    if let Some(own) = own.filter(|l| l.remaining > 0) {
        if ctx.variant == Variant::Fairness && fairness::cooperation_gate(own, ctx.config.min_ds) {
            let own_fraction = own.satisfied_fraction().unwrap_or(1.0);
            let mut entries = vec![DemandInfo::of(own)];
            entries.extend(
                ctx.demanding_landmarks_near(from)
                    .filter(|l| l.id != own.id && l.satisfied_fraction().is_some_and(|f| f < own_fraction))
                    .map(DemandInfo::of),
            );
            if entries.len() > 1 {
                return MessageKind::DemandListReply { from, entries };
            }
        }
        return MessageKind::DemandReply { from, info: DemandInfo::of(own) };
    }
    let entries: Vec<DemandInfo> = ctx.demanding_landmarks_near(from).map(DemandInfo::of).collect();
    if entries.is_empty() {
        MessageKind::RepulsiveReply { position: from }
    } else {
        MessageKind::DemandListReply { from, entries }
    }
}

/// Relay duties shared by every associated robot. Returns true if the message was a forward.
fn relay(robot: &mut RobotAgent, msg: &Message, ctx: &SlotContext, out: &mut SlotOutput) -> bool {
    let MessageKind::Forward { inner, destination } = &msg.kind else {
        return false;
    };
    let me = robot.agent_id();
    match (inner.as_ref(), *destination) {
        (MessageKind::AssociateRequest { robot: requester, landmark }, AgentId::Landmark(dest))
            if *landmark == dest =>
        {
            let reachable = ctx.snapshot.landmark(dest).is_some_and(|l| ctx.in_range(robot.position, l.position));
            if reachable {
                out.outbox.push(Message::to(me, AgentId::Landmark(dest), (**inner).clone()));
                // stay in range of both ends until the answer has been passed back
                robot.hold_until = Some(ctx.slot + RELAY_ROUND_TRIP - 2);
            } else {
                out.outbox.push(Message::to(
                    me,
                    msg.sender,
                    MessageKind::AssociateReject { robot: *requester, landmark: dest },
                ));
            }
        }
        (
            MessageKind::AssociateAccept { robot: r, .. } | MessageKind::AssociateReject { robot: r, .. },
            AgentId::Robot(dest),
        ) if *r == dest => {
            out.outbox.push(Message::to(me, AgentId::Robot(dest), (**inner).clone()));
        }
        _ => out.dropped += 1,
    }
    true
}

fn relocation_due(robot: &RobotAgent, assoc: &Association, ctx: &SlotContext) -> bool {
    let own_done = ctx.snapshot.landmark(assoc.landmark).is_none_or(|l| l.remaining == 0);
    let neighbors_done = ctx.demanding_landmarks_near(robot.position).next().is_none();
    let waited = robot.association_time.is_none_or(|t| ctx.slot.saturating_sub(t) > ctx.config.wait_slots);
    (own_done && neighbors_done) || waited
}

/// Associated-robot behavior: answer inquiries for its landmark, relay
/// association traffic, and eventually relocate to the assigned position.
pub fn associated_robot_slot(robot: &mut RobotAgent, inbox: &[Message], ctx: &SlotContext) -> SlotOutput {
    let RobotStatus::Associated(mut assoc) = robot.status else {
        return SlotOutput::default();
    };
    let me = robot.agent_id();
    let mut out = SlotOutput::default();

    for msg in inbox {
        if !msg.is_well_formed() {
            out.dropped += 1;
            continue;
        }
        match &msg.kind {
            MessageKind::PositionInquiry => {
                out.outbox.push(Message::to(me, msg.sender, associated_inquiry_reply(robot, &assoc, ctx)));
            }
            MessageKind::TraceRequest => out.outbox.push(trace_reply(robot, msg.sender)),
            MessageKind::Forward { .. } => {
                relay(robot, msg, ctx, &mut out);
            }
            // answers to COVER beacons carry nothing an associated robot acts on
            MessageKind::FreeRobotReply { .. }
            | MessageKind::RepulsiveReply { .. }
            | MessageKind::AttractiveReply { .. }
            | MessageKind::DemandReply { .. }
            | MessageKind::DemandListReply { .. } => {}
            _ => out.dropped += 1,
        }
    }

    if ctx.variant == Variant::CoverBaseline {
        out.outbox.push(Message::broadcast(me, MessageKind::PositionInquiry));
    }

    if robot.holding_for_relay(ctx.slot) {
        return out;
    }
    let budget = ctx.config.travel_budget();
    match assoc.phase {
        AssociationPhase::Approaching => {
            let d = robot.position.distance_to(assoc.landmark_position);
            if d < ctx.config.comm_range {
                assoc.phase = AssociationPhase::Holding;
            } else {
                // stop a little inside the range boundary
                let needed = d - 0.9 * ctx.config.comm_range;
                out.movement = Some(robot.position.step_toward(assoc.landmark_position, budget.min(needed)));
            }
        }
        AssociationPhase::Holding => {
            if relocation_due(robot, &assoc, ctx) {
                assoc.phase = AssociationPhase::Relocating;
            }
        }
        AssociationPhase::Relocating | AssociationPhase::Settled => {}
    }
    if assoc.phase == AssociationPhase::Relocating {
        let next = robot.position.step_toward(assoc.assigned, budget);
        if next == assoc.assigned {
            assoc.phase = AssociationPhase::Settled;
        }
        if next != robot.position {
            out.movement = Some(next);
        }
    }
    robot.status = RobotStatus::Associated(assoc);
    out
}

pub(crate) fn trace_reply(robot: &RobotAgent, to: AgentId) -> Message {
    Message::to(
        robot.agent_id(),
        to,
        MessageKind::TraceReply { position: robot.position, points: robot.trace.points().to_vec() },
    )
}

/// Replies gathered by an unassociated robot from one inquiry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplyBatch {
    pub dl: Vec<DemandEntry>,
    pub forces: ForceInputs,
    /// Traces shared by neighboring robots.
    pub traces: Vec<Vec<Point2>>,
    /// Senders that vouched for no unmet demand within their range.
    pub positions: Vec<Point2>,
}

/// Sorts into demand candidates, force contributions and trace material.
/// Candidates must be reachable from the robot's current position; a landmark
/// heard directly supersedes the same landmark heard through a relay.
pub fn collect_replies(robot: &RobotAgent, inbox: &[Message], ctx: &SlotContext) -> ReplyBatch {
    let mut batch = ReplyBatch::default();
    let me = robot.agent_id();
    let add = |entry: DemandEntry, dl: &mut Vec<DemandEntry>| {
        let reach = entry.via.map_or(entry.position, |(_, p)| p);
        if !ctx.in_range(robot.position, reach) {
            return;
        }
        match dl.iter_mut().find(|e| e.landmark == entry.landmark) {
            Some(existing) => {
                if existing.via.is_some() && entry.via.is_none() {
                    *existing = entry;
                }
            }
            None => dl.push(entry),
        }
    };

    for msg in inbox {
        if msg.receiver != crate::protocol::Receiver::Agent(me) || !msg.is_well_formed() {
            continue;
        }
        let via = |from: Point2, info: &DemandInfo| {
            if msg.sender == AgentId::Landmark(info.landmark) {
                None
            } else {
                Some((msg.sender, from))
            }
        };
        match &msg.kind {
            MessageKind::FreeRobotReply { position } => {
                batch.forces.free_neighbors.push(*position);
            }
            MessageKind::RepulsiveReply { position } => {
                batch.forces.repulsive.push(*position);
                batch.positions.push(*position);
            }
            MessageKind::AttractiveReply { target, .. } => batch.forces.attractive.push(*target),
            MessageKind::DemandReply { from, info } => {
                let entry = DemandEntry {
                    landmark: info.landmark,
                    position: info.position,
                    remaining: info.remaining,
                    demand: info.demand,
                    via: via(*from, info),
                };
                add(entry, &mut batch.dl);
            }
            MessageKind::DemandListReply { from, entries } => {
                for info in entries {
                    let entry = DemandEntry {
                        landmark: info.landmark,
                        position: info.position,
                        remaining: info.remaining,
                        demand: info.demand,
                        via: via(*from, info),
                    };
                    add(entry, &mut batch.dl);
                }
            }
            MessageKind::TraceReply { points, .. } => batch.traces.push(points.clone()),
            _ => {}
        }
    }
    order_dl(&mut batch.dl, robot.position, ctx.variant);
    batch
}

/// Candidate order: nearest first, or most-starved first for the fairness variant.
pub fn order_dl(dl: &mut [DemandEntry], from: Point2, variant: Variant) {
    dl.sort_by(|a, b| {
        let (da, db) = (from.distance_to(a.position), from.distance_to(b.position));
        if variant == Variant::Fairness {
            fairness::compare_candidates((a.landmark, a.remaining_ratio(), da), (b.landmark, b.remaining_ratio(), db))
        } else {
            da.partial_cmp(&db).unwrap_or(Ordering::Equal).then(a.landmark.cmp(&b.landmark))
        }
    });
}

/// Takes the next candidate from `robot.dl` and emits an association request
/// for it, directly or through the relay that advertised it. Returns `None`
/// once the list is exhausted.
pub fn process_dl(robot: &mut RobotAgent, ctx: &SlotContext) -> Option<Message> {
    if robot.dl.is_empty() {
        return None;
    }
    let entry = robot.dl[0];
    let me = robot.agent_id();
    let request = MessageKind::AssociateRequest { robot: robot.id, landmark: entry.landmark };
    let (msg, via, trip) = match entry.via {
        None => (Message::to(me, AgentId::Landmark(entry.landmark), request), None, DIRECT_ROUND_TRIP),
        Some((relay, _)) => {
            (Message::forward(me, relay, request, AgentId::Landmark(entry.landmark)), Some(relay), RELAY_ROUND_TRIP)
        }
    };
    robot.exchange = Exchange::Pending(PendingRequest { landmark: entry.landmark, via, deadline: ctx.slot + trip });
    Some(msg)
}

/// Outcome of checking an in-flight association request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Resolution {
    NotPending,
    Waiting,
    Associated,
    /// Rejected or timed out; the candidate has been dropped from `dl`.
    Rejected,
}

/// Applies an accept or reject addressed to this robot. An accept is honored
/// even when unexpected so that every granted demand unit has its robot.
pub fn resolve_pending(robot: &mut RobotAgent, inbox: &[Message], ctx: &SlotContext) -> Resolution {
    let me = AgentId::Robot(robot.id);
    let accept = inbox.iter().find_map(|m| match m.kind {
        MessageKind::AssociateAccept { robot: r, landmark, assigned }
            if r == robot.id && m.receiver == Receiver::Agent(me) =>
        {
            Some((landmark, assigned, m.sender))
        }
        _ => None,
    });
    if let Some((landmark, assigned, sender)) = accept {
        let direct = sender == AgentId::Landmark(landmark);
        become_associated(robot, landmark, assigned, direct, ctx);
        return Resolution::Associated;
    }
    let Exchange::Pending(p) = robot.exchange else {
        return Resolution::NotPending;
    };
    let rejected = inbox.iter().any(|m| {
        matches!(m.kind, MessageKind::AssociateReject { robot: r, landmark } if r == robot.id && landmark == p.landmark)
    });
    if rejected || ctx.slot > p.deadline {
        robot.dl.retain(|e| e.landmark != p.landmark);
        robot.exchange = Exchange::Ready;
        Resolution::Rejected
    } else {
        Resolution::Waiting
    }
}

pub fn become_associated(
    robot: &mut RobotAgent,
    landmark: LandmarkId,
    assigned: Point2,
    direct: bool,
    ctx: &SlotContext,
) {
    let landmark_position = ctx.snapshot.landmark(landmark).map_or(assigned, |l| l.position);
    let phase = if ctx.variant == Variant::CoverBaseline {
        AssociationPhase::Relocating
    } else if direct || ctx.in_range(robot.position, landmark_position) {
        AssociationPhase::Holding
    } else {
        AssociationPhase::Approaching
    };
    robot.status = RobotStatus::Associated(Association { landmark, landmark_position, assigned, phase });
    robot.association_time = Some(ctx.slot);
    robot.target = Some(assigned);
    robot.dl.clear();
    robot.exchange = Exchange::Ready;
    robot.zero_force_count = 0;
    robot.repulsive_only_count = 0;
}

/// Answers that every unassociated robot gives to its neighbors.
pub(crate) fn answer_neighbors(robot: &RobotAgent, inbox: &[Message], out: &mut SlotOutput) {
    let me = robot.agent_id();
    for msg in inbox {
        match &msg.kind {
            MessageKind::PositionInquiry => {
                out.outbox.push(Message::to(me, msg.sender, MessageKind::FreeRobotReply { position: robot.position }));
            }
            MessageKind::TraceRequest => out.outbox.push(trace_reply(robot, msg.sender)),
            MessageKind::Forward { .. } => out.dropped += 1,
            _ if !msg.is_well_formed() => out.dropped += 1,
            _ => {}
        }
    }
}

fn inquire(robot: &mut RobotAgent, from: Point2, ctx: &SlotContext, out: &mut SlotOutput) {
    out.outbox.push(Message::broadcast(robot.agent_id(), MessageKind::PositionInquiry));
    robot.exchange = Exchange::Listening { due: ctx.slot + INQUIRY_ROUND_TRIP, from };
}

/// Composite-force move after association failed, with stuck detection.
/// `certified` is the inquiry position when the batch held no demand at all.
fn force_step<R: Rng + ?Sized>(
    robot: &mut RobotAgent,
    certified: Option<Point2>,
    ctx: &SlotContext,
    rng: &mut R,
    out: &mut SlotOutput,
) {
    let mut summary = forces::evaluate(&robot.forces, robot.position, &ctx.params, rng);
    let next = forces::step_from_force(robot.position, summary.force, ctx.config);
    // pressed against the boundary: the wall cancels the push
    if next.distance_to(robot.position) < ctx.config.force_epsilon {
        summary.force = Force2::ZERO;
    }
    match fingerprint::stuck_check(robot, &summary, ctx.config) {
        StuckOutcome::Stuck => {
            if let Some(p) = certified {
                robot.trace.insert(p);
            }
            robot.status =
                if ctx.variant.search_mode().is_some() { RobotStatus::Searching } else { RobotStatus::Parked };
            robot.exchange = Exchange::Ready;
        }
        outcome => {
            if outcome == StuckOutcome::Moving {
                if let Some(p) = certified {
                    robot.trace.insert(p);
                }
            }
            if next != robot.position {
                out.movement = Some(next);
            }
            inquire(robot, next, ctx, out);
        }
    }
}

/// Free-robot behavior for one slot.
pub fn free_robot_slot<R: Rng + ?Sized>(
    robot: &mut RobotAgent,
    inbox: &[Message],
    ctx: &SlotContext,
    rng: &mut R,
) -> SlotOutput {
    let mut out = SlotOutput::default();
    answer_neighbors(robot, inbox, &mut out);

    match robot.exchange {
        Exchange::Ready | Exchange::Travelling => inquire(robot, robot.position, ctx, &mut out),
        Exchange::Listening { due, from } => {
            if ctx.slot < due {
                return out;
            }
            let batch = collect_replies(robot, inbox, ctx);
            robot.batches_processed += 1;
            let certified = batch.dl.is_empty().then_some(from);
            robot.dl = batch.dl;
            robot.forces = batch.forces;
            if fairness::warmup_active(ctx.variant, robot.batches_processed) {
                robot.dl.clear();
            }
            match process_dl(robot, ctx) {
                Some(request) => out.outbox.push(request),
                None => force_step(robot, certified, ctx, rng, &mut out),
            }
        }
        Exchange::Pending(_) => match resolve_pending(robot, inbox, ctx) {
            Resolution::Rejected => match process_dl(robot, ctx) {
                Some(request) => out.outbox.push(request),
                None => force_step(robot, None, ctx, rng, &mut out),
            },
            Resolution::Associated | Resolution::Waiting | Resolution::NotPending => {}
        },
    }
    // an accept can also land outside a pending exchange
    if robot.status == RobotStatus::Free
        && !matches!(robot.exchange, Exchange::Pending(_))
        && resolve_pending(robot, inbox, ctx) == Resolution::Associated
    {
        out.movement = None;
        out.outbox.retain(|m| !matches!(m.kind, MessageKind::PositionInquiry | MessageKind::AssociateRequest { .. }));
    }
    out
}

/// Parked robots only answer their neighbors.
pub fn parked_slot(robot: &RobotAgent, inbox: &[Message]) -> SlotOutput {
    let mut out = SlotOutput::default();
    answer_neighbors(robot, inbox, &mut out);
    out
}
