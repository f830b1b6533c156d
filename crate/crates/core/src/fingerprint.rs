//! Trace Fingerprint search: stuck detection, trace sharing, and movement
//! toward the nearest square of the virtual map that no trace covers yet.

use std::cmp::Ordering;

use crate::config::SimConfig;
use crate::forces::ForceSummary;
use crate::geometry::Point2;
use crate::model::{Exchange, RobotAgent, RobotStatus};
use crate::protocol::{self, Message, MessageKind, Resolution, SlotContext, SlotOutput};

/// Points closer than this are the same trace point.
pub const TRACE_DEDUP: f64 = 1e-6;
/// Samples per square side used to estimate coverage.
pub const LATTICE: usize = 5;

/// Stop points certified free of unmet demand within range.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceSet {
    points: Vec<Point2>,
}

impl TraceSet {
    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Returns false if an equal point was already present.
    pub fn insert(&mut self, p: Point2) -> bool {
        if self.contains(p) {
            return false;
        }
        self.points.push(p);
        true
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.points.iter().any(|q| q.distance_to(p) <= TRACE_DEDUP)
    }
}

impl FromIterator<Point2> for TraceSet {
    fn from_iter<I: IntoIterator<Item = Point2>>(iter: I) -> Self {
        let mut t = TraceSet::default();
        t.extend(iter);
        t
    }
}

impl Extend<Point2> for TraceSet {
    fn extend<I: IntoIterator<Item = Point2>>(&mut self, iter: I) {
        for p in iter {
            self.insert(p);
        }
    }
}

/// Union of `own` and the neighbor traces with near-duplicates collapsed.
pub fn merge_traces<'a>(own: &TraceSet, neighbors: impl IntoIterator<Item = &'a [Point2]>) -> TraceSet {
    let mut merged = own.clone();
    for t in neighbors {
        merged.extend(t.iter().copied());
    }
    merged
}

/// Grid of squares over the area with a covered fraction per square.
/// Squares on the far edges are clipped to the area.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualMap {
    pub side: f64,
    pub cols: usize,
    pub rows: usize,
    width: f64,
    height: f64,
    /// Row-major, index `row * cols + col`.
    pub fractions: Vec<f64>,
}

impl VirtualMap {
    pub fn empty(config: &SimConfig) -> Self {
        let side = config.fingerprint_square;
        let cols = (config.area_width / side).ceil().max(1.0) as usize;
        let rows = (config.area_height / side).ceil().max(1.0) as usize;
        VirtualMap {
            side,
            cols,
            rows,
            width: config.area_width,
            height: config.area_height,
            fractions: vec![0.0; cols * rows],
        }
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// `(x0, y0, x1, y1)` of square `idx`.
    pub fn bounds(&self, idx: usize) -> (f64, f64, f64, f64) {
        let (row, col) = (idx / self.cols, idx % self.cols);
        let x0 = col as f64 * self.side;
        let y0 = row as f64 * self.side;
        (x0, y0, (x0 + self.side).min(self.width), (y0 + self.side).min(self.height))
    }

    pub fn center(&self, idx: usize) -> Point2 {
        let (x0, y0, x1, y1) = self.bounds(idx);
        Point2::new((x0 + x1) / 2.0, (y0 + y1) / 2.0)
    }

    pub fn lattice(&self, idx: usize) -> impl Iterator<Item = Point2> {
        let (x0, y0, x1, y1) = self.bounds(idx);
        let n = LATTICE as f64;
        (0..LATTICE).flat_map(move |i| {
            (0..LATTICE)
                .map(move |j| Point2::new(x0 + (x1 - x0) * (i as f64 + 0.5) / n, y0 + (y1 - y0) * (j as f64 + 0.5) / n))
        })
    }

    pub fn fully_covered(&self) -> bool {
        self.fractions.iter().all(|&f| f >= 1.0)
    }

    /// Nearest square center that is not fully covered; ties go to the lower
    /// fraction, then the lower index.
    pub fn nearest_uncovered(&self, from: Point2) -> Option<usize> {
        (0..self.len()).filter(|&i| self.fractions[i] < 1.0).min_by(|&a, &b| {
            let (da, db) = (from.distance_to(self.center(a)), from.distance_to(self.center(b)));
            da.partial_cmp(&db)
                .unwrap_or(Ordering::Equal)
                .then(self.fractions[a].partial_cmp(&self.fractions[b]).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        })
    }
}

/// Fraction of each square's sample lattice within `trace_radius` of a trace point.
pub fn coverage_levels(trace: &TraceSet, config: &SimConfig) -> VirtualMap {
    let mut vm = VirtualMap::empty(config);
    let r = config.trace_radius;
    let total = (LATTICE * LATTICE) as f64;
    for idx in 0..vm.len() {
        let (x0, y0, x1, y1) = vm.bounds(idx);
        // only points whose disk reaches the square matter
        let near: Vec<Point2> = trace
            .points()
            .iter()
            .copied()
            .filter(|p| {
                let dx = (x0 - p.x).max(0.0).max(p.x - x1);
                let dy = (y0 - p.y).max(0.0).max(p.y - y1);
                dx.hypot(dy) <= r
            })
            .collect();
        let covered = vm.lattice(idx).filter(|s| near.iter().any(|p| p.distance_to(*s) <= r)).count();
        vm.fractions[idx] = covered as f64 / total;
    }
    vm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StuckOutcome {
    /// A useful force: counters reset.
    Moving,
    /// Zero or repulsive-only, patience not yet exhausted.
    Quiescent,
    /// Patience exhausted.
    Stuck,
}

/// A robot that keeps moving but stays within `d_th / 2` of where it was
/// `repulsive_only_patience` force steps ago is oscillating in place.
fn stalled(robot: &mut RobotAgent, config: &SimConfig) -> bool {
    let (anchor, steps) = robot.progress_anchor.unwrap_or((robot.position, 0));
    let steps = steps + 1;
    if steps < config.repulsive_only_patience {
        robot.progress_anchor = Some((anchor, steps));
        return false;
    }
    robot.progress_anchor = Some((robot.position, 0));
    robot.position.distance_to(anchor) < config.dist_threshold / 2.0
}

/// Updates the zero-force and repulsive-only counters for one force
/// evaluation. Attraction weaker than `force_epsilon` does not count as
/// attraction.
pub fn stuck_check(robot: &mut RobotAgent, summary: &ForceSummary, config: &SimConfig) -> StuckOutcome {
    let eps = config.force_epsilon;
    if summary.force.magnitude < eps {
        robot.zero_force_count += 1;
    } else if summary.all_repulsive || (summary.contributions > 0 && summary.max_attraction < eps) {
        robot.repulsive_only_count += 1;
    } else if stalled(robot, config) {
        robot.repulsive_only_count = config.repulsive_only_patience;
    } else {
        robot.zero_force_count = 0;
        robot.repulsive_only_count = 0;
        return StuckOutcome::Moving;
    }
    if robot.zero_force_count >= config.zero_force_patience
        || robot.repulsive_only_count >= config.repulsive_only_patience
    {
        robot.zero_force_count = 0;
        robot.repulsive_only_count = 0;
        StuckOutcome::Stuck
    } else {
        StuckOutcome::Quiescent
    }
}

fn inquire_with_traces(robot: &mut RobotAgent, from: Point2, ctx: &SlotContext, out: &mut SlotOutput) {
    let me = robot.agent_id();
    out.outbox.push(Message::broadcast(me, MessageKind::PositionInquiry));
    out.outbox.push(Message::broadcast(me, MessageKind::TraceRequest));
    robot.exchange = Exchange::Listening { due: ctx.slot + protocol::INQUIRY_ROUND_TRIP, from };
}

/// One guided step toward the nearest uncovered square, or park when the map is fully covered.
fn guided_step(robot: &mut RobotAgent, ctx: &SlotContext, out: &mut SlotOutput) {
    let vm = coverage_levels(&robot.trace, ctx.config);
    match vm.nearest_uncovered(robot.position) {
        None => {
            robot.status = RobotStatus::Parked;
            robot.target = None;
            robot.exchange = Exchange::Ready;
        }
        Some(idx) => {
            let target = vm.center(idx);
            robot.target = Some(target);
            let next = robot.position.step_toward(target, ctx.config.fingerprint_step);
            if next != robot.position {
                out.movement = Some(next);
            }
            inquire_with_traces(robot, next, ctx, out);
        }
    }
}

/// Searching-robot behavior for the Trace Fingerprint variant.
pub fn searching_slot(robot: &mut RobotAgent, inbox: &[Message], ctx: &SlotContext) -> SlotOutput {
    let mut out = SlotOutput::default();
    protocol::answer_neighbors(robot, inbox, &mut out);

    match robot.exchange {
        Exchange::Ready | Exchange::Travelling => inquire_with_traces(robot, robot.position, ctx, &mut out),
        Exchange::Listening { due, from } => {
            if ctx.slot < due {
                return out;
            }
            let batch = protocol::collect_replies(robot, inbox, ctx);
            robot.batches_processed += 1;
            robot.dl = batch.dl;
            if let Some(request) = protocol::process_dl(robot, ctx) {
                out.outbox.push(request);
            } else {
                robot.trace.insert(from);
                robot.trace = merge_traces(&robot.trace, batch.traces.iter().map(Vec::as_slice));
                robot.trace.extend(batch.positions);
                guided_step(robot, ctx, &mut out);
            }
        }
        Exchange::Pending(_) => {
            if protocol::resolve_pending(robot, inbox, ctx) == Resolution::Rejected {
                match protocol::process_dl(robot, ctx) {
                    Some(request) => out.outbox.push(request),
                    // hear the same spot again: the refusal may only mean another robot got there first
                    None => inquire_with_traces(robot, robot.position, ctx, &mut out),
                }
            }
        }
    }
    if robot.status == RobotStatus::Searching
        && !matches!(robot.exchange, Exchange::Pending(_))
        && protocol::resolve_pending(robot, inbox, ctx) == Resolution::Associated
    {
        out.movement = None;
        out.outbox.retain(|m| {
            !matches!(
                m.kind,
                MessageKind::PositionInquiry | MessageKind::TraceRequest | MessageKind::AssociateRequest { .. }
            )
        });
    }
    out
}
