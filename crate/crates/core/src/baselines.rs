//! Comparison strategies: centralized optimal assignment and random-waypoint search.

use rand::Rng;

use crate::engine::{LandmarkOutcome, SimReport};
use crate::geometry::Point2;
use crate::model::{Exchange, LandmarkId, RobotAgent, RobotId, RobotStatus};
use crate::protocol::{self, Message, MessageKind, Resolution, SlotContext, SlotOutput};
use crate::scenario::Scenario;
use crate::variant::Variant;

/// Robots by demand units. Each landmark contributes one column per unit of
/// demand, located at the position it would assign to that unit.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentMatrix {
    pub rows: Vec<RobotId>,
    pub columns: Vec<(LandmarkId, Point2)>,
    /// `cost[row][column]`, meters.
    pub cost: Vec<Vec<f64>>,
    /// Cost of padding cells.
    pub sentinel: f64,
}

impl AssignmentMatrix {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let config = &scenario.config;
        let columns: Vec<(LandmarkId, Point2)> = scenario
            .landmarks
            .iter()
            .flat_map(|l| (0..l.demand).map(move |k| (l.id, protocol::assigned_position(l, k, config))))
            .collect();
        let rows: Vec<RobotId> = scenario.robots.iter().map(|r| r.id).collect();
        let cost =
            scenario.robots.iter().map(|r| columns.iter().map(|(_, p)| r.position.distance_to(*p)).collect()).collect();
        AssignmentMatrix { rows, columns, cost, sentinel: 1e6 * config.area_diagonal() }
    }

    /// Square matrix with padding cells set to the sentinel.
    pub fn padded(&self) -> Vec<Vec<f64>> {
        let n = self.rows.len().max(self.columns.len());
        (0..n)
            .map(|i| {
                (0..n).map(|j| self.cost.get(i).and_then(|row| row.get(j)).copied().unwrap_or(self.sentinel)).collect()
            })
            .collect()
    }
}

/// Minimum-cost perfect matching on a square matrix; returns the column of each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(cost.iter().all(|row| row.len() == n), "cost matrix must be square");

    // potentials over rows (u) and columns (v); index 0 is a virtual column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Optimal robot-to-demand-unit assignment, skipping padding.
pub fn hungarian_assign(matrix: &AssignmentMatrix) -> Vec<(RobotId, LandmarkId, Point2)> {
    let cols = hungarian(&matrix.padded());
    cols.into_iter()
        .enumerate()
        .filter(|&(i, j)| i < matrix.rows.len() && j < matrix.columns.len())
        .map(|(i, j)| (matrix.rows[i], matrix.columns[j].0, matrix.columns[j].1))
        .collect()
}

/// Every assigned robot drives straight to its unit's position. Time is the
/// longest drive plus one communication round; each robot costs a report and
/// a command message.
pub fn centralized_run(scenario: &Scenario) -> SimReport {
    let config = &scenario.config;
    let matrix = AssignmentMatrix::from_scenario(scenario);
    let assignment = hungarian_assign(&matrix);

    let mut landmarks = scenario.landmarks.clone();
    let mut total_distance = 0.0;
    let mut longest: f64 = 0.0;
    for &(robot, landmark, slot) in &assignment {
        let start = scenario.robots.iter().find(|r| r.id == robot).expect("row robot exists").position;
        let d = start.distance_to(slot);
        total_distance += d;
        longest = longest.max(d);
        let l = landmarks.iter_mut().find(|l| l.id == landmark).expect("column landmark exists");
        l.remaining -= 1;
    }
    let total_time = if assignment.is_empty() { 0.0 } else { longest / config.speed + config.wait_time };
    let per_landmark = landmarks
        .iter()
        .map(|l| LandmarkOutcome {
            id: l.id,
            demand: l.demand,
            remaining: l.remaining,
            satisfied_slot: (l.demand > 0 && l.remaining == 0).then_some(1),
        })
        .collect();
    let mut report = SimReport::from_outcomes(Variant::Centralized, per_landmark);
    report.total_distance = total_distance;
    report.total_time = total_time;
    report.total_messages = 2 * scenario.robots.len() as u64;
    report.slots_elapsed = 1;
    report.associated = assignment.len();
    report
}

fn inquire(robot: &mut RobotAgent, from: Point2, ctx: &SlotContext, out: &mut SlotOutput) {
    out.outbox.push(Message::broadcast(robot.agent_id(), MessageKind::PositionInquiry));
    robot.exchange = Exchange::Listening { due: ctx.slot + protocol::INQUIRY_ROUND_TRIP, from };
}

fn travel(robot: &mut RobotAgent, ctx: &SlotContext, out: &mut SlotOutput) {
    let Some(target) = robot.target else { return };
    let next = robot.position.step_toward(target, ctx.config.travel_budget());
    if next != robot.position {
        out.movement = Some(next);
    }
    if next == target {
        robot.target = None;
        inquire(robot, next, ctx, out);
    } else {
        robot.exchange = Exchange::Travelling;
    }
}

fn new_waypoint<R: Rng + ?Sized>(robot: &mut RobotAgent, ctx: &SlotContext, rng: &mut R, out: &mut SlotOutput) {
    let (w, h) = (ctx.config.area_width, ctx.config.area_height);
    robot.target = Some(Point2::new(rng.gen_range(0.0..=w), rng.gen_range(0.0..=h)));
    travel(robot, ctx, out);
}

/// Searching-robot behavior for the random-waypoint variant: inquire where it
/// stands, otherwise travel to uniformly drawn waypoints and inquire on arrival.
pub fn rwp_search_slot<R: Rng + ?Sized>(
    robot: &mut RobotAgent,
    inbox: &[Message],
    ctx: &SlotContext,
    rng: &mut R,
) -> SlotOutput {
    let mut out = SlotOutput::default();
    protocol::answer_neighbors(robot, inbox, &mut out);

    match robot.exchange {
        Exchange::Ready => inquire(robot, robot.position, ctx, &mut out),
        Exchange::Travelling => travel(robot, ctx, &mut out),
        Exchange::Listening { due, .. } => {
            if ctx.slot < due {
                return out;
            }
            let batch = protocol::collect_replies(robot, inbox, ctx);
            robot.batches_processed += 1;
            robot.dl = batch.dl;
            match protocol::process_dl(robot, ctx) {
                Some(request) => out.outbox.push(request),
                None => new_waypoint(robot, ctx, rng, &mut out),
            }
        }
        Exchange::Pending(_) => {
            if protocol::resolve_pending(robot, inbox, ctx) == Resolution::Rejected {
                match protocol::process_dl(robot, ctx) {
                    Some(request) => out.outbox.push(request),
                    None => inquire(robot, robot.position, ctx, &mut out),
                }
            }
        }
    }
    if robot.status == RobotStatus::Searching
        && !matches!(robot.exchange, Exchange::Pending(_))
        && protocol::resolve_pending(robot, inbox, ctx) == Resolution::Associated
    {
        out.movement = None;
        out.outbox.retain(|m| !matches!(m.kind, MessageKind::PositionInquiry | MessageKind::AssociateRequest { .. }));
    }
    out
}
