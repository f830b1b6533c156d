//! Virtual forces between robots and from cooperative sources.
//!
//! Free robots pull each other toward the spacing `d_th` and push apart below
//! it. Associated robots and satisfied landmarks push free robots away with a
//! cooperative repulsion scaled by `alpha`. The resultant is turned into a
//! bounded displacement by [`step_from_force`].

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::config::SimConfig;
use crate::geometry::{normalize_angle, Point2};

/// Distances within this of `d_th` count as exactly at equilibrium.
pub const EQUILIBRIUM_TOLERANCE: f64 = 1e-9;
/// Minimum distance used in inverse-distance laws; caps the field near coincidence.
pub const COINCIDENCE_EPS: f64 = 1e-3;

/// A force in polar form. `angle` is in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Force2 {
    pub magnitude: f64,
    pub angle: f64,
}

impl Force2 {
    pub const ZERO: Force2 = Force2 { magnitude: 0.0, angle: 0.0 };

    pub fn new(magnitude: f64, angle: f64) -> Self {
        if magnitude < 0.0 {
            Force2 { magnitude: -magnitude, angle: normalize_angle(angle + PI) }
        } else {
            Force2 { magnitude, angle: normalize_angle(angle) }
        }
    }

    pub fn from_cartesian(fx: f64, fy: f64) -> Self {
        let magnitude = fx.hypot(fy);
        if magnitude == 0.0 {
            Force2::ZERO
        } else {
            Force2 { magnitude, angle: normalize_angle(fy.atan2(fx)) }
        }
    }

    pub fn to_cartesian(self) -> (f64, f64) {
        (self.magnitude * self.angle.cos(), self.magnitude * self.angle.sin())
    }

    pub fn is_zero(self) -> bool {
        self.magnitude == 0.0
    }
}

impl std::ops::Add for Force2 {
    type Output = Force2;
    fn add(self, rhs: Force2) -> Force2 {
        let (ax, ay) = self.to_cartesian();
        let (bx, by) = rhs.to_cartesian();
        Force2::from_cartesian(ax + bx, ay + by)
    }
}

impl std::iter::Sum for Force2 {
    fn sum<I: Iterator<Item = Force2>>(iter: I) -> Force2 {
        let (x, y) = iter.map(Force2::to_cartesian).fold((0.0, 0.0), |(ax, ay), (bx, by)| (ax + bx, ay + by));
        Force2::from_cartesian(x, y)
    }
}

/// Attraction/repulsion weights for a team of `n` robots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceParams {
    pub w_a: f64,
    pub w_r: f64,
    pub alpha: f64,
    pub d_th: f64,
    pub c_th: f64,
    pub n: usize,
}

impl ForceParams {
    /// `w_a = (d_th / c_th) * N^-alpha`, `w_r = N^alpha`.
    pub fn new(d_th: f64, c_th: f64, n: usize, alpha: f64) -> Self {
        let nf = n.max(1) as f64;
        ForceParams { w_a: (d_th / c_th) * nf.powf(-alpha), w_r: nf.powf(alpha), alpha, d_th, c_th, n }
    }

    pub fn from_config(config: &SimConfig, n: usize) -> Self {
        ForceParams::new(config.dist_threshold, config.comm_range, n, config.alpha)
    }
}

/// Which branch of the pairwise law applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceKind {
    Attractive,
    Equilibrium,
    Repulsive,
}

fn coincident_direction<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(0.0..TAU)
}

/// Force on a free robot at `self_pos` from a free robot at `other_pos`.
pub fn pairwise_force<R: Rng + ?Sized>(
    self_pos: Point2,
    other_pos: Point2,
    params: &ForceParams,
    rng: &mut R,
) -> Force2 {
    pairwise_force_kind(self_pos, other_pos, params, rng).0
}

pub fn pairwise_force_kind<R: Rng + ?Sized>(
    self_pos: Point2,
    other_pos: Point2,
    params: &ForceParams,
    rng: &mut R,
) -> (Force2, ForceKind) {
    let d = self_pos.distance_to(other_pos);
    if d == 0.0 {
        let f = Force2::new(params.w_r / COINCIDENCE_EPS, coincident_direction(rng));
        return (f, ForceKind::Repulsive);
    }
    let bearing = self_pos.bearing_to(other_pos);
    if (d - params.d_th).abs() <= EQUILIBRIUM_TOLERANCE {
        (Force2::ZERO, ForceKind::Equilibrium)
    } else if d > params.d_th {
        (Force2::new(params.w_a * (d - params.d_th), bearing), ForceKind::Attractive)
    } else {
        (Force2::new(params.w_r / d.max(COINCIDENCE_EPS), bearing + PI), ForceKind::Repulsive)
    }
}

/// Push away from an associated robot or satisfied landmark: `alpha * w_r / d`.
pub fn cooperative_repulsion<R: Rng + ?Sized>(
    self_pos: Point2,
    source_pos: Point2,
    params: &ForceParams,
    rng: &mut R,
) -> Force2 {
    let d = self_pos.distance_to(source_pos);
    if d == 0.0 {
        return Force2::new(params.alpha * params.w_r / COINCIDENCE_EPS, coincident_direction(rng));
    }
    Force2::new(params.alpha * params.w_r / d.max(COINCIDENCE_EPS), self_pos.bearing_to(source_pos) + PI)
}

/// Pull toward a demanding landmark advertised by a cooperating neighbor.
/// Used only by the COVER baseline; same `alpha * w_r / d` law as the
/// cooperative repulsion, pointing toward the target.
pub fn cooperative_attraction(self_pos: Point2, target: Point2, params: &ForceParams) -> Force2 {
    let d = self_pos.distance_to(target);
    if d == 0.0 {
        return Force2::ZERO;
    }
    Force2::new(params.alpha * params.w_r / d.max(COINCIDENCE_EPS), self_pos.bearing_to(target))
}

/// Cartesian sum of pairwise forces from free neighbors and cooperative
/// repulsion from every repulsive source.
pub fn composite_force<R: Rng + ?Sized>(
    free_neighbors: &[Point2],
    repulsive_sources: &[Point2],
    self_pos: Point2,
    params: &ForceParams,
    rng: &mut R,
) -> Force2 {
    let inputs = ForceInputs {
        free_neighbors: free_neighbors.to_vec(),
        repulsive: repulsive_sources.to_vec(),
        attractive: Vec::new(),
    };
    evaluate(&inputs, self_pos, params, rng).force
}

/// Force contributions a robot gathered from one batch of replies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForceInputs {
    pub free_neighbors: Vec<Point2>,
    pub repulsive: Vec<Point2>,
    /// COVER cooperation targets.
    pub attractive: Vec<Point2>,
}

impl ForceInputs {
    pub fn is_empty(&self) -> bool {
        self.free_neighbors.is_empty() && self.repulsive.is_empty() && self.attractive.is_empty()
    }
}

/// Net force plus what the stuck detector needs to know about it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceSummary {
    pub force: Force2,
    pub contributions: usize,
    /// At least one contribution and none of them attractive or at equilibrium.
    pub all_repulsive: bool,
    /// Largest magnitude among attractive contributions; 0 when there are none.
    pub max_attraction: f64,
}

pub fn evaluate<R: Rng + ?Sized>(
    inputs: &ForceInputs,
    self_pos: Point2,
    params: &ForceParams,
    rng: &mut R,
) -> ForceSummary {
    let mut x = 0.0;
    let mut y = 0.0;
    let mut all_repulsive = true;
    let mut max_attraction: f64 = 0.0;
    let mut add = |f: Force2| {
        let (fx, fy) = f.to_cartesian();
        x += fx;
        y += fy;
    };
    for &p in &inputs.free_neighbors {
        let (f, kind) = pairwise_force_kind(self_pos, p, params, rng);
        all_repulsive &= kind == ForceKind::Repulsive;
        if kind == ForceKind::Attractive {
            max_attraction = max_attraction.max(f.magnitude);
        }
        add(f);
    }
    for &p in &inputs.repulsive {
        add(cooperative_repulsion(self_pos, p, params, rng));
    }
    for &p in &inputs.attractive {
        all_repulsive = false;
        let f = cooperative_attraction(self_pos, p, params);
        max_attraction = max_attraction.max(f.magnitude);
        add(f);
    }
    let contributions = inputs.free_neighbors.len() + inputs.repulsive.len() + inputs.attractive.len();
    ForceSummary {
        force: Force2::from_cartesian(x, y),
        contributions,
        all_repulsive: contributions > 0 && all_repulsive,
        max_attraction,
    }
}

/// Displacement of `min(1 m/unit * |f|, d_th / 2)` along the force, clamped to the area.
pub fn step_from_force(self_pos: Point2, f: Force2, config: &SimConfig) -> Point2 {
    if f.magnitude == 0.0 {
        return self_pos;
    }
    let length = f.magnitude.min(config.max_force_step());
    self_pos.offset(f.angle, length).clamp_to(config.area_width, config.area_height)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn params15() -> ForceParams {
        ForceParams::new(25.0, 50.0, 15, 1.5)
    }

    #[test]
    fn coefficients() {
        let p = params15();
        assert!((p.w_a - 0.008606629658238704).abs() < 1e-15);
        assert!((p.w_r - 58.09475019311125).abs() < 1e-12);
    }

    #[test]
    fn attractive_branch() {
        let mut rng = stream_rng(0, 9);
        let f = pairwise_force(Point2::new(0.0, 0.0), Point2::new(35.0, 0.0), &params15(), &mut rng);
        assert!((f.magnitude - 0.08606629658238704).abs() < 1e-9);
        assert!(f.angle.abs() < 1e-12);
    }

    #[test]
    fn repulsive_branch_flips_direction() {
        let mut rng = stream_rng(0, 9);
        let f = pairwise_force(Point2::new(0.0, 0.0), Point2::new(0.0, 10.0), &params15(), &mut rng);
        assert!((f.magnitude - 5.809475019311125).abs() < 1e-9);
        assert!((f.angle - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_branch() {
        let mut rng = stream_rng(0, 9);
        let f = pairwise_force(Point2::new(10.0, 10.0), Point2::new(10.0, 35.0), &params15(), &mut rng);
        assert_eq!(f, Force2::ZERO);
    }

    #[test]
    fn coincident_is_finite_and_seeded() {
        let p = Point2::new(5.0, 5.0);
        let a = pairwise_force(p, p, &params15(), &mut stream_rng(3, 9));
        let b = pairwise_force(p, p, &params15(), &mut stream_rng(3, 9));
        assert_eq!(a, b);
        assert!((a.magnitude - params15().w_r / COINCIDENCE_EPS).abs() < 1e-9);
    }

    #[test]
    fn cooperative_repulsion_values() {
        let mut rng = stream_rng(0, 9);
        let p = params15();
        let f = cooperative_repulsion(Point2::new(0.0, 0.0), Point2::new(30.0, 0.0), &p, &mut rng);
        assert!((f.magnitude - 2.9047375096555625).abs() < 1e-9);
        assert!((f.angle - PI).abs() < 1e-12);
        let g = cooperative_repulsion(Point2::new(0.0, 0.0), Point2::new(60.0, 0.0), &p, &mut rng);
        assert!((g.magnitude * 2.0 - f.magnitude).abs() < 1e-12);
    }

    #[test]
    fn empty_composite_is_zero() {
        let mut rng = stream_rng(0, 9);
        assert!(composite_force(&[], &[], Point2::new(1.0, 1.0), &params15(), &mut rng).is_zero());
    }

    #[test]
    fn symmetric_pair_bisects() {
        let mut rng = stream_rng(0, 9);
        let me = Point2::new(50.0, 50.0);
        let a = me.offset(0.3, 40.0);
        let b = me.offset(-0.3, 40.0);
        let f = composite_force(&[a, b], &[], me, &params15(), &mut rng);
        assert!(f.angle.abs() < 1e-9 || (f.angle - TAU).abs() < 1e-9);
        let (_, fy) = f.to_cartesian();
        assert!(fy.abs() < 1e-9);
    }

    #[test]
    fn step_law() {
        let cfg = SimConfig::default();
        let p = Point2::new(75.0, 75.0);
        assert_eq!(step_from_force(p, Force2::ZERO, &cfg), p);
        let far = step_from_force(p, Force2::new(1000.0, 0.0), &cfg);
        assert!((far.distance_to(p) - 12.5).abs() < 1e-12);
        let up = step_from_force(p, Force2::new(0.3, PI / 2.0), &cfg);
        assert!((up.x - (75.0 + 1.8369701987210297e-17)).abs() < 1e-12);
        assert!((up.y - 75.3).abs() < 1e-12);
    }

    #[test]
    fn step_clamps_to_area() {
        let cfg = SimConfig::default();
        let p = step_from_force(Point2::new(1.0, 149.0), Force2::new(10.0, 0.75 * PI), &cfg);
        assert!(p.within(cfg.area_width, cfg.area_height));
        assert_eq!(p.y, 150.0);
    }

    #[test]
    fn all_repulsive_classification() {
        let mut rng = stream_rng(0, 9);
        let me = Point2::new(50.0, 50.0);
        let inputs = ForceInputs {
            free_neighbors: vec![me.offset(0.0, 10.0)],
            repulsive: vec![me.offset(2.0, 30.0)],
            attractive: vec![],
        };
        assert!(evaluate(&inputs, me, &params15(), &mut rng).all_repulsive);
        let inputs = ForceInputs {
            free_neighbors: vec![me.offset(0.0, 40.0)],
            repulsive: vec![me.offset(2.0, 30.0)],
            attractive: vec![],
        };
        assert!(!evaluate(&inputs, me, &params15(), &mut rng).all_repulsive);
        assert!(!evaluate(&ForceInputs::default(), me, &params15(), &mut rng).all_repulsive);
    }
}
