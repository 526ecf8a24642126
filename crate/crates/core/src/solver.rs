//! The social-cost benchmark: exact minimization over placements.
//!
//! `SC(x)`, the social cost as a function of the covering interval's left
//! endpoint `x`, is continuous and piecewise linear with integer slopes: each
//! agent contributes slope changes at `s - |C|`, `min(s, t - |C|)`,
//! `max(s, t - |C|)` and `t`. [`sc_profile`] builds that function by an event
//! sweep in `O(n log n)`; [`optimal_placement`] reads the leftmost minimizer
//! off it. [`brute_force_optimal`] is the independent oracle: it evaluates
//! the social cost directly, point by point, and never touches the profile.

use std::collections::BTreeMap;

use crate::coord::Coord;
use crate::model::{Instance, Placement};

/// Piecewise-linear closed form of the social cost as a function of the
/// placement's left endpoint.
///
/// There are `breakpoints.len() + 1` segments including the two unbounded
/// ends; `slopes[i]` is the slope left of `breakpoints[i]` (and `slopes`
/// ends with the slope right of the last breakpoint). Values at breakpoints
/// are precomputed. Far to either side the function is constant at the total
/// agent length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScProfile {
    breakpoints: Vec<Coord>,
    slopes: Vec<i64>,
    values: Vec<Coord>,
    total_length: Coord,
}

impl ScProfile {
    pub fn breakpoints(&self) -> &[Coord] {
        &self.breakpoints
    }

    /// One slope per segment, unbounded ends included.
    pub fn slopes(&self) -> &[i64] {
        &self.slopes
    }

    pub fn value_at_leftmost(&self) -> Coord {
        self.values[0]
    }

    pub fn total_length(&self) -> Coord {
        self.total_length
    }

    /// Exact social cost of placing the covering interval at `x`.
    pub fn value_at(&self, x: Coord) -> Coord {
        let idx = self.breakpoints.partition_point(|b| *b <= x);
        if idx == 0 {
            // Left unbounded segment; its slope is 0 by construction.
            return self.values[0] + slope_coord(self.slopes[0]) * (x - self.breakpoints[0]);
        }
        let base = idx - 1;
        self.values[base] + slope_coord(self.slopes[idx]) * (x - self.breakpoints[base])
    }

    /// Global minimum of the profile: leftmost minimizing placement and its
    /// social cost. The minimum of a continuous piecewise-linear function
    /// that is maximal at both ends is attained at a breakpoint, and the
    /// leftmost point of the minimizing set is one.
    pub fn minimum(&self) -> (Placement, Coord) {
        let mut best = 0;
        for i in 1..self.values.len() {
            if self.values[i] < self.values[best] {
                best = i;
            }
        }
        (Placement::new(self.breakpoints[best]), self.values[best])
    }
}

fn slope_coord(slope: i64) -> Coord {
    Coord::int(slope as i128)
}

/// Placement left endpoints at which the social cost can change slope:
/// `{e, e - |C|}` for every agent endpoint `e`, deduplicated and sorted.
/// At least one of them minimizes the social cost over all reals.
pub fn candidate_placements(inst: &Instance) -> Vec<Placement> {
    let c = inst.covering_length();
    let mut points: Vec<Coord> = Vec::with_capacity(4 * inst.n());
    for agent in inst.agents() {
        for e in [agent.s(), agent.t()] {
            points.push(e);
            points.push(e - c);
        }
    }
    points.sort();
    points.dedup();
    points.into_iter().map(Placement::new).collect()
}

/// Builds the social-cost profile by sweeping agent events left to right.
pub fn sc_profile(inst: &Instance) -> ScProfile {
    let c = inst.covering_length();
    let mut deltas: BTreeMap<Coord, i64> = BTreeMap::new();
    for agent in inst.agents() {
        let (s, t) = (agent.s(), agent.t());
        let plateau_start = s.min(t - c);
        let plateau_end = s.max(t - c);
        for (at, delta) in [(s - c, -1), (plateau_start, 1), (plateau_end, 1), (t, -1)] {
            *deltas.entry(at).or_insert(0) += delta;
        }
    }
    deltas.retain(|_, d| *d != 0);

    let total_length = inst.total_length();
    let mut breakpoints = Vec::with_capacity(deltas.len());
    let mut slopes = Vec::with_capacity(deltas.len() + 1);
    let mut values = Vec::with_capacity(deltas.len());
    let mut slope = 0_i64;
    slopes.push(slope);
    let mut value = total_length;
    let mut prev: Option<Coord> = None;
    for (at, delta) in deltas {
        if let Some(p) = prev {
            value += slope_coord(slope) * (at - p);
        }
        slope += delta;
        breakpoints.push(at);
        slopes.push(slope);
        values.push(value);
        prev = Some(at);
    }
    debug_assert_eq!(slope, 0, "slope deltas must cancel over the whole line");
    ScProfile {
        breakpoints,
        slopes,
        values,
        total_length,
    }
}

/// Social-cost-minimizing placement and its cost, computed from the profile.
///
/// Among all minimizers over the reals, returns the one with the smallest
/// left endpoint; it always starts or ends at some agent endpoint.
pub fn optimal_placement(inst: &Instance) -> (Placement, Coord) {
    sc_profile(inst).minimum()
}

/// Independent minimization oracle: evaluates the social cost directly at
/// every candidate placement and at every point of the rational grid from
/// `min endpoint - |C|` to `max endpoint` with the given step, and returns
/// the leftmost minimizer among those.
///
/// `grid_step` must be positive.
pub fn brute_force_optimal(inst: &Instance, grid_step: Coord) -> (Placement, Coord) {
    assert!(grid_step.is_positive(), "grid_step must be positive");
    let c = inst.covering_length();
    let lo = inst
        .agents()
        .iter()
        .map(|a| a.s())
        .min()
        .expect("instance is non-empty")
        - c;
    let hi = inst
        .agents()
        .iter()
        .map(|a| a.t())
        .max()
        .expect("instance is non-empty");

    let mut points: Vec<Coord> = candidate_placements(inst).iter().map(|p| p.s).collect();
    let mut x = lo;
    while x <= hi {
        points.push(x);
        x += grid_step;
    }
    points.sort();
    points.dedup();

    let mut best_point = points[0];
    let mut best_cost = inst.social_cost(&Placement::new(best_point));
    for &p in &points[1..] {
        let cost = inst.social_cost(&Placement::new(p));
        if cost < best_cost {
            best_cost = cost;
            best_point = p;
        }
    }
    (Placement::new(best_point), best_cost)
}
