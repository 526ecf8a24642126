//! Deterministic constructors for the named worst-case instance families,
//! plus seeded random instance generation for property sweeps.
//!
//! Family constructors place "singletons" — unit agents spaced far enough
//! apart that no two agents intersect — next to a block of identical agents.
//! Any spacing strictly greater than 1 keeps singletons disjoint; the spacing
//! is exposed as the `gap` parameter with a default of 2.

use crate::coord::Coord;
use crate::model::{Instance, ModelError, Span};

/// Errors from instance generation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("agent count must be a positive multiple of 6, got {0}")]
    NotMultipleOfSix(usize),
    #[error("agent count must be even and positive, got {0}")]
    OddCount(usize),
    #[error("gap must exceed 1 to keep singletons disjoint, got {0}")]
    GapTooSmall(String),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("k/epsilon must be a positive integer, got k={k}, epsilon={epsilon}")]
    NonIntegralGroup { k: usize, epsilon: String },
    #[error("k must be positive")]
    ZeroK,
    #[error("random generation needs n >= 1, a positive grid step and a non-negative span")]
    EmptyGrid,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Default spacing between singleton agents.
pub fn default_gap() -> Coord {
    Coord::int(2)
}

fn check_gap(gap: Coord) -> Result<(), GenError> {
    if gap > Coord::one() {
        Ok(())
    } else {
        Err(GenError::GapTooSmall(gap.to_string()))
    }
}

fn check_epsilon(epsilon: Coord) -> Result<(), GenError> {
    if epsilon.is_positive() && epsilon < Coord::one() {
        Ok(())
    } else {
        Err(GenError::EpsilonOutOfRange(epsilon.to_string()))
    }
}

fn singletons_then_group(
    singletons: usize,
    group: usize,
    group_start: Coord,
    gap: Coord,
) -> Result<Instance, GenError> {
    let mut lefts = Vec::with_capacity(singletons + group);
    for j in 0..singletons {
        lefts.push(gap * Coord::from_count(j));
    }
    for _ in 0..group {
        lefts.push(group_start);
    }
    Ok(Instance::unit(&lefts)?)
}

/// Worst case for the uniform-statistic mechanism with a 1/3–2/3 split:
/// `n/3` spaced unit singletons followed by `2n/3` identical unit agents at
/// `(n/3)·gap`. Covering length 1; the optimum covers the group for a social
/// cost of exactly `n/3`. Requires `6 | n`.
pub fn wci1(n: usize, gap: Coord) -> Result<Instance, GenError> {
    if n == 0 || !n.is_multiple_of(6) {
        return Err(GenError::NotMultipleOfSix(n));
    }
    check_gap(gap)?;
    singletons_then_group(n / 3, 2 * n / 3, gap * Coord::from_count(n / 3), gap)
}

/// Worst case with a 1/2–1/2 split: `n/2` spaced unit singletons followed by
/// `n/2` identical unit agents at `(n/2)·gap`. Optimal social cost `n/2`.
/// Requires `6 | n`.
pub fn wci2(n: usize, gap: Coord) -> Result<Instance, GenError> {
    if n == 0 || !n.is_multiple_of(6) {
        return Err(GenError::NotMultipleOfSix(n));
    }
    check_gap(gap)?;
    singletons_then_group(n / 2, n / 2, gap * Coord::from_count(n / 2), gap)
}

/// Seed instance of the adversary game: `n/2` agents at `[0, 1]` and `n/2`
/// agents at `[n, n+1]`, covering length 1. Requires even `n >= 2`.
pub fn two_cluster_seed(n: usize) -> Result<Instance, GenError> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(GenError::OddCount(n));
    }
    let mut lefts = vec![Coord::zero(); n / 2];
    lefts.extend(vec![Coord::from_count(n); n / 2]);
    Ok(Instance::unit(&lefts)?)
}

/// `n/2` spaced unit singletons followed by `n/2` identical unit agents,
/// pairwise disjoint from the singletons. Optimal social cost `n/2`.
/// Requires even `n >= 2`.
pub fn singleton_group(n: usize, gap: Coord) -> Result<Instance, GenError> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(GenError::OddCount(n));
    }
    check_gap(gap)?;
    singletons_then_group(n / 2, n / 2, gap * Coord::from_count(n / 2 + 1), gap)
}

/// Worst case for the weighted-median mechanism: `k` unit agents at `[0, 1]`
/// and `k/epsilon` agents of length `epsilon` at `[1, 1+epsilon]`, covering
/// length 1. `k/epsilon` must be a positive integer.
pub fn weighted_median_worst(k: usize, epsilon: Coord) -> Result<Instance, GenError> {
    if k == 0 {
        return Err(GenError::ZeroK);
    }
    check_epsilon(epsilon)?;
    let group = Coord::from_count(k) / epsilon;
    if !group.is_integer() {
        return Err(GenError::NonIntegralGroup {
            k,
            epsilon: epsilon.to_string(),
        });
    }
    let group = group.numerator() as usize;
    let mut spans = Vec::with_capacity(k + group);
    for _ in 0..k {
        spans.push(Span::new(Coord::zero(), Coord::one())?);
    }
    for _ in 0..group {
        spans.push(Span::new(Coord::one(), epsilon)?);
    }
    Ok(Instance::new(spans, Coord::one())?)
}

/// The instance pair of the unknown-lengths impossibility probe:
/// `{[0,1], [3,3+eps]}` and the variant in which the left agent shrinks to
/// `[0, eps^2]`. Covering length 1 in both.
pub fn unknown_length_pair(epsilon: Coord) -> Result<(Instance, Instance), GenError> {
    check_epsilon(epsilon)?;
    let right = Span::new(Coord::int(3), epsilon)?;
    let base = Instance::new(
        vec![Span::new(Coord::zero(), Coord::one())?, right],
        Coord::one(),
    )?;
    let shrunk = Instance::new(
        vec![Span::new(Coord::zero(), epsilon * epsilon)?, right],
        Coord::one(),
    )?;
    Ok((base, shrunk))
}

/// Reflection of an instance about the origin: every interval `[s, t]`
/// becomes `[-t, -s]`. Preserves all lengths, the covering length, and the
/// optimal social cost; the k-th smallest left endpoint of the mirror is the
/// reflection of the (n+1-k)-th of the original.
pub fn mirror(inst: &Instance) -> Instance {
    let spans = inst
        .agents()
        .iter()
        .map(|a| Span::new(-a.t(), a.length()).expect("length preserved"))
        .collect();
    Instance::new(spans, inst.covering_length()).expect("mirror of a valid instance is valid")
}

/// SplitMix64, the fixed 64-bit generator behind all seeded randomness here.
///
/// Pinning the algorithm (rather than a library) makes `(seed, params) →
/// instance` reproducible across platforms and releases, which is the only
/// normative requirement on the random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform-ish draw in `[0, bound)` by reduction. The negligible modulo
    /// bias is irrelevant here; determinism is the contract.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        self.next_u64() % bound
    }
}

/// Parameters for seeded random instance generation.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub n: usize,
    pub seed: u64,
    /// Grid step for left endpoints; the grid is `{0, step, 2·step, ...}`.
    pub grid_step: Coord,
    /// Right end of the grid (inclusive when it is a grid point).
    pub span: Coord,
}

/// `n` unit agents with left endpoints drawn from the rational grid
/// `{0, step, ..., span}` by the seeded generator; unit covering length.
/// Identical parameters always yield an identical instance.
pub fn random_instance(params: &GeneratorParams) -> Result<Instance, GenError> {
    let mut rng = SplitMix64::new(params.seed);
    random_unit_instance(&mut rng, params.n, params.grid_step, params.span)
}

/// Like [`random_instance`], drawing from an existing generator stream.
pub fn random_unit_instance(
    rng: &mut SplitMix64,
    n: usize,
    grid_step: Coord,
    span: Coord,
) -> Result<Instance, GenError> {
    if n == 0 || !grid_step.is_positive() || span.is_negative() {
        return Err(GenError::EmptyGrid);
    }
    let points = (span / grid_step).floor_int();
    if points < 0 {
        return Err(GenError::EmptyGrid);
    }
    let count = points as u64 + 1;
    let lefts: Vec<Coord> = (0..n)
        .map(|_| grid_step * Coord::int(rng.next_below(count) as i128))
        .collect();
    Ok(Instance::unit(&lefts)?)
}

/// A strictly positive rational weight vector of length `n` summing to
/// exactly 1, for order-statistic mixture sweeps.
pub fn random_rational_weights(rng: &mut SplitMix64, n: usize) -> Vec<Coord> {
    assert!(n > 0, "need at least one weight");
    let raw: Vec<Coord> = (0..n)
        .map(|_| Coord::int(rng.next_below(16) as i128 + 1))
        .collect();
    let total: Coord = raw.iter().copied().sum();
    raw.into_iter().map(|w| w / total).collect()
}
