//! Verification engine: approximation ratios, misreport search, the
//! adversary game against black-box deterministic mechanisms, the
//! order-statistic lower-bound evaluator, the unknown-lengths impossibility
//! probe, and the welfare-ratio conversion.
//!
//! Everything here is exact. A reported witness is a checkable artifact: a
//! deviation witness records costs that strictly decrease, and a ratio
//! witness records the instance on which the quotient was attained.

use std::collections::BTreeSet;

use crate::coord::Coord;
use crate::gen::{self, GenError};
use crate::mechanisms::{ConvexCombination, Mechanism, MechanismError};
use crate::model::{
    overlap, span_cost, AgentInterval, Instance, Lottery, ModelError, Placement, Span,
};
use crate::solver;

/// Errors from audit operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AuditError {
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("misreport set must not be empty")]
    EmptyMisreportSet,
    #[error("grid step must be positive, got {0}")]
    NonPositiveGridStep(String),
    #[error("adversary game needs an even agent count of at least 4, got {0}")]
    BadAgentCount(usize),
    #[error("delta must lie strictly between 0 and 1/2, got {0}")]
    DeltaOutOfRange(String),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("lower bound needs an even positive agent count, got {0}")]
    OddAgentCount(usize),
    #[error("rho must be at least 1, got {0}")]
    RhoBelowOne(String),
    #[error("social welfare lower bound must be positive, got {0}")]
    NonPositiveWelfare(String),
}

/// A mechanism-to-optimum quotient. `Unbounded` marks the case of a
/// mechanism with positive cost on an instance whose optimal cost is zero;
/// it is an explicit state so it cannot poison aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioValue {
    Finite(Coord),
    Unbounded,
}

impl RatioValue {
    fn from_costs(mechanism_cost: Coord, optimal_cost: Coord) -> Self {
        if optimal_cost.is_positive() {
            RatioValue::Finite(mechanism_cost / optimal_cost)
        } else if mechanism_cost.is_zero() {
            RatioValue::Finite(Coord::one())
        } else {
            RatioValue::Unbounded
        }
    }

    pub fn finite(&self) -> Option<Coord> {
        match self {
            RatioValue::Finite(v) => Some(*v),
            RatioValue::Unbounded => None,
        }
    }

    pub fn to_string_exact(&self) -> String {
        match self {
            RatioValue::Finite(v) => v.to_string(),
            RatioValue::Unbounded => "UNBOUNDED".to_string(),
        }
    }
}

/// What a mechanism produced on an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MechanismOutput {
    Placement(Placement),
    Lottery(Lottery),
}

/// Exact single-instance evaluation of the approximation quotient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioReport {
    /// Social cost of the mechanism's output (expected, for lotteries).
    pub mechanism_cost: Coord,
    pub optimal_cost: Coord,
    pub ratio: RatioValue,
    pub mechanism_output: MechanismOutput,
    pub optimal_placement: Placement,
}

/// Evaluates a mechanism against the optimum on one instance.
pub fn approximation_ratio<M: Mechanism + ?Sized>(
    mech: &M,
    inst: &Instance,
) -> Result<RatioReport, AuditError> {
    let lottery = mech.lottery(inst)?;
    Ok(lottery_ratio_report(inst, lottery))
}

fn lottery_ratio_report(inst: &Instance, lottery: Lottery) -> RatioReport {
    let mechanism_cost = inst.expected_social_cost(&lottery);
    let (optimal_placement, optimal_cost) = solver::optimal_placement(inst);
    let mechanism_output = match lottery.as_placement() {
        Some(p) => MechanismOutput::Placement(p),
        None => MechanismOutput::Lottery(lottery),
    };
    RatioReport {
        mechanism_cost,
        optimal_cost,
        ratio: RatioValue::from_costs(mechanism_cost, optimal_cost),
        mechanism_output,
        optimal_placement,
    }
}

fn placement_ratio_report(inst: &Instance, placement: Placement) -> RatioReport {
    lottery_ratio_report(inst, Lottery::degenerate(placement))
}

/// A strictly profitable misreport: constructive evidence that a mechanism
/// is not truthful.
///
/// When `realization` is `Some(label)`, the costs are those of the coupled
/// realization with that label (universal truthfulness); otherwise they are
/// expected costs (deterministic mechanisms included). In either case
/// `misreport_cost < true_cost` holds exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationWitness {
    pub agent_id: usize,
    pub true_cost: Coord,
    pub misreport: Span,
    pub misreport_cost: Coord,
    pub realization: Option<usize>,
}

/// A ratio quotient together with the instance that attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioWitness {
    pub instance: Instance,
    pub report: RatioReport,
}

impl RatioWitness {
    pub fn ratio(&self) -> RatioValue {
        self.report.ratio
    }
}

/// A deviation witness together with the profile it was found on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationWitness {
    /// The profile in which the witness's agent reports truthfully.
    pub instance: Instance,
    pub witness: DeviationWitness,
}

/// The default misreport set for an agent: every agent endpoint, shifted by
/// `-|C|`, `0`, and `+|C|`, plus the rational grid over
/// `[min s - |C| - 1, max t + 1]` at the given step. Misreports keep the
/// agent's true length, so they stay inside the length constraints every
/// mechanism here requires.
pub fn default_misreports(
    inst: &Instance,
    agent_id: usize,
    grid_step: Coord,
) -> Result<Vec<Span>, AuditError> {
    if !grid_step.is_positive() {
        return Err(AuditError::NonPositiveGridStep(grid_step.to_string()));
    }
    let agent = inst.agent(agent_id)?;
    let length = agent.length();
    let c = inst.covering_length();
    let mut lefts: BTreeSet<Coord> = BTreeSet::new();
    for a in inst.agents() {
        for e in [a.s(), a.t()] {
            lefts.insert(e - c);
            lefts.insert(e);
            lefts.insert(e + c);
        }
    }
    let lo = inst.agents().iter().map(|a| a.s()).min().unwrap() - c - Coord::one();
    let hi = inst.agents().iter().map(|a| a.t()).max().unwrap() + Coord::one();
    let mut x = lo;
    while x <= hi {
        lefts.insert(x);
        x += grid_step;
    }
    Ok(lefts
        .into_iter()
        .map(|s| Span::new(s, length).expect("positive length"))
        .collect())
}

/// Searches the given misreports, in order, for the first one that strictly
/// lowers the agent's cost. Randomized mechanisms are compared both in
/// expectation and realization by realization under label coupling, so a
/// `None` result on an exhaustive set refutes deviations against universal
/// truthfulness, not just truthfulness in expectation.
pub fn deviation_search<M: Mechanism + ?Sized>(
    mech: &M,
    inst: &Instance,
    agent_id: usize,
    misreports: &[Span],
) -> Result<Option<DeviationWitness>, AuditError> {
    if misreports.is_empty() {
        return Err(AuditError::EmptyMisreportSet);
    }
    let agent = *inst.agent(agent_id)?;
    let c = inst.covering_length();
    let truthful = mech.realizations(inst)?;
    let truthful_expected: Coord = truthful
        .iter()
        .map(|r| r.probability * span_cost(&agent.span, &r.placement, c))
        .sum();

    for &misreport in misreports {
        if misreport == agent.span {
            continue;
        }
        let deviated_inst = inst.with_report(agent_id, misreport)?;
        let deviated = mech.realizations(&deviated_inst)?;
        let deviated_expected: Coord = deviated
            .iter()
            .map(|r| r.probability * span_cost(&agent.span, &r.placement, c))
            .sum();
        if deviated_expected < truthful_expected {
            return Ok(Some(DeviationWitness {
                agent_id,
                true_cost: truthful_expected,
                misreport,
                misreport_cost: deviated_expected,
                realization: None,
            }));
        }
        for r in &truthful {
            let Some(d) = deviated.iter().find(|d| d.label == r.label) else {
                continue;
            };
            let true_cost = span_cost(&agent.span, &r.placement, c);
            let misreport_cost = span_cost(&agent.span, &d.placement, c);
            if misreport_cost < true_cost {
                return Ok(Some(DeviationWitness {
                    agent_id,
                    true_cost,
                    misreport,
                    misreport_cost,
                    realization: Some(r.label),
                }));
            }
        }
    }
    Ok(None)
}

/// One state of the adversary game: the profile shown to the mechanism, its
/// answer, the agents intersecting that answer, and the move the adversary
/// made in response (absent on terminal states).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameStep {
    pub instance: Instance,
    pub placement: Placement,
    /// Ids of agents whose intervals have positive overlap with the
    /// mechanism's covering interval, ascending.
    pub intersecting: Vec<usize>,
    pub moved: Option<MovedAgent>,
}

/// The adversary's move: the chosen agent and its new report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MovedAgent {
    pub id: usize,
    pub report: Span,
}

/// Terminal state of an adversary game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameOutcome {
    /// The mechanism was driven to the stated cost quotient.
    RatioWitness(RatioWitness),
    /// The mechanism abandoned a moved agent whose old and new reports both
    /// met its previous answer; the recorded misreport strictly profits.
    TruthfulnessViolation(ViolationWitness),
    /// The iteration cap fired before either exit; surfaced for inspection,
    /// never interpreted as evidence.
    Exhausted,
}

/// Full record of an adversary game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTranscript {
    pub steps: Vec<GameStep>,
    pub outcome: GameOutcome,
    /// Highest family index reached; the placement's left endpoint lies in
    /// `[k, k+1]` within family `k`.
    pub family_reached: usize,
    /// Whether the construction ran mirrored because the mechanism's first
    /// answer covered the right cluster.
    pub mirrored: bool,
}

/// Default iteration cap for [`adversary_game`].
pub fn default_iteration_cap(n: usize) -> usize {
    16 * n
}

/// Plays the lower-bound game against a black-box deterministic mechanism.
///
/// Seeds two clusters of `n/2` unit agents at `[0, 1]` and `[n, n+1]`, then
/// repeatedly moves the rightmost agent still intersecting the mechanism's
/// covering interval, forcing a truthful mechanism to chase it rightward.
/// Terminates with a [`RatioWitness`] once at most one agent keeps positive
/// overlap or the placement reaches family `n/2 - 1`, with a
/// [`GameOutcome::TruthfulnessViolation`] the moment the mechanism drops a
/// moved agent it was obliged to keep intersecting, or with [`GameOutcome::Exhausted`] at
/// the iteration cap.
pub fn adversary_game<M: Mechanism + ?Sized>(
    mech: &M,
    n: usize,
    delta: Coord,
) -> Result<GameTranscript, AuditError> {
    adversary_game_with_cap(mech, n, delta, default_iteration_cap(n))
}

/// [`adversary_game`] with an explicit iteration cap.
pub fn adversary_game_with_cap<M: Mechanism + ?Sized>(
    mech: &M,
    n: usize,
    delta: Coord,
    iteration_cap: usize,
) -> Result<GameTranscript, AuditError> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(AuditError::BadAgentCount(n));
    }
    if !delta.is_positive() || delta >= Coord::frac(1, 2) {
        return Err(AuditError::DeltaOutOfRange(delta.to_string()));
    }
    let seed = gen::two_cluster_seed(n)?;
    let c = seed.covering_length();
    let left_cluster = Span::new(Coord::zero(), Coord::one())?;
    let right_cluster = Span::new(Coord::from_count(n), Coord::one())?;

    let first = mech.deterministic_placement(&seed)?;
    let window = first.span(c);
    let covers_left = overlap(&window, &left_cluster).is_positive();
    let covers_right = overlap(&window, &right_cluster).is_positive();
    if !covers_left && !covers_right {
        // Nothing is covered at all: cost n against an optimum of n/2.
        let step = GameStep {
            instance: seed.clone(),
            placement: first,
            intersecting: vec![],
            moved: None,
        };
        let report = placement_ratio_report(&seed, first);
        return Ok(GameTranscript {
            steps: vec![step],
            outcome: GameOutcome::RatioWitness(RatioWitness {
                instance: seed,
                report,
            }),
            family_reached: 0,
            mirrored: false,
        });
    }

    let mirrored = !covers_left;
    let axis = Coord::from_count(n) + Coord::one();
    let query = |inst: &Instance| -> Result<Placement, MechanismError> {
        if mirrored {
            let real = reflect_instance(inst, axis);
            let answer = mech.deterministic_placement(&real)?;
            Ok(reflect_placement(answer, axis, c))
        } else {
            mech.deterministic_placement(inst)
        }
    };

    let mut transcript = play_game(query, seed, n, delta, iteration_cap)?;
    if mirrored {
        transcript = reflect_transcript(transcript, axis, c);
    }
    Ok(transcript)
}

fn play_game(
    query: impl Fn(&Instance) -> Result<Placement, MechanismError>,
    seed: Instance,
    n: usize,
    delta: Coord,
    iteration_cap: usize,
) -> Result<GameTranscript, AuditError> {
    let c = seed.covering_length();
    let target_family = (n / 2 - 1) as i128;
    let mut inst = seed;
    let mut placement = query(&inst)?;
    let mut family: i128 = placement.s.floor_int().max(0);
    let mut steps: Vec<GameStep> = Vec::new();

    loop {
        let window = placement.span(c);
        let mut intersecting: Vec<usize> = inst
            .agents()
            .iter()
            .filter(|a| overlap(&a.span, &window).is_positive())
            .map(|a| a.id)
            .collect();
        intersecting.sort_unstable();

        if intersecting.len() <= 1 || family >= target_family {
            steps.push(GameStep {
                instance: inst.clone(),
                placement,
                intersecting,
                moved: None,
            });
            let report = placement_ratio_report(&inst, placement);
            return Ok(GameTranscript {
                steps,
                outcome: GameOutcome::RatioWitness(RatioWitness {
                    instance: inst,
                    report,
                }),
                family_reached: family.max(0) as usize,
                mirrored: false,
            });
        }

        if steps.len() >= iteration_cap {
            steps.push(GameStep {
                instance: inst.clone(),
                placement,
                intersecting,
                moved: None,
            });
            return Ok(GameTranscript {
                steps,
                outcome: GameOutcome::Exhausted,
                family_reached: family.max(0) as usize,
                mirrored: false,
            });
        }

        // Rightmost intersecting agent: largest right endpoint, then largest id.
        let mover: AgentInterval = *inst
            .agents()
            .iter()
            .filter(|a| intersecting.contains(&a.id))
            .max_by_key(|a| (a.t(), a.id))
            .expect("non-empty intersecting set");
        let report = if mover.t() < window.t() {
            // Right endpoint strictly inside the window: slide to start there.
            Span::new(mover.t(), mover.length())?
        } else {
            // Reaches past the window: move just inside its right end.
            Span::new(window.t() - delta, mover.length())?
        };
        steps.push(GameStep {
            instance: inst.clone(),
            placement,
            intersecting,
            moved: Some(MovedAgent {
                id: mover.id,
                report,
            }),
        });

        let next = inst.with_report(mover.id, report)?;
        let next_placement = query(&next)?;
        let kept = overlap(&report, &next_placement.span(c));
        if !kept.is_positive() {
            // Both the old and new report met the previous answer, so a
            // truthful mechanism had to keep intersecting the new report.
            // Reverting to the old report strictly lowers the agent's cost.
            let regained = overlap(&report, &window);
            debug_assert!(regained.is_positive());
            let witness = DeviationWitness {
                agent_id: mover.id,
                true_cost: report.length() - kept,
                misreport: mover.span,
                misreport_cost: report.length() - regained,
                realization: None,
            };
            return Ok(GameTranscript {
                steps,
                outcome: GameOutcome::TruthfulnessViolation(ViolationWitness {
                    instance: next,
                    witness,
                }),
                family_reached: family.max(0) as usize,
                mirrored: false,
            });
        }

        family = family.max(next_placement.s.floor_int());
        inst = next;
        placement = next_placement;
    }
}

fn reflect_instance(inst: &Instance, axis: Coord) -> Instance {
    let mut by_id: Vec<&AgentInterval> = inst.agents().iter().collect();
    by_id.sort_by_key(|a| a.id);
    let spans = by_id
        .iter()
        .map(|a| Span::new(axis - a.t(), a.length()).expect("length preserved"))
        .collect();
    Instance::new(spans, inst.covering_length()).expect("reflection of a valid instance")
}

fn reflect_placement(p: Placement, axis: Coord, covering_length: Coord) -> Placement {
    Placement::new(axis - p.s - covering_length)
}

fn reflect_span(span: Span, axis: Coord) -> Span {
    Span::new(axis - span.t(), span.length()).expect("length preserved")
}

fn reflect_transcript(transcript: GameTranscript, axis: Coord, c: Coord) -> GameTranscript {
    let steps = transcript
        .steps
        .into_iter()
        .map(|step| GameStep {
            instance: reflect_instance(&step.instance, axis),
            placement: reflect_placement(step.placement, axis, c),
            intersecting: step.intersecting,
            moved: step.moved.map(|m| MovedAgent {
                id: m.id,
                report: reflect_span(m.report, axis),
            }),
        })
        .collect();
    let outcome = match transcript.outcome {
        GameOutcome::RatioWitness(w) => {
            let instance = reflect_instance(&w.instance, axis);
            let placement = match w.report.mechanism_output {
                MechanismOutput::Placement(p) => reflect_placement(p, axis, c),
                MechanismOutput::Lottery(_) => unreachable!("game output is deterministic"),
            };
            let report = placement_ratio_report(&instance, placement);
            debug_assert_eq!(report.mechanism_cost, w.report.mechanism_cost);
            debug_assert_eq!(report.optimal_cost, w.report.optimal_cost);
            GameOutcome::RatioWitness(RatioWitness { instance, report })
        }
        GameOutcome::TruthfulnessViolation(v) => {
            GameOutcome::TruthfulnessViolation(ViolationWitness {
                instance: reflect_instance(&v.instance, axis),
                witness: DeviationWitness {
                    misreport: reflect_span(v.witness.misreport, axis),
                    ..v.witness
                },
            })
        }
        GameOutcome::Exhausted => GameOutcome::Exhausted,
    };
    GameTranscript {
        steps,
        outcome,
        family_reached: transcript.family_reached,
        mirrored: true,
    }
}

/// Exact worst-case ratio of a convex combination of order statistics on the
/// singleton/group instance and its mirror image (group first): the larger
/// of the two expected quotients. Equals `1 + q(n-2)/n` where `q` is the
/// larger of the two half-masses of the weight vector, so it is at least
/// `3/2 - 1/n` for every weight vector.
pub fn order_statistic_lower_bound(weights: &[Coord], n: usize) -> Result<Coord, AuditError> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(AuditError::OddAgentCount(n));
    }
    let mech = ConvexCombination {
        weights: weights.to_vec(),
    };
    let direct = gen::singleton_group(n, gen::default_gap())?;
    let mirrored = gen::mirror(&direct);
    let a = approximation_ratio(&mech, &direct)?;
    let b = approximation_ratio(&mech, &mirrored)?;
    let ra = a.ratio.finite().expect("optimal cost n/2 is positive");
    let rb = b.ratio.finite().expect("optimal cost n/2 is positive");
    Ok(ra.max(rb))
}

/// Outcome of the unknown-lengths probe: a total dichotomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeOutcome {
    RatioWitness(RatioWitness),
    TruthfulnessViolation(ViolationWitness),
}

/// Drives a length-reporting mechanism through the two-instance trap that
/// makes good approximations and truthfulness incompatible once lengths are
/// reported.
///
/// On `{[0,1], [3,3+eps]}` the mechanism must put at least half its mass on
/// the unit agent — otherwise its exact ratio is already at least
/// `1/(2 eps)` and is reported. If no flank of the unit interval (`[0,eps]`
/// or `[1-eps,1]`) carries mass at least 1/4, the mass sits on slivers of
/// overlap below `eps` and the exact ratio on the base instance is again
/// reported. Otherwise the unit agent shrinks to the covered flank
/// (`[0,eps^2]`, mirrored to `[1-eps^2,1]` when the right flank is the
/// covered one): a truthful mechanism must give the shrunken interval at
/// least the expected coverage the old answer gave it — failing that is a
/// strict deviation witness — and honoring it forces expected cost `eps/4`
/// against an optimum of `eps^2`, a reported ratio of at least `1/(4 eps)`.
/// Deterministic mechanisms specialize to the sharper `1/eps` bounds.
pub fn unknown_lengths_probe<M: Mechanism + ?Sized>(
    mech: &M,
    epsilon: Coord,
) -> Result<ProbeOutcome, AuditError> {
    if !epsilon.is_positive() || epsilon >= Coord::one() {
        return Err(AuditError::EpsilonOutOfRange(epsilon.to_string()));
    }
    let (base, _) = gen::unknown_length_pair(epsilon)?;
    let c = base.covering_length();
    let unit_agent = Span::new(Coord::zero(), Coord::one())?;
    let right_agent = base.agents()[1].span;

    let base_lottery = mech.lottery(&base)?;
    let mass_on_unit: Coord = base_lottery
        .entries()
        .iter()
        .filter(|e| overlap(&e.placement.span(c), &unit_agent).is_positive())
        .map(|e| e.probability)
        .sum();
    if mass_on_unit < Coord::frac(1, 2) {
        return Ok(ProbeOutcome::RatioWitness(RatioWitness {
            report: lottery_ratio_report(&base, base_lottery),
            instance: base,
        }));
    }

    let left_flank = Span::new(Coord::zero(), epsilon)?;
    let right_flank = Span::new(Coord::one() - epsilon, epsilon)?;
    let flank_mass = |flank: &Span| -> Coord {
        base_lottery
            .entries()
            .iter()
            .filter(|e| e.placement.span(c).contains(flank))
            .map(|e| e.probability)
            .sum()
    };
    let quarter = Coord::frac(1, 4);
    let eps_sq = epsilon * epsilon;
    let shrunk_span = if flank_mass(&left_flank) >= quarter {
        Span::new(Coord::zero(), eps_sq)?
    } else if flank_mass(&right_flank) >= quarter {
        Span::new(Coord::one() - eps_sq, eps_sq)?
    } else {
        // At least half the mass meets the unit agent, yet no flank is
        // covered often enough: the overlap is below eps on most of it, and
        // the exact base ratio already witnesses the bound.
        return Ok(ProbeOutcome::RatioWitness(RatioWitness {
            report: lottery_ratio_report(&base, base_lottery),
            instance: base,
        }));
    };

    let shrunk_inst = Instance::new(vec![shrunk_span, right_agent], c)?;
    let coverage_if_misreporting: Coord = base_lottery
        .entries()
        .iter()
        .map(|e| e.probability * overlap(&e.placement.span(c), &shrunk_span))
        .sum();
    let shrunk_lottery = mech.lottery(&shrunk_inst)?;
    let truthful_coverage: Coord = shrunk_lottery
        .entries()
        .iter()
        .map(|e| e.probability * overlap(&e.placement.span(c), &shrunk_span))
        .sum();

    if truthful_coverage < coverage_if_misreporting {
        let witness = DeviationWitness {
            agent_id: 0,
            true_cost: shrunk_span.length() - truthful_coverage,
            misreport: unit_agent,
            misreport_cost: shrunk_span.length() - coverage_if_misreporting,
            realization: None,
        };
        return Ok(ProbeOutcome::TruthfulnessViolation(ViolationWitness {
            instance: shrunk_inst,
            witness,
        }));
    }
    Ok(ProbeOutcome::RatioWitness(RatioWitness {
        report: lottery_ratio_report(&shrunk_inst, shrunk_lottery),
        instance: shrunk_inst,
    }))
}

/// Converts a social-cost approximation ratio `rho` into the welfare-ratio
/// upper bound `1/rho + n(rho-1)/(rho * sw_lower)`, where `sw_lower` is a
/// positive lower bound on the mechanism's social welfare.
pub fn welfare_ratio_bound(rho: Coord, n: usize, sw_lower: Coord) -> Result<Coord, AuditError> {
    if rho < Coord::one() {
        return Err(AuditError::RhoBelowOne(rho.to_string()));
    }
    if !sw_lower.is_positive() {
        return Err(AuditError::NonPositiveWelfare(sw_lower.to_string()));
    }
    Ok(rho.recip() + Coord::from_count(n) * (rho - Coord::one()) / (rho * sw_lower))
}

/// Control mechanisms for audits: simple procedures that are deliberately
/// not truthful, or that accept unequal reported lengths so the
/// unknown-lengths probe has deterministic subjects to interrogate.
pub mod controls {
    use super::*;
    use crate::mechanisms::Realization;

    fn point_mass(label: usize, placement: Placement) -> Vec<Realization> {
        vec![Realization {
            label,
            placement,
            probability: Coord::one(),
        }]
    }

    /// Places the covering interval at the mean of the reported left
    /// endpoints. Not truthful: an agent can drag the mean toward herself.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct MeanOfLefts;

    impl Mechanism for MeanOfLefts {
        fn id(&self) -> String {
            "mean-of-lefts".to_string()
        }

        fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
            let sum: Coord = inst.agents().iter().map(|a| a.s()).sum();
            let mean = sum / Coord::from_count(inst.n());
            Ok(point_mass(0, Placement::new(mean)))
        }
    }

    /// Covers the leftmost reported interval from its left endpoint.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct LeftmostCover;

    impl Mechanism for LeftmostCover {
        fn id(&self) -> String {
            "leftmost-cover".to_string()
        }

        fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
            Ok(point_mass(0, Placement::new(inst.agents()[0].s())))
        }
    }

    /// Covers the rightmost reported interval from its left endpoint.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct RightmostCover;

    impl Mechanism for RightmostCover {
        fn id(&self) -> String {
            "rightmost-cover".to_string()
        }

        fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
            let last = inst.agents().last().expect("non-empty instance");
            Ok(point_mass(0, Placement::new(last.s())))
        }
    }

    /// Covers the leftmost interval while it is at least as long as the
    /// covering interval, and otherwise parks the window flush against the
    /// rightmost agent's left endpoint. Punishes an agent for shrinking her
    /// report, which is exactly the containment violation the
    /// unknown-lengths probe looks for.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub struct LengthGatedCover;

    impl Mechanism for LengthGatedCover {
        fn id(&self) -> String {
            "length-gated-cover".to_string()
        }

        fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
            let first = &inst.agents()[0];
            let placement = if first.length() >= inst.covering_length() {
                Placement::new(first.s())
            } else {
                let last = inst.agents().last().expect("non-empty instance");
                Placement::new(last.s() - inst.covering_length())
            };
            Ok(point_mass(0, placement))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{default_gap, singleton_group, wci1, wci2, weighted_median_worst};
    use crate::mechanisms::{Median, Realization, UniformStatistic, WeightedMedian};

    fn c(n: i128, d: i128) -> Coord {
        Coord::frac(n, d)
    }

    fn unit(lefts: &[i128]) -> Instance {
        let coords: Vec<Coord> = lefts.iter().map(|&v| Coord::int(v)).collect();
        Instance::unit(&coords).unwrap()
    }

    #[test]
    fn ratio_examples() {
        // Median on the 1/2-1/2 worst case: 5 over 3.
        let inst = wci2(6, default_gap()).unwrap();
        let report = approximation_ratio(&Median, &inst).unwrap();
        assert_eq!(report.mechanism_cost, c(5, 1));
        assert_eq!(report.optimal_cost, c(3, 1));
        assert_eq!(report.ratio, RatioValue::Finite(c(5, 3)));

        // Uniform statistic on the 1/3-2/3 worst case: expected 3 over 2.
        let inst = wci1(6, default_gap()).unwrap();
        let report = approximation_ratio(&UniformStatistic, &inst).unwrap();
        assert_eq!(report.mechanism_cost, c(3, 1));
        assert_eq!(report.optimal_cost, c(2, 1));
        assert_eq!(report.ratio, RatioValue::Finite(c(3, 2)));

        // Uniform statistic on wci2(6): (2/3)*5 + (1/3)*3 = 13/3.
        let inst = wci2(6, default_gap()).unwrap();
        let report = approximation_ratio(&UniformStatistic, &inst).unwrap();
        assert_eq!(report.mechanism_cost, c(13, 3));
        assert_eq!(report.ratio, RatioValue::Finite(c(13, 9)));

        // A mechanism that returns the optimum scores exactly 1.
        let single = unit(&[5]);
        let report = approximation_ratio(&Median, &single).unwrap();
        assert_eq!(report.ratio, RatioValue::Finite(Coord::one()));
    }

    #[test]
    fn ratio_unbounded_is_an_explicit_state() {
        struct ShiftedCover;
        impl Mechanism for ShiftedCover {
            fn id(&self) -> String {
                "shifted-cover".to_string()
            }
            fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
                Ok(vec![Realization {
                    label: 0,
                    placement: Placement::new(inst.agents()[0].s() + Coord::int(5)),
                    probability: Coord::one(),
                }])
            }
        }
        // Both agents identical: the optimum covers everything for cost 0.
        let inst = unit(&[0, 0]);
        let report = approximation_ratio(&ShiftedCover, &inst).unwrap();
        assert_eq!(report.ratio, RatioValue::Unbounded);
        let honest = approximation_ratio(&Median, &inst).unwrap();
        assert_eq!(honest.ratio, RatioValue::Finite(Coord::one()));
    }

    #[test]
    fn deviation_search_clears_median_on_spaced_singletons() {
        let inst = unit(&[0, 2, 4]);
        for agent in 0..3 {
            let misreports = default_misreports(&inst, agent, c(1, 4)).unwrap();
            let witness = deviation_search(&Median, &inst, agent, &misreports).unwrap();
            assert!(witness.is_none(), "agent {agent}");
        }
    }

    #[test]
    fn deviation_search_catches_the_mean_control() {
        let inst = unit(&[0, 2]);
        let misreport = Span::new(c(-2, 1), Coord::one()).unwrap();
        let witness = deviation_search(&controls::MeanOfLefts, &inst, 0, &[misreport])
            .unwrap()
            .expect("the mean mechanism is not truthful");
        assert_eq!(witness.true_cost, Coord::one());
        assert_eq!(witness.misreport_cost, Coord::zero());
        assert!(witness.misreport_cost < witness.true_cost);
    }

    #[test]
    fn deviation_search_trivial_and_error_cases() {
        let single = unit(&[3]);
        let misreports = default_misreports(&single, 0, c(1, 2)).unwrap();
        assert!(deviation_search(&Median, &single, 0, &misreports)
            .unwrap()
            .is_none());
        assert!(matches!(
            deviation_search(&Median, &single, 0, &[]),
            Err(AuditError::EmptyMisreportSet)
        ));
        assert!(matches!(
            default_misreports(&single, 0, Coord::zero()),
            Err(AuditError::NonPositiveGridStep(_))
        ));
    }

    #[test]
    fn adversary_game_median_n4_matches_hand_trace() {
        let transcript = adversary_game(&Median, 4, c(1, 1000)).unwrap();
        assert!(!transcript.mirrored);
        let GameOutcome::RatioWitness(witness) = &transcript.outcome else {
            panic!("expected a ratio witness, got {:?}", transcript.outcome);
        };
        assert_eq!(witness.report.mechanism_cost, c(3, 1));
        assert_eq!(witness.report.optimal_cost, c(2, 1));
        assert_eq!(witness.ratio().finite().unwrap(), c(3, 2));
        // Two moves, then the terminal snapshot.
        assert_eq!(transcript.steps.len(), 3);
        assert_eq!(transcript.family_reached, 1);
        // Final profile: one agent left behind, the chased agent near
        // [2-2d, 3-2d], and the untouched right cluster.
        let lefts: Vec<Coord> = witness.instance.agents().iter().map(|a| a.s()).collect();
        assert_eq!(lefts, vec![c(0, 1), c(999, 500), c(4, 1), c(4, 1)]);
    }

    #[test]
    fn adversary_game_median_n6_reaches_five_thirds() {
        let transcript = adversary_game(&Median, 6, c(1, 1000)).unwrap();
        let GameOutcome::RatioWitness(witness) = &transcript.outcome else {
            panic!("expected a ratio witness");
        };
        assert_eq!(witness.ratio().finite().unwrap(), c(5, 3));
        assert_eq!(witness.report.mechanism_cost, c(5, 1));
        assert_eq!(witness.report.optimal_cost, c(3, 1));
    }

    #[test]
    fn adversary_game_handles_zero_coverage_mechanisms() {
        // The mean of the seed's left endpoints lands between the clusters.
        let transcript = adversary_game(&controls::MeanOfLefts, 4, c(1, 1000)).unwrap();
        let GameOutcome::RatioWitness(witness) = &transcript.outcome else {
            panic!("expected a ratio witness");
        };
        assert_eq!(witness.ratio().finite().unwrap(), c(2, 1));
        assert!(transcript.steps[0].intersecting.is_empty());
    }

    #[test]
    fn adversary_game_mirrors_right_leaning_mechanisms() {
        // The max statistic answers the seed inside the right cluster; the
        // game must mirror and still conclude.
        let transcript =
            adversary_game(&crate::mechanisms::KthStatistic(4), 4, c(1, 1000)).unwrap();
        assert!(transcript.mirrored);
        // Mirrored max statistic behaves like the min statistic: it never
        // follows the moved agent, the game cannot make progress, and the
        // cap fires. Surfaced, not interpreted.
        assert!(matches!(transcript.outcome, GameOutcome::Exhausted));
        assert_eq!(transcript.steps.len(), default_iteration_cap(4) + 1);
    }

    #[test]
    fn adversary_game_flags_containment_violations() {
        // Covers the leftmost agent while all reports are integral, then
        // jumps far away: a concrete violation of the containment property
        // truthfulness forces.
        struct Skittish;
        impl Mechanism for Skittish {
            fn id(&self) -> String {
                "skittish".to_string()
            }
            fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
                let all_integral = inst.agents().iter().all(|a| a.s().is_integer());
                let placement = if all_integral {
                    Placement::new(inst.agents()[0].s())
                } else {
                    Placement::new(Coord::int(100))
                };
                Ok(vec![Realization {
                    label: 0,
                    placement,
                    probability: Coord::one(),
                }])
            }
        }
        let delta = c(1, 1000);
        let transcript = adversary_game(&Skittish, 4, delta).unwrap();
        let GameOutcome::TruthfulnessViolation(violation) = &transcript.outcome else {
            panic!("expected a violation, got {:?}", transcript.outcome);
        };
        let w = &violation.witness;
        assert_eq!(w.true_cost, Coord::one());
        assert_eq!(w.misreport_cost, Coord::one() - delta);
        assert!(w.misreport_cost < w.true_cost);
        // The misreport is the agent's previous interval [0, 1].
        assert_eq!(w.misreport, Span::new(Coord::zero(), Coord::one()).unwrap());
    }

    #[test]
    fn adversary_game_holds_for_both_documented_deltas() {
        for delta in [c(1, 100), c(1, 1000)] {
            for n in [4_usize, 10, 20] {
                let transcript = adversary_game(&Median, n, delta).unwrap();
                let GameOutcome::RatioWitness(witness) = &transcript.outcome else {
                    panic!("median must yield a ratio witness, n={n}");
                };
                let bound = c(2, 1) - c(2, 1) / Coord::from_count(n);
                assert!(witness.ratio().finite().unwrap() >= bound, "n={n}");
            }
        }
    }

    #[test]
    fn adversary_game_min_statistic_exhausts() {
        // The min statistic never follows the moved agent, so the game can
        // make no progress; the cap fires and the outcome is surfaced.
        let transcript =
            adversary_game(&crate::mechanisms::KthStatistic(1), 4, c(1, 1000)).unwrap();
        assert!(!transcript.mirrored);
        assert!(matches!(transcript.outcome, GameOutcome::Exhausted));
    }

    #[test]
    fn adversary_game_rejects_bad_parameters() {
        assert!(matches!(
            adversary_game(&Median, 5, c(1, 1000)),
            Err(AuditError::BadAgentCount(5))
        ));
        assert!(matches!(
            adversary_game(&Median, 2, c(1, 1000)),
            Err(AuditError::BadAgentCount(2))
        ));
        assert!(matches!(
            adversary_game(&Median, 4, c(1, 2)),
            Err(AuditError::DeltaOutOfRange(_))
        ));
        assert!(matches!(
            adversary_game(&UniformStatistic, 4, c(1, 1000)),
            Err(AuditError::Mechanism(MechanismError::NotDeterministic(_)))
        ));
    }

    #[test]
    fn lower_bound_examples() {
        let quarter = c(1, 4);
        let uniform = vec![quarter; 4];
        assert_eq!(order_statistic_lower_bound(&uniform, 4).unwrap(), c(5, 4));

        let mut point_last = vec![Coord::zero(); 4];
        point_last[3] = Coord::one();
        assert_eq!(
            order_statistic_lower_bound(&point_last, 4).unwrap(),
            c(3, 2)
        );

        // All mass on a group-side index still hits 3/2 on the mirror.
        let mut point_third = vec![Coord::zero(); 4];
        point_third[2] = Coord::one();
        assert_eq!(
            order_statistic_lower_bound(&point_third, 4).unwrap(),
            c(3, 2)
        );

        assert!(matches!(
            order_statistic_lower_bound(&uniform, 5),
            Err(AuditError::OddAgentCount(5))
        ));
        assert!(matches!(
            order_statistic_lower_bound(&uniform[..3], 4),
            Err(AuditError::Mechanism(MechanismError::WeightCount { .. }))
        ));
    }

    #[test]
    fn lower_bound_matches_closed_form_on_samples() {
        let mut rng = crate::gen::SplitMix64::new(99);
        for n in [4_usize, 6, 8] {
            for _ in 0..50 {
                let weights = crate::gen::random_rational_weights(&mut rng, n);
                let lb = order_statistic_lower_bound(&weights, n).unwrap();
                let first_half: Coord = weights[..n / 2].iter().copied().sum();
                let q = first_half.max(Coord::one() - first_half);
                let expected = Coord::one() + q * Coord::from_count(n - 2) / Coord::from_count(n);
                assert_eq!(lb, expected, "n={n} weights={weights:?}");
            }
        }
    }

    #[test]
    fn probe_leftmost_cover_yields_the_shrunk_ratio_witness() {
        for (eps, expected) in [(c(1, 2), c(2, 1)), (c(1, 10), c(10, 1))] {
            let outcome = unknown_lengths_probe(&controls::LeftmostCover, eps).unwrap();
            let ProbeOutcome::RatioWitness(witness) = outcome else {
                panic!("expected ratio witness");
            };
            assert_eq!(witness.ratio().finite().unwrap(), expected);
            assert_eq!(witness.report.mechanism_cost, eps);
            assert_eq!(witness.report.optimal_cost, eps * eps);
        }
    }

    #[test]
    fn probe_rightmost_cover_fails_already_on_the_base_instance() {
        for (eps, expected) in [(c(1, 2), c(2, 1)), (c(1, 10), c(10, 1))] {
            let outcome = unknown_lengths_probe(&controls::RightmostCover, eps).unwrap();
            let ProbeOutcome::RatioWitness(witness) = outcome else {
                panic!("expected ratio witness");
            };
            assert_eq!(witness.ratio().finite().unwrap(), expected);
            assert_eq!(witness.report.mechanism_cost, Coord::one());
            assert_eq!(witness.report.optimal_cost, eps);
        }
    }

    #[test]
    fn probe_flags_the_length_gated_control() {
        for eps in [c(1, 2), c(1, 10)] {
            let outcome = unknown_lengths_probe(&controls::LengthGatedCover, eps).unwrap();
            let ProbeOutcome::TruthfulnessViolation(violation) = outcome else {
                panic!("expected a truthfulness violation");
            };
            let w = &violation.witness;
            assert_eq!(w.agent_id, 0);
            assert_eq!(w.true_cost, eps * eps);
            assert_eq!(w.misreport_cost, Coord::zero());
            assert!(w.misreport_cost < w.true_cost);
        }
    }

    #[test]
    fn probe_flags_weighted_median_once_lengths_are_reports() {
        // Weighted median is built for known lengths. Treated as a
        // length-reporting mechanism it abandons the agent who shrinks her
        // report (her weight share collapses), so misreporting the old long
        // interval strictly profits and the probe finds exactly that.
        let eps = c(1, 2);
        let outcome = unknown_lengths_probe(&WeightedMedian, eps).unwrap();
        let ProbeOutcome::TruthfulnessViolation(violation) = outcome else {
            panic!("expected a truthfulness violation");
        };
        assert_eq!(violation.witness.true_cost, eps * eps);
        assert_eq!(violation.witness.misreport_cost, Coord::zero());
    }

    #[test]
    fn probe_handles_sliver_lotteries_without_a_flank() {
        // Half the mass on each of two windows that graze the unit agent by
        // less than epsilon: no flank reaches mass 1/4, and the exact base
        // ratio is the witness.
        struct SliverMix;
        impl Mechanism for SliverMix {
            fn id(&self) -> String {
                "sliver-mix".to_string()
            }
            fn realizations(&self, _: &Instance) -> Result<Vec<Realization>, MechanismError> {
                let half = Coord::frac(1, 2);
                Ok(vec![
                    Realization {
                        label: 0,
                        placement: Placement::new(Coord::frac(-3, 4)),
                        probability: half,
                    },
                    Realization {
                        label: 1,
                        placement: Placement::new(Coord::frac(3, 4)),
                        probability: half,
                    },
                ])
            }
        }
        let outcome = unknown_lengths_probe(&SliverMix, c(1, 2)).unwrap();
        let ProbeOutcome::RatioWitness(witness) = outcome else {
            panic!("expected a ratio witness");
        };
        // Each window covers 1/4 of the unit agent: expected social cost
        // 3/4 + 1/2 against an optimum of 1/2.
        assert_eq!(witness.report.mechanism_cost, c(5, 4));
        assert_eq!(witness.ratio().finite().unwrap(), c(5, 2));
    }

    #[test]
    fn probe_rejects_bad_epsilon() {
        assert!(matches!(
            unknown_lengths_probe(&controls::LeftmostCover, Coord::one()),
            Err(AuditError::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            unknown_lengths_probe(&controls::LeftmostCover, Coord::zero()),
            Err(AuditError::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn welfare_bound_examples() {
        for n in [2_usize, 4, 10, 100] {
            let rho = c(2, 1) - c(2, 1) / Coord::from_count(n);
            assert_eq!(
                welfare_ratio_bound(rho, n, Coord::one()).unwrap(),
                Coord::from_count(n) / c(2, 1),
                "n={n}"
            );
        }
        assert_eq!(
            welfare_ratio_bound(Coord::one(), 7, c(3, 1)).unwrap(),
            Coord::one()
        );
        assert_eq!(welfare_ratio_bound(c(5, 3), 6, c(3, 1)).unwrap(), c(7, 5));
        assert!(matches!(
            welfare_ratio_bound(c(1, 2), 4, Coord::one()),
            Err(AuditError::RhoBelowOne(_))
        ));
        assert!(matches!(
            welfare_ratio_bound(c(3, 2), 4, Coord::zero()),
            Err(AuditError::NonPositiveWelfare(_))
        ));
    }

    #[test]
    fn weighted_median_worst_case_ratio_is_inverse_epsilon() {
        for (k, eps) in [(1_usize, c(1, 2)), (2, c(1, 10))] {
            let inst = weighted_median_worst(k, eps).unwrap();
            let report = approximation_ratio(&WeightedMedian, &inst).unwrap();
            assert_eq!(report.ratio, RatioValue::Finite(eps.recip()), "k={k}");
        }
    }

    #[test]
    fn lower_bound_achieves_minimum_at_uniform_weights() {
        for n in [4_usize, 6, 12] {
            let w = vec![Coord::one() / Coord::from_count(n); n];
            let bound = order_statistic_lower_bound(&w, n).unwrap();
            let target = c(3, 2) - Coord::one() / Coord::from_count(n);
            assert_eq!(bound, target, "n={n}");
        }
        // Sanity on the instance family itself.
        let inst = singleton_group(6, default_gap()).unwrap();
        assert_eq!(solver::optimal_placement(&inst).1, c(3, 1));
    }
}
