//! Agents, instances, placements, lotteries, and the cost functions.
//!
//! An [`Instance`] is a non-empty list of agent intervals on the line plus
//! the length of the covering interval to be placed. Agents are kept sorted
//! by left endpoint (ties by input index), which makes every downstream
//! computation a deterministic function of the reported profile. All values
//! are immutable after construction and safe to share across threads.

use crate::coord::Coord;

/// Errors from constructing model values.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("instance must contain at least one agent")]
    EmptyInstance,
    #[error("interval length must be positive, got {0}")]
    NonPositiveLength(String),
    #[error("covering length must be positive, got {0}")]
    NonPositiveCoveringLength(String),
    #[error("no agent with id {0}")]
    UnknownAgent(usize),
    #[error("lottery must contain at least one entry")]
    EmptyLottery,
    #[error("lottery probabilities must be positive, got {0}")]
    NonPositiveProbability(String),
    #[error("lottery probabilities must sum to 1, got {0}")]
    ProbabilitySum(String),
}

/// Closed interval `[s, s + length]` with a strictly positive length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    s: Coord,
    length: Coord,
}

impl Span {
    pub fn new(s: Coord, length: Coord) -> Result<Self, ModelError> {
        if !length.is_positive() {
            return Err(ModelError::NonPositiveLength(length.to_string()));
        }
        Ok(Span { s, length })
    }

    /// Left endpoint.
    pub fn s(&self) -> Coord {
        self.s
    }

    /// Right endpoint, derived as `s + length` and never stored.
    pub fn t(&self) -> Coord {
        self.s + self.length
    }

    pub fn length(&self) -> Coord {
        self.length
    }

    /// Whether `inner` lies entirely inside `self`.
    pub fn contains(&self, inner: &Span) -> bool {
        self.s <= inner.s && inner.t() <= self.t()
    }
}

/// Length of the intersection of two spans.
///
/// Zero when they are disjoint or merely touch at a point; symmetric; exact.
pub fn overlap(a: &Span, b: &Span) -> Coord {
    let lo = a.s().max(b.s());
    let hi = a.t().min(b.t());
    if hi > lo {
        hi - lo
    } else {
        Coord::zero()
    }
}

/// One agent's reported interval together with its stable input index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AgentInterval {
    /// 0-based position in the input the instance was built from. Stable
    /// across re-sorting; used for tie-breaking and witness reporting.
    pub id: usize,
    pub span: Span,
}

impl AgentInterval {
    pub fn s(&self) -> Coord {
        self.span.s()
    }

    pub fn t(&self) -> Coord {
        self.span.t()
    }

    pub fn length(&self) -> Coord {
        self.span.length()
    }
}

/// Left endpoint of the covering interval `[s, s + |C|]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Placement {
    pub s: Coord,
}

impl Placement {
    pub fn new(s: Coord) -> Self {
        Placement { s }
    }

    /// The covering interval this placement induces.
    pub fn span(&self, covering_length: Coord) -> Span {
        Span {
            s: self.s,
            length: covering_length,
        }
    }
}

/// A profile of agent intervals plus the covering length.
///
/// Agents are sorted by `(s, id)`; ids are the 0-based input indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    agents: Vec<AgentInterval>,
    covering_length: Coord,
    equal_unit: bool,
}

impl Instance {
    /// Builds an instance from reported spans in input order.
    pub fn new(spans: Vec<Span>, covering_length: Coord) -> Result<Self, ModelError> {
        if spans.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        if !covering_length.is_positive() {
            return Err(ModelError::NonPositiveCoveringLength(
                covering_length.to_string(),
            ));
        }
        let mut agents: Vec<AgentInterval> = spans
            .into_iter()
            .enumerate()
            .map(|(id, span)| AgentInterval { id, span })
            .collect();
        agents.sort_by_key(|a| (a.s(), a.id));
        let one = Coord::one();
        let equal_unit = covering_length == one && agents.iter().all(|a| a.length() == one);
        Ok(Instance {
            agents,
            covering_length,
            equal_unit,
        })
    }

    /// Unit-length agents at the given left endpoints, unit covering interval.
    pub fn unit(lefts: &[Coord]) -> Result<Self, ModelError> {
        let spans = lefts
            .iter()
            .map(|&s| Span::new(s, Coord::one()))
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(spans, Coord::one())
    }

    /// Agents sorted by `(s, id)`.
    pub fn agents(&self) -> &[AgentInterval] {
        &self.agents
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn covering_length(&self) -> Coord {
        self.covering_length
    }

    /// True iff every agent length and the covering length equal 1.
    pub fn equal_unit(&self) -> bool {
        self.equal_unit
    }

    /// True iff every agent interval has exactly the covering length. This is
    /// the precondition of the order-statistic mechanisms.
    pub fn lengths_equal_covering(&self) -> bool {
        self.agents
            .iter()
            .all(|a| a.length() == self.covering_length)
    }

    /// Sum of all agent interval lengths.
    pub fn total_length(&self) -> Coord {
        self.agents.iter().map(|a| a.length()).sum()
    }

    pub fn agent(&self, id: usize) -> Result<&AgentInterval, ModelError> {
        self.agents
            .iter()
            .find(|a| a.id == id)
            .ok_or(ModelError::UnknownAgent(id))
    }

    /// The instance in which agent `id` reports `span` instead, all other
    /// reports unchanged. Ids are preserved.
    pub fn with_report(&self, id: usize, span: Span) -> Result<Self, ModelError> {
        self.agent(id)?;
        let mut by_input: Vec<AgentInterval> = self.agents.clone();
        by_input.sort_by_key(|a| a.id);
        let spans = by_input
            .into_iter()
            .map(|a| if a.id == id { span } else { a.span })
            .collect();
        Instance::new(spans, self.covering_length)
    }

    /// Total uncovered length under the given placement.
    pub fn social_cost(&self, placement: &Placement) -> Coord {
        let window = placement.span(self.covering_length);
        self.agents
            .iter()
            .map(|a| a.length() - overlap(&a.span, &window))
            .sum()
    }

    /// Total covered length under the given placement. Satisfies
    /// `social_welfare + social_cost == total_length` exactly.
    pub fn social_welfare(&self, placement: &Placement) -> Coord {
        let window = placement.span(self.covering_length);
        self.agents.iter().map(|a| overlap(&a.span, &window)).sum()
    }

    /// Probability-weighted social cost over the lottery's placements.
    pub fn expected_social_cost(&self, lottery: &Lottery) -> Coord {
        lottery
            .entries()
            .iter()
            .map(|e| e.probability * self.social_cost(&e.placement))
            .sum()
    }
}

/// Cost of a single agent: the part of her interval the covering interval
/// does not reach, `length - overlap`.
pub fn agent_cost(agent: &AgentInterval, placement: &Placement, covering_length: Coord) -> Coord {
    span_cost(&agent.span, placement, covering_length)
}

/// [`agent_cost`] for an anonymous interval.
pub fn span_cost(span: &Span, placement: &Placement, covering_length: Coord) -> Coord {
    span.length() - overlap(span, &placement.span(covering_length))
}

/// Expected cost of an interval under a lottery over placements.
pub fn expected_span_cost(span: &Span, lottery: &Lottery, covering_length: Coord) -> Coord {
    lottery
        .entries()
        .iter()
        .map(|e| e.probability * span_cost(span, &e.placement, covering_length))
        .sum()
}

/// One placement of a lottery together with its probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LotteryEntry {
    pub placement: Placement,
    pub probability: Coord,
}

/// Finite probability distribution over placements.
///
/// Canonical form: entries sorted by placement, duplicate placements merged
/// by summing probabilities, all probabilities strictly positive, total
/// exactly 1. Two lotteries are equal iff they are the same distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lottery {
    entries: Vec<LotteryEntry>,
}

impl Lottery {
    pub fn new(entries: Vec<(Placement, Coord)>) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::EmptyLottery);
        }
        for (_, p) in &entries {
            if !p.is_positive() {
                return Err(ModelError::NonPositiveProbability(p.to_string()));
            }
        }
        let total: Coord = entries.iter().map(|(_, p)| *p).sum();
        if total != Coord::one() {
            return Err(ModelError::ProbabilitySum(total.to_string()));
        }
        let mut sorted = entries;
        sorted.sort_by_key(|(placement, _)| *placement);
        let mut merged: Vec<LotteryEntry> = Vec::with_capacity(sorted.len());
        for (placement, probability) in sorted {
            match merged.last_mut() {
                Some(last) if last.placement == placement => {
                    last.probability += probability;
                }
                _ => merged.push(LotteryEntry {
                    placement,
                    probability,
                }),
            }
        }
        Ok(Lottery { entries: merged })
    }

    /// A deterministic outcome as a single-entry lottery.
    pub fn degenerate(placement: Placement) -> Self {
        Lottery {
            entries: vec![LotteryEntry {
                placement,
                probability: Coord::one(),
            }],
        }
    }

    pub fn entries(&self) -> &[LotteryEntry] {
        &self.entries
    }

    /// The single placement, when the lottery is deterministic.
    pub fn as_placement(&self) -> Option<Placement> {
        match self.entries.as_slice() {
            [only] => Some(only.placement),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i128, d: i128) -> Coord {
        Coord::frac(n, d)
    }

    fn span(s: Coord, len: Coord) -> Span {
        Span::new(s, len).unwrap()
    }

    fn unit_span(s: i128, d: i128) -> Span {
        span(c(s, d), Coord::one())
    }

    #[test]
    fn overlap_examples() {
        // [0,1] vs [1/2,3/2] -> 1/2
        assert_eq!(overlap(&unit_span(0, 1), &unit_span(1, 2)), c(1, 2));
        // identity
        assert_eq!(overlap(&unit_span(0, 1), &unit_span(0, 1)), Coord::one());
        // disjoint
        assert_eq!(overlap(&unit_span(0, 1), &unit_span(2, 1)), Coord::zero());
        // symmetric
        assert_eq!(
            overlap(&unit_span(1, 2), &unit_span(0, 1)),
            overlap(&unit_span(0, 1), &unit_span(1, 2))
        );
    }

    #[test]
    fn agent_cost_examples() {
        let one = Coord::one();
        let agent = AgentInterval {
            id: 0,
            span: unit_span(0, 1),
        };
        assert_eq!(
            agent_cost(&agent, &Placement::new(c(0, 1)), one),
            Coord::zero()
        );
        assert_eq!(agent_cost(&agent, &Placement::new(c(3, 4)), one), c(3, 4));
        // agent [1,3/2] of length 1/2, placement [0,1]: point contact, zero overlap
        let short = AgentInterval {
            id: 0,
            span: span(c(1, 1), c(1, 2)),
        };
        assert_eq!(agent_cost(&short, &Placement::new(c(0, 1)), one), c(1, 2));
    }

    #[test]
    fn social_cost_examples() {
        let inst = Instance::unit(&[c(0, 1), c(1, 1)]).unwrap();
        assert_eq!(inst.social_cost(&Placement::new(c(1, 2))), Coord::one());
        // placement disjoint from all agents costs the total length
        assert_eq!(
            inst.social_cost(&Placement::new(c(10, 1))),
            inst.total_length()
        );
    }

    #[test]
    fn welfare_complements_cost() {
        let inst = Instance::new(
            vec![span(c(0, 1), c(3, 2)), span(c(1, 1), c(1, 2))],
            Coord::one(),
        )
        .unwrap();
        for s in [-2, 0, 1, 3] {
            let p = Placement::new(c(s, 1));
            assert_eq!(
                inst.social_welfare(&p) + inst.social_cost(&p),
                inst.total_length()
            );
        }
        let single = Instance::unit(&[c(5, 1)]).unwrap();
        assert_eq!(
            single.social_welfare(&Placement::new(c(5, 1))),
            Coord::one()
        );
        assert_eq!(
            single.social_welfare(&Placement::new(c(9, 1))),
            Coord::zero()
        );
    }

    #[test]
    fn instance_sorts_and_keeps_input_ids() {
        let inst = Instance::unit(&[c(2, 1), c(0, 1), c(2, 1)]).unwrap();
        let order: Vec<(i128, usize)> = inst
            .agents()
            .iter()
            .map(|a| (a.s().numerator(), a.id))
            .collect();
        assert_eq!(order, vec![(0, 1), (2, 0), (2, 2)]);
        assert!(inst.equal_unit());
    }

    #[test]
    fn with_report_replaces_one_agent_and_keeps_ids() {
        let inst = Instance::unit(&[c(0, 1), c(2, 1)]).unwrap();
        let moved = inst.with_report(0, unit_span(5, 1)).unwrap();
        assert_eq!(moved.agent(0).unwrap().s(), c(5, 1));
        assert_eq!(moved.agent(1).unwrap().s(), c(2, 1));
        assert_eq!(moved.agents()[0].id, 1);
        assert!(matches!(
            inst.with_report(7, unit_span(0, 1)),
            Err(ModelError::UnknownAgent(7))
        ));
    }

    #[test]
    fn instance_rejects_invalid_input() {
        assert!(matches!(
            Instance::new(vec![], Coord::one()),
            Err(ModelError::EmptyInstance)
        ));
        assert!(matches!(
            Span::new(c(0, 1), Coord::zero()),
            Err(ModelError::NonPositiveLength(_))
        ));
        assert!(matches!(
            Instance::new(vec![unit_span(0, 1)], Coord::zero()),
            Err(ModelError::NonPositiveCoveringLength(_))
        ));
    }

    #[test]
    fn lottery_canonicalizes_and_validates() {
        let p0 = Placement::new(c(0, 1));
        let p1 = Placement::new(c(1, 1));
        let lot = Lottery::new(vec![(p1, c(1, 3)), (p0, c(1, 3)), (p1, c(1, 3))]).unwrap();
        assert_eq!(lot.entries().len(), 2);
        assert_eq!(lot.entries()[0].placement, p0);
        assert_eq!(lot.entries()[0].probability, c(1, 3));
        assert_eq!(lot.entries()[1].probability, c(2, 3));

        assert!(matches!(
            Lottery::new(vec![(p0, c(1, 2))]),
            Err(ModelError::ProbabilitySum(_))
        ));
        assert!(matches!(
            Lottery::new(vec![(p0, Coord::zero()), (p1, Coord::one())]),
            Err(ModelError::NonPositiveProbability(_))
        ));
        assert!(matches!(
            Lottery::new(vec![]),
            Err(ModelError::EmptyLottery)
        ));
    }

    #[test]
    fn expected_social_cost_of_degenerate_lottery_matches_social_cost() {
        let inst = Instance::unit(&[c(0, 1), c(3, 1)]).unwrap();
        let p = Placement::new(c(0, 1));
        let lot = Lottery::degenerate(p);
        assert_eq!(inst.expected_social_cost(&lot), inst.social_cost(&p));
    }
}
