//! Truthful mechanisms as pluggable procedures from instances to placements
//! or lotteries.
//!
//! The deterministic mechanisms here anchor the covering interval on a
//! reported interval, so the selected agent's cost is exactly zero. The
//! randomized ones are finite mixtures of order statistics; their raw
//! [`Realization`] list (before merging coinciding placements) carries the
//! statistic index as a label, which lets audits couple realizations across
//! a misreport and test universal truthfulness rather than truthfulness in
//! expectation only.

use std::fmt;
use std::str::FromStr;

use crate::coord::Coord;
use crate::model::{Instance, Lottery, ModelError, Placement};

/// Errors from applying a mechanism to an instance.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MechanismError {
    #[error("statistic index {k} out of range 1..={n}")]
    StatisticOutOfRange { k: usize, n: usize },
    #[error("mechanism requires every interval length to equal the covering length")]
    UnequalLengths,
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weights must be non-negative, got {0}")]
    NegativeWeight(String),
    #[error("weights must sum to 1, got {0}")]
    WeightSum(String),
    #[error("mechanism {0:?} is randomized; a deterministic placement was required")]
    NotDeterministic(String),
    #[error("unknown mechanism spec {0:?}")]
    UnknownSpec(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// One outcome of a randomized mechanism: a labelled placement with its
/// probability. Labels couple realizations across instances in audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Realization {
    pub label: usize,
    pub placement: Placement,
    pub probability: Coord,
}

/// A mechanism, viewed as a finite labelled distribution over placements.
/// Deterministic mechanisms return exactly one realization of probability 1.
pub trait Mechanism {
    /// Stable identifier used in reports and CLI selection.
    fn id(&self) -> String;

    /// Raw realizations, before merging coinciding placements.
    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError>;

    /// The output distribution in canonical (merged) form.
    fn lottery(&self, inst: &Instance) -> Result<Lottery, MechanismError> {
        let entries = self
            .realizations(inst)?
            .into_iter()
            .map(|r| (r.placement, r.probability))
            .collect();
        Ok(Lottery::new(entries)?)
    }

    /// The single placement of a deterministic mechanism; an error when the
    /// output distribution is not a point mass.
    fn deterministic_placement(&self, inst: &Instance) -> Result<Placement, MechanismError> {
        self.lottery(inst)?
            .as_placement()
            .ok_or_else(|| MechanismError::NotDeterministic(self.id()))
    }
}

impl<M: Mechanism + ?Sized> Mechanism for &M {
    fn id(&self) -> String {
        (**self).id()
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        (**self).realizations(inst)
    }
}

fn require_equal_lengths(inst: &Instance) -> Result<(), MechanismError> {
    if inst.lengths_equal_covering() {
        Ok(())
    } else {
        Err(MechanismError::UnequalLengths)
    }
}

/// Places the covering interval on the interval of the agent with the k-th
/// smallest left endpoint (1-indexed; ties broken by ascending input id).
/// Requires every interval length to equal the covering length.
pub fn kth_statistic(inst: &Instance, k: usize) -> Result<Placement, MechanismError> {
    require_equal_lengths(inst)?;
    if k == 0 || k > inst.n() {
        return Err(MechanismError::StatisticOutOfRange { k, n: inst.n() });
    }
    Ok(Placement::new(inst.agents()[k - 1].s()))
}

/// The median statistic index: `n/2` for even `n`, `(n+1)/2` for odd `n`
/// (1-indexed).
pub fn median_index(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n / 2
    } else {
        n.div_ceil(2)
    }
}

/// The median mechanism: the k-th ordered statistic at the median index.
pub fn median_placement(inst: &Instance) -> Result<Placement, MechanismError> {
    kth_statistic(inst, median_index(inst.n()))
}

/// The three statistic indices the uniform-statistic mechanism mixes over:
/// `ceil(n/3)`, the median index, and `ceil(2n/3)`. The ceilings keep the
/// triple ordered for every `n >= 1`.
pub fn uniform_statistic_indices(n: usize) -> (usize, usize, usize) {
    (n.div_ceil(3), median_index(n), (2 * n).div_ceil(3))
}

/// Uniform mixture over the three statistics of
/// [`uniform_statistic_indices`], each with probability 1/3; coinciding
/// placements merge in the returned lottery.
pub fn uniform_statistic(inst: &Instance) -> Result<Lottery, MechanismError> {
    UniformStatistic.lottery(inst)
}

/// Places the covering interval at the starting position of the leftmost
/// agent whose prefix of interval lengths (in instance order) reaches half
/// the total length. Interval lengths may differ; this is the only
/// mechanism here that does not require equal lengths.
pub fn weighted_median(inst: &Instance) -> Placement {
    let total = inst.total_length();
    let mut prefix = Coord::zero();
    for agent in inst.agents() {
        prefix += agent.length();
        // First agent whose prefix reaches half of the total.
        if prefix + prefix >= total {
            return Placement::new(agent.s());
        }
    }
    unreachable!("the full prefix equals the total length")
}

fn check_weights(inst: &Instance, weights: &[Coord]) -> Result<(), MechanismError> {
    if weights.len() != inst.n() {
        return Err(MechanismError::WeightCount {
            expected: inst.n(),
            got: weights.len(),
        });
    }
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(MechanismError::NegativeWeight(w.to_string()));
    }
    let total: Coord = weights.iter().copied().sum();
    if total != Coord::one() {
        return Err(MechanismError::WeightSum(total.to_string()));
    }
    Ok(())
}

/// Mixture of order statistics: weight `weights[k-1]` on the k-th statistic.
/// Weights must be non-negative and sum to 1.
pub fn convex_combination(inst: &Instance, weights: &[Coord]) -> Result<Lottery, MechanismError> {
    ConvexCombination {
        weights: weights.to_vec(),
    }
    .lottery(inst)
}

/// The k-th ordered statistic as a mechanism value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KthStatistic(pub usize);

impl Mechanism for KthStatistic {
    fn id(&self) -> String {
        format!("kth:{}", self.0)
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        Ok(vec![Realization {
            label: self.0,
            placement: kth_statistic(inst, self.0)?,
            probability: Coord::one(),
        }])
    }
}

/// The median mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Median;

impl Mechanism for Median {
    fn id(&self) -> String {
        "median".to_string()
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        let k = median_index(inst.n());
        Ok(vec![Realization {
            label: k,
            placement: kth_statistic(inst, k)?,
            probability: Coord::one(),
        }])
    }
}

/// The uniform-statistic mechanism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformStatistic;

impl Mechanism for UniformStatistic {
    fn id(&self) -> String {
        "uniform-statistic".to_string()
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        let (l, m, r) = uniform_statistic_indices(inst.n());
        let third = Coord::frac(1, 3);
        [l, m, r]
            .into_iter()
            .map(|k| {
                Ok(Realization {
                    label: k,
                    placement: kth_statistic(inst, k)?,
                    probability: third,
                })
            })
            .collect()
    }
}

/// The weighted-median mechanism for known, possibly unequal lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedMedian;

impl Mechanism for WeightedMedian {
    fn id(&self) -> String {
        "weighted-median".to_string()
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        Ok(vec![Realization {
            label: 0,
            placement: weighted_median(inst),
            probability: Coord::one(),
        }])
    }
}

/// A convex combination of order-statistic mechanisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexCombination {
    pub weights: Vec<Coord>,
}

impl Mechanism for ConvexCombination {
    fn id(&self) -> String {
        let parts: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        format!("convex:{}", parts.join(","))
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        check_weights(inst, &self.weights)?;
        let mut out = Vec::new();
        for (i, &w) in self.weights.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            let k = i + 1;
            out.push(Realization {
                label: k,
                placement: kth_statistic(inst, k)?,
                probability: w,
            });
        }
        Ok(out)
    }
}

/// Mechanism selection as it appears on the command line:
/// `kth:<k>`, `median`, `uniform-statistic`, `weighted-median`, or
/// `convex:<p1,...,pn>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MechanismId {
    KthStatistic(usize),
    Median,
    UniformStatistic,
    WeightedMedian,
    ConvexCombination(Vec<Coord>),
}

impl Mechanism for MechanismId {
    fn id(&self) -> String {
        match self {
            MechanismId::KthStatistic(k) => KthStatistic(*k).id(),
            MechanismId::Median => Median.id(),
            MechanismId::UniformStatistic => UniformStatistic.id(),
            MechanismId::WeightedMedian => WeightedMedian.id(),
            MechanismId::ConvexCombination(w) => ConvexCombination { weights: w.clone() }.id(),
        }
    }

    fn realizations(&self, inst: &Instance) -> Result<Vec<Realization>, MechanismError> {
        match self {
            MechanismId::KthStatistic(k) => KthStatistic(*k).realizations(inst),
            MechanismId::Median => Median.realizations(inst),
            MechanismId::UniformStatistic => UniformStatistic.realizations(inst),
            MechanismId::WeightedMedian => WeightedMedian.realizations(inst),
            MechanismId::ConvexCombination(w) => {
                ConvexCombination { weights: w.clone() }.realizations(inst)
            }
        }
    }
}

impl FromStr for MechanismId {
    type Err = MechanismError;

    fn from_str(s: &str) -> Result<Self, MechanismError> {
        let unknown = || MechanismError::UnknownSpec(s.to_string());
        match s {
            "median" => return Ok(MechanismId::Median),
            "uniform-statistic" => return Ok(MechanismId::UniformStatistic),
            "weighted-median" => return Ok(MechanismId::WeightedMedian),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("kth:") {
            let k: usize = k.parse().map_err(|_| unknown())?;
            return Ok(MechanismId::KthStatistic(k));
        }
        if let Some(list) = s.strip_prefix("convex:") {
            let weights = list
                .split(',')
                .map(|w| w.parse::<Coord>().map_err(|_| unknown()))
                .collect::<Result<Vec<_>, _>>()?;
            if weights.is_empty() {
                return Err(unknown());
            }
            return Ok(MechanismId::ConvexCombination(weights));
        }
        Err(unknown())
    }
}

impl fmt::Display for MechanismId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}
