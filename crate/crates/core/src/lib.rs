//! Interval covering with strategic agents: exact model, optimal solver,
//! order-statistic mechanisms, and audit machinery.
//!
//! A set of agents each reports an interval on the real line; a covering
//! interval of fixed length must be placed, and an agent's cost is the part
//! of her interval left uncovered. The [`solver`] computes the social-cost
//! optimum exactly; [`mechanisms`] implements placement rules that no agent
//! can game by misreporting; [`audit`] measures how far those rules land
//! from the optimum and hunts for profitable misreports, adversarially and
//! exhaustively; [`gen`] builds the worst-case instance families those
//! bounds are attained on. Everything computes in exact rational arithmetic
//! ([`Coord`]); floats never enter any decision.

pub mod audit;
pub mod coord;
pub mod gen;
pub mod io;
pub mod mechanisms;
pub mod model;
pub mod reproduce;
pub mod solver;

pub use coord::{Coord, CoordError};
pub use model::{
    agent_cost, expected_span_cost, overlap, span_cost, AgentInterval, Instance, Lottery,
    LotteryEntry, ModelError, Placement, Span,
};
