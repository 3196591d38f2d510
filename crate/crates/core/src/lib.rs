//! Market-equilibrium solvers and an agent-based tenant-sorting simulator
//! for short-term-rental externalities in apartment buildings.
//!
//! A market has `A` buildings of `n` tenants each. Hosting a short-term
//! guest earns the listing price but imposes a cost `c` on every tenant of
//! the building. The crate solves three closed regimes:
//!
//! - **free listing**: no owner control; price clears `D(p) = A·n·f(p)`;
//! - **sorting equilibrium**: owners set building policies, tenants sort,
//!   and rents equalize, pinning the price at the social cost `c·n`;
//! - **planner optimum**: the allowing fraction maximizing total welfare.
//!
//! The sorting equilibrium and the planner optimum coincide; the solvers
//! reach them by independent routes so the agreement is testable. The
//! [`abm`] module simulates the sorting dynamics round by round, including
//! moving-cost and loss-aversion frictions that leave too few buildings
//! allowing.

// Validation code negates comparisons (`!(x > 0.0)`) on purpose: NaN must
// fail every bound check, which the un-negated form would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abm;
pub mod curves;
pub mod equilibrium;
pub mod output;
pub mod scenario;
pub mod welfare;

pub use curves::{CurveError, DemandCurve, SupplyPropensity};
pub use equilibrium::{
    bracketed_root, golden_section_max, solve_free_listing, solve_planner_optimum,
    solve_sorting_equilibrium, Corner, FreeListingEquilibrium, MarketParams, PlannerSolution,
    SolveError, SortingEquilibrium, DEFAULT_TOL,
};
pub use scenario::{load_scenario, run_scenario, run_sweep, Scenario, ScenarioError};
pub use welfare::{compare_regimes, is_listing_efficient, welfare_at_listings, RegimeComparison};
