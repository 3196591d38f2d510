//! Surplus accounting: total welfare at a listing level, the marginal
//! efficiency test, and the free-listing vs. sorting regime comparison.

use serde::Serialize;

use crate::curves::{CurveError, DemandCurve, SupplyPropensity};
use crate::equilibrium::{
    solve_free_listing, solve_sorting_equilibrium, MarketParams, SolveError,
};

/// Default half-width of the `Marginal` band in [`is_listing_efficient`].
pub const DEFAULT_MARGINAL_TOL: f64 = 1e-9;

/// Whether one listing at price `p` raises, leaves unchanged, or lowers
/// total welfare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Beneficial,
    Marginal,
    Harmful,
}

/// Welfare levels across the two regimes and the gap between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeComparison {
    pub welfare_free: f64,
    pub welfare_sorting: f64,
    pub deadweight_loss: f64,
    /// Free-listing quantity minus the sorting quantity; positive when the
    /// uncontrolled market over-lists.
    pub overlisting: f64,
}

/// Total welfare of `listings` listings: gross benefit minus `L·c·n`.
pub fn welfare_at_listings(
    params: &MarketParams,
    demand: &DemandCurve,
    listings: f64,
) -> Result<f64, CurveError> {
    let an = params.total_tenants();
    if !(0.0..=an).contains(&listings) {
        return Err(CurveError::InvalidParameter(format!(
            "listings must lie in [0, {an}], got {listings}"
        )));
    }
    Ok(demand.gross_benefit(listings)? - listings * params.social_cost())
}

/// The marginal efficiency test: a listing at price `p` is beneficial when
/// the private benefit exceeds the social cost `c·n`.
pub fn is_listing_efficient(p: f64, params: &MarketParams, tol: f64) -> Verdict {
    let cn = params.social_cost();
    if p > cn + tol {
        Verdict::Beneficial
    } else if p < cn - tol {
        Verdict::Harmful
    } else {
        Verdict::Marginal
    }
}

/// Solve both regimes and compare their welfare.
pub fn compare_regimes(
    params: &MarketParams,
    demand: &DemandCurve,
    supply: &SupplyPropensity,
    tol: f64,
) -> Result<RegimeComparison, SolveError> {
    let free = solve_free_listing(params, demand, supply, tol)?;
    let sorting = solve_sorting_equilibrium(params, demand, tol)?;
    let an = params.total_tenants();
    let welfare_free = welfare_at_listings(params, demand, free.listings.min(an))?;
    let welfare_sorting = welfare_at_listings(params, demand, sorting.listings)?;
    Ok(RegimeComparison {
        welfare_free,
        welfare_sorting,
        deadweight_loss: welfare_sorting - welfare_free,
        overlisting: free.listings - sorting.listings,
    })
}
