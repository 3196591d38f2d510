//! Closed-regime solvers: free-listing market clearing, the owner-policy
//! sorting equilibrium, and the social planner's optimum.
//!
//! The sorting solver root-finds the tenant indifference condition
//! `P(θ·A·n) = c·n` with bisection; the planner maximizes the welfare
//! integral with golden-section search. The two routes share no code path,
//! so their agreement is a meaningful check rather than a tautology.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{CurveError, DemandCurve, SupplyPropensity};

/// Default bracket-width tolerance for the regime solvers.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },
    #[error("non-finite objective evaluation at x = {0}")]
    NonFinite(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("could not bracket the market-clearing price below {0}")]
    UnboundedBracket(f64),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Primitives of one market: `A` buildings of `n` tenants each, base
/// apartment utility `u0`, and per-listing-per-tenant externality cost `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    pub num_buildings: u32,
    pub tenants_per_building: u32,
    pub base_utility: f64,
    pub externality_cost: f64,
}

impl MarketParams {
    pub fn validate(&self) -> Result<(), CurveError> {
        if self.num_buildings < 1 {
            return Err(CurveError::InvalidParameter(
                "num_buildings must be at least 1".into(),
            ));
        }
        if self.tenants_per_building < 1 {
            return Err(CurveError::InvalidParameter(
                "tenants_per_building must be at least 1".into(),
            ));
        }
        if !(self.externality_cost >= 0.0) || !self.externality_cost.is_finite() {
            return Err(CurveError::InvalidParameter(format!(
                "externality_cost must be finite and nonnegative, got {}",
                self.externality_cost
            )));
        }
        if !self.base_utility.is_finite() {
            return Err(CurveError::InvalidParameter(format!(
                "base_utility must be finite, got {}",
                self.base_utility
            )));
        }
        Ok(())
    }

    /// Total tenants in the market, `A·n`.
    pub fn total_tenants(&self) -> f64 {
        self.num_buildings as f64 * self.tenants_per_building as f64
    }

    /// Social cost of one listing, `c·n`.
    pub fn social_cost(&self) -> f64 {
        self.externality_cost * self.tenants_per_building as f64
    }
}

/// Outcome when owners exert no control and any willing tenant lists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeListingEquilibrium {
    pub price: f64,
    pub listings: f64,
    /// `D(p) - L` at the returned price; zero up to solver tolerance except
    /// in the degenerate excess-supply-at-zero-price corner.
    pub excess_demand_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    Interior,
    AllForbid,
    AllAllow,
}

impl std::fmt::Display for Corner {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Corner::Interior => "interior",
            Corner::AllForbid => "all_forbid",
            Corner::AllAllow => "all_allow",
        })
    }
}

/// Owner-policy sorting equilibrium: the fraction of buildings allowing
/// listing at which tenants are indifferent across building types.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SortingEquilibrium {
    pub theta_star: f64,
    pub price: f64,
    pub listings: f64,
    pub corner: Corner,
}

/// Social planner's choice of the allowing fraction and the welfare there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannerSolution {
    pub theta_opt: f64,
    pub welfare: f64,
}

/// Bisection root finder on a sign-changing bracket.
///
/// Deterministic: identical inputs give bit-identical results.
pub fn bracketed_root<F>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SolveError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(SolveError::BadTolerance(tol));
    }
    let mut a = lo;
    let mut b = hi;
    let ga = g(a);
    if !ga.is_finite() {
        return Err(SolveError::NonFinite(a));
    }
    if ga == 0.0 {
        return Ok(a);
    }
    let gb = g(b);
    if !gb.is_finite() {
        return Err(SolveError::NonFinite(b));
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if (ga > 0.0) == (gb > 0.0) {
        return Err(SolveError::NoBracket { lo, hi });
    }
    let a_positive = ga > 0.0;
    loop {
        let mid = 0.5 * (a + b);
        if b - a <= tol || mid <= a || mid >= b {
            return Ok(mid);
        }
        let gm = g(mid);
        if !gm.is_finite() {
            return Err(SolveError::NonFinite(mid));
        }
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm > 0.0) == a_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
}

/// Golden-section maximization of a concave function on `[lo, hi]`.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SolveError>
where
    F: Fn(f64) -> f64,
{
    if !(tol > 0.0) {
        return Err(SolveError::BadTolerance(tol));
    }
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut x1 = b - INVPHI * (b - a);
    let mut x2 = a + INVPHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    if !f1.is_finite() {
        return Err(SolveError::NonFinite(x1));
    }
    if !f2.is_finite() {
        return Err(SolveError::NonFinite(x2));
    }
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INVPHI * (b - a);
            f1 = f(x1);
            if !f1.is_finite() {
                return Err(SolveError::NonFinite(x1));
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INVPHI * (b - a);
            f2 = f(x2);
            if !f2.is_finite() {
                return Err(SolveError::NonFinite(x2));
            }
        }
    }
    Ok(0.5 * (a + b))
}

// Constant-elasticity demand is unbounded at p = 0; start the price bracket
// just above zero so every evaluation is finite.
fn price_bracket_lo(demand: &DemandCurve) -> f64 {
    match demand {
        DemandCurve::Linear { .. } => 0.0,
        DemandCurve::ConstantElasticity { .. } => 1e-9,
    }
}

/// Solve the no-control market clearing `D(p) = A·n·f(p)`.
pub fn solve_free_listing(
    params: &MarketParams,
    demand: &DemandCurve,
    supply: &SupplyPropensity,
    tol: f64,
) -> Result<FreeListingEquilibrium, SolveError> {
    params.validate()?;
    demand.validate()?;
    supply.validate()?;
    let an = params.total_tenants();
    let g = |p: f64| {
        demand.quantity(p).expect("price is nonnegative on the bracket")
            - an * supply.fraction(p).expect("price is nonnegative on the bracket")
    };

    let lo = price_bracket_lo(demand);
    if g(lo) < 0.0 {
        // Supply exceeds demand even at a zero price: no clearing price with
        // positive excess demand exists. Report the floor.
        let listings = an * supply.fraction(lo)?;
        return Ok(FreeListingEquilibrium {
            price: lo,
            listings,
            excess_demand_residual: demand.quantity(lo)? - listings,
        });
    }

    let hi = match demand {
        DemandCurve::Linear { .. } => demand.choke_price(),
        DemandCurve::ConstantElasticity { .. } => {
            let mut hi = 1.0;
            while g(hi) > 0.0 {
                hi *= 2.0;
                if hi > 1e12 {
                    return Err(SolveError::UnboundedBracket(hi));
                }
            }
            hi
        }
    };

    let price = bracketed_root(g, lo, hi, tol)?;
    let listings = an * supply.fraction(price)?;
    Ok(FreeListingEquilibrium {
        price,
        listings,
        excess_demand_residual: demand.quantity(price)? - listings,
    })
}

/// Solve the sorting equilibrium from the indifference condition
/// `P(θ·A·n) = c·n`, with explicit corner handling.
pub fn solve_sorting_equilibrium(
    params: &MarketParams,
    demand: &DemandCurve,
    tol: f64,
) -> Result<SortingEquilibrium, SolveError> {
    params.validate()?;
    demand.validate()?;
    let an = params.total_tenants();
    let cn = params.social_cost();

    // Ties P(0) = cn count as interior with theta_star = 0.
    if demand.choke_price() < cn {
        return Ok(SortingEquilibrium {
            theta_star: 0.0,
            price: demand.choke_price(),
            listings: 0.0,
            corner: Corner::AllForbid,
        });
    }
    let price_at_full = demand.price(an)?;
    if price_at_full >= cn {
        return Ok(SortingEquilibrium {
            theta_star: 1.0,
            price: price_at_full,
            listings: an,
            corner: Corner::AllAllow,
        });
    }

    let g = |theta: f64| demand.price(theta * an).expect("theta in [0, 1]") - cn;
    let lo = match demand {
        DemandCurve::Linear { .. } => 0.0,
        // P(0) is infinite for constant-elasticity demand.
        DemandCurve::ConstantElasticity { .. } => 1e-15,
    };
    let theta_star = if lo > 0.0 && g(lo) <= 0.0 {
        lo
    } else {
        bracketed_root(g, lo, 1.0, tol)?
    };
    Ok(SortingEquilibrium {
        theta_star,
        price: demand.price(theta_star * an)?,
        listings: theta_star * an,
        corner: Corner::Interior,
    })
}

/// Maximize `W(θ) = gross_benefit(θ·A·n) − θ·A·n·c·n` over `θ ∈ [0, 1]`.
pub fn solve_planner_optimum(
    params: &MarketParams,
    demand: &DemandCurve,
    tol: f64,
) -> Result<PlannerSolution, SolveError> {
    params.validate()?;
    demand.validate()?;
    let an = params.total_tenants();
    let cn = params.social_cost();
    // Surface the divergent-integral configuration before searching.
    demand.gross_benefit(an)?;
    let objective = |theta: f64| {
        let listings = theta * an;
        demand.gross_benefit(listings).expect("checked above") - listings * cn
    };
    let theta_opt = golden_section_max(objective, 0.0, 1.0, tol)?;
    Ok(PlannerSolution {
        theta_opt,
        welfare: objective(theta_opt),
    })
}
