//! Agent-based tenant-sorting simulation.
//!
//! Each round, in order: tenants in allowing buildings list when their
//! reservation price is at or below the market price; the price adjusts
//! toward clearing (tatonnement); landlords move rent premiums toward the
//! surplus their rosters can bear; unregulated landlords flip policy toward
//! the higher-rent side with probability proportional to the rent gap; and
//! mismatched tenants swap buildings pairwise when both sides gain net of
//! moving costs and loss aversion.
//!
//! A run is strictly sequential and deterministic given its seed. Independent
//! runs share nothing and may execute concurrently.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{DemandCurve, SupplyPropensity};
use crate::equilibrium::MarketParams;

/// Rounds of unchanged theta (and quiet prices) required to declare
/// convergence.
pub const CONVERGENCE_WINDOW: usize = 50;

#[derive(Debug, Error)]
pub enum AbmError {
    #[error("invalid ABM config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Allow,
    Forbid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tenant {
    pub id: u32,
    pub reservation_price: f64,
    pub building_id: u32,
    pub is_listing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Building {
    pub id: u32,
    pub policy: Policy,
    /// Regulated buildings (e.g. rent-stabilized) always forbid.
    pub regulated: bool,
    /// Rent difference vs. forbidding buildings; forbidding buildings are
    /// the zero baseline.
    pub rent_premium: f64,
    pub roster: Vec<u32>,
}

/// Simulation parameters beyond the market primitives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbmConfig {
    /// Tatonnement step: price moves by `price_step * excess demand`.
    pub price_step: f64,
    /// Utility cost of switching buildings.
    pub moving_cost: f64,
    /// Weight on the loss side of a tenant's move comparison; 1 is neutral.
    pub loss_aversion: f64,
    /// Initial within-building correlation of tenant types: 0 is fully
    /// mixed, 1 is perfectly clustered.
    pub mixing_correlation: f64,
    /// Fraction of buildings that always forbid.
    pub regulated_fraction: f64,
    pub max_rounds: u32,
    /// Per-round price movement below which the price is considered quiet.
    pub convergence_tol: f64,
    pub seed: u64,
    /// Per-round fraction of the gap closed when premiums track surplus.
    pub rent_adjust_rate: f64,
    /// Flip probability per unit of rent gap.
    pub policy_switch_gain: f64,
    /// Flip probability when no building allows and there is no rent signal.
    pub exploration_floor: f64,
    /// Starting market price; defaults to the price clearing half the market.
    pub initial_price: Option<f64>,
}

impl Default for AbmConfig {
    fn default() -> Self {
        AbmConfig {
            price_step: 0.02,
            moving_cost: 0.0,
            loss_aversion: 1.0,
            mixing_correlation: 0.0,
            regulated_fraction: 0.0,
            max_rounds: 500,
            convergence_tol: 1e-4,
            seed: 0,
            rent_adjust_rate: 0.25,
            policy_switch_gain: 0.2,
            exploration_floor: 0.01,
            initial_price: None,
        }
    }
}

impl AbmConfig {
    pub fn validate(&self) -> Result<(), AbmError> {
        if !(self.price_step > 0.0) || !self.price_step.is_finite() {
            return Err(AbmError::Config(format!(
                "price_step must be positive, got {}",
                self.price_step
            )));
        }
        if !(self.moving_cost >= 0.0) {
            return Err(AbmError::Config(format!(
                "moving_cost must be nonnegative, got {}",
                self.moving_cost
            )));
        }
        if !(self.loss_aversion >= 1.0) {
            return Err(AbmError::Config(format!(
                "loss_aversion must be at least 1, got {}",
                self.loss_aversion
            )));
        }
        if !(0.0..=1.0).contains(&self.mixing_correlation) {
            return Err(AbmError::Config(format!(
                "mixing_correlation must lie in [0, 1], got {}",
                self.mixing_correlation
            )));
        }
        if !(0.0..1.0).contains(&self.regulated_fraction) {
            return Err(AbmError::Config(format!(
                "regulated_fraction must lie in [0, 1), got {}",
                self.regulated_fraction
            )));
        }
        if self.max_rounds == 0 {
            return Err(AbmError::Config("max_rounds must be positive".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(AbmError::Config(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        if !(self.rent_adjust_rate > 0.0 && self.rent_adjust_rate <= 1.0) {
            return Err(AbmError::Config(format!(
                "rent_adjust_rate must lie in (0, 1], got {}",
                self.rent_adjust_rate
            )));
        }
        if !(self.policy_switch_gain > 0.0) || !self.policy_switch_gain.is_finite() {
            return Err(AbmError::Config(format!(
                "policy_switch_gain must be positive, got {}",
                self.policy_switch_gain
            )));
        }
        if !(0.0..=1.0).contains(&self.exploration_floor) {
            return Err(AbmError::Config(format!(
                "exploration_floor must lie in [0, 1], got {}",
                self.exploration_floor
            )));
        }
        if let Some(p0) = self.initial_price {
            if !(p0 >= 0.0) || !p0.is_finite() {
                return Err(AbmError::Config(format!(
                    "initial_price must be finite and nonnegative, got {p0}"
                )));
            }
        }
        Ok(())
    }
}

/// Full market state between rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SortingState {
    pub round: u32,
    pub price: f64,
    pub buildings: Vec<Building>,
    pub tenants: Vec<Tenant>,
    pub rng_seed: u64,
    rng: ChaCha8Rng,
}

impl SortingState {
    /// Share of buildings currently allowing listing.
    pub fn theta(&self) -> f64 {
        let allowing = self.buildings.iter().filter(|b| b.policy == Policy::Allow).count();
        allowing as f64 / self.buildings.len() as f64
    }

    pub fn allowing_count(&self) -> usize {
        self.buildings.iter().filter(|b| b.policy == Policy::Allow).count()
    }

    pub fn listings_count(&self) -> usize {
        self.tenants.iter().filter(|t| t.is_listing).count()
    }

    pub fn mean_rent_premium(&self) -> f64 {
        let allowing: Vec<_> = self
            .buildings
            .iter()
            .filter(|b| b.policy == Policy::Allow)
            .collect();
        if allowing.is_empty() {
            0.0
        } else {
            allowing.iter().map(|b| b.rent_premium).sum::<f64>() / allowing.len() as f64
        }
    }
}

/// One recorded round of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub round: u32,
    pub theta: f64,
    pub price: f64,
    pub listings: u32,
    pub mean_rent_premium: f64,
}

/// Outcome of [`run_to_convergence`].
#[derive(Debug, Clone, PartialEq)]
pub struct AbmResult {
    pub final_state: SortingState,
    pub rounds_used: u32,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryPoint>,
    /// Total pairwise relocations executed over the run.
    pub total_swaps: u64,
}

/// Build the initial state: quantile reservation prices, building assignment
/// with clustering intensity `mixing_correlation`, all policies forbidding.
pub fn init_state(
    params: &MarketParams,
    demand: &DemandCurve,
    supply: &SupplyPropensity,
    config: &AbmConfig,
) -> Result<SortingState, AbmError> {
    params
        .validate()
        .map_err(|e| AbmError::Config(e.to_string()))?;
    config.validate()?;
    let num_buildings = params.num_buildings as usize;
    let n = params.tenants_per_building as usize;
    let total = num_buildings * n;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // Reservation prices at midpoint quantiles aggregate exactly to f(p).
    // Tenant i (ascending) starts in building i / n, giving perfect
    // within-building clustering before mixing.
    let mut assignment: Vec<u32> = (0..total).map(|i| (i / n) as u32).collect();
    let free_slots: Vec<usize> = (0..total)
        .filter(|_| rng.gen::<f64>() >= config.mixing_correlation)
        .collect();
    let mut shuffled: Vec<u32> = free_slots.iter().map(|&i| assignment[i]).collect();
    shuffled.shuffle(&mut rng);
    for (&slot, value) in free_slots.iter().zip(shuffled) {
        assignment[slot] = value;
    }

    let tenants: Vec<Tenant> = (0..total)
        .map(|i| Tenant {
            id: i as u32,
            reservation_price: supply.quantile((i as f64 + 0.5) / total as f64),
            building_id: assignment[i],
            is_listing: false,
        })
        .collect();

    let regulated_count = (config.regulated_fraction * num_buildings as f64).floor() as usize;
    let mut building_order: Vec<u32> = (0..num_buildings as u32).collect();
    building_order.shuffle(&mut rng);
    let regulated: Vec<bool> = {
        let mut flags = vec![false; num_buildings];
        for &b in building_order.iter().take(regulated_count) {
            flags[b as usize] = true;
        }
        flags
    };

    let mut rosters: Vec<Vec<u32>> = vec![Vec::with_capacity(n); num_buildings];
    for t in &tenants {
        rosters[t.building_id as usize].push(t.id);
    }

    let buildings: Vec<Building> = (0..num_buildings)
        .map(|b| Building {
            id: b as u32,
            policy: Policy::Forbid,
            regulated: regulated[b],
            rent_premium: 0.0,
            roster: std::mem::take(&mut rosters[b]),
        })
        .collect();

    let price = match config.initial_price {
        Some(p0) => p0,
        None => demand
            .price(0.5 * total as f64)
            .map_err(|e| AbmError::Config(e.to_string()))?,
    };

    Ok(SortingState {
        round: 0,
        price,
        buildings,
        tenants,
        rng_seed: config.seed,
        rng,
    })
}

/// Advance the state by one round. Returns the number of pairwise swaps
/// executed.
pub fn step(
    state: &mut SortingState,
    params: &MarketParams,
    demand: &DemandCurve,
    config: &AbmConfig,
) -> u32 {
    let n = params.tenants_per_building as usize;
    let c = params.externality_cost;
    let cn = params.social_cost();
    let num_buildings = state.buildings.len();

    // 1. Listing decisions at the current price.
    let allowing: Vec<bool> = state
        .buildings
        .iter()
        .map(|b| b.policy == Policy::Allow)
        .collect();
    let mut listings_per_building = vec![0u32; num_buildings];
    for t in &mut state.tenants {
        t.is_listing =
            allowing[t.building_id as usize] && t.reservation_price <= state.price;
        if t.is_listing {
            listings_per_building[t.building_id as usize] += 1;
        }
    }
    let listings: u32 = listings_per_building.iter().sum();

    // 2. Tatonnement. Demand can be unbounded near zero price for
    // constant-elasticity curves; cap the excess so the step stays finite.
    let demanded = demand
        .quantity(state.price)
        .unwrap_or(f64::INFINITY)
        .min(1e9);
    state.price = (state.price + config.price_step * (demanded - listings as f64)).max(0.0);

    // 3. Rent premiums track the surplus the current roster can bear: a
    // fully listing building supports p - c*n, while any non-lister in an
    // allowing building only tolerates a discount.
    for b in &mut state.buildings {
        if b.policy == Policy::Allow {
            let m = listings_per_building[b.id as usize];
            let target = if m as usize == n {
                state.price - cn
            } else {
                -c * m as f64
            };
            b.rent_premium += config.rent_adjust_rate * (target - b.rent_premium);
        } else {
            b.rent_premium = 0.0;
        }
    }

    // 4. Policy updates. Forbidding landlords respond to the observable
    // rent premium on the allowing side; allowing landlords retreat when
    // their own premium goes negative. With no allowing building there is
    // no rent signal, so a small exploration floor breaks the tie.
    let allowing_count = state
        .buildings
        .iter()
        .filter(|b| b.policy == Policy::Allow)
        .count();
    let mean_premium = if allowing_count > 0 {
        state
            .buildings
            .iter()
            .filter(|b| b.policy == Policy::Allow)
            .map(|b| b.rent_premium)
            .sum::<f64>()
            / allowing_count as f64
    } else {
        0.0
    };
    for b in &mut state.buildings {
        if b.regulated {
            continue;
        }
        let draw = state.rng.gen::<f64>();
        match b.policy {
            Policy::Forbid => {
                let prob = if allowing_count == 0 {
                    config.exploration_floor
                } else {
                    (config.policy_switch_gain * mean_premium.max(0.0)).min(1.0)
                };
                if draw < prob {
                    b.policy = Policy::Allow;
                }
            }
            Policy::Allow => {
                let prob = (config.policy_switch_gain * (-b.rent_premium).max(0.0)).min(1.0);
                if draw < prob {
                    b.policy = Policy::Forbid;
                    b.rent_premium = 0.0;
                }
            }
        }
    }

    // 5. Pairwise relocation. Willing tenants stuck in forbidding buildings
    // swap with unwilling tenants stuck in allowing buildings when both
    // gain, with the mover's loss side weighted by loss aversion. Swaps
    // preserve occupancy exactly.
    let allowing_now: Vec<bool> = state
        .buildings
        .iter()
        .map(|b| b.policy == Policy::Allow)
        .collect();
    let mut willing_out: Vec<usize> = Vec::new();
    let mut unwilling_in: Vec<usize> = Vec::new();
    for (i, t) in state.tenants.iter().enumerate() {
        let in_allowing = allowing_now[t.building_id as usize];
        if t.reservation_price <= state.price && !in_allowing {
            willing_out.push(i);
        } else if t.reservation_price > state.price && in_allowing {
            unwilling_in.push(i);
        }
    }
    willing_out.shuffle(&mut state.rng);
    unwilling_in.shuffle(&mut state.rng);

    let mut swaps = 0u32;
    for (&w, &u) in willing_out.iter().zip(unwilling_in.iter()) {
        let b_allow = state.tenants[u].building_id;
        let b_forbid = state.tenants[w].building_id;
        let premium = state.buildings[b_allow as usize].rent_premium;
        let m = listings_per_building[b_allow as usize] as f64;
        // Willing mover: gains the listing price, weighs the externality and
        // premium borne in the new building as losses.
        let willing_gains = state.price - config.moving_cost
            > config.loss_aversion * (cn + premium);
        // Unwilling mover: escapes the noise and the premium, loses nothing.
        let unwilling_gains = c * m + premium - config.moving_cost > 0.0;
        if willing_gains && unwilling_gains {
            state.tenants[w].building_id = b_allow;
            state.tenants[u].building_id = b_forbid;
            let roster_a = &mut state.buildings[b_allow as usize].roster;
            let pos_u = roster_a
                .iter()
                .position(|&id| id == state.tenants[u].id)
                .expect("roster consistent with building_id");
            roster_a[pos_u] = state.tenants[w].id;
            let roster_f = &mut state.buildings[b_forbid as usize].roster;
            let pos_w = roster_f
                .iter()
                .position(|&id| id == state.tenants[w].id)
                .expect("roster consistent with building_id");
            roster_f[pos_w] = state.tenants[u].id;
            swaps += 1;
        }
    }

    state.round += 1;
    swaps
}

/// Iterate [`step`] until theta has been constant and the price quiet for
/// [`CONVERGENCE_WINDOW`] rounds, or `max_rounds` is reached.
/// Non-convergence is reported, not an error.
pub fn run_to_convergence(
    mut state: SortingState,
    params: &MarketParams,
    demand: &DemandCurve,
    config: &AbmConfig,
) -> AbmResult {
    let mut trajectory: Vec<TrajectoryPoint> = Vec::with_capacity(config.max_rounds as usize);
    let mut total_swaps = 0u64;
    let mut converged = false;

    for _ in 0..config.max_rounds {
        total_swaps += step(&mut state, params, demand, config) as u64;
        trajectory.push(TrajectoryPoint {
            round: state.round,
            theta: state.theta(),
            price: state.price,
            listings: state.listings_count() as u32,
            mean_rent_premium: state.mean_rent_premium(),
        });
        if trajectory.len() >= CONVERGENCE_WINDOW {
            let window = &trajectory[trajectory.len() - CONVERGENCE_WINDOW..];
            let theta_frozen = window.iter().all(|p| p.theta == window[0].theta);
            let price_quiet = window
                .windows(2)
                .all(|w| (w[1].price - w[0].price).abs() <= config.convergence_tol);
            if theta_frozen && price_quiet {
                converged = true;
                break;
            }
        }
    }

    AbmResult {
        rounds_used: state.round,
        final_state: state,
        converged,
        trajectory,
        total_swaps,
    }
}
