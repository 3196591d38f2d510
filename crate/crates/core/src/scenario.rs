//! Scenario files, orchestration, parameter sweeps, and utility-curve data.
//!
//! A scenario is a single TOML file with a `version` field, the market
//! primitives, one demand curve, one supply propensity, and optional `[abm]`
//! and `[sweep]` blocks. All numeric constraints are enforced at load time.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abm::{init_state, run_to_convergence, AbmConfig, AbmError, AbmResult};
use crate::curves::{CurveError, DemandCurve, SupplyPropensity};
use crate::equilibrium::{
    solve_free_listing, solve_planner_optimum, solve_sorting_equilibrium, Corner,
    FreeListingEquilibrium, MarketParams, PlannerSolution, SolveError, SortingEquilibrium,
    DEFAULT_TOL,
};
use crate::welfare::{compare_regimes, RegimeComparison};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("invalid scenario: {0}")]
    Constraint(String),
    #[error("solver failure: {0}")]
    Solve(#[from] SolveError),
}

impl From<CurveError> for ScenarioError {
    fn from(e: CurveError) -> Self {
        ScenarioError::Constraint(e.to_string())
    }
}

impl From<AbmError> for ScenarioError {
    fn from(e: AbmError) -> Self {
        ScenarioError::Constraint(e.to_string())
    }
}

impl ScenarioError {
    /// Process exit code: 2 for validation problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Io { .. }
            | ScenarioError::Parse { .. }
            | ScenarioError::Constraint(_) => 2,
            ScenarioError::Solve(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Bracket-width tolerance for the regime solvers.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path of the swept field, e.g. `market.externality_cost`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// One fully validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub market: MarketParams,
    pub demand: DemandCurve,
    pub supply: SupplyPropensity,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abm: Option<AbmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != SCHEMA_VERSION {
            return Err(ScenarioError::Constraint(format!(
                "unsupported schema version {}, expected {SCHEMA_VERSION}",
                self.version
            )));
        }
        self.market.validate()?;
        self.demand.validate()?;
        self.supply.validate()?;
        if !(self.solver.tol > 0.0) {
            return Err(ScenarioError::Constraint(format!(
                "solver.tol must be positive, got {}",
                self.solver.tol
            )));
        }
        if let Some(abm) = &self.abm {
            abm.validate()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(ScenarioError::Constraint(
                    "sweep.values must be nonempty".into(),
                ));
            }
            if !self.parameter_path_exists(&sweep.parameter) {
                return Err(ScenarioError::Constraint(format!(
                    "sweep.parameter '{}' does not name a field of this scenario",
                    sweep.parameter
                )));
            }
        }
        Ok(())
    }

    fn parameter_path_exists(&self, path: &str) -> bool {
        match path {
            "market.num_buildings"
            | "market.tenants_per_building"
            | "market.base_utility"
            | "market.externality_cost" => true,
            "demand.intercept" | "demand.slope" => {
                matches!(self.demand, DemandCurve::Linear { .. })
            }
            "demand.scale" | "demand.elasticity" => {
                matches!(self.demand, DemandCurve::ConstantElasticity { .. })
            }
            "supply.p_min" | "supply.p_max" => {
                matches!(self.supply, SupplyPropensity::Linear { .. })
            }
            "supply.midpoint" | "supply.steepness" => {
                matches!(self.supply, SupplyPropensity::Logistic { .. })
            }
            _ => false,
        }
    }

    /// Set the field named by `path` to `value`, then re-validate.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Scenario, ScenarioError> {
        let mut s = self.clone();
        let as_count = |v: f64| -> Result<u32, ScenarioError> {
            if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
                return Err(ScenarioError::Constraint(format!(
                    "'{path}' requires a positive integer, got {v}"
                )));
            }
            Ok(v as u32)
        };
        match path {
            "market.num_buildings" => s.market.num_buildings = as_count(value)?,
            "market.tenants_per_building" => s.market.tenants_per_building = as_count(value)?,
            "market.base_utility" => s.market.base_utility = value,
            "market.externality_cost" => s.market.externality_cost = value,
            "demand.intercept" => match &mut s.demand {
                DemandCurve::Linear { intercept, .. } => *intercept = value,
                _ => return Err(bad_path(path)),
            },
            "demand.slope" => match &mut s.demand {
                DemandCurve::Linear { slope, .. } => *slope = value,
                _ => return Err(bad_path(path)),
            },
            "demand.scale" => match &mut s.demand {
                DemandCurve::ConstantElasticity { scale, .. } => *scale = value,
                _ => return Err(bad_path(path)),
            },
            "demand.elasticity" => match &mut s.demand {
                DemandCurve::ConstantElasticity { elasticity, .. } => *elasticity = value,
                _ => return Err(bad_path(path)),
            },
            "supply.p_min" => match &mut s.supply {
                SupplyPropensity::Linear { p_min, .. } => *p_min = value,
                _ => return Err(bad_path(path)),
            },
            "supply.p_max" => match &mut s.supply {
                SupplyPropensity::Linear { p_max, .. } => *p_max = value,
                _ => return Err(bad_path(path)),
            },
            "supply.midpoint" => match &mut s.supply {
                SupplyPropensity::Logistic { midpoint, .. } => *midpoint = value,
                _ => return Err(bad_path(path)),
            },
            "supply.steepness" => match &mut s.supply {
                SupplyPropensity::Logistic { steepness, .. } => *steepness = value,
                _ => return Err(bad_path(path)),
            },
            _ => return Err(bad_path(path)),
        }
        s.market.validate()?;
        s.demand.validate()?;
        s.supply.validate()?;
        Ok(s)
    }
}

fn bad_path(path: &str) -> ScenarioError {
    ScenarioError::Constraint(format!(
        "parameter path '{path}' does not name a field of this scenario"
    ))
}

/// Load and validate a scenario from a TOML file.
pub fn load_scenario<P: AsRef<Path>>(path: P) -> Result<Scenario, ScenarioError> {
    let path_str = path.as_ref().display().to_string();
    let text = std::fs::read_to_string(&path).map_err(|source| ScenarioError::Io {
        path: path_str.clone(),
        source,
    })?;
    let scenario: Scenario = toml::from_str(&text).map_err(|source| ScenarioError::Parse {
        path: path_str,
        source: Box::new(source),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Parse and validate a scenario from TOML text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let scenario: Scenario = toml::from_str(text).map_err(|source| ScenarioError::Parse {
        path: "<inline>".into(),
        source: Box::new(source),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// All closed-regime outputs, plus the ABM run when configured.
#[derive(Debug)]
pub struct RunOutcome {
    pub free: FreeListingEquilibrium,
    pub sorting: SortingEquilibrium,
    pub planner: PlannerSolution,
    pub comparison: RegimeComparison,
    pub abm: Option<AbmResult>,
}

/// Solve every closed regime; run the ABM iff an `[abm]` block is present.
/// `seed_override` replaces the configured ABM seed when given.
pub fn run_scenario(
    scenario: &Scenario,
    seed_override: Option<u64>,
) -> Result<RunOutcome, ScenarioError> {
    scenario.validate()?;
    let tol = scenario.solver.tol;
    let free = solve_free_listing(&scenario.market, &scenario.demand, &scenario.supply, tol)?;
    let sorting = solve_sorting_equilibrium(&scenario.market, &scenario.demand, tol)?;
    let planner = solve_planner_optimum(&scenario.market, &scenario.demand, tol).map_err(
        |e| match e {
            SolveError::Curve(CurveError::DivergentIntegral(eps)) => {
                ScenarioError::Constraint(format!(
                    "planner welfare is undefined for demand elasticity {eps}; \
                     set demand.elasticity below -1 or drop the planner output"
                ))
            }
            other => ScenarioError::Solve(other),
        },
    )?;
    let comparison = compare_regimes(&scenario.market, &scenario.demand, &scenario.supply, tol)?;
    let abm = match &scenario.abm {
        Some(cfg) => {
            let mut cfg = *cfg;
            if let Some(seed) = seed_override {
                cfg.seed = seed;
            }
            let state = init_state(&scenario.market, &scenario.demand, &scenario.supply, &cfg)?;
            Some(run_to_convergence(
                state,
                &scenario.market,
                &scenario.demand,
                &cfg,
            ))
        }
        None => None,
    };
    Ok(RunOutcome {
        free,
        sorting,
        planner,
        comparison,
        abm,
    })
}

/// One row of a comparative-statics sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub theta_star: f64,
    pub p_sorting: f64,
    pub p_free: f64,
    pub l_free: f64,
    pub welfare_free: f64,
    pub welfare_sorting: f64,
    pub deadweight_loss: f64,
    pub corner: Corner,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

/// Run the scenario's sweep: each row is computed independently on a copy of
/// the scenario with the swept field replaced, in the order given.
pub fn run_sweep(scenario: &Scenario) -> Result<SweepTable, ScenarioError> {
    scenario.validate()?;
    let sweep = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| ScenarioError::Constraint("scenario has no [sweep] block".into()))?;
    let mut rows = Vec::with_capacity(sweep.values.len());
    for &value in &sweep.values {
        let s = scenario.with_parameter(&sweep.parameter, value)?;
        let tol = s.solver.tol;
        let free = solve_free_listing(&s.market, &s.demand, &s.supply, tol)?;
        let sorting = solve_sorting_equilibrium(&s.market, &s.demand, tol)?;
        let comparison = compare_regimes(&s.market, &s.demand, &s.supply, tol)?;
        rows.push(SweepRow {
            value,
            theta_star: sorting.theta_star,
            p_sorting: sorting.price,
            p_free: free.price,
            l_free: free.listings,
            welfare_free: comparison.welfare_free,
            welfare_sorting: comparison.welfare_sorting,
            deadweight_loss: comparison.deadweight_loss,
            corner: sorting.corner,
        });
    }
    Ok(SweepTable {
        parameter: sweep.parameter.clone(),
        rows,
    })
}

/// One grid point of the host vs. non-host utility diagram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilityPoint {
    pub theta: f64,
    /// `u0 + P(theta * A * n) - c * n`: utility in an allowing building.
    pub u_allow: f64,
    /// `u0`: utility in a forbidding building.
    pub u_forbid: f64,
}

/// Tabulate host and non-host utility over a theta grid. The crossing of the
/// two columns brackets the sorting equilibrium.
pub fn emit_utility_curves(
    scenario: &Scenario,
    grid_size: usize,
) -> Result<Vec<UtilityPoint>, ScenarioError> {
    scenario.validate()?;
    if grid_size < 2 {
        return Err(ScenarioError::Constraint(format!(
            "grid_size must be at least 2, got {grid_size}"
        )));
    }
    let an = scenario.market.total_tenants();
    let u0 = scenario.market.base_utility;
    let cn = scenario.market.social_cost();
    (0..grid_size)
        .map(|i| {
            let theta = i as f64 / (grid_size - 1) as f64;
            let price = scenario.demand.price(theta * an)?;
            Ok(UtilityPoint {
                theta,
                u_allow: u0 + price - cn,
                u_forbid: u0,
            })
        })
        .collect()
}
