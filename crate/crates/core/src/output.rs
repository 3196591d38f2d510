//! CSV and JSON emission with stable column order and deterministic
//! formatting (17 significant digits for reals).

use serde::Serialize;

use crate::abm::AbmResult;
use crate::scenario::{RunOutcome, SweepTable, UtilityPoint};

/// Deterministic real formatting: 17 significant digits, with `inf`, `-inf`
/// and `nan` spelled out.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// `equilibria.csv`: one row per solved regime.
pub fn equilibria_csv(outcome: &RunOutcome) -> String {
    let mut out = String::from("regime,theta,price,listings,welfare,corner\n");
    out.push_str(&format!(
        "free_listing,,{},{},{},\n",
        fmt_real(outcome.free.price),
        fmt_real(outcome.free.listings),
        fmt_real(outcome.comparison.welfare_free),
    ));
    out.push_str(&format!(
        "sorting,{},{},{},{},{}\n",
        fmt_real(outcome.sorting.theta_star),
        fmt_real(outcome.sorting.price),
        fmt_real(outcome.sorting.listings),
        fmt_real(outcome.comparison.welfare_sorting),
        outcome.sorting.corner,
    ));
    out.push_str(&format!(
        "planner,{},,,{},\n",
        fmt_real(outcome.planner.theta_opt),
        fmt_real(outcome.planner.welfare),
    ));
    out
}

/// `sweep.csv`: one row per swept value, in input order.
pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from(
        "value,theta_star,p_sorting,p_free,L_free,welfare_free,welfare_sorting,deadweight_loss,corner\n",
    );
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_real(r.value),
            fmt_real(r.theta_star),
            fmt_real(r.p_sorting),
            fmt_real(r.p_free),
            fmt_real(r.l_free),
            fmt_real(r.welfare_free),
            fmt_real(r.welfare_sorting),
            fmt_real(r.deadweight_loss),
            r.corner,
        ));
    }
    out
}

/// `trajectory_<seed>.csv`: one row per simulated round.
pub fn trajectory_csv(result: &AbmResult) -> String {
    let mut out = String::from("round,theta,price,listings,mean_rent_premium\n");
    for p in &result.trajectory {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.round,
            fmt_real(p.theta),
            fmt_real(p.price),
            p.listings,
            fmt_real(p.mean_rent_premium),
        ));
    }
    out
}

/// `utility_curves.csv`: host vs. non-host utility over the theta grid.
pub fn utility_curves_csv(points: &[UtilityPoint]) -> String {
    let mut out = String::from("theta,u_allow,u_forbid\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_real(p.theta),
            fmt_real(p.u_allow),
            fmt_real(p.u_forbid),
        ));
    }
    out
}

#[derive(Debug, Serialize)]
pub struct AbmSummary {
    pub seed: u64,
    pub rounds_used: u32,
    pub converged: bool,
    pub final_theta: f64,
    pub final_price: f64,
    pub final_listings: u32,
    pub total_swaps: u64,
}

impl From<&AbmResult> for AbmSummary {
    fn from(r: &AbmResult) -> Self {
        AbmSummary {
            seed: r.final_state.rng_seed,
            rounds_used: r.rounds_used,
            converged: r.converged,
            final_theta: r.final_state.theta(),
            final_price: r.final_state.price,
            final_listings: r.final_state.listings_count() as u32,
            total_swaps: r.total_swaps,
        }
    }
}

/// The machine-readable per-run summary (`summary.json`).
#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub free: &'a crate::equilibrium::FreeListingEquilibrium,
    pub sorting: &'a crate::equilibrium::SortingEquilibrium,
    pub planner: &'a crate::equilibrium::PlannerSolution,
    pub comparison: &'a crate::welfare::RegimeComparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abm: Option<AbmSummary>,
}

pub fn summary_json(outcome: &RunOutcome) -> String {
    let summary = RunSummary {
        free: &outcome.free,
        sorting: &outcome.sorting,
        planner: &outcome.planner,
        comparison: &outcome.comparison,
        abm: outcome.abm.as_ref().map(AbmSummary::from),
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}
