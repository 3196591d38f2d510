//! Property-based invariants for the curves, solvers, and welfare accounting.

use hostsort::curves::{DemandCurve, SupplyPropensity};
use hostsort::equilibrium::{
    solve_free_listing, solve_planner_optimum, solve_sorting_equilibrium, Corner, MarketParams,
};
use hostsort::scenario::{parse_scenario, run_sweep, SweepConfig};
use hostsort::welfare::{compare_regimes, welfare_at_listings};
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn linear_demand() -> impl Strategy<Value = DemandCurve> {
    (0.5f64..10.0, 0.005f64..1.0)
        .prop_map(|(a, b)| DemandCurve::linear(a, b).unwrap())
}

fn constant_elasticity_demand() -> impl Strategy<Value = DemandCurve> {
    (0.5f64..100.0, -4.0f64..-1.2)
        .prop_map(|(k, eps)| DemandCurve::constant_elasticity(k, eps).unwrap())
}

fn any_demand() -> impl Strategy<Value = DemandCurve> {
    prop_oneof![linear_demand(), constant_elasticity_demand()]
}

fn any_supply() -> impl Strategy<Value = SupplyPropensity> {
    prop_oneof![
        (0.0f64..1.0, 0.1f64..5.0)
            .prop_map(|(lo, width)| SupplyPropensity::linear(lo, lo + width).unwrap()),
        (0.0f64..3.0, 0.5f64..5.0)
            .prop_map(|(mid, steep)| SupplyPropensity::logistic(mid, steep).unwrap()),
    ]
}

/// A market whose sorting equilibrium is interior, constructed by picking a
/// target theta and backing out the externality cost from inverse demand.
/// The choke quantity stays within 50x the market size so the planner's
/// objective keeps usable curvature.
fn interior_market() -> impl Strategy<Value = (MarketParams, DemandCurve)> {
    (
        1u32..30,
        1u32..10,
        0.5f64..10.0,
        0.2f64..50.0,
        0.05f64..0.95,
    )
        .prop_map(|(a_count, n, intercept, choke_ratio, theta_frac)| {
            let an = a_count as f64 * n as f64;
            let slope = intercept / (choke_ratio * an);
            let demand = DemandCurve::linear(intercept, slope).unwrap();
            let theta_target = theta_frac * (0.95 * choke_ratio).min(1.0);
            let cn = demand.price(theta_target * an).unwrap();
            let params = MarketParams {
                num_buildings: a_count,
                tenants_per_building: n,
                base_utility: 10.0,
                externality_cost: cn / n as f64,
            };
            (params, demand)
        })
}

fn midpoint_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

proptest! {
    #[test]
    fn price_quantity_round_trip(demand in any_demand(), p_frac in 0.05f64..0.95) {
        // Pick a price strictly inside the positive-quantity region.
        let p = match demand {
            DemandCurve::Linear { intercept, .. } => p_frac * intercept,
            DemandCurve::ConstantElasticity { .. } => 0.1 + 10.0 * p_frac,
        };
        let q = demand.quantity(p).unwrap();
        prop_assume!(q > 0.0);
        let back = demand.price(q).unwrap();
        prop_assert!((back - p).abs() <= 1e-9 * p.max(1.0), "p={p}, back={back}");
    }

    #[test]
    fn demand_strictly_decreasing(demand in any_demand(), p1_frac in 0.05f64..0.9, gap in 0.01f64..0.5) {
        let choke = match demand {
            DemandCurve::Linear { intercept, .. } => intercept,
            DemandCurve::ConstantElasticity { .. } => 20.0,
        };
        let p1 = p1_frac * choke;
        let p2 = (p1_frac + gap).min(0.999) * choke;
        prop_assume!(p2 > p1);
        let q1 = demand.quantity(p1).unwrap();
        let q2 = demand.quantity(p2).unwrap();
        prop_assume!(q1 > 0.0 && q2 > 0.0);
        prop_assert!(q1 > q2);
    }

    #[test]
    fn supply_fraction_bounded_and_monotone(supply in any_supply(), p1 in 0.0f64..5.0, dp in 0.0f64..5.0) {
        let f1 = supply.fraction(p1).unwrap();
        let f2 = supply.fraction(p1 + dp).unwrap();
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!((0.0..=1.0).contains(&f2));
        prop_assert!(f1 <= f2);
    }

    #[test]
    fn inverse_demand_slopes_down(demand in any_demand(), q_frac in 0.05f64..0.9) {
        let q_hi = match demand {
            DemandCurve::Linear { intercept, slope } => intercept / slope * 1.2,
            DemandCurve::ConstantElasticity { .. } => 100.0,
        };
        let q = q_frac * q_hi;
        let h = 1e-6 * q_hi;
        let slope = (demand.price(q + h).unwrap() - demand.price(q).unwrap()) / h;
        prop_assert!(slope <= 1e-12, "finite-difference slope {slope} at q={q}");
    }

    // 1e6-panel midpoint quadrature reproduces the closed-form benefit
    // integral on linear curves.
    #[test]
    fn gross_benefit_matches_quadrature(demand in linear_demand(), l_frac in 0.0f64..1.5) {
        let (intercept, slope) = match demand {
            DemandCurve::Linear { intercept, slope } => (intercept, slope),
            _ => unreachable!(),
        };
        let listings = l_frac * intercept / slope;
        prop_assume!(listings > 0.0);
        let closed = demand.gross_benefit(listings).unwrap();
        let oracle = midpoint_quadrature(
            |q| demand.price(q).unwrap(),
            0.0,
            listings,
            1_000_000,
        );
        prop_assert!((closed - oracle).abs() <= 1e-6 * oracle.abs().max(1e-12));
    }

    // The sorting equilibrium coincides with the planner optimum.
    #[test]
    fn efficiency_equivalence((params, demand) in interior_market()) {
        let sorting = solve_sorting_equilibrium(&params, &demand, TOL).unwrap();
        let planner = solve_planner_optimum(&params, &demand, TOL).unwrap();
        match sorting.corner {
            Corner::AllForbid => prop_assert!(planner.theta_opt <= 1e-6),
            Corner::AllAllow => prop_assert!(planner.theta_opt >= 1.0 - 1e-6),
            Corner::Interior => prop_assert!(
                (planner.theta_opt - sorting.theta_star).abs() <= 1e-6,
                "planner {} vs sorting {}",
                planner.theta_opt,
                sorting.theta_star
            ),
        }
    }

    // Indifference at the interior equilibrium: P(theta* A n) = c n.
    #[test]
    fn interior_indifference((params, demand) in interior_market()) {
        let sorting = solve_sorting_equilibrium(&params, &demand, TOL).unwrap();
        prop_assume!(sorting.corner == Corner::Interior);
        let p = demand.price(sorting.theta_star * params.total_tenants()).unwrap();
        prop_assert!((p - params.social_cost()).abs() <= 1e-8);
    }

    #[test]
    fn regime_dominance((params, demand) in interior_market(), supply in any_supply()) {
        let cmp = compare_regimes(&params, &demand, &supply, TOL).unwrap();
        prop_assert!(cmp.welfare_sorting >= cmp.welfare_free - 1e-9);
        prop_assert!(cmp.deadweight_loss >= -1e-9);
    }

    // Zero deadweight loss exactly when the free price hits the social cost.
    #[test]
    fn dwl_characterization((params, demand) in interior_market(), supply in any_supply()) {
        let free = solve_free_listing(&params, &demand, &supply, TOL).unwrap();
        let sorting = solve_sorting_equilibrium(&params, &demand, TOL).unwrap();
        let cmp = compare_regimes(&params, &demand, &supply, TOL).unwrap();
        let gap = (free.price - params.social_cost()).abs();
        if gap <= 1e-6 {
            prop_assert!(cmp.deadweight_loss.abs() <= 1e-6);
        }
        // A mispriced market with trade loses welfare relative to sorting.
        if gap >= 0.05 && free.listings > 1e-9 && sorting.corner == Corner::Interior {
            prop_assert!(cmp.deadweight_loss > 0.0, "gap={gap} dwl={}", cmp.deadweight_loss);
        }
    }

    // Welfare is concave in the listing level for decreasing inverse demand.
    #[test]
    fn welfare_concavity((params, demand) in interior_market()) {
        let an = params.total_tenants();
        let grid: Vec<f64> = (0..=40)
            .map(|i| welfare_at_listings(&params, &demand, an * i as f64 / 40.0).unwrap())
            .collect();
        for w in grid.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-9);
        }
    }

    // The welfare argmax over a listing grid sits at the sorting quantity.
    #[test]
    fn welfare_argmax_at_sorting_quantity((params, demand) in interior_market()) {
        let sorting = solve_sorting_equilibrium(&params, &demand, TOL).unwrap();
        let an = params.total_tenants();
        let steps = 200;
        let (argmax, _) = (0..=steps)
            .map(|i| {
                let l = an * i as f64 / steps as f64;
                (l, welfare_at_listings(&params, &demand, l).unwrap())
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        prop_assert!(
            (argmax - sorting.listings).abs() <= an / steps as f64 + 1e-9,
            "argmax {argmax} vs sorting quantity {}",
            sorting.listings
        );
    }

    // u0 never enters the equilibrium or welfare computations.
    #[test]
    fn u0_is_irrelevant((params, demand) in interior_market(), supply in any_supply()) {
        let mut outputs = Vec::new();
        for u0 in [0.0, 10.0, 100.0] {
            let p = MarketParams { base_utility: u0, ..params };
            let sorting = solve_sorting_equilibrium(&p, &demand, TOL).unwrap();
            let planner = solve_planner_optimum(&p, &demand, TOL).unwrap();
            let cmp = compare_regimes(&p, &demand, &supply, TOL).unwrap();
            outputs.push((
                sorting.theta_star.to_bits(),
                sorting.price.to_bits(),
                planner.theta_opt.to_bits(),
                planner.welfare.to_bits(),
                cmp.deadweight_loss.to_bits(),
            ));
        }
        prop_assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    }

    // theta* falls as the externality cost or the building size rises.
    #[test]
    fn theta_star_decreasing_in_c_and_n((params, demand) in interior_market()) {
        let theta = |p: &MarketParams| {
            solve_sorting_equilibrium(p, &demand, TOL).unwrap().theta_star
        };
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let p = MarketParams {
                externality_cost: params.externality_cost * (1.0 + i as f64 * 0.2),
                ..params
            };
            let t = theta(&p);
            prop_assert!(t <= prev + 1e-12);
            prev = t;
        }
        let mut prev = f64::INFINITY;
        for n in params.tenants_per_building..params.tenants_per_building + 10 {
            let p = MarketParams { tenants_per_building: n, ..params };
            let t = theta(&p);
            prop_assert!(t <= prev + 1e-12);
            prev = t;
        }
    }
}

// Permuting the sweep values permutes rows with bit-identical cells.
proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn sweep_rows_are_independent(perm in Just(vec![0.05f64, 0.1, 0.15, 0.2, 0.25, 0.3]).prop_shuffle()) {
        let base = r#"
version = 1
[market]
num_buildings = 10
tenants_per_building = 5
base_utility = 10.0
externality_cost = 0.2
[demand]
kind = "linear"
intercept = 2.0
slope = 0.04
[supply]
kind = "linear"
p_min = 0.0
p_max = 1.25
"#;
        let mut scenario = parse_scenario(base).unwrap();
        scenario.sweep = Some(SweepConfig {
            parameter: "market.externality_cost".into(),
            values: vec![0.05, 0.1, 0.15, 0.2, 0.25, 0.3],
        });
        let reference = run_sweep(&scenario).unwrap();
        scenario.sweep = Some(SweepConfig {
            parameter: "market.externality_cost".into(),
            values: perm.clone(),
        });
        let shuffled = run_sweep(&scenario).unwrap();
        for (row, &value) in shuffled.rows.iter().zip(perm.iter()) {
            let expected = reference.rows.iter().find(|r| r.value == value).unwrap();
            prop_assert_eq!(row, expected);
        }
    }
}
