//! Properties of solved hourly models on small random instances.

use isogep::model::{build_iso_gep, installed_capacity, ColKind, LPModel};
use isogep::solve::{solve_desk, Solution, Status};
use isogep::synthetic::random_parameters;
use isogep::types::{DayType, DemandLevel, IndexSets, ModelVariant, ParameterSet, Season, ShareMode, TechKind};
use proptest::prelude::*;

fn sets(nk: usize, nh: usize) -> IndexSets {
    IndexSets {
        techs: [TechKind::Nuclear, TechKind::Gas, TechKind::Hydro, TechKind::Wind][..nk].to_vec(),
        years: 2,
        seasons: vec![Season::Winter],
        day_types: vec![DayType::Weekday],
        hours: nh,
        scenario_levels: vec![DemandLevel::Low, DemandLevel::High],
        days_in_year: 365,
    }
}

fn solve(p: &ParameterSet, s: &IndexSets, v: &ModelVariant) -> (LPModel, Solution) {
    let m = build_iso_gep(p, s, v).unwrap();
    let sol = solve_desk(&m, 1e-8).unwrap();
    (m, sol)
}

/// Value of the column named `kind` at (k, t, h, s) of the single cell.
fn value(m: &LPModel, sol: &Solution, kind: ColKind, k: TechKind, t: usize, h: usize, s: usize) -> f64 {
    let j = m
        .columns
        .iter()
        .position(|c| {
            c.key.kind == kind
                && c.key.idx.k == Some(k)
                && c.key.idx.t as usize == t
                && c.key.idx.h == Some(h as u32)
                && c.key.idx.s == Some(s as u32)
        })
        .unwrap();
    sol.primal[j]
}

fn builds(m: &LPModel, sol: &Solution, s: &IndexSets) -> Vec<Vec<f64>> {
    s.techs
        .iter()
        .map(|&k| {
            (1..=s.years)
                .map(|t| {
                    let j = m
                        .columns
                        .iter()
                        .position(|c| c.key.kind == ColKind::X && c.key.idx.k == Some(k) && c.key.idx.t as usize == t)
                        .unwrap();
                    sol.primal[j]
                })
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn relaxations_never_cost_more(seed in any::<u64>(), nk in 1usize..=3, nh in 2usize..=4) {
        let s = sets(nk, nh);
        let p = random_parameters(&s, seed);
        let base = ModelVariant::full().with_shares(ShareMode::Off);
        let obj = |v: ModelVariant| solve(&p, &s, &v).1.objective;
        let full = obj(base.clone());
        let vc = obj(base.clone().with_variation(true, false));
        let none = obj(base.clone().with_variation(false, false));
        let costs_only = obj(base.with_variation(false, true));
        let tol = 1e-6 * (1.0 + full.abs().min(1e12));
        // Infeasible objectives are +inf and compare correctly.
        prop_assert!(none <= vc + tol, "{none} {vc}");
        prop_assert!(vc <= full + tol, "{vc} {full}");
        prop_assert!(none <= costs_only + tol && costs_only <= full + tol, "{none} {costs_only} {full}");
    }

    #[test]
    fn optimal_schedules_meet_their_rows(seed in any::<u64>(), nk in 1usize..=3, nh in 2usize..=4) {
        let s = sets(nk, nh);
        let p = random_parameters(&s, seed);
        let (m, sol) = solve(&p, &s, &ModelVariant::full().with_shares(ShareMode::Off));
        prop_assume!(sol.status == Status::Optimal);
        let x = builds(&m, &sol, &s);
        let installed = installed_capacity(&p, &s, &x);
        for t in 1..=s.years {
            for sc in 1..=s.scenarios() {
                for h in 1..=s.hours {
                    // Demand cover.
                    let total: f64 = s.techs.iter().map(|&k| value(&m, &sol, ColKind::G, k, t, h, sc)).sum();
                    let need = p.growth[t - 1] * p.demand[[0, 0, h - 1, sc - 1]];
                    prop_assert!(total >= need - 1e-6 * (1.0 + need));
                }
                for (kp, &k) in s.techs.iter().enumerate() {
                    // Hour-0 anchor at the initial output of installed capacity.
                    let g0 = value(&m, &sol, ColKind::G, k, t, 0, sc);
                    let anchor = p.initial_generation[[kp, 0, 0, sc - 1]] * installed[kp][t - 1];
                    prop_assert!((g0 - anchor).abs() <= 1e-6 * (1.0 + anchor.abs()), "{g0} vs {anchor}");
                    for h in 1..=s.hours {
                        // Variation amounts are tight where they are priced.
                        let dg = value(&m, &sol, ColKind::G, k, t, h, sc) - value(&m, &sol, ColKind::G, k, t, h - 1, sc);
                        let r = value(&m, &sol, ColKind::R, k, t, h, sc);
                        prop_assert!(r >= dg.abs() - 1e-6);
                        if p.variation_cost[[kp, t - 1]] > 1e-3 {
                            prop_assert!((r - dg.abs()).abs() <= 1e-6 * (1.0 + r), "r {r} |dg| {}", dg.abs());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn share_bounds_hold_at_the_optimum(seed in any::<u64>(), nk in 2usize..=3) {
        let s = sets(nk, 2);
        let mut p = random_parameters(&s, seed);
        // Bands around an even split.
        let even = 1.0 / nk as f64;
        p.share_max.fill((even + 0.2).min(1.0));
        p.share_min.fill((even - 0.2).max(0.0));
        let (m, sol) = solve(&p, &s, &ModelVariant::full());
        prop_assume!(sol.status == Status::Optimal);
        let installed = installed_capacity(&p, &s, &builds(&m, &sol, &s));
        for t in 0..s.years {
            let total: f64 = installed.iter().map(|row| row[t]).sum();
            for (kp, row) in installed.iter().enumerate() {
                prop_assert!(row[t] <= p.share_max[[kp, t]] * total + 1e-6 * (1.0 + total));
                prop_assert!(row[t] >= p.share_min[[kp, t]] * total - 1e-6 * (1.0 + total));
            }
        }
    }
}
