use super::*;
use crate::model::build_iso_gep;
use crate::solve::solve_desk;
use crate::toys;

fn opts() -> SolveOptions {
    SolveOptions {
        tol: 1e-8,
        ..SolveOptions::default()
    }
}

fn ablate(inst: &toys::Instance) -> AblationReport {
    run_ablations(&inst.params, &inst.sets, &inst.variant, &opts()).unwrap()
}

fn objective(r: &AblationReport, l: AblationLabel) -> f64 {
    r.case(l).unwrap().objective.unwrap()
}

fn fixed(r: &AblationReport, l: AblationLabel) -> &FixedCapacityCheck {
    r.case(l).unwrap().fixed_capacity.as_ref().unwrap()
}

fn built(r: &AblationReport, l: AblationLabel, k: TechKind) -> f64 {
    r.case(l).unwrap().capacities.iter().find(|c| c.tech == k).unwrap().built_mw
}

#[test]
fn case_labels_are_distinct_variants() {
    let cases = AblationCase::all(&ModelVariant::full());
    assert_eq!(cases.len(), 5);
    let names: BTreeSet<&str> = cases.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(names.len(), 5);
    let vc = cases.iter().find(|c| c.label == AblationLabel::VcNoCost).unwrap();
    assert!(vc.variant.variation_constraints && !vc.variant.variation_costs);
    let conv = cases.iter().find(|c| c.label == AblationLabel::Conventional).unwrap();
    assert_eq!(conv.variant.family, ModelFamily::Conventional);
}

#[test]
fn ramp_toy_ablations() {
    let r = ablate(&toys::ramp());
    let (full, nv, nvc, vc) = (
        objective(&r, AblationLabel::Full),
        objective(&r, AblationLabel::NoVcNoCost),
        objective(&r, AblationLabel::NoVcWithCost),
        objective(&r, AblationLabel::VcNoCost),
    );
    assert!(nv <= vc + 1e-9 && nvc <= full + 1e-9 && vc <= full + 1e-9, "{nv} {nvc} {vc} {full}");
    assert_eq!(r.no_vc_identical, Some(true));
    // Without variation rows nuclear covers the 20 MW peak alone.
    assert!((built(&r, AblationLabel::NoVcNoCost, TechKind::Nuclear) - 20.0).abs() < 1e-7);
    assert!(built(&r, AblationLabel::NoVcNoCost, TechKind::Gas).abs() < 1e-7);
    for l in [AblationLabel::NoVcNoCost, AblationLabel::NoVcWithCost] {
        let f = fixed(&r, l);
        assert_eq!(f.status, Status::Infeasible, "{l}");
        assert_eq!(f.certificate_verified, Some(true));
        // The schedule breaks the up-variation limit on the climb.
        assert!(f.violated_by_tag.get(&RowTag::Eq9).copied().unwrap_or(0) > 0, "{l}: {:?}", f.violated_by_tag);
    }
    for l in [AblationLabel::Full, AblationLabel::VcNoCost] {
        let f = fixed(&r, l);
        assert!(f.feasible && f.fixed_rows_hold, "{l}");
        assert_eq!(f.schedule_violations.as_deref(), Some(&[][..]), "{l}");
    }
    // Pinning the full case's own capacities reproduces its optimum.
    assert!((fixed(&r, AblationLabel::Full).objective.unwrap() - full).abs() <= 1e-7 * (1.0 + full));
}

#[test]
fn slack_limits_make_the_cases_agree() {
    let r = ablate(&toys::ramp_with_limit(1.0));
    for l in AblationLabel::ALL.into_iter().filter(|&l| l != AblationLabel::Conventional) {
        assert!(fixed(&r, l).feasible, "{l}");
    }
    // Cases sharing the cost treatment solve the same problem.
    let eq = |a: f64, b: f64| (a - b).abs() <= 1e-7 * (1.0 + a.abs());
    assert!(eq(objective(&r, AblationLabel::NoVcNoCost), objective(&r, AblationLabel::VcNoCost)));
    assert!(eq(objective(&r, AblationLabel::NoVcWithCost), objective(&r, AblationLabel::Full)));
}

/// Variation cost part `sum CV * r` of an optimal hourly solution.
fn variation_spend(model: &LPModel, sol: &Solution) -> f64 {
    model
        .columns
        .iter()
        .zip(&sol.primal)
        .filter(|(c, _)| c.key.kind == ColKind::R)
        .map(|(c, v)| c.cost * v)
        .sum()
}

#[test]
fn variation_cost_gap_is_bracketed_by_spend() {
    for inst in [toys::ramp(), toys::morning_ramp()] {
        let vc = ModelVariant::full().with_shares(inst.variant.share_constraints.clone());
        let full_m = build_iso_gep(&inst.params, &inst.sets, &vc).unwrap();
        let full = solve_desk(&full_m, 1e-9).unwrap();
        let nc_m = build_iso_gep(&inst.params, &inst.sets, &vc.clone().with_variation(true, false)).unwrap();
        let nc = solve_desk(&nc_m, 1e-9).unwrap();
        let gap = full.objective - nc.objective;
        // The cost-free optimum's schedule, charged for its variation.
        let carried = transfer_point(&nc_m, &nc.primal, &full_m);
        let nc_spend: f64 = full_m.objective(&carried) - nc.objective;
        let full_spend = variation_spend(&full_m, &full);
        assert!(gap >= full_spend - 1e-7 && gap <= nc_spend + 1e-7, "{}: {full_spend} <= {gap} <= {nc_spend}", inst.name);
        if inst.name == "morning_ramp" {
            // The schedule is forced, so the gap is exactly the spend.
            assert!((gap - full_spend).abs() < 1e-7, "{gap} vs {full_spend}");
        }
    }
}

#[test]
fn conventional_capacities_fail_the_steep_ramp() {
    let r = ablate(&toys::steep_two_hour());
    let conv = r.case(AblationLabel::Conventional).unwrap();
    assert!((conv.capacities[0].built_mw - 20.0).abs() < 1e-7);
    let f = conv.fixed_capacity.as_ref().unwrap();
    assert_eq!(f.status, Status::Infeasible);
    assert!(f.schedule_violations.is_none());
    assert!(f.certificate_rows.iter().any(|n| n.starts_with("EQ9")), "{:?}", f.certificate_rows);
}

#[test]
fn transfer_rebuilds_variation_amounts() {
    let inst = toys::ramp();
    let no_r = build_iso_gep(&inst.params, &inst.sets, &inst.variant.clone().with_variation(false, false)).unwrap();
    let with_r = build_iso_gep(&inst.params, &inst.sets, &inst.variant).unwrap();
    let sol = solve_desk(&no_r, 1e-9).unwrap();
    let p = transfer_point(&no_r, &sol.primal, &with_r);
    let rows = check_feasibility(&with_r, &p, 1e-9);
    assert!(rows.iter().all(|v| !matches!(v.key.tag, RowTag::Eq7 | RowTag::Eq8)));
    // Nuclear climbs 10 MW at hour 3 and r carries it.
    let pos = with_r.column_positions();
    let r3 = with_r
        .columns
        .iter()
        .find(|c| c.key.kind == ColKind::R && c.key.idx.h == Some(3) && c.key.idx.k == Some(TechKind::Nuclear))
        .unwrap();
    assert!((p[pos[&r3.key]] - 10.0).abs() < 1e-7);
}

#[test]
fn morning_ramp_binds_at_hour_seven() {
    let inst = toys::morning_ramp();
    let m = build_iso_gep(&inst.params, &inst.sets, &inst.variant).unwrap();
    let s = solve_desk(&m, 1e-9).unwrap();
    let rep = binding_report(&m, &s, &inst.sets, &BindingOptions::default());
    let h7 = rep.rows.iter().find(|b| b.tag == RowTag::Eq9 && b.hour == 7).expect("EQ9 at hour 7 listed");
    assert!(h7.dual > 0.0);
    assert!(rep.complementary_slackness);
    assert!(rep.rows.iter().all(|b| (b.activity - b.rhs).abs() <= 1e-6));
    assert_eq!(rep.by_hour[6], rep.rows.iter().filter(|b| b.hour == 7).count());
    assert_eq!(rep.groups.iter().map(|g| g.up + g.down).sum::<usize>(), rep.rows.len());
}

#[test]
fn slack_limits_give_an_empty_report() {
    let inst = toys::morning_ramp_with_limit(1.0);
    let m = build_iso_gep(&inst.params, &inst.sets, &inst.variant).unwrap();
    let s = solve_desk(&m, 1e-9).unwrap();
    let rep = binding_report(&m, &s, &inst.sets, &BindingOptions::default());
    assert!(rep.rows.is_empty() && rep.complementary_slackness);
    assert!(rep.variation_rows > 0);
}

#[test]
fn dropping_nonbinding_rows_keeps_the_optimum() {
    for inst in [toys::morning_ramp(), toys::ramp()] {
        let d = drop_nonbinding_and_resolve(&inst.params, &inst.sets, &inst.variant, &opts(), &BindingOptions::default()).unwrap();
        assert!(d.retained_rows < d.variation_rows, "{}", inst.name);
        assert!(d.agree, "{}: {:?}", inst.name, d.divergence);
        assert_eq!(d.timings.len(), 2);
        assert_eq!(d.full_rows - d.reduced_total_rows, d.variation_rows - d.retained_rows);
    }
}

#[test]
fn dropping_every_row_reports_divergence() {
    // A dual tolerance above every dual keeps no rows; the relaxed optimum
    // drops below the full one and is reported, not rejected.
    let inst = toys::morning_ramp();
    let binding = BindingOptions {
        dual_tol: 1e12,
        slack_tol: 1e-6,
    };
    let d = drop_nonbinding_and_resolve(&inst.params, &inst.sets, &inst.variant, &opts(), &binding).unwrap();
    assert_eq!(d.retained_rows, 0);
    assert!(!d.agree && d.divergence.unwrap() < 0.0);
    assert!(!d.reduced_point_feasible);
}

fn plan(entries: &[(TechKind, usize, f64)]) -> Vec<CapacityEntry> {
    entries
        .iter()
        .map(|&(tech, year, mw)| CapacityEntry {
            tech,
            year,
            built_mw: 0.0,
            installed_mw: mw,
        })
        .collect()
}

#[test]
fn identical_reference_gives_zero_gaps() {
    let p = plan(&[(TechKind::Nuclear, 1, 10.0), (TechKind::Gas, 1, 4.0), (TechKind::Gas, 2, 3.5)]);
    let reference = ReferencePlan {
        entries: p.iter().map(|e| ((e.tech, 2020 + e.year as i32 - 1), e.installed_mw)).collect(),
    };
    for g in compare_plans(&p, 2020, &reference) {
        assert_eq!(g.abs_gap, Some(0.0));
        assert_eq!(g.rel_gap, Some(0.0));
    }
}

#[test]
fn missing_entries_are_absent_not_zero() {
    let p = plan(&[(TechKind::Nuclear, 1, 10.0)]);
    let csv_text = "tech,year,capacity_mw\nnuclear,1,8\nwind,1,5\n";
    let reference = ReferencePlan::read_csv(csv_text.as_bytes()).unwrap();
    let gaps = compare_plans(&p, 1, &reference);
    assert_eq!(gaps.len(), 2);
    assert_eq!(gaps[0].abs_gap, Some(2.0));
    assert_eq!(gaps[0].rel_gap, Some(0.25));
    assert_eq!(gaps[1].tech, TechKind::Wind);
    assert_eq!(gaps[1].model_mw, None);
    assert_eq!(gaps[1].abs_gap, None);
    let mut out = Vec::new();
    write_plan_comparison(&gaps, &mut out).unwrap();
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "tech,year,model_mw,reference_mw,abs_gap,rel_gap\nnuclear,1,10,8,2,0.25\nwind,1,NA,5,NA,NA\n"
    );
}

#[test]
fn capacity_plan_csv_lists_every_entry() {
    let p = plan(&[(TechKind::Nuclear, 1, 10.0), (TechKind::Wind, 2, 2.5)]);
    let mut out = Vec::new();
    write_capacity_plan(&p, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tech,year,built_mw,installed_mw"));
    assert_eq!(lines.count(), 2);
    assert!(text.contains("\nwind,2,0,2.5\n"));
}

#[test]
fn toy_plan_against_a_hand_reference() {
    // two_hour_hydro builds 20 MW in its single year.
    let inst = toys::two_hour_hydro();
    let m = build_iso_gep(&inst.params, &inst.sets, &inst.variant).unwrap();
    let s = solve_desk(&m, 1e-9).unwrap();
    let cap = capacity_plan(&m, &s, &inst.params, &inst.sets);
    let reference = ReferencePlan {
        entries: [((TechKind::Hydro, 2030), 25.0)].into_iter().collect(),
    };
    let g = &compare_plans(&cap, 2030, &reference)[0];
    assert!((g.abs_gap.unwrap() + 5.0).abs() < 1e-9);
    assert!((g.rel_gap.unwrap() + 0.2).abs() < 1e-9);
}

#[test]
fn reference_reader_rejects_bad_rows() {
    for (text, line) in [
        ("tech,year,capacity_mw\nnuclear,1,8\nnuclear,1,9\n", 3),
        ("tech,year,capacity_mw\ncoal,1,8\n", 2),
        ("tech,year,capacity_mw\nnuclear,x,8\n", 2),
        ("tech,year,capacity_mw\nnuclear,1,inf\n", 2),
    ] {
        match ReferencePlan::read_csv(text.as_bytes()) {
            Err(ExperimentError::Reference { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(
        ReferencePlan::read_csv("tech,year\n".as_bytes()),
        Err(ExperimentError::Reference { line: 1, .. })
    ));
}

#[test]
fn reports_serialize_without_timings() {
    let r = ablate(&toys::ramp());
    assert!(!r.timings.is_empty());
    let json = serde_json::to_string(&r).unwrap();
    assert!(!json.contains("seconds"));
    assert!(json.contains("\"EQ9\""));
    assert_eq!(json, serde_json::to_string(&ablate(&toys::ramp())).unwrap());
    let summary = r.summary();
    assert_eq!(summary.len(), 5);
    assert!(summary.iter().any(|c| c.feasible_under_full == Some(false) && c.violated_rows > 0));
}
