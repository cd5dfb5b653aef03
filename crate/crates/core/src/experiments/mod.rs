//! Experiment drivers: the ablation study with fixed-capacity re-solves,
//! binding-dual reports on the variation rows, the drop-nonbinding re-solve
//! and capacity-plan comparison tables.

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_model, installed_capacity, ColKind, LPModel, ModelError, RowTag, Sense};
use crate::solve::{check_feasibility, solve_with, SolveError, SolveOptions, Solution, Status};
use crate::types::{DemandLevel, IndexSets, ModelFamily, ModelVariant, ParameterSet, Season, TechKind, VariationRowId};

/// Relative tolerance when comparing capacities of two solves.
pub const CAPACITY_MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{label}: model build failed: {source}")]
    Model {
        label: String,
        #[source]
        source: ModelError,
    },
    #[error("{label}: solve failed: {source}")]
    Solve {
        label: String,
        #[source]
        source: SolveError,
    },
    #[error("{label}: solve ended {status:?}; an optimal solution is needed")]
    NotOptimal { label: String, status: Status },
    #[error("reference plan line {line}: {message}")]
    Reference { line: u64, message: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationLabel {
    Full,
    NoVcNoCost,
    NoVcWithCost,
    VcNoCost,
    Conventional,
}

impl AblationLabel {
    pub const ALL: [AblationLabel; 5] = [
        AblationLabel::Full,
        AblationLabel::NoVcNoCost,
        AblationLabel::NoVcWithCost,
        AblationLabel::VcNoCost,
        AblationLabel::Conventional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AblationLabel::Full => "full",
            AblationLabel::NoVcNoCost => "no_vc_no_cost",
            AblationLabel::NoVcWithCost => "no_vc_with_cost",
            AblationLabel::VcNoCost => "vc_no_cost",
            AblationLabel::Conventional => "conventional",
        }
    }
}

impl std::fmt::Display for AblationLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationCase {
    pub label: AblationLabel,
    pub variant: ModelVariant,
}

impl AblationCase {
    /// The five cases, all carrying the share mode of `base`.
    pub fn all(base: &ModelVariant) -> Vec<AblationCase> {
        let hourly = ModelVariant {
            family: ModelFamily::IsoGep,
            fixed_capacities: None,
            retained_variation_rows: None,
            ..base.clone()
        };
        AblationLabel::ALL
            .into_iter()
            .map(|label| {
                let variant = match label {
                    AblationLabel::Full => hourly.clone().with_variation(true, true),
                    AblationLabel::NoVcNoCost => hourly.clone().with_variation(false, false),
                    AblationLabel::NoVcWithCost => hourly.clone().with_variation(false, true),
                    AblationLabel::VcNoCost => hourly.clone().with_variation(true, false),
                    AblationLabel::Conventional => {
                        ModelVariant::conventional().with_shares(base.share_constraints.clone())
                    }
                };
                AblationCase { label, variant }
            })
            .collect()
    }
}

/// Capacity of one technology in one planning year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEntry {
    pub tech: TechKind,
    /// 1-based planning year.
    pub year: usize,
    /// New capacity built in the year, MW.
    pub built_mw: f64,
    /// Existing plus depreciated new capacity, MW.
    pub installed_mw: f64,
}

/// Builds `x(k, t)` read from `solution`, keyed by (technology, 1-based year).
pub fn builds(model: &LPModel, solution: &Solution) -> BTreeMap<(TechKind, usize), f64> {
    model
        .columns
        .iter()
        .zip(&solution.primal)
        .filter(|(c, _)| c.key.kind == ColKind::X)
        .filter_map(|(c, &v)| c.key.idx.k.map(|k| ((k, c.key.idx.t as usize), v)))
        .collect()
}

/// Built and installed capacity per (technology, year) of an optimal
/// solution of either model family.
pub fn capacity_plan(model: &LPModel, solution: &Solution, params: &ParameterSet, sets: &IndexSets) -> Vec<CapacityEntry> {
    let x = builds(model, solution);
    let grid: Vec<Vec<f64>> = sets
        .techs
        .iter()
        .map(|&k| (1..=sets.years).map(|t| x.get(&(k, t)).copied().unwrap_or(0.0)).collect())
        .collect();
    let installed = installed_capacity(params, sets, &grid);
    let mut out = Vec::new();
    for (kp, &k) in sets.techs.iter().enumerate() {
        for t in 1..=sets.years {
            out.push(CapacityEntry {
                tech: k,
                year: t,
                // Adding zero turns a solver's -0 into 0 for the reports.
                built_mw: grid[kp][t - 1] + 0.0,
                installed_mw: installed[kp][t - 1] + 0.0,
            });
        }
    }
    out
}

/// One violated or certificate row, by name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolatedRow {
    pub row: String,
    pub tag: RowTag,
    pub activity: f64,
    pub rhs: f64,
    pub violation: f64,
}

/// Verdict of the full model with a case's capacities pinned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedCapacityCheck {
    pub status: Status,
    pub feasible: bool,
    pub objective: Option<f64>,
    /// Every FIX row holds at the re-solve optimum (vacuous otherwise).
    pub fixed_rows_hold: bool,
    /// Rows of the infeasibility proof when the re-solve is infeasible.
    pub certificate_rows: Vec<String>,
    pub certificate_verified: Option<bool>,
    /// The case's own hourly schedule carried into the pinned full model:
    /// the rows it breaks. Absent for the block-based case, which has no
    /// hourly schedule.
    pub schedule_violations: Option<Vec<ViolatedRow>>,
    /// Counts of `schedule_violations` (or, failing that, of
    /// `certificate_rows`) per row family.
    pub violated_by_tag: BTreeMap<RowTag, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub label: AblationLabel,
    pub variant: ModelVariant,
    pub status: Status,
    pub objective: Option<f64>,
    pub rows: usize,
    pub columns: usize,
    pub capacities: Vec<CapacityEntry>,
    pub fixed_capacity: Option<FixedCapacityCheck>,
}

/// Wall-clock seconds of one step. Kept out of the serialized reports so
/// reruns produce identical report files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub step: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub tol: f64,
    pub cases: Vec<CaseReport>,
    /// Whether the two cases without variation rows built the same
    /// capacities; `None` unless both solved to optimality.
    pub no_vc_identical: Option<bool>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

/// Compact per-case view of an [`AblationReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSummary {
    pub label: AblationLabel,
    pub status: Status,
    pub objective: Option<f64>,
    pub feasible_under_full: Option<bool>,
    pub violated_rows: usize,
}

impl AblationReport {
    pub fn case(&self, label: AblationLabel) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.label == label)
    }

    pub fn summary(&self) -> Vec<CaseSummary> {
        self.cases
            .iter()
            .map(|c| CaseSummary {
                label: c.label,
                status: c.status,
                objective: c.objective,
                feasible_under_full: c.fixed_capacity.as_ref().map(|f| f.feasible),
                violated_rows: c
                    .fixed_capacity
                    .as_ref()
                    .map_or(0, |f| f.violated_by_tag.values().sum()),
            })
            .collect()
    }
}

fn timed<T>(timings: &mut Vec<Timing>, step: String, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.push(Timing {
        step,
        seconds: start.elapsed().as_secs_f64(),
    });
    out
}

fn build_labeled(params: &ParameterSet, sets: &IndexSets, variant: &ModelVariant, label: &str) -> Result<LPModel, ExperimentError> {
    build_model(params, sets, variant).map_err(|source| ExperimentError::Model {
        label: label.to_string(),
        source,
    })
}

fn solve_labeled(model: &LPModel, opts: &SolveOptions, label: &str) -> Result<Solution, ExperimentError> {
    solve_with(model, opts).map_err(|source| ExperimentError::Solve {
        label: label.to_string(),
        source,
    })
}

/// Carries `point` of `from` over to `to` by column key. Columns only `to`
/// has start at zero (or their lower bound) and are then raised to the least
/// value meeting every row in which they are the sole such column, which
/// reconstructs the variation amounts `r = |Δg|` of a schedule solved
/// without them.
pub fn transfer_point(from: &LPModel, point: &[f64], to: &LPModel) -> Vec<f64> {
    let source: HashMap<_, _> = from.columns.iter().map(|c| c.key).zip(point.iter().copied()).collect();
    let mut missing = vec![false; to.columns.len()];
    let mut out: Vec<f64> = to
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| {
            source.get(&c.key).copied().unwrap_or_else(|| {
                missing[j] = true;
                if c.lower.is_finite() {
                    c.lower
                } else {
                    0.0
                }
            })
        })
        .collect();
    for row in &to.rows {
        let mut sole = None;
        let mut rest = 0.0;
        for &(j, a) in &row.coeffs {
            if missing[j] {
                if sole.is_some() {
                    sole = None;
                    rest = f64::NAN;
                    break;
                }
                sole = Some((j, a));
            } else {
                rest += a * out[j];
            }
        }
        let Some((j, a)) = sole else { continue };
        if rest.is_nan() {
            continue;
        }
        let need = (row.rhs - rest) / a;
        // Raise only where the row bounds the column from below.
        let bounds_below = match row.sense {
            Sense::Le => a < 0.0,
            Sense::Ge => a > 0.0,
            Sense::Eq => true,
        };
        if bounds_below && need > out[j] {
            out[j] = need;
        }
    }
    out
}

fn fixed_capacity_check(
    params: &ParameterSet,
    sets: &IndexSets,
    base: &ModelVariant,
    case: &AblationCase,
    case_model: &LPModel,
    case_solution: &Solution,
    opts: &SolveOptions,
    timings: &mut Vec<Timing>,
) -> Result<FixedCapacityCheck, ExperimentError> {
    let label = format!("{}/fixed", case.label);
    let variant = ModelVariant {
        family: ModelFamily::IsoGep,
        retained_variation_rows: None,
        ..base.clone()
    }
    .with_variation(true, true)
    .with_fixed_capacities(builds(case_model, case_solution));
    let model = build_labeled(params, sets, &variant, &label)?;
    let sol = timed(timings, label.clone(), || solve_labeled(&model, opts, &label))?;

    let fixed_rows_hold = !sol.is_optimal()
        || model
            .rows
            .iter()
            .filter(|r| r.key.tag == RowTag::Fix)
            .all(|r| r.violation(r.activity(&sol.primal)) <= opts.tol);
    let certificate_rows: Vec<String> = sol
        .certificate
        .as_ref()
        .map(|c| c.rows(&model).iter().map(|k| k.name()).collect())
        .unwrap_or_default();
    let schedule_violations = (case.variant.family == ModelFamily::IsoGep).then(|| {
        let point = transfer_point(case_model, &case_solution.primal, &model);
        check_feasibility(&model, &point, opts.tol)
            .into_iter()
            .map(|v| ViolatedRow {
                row: v.key.name(),
                tag: v.key.tag,
                activity: v.activity,
                rhs: v.rhs,
                violation: v.violation,
            })
            .collect::<Vec<_>>()
    });
    let mut violated_by_tag = BTreeMap::new();
    match &schedule_violations {
        Some(rows) => rows.iter().for_each(|r| *violated_by_tag.entry(r.tag).or_insert(0) += 1),
        None if !sol.is_optimal() => {
            if let Some(c) = &sol.certificate {
                c.rows(&model).iter().for_each(|k| *violated_by_tag.entry(k.tag).or_insert(0) += 1);
            }
        }
        None => {}
    }
    Ok(FixedCapacityCheck {
        status: sol.status,
        feasible: sol.is_optimal(),
        objective: sol.is_optimal().then_some(sol.objective),
        fixed_rows_hold,
        certificate_rows,
        certificate_verified: sol.certificate.as_ref().map(|c| c.verified()),
        schedule_violations,
        violated_by_tag,
    })
}

fn same_capacities(a: &[CapacityEntry], b: &[CapacityEntry]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(p, q)| {
            p.tech == q.tech
                && p.year == q.year
                && (p.built_mw - q.built_mw).abs() <= CAPACITY_MATCH_TOL * (1.0 + p.built_mw.abs().max(q.built_mw.abs()))
        })
}

/// Solves every ablation case, then re-solves the full model with each
/// optimal case's capacities pinned. Cases run one after another so their
/// timings are comparable.
pub fn run_ablations(
    params: &ParameterSet,
    sets: &IndexSets,
    base: &ModelVariant,
    opts: &SolveOptions,
) -> Result<AblationReport, ExperimentError> {
    let mut timings = Vec::new();
    let mut cases = Vec::new();
    for case in AblationCase::all(base) {
        let label = case.label.to_string();
        let model = build_labeled(params, sets, &case.variant, &label)?;
        let sol = timed(&mut timings, label.clone(), || solve_labeled(&model, opts, &label))?;
        let (capacities, fixed_capacity) = if sol.is_optimal() {
            let check = fixed_capacity_check(params, sets, base, &case, &model, &sol, opts, &mut timings)?;
            (capacity_plan(&model, &sol, params, sets), Some(check))
        } else {
            (Vec::new(), None)
        };
        cases.push(CaseReport {
            label: case.label,
            variant: case.variant,
            status: sol.status,
            objective: sol.is_optimal().then_some(sol.objective),
            rows: model.rows.len(),
            columns: model.columns.len(),
            capacities,
            fixed_capacity,
        });
    }
    let pick = |l: AblationLabel| cases.iter().find(|c| c.label == l).filter(|c| c.status == Status::Optimal);
    let no_vc_identical = match (pick(AblationLabel::NoVcNoCost), pick(AblationLabel::NoVcWithCost)) {
        (Some(a), Some(b)) => Some(same_capacities(&a.capacities, &b.capacities)),
        _ => None,
    };
    Ok(AblationReport {
        tol: opts.tol,
        cases,
        no_vc_identical,
        timings,
    })
}

/// Tolerances of [`binding_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BindingOptions {
    /// Rows with `|dual|` above this are reported.
    pub dual_tol: f64,
    /// A reported row holds with equality when `|rhs - activity|` is at most
    /// `slack_tol * (1 + |rhs|)`.
    pub slack_tol: f64,
}

impl Default for BindingOptions {
    fn default() -> Self {
        BindingOptions {
            dual_tol: 1e-6,
            slack_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingRow {
    pub row: String,
    pub tag: RowTag,
    pub tech: TechKind,
    pub year: usize,
    pub season: Season,
    pub day_type: crate::types::DayType,
    pub hour: usize,
    pub scenario: usize,
    pub level: DemandLevel,
    pub dual: f64,
    pub activity: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl BindingRow {
    pub fn id(&self) -> VariationRowId {
        VariationRowId {
            up: self.tag == RowTag::Eq9,
            k: self.tech,
            t: self.year,
            ss: self.season,
            i: self.day_type,
            h: self.hour,
            s: self.scenario,
        }
    }
}

/// Binding rows of one (hour, season, demand level).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingGroup {
    pub hour: usize,
    pub season: Season,
    pub level: DemandLevel,
    pub up: usize,
    pub down: usize,
    pub dual_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingReport {
    pub options: BindingOptions,
    pub variation_rows: usize,
    pub rows: Vec<BindingRow>,
    pub groups: Vec<BindingGroup>,
    /// Binding rows per hour of day, `[0]` being hour 1.
    pub by_hour: Vec<usize>,
    /// Every reported row holds with equality.
    pub complementary_slackness: bool,
}

/// Variation-limit rows (EQ9 up, EQ10 down) with a dual above
/// `opts.dual_tol` in an optimal `solution` of `model`.
pub fn binding_report(model: &LPModel, solution: &Solution, sets: &IndexSets, opts: &BindingOptions) -> BindingReport {
    let mut rows = Vec::new();
    let mut variation_rows = 0;
    for (r, &dual) in model.rows.iter().zip(&solution.dual) {
        if !matches!(r.key.tag, RowTag::Eq9 | RowTag::Eq10) {
            continue;
        }
        variation_rows += 1;
        if dual.abs() <= opts.dual_tol {
            continue;
        }
        let idx = r.key.idx;
        let (Some(tech), Some(season), Some(day_type), Some(hour), Some(scenario)) = (idx.k, idx.ss, idx.i, idx.h, idx.s) else {
            continue;
        };
        let activity = r.activity(&solution.primal);
        let level = sets
            .scenario_levels
            .get(scenario as usize - 1)
            .copied()
            .unwrap_or(DemandLevel::Medium);
        rows.push(BindingRow {
            row: r.key.name(),
            tag: r.key.tag,
            tech,
            year: idx.t as usize,
            season,
            day_type,
            hour: hour as usize,
            scenario: scenario as usize,
            level,
            dual,
            activity,
            rhs: r.rhs,
            holds: (r.rhs - activity).abs() <= opts.slack_tol * (1.0 + r.rhs.abs()),
        });
    }
    let mut grouped: BTreeMap<(usize, Season, DemandLevel), BindingGroup> = BTreeMap::new();
    let mut by_hour = vec![0; sets.hours];
    for b in &rows {
        let g = grouped.entry((b.hour, b.season, b.level)).or_insert(BindingGroup {
            hour: b.hour,
            season: b.season,
            level: b.level,
            up: 0,
            down: 0,
            dual_sum: 0.0,
        });
        if b.tag == RowTag::Eq9 {
            g.up += 1;
        } else {
            g.down += 1;
        }
        g.dual_sum += b.dual;
        if let Some(n) = by_hour.get_mut(b.hour - 1) {
            *n += 1;
        }
    }
    BindingReport {
        options: *opts,
        variation_rows,
        complementary_slackness: rows.iter().all(|r| r.holds),
        rows,
        groups: grouped.into_values().collect(),
        by_hour,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropReport {
    pub full_objective: f64,
    pub full_rows: usize,
    pub variation_rows: usize,
    pub retained_rows: usize,
    pub reduced_status: Status,
    pub reduced_objective: Option<f64>,
    pub reduced_total_rows: usize,
    /// `reduced - full`; nonzero values are reported, not treated as errors.
    pub divergence: Option<f64>,
    /// Objectives agree within `tol * (1 + |full|)`.
    pub agree: bool,
    /// The reduced optimum also satisfies every row of the full model.
    pub reduced_point_feasible: bool,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

/// Solves the hourly model, keeps only the variation rows reported binding,
/// rebuilds and re-solves.
pub fn drop_nonbinding_and_resolve(
    params: &ParameterSet,
    sets: &IndexSets,
    variant: &ModelVariant,
    opts: &SolveOptions,
    binding: &BindingOptions,
) -> Result<DropReport, ExperimentError> {
    let mut timings = Vec::new();
    let full_variant = ModelVariant {
        retained_variation_rows: None,
        ..variant.clone()
    };
    let model = build_labeled(params, sets, &full_variant, "full")?;
    let sol = timed(&mut timings, "full".into(), || solve_labeled(&model, opts, "full"))?;
    if !sol.is_optimal() {
        return Err(ExperimentError::NotOptimal {
            label: "full".into(),
            status: sol.status,
        });
    }
    let report = binding_report(&model, &sol, sets, binding);
    let keep: BTreeSet<VariationRowId> = report.rows.iter().map(BindingRow::id).collect();
    let reduced_variant = ModelVariant {
        retained_variation_rows: Some(keep.clone()),
        ..full_variant
    };
    let reduced = build_labeled(params, sets, &reduced_variant, "reduced")?;
    let rsol = timed(&mut timings, "reduced".into(), || solve_labeled(&reduced, opts, "reduced"))?;
    let reduced_objective = rsol.is_optimal().then_some(rsol.objective);
    let divergence = reduced_objective.map(|r| r - sol.objective);
    let reduced_point_feasible = rsol.is_optimal() && {
        let point = transfer_point(&reduced, &rsol.primal, &model);
        check_feasibility(&model, &point, opts.tol).is_empty()
    };
    Ok(DropReport {
        full_objective: sol.objective,
        full_rows: model.rows.len(),
        variation_rows: report.variation_rows,
        retained_rows: keep.len(),
        reduced_status: rsol.status,
        reduced_objective,
        reduced_total_rows: reduced.rows.len(),
        divergence,
        agree: divergence.is_some_and(|d| d.abs() <= opts.tol * (1.0 + sol.objective.abs())),
        reduced_point_feasible,
        timings,
    })
}

/// Reference capacities by (technology, calendar year), MW.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReferencePlan {
    pub entries: BTreeMap<(TechKind, i32), f64>,
}

impl ReferencePlan {
    /// Reads a `tech,year,capacity_mw` table.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, ExperimentError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = reader.headers()?.clone();
        let col = |name: &str| {
            header.iter().position(|h| h == name).ok_or_else(|| ExperimentError::Reference {
                line: 1,
                message: format!("missing column `{name}`"),
            })
        };
        let (tc, yc, cc) = (col("tech")?, col("year")?, col("capacity_mw")?);
        let mut entries = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let err = |message: String| ExperimentError::Reference { line, message };
            let field = |c: usize| row.get(c).unwrap_or("");
            let tech: TechKind = field(tc).parse().map_err(err)?;
            let year: i32 = field(yc).parse().map_err(|_| err(format!("year `{}` is not an integer", field(yc))))?;
            let mw: f64 = field(cc)
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| err(format!("capacity `{}` is not a finite number", field(cc))))?;
            if entries.insert((tech, year), mw).is_some() {
                return Err(err(format!("{tech} {year} listed twice")));
            }
        }
        Ok(ReferencePlan { entries })
    }
}

/// One line of a plan comparison; `None` marks a side with no entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanGap {
    pub tech: TechKind,
    pub year: i32,
    pub model_mw: Option<f64>,
    pub reference_mw: Option<f64>,
    /// `model - reference`, MW.
    pub abs_gap: Option<f64>,
    /// `(model - reference) / reference`; absent when the reference is 0.
    pub rel_gap: Option<f64>,
}

/// Compares installed capacity of `plan` against `reference` over the union
/// of both key sets. Planning year `t` is labeled `first_year + t - 1`.
pub fn compare_plans(plan: &[CapacityEntry], first_year: i32, reference: &ReferencePlan) -> Vec<PlanGap> {
    let mut model: BTreeMap<(TechKind, i32), f64> = BTreeMap::new();
    for e in plan {
        model.insert((e.tech, first_year + e.year as i32 - 1), e.installed_mw);
    }
    let keys: BTreeSet<(TechKind, i32)> = model.keys().chain(reference.entries.keys()).copied().collect();
    keys.into_iter()
        .map(|(tech, year)| {
            let m = model.get(&(tech, year)).copied();
            let r = reference.entries.get(&(tech, year)).copied();
            let abs_gap = m.zip(r).map(|(m, r)| m - r);
            PlanGap {
                tech,
                year,
                model_mw: m,
                reference_mw: r,
                abs_gap,
                rel_gap: abs_gap.zip(r).filter(|&(_, r)| r != 0.0).map(|(g, r)| g / r),
            }
        })
        .collect()
}

/// Marker written for an absent value.
pub const ABSENT: &str = "NA";

/// Writes `tech,year,model_mw,reference_mw,abs_gap,rel_gap`.
pub fn write_plan_comparison<W: Write>(gaps: &[PlanGap], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tech", "year", "model_mw", "reference_mw", "abs_gap", "rel_gap"])?;
    let cell = |v: Option<f64>| v.map_or_else(|| ABSENT.to_string(), |v| v.to_string());
    for g in gaps {
        w.write_record([
            g.tech.to_string(),
            g.year.to_string(),
            cell(g.model_mw),
            cell(g.reference_mw),
            cell(g.abs_gap),
            cell(g.rel_gap),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes `tech,year,built_mw,installed_mw` with 1-based planning years.
pub fn write_capacity_plan<W: Write>(plan: &[CapacityEntry], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tech", "year", "built_mw", "installed_mw"])?;
    for e in plan {
        w.write_record([e.tech.to_string(), e.year.to_string(), e.built_mw.to_string(), e.installed_mw.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes the binding rows as `row,tag,tech,year,season,day_type,hour,scenario,level,dual,activity,rhs,holds`.
pub fn write_binding_rows<W: Write>(report: &BindingReport, out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "row", "tag", "tech", "year", "season", "day_type", "hour", "scenario", "level", "dual", "activity", "rhs", "holds",
    ])?;
    for b in &report.rows {
        w.write_record([
            b.row.clone(),
            b.tag.as_str().to_string(),
            b.tech.to_string(),
            b.year.to_string(),
            b.season.to_string(),
            b.day_type.to_string(),
            b.hour.to_string(),
            b.scenario.to_string(),
            b.level.letter().to_string(),
            b.dual.to_string(),
            b.activity.to_string(),
            b.rhs.to_string(),
            b.holds.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
