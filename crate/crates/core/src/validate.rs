//! Consistency checks over a [`ParameterSet`]. Violations are data: the
//! checker never panics, whatever the shapes or values it is handed.

use std::fmt;

use ndarray::{ArrayViewD, Dimension};
use serde::Serialize;

use crate::types::{IndexSets, ParameterSet};

/// Sum-to-one tolerance on scenario probabilities.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    IndexSets,
    Shape,
    NotFinite,
    Negative,
    OutOfUnitRange,
    BoundInversion,
    ProbabilitySum,
    DayCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub parameter: &'static str,
    /// Labels of the offending index tuple, in the parameter's axis order.
    pub index: Vec<String>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}): {}", self.parameter, self.index.join(","), self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    fn push(&mut self, kind: ViolationKind, parameter: &'static str, index: Vec<String>, message: String) {
        self.violations.push(Violation {
            kind,
            parameter,
            index,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Axis {
    K,
    T,
    Ss,
    I,
    H,
    S,
}

struct Labeler<'a> {
    sets: &'a IndexSets,
}

impl Labeler<'_> {
    fn len(&self, axis: Axis) -> usize {
        match axis {
            Axis::K => self.sets.techs.len(),
            Axis::T => self.sets.years,
            Axis::Ss => self.sets.seasons.len(),
            Axis::I => self.sets.day_types.len(),
            Axis::H => self.sets.hours,
            Axis::S => self.sets.scenarios(),
        }
    }

    fn label(&self, axis: Axis, pos: usize) -> String {
        let fallback = || pos.to_string();
        match axis {
            Axis::K => self.sets.techs.get(pos).map_or_else(fallback, |k| k.to_string()),
            Axis::T => format!("t{}", pos + 1),
            Axis::Ss => self.sets.seasons.get(pos).map_or_else(fallback, |x| x.to_string()),
            Axis::I => self.sets.day_types.get(pos).map_or_else(fallback, |x| x.to_string()),
            Axis::H => format!("h{}", pos + 1),
            Axis::S => format!("s{}", pos + 1),
        }
    }

    fn labels(&self, axes: &[Axis], idx: &[usize]) -> Vec<String> {
        axes.iter().zip(idx).map(|(&a, &p)| self.label(a, p)).collect()
    }
}

/// Checks every invariant of `params` against `sets`. An empty report means
/// the set is safe to hand to the model builders.
pub fn validate(params: &ParameterSet, sets: &IndexSets) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_sets(sets, &mut report);
    let lab = Labeler { sets };

    use Axis::*;
    let arrays: Vec<(&'static str, ArrayViewD<f64>, Vec<Axis>)> = vec![
        ("T", params.days.view().into_dyn(), vec![I, Ss]),
        ("C", params.variable_cost.view().into_dyn(), vec![K, T]),
        ("CV", params.variation_cost.view().into_dyn(), vec![K, T]),
        ("IV", params.investment_cost.view().into_dyn(), vec![K, T]),
        ("FC", params.fixed_cost.view().into_dyn(), vec![K, T]),
        ("XE", params.existing_capacity.view().into_dyn(), vec![K, T]),
        ("dep", params.depreciation.view().into_dyn(), vec![K]),
        ("lifespan", params.lifespan.view().into_dyn(), vec![K]),
        ("VU", params.variation_up.view().into_dyn(), vec![K, Ss]),
        ("VD", params.variation_down.view().into_dyn(), vec![K, Ss]),
        ("D", params.demand.view().into_dyn(), vec![Ss, I, H, S]),
        ("IG", params.initial_generation.view().into_dyn(), vec![K, Ss, I, S]),
        ("Cap", params.capability.view().into_dyn(), vec![K, Ss, H]),
        ("alphaH", params.share_max.view().into_dyn(), vec![K, T]),
        ("alphaL", params.share_min.view().into_dyn(), vec![K, T]),
        ("Prob", params.probability.view().into_dyn(), vec![Ss, I, S]),
        ("GRW", params.growth.view().into_dyn(), vec![T]),
        ("alphaRES", params.reserve_fraction.view().into_dyn(), vec![T]),
    ];

    let mut shapes_ok = true;
    for (name, arr, axes) in &arrays {
        let expected: Vec<usize> = axes.iter().map(|&a| lab.len(a)).collect();
        if arr.shape() != expected.as_slice() {
            shapes_ok = false;
            report.push(
                ViolationKind::Shape,
                name,
                vec![],
                format!("shape {:?}, expected {:?}", arr.shape(), expected),
            );
            continue;
        }
        for (idx, &v) in arr.indexed_iter() {
            let idx = idx.slice();
            if !v.is_finite() {
                report.push(
                    ViolationKind::NotFinite,
                    name,
                    lab.labels(axes, idx),
                    format!("value {v} is not finite"),
                );
                continue;
            }
            let unit = matches!(*name, "Cap" | "IG" | "VU" | "VD" | "alphaH" | "alphaL" | "alphaRES" | "dep" | "Prob");
            if unit && !(0.0..=1.0).contains(&v) {
                report.push(
                    ViolationKind::OutOfUnitRange,
                    name,
                    lab.labels(axes, idx),
                    format!("value {v} outside [0, 1]"),
                );
            } else if v < 0.0 {
                report.push(
                    ViolationKind::Negative,
                    name,
                    lab.labels(axes, idx),
                    format!("value {v} is negative"),
                );
            }
        }
    }

    if !params.discount_rate.is_finite() || params.discount_rate < 0.0 {
        report.push(
            ViolationKind::Negative,
            "discount_rate",
            vec![],
            format!("discount rate {} must be finite and nonnegative", params.discount_rate),
        );
    }

    if !shapes_ok {
        return report;
    }

    for ((k, t), &lo) in params.share_min.indexed_iter() {
        let hi = params.share_max[[k, t]];
        if lo > hi {
            report.push(
                ViolationKind::BoundInversion,
                "alphaL",
                lab.labels(&[K, T], &[k, t]),
                format!("alphaL {lo} exceeds alphaH {hi}"),
            );
        }
    }

    for (ssp, ss) in sets.seasons.iter().enumerate() {
        for (ip, i) in sets.day_types.iter().enumerate() {
            if sets.scenarios() == 0 {
                continue;
            }
            let sum: f64 = params.probability.slice(ndarray::s![ssp, ip, ..]).sum();
            if (sum - 1.0).abs() > PROBABILITY_TOL || !sum.is_finite() {
                report.push(
                    ViolationKind::ProbabilitySum,
                    "Prob",
                    vec![ss.to_string(), i.to_string()],
                    format!("scenario probabilities sum to {sum}"),
                );
            }
        }
    }

    let total_days: f64 = params.days.sum();
    if (total_days - f64::from(sets.days_in_year)).abs() > 1e-9 {
        report.push(
            ViolationKind::DayCount,
            "T",
            vec![],
            format!("day counts sum to {total_days}, expected {}", sets.days_in_year),
        );
    }

    report
}

fn check_sets(sets: &IndexSets, report: &mut ValidationReport) {
    fn strictly_ascending<T: Ord>(v: &[T]) -> bool {
        v.windows(2).all(|w| w[0] < w[1])
    }
    let mut bad = |what: String| report.push(ViolationKind::IndexSets, "sets", vec![], what);
    if !strictly_ascending(&sets.techs) {
        bad("technologies must be unique and in canonical order".into());
    }
    if !strictly_ascending(&sets.seasons) {
        bad("seasons must be unique and in canonical order".into());
    }
    if !strictly_ascending(&sets.day_types) {
        bad("day types must be unique and in canonical order".into());
    }
    if sets.years == 0 || sets.hours == 0 || sets.scenarios() == 0 {
        bad("years, hours and scenarios must be nonempty".into());
    }
    if sets.days_in_year != 365 && sets.days_in_year != 366 {
        bad(format!("days_in_year {} is neither 365 nor 366", sets.days_in_year));
    }
}

/// Convenience for callers that treat violations as fatal.
pub fn ensure_valid(params: &ParameterSet, sets: &IndexSets) -> Result<(), ValidationReport> {
    let report = validate(params, sets);
    if report.is_empty() {
        Ok(())
    } else {
        Err(report)
    }
}
