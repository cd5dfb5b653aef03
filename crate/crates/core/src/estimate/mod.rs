//! Parameter estimation from classified hourly records: demand scenarios,
//! initial-generation bins, capability factors, variation limits, scenario
//! probabilities and demand growth, assembled into a [`ParameterSet`].

pub mod histogram;

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{classify_day, count_day_types, season_of, DayCounts, HourlyRecord};
use crate::model::costs::{apply_costs, ontario_2016_costs, TechCosts};
use crate::types::{DayType, DemandLevel, IndexSets, ParameterSet, Season, TechKind};

pub use histogram::{median, Histogram};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("{cell}: no samples")]
    NoSamples { cell: String },
    #[error("{cell}: only {distinct} distinct samples, need at least 3")]
    TooFewDistinct { cell: String, distinct: usize },
    #[error("{cell}: every sample equals {value}")]
    Degenerate { cell: String, value: f64 },
    #[error("{cell}: non-finite sample {value}")]
    NotFinite { cell: String, value: f64 },
    #[error("{cell}: installed capacity is zero")]
    ZeroInstalled { cell: String },
    #[error("{cell}: capability reference is zero")]
    ZeroReference { cell: String },
    #[error("invalid study input: {0}")]
    Input(String),
}

fn cell_name(parts: &[&dyn std::fmt::Display]) -> String {
    parts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("/")
}

/// Average daily demand per day of year (`1..=366`), over the years in which
/// that day of year falls on `day_type`. Days of year that never match are
/// absent from the map.
pub fn average_daily_demand(
    records: &[HourlyRecord],
    holidays: &BTreeSet<NaiveDate>,
    day_type: DayType,
) -> BTreeMap<u32, f64> {
    let mut daily: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(d) = r.demand {
            let e = daily.entry(r.date).or_default();
            e.0 += d;
            e.1 += 1;
        }
    }
    let mut per_day: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (date, (sum, hours)) in daily {
        if classify_day(date, holidays).day_type != day_type {
            continue;
        }
        let e = per_day.entry(date.ordinal()).or_default();
        e.0 += sum / hours as f64;
        e.1 += 1;
    }
    per_day
        .into_iter()
        .map(|(day, (sum, years))| (day, sum / years as f64))
        .collect()
}

/// Low, medium and high demand of one cell-hour.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandLevels {
    /// Bin medians, `[L, M, H]`; an empty bin falls back to its center.
    pub levels: [f64; 3],
    pub probabilities: [f64; 3],
    pub histogram: Histogram,
}

/// Reduces one cell-hour's demand samples to three levels.
pub fn demand_levels(samples: &[f64], cell: &str) -> Result<DemandLevels, EstimateError> {
    let distinct = samples.iter().map(|v| v.to_bits()).collect::<BTreeSet<_>>().len();
    if distinct < 3 {
        return Err(EstimateError::TooFewDistinct {
            cell: cell.to_string(),
            distinct,
        });
    }
    let histogram = Histogram::equal_width(samples, 3, cell)?;
    let p = histogram.probabilities();
    Ok(DemandLevels {
        levels: [0, 1, 2].map(|j| histogram.representative(j)),
        probabilities: [p[0], p[1], p[2]],
        histogram,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandScenarios {
    pub season: Season,
    pub day_type: DayType,
    /// Distinct days contributing samples.
    pub days: usize,
    /// One entry per hour `1..=24`.
    pub hourly: Vec<DemandLevels>,
    /// Probability of a day being L, M or H: the mean over hours of the
    /// hourly bin frequencies. A day keeps one level for all 24 hours.
    pub level_probabilities: [f64; 3],
}

pub fn demand_scenarios(
    records: &[HourlyRecord],
    holidays: &BTreeSet<NaiveDate>,
    season: Season,
    day_type: DayType,
) -> Result<DemandScenarios, EstimateError> {
    let mut by_hour: Vec<Vec<f64>> = vec![Vec::new(); 24];
    let mut days = BTreeSet::new();
    for r in records {
        let Some(d) = r.demand else { continue };
        let cell = classify_day(r.date, holidays);
        if cell.season == season && cell.day_type == day_type {
            by_hour[usize::from(r.hour) - 1].push(d);
            days.insert(r.date);
        }
    }
    let hourly = by_hour
        .iter()
        .enumerate()
        .map(|(h, xs)| demand_levels(xs, &cell_name(&[&season, &day_type, &format!("h{}", h + 1)])))
        .collect::<Result<Vec<_>, _>>()?;
    let mut level_probabilities = [0.0; 3];
    for lv in &hourly {
        for j in 0..3 {
            level_probabilities[j] += lv.probabilities[j] / hourly.len() as f64;
        }
    }
    // Renormalize against rounding in the running mean.
    let total: f64 = level_probabilities.iter().sum();
    level_probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(DemandScenarios {
        season,
        day_type,
        days: days.len(),
        hourly,
        level_probabilities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationBin {
    /// Output as a fraction of installed capacity.
    pub value: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialGenerationBins {
    /// Higher bin first.
    pub bins: Vec<GenerationBin>,
    pub samples: usize,
    pub histogram: Option<Histogram>,
}

/// Two-bin reduction of hour-24 output fractions. Solar is pinned to a
/// single zero bin; biofuel keeps only its more frequent bin; a sample with
/// no spread collapses to one bin.
pub fn initial_generation_bins_from_samples(
    k: TechKind,
    fractions: &[f64],
    cell: &str,
) -> Result<InitialGenerationBins, EstimateError> {
    let samples = fractions.len();
    if k == TechKind::Solar {
        return Ok(InitialGenerationBins {
            bins: vec![GenerationBin {
                value: 0.0,
                probability: 1.0,
            }],
            samples,
            histogram: None,
        });
    }
    let histogram = match Histogram::equal_width(fractions, 2, cell) {
        Ok(h) => h,
        Err(EstimateError::Degenerate { value, .. }) => {
            return Ok(InitialGenerationBins {
                bins: vec![GenerationBin {
                    value,
                    probability: 1.0,
                }],
                samples,
                histogram: None,
            })
        }
        Err(e) => return Err(e),
    };
    let p = histogram.probabilities();
    let high = GenerationBin {
        value: histogram.representative(1),
        probability: p[1],
    };
    let low = GenerationBin {
        value: histogram.representative(0),
        probability: p[0],
    };
    let bins = if k == TechKind::Biofuel {
        let dominant = if histogram.counts[1] >= histogram.counts[0] { high } else { low };
        vec![GenerationBin {
            value: dominant.value,
            probability: 1.0,
        }]
    } else {
        vec![high, low]
    };
    Ok(InitialGenerationBins {
        bins,
        samples,
        histogram: Some(histogram),
    })
}

/// Hour-24 output over installed capacity, sampled over every day of
/// `season` in the records.
pub fn initial_generation_bins(
    records: &[HourlyRecord],
    k: TechKind,
    season: Season,
) -> Result<InitialGenerationBins, EstimateError> {
    let cell = cell_name(&[&k, &season]);
    let mut fractions = Vec::new();
    for r in records {
        if r.hour != 24 || season_of(r.date) != season {
            continue;
        }
        let (Some(out), Some(inst)) = (r.output_of(k), r.installed_of(k)) else {
            continue;
        };
        if inst <= 0.0 {
            return Err(EstimateError::ZeroInstalled {
                cell: format!("{cell}/{}", r.date),
            });
        }
        fractions.push(out / inst);
    }
    if fractions.is_empty() && k != TechKind::Solar {
        return Err(EstimateError::NoSamples { cell });
    }
    initial_generation_bins_from_samples(k, &fractions, &cell)
}

/// Mean that is exact for a constant sample.
fn stable_mean(xs: &[f64]) -> f64 {
    let first = xs[0];
    first + xs.iter().map(|x| x - first).sum::<f64>() / xs.len() as f64
}

/// Mean of capability over installed capacity at hour `hour` over the days
/// of `season`, optionally restricted to one calendar year. Hours with zero
/// installed capacity carry no information and are skipped.
pub fn capability_factor(
    records: &[HourlyRecord],
    k: TechKind,
    season: Season,
    hour: u8,
    year: Option<i32>,
) -> Result<f64, EstimateError> {
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.hour == hour && season_of(r.date) == season)
        .filter(|r| year.is_none_or(|y| r.date.year() == y))
        .filter_map(|r| match (r.capability_of(k), r.installed_of(k)) {
            (Some(c), Some(i)) if i > 0.0 => Some(c / i),
            _ => None,
        })
        .collect();
    if ratios.is_empty() {
        return Err(EstimateError::NoSamples {
            cell: cell_name(&[&k, &season, &format!("h{hour}")]),
        });
    }
    Ok(stable_mean(&ratios))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationLimits {
    pub up: f64,
    pub down: f64,
    /// Largest hour-to-hour rise and fall observed, MW.
    pub max_rise: f64,
    pub max_fall: f64,
    /// Season-mean capability, MW.
    pub reference: f64,
    pub pairs: usize,
}

/// Variation limits of one consecutive output series against a capability
/// reference.
pub fn variation_limits_from_series(series: &[f64], reference: f64, cell: &str) -> Result<VariationLimits, EstimateError> {
    let deltas: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    limits_from_deltas(&deltas, reference, cell)
}

fn limits_from_deltas(deltas: &[f64], reference: f64, cell: &str) -> Result<VariationLimits, EstimateError> {
    if deltas.is_empty() {
        return Err(EstimateError::NoSamples { cell: cell.to_string() });
    }
    if reference <= 0.0 || !reference.is_finite() {
        return Err(EstimateError::ZeroReference { cell: cell.to_string() });
    }
    let max_rise = deltas.iter().fold(0.0f64, |m, &d| m.max(d));
    let max_fall = deltas.iter().fold(0.0f64, |m, &d| m.max(-d));
    Ok(VariationLimits {
        up: max_rise / reference,
        down: max_fall / reference,
        max_rise,
        max_fall,
        reference,
        pairs: deltas.len(),
    })
}

/// Hour-to-hour output changes of `k` within `season`, hour 24 followed by
/// hour 1 of the next day included, divided by the season-mean capability.
pub fn variation_limits(
    records: &[HourlyRecord],
    k: TechKind,
    season: Season,
    years: Option<RangeInclusive<i32>>,
) -> Result<VariationLimits, EstimateError> {
    let cell = cell_name(&[&k, &season]);
    let in_scope = |r: &HourlyRecord| season_of(r.date) == season && years.as_ref().is_none_or(|y| y.contains(&r.date.year()));
    let mut output: BTreeMap<(NaiveDate, u8), f64> = BTreeMap::new();
    let mut capability = Vec::new();
    for r in records.iter().filter(|r| in_scope(r)) {
        if let Some(o) = r.output_of(k) {
            output.insert((r.date, r.hour), o);
        }
        if let Some(c) = r.capability_of(k) {
            capability.push(c);
        }
    }
    let deltas: Vec<f64> = output
        .iter()
        .filter_map(|(&(date, hour), &o)| {
            let next = if hour == 24 { (date + Duration::days(1), 1) } else { (date, hour + 1) };
            output.get(&next).map(|&n| n - o)
        })
        .collect();
    if capability.is_empty() {
        return Err(EstimateError::ZeroReference { cell });
    }
    limits_from_deltas(&deltas, stable_mean(&capability), &cell)
}

/// Technology order of the scenario table: the first listed varies slowest.
pub const SCENARIO_TECH_ORDER: [TechKind; 6] = [
    TechKind::Nuclear,
    TechKind::Hydro,
    TechKind::Gas,
    TechKind::Wind,
    TechKind::Solar,
    TechKind::Biofuel,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRow {
    pub level: DemandLevel,
    /// 0-based bin per technology of the table, 0 being the higher bin.
    pub bins: Vec<usize>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioTable {
    pub techs: Vec<TechKind>,
    pub rows: Vec<ScenarioRow>,
}

impl ScenarioTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total_probability(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).sum()
    }

    pub fn bin_of(&self, row: usize, k: TechKind) -> Option<usize> {
        let pos = self.techs.iter().position(|&x| x == k)?;
        Some(self.rows[row].bins[pos])
    }
}

/// Cartesian product of demand levels (outermost) and per-technology bins,
/// technologies in [`SCENARIO_TECH_ORDER`]. Row probability is the product
/// of the component probabilities.
pub fn enumerate_scenarios(bins: &[(TechKind, Vec<f64>)], levels: &[(DemandLevel, f64)]) -> ScenarioTable {
    let mut ordered: Vec<&(TechKind, Vec<f64>)> = bins.iter().collect();
    ordered.sort_by_key(|(k, _)| SCENARIO_TECH_ORDER.iter().position(|x| x == k));
    let techs: Vec<TechKind> = ordered.iter().map(|(k, _)| *k).collect();
    let radix: Vec<usize> = ordered.iter().map(|(_, p)| p.len()).collect();
    let combos: usize = radix.iter().product();

    let mut rows = Vec::with_capacity(combos * levels.len());
    for &(level, level_p) in levels {
        for mut code in 0..combos {
            let mut choice = vec![0; radix.len()];
            for pos in (0..radix.len()).rev() {
                choice[pos] = code % radix[pos];
                code /= radix[pos];
            }
            let probability = choice
                .iter()
                .zip(&ordered)
                .map(|(&b, (_, p))| p[b])
                .product::<f64>()
                * level_p;
            rows.push(ScenarioRow {
                level,
                bins: choice,
                probability,
            });
        }
    }
    ScenarioTable { techs, rows }
}

/// `(1 + rate)^(t-1)` for 1-based year `t`.
pub fn growth_factor(t: usize, annual_rate: f64) -> f64 {
    assert!(t >= 1, "years are 1-based");
    (1.0 + annual_rate).powi(t as i32 - 1)
}

/// Study-level inputs that are configured rather than estimated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyInputs {
    /// Calendar year whose days define `T(i, ss)`.
    pub reference_year: i32,
    /// Year whose capability data define `Cap`; defaults to the reference year.
    #[serde(default)]
    pub capability_year: Option<i32>,
    /// Inclusive year range used for `VU`/`VD`; defaults to all data.
    #[serde(default)]
    pub variation_years: Option<(i32, i32)>,
    pub horizon_years: usize,
    pub growth_rate: f64,
    pub discount_rate: f64,
    /// `alphaRES(t)`: one value for every year, or one per year.
    pub reserve_fraction: Vec<f64>,
    #[serde(default = "ontario_2016_costs")]
    pub costs: BTreeMap<TechKind, TechCosts>,
    /// `XE(k, t)` in MW, one value or one per year. Technologies left out
    /// use the installed capacity of the last reference-year record.
    #[serde(default)]
    pub existing_capacity: BTreeMap<TechKind, Vec<f64>>,
    /// Planned capacity share per technology, one value or one per year.
    /// Technologies left out use their share of existing capacity in year 1.
    #[serde(default)]
    pub share_plan: BTreeMap<TechKind, Vec<f64>>,
    /// Share bounds are `plan ± share_band`, clamped to `[0, 1]`.
    pub share_band: f64,
}

impl StudyInputs {
    pub fn new(reference_year: i32, horizon_years: usize, reserve_fraction: f64) -> Self {
        StudyInputs {
            reference_year,
            capability_year: None,
            variation_years: None,
            horizon_years,
            growth_rate: 0.003,
            discount_rate: 0.03,
            reserve_fraction: vec![reserve_fraction],
            costs: ontario_2016_costs(),
            existing_capacity: BTreeMap::new(),
            share_plan: BTreeMap::new(),
            share_band: 0.05,
        }
    }
}

fn per_year(values: &[f64], horizon: usize, what: &str) -> Result<Vec<f64>, EstimateError> {
    match values.len() {
        1 => Ok(vec![values[0]; horizon]),
        n if n == horizon => Ok(values.to_vec()),
        n => Err(EstimateError::Input(format!(
            "{what} has {n} values; expected 1 or {horizon}"
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IgReport {
    pub tech: TechKind,
    pub season: Season,
    pub samples: usize,
    pub bin_edges: Vec<f64>,
    pub bins: Vec<GenerationBin>,
    /// True when a zero-probability copy was added to keep the scenario count.
    pub padded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandReport {
    pub season: Season,
    pub day_type: DayType,
    pub days: usize,
    pub level_probabilities: [f64; 3],
    /// Per hour: bin edges and counts.
    pub bin_edges: Vec<Vec<f64>>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub tech: TechKind,
    pub season: Season,
    pub limits: VariationLimits,
}

/// Human-readable trace of every estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationReport {
    pub records: usize,
    pub day_counts: DayCounts,
    pub demand: Vec<DemandReport>,
    pub initial_generation: Vec<IgReport>,
    pub capability_samples_year: i32,
    pub variation: Vec<VariationReport>,
    pub existing_capacity_year1: BTreeMap<TechKind, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimation {
    pub params: ParameterSet,
    pub sets: IndexSets,
    pub report: EstimationReport,
}

/// Number of initial-generation bins each technology contributes to the
/// scenario table.
pub fn scenario_bin_count(k: TechKind) -> usize {
    match k {
        TechKind::Solar | TechKind::Biofuel => 1,
        _ => 2,
    }
}

/// Runs every estimator over `records` and assembles the full parameter set
/// for the six-technology, four-season, two-day-type, 24-hour layout.
pub fn estimate_parameters(
    records: &[HourlyRecord],
    holidays: &BTreeSet<NaiveDate>,
    inputs: &StudyInputs,
) -> Result<Estimation, EstimateError> {
    let horizon = inputs.horizon_years;
    if horizon == 0 {
        return Err(EstimateError::Input("horizon_years must be positive".into()));
    }
    let day_counts = count_day_types(inputs.reference_year, holidays);

    let mut demand = Vec::new();
    for ss in Season::ALL {
        for i in DayType::ALL {
            demand.push(demand_scenarios(records, holidays, ss, i)?);
        }
    }

    let mut ig_bins: BTreeMap<(TechKind, Season), Vec<GenerationBin>> = BTreeMap::new();
    let mut ig_report = Vec::new();
    for k in TechKind::ALL {
        for ss in Season::ALL {
            let est = initial_generation_bins(records, k, ss)?;
            let mut bins = est.bins.clone();
            let padded = bins.len() < scenario_bin_count(k);
            while bins.len() < scenario_bin_count(k) {
                bins.push(GenerationBin {
                    value: bins[0].value,
                    probability: 0.0,
                });
            }
            ig_report.push(IgReport {
                tech: k,
                season: ss,
                samples: est.samples,
                bin_edges: est.histogram.map(|h| h.bin_edges).unwrap_or_default(),
                bins: bins.clone(),
                padded,
            });
            ig_bins.insert((k, ss), bins);
        }
    }

    let levels_per_cell = 3;
    let scenario_count = levels_per_cell * TechKind::ALL.iter().map(|&k| scenario_bin_count(k)).product::<usize>();
    let mut scenario_levels = Vec::with_capacity(scenario_count);
    for level in DemandLevel::ALL {
        scenario_levels.extend(std::iter::repeat_n(level, scenario_count / levels_per_cell));
    }
    let sets = IndexSets {
        techs: TechKind::ALL.to_vec(),
        years: horizon,
        seasons: Season::ALL.to_vec(),
        day_types: DayType::ALL.to_vec(),
        hours: 24,
        scenario_levels,
        days_in_year: day_counts.total() as u16,
    };
    let mut params = ParameterSet::zeros(&sets);
    params.discount_rate = inputs.discount_rate;
    params.horizon_years = horizon;
    params.days = day_counts.to_array(&sets);

    for (cell_pos, dem) in demand.iter().enumerate() {
        let ss = cell_pos / 2;
        let i = cell_pos % 2;
        let tech_bins: Vec<(TechKind, Vec<f64>)> = TechKind::ALL
            .iter()
            .map(|&k| (k, ig_bins[&(k, dem.season)].iter().map(|b| b.probability).collect()))
            .collect();
        let levels: Vec<(DemandLevel, f64)> = DemandLevel::ALL
            .iter()
            .map(|&l| (l, dem.level_probabilities[l.ordinal()]))
            .collect();
        let table = enumerate_scenarios(&tech_bins, &levels);
        for (s, row) in table.rows.iter().enumerate() {
            params.probability[[ss, i, s]] = row.probability;
            for h in 0..24 {
                params.demand[[ss, i, h, s]] = dem.hourly[h].levels[row.level.ordinal()];
            }
            for (kp, &k) in sets.techs.iter().enumerate() {
                let b = table.bin_of(s, k).expect("every technology is in the table");
                params.initial_generation[[kp, ss, i, s]] = ig_bins[&(k, dem.season)][b].value;
            }
        }
    }

    let cap_year = inputs.capability_year.unwrap_or(inputs.reference_year);
    for (kp, &k) in sets.techs.iter().enumerate() {
        for (ssp, &ss) in sets.seasons.iter().enumerate() {
            for h in 0..24 {
                params.capability[[kp, ssp, h]] = if k == TechKind::Solar && !has_capability(records, k) {
                    0.0
                } else {
                    capability_factor(records, k, ss, h as u8 + 1, Some(cap_year))?
                };
            }
        }
    }

    let mut variation = Vec::new();
    let years = inputs.variation_years.map(|(a, b)| a..=b);
    for (kp, &k) in sets.techs.iter().enumerate() {
        for (ssp, &ss) in sets.seasons.iter().enumerate() {
            let limits = variation_limits(records, k, ss, years.clone())?;
            params.variation_up[[kp, ssp]] = limits.up.min(1.0);
            params.variation_down[[kp, ssp]] = limits.down.min(1.0);
            variation.push(VariationReport {
                tech: k,
                season: ss,
                limits,
            });
        }
    }

    for t in 1..=horizon {
        params.growth[t - 1] = growth_factor(t, inputs.growth_rate);
    }
    let reserve = per_year(&inputs.reserve_fraction, horizon, "reserve_fraction")?;
    params.reserve_fraction = ndarray::Array1::from(reserve);

    apply_costs(&mut params, &sets, &inputs.costs)
        .map_err(|k| EstimateError::Input(format!("no cost entry for {k}")))?;

    let mut existing_capacity_year1 = BTreeMap::new();
    for (kp, &k) in sets.techs.iter().enumerate() {
        let xe = match inputs.existing_capacity.get(&k) {
            Some(v) => per_year(v, horizon, &format!("existing_capacity.{k}"))?,
            None => vec![last_installed(records, k, inputs.reference_year)?; horizon],
        };
        for (tp, v) in xe.into_iter().enumerate() {
            params.existing_capacity[[kp, tp]] = v;
        }
        existing_capacity_year1.insert(k, params.existing_capacity[[kp, 0]]);
    }
    apply_share_plan(&mut params, &sets, &inputs.share_plan, inputs.share_band)?;

    let report = EstimationReport {
        records: records.len(),
        day_counts,
        demand: demand
            .iter()
            .map(|d| DemandReport {
                season: d.season,
                day_type: d.day_type,
                days: d.days,
                level_probabilities: d.level_probabilities,
                bin_edges: d.hourly.iter().map(|h| h.histogram.bin_edges.clone()).collect(),
                counts: d.hourly.iter().map(|h| h.histogram.counts.clone()).collect(),
            })
            .collect(),
        initial_generation: ig_report,
        capability_samples_year: cap_year,
        variation,
        existing_capacity_year1,
    };
    Ok(Estimation { params, sets, report })
}

fn has_capability(records: &[HourlyRecord], k: TechKind) -> bool {
    records.iter().any(|r| r.capability_of(k).is_some())
}

fn last_installed(records: &[HourlyRecord], k: TechKind, year: i32) -> Result<f64, EstimateError> {
    records
        .iter()
        .filter(|r| r.date.year() == year)
        .filter_map(|r| r.installed_of(k).map(|v| ((r.date, r.hour), v)))
        .max_by_key(|(key, _)| *key)
        .map(|(_, v)| v)
        .ok_or_else(|| EstimateError::Input(format!("no installed capacity for {k} in {year}")))
}

/// Sets `alphaH`/`alphaL` to `plan ± band` clamped to `[0, 1]`. Missing
/// technologies take their share of year-1 existing capacity.
pub fn apply_share_plan(
    params: &mut ParameterSet,
    sets: &IndexSets,
    plan: &BTreeMap<TechKind, Vec<f64>>,
    band: f64,
) -> Result<(), EstimateError> {
    let horizon = sets.years;
    let total_xe: f64 = params.existing_capacity.column(0).sum();
    for (kp, &k) in sets.techs.iter().enumerate() {
        let shares = match plan.get(&k) {
            Some(v) => per_year(v, horizon, &format!("share_plan.{k}"))?,
            None if total_xe > 0.0 => vec![params.existing_capacity[[kp, 0]] / total_xe; horizon],
            None => vec![0.0; horizon],
        };
        for (tp, share) in shares.into_iter().enumerate() {
            params.share_max[[kp, tp]] = (share + band).clamp(0.0, 1.0);
            params.share_min[[kp, tp]] = (share - band).clamp(0.0, 1.0);
        }
    }
    Ok(())
}
