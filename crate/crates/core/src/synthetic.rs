//! Seeded generators: valid random parameter sets for property tests, and
//! hourly record corpora with planted statistics for the estimators.

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{ontario_statutory_holidays, season_of, HourlyRecord};
use crate::types::{IndexSets, ParameterSet, Season, TechKind};

/// A parameter set that passes [`crate::validate::validate`] for `sets`.
///
/// Capability stays in `[0.3, 1]` and hour-0 output never exceeds the
/// smallest capability of its technology, so most draws are feasible once
/// enough capacity is built. Share bounds are `[0, 1]`.
pub fn random_parameters(sets: &IndexSets, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParameterSet::zeros(sets);
    let (nk, nt) = (sets.techs.len(), sets.years);
    for kp in 0..nk {
        p.lifespan[kp] = f64::from(rng.gen_range(20..=40));
        p.depreciation[kp] = 1.0 / p.lifespan[kp];
        for tp in 0..nt {
            p.investment_cost[[kp, tp]] = rng.gen_range(50.0..500.0);
            p.fixed_cost[[kp, tp]] = rng.gen_range(0.0..20.0);
            p.variable_cost[[kp, tp]] = rng.gen_range(0.0..10.0);
            p.variation_cost[[kp, tp]] = 0.1 * p.variable_cost[[kp, tp]];
            p.existing_capacity[[kp, tp]] = if rng.gen_bool(0.5) { rng.gen_range(0.0..40.0) } else { 0.0 };
        }
    }
    p.capability.iter_mut().for_each(|v| *v = rng.gen_range(0.3..=1.0));
    p.variation_up.iter_mut().for_each(|v| *v = rng.gen_range(0.05..=1.0));
    p.variation_down.iter_mut().for_each(|v| *v = rng.gen_range(0.05..=1.0));
    p.demand.iter_mut().for_each(|v| *v = rng.gen_range(20.0..100.0));
    for kp in 0..nk {
        let floor = p
            .capability
            .slice(ndarray::s![kp, .., ..])
            .iter()
            .copied()
            .fold(1.0f64, f64::min);
        p.initial_generation
            .slice_mut(ndarray::s![kp, .., .., ..])
            .iter_mut()
            .for_each(|v| *v = rng.gen_range(0.0..=floor));
    }
    for mut cell in p.probability.lanes_mut(ndarray::Axis(2)) {
        let weights: Vec<f64> = (0..cell.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        for (v, w) in cell.iter_mut().zip(&weights) {
            *v = w / total;
        }
    }
    let mut growth = 1.0;
    for tp in 0..nt {
        p.growth[tp] = growth;
        growth *= 1.0 + rng.gen_range(0.0..0.05);
        p.reserve_fraction[tp] = rng.gen_range(0.0..0.15);
    }
    p
}

/// Layout of a generated hourly corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusLayout {
    pub year: i32,
    /// Day-of-month window sampled in every month, inclusive.
    pub days: (u32, u32),
    pub seed: u64,
}

impl Default for CorpusLayout {
    fn default() -> Self {
        CorpusLayout {
            year: 2015,
            days: (20, 26),
            seed: 7,
        }
    }
}

impl CorpusLayout {
    pub fn dates(&self) -> Vec<NaiveDate> {
        (1..=12)
            .flat_map(|m| (self.days.0..=self.days.1).filter_map(move |d| NaiveDate::from_ymd_opt(self.year, m, d)))
            .collect()
    }

    pub fn holidays(&self) -> BTreeSet<NaiveDate> {
        ontario_statutory_holidays(self.year)
    }
}

fn tenth(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

/// Installed MW and typical capability factor of each technology.
fn fleet(k: TechKind) -> (f64, f64) {
    match k {
        TechKind::Nuclear => (13000.0, 0.9),
        TechKind::Gas => (10000.0, 0.85),
        TechKind::Hydro => (8800.0, 0.7),
        TechKind::Wind => (4000.0, 0.3),
        TechKind::Solar => (400.0, 0.0),
        TechKind::Biofuel => (500.0, 0.8),
    }
}

/// Hourly demand and per-technology output, capability and installed
/// capacity for every date of `layout`. Values are rounded to 0.1 MW and
/// always satisfy `output <= capability <= installed`.
pub fn hourly_corpus(layout: &CorpusLayout) -> Vec<HourlyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(layout.seed);
    let holidays = layout.holidays();
    let mut out = Vec::new();
    for date in layout.dates() {
        let season = season_of(date);
        let base = match season {
            Season::Winter => 17500.0,
            Season::Spring => 15000.0,
            Season::Summer => 17000.0,
            Season::Fall => 15500.0,
        };
        let weekend = date.weekday().number_from_monday() > 5 || holidays.contains(&date);
        let day_shift = rng.gen_range(-600.0..600.0) - if weekend { 1500.0 } else { 0.0 };
        let wind_day: f64 = rng.gen_range(0.05..0.6);
        for hour in 1..=24u8 {
            let h = f64::from(hour);
            let shape = 0.85 + 0.15 * (std::f64::consts::PI * (h - 6.0) / 16.0).sin().max(-0.3);
            let demand = base * shape + day_shift + rng.gen_range(-150.0..150.0);
            let mut rec = HourlyRecord::empty(date, hour);
            rec.demand = Some(tenth(demand));
            for k in TechKind::ALL {
                let (installed, typical) = fleet(k);
                let factor: f64 = match k {
                    TechKind::Wind => (wind_day + rng.gen_range(-0.05..0.05)).clamp(0.0, 1.0),
                    TechKind::Solar => (std::f64::consts::PI * (h - 6.0) / 14.0).sin().max(0.0) * 0.7,
                    _ => typical + rng.gen_range(-0.04..0.04),
                };
                let capability = tenth(installed * factor);
                let use_share: f64 = match k {
                    TechKind::Nuclear => rng.gen_range(0.93..1.0),
                    TechKind::Gas => 0.2 + 0.4 * shape.min(1.0) + rng.gen_range(-0.05..0.05),
                    TechKind::Wind | TechKind::Solar => rng.gen_range(0.9..1.0),
                    _ => rng.gen_range(0.5..0.8),
                };
                let kp = k as usize;
                rec.installed[kp] = Some(installed);
                rec.capability[kp] = Some(capability);
                rec.output[kp] = Some(tenth(capability * use_share).min(capability));
            }
            out.push(rec);
        }
    }
    out
}

/// `n` points spread evenly and symmetrically over `center ± spread`.
fn symmetric(center: f64, spread: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![center];
    }
    (0..n)
        .map(|j| {
            let offset = spread * (2.0 * j as f64 / (n - 1) as f64 - 1.0);
            // The middle point of an odd count lands exactly on `center`.
            if 2 * j + 1 == n {
                center
            } else {
                center + offset
            }
        })
        .collect()
}

/// Rewrites the capability of `k` at `hour` on the days of `season` (of
/// `year`, if given) so that capability over installed averages exactly
/// `value`, spread by `± spread`. Output is lowered where it would exceed
/// the new capability. Returns the number of records changed.
pub fn plant_capability_factor(
    records: &mut [HourlyRecord],
    k: TechKind,
    season: Season,
    hour: u8,
    year: Option<i32>,
    value: f64,
    spread: f64,
) -> usize {
    let kp = k as usize;
    let picked: Vec<usize> = (0..records.len())
        .filter(|&n| {
            let r = &records[n];
            r.hour == hour
                && season_of(r.date) == season
                && year.is_none_or(|y| r.date.year() == y)
                && r.installed[kp].is_some_and(|i| i > 0.0)
        })
        .collect();
    let factors = symmetric(value, spread, picked.len());
    for (&n, f) in picked.iter().zip(factors) {
        assert!((0.0..=1.0).contains(&f), "planted capability factor {f} outside [0, 1]");
        let r = &mut records[n];
        let cap = f * r.installed[kp].expect("filtered on installed");
        r.capability[kp] = Some(cap);
        r.output[kp] = r.output[kp].map(|o| o.min(cap));
    }
    picked.len()
}

/// Rewrites the hour-24 output of `k` on the days of `season` so that the
/// output fractions form two clusters with medians `high` and `low`. Days
/// alternate between the clusters in date order; each cluster spreads over
/// `± (high - low) / 8`, which keeps it inside its half of an equal-width
/// two-bin histogram. Capability is raised where the new output needs it.
/// Returns the number of records changed.
pub fn plant_initial_generation(records: &mut [HourlyRecord], k: TechKind, season: Season, high: f64, low: f64) -> usize {
    assert!(low < high, "clusters need low < high");
    let kp = k as usize;
    let mut picked: Vec<usize> = (0..records.len())
        .filter(|&n| {
            let r = &records[n];
            r.hour == 24 && season_of(r.date) == season && r.installed[kp].is_some_and(|i| i > 0.0)
        })
        .collect();
    picked.sort_by_key(|&n| records[n].date);
    let spread = (high - low) / 8.0;
    let highs = symmetric(high, spread, picked.len().div_ceil(2));
    let lows = symmetric(low, spread, picked.len() / 2);
    for (j, &n) in picked.iter().enumerate() {
        let f = if j % 2 == 0 { highs[j / 2] } else { lows[j / 2] };
        assert!((0.0..=1.0).contains(&f), "planted output fraction {f} outside [0, 1]");
        let r = &mut records[n];
        let installed = r.installed[kp].expect("filtered on installed");
        let out = f * installed;
        r.output[kp] = Some(out);
        r.capability[kp] = Some(r.capability[kp].map_or(out, |c| c.max(out)));
    }
    picked.len()
}
