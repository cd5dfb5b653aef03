//! Cost inputs: per-technology cost table, investment proration over the
//! planning horizon and present-worth discounting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::types::{IndexSets, ParameterSet, TechKind};

/// Variation cost as a fraction of variable cost when none is configured.
pub const VARIATION_COST_FRACTION: f64 = 0.1;

/// Undiscounted base-year costs of one technology.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TechCosts {
    pub lifespan_years: f64,
    /// $/MW over the full lifetime.
    pub lifetime_investment: f64,
    /// $/MW-yr.
    pub fixed_om: f64,
    /// $/MWh.
    pub variable: f64,
    /// $/MW of hour-to-hour change; defaults to
    /// `VARIATION_COST_FRACTION * variable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<f64>,
}

impl TechCosts {
    pub fn variation_cost(&self) -> f64 {
        self.variation.unwrap_or(VARIATION_COST_FRACTION * self.variable)
    }
}

/// 2016 cost estimates for Ontario in Canadian dollars.
pub fn ontario_2016_costs() -> BTreeMap<TechKind, TechCosts> {
    let row = |lifespan_years, lifetime_investment, fixed_om, variable| TechCosts {
        lifespan_years,
        lifetime_investment,
        fixed_om,
        variable,
        variation: None,
    };
    BTreeMap::from([
        (TechKind::Nuclear, row(60.0, 7_371_800.0, 124_347.0, 2.852)),
        (TechKind::Gas, row(30.0, 1_290_344.0, 13_640.0, 6.3364)),
        (TechKind::Hydro, row(80.0, 7_101_108.0, 155_000.0, 0.0)),
        (TechKind::Wind, row(30.0, 2_327_480.0, 49_228.0, 0.0)),
        (TechKind::Solar, row(30.0, 3_244_253.0, 29_016.0, 0.0)),
        (TechKind::Biofuel, row(25.0, 6_181_400.0, 52_204.0, 5.208)),
    ])
}

/// `(1 + rate)^-(t-1)` for 1-based year `t`.
pub fn discount_factor(t: usize, rate: f64) -> f64 {
    (1.0 + rate).powi(-(t as i32 - 1))
}

/// Share of the lifetime investment charged to capacity built in year `t`:
/// the fraction of its life that falls inside the horizon, discounted to
/// present worth.
pub fn prorate_investment_cost(base_cost: f64, lifespan: f64, t: usize, horizon: usize, discount_rate: f64) -> f64 {
    let years_inside = (horizon + 1 - t) as f64;
    base_cost * years_inside.min(lifespan) / lifespan * discount_factor(t, discount_rate)
}

/// Straight-line depreciation per year.
pub fn depreciation_rate(lifespan: f64) -> f64 {
    1.0 / lifespan
}

/// Fills `C`, `CV`, `IV`, `FC`, `dep` and `lifespan` from `table`, discounted
/// at `params.discount_rate`. Fails naming the first technology the table
/// does not cover.
pub fn apply_costs(
    params: &mut ParameterSet,
    sets: &IndexSets,
    table: &BTreeMap<TechKind, TechCosts>,
) -> Result<(), TechKind> {
    let rate = params.discount_rate;
    let horizon = params.horizon_years;
    for (kp, &k) in sets.techs.iter().enumerate() {
        let c = table.get(&k).ok_or(k)?;
        params.lifespan[kp] = c.lifespan_years;
        params.depreciation[kp] = depreciation_rate(c.lifespan_years);
        for tp in 0..sets.years {
            let t = tp + 1;
            let df = discount_factor(t, rate);
            params.variable_cost[[kp, tp]] = c.variable * df;
            params.variation_cost[[kp, tp]] = c.variation_cost() * df;
            params.fixed_cost[[kp, tp]] = c.fixed_om * df;
            params.investment_cost[[kp, tp]] =
                prorate_investment_cost(c.lifetime_investment, c.lifespan_years, t, horizon, rate);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs()
    }

    #[test]
    fn twenty_year_column() {
        let expected = [
            (TechKind::Nuclear, 2_457_267.0),
            (TechKind::Hydro, 1_775_277.0),
            (TechKind::Gas, 860_229.0),
            (TechKind::Wind, 1_551_653.0),
            (TechKind::Solar, 2_162_836.0),
            (TechKind::Biofuel, 4_945_120.0),
        ];
        let table = ontario_2016_costs();
        for (k, want) in expected {
            let c = table[&k];
            let got = prorate_investment_cost(c.lifetime_investment, c.lifespan_years, 1, 20, 0.0);
            assert!(close(got, want, 1e-4), "{k}: {got} vs {want}");
        }
    }

    #[test]
    fn nuclear_built_in_year_eleven_pays_one_sixth() {
        let got = prorate_investment_cost(7_371_800.0, 60.0, 11, 20, 0.0);
        assert!((got - 7_371_800.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn short_life_is_charged_in_full() {
        assert_eq!(prorate_investment_cost(100.0, 10.0, 1, 20, 0.0), 100.0);
        let discounted = prorate_investment_cost(100.0, 10.0, 3, 20, 0.03);
        assert!((discounted - 100.0 / 1.03f64.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn variation_cost_defaults_to_a_tenth() {
        let gas = ontario_2016_costs()[&TechKind::Gas];
        assert!((gas.variation_cost() - 0.63364).abs() < 1e-12);
    }

    #[test]
    fn apply_fills_discounted_arrays() {
        let sets = IndexSets {
            techs: vec![TechKind::Nuclear, TechKind::Gas],
            years: 3,
            ..IndexSets::ontario()
        };
        let mut p = ParameterSet::zeros(&sets);
        p.discount_rate = 0.03;
        p.horizon_years = 3;
        apply_costs(&mut p, &sets, &ontario_2016_costs()).unwrap();
        assert!((p.variable_cost[[1, 2]] - 6.3364 / 1.03f64.powi(2)).abs() < 1e-12);
        assert!((p.depreciation[0] - 1.0 / 60.0).abs() < 1e-15);
        assert!((p.investment_cost[[1, 0]] - 1_290_344.0 * 3.0 / 30.0).abs() < 1e-6);
        let mut partial = BTreeMap::new();
        partial.insert(TechKind::Nuclear, ontario_2016_costs()[&TechKind::Nuclear]);
        assert_eq!(apply_costs(&mut p, &sets, &partial), Err(TechKind::Gas));
    }
}
