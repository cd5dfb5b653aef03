//! Small hand-built instances with known optima, used by the tests, the
//! acceptance suite and the bundled data files.

use crate::types::{DayType, DemandLevel, IndexSets, ModelVariant, ParameterSet, Season, ShareMode, TechKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub name: &'static str,
    pub sets: IndexSets,
    pub params: ParameterSet,
    pub variant: ModelVariant,
}

fn one_cell(techs: Vec<TechKind>, hours: usize) -> IndexSets {
    IndexSets {
        techs,
        years: 1,
        seasons: vec![Season::Summer],
        day_types: vec![DayType::Weekday],
        hours,
        scenario_levels: vec![DemandLevel::Medium],
        days_in_year: 365,
    }
}

fn set_demand(p: &mut ParameterSet, demand: &[f64]) {
    for (h, &d) in demand.iter().enumerate() {
        p.demand[[0, 0, h, 0]] = d;
    }
}

/// One hydro unit, two hours, demand 10 then 20, nothing installed, a cold
/// start (`IG = 0`) and `VU = VD = 0.5`. One day per year so the objective
/// is small: `x = 20` and objective `20 * IV + 10 + 20 = 50`.
pub fn two_hour_hydro() -> Instance {
    let sets = one_cell(vec![TechKind::Hydro], 2);
    let mut p = ParameterSet::zeros(&sets);
    p.days.fill(1.0);
    set_demand(&mut p, &[10.0, 20.0]);
    p.capability.fill(1.0);
    p.variation_up.fill(0.5);
    p.variation_down.fill(0.5);
    p.variable_cost.fill(1.0);
    p.investment_cost.fill(1.0);
    Instance {
        name: "two_hour_hydro",
        sets,
        params: p,
        variant: ModelVariant::full().with_shares(ShareMode::Off),
    }
}

/// Cheap slow nuclear against expensive agile gas over four hours with a
/// step from 10 to 20 MW at hour 3. Without variation rows nuclear alone
/// covers the peak (20 MW); with them 20 MW of nuclear starting from half
/// output cannot climb fast enough.
pub fn ramp() -> Instance {
    ramp_with_limit(0.1)
}

/// [`ramp`] with nuclear's variation limit set to `limit` (1 makes the
/// variation rows slack).
pub fn ramp_with_limit(limit: f64) -> Instance {
    let sets = one_cell(vec![TechKind::Nuclear, TechKind::Gas], 4);
    let mut p = ParameterSet::zeros(&sets);
    set_demand(&mut p, &[10.0, 10.0, 20.0, 20.0]);
    p.capability.fill(1.0);
    let (nuc, gas) = (0, 1);
    p.investment_cost[[nuc, 0]] = 10.0;
    p.investment_cost[[gas, 0]] = 12.0;
    p.variable_cost[[nuc, 0]] = 1.0;
    p.variable_cost[[gas, 0]] = 5.0;
    for k in [nuc, gas] {
        p.variation_cost[[k, 0]] = 0.1 * p.variable_cost[[k, 0]];
    }
    p.variation_up[[nuc, 0]] = limit;
    p.variation_down[[nuc, 0]] = limit;
    p.variation_up[[gas, 0]] = 1.0;
    p.variation_down[[gas, 0]] = 1.0;
    p.initial_generation[[nuc, 0, 0, 0]] = 0.5;
    Instance {
        name: if limit == 0.1 { "ramp" } else { "ramp_slack" },
        sets,
        params: p,
        variant: ModelVariant::full().with_shares(ShareMode::Off),
    }
}

/// Nuclear only, eight hours: flat 10 MW, then 16 MW from hour 7. With
/// `VU = 0.25` the 6 MW climb at hour 7 needs 24 MW of capacity, more than
/// the 16 MW peak, so the hour-7 up-variation row holds with equality and
/// prices the extra capacity.
pub fn morning_ramp() -> Instance {
    morning_ramp_with_limit(0.25)
}

pub fn morning_ramp_with_limit(limit: f64) -> Instance {
    let sets = one_cell(vec![TechKind::Nuclear], 8);
    let mut p = ParameterSet::zeros(&sets);
    set_demand(&mut p, &[10.0, 10.0, 10.0, 10.0, 10.0, 10.0, 16.0, 16.0]);
    p.capability.fill(1.0);
    p.investment_cost.fill(1.0);
    p.variable_cost.fill(10.0);
    p.variation_cost.fill(1.0);
    p.variation_up.fill(limit);
    p.variation_down.fill(limit);
    p.initial_generation.fill(0.5);
    Instance {
        name: if limit == 0.25 { "morning_ramp" } else { "morning_ramp_slack" },
        sets,
        params: p,
        variant: ModelVariant::full().with_shares(ShareMode::Off),
    }
}

/// Hydro only, two hours, demand 10 then 20, `IG = 0.5`, `VU = VD = 0.2`.
/// The block model sizes hydro at the 20 MW peak; from a 10 MW start that
/// capacity can add only 4 MW per hour.
pub fn steep_two_hour() -> Instance {
    let sets = one_cell(vec![TechKind::Hydro], 2);
    let mut p = ParameterSet::zeros(&sets);
    set_demand(&mut p, &[10.0, 20.0]);
    p.capability.fill(1.0);
    p.investment_cost.fill(1.0);
    p.variable_cost.fill(1.0);
    p.variation_up.fill(0.2);
    p.variation_down.fill(0.2);
    p.initial_generation.fill(0.5);
    Instance {
        name: "steep_two_hour",
        sets,
        params: p,
        variant: ModelVariant::full().with_shares(ShareMode::Off),
    }
}

/// Every bundled instance.
pub fn all() -> Vec<Instance> {
    vec![
        two_hour_hydro(),
        ramp(),
        ramp_with_limit(1.0),
        morning_ramp(),
        morning_ramp_with_limit(1.0),
        steep_two_hour(),
    ]
}
