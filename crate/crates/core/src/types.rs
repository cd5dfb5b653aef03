//! Index sets, parameters and model variants shared by every stage of the
//! pipeline.
//!
//! All power quantities are MW, energies MWh and money base-year dollars.
//! Arrays are dense and indexed by *position* within the corresponding
//! [`IndexSets`] member (e.g. the `k` axis of `C` runs over `sets.techs`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Array3, Array4};
use serde::{Deserialize, Serialize};

/// Generation technology group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechKind {
    Nuclear,
    Gas,
    Hydro,
    Wind,
    Solar,
    Biofuel,
}

impl TechKind {
    pub const ALL: [TechKind; 6] = [
        TechKind::Nuclear,
        TechKind::Gas,
        TechKind::Hydro,
        TechKind::Wind,
        TechKind::Solar,
        TechKind::Biofuel,
    ];

    /// Gas carries the reserve requirement.
    pub fn is_gas(self) -> bool {
        self == TechKind::Gas
    }

    /// Technologies subject to the hour-to-hour variation limits.
    pub fn is_variation_limited(self) -> bool {
        matches!(
            self,
            TechKind::Nuclear | TechKind::Gas | TechKind::Hydro | TechKind::Biofuel
        )
    }

    pub fn short_name(self) -> &'static str {
        match self {
            TechKind::Nuclear => "nuc",
            TechKind::Gas => "gas",
            TechKind::Hydro => "hyd",
            TechKind::Wind => "wnd",
            TechKind::Solar => "sol",
            TechKind::Biofuel => "bio",
        }
    }

    pub fn from_short_name(s: &str) -> Option<TechKind> {
        TechKind::ALL.into_iter().find(|k| k.short_name() == s)
    }
}

impl fmt::Display for TechKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TechKind::Nuclear => "nuclear",
            TechKind::Gas => "gas",
            TechKind::Hydro => "hydro",
            TechKind::Wind => "wind",
            TechKind::Solar => "solar",
            TechKind::Biofuel => "biofuel",
        };
        f.write_str(name)
    }
}

impl FromStr for TechKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        TechKind::ALL
            .into_iter()
            .find(|k| k.to_string() == lower || k.short_name() == lower)
            .ok_or_else(|| format!("unknown technology `{s}`"))
    }
}

/// Season of the year. Boundaries fall on half months, see
/// [`crate::ingest::classify_day`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];

    pub fn short_name(self) -> &'static str {
        match self {
            Season::Winter => "wi",
            Season::Spring => "sp",
            Season::Summer => "su",
            Season::Fall => "fa",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Season> {
        Season::ALL.into_iter().find(|x| x.short_name() == s)
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        };
        f.write_str(name)
    }
}

/// Representative day type. Weekday holidays count as weekend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DayType {
    Weekday,
    Weekend,
}

impl DayType {
    pub const ALL: [DayType; 2] = [DayType::Weekday, DayType::Weekend];

    pub fn short_name(self) -> &'static str {
        match self {
            DayType::Weekday => "wd",
            DayType::Weekend => "we",
        }
    }

    pub fn from_short_name(s: &str) -> Option<DayType> {
        DayType::ALL.into_iter().find(|x| x.short_name() == s)
    }
}

impl fmt::Display for DayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DayType::Weekday => "weekday",
            DayType::Weekend => "weekend",
        })
    }
}

/// Daily demand level of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DemandLevel {
    #[serde(rename = "L")]
    Low,
    #[serde(rename = "M")]
    Medium,
    #[serde(rename = "H")]
    High,
}

impl DemandLevel {
    pub const ALL: [DemandLevel; 3] = [DemandLevel::Low, DemandLevel::Medium, DemandLevel::High];

    pub fn letter(self) -> &'static str {
        match self {
            DemandLevel::Low => "L",
            DemandLevel::Medium => "M",
            DemandLevel::High => "H",
        }
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_letter(s: &str) -> Option<DemandLevel> {
        DemandLevel::ALL.into_iter().find(|l| l.letter() == s)
    }
}

/// Every index set of the model.
///
/// `techs`, `seasons` and `day_types` must be strictly ascending so that
/// generated rows come out in canonical order. Decision hours are
/// `1..=hours`; hour 0 is the fixed anchor of each representative day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSets {
    pub techs: Vec<TechKind>,
    pub years: usize,
    pub seasons: Vec<Season>,
    pub day_types: Vec<DayType>,
    pub hours: usize,
    /// Demand level of every scenario; its length is the scenario count.
    pub scenario_levels: Vec<DemandLevel>,
    /// 365, or 366 for a leap reference calendar.
    #[serde(default = "default_days_in_year")]
    pub days_in_year: u16,
}

fn default_days_in_year() -> u16 {
    365
}

impl IndexSets {
    /// The full configuration: six technologies, 20 years, four seasons,
    /// two day types, 24 hours and 48 scenarios (16 L, 16 M, 16 H).
    pub fn ontario() -> Self {
        let scenario_levels = DemandLevel::ALL
            .into_iter()
            .flat_map(|l| std::iter::repeat_n(l, 16))
            .collect();
        IndexSets {
            techs: TechKind::ALL.to_vec(),
            years: 20,
            seasons: Season::ALL.to_vec(),
            day_types: DayType::ALL.to_vec(),
            hours: 24,
            scenario_levels,
            days_in_year: 365,
        }
    }

    pub fn scenarios(&self) -> usize {
        self.scenario_levels.len()
    }

    pub fn tech_position(&self, k: TechKind) -> Option<usize> {
        self.techs.iter().position(|&x| x == k)
    }

    pub fn season_position(&self, ss: Season) -> Option<usize> {
        self.seasons.iter().position(|&x| x == ss)
    }

    pub fn day_type_position(&self, i: DayType) -> Option<usize> {
        self.day_types.iter().position(|&x| x == i)
    }

    /// Demand levels that occur among the scenarios, ascending.
    pub fn levels_present(&self) -> Vec<DemandLevel> {
        self.scenario_levels
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

/// Every estimated or configured model parameter, fully indexed.
///
/// Axis order of each array is given in its field comment. Cost arrays are
/// present-worth values: discounting is applied when the set is assembled,
/// not by the model builder.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    /// `T(i, ss)`: days per year of each cell.
    pub days: Array2<f64>,
    /// `C(k, t)`: $/MWh.
    pub variable_cost: Array2<f64>,
    /// `CV(k, t)`: $/MW of hour-to-hour change.
    pub variation_cost: Array2<f64>,
    /// `IV(k, t)`: $/MW, prorated to the horizon.
    pub investment_cost: Array2<f64>,
    /// `FC(k, t)`: $/MW-yr.
    pub fixed_cost: Array2<f64>,
    /// `XE(k, t)`: MW.
    pub existing_capacity: Array2<f64>,
    /// `dep(k)`: straight-line depreciation, 1/yr.
    pub depreciation: Array1<f64>,
    /// `lifespan(k)`: years.
    pub lifespan: Array1<f64>,
    /// `VU(k, ss)`.
    pub variation_up: Array2<f64>,
    /// `VD(k, ss)`.
    pub variation_down: Array2<f64>,
    /// `D(ss, i, h, s)`: base-year demand, `h` over decision hours.
    pub demand: Array4<f64>,
    /// `IG(k, ss, i, s)`: hour-0 output as a fraction of capacity.
    pub initial_generation: Array4<f64>,
    /// `Cap(k, ss, h)`.
    pub capability: Array3<f64>,
    /// `alphaH(k, t)`.
    pub share_max: Array2<f64>,
    /// `alphaL(k, t)`.
    pub share_min: Array2<f64>,
    /// `Prob(ss, i, s)`.
    pub probability: Array3<f64>,
    /// `GRW(t)`.
    pub growth: Array1<f64>,
    /// `alphaRES(t)`.
    pub reserve_fraction: Array1<f64>,
    pub discount_rate: f64,
    pub horizon_years: usize,
}

impl ParameterSet {
    /// An all-zero parameter set shaped for `sets`, with uniform scenario
    /// probabilities, unit growth and an even split of the year over cells.
    /// Meant as a starting point for hand-built instances.
    pub fn zeros(sets: &IndexSets) -> Self {
        let nk = sets.techs.len();
        let nt = sets.years;
        let nss = sets.seasons.len();
        let ni = sets.day_types.len();
        let nh = sets.hours;
        let ns = sets.scenarios();
        let cells = (nss * ni).max(1) as f64;
        let mut days = Array2::from_elem((ni, nss), 0.0);
        // Spread whole days; the remainder lands on the first cell.
        let per_cell = (sets.days_in_year as f64 / cells).floor();
        days.fill(per_cell);
        if ni > 0 && nss > 0 {
            days[[0, 0]] += sets.days_in_year as f64 - per_cell * cells;
        }
        let uniform = if ns > 0 { 1.0 / ns as f64 } else { 0.0 };
        ParameterSet {
            days,
            variable_cost: Array2::zeros((nk, nt)),
            variation_cost: Array2::zeros((nk, nt)),
            investment_cost: Array2::zeros((nk, nt)),
            fixed_cost: Array2::zeros((nk, nt)),
            existing_capacity: Array2::zeros((nk, nt)),
            depreciation: Array1::zeros(nk),
            lifespan: Array1::from_elem(nk, 30.0),
            variation_up: Array2::zeros((nk, nss)),
            variation_down: Array2::zeros((nk, nss)),
            demand: Array4::zeros((nss, ni, nh, ns)),
            initial_generation: Array4::zeros((nk, nss, ni, ns)),
            capability: Array3::zeros((nk, nss, nh)),
            share_max: Array2::ones((nk, nt)),
            share_min: Array2::zeros((nk, nt)),
            probability: Array3::from_elem((nss, ni, ns), uniform),
            growth: Array1::ones(nt),
            reserve_fraction: Array1::zeros(nt),
            discount_rate: 0.0,
            horizon_years: nt,
        }
    }
}

/// Which share rows (upper/lower bounds on a technology's share of total
/// capacity) the model carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum ShareMode {
    Full,
    /// Lower-bound rows only, for the listed technologies.
    LowerOnly { techs: Vec<TechKind> },
    Off,
}

impl ShareMode {
    /// Lower bounds kept for wind, solar and biofuel only.
    pub fn renewables_floor() -> Self {
        ShareMode::LowerOnly {
            techs: vec![TechKind::Wind, TechKind::Solar, TechKind::Biofuel],
        }
    }

    pub fn has_upper(&self, _k: TechKind) -> bool {
        matches!(self, ShareMode::Full)
    }

    pub fn has_lower(&self, k: TechKind) -> bool {
        match self {
            ShareMode::Full => true,
            ShareMode::LowerOnly { techs } => techs.contains(&k),
            ShareMode::Off => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    IsoGep,
    Conventional,
}

/// Identifies one variation-limit row (up or down) for row filtering.
/// `t`, `h` and `s` use the same 1-based numbering as row names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VariationRowId {
    pub up: bool,
    pub k: TechKind,
    pub t: usize,
    pub ss: Season,
    pub i: DayType,
    pub h: usize,
    pub s: usize,
}

/// Switches selecting one member of the model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVariant {
    pub family: ModelFamily,
    pub variation_constraints: bool,
    pub variation_costs: bool,
    pub share_constraints: ShareMode,
    /// Pins `x(k, t)` to the given MW for every listed pair (`t` is the
    /// 1-based year).
    #[serde(default, skip_serializing_if = "Option::is_none", with = "fixed_map")]
    pub fixed_capacities: Option<BTreeMap<(TechKind, usize), f64>>,
    /// When set, only these variation-limit rows are emitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retained_variation_rows: Option<BTreeSet<VariationRowId>>,
}

impl ModelVariant {
    pub fn full() -> Self {
        ModelVariant {
            family: ModelFamily::IsoGep,
            variation_constraints: true,
            variation_costs: true,
            share_constraints: ShareMode::Full,
            fixed_capacities: None,
            retained_variation_rows: None,
        }
    }

    pub fn conventional() -> Self {
        ModelVariant {
            family: ModelFamily::Conventional,
            variation_constraints: false,
            variation_costs: false,
            ..ModelVariant::full()
        }
    }

    pub fn with_variation(mut self, constraints: bool, costs: bool) -> Self {
        self.variation_constraints = constraints;
        self.variation_costs = costs;
        self
    }

    pub fn with_shares(mut self, mode: ShareMode) -> Self {
        self.share_constraints = mode;
        self
    }

    pub fn with_fixed_capacities(mut self, fixed: BTreeMap<(TechKind, usize), f64>) -> Self {
        self.fixed_capacities = Some(fixed);
        self
    }
}

impl Default for ModelVariant {
    fn default() -> Self {
        ModelVariant::full()
    }
}

mod fixed_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::TechKind;

    #[derive(Serialize, Deserialize)]
    struct Entry {
        tech: TechKind,
        year: usize,
        mw: f64,
    }

    pub fn serialize<S: Serializer>(
        map: &Option<BTreeMap<(TechKind, usize), f64>>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        map.as_ref()
            .map(|m| {
                m.iter()
                    .map(|(&(tech, year), &mw)| Entry { tech, year, mw })
                    .collect::<Vec<_>>()
            })
            .serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<Option<BTreeMap<(TechKind, usize), f64>>, D::Error> {
        let entries: Option<Vec<Entry>> = Option::deserialize(de)?;
        Ok(entries.map(|v| v.into_iter().map(|e| ((e.tech, e.year), e.mw)).collect()))
    }
}
