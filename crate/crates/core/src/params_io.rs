//! Reading and writing parameter files.
//!
//! A parameter file is a JSON document:
//!
//! ```text
//! {
//!   "format": "isogep-parameters/1",
//!   "index_sets": { ...IndexSets... },
//!   "scalars": { "discount_rate": 0.03, "horizon_years": 20 },
//!   "parameters": {
//!     "C": { "dims": ["k", "t"], "shape": [6, 20], "values": [ ... ] },
//!     ...
//!   }
//! }
//! ```
//!
//! `values` is the row-major flattening of the array over `dims`. Floats are
//! written in shortest round-trip form, so reloading is bit-exact.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use ndarray::{ArrayD, Dimension, IxDyn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::{IndexSets, ParameterSet};

pub const FORMAT_TAG: &str = "isogep-parameters/1";

#[derive(Debug, Error)]
pub enum ParamsIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed parameter file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format tag `{0}`")]
    Format(String),
    #[error("parameter `{0}` is missing")]
    Missing(&'static str),
    #[error("parameter `{name}`: {reason}")]
    Array { name: String, reason: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DenseArray {
    pub dims: Vec<String>,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Scalars {
    discount_rate: f64,
    horizon_years: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ParameterFile {
    format: String,
    index_sets: IndexSets,
    scalars: Scalars,
    parameters: BTreeMap<String, DenseArray>,
}

/// Key, axis names. The order here is the documented order of every array.
pub const PARAMETER_KEYS: [(&str, &[&str]); 18] = [
    ("T", &["i", "ss"]),
    ("C", &["k", "t"]),
    ("CV", &["k", "t"]),
    ("IV", &["k", "t"]),
    ("FC", &["k", "t"]),
    ("XE", &["k", "t"]),
    ("dep", &["k"]),
    ("lifespan", &["k"]),
    ("VU", &["k", "ss"]),
    ("VD", &["k", "ss"]),
    ("D", &["ss", "i", "h", "s"]),
    ("IG", &["k", "ss", "i", "s"]),
    ("Cap", &["k", "ss", "h"]),
    ("alphaH", &["k", "t"]),
    ("alphaL", &["k", "t"]),
    ("Prob", &["ss", "i", "s"]),
    ("GRW", &["t"]),
    ("alphaRES", &["t"]),
];

fn dense<D: Dimension>(dims: &[&str], arr: &ndarray::Array<f64, D>) -> DenseArray {
    DenseArray {
        dims: dims.iter().map(|d| d.to_string()).collect(),
        shape: arr.shape().to_vec(),
        values: arr.iter().copied().collect(),
    }
}

fn arrays_of(p: &ParameterSet) -> [ArrayD<f64>; 18] {
    [
        p.days.clone().into_dyn(),
        p.variable_cost.clone().into_dyn(),
        p.variation_cost.clone().into_dyn(),
        p.investment_cost.clone().into_dyn(),
        p.fixed_cost.clone().into_dyn(),
        p.existing_capacity.clone().into_dyn(),
        p.depreciation.clone().into_dyn(),
        p.lifespan.clone().into_dyn(),
        p.variation_up.clone().into_dyn(),
        p.variation_down.clone().into_dyn(),
        p.demand.clone().into_dyn(),
        p.initial_generation.clone().into_dyn(),
        p.capability.clone().into_dyn(),
        p.share_max.clone().into_dyn(),
        p.share_min.clone().into_dyn(),
        p.probability.clone().into_dyn(),
        p.growth.clone().into_dyn(),
        p.reserve_fraction.clone().into_dyn(),
    ]
}

pub fn write_parameters<W: Write>(
    params: &ParameterSet,
    sets: &IndexSets,
    writer: W,
) -> Result<(), ParamsIoError> {
    let parameters = PARAMETER_KEYS
        .iter()
        .zip(arrays_of(params).iter())
        .map(|((key, dims), arr)| (key.to_string(), dense(dims, arr)))
        .collect();
    let file = ParameterFile {
        format: FORMAT_TAG.to_string(),
        index_sets: sets.clone(),
        scalars: Scalars {
            discount_rate: params.discount_rate,
            horizon_years: params.horizon_years,
        },
        parameters,
    };
    serde_json::to_writer_pretty(writer, &file)?;
    Ok(())
}

pub fn to_json_string(params: &ParameterSet, sets: &IndexSets) -> String {
    let mut buf = Vec::new();
    write_parameters(params, sets, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

fn take<D: Dimension>(
    map: &mut BTreeMap<String, DenseArray>,
    key: &'static str,
    dims: &[&str],
) -> Result<ndarray::Array<f64, D>, ParamsIoError> {
    let arr = map.remove(key).ok_or(ParamsIoError::Missing(key))?;
    let err = |reason: String| ParamsIoError::Array {
        name: key.to_string(),
        reason,
    };
    if arr.dims != dims {
        return Err(err(format!("dims {:?}, expected {:?}", arr.dims, dims)));
    }
    let dynamic = ArrayD::from_shape_vec(IxDyn(&arr.shape), arr.values).map_err(|e| err(e.to_string()))?;
    dynamic
        .into_dimensionality::<D>()
        .map_err(|e| err(e.to_string()))
}

/// Reads a parameter file. Shapes are checked against the declared dims
/// only; call [`crate::validate::validate`] for the full invariants.
pub fn read_parameters<R: Read>(reader: R) -> Result<(ParameterSet, IndexSets), ParamsIoError> {
    let file: ParameterFile = serde_json::from_reader(reader)?;
    if file.format != FORMAT_TAG {
        return Err(ParamsIoError::Format(file.format));
    }
    let mut m = file.parameters;
    let d = |i: usize| PARAMETER_KEYS[i].1;
    let params = ParameterSet {
        days: take(&mut m, "T", d(0))?,
        variable_cost: take(&mut m, "C", d(1))?,
        variation_cost: take(&mut m, "CV", d(2))?,
        investment_cost: take(&mut m, "IV", d(3))?,
        fixed_cost: take(&mut m, "FC", d(4))?,
        existing_capacity: take(&mut m, "XE", d(5))?,
        depreciation: take(&mut m, "dep", d(6))?,
        lifespan: take(&mut m, "lifespan", d(7))?,
        variation_up: take(&mut m, "VU", d(8))?,
        variation_down: take(&mut m, "VD", d(9))?,
        demand: take(&mut m, "D", d(10))?,
        initial_generation: take(&mut m, "IG", d(11))?,
        capability: take(&mut m, "Cap", d(12))?,
        share_max: take(&mut m, "alphaH", d(13))?,
        share_min: take(&mut m, "alphaL", d(14))?,
        probability: take(&mut m, "Prob", d(15))?,
        growth: take(&mut m, "GRW", d(16))?,
        reserve_fraction: take(&mut m, "alphaRES", d(17))?,
        discount_rate: file.scalars.discount_rate,
        horizon_years: file.scalars.horizon_years,
    };
    Ok((params, file.index_sets))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DayType, DemandLevel, Season, TechKind};
    use crate::validate::validate;
    use proptest::prelude::*;

    fn sets() -> IndexSets {
        IndexSets {
            techs: vec![TechKind::Gas, TechKind::Wind],
            years: 3,
            seasons: vec![Season::Spring],
            day_types: vec![DayType::Weekday, DayType::Weekend],
            hours: 4,
            scenario_levels: vec![DemandLevel::Low, DemandLevel::Medium, DemandLevel::High],
            days_in_year: 365,
        }
    }

    proptest! {
        #[test]
        fn reload_is_bit_identical(
            vals in proptest::collection::vec(-1e12f64..1e12, 24),
            tiny in 1e-300f64..1e-290,
        ) {
            let sets = sets();
            let mut p = ParameterSet::zeros(&sets);
            for (dst, v) in p.demand.iter_mut().zip(&vals) {
                *dst = *v;
            }
            p.variable_cost[[0, 0]] = tiny;
            p.capability[[1, 0, 3]] = 0.1 + 0.2;
            p.discount_rate = 0.03;
            let text = to_json_string(&p, &sets);
            let (back, back_sets) = read_parameters(text.as_bytes()).unwrap();
            prop_assert_eq!(&back_sets, &sets);
            for (a, b) in p.demand.iter().zip(back.demand.iter()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.variable_cost[[0, 0]].to_bits(), tiny.to_bits());
            prop_assert_eq!(&back, &p);
            prop_assert_eq!(validate(&back, &back_sets), validate(&p, &sets));
        }
    }

    #[test]
    fn missing_key_is_an_error() {
        let sets = sets();
        let p = ParameterSet::zeros(&sets);
        let text = to_json_string(&p, &sets).replace("\"alphaRES\"", "\"alphaRESERVE\"");
        assert!(matches!(
            read_parameters(text.as_bytes()),
            Err(ParamsIoError::Missing("alphaRES"))
        ));
    }
}
