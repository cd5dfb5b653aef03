//! Block-based expansion model: the hourly chronology of each
//! (season, demand level) is replaced by a three-block load-duration curve,
//! and scenarios shrink to the demand levels alone. No variation rows or
//! hour-0 anchors exist in this family.

use std::collections::BTreeMap;

use serde::Serialize;

use super::iso_gep::{check_shapes, depreciated_capacity_coeff};
use super::keys::{Block, ColKey, ColKind, Index, RowKey, RowTag};
use super::ldc::{block_lengths, descending_order, load_duration_blocks};
use super::lp::{Column, LPModel, Sense};
use super::ModelError;
use crate::types::{DemandLevel, IndexSets, ModelFamily, ModelVariant, ParameterSet, Season};

/// One block of one (season, level) curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockData {
    pub season: Season,
    pub level: DemandLevel,
    pub block: Block,
    /// Mean base-year demand over the block, MW.
    pub demand: f64,
    /// Hours per year in the block.
    pub duration: usize,
    /// Mean capability factor of each technology over the block's hours.
    pub capability: Vec<f64>,
    /// Probability of the demand level in the season, weighted by days.
    pub probability: f64,
}

/// Builds the load-duration blocks of every (season, level). Each day type's
/// 24-hour profile is repeated once per day of the cell (`T` rounded to a
/// whole number) before sorting.
pub fn conventional_blocks(params: &ParameterSet, sets: &IndexSets) -> Vec<BlockData> {
    let mut out = Vec::new();
    for (ssp, &ss) in sets.seasons.iter().enumerate() {
        let season_days: f64 = (0..sets.day_types.len()).map(|i| params.days[[i, ssp]]).sum();
        for level in sets.levels_present() {
            let Some(s_rep) = sets.scenario_levels.iter().position(|&l| l == level) else {
                continue;
            };
            let mut demand = Vec::new();
            let mut hours = Vec::new();
            for ip in 0..sets.day_types.len() {
                let reps = params.days[[ip, ssp]].round().max(0.0) as usize;
                for _ in 0..reps {
                    for h in 0..sets.hours {
                        demand.push(params.demand[[ssp, ip, h, s_rep]]);
                        hours.push(h);
                    }
                }
            }
            let probability = if season_days > 0.0 {
                (0..sets.day_types.len())
                    .map(|ip| {
                        let p: f64 = (0..sets.scenarios())
                            .filter(|&s| sets.scenario_levels[s] == level)
                            .map(|s| params.probability[[ssp, ip, s]])
                            .sum();
                        params.days[[ip, ssp]] * p
                    })
                    .sum::<f64>()
                    / season_days
            } else {
                0.0
            };
            let blocks = load_duration_blocks(&demand);
            let order = descending_order(&demand);
            debug_assert_eq!(blocks.iter().map(|b| b.duration).collect::<Vec<_>>(), block_lengths(demand.len()));
            for b in &blocks {
                let members = &order[b.start..b.end];
                let capability = (0..sets.techs.len())
                    .map(|kp| {
                        if members.is_empty() {
                            return 0.0;
                        }
                        members
                            .iter()
                            .map(|&j| params.capability[[kp, ssp, hours[j]]])
                            .sum::<f64>()
                            / members.len() as f64
                    })
                    .collect();
                out.push(BlockData {
                    season: ss,
                    level,
                    block: b.block,
                    demand: b.level,
                    duration: b.duration,
                    capability,
                    probability,
                });
            }
        }
    }
    // Canonical order: season, then block (B, M, P), then level.
    out.sort_by_key(|b| (b.season, b.block, b.level));
    out
}

/// Builds the block-based expansion model.
pub fn build_conventional(params: &ParameterSet, sets: &IndexSets, variant: &ModelVariant) -> Result<LPModel, ModelError> {
    if variant.family != ModelFamily::Conventional {
        return Err(ModelError::WrongFamily(variant.family));
    }
    check_shapes(params, sets)?;
    let nk = sets.techs.len();
    let nt = sets.years;
    let blocks = conventional_blocks(params, sets);
    let nb = blocks.len();
    let a = |kp: usize, tp: usize, tbp: usize| depreciated_capacity_coeff(params.depreciation[kp], tp + 1, tbp + 1);

    let mut model = LPModel::new("CONVENTIONAL");
    for (kp, &k) in sets.techs.iter().enumerate() {
        for tb in 0..nt {
            let cost = params.investment_cost[[kp, tb]] + (tb..nt).map(|t| params.fixed_cost[[kp, t]]).sum::<f64>();
            model.add_column(Column::nonnegative(ColKey::new(ColKind::X, Index::kt(k, tb + 1)), cost));
        }
    }
    let x_pos = |kp: usize, tp: usize| kp * nt + tp;
    let gb_base = nk * nt;
    let gb_pos = |kp: usize, tp: usize, b: usize| gb_base + (kp * nt + tp) * nb + b;
    for (kp, &k) in sets.techs.iter().enumerate() {
        for tp in 0..nt {
            for bd in &blocks {
                let key = ColKey::new(ColKind::Gb, Index::block(Some(k), tp + 1, bd.season, bd.block, bd.level));
                let cost = bd.probability * bd.duration as f64 * params.variable_cost[[kp, tp]];
                model.add_column(Column::nonnegative(key, cost));
            }
        }
    }

    let xn = |kp: usize, tp: usize, scale: f64| -> Vec<(usize, f64)> {
        (0..=tp).map(|tbp| (x_pos(kp, tbp), -scale * a(kp, tp, tbp))).collect()
    };

    for want_gas in [false, true] {
        let tag = if want_gas { RowTag::C3 } else { RowTag::C2 };
        for (kp, &k) in sets.techs.iter().enumerate().filter(|(_, k)| k.is_gas() == want_gas) {
            for tp in 0..nt {
                for (b, bd) in blocks.iter().enumerate() {
                    let cap = bd.capability[kp];
                    let mut rhs = cap * params.existing_capacity[[kp, tp]];
                    if want_gas {
                        rhs -= params.reserve_fraction[tp] * params.growth[tp] * bd.demand;
                    }
                    let mut coeffs = xn(kp, tp, cap);
                    coeffs.push((gb_pos(kp, tp, b), 1.0));
                    let key = RowKey::new(tag, Index::block(Some(k), tp + 1, bd.season, bd.block, bd.level));
                    model.add_row(key, Sense::Le, rhs, coeffs);
                }
            }
        }
    }
    for tp in 0..nt {
        for (b, bd) in blocks.iter().enumerate() {
            let coeffs = (0..nk).map(|kp| (gb_pos(kp, tp, b), 1.0)).collect();
            let key = RowKey::new(RowTag::C4, Index::block(None, tp + 1, bd.season, bd.block, bd.level));
            model.add_row(key, Sense::Ge, params.growth[tp] * bd.demand, coeffs);
        }
    }
    let shares = &variant.share_constraints;
    for (tag, upper) in [(RowTag::C5, true), (RowTag::C6, false)] {
        for (kp, &k) in sets.techs.iter().enumerate() {
            if (upper && !shares.has_upper(k)) || (!upper && !shares.has_lower(k)) {
                continue;
            }
            for tp in 0..nt {
                let alpha = if upper { params.share_max[[kp, tp]] } else { params.share_min[[kp, tp]] };
                let mut coeffs = Vec::new();
                for k2 in 0..nk {
                    let own = if k2 == kp { 1.0 } else { 0.0 };
                    for tbp in 0..=tp {
                        coeffs.push((x_pos(k2, tbp), a(k2, tp, tbp) * (own - alpha)));
                    }
                }
                let total_xe: f64 = (0..nk).map(|k2| params.existing_capacity[[k2, tp]]).sum();
                let rhs = alpha * total_xe - params.existing_capacity[[kp, tp]];
                let sense = if upper { Sense::Le } else { Sense::Ge };
                model.add_row(RowKey::new(tag, Index::kt(k, tp + 1)), sense, rhs, coeffs);
            }
        }
    }
    let mut fixed = BTreeMap::new();
    for (&(k, t), &v) in variant.fixed_capacities.iter().flatten() {
        let kp = sets.tech_position(k).ok_or(ModelError::FixedOutsideSets(k, t))?;
        if !(1..=nt).contains(&t) {
            return Err(ModelError::FixedOutsideSets(k, t));
        }
        fixed.insert((kp, t - 1), v);
    }
    for ((kp, tp), v) in fixed {
        model.add_row(
            RowKey::new(RowTag::Fix, Index::kt(sets.techs[kp], tp + 1)),
            Sense::Eq,
            v,
            vec![(x_pos(kp, tp), 1.0)],
        );
    }
    Ok(model)
}
