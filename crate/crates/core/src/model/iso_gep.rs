//! The integrated operations/expansion LP.
//!
//! New capacity `x(k, t)` enters every capacity-dependent row through the
//! depreciated sum `XN(k, t) = sum_{t' <= t} a(k, t, t') x(k, t')` with
//! `a = max(0, 1 - dep(k) (t - t'))`; `XN` is never a column of its own.
//!
//! Rows come out in canonical order (tag, then `k, t, ss, i, h, s`) from
//! either of two routes: row-wise ([`IsoGep::for_each_row`]) or column-wise
//! ([`IsoGep::column_entries`]). The second exists so full-size models can be
//! streamed to disk one column at a time.

use std::collections::BTreeMap;

use serde::Serialize;

use super::keys::{ColKey, ColKind, Index, RowKey, RowTag};
use super::lp::{Column, LPModel, Sense};
use super::ModelError;
use crate::types::{IndexSets, ModelFamily, ModelVariant, ParameterSet, TechKind, VariationRowId};
use crate::validate::{validate, ViolationKind};

/// Coefficient of `x(k, t')` in `XN(k, t)` (years 1-based).
pub fn depreciated_capacity_coeff(dep: f64, t: usize, t_built: usize) -> f64 {
    if t_built > t {
        return 0.0;
    }
    (1.0 - dep * (t - t_built) as f64).max(0.0)
}

/// Coefficients on `x(k, 1..=t)` making up `XN(k, t)`.
pub fn depreciated_capacity_coeffs(t: usize, dep: f64) -> Vec<f64> {
    (1..=t).map(|tb| depreciated_capacity_coeff(dep, t, tb)).collect()
}

/// Installed capacity `XE + XN` per technology and year for given builds
/// `x[k][t]` (positions within `sets`).
pub fn installed_capacity(params: &ParameterSet, sets: &IndexSets, builds: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..sets.techs.len())
        .map(|kp| {
            (1..=sets.years)
                .map(|t| {
                    let xn: f64 = (1..=t)
                        .map(|tb| depreciated_capacity_coeff(params.depreciation[kp], t, tb) * builds[kp][tb - 1])
                        .sum();
                    params.existing_capacity[[kp, t - 1]] + xn
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Dims {
    pub nk: usize,
    pub nt: usize,
    pub nss: usize,
    pub ni: usize,
    pub nh: usize,
    pub ns: usize,
}

impl Dims {
    pub fn of(sets: &IndexSets) -> Self {
        Dims {
            nk: sets.techs.len(),
            nt: sets.years,
            nss: sets.seasons.len(),
            ni: sets.day_types.len(),
            nh: sets.hours,
            ns: sets.scenarios(),
        }
    }

    /// Operating cells `(t, ss, i, h, s)` over decision hours.
    pub fn cells(&self) -> usize {
        self.nt * self.nss * self.ni * self.nh * self.ns
    }
}

/// Row and column counts by arithmetic on the index sets alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SizeReport {
    pub rows: BTreeMap<RowTag, usize>,
    pub total_rows: usize,
    pub x_columns: usize,
    pub g_columns: usize,
    pub r_columns: usize,
    pub total_columns: usize,
}

/// Closed-form row and column counts of the model for `sets` and `variant`.
pub fn closed_form_size(sets: &IndexSets, variant: &ModelVariant) -> SizeReport {
    let d = Dims::of(sets);
    let ngas = sets.techs.iter().filter(|k| k.is_gas()).count();
    let nvar = sets.techs.iter().filter(|k| k.is_variation_limited()).count();
    let per_tech = d.cells();
    let mut rows = BTreeMap::new();
    rows.insert(RowTag::Eq5, (d.nk - ngas) * per_tech);
    rows.insert(RowTag::Eq6, ngas * per_tech);
    let r_rows = if variant.variation_costs { d.nk * per_tech } else { 0 };
    rows.insert(RowTag::Eq7, r_rows);
    rows.insert(RowTag::Eq8, r_rows);
    let (up, down) = match (&variant.retained_variation_rows, variant.variation_constraints) {
        (_, false) => (0, 0),
        (None, true) => (nvar * per_tech, nvar * per_tech),
        (Some(kept), true) => {
            let valid = |id: &&VariationRowId| {
                id.k.is_variation_limited()
                    && sets.techs.contains(&id.k)
                    && (1..=d.nt).contains(&id.t)
                    && sets.seasons.contains(&id.ss)
                    && sets.day_types.contains(&id.i)
                    && (1..=d.nh).contains(&id.h)
                    && (1..=d.ns).contains(&id.s)
            };
            let n_up = kept.iter().filter(valid).filter(|id| id.up).count();
            let n_all = kept.iter().filter(valid).count();
            (n_up, n_all - n_up)
        }
    };
    rows.insert(RowTag::Eq9, up);
    rows.insert(RowTag::Eq10, down);
    rows.insert(RowTag::Eq11, d.nk * d.nt * d.nss * d.ni * d.ns);
    rows.insert(RowTag::Eq12, per_tech);
    let (upper, lower) = share_row_techs(sets, variant);
    rows.insert(RowTag::Eq13, upper * d.nt);
    rows.insert(RowTag::Eq14, lower * d.nt);
    let fixed = variant.fixed_capacities.as_ref().map_or(0, |f| {
        f.keys()
            .filter(|(k, t)| sets.techs.contains(k) && (1..=d.nt).contains(t))
            .count()
    });
    rows.insert(RowTag::Fix, fixed);
    rows.retain(|_, n| *n > 0);
    let x_columns = d.nk * d.nt;
    let g_columns = d.nk * d.nt * d.nss * d.ni * (d.nh + 1) * d.ns;
    let r_columns = if variant.variation_costs { d.nk * per_tech } else { 0 };
    SizeReport {
        total_rows: rows.values().sum(),
        rows,
        x_columns,
        g_columns,
        r_columns,
        total_columns: x_columns + g_columns + r_columns,
    }
}

fn share_row_techs(sets: &IndexSets, variant: &ModelVariant) -> (usize, usize) {
    let m = &variant.share_constraints;
    (
        sets.techs.iter().filter(|&&k| m.has_upper(k)).count(),
        sets.techs.iter().filter(|&&k| m.has_lower(k)).count(),
    )
}

/// Checks index-set and array-shape consistency, the part of validation the
/// generators rely on to index safely.
pub(crate) fn check_shapes(params: &ParameterSet, sets: &IndexSets) -> Result<(), ModelError> {
    let report = validate(params, sets);
    let structural: Vec<String> = report
        .violations
        .iter()
        .filter(|v| matches!(v.kind, ViolationKind::Shape | ViolationKind::IndexSets))
        .map(|v| v.to_string())
        .collect();
    if structural.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Shape(structural.join("; ")))
    }
}

/// Row/column generator for one parameter set and variant.
pub struct IsoGep<'a> {
    params: &'a ParameterSet,
    sets: &'a IndexSets,
    variant: &'a ModelVariant,
    d: Dims,
    gas: Vec<bool>,
    limited: Vec<bool>,
    upper_share: Vec<bool>,
    lower_share: Vec<bool>,
    fixed: BTreeMap<(usize, usize), f64>,
}

impl<'a> IsoGep<'a> {
    pub fn new(params: &'a ParameterSet, sets: &'a IndexSets, variant: &'a ModelVariant) -> Result<Self, ModelError> {
        if variant.family != ModelFamily::IsoGep {
            return Err(ModelError::WrongFamily(variant.family));
        }
        check_shapes(params, sets)?;
        let mut fixed = BTreeMap::new();
        for (&(k, t), &v) in variant.fixed_capacities.iter().flatten() {
            let kp = sets.tech_position(k).ok_or(ModelError::FixedOutsideSets(k, t))?;
            if !(1..=sets.years).contains(&t) {
                return Err(ModelError::FixedOutsideSets(k, t));
            }
            fixed.insert((kp, t - 1), v);
        }
        let m = &variant.share_constraints;
        Ok(IsoGep {
            params,
            sets,
            variant,
            d: Dims::of(sets),
            gas: sets.techs.iter().map(|k| k.is_gas()).collect(),
            limited: sets.techs.iter().map(|k| k.is_variation_limited()).collect(),
            upper_share: sets.techs.iter().map(|&k| m.has_upper(k)).collect(),
            lower_share: sets.techs.iter().map(|&k| m.has_lower(k)).collect(),
            fixed,
        })
    }

    pub fn dims(&self) -> Dims {
        self.d
    }

    // Column positions. `tp`, `ss`, `i`, `s` are 0-based positions; `h` is
    // the hour itself (0 allowed for g).

    fn nx(&self) -> usize {
        self.d.nk * self.d.nt
    }

    fn ng(&self) -> usize {
        self.d.nk * self.d.nt * self.d.nss * self.d.ni * (self.d.nh + 1) * self.d.ns
    }

    fn nr(&self) -> usize {
        if self.variant.variation_costs {
            self.d.nk * self.d.cells()
        } else {
            0
        }
    }

    pub fn column_count(&self) -> usize {
        self.nx() + self.ng() + self.nr()
    }

    fn x_pos(&self, kp: usize, tp: usize) -> usize {
        kp * self.d.nt + tp
    }

    fn g_pos(&self, kp: usize, tp: usize, ss: usize, i: usize, h: usize, s: usize) -> usize {
        let d = &self.d;
        self.nx() + ((((kp * d.nt + tp) * d.nss + ss) * d.ni + i) * (d.nh + 1) + h) * d.ns + s
    }

    fn r_pos(&self, kp: usize, tp: usize, ss: usize, i: usize, h: usize, s: usize) -> usize {
        let d = &self.d;
        self.nx() + self.ng() + ((((kp * d.nt + tp) * d.nss + ss) * d.ni + i) * d.nh + (h - 1)) * d.ns + s
    }

    fn a(&self, kp: usize, tp: usize, tbp: usize) -> f64 {
        depreciated_capacity_coeff(self.params.depreciation[kp], tp + 1, tbp + 1)
    }

    fn op_index(&self, kp: Option<usize>, tp: usize, ss: usize, i: usize, h: usize, s: usize) -> Index {
        Index::cell(
            kp.map(|kp| self.sets.techs[kp]),
            tp + 1,
            self.sets.seasons[ss],
            self.sets.day_types[i],
            h,
            s + 1,
        )
    }

    fn has_variation_row(&self, up: bool, kp: usize, tp: usize, ss: usize, i: usize, h: usize, s: usize) -> bool {
        if !self.variant.variation_constraints || !self.limited[kp] {
            return false;
        }
        match &self.variant.retained_variation_rows {
            None => true,
            Some(kept) => kept.contains(&VariationRowId {
                up,
                k: self.sets.techs[kp],
                t: tp + 1,
                ss: self.sets.seasons[ss],
                i: self.sets.day_types[i],
                h,
                s: s + 1,
            }),
        }
    }

    /// Key of column position `j`.
    pub fn column_key(&self, j: usize) -> ColKey {
        let d = &self.d;
        if j < self.nx() {
            return ColKey::new(ColKind::X, Index::kt(self.sets.techs[j / d.nt], j % d.nt + 1));
        }
        let (kind, mut rest, nh_span, h_offset) = if j < self.nx() + self.ng() {
            (ColKind::G, j - self.nx(), d.nh + 1, 0)
        } else {
            (ColKind::R, j - self.nx() - self.ng(), d.nh, 1)
        };
        let s = rest % d.ns;
        rest /= d.ns;
        let h = rest % nh_span + h_offset;
        rest /= nh_span;
        let i = rest % d.ni;
        rest /= d.ni;
        let ss = rest % d.nss;
        rest /= d.nss;
        let tp = rest % d.nt;
        let kp = rest / d.nt;
        ColKey::new(kind, self.op_index(Some(kp), tp, ss, i, h, s))
    }

    /// Column `j` with bounds and objective coefficient.
    pub fn column(&self, j: usize) -> Column {
        let key = self.column_key(j);
        let p = self.params;
        let kp = self.sets.tech_position(key.idx.k.expect("model columns carry a technology")).unwrap();
        let tp = key.idx.t as usize - 1;
        let cost = match key.kind {
            ColKind::X => p.investment_cost[[kp, tp]] + (tp..self.d.nt).map(|t| p.fixed_cost[[kp, t]]).sum::<f64>(),
            ColKind::G | ColKind::R => {
                let ss = self.sets.season_position(key.idx.ss.unwrap()).unwrap();
                let i = self.sets.day_type_position(key.idx.i.unwrap()).unwrap();
                let s = key.idx.s.unwrap() as usize - 1;
                let h = key.idx.h.unwrap();
                let weight = p.probability[[ss, i, s]] * p.days[[i, ss]];
                match key.kind {
                    ColKind::G if h == 0 => 0.0,
                    ColKind::G => weight * p.variable_cost[[kp, tp]],
                    _ => weight * p.variation_cost[[kp, tp]],
                }
            }
            _ => unreachable!("only x, g and r columns are generated"),
        };
        Column::nonnegative(key, cost)
    }

    /// Emits every row in canonical order. With `with_coeffs` false the entry
    /// slice is always empty (metadata-only enumeration).
    pub fn for_each_row(&self, with_coeffs: bool, f: &mut dyn FnMut(RowKey, Sense, f64, &[(usize, f64)])) {
        let d = self.d;
        let p = self.params;
        let mut buf: Vec<(usize, f64)> = Vec::with_capacity(d.nt + 3);

        // Sum over builds of `scale * a * x`, appended to `buf`.
        let push_xn = |buf: &mut Vec<(usize, f64)>, kp: usize, tp: usize, scale: f64| {
            if with_coeffs {
                for tbp in 0..=tp {
                    let c = -scale * self.a(kp, tp, tbp);
                    if c != 0.0 {
                        buf.push((self.x_pos(kp, tbp), c));
                    }
                }
            }
        };

        // EQ5 then EQ6: capacity rows.
        for want_gas in [false, true] {
            let tag = if want_gas { RowTag::Eq6 } else { RowTag::Eq5 };
            for kp in (0..d.nk).filter(|&kp| self.gas[kp] == want_gas) {
                for tp in 0..d.nt {
                    for ss in 0..d.nss {
                        for i in 0..d.ni {
                            for h in 1..=d.nh {
                                let cap = p.capability[[kp, ss, h - 1]];
                                for s in 0..d.ns {
                                    let mut rhs = cap * p.existing_capacity[[kp, tp]];
                                    if want_gas {
                                        rhs -= p.reserve_fraction[tp] * p.growth[tp] * p.demand[[ss, i, h - 1, s]];
                                    }
                                    buf.clear();
                                    push_xn(&mut buf, kp, tp, cap);
                                    if with_coeffs {
                                        buf.push((self.g_pos(kp, tp, ss, i, h, s), 1.0));
                                    }
                                    f(RowKey::new(tag, self.op_index(Some(kp), tp, ss, i, h, s)), Sense::Le, rhs, &buf);
                                }
                            }
                        }
                    }
                }
            }
        }

        // EQ7/EQ8: r bounds |Δg|.
        if self.variant.variation_costs {
            for (tag, sign) in [(RowTag::Eq7, 1.0), (RowTag::Eq8, -1.0)] {
                for kp in 0..d.nk {
                    for tp in 0..d.nt {
                        for ss in 0..d.nss {
                            for i in 0..d.ni {
                                for h in 1..=d.nh {
                                    for s in 0..d.ns {
                                        buf.clear();
                                        if with_coeffs {
                                            buf.push((self.g_pos(kp, tp, ss, i, h - 1, s), -sign));
                                            buf.push((self.g_pos(kp, tp, ss, i, h, s), sign));
                                            buf.push((self.r_pos(kp, tp, ss, i, h, s), -1.0));
                                        }
                                        f(RowKey::new(tag, self.op_index(Some(kp), tp, ss, i, h, s)), Sense::Le, 0.0, &buf);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }

        // EQ9/EQ10: variation limits.
        for (tag, up) in [(RowTag::Eq9, true), (RowTag::Eq10, false)] {
            let sign = if up { 1.0 } else { -1.0 };
            for kp in 0..d.nk {
                if !self.variant.variation_constraints || !self.limited[kp] {
                    continue;
                }
                let limit = |ss: usize| {
                    if up {
                        p.variation_up[[kp, ss]]
                    } else {
                        p.variation_down[[kp, ss]]
                    }
                };
                for tp in 0..d.nt {
                    for ss in 0..d.nss {
                        for i in 0..d.ni {
                            for h in 1..=d.nh {
                                let scale = limit(ss) * p.capability[[kp, ss, h - 1]];
                                for s in 0..d.ns {
                                    if !self.has_variation_row(up, kp, tp, ss, i, h, s) {
                                        continue;
                                    }
                                    buf.clear();
                                    push_xn(&mut buf, kp, tp, scale);
                                    if with_coeffs {
                                        buf.push((self.g_pos(kp, tp, ss, i, h - 1, s), -sign));
                                        buf.push((self.g_pos(kp, tp, ss, i, h, s), sign));
                                    }
                                    let rhs = scale * p.existing_capacity[[kp, tp]];
                                    f(RowKey::new(tag, self.op_index(Some(kp), tp, ss, i, h, s)), Sense::Le, rhs, &buf);
                                }
                            }
                        }
                    }
                }
            }
        }

        // EQ11: hour-0 anchor.
        for kp in 0..d.nk {
            for tp in 0..d.nt {
                for ss in 0..d.nss {
                    for i in 0..d.ni {
                        for s in 0..d.ns {
                            let ig = p.initial_generation[[kp, ss, i, s]];
                            buf.clear();
                            push_xn(&mut buf, kp, tp, ig);
                            if with_coeffs {
                                buf.push((self.g_pos(kp, tp, ss, i, 0, s), 1.0));
                            }
                            let rhs = ig * p.existing_capacity[[kp, tp]];
                            f(RowKey::new(RowTag::Eq11, self.op_index(Some(kp), tp, ss, i, 0, s)), Sense::Eq, rhs, &buf);
                        }
                    }
                }
            }
        }

        // EQ12: demand cover.
        for tp in 0..d.nt {
            for ss in 0..d.nss {
                for i in 0..d.ni {
                    for h in 1..=d.nh {
                        for s in 0..d.ns {
                            buf.clear();
                            if with_coeffs {
                                for kp in 0..d.nk {
                                    buf.push((self.g_pos(kp, tp, ss, i, h, s), 1.0));
                                }
                            }
                            let rhs = p.growth[tp] * p.demand[[ss, i, h - 1, s]];
                            f(RowKey::new(RowTag::Eq12, self.op_index(None, tp, ss, i, h, s)), Sense::Ge, rhs, &buf);
                        }
                    }
                }
            }
        }

        // EQ13/EQ14: shares.
        for (tag, upper) in [(RowTag::Eq13, true), (RowTag::Eq14, false)] {
            for kp in 0..d.nk {
                if (upper && !self.upper_share[kp]) || (!upper && !self.lower_share[kp]) {
                    continue;
                }
                for tp in 0..d.nt {
                    let alpha = if upper { p.share_max[[kp, tp]] } else { p.share_min[[kp, tp]] };
                    buf.clear();
                    if with_coeffs {
                        for k2 in 0..d.nk {
                            let own = if k2 == kp { 1.0 } else { 0.0 };
                            for tbp in 0..=tp {
                                let c = self.a(k2, tp, tbp) * (own - alpha);
                                if c != 0.0 {
                                    buf.push((self.x_pos(k2, tbp), c));
                                }
                            }
                        }
                    }
                    let total_xe: f64 = (0..d.nk).map(|k2| p.existing_capacity[[k2, tp]]).sum();
                    let rhs = alpha * total_xe - p.existing_capacity[[kp, tp]];
                    let sense = if upper { Sense::Le } else { Sense::Ge };
                    f(RowKey::new(tag, Index::kt(self.sets.techs[kp], tp + 1)), sense, rhs, &buf);
                }
            }
        }

        // FIX: pinned builds.
        for (&(kp, tp), &v) in &self.fixed {
            buf.clear();
            if with_coeffs {
                buf.push((self.x_pos(kp, tp), 1.0));
            }
            f(RowKey::new(RowTag::Fix, Index::kt(self.sets.techs[kp], tp + 1)), Sense::Eq, v, &buf);
        }
    }

    /// Row counts by tag from enumerating row keys.
    pub fn enumerate_row_counts(&self) -> BTreeMap<RowTag, usize> {
        let mut out = BTreeMap::new();
        self.for_each_row(false, &mut |key, _, _, _| *out.entry(key.tag).or_insert(0) += 1);
        out
    }

    /// Entries of column `j` in canonical row order, written into `out`.
    pub fn column_entries(&self, j: usize, out: &mut Vec<(RowKey, f64)>) {
        out.clear();
        let key = self.column_key(j);
        let d = self.d;
        let p = self.params;
        let kp = self.sets.tech_position(key.idx.k.unwrap()).unwrap();
        let mut push = |tag: RowTag, idx: Index, c: f64| {
            if c != 0.0 {
                out.push((RowKey::new(tag, idx), c));
            }
        };
        match key.kind {
            ColKind::X => {
                let tb = key.idx.t as usize - 1;
                let cap_tag = if self.gas[kp] { RowTag::Eq6 } else { RowTag::Eq5 };
                for tp in tb..d.nt {
                    let a = self.a(kp, tp, tb);
                    for ss in 0..d.nss {
                        for i in 0..d.ni {
                            for h in 1..=d.nh {
                                for s in 0..d.ns {
                                    push(cap_tag, self.op_index(Some(kp), tp, ss, i, h, s), -p.capability[[kp, ss, h - 1]] * a);
                                }
                            }
                        }
                    }
                }
                for (tag, up) in [(RowTag::Eq9, true), (RowTag::Eq10, false)] {
                    for tp in tb..d.nt {
                        let a = self.a(kp, tp, tb);
                        for ss in 0..d.nss {
                            let limit = if up { p.variation_up[[kp, ss]] } else { p.variation_down[[kp, ss]] };
                            for i in 0..d.ni {
                                for h in 1..=d.nh {
                                    for s in 0..d.ns {
                                        if self.has_variation_row(up, kp, tp, ss, i, h, s) {
                                            let c = -limit * p.capability[[kp, ss, h - 1]] * a;
                                            push(tag, self.op_index(Some(kp), tp, ss, i, h, s), c);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                for tp in tb..d.nt {
                    let a = self.a(kp, tp, tb);
                    for ss in 0..d.nss {
                        for i in 0..d.ni {
                            for s in 0..d.ns {
                                let c = -p.initial_generation[[kp, ss, i, s]] * a;
                                push(RowTag::Eq11, self.op_index(Some(kp), tp, ss, i, 0, s), c);
                            }
                        }
                    }
                }
                for (tag, upper) in [(RowTag::Eq13, true), (RowTag::Eq14, false)] {
                    for k2 in 0..d.nk {
                        if (upper && !self.upper_share[k2]) || (!upper && !self.lower_share[k2]) {
                            continue;
                        }
                        for tp in tb..d.nt {
                            let alpha = if upper { p.share_max[[k2, tp]] } else { p.share_min[[k2, tp]] };
                            let own = if k2 == kp { 1.0 } else { 0.0 };
                            push(tag, Index::kt(self.sets.techs[k2], tp + 1), self.a(kp, tp, tb) * (own - alpha));
                        }
                    }
                }
                if self.fixed.contains_key(&(kp, tb)) {
                    push(RowTag::Fix, Index::kt(self.sets.techs[kp], tb + 1), 1.0);
                }
            }
            ColKind::G => {
                let tp = key.idx.t as usize - 1;
                let ss = self.sets.season_position(key.idx.ss.unwrap()).unwrap();
                let i = self.sets.day_type_position(key.idx.i.unwrap()).unwrap();
                let h = key.idx.h.unwrap() as usize;
                let s = key.idx.s.unwrap() as usize - 1;
                let at = |hh: usize| self.op_index(Some(kp), tp, ss, i, hh, s);
                if h >= 1 {
                    let cap_tag = if self.gas[kp] { RowTag::Eq6 } else { RowTag::Eq5 };
                    push(cap_tag, at(h), 1.0);
                }
                // Each variation-type row at hour hh sees +sign on g(hh) and
                // -sign on g(hh-1).
                let mut pair = |tag: RowTag, sign: f64, present: &dyn Fn(usize) -> bool| {
                    if h >= 1 && present(h) {
                        push(tag, at(h), sign);
                    }
                    if h < d.nh && present(h + 1) {
                        push(tag, at(h + 1), -sign);
                    }
                };
                if self.variant.variation_costs {
                    pair(RowTag::Eq7, 1.0, &|_| true);
                    pair(RowTag::Eq8, -1.0, &|_| true);
                }
                pair(RowTag::Eq9, 1.0, &|hh| self.has_variation_row(true, kp, tp, ss, i, hh, s));
                pair(RowTag::Eq10, -1.0, &|hh| self.has_variation_row(false, kp, tp, ss, i, hh, s));
                if h == 0 {
                    push(RowTag::Eq11, at(0), 1.0);
                } else {
                    push(RowTag::Eq12, self.op_index(None, tp, ss, i, h, s), 1.0);
                }
            }
            ColKind::R => {
                let idx = key.idx;
                push(RowTag::Eq7, idx, -1.0);
                push(RowTag::Eq8, idx, -1.0);
            }
            _ => unreachable!("only x, g and r columns are generated"),
        }
    }

    /// Materializes the model row-wise.
    pub fn build(&self) -> LPModel {
        let mut model = LPModel::new("ISOGEP");
        model.columns = (0..self.column_count()).map(|j| self.column(j)).collect();
        self.for_each_row(true, &mut |key, sense, rhs, coeffs| {
            let mut coeffs = coeffs.to_vec();
            coeffs.sort_by_key(|&(j, _)| j);
            model.rows.push(super::lp::Row { key, sense, rhs, coeffs });
        });
        model
    }

    /// Materializes the model from the column-wise route.
    pub fn build_by_columns(&self) -> LPModel {
        let mut model = LPModel::new("ISOGEP");
        self.for_each_row(false, &mut |key, sense, rhs, _| {
            model.rows.push(super::lp::Row {
                key,
                sense,
                rhs,
                coeffs: Vec::new(),
            })
        });
        let positions = model.row_positions();
        let mut entries = Vec::new();
        for j in 0..self.column_count() {
            model.columns.push(self.column(j));
            self.column_entries(j, &mut entries);
            for (rk, c) in &entries {
                model.rows[positions[rk]].coeffs.push((j, *c));
            }
        }
        model
    }
}

/// Builds the integrated model for `variant`.
pub fn build_iso_gep(params: &ParameterSet, sets: &IndexSets, variant: &ModelVariant) -> Result<LPModel, ModelError> {
    Ok(IsoGep::new(params, sets, variant)?.build())
}

/// Technologies in `sets` that the variation rows apply to.
pub fn variation_limited(sets: &IndexSets) -> Vec<TechKind> {
    sets.techs.iter().copied().filter(|k| k.is_variation_limited()).collect()
}
