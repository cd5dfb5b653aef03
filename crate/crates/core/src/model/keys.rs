//! Row and column identities. Every row and column of a generated model
//! carries a key made of a tag and an index tuple; keys order canonically
//! (tag first, then `k, t, ss, i, h, s`) and map one-to-one onto the names
//! used in exported files.
//!
//! Name grammar: the tag followed by the present index components, joined
//! with `.`: technology short name, `t<year>`, season short name, day-type
//! short name, `h<hour>`, `s<scenario>`, block letter, level letter. Years,
//! hours and scenarios are 1-based except that generation columns include
//! hour 0. Generic test rows and columns are named `R<n>` and `v<n>`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::types::{DayType, DemandLevel, Season, TechKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowTag {
    Eq5,
    Eq6,
    Eq7,
    Eq8,
    Eq9,
    Eq10,
    Eq11,
    Eq12,
    Eq13,
    Eq14,
    C2,
    C3,
    C4,
    C5,
    C6,
    Fix,
    #[serde(rename = "R")]
    Generic,
}

impl RowTag {
    pub const ALL: [RowTag; 17] = [
        RowTag::Eq5,
        RowTag::Eq6,
        RowTag::Eq7,
        RowTag::Eq8,
        RowTag::Eq9,
        RowTag::Eq10,
        RowTag::Eq11,
        RowTag::Eq12,
        RowTag::Eq13,
        RowTag::Eq14,
        RowTag::C2,
        RowTag::C3,
        RowTag::C4,
        RowTag::C5,
        RowTag::C6,
        RowTag::Fix,
        RowTag::Generic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RowTag::Eq5 => "EQ5",
            RowTag::Eq6 => "EQ6",
            RowTag::Eq7 => "EQ7",
            RowTag::Eq8 => "EQ8",
            RowTag::Eq9 => "EQ9",
            RowTag::Eq10 => "EQ10",
            RowTag::Eq11 => "EQ11",
            RowTag::Eq12 => "EQ12",
            RowTag::Eq13 => "EQ13",
            RowTag::Eq14 => "EQ14",
            RowTag::C2 => "C2",
            RowTag::C3 => "C3",
            RowTag::C4 => "C4",
            RowTag::C5 => "C5",
            RowTag::C6 => "C6",
            RowTag::Fix => "FIX",
            RowTag::Generic => "R",
        }
    }

    fn layout(self) -> &'static [Field] {
        use Field::*;
        match self {
            RowTag::Eq5
            | RowTag::Eq6
            | RowTag::Eq7
            | RowTag::Eq8
            | RowTag::Eq9
            | RowTag::Eq10
            | RowTag::Eq11 => &[K, T, Ss, I, H, S],
            RowTag::Eq12 => &[T, Ss, I, H, S],
            RowTag::Eq13 | RowTag::Eq14 | RowTag::C5 | RowTag::C6 | RowTag::Fix => &[K, T],
            RowTag::C2 | RowTag::C3 => &[K, T, Ss, B, L],
            RowTag::C4 => &[T, Ss, B, L],
            RowTag::Generic => &[],
        }
    }
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RowTag {
    type Err = KeyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RowTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| KeyError(format!("unknown row tag `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColKind {
    /// New capacity `x(k, t)`.
    X,
    /// Generation `g(k, t, ss, i, h, s)`, hour 0 included.
    G,
    /// Variation amount `r(k, t, ss, i, h, s)`.
    R,
    /// Block generation of the conventional model, `g(k, t, ss, block, level)`.
    Gb,
    Generic,
}

impl ColKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColKind::X => "x",
            ColKind::G => "g",
            ColKind::R => "r",
            ColKind::Gb => "gb",
            ColKind::Generic => "v",
        }
    }

    fn layout(self) -> &'static [Field] {
        use Field::*;
        match self {
            ColKind::X => &[K, T],
            ColKind::G | ColKind::R => &[K, T, Ss, I, H, S],
            ColKind::Gb => &[K, T, Ss, B, L],
            ColKind::Generic => &[],
        }
    }
}

/// Load-duration block of the conventional model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Block {
    Base,
    Medium,
    Peak,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Base, Block::Medium, Block::Peak];

    pub fn letter(self) -> &'static str {
        match self {
            Block::Base => "B",
            Block::Medium => "M",
            Block::Peak => "P",
        }
    }

    pub fn from_letter(s: &str) -> Option<Block> {
        Block::ALL.into_iter().find(|b| b.letter() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    K,
    T,
    Ss,
    I,
    H,
    S,
    B,
    L,
}

/// Index tuple. Absent components are `None`; `t` doubles as the ordinal of
/// generic rows and columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Index {
    pub k: Option<TechKind>,
    pub t: u32,
    pub ss: Option<Season>,
    pub i: Option<DayType>,
    pub h: Option<u32>,
    pub s: Option<u32>,
    pub block: Option<Block>,
    pub level: Option<DemandLevel>,
}

impl Index {
    pub fn kt(k: TechKind, t: usize) -> Self {
        Index {
            k: Some(k),
            t: t as u32,
            ..Index::default()
        }
    }

    pub fn cell(k: Option<TechKind>, t: usize, ss: Season, i: DayType, h: usize, s: usize) -> Self {
        Index {
            k,
            t: t as u32,
            ss: Some(ss),
            i: Some(i),
            h: Some(h as u32),
            s: Some(s as u32),
            ..Index::default()
        }
    }

    pub fn block(k: Option<TechKind>, t: usize, ss: Season, block: Block, level: DemandLevel) -> Self {
        Index {
            k,
            t: t as u32,
            ss: Some(ss),
            block: Some(block),
            level: Some(level),
            ..Index::default()
        }
    }

    fn write_fields(&self, layout: &[Field], out: &mut String) {
        use std::fmt::Write;
        for f in layout {
            out.push('.');
            let _ = match f {
                Field::K => write!(out, "{}", self.k.map_or("?", TechKind::short_name)),
                Field::T => write!(out, "t{}", self.t),
                Field::Ss => write!(out, "{}", self.ss.map_or("?", Season::short_name)),
                Field::I => write!(out, "{}", self.i.map_or("?", DayType::short_name)),
                Field::H => write!(out, "h{}", self.h.unwrap_or(0)),
                Field::S => write!(out, "s{}", self.s.unwrap_or(0)),
                Field::B => write!(out, "{}", self.block.map_or("?", Block::letter)),
                Field::L => write!(out, "{}", self.level.map_or("?", DemandLevel::letter)),
            };
        }
    }

    fn parse_fields(layout: &[Field], parts: &[&str], whole: &str) -> Result<Index, KeyError> {
        if parts.len() != layout.len() {
            return Err(KeyError(format!("`{whole}`: expected {} index parts", layout.len())));
        }
        let bad = |p: &str| KeyError(format!("`{whole}`: bad index part `{p}`"));
        let num = |p: &str, prefix: char| -> Result<u32, KeyError> {
            p.strip_prefix(prefix)
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| bad(p))
        };
        let mut idx = Index::default();
        for (f, &p) in layout.iter().zip(parts) {
            match f {
                Field::K => idx.k = Some(TechKind::from_short_name(p).ok_or_else(|| bad(p))?),
                Field::T => idx.t = num(p, 't')?,
                Field::Ss => idx.ss = Some(Season::from_short_name(p).ok_or_else(|| bad(p))?),
                Field::I => idx.i = Some(DayType::from_short_name(p).ok_or_else(|| bad(p))?),
                Field::H => idx.h = Some(num(p, 'h')?),
                Field::S => idx.s = Some(num(p, 's')?),
                Field::B => idx.block = Some(Block::from_letter(p).ok_or_else(|| bad(p))?),
                Field::L => idx.level = Some(DemandLevel::from_letter(p).ok_or_else(|| bad(p))?),
            }
        }
        Ok(idx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct KeyError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowKey {
    pub tag: RowTag,
    pub idx: Index,
}

impl RowKey {
    pub fn new(tag: RowTag, idx: Index) -> Self {
        RowKey { tag, idx }
    }

    pub fn generic(n: usize) -> Self {
        RowKey {
            tag: RowTag::Generic,
            idx: Index {
                t: n as u32,
                ..Index::default()
            },
        }
    }

    pub fn name(&self) -> String {
        let mut out = String::with_capacity(32);
        self.write_name(&mut out);
        out
    }

    pub fn write_name(&self, out: &mut String) {
        out.push_str(self.tag.as_str());
        if self.tag == RowTag::Generic {
            out.push_str(&self.idx.t.to_string());
        } else {
            self.idx.write_fields(self.tag.layout(), out);
        }
    }

    pub fn parse(name: &str) -> Result<Self, KeyError> {
        if let Some(n) = name.strip_prefix('R').and_then(|n| n.parse::<usize>().ok()) {
            return Ok(RowKey::generic(n));
        }
        let parts: Vec<&str> = name.split('.').collect();
        let tag: RowTag = parts[0].parse()?;
        let idx = Index::parse_fields(tag.layout(), &parts[1..], name)?;
        Ok(RowKey { tag, idx })
    }
}

impl fmt::Display for RowKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColKey {
    pub kind: ColKind,
    pub idx: Index,
}

impl ColKey {
    pub fn new(kind: ColKind, idx: Index) -> Self {
        ColKey { kind, idx }
    }

    pub fn generic(n: usize) -> Self {
        ColKey {
            kind: ColKind::Generic,
            idx: Index {
                t: n as u32,
                ..Index::default()
            },
        }
    }

    pub fn name(&self) -> String {
        let mut out = String::with_capacity(32);
        self.write_name(&mut out);
        out
    }

    pub fn write_name(&self, out: &mut String) {
        out.push_str(self.kind.as_str());
        if self.kind == ColKind::Generic {
            out.push_str(&self.idx.t.to_string());
        } else {
            self.idx.write_fields(self.kind.layout(), out);
        }
    }

    pub fn parse(name: &str) -> Result<Self, KeyError> {
        if let Some(n) = name.strip_prefix('v').and_then(|n| n.parse::<usize>().ok()) {
            return Ok(ColKey::generic(n));
        }
        let parts: Vec<&str> = name.split('.').collect();
        let kind = [ColKind::X, ColKind::G, ColKind::R, ColKind::Gb]
            .into_iter()
            .find(|k| k.as_str() == parts[0])
            .ok_or_else(|| KeyError(format!("unknown column kind in `{name}`")))?;
        let idx = Index::parse_fields(kind.layout(), &parts[1..], name)?;
        Ok(ColKey { kind, idx })
    }
}

impl fmt::Display for ColKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn names_match_the_documented_form() {
        let r = RowKey::new(
            RowTag::Eq5,
            Index::cell(Some(TechKind::Nuclear), 1, Season::Winter, DayType::Weekday, 1, 1),
        );
        assert_eq!(r.name(), "EQ5.nuc.t1.wi.wd.h1.s1");
        let c4 = RowKey::new(RowTag::C4, Index::block(None, 1, Season::Winter, Block::Peak, DemandLevel::High));
        assert_eq!(c4.name(), "C4.t1.wi.P.H");
        let g = ColKey::new(
            ColKind::G,
            Index::cell(Some(TechKind::Gas), 1, Season::Winter, DayType::Weekday, 0, 12),
        );
        assert_eq!(g.name(), "g.gas.t1.wi.wd.h0.s12");
        assert_eq!(ColKey::new(ColKind::X, Index::kt(TechKind::Nuclear, 1)).name(), "x.nuc.t1");
        assert_eq!(RowKey::generic(7).name(), "R7");
        assert_eq!(ColKey::generic(3).name(), "v3");
    }

    #[test]
    fn malformed_names_are_rejected() {
        for bad in ["EQ5.nuc.t1", "EQ99.nuc.t1", "x.coal.t1", "g.gas.t1.wi.wd.hX.s1", ""] {
            assert!(RowKey::parse(bad).is_err() || ColKey::parse(bad).is_err(), "{bad}");
        }
        assert!(ColKey::parse("x.coal.t1").is_err());
    }

    fn arb_index() -> impl Strategy<Value = Index> {
        (0usize..6, 1u32..40, 0usize..4, 0usize..2, 0u32..25, 1u32..100, 0usize..3, 0usize..3).prop_map(
            |(k, t, ss, i, h, s, b, l)| Index {
                k: Some(TechKind::ALL[k]),
                t,
                ss: Some(Season::ALL[ss]),
                i: Some(DayType::ALL[i]),
                h: Some(h),
                s: Some(s),
                block: Some(Block::ALL[b]),
                level: Some(DemandLevel::ALL[l]),
            },
        )
    }

    fn restrict(idx: Index, layout: &[Field]) -> Index {
        let has = |f| layout.contains(&f);
        Index {
            k: idx.k.filter(|_| has(Field::K)),
            t: if has(Field::T) { idx.t } else { 0 },
            ss: idx.ss.filter(|_| has(Field::Ss)),
            i: idx.i.filter(|_| has(Field::I)),
            h: idx.h.filter(|_| has(Field::H)),
            s: idx.s.filter(|_| has(Field::S)),
            block: idx.block.filter(|_| has(Field::B)),
            level: idx.level.filter(|_| has(Field::L)),
        }
    }

    proptest! {
        #[test]
        fn row_names_round_trip(tag in 0usize..16, idx in arb_index()) {
            let tag = RowTag::ALL[tag];
            let key = RowKey::new(tag, restrict(idx, tag.layout()));
            prop_assert_eq!(RowKey::parse(&key.name()).unwrap(), key);
        }

        #[test]
        fn col_names_round_trip(kind in 0usize..4, idx in arb_index()) {
            let kind = [ColKind::X, ColKind::G, ColKind::R, ColKind::Gb][kind];
            let key = ColKey::new(kind, restrict(idx, kind.layout()));
            prop_assert_eq!(ColKey::parse(&key.name()).unwrap(), key);
        }
    }
}
