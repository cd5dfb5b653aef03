//! Sparse linear program in row form.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::keys::{ColKey, RowKey, RowTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn mps_marker(self) -> &'static str {
        match self {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub key: ColKey,
    pub lower: f64,
    pub upper: f64,
    /// Objective coefficient (minimization).
    pub cost: f64,
}

impl Column {
    pub fn nonnegative(key: ColKey, cost: f64) -> Self {
        Column {
            key,
            lower: 0.0,
            upper: f64::INFINITY,
            cost,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub key: RowKey,
    pub sense: Sense,
    pub rhs: f64,
    /// `(column position, coefficient)`, ascending by position, no zeros.
    pub coeffs: Vec<(usize, f64)>,
}

impl Row {
    pub fn activity(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * point[j]).sum()
    }

    /// Amount by which `activity` misses the row, 0 when satisfied.
    pub fn violation(&self, activity: f64) -> f64 {
        match self.sense {
            Sense::Le => (activity - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - activity).max(0.0),
            Sense::Eq => (activity - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("row {row}: column position {col} out of range")]
    ColumnOutOfRange { row: String, col: usize },
    #[error("row {row}: duplicate entry for column {col}")]
    DuplicateEntry { row: String, col: String },
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("column {0}: lower bound exceeds upper bound")]
    BoundOrder(String),
    #[error("{0}: non-finite data")]
    NotFinite(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LPModel {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl LPModel {
    pub fn new(name: impl Into<String>) -> Self {
        LPModel {
            name: name.into(),
            ..LPModel::default()
        }
    }

    pub fn add_column(&mut self, column: Column) -> usize {
        self.columns.push(column);
        self.columns.len() - 1
    }

    /// Adds a row, sorting its entries and dropping zero coefficients.
    pub fn add_row(&mut self, key: RowKey, sense: Sense, rhs: f64, mut coeffs: Vec<(usize, f64)>) -> usize {
        coeffs.retain(|&(_, a)| a != 0.0);
        coeffs.sort_by_key(|&(j, _)| j);
        self.rows.push(Row { key, sense, rhs, coeffs });
        self.rows.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.coeffs.len()).sum()
    }

    pub fn objective(&self, point: &[f64]) -> f64 {
        self.columns.iter().zip(point).map(|(c, x)| c.cost * x).sum()
    }

    pub fn column_positions(&self) -> HashMap<ColKey, usize> {
        self.columns.iter().enumerate().map(|(j, c)| (c.key, j)).collect()
    }

    pub fn row_positions(&self) -> HashMap<RowKey, usize> {
        self.rows.iter().enumerate().map(|(i, r)| (r.key, i)).collect()
    }

    pub fn rows_by_tag(&self) -> BTreeMap<RowTag, usize> {
        let mut out = BTreeMap::new();
        for r in &self.rows {
            *out.entry(r.key.tag).or_insert(0) += 1;
        }
        out
    }

    /// Column-major view: for every column, its `(row position, coefficient)`
    /// entries in row order.
    pub fn column_entries(&self) -> Vec<Vec<(usize, f64)>> {
        let mut out = vec![Vec::new(); self.columns.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                out[j].push((i, a));
            }
        }
        out
    }

    /// Checks entry positions, duplicates, bounds and finiteness.
    pub fn check_structure(&self) -> Result<(), StructureError> {
        let mut names = HashSet::new();
        for c in &self.columns {
            let name = c.key.name();
            if c.lower > c.upper {
                return Err(StructureError::BoundOrder(name));
            }
            if !c.cost.is_finite() || c.lower.is_nan() || c.upper.is_nan() {
                return Err(StructureError::NotFinite(name));
            }
            if !names.insert(name.clone()) {
                return Err(StructureError::DuplicateName(name));
            }
        }
        let mut row_names = HashSet::new();
        for r in &self.rows {
            let name = r.key.name();
            if !r.rhs.is_finite() {
                return Err(StructureError::NotFinite(name));
            }
            let mut last = None;
            for &(j, a) in &r.coeffs {
                if j >= self.columns.len() {
                    return Err(StructureError::ColumnOutOfRange { row: name, col: j });
                }
                if !a.is_finite() {
                    return Err(StructureError::NotFinite(name));
                }
                if last == Some(j) {
                    return Err(StructureError::DuplicateEntry {
                        row: name,
                        col: self.columns[j].key.name(),
                    });
                }
                last = Some(j);
            }
            if !row_names.insert(name.clone()) {
                return Err(StructureError::DuplicateName(name));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_row_normalizes_entries() {
        let mut m = LPModel::new("t");
        let a = m.add_column(Column::nonnegative(ColKey::generic(0), 1.0));
        let b = m.add_column(Column::nonnegative(ColKey::generic(1), 1.0));
        m.add_row(RowKey::generic(0), Sense::Le, 1.0, vec![(b, 2.0), (a, 0.0), (a, 1.0)]);
        assert_eq!(m.rows[0].coeffs, vec![(0, 1.0), (1, 2.0)]);
        assert!(m.check_structure().is_ok());
        m.rows[0].coeffs.push((1, 3.0));
        assert!(matches!(m.check_structure(), Err(StructureError::DuplicateEntry { .. })));
    }
}
