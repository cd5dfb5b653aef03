//! Reader for solution files produced by an external solver: one
//! `name value` pair per line, where `name` is a column name (primal value)
//! or a row name (dual value, in this crate's sign convention). Blank lines
//! and lines starting with `#` are skipped. Names absent from the file take
//! the value 0, matching solvers that only print nonzeros.

use std::collections::HashMap;
use std::io::BufRead;

use super::Solution;
use crate::model::LPModel;

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Reads primal and dual values for `model` and wraps them as an optimal
/// [`Solution`] with the objective and reduced costs recomputed.
pub fn read_external_solution(reader: impl BufRead, model: &LPModel) -> Result<Solution, ExternalError> {
    let cols: HashMap<String, usize> = model.columns.iter().enumerate().map(|(j, c)| (c.key.name(), j)).collect();
    let rows: HashMap<String, usize> = model.rows.iter().enumerate().map(|(i, r)| (r.key.name(), i)).collect();
    let mut primal = vec![0.0; model.columns.len()];
    let mut dual = vec![0.0; model.rows.len()];
    let mut seen_cols = vec![false; model.columns.len()];
    let mut seen_rows = vec![false; model.rows.len()];
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let ln = n + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let err = |message: String| ExternalError::Parse { line: ln, message };
        let mut parts = text.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err("expected `name value`".into()));
        };
        let value: f64 = value.parse().map_err(|_| err(format!("bad number `{value}`")))?;
        if !value.is_finite() {
            return Err(err(format!("non-finite value for `{name}`")));
        }
        if let Some(&j) = cols.get(name) {
            if std::mem::replace(&mut seen_cols[j], true) {
                return Err(err(format!("`{name}` given twice")));
            }
            primal[j] = value;
        } else if let Some(&i) = rows.get(name) {
            if std::mem::replace(&mut seen_rows[i], true) {
                return Err(err(format!("`{name}` given twice")));
            }
            dual[i] = value;
        } else {
            return Err(err(format!("unknown name `{name}`")));
        }
    }
    Ok(Solution::from_values(model, primal, dual))
}
