//! Free-format MPS export and import.
//!
//! Layout written: `NAME`, `ROWS` (objective row `COST` first), `COLUMNS`
//! (every column opens with its `COST` entry, zero included, so columns
//! without constraint entries survive), `RHS` (right-hand sides other than `0.0`
//! under the set name `RHS`), `BOUNDS` (set name `BND`, only columns whose
//! bounds differ from `[0, inf)`), `ENDATA`. Numbers use the shortest text
//! that parses back to the same `f64`.

use std::collections::{HashMap, HashSet};
use std::io::{self, Write};

use crate::model::{ColKey, Column, IsoGep, KeyError, LPModel, Row, RowKey, Sense};

const OBJECTIVE_ROW: &str = "COST";

#[derive(Debug, thiserror::Error)]
pub enum MpsError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("model name `{0}` must be a single non-empty token")]
    BadModelName(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse {
        line,
        message: message.into(),
    }
}

/// A model that can be streamed column by column without materializing it.
pub trait ModelSource {
    fn name(&self) -> &str;
    fn column_count(&self) -> usize;
    fn column(&self, j: usize) -> Column;
    fn column_key(&self, j: usize) -> ColKey {
        self.column(j).key
    }
    /// Entries of column `j` as `(row key, coefficient)` in row order.
    fn column_entries(&self, j: usize, out: &mut Vec<(RowKey, f64)>);
    /// Every row in model order, without coefficients.
    fn for_each_row(&self, f: &mut dyn FnMut(RowKey, Sense, f64));
}

/// An [`LPModel`] with its column-major view precomputed.
pub struct LpSource<'a> {
    model: &'a LPModel,
    columns: Vec<Vec<(usize, f64)>>,
}

impl<'a> LpSource<'a> {
    pub fn new(model: &'a LPModel) -> Self {
        LpSource {
            model,
            columns: model.column_entries(),
        }
    }
}

impl ModelSource for LpSource<'_> {
    fn name(&self) -> &str {
        &self.model.name
    }

    fn column_count(&self) -> usize {
        self.model.columns.len()
    }

    fn column(&self, j: usize) -> Column {
        self.model.columns[j].clone()
    }

    fn column_key(&self, j: usize) -> ColKey {
        self.model.columns[j].key
    }

    fn column_entries(&self, j: usize, out: &mut Vec<(RowKey, f64)>) {
        out.clear();
        out.extend(self.columns[j].iter().map(|&(i, a)| (self.model.rows[i].key, a)));
    }

    fn for_each_row(&self, f: &mut dyn FnMut(RowKey, Sense, f64)) {
        for r in &self.model.rows {
            f(r.key, r.sense, r.rhs);
        }
    }
}

impl ModelSource for IsoGep<'_> {
    fn name(&self) -> &str {
        "ISOGEP"
    }

    fn column_count(&self) -> usize {
        IsoGep::column_count(self)
    }

    fn column(&self, j: usize) -> Column {
        IsoGep::column(self, j)
    }

    fn column_key(&self, j: usize) -> ColKey {
        IsoGep::column_key(self, j)
    }

    fn column_entries(&self, j: usize, out: &mut Vec<(RowKey, f64)>) {
        IsoGep::column_entries(self, j, out)
    }

    fn for_each_row(&self, f: &mut dyn FnMut(RowKey, Sense, f64)) {
        IsoGep::for_each_row(self, false, &mut |key, sense, rhs, _| f(key, sense, rhs));
    }
}

/// Rejects repeated row or column names. Keys emitted in strictly
/// increasing order are distinct without further bookkeeping; otherwise a
/// hash set is used.
fn check_unique(source: &dyn ModelSource) -> Result<(), MpsError> {
    let mut sorted = true;
    let mut last: Option<RowKey> = None;
    source.for_each_row(&mut |key, _, _| {
        if last.is_some_and(|l| l >= key) {
            sorted = false;
        }
        last = Some(key);
    });
    if !sorted {
        let mut seen = HashSet::new();
        let mut dup = None;
        source.for_each_row(&mut |key, _, _| {
            if dup.is_none() && !seen.insert(key) {
                dup = Some(key);
            }
        });
        if let Some(k) = dup {
            return Err(MpsError::DuplicateName(k.name()));
        }
    }
    let n = source.column_count();
    let ordered = (1..n).all(|j| source.column_key(j - 1) < source.column_key(j));
    if !ordered {
        let mut seen = HashSet::new();
        for j in 0..n {
            let k = source.column_key(j);
            if !seen.insert(k) {
                return Err(MpsError::DuplicateName(k.name()));
            }
        }
    }
    Ok(())
}

/// Streams `source` as MPS text into `out`.
pub fn write_mps(source: &dyn ModelSource, out: &mut dyn Write) -> Result<(), MpsError> {
    let name = source.name();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(MpsError::BadModelName(name.to_string()));
    }
    check_unique(source)?;
    let mut w = io::BufWriter::new(out);
    let mut line = String::new();
    writeln!(w, "NAME {name}")?;
    writeln!(w, "ROWS")?;
    writeln!(w, " N {OBJECTIVE_ROW}")?;
    let mut io_err = None;
    source.for_each_row(&mut |key, sense, _| {
        if io_err.is_some() {
            return;
        }
        line.clear();
        line.push(' ');
        line.push_str(sense.mps_marker());
        line.push(' ');
        key.write_name(&mut line);
        line.push('\n');
        if let Err(e) = w.write_all(line.as_bytes()) {
            io_err = Some(e);
        }
    });
    if let Some(e) = io_err.take() {
        return Err(e.into());
    }

    writeln!(w, "COLUMNS")?;
    let mut entries = Vec::new();
    let mut cname = String::new();
    for j in 0..source.column_count() {
        let col = source.column(j);
        cname.clear();
        col.key.write_name(&mut cname);
        writeln!(w, " {cname} {OBJECTIVE_ROW} {:?}", col.cost)?;
        source.column_entries(j, &mut entries);
        for (rk, a) in &entries {
            line.clear();
            line.push(' ');
            line.push_str(&cname);
            line.push(' ');
            rk.write_name(&mut line);
            w.write_all(line.as_bytes())?;
            writeln!(w, " {a:?}")?;
        }
    }

    writeln!(w, "RHS")?;
    source.for_each_row(&mut |key, _, rhs| {
        if io_err.is_some() || (rhs == 0.0 && rhs.is_sign_positive()) {
            return;
        }
        line.clear();
        line.push_str(" RHS ");
        key.write_name(&mut line);
        if let Err(e) = writeln!(w, "{line} {rhs:?}") {
            io_err = Some(e);
        }
    });
    if let Some(e) = io_err {
        return Err(e.into());
    }

    writeln!(w, "BOUNDS")?;
    for j in 0..source.column_count() {
        let c = source.column(j);
        let (lo, up) = (c.lower, c.upper);
        if lo == 0.0 && up == f64::INFINITY && lo.is_sign_positive() {
            continue;
        }
        let name = c.key.name();
        if lo == up {
            writeln!(w, " FX BND {name} {lo:?}")?;
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            writeln!(w, " FR BND {name}")?;
            continue;
        }
        if lo == f64::NEG_INFINITY {
            writeln!(w, " MI BND {name}")?;
        } else if lo != 0.0 || lo.is_sign_negative() {
            writeln!(w, " LO BND {name} {lo:?}")?;
        }
        if up != f64::INFINITY {
            writeln!(w, " UP BND {name} {up:?}")?;
        }
    }
    writeln!(w, "ENDATA")?;
    w.flush()?;
    Ok(())
}

/// Exports an in-memory model as MPS text.
pub fn export_mps(model: &LPModel) -> Result<String, MpsError> {
    let mut buf = Vec::new();
    write_mps(&LpSource::new(model), &mut buf)?;
    Ok(String::from_utf8(buf).expect("MPS output is ASCII"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

fn number(line: usize, text: &str) -> Result<f64, MpsError> {
    text.parse::<f64>()
        .map_err(|_| parse_err(line, format!("bad number `{text}`")))
}

fn key_err(line: usize) -> impl Fn(KeyError) -> MpsError {
    move |e| parse_err(line, e.to_string())
}

/// Parses MPS text written by [`write_mps`] (or any free-format MPS whose
/// names follow the model's naming scheme) back into a model.
pub fn import_mps(text: &str) -> Result<LPModel, MpsError> {
    let mut section = Section::Start;
    let mut model = LPModel::default();
    let mut objective: Option<String> = None;
    let mut row_pos: HashMap<String, usize> = HashMap::new();
    let mut col_pos: HashMap<String, usize> = HashMap::new();
    let mut current: Option<(String, usize)> = None;
    let mut named = false;
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(char::is_whitespace) {
            let next = match fields[0] {
                "NAME" => {
                    if section != Section::Start {
                        return Err(parse_err(ln, "NAME must come first"));
                    }
                    model.name = fields.get(1).copied().unwrap_or("").to_string();
                    named = true;
                    continue;
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(parse_err(ln, format!("unknown section `{other}`"))),
            };
            if next as u8 <= section as u8 {
                return Err(parse_err(ln, format!("section {} out of order", fields[0])));
            }
            section = next;
            continue;
        }
        match section {
            Section::Rows => {
                let [marker, name] = fields[..] else {
                    return Err(parse_err(ln, "ROWS entry needs a type and a name"));
                };
                let sense = match marker {
                    "N" => {
                        if objective.is_some() {
                            return Err(parse_err(ln, "more than one objective row"));
                        }
                        objective = Some(name.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(parse_err(ln, format!("unknown row type `{other}`"))),
                };
                if row_pos.contains_key(name) || objective.as_deref() == Some(name) {
                    return Err(MpsError::DuplicateName(name.to_string()));
                }
                let key = RowKey::parse(name).map_err(key_err(ln))?;
                row_pos.insert(name.to_string(), model.rows.len());
                model.rows.push(Row {
                    key,
                    sense,
                    rhs: 0.0,
                    coeffs: Vec::new(),
                });
            }
            Section::Columns => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(ln, "COLUMNS entry needs a column and one or two row/value pairs"));
                }
                let cname = fields[0];
                let j = match &current {
                    Some((c, j)) if c == cname => *j,
                    _ => {
                        if col_pos.contains_key(cname) {
                            return Err(MpsError::DuplicateName(cname.to_string()));
                        }
                        let key = ColKey::parse(cname).map_err(key_err(ln))?;
                        let j = model.add_column(Column::nonnegative(key, 0.0));
                        col_pos.insert(cname.to_string(), j);
                        current = Some((cname.to_string(), j));
                        j
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let v = number(ln, pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        model.columns[j].cost = v;
                        continue;
                    }
                    let &i = row_pos
                        .get(pair[0])
                        .ok_or_else(|| parse_err(ln, format!("unknown row `{}`", pair[0])))?;
                    let row = &mut model.rows[i];
                    if row.coeffs.last().is_some_and(|&(last, _)| last == j) {
                        return Err(parse_err(ln, format!("repeated entry for row `{}`", pair[0])));
                    }
                    row.coeffs.push((j, v));
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(ln, "RHS entry needs a set name and one or two row/value pairs"));
                }
                for pair in fields[1..].chunks(2) {
                    if objective.as_deref() == Some(pair[0]) {
                        return Err(parse_err(ln, "objective constants are not supported"));
                    }
                    let &i = row_pos
                        .get(pair[0])
                        .ok_or_else(|| parse_err(ln, format!("unknown row `{}`", pair[0])))?;
                    model.rows[i].rhs = number(ln, pair[1])?;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(parse_err(ln, "BOUNDS entry needs a type, a set name and a column"));
                }
                let &j = col_pos
                    .get(fields[2])
                    .ok_or_else(|| parse_err(ln, format!("unknown column `{}`", fields[2])))?;
                let value = || -> Result<f64, MpsError> {
                    number(ln, fields.get(3).ok_or_else(|| parse_err(ln, "bound value missing"))?)
                };
                let c = &mut model.columns[j];
                match fields[0] {
                    "UP" => c.upper = value()?,
                    "LO" => c.lower = value()?,
                    "FX" => {
                        let v = value()?;
                        c.lower = v;
                        c.upper = v;
                    }
                    "FR" => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    "MI" => c.lower = f64::NEG_INFINITY,
                    "PL" => c.upper = f64::INFINITY,
                    other => return Err(parse_err(ln, format!("unknown bound type `{other}`"))),
                }
            }
            Section::Start | Section::End => return Err(parse_err(ln, "data outside a section")),
        }
    }
    if !named {
        return Err(parse_err(0, "missing NAME"));
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), "missing ENDATA"));
    }
    Ok(model)
}
