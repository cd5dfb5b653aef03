//! Sparse LU factorization of a simplex basis (Markowitz pivoting with a
//! threshold test) and the product-form eta file kept between refactorizations.

/// Smallest absolute value accepted as a pivot.
const ABS_PIVOT_TOL: f64 = 1e-11;
/// Relative threshold of the pivot against the largest entry of its column.
const REL_PIVOT_TOL: f64 = 0.1;

/// Rows and basis positions left without a pivot.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Singular {
    pub rows: Vec<usize>,
    pub positions: Vec<usize>,
}

/// `B` factored as a sequence of row eliminations `M_K ... M_1 B = U`, with
/// `U` triangular under the recorded row/column pivot order.
#[derive(Debug, Clone)]
pub(crate) struct LuFactors {
    m: usize,
    pivot_row: Vec<usize>,
    pivot_col: Vec<usize>,
    pivot_val: Vec<f64>,
    /// Multipliers of each step: `(row, l)`, applied as `b[row] -= l * b[pivot_row]`.
    lower: Vec<Vec<(usize, f64)>>,
    /// Off-diagonal entries of each pivot row: `(basis position, value)`.
    upper: Vec<Vec<(usize, f64)>>,
}

fn take_entry(row: &mut Vec<(usize, f64)>, col: usize) -> Option<f64> {
    let at = row.iter().position(|&(j, _)| j == col)?;
    Some(row.swap_remove(at).1)
}

fn remove_index(list: &mut Vec<usize>, value: usize) {
    if let Some(at) = list.iter().position(|&v| v == value) {
        list.swap_remove(at);
    }
}

impl LuFactors {
    /// Factors the `m x m` matrix whose column `p` holds `cols[p]` as
    /// `(row, value)` pairs.
    pub fn factorize(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<LuFactors, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut colpat: Vec<Vec<usize>> = vec![Vec::new(); m];
        for (p, col) in cols.iter().enumerate() {
            for &(i, v) in col {
                if v != 0.0 {
                    rows[i].push((p, v));
                    colpat[p].push(i);
                }
            }
        }
        let mut row_done = vec![false; m];
        let mut col_done = vec![false; m];
        // Buckets of columns by active count; entries go stale when counts
        // change and are skipped on inspection.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); m + 1];
        for p in (0..m).rev() {
            buckets[colpat[p].len().min(m)].push(p);
        }
        let mut f = LuFactors {
            m,
            pivot_row: Vec::with_capacity(m),
            pivot_col: Vec::with_capacity(m),
            pivot_val: Vec::with_capacity(m),
            lower: Vec::with_capacity(m),
            upper: Vec::with_capacity(m),
        };
        let mut slot = vec![usize::MAX; m];
        let mut dropped_cols = Vec::new();
        let mut lowest = 0;
        loop {
            // Next active column with the fewest entries.
            let mut chosen = None;
            while lowest <= m {
                match buckets[lowest].pop() {
                    Some(p) if !col_done[p] && colpat[p].len() == lowest => {
                        chosen = Some(p);
                        break;
                    }
                    Some(_) => continue,
                    None => lowest += 1,
                }
            }
            let Some(c) = chosen else { break };
            let max = colpat[c]
                .iter()
                .map(|&i| rows[i].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1.abs()))
                .fold(0.0, f64::max);
            if max < ABS_PIVOT_TOL {
                col_done[c] = true;
                for &i in &colpat[c] {
                    take_entry(&mut rows[i], c);
                }
                colpat[c].clear();
                dropped_cols.push(c);
                continue;
            }
            // Among acceptable pivots, the shortest row; then the largest
            // magnitude; then the lowest row index.
            let mut best: Option<(usize, usize, f64)> = None;
            for &i in &colpat[c] {
                let v = rows[i].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1);
                if v.abs() < REL_PIVOT_TOL * max {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bi, blen, bv)) => {
                        let len = rows[i].len();
                        len < blen || (len == blen && (v.abs() > bv.abs() || (v.abs() == bv.abs() && i < bi)))
                    }
                };
                if better {
                    best = Some((i, rows[i].len(), v));
                }
            }
            let (r, _, pv) = best.expect("column maximum passes its own threshold");

            let mut prow = std::mem::take(&mut rows[r]);
            take_entry(&mut prow, c);
            row_done[r] = true;
            col_done[c] = true;
            for &(j, _) in &prow {
                remove_index(&mut colpat[j], r);
            }
            let others: Vec<usize> = colpat[c].iter().copied().filter(|&i| i != r).collect();
            colpat[c].clear();
            let mut mults = Vec::with_capacity(others.len());
            for i in others {
                let a = take_entry(&mut rows[i], c).unwrap_or(0.0);
                let l = a / pv;
                if l == 0.0 {
                    continue;
                }
                mults.push((i, l));
                let row = &mut rows[i];
                for (at, &(j, _)) in row.iter().enumerate() {
                    slot[j] = at;
                }
                for &(j, v) in &prow {
                    if slot[j] != usize::MAX {
                        row[slot[j]].1 -= l * v;
                    } else {
                        row.push((j, -l * v));
                        colpat[j].push(i);
                    }
                }
                for &(j, _) in row.iter() {
                    slot[j] = usize::MAX;
                }
            }
            for &(j, _) in &prow {
                let n = colpat[j].len();
                buckets[n].push(j);
                lowest = lowest.min(n);
            }
            f.pivot_row.push(r);
            f.pivot_col.push(c);
            f.pivot_val.push(pv);
            f.lower.push(mults);
            f.upper.push(prow);
        }
        if f.pivot_row.len() < m {
            let rows_left: Vec<usize> = (0..m).filter(|&i| !row_done[i]).collect();
            let mut positions: Vec<usize> = (0..m).filter(|&p| !col_done[p]).collect();
            positions.extend(dropped_cols);
            positions.sort_unstable();
            return Err(Singular { rows: rows_left, positions });
        }
        Ok(f)
    }

    /// Solves `B x = b`; `b` is indexed by row, the result by basis position.
    pub fn ftran(&self, mut b: Vec<f64>) -> Vec<f64> {
        for k in 0..self.pivot_row.len() {
            let br = b[self.pivot_row[k]];
            if br != 0.0 {
                for &(i, l) in &self.lower[k] {
                    b[i] -= l * br;
                }
            }
        }
        let mut x = vec![0.0; self.m];
        for k in (0..self.pivot_row.len()).rev() {
            let mut s = b[self.pivot_row[k]];
            for &(j, v) in &self.upper[k] {
                s -= v * x[j];
            }
            x[self.pivot_col[k]] = s / self.pivot_val[k];
        }
        x
    }

    /// Solves `B^T y = c`; `c` is indexed by basis position, the result by row.
    pub fn btran(&self, mut c: Vec<f64>) -> Vec<f64> {
        let mut y = vec![0.0; self.m];
        for k in 0..self.pivot_row.len() {
            let z = c[self.pivot_col[k]] / self.pivot_val[k];
            y[self.pivot_row[k]] = z;
            if z != 0.0 {
                for &(j, v) in &self.upper[k] {
                    c[j] -= v * z;
                }
            }
        }
        for k in (0..self.pivot_row.len()).rev() {
            let mut s = 0.0;
            for &(i, l) in &self.lower[k] {
                s += l * y[i];
            }
            y[self.pivot_row[k]] -= s;
        }
        y
    }
}

/// Elementary column transformation recorded at a basis change.
#[derive(Debug, Clone)]
struct Eta {
    position: usize,
    pivot: f64,
    /// Entries of the entering column in basis coordinates, pivot excluded.
    entries: Vec<(usize, f64)>,
}

/// Current basis inverse: the last factorization followed by the eta file.
#[derive(Debug, Clone)]
pub(crate) struct BasisInverse {
    lu: LuFactors,
    etas: Vec<Eta>,
}

impl BasisInverse {
    pub fn new(lu: LuFactors) -> Self {
        BasisInverse { lu, etas: Vec::new() }
    }

    pub fn updates(&self) -> usize {
        self.etas.len()
    }

    pub fn ftran(&self, b: Vec<f64>) -> Vec<f64> {
        let mut x = self.lu.ftran(b);
        for e in &self.etas {
            let xp = x[e.position] / e.pivot;
            x[e.position] = xp;
            if xp != 0.0 {
                for &(i, a) in &e.entries {
                    x[i] -= a * xp;
                }
            }
        }
        x
    }

    pub fn btran(&self, mut c: Vec<f64>) -> Vec<f64> {
        for e in self.etas.iter().rev() {
            let mut s = c[e.position];
            for &(i, a) in &e.entries {
                s -= a * c[i];
            }
            c[e.position] = s / e.pivot;
        }
        self.lu.btran(c)
    }

    /// Records the replacement of the basic variable at `position` by a
    /// column whose transformed form is `alpha`.
    pub fn update(&mut self, position: usize, alpha: &[f64]) {
        let entries = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != position && a != 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        self.etas.push(Eta {
            position,
            pivot: alpha[position],
            entries,
        });
    }
}
