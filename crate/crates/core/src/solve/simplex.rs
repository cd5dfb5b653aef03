//! Bounded primal revised simplex, two phases.
//!
//! Every row gets a logical variable so the constraints read `A x - r = 0`
//! with box bounds on both `x` and `r`. Rows whose activity at the starting
//! point lies outside their box receive an artificial column; phase one
//! drives the artificials to zero. Pricing is Dantzig's largest reduced cost
//! with a Harris two-pass ratio test; after a run of degenerate pivots the
//! engine switches to Bland's smallest-subscript rule until the objective
//! moves again, which rules out cycling.

use super::lu::{BasisInverse, LuFactors};
use super::{row_range, SolveError};
use crate::model::LPModel;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;
const REFACTOR_EVERY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable held at zero.
    Zero,
}

pub(crate) enum Outcome {
    Optimal {
        x: Vec<f64>,
        /// Row multipliers `y` with `d = c - A^T y`.
        y: Vec<f64>,
        d: Vec<f64>,
        iterations: usize,
    },
    Infeasible {
        /// Row multipliers proving emptiness.
        multipliers: Vec<f64>,
        iterations: usize,
    },
    Unbounded {
        ray: Vec<f64>,
        iterations: usize,
    },
}

struct Engine<'a> {
    m: usize,
    n: usize,
    cols: &'a [Vec<(usize, f64)>],
    /// Artificial columns: (row, sign).
    arts: Vec<(usize, f64)>,
    lo: Vec<f64>,
    up: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    inv: Option<BasisInverse>,
    feas_tol: f64,
    dual_tol: f64,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Engine<'a> {
    fn nvar(&self) -> usize {
        self.n + self.m + self.arts.len()
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(i, v) in &self.cols[j] {
                f(i, v);
            }
        } else if j < self.n + self.m {
            f(j - self.n, -1.0);
        } else {
            let (i, s) = self.arts[j - self.n - self.m];
            f(i, s);
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        let mut s = 0.0;
        self.for_col(j, |i, v| s += v * y[i]);
        s
    }

    fn inv(&self) -> &BasisInverse {
        self.inv.as_ref().expect("basis factored before use")
    }

    /// Refactors the basis, repairing singularity with logical columns, and
    /// recomputes the basic values from the nonbasic ones.
    fn refactor(&mut self) {
        loop {
            let cols: Vec<Vec<(usize, f64)>> = self
                .basis
                .iter()
                .map(|&j| {
                    let mut c = Vec::new();
                    self.for_col(j, |i, v| c.push((i, v)));
                    c
                })
                .collect();
            match LuFactors::factorize(self.m, &cols) {
                Ok(lu) => {
                    self.inv = Some(BasisInverse::new(lu));
                    break;
                }
                Err(sing) => {
                    for (&p, &row) in sing.positions.iter().zip(&sing.rows) {
                        let out = self.basis[p];
                        self.state[out] = self.rest_state(out);
                        self.x[out] = self.rest_value(out);
                        let logical = self.n + row;
                        self.basis[p] = logical;
                        self.state[logical] = State::Basic;
                    }
                }
            }
        }
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.nvar() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_col(j, |i, v| rhs[i] -= v * xj);
            }
        }
        let xb = self.inv().ftran(rhs);
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[p];
        }
    }

    /// Nonbasic state for a variable leaving the basis outside a pivot.
    fn rest_state(&self, j: usize) -> State {
        let (lo, up, x) = (self.lo[j], self.up[j], self.x[j]);
        match (lo.is_finite(), up.is_finite()) {
            (true, true) if (x - up).abs() < (x - lo).abs() => State::Upper,
            (true, _) => State::Lower,
            (false, true) => State::Upper,
            (false, false) => State::Zero,
        }
    }

    fn rest_value(&self, j: usize) -> f64 {
        match self.rest_state(j) {
            State::Lower => self.lo[j],
            State::Upper => self.up[j],
            _ => 0.0,
        }
    }

    fn duals(&self) -> Vec<f64> {
        let cb = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.inv().btran(cb)
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        self.cost[j] - self.col_dot(j, y)
    }

    /// Runs simplex iterations on the current cost vector. Returns `None`
    /// at optimality or the entering variable and direction of an unbounded ray.
    fn run(&mut self) -> Result<Option<(usize, f64, Vec<f64>)>, SolveError> {
        let mut degenerate_run = 0usize;
        self.refactor();
        loop {
            if self.iterations >= self.max_iterations {
                return Err(SolveError::IterationLimit(self.iterations));
            }
            let bland = degenerate_run >= DEGENERATE_RUN;
            let y = self.duals();
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..self.nvar() {
                let st = self.state[j];
                if st == State::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let dir = match st {
                    State::Lower if d < -self.dual_tol => 1.0,
                    State::Upper if d > self.dual_tol => -1.0,
                    State::Zero if d.abs() > self.dual_tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, dir, d));
                    break;
                }
                if entering.is_none_or(|(_, _, bd)| d.abs() > bd.abs()) {
                    entering = Some((j, dir, d));
                }
            }
            let Some((q, dir, _)) = entering else {
                return Ok(None);
            };
            let mut aq = vec![0.0; self.m];
            self.for_col(q, |i, v| aq[i] += v);
            let alpha = self.inv().ftran(aq);

            let flip = self.up[q] - self.lo[q];
            let leave = self.ratio_test(&alpha, dir, bland);
            self.iterations += 1;
            let theta = match leave {
                Some((_, t)) if t < flip => t,
                _ if flip.is_finite() => flip,
                _ => return Ok(Some((q, dir, alpha))),
            };
            if theta < DEGENERATE_STEP {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for (p, &j) in self.basis.iter().enumerate() {
                if alpha[p] != 0.0 {
                    self.x[j] -= theta * dir * alpha[p];
                }
            }
            match leave {
                Some((p, t)) if t < flip => {
                    self.x[q] += theta * dir;
                    let out = self.basis[p];
                    let rate = -dir * alpha[p];
                    if rate < 0.0 {
                        self.state[out] = State::Lower;
                        self.x[out] = self.lo[out];
                    } else {
                        self.state[out] = State::Upper;
                        self.x[out] = self.up[out];
                    }
                    self.basis[p] = q;
                    self.state[q] = State::Basic;
                    self.inv.as_mut().unwrap().update(p, &alpha);
                    if self.inv().updates() >= REFACTOR_EVERY {
                        self.refactor();
                    }
                }
                _ => {
                    // Bound flip of the entering variable.
                    if dir > 0.0 {
                        self.x[q] = self.up[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.state[q] = State::Lower;
                    }
                }
            }
        }
    }

    /// Leaving position and step length, or `None` when no basic variable
    /// blocks the move.
    fn ratio_test(&self, alpha: &[f64], dir: f64, bland: bool) -> Option<(usize, f64)> {
        let limit = |p: usize, slack: f64| -> Option<f64> {
            let a = alpha[p];
            if a.abs() <= PIVOT_TOL {
                return None;
            }
            let j = self.basis[p];
            let rate = -dir * a;
            let room = if rate < 0.0 {
                if !self.lo[j].is_finite() {
                    return None;
                }
                self.x[j] - self.lo[j] + slack
            } else {
                if !self.up[j].is_finite() {
                    return None;
                }
                self.up[j] + slack - self.x[j]
            };
            Some(room.max(0.0) / rate.abs())
        };
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for p in 0..self.m {
                if let Some(t) = limit(p, 0.0) {
                    let better = match best {
                        None => true,
                        Some((bp, bt)) => t < bt || (t == bt && self.basis[p] < self.basis[bp]),
                    };
                    if better {
                        best = Some((p, t));
                    }
                }
            }
            return best;
        }
        // Harris: widest step allowed with bounds relaxed by the tolerance,
        // then the largest pivot among rows blocking within it.
        let theta_max = (0..self.m).filter_map(|p| limit(p, self.feas_tol)).fold(f64::INFINITY, f64::min);
        if !theta_max.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for p in 0..self.m {
            if let Some(t) = limit(p, 0.0) {
                if t <= theta_max && best.is_none_or(|(bp, _)| alpha[p].abs() > alpha[bp].abs()) {
                    best = Some((p, t));
                }
            }
        }
        best
    }
}

pub(crate) fn solve(model: &LPModel, feas_tol: f64, max_iterations: Option<usize>) -> Result<Outcome, SolveError> {
    let m = model.rows.len();
    let n = model.columns.len();
    let cols = model.column_entries();
    let mut lo: Vec<f64> = model.columns.iter().map(|c| c.lower).collect();
    let mut up: Vec<f64> = model.columns.iter().map(|c| c.upper).collect();
    for r in &model.rows {
        let (l, u) = row_range(r.sense, r.rhs);
        lo.push(l);
        up.push(u);
    }
    let max_cost = model.columns.iter().map(|c| c.cost.abs()).fold(0.0, f64::max);

    let mut x = vec![0.0; n + m];
    let mut state = vec![State::Lower; n + m];
    for j in 0..n {
        let (l, u) = (lo[j], up[j]);
        let (st, v) = if l.is_finite() {
            (State::Lower, l)
        } else if u.is_finite() {
            (State::Upper, u)
        } else {
            (State::Zero, 0.0)
        };
        state[j] = st;
        x[j] = v;
    }
    let mut activity = vec![0.0; m];
    for (j, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            activity[i] += v * x[j];
        }
    }
    let mut arts = Vec::new();
    let mut basis = Vec::with_capacity(m);
    let mut art_values = Vec::new();
    for i in 0..m {
        let (l, u) = (lo[n + i], up[n + i]);
        let a = activity[i];
        let logical = n + i;
        if a >= l && a <= u {
            basis.push(logical);
            state[logical] = State::Basic;
            x[logical] = a;
        } else {
            let (st, v) = if a < l { (State::Lower, l) } else { (State::Upper, u) };
            state[logical] = st;
            x[logical] = v;
            let sign = (v - a).signum();
            arts.push((i, sign));
            basis.push(n + m + arts.len() - 1);
            art_values.push((v - a).abs());
        }
    }
    let na = arts.len();
    lo.extend(std::iter::repeat_n(0.0, na));
    up.extend(std::iter::repeat_n(f64::INFINITY, na));
    x.extend(art_values);
    state.extend(std::iter::repeat_n(State::Basic, na));
    let mut cost = vec![0.0; n + m + na];
    for c in &mut cost[n + m..] {
        *c = 1.0;
    }
    let mut e = Engine {
        m,
        n,
        cols: &cols,
        arts,
        lo,
        up,
        cost,
        x,
        state,
        basis,
        inv: None,
        feas_tol,
        dual_tol: 1e-10 * (1.0 + max_cost),
        iterations: 0,
        max_iterations: max_iterations.unwrap_or(1000 + 100 * (m + n)),
    };

    if na > 0 {
        // Phase one cost has unit scale.
        let phase2_tol = e.dual_tol;
        e.dual_tol = 1e-11;
        let ray = e.run()?;
        debug_assert!(ray.is_none(), "phase one is bounded below");
        e.refactor();
        let infeas: f64 = (n + m..n + m + na).map(|j| e.x[j]).sum();
        if infeas > feas_tol {
            let y = e.duals();
            return Ok(Outcome::Infeasible {
                multipliers: y.iter().map(|v| -v).collect(),
                iterations: e.iterations,
            });
        }
        for j in n + m..n + m + na {
            e.up[j] = 0.0;
            e.cost[j] = 0.0;
            if e.state[j] != State::Basic {
                e.x[j] = 0.0;
                e.state[j] = State::Lower;
            }
        }
        e.dual_tol = phase2_tol;
    }
    for (j, c) in model.columns.iter().enumerate() {
        e.cost[j] = c.cost;
    }
    if let Some((q, dir, alpha)) = e.run()? {
        let mut ray = vec![0.0; n];
        if q < n {
            ray[q] = dir;
        }
        for (p, &j) in e.basis.iter().enumerate() {
            if j < n {
                ray[j] = -dir * alpha[p];
            }
        }
        return Ok(Outcome::Unbounded {
            ray,
            iterations: e.iterations,
        });
    }
    e.refactor();
    let y = e.duals();
    let mut d: Vec<f64> = (0..n).map(|j| e.reduced_cost(j, &y)).collect();
    for &j in &e.basis {
        if j < n {
            d[j] = 0.0;
        }
    }
    Ok(Outcome::Optimal {
        x: e.x[..n].to_vec(),
        y,
        d,
        iterations: e.iterations,
    })
}
