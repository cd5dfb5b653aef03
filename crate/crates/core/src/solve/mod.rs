//! Desk-scale LP solving with primal and dual values, feasibility checks,
//! MPS export/import and external solution files.
//!
//! Dual sign convention (minimization): the dual of a `<=` row is reported
//! as `>= 0`, the dual of a `>=` row as `>= 0`, and an equality row's dual is
//! the derivative of the optimal objective with respect to its right-hand
//! side. A nonzero dual therefore marks a binding row, and for `>=` and `=`
//! rows the dual is the marginal cost of raising the right-hand side.

mod external;
mod lu;
mod mps;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::model::{LPModel, RowKey, Sense, StructureError};

pub use external::{read_external_solution, ExternalError};
pub use mps::{export_mps, import_mps, write_mps, LpSource, ModelSource, MpsError};

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_NONZEROS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("model has {nonzeros} nonzeros, above the desk solver limit of {limit}; export for external solver")]
    TooLarge { nonzeros: usize, limit: usize },
    #[error("malformed model: {0}")]
    Structure(#[from] StructureError),
    #[error("iteration limit reached after {0} iterations")]
    IterationLimit(usize),
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Absolute tolerance on row activity and bound satisfaction.
    pub tol: f64,
    /// Size guard on constraint-matrix nonzeros.
    pub max_nonzeros: usize,
    pub max_iterations: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_nonzeros: DEFAULT_MAX_NONZEROS,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Row combination proving that no point satisfies the rows and bounds.
///
/// Every feasible point has `sum_i m_i (a_i x) = sum_i m_i r_i` with `r_i`
/// inside row `i`'s range. `margin` is the least value of the left side over
/// the column box minus the greatest value of the right side over the row
/// ranges; a positive margin is a proof of infeasibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub multipliers: Vec<f64>,
    pub margin: f64,
}

impl InfeasibilityCertificate {
    pub fn from_multipliers(model: &LPModel, multipliers: Vec<f64>) -> Self {
        let margin = certificate_margin(model, &multipliers);
        InfeasibilityCertificate { multipliers, margin }
    }

    pub fn verified(&self) -> bool {
        self.margin > 0.0
    }

    /// Rows taking part in the certificate.
    pub fn rows(&self, model: &LPModel) -> Vec<RowKey> {
        let scale = self.multipliers.iter().map(|v| v.abs()).fold(0.0, f64::max);
        self.multipliers
            .iter()
            .zip(&model.rows)
            .filter(|(v, _)| v.abs() > 1e-9 * scale)
            .map(|(_, r)| r.key)
            .collect()
    }
}

/// Multipliers below this fraction of the largest one count as zero when a
/// certificate meets an infinite bound.
const CERT_CLEAN: f64 = 1e-9;

fn certificate_margin(model: &LPModel, m: &[f64]) -> f64 {
    let mut g = vec![0.0; model.columns.len()];
    for (r, &mi) in model.rows.iter().zip(m) {
        if mi != 0.0 {
            for &(j, a) in &r.coeffs {
                g[j] += mi * a;
            }
        }
    }
    let scale = m.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut lhs_min = 0.0;
    for (c, &gj) in model.columns.iter().zip(&g) {
        if gj.abs() <= CERT_CLEAN * scale {
            continue;
        }
        let bound = if gj > 0.0 { c.lower } else { c.upper };
        lhs_min += gj * bound;
    }
    let mut rhs_max = 0.0;
    for (r, &mi) in model.rows.iter().zip(m) {
        if mi.abs() <= CERT_CLEAN * scale {
            continue;
        }
        let (lo, hi) = row_range(r.sense, r.rhs);
        rhs_max += mi * if mi > 0.0 { hi } else { lo };
    }
    let margin = lhs_min - rhs_max;
    if margin.is_nan() {
        f64::NEG_INFINITY
    } else {
        margin
    }
}

pub(crate) fn row_range(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Objective value; `+inf` when infeasible and `-inf` when unbounded.
    pub objective: f64,
    /// Value per column (empty unless optimal).
    pub primal: Vec<f64>,
    /// Dual value per row in the documented sign convention (empty unless optimal).
    pub dual: Vec<f64>,
    /// `c_j - sum_i y_i a_ij` per column (empty unless optimal).
    pub reduced_costs: Vec<f64>,
    pub certificate: Option<InfeasibilityCertificate>,
    /// Improving direction in column space when unbounded.
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Row multipliers in the raw convention `d = c - A^T y`.
    pub fn row_multipliers(&self, model: &LPModel) -> Vec<f64> {
        model
            .rows
            .iter()
            .zip(&self.dual)
            .map(|(r, &v)| if r.sense == Sense::Le { -v } else { v })
            .collect()
    }

    /// Builds an optimal solution record for `primal` and `dual` supplied
    /// from elsewhere, e.g. an external solver.
    pub fn from_values(model: &LPModel, primal: Vec<f64>, dual: Vec<f64>) -> Solution {
        let mut s = Solution {
            status: Status::Optimal,
            objective: model.objective(&primal),
            primal,
            dual,
            reduced_costs: Vec::new(),
            certificate: None,
            ray: None,
            iterations: 0,
        };
        s.reduced_costs = reduced_costs(model, &s.row_multipliers(model));
        s
    }
}

fn reduced_costs(model: &LPModel, y: &[f64]) -> Vec<f64> {
    let mut d: Vec<f64> = model.columns.iter().map(|c| c.cost).collect();
    for (r, &yi) in model.rows.iter().zip(y) {
        if yi != 0.0 {
            for &(j, a) in &r.coeffs {
                d[j] -= yi * a;
            }
        }
    }
    d
}

/// Solves `model` with default options and the given tolerance.
pub fn solve_desk(model: &LPModel, tol: f64) -> Result<Solution, SolveError> {
    solve_with(model, &SolveOptions { tol, ..SolveOptions::default() })
}

pub fn solve_with(model: &LPModel, opts: &SolveOptions) -> Result<Solution, SolveError> {
    let nnz = model.nnz();
    if nnz > opts.max_nonzeros {
        return Err(SolveError::TooLarge {
            nonzeros: nnz,
            limit: opts.max_nonzeros,
        });
    }
    model.check_structure()?;
    // Internal tolerance is tighter than the reporting tolerance so that
    // reported points clear it with room to spare.
    let inner_tol = (opts.tol * 1e-2).max(1e-11);
    match simplex::solve(model, inner_tol, opts.max_iterations)? {
        simplex::Outcome::Optimal { mut x, y, d, iterations } => {
            for (v, c) in x.iter_mut().zip(&model.columns) {
                *v = v.clamp(c.lower, c.upper);
            }
            let dual = model
                .rows
                .iter()
                .zip(&y)
                .map(|(r, &v)| if r.sense == Sense::Le { -v } else { v })
                .collect();
            let sol = Solution {
                status: Status::Optimal,
                objective: model.objective(&x),
                primal: x,
                dual,
                reduced_costs: d,
                certificate: None,
                ray: None,
                iterations,
            };
            let worst = check_feasibility(model, &sol.primal, opts.tol);
            if let Some(v) = worst.iter().max_by(|a, b| a.violation.total_cmp(&b.violation)) {
                return Err(SolveError::Numerical(format!(
                    "optimal point violates {} rows, worst {} by {:e}",
                    worst.len(),
                    v.key,
                    v.violation
                )));
            }
            Ok(sol)
        }
        simplex::Outcome::Infeasible { multipliers, iterations } => Ok(Solution {
            status: Status::Infeasible,
            objective: f64::INFINITY,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            certificate: Some(InfeasibilityCertificate::from_multipliers(model, multipliers)),
            ray: None,
            iterations,
        }),
        simplex::Outcome::Unbounded { ray, iterations } => Ok(Solution {
            status: Status::Unbounded,
            objective: f64::NEG_INFINITY,
            primal: Vec::new(),
            dual: Vec::new(),
            reduced_costs: Vec::new(),
            certificate: None,
            ray: Some(ray),
            iterations,
        }),
    }
}

/// A row missed by a candidate point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowViolation {
    pub row: usize,
    pub key: RowKey,
    pub sense: Sense,
    pub activity: f64,
    pub rhs: f64,
    /// Signed slack `rhs - activity` (`activity - rhs` for `>=` rows); negative when violated.
    pub slack: f64,
    pub violation: f64,
}

/// Every row violated by more than `tol` at `point`. Empty means the rows
/// hold; column bounds are checked separately by [`bound_violations`].
pub fn check_feasibility(model: &LPModel, point: &[f64], tol: f64) -> Vec<RowViolation> {
    assert_eq!(point.len(), model.columns.len(), "point must assign every column");
    model
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| {
            let activity = r.activity(point);
            let violation = r.violation(activity);
            (violation > tol).then_some(RowViolation {
                row: i,
                key: r.key,
                sense: r.sense,
                activity,
                rhs: r.rhs,
                slack: match r.sense {
                    Sense::Ge => activity - r.rhs,
                    _ => r.rhs - activity,
                },
                violation,
            })
        })
        .collect()
}

/// Columns whose value leaves its bounds by more than `tol`: `(position, amount)`.
pub fn bound_violations(model: &LPModel, point: &[f64], tol: f64) -> Vec<(usize, f64)> {
    model
        .columns
        .iter()
        .zip(point)
        .enumerate()
        .filter_map(|(j, (c, &v))| {
            let out = (c.lower - v).max(v - c.upper).max(0.0);
            (out > tol).then_some((j, out))
        })
        .collect()
}

/// Value of the Lagrangian dual function at the solution's row multipliers:
/// a lower bound on the optimal objective whenever the multipliers are dual
/// feasible, and `-inf` when they are not.
pub fn dual_objective(model: &LPModel, solution: &Solution) -> f64 {
    let y = solution.row_multipliers(model);
    let d = reduced_costs(model, &y);
    let cmax = model.columns.iter().map(|c| c.cost.abs()).fold(1.0, f64::max);
    let clean = 1e-9 * cmax;
    let mut total = 0.0;
    for (r, &yi) in model.rows.iter().zip(&y) {
        let (lo, hi) = row_range(r.sense, r.rhs);
        let bound = if yi > 0.0 { lo } else { hi };
        if yi == 0.0 || (!bound.is_finite() && yi.abs() <= clean) {
            continue;
        }
        total += yi * bound;
    }
    for (c, &dj) in model.columns.iter().zip(&d) {
        let bound = if dj > 0.0 { c.lower } else { c.upper };
        if dj == 0.0 || (!bound.is_finite() && dj.abs() <= clean) {
            continue;
        }
        total += dj * bound;
    }
    if total.is_nan() {
        f64::NEG_INFINITY
    } else {
        total
    }
}

/// Measured optimality conditions of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalityCheck {
    pub primal_infeasibility: f64,
    /// Largest wrong-signed dual or reduced cost.
    pub dual_infeasibility: f64,
    /// Largest `|dual| * |slack|` over rows and `|d_j| * distance to bound` over columns.
    pub complementarity: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl OptimalityCheck {
    pub fn gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
    }

    pub fn duality_holds(&self, tol: f64) -> bool {
        self.gap() <= tol * (1.0 + self.primal_objective.abs())
    }
}

pub fn check_optimality(model: &LPModel, solution: &Solution) -> OptimalityCheck {
    let x = &solution.primal;
    let y = solution.row_multipliers(model);
    let d = reduced_costs(model, &y);
    let mut primal = 0.0f64;
    let mut dual = 0.0f64;
    let mut comp = 0.0f64;
    for ((r, &yi), &reported) in model.rows.iter().zip(&y).zip(&solution.dual) {
        let act = r.activity(x);
        primal = primal.max(r.violation(act));
        if r.sense != Sense::Eq {
            dual = dual.max(-reported);
            comp = comp.max(yi.abs() * (act - r.rhs).abs());
        }
    }
    for ((c, &v), &dj) in model.columns.iter().zip(x).zip(&d) {
        primal = primal.max((c.lower - v).max(v - c.upper).max(0.0));
        // Wrong sign: positive d with no finite lower bound to rest on, etc.
        let wrong = if dj > 0.0 {
            if c.lower.is_finite() {
                0.0
            } else {
                dj
            }
        } else if c.upper.is_finite() {
            0.0
        } else {
            -dj
        };
        dual = dual.max(wrong);
        let dist = if dj > 0.0 { v - c.lower } else { c.upper - v };
        if dj != 0.0 && dist.is_finite() {
            comp = comp.max(dj.abs() * dist.abs());
        }
    }
    OptimalityCheck {
        primal_infeasibility: primal,
        dual_infeasibility: dual,
        complementarity: comp,
        primal_objective: model.objective(x),
        dual_objective: dual_objective(model, solution),
    }
}

/// Checks that `ray` is an improving recession direction of `model`.
pub fn verify_ray(model: &LPModel, ray: &[f64], tol: f64) -> bool {
    if model.objective(ray) >= -tol {
        return false;
    }
    let cols_ok = model.columns.iter().zip(ray).all(|(c, &v)| {
        (!c.lower.is_finite() || v >= -tol) && (!c.upper.is_finite() || v <= tol)
    });
    let rows_ok = model.rows.iter().all(|r| {
        let a = r.activity(ray);
        match r.sense {
            Sense::Le => a <= tol,
            Sense::Ge => a >= -tol,
            Sense::Eq => a.abs() <= tol,
        }
    });
    cols_ok && rows_ok
}
