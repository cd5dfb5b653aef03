//! Shared test helpers: random small LPs and an exhaustive vertex
//! enumeration oracle that shares no code with the simplex solver.

#![allow(dead_code)]

use isogep::model::{ColKey, Column, LPModel, RowKey, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random LP with 1..=6 boxed columns and 0..=8 rows. Coefficients are
/// multiples of 0.5 so ties and degenerate vertices occur often.
pub fn random_boxed_lp(seed: u64) -> LPModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(0..=8);
    let half = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.gen_range(lo..=hi) as f64 * 0.5;
    let mut model = LPModel::new("RANDOM");
    for j in 0..n {
        let lower = half(&mut rng, -10, 4);
        let upper = lower + half(&mut rng, 0, 20);
        let cost = half(&mut rng, -10, 10);
        model.add_column(Column {
            key: ColKey::generic(j),
            lower,
            upper,
            cost,
        });
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, half(&mut rng, -8, 8)));
            }
        }
        let sense = match rng.gen_range(0..5) {
            0 | 1 => Sense::Le,
            2 | 3 => Sense::Ge,
            _ => Sense::Eq,
        };
        let rhs = half(&mut rng, -20, 20);
        model.add_row(RowKey::generic(i), sense, rhs, coeffs);
    }
    model
}

/// Random LP with 10..40 nonnegative columns, half of them unbounded
/// above, and 5..30 rows; any status can come out.
pub fn random_wide_lp(seed: u64) -> LPModel {
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let n = rng.gen_range(10..40);
    let m = rng.gen_range(5..30);
    let mut model = LPModel::new("WIDE");
    for j in 0..n {
        let upper = if rng.gen_bool(0.5) { f64::INFINITY } else { rng.gen_range(1.0..50.0) };
        model.add_column(Column {
            key: ColKey::generic(j),
            lower: 0.0,
            upper,
            cost: rng.gen_range(-5.0..10.0),
        });
    }
    for i in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.3) {
                coeffs.push((j, rng.gen_range(-3.0..5.0)));
            }
        }
        let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
        model.add_row(RowKey::generic(i), sense, rng.gen_range(-10.0..40.0), coeffs);
    }
    model
}

/// Solves the `n x n` system by Gaussian elimination with partial pivoting;
/// `None` when (numerically) singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| a[c][k] * x[k]).sum();
        x[c] = (b[c] - s) / a[c][c];
    }
    Some(x)
}

/// Minimum objective over all vertices of a model whose columns all have
/// finite bounds, or `None` if no vertex is feasible (the polytope is empty).
pub fn vertex_enumeration_optimum(model: &LPModel, tol: f64) -> Option<f64> {
    let n = model.columns.len();
    // Candidate hyperplanes: every row as an equation, every finite bound.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for r in &model.rows {
        let mut a = vec![0.0; n];
        for &(j, v) in &r.coeffs {
            a[j] = v;
        }
        planes.push((a, r.rhs));
    }
    for (j, c) in model.columns.iter().enumerate() {
        assert!(c.lower.is_finite() && c.upper.is_finite(), "oracle needs a bounded box");
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), c.lower));
        planes.push((e, c.upper));
    }
    let feasible = |x: &[f64]| {
        model
            .columns
            .iter()
            .zip(x)
            .all(|(c, &v)| v >= c.lower - tol && v <= c.upper + tol)
            && model.rows.iter().all(|r| r.violation(r.activity(x)) <= tol)
    };
    let mut best: Option<f64> = None;
    let mut pick = vec![0usize; n];
    fn next_combination(pick: &mut [usize], total: usize) -> bool {
        let k = pick.len();
        for i in (0..k).rev() {
            if pick[i] < total - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, p) in pick.iter_mut().enumerate() {
        *p = i;
    }
    loop {
        let a: Vec<Vec<f64>> = pick.iter().map(|&p| planes[p].0.clone()).collect();
        let b: Vec<f64> = pick.iter().map(|&p| planes[p].1).collect();
        if let Some(x) = solve_dense(a, b) {
            if feasible(&x) {
                let obj = model.objective(&x);
                best = Some(best.map_or(obj, |v: f64| v.min(obj)));
            }
        }
        if !next_combination(&mut pick, planes.len()) {
            break;
        }
    }
    best
}
