//! Automatic LP dualization.
//!
//! Column bounds are first turned into sign restrictions plus explicit rows:
//! a column with lower bound 0 is nonnegative, one with upper bound 0 (and a
//! different lower bound) is nonpositive, anything else is free, and every
//! remaining finite bound becomes a row. The dual then follows the usual
//! table:
//!
//! | primal min            | dual max              |
//! |-----------------------|-----------------------|
//! | row `≥`               | variable `≥ 0`        |
//! | row `≤`               | variable `≤ 0`        |
//! | row `=`               | variable free         |
//! | variable `≥ 0`        | row `≤ c_j`           |
//! | variable `≤ 0`        | row `≥ c_j`           |
//! | variable free         | row `= c_j`           |
//!
//! A primal max is handled by the mirrored table, so dualizing twice gives
//! back a model with the original optimal value.

use serde::{Deserialize, Serialize};

use crate::lp::{LpModel, ObjSense, RowSense};

const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Nonneg,
    Nonpos,
    Free,
}

/// Which primal bound an extra row came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSide {
    Lower,
    Upper,
}

/// Correspondence between a primal model and its dual.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DualMap {
    /// Dual column of each primal row.
    pub row_to_dual_col: Vec<usize>,
    /// Dual row of each primal column.
    pub col_to_dual_row: Vec<usize>,
    /// Dual columns attached to column bounds that became rows.
    pub bound_to_dual_col: Vec<(usize, BoundSide, usize)>,
}

impl DualMap {
    pub fn dual_col_of_row(&self, row: usize) -> usize {
        self.row_to_dual_col[row]
    }

    pub fn dual_row_of_col(&self, col: usize) -> usize {
        self.col_to_dual_row[col]
    }
}

fn column_sign(lower: f64, upper: f64) -> (Sign, Option<f64>, Option<f64>) {
    // Returns the sign restriction and the bounds that still need rows.
    let fin = |v: f64| v.is_finite().then_some(v);
    if lower == 0.0 {
        (Sign::Nonneg, None, fin(upper))
    } else if upper == 0.0 {
        (Sign::Nonpos, fin(lower), None)
    } else {
        (Sign::Free, fin(lower), fin(upper))
    }
}

/// Builds the LP dual of `m` together with the row/column correspondence.
pub fn dualize_lp(m: &LpModel) -> (LpModel, DualMap) {
    let n = m.num_cols();
    let minimize = m.sense == ObjSense::Minimize;

    // Rows of the primal in a uniform list: (coeffs, sense, rhs, name).
    let mut rows: Vec<(Vec<(usize, f64)>, RowSense, f64, String)> = m
        .rows
        .iter()
        .zip(&m.row_names)
        .map(|(r, name)| (r.coeffs.clone(), r.sense, r.rhs, name.clone()))
        .collect();
    let mut signs = Vec::with_capacity(n);
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let (sign, lo, hi) = column_sign(m.col_lower[j], m.col_upper[j]);
        signs.push(sign);
        if let Some(lo) = lo {
            bound_rows.push((j, BoundSide::Lower, rows.len()));
            rows.push((vec![(j, 1.0)], RowSense::Ge, lo, format!("{}.lb", m.var_names[j])));
        }
        if let Some(hi) = hi {
            bound_rows.push((j, BoundSide::Upper, rows.len()));
            rows.push((vec![(j, 1.0)], RowSense::Le, hi, format!("{}.ub", m.var_names[j])));
        }
    }

    let mut d = LpModel::new(if minimize { ObjSense::Maximize } else { ObjSense::Minimize });
    d.obj_constant = m.obj_constant;
    let mut row_to_dual_col = Vec::with_capacity(rows.len());
    for (_, sense, rhs, name) in &rows {
        let (lo, hi) = match (sense, minimize) {
            (RowSense::Eq, _) => (-INF, INF),
            (RowSense::Ge, true) | (RowSense::Le, false) => (0.0, INF),
            (RowSense::Le, true) | (RowSense::Ge, false) => (-INF, 0.0),
        };
        row_to_dual_col.push(d.add_col(format!("dual[{name}]"), *rhs, lo, hi));
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, (coeffs, ..)) in rows.iter().enumerate() {
        for &(j, a) in coeffs {
            by_col[j].push((row_to_dual_col[i], a));
        }
    }
    let mut col_to_dual_row = Vec::with_capacity(n);
    for j in 0..n {
        let sense = match (signs[j], minimize) {
            (Sign::Free, _) => RowSense::Eq,
            (Sign::Nonneg, true) | (Sign::Nonpos, false) => RowSense::Le,
            (Sign::Nonpos, true) | (Sign::Nonneg, false) => RowSense::Ge,
        };
        let coeffs = std::mem::take(&mut by_col[j]);
        col_to_dual_row.push(d.add_row(format!("dual[{}]", m.var_names[j]), coeffs, sense, m.obj[j]));
    }

    let bound_to_dual_col = bound_rows
        .into_iter()
        .map(|(j, side, i)| (j, side, row_to_dual_col[i]))
        .collect();
    let map = DualMap {
        row_to_dual_col: row_to_dual_col[..m.num_rows()].to_vec(),
        col_to_dual_row,
        bound_to_dual_col,
    };
    (d, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::{solve_lp, LpParams, LpStatus};

    #[test]
    fn one_constraint_lp() {
        let mut m = LpModel::new(ObjSense::Minimize);
        let y = m.add_col("y", 1.0, -INF, INF);
        m.add_row("r", vec![(y, 1.0)], RowSense::Ge, 1.0);
        let (d, map) = dualize_lp(&m);
        assert_eq!(d.sense, ObjSense::Maximize);
        let b = map.dual_col_of_row(0);
        assert_eq!((d.col_lower[b], d.col_upper[b]), (0.0, INF));
        assert_eq!(d.obj[b], 1.0);
        let r = &d.rows[map.dual_row_of_col(y)];
        assert_eq!((r.sense, r.rhs, r.coeffs.clone()), (RowSense::Eq, 1.0, vec![(b, 1.0)]));
        let p = LpParams::default();
        assert!((solve_lp(&d, &p).unwrap().objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_primal_has_unbounded_dual() {
        let mut m = LpModel::new(ObjSense::Minimize);
        let y = m.add_col("y", 0.0, -INF, INF);
        m.add_row("r", vec![(y, 0.0)], RowSense::Ge, 1.0);
        let p = LpParams::default();
        assert_eq!(solve_lp(&m, &p).unwrap().status, LpStatus::Infeasible);
        let (d, _) = dualize_lp(&m);
        assert_eq!(solve_lp(&d, &p).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn bounds_become_rows_with_mapped_duals() {
        let mut m = LpModel::new(ObjSense::Maximize);
        let x = m.add_col("x", 1.0, 1.0, 3.0);
        let z = m.add_col("z", 1.0, -INF, 0.0);
        m.add_row("r", vec![(x, 1.0), (z, 1.0)], RowSense::Le, 2.0);
        let (d, map) = dualize_lp(&m);
        assert_eq!(map.bound_to_dual_col.len(), 2);
        assert_eq!(d.rows[map.dual_row_of_col(z)].sense, RowSense::Le);
        let p = LpParams::default();
        let v = solve_lp(&m, &p).unwrap().objective;
        assert!((v - 2.0).abs() < 1e-9);
        assert!((solve_lp(&d, &p).unwrap().objective - v).abs() < 1e-9);
        let (dd, _) = dualize_lp(&d);
        assert!((solve_lp(&dd, &p).unwrap().objective - v).abs() < 1e-9);
    }

    #[test]
    fn strong_duality_on_random_lps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let p = LpParams::default();
        let mut checked = 0;
        for _ in 0..200 {
            let sense = if rng.gen_bool(0.5) { ObjSense::Minimize } else { ObjSense::Maximize };
            let mut m = LpModel::new(sense);
            let n = rng.gen_range(1..=5);
            for j in 0..n {
                let (lo, hi) = match rng.gen_range(0..4) {
                    0 => (0.0, INF),
                    1 => (-INF, INF),
                    2 => (-INF, 0.0),
                    _ => (rng.gen_range(-3..=0) as f64, rng.gen_range(1..=4) as f64),
                };
                m.add_col(format!("x{j}"), rng.gen_range(-3..=3) as f64, lo, hi);
            }
            for i in 0..rng.gen_range(1..=5) {
                let coeffs = (0..n).map(|j| (j, rng.gen_range(-2..=2) as f64)).collect();
                let s = [RowSense::Le, RowSense::Eq, RowSense::Ge][rng.gen_range(0..3)];
                m.add_row(format!("r{i}"), coeffs, s, rng.gen_range(-4..=4) as f64);
            }
            // Box everything so both sides stay bounded and feasible when the primal is.
            for j in 0..n {
                m.add_row(format!("box{j}"), vec![(j, 1.0)], RowSense::Le, 10.0);
                m.add_row(format!("neg{j}"), vec![(j, 1.0)], RowSense::Ge, -10.0);
            }
            let sp = solve_lp(&m, &p).unwrap();
            let (d, _) = dualize_lp(&m);
            let sd = solve_lp(&d, &p).unwrap();
            match sp.status {
                LpStatus::Optimal => {
                    checked += 1;
                    assert_eq!(sd.status, LpStatus::Optimal);
                    assert!((sp.objective - sd.objective).abs() < 1e-7 * (1.0 + sp.objective.abs()));
                }
                LpStatus::Infeasible => assert_eq!(sd.status, LpStatus::Unbounded),
                LpStatus::Unbounded => unreachable!("boxed primal"),
            }
        }
        assert!(checked > 50);
    }
}
