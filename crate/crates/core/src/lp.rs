//! Explicit constraint-matrix models shared by the reformulation pipeline and
//! the solvers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::sparse::merge_sorted;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RowSense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl RowSense {
    pub fn symbol(self) -> &'static str {
        match self {
            RowSense::Le => "<=",
            RowSense::Eq => "=",
            RowSense::Ge => ">=",
        }
    }

    /// Relation obtained after multiplying both sides by -1.
    pub fn flipped(self) -> Self {
        match self {
            RowSense::Le => RowSense::Ge,
            RowSense::Eq => RowSense::Eq,
            RowSense::Ge => RowSense::Le,
        }
    }

    /// Signed violation of `lhs <sense> rhs`; zero or negative when satisfied.
    pub fn violation(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            RowSense::Le => lhs - rhs,
            RowSense::Ge => rhs - lhs,
            RowSense::Eq => (lhs - rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: RowSense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }
}

/// A linear program `min/max obj·x + const` over rows and column bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpModel {
    pub sense: ObjSense,
    pub obj: Vec<f64>,
    pub obj_constant: f64,
    #[serde(with = "crate::serde_inf::vec")]
    pub col_lower: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub col_upper: Vec<f64>,
    pub rows: Vec<Row>,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
}

impl LpModel {
    pub fn new(sense: ObjSense) -> Self {
        Self {
            sense,
            obj: Vec::new(),
            obj_constant: 0.0,
            col_lower: Vec::new(),
            col_upper: Vec::new(),
            rows: Vec::new(),
            var_names: Vec::new(),
            row_names: Vec::new(),
        }
    }

    pub fn num_cols(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_col(&mut self, name: impl Into<String>, obj: f64, lower: f64, upper: f64) -> usize {
        self.obj.push(obj);
        self.col_lower.push(lower);
        self.col_upper.push(upper);
        self.var_names.push(name.into());
        self.obj.len() - 1
    }

    /// Adds a row; duplicate column indices are summed and zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        mut coeffs: Vec<(usize, f64)>,
        sense: RowSense,
        rhs: f64,
    ) -> usize {
        merge_sorted(&mut coeffs);
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.num_cols()));
        self.rows.push(Row { coeffs, sense, rhs });
        self.row_names.push(name.into());
        self.rows.len() - 1
    }

    pub fn col_index(&self, name: &str) -> Option<usize> {
        self.var_names.iter().position(|n| n == name)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_constant + self.obj.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest violation of any row or column bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            worst = worst.max(r.sense.violation(r.activity(x), r.rhs));
        }
        for j in 0..self.num_cols() {
            worst = worst.max(self.col_lower[j] - x[j]).max(x[j] - self.col_upper[j]);
        }
        worst
    }

    /// Checks internal consistency: lengths agree, bounds are ordered, and the
    /// data is finite where it must be.
    pub fn check(&self) -> Result<(), String> {
        let n = self.num_cols();
        if self.col_lower.len() != n || self.col_upper.len() != n || self.var_names.len() != n {
            return Err("column arrays have inconsistent lengths".into());
        }
        if self.row_names.len() != self.rows.len() {
            return Err("row name count differs from row count".into());
        }
        for j in 0..n {
            if !self.obj[j].is_finite() {
                return Err(format!("objective coefficient of column {j} is not finite"));
            }
            if self.col_lower[j] > self.col_upper[j] || self.col_lower[j] == f64::INFINITY {
                return Err(format!("column {j} has crossed bounds"));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|(j, a)| *j >= n || !a.is_finite()) {
                return Err(format!("row {i} has non-finite or out-of-range data"));
            }
        }
        Ok(())
    }

    /// Moves rows with a single nonzero into the bounds of that column.
    ///
    /// Returns the indices (in the original numbering) of the rows removed.
    /// Empty rows are kept so their feasibility is still decided by the solver.
    pub fn singleton_rows_to_bounds(&mut self) -> Vec<usize> {
        let mut removed = Vec::new();
        let mut kept_rows = Vec::with_capacity(self.rows.len());
        let mut kept_names = Vec::with_capacity(self.rows.len());
        let rows = std::mem::take(&mut self.rows);
        let names = std::mem::take(&mut self.row_names);
        for (i, (r, name)) in rows.into_iter().zip(names).enumerate() {
            if let [(j, a)] = r.coeffs[..] {
                let bound = r.rhs / a;
                let sense = if a > 0.0 { r.sense } else { r.sense.flipped() };
                match sense {
                    RowSense::Ge => self.col_lower[j] = self.col_lower[j].max(bound),
                    RowSense::Le => self.col_upper[j] = self.col_upper[j].min(bound),
                    RowSense::Eq => {
                        self.col_lower[j] = self.col_lower[j].max(bound);
                        self.col_upper[j] = self.col_upper[j].min(bound);
                    }
                }
                removed.push(i);
            } else {
                kept_rows.push(r);
                kept_names.push(name);
            }
        }
        self.rows = kept_rows;
        self.row_names = kept_names;
        removed
    }

    /// Writes the model in CPLEX LP text format.
    pub fn to_lp_format(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ generated by wcaro");
        let _ = writeln!(
            s,
            "{}",
            match self.sense {
                ObjSense::Minimize => "Minimize",
                ObjSense::Maximize => "Maximize",
            }
        );
        let mut terms: Vec<(usize, f64)> = self
            .obj
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| (j, *c))
            .collect();
        let _ = write!(s, " obj:");
        write_terms(&mut s, &terms, &self.var_names);
        if self.obj_constant != 0.0 {
            let _ = write!(s, " {} {}", sign(self.obj_constant), fmt_num(self.obj_constant.abs()));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "Subject To");
        for (r, name) in self.rows.iter().zip(&self.row_names) {
            terms.clear();
            terms.extend(r.coeffs.iter().copied());
            let _ = write!(s, " {}:", lp_name(name));
            if terms.is_empty() {
                let _ = write!(s, " 0 {}", self.var_names.first().map_or("x", String::as_str));
            }
            write_terms(&mut s, &terms, &self.var_names);
            let _ = writeln!(s, " {} {}", r.sense.symbol(), fmt_num(r.rhs));
        }
        let _ = writeln!(s, "Bounds");
        for j in 0..self.num_cols() {
            let (lo, hi) = (self.col_lower[j], self.col_upper[j]);
            let name = lp_name(&self.var_names[j]);
            match (lo.is_finite(), hi.is_finite()) {
                (false, false) => {
                    let _ = writeln!(s, " {name} free");
                }
                (true, false) => {
                    if lo != 0.0 {
                        let _ = writeln!(s, " {name} >= {}", fmt_num(lo));
                    }
                }
                (false, true) => {
                    let _ = writeln!(s, " -inf <= {name} <= {}", fmt_num(hi));
                }
                (true, true) => {
                    let _ = writeln!(s, " {} <= {name} <= {}", fmt_num(lo), fmt_num(hi));
                }
            }
        }
        s
    }
}

fn sign(v: f64) -> char {
    if v < 0.0 {
        '-'
    } else {
        '+'
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

/// LP format forbids some characters in names; map them to underscores.
fn lp_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' })
        .collect()
}

fn write_terms(s: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for &(j, c) in terms {
        let _ = write!(s, " {} {} {}", sign(c), fmt_num(c.abs()), lp_name(&names[j]));
    }
}

/// An [`LpModel`] whose listed columns are restricted to `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MipModel {
    pub base: LpModel,
    pub binary_cols: Vec<usize>,
}

impl MipModel {
    pub fn to_lp_format(&self) -> String {
        let mut s = self.base.to_lp_format();
        if !self.binary_cols.is_empty() {
            s.push_str("Binary\n");
            for &j in &self.binary_cols {
                s.push(' ');
                s.push_str(&lp_name(&self.base.var_names[j]));
                s.push('\n');
            }
        }
        s.push_str("End\n");
        s
    }
}
