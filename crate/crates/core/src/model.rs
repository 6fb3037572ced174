//! Problem data for weakly connected trilevel robust programs
//!
//! `min_x G(x) + max_{h∈Ω} min_{y∈Y(x,h)} cᵀy` with
//! `Y(x,h) = {y : A′y ~ b′, B y ≥ B_x x + B_h h + b_0}` and the trailing
//! `n_bin` entries of `y` binary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpModel, ObjSense, RowSense};
use crate::simplex::{solve_lp, LpParams, LpStatus};
use crate::sparse::SparseMatrix;

const INF: f64 = f64::INFINITY;

/// `{z : A z ~ rhs, lower ≤ z ≤ upper}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub a_mat: SparseMatrix,
    pub senses: Vec<RowSense>,
    pub rhs: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub lower: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub upper: Vec<f64>,
}

impl Polytope {
    /// The whole space `ℝ^dim`.
    pub fn free(dim: usize) -> Self {
        Self::boxed(vec![-INF; dim], vec![INF; dim])
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self {
            a_mat: SparseMatrix::new(0, lower.len()),
            senses: Vec::new(),
            rhs: Vec::new(),
            lower,
            upper,
        }
    }

    pub fn dim(&self) -> usize {
        self.a_mat.ncols
    }

    pub fn num_rows(&self) -> usize {
        self.a_mat.nrows
    }

    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) {
        let i = self.a_mat.nrows;
        self.a_mat.nrows += 1;
        for &(j, v) in coeffs {
            self.a_mat.push(i, j, v);
        }
        self.senses.push(sense);
        self.rhs.push(rhs);
    }

    pub fn check(&self) -> std::result::Result<(), String> {
        let n = self.dim();
        if self.senses.len() != self.num_rows() || self.rhs.len() != self.num_rows() {
            return Err(format!(
                "polytope has {} rows but {} senses and {} right-hand sides",
                self.num_rows(),
                self.senses.len(),
                self.rhs.len()
            ));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(format!("polytope bounds must have length {n}"));
        }
        if let Some(i) = (0..n).find(|&i| self.lower[i] > self.upper[i]) {
            return Err(format!("coordinate {i} has lower bound above upper bound"));
        }
        if self.a_mat.entries.iter().any(|&(i, j, v)| i >= self.num_rows() || j >= n || !v.is_finite())
            || self.rhs.iter().any(|v| !v.is_finite())
        {
            return Err("polytope has out-of-range or non-finite data".into());
        }
        Ok(())
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        let rows = self.a_mat.compressed_rows();
        (0..self.dim()).all(|j| z[j] >= self.lower[j] - tol && z[j] <= self.upper[j] + tol)
            && rows.iter().enumerate().all(|(i, r)| {
                let lhs: f64 = r.iter().map(|&(j, v)| v * z[j]).sum();
                self.senses[i].violation(lhs, self.rhs[i]) <= tol
            })
    }

    /// LP over this polytope with the given objective, one column per coordinate.
    pub fn to_lp(&self, sense: ObjSense, obj: &[f64]) -> LpModel {
        let mut m = LpModel::new(sense);
        for j in 0..self.dim() {
            m.add_col(format!("z[{j}]"), obj[j], self.lower[j], self.upper[j]);
        }
        for (i, r) in self.a_mat.compressed_rows().into_iter().enumerate() {
            m.add_row(format!("row[{i}]"), r, self.senses[i], self.rhs[i]);
        }
        m
    }
}

/// `Ω = {h ≥ h_lower : A_Ω h + Σ_{i∈slack_cols} η_i e_i = b_Ω, η ≥ 0}`.
///
/// `h_lower` and `h_upper` are the exact coordinate extrema of Ω, so the
/// lower bound is a sign condition on `h` rather than an extra row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaStandard {
    pub a_omega: SparseMatrix,
    pub b_omega: Vec<f64>,
    /// Rows carrying a nonnegative slack, ascending.
    pub slack_cols: Vec<usize>,
    #[serde(with = "crate::serde_inf::vec")]
    pub h_lower: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub h_upper: Vec<f64>,
}

impl OmegaStandard {
    pub fn dim(&self) -> usize {
        self.a_omega.ncols
    }

    pub fn num_rows(&self) -> usize {
        self.a_omega.nrows
    }

    pub fn has_slack(&self, row: usize) -> bool {
        self.slack_cols.binary_search(&row).is_ok()
    }

    /// Membership test; the slack of each row is determined by `h`.
    pub fn contains(&self, h: &[f64], tol: f64) -> bool {
        let rows = self.a_omega.compressed_rows();
        (0..self.dim()).all(|j| h[j] >= self.h_lower[j] - tol)
            && rows.iter().enumerate().all(|(i, r)| {
                let slack = self.b_omega[i] - r.iter().map(|&(j, v)| v * h[j]).sum::<f64>();
                if self.has_slack(i) {
                    slack >= -tol
                } else {
                    slack.abs() <= tol
                }
            })
    }

    /// The same set in inequality form (slack rows become `≤`).
    pub fn to_polytope(&self) -> Polytope {
        let senses = (0..self.num_rows())
            .map(|i| if self.has_slack(i) { RowSense::Le } else { RowSense::Eq })
            .collect();
        Polytope {
            a_mat: self.a_omega.clone(),
            senses,
            rhs: self.b_omega.clone(),
            lower: self.h_lower.clone(),
            upper: vec![INF; self.dim()],
        }
    }
}

/// Third-level data. Coupled rows read `B y ≥ B_x x + B_h h + b_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThirdLevel {
    pub n_cont: usize,
    pub n_bin: usize,
    pub c: Vec<f64>,
    pub a_free: SparseMatrix,
    /// Relation of each free row; `≥` when omitted.
    #[serde(default)]
    pub free_senses: Vec<RowSense>,
    pub b_free: Vec<f64>,
    pub b_coupled: SparseMatrix,
    pub b_x: SparseMatrix,
    pub b_h: SparseMatrix,
    pub b0: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub beta_lower: Vec<f64>,
    #[serde(with = "crate::serde_inf::vec")]
    pub beta_upper: Vec<f64>,
}

impl ThirdLevel {
    pub fn n_y(&self) -> usize {
        self.n_cont + self.n_bin
    }

    pub fn n_coupled(&self) -> usize {
        self.b_coupled.nrows
    }

    pub fn n_free(&self) -> usize {
        self.a_free.nrows
    }

    pub fn free_sense(&self, i: usize) -> RowSense {
        self.free_senses.get(i).copied().unwrap_or(RowSense::Ge)
    }

    pub fn binary_range(&self) -> std::ops::Range<usize> {
        self.n_cont..self.n_y()
    }
}

/// First-level data: `x ∈ 𝒳` and `G(x) = const + lin·x + Σ q_i x_i²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstLevel {
    pub n_x: usize,
    pub feasible_set: Polytope,
    pub obj_linear: Vec<f64>,
    pub obj_quadratic_diag: Vec<f64>,
    #[serde(default)]
    pub obj_constant: f64,
}

impl FirstLevel {
    /// A first level with no variables and zero cost.
    pub fn empty() -> Self {
        Self {
            n_x: 0,
            feasible_set: Polytope::free(0),
            obj_linear: Vec::new(),
            obj_quadratic_diag: Vec::new(),
            obj_constant: 0.0,
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.obj_constant
            + (0..self.n_x)
                .map(|i| self.obj_linear[i] * x[i] + self.obj_quadratic_diag[i] * x[i] * x[i])
                .sum::<f64>()
    }

    pub fn is_linear(&self) -> bool {
        self.obj_quadratic_diag.iter().all(|&q| q == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WcaroInstance {
    #[serde(default)]
    pub name: String,
    #[serde(rename = "first_level")]
    pub first: FirstLevel,
    pub omega: OmegaStandard,
    #[serde(rename = "third_level")]
    pub third: ThirdLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dims {
    pub n_x: usize,
    pub n_y: usize,
    pub n_bin: usize,
    pub n_h: usize,
    pub n_coupled: usize,
    pub n_free: usize,
    pub omega_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
    pub nnz_bh: usize,
    pub dims: Dims,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &str> {
        self.issues
            .iter()
            .filter(|i| i.severity == Severity::Error)
            .map(|i| i.message.as_str())
    }
}

/// Above this many B_h nonzeros the McCormick model is flagged as large.
pub const LARGE_NNZ_BH: usize = 5000;

pub fn validate_instance(inst: &WcaroInstance) -> ValidationReport {
    let mut errs: Vec<String> = Vec::new();
    let (f, om, t) = (&inst.first, &inst.omega, &inst.third);
    let n_y = t.n_y();
    let n_j = t.n_coupled();
    let n_h = om.dim();

    let mut dim = |what: &str, found: usize, expected: usize| {
        if found != expected {
            errs.push(format!("{what}: expected {expected}, found {found}"));
        }
    };
    dim("first-level feasible set dimension", f.feasible_set.dim(), f.n_x);
    dim("first-level linear cost length", f.obj_linear.len(), f.n_x);
    dim("first-level quadratic cost length", f.obj_quadratic_diag.len(), f.n_x);
    dim("third-level cost length", t.c.len(), n_y);
    dim("A' columns", t.a_free.ncols, n_y);
    dim("b' length", t.b_free.len(), t.n_free());
    if !t.free_senses.is_empty() {
        dim("free row senses", t.free_senses.len(), t.n_free());
    }
    dim("B columns", t.b_coupled.ncols, n_y);
    dim("B_x rows", t.b_x.nrows, n_j);
    dim("B_x columns", t.b_x.ncols, f.n_x);
    dim("B_h rows", t.b_h.nrows, n_j);
    dim("B_h columns", t.b_h.ncols, n_h);
    dim("b_0 length", t.b0.len(), n_j);
    dim("beta lower length", t.beta_lower.len(), n_j);
    dim("beta upper length", t.beta_upper.len(), n_j);
    dim("b_Omega length", om.b_omega.len(), om.num_rows());
    dim("h lower length", om.h_lower.len(), n_h);
    dim("h upper length", om.h_upper.len(), n_h);

    let shapes_ok = errs.is_empty();
    if let Err(e) = f.feasible_set.check() {
        errs.push(format!("first-level feasible set: {e}"));
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    let finite_m = |m: &SparseMatrix| m.entries.iter().all(|e| e.2.is_finite());
    if !finite(&t.c) || !finite(&t.b_free) || !finite(&t.b0) || !finite(&om.b_omega) {
        errs.push("non-finite vector data".into());
    }
    if ![&t.a_free, &t.b_coupled, &t.b_x, &t.b_h, &om.a_omega].iter().all(|m| finite_m(m)) {
        errs.push("non-finite matrix entry".into());
    }
    if om.slack_cols.windows(2).any(|w| w[0] >= w[1]) || om.slack_cols.iter().any(|&i| i >= om.num_rows()) {
        errs.push("slack rows must be ascending and within range".into());
    }
    if shapes_ok {
        if (0..n_h).any(|i| !om.h_lower[i].is_finite() || !om.h_upper[i].is_finite()) {
            errs.push("Ω not compact".into());
        } else if (0..n_h).any(|i| om.h_lower[i] > om.h_upper[i]) {
            errs.push("Ω is empty (h lower bound above upper bound)".into());
        }
        let bh_rows = t.b_h.compressed_rows();
        for j in 0..n_j {
            let (lo, hi) = (t.beta_lower[j], t.beta_upper[j]);
            if lo > hi {
                errs.push(format!("β bounds crossed on coupled row {j}"));
            } else if lo < 0.0 || lo.is_nan() {
                errs.push(format!("β lower bound of coupled row {j} is negative"));
            } else if !hi.is_finite() && !bh_rows[j].is_empty() {
                errs.push(format!("β upper bound missing on coupled row {j} with uncertain right-hand side"));
            }
        }
    }
    if let Some(i) = f.obj_quadratic_diag.iter().position(|&q| q < 0.0 || q.is_nan()) {
        errs.push(format!("nonconvex quadratic cost on first-level variable {i}"));
    }
    let mut issues: Vec<Issue> = errs
        .into_iter()
        .map(|message| Issue { severity: Severity::Error, message })
        .collect();
    let nnz_bh = t.b_h.nnz();
    if nnz_bh > LARGE_NNZ_BH {
        issues.push(Issue {
            severity: Severity::Warning,
            message: format!("B_h has {nnz_bh} nonzeros; the McCormick model will be large"),
        });
    }
    ValidationReport {
        ok: issues.iter().all(|i| i.severity != Severity::Error),
        issues,
        nnz_bh,
        dims: Dims {
            n_x: f.n_x,
            n_y,
            n_bin: t.n_bin,
            n_h,
            n_coupled: n_j,
            n_free: t.n_free(),
            omega_rows: om.num_rows(),
        },
    }
}

/// Returns `Err(InvalidInstance)` listing every validation error.
pub fn ensure_valid(inst: &WcaroInstance) -> Result<ValidationReport> {
    let r = validate_instance(inst);
    if r.ok {
        Ok(r)
    } else {
        Err(Error::InvalidInstance(r.errors().collect::<Vec<_>>().join("; ")))
    }
}

/// Coordinate extrema of a polytope from `2·dim` LPs.
pub fn coordinate_bounds(p: &Polytope) -> Result<(Vec<f64>, Vec<f64>)> {
    p.check().map_err(Error::InvalidInstance)?;
    let n = p.dim();
    let (mut lo, mut hi) = (vec![0.0; n], vec![0.0; n]);
    let params = LpParams::default();
    for i in 0..n {
        let mut obj = vec![0.0; n];
        obj[i] = 1.0;
        for (sense, out) in [(ObjSense::Minimize, &mut lo), (ObjSense::Maximize, &mut hi)] {
            let s = solve_lp(&p.to_lp(sense, &obj), &params)?;
            match s.status {
                LpStatus::Optimal => out[i] = s.objective,
                LpStatus::Infeasible => return Err(Error::EmptyOmega),
                LpStatus::Unbounded => return Err(Error::UnboundedOmega(i)),
            }
        }
    }
    Ok((lo, hi))
}

/// Converts an inequality-form polytope to slack-standard form.
///
/// Finite upper bounds come first as rows `h_i + η = u_i`, followed by the
/// polytope rows: `≤` rows get a slack, `≥` rows are negated and get a slack,
/// `=` rows are kept as they are. Lower bounds are carried by `h_lower`.
pub fn standardize_omega(p: &Polytope) -> Result<OmegaStandard> {
    let (h_lower, h_upper) = coordinate_bounds(p)?;
    let n = p.dim();
    let mut a = SparseMatrix::new(0, n);
    let mut b = Vec::new();
    let mut slack = Vec::new();
    for i in 0..n {
        if p.upper[i].is_finite() {
            slack.push(a.nrows);
            a.nrows += 1;
            a.push(a.nrows - 1, i, 1.0);
            b.push(p.upper[i]);
        }
    }
    for (i, r) in p.a_mat.compressed_rows().into_iter().enumerate() {
        let k = a.nrows;
        a.nrows += 1;
        let flip = if p.senses[i] == RowSense::Ge { -1.0 } else { 1.0 };
        for (j, v) in r {
            a.push(k, j, flip * v);
        }
        b.push(flip * p.rhs[i]);
        if p.senses[i] != RowSense::Eq {
            slack.push(k);
        }
    }
    Ok(OmegaStandard {
        a_omega: a,
        b_omega: b,
        slack_cols: slack,
        h_lower,
        h_upper,
    })
}

/// Substitutes `h = h′ + h_lower` so that the returned instance has
/// `h_lower = 0`; returns the shift.
pub fn shift_h_lower_bound(inst: &WcaroInstance) -> (WcaroInstance, Vec<f64>) {
    let shift = inst.omega.h_lower.clone();
    let mut out = inst.clone();
    if shift.iter().all(|&s| s == 0.0) {
        return (out, shift);
    }
    let bh = inst.third.b_h.mul_vec(&shift);
    for (b, d) in out.third.b0.iter_mut().zip(bh) {
        *b += d;
    }
    let ah = inst.omega.a_omega.mul_vec(&shift);
    for (b, d) in out.omega.b_omega.iter_mut().zip(ah) {
        *b -= d;
    }
    for (u, s) in out.omega.h_upper.iter_mut().zip(&shift) {
        *u -= s;
    }
    out.omega.h_lower = vec![0.0; shift.len()];
    (out, shift)
}

/// Replaces every quadratic term `q x_i²` by the secant interpolation of its
/// range `[l_i, u_i]` split into `segments` equal pieces.
///
/// Each linearized coordinate gains `segments` auxiliary columns `δ_k ∈ [0, w]`
/// appended after the existing ones, a row `x_i − Σ δ_k = l_i`, and linear
/// costs equal to the secant slopes. Because the slopes increase, the
/// minimizing split fills the pieces in order and the cost equals the
/// interpolant, which lies above `q x²`.
pub fn piecewise_linearize_objective(fl: &FirstLevel, segments: usize) -> Result<FirstLevel> {
    if segments == 0 {
        return Err(Error::Invalid("piecewise linearization needs at least one segment".into()));
    }
    let mut out = fl.clone();
    let targets: Vec<usize> = (0..fl.n_x).filter(|&i| fl.obj_quadratic_diag[i] != 0.0).collect();
    for &i in &targets {
        let (l, u) = (fl.feasible_set.lower[i], fl.feasible_set.upper[i]);
        if !l.is_finite() || !u.is_finite() {
            return Err(Error::UnboundedVariable(i));
        }
        let q = fl.obj_quadratic_diag[i];
        let w = (u - l) / segments as f64;
        let first_aux = out.n_x;
        for k in 0..segments {
            out.n_x += 1;
            out.obj_linear.push(q * (2.0 * l + (2 * k + 1) as f64 * w));
            out.obj_quadratic_diag.push(0.0);
            out.feasible_set.lower.push(0.0);
            out.feasible_set.upper.push(w);
        }
        out.feasible_set.a_mat.ncols = out.n_x;
        let mut coeffs = vec![(i, 1.0)];
        coeffs.extend((first_aux..out.n_x).map(|j| (j, -1.0)));
        out.feasible_set.add_row(&coeffs, RowSense::Eq, l);
        out.obj_constant += q * l * l;
        out.obj_quadratic_diag[i] = 0.0;
    }
    Ok(out)
}

/// Applies [`piecewise_linearize_objective`] to the first level and pads
/// `B_x` with zero columns for the auxiliary variables.
pub fn linearize_instance(inst: &WcaroInstance, segments: usize) -> Result<WcaroInstance> {
    let mut out = inst.clone();
    out.first = piecewise_linearize_objective(&inst.first, segments)?;
    out.third.b_x.ncols = out.first.n_x;
    Ok(out)
}

#[cfg(test)]
mod tests;
