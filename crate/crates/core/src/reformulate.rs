//! From a [`WcaroInstance`] to explicit LP/MIP models.
//!
//! The adversarial second level is written as the bounded dual of the third
//! level with every bilinear term `h_i β_j` replaced by a variable `κ_ij`
//! inside a McCormick envelope. Dualizing that maximization again gives a
//! minimization in which the third-level variables `y` reappear, so the
//! first level and the integrality of `y` can be attached directly.

use serde::{Deserialize, Serialize};

use crate::dual::dualize_lp;
use crate::error::{Error, Result};
use crate::lp::{LpModel, MipModel, ObjSense, RowSense};
use crate::model::{ensure_valid, linearize_instance, shift_h_lower_bound, WcaroInstance};

const INF: f64 = f64::INFINITY;

/// Default number of secant pieces per quadratic first-level cost term.
pub const DEFAULT_PWL_SEGMENTS: usize = 16;

fn check_len(what: &str, v: &[f64], n: usize) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!("{what} has length {}, expected {n}", v.len())))
    }
}

/// The third-level LP at fixed `(x, h)`, with binaries fixed by pairs of
/// rows when `y_fix` is given and relaxed to `[0, 1]` otherwise.
pub fn build_third_level_primal(
    inst: &WcaroInstance,
    x: &[f64],
    h: &[f64],
    y_fix: Option<&[f64]>,
) -> Result<LpModel> {
    let t = &inst.third;
    check_len("x", x, inst.first.n_x)?;
    check_len("h", h, inst.omega.dim())?;
    if let Some(f) = y_fix {
        check_len("binary assignment", f, t.n_bin)?;
    }
    let mut m = LpModel::new(ObjSense::Minimize);
    for k in 0..t.n_y() {
        let (lo, hi) = if k >= t.n_cont && y_fix.is_none() { (0.0, 1.0) } else { (-INF, INF) };
        m.add_col(format!("y[{k}]"), t.c[k], lo, hi);
    }
    for (i, r) in t.a_free.compressed_rows().into_iter().enumerate() {
        m.add_row(format!("free[{i}]"), r, t.free_sense(i), t.b_free[i]);
    }
    if let Some(f) = y_fix {
        for (b, &v) in f.iter().enumerate() {
            let k = t.n_cont + b;
            m.add_row(format!("fix[{b}].lo"), vec![(k, 1.0)], RowSense::Ge, v);
            m.add_row(format!("fix[{b}].hi"), vec![(k, -1.0)], RowSense::Ge, -v);
        }
    }
    let rhs = coupled_rhs(inst, Some(x), h);
    for (j, r) in t.b_coupled.compressed_rows().into_iter().enumerate() {
        m.add_row(format!("coupled[{j}]"), r, RowSense::Ge, rhs[j]);
    }
    Ok(m)
}

/// `B_x x + B_h h + b_0`, leaving out `B_x x` when `x` is `None`.
pub fn coupled_rhs(inst: &WcaroInstance, x: Option<&[f64]>, h: &[f64]) -> Vec<f64> {
    let t = &inst.third;
    let mut r = t.b0.clone();
    for (v, d) in r.iter_mut().zip(t.b_h.mul_vec(h)) {
        *v += d;
    }
    if let Some(x) = x {
        for (v, d) in r.iter_mut().zip(t.b_x.mul_vec(x)) {
            *v += d;
        }
    }
    r
}

/// Column and row positions inside the McCormick model.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct McCormickLayout {
    pub alpha: Vec<usize>,
    pub alpha_fix: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<Option<usize>>,
    pub delta: Vec<Option<usize>>,
    pub h: Vec<usize>,
    pub eta: Vec<usize>,
    /// `(coupled row j, uncertainty index i, κ column, first ρ column)`.
    pub kappa: Vec<(usize, usize, usize, usize)>,
    /// Row of the equality `Aᵀα + Bᵀβ = c` for each `y_k`.
    pub y_rows: Vec<usize>,
    pub beta_plus_rows: Vec<Option<usize>>,
    pub beta_minus_rows: Vec<Option<usize>>,
    pub omega_rows: Vec<usize>,
    /// First of the four envelope rows, parallel to `kappa`.
    pub env_rows: Vec<usize>,
}

/// The McCormick-relaxed bounded adversarial LP (a maximization).
///
/// When `x` is `None` the `B_x x` part of the β objective is left out so it
/// can be attached symbolically later.
pub fn build_mccormick_relaxation(inst: &WcaroInstance, x: Option<&[f64]>) -> Result<LpModel> {
    let inst = prepare(inst)?;
    Ok(mccormick(&inst, x, None)?.0)
}

fn prepare(inst: &WcaroInstance) -> Result<WcaroInstance> {
    ensure_valid(inst)?;
    Ok(shift_h_lower_bound(inst).0)
}

fn mccormick(inst: &WcaroInstance, x: Option<&[f64]>, y_fix: Option<&[f64]>) -> Result<(LpModel, McCormickLayout)> {
    let t = &inst.third;
    let om = &inst.omega;
    if let Some(x) = x {
        check_len("x", x, inst.first.n_x)?;
    }
    if let Some(f) = y_fix {
        check_len("binary assignment", f, t.n_bin)?;
    }
    let bh = t.b_h.compressed_rows();
    for (j, r) in bh.iter().enumerate() {
        if !r.is_empty() && !t.beta_upper[j].is_finite() {
            return Err(Error::MissingBetaBounds(j));
        }
    }
    let n_j = t.n_coupled();
    let mut m = LpModel::new(ObjSense::Maximize);
    let mut lay = McCormickLayout::default();
    let mut y_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); t.n_y()];

    for (i, r) in t.a_free.compressed_rows().into_iter().enumerate() {
        let (lo, hi) = match t.free_sense(i) {
            RowSense::Ge => (0.0, INF),
            RowSense::Le => (-INF, 0.0),
            RowSense::Eq => (-INF, INF),
        };
        let a = m.add_col(format!("alpha[{i}]"), t.b_free[i], lo, hi);
        lay.alpha.push(a);
        for (k, v) in r {
            y_terms[k].push((a, v));
        }
    }
    if let Some(f) = y_fix {
        for (b, &v) in f.iter().enumerate() {
            let k = t.n_cont + b;
            let lo = m.add_col(format!("alpha_fix[{b}].lo"), v, 0.0, INF);
            let hi = m.add_col(format!("alpha_fix[{b}].hi"), -v, 0.0, INF);
            y_terms[k].push((lo, 1.0));
            y_terms[k].push((hi, -1.0));
            lay.alpha_fix.extend([lo, hi]);
        }
    }

    let bx = x.map(|x| t.b_x.mul_vec(x)).unwrap_or_else(|| vec![0.0; n_j]);
    for j in 0..n_j {
        lay.beta.push(m.add_col(format!("beta[{j}]"), bx[j] + t.b0[j], 0.0, INF));
    }
    for (j, r) in t.b_coupled.compressed_rows().into_iter().enumerate() {
        for (k, v) in r {
            y_terms[k].push((lay.beta[j], v));
        }
    }
    for j in 0..n_j {
        let g = t.beta_upper[j]
            .is_finite()
            .then(|| m.add_col(format!("gamma[{j}]"), 0.0, 0.0, INF));
        let d = (t.beta_lower[j] > 0.0 || !bh[j].is_empty())
            .then(|| m.add_col(format!("delta[{j}]"), 0.0, 0.0, INF));
        lay.gamma.push(g);
        lay.delta.push(d);
    }
    for i in 0..om.dim() {
        lay.h.push(m.add_col(format!("h[{i}]"), 0.0, 0.0, INF));
    }
    for &r in &om.slack_cols {
        lay.eta.push(m.add_col(format!("eta[{r}]"), 0.0, 0.0, INF));
    }
    for (j, r) in bh.iter().enumerate() {
        for &(i, v) in r {
            let kap = m.add_col(format!("kappa[{j},{i}]"), v, 0.0, INF);
            let rho = m.add_col(format!("rho1[{j},{i}]"), 0.0, 0.0, INF);
            for e in 2..=4 {
                m.add_col(format!("rho{e}[{j},{i}]"), 0.0, 0.0, INF);
            }
            lay.kappa.push((j, i, kap, rho));
        }
    }

    for (k, terms) in y_terms.into_iter().enumerate() {
        lay.y_rows.push(m.add_row(format!("y[{k}]"), terms, RowSense::Eq, t.c[k]));
    }
    for j in 0..n_j {
        let b = lay.beta[j];
        lay.beta_plus_rows.push(
            lay.gamma[j].map(|g| m.add_row(format!("beta_plus[{j}]"), vec![(b, 1.0), (g, 1.0)], RowSense::Eq, t.beta_upper[j])),
        );
        lay.beta_minus_rows.push(
            lay.delta[j].map(|d| m.add_row(format!("beta_minus[{j}]"), vec![(b, 1.0), (d, -1.0)], RowSense::Eq, t.beta_lower[j])),
        );
    }
    let mut eta_iter = lay.eta.iter();
    for (r, row) in om.a_omega.compressed_rows().into_iter().enumerate() {
        let mut coeffs: Vec<(usize, f64)> = row.into_iter().map(|(i, v)| (lay.h[i], v)).collect();
        if om.has_slack(r) {
            coeffs.push((*eta_iter.next().unwrap(), 1.0));
        }
        lay.omega_rows.push(m.add_row(format!("omega[{r}]"), coeffs, RowSense::Eq, om.b_omega[r]));
    }
    for &(j, i, kap, rho) in &lay.kappa {
        let (hl, hu) = (om.h_lower[i], om.h_upper[i]);
        let (bl, bu) = (t.beta_lower[j], t.beta_upper[j]);
        let (b, h) = (lay.beta[j], lay.h[i]);
        // κ against the two under- and two over-estimators of h·β.
        let rows = [
            (hl, bl, -1.0, -hl * bl),
            (hu, bu, -1.0, -hu * bu),
            (hu, bl, 1.0, -hu * bl),
            (hl, bu, 1.0, -hl * bu),
        ];
        for (e, &(hb, bh_, rho_sign, rhs)) in rows.iter().enumerate() {
            let r = m.add_row(
                format!("env{}[{j},{i}]", e + 1),
                vec![(kap, 1.0), (b, -hb), (h, -bh_), (rho + e, rho_sign)],
                RowSense::Eq,
                rhs,
            );
            if e == 0 {
                lay.env_rows.push(r);
            }
        }
    }
    Ok((m, lay))
}

#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub pwl_segments: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            pwl_segments: DEFAULT_PWL_SEGMENTS,
        }
    }
}

/// A single-level model together with where the original variables ended up.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingleLevel {
    pub mip: MipModel,
    /// Columns of the first-level variables `x` (original ones first, then
    /// any auxiliary linearization columns).
    pub x_cols: Vec<usize>,
    /// Number of first-level variables in the input instance.
    pub n_x: usize,
    pub y_cols: Vec<usize>,
}

impl SingleLevel {
    /// Original first-level variables read from a solution vector.
    pub fn x_of(&self, primal: &[f64]) -> Vec<f64> {
        self.x_cols[..self.n_x].iter().map(|&j| primal[j]).collect()
    }

    pub fn y_of(&self, primal: &[f64]) -> Vec<f64> {
        self.y_cols.iter().map(|&j| primal[j]).collect()
    }
}

pub fn build_single_level(inst: &WcaroInstance, y_fix: Option<&[f64]>) -> Result<SingleLevel> {
    build_single_level_with(inst, y_fix, &BuildOptions::default())
}

/// Builds the single-level model: an LP with the given binaries fixed, or a
/// MIP over all binary assignments when `y_fix` is `None`.
pub fn build_single_level_with(
    inst: &WcaroInstance,
    y_fix: Option<&[f64]>,
    opts: &BuildOptions,
) -> Result<SingleLevel> {
    let n_x = inst.first.n_x;
    let mut inst = prepare(inst)?;
    if !inst.first.is_linear() {
        inst = linearize_instance(&inst, opts.pwl_segments)?;
    }
    let (mc, lay) = mccormick(&inst, None, y_fix)?;
    let (mut d, map) = dualize_lp(&mc);
    let t = &inst.third;

    let rename = |d: &mut LpModel, row: usize, name: String| d.var_names[map.dual_col_of_row(row)] = name;
    for (k, &r) in lay.y_rows.iter().enumerate() {
        rename(&mut d, r, format!("y[{k}]"));
    }
    for j in 0..t.n_coupled() {
        if let Some(r) = lay.beta_plus_rows[j] {
            rename(&mut d, r, format!("u_beta_plus[{j}]"));
        }
        if let Some(r) = lay.beta_minus_rows[j] {
            rename(&mut d, r, format!("u_beta_minus[{j}]"));
        }
    }
    for (r, &row) in lay.omega_rows.iter().enumerate() {
        rename(&mut d, row, format!("u_omega[{r}]"));
    }
    for (&(j, i, _, _), &row) in lay.kappa.iter().zip(&lay.env_rows) {
        for e in 0..4 {
            rename(&mut d, row + e, format!("u_env{}[{j},{i}]", e + 1));
        }
    }

    // First-level columns, their rows, and B_x x moved into the β rows.
    let fl = &inst.first;
    let x_cols: Vec<usize> = (0..fl.n_x)
        .map(|i| d.add_col(format!("x[{i}]"), fl.obj_linear[i], fl.feasible_set.lower[i], fl.feasible_set.upper[i]))
        .collect();
    d.obj_constant += fl.obj_constant;
    for (r, row) in fl.feasible_set.a_mat.compressed_rows().into_iter().enumerate() {
        let coeffs = row.into_iter().map(|(i, v)| (x_cols[i], v)).collect();
        d.add_row(format!("first[{r}]"), coeffs, fl.feasible_set.senses[r], fl.feasible_set.rhs[r]);
    }
    for (j, row) in t.b_x.compressed_rows().into_iter().enumerate() {
        let dr = map.dual_row_of_col(lay.beta[j]);
        let coeffs = &mut d.rows[dr].coeffs;
        coeffs.extend(row.into_iter().map(|(i, v)| (x_cols[i], -v)));
        crate::sparse::merge_sorted(coeffs);
    }

    let y_cols: Vec<usize> = lay.y_rows.iter().map(|&r| map.dual_col_of_row(r)).collect();
    let mut binary_cols = Vec::new();
    if y_fix.is_none() {
        for k in t.binary_range() {
            let c = y_cols[k];
            d.col_lower[c] = 0.0;
            d.col_upper[c] = 1.0;
            binary_cols.push(c);
        }
    }
    d.singleton_rows_to_bounds();
    Ok(SingleLevel {
        mip: MipModel { base: d, binary_cols },
        x_cols,
        n_x,
        y_cols,
    })
}
