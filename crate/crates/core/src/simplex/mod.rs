//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a logical variable `s_i = a_i·x` whose bounds encode the
//! row relation, so the working system is `[A | -I] (x, s) = 0` with bounds on
//! all `n + m` variables. Phase 1 minimizes the sum of bound violations of
//! the basic variables (the logicals act as artificials); phase 2 minimizes
//! the true objective. The basis is kept as a sparse LU factorization plus a
//! product-form eta file that is rebuilt every `refactor_every` pivots.

mod lu;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpModel, ObjSense, RowSense};
use lu::LuFactors;

#[derive(Clone, Debug)]
pub struct LpParams {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
    /// Hard cap on pivots; `None` derives one from the model size.
    pub max_iter: Option<usize>,
}

impl Default for LpParams {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            pivot_tol: 1e-9,
            bland_after: 1000,
            refactor_every: 100,
            max_iter: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value including the constant; only meaningful when optimal.
    pub objective: f64,
    pub primal: Vec<f64>,
    /// Sensitivity of the objective to each row's right-hand side.
    pub dual_rows: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarStat {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    AtZero,
}

/// A simplex basis over structural and logical variables, reusable as a warm
/// start for models with the same shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub status: Vec<VarStat>,
}

/// Solves `m` from the slack basis.
pub fn solve_lp(m: &LpModel, params: &LpParams) -> Result<LpSolution> {
    let mut s = LpSolver::new(m, params.clone())?;
    s.solve()
}

struct Eta {
    pos: usize,
    col: Vec<(usize, f64)>,
    pivot: f64,
}

/// Simplex state for one model; bounds may be changed between solves.
pub struct LpSolver {
    n: usize,
    m: usize,
    params: LpParams,
    sign: f64,
    obj_constant: f64,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    stat: Vec<VarStat>,
    basic: Vec<usize>,
    pos_of: Vec<usize>,
    x: Vec<f64>,
    lu: LuFactors,
    etas: Vec<Eta>,
    iterations: usize,
}

const NOT_BASIC: usize = usize::MAX;

impl LpSolver {
    pub fn new(model: &LpModel, params: LpParams) -> Result<Self> {
        model.check().map_err(Error::InvalidInstance)?;
        let n = model.num_cols();
        let m = model.num_rows();
        let sign = match model.sense {
            ObjSense::Minimize => 1.0,
            ObjSense::Maximize => -1.0,
        };
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, r) in model.rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                cols[j].push((i, a));
            }
        }
        let mut cost: Vec<f64> = model.obj.iter().map(|c| sign * c).collect();
        cost.resize(n + m, 0.0);
        let mut lower = model.col_lower.clone();
        let mut upper = model.col_upper.clone();
        for r in &model.rows {
            let (lo, hi) = match r.sense {
                RowSense::Ge => (r.rhs, f64::INFINITY),
                RowSense::Le => (f64::NEG_INFINITY, r.rhs),
                RowSense::Eq => (r.rhs, r.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut s = Self {
            n,
            m,
            params,
            sign,
            obj_constant: model.obj_constant,
            cols,
            cost,
            lower,
            upper,
            stat: Vec::new(),
            basic: Vec::new(),
            pos_of: Vec::new(),
            x: vec![0.0; n + m],
            lu: LuFactors::default(),
            etas: Vec::new(),
            iterations: 0,
        };
        s.slack_basis();
        Ok(s)
    }

    fn slack_basis(&mut self) {
        let (n, m) = (self.n, self.m);
        self.stat = (0..n).map(|j| self.resting_stat(j)).collect();
        self.stat.extend(std::iter::repeat(VarStat::Basic).take(m));
        self.basic = (n..n + m).collect();
        self.pos_of = vec![NOT_BASIC; n + m];
        for (p, &v) in self.basic.iter().enumerate() {
            self.pos_of[v] = p;
        }
    }

    fn resting_stat(&self, j: usize) -> VarStat {
        if self.lower[j].is_finite() {
            VarStat::AtLower
        } else if self.upper[j].is_finite() {
            VarStat::AtUpper
        } else {
            VarStat::AtZero
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.stat[j] {
            VarStat::AtLower => self.lower[j],
            VarStat::AtUpper => self.upper[j],
            VarStat::AtZero | VarStat::Basic => 0.0,
        }
    }

    pub fn num_cols(&self) -> usize {
        self.n
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Changes the bounds of structural column `j`; the basis is kept.
    pub fn set_col_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        assert!(j < self.n);
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.stat[j] != VarStat::Basic {
            let keep = match self.stat[j] {
                VarStat::AtLower => lower.is_finite(),
                VarStat::AtUpper => upper.is_finite(),
                _ => false,
            };
            if !keep {
                self.stat[j] = self.resting_stat(j);
            }
        }
    }

    pub fn basis(&self) -> Basis {
        Basis {
            status: self.stat.clone(),
        }
    }

    /// Installs a warm-start basis; falls back to the slack basis when the
    /// given one has the wrong shape.
    pub fn set_basis(&mut self, b: &Basis) {
        let basics: Vec<usize> = (0..b.status.len()).filter(|&j| b.status[j] == VarStat::Basic).collect();
        if b.status.len() != self.n + self.m || basics.len() != self.m {
            self.slack_basis();
            return;
        }
        self.stat = b.status.clone();
        for j in 0..self.n + self.m {
            let ok = match self.stat[j] {
                VarStat::AtLower => self.lower[j].is_finite(),
                VarStat::AtUpper => self.upper[j].is_finite(),
                _ => true,
            };
            if !ok {
                self.stat[j] = self.resting_stat(j);
            }
        }
        self.basic = basics;
        self.pos_of = vec![NOT_BASIC; self.n + self.m];
        for (p, &v) in self.basic.iter().enumerate() {
            self.pos_of[v] = p;
        }
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    /// Rebuilds the LU factors, repairing singular bases with logicals.
    fn refactor(&mut self) -> Result<()> {
        self.etas.clear();
        for _attempt in 0..4 {
            let columns: Vec<Vec<(usize, f64)>> = self.basic.iter().map(|&j| self.column(j)).collect();
            match LuFactors::factorize(self.m, &columns) {
                Ok(lu) => {
                    self.lu = lu;
                    return Ok(());
                }
                Err(sing) => {
                    for (&p, &r) in sing.cols.iter().zip(&sing.rows) {
                        let out = self.basic[p];
                        let inn = self.n + r;
                        if self.pos_of[inn] != NOT_BASIC {
                            continue;
                        }
                        self.pos_of[out] = NOT_BASIC;
                        self.stat[out] = self.resting_stat(out);
                        self.basic[p] = inn;
                        self.pos_of[inn] = p;
                        self.stat[inn] = VarStat::Basic;
                    }
                }
            }
        }
        Err(Error::NumericalFailure("basis stays singular after repair".into()))
    }

    fn ftran(&self, b: &mut Vec<f64>) {
        self.lu.solve(b);
        for e in &self.etas {
            let xr = b[e.pos] / e.pivot;
            if xr != 0.0 {
                for &(i, a) in &e.col {
                    b[i] -= a * xr;
                }
            }
            b[e.pos] = xr;
        }
    }

    fn btran(&self, d: &mut Vec<f64>) {
        for e in self.etas.iter().rev() {
            let mut s = d[e.pos];
            for &(i, a) in &e.col {
                s -= a * d[i];
            }
            d[e.pos] = s / e.pivot;
        }
        self.lu.solve_transpose(d);
    }

    /// Recomputes basic values from the nonbasic ones.
    fn compute_basic_values(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.stat[j] == VarStat::Basic {
                continue;
            }
            let v = self.nonbasic_value(j);
            self.x[j] = v;
            if v == 0.0 {
                continue;
            }
            if j < self.n {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * v;
                }
            } else {
                rhs[j - self.n] += v;
            }
        }
        self.ftran(&mut rhs);
        for (p, &j) in self.basic.iter().enumerate() {
            self.x[j] = rhs[p];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = self.params.feas_tol;
        if self.x[j] < self.lower[j] - tol {
            self.lower[j] - self.x[j]
        } else if self.x[j] > self.upper[j] + tol {
            self.x[j] - self.upper[j]
        } else {
            0.0
        }
    }

    fn reduced_cost(&self, j: usize, c: f64, y: &[f64]) -> f64 {
        if j < self.n {
            c - self.cols[j].iter().map(|&(i, a)| a * y[i]).sum::<f64>()
        } else {
            c + y[j - self.n]
        }
    }

    pub fn solve(&mut self) -> Result<LpSolution> {
        let max_iter = self
            .params
            .max_iter
            .unwrap_or(50 * (self.n + self.m) + 10_000);
        self.refactor()?;
        self.compute_basic_values();
        let start_iter = self.iterations;
        let mut degenerate_run = 0usize;
        let mut cleanups = 0usize;

        loop {
            if self.iterations - start_iter > max_iter {
                return Err(Error::NumericalFailure(format!(
                    "iteration limit {max_iter} reached"
                )));
            }
            if self.etas.len() >= self.params.refactor_every {
                self.refactor()?;
                self.compute_basic_values();
            }

            let phase_one = self.basic.iter().any(|&j| self.infeasibility(j) > 0.0);
            let tol = self.params.feas_tol;
            let mut cb = vec![0.0; self.m];
            for (p, &j) in self.basic.iter().enumerate() {
                cb[p] = if phase_one {
                    if self.x[j] < self.lower[j] - tol {
                        -1.0
                    } else if self.x[j] > self.upper[j] + tol {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[j]
                };
            }
            let mut y = cb;
            self.btran(&mut y);

            let bland = degenerate_run >= self.params.bland_after;
            let entering = self.price(&y, phase_one, bland);
            let Some((q, dir)) = entering else {
                // No improving column: verify on a fresh factorization.
                if cleanups < 3 && !self.etas.is_empty() {
                    cleanups += 1;
                    self.refactor()?;
                    self.compute_basic_values();
                    continue;
                }
                if phase_one {
                    return Ok(self.finish(LpStatus::Infeasible, &y));
                }
                return Ok(self.finish(LpStatus::Optimal, &y));
            };

            let mut alpha = vec![0.0; self.m];
            for (i, a) in self.column(q) {
                alpha[i] = a;
            }
            self.ftran(&mut alpha);

            match self.ratio_test(q, dir, &alpha, phase_one, bland) {
                Step::Unbounded => {
                    if phase_one || cleanups < 3 {
                        cleanups += 1;
                        self.refactor()?;
                        self.compute_basic_values();
                        if cleanups > 6 {
                            return Err(Error::NumericalFailure("unbounded phase-1 ray".into()));
                        }
                        continue;
                    }
                    return Ok(self.finish(LpStatus::Unbounded, &y));
                }
                Step::Flip(t) => {
                    self.apply_step(q, dir, t, &alpha);
                    self.stat[q] = if dir > 0.0 { VarStat::AtUpper } else { VarStat::AtLower };
                    self.x[q] = self.nonbasic_value(q);
                    degenerate_run = if t <= 1e-12 { degenerate_run + 1 } else { 0 };
                }
                Step::Pivot { pos, t, to_upper } => {
                    self.apply_step(q, dir, t, &alpha);
                    let out = self.basic[pos];
                    self.stat[out] = if to_upper { VarStat::AtUpper } else { VarStat::AtLower };
                    self.x[out] = self.nonbasic_value(out);
                    self.pos_of[out] = NOT_BASIC;
                    self.basic[pos] = q;
                    self.pos_of[q] = pos;
                    self.stat[q] = VarStat::Basic;
                    let pivot = alpha[pos];
                    let col = alpha
                        .iter()
                        .enumerate()
                        .filter(|&(i, a)| i != pos && *a != 0.0)
                        .map(|(i, a)| (i, *a))
                        .collect();
                    self.etas.push(Eta { pos, col, pivot });
                    degenerate_run = if t <= 1e-12 { degenerate_run + 1 } else { 0 };
                }
            }
            self.iterations += 1;
        }
    }

    /// Picks the entering variable and its direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64], phase_one: bool, bland: bool) -> Option<(usize, f64)> {
        let tol = self.params.opt_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.n + self.m {
            let st = self.stat[j];
            if st == VarStat::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost[j] };
            let d = self.reduced_cost(j, c, y);
            let dir = match st {
                VarStat::AtLower if d < -tol => 1.0,
                VarStat::AtUpper if d > tol => -1.0,
                VarStat::AtZero if d < -tol => 1.0,
                VarStat::AtZero if d > tol => -1.0,
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase_one: bool, bland: bool) -> Step {
        let tol = self.params.feas_tol;
        let ptol = self.params.pivot_tol;
        // Candidate blocks: (position, exact ratio, relaxed ratio, |rate|, hits upper).
        let mut cands: Vec<(usize, f64, f64, f64, bool)> = Vec::new();
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= ptol {
                continue;
            }
            let j = self.basic[p];
            let rate = -dir * a;
            let (xj, lo, hi) = (self.x[j], self.lower[j], self.upper[j]);
            let target = if rate > 0.0 {
                if phase_one && xj < lo - tol {
                    Some((lo, false))
                } else if phase_one && xj > hi + tol {
                    None
                } else if hi.is_finite() {
                    Some((hi, true))
                } else {
                    None
                }
            } else if phase_one && xj > hi + tol {
                Some((hi, true))
            } else if phase_one && xj < lo - tol {
                None
            } else if lo.is_finite() {
                Some((lo, false))
            } else {
                None
            };
            if let Some((bound, to_upper)) = target {
                let exact = ((bound - xj) / rate).max(0.0);
                let relaxed = if rate > 0.0 { (bound + tol - xj) / rate } else { (bound - tol - xj) / rate };
                cands.push((p, exact, relaxed.max(0.0), rate.abs(), to_upper));
            }
        }
        let range = self.upper[q] - self.lower[q];
        if cands.is_empty() {
            return if range.is_finite() { Step::Flip(range) } else { Step::Unbounded };
        }
        let chosen = if bland {
            let tmin = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= tmin + 1e-12)
                .min_by_key(|c| self.basic[c.0])
                .copied()
                .unwrap()
        } else {
            // Harris two-pass: largest pivot among candidates within the
            // relaxed step.
            let tmax = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            cands
                .iter()
                .filter(|c| c.1 <= tmax)
                .fold(None::<(usize, f64, f64, f64, bool)>, |acc, c| match acc {
                    Some(b) if b.3 >= c.3 => Some(b),
                    _ => Some(*c),
                })
                .unwrap()
        };
        if range.is_finite() && range <= chosen.1 {
            return Step::Flip(range);
        }
        Step::Pivot {
            pos: chosen.0,
            t: chosen.1,
            to_upper: chosen.4,
        }
    }

    fn apply_step(&mut self, q: usize, dir: f64, t: f64, alpha: &[f64]) {
        if t == 0.0 {
            return;
        }
        self.x[q] += dir * t;
        for (p, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                let j = self.basic[p];
                self.x[j] -= dir * t * a;
            }
        }
    }

    fn finish(&self, status: LpStatus, y: &[f64]) -> LpSolution {
        let primal: Vec<f64> = self.x[..self.n].to_vec();
        let mut dual_rows = vec![0.0; self.m];
        let mut reduced_costs = vec![0.0; self.n];
        let objective;
        if status == LpStatus::Optimal {
            for (i, d) in dual_rows.iter_mut().enumerate() {
                *d = self.sign * y[i];
            }
            for (j, r) in reduced_costs.iter_mut().enumerate() {
                *r = self.sign * self.reduced_cost(j, self.cost[j], y);
            }
            objective = self.obj_constant
                + self.sign
                    * (0..self.n).map(|j| self.cost[j] * self.x[j]).sum::<f64>();
        } else if status == LpStatus::Unbounded {
            objective = -self.sign * f64::INFINITY;
        } else {
            objective = self.sign * f64::INFINITY;
        }
        LpSolution {
            status,
            objective,
            primal,
            dual_rows,
            reduced_costs,
            iterations: self.iterations,
        }
    }

    pub fn factor_nnz(&self) -> usize {
        self.lu.nnz()
    }
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { pos: usize, t: f64, to_upper: bool },
}
