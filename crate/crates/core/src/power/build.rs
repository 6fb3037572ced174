//! Assembly of the smart-converter dispatch instance.

use serde::{Deserialize, Serialize};

use super::case::GridCase;
use super::timeseries::TimeSeries;
use crate::error::{Error, Result};
use crate::lp::{ObjSense, RowSense};
use crate::model::{standardize_omega, FirstLevel, OmegaStandard, Polytope, ThirdLevel, WcaroInstance};
use crate::simplex::{solve_lp, LpParams, LpStatus};
use crate::sparse::SparseMatrix;

const INF: f64 = f64::INFINITY;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyConvention {
    /// Regulation and deviation penalties are charged on magnitudes.
    #[default]
    Absolute,
    /// Penalties multiply the signed variables, so downward moves are credited.
    Signed,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerBuildParams {
    /// Guaranteed share of the aggregate renewable forecast, in `[0, 1]`.
    pub r: f64,
    /// Initial state of charge per storage; midpoints when `None`.
    #[serde(default)]
    pub soc_initial: Option<Vec<f64>>,
    /// Require the final state of charge to be at least the initial one.
    #[serde(default)]
    pub terminal_soc: bool,
    #[serde(default)]
    pub penalty_convention: PenaltyConvention,
}

impl PowerBuildParams {
    pub fn with_r(r: f64) -> Self {
        Self { r, soc_initial: None, terminal_soc: false, penalty_convention: PenaltyConvention::Absolute }
    }
}

/// Bounds on the duals of the renewable capacity rows, indexed `i·T + t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Lower and upper bound coincide everywhere, so the envelopes are exact.
    pub exact: bool,
}

/// `max(0, p_sl − f⁺) ≤ β ≤ max(r⁺, r⁻, p_sl) − min(f⁺, f⁻)` per renewable
/// and period, with the regulation prices maximized over all conventional
/// generators.
pub fn beta_bounds_power(case: &GridCase, ts: &TimeSeries) -> BetaBounds {
    let r_max = case.generators.iter().map(|g| g.r_up.max(g.r_down)).fold(-INF, f64::max);
    let n_t = ts.periods();
    let (mut lower, mut upper) = (Vec::new(), Vec::new());
    for dg in &case.renewables {
        for t in 0..n_t {
            let p = ts.p_sl[t];
            let lo = (p - dg.f_up).max(0.0);
            let hi = r_max.max(p) - dg.f_up.min(dg.f_down);
            lower.push(lo);
            upper.push(hi.max(lo));
        }
    }
    let exact = lower.iter().zip(&upper).all(|(a, b)| a == b);
    BetaBounds { lower, upper, exact }
}

/// `min((P_min + P⁺)/2 · Δ_DG^t, P⁺)` per renewable and period.
pub fn renewable_forecast(case: &GridCase, ts: &TimeSeries) -> Vec<f64> {
    let mut out = Vec::new();
    for dg in &case.renewables {
        for t in 0..ts.periods() {
            out.push((0.5 * (dg.p_min + dg.p_plus) * ts.delta_dg[t]).min(dg.p_plus));
        }
    }
    out
}

/// Ω for the renewable capacities: a box per renewable and period and one
/// aggregate row `Σ_i h_it ≥ R Σ_i forecast_it` per period.
pub fn build_omega_power(case: &GridCase, ts: &TimeSeries, r: f64) -> Result<OmegaStandard> {
    let n_t = ts.periods();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for dg in &case.renewables {
        lower.extend(std::iter::repeat(dg.p_min).take(n_t));
        upper.extend(std::iter::repeat(dg.p_plus).take(n_t));
    }
    omega_from_forecast(lower, upper, &renewable_forecast(case, ts), n_t, r)
}

/// Ω from explicit box bounds and forecasts, all indexed `i·T + t`.
pub fn omega_from_forecast(lower: Vec<f64>, upper: Vec<f64>, forecast: &[f64], periods: usize, r: f64) -> Result<OmegaStandard> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Invalid(format!("forecast error bound R = {r} is outside [0, 1]")));
    }
    let n = lower.len();
    if upper.len() != n || forecast.len() != n || (periods > 0 && n % periods != 0) {
        return Err(Error::DimensionMismatch("renewable bounds and forecast".into()));
    }
    let mut p = Polytope::boxed(lower, upper);
    if n > 0 {
        for t in 0..periods {
            let idx: Vec<usize> = (t..n).step_by(periods).collect();
            let coeffs: Vec<(usize, f64)> = idx.iter().map(|&k| (k, 1.0)).collect();
            let rhs = r * idx.iter().map(|&k| forecast[k]).sum::<f64>();
            p.add_row(&coeffs, RowSense::Ge, rhs);
        }
    }
    standardize_omega(&p)
}

/// Where each variable and row of the power instance lives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerLayout {
    pub periods: usize,
    pub n_gen: usize,
    pub n_dg: usize,
    pub n_storage: usize,
    pub n_lines: usize,
    pub n_buses: usize,
    pub p_reg: usize,
    pub p_up: usize,
    pub p_down: usize,
    pub p_dg: usize,
    pub p_dg_up: usize,
    pub p_dg_down: usize,
    pub p_sl: usize,
    pub p_ch: usize,
    pub p_dch: usize,
    pub flow: usize,
    pub theta: usize,
    pub soc: usize,
    pub mu_ch: usize,
    pub mu_dch: usize,
    /// First-level `P_G` block starts at 0; `P_fl` follows.
    pub x_fl: usize,
    /// Free-row index of the nodal balance of bus `b` at `t`, at `b·T + t`.
    pub nodal_rows: Vec<usize>,
    /// Free-row index of the flow definition of line `l` at `t`, at `l·T + t`.
    pub flow_rows: Vec<usize>,
}

impl PowerLayout {
    /// Index of entry `(i, t)` of the block starting at `offset`.
    pub fn at(&self, offset: usize, i: usize, t: usize) -> usize {
        offset + i * self.periods + t
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerInstance {
    pub instance: WcaroInstance,
    pub layout: PowerLayout,
    pub forecast: Vec<f64>,
    pub beta: BetaBounds,
}

impl PowerInstance {
    /// Largest violation of `μ_ch + μ_dch ≤ 1` and of the μ-gated power
    /// bounds, at a third-level vector `y`.
    pub fn storage_violation(&self, case: &GridCase, y: &[f64]) -> f64 {
        let l = &self.layout;
        let mut worst: f64 = 0.0;
        for (s, st) in case.storages.iter().enumerate() {
            for t in 0..l.periods {
                let (mc, md) = (y[l.at(l.mu_ch, s, t)], y[l.at(l.mu_dch, s, t)]);
                let (ch, dch) = (y[l.at(l.p_ch, s, t)], y[l.at(l.p_dch, s, t)]);
                worst = worst
                    .max(mc + md - 1.0)
                    .max(ch - mc * st.p_ch_max)
                    .max(mc * st.p_ch_min - ch)
                    .max(dch - md * st.p_dch_max)
                    .max(md * st.p_dch_min - dch);
            }
        }
        worst
    }

    /// Largest absolute residual of the nodal balance rows at `y`.
    pub fn nodal_residual(&self, y: &[f64]) -> f64 {
        let t = &self.instance.third;
        let rows = t.a_free.compressed_rows();
        self.layout
            .nodal_rows
            .iter()
            .map(|&r| (rows[r].iter().map(|&(k, v)| v * y[k]).sum::<f64>() - t.b_free[r]).abs())
            .fold(0.0, f64::max)
    }
}

struct Rows {
    m: SparseMatrix,
    senses: Vec<RowSense>,
    rhs: Vec<f64>,
}

impl Rows {
    fn new(ncols: usize) -> Self {
        Self { m: SparseMatrix::new(0, ncols), senses: Vec::new(), rhs: Vec::new() }
    }

    fn add(&mut self, coeffs: &[(usize, f64)], sense: RowSense, rhs: f64) -> usize {
        let r = self.m.nrows;
        self.m.nrows += 1;
        for &(j, v) in coeffs {
            if v != 0.0 {
                self.m.push(r, j, v);
            }
        }
        self.senses.push(sense);
        self.rhs.push(rhs);
        r
    }
}

/// The trilevel dispatch instance for a case, a day of data and `R`.
pub fn build_power_instance(case: &GridCase, ts: &TimeSeries, params: &PowerBuildParams) -> Result<PowerInstance> {
    case.check()?;
    let n_t = ts.periods();
    let (n_g, n_dg, n_s) = (case.generators.len(), case.renewables.len(), case.storages.len());
    let (n_l, n_b) = (case.lines.len(), case.buses.len());
    if params.penalty_convention == PenaltyConvention::Signed {
        if let Some(dg) = case.renewables.iter().find(|d| d.f_down > d.f_up) {
            return Err(Error::InvalidInstance(format!(
                "signed penalties with f⁻ > f⁺ on renewable {} make the recourse unbounded",
                dg.id
            )));
        }
    }
    let soc0: Vec<f64> = match &params.soc_initial {
        Some(v) if v.len() != n_s => {
            return Err(Error::DimensionMismatch(format!("{} initial charge levels for {n_s} storages", v.len())))
        }
        Some(v) => v.clone(),
        None => case.storages.iter().map(|s| 0.5 * (s.soc_min + s.soc_max)).collect(),
    };
    let omega = build_omega_power(case, ts, params.r)?;
    let forecast = renewable_forecast(case, ts);
    let beta = beta_bounds_power(case, ts);

    let mut off = 0;
    let mut block = |n: usize| {
        let o = off;
        off += n * n_t;
        o
    };
    let (p_reg, p_up, p_down) = (block(n_g), block(n_g), block(n_g));
    let (p_dg, p_dg_up, p_dg_down) = (block(n_dg), block(n_dg), block(n_dg));
    let p_sl = block(1);
    let (p_ch, p_dch) = (block(n_s), block(n_s));
    let flow = block(n_l);
    let theta = block(n_b);
    let soc = block(n_s);
    let (mu_ch, mu_dch) = (block(n_s), block(n_s));
    let n_cont = mu_ch;
    let n_y = mu_dch + n_s * n_t;
    let mut lay = PowerLayout {
        periods: n_t,
        n_gen: n_g,
        n_dg,
        n_storage: n_s,
        n_lines: n_l,
        n_buses: n_b,
        p_reg,
        p_up,
        p_down,
        p_dg,
        p_dg_up,
        p_dg_down,
        p_sl,
        p_ch,
        p_dch,
        flow,
        theta,
        soc,
        mu_ch,
        mu_dch,
        x_fl: n_g * n_t,
        nodal_rows: Vec::new(),
        flow_rows: Vec::new(),
    };
    let at = |o: usize, i: usize, t: usize| o + i * n_t + t;

    // Costs.
    let signed = params.penalty_convention == PenaltyConvention::Signed;
    let mut c = vec![0.0; n_y];
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..n_t {
            c[at(p_up, g, t)] = gen.r_up;
            c[at(p_down, g, t)] = if signed { gen.r_down } else { -gen.r_down };
        }
    }
    for (i, dg) in case.renewables.iter().enumerate() {
        for t in 0..n_t {
            c[at(p_dg_up, i, t)] = dg.f_up;
            c[at(p_dg_down, i, t)] = if signed { dg.f_down } else { -dg.f_down };
        }
    }
    for t in 0..n_t {
        c[at(p_sl, 0, t)] = ts.p_sl[t];
    }

    use RowSense::{Eq, Ge, Le};
    let mut a = Rows::new(n_y);
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..n_t {
            let (r, u, d) = (at(p_reg, g, t), at(p_up, g, t), at(p_down, g, t));
            a.add(&[(r, 1.0)], Ge, gen.p_min);
            a.add(&[(r, 1.0)], Le, gen.p_max);
            a.add(&[(u, 1.0)], Ge, 0.0);
            a.add(&[(u, 1.0)], Le, gen.reg_up_max);
            a.add(&[(d, 1.0)], Le, 0.0);
            a.add(&[(d, 1.0)], Ge, gen.reg_down_min);
        }
    }
    for (i, dg) in case.renewables.iter().enumerate() {
        for t in 0..n_t {
            let (p, u, d) = (at(p_dg, i, t), at(p_dg_up, i, t), at(p_dg_down, i, t));
            a.add(&[(p, 1.0), (u, -1.0), (d, -1.0)], Eq, forecast[i * n_t + t]);
            a.add(&[(p, 1.0)], Ge, dg.p_min);
            a.add(&[(u, 1.0)], Ge, 0.0);
            a.add(&[(d, 1.0)], Le, 0.0);
        }
    }
    let root = case.root_index();
    for (b, bus) in case.buses.iter().enumerate() {
        for t in 0..n_t {
            let mut row = Vec::new();
            for (g, gen) in case.generators.iter().enumerate() {
                if gen.bus == bus.id {
                    row.push((at(p_reg, g, t), 1.0));
                }
            }
            for (i, dg) in case.renewables.iter().enumerate() {
                if dg.bus == bus.id {
                    row.push((at(p_dg, i, t), 1.0));
                }
            }
            for (s, st) in case.storages.iter().enumerate() {
                if st.bus == bus.id {
                    row.push((at(p_dch, s, t), 1.0));
                    row.push((at(p_ch, s, t), -1.0));
                }
            }
            if b == root {
                row.push((at(p_sl, 0, t), 1.0));
            }
            for (l, line) in case.lines.iter().enumerate() {
                if line.from == bus.id {
                    row.push((at(flow, l, t), -1.0));
                } else if line.to == bus.id {
                    row.push((at(flow, l, t), 1.0));
                }
            }
            lay.nodal_rows.push(a.add(&row, Eq, bus.demand * ts.delta_d[t]));
        }
    }
    for (l, line) in case.lines.iter().enumerate() {
        let (i, j) = (case.bus_index(line.from).unwrap(), case.bus_index(line.to).unwrap());
        for t in 0..n_t {
            let p = at(flow, l, t);
            let k = 1.0 / line.x;
            lay.flow_rows.push(a.add(&[(p, 1.0), (at(theta, i, t), -k), (at(theta, j, t), k)], Eq, 0.0));
            if line.s_max.is_finite() {
                a.add(&[(p, 1.0)], Le, line.s_max);
                a.add(&[(p, 1.0)], Ge, -line.s_max);
            }
        }
    }
    for t in 0..n_t {
        a.add(&[(at(theta, root, t), 1.0)], Eq, 0.0);
    }
    for (s, st) in case.storages.iter().enumerate() {
        let k = ts.dt / st.capacity;
        for t in 0..n_t {
            let (q, ch, dch) = (at(soc, s, t), at(p_ch, s, t), at(p_dch, s, t));
            let (mc, md) = (at(mu_ch, s, t), at(mu_dch, s, t));
            a.add(&[(q, 1.0)], Ge, st.soc_min);
            a.add(&[(q, 1.0)], Le, st.soc_max);
            if t == 0 {
                a.add(&[(q, 1.0), (ch, -k), (dch, k)], Eq, soc0[s]);
            } else {
                a.add(&[(q, 1.0), (at(soc, s, t - 1), -1.0), (ch, -k), (dch, k)], Eq, 0.0);
            }
            a.add(&[(ch, 1.0)], Ge, 0.0);
            a.add(&[(dch, 1.0)], Ge, 0.0);
            a.add(&[(ch, 1.0), (mc, -st.p_ch_min)], Ge, 0.0);
            a.add(&[(ch, 1.0), (mc, -st.p_ch_max)], Le, 0.0);
            a.add(&[(dch, 1.0), (md, -st.p_dch_min)], Ge, 0.0);
            a.add(&[(dch, 1.0), (md, -st.p_dch_max)], Le, 0.0);
            a.add(&[(mc, 1.0), (md, 1.0)], Le, 1.0);
        }
        if params.terminal_soc {
            a.add(&[(at(soc, s, n_t - 1), 1.0)], Ge, soc0[s]);
        }
    }

    // Coupled rows: renewable capacities first (the only uncertain ones),
    // then the regulation identities and the intra-day clearing, which only
    // see first-level variables and appear as pairs of inequalities.
    let n_x = (n_g + 1) * n_t;
    let mut bc = Rows::new(n_y);
    let mut bx = SparseMatrix::new(0, n_x);
    let mut bh = SparseMatrix::new(0, n_dg * n_t);
    let (mut beta_lower, mut beta_upper) = (Vec::new(), Vec::new());
    for i in 0..n_dg {
        for t in 0..n_t {
            let r = bc.add(&[(at(p_dg, i, t), -1.0)], Ge, 0.0);
            bh.nrows += 1;
            bh.push(r, i * n_t + t, -1.0);
            bx.nrows += 1;
            beta_lower.push(beta.lower[i * n_t + t]);
            beta_upper.push(beta.upper[i * n_t + t]);
        }
    }
    let mut pair = |bc: &mut Rows, coeffs: &[(usize, f64)], x_col: usize| {
        for sign in [1.0, -1.0] {
            let scaled: Vec<(usize, f64)> = coeffs.iter().map(|&(j, v)| (j, sign * v)).collect();
            let r = bc.add(&scaled, Ge, 0.0);
            bx.nrows += 1;
            bx.push(r, x_col, sign);
            bh.nrows += 1;
            beta_lower.push(0.0);
            beta_upper.push(INF);
        }
    };
    for g in 0..n_g {
        for t in 0..n_t {
            let coeffs = [(at(p_reg, g, t), 1.0), (at(p_up, g, t), -1.0), (at(p_down, g, t), -1.0)];
            pair(&mut bc, &coeffs, g * n_t + t);
        }
    }
    for t in 0..n_t {
        let mut coeffs = vec![(at(p_sl, 0, t), 1.0)];
        for g in 0..n_g {
            coeffs.push((at(p_up, g, t), 1.0));
            coeffs.push((at(p_down, g, t), 1.0));
        }
        for i in 0..n_dg {
            coeffs.push((at(p_dg_up, i, t), 1.0));
            coeffs.push((at(p_dg_down, i, t), 1.0));
        }
        for s in 0..n_s {
            coeffs.push((at(p_dch, s, t), 1.0));
            coeffs.push((at(p_ch, s, t), -1.0));
        }
        pair(&mut bc, &coeffs, lay.x_fl + t);
    }
    let n_j = bc.m.nrows;

    // First level: x = (P_G, P_fl) with the day-ahead clearing rows.
    let mut fs = Polytope::boxed(vec![-INF; n_x], vec![INF; n_x]);
    let mut lin = vec![0.0; n_x];
    let mut quad = vec![0.0; n_x];
    let mut constant = 0.0;
    for (g, gen) in case.generators.iter().enumerate() {
        for t in 0..n_t {
            let k = g * n_t + t;
            fs.lower[k] = gen.p_min;
            fs.upper[k] = gen.p_max;
            quad[k] = gen.cost[0];
            lin[k] = gen.cost[1];
            constant += gen.cost[2];
        }
    }
    for t in 0..n_t {
        lin[lay.x_fl + t] = ts.p_fl[t] - ts.p_sl[t];
        let mut coeffs = vec![(lay.x_fl + t, 1.0)];
        coeffs.extend((0..n_g).map(|g| (g * n_t + t, 1.0)));
        let demand: f64 = case.buses.iter().map(|b| b.demand * ts.delta_d[t]).sum();
        let fc: f64 = (0..n_dg).map(|i| forecast[i * n_t + t]).sum();
        fs.add_row(&coeffs, Eq, demand - fc);
    }
    let zero = vec![0.0; n_x];
    if solve_lp(&fs.to_lp(ObjSense::Minimize, &zero), &LpParams::default())?.status == LpStatus::Infeasible {
        return Err(Error::InfeasibleFirstLevel);
    }

    let first = FirstLevel {
        n_x,
        feasible_set: fs,
        obj_linear: lin,
        obj_quadratic_diag: quad,
        obj_constant: constant,
    };
    let third = ThirdLevel {
        n_cont,
        n_bin: n_y - n_cont,
        c,
        a_free: a.m,
        free_senses: a.senses,
        b_free: a.rhs,
        b_coupled: bc.m,
        b_x: bx,
        b_h: bh,
        b0: vec![0.0; n_j],
        beta_lower,
        beta_upper,
    };
    let instance = WcaroInstance {
        name: format!("{}-T{}-R{}", case.name, n_t, params.r),
        first,
        omega,
        third,
    };
    Ok(PowerInstance { instance, layout: lay, forecast, beta })
}

#[cfg(test)]
mod tests;
