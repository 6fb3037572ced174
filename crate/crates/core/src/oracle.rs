//! Brute-force reference values for small instances.
//!
//! For a fixed binary assignment the third-level value is convex in the
//! right-hand side, so the adversary's maximum over Ω sits at a vertex. The
//! oracle therefore enumerates vertices and binary assignments explicitly and
//! solves one LP per pair.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnb::{MipSolution, MipStatus};
use crate::error::{Error, Result};
use crate::lp::{LpModel, RowSense};
use crate::model::{standardize_omega, FirstLevel, OmegaStandard, Polytope, ThirdLevel, WcaroInstance};
use crate::reformulate::{build_third_level_primal, SingleLevel};
use crate::simplex::{solve_lp, LpParams, LpStatus};
use crate::sparse::SparseMatrix;

pub use crate::toys::{t1, t2};

const INF: f64 = f64::INFINITY;

#[derive(Clone, Debug)]
pub struct OracleCaps {
    /// Largest uncertainty dimension whose vertices are enumerated.
    pub max_dim: usize,
    /// Largest number of binaries enumerated.
    pub max_bin: usize,
    /// Largest number of active-set candidates examined.
    pub max_combinations: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self {
            max_dim: 6,
            max_bin: 10,
            max_combinations: 2_000_000,
        }
    }
}

/// Which third-level LP the oracle evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThirdLevelForm {
    /// The plain LP; agrees with `Bounded` whenever the β bounds are valid.
    Plain,
    /// The LP whose dual has `β⁻ ≤ β ≤ β⁺`: coupled rows may be violated at
    /// price `β⁺` and over-satisfied at a refund of `β⁻`.
    #[default]
    Bounded,
}

pub fn enumerate_vertices(om: &OmegaStandard) -> Result<Vec<Vec<f64>>> {
    enumerate_vertices_capped(om, &OracleCaps::default())
}

/// Vertices of Ω, deduplicated within 1e−9 and sorted lexicographically.
pub fn enumerate_vertices_capped(om: &OmegaStandard, caps: &OracleCaps) -> Result<Vec<Vec<f64>>> {
    let d = om.dim();
    if d > caps.max_dim {
        return Err(Error::TooLarge(format!("uncertainty dimension {d} exceeds {}", caps.max_dim)));
    }
    // Candidate active constraints as (coefficients, rhs).
    let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
    for (r, row) in om.a_omega.compressed_rows().into_iter().enumerate() {
        let mut a = vec![0.0; d];
        for (i, v) in row {
            a[i] = v;
        }
        cons.push((a, om.b_omega[r]));
    }
    for i in 0..d {
        let mut a = vec![0.0; d];
        a[i] = 1.0;
        cons.push((a, om.h_lower[i]));
    }
    let k = cons.len();
    if binomial(k as u64, d as u64) > caps.max_combinations {
        return Err(Error::TooLarge(format!("{k} constraints in dimension {d}")));
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    if d == 0 {
        if om.contains(&[], 1e-9) {
            out.push(Vec::new());
        }
        return Ok(out);
    }
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        let a: Vec<Vec<f64>> = idx.iter().map(|&i| cons[i].0.clone()).collect();
        let b: Vec<f64> = idx.iter().map(|&i| cons[i].1).collect();
        if let Some(h) = dense_solve(a, b) {
            if om.contains(&h, 1e-9) && !out.iter().any(|v| close(v, &h)) {
                out.push(h);
            }
        }
        if !next_combination(&mut idx, k) {
            break;
        }
    }
    out.sort_by(|p, q| p.iter().zip(q).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-9 * (1.0 + p.abs().max(q.abs())))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for t in i + 1..k {
                idx[t] = idx[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-10 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Third-level LP whose dual carries the β bounds of the instance.
pub fn build_bounded_third_level(
    inst: &WcaroInstance,
    x: &[f64],
    h: &[f64],
    y_fix: Option<&[f64]>,
) -> Result<LpModel> {
    let mut m = build_third_level_primal(inst, x, h, y_fix)?;
    let t = &inst.third;
    let first_coupled = m.num_rows() - t.n_coupled();
    for j in 0..t.n_coupled() {
        let row = first_coupled + j;
        if t.beta_upper[j].is_finite() {
            let s = m.add_col(format!("short[{j}]"), t.beta_upper[j], 0.0, INF);
            m.rows[row].coeffs.push((s, 1.0));
        }
        if t.beta_lower[j] > 0.0 {
            let e = m.add_col(format!("excess[{j}]"), -t.beta_lower[j], 0.0, INF);
            m.rows[row].coeffs.push((e, -1.0));
            m.rows[row].sense = RowSense::Eq;
        }
    }
    Ok(m)
}

fn third_level_value(
    inst: &WcaroInstance,
    form: ThirdLevelForm,
    x: &[f64],
    h: &[f64],
    y_fix: &[f64],
    params: &LpParams,
) -> Result<f64> {
    let m = match form {
        ThirdLevelForm::Plain => build_third_level_primal(inst, x, h, Some(y_fix))?,
        ThirdLevelForm::Bounded => build_bounded_third_level(inst, x, h, Some(y_fix))?,
    };
    let s = solve_lp(&m, params)?;
    Ok(match s.status {
        LpStatus::Optimal => s.objective,
        LpStatus::Infeasible => INF,
        LpStatus::Unbounded => -INF,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Adversarial {
    #[serde(with = "crate::serde_inf::scalar")]
    pub value: f64,
    pub worst_h: Vec<f64>,
    pub worst_yfix: Vec<f64>,
}

pub fn adversarial_value(inst: &WcaroInstance, x: &[f64]) -> Result<Adversarial> {
    adversarial_value_with(inst, x, ThirdLevelForm::default(), &OracleCaps::default())
}

/// `min over y′ ∈ {0,1}^n_bin of max over vertices h of val(third level)`.
///
/// Assignments are visited in increasing binary order (bit `b` is binary
/// `b`), vertices in lexicographic order. On ties the first assignment and
/// the last vertex are reported.
pub fn adversarial_value_with(
    inst: &WcaroInstance,
    x: &[f64],
    form: ThirdLevelForm,
    caps: &OracleCaps,
) -> Result<Adversarial> {
    let n_bin = inst.third.n_bin;
    if n_bin > caps.max_bin {
        return Err(Error::TooLarge(format!("{n_bin} binaries exceed {}", caps.max_bin)));
    }
    let vertices = enumerate_vertices_capped(&inst.omega, caps)?;
    if vertices.is_empty() {
        return Err(Error::EmptyOmega);
    }
    let params = LpParams::default();
    let mut best: Option<Adversarial> = None;
    for mask in 0..1u64 << n_bin {
        let y_fix: Vec<f64> = (0..n_bin).map(|b| ((mask >> b) & 1) as f64).collect();
        let mut worst = (-INF, 0usize);
        for (k, v) in vertices.iter().enumerate() {
            let val = third_level_value(inst, form, x, v, &y_fix, &params)?;
            if val >= worst.0 {
                worst = (val, k);
            }
            if val == INF {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| worst.0 < b.value) {
            best = Some(Adversarial {
                value: worst.0,
                worst_h: vertices[worst.1].clone(),
                worst_yfix: y_fix,
            });
        }
    }
    Ok(best.unwrap())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertReport {
    pub mip_value: f64,
    pub x_star: Vec<f64>,
    pub first_level_cost: f64,
    /// `G(x*)` plus the adversarial value at `x*`.
    pub oracle_value_at_xstar: f64,
    pub margin: f64,
    pub exact: bool,
    /// `margin ≥ −tol`.
    pub upper_bound_holds: bool,
    pub worst_h: Vec<f64>,
    pub worst_yfix: Vec<f64>,
}

pub fn certify(inst: &WcaroInstance, sl: &SingleLevel, sol: &MipSolution, tol: f64) -> Result<CertReport> {
    certify_with(inst, sl, sol, tol, ThirdLevelForm::default(), &OracleCaps::default())
}

/// Compares a solved single-level model against the oracle at its `x*`.
pub fn certify_with(
    inst: &WcaroInstance,
    sl: &SingleLevel,
    sol: &MipSolution,
    tol: f64,
    form: ThirdLevelForm,
    caps: &OracleCaps,
) -> Result<CertReport> {
    if sol.status != MipStatus::Optimal {
        return Err(Error::Invalid(format!("cannot certify a solution with status {:?}", sol.status)));
    }
    let x_star = sl.x_of(&sol.primal);
    let g = inst.first.objective(&x_star);
    let adv = adversarial_value_with(inst, &x_star, form, caps)?;
    let margin = sol.objective - g - adv.value;
    Ok(CertReport {
        mip_value: sol.objective,
        first_level_cost: g,
        oracle_value_at_xstar: g + adv.value,
        margin,
        exact: margin.abs() <= tol,
        upper_bound_holds: margin >= -tol,
        x_star,
        worst_h: adv.worst_h,
        worst_yfix: adv.worst_yfix,
    })
}

/// Shape of randomly generated oracle-tractable instances.
#[derive(Clone, Debug)]
pub struct RandomInstanceOptions {
    pub max_x: usize,
    pub max_h: usize,
    pub max_cont: usize,
    pub max_bin: usize,
    pub max_coupled: usize,
    /// Set `β⁻ = β⁺` (at most the shortfall price) on every coupled row.
    pub degenerate_beta: bool,
}

impl Default for RandomInstanceOptions {
    fn default() -> Self {
        Self {
            max_x: 2,
            max_h: 3,
            max_cont: 3,
            max_bin: 3,
            max_coupled: 3,
            degenerate_beta: false,
        }
    }
}

/// A small random instance whose third level is feasible and bounded for
/// every `(x, h)` and, without a cardinality row, every binary assignment.
///
/// Each coupled row owns a shortfall column priced at `p_j`, so `β⁺ = p_j`
/// (possibly widened) is a valid dual bound. Continuous columns are boxed.
pub fn random_instance(seed: u64, opts: &RandomInstanceOptions) -> WcaroInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_x = rng.gen_range(0..=opts.max_x);
    let n_h = rng.gen_range(1..=opts.max_h.max(1));
    let n_z = rng.gen_range(1..=opts.max_cont.max(1));
    let n_j = rng.gen_range(1..=opts.max_coupled.max(1));
    let n_bin = rng.gen_range(0..=opts.max_bin);
    let small_int = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| f64::from(rng.gen_range(lo..=hi));

    let x_hi: Vec<f64> = (0..n_x).map(|_| small_int(&mut rng, 1, 3)).collect();
    let first = FirstLevel {
        n_x,
        feasible_set: Polytope::boxed(vec![0.0; n_x], x_hi),
        obj_linear: (0..n_x).map(|_| rng.gen_range(0.0..1.5)).collect(),
        obj_quadratic_diag: vec![0.0; n_x],
        obj_constant: 0.0,
    };

    let lo: Vec<f64> = (0..n_h).map(|_| small_int(&mut rng, -1, 1)).collect();
    let hi: Vec<f64> = lo.iter().map(|l| l + small_int(&mut rng, 1, 3)).collect();
    let mut om = Polytope::boxed(lo.clone(), hi.clone());
    if n_h > 1 && rng.gen_bool(0.6) {
        let mid: f64 = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).sum();
        let coeffs: Vec<(usize, f64)> = (0..n_h).map(|i| (i, 1.0)).collect();
        let sense = if rng.gen_bool(0.5) { RowSense::Le } else { RowSense::Ge };
        om.add_row(&coeffs, sense, mid);
    }
    let omega = standardize_omega(&om).expect("nonempty box");

    // y = (z, shortfall s, binaries μ)
    let n_cont = n_z + n_j;
    let n_y = n_cont + n_bin;
    let mut c = Vec::with_capacity(n_y);
    c.extend((0..n_z).map(|_| rng.gen_range(-1.0..2.0)));
    let price: Vec<f64> = (0..n_j).map(|_| rng.gen_range(1.0..4.0)).collect();
    c.extend(&price);
    c.extend((0..n_bin).map(|_| rng.gen_range(0.0..2.0)));

    let mut a_free = SparseMatrix::new(0, n_y);
    let mut b_free = Vec::new();
    let mut push_row = |a: &mut SparseMatrix, coeffs: &[(usize, f64)], rhs: f64| {
        let r = a.nrows;
        a.nrows += 1;
        for &(k, v) in coeffs {
            a.push(r, k, v);
        }
        b_free.push(rhs);
    };
    for k in 0..n_z {
        push_row(&mut a_free, &[(k, 1.0)], 0.0);
        push_row(&mut a_free, &[(k, -1.0)], -small_int(&mut rng, 2, 5));
    }
    for j in 0..n_j {
        push_row(&mut a_free, &[(n_z + j, 1.0)], 0.0);
    }
    if n_bin > 1 && rng.gen_bool(0.3) {
        let coeffs: Vec<(usize, f64)> = (n_cont..n_y).map(|k| (k, -1.0)).collect();
        push_row(&mut a_free, &coeffs, -1.0);
    }

    let mut b = SparseMatrix::new(n_j, n_y);
    let mut b_x = SparseMatrix::new(n_j, n_x);
    let mut b_h = SparseMatrix::new(n_j, n_h);
    let mut b0 = Vec::with_capacity(n_j);
    for j in 0..n_j {
        for k in 0..n_z {
            if rng.gen_bool(0.6) {
                b.push(j, k, small_int(&mut rng, -1, 2));
            }
        }
        b.push(j, n_z + j, 1.0);
        for k in n_cont..n_y {
            if rng.gen_bool(0.5) {
                b.push(j, k, small_int(&mut rng, 1, 2));
            }
        }
        for i in 0..n_x {
            if rng.gen_bool(0.5) {
                b_x.push(j, i, small_int(&mut rng, -2, 1));
            }
        }
        for i in 0..n_h {
            if rng.gen_bool(0.6) {
                b_h.push(j, i, small_int(&mut rng, -1, 2));
            }
        }
        b0.push(small_int(&mut rng, -1, 1));
    }
    // A pinned β above the shortfall price would make the third level
    // unbounded, so degenerate bounds are drawn below it.
    let (beta_lower, beta_upper) = if opts.degenerate_beta {
        let b: Vec<f64> = price.iter().map(|p| p * rng.gen_range(0.2..=1.0)).collect();
        (b.clone(), b)
    } else {
        let hi = price.iter().map(|p| p * (1.0 + rng.gen_range(0.0..1.0))).collect();
        (vec![0.0; n_j], hi)
    };
    WcaroInstance {
        name: format!("random-{seed}"),
        first,
        omega,
        third: ThirdLevel {
            n_cont,
            n_bin,
            c,
            a_free,
            free_senses: Vec::new(),
            b_free,
            b_coupled: b,
            b_x,
            b_h,
            b0,
            beta_lower,
            beta_upper,
        },
    }
}
