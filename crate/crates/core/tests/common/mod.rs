//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcaro::bnb::{solve_mip, MipParams, MipSolution, MipStatus};
use wcaro::dual::dualize_lp;
use wcaro::lp::ObjSense;
use wcaro::oracle::build_bounded_third_level;
use wcaro::power::{
    build_power_instance, case5, synthetic_day, GridCase, PowerBuildParams, PowerInstance, TimeSeries,
};
use wcaro::reformulate::{build_single_level, build_third_level_primal, SingleLevel};
use wcaro::simplex::{solve_lp, LpParams, LpStatus};

pub fn exact_params() -> MipParams {
    MipParams { gap_tol: 1e-9, ..Default::default() }
}

pub fn solve_power(case: &GridCase, ts: &TimeSeries, params: &PowerBuildParams) -> (PowerInstance, SingleLevel, MipSolution) {
    let p = build_power_instance(case, ts, params).unwrap();
    let sl = build_single_level(&p.instance, None).unwrap();
    let sol = solve_mip(&sl.mip, &MipParams::default()).unwrap();
    assert_eq!(sol.status, MipStatus::Optimal, "{}", p.instance.name);
    (p, sl, sol)
}

/// Solves the dual of `m` and returns its optimal value.
fn dual_value(m: &wcaro::lp::LpModel) -> f64 {
    let (d, _) = dualize_lp(m);
    let s = solve_lp(&d, &LpParams::default()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(d.sense, ObjSense::Maximize);
    s.objective
}

/// One random draw for the β-bound no-effect check: a five-bus network with
/// loose lines, random prices, a feasible day-ahead plan, renewable
/// capacities at or above forecast and idle storage. Returns the third-level
/// dual value without and with the β-bound rows.
pub fn beta_row_draw(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut case = case5();
    for l in &mut case.lines {
        l.s_max = f64::INFINITY;
    }
    for g in &mut case.generators {
        g.r_up = rng.gen_range(0.0..40.0);
        g.r_down = rng.gen_range(0.0..40.0);
    }
    for d in &mut case.renewables {
        d.f_up = rng.gen_range(0.5..6.0);
        d.f_down = rng.gen_range(0.5..6.0);
    }
    let periods = rng.gen_range(1..=4);
    let base = synthetic_day(24);
    let mut ts = base.truncated(periods).unwrap();
    for t in 0..periods {
        ts.p_sl[t] = rng.gen_range(5.0..40.0);
    }
    let p = build_power_instance(&case, &ts, &PowerBuildParams::with_r(rng.gen_range(0.0..=1.0))).unwrap();
    let inst = &p.instance;

    // x: random generator outputs, P_fl from the day-ahead clearing rows.
    let fs = &inst.first.feasible_set;
    let n_g = case.generators.len();
    let mut x = vec![0.0; inst.first.n_x];
    for k in 0..n_g * periods {
        x[k] = rng.gen_range(fs.lower[k]..=fs.upper[k]);
    }
    for t in 0..periods {
        let pg: f64 = (0..n_g).map(|g| x[g * periods + t]).sum();
        let r = fs.rhs[t];
        x[p.layout.x_fl + t] = r - pg;
    }
    assert!(fs.contains(&x, 1e-9));
    let h: Vec<f64> = (0..inst.omega.dim())
        .map(|k| rng.gen_range(p.forecast[k]..=inst.omega.h_upper[k]))
        .collect();
    let y_fix = vec![0.0; inst.third.n_bin];
    let plain = build_third_level_primal(inst, &x, &h, Some(&y_fix)).unwrap();
    let bounded = build_bounded_third_level(inst, &x, &h, Some(&y_fix)).unwrap();
    (dual_value(&plain), dual_value(&bounded))
}
