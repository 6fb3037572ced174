//! Properties of the dispatch model on the bundled networks.

mod common;

use common::{beta_row_draw, solve_power};
use wcaro::power::{bundled_case, case5, synthetic_day, PowerBuildParams};

#[test]
fn beta_bound_rows_do_not_change_the_recourse_value() {
    for seed in 0..60 {
        let (plain, bounded) = beta_row_draw(seed);
        assert!((plain - bounded).abs() <= 1e-6 * (1.0 + plain.abs()), "seed {seed}: {plain} vs {bounded}");
    }
}

#[test]
fn value_does_not_increase_with_r() {
    let (case, ts) = (case5(), synthetic_day(24));
    let mut last = f64::INFINITY;
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let (p, sl, sol) = solve_power(&case, &ts, &PowerBuildParams::with_r(r));
        assert!(sol.objective <= last + 1e-6, "R = {r}: {} after {last}", sol.objective);
        last = sol.objective;
        let y = sl.y_of(&sol.primal);
        assert!(p.nodal_residual(&y) <= 1e-6);
        assert!(p.storage_violation(&case, &y) <= 1e-6);
    }
}

#[test]
fn more_storage_never_costs_more() {
    let case = bundled_case("case30").unwrap();
    let ts = synthetic_day(24);
    let params = PowerBuildParams::with_r(0.5);
    let none = solve_power(&case.with_storages(&[]).unwrap(), &ts, &params).2.objective;
    let some = solve_power(&case.with_storages(&[1, 2]).unwrap(), &ts, &params).2.objective;
    let all = solve_power(&case, &ts, &params).2.objective;
    assert!(none + 1e-6 >= some && some + 1e-6 >= all, "{none} {some} {all}");
}

#[test]
fn dearer_regulation_dominates() {
    let ts = synthetic_day(24);
    let cheap = case5();
    let mut dear = case5();
    dear.generators[1].r_up = 40.0;
    dear.generators[1].r_down = 40.0;
    for r in [0.0, 0.5, 1.0] {
        let params = PowerBuildParams::with_r(r);
        let a = solve_power(&cheap, &ts, &params).2.objective;
        let b = solve_power(&dear, &ts, &params).2.objective;
        assert!(b + 1e-6 >= a, "R = {r}: {b} < {a}");
    }
}
