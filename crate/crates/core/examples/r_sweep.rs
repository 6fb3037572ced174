//! Worst-case cost as the forecast error bound R tightens, and the effect of storage.
//!
//! cargo run --release --example r_sweep [-- PERIODS]

use wcaro::bnb::{solve_mip, MipParams};
use wcaro::cli::{parallel_map, thread_count};
use wcaro::power::{build_power_instance, bundled_case, synthetic_day, GridCase, PowerBuildParams, TimeSeries};
use wcaro::reformulate::build_single_level;

fn value(case: &GridCase, ts: &TimeSeries, r: f64) -> f64 {
    let p = build_power_instance(case, ts, &PowerBuildParams::with_r(r)).expect("build");
    let sl = build_single_level(&p.instance, None).expect("reformulate");
    solve_mip(&sl.mip, &MipParams { gap_tol: 1e-6, ..Default::default() }).expect("solve").objective
}

fn main() -> wcaro::Result<()> {
    let periods: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let ts = synthetic_day(periods);
    let case = bundled_case("case5")?;
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let values = parallel_map(&grid, thread_count(), |&r| value(&case, &ts, r));
    for (r, v) in grid.iter().zip(&values) {
        println!("case5 R = {r:.2}: {v:.3}");
    }

    let case30 = bundled_case("case30")?;
    for ids in [&[][..], &[1, 2], &[1, 2, 8, 13]] {
        let c = case30.with_storages(ids)?;
        println!("case30 with storages {ids:?}: {:.3}", value(&c, &ts, 0.5));
    }
    Ok(())
}
