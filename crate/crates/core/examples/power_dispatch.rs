//! Day-ahead dispatch of the five-bus case with a few periods.
//!
//! cargo run --release --example power_dispatch [-- PERIODS R]

use wcaro::bnb::{solve_mip, MipParams};
use wcaro::power::{build_power_instance, case5, synthetic_day, PowerBuildParams};
use wcaro::reformulate::build_single_level;

fn main() -> wcaro::Result<()> {
    let mut args = std::env::args().skip(1);
    let periods: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);
    let r: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.5);

    let case = case5();
    let ts = synthetic_day(periods);
    let p = build_power_instance(&case, &ts, &PowerBuildParams::with_r(r))?;
    println!("β bounds {:?} (exact: {})", (p.beta.lower[0], p.beta.upper[0]), p.beta.exact);
    let sl = build_single_level(&p.instance, None)?;
    println!("{}: {} rows, {} columns, {} binaries", p.instance.name, sl.mip.base.num_rows(), sl.mip.base.num_cols(), sl.mip.binary_cols.len());
    let sol = solve_mip(&sl.mip, &MipParams { gap_tol: 1e-6, ..Default::default() })?;
    println!("{:?}, worst-case cost {:.2} {} after {} nodes", sol.status, sol.objective, case.unit, sol.nodes);

    let x = sl.x_of(&sol.primal);
    let l = &p.layout;
    println!("{:>3} {:>8} {:>8} {:>8} {:>9}", "t", "P_G1", "P_G4", "P_fl", "forecast");
    for t in 0..periods {
        let fc: f64 = (0..case.renewables.len()).map(|i| p.forecast[i * periods + t]).sum();
        println!("{t:>3} {:>8.3} {:>8.3} {:>8.3} {:>9.3}", x[t], x[periods + t], x[l.x_fl + t], fc);
    }
    let y = sl.y_of(&sol.primal);
    println!("nodal residual {:.2e}, storage violation {:.2e}", p.nodal_residual(&y), p.storage_violation(&case, &y));
    Ok(())
}
