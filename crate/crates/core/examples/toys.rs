//! Builds and solves the single-level model of the two toy instances.

use wcaro::bnb::{solve_mip, MipParams};
use wcaro::reformulate::build_single_level;
use wcaro::toys::{t1, t2};

fn main() -> wcaro::Result<()> {
    for inst in [t1(), t2()] {
        let sl = build_single_level(&inst, None)?;
        let sol = solve_mip(&sl.mip, &MipParams { gap_tol: 1e-9, ..Default::default() })?;
        println!(
            "{}: {} rows, {} columns, {} binaries",
            inst.name,
            sl.mip.base.num_rows(),
            sl.mip.base.num_cols(),
            sl.mip.binary_cols.len()
        );
        println!("  value {:.6} at x = {:?}, y = {:?}", sol.objective, sl.x_of(&sol.primal), sl.y_of(&sol.primal));
    }
    Ok(())
}
