//! The third-level LP of the first toy at fixed `(x, h)` and its dual.

use wcaro::dual::dualize_lp;
use wcaro::reformulate::build_third_level_primal;
use wcaro::simplex::{solve_lp, LpParams};
use wcaro::toys::t1;

fn main() -> wcaro::Result<()> {
    let inst = t1();
    for (x, h) in [(0.0, 1.0), (0.25, 1.0), (0.5, 0.2)] {
        let primal = build_third_level_primal(&inst, &[x], &[h], None)?;
        let (dual, _) = dualize_lp(&primal);
        let p = solve_lp(&primal, &LpParams::default())?;
        let d = solve_lp(&dual, &LpParams::default())?;
        println!("x = {x}, h = {h}: primal {:.6}, dual {:.6}", p.objective, d.objective);
        if x == 0.0 {
            print!("-- primal\n{}-- dual\n{}", primal.to_lp_format(), dual.to_lp_format());
        }
    }
    Ok(())
}
