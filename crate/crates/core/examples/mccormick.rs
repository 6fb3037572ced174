//! The McCormick relaxation of the bilinear max problem, at fixed and free `x`.

use wcaro::reformulate::build_mccormick_relaxation;
use wcaro::simplex::{solve_lp, LpParams};
use wcaro::toys::{t1, t2};

fn main() -> wcaro::Result<()> {
    let inst = t1();
    for x in [0.0, 0.5, 1.0, 2.0] {
        let m = build_mccormick_relaxation(&inst, Some(&[x]))?;
        let s = solve_lp(&m, &LpParams::default())?;
        println!("T1 at x = {x}: relaxation value {:.6}", s.objective);
    }
    let m = build_mccormick_relaxation(&t2(), None)?;
    println!("T2 relaxation: {} rows over {} columns", m.num_rows(), m.num_cols());
    for name in m.var_names.iter().take(12) {
        println!("  {name}");
    }
    Ok(())
}
