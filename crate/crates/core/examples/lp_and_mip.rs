//! The bundled LP and branch-and-bound engines on a small knapsack.

use wcaro::bnb::{solve_mip_with_log, MipParams};
use wcaro::lp::{LpModel, MipModel, ObjSense, RowSense};
use wcaro::simplex::{solve_lp, LpParams};

fn main() -> wcaro::Result<()> {
    let value = [10.0, 13.0, 7.0, 8.0, 4.0];
    let weight = [5.0, 7.0, 4.0, 5.0, 3.0];
    let mut m = LpModel::new(ObjSense::Maximize);
    let cols: Vec<usize> = value.iter().enumerate().map(|(i, &v)| m.add_col(format!("take[{i}]"), v, 0.0, 1.0)).collect();
    m.add_row("capacity", cols.iter().zip(weight).map(|(&j, w)| (j, w)).collect(), RowSense::Le, 14.0);

    let relaxed = solve_lp(&m, &LpParams::default())?;
    println!("LP relaxation: {:?} {:.4}", relaxed.status, relaxed.objective);
    println!("capacity shadow price: {:.4}", relaxed.dual_rows[0]);

    let mip = MipModel { base: m, binary_cols: cols };
    print!("{}", mip.to_lp_format());
    let sol = solve_mip_with_log(&mip, &MipParams::default(), |e| {
        println!("node {:>3} depth {} incumbent {:>6} bound {:.4}", e.node, e.depth, e.incumbent, e.best_bound)
    })?;
    println!("MIP: {:?} {} with {:?}", sol.status, sol.objective, sol.primal);
    Ok(())
}
