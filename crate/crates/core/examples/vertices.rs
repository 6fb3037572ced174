//! Vertices of a forecast-error set, and the cap on enumeration.

use wcaro::lp::RowSense;
use wcaro::model::{standardize_omega, Polytope};
use wcaro::oracle::enumerate_vertices;

fn main() -> wcaro::Result<()> {
    // Two sources with forecast 2.5 each; the total may not fall below half of it.
    let mut p = Polytope::boxed(vec![0.0; 2], vec![5.0; 2]);
    p.add_row(&[(0, 1.0), (1, 1.0)], RowSense::Ge, 2.5);
    let om = standardize_omega(&p)?;
    for v in enumerate_vertices(&om)? {
        println!("{v:?}");
    }

    let cube = standardize_omega(&Polytope::boxed(vec![0.0; 8], vec![1.0; 8]))?;
    match enumerate_vertices(&cube) {
        Err(e) => println!("8-cube: {e}"),
        Ok(v) => println!("8-cube: {} vertices", v.len()),
    }
    Ok(())
}
