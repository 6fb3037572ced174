//! Solves random small instances and checks them against brute force.
//!
//! cargo run --release --example certify [-- COUNT]

use wcaro::bnb::{solve_mip, MipParams};
use wcaro::oracle::{certify, random_instance, RandomInstanceOptions};
use wcaro::reformulate::build_single_level;

fn main() -> wcaro::Result<()> {
    let count: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(25);
    let (mut exact, mut worst) = (0, f64::INFINITY);
    for seed in 0..count {
        let inst = random_instance(seed, &RandomInstanceOptions::default());
        let sl = build_single_level(&inst, None)?;
        let sol = solve_mip(&sl.mip, &MipParams { gap_tol: 1e-9, ..Default::default() })?;
        let r = certify(&inst, &sl, &sol, 1e-6)?;
        println!(
            "seed {seed:>3}: |x| {} |h| {} bins {}  MIP {:>10.4}  oracle {:>10.4}  margin {:.2e}{}",
            inst.first.n_x,
            inst.omega.dim(),
            inst.third.n_bin,
            r.mip_value,
            r.oracle_value_at_xstar,
            r.margin,
            if r.exact { "  exact" } else { "" }
        );
        assert!(r.upper_bound_holds);
        exact += usize::from(r.exact);
        worst = worst.min(r.margin);
    }
    println!("{exact}/{count} exact, smallest margin {worst:.3e}");
    Ok(())
}
