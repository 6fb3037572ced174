//! Reads a matpower case with its role sidecar and solves it.
//!
//! cargo run --release --example matpower [-- CASE.m PERIODS]

use std::path::PathBuf;

use wcaro::bnb::{solve_mip, MipParams};
use wcaro::power::{build_power_instance, parse_case, synthetic_day, PowerBuildParams};
use wcaro::reformulate::build_single_level;

fn main() -> wcaro::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/case5.m"));
    let periods: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let case = parse_case(&path)?;
    println!(
        "{}: {} buses, {} lines, generators at {:?}, renewables at {:?}, storage at {:?}",
        case.name,
        case.buses.len(),
        case.lines.len(),
        case.generator_buses(),
        case.renewable_buses(),
        case.storage_buses()
    );
    let p = build_power_instance(&case, &synthetic_day(periods), &PowerBuildParams::with_r(0.5))?;
    let sl = build_single_level(&p.instance, None)?;
    let sol = solve_mip(&sl.mip, &MipParams::default())?;
    println!("{:?}: {:.3} {}", sol.status, sol.objective, case.unit);
    Ok(())
}
