//! Regenerates the files under `data/`.
//!
//! cargo run --example write_fixtures [-- OUT_DIR]

use std::fs;
use std::path::PathBuf;

use wcaro::io::write_instance;
use wcaro::power::{bundled_case, synthetic_day, write_timeseries, REPLICAS};
use wcaro::toys::{t1, t2};

fn main() -> wcaro::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    fs::create_dir_all(out.join("cases"))?;

    write_instance(out.join("t1.json"), &t1())?;
    write_instance(out.join("t2.json"), &t2())?;
    for name in REPLICAS {
        let case = bundled_case(name)?;
        fs::write(out.join("cases").join(format!("{name}.json")), serde_json::to_string_pretty(&case)? + "\n")?;
    }
    write_timeseries(out.join("day24.csv"), &synthetic_day(24))?;
    write_timeseries(out.join("day96.csv"), &synthetic_day(96))?;

    let suite = |cases: serde_json::Value| {
        serde_json::json!({ "timeseries": "day24.csv", "periods": 24, "R": 0.5, "gap": 1e-4, "cases": cases })
    };
    let small = suite(serde_json::json!([{ "case": "case5" }, { "case": "case30" }]));
    let scaling = suite(serde_json::json!([
        { "case": "case5" },
        { "case": "case30", "storages": [1, 2] },
        { "case": "case118" }
    ]));
    fs::write(out.join("suite_small.json"), serde_json::to_string_pretty(&small)? + "\n")?;
    fs::write(out.join("suite_scaling.json"), serde_json::to_string_pretty(&scaling)? + "\n")?;
    println!("wrote fixtures to {}", out.display());
    Ok(())
}
