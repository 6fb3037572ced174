//! The files under `data/` agree with the in-code cases they were written from.

use std::path::PathBuf;

use wcaro::io::read_instance;
use wcaro::power::{bundled_case, case5, load_timeseries, parse_case, synthetic_day, REPLICAS};
use wcaro::toys::{t1, t2};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn toy_files_match() {
    assert_eq!(read_instance(data("t1.json")).unwrap(), t1());
    assert_eq!(read_instance(data("t2.json")).unwrap(), t2());
}

#[test]
fn case_files_match_the_replicas() {
    for name in REPLICAS {
        let parsed = parse_case(data(&format!("cases/{name}.json"))).unwrap();
        assert_eq!(parsed, bundled_case(name).unwrap(), "{name}");
    }
}

#[test]
fn series_files_match_the_synthetic_day() {
    assert_eq!(load_timeseries(data("day24.csv"), 24).unwrap(), synthetic_day(24));
    assert_eq!(load_timeseries(data("day96.csv"), 96).unwrap(), synthetic_day(96));
}

#[test]
fn matpower_case5_matches_the_replica_up_to_ids() {
    let m = parse_case(data("case5.m")).unwrap();
    let r = case5();
    assert_eq!(m.root, r.root);
    assert_eq!(m.buses.len(), r.buses.len());
    for (a, b) in m.buses.iter().zip(&r.buses) {
        assert_eq!(a.id, b.id);
        assert!((a.demand - b.demand).abs() < 1e-12);
    }
    assert_eq!(m.lines, r.lines);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert_eq!(m.generators.len(), 2);
    for (a, b) in m.generators.iter().zip(&r.generators) {
        assert_eq!(a.bus, b.bus);
        assert!(close(a.p_max, b.p_max) && close(a.cost[1], b.cost[1]) && a.r_up == b.r_up && a.r_down == b.r_down);
        assert!(close(a.reg_up_max, b.reg_up_max) && close(a.reg_down_min, b.reg_down_min));
    }
    for (a, b) in m.renewables.iter().zip(&r.renewables) {
        assert_eq!((a.bus, a.f_up, a.f_down), (b.bus, b.f_up, b.f_down));
        assert!(close(a.p_plus, b.p_plus));
    }
    let (a, b) = (&m.storages[0], &r.storages[0]);
    assert_eq!(a.bus, b.bus);
    assert!(close(a.capacity, b.capacity) && close(a.p_ch_max, b.p_ch_max) && close(a.soc_min, b.soc_min));
}
