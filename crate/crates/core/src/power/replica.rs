//! Synthetic stand-ins for the standard test networks and a synthetic day.
//!
//! Topologies are generated from a fixed seed; device placement follows
//! the bus sets used in the experiments (for example generators at buses 1
//! and 4 of the five-bus network).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::case::{Bus, Generator, GridCase, Line, Renewable, Storage};
use super::timeseries::TimeSeries;
use crate::error::{Error, Result};

const INF: f64 = f64::INFINITY;

/// Names accepted by [`bundled_case`].
pub const REPLICAS: [&str; 5] = ["case5", "case30", "case118", "case200", "case300"];

pub fn bundled_case(name: &str) -> Result<GridCase> {
    match name {
        "case5" => Ok(case5()),
        "case30" => Ok(synthetic(&Layout {
            name: "case30",
            buses: 30,
            gens: &[5, 8, 11, 13],
            dgs: &[2],
            storages: &[1, 2, 8, 13],
            seed: 30,
        })),
        "case118" => Ok(synthetic(&Layout {
            name: "case118",
            buses: 118,
            gens: &[10, 12, 25, 26, 31, 46, 49, 54, 59, 61],
            dgs: &[4, 18, 32, 40, 55, 70, 77, 92, 100, 113],
            storages: &[6, 24, 42, 66, 85, 104],
            seed: 118,
        })),
        "case200" => Ok(synthetic(&Layout {
            name: "case200",
            buses: 200,
            gens: &[3, 21, 38, 49, 65, 77, 93, 112, 130, 147, 160, 171, 189],
            dgs: &[9, 27, 44, 58, 81, 99, 120, 138, 155, 177, 196],
            storages: &[14, 33, 52, 71, 90, 109, 128, 146, 165, 184],
            seed: 200,
        })),
        "case300" => Ok(synthetic(&Layout {
            name: "case300",
            buses: 300,
            gens: &[7, 29, 51, 73, 95, 117, 139, 161, 183, 205, 227, 249, 271, 293],
            dgs: &[12, 40, 68, 96, 124, 152, 180, 208, 236, 264, 292],
            storages: &[5, 25, 45, 65, 85, 105, 125, 145, 165, 185, 205, 225, 245, 265, 285],
            seed: 300,
        })),
        _ => Err(Error::Invalid(format!("unknown bundled case '{name}'"))),
    }
}

/// Five buses in the usual ring-with-chord layout (per unit on 100 MVA).
pub fn case5() -> GridCase {
    let line = |from, to, x, s_max| Line { from, to, x, s_max };
    let gen = |id, bus, p_max, c1, r| Generator {
        id,
        bus,
        p_min: 0.0,
        p_max,
        cost: [0.0, c1, 0.0],
        reg_up_max: 0.5 * p_max,
        reg_down_min: -0.5 * p_max,
        r_up: r,
        r_down: r,
    };
    GridCase {
        name: "case5".into(),
        unit: "$".into(),
        root: 1,
        buses: vec![
            Bus { id: 1, demand: 0.0 },
            Bus { id: 2, demand: 3.0 },
            Bus { id: 3, demand: 3.0 },
            Bus { id: 4, demand: 4.0 },
            Bus { id: 5, demand: 0.0 },
        ],
        lines: vec![
            line(1, 2, 0.0281, 8.0),
            line(1, 4, 0.0304, INF),
            line(1, 5, 0.0064, INF),
            line(2, 3, 0.0108, INF),
            line(3, 4, 0.0297, INF),
            line(4, 5, 0.0297, 6.0),
        ],
        generators: vec![gen(1, 1, 0.4, 14.0, 14.0), gen(4, 4, 2.0, 40.0, 20.0)],
        renewables: vec![
            Renewable { id: 1, bus: 1, p_min: 0.0, p_plus: 1.7, f_up: 2.0, f_down: 3.0 },
            Renewable { id: 5, bus: 5, p_min: 0.0, p_plus: 6.0, f_up: 2.0, f_down: 3.0 },
        ],
        storages: vec![Storage {
            id: 3,
            bus: 3,
            soc_min: 0.1,
            soc_max: 0.9,
            capacity: 2.0,
            p_ch_min: 0.0,
            p_ch_max: 0.5,
            p_dch_min: 0.0,
            p_dch_max: 0.5,
        }],
    }
}

struct Layout<'a> {
    name: &'a str,
    buses: u32,
    gens: &'a [u32],
    dgs: &'a [u32],
    storages: &'a [u32],
    seed: u64,
}

fn synthetic(l: &Layout) -> GridCase {
    let mut rng = ChaCha8Rng::seed_from_u64(l.seed);
    let n = l.buses;
    let buses: Vec<Bus> = (1..=n)
        .map(|id| {
            let demand = if id > 1 && rng.gen_bool(0.7) { round(rng.gen_range(0.1..0.6)) } else { 0.0 };
            Bus { id, demand }
        })
        .collect();
    let total: f64 = buses.iter().map(|b| b.demand).sum();

    // A random tree grown from the root plus a few chords; thermal limits
    // are filled in once the devices are known.
    let mut lines = Vec::new();
    for k in 2..=n {
        let parent = rng.gen_range(k.saturating_sub(5).max(1)..k);
        lines.push(Line { from: parent, to: k, x: round(rng.gen_range(0.01..0.08)), s_max: INF });
    }
    for _ in 0..n / 5 {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b && !lines.iter().any(|x| (x.from, x.to) == (a, b) || (x.from, x.to) == (b, a)) {
            lines.push(Line { from: a.min(b), to: a.max(b), x: round(rng.gen_range(0.01..0.08)), s_max: INF });
        }
    }

    let share = 0.5 * total / l.gens.len() as f64;
    let generators: Vec<Generator> = l
        .gens
        .iter()
        .map(|&bus| {
            let p_max = round(share * rng.gen_range(0.6..1.4));
            let c1 = round(rng.gen_range(10.0..40.0));
            Generator {
                id: bus,
                bus,
                p_min: 0.0,
                p_max,
                cost: [round(rng.gen_range(0.5..2.0)), c1, 0.0],
                reg_up_max: round(0.5 * p_max),
                reg_down_min: -round(0.5 * p_max),
                r_up: c1.min(18.0),
                r_down: c1.min(18.0),
            }
        })
        .collect();
    let renewables: Vec<Renewable> = l
        .dgs
        .iter()
        .map(|&bus| Renewable { id: bus, bus, p_min: 0.0, p_plus: round(rng.gen_range(0.5..2.0)), f_up: 2.0, f_down: 3.0 })
        .collect();
    let storages = l
        .storages
        .iter()
        .map(|&bus| {
            let capacity = round(rng.gen_range(1.0..3.0));
            Storage {
                id: bus,
                bus,
                soc_min: 0.1,
                soc_max: 0.9,
                capacity,
                p_ch_min: 0.0,
                p_ch_max: round(capacity / 4.0),
                p_dch_min: 0.0,
                p_dch_max: round(capacity / 4.0),
            }
        })
        .collect::<Vec<Storage>>();
    // DC flows are linear in the injections with distribution factors of
    // magnitude at most one, so twice the largest possible total injection
    // never binds and every recourse pattern stays routable.
    let gen_cap: f64 = generators.iter().map(|g: &Generator| g.p_max * 1.5).sum();
    let dg_cap: f64 = renewables.iter().map(|g: &Renewable| g.p_plus).sum();
    let st_cap: f64 = storages.iter().map(|s| s.p_ch_max + s.p_dch_max).sum();
    let limit = round(2.0 * (1.2 * total + gen_cap + dg_cap + st_cap)).ceil();
    for line in &mut lines {
        line.s_max = limit;
    }
    GridCase {
        name: l.name.into(),
        unit: "$".into(),
        root: 1,
        buses,
        lines,
        generators,
        renewables,
        storages,
    }
}

fn round(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// A smooth synthetic day: evening price peak, demand following prices and
/// a solar-shaped renewable profile on top of a small constant share.
pub fn synthetic_day(periods: usize) -> TimeSeries {
    let mut p_fl = Vec::new();
    let mut p_sl = Vec::new();
    let mut d = Vec::new();
    let mut dg = Vec::new();
    for k in 0..periods {
        let hour = 24.0 * k as f64 / periods as f64;
        let wave = (2.0 * PI * (hour - 12.0) / 24.0).sin();
        let price = round(24.0 + 6.0 * wave);
        p_fl.push(price);
        p_sl.push(round(price + 3.0));
        d.push(round(0.85 + 0.25 * wave));
        let sun = (PI * (hour - 6.0) / 12.0).sin().max(0.0);
        dg.push(round(0.3 + 0.9 * sun));
    }
    TimeSeries::new(p_fl, p_sl, d, dg).expect("synthetic series is well formed")
}
