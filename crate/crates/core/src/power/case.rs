//! Grid cases: native JSON and a matpower-style table subset.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::json_error;

const INF: f64 = f64::INFINITY;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: u32,
    /// Nominal active demand; scaled per period by the demand multiplier.
    #[serde(default)]
    pub demand: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: u32,
    pub to: u32,
    /// Reactance, strictly positive.
    pub x: f64,
    #[serde(with = "crate::serde_inf::scalar", default = "infinite")]
    pub s_max: f64,
}

fn infinite() -> f64 {
    INF
}

/// A conventional generator with day-ahead output `P_G` and intra-day
/// regulation `P⁺ ∈ [0, reg_up_max]`, `P⁻ ∈ [reg_down_min, 0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: u32,
    pub bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    /// `(c2, c1, c0)` of `c2 P² + c1 P + c0` per period.
    pub cost: [f64; 3],
    pub reg_up_max: f64,
    pub reg_down_min: f64,
    pub r_up: f64,
    pub r_down: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Renewable {
    pub id: u32,
    pub bus: u32,
    #[serde(default)]
    pub p_min: f64,
    /// Technical limit `P⁺`.
    pub p_plus: f64,
    pub f_up: f64,
    pub f_down: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Storage {
    pub id: u32,
    pub bus: u32,
    pub soc_min: f64,
    pub soc_max: f64,
    /// Energy capacity `E`.
    pub capacity: f64,
    #[serde(default)]
    pub p_ch_min: f64,
    pub p_ch_max: f64,
    #[serde(default)]
    pub p_dch_min: f64,
    pub p_dch_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCase {
    pub name: String,
    /// Currency tag carried into outputs.
    #[serde(default = "default_unit")]
    pub unit: String,
    /// Bus where intra-day trading happens and the angle is fixed to zero.
    pub root: u32,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    #[serde(default)]
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub renewables: Vec<Renewable>,
    #[serde(default)]
    pub storages: Vec<Storage>,
}

fn default_unit() -> String {
    "$".into()
}

impl GridCase {
    pub fn bus_index(&self, id: u32) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn root_index(&self) -> usize {
        self.bus_index(self.root).expect("validated case has its root bus")
    }

    pub fn generator_buses(&self) -> BTreeSet<u32> {
        self.generators.iter().map(|g| g.bus).collect()
    }

    pub fn renewable_buses(&self) -> BTreeSet<u32> {
        self.renewables.iter().map(|g| g.bus).collect()
    }

    pub fn storage_buses(&self) -> BTreeSet<u32> {
        self.storages.iter().map(|g| g.bus).collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.buses.iter().map(|b| b.demand).sum()
    }

    /// Keeps only the storages whose id is listed.
    pub fn with_storages(&self, ids: &[u32]) -> Result<GridCase> {
        for id in ids {
            if !self.storages.iter().any(|s| s.id == *id) {
                return Err(Error::Invalid(format!("case {} has no storage with id {id}", self.name)));
            }
        }
        let mut out = self.clone();
        out.storages.retain(|s| ids.contains(&s.id));
        Ok(out)
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Invalid(format!("case {}: {msg}", self.name)));
        let mut ids = BTreeSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return bad(format!("duplicate bus {}", b.id));
            }
            if !b.demand.is_finite() {
                return bad(format!("non-finite demand at bus {}", b.id));
            }
        }
        if !ids.contains(&self.root) {
            return bad(format!("root bus {} does not exist", self.root));
        }
        let known = |bus: u32| ids.contains(&bus);
        for l in &self.lines {
            if !known(l.from) || !known(l.to) || l.from == l.to {
                return bad(format!("line {}-{} has invalid endpoints", l.from, l.to));
            }
            if !(l.x > 0.0 && l.x.is_finite()) {
                return bad(format!("line {}-{} needs a positive reactance", l.from, l.to));
            }
            if !(l.s_max >= 0.0) {
                return bad(format!("line {}-{} has a negative thermal limit", l.from, l.to));
            }
        }
        for g in &self.generators {
            let prices = g.cost.iter().chain([&g.r_up, &g.r_down]).all(|v| v.is_finite());
            if !known(g.bus) || !prices || !(g.p_min <= g.p_max) || g.reg_up_max < 0.0 || g.reg_down_min > 0.0 {
                return bad(format!("generator {} is inconsistent", g.id));
            }
            if g.cost[0] < 0.0 {
                return bad(format!("generator {} has a concave cost", g.id));
            }
        }
        for r in &self.renewables {
            if !known(r.bus) || !r.f_up.is_finite() || !r.f_down.is_finite() || !(r.p_min <= r.p_plus) || r.p_min < 0.0 {
                return bad(format!("renewable {} is inconsistent", r.id));
            }
        }
        for s in &self.storages {
            let ok = known(s.bus)
                && s.soc_min <= s.soc_max
                && s.capacity > 0.0
                && 0.0 <= s.p_ch_min
                && s.p_ch_min <= s.p_ch_max
                && 0.0 <= s.p_dch_min
                && s.p_dch_min <= s.p_dch_max;
            if !ok {
                return bad(format!("storage {} is inconsistent", s.id));
            }
        }
        Ok(())
    }
}

/// Reads a case. Files ending in `.m` are parsed as matpower tables with the
/// role map taken from the sibling file `<stem>.roles.json`; anything else is
/// read as native JSON.
pub fn parse_case(path: impl AsRef<Path>) -> Result<GridCase> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "m") {
        return parse_matpower_case(path, &roles_path(path));
    }
    let text = fs::read_to_string(path)?;
    let case: GridCase = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    case.check()?;
    Ok(case)
}

/// How the generator rows of a matpower file map onto device roles.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct RoleMap {
    pub name: Option<String>,
    pub unit: Option<String>,
    /// Overrides the reference bus of the bus table.
    pub root: Option<u32>,
    /// Role per generator row (1-based); unlisted rows are conventional.
    pub generators: BTreeMap<String, String>,
    pub conventional: ConventionalDefaults,
    pub renewable: RenewableDefaults,
    pub storage: StorageDefaults,
    /// Per-row parameter overrides for conventional generators.
    pub overrides: BTreeMap<String, ConventionalOverride>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ConventionalDefaults {
    pub r_up: f64,
    pub r_down: f64,
    /// Regulation range as a fraction of `P_max`.
    pub reg_fraction: f64,
}

impl Default for ConventionalDefaults {
    fn default() -> Self {
        Self { r_up: 0.0, r_down: 0.0, reg_fraction: 0.5 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConventionalOverride {
    pub r_up: Option<f64>,
    pub r_down: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct RenewableDefaults {
    pub f_up: f64,
    pub f_down: f64,
}

impl Default for RenewableDefaults {
    fn default() -> Self {
        Self { f_up: 2.0, f_down: 3.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct StorageDefaults {
    pub soc_min: f64,
    pub soc_max: f64,
    /// Capacity in hours of full-power charging.
    pub hours: f64,
}

impl Default for StorageDefaults {
    fn default() -> Self {
        Self { soc_min: 0.1, soc_max: 0.9, hours: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Conventional,
    Renewable,
    Storage,
}

fn parse_role(s: &str) -> Result<Role> {
    match s.trim().to_ascii_lowercase().as_str() {
        "conventional" | "gen" | "g" => Ok(Role::Conventional),
        "renewable" | "dg" => Ok(Role::Renewable),
        "storage" | "s" => Ok(Role::Storage),
        _ => Err(Error::UnknownRole(s.to_string())),
    }
}

pub fn parse_matpower_case(path: &Path, roles_path: &Path) -> Result<GridCase> {
    let text = fs::read_to_string(path)?;
    let tables = parse_matpower_tables(&text, path)?;
    let roles: RoleMap = if roles_path.exists() {
        let t = fs::read_to_string(roles_path)?;
        serde_json::from_str(&t).map_err(|e| json_error(roles_path, e))?
    } else {
        RoleMap::default()
    };
    let name = roles
        .name
        .clone()
        .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_default();
    let case = assemble(&tables, &roles, name, path)?;
    case.check()?;
    Ok(case)
}

/// Numeric tables of a matpower file plus `baseMVA`.
#[derive(Clone, Debug, Default)]
pub struct MatpowerTables {
    pub base_mva: f64,
    pub tables: BTreeMap<String, Vec<Vec<f64>>>,
}

/// Reads `mpc.baseMVA = v;` and every `mpc.<name> = [ ... ];` matrix.
/// Other statements are ignored; `%` starts a comment.
pub fn parse_matpower_tables(text: &str, path: &Path) -> Result<MatpowerTables> {
    let err = |line: usize, column: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        msg,
    };
    let mut out = MatpowerTables { base_mva: 100.0, ..Default::default() };
    let mut open: Option<(String, usize, Vec<Vec<f64>>)> = None;
    let mut row: Vec<f64> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.split('%').next().unwrap_or("");
        let mut rest = line;
        let mut offset = 0;
        if open.is_none() {
            let t = rest.trim_start();
            let Some(stmt) = t.strip_prefix("mpc.") else { continue };
            let Some(eq) = stmt.find('=') else { continue };
            let key = stmt[..eq].trim().to_string();
            let value = stmt[eq + 1..].trim_start();
            let value_col = raw.len() - value.len() + 1;
            if let Some(body) = value.strip_prefix('[') {
                offset = raw.len() - body.len();
                rest = body;
                open = Some((key, ln, Vec::new()));
            } else {
                if key == "baseMVA" {
                    let v = value.trim_end().trim_end_matches(';').trim();
                    out.base_mva = v.parse().map_err(|_| err(ln, value_col, format!("invalid baseMVA '{v}'")))?;
                }
                continue;
            }
        }
        // Inside a matrix: numbers, ';' row breaks and a closing ']'.
        let (_, _, rows) = open.as_mut().expect("matrix is open");
        let mut closed = false;
        let mut pos = 0;
        let bytes = rest.as_bytes();
        while pos < bytes.len() {
            let c = bytes[pos] as char;
            if c.is_whitespace() || c == ',' {
                pos += 1;
            } else if c == ';' {
                if !row.is_empty() {
                    rows.push(std::mem::take(&mut row));
                }
                pos += 1;
            } else if c == ']' {
                closed = true;
                break;
            } else {
                let start = pos;
                while pos < bytes.len() && !matches!(bytes[pos] as char, ' ' | '\t' | ',' | ';' | ']') {
                    pos += 1;
                }
                let tok = &rest[start..pos];
                let v = match tok {
                    "Inf" | "inf" => INF,
                    "-Inf" | "-inf" => -INF,
                    _ => tok
                        .parse()
                        .map_err(|_| err(ln, offset + start + 1, format!("invalid number '{tok}'")))?,
                };
                row.push(v);
            }
        }
        if !row.is_empty() && !closed {
            // A newline also ends a row.
            rows.push(std::mem::take(&mut row));
        }
        if closed {
            if !row.is_empty() {
                rows.push(std::mem::take(&mut row));
            }
            let (key, _, rows) = open.take().expect("matrix is open");
            out.tables.insert(key, rows);
        }
    }
    if let Some((key, start, _)) = open {
        return Err(err(start, 1, format!("matrix mpc.{key} is never closed")));
    }
    Ok(out)
}

fn assemble(t: &MatpowerTables, roles: &RoleMap, name: String, path: &Path) -> Result<GridCase> {
    let need = |key: &str, cols: usize| -> Result<&Vec<Vec<f64>>> {
        let rows = t.tables.get(key).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            column: 1,
            msg: format!("missing table mpc.{key}"),
        })?;
        if let Some(i) = rows.iter().position(|r| r.len() < cols) {
            return Err(Error::Invalid(format!("row {} of mpc.{key} has fewer than {cols} columns", i + 1)));
        }
        Ok(rows)
    };
    let base = t.base_mva;
    let bus_rows = need("bus", 3)?;
    let gen_rows = need("gen", 10)?;
    let branch_rows = need("branch", 6)?;
    let cost_rows = t.tables.get("gencost");

    let buses: Vec<Bus> = bus_rows
        .iter()
        .map(|r| Bus { id: r[0] as u32, demand: r[2] / base })
        .collect();
    let reference = bus_rows.iter().find(|r| r.len() > 1 && r[1] == 3.0).map(|r| r[0] as u32);
    let root = roles
        .root
        .or(reference)
        .or_else(|| buses.first().map(|b| b.id))
        .ok_or_else(|| Error::Invalid("case has no buses".into()))?;

    let lines = branch_rows
        .iter()
        .filter(|r| r.len() < 11 || r[10] != 0.0)
        .map(|r| Line {
            from: r[0] as u32,
            to: r[1] as u32,
            x: r[3],
            s_max: if r[5] > 0.0 { r[5] / base } else { INF },
        })
        .collect();

    for key in roles.generators.keys().chain(roles.overrides.keys()) {
        match key.parse::<usize>() {
            Ok(k) if (1..=gen_rows.len()).contains(&k) => {}
            _ => return Err(Error::Invalid(format!("role map refers to unknown generator row '{key}'"))),
        }
    }
    let (mut generators, mut renewables, mut storages) = (Vec::new(), Vec::new(), Vec::new());
    for (k, r) in gen_rows.iter().enumerate() {
        if r.len() > 7 && r[7] <= 0.0 {
            continue;
        }
        let row = (k + 1).to_string();
        let role = match roles.generators.get(&row) {
            Some(s) => parse_role(s)?,
            None => Role::Conventional,
        };
        let (bus, p_max, p_min) = (r[0] as u32, r[8] / base, r[9].max(0.0) / base);
        let id = k as u32 + 1;
        match role {
            Role::Conventional => {
                let cost = cost_rows.and_then(|c| c.get(k)).map(|c| polynomial_cost(c, base)).unwrap_or([0.0; 3]);
                let d = &roles.conventional;
                let o = roles.overrides.get(&row).cloned().unwrap_or_default();
                generators.push(Generator {
                    id,
                    bus,
                    p_min,
                    p_max,
                    cost,
                    reg_up_max: d.reg_fraction * p_max,
                    reg_down_min: -d.reg_fraction * p_max,
                    r_up: o.r_up.unwrap_or(d.r_up),
                    r_down: o.r_down.unwrap_or(d.r_down),
                });
            }
            Role::Renewable => renewables.push(Renewable {
                id,
                bus,
                p_min,
                p_plus: p_max,
                f_up: roles.renewable.f_up,
                f_down: roles.renewable.f_down,
            }),
            Role::Storage => {
                let s = &roles.storage;
                storages.push(Storage {
                    id,
                    bus,
                    soc_min: s.soc_min,
                    soc_max: s.soc_max,
                    capacity: s.hours * p_max,
                    p_ch_min: 0.0,
                    p_ch_max: p_max,
                    p_dch_min: 0.0,
                    p_dch_max: p_max,
                })
            }
        }
    }
    Ok(GridCase {
        name,
        unit: roles.unit.clone().unwrap_or_else(default_unit),
        root,
        buses,
        lines,
        generators,
        renewables,
        storages,
    })
}

/// `(c2, c1, c0)` in per-unit power from a polynomial gencost row
/// `2 startup shutdown n c(n-1) ... c0`. Piecewise rows give zero cost.
fn polynomial_cost(r: &[f64], base: f64) -> [f64; 3] {
    if r.len() < 4 || r[0] != 2.0 {
        return [0.0; 3];
    }
    let n = r[3] as usize;
    let coef = &r[4..(4 + n).min(r.len())];
    let mut out = [0.0; 3];
    for (p, &c) in coef.iter().rev().enumerate().take(3) {
        out[2 - p] = c * base.powi(p as i32);
    }
    out
}

/// Sibling path used for the role map of a matpower file.
pub fn roles_path(case: &Path) -> PathBuf {
    case.with_extension("roles.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    const CASE: &str = "function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 100;
% bus_i type Pd
mpc.bus = [
\t1\t3\t0\t0;
\t2\t1\t150\t0;
\t3\t1\t50\t0;
];
mpc.gen = [
\t1\t0\t0\t0\t0\t1\t100\t1\t200\t0;
\t2\t0\t0\t0\t0\t1\t100\t1\t80\t0;
\t3\t0\t0\t0\t0\t1\t100\t1\t40\t0;
];
mpc.branch = [
\t1\t2\t0\t0.01\t0\t300\t0\t0\t0\t0\t1;
\t2\t3\t0\t0.02\t0\t0\t0\t0\t0\t0\t1;
];
mpc.gencost = [
\t2\t0\t0\t3\t0.01\t14\t5;
\t2\t0\t0\t2\t20\t0;
\t2\t0\t0\t2\t30\t0;
];
";

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn matpower_tables_with_roles() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "tiny.m", CASE);
        write(
            dir.path(),
            "tiny.roles.json",
            r#"{"generators": {"2": "renewable", "3": "storage"}, "conventional": {"r_up": 14, "r_down": 14}}"#,
        );
        let c = parse_case(&p).unwrap();
        assert_eq!(c.root, 1);
        assert_eq!(c.buses.len(), 3);
        assert!((c.buses[1].demand - 1.5).abs() < 1e-12);
        assert_eq!(c.lines.len(), 2);
        assert_eq!(c.lines[1].s_max, INF);
        assert_eq!(c.generator_buses(), BTreeSet::from([1]));
        assert_eq!(c.renewable_buses(), BTreeSet::from([2]));
        assert_eq!(c.storage_buses(), BTreeSet::from([3]));
        let g = &c.generators[0];
        assert!((g.p_max - 2.0).abs() < 1e-12);
        assert!((g.cost[0] - 100.0).abs() < 1e-9 && (g.cost[1] - 1400.0).abs() < 1e-9 && g.cost[2] == 5.0);
        assert!((c.storages[0].capacity - 1.6).abs() < 1e-12);
    }

    #[test]
    fn unknown_role_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "tiny.m", CASE);
        write(dir.path(), "tiny.roles.json", r#"{"generators": {"2": "nuclear"}}"#);
        assert!(matches!(parse_case(&p), Err(Error::UnknownRole(r)) if r == "nuclear"));
    }

    #[test]
    fn bad_number_reports_line_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "bad.m", "mpc.bus = [\n 1 3 x1 0;\n];\n");
        match parse_case(&p) {
            Err(Error::Parse { line, column, msg, .. }) => {
                assert_eq!((line, column), (2, 6), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unclosed_matrix_and_bad_json_are_parse_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "open.m", "mpc.bus = [\n 1 3 0 0;\n");
        assert!(matches!(parse_case(&p), Err(Error::Parse { line: 1, .. })));
        let j = write(dir.path(), "broken.json", "{\"name\": \"x\",\n \"root\": }");
        assert!(matches!(parse_case(&j), Err(Error::Parse { line: 2, .. })));
    }
}
