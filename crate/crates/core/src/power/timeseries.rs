//! Per-period prices and multipliers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Day-ahead price.
    pub p_fl: Vec<f64>,
    /// Intra-day price.
    pub p_sl: Vec<f64>,
    /// Demand multiplier.
    pub delta_d: Vec<f64>,
    /// Renewable availability multiplier.
    pub delta_dg: Vec<f64>,
    /// Period length in hours.
    pub dt: f64,
}

#[derive(Deserialize)]
struct Record {
    #[allow(dead_code)]
    t: f64,
    p_fl: f64,
    p_sl: f64,
    delta_d: f64,
    delta_dg: f64,
}

impl TimeSeries {
    pub fn periods(&self) -> usize {
        self.p_fl.len()
    }

    /// Validates lengths and signs; `ΔT` becomes `24 / periods` hours.
    pub fn new(p_fl: Vec<f64>, p_sl: Vec<f64>, delta_d: Vec<f64>, delta_dg: Vec<f64>) -> Result<Self> {
        let n = p_fl.len();
        for v in [&p_sl, &delta_d, &delta_dg] {
            if v.len() != n {
                return Err(Error::LengthMismatch { expected: n, found: v.len() });
            }
        }
        if n == 0 {
            return Err(Error::Invalid("time series has no periods".into()));
        }
        for (column, v) in [("delta_d", &delta_d), ("delta_dg", &delta_dg)] {
            if let Some(period) = v.iter().position(|&m| !(m >= 0.0)) {
                return Err(Error::NegativeMultiplier { column: column.into(), period });
            }
        }
        if p_fl.iter().chain(&p_sl).any(|p| !p.is_finite()) {
            return Err(Error::Invalid("non-finite price in time series".into()));
        }
        Ok(Self { dt: 24.0 / n as f64, p_fl, p_sl, delta_d, delta_dg })
    }

    /// The first `periods` entries.
    pub fn truncated(&self, periods: usize) -> Result<Self> {
        if periods > self.periods() {
            return Err(Error::LengthMismatch { expected: periods, found: self.periods() });
        }
        let cut = |v: &[f64]| v[..periods].to_vec();
        let mut out = Self::new(cut(&self.p_fl), cut(&self.p_sl), cut(&self.delta_d), cut(&self.delta_dg))?;
        out.dt = self.dt;
        Ok(out)
    }
}

/// Reads a CSV with header `t,p_fl,p_sl,delta_d,delta_dg`; the file must have
/// exactly `periods` data rows.
pub fn load_timeseries(path: impl AsRef<Path>, periods: usize) -> Result<TimeSeries> {
    let path = path.as_ref();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    for col in ["t", "p_fl", "p_sl", "delta_d", "delta_dg"] {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                column: 1,
                msg: format!("missing column '{col}'"),
            });
        }
    }
    let (mut p_fl, mut p_sl, mut d, mut dg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.deserialize::<Record>() {
        let r = rec.map_err(|e| csv_error(path, e))?;
        p_fl.push(r.p_fl);
        p_sl.push(r.p_sl);
        d.push(r.delta_d);
        dg.push(r.delta_dg);
    }
    if p_fl.len() != periods {
        return Err(Error::LengthMismatch { expected: periods, found: p_fl.len() });
    }
    TimeSeries::new(p_fl, p_sl, d, dg)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let (line, column) = match e.position() {
        Some(p) => (p.line() as usize, 1),
        None => (0, 0),
    };
    if let csv::ErrorKind::Io(_) = e.kind() {
        return match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        };
    }
    Error::Parse { path: path.to_path_buf(), line, column, msg: e.to_string() }
}

pub fn write_timeseries(path: impl AsRef<Path>, ts: &TimeSeries) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Invalid(e.to_string()))?;
    w.write_record(["t", "p_fl", "p_sl", "delta_d", "delta_dg"]).map_err(|e| Error::Invalid(e.to_string()))?;
    for t in 0..ts.periods() {
        w.write_record([
            t.to_string(),
            ts.p_fl[t].to_string(),
            ts.p_sl[t].to_string(),
            ts.delta_d[t].to_string(),
            ts.delta_dg[t].to_string(),
        ])
        .map_err(|e| Error::Invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_text(rows: usize, neg_at: Option<usize>) -> String {
        let mut s = String::from("t,p_fl,p_sl,delta_d,delta_dg\n");
        for t in 0..rows {
            let m = if Some(t) == neg_at { -0.1 } else { 1.0 };
            s += &format!("{t},20,25,{m},0.5\n");
        }
        s
    }

    fn load(text: &str, periods: usize) -> Result<TimeSeries> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ts.csv");
        std::fs::write(&p, text).unwrap();
        load_timeseries(&p, periods)
    }

    #[test]
    fn period_lengths() {
        let a = load(&csv_text(24, None), 24).unwrap();
        assert_eq!((a.periods(), a.dt), (24, 1.0));
        let b = load(&csv_text(96, None), 96).unwrap();
        assert_eq!((b.periods(), b.dt), (96, 0.25));
    }

    #[test]
    fn wrong_length_and_negative_multiplier() {
        assert!(matches!(load(&csv_text(23, None), 24), Err(Error::LengthMismatch { expected: 24, found: 23 })));
        assert!(matches!(
            load(&csv_text(24, Some(5)), 24),
            Err(Error::NegativeMultiplier { period: 5, .. })
        ));
    }

    #[test]
    fn malformed_row_is_a_parse_error() {
        let text = "t,p_fl,p_sl,delta_d,delta_dg\n0,20,abc,1,1\n";
        assert!(matches!(load(text, 1), Err(Error::Parse { line: 2, .. })));
    }
}
