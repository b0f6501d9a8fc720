//! Output helpers. Floats are written in shortest round-trip form, so every
//! CSV value parses back to the identical `f64`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value).map_err(|e| crate::Error::Io(e.to_string()))?;
    fs::write(path, text)?;
    Ok(())
}

/// File-name label of a time, e.g. `0.125` -> `t0.125`.
pub fn time_label(t: f64) -> String {
    format!("t{t}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct SiteRow {
    pub i: usize,
    pub r: f64,
    pub p: f64,
    pub e: f64,
}

pub fn chain_rows(state: &crate::chain::ChainState, pot: &crate::Potential) -> Vec<SiteRow> {
    (0..state.n())
        .map(|l| SiteRow { i: l + 1, r: state.r[l], p: state.p[l], e: state.site_energy(l, pot) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let rows: Vec<SiteRow> = (1..50usize)
            .map(|k| {
                let v = (k as f64).sqrt() * std::f64::consts::PI.powi((k % 7) as i32) * 1e-3f64.powi((k % 5) as i32);
                SiteRow { i: k, r: v, p: -v / 3.0, e: 1.0 / v }
            })
            .collect();
        write_csv(&path, &rows).unwrap();
        let back: Vec<SiteRow> = csv::Reader::from_path(&path).unwrap().deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(rows, back);
    }
}
