//! CSV tables. Floats are written with 17 significant digits.

use std::path::Path;

use crate::error::{Error, Result};
use crate::observables::ObservableRecord;
use crate::spectral::{coherence, EnergyBasis};
use crate::weakvalues::WeakValueKind;

pub(crate) fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Column names of `observables.csv` for `n` particles.
pub fn observable_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for name in ["x_mean", "p_mean", "x_rms", "p_rms"] {
        cols.extend((1..=n).map(|j| format!("{name}_{j}")));
    }
    cols.extend(["kinetic", "v_trap", "v_disorder", "v_coulomb", "total"].map(String::from));
    cols
}

pub fn write_observables(path: &Path, records: &[ObservableRecord]) -> Result<()> {
    let n = records.first().map_or(1, ObservableRecord::n_particles);
    let mut w = writer(path)?;
    w.write_record(observable_columns(n))?;
    for r in records {
        let mut row = vec![float(r.time)];
        for series in [&r.x_mean, &r.p_mean, &r.x_rms, &r.p_rms] {
            row.extend(series.iter().map(|&v| float(v)));
        }
        row.extend([r.kinetic, r.v_trap, r.v_disorder, r.v_coulomb, r.total].map(float));
        w.write_record(row)?;
    }
    finish(w, path)
}

/// One weak value at one evaluation point and time.
#[derive(Clone, Debug, PartialEq)]
pub struct WeakValueRow {
    pub time: f64,
    pub x: f64,
    /// `NaN` when masked.
    pub value: f64,
    pub kind: WeakValueKind,
    /// `⟨p_1⟩` at the same time.
    pub p_mean: f64,
}

impl WeakValueRow {
    pub fn masked(&self) -> bool {
        self.value.is_nan()
    }
}

pub const WEAKVALUE_COLUMNS: [&str; 6] = ["t", "x", "value", "masked", "kind", "p_mean"];

pub fn write_weakvalues(path: &Path, rows: &[WeakValueRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(WEAKVALUE_COLUMNS)?;
    for r in rows {
        w.write_record([
            float(r.time),
            float(r.x),
            float(r.value),
            u8::from(r.masked()).to_string(),
            r.kind.to_string(),
            float(r.p_mean),
        ])?;
    }
    finish(w, path)
}

/// `n, E_n, ΔE_n = E_{n+1} − E_n, |c_n|²`; the last spacing is `NaN`.
pub fn write_spectrum(path: &Path, basis: &EnergyBasis) -> Result<()> {
    let e = basis.eigenvalues();
    let pops = basis.populations();
    let mut w = writer(path)?;
    w.write_record(["n", "energy", "spacing", "population"])?;
    for n in 0..e.len() {
        let spacing = e.get(n + 1).map_or(f64::NAN, |next| next - e[n]);
        w.write_record([n.to_string(), float(e[n]), float(spacing), float(pops[n])])?;
    }
    finish(w, path)
}

pub fn write_coherence(path: &Path, basis: &EnergyBasis, pairs: &[(usize, usize)], times: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "n", "m", "re", "im", "abs"])?;
    for &t in times {
        for &(n, m) in pairs {
            let rho = coherence(basis, n, m, t)?;
            w.write_record([float(t), n.to_string(), m.to_string(), float(rho.re), float(rho.im), float(rho.norm())])?;
        }
    }
    finish(w, path)
}

/// Named numeric columns of equal length.
pub fn write_columns(path: &Path, columns: &[(&str, &[f64])]) -> Result<()> {
    let len = columns.first().map_or(0, |c| c.1.len());
    if columns.iter().any(|c| c.1.len() != len) {
        return Err(Error::invalid("columns of unequal length"));
    }
    let mut w = writer(path)?;
    w.write_record(columns.iter().map(|c| c.0))?;
    for i in 0..len {
        w.write_record(columns.iter().map(|c| float(c.1[i])))?;
    }
    finish(w, path)
}

/// A CSV file held as strings, with `#` comment lines skipped.
#[derive(Clone, Debug)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
        let header = reader.headers()?.iter().map(String::from).collect();
        let rows = reader
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Table { header, rows })
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::invalid(format!("missing column `{name}`")))
    }

    /// Column parsed as floats; unparsable cells become `NaN`.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.index(name)?;
        Ok(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_full_precision() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(float(f64::NAN), "NaN");
    }

    #[test]
    fn weakvalue_rows_round_trip_through_a_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.csv");
        let rows = vec![
            WeakValueRow { time: 0.5, x: -4.0, value: 1.25, kind: WeakValueKind::Pair { j: 0, k: 1 }, p_mean: 3.0 },
            WeakValueRow { time: 0.5, x: 0.0, value: f64::NAN, kind: WeakValueKind::Identical, p_mean: 3.0 },
        ];
        write_weakvalues(&path, &rows).unwrap();
        let table = Table::read(&path).unwrap();
        assert_eq!(table.header, WEAKVALUE_COLUMNS);
        assert_eq!(table.rows[0][4], "pair(1,2)");
        assert_eq!(table.rows[1][3], "1");
        assert!(table.column("value").unwrap()[1].is_nan());
        assert_eq!(table.column("p_mean").unwrap(), vec![3.0, 3.0]);
    }

    #[test]
    fn observable_header_is_per_particle() {
        let cols = observable_columns(2);
        assert_eq!(cols.len(), 1 + 8 + 5);
        assert_eq!(cols[1], "x_mean_1");
        assert_eq!(cols[4], "p_mean_2");
    }
}
