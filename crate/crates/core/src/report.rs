//! Tabular output shared by the experiment drivers and the CLI.

use std::io::Write;

use crate::error::Result;

/// Significant digits used for every floating-point CSV field.
pub const CSV_SIG_DIGITS: usize = 10;

/// Plain decimal rendering with [`CSV_SIG_DIGITS`] significant digits and trailing zeros
/// removed. Non-finite values render as `nan`, `inf` or `-inf`.
pub fn format_sig(value: f64) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".into()
        } else if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if value == 0.0 {
        return "0".into();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (CSV_SIG_DIGITS as i32 - 1 - magnitude).clamp(0, 30) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Column index by header name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parsed numeric value of a cell.
    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.rows.get(row)?.get(col)?.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(format_sig(6.111_600_123_456_7), "6.111600123");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(-5.0), "-5");
        assert_eq!(format_sig(12_345.678_901_234), "12345.6789");
        assert_eq!(format_sig(0.000_123_456_789_012_3), "0.000123456789");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(f64::NAN), "nan");
    }

    #[test]
    fn table_round_trip_through_csv_text() {
        let mut t = CsvTable::new(["x", "y"]);
        t.push(vec!["1".into(), format_sig(0.25)]);
        assert_eq!(t.to_csv_string().unwrap(), "x,y\n1,0.25\n");
        assert_eq!(t.value(0, 1), Some(0.25));
        assert_eq!(t.column("y"), Some(1));
    }
}
