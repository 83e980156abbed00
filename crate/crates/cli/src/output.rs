//! Text, CSV and JSON rendering of a result table.

use std::fmt::Write as _;

use sqzpsk_core::ScanTable;

use crate::config::Format;

/// Twelve significant digits, fixed notation in `[1e-3, 1e6)` and scientific
/// otherwise, trailing zeros removed.
pub fn significant(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let mag = v.abs();
    if (1e-3..1e6).contains(&mag) {
        let decimals = (11 - mag.log10().floor() as i32).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_fraction(&s).to_string()
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, exp) = s.split_once('e').expect("scientific format");
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Full precision: `{:.16e}` round-trips every `f64` exactly.
pub fn exact(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(table: &ScanTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# name: {}", table.name);
    for (k, v) in &table.metadata {
        let _ = writeln!(out, "# {k}: {v}");
    }
    out
}

pub fn csv(table: &ScanTable) -> String {
    let mut out = header(table);
    let columns: Vec<&str> = table
        .axis_names
        .iter()
        .chain(&table.series_names)
        .map(String::as_str)
        .collect();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in 0..table.points() {
        let cells: Vec<String> = table
            .coordinates(row)
            .into_iter()
            .chain(table.row(row).iter().copied())
            .map(exact)
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn json(table: &ScanTable) -> String {
    let mut s = serde_json::to_string_pretty(table).expect("table serializes");
    s.push('\n');
    s
}

/// Renders the table. Text output is the headline value alone on a terminal
/// and carries the metadata header when written to a file.
pub fn render(table: &ScanTable, headline: Option<f64>, format: Format, to_file: bool) -> String {
    match (format, headline) {
        (Format::Json, _) => json(table),
        (Format::Csv, _) | (Format::Text, None) => csv(table),
        (Format::Text, Some(v)) => {
            let line = format!("{}\n", significant(v));
            if to_file {
                header(table) + &line
            } else {
                line
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(significant(0.8), "0.8");
        assert_eq!(significant(0.004600070369588713), "0.00460007036959");
        assert_eq!(significant(8.387269160402486e-5), "8.3872691604e-5");
        assert_eq!(significant(1.0), "1");
        assert_eq!(significant(f64::INFINITY), "inf");
        assert_eq!(significant(0.0), "0");
        assert_eq!(significant(-2.5e-7), "-2.5e-7");
    }

    #[test]
    fn exact_round_trips() {
        for v in [0.1, 1.0 / 3.0, 4.600070369588713e-3, 1e-300, f64::MAX] {
            assert_eq!(exact(v).parse::<f64>().unwrap(), v);
        }
    }
}
