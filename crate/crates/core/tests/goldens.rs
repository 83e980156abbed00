//! Regression goldens for the figure scans. Regenerate with
//! `SQZPSK_BLESS=1 cargo test -p sqzpsk-core --test goldens`.

use std::path::PathBuf;

use sqzpsk_core::{scan, FigureId, ScanRequest, ScanSettings, ScanTable};

const GOLDEN_TOL: f64 = 1e-9;

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(format!("{name}.json"))
}

fn check(id: FigureId, resolution: usize) {
    let settings = ScanSettings {
        resolution,
        ..ScanSettings::default()
    };
    let table = scan(&ScanRequest::Figure(id), &settings).unwrap();
    let path = golden_path(id.name());
    if std::env::var_os("SQZPSK_BLESS").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(&table).unwrap()).unwrap();
        return;
    }
    let golden: ScanTable = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(table.axis_names, golden.axis_names);
    assert_eq!(table.axis_grids, golden.axis_grids);
    assert_eq!(table.series_names, golden.series_names);
    assert_eq!(table.values.len(), golden.values.len());
    for (row, (got, want)) in table.values.iter().zip(&golden.values).enumerate() {
        let same = (got.is_nan() && want.is_nan()) || got == want || (got - want).abs() <= GOLDEN_TOL;
        assert!(same, "{} value {row}: {got:e} vs golden {want:e}", id.name());
    }
}

#[test]
fn fig1_left() {
    check(FigureId::Fig1Left, 9);
}

#[test]
fn fig2_right() {
    check(FigureId::Fig2Right, 7);
}

#[test]
fn fig3() {
    check(FigureId::Fig3, 9);
}

#[test]
fn fig4_left() {
    check(FigureId::Fig4Left, 5);
}

#[test]
fn fig5_right() {
    check(FigureId::Fig5Right, 9);
}
