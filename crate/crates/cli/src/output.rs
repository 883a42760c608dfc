use std::path::Path;

use maslovlab::maslov::ThetaCurves;
use maslovlab::spectral_flow::EigenCurves;

use crate::failure::Failure;

fn write_rows(path: &Path, header: [&str; 3], s: &[f64], rows: &[Vec<f64>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (si, row) in s.iter().zip(rows) {
        for (j, v) in row.iter().enumerate() {
            w.serialize((si, j, v))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_theta(path: &Path, curves: &ThetaCurves) -> Result<(), Failure> {
    write_rows(path, ["s", "branch_index", "theta"], &curves.s, &curves.theta)
}

pub fn write_eigen(path: &Path, curves: &EigenCurves) -> Result<(), Failure> {
    write_rows(path, ["s", "eig_index", "value"], &curves.s, &curves.values)
}
