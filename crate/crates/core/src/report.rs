//! CSV and JSON emission. Floats use Rust's shortest round-trip formatting so
//! identical inputs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::symexpr::C64;
use crate::spectra::{MatchedEigenvalue, SplitRow};
use crate::verify::VerifyReport;

pub use crate::resonance::census_csv;

pub const MATCH_FIELDS: [&str; 9] =
    ["xi", "mode", "lambda_pred", "lambda_matched", "overlap", "residual", "nonresonant", "ambiguous", "cluster"];

pub const SPLIT_FIELDS: [&str; 4] = ["xi", "norm", "difference", "resolved"];

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn matches_csv(rows: &[MatchedEigenvalue]) -> String {
    let mut s = MATCH_FIELDS.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            join(&r.xi),
            join(&r.mode.0),
            r.lambda_pred,
            r.lambda_matched,
            r.overlap,
            r.residual,
            r.nonresonant,
            r.ambiguous,
            r.cluster
        ));
    }
    s
}

pub fn splitting_csv(rows: &[SplitRow]) -> String {
    let mut s = SPLIT_FIELDS.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", join(&r.xi), r.norm, r.difference, r.resolved));
    }
    s
}

/// One row per ξ: the point, Re and Im of each z_j, then λ(ξ).
pub fn z_table_csv(levels: usize, rows: &[(Vec<f64>, Vec<C64>, f64)]) -> String {
    let mut s = String::from("xi");
    for j in 0..levels {
        s.push_str(&format!(",re_z{j},im_z{j}"));
    }
    s.push_str(",lambda\n");
    for (xi, z, lambda) in rows {
        s.push_str(&join(xi));
        for v in z {
            s.push_str(&format!(",{},{}", v.re, v.im));
        }
        s.push_str(&format!(",{lambda}\n"));
    }
    s
}

pub fn spectrum_csv(values: &[f64]) -> String {
    let mut s = String::from("index,lambda\n");
    for (i, v) in values.iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn summary_lines(report: &VerifyReport) -> Vec<String> {
    report
        .criteria
        .iter()
        .map(|c| format!("criterion {:>2}: {} {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title))
        .collect()
}

/// Writes `contents` to `dir/name`, creating `dir`.
pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}
