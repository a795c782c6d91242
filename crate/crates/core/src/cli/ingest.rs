//! CSV ingestion for site summaries, households and site-level predictors.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord};
use serde::{Deserialize, Serialize};

use crate::mathcore::Matrix;
use crate::models::{validate_sites, DesignMatrices, HouseholdRecord, SiteSummary};
use crate::{Error, Result};

/// Which individual-level design to assemble from household files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HouseholdMode {
    /// `X = (1, treatment)`; any baseline column is ignored.
    Model2,
    /// `X = (1, treatment, y_baseline)`.
    Model2Bis,
}

/// A CSV table with column lookup by header name.
struct Table<'a> {
    path: &'a Path,
    headers: StringRecord,
    rows: Vec<(u64, StringRecord)>,
}

impl<'a> Table<'a> {
    fn read(path: &'a Path, reader: impl Read) -> Result<Self> {
        let mut rdr = ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.iter().all(str::is_empty) {
                continue;
            }
            rows.push((line, rec));
        }
        Ok(Table {
            path,
            headers,
            rows,
        })
    }

    fn open(path: &'a Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::Validation(format!("cannot open {}: {e}", path.display())))?;
        Table::read(path, file)
    }

    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| self.missing(name, 1))
    }

    fn missing(&self, column: &str, line: u64) -> Error {
        Error::MissingColumn {
            path: self.path.to_path_buf(),
            column: column.to_string(),
            line,
        }
    }

    /// The raw cell, or a missing-column error for short rows.
    fn cell<'r>(&self, line: u64, rec: &'r StringRecord, col: usize) -> Result<&'r str> {
        rec.get(col)
            .ok_or_else(|| self.missing(&self.headers[col], line))
    }

    fn number(&self, line: u64, rec: &StringRecord, col: usize) -> Result<f64> {
        let raw = self.cell(line, rec, col)?;
        raw.parse::<f64>().map_err(|_| {
            Error::Validation(format!(
                "{} line {line}: `{}` value `{raw}` is not a number",
                self.path.display(),
                &self.headers[col]
            ))
        })
    }

    fn index(&self, line: u64, rec: &StringRecord, col: usize) -> Result<usize> {
        let raw = self.cell(line, rec, col)?;
        raw.parse::<usize>().map_err(|_| {
            Error::Validation(format!(
                "{} line {line}: `{}` value `{raw}` is not a positive integer",
                self.path.display(),
                &self.headers[col]
            ))
        })
    }
}

/// Reads `site,tau_hat,sigma_hat` rows in file order.
pub fn ingest_sites(path: &Path) -> Result<Vec<SiteSummary>> {
    parse_sites(path, Table::open(path)?)
}

/// [`ingest_sites`] over an in-memory reader; `path` only labels errors.
pub fn read_sites(path: &Path, reader: impl Read) -> Result<Vec<SiteSummary>> {
    parse_sites(path, Table::read(path, reader)?)
}

fn parse_sites(path: &Path, table: Table<'_>) -> Result<Vec<SiteSummary>> {
    let site = table.require("site")?;
    let tau = table.require("tau_hat")?;
    let sigma = table.require("sigma_hat")?;
    let mut sites = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        sites.push(SiteSummary::new(
            table.cell(*line, rec, site)?,
            table.number(*line, rec, tau)?,
            table.number(*line, rec, sigma)?,
        ));
    }
    if sites.is_empty() {
        return Err(Error::Validation(format!(
            "{} has no site rows",
            path.display()
        )));
    }
    validate_sites(&sites)?;
    Ok(sites)
}

/// Writes sites in the format read by [`ingest_sites`].
pub fn write_sites(writer: impl Write, sites: &[SiteSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["site", "tau_hat", "sigma_hat"])?;
    for s in sites {
        w.write_record([
            s.site_name.clone(),
            s.tau_hat.to_string(),
            s.sigma_hat.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Site-level predictors keyed by one-based site index. The returned matrix
/// carries a leading intercept column.
pub fn ingest_site_predictors(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let table = Table::open(path)?;
    let index = table.require("site_index")?;
    let names: Vec<String> = table
        .headers
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != index)
        .map(|(_, h)| h.to_string())
        .collect();
    let mut by_site = BTreeMap::new();
    for (line, rec) in &table.rows {
        let s = table.index(*line, rec, index)?;
        let mut row = vec![1.0];
        for c in (0..table.headers.len()).filter(|&c| c != index) {
            row.push(table.number(*line, rec, c)?);
        }
        if by_site.insert(s, row).is_some() {
            return Err(Error::Validation(format!(
                "{} line {line}: duplicate site_index {s}",
                path.display()
            )));
        }
    }
    let s_count = by_site.len();
    if s_count == 0 {
        return Err(Error::Validation(format!(
            "{} has no site rows",
            path.display()
        )));
    }
    if by_site.keys().copied().ne(1..=s_count) {
        return Err(Error::Validation(format!(
            "{}: site_index values must be exactly 1..={s_count}",
            path.display()
        )));
    }
    let rows: Vec<Vec<f64>> = by_site.into_values().collect();
    Ok((names, Matrix::from_rows(&rows)?))
}

/// Reads households and site predictors and assembles the design matrices.
///
/// Every site listed in the predictor file must have at least one household,
/// and every household must reference a listed site.
pub fn ingest_households(
    path: &Path,
    sitepred: &Path,
    mode: HouseholdMode,
) -> Result<(Vec<HouseholdRecord>, DesignMatrices)> {
    let (_, z) = ingest_site_predictors(sitepred)?;
    let table = Table::open(path)?;
    let site = table.require("site_index")?;
    let y = table.require("y")?;
    let treatment = table.require("treatment")?;
    let baseline = match mode {
        HouseholdMode::Model2 => None,
        HouseholdMode::Model2Bis => Some(table.column("y_baseline").ok_or_else(|| {
            Error::Validation(format!(
                "{} has no `y_baseline` column, required when the baseline is a predictor",
                path.display()
            ))
        })?),
    };

    let mut households = Vec::with_capacity(table.rows.len());
    let mut no_baseline = Vec::new();
    for (line, rec) in &table.rows {
        let t = table.number(*line, rec, treatment)?;
        if t != 0.0 && t != 1.0 {
            return Err(Error::Validation(format!(
                "{} line {line}: treatment must be 0 or 1, found {t}",
                path.display()
            )));
        }
        let b = match baseline {
            Some(col) => match rec.get(col) {
                None | Some("") => {
                    no_baseline.push(*line);
                    None
                }
                Some(_) => Some(table.number(*line, rec, col)?),
            },
            None => None,
        };
        households.push(HouseholdRecord {
            site_index: table.index(*line, rec, site)?,
            y: table.number(*line, rec, y)?,
            treatment: t as u8,
            baseline: b,
        });
    }
    if !no_baseline.is_empty() {
        let lines: Vec<String> = no_baseline.iter().map(u64::to_string).collect();
        return Err(Error::Validation(format!(
            "{}: missing y_baseline on line(s) {}",
            path.display(),
            lines.join(", ")
        )));
    }
    if households.is_empty() {
        return Err(Error::Validation(format!(
            "{} has no household rows",
            path.display()
        )));
    }
    let s_count = z.rows();
    let mut seen = vec![false; s_count];
    for (h, (line, _)) in households.iter().zip(&table.rows) {
        if h.site_index == 0 || h.site_index > s_count {
            return Err(Error::Validation(format!(
                "{} line {line}: site_index {} outside 1..={s_count}",
                path.display(),
                h.site_index
            )));
        }
        seen[h.site_index - 1] = true;
    }
    if let Some(s) = seen.iter().position(|&v| !v) {
        return Err(Error::Validation(format!(
            "{}: site {} has no households; site indices must cover 1..={s_count}",
            path.display(),
            s + 1
        )));
    }
    let design = DesignMatrices::from_households(&households, z, mode == HouseholdMode::Model2Bis)?;
    Ok((households, design))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites_from(text: &str) -> Result<Vec<SiteSummary>> {
        read_sites(Path::new("sites.csv"), text.as_bytes())
    }

    #[test]
    fn reads_rows_in_order() {
        let s =
            sites_from("site,tau_hat,sigma_hat\nHonduras,0.02,0.044\nPeru,0.08,0.05\n").unwrap();
        assert_eq!(s[0], SiteSummary::new("Honduras", 0.02, 0.044));
        assert_eq!(s[1].site_name, "Peru");
    }

    #[test]
    fn zero_sigma_rejected() {
        let err = sites_from("site,tau_hat,sigma_hat\nX,0.1,0\n").unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains('X')),
            "{err}"
        );
    }

    #[test]
    fn wrong_header_names_column() {
        let err = sites_from("site,tau,se\nX,0.1,0.2\n").unwrap_err();
        match err {
            Error::MissingColumn { column, line, .. } => {
                assert_eq!(column, "tau_hat");
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn short_row_reports_line() {
        let err = sites_from("site,tau_hat,sigma_hat\nA,0.1,0.2\nB,0.3\n").unwrap_err();
        assert!(matches!(err, Error::MissingColumn { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_site_rejected() {
        let err = sites_from("site,tau_hat,sigma_hat\nA,0.1,0.2\nA,0.3,0.1\n").unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("duplicate")));
    }
}
