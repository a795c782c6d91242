//! Rendering of fit results into the files written by the commands.
//!
//! Everything is rendered to memory first so a run either writes its whole
//! output set or nothing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::quantile_sorted;
use crate::diagnostics::{PoolingReport, PosteriorSummary, SensitivityRow};
use crate::sampler::ChainDraws;
use crate::Result;

pub const HISTOGRAM_BINS: usize = 60;
/// Lower and upper percentiles bounding the density histograms.
pub const HISTOGRAM_RANGE: (f64, f64) = (0.001, 0.999);

/// A named file body awaiting a write.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    fn new(name: impl Into<String>, contents: impl Into<Vec<u8>>) -> Self {
        OutputFile {
            name: name.into(),
            contents: contents.into(),
        }
    }
}

/// Creates `dir` and writes every file into it.
pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for f in files {
        fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

fn csv_bytes<R: AsRef<[u8]>>(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<R>>,
) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn summary_csv(summary: &PosteriorSummary) -> Result<OutputFile> {
    let rows = summary.parameters.iter().map(|p| {
        let mut r = vec![p.name.clone(), p.mean.to_string(), p.sd.to_string()];
        r.extend(p.quantiles.iter().map(f64::to_string));
        r.push(p.rhat.to_string());
        r.push(p.ess.to_string());
        r
    });
    let header = [
        "parameter",
        "mean",
        "sd",
        "q2.5",
        "q25",
        "q50",
        "q75",
        "q97.5",
        "rhat",
        "ess",
    ];
    Ok(OutputFile::new("summary.csv", csv_bytes(&header, rows)?))
}

/// Per-site rows followed by a `sigma_tilde` row (value in the `sigma_hat`
/// column) and an `omega_bar` row (value in the `omega_s` column).
pub fn pooling_csv(report: &PoolingReport) -> Result<OutputFile> {
    let mut rows: Vec<Vec<String>> = report
        .sites
        .iter()
        .map(|s| {
            vec![
                s.site_name.clone(),
                s.sigma_hat.to_string(),
                s.omega.to_string(),
            ]
        })
        .collect();
    rows.push(vec![
        "sigma_tilde".into(),
        report.sigma_tilde.to_string(),
        String::new(),
    ]);
    rows.push(vec![
        "omega_bar".into(),
        String::new(),
        report.omega_bar.to_string(),
    ]);
    let bytes = csv_bytes(&["site", "sigma_hat", "omega_s"], rows)?;
    Ok(OutputFile::new("pooling.csv", bytes))
}

pub fn sensitivity_csv(rows: &[SensitivityRow]) -> Result<OutputFile> {
    let fmt = |v: Option<f64>| v.map_or_else(|| "NaN".to_string(), |x| x.to_string());
    let body = rows.iter().map(|r| {
        vec![
            r.scenario.to_string(),
            fmt(r.sigma_tilde()),
            fmt(r.omega_bar()),
        ]
    });
    let bytes = csv_bytes(&["scenario", "sigma_tilde", "omega_bar"], body)?;
    Ok(OutputFile::new("sensitivity.csv", bytes))
}

/// Maps a parameter name such as `tau_s[3]` or `Omega[1,2]` to a file-safe
/// stem (`tau_s_3`, `Omega_1_2`).
pub fn sanitize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_end_matches('_').to_string()
}

/// Equal-width bins between the histogram percentiles. Draws outside the
/// range are not counted; the last bin includes its right edge.
pub fn histogram(draws: &[f64]) -> Vec<(f64, f64, usize)> {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut lo = quantile_sorted(&sorted, HISTOGRAM_RANGE.0);
    let mut hi = quantile_sorted(&sorted, HISTOGRAM_RANGE.1);
    if !(hi > lo) {
        let pad = 1e-6 * lo.abs().max(1.0);
        lo -= pad;
        hi += pad;
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &x in &sorted {
        if x < lo || x > hi {
            continue;
        }
        let b = (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            let left = lo + b as f64 * width;
            let right = if b + 1 == HISTOGRAM_BINS {
                hi
            } else {
                lo + (b + 1) as f64 * width
            };
            (left, right, c)
        })
        .collect()
}

pub fn density_files(draws: &ChainDraws) -> Result<Vec<OutputFile>> {
    draws
        .parameter_names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let rows = histogram(&draws.pooled(i))
                .into_iter()
                .map(|(l, r, c)| vec![l.to_string(), r.to_string(), c.to_string()]);
            let bytes = csv_bytes(&["bin_left", "bin_right", "count"], rows)?;
            Ok(OutputFile::new(
                format!("density_{}.csv", sanitize_name(name)),
                bytes,
            ))
        })
        .collect()
}

/// Divergence counts and adaptation results per chain.
pub fn diagnostics_txt(draws: &ChainDraws, summary: &PosteriorSummary) -> OutputFile {
    let mut s = String::new();
    for (c, chain) in draws.chains.iter().enumerate() {
        let _ = writeln!(
            s,
            "chain {}: divergences {} (warmup {}), step size {}, mean acceptance {}",
            c + 1,
            chain.divergences(),
            chain.warmup_divergences,
            chain.step_size,
            chain.mean_accept_prob()
        );
    }
    let _ = writeln!(s, "total divergences: {}", draws.total_divergences());
    let _ = writeln!(s, "max rhat: {}", summary.max_rhat());
    OutputFile::new("diagnostics.txt", s)
}
