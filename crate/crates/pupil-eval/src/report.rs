//! Report writers: CSV summaries, a gnuplot-compatible curve file and an
//! optional side-by-side comparison against externally computed baselines.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::curve::{aggregate, RateCurve};
use crate::dataset::DataError;
use crate::runner::ImageOutcome;

/// One externally supplied baseline rate (`dataset,algorithm,rate` CSV,
/// rate at five pixels as a fraction).
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRow {
    pub dataset: String,
    pub algorithm: String,
    pub rate: f64,
}

/// Parse the baseline CSV body. An empty file yields an empty list, which
/// the reporter treats as "omit the comparison".
pub fn parse_baselines(text: &str) -> Result<Vec<BaselineRow>, DataError> {
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if idx == 0 && line.to_ascii_lowercase().starts_with("dataset,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(DataError::Parse {
                line: idx + 1,
                message: format!("expected `dataset,algorithm,rate`, got `{line}`"),
            });
        }
        let rate: f64 = fields[2].parse().map_err(|_| DataError::Parse {
            line: idx + 1,
            message: format!("bad rate `{}`", fields[2]),
        })?;
        rows.push(BaselineRow {
            dataset: fields[0].to_string(),
            algorithm: fields[1].to_string(),
            rate,
        });
    }
    Ok(rows)
}

/// Everything one report run wrote, for logging.
#[derive(Debug, Default)]
pub struct ReportFiles {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Write the standard report set: per-dataset rates, weighted and
/// unweighted aggregates, and a gnuplot data file. With baselines, a
/// comparison table at five pixels is added; an empty baseline list is
/// skipped with a warning.
pub fn write_reports(
    out_dir: &Path,
    curves: &[RateCurve],
    baselines: Option<&[BaselineRow]>,
) -> Result<ReportFiles, DataError> {
    fs::create_dir_all(out_dir)?;
    let mut files = ReportFiles::default();

    let mut rates_csv = String::from("dataset,error_px,rate\n");
    for curve in curves {
        for (e, rate) in curve.rates.iter().enumerate() {
            let _ = writeln!(rates_csv, "{},{e},{rate:.6}", curve.name);
        }
    }
    let path = out_dir.join("rates.csv");
    fs::write(&path, rates_csv)?;
    files.written.push(path);

    let weighted = aggregate(curves, true)?;
    let unweighted = aggregate(curves, false)?;
    let mut agg_csv = String::from("error_px,weighted_rate,unweighted_rate\n");
    for e in 0..=weighted.max_error() {
        let _ = writeln!(
            agg_csv,
            "{e},{:.6},{:.6}",
            weighted.rate_at(e),
            unweighted.rate_at(e)
        );
    }
    let path = out_dir.join("aggregate.csv");
    fs::write(&path, agg_csv)?;
    files.written.push(path);

    // Gnuplot data: one error column, one column per dataset.
    let mut dat = String::from("# error_px");
    for curve in curves {
        let _ = write!(dat, " {}", curve.name.replace(' ', "_"));
    }
    dat.push('\n');
    let max_error = curves.iter().map(RateCurve::max_error).min().unwrap_or(0);
    for e in 0..=max_error {
        let _ = write!(dat, "{e}");
        for curve in curves {
            let _ = write!(dat, " {:.6}", curve.rate_at(e));
        }
        dat.push('\n');
    }
    let path = out_dir.join("curves.dat");
    fs::write(&path, dat)?;
    files.written.push(path);

    if let Some(baselines) = baselines {
        if baselines.is_empty() {
            files
                .warnings
                .push("baseline file is empty; comparison omitted".to_string());
        } else {
            let mut algorithms: Vec<String> =
                baselines.iter().map(|b| b.algorithm.clone()).collect();
            algorithms.sort();
            algorithms.dedup();
            let mut cmp = String::from("dataset");
            for a in &algorithms {
                let _ = write!(cmp, ",{a}");
            }
            cmp.push_str(",ours\n");
            for curve in curves {
                let _ = write!(cmp, "{}", curve.name);
                for a in &algorithms {
                    match baselines
                        .iter()
                        .find(|b| b.dataset == curve.name && &b.algorithm == a)
                    {
                        Some(b) => {
                            let _ = write!(cmp, ",{:.6}", b.rate);
                        }
                        None => cmp.push(','),
                    }
                }
                let _ = writeln!(cmp, ",{:.6}", curve.rate_at(5));
            }
            let path = out_dir.join("comparison.csv");
            fs::write(&path, cmp)?;
            files.written.push(path);
        }
    }

    Ok(files)
}

/// Per-image log of one evaluation run.
pub fn write_image_log(path: &Path, outcomes: &[ImageOutcome]) -> Result<(), DataError> {
    let mut csv =
        String::from("filename,truth_x,truth_y,detected_x,detected_y,error_px,stage,valid,micros\n");
    for o in outcomes {
        let fmt_opt = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            o.filename,
            fmt_opt(o.truth.map(|t| t.0)),
            fmt_opt(o.truth.map(|t| t.1)),
            fmt_opt(o.center.map(|c| c.0)),
            fmt_opt(o.center.map(|c| c.1)),
            fmt_opt(o.error),
            o.stage,
            o.valid,
            o.micros
        );
    }
    fs::write(path, csv)?;
    Ok(())
}
