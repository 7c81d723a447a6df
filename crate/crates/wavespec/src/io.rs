//! CSV ingestion, preprocessing, and artifact emission for the CLI.
//!
//! Two input layouts are accepted:
//! - wide: first column is the time index; every other column is one series
//!   with a `group:id` header (for example `wt:rep1`);
//! - long: columns `series_id,group,time,value`.
//!
//! All four tests are two-sample, so exactly two distinct group labels are
//! required. Preprocessing truncates each series to a dyadic length and
//! mean-centres it.

use std::collections::BTreeMap;
use std::path::Path;

use crate::barcode::{render_barcode, BarcodeArtifact};
use crate::error::{Error, Result};
use crate::harness::run_test_on_series;
use crate::htest::{CellCoord, TestConfig, TestKind, TestResult};
use crate::wavelet::{inner_product_matrix, InnerProductMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRecord {
    pub id: String,
    pub group: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub series: Vec<SeriesRecord>,
    /// The two group labels, in first-appearance order.
    pub groups: [String; 2],
    /// Human-readable note of what preprocessing kept.
    pub truncation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvFormat {
    Wide,
    Long,
}

/// How to cut each series down to a dyadic length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationMode {
    /// Drop leading samples, keep the end of the recording.
    TruncateHead,
    /// Drop trailing samples, keep the start.
    TruncateTail,
    /// Keep the longest dyadic stretch starting at this 0-based index.
    Segment(usize),
}

fn parse_value(cell: &str, row: usize) -> Result<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return Err(Error::Input(format!("row {row}: missing value")));
    }
    trimmed
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("row {row}: non-numeric cell {trimmed:?}")))
}

fn validate_groups(series: &[SeriesRecord]) -> Result<[String; 2]> {
    let mut groups: Vec<String> = Vec::new();
    for s in series {
        if !groups.contains(&s.group) {
            groups.push(s.group.clone());
        }
    }
    match <[String; 2]>::try_from(groups) {
        Ok(two) => Ok(two),
        Err(labels) => Err(Error::Input(format!(
            "exactly two group labels required, found {}: {labels:?}",
            labels.len()
        ))),
    }
}

fn finish_dataset(series: Vec<SeriesRecord>) -> Result<Dataset> {
    if series.is_empty() {
        return Err(Error::Input("no series found".into()));
    }
    let len = series[0].values.len();
    for s in &series {
        if s.values.len() != len {
            return Err(Error::Input(format!(
                "series {} has length {}, expected {len}",
                s.id,
                s.values.len()
            )));
        }
    }
    let groups = validate_groups(&series)?;
    Ok(Dataset {
        series,
        groups,
        truncation: None,
    })
}

/// Parse a grouped-series CSV string.
pub fn parse_csv(text: &str, format: CsvFormat) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Input("empty CSV".into()))?;
    let header: Vec<&str> = header.split(',').map(str::trim).collect();
    match format {
        CsvFormat::Wide => {
            if header.len() < 2 {
                return Err(Error::Input("wide CSV needs a time column and series columns".into()));
            }
            let mut series: Vec<SeriesRecord> = header[1..]
                .iter()
                .enumerate()
                .map(|(c, cell)| {
                    let (group, id) = cell.split_once(':').ok_or_else(|| {
                        Error::Input(format!(
                            "column {}: header {cell:?} is not group:id",
                            c + 2
                        ))
                    })?;
                    Ok(SeriesRecord {
                        id: id.trim().to_string(),
                        group: group.trim().to_string(),
                        values: Vec::new(),
                    })
                })
                .collect::<Result<_>>()?;
            for (lineno, line) in lines {
                let cells: Vec<&str> = line.split(',').collect();
                if cells.len() != header.len() {
                    return Err(Error::Input(format!(
                        "row {}: {} cells, expected {}",
                        lineno + 1,
                        cells.len(),
                        header.len()
                    )));
                }
                for (s, cell) in series.iter_mut().zip(&cells[1..]) {
                    s.values.push(parse_value(cell, lineno + 1)?);
                }
            }
            finish_dataset(series)
        }
        CsvFormat::Long => {
            if header != ["series_id", "group", "time", "value"] {
                return Err(Error::Input(
                    "long CSV header must be series_id,group,time,value".into(),
                ));
            }
            // (id, group) -> (time, value); order preserved by first appearance
            let mut order: Vec<(String, String)> = Vec::new();
            let mut data: BTreeMap<(String, String), Vec<(i64, f64)>> = BTreeMap::new();
            for (lineno, line) in lines {
                let cells: Vec<&str> = line.split(',').map(str::trim).collect();
                if cells.len() != 4 {
                    return Err(Error::Input(format!(
                        "row {}: {} cells, expected 4",
                        lineno + 1,
                        cells.len()
                    )));
                }
                let key = (cells[0].to_string(), cells[1].to_string());
                let time = cells[2].parse::<i64>().map_err(|_| {
                    Error::Input(format!("row {}: bad time index {:?}", lineno + 1, cells[2]))
                })?;
                let value = parse_value(cells[3], lineno + 1)?;
                if !data.contains_key(&key) {
                    order.push(key.clone());
                }
                data.entry(key).or_default().push((time, value));
            }
            let series: Vec<SeriesRecord> = order
                .into_iter()
                .map(|key| {
                    let mut rows = data.remove(&key).unwrap();
                    rows.sort_by_key(|&(t, _)| t);
                    SeriesRecord {
                        id: key.0,
                        group: key.1,
                        values: rows.into_iter().map(|(_, v)| v).collect(),
                    }
                })
                .collect();
            finish_dataset(series)
        }
    }
}

/// Read and parse a grouped-series CSV file.
pub fn ingest_csv(path: &Path, format: CsvFormat) -> Result<Dataset> {
    parse_csv(&std::fs::read_to_string(path)?, format)
}

/// Cut every series to the largest dyadic length the mode allows, then
/// mean-centre each series individually.
pub fn preprocess(d: &Dataset, mode: TruncationMode) -> Result<Dataset> {
    let len = d.series[0].values.len();
    let (start, keep) = match mode {
        TruncationMode::TruncateHead => {
            let keep = largest_dyadic(len)?;
            (len - keep, keep)
        }
        TruncationMode::TruncateTail => (0, largest_dyadic(len)?),
        TruncationMode::Segment(start) => {
            if start >= len {
                return Err(Error::Input(format!(
                    "segment start {start} beyond series length {len}"
                )));
            }
            (start, largest_dyadic(len - start)?)
        }
    };
    let series = d
        .series
        .iter()
        .map(|s| {
            let mut values: Vec<f64> = s.values[start..start + keep].to_vec();
            let mean = values.iter().sum::<f64>() / keep as f64;
            for v in values.iter_mut() {
                *v -= mean;
            }
            SeriesRecord {
                id: s.id.clone(),
                group: s.group.clone(),
                values,
            }
        })
        .collect();
    Ok(Dataset {
        series,
        groups: d.groups.clone(),
        truncation: Some(format!("kept rows {start}..{} of {len}", start + keep)),
    })
}

fn largest_dyadic(len: usize) -> Result<usize> {
    if len < 8 {
        return Err(Error::Input(format!(
            "need at least 8 samples, have {len}"
        )));
    }
    Ok(1usize << (usize::BITS - 1 - len.leading_zeros()))
}

/// Everything `run_test_cli` produces.
#[derive(Debug, Clone)]
pub struct CliArtifacts {
    pub result: TestResult,
    pub rejection_csv: String,
    pub barcode_svg: String,
    pub summary: String,
}

/// Rejection table: one row per cell, `level,time_index,statistic,p_value,rejected`.
///
/// For the Haar-coefficient test the `time_index` column enumerates cells in
/// canonical (scale-major, location-minor) order within each level.
pub fn rejection_csv(result: &TestResult) -> String {
    let mut out = String::from("level,time_index,statistic,p_value,rejected\n");
    let mut haar_counter: BTreeMap<usize, usize> = BTreeMap::new();
    for cell in &result.cells {
        let (level, time) = match cell.coord {
            CellCoord::TimeScale { level, time } => (level, time),
            CellCoord::Haar { level, .. } => {
                let c = haar_counter.entry(level).or_insert(0);
                let t = *c;
                *c += 1;
                (level, t)
            }
        };
        out.push_str(&format!(
            "{level},{time},{:.17e},{:.17e},{}\n",
            cell.statistic,
            cell.p_value,
            u8::from(cell.rejected)
        ));
    }
    out
}

/// Parse the rejection mask back out of [`rejection_csv`] output.
pub fn parse_rejection_csv(text: &str) -> Result<Vec<(usize, usize, bool)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 5 {
            return Err(Error::Input(format!("row {}: bad rejection row", lineno + 1)));
        }
        let level = cells[0]
            .parse::<usize>()
            .map_err(|_| Error::Input(format!("row {}: bad level", lineno + 1)))?;
        let time = cells[1]
            .parse::<usize>()
            .map_err(|_| Error::Input(format!("row {}: bad time index", lineno + 1)))?;
        out.push((level, time, cells[4].trim() == "1"));
    }
    Ok(out)
}

fn summary_text(result: &TestResult) -> String {
    let total = result.cells.len();
    let mut per_level: BTreeMap<usize, usize> = BTreeMap::new();
    for cell in &result.cells {
        if cell.rejected {
            let level = match cell.coord {
                CellCoord::TimeScale { level, .. } | CellCoord::Haar { level, .. } => level,
            };
            *per_level.entry(level).or_insert(0) += 1;
        }
    }
    let mut out = format!(
        "test: {}\ncorrection: {}\nalpha: {}\ncells: {total}\nrejections: {} ({:.2}% of cells)\nglobal: {}\n",
        result.test_kind,
        result.correction,
        result.alpha,
        result.n_rejections,
        100.0 * result.n_rejections as f64 / total as f64,
        if result.reject_global { "REJECT" } else { "no difference detected" },
    );
    for (level, count) in per_level {
        out.push_str(&format!("level {level}: {count} rejections\n"));
    }
    out
}

/// Split a preprocessed dataset into its two groups, in label order.
pub fn split_groups(d: &Dataset) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let pick = |label: &str| -> Vec<Vec<f64>> {
        d.series
            .iter()
            .filter(|s| s.group == label)
            .map(|s| s.values.clone())
            .collect()
    };
    (pick(&d.groups[0]), pick(&d.groups[1]))
}

/// Run one test on a preprocessed dataset and build all artifacts; writes
/// them to `out_dir` when given.
pub fn run_test_cli(
    d: &Dataset,
    test: TestKind,
    cfg: &TestConfig,
    a: &InnerProductMatrix,
    out_dir: Option<&Path>,
) -> Result<CliArtifacts> {
    let (group1, group2) = split_groups(d);
    let result = run_test_on_series(&group1, &group2, test, cfg, a)?;
    let t_len = d.series[0].values.len();
    let levels = t_len.trailing_zeros() as usize;
    let barcode = BarcodeArtifact::from_result(&result, levels, t_len);
    let artifacts = CliArtifacts {
        rejection_csv: rejection_csv(&result),
        barcode_svg: render_barcode(&barcode),
        summary: summary_text(&result),
        result,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("rejections.csv"), &artifacts.rejection_csv)?;
        std::fs::write(dir.join("barcode.svg"), &artifacts.barcode_svg)?;
        std::fs::write(dir.join("summary.txt"), &artifacts.summary)?;
    }
    Ok(artifacts)
}

/// Convenience wrapper building the inner-product matrix for the dataset.
pub fn run_test_on_dataset(
    d: &Dataset,
    test: TestKind,
    cfg: &TestConfig,
    out_dir: Option<&Path>,
) -> Result<CliArtifacts> {
    let levels = d.series[0].values.len().trailing_zeros() as usize;
    let a = inner_product_matrix(levels)?;
    run_test_cli(d, test, cfg, &a, out_dir)
}
