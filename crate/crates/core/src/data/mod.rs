//! File ingestion, validation, and persistence.
//!
//! Two CSV inputs drive everything (UTF-8, comma-delimited, `.` decimal
//! separator, header mandatory):
//!
//! * `features.csv` — `instance_id,f_0,...,f_{d-1}`, one row per instance.
//! * `performance.csv` — `instance_id,algorithm,rmsd_angstrom,pb_valid`, one
//!   row per (instance, algorithm). An empty `rmsd_angstrom` field marks a
//!   docking failure (no pose). `pb_valid` is `0` or `1`; alternatively the
//!   column may be replaced by several `pb_*` check columns, which are
//!   conjoined on load.

pub mod synth;

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scoring::{
    build_label_matrix, conjoin_checks, LabelMatrix, PerformanceRecord, PerformanceTable,
    ScoreConfig,
};

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::parse(path.display().to_string(), 1, format!("{other:?}")),
        })
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn map_csv_error(path: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::parse(
            path,
            line,
            format!("ragged row: expected {expected_len} fields, found {len}"),
        ),
        _ => Error::parse(path, line, e.to_string()),
    }
}

/// Loads a feature matrix. Returns rows in file order together with their
/// instance ids; duplicate ids, ragged rows, and non-finite values are
/// rejected.
pub fn load_features(path: &Path) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let display = path.display().to_string();
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| map_csv_error(&display, e))?
        .clone();
    if headers.len() < 2 || headers.get(0) != Some("instance_id") {
        return Err(Error::parse(
            &display,
            1,
            "feature header must be instance_id,f_0,...,f_{d-1}",
        ));
    }
    let d = headers.len() - 1;

    let mut ids = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| map_csv_error(&display, e))?;
        let line = record_line(&rec);
        let id = rec.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::parse(&display, line, "empty instance_id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::Schema(format!(
                "duplicate instance_id {id} (line {line})"
            )));
        }
        let mut row = Vec::with_capacity(d);
        for k in 1..=d {
            let field = rec.get(k).unwrap();
            let value: f64 = field.parse().map_err(|_| {
                Error::parse(&display, line, format!("bad feature value {field:?}"))
            })?;
            if !value.is_finite() {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("non-finite feature value {field:?}"),
                ));
            }
            row.push(value);
        }
        ids.push(id);
        rows.push(row);
    }
    Ok((rows, ids))
}

/// Loads a performance table, validating RMSD sign/finiteness and the
/// validity flags row by row.
pub fn load_performance(path: &Path) -> Result<PerformanceTable> {
    let display = path.display().to_string();
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| map_csv_error(&display, e))?
        .clone();
    let fixed = ["instance_id", "algorithm", "rmsd_angstrom"];
    if headers.len() < 4
        || fixed
            .iter()
            .enumerate()
            .any(|(k, f)| headers.get(k) != Some(f))
    {
        return Err(Error::parse(
            &display,
            1,
            "performance header must be instance_id,algorithm,rmsd_angstrom,pb_valid \
             (or pb_* check columns)",
        ));
    }
    let single_flag = headers.len() == 4 && headers.get(3) == Some("pb_valid");
    if !single_flag {
        for k in 3..headers.len() {
            if !headers.get(k).unwrap_or("").starts_with("pb") {
                return Err(Error::parse(
                    &display,
                    1,
                    format!(
                        "validity columns must be pb_valid or pb_* checks, found {:?}",
                        headers.get(k).unwrap_or("")
                    ),
                ));
            }
        }
    }

    let parse_flag = |field: &str, line: u64| -> Result<bool> {
        match field {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(Error::parse(
                &display,
                line,
                format!("validity flag must be 0 or 1, found {other:?}"),
            )),
        }
    };

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| map_csv_error(&display, e))?;
        let line = record_line(&rec);
        let instance_id = rec.get(0).unwrap_or("").to_string();
        let algorithm_id = rec.get(1).unwrap_or("").to_string();
        if instance_id.is_empty() || algorithm_id.is_empty() {
            return Err(Error::parse(
                &display,
                line,
                "instance_id and algorithm must be non-empty",
            ));
        }
        let rmsd_field = rec.get(2).unwrap_or("");
        let rmsd = if rmsd_field.is_empty() {
            None
        } else {
            let x: f64 = rmsd_field.parse().map_err(|_| {
                Error::parse(&display, line, format!("bad rmsd value {rmsd_field:?}"))
            })?;
            if !x.is_finite() || x < 0.0 {
                return Err(Error::parse(
                    &display,
                    line,
                    format!("rmsd must be finite and non-negative, found {rmsd_field}"),
                ));
            }
            Some(x)
        };
        let pb_valid = if single_flag {
            parse_flag(rec.get(3).unwrap(), line)?
        } else {
            let mut checks = Vec::with_capacity(headers.len() - 3);
            for k in 3..headers.len() {
                checks.push(parse_flag(rec.get(k).unwrap(), line)?);
            }
            conjoin_checks(&checks)
        };
        records.push(PerformanceRecord {
            instance_id,
            algorithm_id,
            rmsd,
            pb_valid,
        });
    }
    PerformanceTable::from_records(records)
}

fn fmt_f64(v: f64) -> String {
    // `{}` uses the shortest representation that round-trips.
    format!("{v}")
}

pub fn save_features(path: &Path, ids: &[String], features: &[Vec<f64>]) -> Result<()> {
    if ids.len() != features.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} ids vs {} feature rows",
            ids.len(),
            features.len()
        )));
    }
    let d = features.first().map_or(0, Vec::len);
    let mut out = String::from("instance_id");
    for k in 0..d {
        write!(out, ",f_{k}").unwrap();
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(features) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn save_performance(path: &Path, table: &PerformanceTable) -> Result<()> {
    let mut out = String::from("instance_id,algorithm,rmsd_angstrom,pb_valid\n");
    for rec in table.records() {
        let rmsd = rec.rmsd.map(fmt_f64).unwrap_or_default();
        let pb = if rec.pb_valid { "1" } else { "0" };
        writeln!(
            out,
            "{},{},{},{}",
            rec.instance_id, rec.algorithm_id, rmsd, pb
        )
        .unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a label matrix as `instance_id,<algo>,...` with full-precision
/// scores.
pub fn save_label_matrix(path: &Path, labels: &LabelMatrix) -> Result<()> {
    let mut out = String::from("instance_id");
    for algo in &labels.algorithm_ids {
        write!(out, ",{algo}").unwrap();
    }
    out.push('\n');
    for (id, row) in labels.instance_ids.iter().zip(&labels.scores) {
        out.push_str(id);
        for v in row {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn save_ground_truth(path: &Path, truth: &[(String, String)]) -> Result<()> {
    let mut out = String::from("instance_id,best_algorithm\n");
    for (id, algo) in truth {
        writeln!(out, "{id},{algo}").unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_ground_truth(path: &Path) -> Result<Vec<(String, String)>> {
    let display = path.display().to_string();
    let mut rdr = reader(path)?;
    let headers = rdr
        .headers()
        .map_err(|e| map_csv_error(&display, e))?
        .clone();
    if headers.get(0) != Some("instance_id") || headers.get(1) != Some("best_algorithm") {
        return Err(Error::parse(
            &display,
            1,
            "ground truth header must be instance_id,best_algorithm",
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| map_csv_error(&display, e))?;
        out.push((
            rec.get(0).unwrap_or("").to_string(),
            rec.get(1).unwrap_or("").to_string(),
        ));
    }
    Ok(out)
}

/// Joined features and performance outcomes for one benchmark set.
///
/// Construction canonicalizes row order (lexicographic instance id, the same
/// order [`LabelMatrix`] uses) and fails loudly when the two sides disagree
/// on the instance set.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub instance_ids: Vec<String>,
    pub table: PerformanceTable,
    pub portfolio: Vec<String>,
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        instance_ids: Vec<String>,
        table: PerformanceTable,
        portfolio: Vec<String>,
        provenance: String,
    ) -> Result<Self> {
        if features.len() != instance_ids.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows vs {} instance ids",
                features.len(),
                instance_ids.len()
            )));
        }
        let d = features.first().map_or(0, Vec::len);
        if d == 0 && !features.is_empty() {
            return Err(Error::Schema("feature rows are empty".into()));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "feature row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
        }

        let mut order: Vec<usize> = (0..instance_ids.len()).collect();
        order.sort_by(|&a, &b| instance_ids[a].cmp(&instance_ids[b]));
        let sorted_ids: Vec<String> = order.iter().map(|&i| instance_ids[i].clone()).collect();
        for pair in sorted_ids.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Schema(format!("duplicate instance_id {}", pair[0])));
            }
        }
        let sorted_features: Vec<Vec<f64>> = order.iter().map(|&i| features[i].clone()).collect();

        let table_ids = table.instance_ids();
        if table_ids != sorted_ids {
            let features_only: Vec<&String> = sorted_ids
                .iter()
                .filter(|id| !table_ids.contains(id))
                .collect();
            let table_only: Vec<&String> = table_ids
                .iter()
                .filter(|id| sorted_ids.binary_search(id).is_err())
                .collect();
            return Err(Error::Schema(format!(
                "features and performance disagree on instances: {} only in features \
                 (e.g. {:?}), {} only in performance (e.g. {:?})",
                features_only.len(),
                features_only.first(),
                table_only.len(),
                table_only.first()
            )));
        }

        let mut seen = HashSet::new();
        for algo in &portfolio {
            if !seen.insert(algo.clone()) {
                return Err(Error::Schema(format!("duplicate portfolio entry {algo}")));
            }
        }
        for algo in table.algorithm_ids() {
            if !seen.contains(&algo) {
                return Err(Error::Schema(format!(
                    "performance references algorithm {algo} outside the portfolio"
                )));
            }
        }

        Ok(Self {
            features: sorted_features,
            instance_ids: sorted_ids,
            table,
            portfolio,
            provenance,
        })
    }

    /// Loads and joins the two CSV inputs; the portfolio is the algorithms'
    /// order of first appearance in the performance file.
    pub fn load(features_path: &Path, performance_path: &Path) -> Result<Self> {
        let (features, ids) = load_features(features_path)?;
        let table = load_performance(performance_path)?;
        let portfolio = table.algorithm_ids();
        let provenance = format!(
            "{} + {}",
            features_path.display(),
            performance_path.display()
        );
        Self::new(features, ids, table, portfolio, provenance)
    }

    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    /// Composite-score labels for this dataset under `cfg`; rows align with
    /// `instance_ids`.
    pub fn label_matrix(&self, cfg: &ScoreConfig) -> Result<LabelMatrix> {
        build_label_matrix(self.table.records(), &self.portfolio, cfg)
    }
}
