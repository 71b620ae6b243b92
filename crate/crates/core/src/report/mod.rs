//! Aggregation of evaluation results into tables, plots and run directories.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::EvalResult;

pub mod pipeline;
pub mod plot;
pub mod tables;

pub use pipeline::{run_pipeline, Manifest, PipelineConfig, PipelineError, RunSummary};
pub use plot::{plot_curves, plot_series, Series};
pub use tables::{format_value, table_2a, table_2b, table_3a, table_3b, table_8, Grid, DEFAULT_SIZES, TABLE_8_IDIOMS};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no results to aggregate")]
    Empty,
    #[error("unknown output format {0:?}")]
    UnknownFormat(String),
    #[error("unknown group key {0:?}")]
    UnknownKey(String),
    #[error("cannot roll up onto {0}, which is not a key of the table")]
    NotAKey(GroupKey),
    #[error("malformed table at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    DataType,
    Condition,
    TrainingSize,
    TemplateId,
    Unit,
    Checkpoint,
    Metric,
}

impl GroupKey {
    pub const ALL: [GroupKey; 7] = [
        GroupKey::DataType,
        GroupKey::Condition,
        GroupKey::TrainingSize,
        GroupKey::TemplateId,
        GroupKey::Unit,
        GroupKey::Checkpoint,
        GroupKey::Metric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupKey::DataType => "data_type",
            GroupKey::Condition => "condition",
            GroupKey::TrainingSize => "training_size",
            GroupKey::TemplateId => "template_id",
            GroupKey::Unit => "unit",
            GroupKey::Checkpoint => "checkpoint",
            GroupKey::Metric => "metric",
        }
    }

    pub fn value_of(self, r: &EvalResult) -> String {
        match self {
            GroupKey::DataType => r.data_type.name().to_string(),
            GroupKey::Condition => r.condition.name().to_string(),
            GroupKey::TrainingSize => r.training_size.clone(),
            GroupKey::TemplateId => r.template_id.map(|t| t.to_string()).unwrap_or_default(),
            GroupKey::Unit => r.unit.clone().unwrap_or_default(),
            GroupKey::Checkpoint => r.checkpoint.clone(),
            GroupKey::Metric => r.metric.name().to_string(),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupKey {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace('-', "_");
        GroupKey::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "template" && *k == GroupKey::TemplateId))
            .ok_or(ReportError::UnknownKey(s))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub keys: Vec<String>,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub group_by: Vec<GroupKey>,
    pub rows: Vec<AggregateRow>,
}

/// How a rollup combines the rows it merges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// Pooled mean: rows weighted by their counts.
    Count,
    /// Mean of row means, e.g. the mean over templates.
    Equal,
}

/// Numbers sort numerically, everything else lexically.
fn key_cmp(a: &[String], b: &[String]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x.parse::<u64>(), y.parse::<u64>()) {
            (Ok(p), Ok(q)) => p.cmp(&q),
            _ => x.cmp(y),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}

fn sorted(group_by: Vec<GroupKey>, groups: impl IntoIterator<Item = AggregateRow>) -> AggregateTable {
    let mut rows: Vec<AggregateRow> = groups.into_iter().collect();
    rows.sort_by(|a, b| key_cmp(&a.keys, &b.keys));
    AggregateTable { group_by, rows }
}

/// Mean verdict per combination of `group_by` values.
pub fn aggregate(results: &[EvalResult], group_by: &[GroupKey]) -> Result<AggregateTable, ReportError> {
    if results.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut groups: BTreeMap<Vec<String>, (usize, usize)> = BTreeMap::new();
    for r in results {
        let keys = group_by.iter().map(|k| k.value_of(r)).collect();
        let g = groups.entry(keys).or_default();
        g.0 += r.verdict as usize;
        g.1 += 1;
    }
    Ok(sorted(
        group_by.to_vec(),
        groups.into_iter().map(|(keys, (hits, count))| AggregateRow {
            keys,
            value: hits as f64 / count as f64,
            count,
        }),
    ))
}

impl AggregateTable {
    pub fn column(&self, key: GroupKey) -> Option<usize> {
        self.group_by.iter().position(|k| *k == key)
    }

    /// Merge rows that agree on `keep`.
    pub fn rollup(&self, keep: &[GroupKey], weighting: Weighting) -> Result<AggregateTable, ReportError> {
        let cols: Vec<usize> = keep
            .iter()
            .map(|k| self.column(*k).ok_or(ReportError::NotAKey(*k)))
            .collect::<Result<_, _>>()?;
        let mut groups: BTreeMap<Vec<String>, (f64, f64, usize)> = BTreeMap::new();
        for row in &self.rows {
            let keys = cols.iter().map(|c| row.keys[*c].clone()).collect();
            let g = groups.entry(keys).or_default();
            let w = match weighting {
                Weighting::Count => row.count as f64,
                Weighting::Equal => 1.0,
            };
            g.0 += row.value * w;
            g.1 += w;
            g.2 += row.count;
        }
        Ok(sorted(
            keep.to_vec(),
            groups.into_iter().map(|(keys, (sum, weight, count))| AggregateRow {
                keys,
                value: sum / weight,
                count,
            }),
        ))
    }

    pub fn get(&self, keys: &[&str]) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.keys.iter().map(String::as_str).eq(keys.iter().copied()))
    }

    pub fn to_tsv(&self) -> String {
        let mut out: Vec<String> = vec![self
            .group_by
            .iter()
            .map(|k| k.name())
            .chain(["value", "count"])
            .collect::<Vec<_>>()
            .join("\t")];
        for r in &self.rows {
            let mut cells = r.keys.clone();
            cells.push(r.value.to_string());
            cells.push(r.count.to_string());
            out.push(cells.join("\t"));
        }
        out.join("\n") + "\n"
    }

    pub fn parse_tsv(text: &str) -> Result<AggregateTable, ReportError> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
        let bad = |line, message: &str| ReportError::Parse {
            line,
            message: message.to_string(),
        };
        if header.len() < 2 || header[header.len() - 2..] != ["value", "count"] {
            return Err(bad(1, "header must end with value and count"));
        }
        let group_by = header[..header.len() - 2]
            .iter()
            .map(|h| h.parse())
            .collect::<Result<Vec<GroupKey>, _>>()?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != header.len() {
                return Err(bad(i + 2, "wrong number of cells"));
            }
            let n = group_by.len();
            rows.push(AggregateRow {
                keys: cells[..n].iter().map(|c| c.to_string()).collect(),
                value: cells[n].parse().map_err(|_| bad(i + 2, "value is not a number"))?,
                count: cells[n + 1].parse().map_err(|_| bad(i + 2, "count is not an integer"))?,
            });
        }
        Ok(AggregateTable { group_by, rows })
    }

    pub fn to_jsonl(&self) -> String {
        self.rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                for (k, v) in self.group_by.iter().zip(&r.keys) {
                    obj.insert(k.name().into(), v.clone().into());
                }
                obj.insert("value".into(), r.value.into());
                obj.insert("count".into(), r.count.into());
                serde_json::Value::Object(obj).to_string() + "\n"
            })
            .collect()
    }

    pub fn to_grid(&self) -> Grid {
        Grid {
            header: self.group_by.iter().map(|k| k.name().to_string()).chain(["value".into(), "count".into()]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| r.keys.iter().cloned().chain([format_value(r.value), r.count.to_string()]).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Jsonl,
    Markdown,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Tsv => "tsv",
            Format::Jsonl => "jsonl",
            Format::Markdown => "md",
        }
    }
}

/// Render `table` in the named format.
pub fn emit(table: &AggregateTable, format: &str) -> Result<String, ReportError> {
    Ok(match format.parse::<Format>()? {
        Format::Tsv => table.to_tsv(),
        Format::Jsonl => table.to_jsonl(),
        Format::Markdown => table.to_grid().to_markdown(),
    })
}

pub fn emit_to(table: &AggregateTable, format: &str, path: impl AsRef<std::path::Path>) -> Result<(), ReportError> {
    let body = emit(table, format)?;
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::Metric;
    use crate::suites::{Condition, DataType};

    fn result(template: u32, size: &str, verdict: bool) -> EvalResult {
        EvalResult {
            item_id: format!("x/{template}"),
            metric: Metric::Consistency,
            verdict,
            flagged: false,
            condition: Condition::NpSwap,
            data_type: DataType::Synthetic,
            template_id: Some(template),
            training_size: size.into(),
            checkpoint: "final".into(),
            unit: None,
        }
    }

    #[test]
    fn single_group_mean() {
        let rs: Vec<_> = (0..10).map(|i| result(1, "small", i < 7)).collect();
        let t = aggregate(&rs, &[GroupKey::DataType]).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!((t.rows[0].value, t.rows[0].count), (0.7, 10));
        assert!(matches!(aggregate(&[], &[GroupKey::DataType]), Err(ReportError::Empty)));
    }

    #[test]
    fn mean_of_means_differs_from_pooled() {
        let mut rs: Vec<_> = (0..4).map(|i| result(1, "small", i < 4)).collect();
        rs.extend((0..1).map(|_| result(2, "small", false)));
        let per_t = aggregate(&rs, &[GroupKey::TrainingSize, GroupKey::TemplateId]).unwrap();
        let equal = per_t.rollup(&[GroupKey::TrainingSize], Weighting::Equal).unwrap();
        let pooled = per_t.rollup(&[GroupKey::TrainingSize], Weighting::Count).unwrap();
        assert_eq!(equal.rows[0].value, 0.5);
        assert_eq!(pooled.rows[0].value, 0.8);
        assert_eq!(pooled.rows[0].count, 5);
    }

    #[test]
    fn numeric_keys_sort_numerically() {
        let rs: Vec<_> = [10, 2, 1].into_iter().map(|t| result(t, "small", true)).collect();
        let t = aggregate(&rs, &[GroupKey::TemplateId]).unwrap();
        let keys: Vec<&str> = t.rows.iter().map(|r| r.keys[0].as_str()).collect();
        assert_eq!(keys, ["1", "2", "10"]);
    }

    #[test]
    fn formats() {
        let rs = vec![result(1, "small", true), result(1, "full", false)];
        let t = aggregate(&rs, &[GroupKey::TrainingSize]).unwrap();
        assert_eq!(AggregateTable::parse_tsv(&emit(&t, "tsv").unwrap()).unwrap(), t);
        assert_eq!(emit(&t, "jsonl").unwrap().lines().count(), 2);
        assert!(emit(&t, "markdown").unwrap().starts_with("| training_size |"));
        assert!(matches!(emit(&t, ""), Err(ReportError::UnknownFormat(_))));
        assert!(t.rollup(&[GroupKey::Unit], Weighting::Count).is_err());
    }
}
