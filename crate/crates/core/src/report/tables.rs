//! Pivoted result tables, one builder per published layout.

use std::collections::BTreeMap;

use crate::eval::{overgen_curves, EvalResult, Metric};
use crate::suites::{Condition, DataType};

use super::{aggregate, AggregateTable, GroupKey, ReportError, Weighting};

pub const DEFAULT_SIZES: [&str; 3] = ["small", "medium", "full"];

/// Idiom column order of the per-idiom peak table.
pub const TABLE_8_IDIOMS: [&str; 20] = [
    "once in a while",
    "do the right thing",
    "out of your mind",
    "state of the art",
    "from scratch",
    "take stock",
    "across the board",
    "in the final analysis",
    "out of the blue",
    "in tandem",
    "by heart",
    "come to terms with",
    "by the same token",
    "look the other way",
    "at your fingertips",
    "follow suit",
    "keep tabs on",
    "in the short run",
    "by dint of",
    "set eyes on",
];

/// Rows of the systematicity tables.
pub const SYSTEMATICITY_ROWS: [(DataType, Condition); 9] = [
    (DataType::Synthetic, Condition::NpSwap),
    (DataType::Synthetic, Condition::VpSwap),
    (DataType::SemiNatural, Condition::NpSwap),
    (DataType::Synthetic, Condition::S1Variant),
    (DataType::Synthetic, Condition::S1Replace),
    (DataType::SemiNatural, Condition::S1Variant),
    (DataType::SemiNatural, Condition::S1Replace),
    (DataType::Natural, Condition::S1Variant),
    (DataType::Natural, Condition::S1Replace),
];

const SUBSTITUTIVITY_ROWS: [DataType; 3] = [DataType::Synthetic, DataType::SemiNatural, DataType::Natural];
const SUBSTITUTIVITY_METRICS: [Metric; 2] = [Metric::Consistency, Metric::SynonymConsistency];

/// A rectangular table of display strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Grid {
    pub fn to_tsv(&self) -> String {
        std::iter::once(&self.header)
            .chain(&self.rows)
            .map(|r| r.join("\t") + "\n")
            .collect()
    }

    pub fn parse_tsv(text: &str) -> Grid {
        let mut lines = text.lines().map(|l| l.split('\t').map(str::to_string).collect::<Vec<_>>());
        Grid {
            header: lines.next().unwrap_or_default(),
            rows: lines.collect(),
        }
    }

    pub fn to_markdown(&self) -> String {
        let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
        let mut out = line(&self.header);
        out += &line(&vec!["---".to_string(); self.header.len()]);
        for r in &self.rows {
            out += &line(r);
        }
        out
    }
}

/// Two decimals without the leading zero (".84"); values that round to 1
/// print as "1.0".
pub fn format_value(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r >= 1.0 {
        return "1.0".into();
    }
    let s = format!("{r:.2}");
    let s = s.trim_start_matches('0').trim_end_matches('0');
    if s == "." {
        ".0".into()
    } else {
        s.to_string()
    }
}

pub fn condition_label(c: Condition) -> &'static str {
    match c {
        Condition::NpSwap => "NP",
        Condition::VpSwap => "VP",
        Condition::S1Variant => "S1'",
        Condition::S1Replace => "S3",
        Condition::Synonym => "synonym",
        Condition::IdiomContext | Condition::IdiomRandom => "idiom",
    }
}

fn cell(t: Option<&AggregateTable>, keys: &[&str]) -> String {
    t.and_then(|t| t.get(keys)).map(|r| format_value(r.value)).unwrap_or_default()
}

fn consistency_only(results: &[EvalResult]) -> Vec<EvalResult> {
    results.iter().filter(|r| r.metric == Metric::Consistency).cloned().collect()
}

/// Rolled-up table or `None` when nothing matched.
fn rolled(results: &[EvalResult], by: &[GroupKey], keep: &[GroupKey]) -> Result<Option<AggregateTable>, ReportError> {
    if results.is_empty() {
        return Ok(None);
    }
    Ok(Some(aggregate(results, by)?.rollup(keep, Weighting::Equal)?))
}

/// Systematicity consistency per training size; each cell is the mean over
/// templates.
pub fn table_2a(results: &[EvalResult], sizes: &[&str]) -> Result<Grid, ReportError> {
    use GroupKey::*;
    let rs = consistency_only(results);
    let t = rolled(&rs, &[DataType, Condition, TrainingSize, TemplateId], &[DataType, Condition, TrainingSize])?;
    let mut header = vec!["Data".to_string(), "Condition".to_string()];
    header.extend(sizes.iter().map(|s| s.to_string()));
    let rows = SYSTEMATICITY_ROWS
        .iter()
        .map(|(d, c)| {
            let mut row = vec![d.name().to_string(), condition_label(*c).to_string()];
            row.extend(sizes.iter().map(|s| cell(t.as_ref(), &[d.name(), c.name(), s])));
            row
        })
        .collect();
    Ok(Grid { header, rows })
}

/// Systematicity consistency per template, averaged over training sizes.
pub fn table_2b(results: &[EvalResult], templates: &[u32]) -> Result<Grid, ReportError> {
    use GroupKey::*;
    let rs = consistency_only(results);
    let t = rolled(&rs, &[DataType, Condition, TemplateId, TrainingSize], &[DataType, Condition, TemplateId])?;
    let mut header = vec!["Data".to_string(), "Condition".to_string()];
    header.extend(templates.iter().map(|t| t.to_string()));
    let rows = SYSTEMATICITY_ROWS
        .iter()
        .map(|(d, c)| {
            let mut row = vec![d.name().to_string(), condition_label(*c).to_string()];
            row.extend(templates.iter().map(|id| cell(t.as_ref(), &[d.name(), c.name(), &id.to_string()])));
            row
        })
        .collect();
    Ok(Grid { header, rows })
}

fn synonym_results(results: &[EvalResult]) -> Vec<EvalResult> {
    results.iter().filter(|r| r.condition == Condition::Synonym).cloned().collect()
}

/// Substitutivity scores per training size; each cell is the mean over
/// synonym pairs.
pub fn table_3a(results: &[EvalResult], sizes: &[&str]) -> Result<Grid, ReportError> {
    use GroupKey::*;
    let rs = synonym_results(results);
    let t = rolled(&rs, &[DataType, Metric, TrainingSize, Unit], &[DataType, Metric, TrainingSize])?;
    let mut header = vec!["Data".to_string(), "Metric".to_string()];
    header.extend(sizes.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for d in SUBSTITUTIVITY_ROWS {
        for m in SUBSTITUTIVITY_METRICS {
            let mut row = vec![d.name().to_string(), m.name().to_string()];
            row.extend(sizes.iter().map(|s| cell(t.as_ref(), &[d.name(), m.name(), s])));
            rows.push(row);
        }
    }
    Ok(Grid { header, rows })
}

/// Substitutivity scores per synonym pair (columns named by the British
/// term), averaged over training sizes.
pub fn table_3b(results: &[EvalResult], synonyms: &[&str]) -> Result<Grid, ReportError> {
    use GroupKey::*;
    let rs = synonym_results(results);
    let t = rolled(&rs, &[DataType, Metric, Unit, TrainingSize], &[DataType, Metric, Unit])?;
    let mut header = vec!["Data".to_string(), "Metric".to_string()];
    header.extend(synonyms.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for d in SUBSTITUTIVITY_ROWS {
        for m in SUBSTITUTIVITY_METRICS {
            let mut row = vec![d.name().to_string(), m.name().to_string()];
            row.extend(synonyms.iter().map(|s| cell(t.as_ref(), &[d.name(), m.name(), s])));
            rows.push(row);
        }
    }
    Ok(Grid { header, rows })
}

/// Peak overgeneralisation over checkpoints, per data type, training size
/// and idiom.
pub fn table_8(results: &[EvalResult], sizes: &[&str], checkpoint_order: &[String]) -> Grid {
    let curves = overgen_curves(results, checkpoint_order);
    let peaks: BTreeMap<(DataType, &str, &str), f64> = curves
        .iter()
        .filter(|(_, c)| !c.rates.is_empty())
        .map(|((d, size, idiom), c)| {
            let peak = c.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ((*d, size.as_str(), idiom.as_str()), peak)
        })
        .collect();
    let mut header = vec!["Data".to_string(), "Model".to_string()];
    header.extend(TABLE_8_IDIOMS.iter().map(|s| s.to_string()));
    let mut rows = Vec::new();
    for d in SUBSTITUTIVITY_ROWS {
        for s in sizes {
            let mut row = vec![d.name().to_string(), s.to_string()];
            row.extend(
                TABLE_8_IDIOMS
                    .iter()
                    .map(|i| peaks.get(&(d, *s, *i)).map(|v| format_value(*v)).unwrap_or_default()),
            );
            rows.push(row);
        }
    }
    Grid { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_format() {
        assert_eq!(format_value(0.84), ".84");
        assert_eq!(format_value(0.8), ".8");
        assert_eq!(format_value(0.01), ".01");
        assert_eq!(format_value(1.0), "1.0");
        assert_eq!(format_value(0.999), "1.0");
        assert_eq!(format_value(0.0), ".0");
        assert_eq!(format_value(0.704), ".7");
    }

    #[test]
    fn table_8_order_and_shape() {
        let idioms: Vec<String> = crate::suites::builtin_idioms().into_iter().map(|i| i.idiom).collect();
        let mut sorted_a = idioms.clone();
        let mut sorted_b: Vec<String> = TABLE_8_IDIOMS.iter().map(|s| s.to_string()).collect();
        sorted_a.sort();
        sorted_b.sort();
        assert_eq!(sorted_a, sorted_b);
        let g = table_8(&[], &DEFAULT_SIZES, &[]);
        assert_eq!(g.header.len(), 22);
        assert_eq!(g.rows.len(), 9);
        assert_eq!(g.header[15], "look the other way");
    }

    #[test]
    fn grid_round_trip() {
        let g = table_2a(&[], &DEFAULT_SIZES).unwrap();
        assert_eq!(Grid::parse_tsv(&g.to_tsv()), g);
        assert_eq!(g.rows[0][..2], ["synthetic".to_string(), "NP".to_string()]);
    }
}
