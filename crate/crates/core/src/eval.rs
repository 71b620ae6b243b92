//! Consistency and overgeneralisation metrics over translated suites.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::TranslationRecord;
use crate::suites::{Condition, DataType, IdiomSpec, OvergenItem, SynonymPair, TestPair};
use crate::templates::Span;
use crate::text::{decapitalize, tokenize};

/// Shared stand-in for the Dutch determiners "de" and "het".
pub const DET_PLACEHOLDER: &str = "<det>";
pub const CONJUNCTION: &str = "en";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("conjunction not found")]
    ConjunctionNotFound,
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("phase analysis needs at least 2 checkpoints, got {0}")]
    TooFewCheckpoints(usize),
    #[error("missing translation for {text:?} in run {backend}/{checkpoint}")]
    MissingTranslation {
        text: String,
        backend: String,
        checkpoint: String,
    },
    #[error("unknown unit {0:?}")]
    UnknownUnit(String),
}

/// Lowercase the first token and map de/het to [`DET_PLACEHOLDER`].
pub fn normalize<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens
        .iter()
        .map(|t| t.as_ref().trim())
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, t)| {
            let t = if i == 0 { decapitalize(t) } else { t.to_string() };
            if t.eq_ignore_ascii_case("de") || t.eq_ignore_ascii_case("het") {
                DET_PLACEHOLDER.to_string()
            } else {
                t
            }
        })
        .collect()
}

pub fn normalize_text(text: &str) -> Vec<String> {
    normalize(&tokenize(text))
}

/// A maximal run of unmatched tokens: `a[a_start..a_start + a_len]` is
/// replaced by `b[b_start..b_start + b_len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffRegion {
    pub a_start: usize,
    pub a_len: usize,
    pub b_start: usize,
    pub b_len: usize,
}

/// Edit regions of an LCS alignment of `a` and `b`.
pub fn token_diff<T: PartialEq>(a: &[T], b: &[T]) -> Vec<DiffRegion> {
    let prefix = a.iter().zip(b).take_while(|(x, y)| x == y).count();
    let suffix = a[prefix..]
        .iter()
        .rev()
        .zip(b[prefix..].iter().rev())
        .take_while(|(x, y)| x == y)
        .count();
    let (ma, mb) = (&a[prefix..a.len() - suffix], &b[prefix..b.len() - suffix]);
    let (n, m) = (ma.len(), mb.len());
    // lcs[i][j]: LCS length of ma[i..] and mb[j..]
    let mut lcs = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if ma[i] == mb[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let mut regions = Vec::new();
    let mut open: Option<DiffRegion> = None;
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        let step = if i < n && j < m && ma[i] == mb[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1 {
            0
        } else if j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1]) {
            1
        } else {
            2
        };
        if step == 0 {
            regions.extend(open.take());
            i += 1;
            j += 1;
            continue;
        }
        let r = open.get_or_insert(DiffRegion {
            a_start: prefix + i,
            a_len: 0,
            b_start: prefix + j,
            b_len: 0,
        });
        if step == 1 {
            r.a_len += 1;
            i += 1;
        } else {
            r.b_len += 1;
            j += 1;
        }
    }
    regions.extend(open);
    regions
}

/// Consistent when the normalised translations differ in at most one
/// region of at most one token per side.
pub fn consistency_one_word(t1: &str, t2: &str) -> bool {
    let regions = token_diff(&normalize_text(t1), &normalize_text(t2));
    match regions.as_slice() {
        [] => true,
        [r] => r.a_len <= 1 && r.b_len <= 1,
        _ => false,
    }
}

pub fn consistency_full(t1: &str, t2: &str) -> bool {
    normalize_text(t1) == normalize_text(t2)
}

/// Token-count ratio of the first conjunct within a conjoined source.
pub fn source_first_ratio(source: &str, second: Span) -> f64 {
    let total = tokenize(source).len();
    let before = tokenize(&source[..second.start.min(source.len())]).len();
    if total == 0 {
        return 0.0;
    }
    before.saturating_sub(1) as f64 / total as f64
}

/// Split at a Dutch conjunction. With several, pick the one whose
/// first-part ratio is closest to `source_ratio` (earliest on ties).
pub fn split_conjuncts<S: AsRef<str>>(
    tokens: &[S],
    source_ratio: Option<f64>,
) -> Result<(Vec<String>, Vec<String>), EvalError> {
    let positions: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| t.as_ref() == CONJUNCTION)
        .map(|(i, _)| i)
        .collect();
    let total = tokens.len() as f64;
    let at = match (positions.as_slice(), source_ratio) {
        ([], _) => return Err(EvalError::ConjunctionNotFound),
        ([p], _) | ([p, ..], None) => *p,
        (ps, Some(r)) => *ps
            .iter()
            .min_by(|a, b| {
                let da = (**a as f64 / total - r).abs();
                let db = (**b as f64 / total - r).abs();
                da.total_cmp(&db)
            })
            .expect("nonempty"),
    };
    let own = |s: &[S]| s.iter().map(|t| t.as_ref().to_string()).collect::<Vec<_>>();
    Ok((own(&tokens[..at]), own(&tokens[at + 1..])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdict {
    pub consistent: bool,
    /// Set when the verdict was forced because the conjunction was missing.
    pub flagged: bool,
}

/// Compare the second conjuncts of two conjoined translations.
pub fn consistency_conj(base: &str, variant: &str, base_ratio: Option<f64>, variant_ratio: Option<f64>) -> Verdict {
    let split = |t: &str, r| split_conjuncts(&tokenize(t), r).map(|(_, second)| normalize(&second));
    match (split(base, base_ratio), split(variant, variant_ratio)) {
        (Ok(a), Ok(b)) => Verdict {
            consistent: a == b,
            flagged: false,
        },
        _ => Verdict {
            consistent: false,
            flagged: true,
        },
    }
}

fn remove_first_match(tokens: &mut Vec<String>, candidates: &[Vec<String>]) {
    let lower: Vec<String> = tokens.iter().map(|t| t.to_lowercase()).collect();
    let mut best: Option<(usize, usize)> = None;
    for c in candidates.iter().filter(|c| !c.is_empty()) {
        let c: Vec<String> = c.iter().map(|t| t.to_lowercase()).collect();
        if let Some(pos) = lower.windows(c.len()).position(|w| w == c.as_slice()) {
            let better = match best {
                None => true,
                Some((p, len)) => pos < p || (pos == p && c.len() > len),
            };
            if better {
                best = Some((pos, c.len()));
            }
        }
    }
    if let Some((pos, len)) = best {
        tokens.drain(pos..pos + len);
    }
}

/// Consistency of the context only: the first occurrence of any of the
/// synonym's translations is removed from each side before comparing.
pub fn synonym_consistency(t1: &str, t2: &str, dutch_translations: &[Vec<String>]) -> bool {
    let mut a = normalize_text(t1);
    let mut b = normalize_text(t2);
    remove_first_match(&mut a, dutch_translations);
    remove_first_match(&mut b, dutch_translations);
    a == b
}

/// True when an English keyword or a literal Dutch reflex occurs in the
/// target (whole tokens, case-insensitive).
pub fn detect_overgeneralisation(target: &str, idiom: &IdiomSpec) -> bool {
    let toks: Vec<String> = normalize_text(target).into_iter().map(|t| t.to_lowercase()).collect();
    idiom
        .keywords
        .iter()
        .chain(&idiom.literal_dutch)
        .any(|k| toks.contains(&k.to_lowercase()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvergenCurve {
    pub idiom: String,
    pub checkpoints: Vec<String>,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub peak: f64,
    pub convergence: f64,
    pub delta: f64,
}

pub fn phase_analysis(curve: &OvergenCurve) -> Result<PhaseStats, EvalError> {
    if curve.rates.len() < 2 {
        return Err(EvalError::TooFewCheckpoints(curve.rates.len()));
    }
    let peak = curve.rates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let convergence = *curve.rates.last().expect("nonempty");
    Ok(PhaseStats {
        peak,
        convergence,
        delta: peak - convergence,
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::Degenerate("length mismatch"));
    }
    if x.len() < 2 {
        return Err(EvalError::Degenerate("fewer than 2 points"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Degenerate("zero variance"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation between idiom corpus frequency and peak-minus-convergence.
pub fn frequency_correlation(frequencies: &[f64], stats: &[PhaseStats]) -> Result<f64, EvalError> {
    let deltas: Vec<f64> = stats.iter().map(|s| s.delta).collect();
    pearson(frequencies, &deltas)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Consistency,
    SynonymConsistency,
    Overgeneralisation,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Consistency => "consistency",
            Metric::SynonymConsistency => "synonym consistency",
            Metric::Overgeneralisation => "overgeneralisation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalResult {
    pub item_id: String,
    pub metric: Metric,
    pub verdict: bool,
    #[serde(default)]
    pub flagged: bool,
    pub condition: Condition,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<u32>,
    /// The backend label, e.g. "small", "medium", "full".
    pub training_size: String,
    pub checkpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

/// Translations grouped by run (backend label, checkpoint).
#[derive(Debug, Clone, Default)]
pub struct TranslationTable {
    runs: BTreeMap<(String, String), HashMap<String, String>>,
}

impl TranslationTable {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a TranslationRecord>) -> Self {
        let mut t = TranslationTable::default();
        for r in records {
            t.runs
                .entry((r.backend.clone(), r.checkpoint.clone()))
                .or_default()
                .insert(r.source.clone(), r.target.clone());
        }
        t
    }

    pub fn runs(&self) -> impl Iterator<Item = &(String, String)> {
        self.runs.keys()
    }

    fn get(&self, run: &(String, String), source: &str) -> Result<&str, EvalError> {
        self.runs
            .get(run)
            .and_then(|m| m.get(source))
            .map(String::as_str)
            .ok_or_else(|| EvalError::MissingTranslation {
                text: source.to_string(),
                backend: run.0.clone(),
                checkpoint: run.1.clone(),
            })
    }
}

fn result_for(pair: &TestPair, run: &(String, String), metric: Metric, v: Verdict) -> EvalResult {
    EvalResult {
        item_id: pair.id.clone(),
        metric,
        verdict: v.consistent,
        flagged: v.flagged,
        condition: pair.condition,
        data_type: pair.data_type,
        template_id: pair.template_id,
        training_size: run.0.clone(),
        checkpoint: run.1.clone(),
        unit: pair.unit.clone(),
    }
}

/// Score test pairs for every run in `table`. Substitutivity pairs yield a
/// consistency and a synonym-consistency result each.
pub fn evaluate_pairs(
    pairs: &[TestPair],
    table: &TranslationTable,
    synonyms: &[SynonymPair],
) -> Result<Vec<EvalResult>, EvalError> {
    let by_term: HashMap<&str, &SynonymPair> = synonyms.iter().map(|s| (s.british.as_str(), s)).collect();
    let runs: Vec<&(String, String)> = table.runs().collect();
    let by_term = &by_term;
    let nested: Vec<Vec<EvalResult>> = runs
        .par_iter()
        .flat_map(|run| {
            pairs.par_iter().map(move |p| -> Result<Vec<EvalResult>, EvalError> {
                let (a, b) = (table.get(run, &p.base_source)?, table.get(run, &p.variant_source)?);
                let plain = |c| Verdict { consistent: c, flagged: false };
                Ok(match p.condition {
                    Condition::NpSwap | Condition::VpSwap => {
                        vec![result_for(p, run, Metric::Consistency, plain(consistency_one_word(a, b)))]
                    }
                    Condition::S1Variant | Condition::S1Replace => {
                        let ratios = p.conjunct2_span.map(|[sa, sb]| {
                            (source_first_ratio(&p.base_source, sa), source_first_ratio(&p.variant_source, sb))
                        });
                        let v = consistency_conj(a, b, ratios.map(|r| r.0), ratios.map(|r| r.1));
                        vec![result_for(p, run, Metric::Consistency, v)]
                    }
                    Condition::Synonym => {
                        let unit = p.unit.as_deref().unwrap_or_default();
                        let syn = by_term.get(unit).ok_or_else(|| EvalError::UnknownUnit(unit.to_string()))?;
                        vec![
                            result_for(p, run, Metric::Consistency, plain(consistency_full(a, b))),
                            result_for(
                                p,
                                run,
                                Metric::SynonymConsistency,
                                plain(synonym_consistency(a, b, &syn.dutch_translations)),
                            ),
                        ]
                    }
                    Condition::IdiomContext | Condition::IdiomRandom => vec![],
                })
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Overgeneralisation verdicts for every run in `table`.
pub fn evaluate_overgen(
    items: &[OvergenItem],
    table: &TranslationTable,
    idioms: &[IdiomSpec],
) -> Result<Vec<EvalResult>, EvalError> {
    let by_idiom: HashMap<&str, &IdiomSpec> = idioms.iter().map(|i| (i.idiom.as_str(), i)).collect();
    let runs: Vec<&(String, String)> = table.runs().collect();
    let by_idiom = &by_idiom;
    runs.par_iter()
        .flat_map(|run| {
            items.par_iter().map(move |it| {
                let target = table.get(run, &it.source)?;
                let spec = by_idiom.get(it.unit.as_str()).ok_or_else(|| EvalError::UnknownUnit(it.unit.clone()))?;
                Ok(EvalResult {
                    item_id: it.id.clone(),
                    metric: Metric::Overgeneralisation,
                    verdict: detect_overgeneralisation(target, spec),
                    flagged: false,
                    condition: it.condition,
                    data_type: it.data_type,
                    template_id: it.template_id,
                    training_size: run.0.clone(),
                    checkpoint: run.1.clone(),
                    unit: Some(it.unit.clone()),
                })
            })
        })
        .collect()
}

/// (data type, training size, idiom).
pub type CurveKey = (DataType, String, String);

/// One curve per (idiom, data type, training size), with checkpoints in
/// the given order; checkpoints without results are skipped.
pub fn overgen_curves(results: &[EvalResult], checkpoint_order: &[String]) -> BTreeMap<CurveKey, OvergenCurve> {
    let mut counts: BTreeMap<CurveKey, HashMap<&str, (usize, usize)>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.metric == Metric::Overgeneralisation) {
        let key = (r.data_type, r.training_size.clone(), r.unit.clone().unwrap_or_default());
        let c = counts.entry(key).or_default().entry(r.checkpoint.as_str()).or_insert((0, 0));
        c.0 += r.verdict as usize;
        c.1 += 1;
    }
    counts
        .into_iter()
        .map(|(key, per)| {
            let mut checkpoints = Vec::new();
            let mut rates = Vec::new();
            for c in checkpoint_order {
                if let Some((hit, n)) = per.get(c.as_str()) {
                    checkpoints.push(c.clone());
                    rates.push(*hit as f64 / *n as f64);
                }
            }
            let curve = OvergenCurve {
                idiom: key.2.clone(),
                checkpoints,
                rates,
            };
            (key, curve)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_string).collect()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize(&toks("de koning")), normalize(&toks("het koning")));
        assert!(normalize::<String>(&[]).is_empty());
        assert_eq!(normalize(&toks("De")), normalize(&toks("de")));
        assert_eq!(normalize(&toks("Jan ziet Piet")), toks("jan ziet Piet"));
    }

    #[test]
    fn diff_basics() {
        let a = toks("a b c");
        assert!(token_diff(&a, &a).is_empty());
        let r = token_diff(&a, &toks("a x c"));
        assert_eq!(r, vec![DiffRegion { a_start: 1, a_len: 1, b_start: 1, b_len: 1 }]);
        assert_eq!(token_diff(&toks(""), &toks("a b")).len(), 1);
    }

    #[test]
    fn one_word_examples() {
        assert!(consistency_one_word("de dichter ziet de koning", "de dichter ziet de koningin"));
        assert!(consistency_one_word("de dichter ziet de koning", "het dichter ziet het meisje"));
        assert!(!consistency_one_word("de dichter ziet de koning", "de koning ziet de dichter"));
        assert!(consistency_one_word("de man slaapt", "de man slaapt nu"));
    }

    #[test]
    fn conjunct_split() {
        let (a, b) = split_conjuncts(&toks("de dichter slaapt en het kind huilt"), None).unwrap();
        assert_eq!((a, b), (toks("de dichter slaapt"), toks("het kind huilt")));
        assert_eq!(split_conjuncts(&toks("geen voegwoord"), None), Err(EvalError::ConjunctionNotFound));
        // 10 tokens, conjunctions at 1 and 5
        let t = toks("jan en piet slapen . en het kind huilt .");
        let (first, _) = split_conjuncts(&t, Some(0.5)).unwrap();
        assert_eq!(first.len(), 5);
        let (first, _) = split_conjuncts(&t, Some(0.1)).unwrap();
        assert_eq!(first.len(), 1);
        // equidistant from both: earliest wins
        let (first, _) = split_conjuncts(&t, Some(0.3)).unwrap();
        assert_eq!(first.len(), 1);
    }

    #[test]
    fn conj_missing_conjunction_is_flagged() {
        let v = consistency_conj("a b", "a en b", None, None);
        assert_eq!(v, Verdict { consistent: false, flagged: true });
        assert!(consistency_conj("x en de kind", "y z en het kind", None, None).consistent);
    }

    #[test]
    fn full_and_synonym() {
        assert!(consistency_full("De man eet .", "het man eet ."));
        assert!(!consistency_full("de man eet .", "de vrouw eet ."));
        let d = vec![toks("donut"), toks("oliebol")];
        assert!(synonym_consistency("hij eet de donut .", "hij eet de oliebol .", &d));
        assert!(synonym_consistency("hij eet de donut .", "hij eet de .", &d));
        assert!(!synonym_consistency("hij eet de donut .", "zij eet de donut .", &d));
    }

    #[test]
    fn overgeneralisation_keywords() {
        let spec = crate::suites::builtin_idioms().into_iter().find(|i| i.idiom == "by heart").unwrap();
        assert!(detect_overgeneralisation("ik kende de formule door hart", &spec));
        assert!(!detect_overgeneralisation("hij kende de formule uit het hoofd", &spec));
        assert!(!detect_overgeneralisation("", &spec));
        assert!(detect_overgeneralisation("Hart !", &spec));
    }

    #[test]
    fn phases() {
        let c = |r: Vec<f64>| OvergenCurve { idiom: "x".into(), checkpoints: (0..r.len()).map(|i| i.to_string()).collect(), rates: r };
        let s = phase_analysis(&c(vec![0.0, 0.4, 1.0, 0.3])).unwrap();
        assert_eq!((s.peak, s.convergence), (1.0, 0.3));
        assert!((s.delta - 0.7).abs() < 1e-12);
        assert_eq!(phase_analysis(&c(vec![0.1, 0.5, 0.9])).unwrap().delta, 0.0);
        assert_eq!(phase_analysis(&c(vec![0.1])), Err(EvalError::TooFewCheckpoints(1)));
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let x = [0.5, 1.5, -2.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        assert!(pearson(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }
}
