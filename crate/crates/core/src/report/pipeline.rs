//! End-to-end runs: build suites, translate, score, render, and record a
//! manifest of everything that went in.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bridge::{translate_batch, BackendSpec, BridgeError, TranslationRecord};
use crate::corpus::{CorpusError, ParallelCorpus};
use crate::eval::{evaluate_overgen, evaluate_pairs, overgen_curves, EvalError, EvalResult, TranslationTable};
use crate::lexicon::{Lexicon, LexiconError};
use crate::suites::{
    parse_idioms, parse_synonyms, Condition, DataType, IdiomSpec, OvergenItem, SuiteBuilder,
    SuiteError, SynonymPair, TestPair,
};
use crate::templates::{SentenceSource, SyntheticGrammar, TemplateError};
use crate::text::{derive_seed, sha256_hex};
use crate::treegen::SemiNaturalGrammar;

use super::{aggregate, plot_curves, table_2a, table_2b, table_3a, table_3b, table_8, GroupKey, ReportError};

const BUILTIN_INPUTS: [(&str, &str); 7] = [
    ("lexicon", include_str!("../../data/lexicon.tsv")),
    ("synthetic_templates", include_str!("../../data/synthetic_templates.txt")),
    ("seminatural_templates", include_str!("../../data/seminatural_templates.txt")),
    ("fillers", include_str!("../../data/fillers.tsv")),
    ("synonyms", include_str!("../../data/synonyms.tsv")),
    ("idioms", include_str!("../../data/idioms.tsv")),
    ("mock_dictionary", include_str!("../../data/mock_dictionary.tsv")),
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Bridge(#[from] BridgeError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    /// 2 for backend and protocol failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Bridge(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Systematicity,
    Substitutivity,
    Overgeneralisation,
}

fn default_seed() -> u64 {
    1
}
fn default_per_template() -> usize {
    500
}
fn default_per_unit() -> usize {
    20
}
fn default_experiments() -> Vec<Experiment> {
    vec![Experiment::Systematicity, Experiment::Substitutivity, Experiment::Overgeneralisation]
}
fn default_data_types() -> Vec<DataType> {
    vec![DataType::Synthetic, DataType::SemiNatural]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Test pairs per template for the systematicity suites.
    #[serde(default = "default_per_template")]
    pub per_template: usize,
    /// Items per template (or per corpus search) for each synonym and idiom.
    #[serde(default = "default_per_unit")]
    pub per_unit: usize,
    #[serde(default = "default_experiments")]
    pub experiments: Vec<Experiment>,
    /// `natural` needs a corpus; `random-context` applies to idioms only.
    #[serde(default = "default_data_types")]
    pub data_types: Vec<DataType>,
    /// Table columns; defaults to the backend labels in order.
    #[serde(default)]
    pub sizes: Vec<String>,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub synthetic_templates: Option<PathBuf>,
    #[serde(default)]
    pub seminatural_templates: Option<PathBuf>,
    #[serde(default)]
    pub fillers: Option<PathBuf>,
    #[serde(default)]
    pub synonyms: Option<PathBuf>,
    #[serde(default)]
    pub idioms: Option<PathBuf>,
    #[serde(default)]
    pub corpus_source: Option<PathBuf>,
    #[serde(default)]
    pub corpus_target: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.per_template == 0 || self.per_unit == 0 {
            return bad("per_template and per_unit must be at least 1");
        }
        if self.experiments.is_empty() || self.data_types.is_empty() {
            return bad("at least one experiment and one data type are required");
        }
        if self.corpus_source.is_some() != self.corpus_target.is_some() {
            return bad("corpus_source and corpus_target go together");
        }
        if self.data_types.contains(&DataType::Natural) && self.corpus_source.is_none() {
            return bad("natural data needs corpus_source and corpus_target");
        }
        Ok(())
    }
}

/// Grammars, metadata and corpus for one run, with a content hash per input.
pub struct Inputs {
    pub synthetic: SyntheticGrammar,
    pub seminatural: SemiNaturalGrammar,
    pub synonyms: Vec<SynonymPair>,
    pub idioms: Vec<IdiomSpec>,
    pub corpus: Option<ParallelCorpus>,
    pub hashes: BTreeMap<String, String>,
}

impl Inputs {
    pub fn load(config: &PipelineConfig) -> Result<Inputs, PipelineError> {
        let mut hashes: BTreeMap<String, String> =
            BUILTIN_INPUTS.iter().map(|(k, v)| (k.to_string(), sha256_hex(v.as_bytes()))).collect();
        let mut read = |name: &str, path: &Option<PathBuf>| -> Result<Option<String>, PipelineError> {
            let Some(p) = path else { return Ok(None) };
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            hashes.insert(name.to_string(), sha256_hex(text.as_bytes()));
            Ok(Some(text))
        };
        let lexicon = Arc::new(match read("lexicon", &config.lexicon)? {
            Some(t) => Lexicon::parse(&t)?,
            None => Lexicon::builtin(),
        });
        let synthetic = match &config.synthetic_templates {
            Some(p) => {
                read("synthetic_templates", &config.synthetic_templates)?;
                SyntheticGrammar::load(lexicon.clone(), p)?
            }
            None => SyntheticGrammar::with_lexicon(lexicon.clone())?,
        };
        let seminatural = match (&config.seminatural_templates, &config.fillers) {
            (None, None) => SemiNaturalGrammar::with_lexicon(lexicon.clone())?,
            _ => {
                use crate::treegen::{parse_fillers, parse_seminatural_templates};
                let templates = match read("seminatural_templates", &config.seminatural_templates)? {
                    Some(t) => t,
                    None => BUILTIN_INPUTS[2].1.to_string(),
                };
                let fillers = match read("fillers", &config.fillers)? {
                    Some(t) => t,
                    None => BUILTIN_INPUTS[3].1.to_string(),
                };
                SemiNaturalGrammar::new(lexicon.clone(), parse_seminatural_templates(&templates)?, parse_fillers(&fillers)?)?
            }
        };
        let synonyms = match read("synonyms", &config.synonyms)? {
            Some(t) => parse_synonyms(&t)?,
            None => crate::suites::builtin_synonyms(),
        };
        let idioms = match read("idioms", &config.idioms)? {
            Some(t) => parse_idioms(&t)?,
            None => crate::suites::builtin_idioms(),
        };
        let corpus = match (&config.corpus_source, &config.corpus_target) {
            (Some(s), Some(t)) => {
                for (name, p) in [("corpus_source", s), ("corpus_target", t)] {
                    let bytes = fs::read(p).map_err(io_err(p))?;
                    hashes.insert(name.to_string(), sha256_hex(&bytes));
                }
                Some(ParallelCorpus::ingest(s, t)?)
            }
            _ => None,
        };
        Ok(Inputs {
            synthetic,
            seminatural,
            synonyms,
            idioms,
            corpus,
            hashes,
        })
    }

    pub fn builder(&self) -> SuiteBuilder<'_> {
        let b = SuiteBuilder::new(&self.synthetic, &self.seminatural);
        match &self.corpus {
            Some(c) => b.with_corpus(c),
            None => b,
        }
    }
}

/// Every suite selected by `config`, with the seed used for each part.
/// Natural substitutivity and idiom suites without corpus hits are skipped
/// and reported in `warnings`.
pub fn build_suites(
    config: &PipelineConfig,
    inputs: &Inputs,
    seeds: &mut BTreeMap<String, u64>,
    warnings: &mut Vec<String>,
) -> Result<(Vec<TestPair>, Vec<OvergenItem>), PipelineError> {
    let builder = inputs.builder();
    let mut pairs = Vec::new();
    let mut items = Vec::new();
    let mut seed_for = |label: &str| {
        let s = derive_seed(config.seed, label);
        seeds.insert(label.to_string(), s);
        s
    };
    let has = |d| config.data_types.contains(&d);
    if config.experiments.contains(&Experiment::Systematicity) {
        for (d, c) in super::tables::SYSTEMATICITY_ROWS {
            if !has(d) {
                continue;
            }
            let label = format!("{}/{}", c.name(), d.name());
            let seed = seed_for(&label);
            pairs.extend(match c {
                Condition::NpSwap | Condition::VpSwap => builder.build_npvp_suite(d, c, config.per_template, seed)?,
                _ => builder.build_conj_suite(d, c, config.per_template, seed)?,
            });
        }
    }
    if config.experiments.contains(&Experiment::Substitutivity) {
        for d in [DataType::Synthetic, DataType::SemiNatural, DataType::Natural].into_iter().filter(|d| has(*d)) {
            for syn in &inputs.synonyms {
                let seed = seed_for(&format!("synonym/{}/{}", d.name(), syn.british));
                match builder.build_substitutivity_suite(syn, d, config.per_unit, seed) {
                    Ok(p) => pairs.extend(p),
                    Err(SuiteError::NoOccurrences(term)) => warnings.push(format!("no natural occurrences of {term:?}")),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    if config.experiments.contains(&Experiment::Overgeneralisation) {
        for d in DataType::ALL.into_iter().filter(|d| has(*d)) {
            for idiom in &inputs.idioms {
                let seed = seed_for(&format!("idiom/{}/{}", d.name(), idiom.idiom));
                match builder.build_overgen_suite(idiom, d, config.per_unit, seed) {
                    Ok(i) => items.extend(i),
                    Err(SuiteError::NoOccurrences(term)) => warnings.push(format!("no natural occurrences of {term:?}")),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    Ok((pairs, items))
}

/// Distinct sources in first-seen order.
pub fn sources_of(pairs: &[TestPair], items: &[OvergenItem]) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    pairs
        .iter()
        .flat_map(|p| [&p.base_source, &p.variant_source])
        .chain(items.iter().map(|i| &i.source))
        .filter(|s| seen.insert(s.as_str()))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendInfo {
    pub kind: String,
    pub label: String,
    pub checkpoint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub seeds: BTreeMap<String, u64>,
    /// SHA-256 of every input, built in or user supplied.
    pub inputs: BTreeMap<String, String>,
    pub backends: Vec<BackendInfo>,
    pub counts: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub results: Vec<EvalResult>,
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    let mut body = String::new();
    for r in rows {
        body += &serde_json::to_string(r)?;
        body.push('\n');
    }
    fs::write(path, body).map_err(io_err(path))
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(PipelineError::from))
        .collect()
}

fn first_seen<'a>(it: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for s in it {
        if !out.iter().any(|o| o == s) {
            out.push(s.to_string());
        }
    }
    out
}

/// Write every table and plot for `results` under `dir`; returns the
/// relative paths written.
pub fn write_reports(
    dir: &Path,
    results: &[EvalResult],
    sizes: &[String],
    checkpoints: &[String],
    synonyms: &[String],
    templates: &[u32],
) -> Result<Vec<String>, PipelineError> {
    let tables_dir = dir.join("tables");
    fs::create_dir_all(&tables_dir).map_err(io_err(&tables_dir))?;
    let sizes: Vec<&str> = sizes.iter().map(String::as_str).collect();
    let syn: Vec<&str> = synonyms.iter().map(String::as_str).collect();
    // consistency tables describe the final checkpoint of each model
    let last: Vec<EvalResult> = match checkpoints.last() {
        Some(c) => results.iter().filter(|r| &r.checkpoint == c).cloned().collect(),
        None => results.to_vec(),
    };
    let grids = [
        ("table2a", table_2a(&last, &sizes)?),
        ("table2b", table_2b(&last, templates)?),
        ("table3a", table_3a(&last, &sizes)?),
        ("table3b", table_3b(&last, &syn)?),
        ("table8", table_8(results, &sizes, checkpoints)),
    ];
    let mut written = Vec::new();
    for (name, g) in grids {
        for (ext, body) in [("tsv", g.to_tsv()), ("md", g.to_markdown())] {
            let rel = format!("tables/{name}.{ext}");
            let p = dir.join(&rel);
            fs::write(&p, body).map_err(io_err(&p))?;
            written.push(rel);
        }
    }
    if !results.is_empty() {
        use GroupKey::*;
        let t = aggregate(results, &[DataType, Condition, Metric, TrainingSize, Checkpoint, TemplateId, Unit])?;
        let rel = "tables/aggregate.tsv".to_string();
        let p = dir.join(&rel);
        fs::write(&p, t.to_tsv()).map_err(io_err(&p))?;
        written.push(rel);
    }
    let curves = overgen_curves(results, checkpoints);
    if !curves.is_empty() {
        let plots = dir.join("plots");
        fs::create_dir_all(&plots).map_err(io_err(&plots))?;
        let mut groups: BTreeMap<(crate::suites::DataType, String), Vec<crate::eval::OvergenCurve>> = BTreeMap::new();
        for ((d, size, _), c) in curves {
            groups.entry((d, size)).or_default().push(c);
        }
        for ((d, size), cs) in groups {
            let rel = format!("plots/overgeneralisation-{}-{}.svg", d.name(), sanitize(&size));
            let p = dir.join(&rel);
            fs::write(&p, plot_curves(&cs, &format!("{} / {}", d.name(), size))).map_err(io_err(&p))?;
            written.push(rel);
        }
    }
    Ok(written)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Table columns, checkpoint order and label lists taken from results
/// when nothing else is given.
pub fn report_axes(results: &[EvalResult], sizes: &[String]) -> (Vec<String>, Vec<String>, Vec<u32>) {
    let sizes = if sizes.is_empty() {
        first_seen(results.iter().map(|r| r.training_size.as_str()))
    } else {
        sizes.to_vec()
    };
    let checkpoints = first_seen(results.iter().map(|r| r.checkpoint.as_str()));
    let mut templates: Vec<u32> = results.iter().filter_map(|r| r.template_id).collect();
    templates.sort_unstable();
    templates.dedup();
    (sizes, checkpoints, templates)
}

/// Build, translate, evaluate and report into `out_dir`.
pub fn run_pipeline(config: &PipelineConfig, backends: &[BackendSpec], out_dir: &Path) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    if backends.is_empty() {
        return Err(PipelineError::Config("at least one backend is required".into()));
    }
    for b in backends {
        b.validate()?;
    }
    let inputs = Inputs::load(config)?;
    let mut seeds = BTreeMap::from([("master".to_string(), config.seed)]);
    let mut warnings = Vec::new();
    let (pairs, items) = build_suites(config, &inputs, &mut seeds, &mut warnings)?;

    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let suites = out_dir.join("suites");
    fs::create_dir_all(&suites).map_err(io_err(&suites))?;
    write_jsonl(&suites.join("pairs.jsonl"), &pairs)?;
    write_jsonl(&suites.join("overgen.jsonl"), &items)?;

    let sources = sources_of(&pairs, &items);
    let mut records: Vec<TranslationRecord> = Vec::new();
    for b in backends {
        records.extend(translate_batch(&sources, b)?);
    }
    write_jsonl(&out_dir.join("translations.jsonl"), &records)?;

    let table = TranslationTable::from_records(&records);
    let mut results = evaluate_pairs(&pairs, &table, &inputs.synonyms)?;
    results.extend(evaluate_overgen(&items, &table, &inputs.idioms)?);
    write_jsonl(&out_dir.join("results.jsonl"), &results)?;

    let sizes = if config.sizes.is_empty() {
        first_seen(backends.iter().map(|b| b.label.as_str()))
    } else {
        config.sizes.clone()
    };
    let checkpoints = first_seen(backends.iter().map(|b| b.checkpoint_label.as_str()));
    let synonyms: Vec<String> = inputs.synonyms.iter().map(|s| s.british.clone()).collect();
    let templates = inputs.synthetic.template_ids();
    let mut artifacts = vec![
        "suites/pairs.jsonl".to_string(),
        "suites/overgen.jsonl".to_string(),
        "translations.jsonl".to_string(),
        "results.jsonl".to_string(),
    ];
    artifacts.extend(write_reports(out_dir, &results, &sizes, &checkpoints, &synonyms, &templates)?);

    let flagged = results.iter().filter(|r| r.flagged).count();
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seeds,
        inputs: inputs.hashes.clone(),
        backends: backends
            .iter()
            .map(|b| BackendInfo {
                kind: b.kind.name().to_string(),
                label: b.label.clone(),
                checkpoint: b.checkpoint_label.clone(),
            })
            .collect(),
        counts: BTreeMap::from([
            ("pairs".to_string(), pairs.len()),
            ("overgen_items".to_string(), items.len()),
            ("sources".to_string(), sources.len()),
            ("translations".to_string(), records.len()),
            ("results".to_string(), results.len()),
            ("flagged".to_string(), flagged),
        ]),
        warnings,
        artifacts,
    };
    let mpath = out_dir.join("manifest.json");
    fs::write(&mpath, serde_json::to_string_pretty(&manifest)? + "\n").map_err(io_err(&mpath))?;
    Ok(RunSummary {
        dir: out_dir.to_path_buf(),
        manifest,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_and_validation() {
        let c = PipelineConfig::default();
        assert_eq!((c.seed, c.per_template), (1, 500));
        c.validate().unwrap();
        let mut bad = c.clone();
        bad.data_types.push(DataType::Natural);
        assert!(bad.validate().is_err());
        let mut bad = c;
        bad.per_unit = 0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn small_run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let config = PipelineConfig {
            per_template: 3,
            per_unit: 1,
            ..PipelineConfig::default()
        };
        let backends = [BackendSpec::mock_dictionary().with_label("full")];
        let run = run_pipeline(&config, &backends, dir.path()).unwrap();
        assert!(run.results.iter().all(|r| r.verdict || r.metric == crate::eval::Metric::Overgeneralisation));
        for a in &run.manifest.artifacts {
            assert!(dir.path().join(a).exists(), "{a}");
        }
        let m: Manifest = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m, run.manifest);
        assert!(m.inputs.contains_key("lexicon"));
    }
}
