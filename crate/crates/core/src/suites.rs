//! Test suites: paired sources for the systematicity and substitutivity
//! tests, and single sources for the overgeneralisation test.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CorpusError, FrequencyProfile, ParallelCorpus, DEFAULT_FREQ_TOL, DEFAULT_LENGTH_TOL};
use crate::lexicon::Pos;
use crate::templates::{conjoin, BoundSentence, Conjunction, Role, SecondCasing, SentenceSource, Span, SyntheticGrammar, TemplateError};
use crate::text::{capitalize, derive_seed, seeded_rng, token_spans, tokenize};
use crate::treegen::SemiNaturalGrammar;

const BUILTIN_SYNONYMS: &str = include_str!("../data/synonyms.tsv");
const BUILTIN_IDIOMS: &str = include_str!("../data/idioms.tsv");

/// Semi-natural instances averaged into the profile natural sentences are
/// matched against.
const PROFILE_SAMPLE: usize = 200;
const RANDOM_CONTEXT_SIDE: usize = 5;
const RANDOM_CONTEXT_POOL: usize = 5000;

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("unsupported condition {condition} for data type {data_type}")]
    UnsupportedCondition { condition: Condition, data_type: DataType },
    #[error("natural data requires a corpus")]
    NoCorpus,
    #[error("no natural occurrences of {0:?}")]
    NoOccurrences(String),
    #[error("{file} line {line}: {message}")]
    Metadata { file: &'static str, line: usize, message: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("reading metadata: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "NP->NP'")]
    NpSwap,
    #[serde(rename = "VP->VP'")]
    VpSwap,
    #[serde(rename = "S1->S1'")]
    S1Variant,
    #[serde(rename = "S1->S3")]
    S1Replace,
    #[serde(rename = "synonym")]
    Synonym,
    #[serde(rename = "idiom-context")]
    IdiomContext,
    #[serde(rename = "idiom-random")]
    IdiomRandom,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::NpSwap,
        Condition::VpSwap,
        Condition::S1Variant,
        Condition::S1Replace,
        Condition::Synonym,
        Condition::IdiomContext,
        Condition::IdiomRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::NpSwap => "NP->NP'",
            Condition::VpSwap => "VP->VP'",
            Condition::S1Variant => "S1->S1'",
            Condition::S1Replace => "S1->S3",
            Condition::Synonym => "synonym",
            Condition::IdiomContext => "idiom-context",
            Condition::IdiomRandom => "idiom-random",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Condition::NpSwap => "np",
            Condition::VpSwap => "vp",
            Condition::S1Variant => "s1p",
            Condition::S1Replace => "s3",
            Condition::Synonym => "syn",
            Condition::IdiomContext => "idiom",
            Condition::IdiomRandom => "idiom-rand",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let aliases = [("np", Condition::NpSwap), ("vp", Condition::VpSwap), ("s1'", Condition::S1Variant), ("s3", Condition::S1Replace)];
        Condition::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .or_else(|| aliases.iter().find(|(a, _)| a.eq_ignore_ascii_case(s)).map(|(_, c)| *c))
            .ok_or_else(|| format!("unknown condition {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataType {
    Synthetic,
    SemiNatural,
    Natural,
    RandomContext,
}

impl DataType {
    pub const ALL: [DataType; 4] = [DataType::Synthetic, DataType::SemiNatural, DataType::Natural, DataType::RandomContext];

    pub fn name(self) -> &'static str {
        match self {
            DataType::Synthetic => "synthetic",
            DataType::SemiNatural => "semi-natural",
            DataType::Natural => "natural",
            DataType::RandomContext => "random-context",
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DataType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DataType::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown data type {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestPair {
    pub id: String,
    pub base_source: String,
    pub variant_source: String,
    pub condition: Condition,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    /// Second-conjunct byte spans in base and variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjunct2_span: Option<[Span; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OvergenItem {
    pub id: String,
    pub source: String,
    pub condition: Condition,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_id: Option<u32>,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynonymPair {
    pub british: String,
    pub american: String,
    pub dutch_translations: Vec<Vec<String>>,
    /// Relative clause with `{}` where the term goes.
    pub clause: String,
    pub opus_freqs: (u64, u64),
}

impl SynonymPair {
    pub fn clause_with(&self, term: &str) -> String {
        self.clause.replace("{}", term)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdiomSpec {
    pub idiom: String,
    pub keywords: Vec<String>,
    /// The quoted sentence inserted as `that said ` ... '`.
    pub clause: String,
    pub local_translation: String,
    pub literal_dutch: Vec<String>,
    pub paraphrase_markers: Vec<String>,
    pub opus_freq: Option<u64>,
}

impl IdiomSpec {
    pub fn relative_clause(&self) -> String {
        format!("that said ` {} '", self.clause)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').map(str::trim).collect()))
}

fn split_list(s: &str) -> Vec<String> {
    s.split('|').map(str::trim).filter(|x| !x.is_empty()).map(str::to_string).collect()
}

/// True when `needle`'s tokens occur contiguously in `hay`, ignoring case.
pub fn contains_tokens(hay: &str, needle: &str) -> bool {
    let lower = |s: &str| tokenize(s).into_iter().map(|t| t.to_lowercase()).collect::<Vec<_>>();
    let (h, n) = (lower(hay), lower(needle));
    !n.is_empty() && h.windows(n.len()).any(|w| w == n.as_slice())
}

pub fn parse_synonyms(text: &str) -> Result<Vec<SynonymPair>, SuiteError> {
    let mut out = Vec::new();
    for (line, cols) in data_lines(text) {
        let err = |message: String| SuiteError::Metadata { file: "synonyms", line, message };
        let [british, bf, american, af, dutch, clause] = cols[..] else {
            return Err(err(format!("expected 6 columns, found {}", cols.len())));
        };
        let freq = |s: &str| s.parse::<u64>().map_err(|_| err(format!("bad frequency {s:?}")));
        if british.is_empty() || american.is_empty() {
            return Err(err("empty synonym".into()));
        }
        if !clause.contains("{}") {
            return Err(err("clause lacks the {} placeholder".into()));
        }
        out.push(SynonymPair {
            british: british.into(),
            american: american.into(),
            dutch_translations: split_list(dutch).iter().map(|d| tokenize(d)).collect(),
            clause: clause.into(),
            opus_freqs: (freq(bf)?, freq(af)?),
        });
    }
    Ok(out)
}

pub fn parse_idioms(text: &str) -> Result<Vec<IdiomSpec>, SuiteError> {
    let mut out = Vec::new();
    for (line, cols) in data_lines(text) {
        let err = |message: String| SuiteError::Metadata { file: "idioms", line, message };
        if !(5..=7).contains(&cols.len()) {
            return Err(err(format!("expected 5 to 7 columns, found {}", cols.len())));
        }
        let spec = IdiomSpec {
            idiom: cols[0].into(),
            keywords: split_list(cols[1]),
            clause: cols[2].into(),
            local_translation: cols[3].into(),
            literal_dutch: split_list(cols[4]),
            paraphrase_markers: cols.get(5).map(|s| split_list(s)).unwrap_or_default(),
            opus_freq: match cols.get(6).filter(|s| !s.is_empty()) {
                Some(s) => Some(s.parse().map_err(|_| err(format!("bad frequency {s:?}")))?),
                None => None,
            },
        };
        if spec.keywords.is_empty() {
            return Err(err("no keywords".into()));
        }
        if !contains_tokens(&spec.clause, &spec.idiom) {
            return Err(err(format!("clause does not contain {:?}", spec.idiom)));
        }
        out.push(spec);
    }
    Ok(out)
}

pub fn builtin_synonyms() -> Vec<SynonymPair> {
    parse_synonyms(BUILTIN_SYNONYMS).expect("builtin synonyms parse")
}

pub fn builtin_idioms() -> Vec<IdiomSpec> {
    parse_idioms(BUILTIN_IDIOMS).expect("builtin idioms parse")
}

pub fn load_synonyms(path: impl AsRef<Path>) -> Result<Vec<SynonymPair>, SuiteError> {
    parse_synonyms(&std::fs::read_to_string(path)?)
}

pub fn load_idioms(path: impl AsRef<Path>) -> Result<Vec<IdiomSpec>, SuiteError> {
    parse_idioms(&std::fs::read_to_string(path)?)
}

/// Generators and optional corpus from which every suite is built.
pub struct SuiteBuilder<'a> {
    pub synthetic: &'a SyntheticGrammar,
    pub seminatural: &'a SemiNaturalGrammar,
    pub corpus: Option<&'a ParallelCorpus>,
    pub length_tol: f64,
    pub freq_tol: f64,
}

impl<'a> SuiteBuilder<'a> {
    pub fn new(synthetic: &'a SyntheticGrammar, seminatural: &'a SemiNaturalGrammar) -> Self {
        SuiteBuilder {
            synthetic,
            seminatural,
            corpus: None,
            length_tol: DEFAULT_LENGTH_TOL,
            freq_tol: DEFAULT_FREQ_TOL,
        }
    }

    pub fn with_corpus(mut self, corpus: &'a ParallelCorpus) -> Self {
        self.corpus = Some(corpus);
        self
    }

    fn generator(&self, data_type: DataType) -> Option<&dyn SentenceSource> {
        match data_type {
            DataType::Synthetic => Some(self.synthetic),
            DataType::SemiNatural => Some(self.seminatural),
            _ => None,
        }
    }

    fn corpus(&self) -> Result<&'a ParallelCorpus, SuiteError> {
        self.corpus.ok_or(SuiteError::NoCorpus)
    }

    /// NP->NP' (synthetic, semi-natural) or VP->VP' (synthetic only).
    pub fn build_npvp_suite(
        &self,
        data_type: DataType,
        condition: Condition,
        per_template: usize,
        seed: u64,
    ) -> Result<Vec<TestPair>, SuiteError> {
        let unsupported = || SuiteError::UnsupportedCondition { condition, data_type };
        let role = match (condition, data_type) {
            (Condition::NpSwap, DataType::Synthetic | DataType::SemiNatural) => Role::Subject,
            (Condition::VpSwap, DataType::Synthetic) => Role::Object,
            _ => return Err(unsupported()),
        };
        let generator = self.generator(data_type).ok_or_else(unsupported)?;
        let mut out = Vec::new();
        for t in generator.template_ids() {
            let label = format!("{}/{}/{t}", condition.tag(), data_type);
            let bases = generator.instantiate(t, per_template, derive_seed(seed, &label))?;
            for (i, base) in bases.into_iter().enumerate() {
                let variant = generator.perturb(&base, role, derive_seed(seed, &format!("{label}/{i}")))?;
                out.push(TestPair {
                    id: format!("{label}/{i}"),
                    base_source: base.text,
                    variant_source: variant.text,
                    condition,
                    data_type,
                    template_id: Some(t),
                    unit: None,
                    conjunct2_span: None,
                });
            }
        }
        Ok(out)
    }

    fn second_conjuncts(&self, data_type: DataType, t: u32, n: usize, seed: u64) -> Result<Vec<String>, SuiteError> {
        match data_type {
            DataType::Synthetic | DataType::SemiNatural => {
                let g = self.generator(data_type).expect("generated type");
                Ok(g.instantiate(t, n, seed)?.into_iter().map(|s| s.text).collect())
            }
            DataType::Natural => {
                let corpus = self.corpus()?;
                let profile = self.seminatural_profile(t, seed)?;
                Ok(corpus.sample_matched(&profile, n, seed, self.length_tol, self.freq_tol)?)
            }
            DataType::RandomContext => Err(SuiteError::UnsupportedCondition {
                condition: Condition::S1Replace,
                data_type,
            }),
        }
    }

    /// Mean frequency profile of semi-natural template `t` against the corpus.
    pub fn seminatural_profile(&self, t: u32, seed: u64) -> Result<FrequencyProfile, SuiteError> {
        let corpus = self.corpus()?;
        let space = self.seminatural.space(t)?;
        let n = PROFILE_SAMPLE.min(space.size() as usize);
        let profiles = self
            .seminatural
            .instantiate(t, n, derive_seed(seed, &format!("profile/{t}")))?
            .iter()
            .map(|s| corpus.profile(&s.text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FrequencyProfile::mean(&profiles).expect("at least one instance"))
    }

    /// Conjunctions `S1 and S2` versus `S1' and S2` or `S3 and S2`. The first
    /// conjunct is always synthetic; `template_id` records S2's template.
    pub fn build_conj_suite(
        &self,
        second_type: DataType,
        condition: Condition,
        per_template: usize,
        seed: u64,
    ) -> Result<Vec<TestPair>, SuiteError> {
        if !matches!(condition, Condition::S1Variant | Condition::S1Replace) {
            return Err(SuiteError::UnsupportedCondition { condition, data_type: second_type });
        }
        let casing = if second_type == DataType::Natural { SecondCasing::Preserve } else { SecondCasing::Lowercase };
        let ids: Vec<u32> = match second_type {
            DataType::Synthetic => self.synthetic.template_ids(),
            DataType::SemiNatural | DataType::Natural => self.seminatural.template_ids(),
            DataType::RandomContext => return Err(SuiteError::UnsupportedCondition { condition, data_type: second_type }),
        };
        let first_ids = self.synthetic.template_ids();
        let mut out = Vec::new();
        for t in ids {
            let label = format!("{}/{}/{t}", condition.tag(), second_type);
            let seconds = self.second_conjuncts(second_type, t, per_template, derive_seed(seed, &label))?;
            let mut rng = seeded_rng(derive_seed(seed, &format!("{label}/first")));
            for (i, s2) in seconds.into_iter().enumerate() {
                let s1 = self.pick(&first_ids, &[t], &mut rng)?;
                let v = match condition {
                    Condition::S1Variant => self.synthetic.perturb_vp(&s1, rng.random())?,
                    _ => self.pick(&first_ids, &[t, s1.template_id], &mut rng)?,
                };
                let base: Conjunction = conjoin(&s1.text, &s2, casing);
                let variant = conjoin(&v.text, &s2, casing);
                out.push(TestPair {
                    id: format!("{label}/{i}"),
                    base_source: base.text,
                    variant_source: variant.text,
                    condition,
                    data_type: second_type,
                    template_id: Some(t),
                    unit: Some(format!("{}>{}", s1.template_id, v.template_id)),
                    conjunct2_span: Some([base.second, variant.second]),
                });
            }
        }
        Ok(out)
    }

    fn pick(&self, ids: &[u32], exclude: &[u32], rng: &mut impl Rng) -> Result<BoundSentence, SuiteError> {
        let allowed: Vec<u32> = ids.iter().copied().filter(|i| !exclude.contains(i)).collect();
        let t = *allowed
            .get(rng.random_range(0..allowed.len().max(1)))
            .ok_or(TemplateError::UnknownTemplate(exclude.first().copied().unwrap_or(0)))?;
        Ok(self.synthetic.space(t)?.sample_one(rng))
    }

    /// British versus American term, otherwise identical sources.
    pub fn build_substitutivity_suite(
        &self,
        pair: &SynonymPair,
        data_type: DataType,
        per_unit: usize,
        seed: u64,
    ) -> Result<Vec<TestPair>, SuiteError> {
        let mut out = Vec::new();
        let make = |id: String, base: String, variant: String, template_id: Option<u32>| TestPair {
            id,
            base_source: base,
            variant_source: variant,
            condition: Condition::Synonym,
            data_type,
            template_id,
            unit: Some(pair.british.clone()),
            conjunct2_span: None,
        };
        match data_type {
            DataType::Synthetic | DataType::SemiNatural => {
                let g = self.generator(data_type).expect("generated type");
                let (cb, ca) = (pair.clause_with(&pair.british), pair.clause_with(&pair.american));
                for t in g.template_ids() {
                    let label = format!("syn/{}/{t}/{}", data_type, pair.british);
                    for (i, s) in g.instantiate(t, per_unit, derive_seed(seed, &label))?.iter().enumerate() {
                        out.push(make(format!("{label}/{i}"), g.attach_clause(s, &cb)?, g.attach_clause(s, &ca)?, Some(t)));
                    }
                }
            }
            DataType::Natural => {
                let corpus = self.corpus()?;
                let mut found: Vec<(usize, &str, &str)> = Vec::new();
                for (term, other) in [(&pair.british, &pair.american), (&pair.american, &pair.british)] {
                    for form in [term.clone(), capitalize(term)] {
                        for id in corpus.find_exact(&form)? {
                            if !found.iter().any(|(f, _, _)| *f == id) {
                                found.push((id, term, other));
                            }
                        }
                    }
                }
                if found.is_empty() {
                    return Err(SuiteError::NoOccurrences(pair.british.clone()));
                }
                found.sort();
                let label = format!("syn/natural/{}", pair.british);
                let mut rng = seeded_rng(derive_seed(seed, &label));
                let picks = index::sample(&mut rng, found.len(), per_unit.min(found.len())).into_vec();
                for k in picks {
                    let (id, term, other) = found[k];
                    let original = corpus.source(id).expect("found ids are valid");
                    let swapped = substitute(original, term, other).expect("term was found in sentence");
                    let (base, variant) = if term == pair.british { (original.to_string(), swapped) } else { (swapped, original.to_string()) };
                    out.push(make(format!("{label}/{id}"), base, variant, None));
                }
            }
            DataType::RandomContext => {
                return Err(SuiteError::UnsupportedCondition { condition: Condition::Synonym, data_type })
            }
        }
        Ok(out)
    }

    /// Sources that embed an idiom in a template, a corpus sentence, or ten
    /// random words.
    pub fn build_overgen_suite(
        &self,
        idiom: &IdiomSpec,
        data_type: DataType,
        per_unit: usize,
        seed: u64,
    ) -> Result<Vec<OvergenItem>, SuiteError> {
        let mut out = Vec::new();
        let label = format!("idiom/{}/{}", data_type, idiom.idiom);
        let item = |id: String, source: String, condition, template_id| OvergenItem {
            id,
            source,
            condition,
            data_type,
            template_id,
            unit: idiom.idiom.clone(),
        };
        match data_type {
            DataType::Synthetic | DataType::SemiNatural => {
                let g = self.generator(data_type).expect("generated type");
                let clause = idiom.relative_clause();
                for t in g.template_ids() {
                    let l = format!("{label}/{t}");
                    for (i, s) in g.instantiate(t, per_unit, derive_seed(seed, &l))?.iter().enumerate() {
                        out.push(item(format!("{l}/{i}"), g.attach_clause(s, &clause)?, Condition::IdiomContext, Some(t)));
                    }
                }
            }
            DataType::Natural => {
                let corpus = self.corpus()?;
                let mut ids = corpus.find_exact(&idiom.idiom)?;
                ids.extend(corpus.find_exact(&capitalize(&idiom.idiom))?);
                ids.sort_unstable();
                ids.dedup();
                if ids.is_empty() {
                    return Err(SuiteError::NoOccurrences(idiom.idiom.clone()));
                }
                let mut rng = seeded_rng(derive_seed(seed, &label));
                for k in index::sample(&mut rng, ids.len(), per_unit.min(ids.len())) {
                    let id = ids[k];
                    out.push(item(format!("{label}/{id}"), corpus.source(id).expect("valid").to_string(), Condition::IdiomContext, None));
                }
            }
            DataType::RandomContext => {
                let pool = self.random_word_pool();
                let mut rng = seeded_rng(derive_seed(seed, &label));
                for i in 0..per_unit {
                    let mut words = |n| (0..n).map(|_| pool[rng.random_range(0..pool.len())].clone()).collect::<Vec<_>>();
                    let (left, right) = (words(RANDOM_CONTEXT_SIDE), words(RANDOM_CONTEXT_SIDE));
                    let source = format!("{} {} {}", left.join(" "), idiom.idiom, right.join(" "));
                    out.push(item(format!("{label}/{i}"), source, Condition::IdiomRandom, None));
                }
            }
        }
        Ok(out)
    }

    /// Frequent corpus words when a corpus is loaded, else lexicon nouns.
    pub fn random_word_pool(&self) -> Vec<String> {
        if let Some(c) = self.corpus {
            let words = c.frequent_words(RANDOM_CONTEXT_POOL);
            if !words.is_empty() {
                return words;
            }
        }
        let mut nouns: Vec<String> = self
            .synthetic
            .lexicon()
            .entries()
            .iter()
            .filter(|e| e.pos == Pos::N)
            .map(|e| e.surface.clone())
            .collect();
        nouns.sort();
        nouns.dedup();
        nouns
    }
}

/// Replace the first token-aligned occurrence of `from` (or its capitalised
/// form, keeping the capital) with `to`.
pub fn substitute(sentence: &str, from: &str, to: &str) -> Option<String> {
    let spans = token_spans(sentence);
    let toks: Vec<&str> = spans.iter().map(|&(s, e)| &sentence[s..e]).collect();
    for (needle, replacement) in [(from.to_string(), to.to_string()), (capitalize(from), capitalize(to))] {
        let q = tokenize(&needle);
        if let Some(k) = toks.windows(q.len()).position(|w| w.iter().zip(&q).all(|(a, b)| a == b)) {
            let (start, end) = (spans[k].0, spans[k + q.len() - 1].1);
            return Some(format!("{}{}{}", &sentence[..start], replacement, &sentence[end..]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_tables_load() {
        let syn = builtin_synonyms();
        assert_eq!(syn.len(), 20);
        assert_eq!(syn[2].british, "doughnut");
        assert_eq!(syn[2].opus_freqs, (2014, 1889));
        assert_eq!(syn[11].american, "shopping cart");
        let idioms = builtin_idioms();
        assert_eq!(idioms.len(), 20);
        let heart = idioms.iter().find(|i| i.idiom == "by heart").unwrap();
        assert_eq!(heart.literal_dutch, vec!["hart"]);
        assert!(idioms.iter().all(|i| i.opus_freq.is_none()));
    }

    #[test]
    fn condition_names_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.name().parse::<Condition>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
        for d in DataType::ALL {
            assert_eq!(serde_json::to_string(&d).unwrap(), format!("\"{}\"", d.name()));
        }
    }

    #[test]
    fn substitution_is_an_involution() {
        let s = "Zip code and zip code .";
        let once = substitute(s, "zip code", "postcode").unwrap();
        assert_eq!(once, "Zip code and postcode .");
        assert_eq!(substitute(&once, "postcode", "zip code").unwrap(), s);
        assert_eq!(substitute("Donut time", "donut", "doughnut").unwrap(), "Doughnut time");
        assert!(substitute("nothing here", "donut", "doughnut").is_none());
    }

    #[test]
    fn rejects_bad_metadata() {
        assert!(parse_synonyms("a\t1\tb\t2\tx\tno placeholder").is_err());
        assert!(parse_idioms("by heart\t\tI knew it by heart\tx\thart").is_err());
        assert!(parse_idioms("by heart\theart\tI knew it\tx\thart").is_err());
    }
}
