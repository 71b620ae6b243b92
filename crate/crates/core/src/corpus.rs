//! Sentence-aligned parallel corpus: exact phrase search, unigram statistics,
//! literal-translation rates, and profile-matched sampling.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::OnceLock;

use rand::seq::index;
use thiserror::Error;

use crate::text::{is_punctuation, seeded_rng, tokenize};

pub const DEFAULT_LENGTH_TOL: f64 = 3.0;
pub const DEFAULT_FREQ_TOL: f64 = 0.5;
pub const IDIOM_MIN_OCCURRENCES: usize = 200;
pub const IDIOM_MIN_NON_LITERAL: f64 = 0.8;

const STOPWORDS: &[&str] = &[
    "a", "about", "after", "all", "also", "am", "an", "and", "any", "are", "as", "at", "be",
    "been", "before", "being", "but", "by", "can", "could", "did", "do", "does", "for", "from",
    "had", "has", "have", "he", "her", "here", "him", "his", "how", "i", "if", "in", "into", "is",
    "it", "its", "me", "more", "my", "no", "not", "of", "on", "one", "only", "or", "other", "our",
    "out", "over", "s", "she", "should", "so", "some", "such", "t", "than", "that", "the", "their",
    "them", "then", "there", "these", "they", "this", "those", "to", "up", "us", "very", "was",
    "we", "were", "what", "when", "which", "who", "will", "with", "would", "you", "your",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line-count mismatch: {source_lines} source lines vs {target_lines} target lines")]
    LineCountMismatch {
        source_lines: usize,
        target_lines: usize,
    },
    #[error("empty phrase")]
    EmptyPhrase,
    #[error("no occurrences")]
    NoOccurrences,
    #[error("record id {0} out of range")]
    UnknownRecord(usize),
    #[error("empty sentence has no frequency profile")]
    EmptyProfile,
    #[error("only {available} sentences match the profile, {requested} requested")]
    TooFewQualifiers { available: usize, requested: usize },
    #[error("reading corpus: {0}")]
    Io(#[from] std::io::Error),
}

/// Length and mean log-frequency of a sentence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyProfile {
    pub length: f64,
    pub mean_log_freq: f64,
}

impl FrequencyProfile {
    /// Component-wise mean; `None` for an empty slice.
    pub fn mean(profiles: &[FrequencyProfile]) -> Option<FrequencyProfile> {
        if profiles.is_empty() {
            return None;
        }
        let n = profiles.len() as f64;
        Some(FrequencyProfile {
            length: profiles.iter().map(|p| p.length).sum::<f64>() / n,
            mean_log_freq: profiles.iter().map(|p| p.mean_log_freq).sum::<f64>() / n,
        })
    }

    pub fn matches(&self, other: &FrequencyProfile, length_tol: f64, freq_tol: f64) -> bool {
        (self.length - other.length).abs() <= length_tol
            && (self.mean_log_freq - other.mean_log_freq).abs() <= freq_tol
    }
}

/// Result of the idiom admission filter.
#[derive(Debug, Clone, PartialEq)]
pub struct IdiomFilterOutcome {
    pub occurrences: usize,
    pub literal_rate: Option<f64>,
    pub admitted: bool,
}

#[derive(Debug, Default)]
pub struct ParallelCorpus {
    sources: Vec<String>,
    targets: Vec<String>,
    vocab: HashMap<String, u32>,
    tokens: Vec<Vec<u32>>,
    postings: Vec<Vec<u32>>,
    freq: HashMap<String, u64>,
    profiles: OnceLock<Vec<Option<FrequencyProfile>>>,
}

impl ParallelCorpus {
    /// Read two aligned files, one sentence per line.
    pub fn ingest(source_path: impl AsRef<Path>, target_path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let mut src = BufReader::new(File::open(source_path)?).lines();
        let mut tgt = BufReader::new(File::open(target_path)?).lines();
        let mut corpus = ParallelCorpus::default();
        let (mut ns, mut nt) = (0, 0);
        loop {
            match (src.next().transpose()?, tgt.next().transpose()?) {
                (Some(s), Some(t)) => {
                    ns += 1;
                    nt += 1;
                    corpus.push(s, t);
                }
                (None, None) => break,
                (s, t) => {
                    ns += s.is_some() as usize + src.by_ref().count();
                    nt += t.is_some() as usize + tgt.by_ref().count();
                    return Err(CorpusError::LineCountMismatch {
                        source_lines: ns,
                        target_lines: nt,
                    });
                }
            }
        }
        Ok(corpus)
    }

    pub fn from_pairs<S: Into<String>, T: Into<String>>(pairs: impl IntoIterator<Item = (S, T)>) -> Self {
        let mut corpus = ParallelCorpus::default();
        for (s, t) in pairs {
            corpus.push(s.into(), t.into());
        }
        corpus
    }

    fn push(&mut self, source: String, target: String) {
        let id = self.sources.len() as u32;
        let mut ids = Vec::new();
        for tok in tokenize(&source) {
            *self.freq.entry(tok.to_lowercase()).or_insert(0) += 1;
            let next = self.vocab.len() as u32;
            let tid = *self.vocab.entry(tok).or_insert(next);
            if tid as usize == self.postings.len() {
                self.postings.push(Vec::new());
            }
            let posting = &mut self.postings[tid as usize];
            if posting.last() != Some(&id) {
                posting.push(id);
            }
            ids.push(tid);
        }
        self.tokens.push(ids);
        self.sources.push(source);
        self.targets.push(target);
        self.profiles = OnceLock::new();
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn source(&self, id: usize) -> Option<&str> {
        self.sources.get(id).map(String::as_str)
    }

    pub fn target(&self, id: usize) -> Option<&str> {
        self.targets.get(id).map(String::as_str)
    }

    /// Occurrences of a token, case-insensitive.
    pub fn frequency(&self, token: &str) -> u64 {
        self.freq.get(&token.to_lowercase()).copied().unwrap_or(0)
    }

    /// Records whose tokenized source contains `phrase` contiguously
    /// (case-sensitive), ascending.
    pub fn find_exact(&self, phrase: &str) -> Result<Vec<usize>, CorpusError> {
        let query = tokenize(phrase);
        if query.is_empty() {
            return Err(CorpusError::EmptyPhrase);
        }
        let Some(ids) = query.iter().map(|t| self.vocab.get(t).copied()).collect::<Option<Vec<u32>>>() else {
            return Ok(Vec::new());
        };
        let rarest = ids
            .iter()
            .min_by_key(|t| self.postings[**t as usize].len())
            .expect("query is nonempty");
        Ok(self.postings[*rarest as usize]
            .iter()
            .filter(|r| self.tokens[**r as usize].windows(ids.len()).any(|w| w == ids.as_slice()))
            .map(|r| *r as usize)
            .collect())
    }

    fn literal_hits(&self, ids: &[usize], keywords: &[&str]) -> Result<usize, CorpusError> {
        let keys: HashSet<String> = keywords.iter().map(|k| k.to_lowercase()).collect();
        let mut hits = 0usize;
        for &id in ids {
            let target = self.target(id).ok_or(CorpusError::UnknownRecord(id))?;
            if tokenize(target).iter().any(|t| keys.contains(&t.to_lowercase())) {
                hits += 1;
            }
        }
        Ok(hits)
    }

    /// Fraction of the given records whose lowercased target contains any
    /// keyword as a whole token.
    pub fn literal_rate(&self, ids: &[usize], keywords: &[&str]) -> Result<f64, CorpusError> {
        if ids.is_empty() {
            return Err(CorpusError::NoOccurrences);
        }
        Ok(self.literal_hits(ids, keywords)? as f64 / ids.len() as f64)
    }

    /// Admit an idiom with at least 200 exact matches of which more than
    /// 80% are translated without a literal keyword.
    pub fn filter_idiom(&self, idiom: &str, literal_keywords: &[&str]) -> Result<IdiomFilterOutcome, CorpusError> {
        let ids = self.find_exact(idiom)?;
        if ids.is_empty() {
            return Ok(IdiomFilterOutcome {
                occurrences: 0,
                literal_rate: None,
                admitted: false,
            });
        }
        let hits = self.literal_hits(&ids, literal_keywords)?;
        let n = ids.len();
        Ok(IdiomFilterOutcome {
            occurrences: n,
            literal_rate: Some(hits as f64 / n as f64),
            admitted: n >= IDIOM_MIN_OCCURRENCES && (n - hits) as f64 > IDIOM_MIN_NON_LITERAL * n as f64,
        })
    }

    /// Profile of any sentence against this corpus' unigram table.
    pub fn profile(&self, sentence: &str) -> Result<FrequencyProfile, CorpusError> {
        let toks = tokenize(sentence);
        if toks.is_empty() {
            return Err(CorpusError::EmptyProfile);
        }
        let content: Vec<f64> = toks
            .iter()
            .filter(|t| !is_punctuation(t))
            .map(|t| ((self.frequency(t) + 1) as f64).ln())
            .collect();
        let mean_log_freq = if content.is_empty() {
            0.0
        } else {
            content.iter().sum::<f64>() / content.len() as f64
        };
        Ok(FrequencyProfile {
            length: toks.len() as f64,
            mean_log_freq,
        })
    }

    fn record_profiles(&self) -> &[Option<FrequencyProfile>] {
        self.profiles
            .get_or_init(|| self.sources.iter().map(|s| self.profile(s).ok()).collect())
    }

    /// All record ids whose source matches `profile` within the tolerances.
    pub fn qualifiers(&self, profile: &FrequencyProfile, length_tol: f64, freq_tol: f64) -> Vec<usize> {
        self.record_profiles()
            .iter()
            .enumerate()
            .filter(|(_, p)| p.is_some_and(|p| p.matches(profile, length_tol, freq_tol)))
            .map(|(i, _)| i)
            .collect()
    }

    /// `n` distinct qualifying record ids, drawn uniformly with `seed`.
    pub fn sample_matched_ids(
        &self,
        profile: &FrequencyProfile,
        n: usize,
        seed: u64,
        length_tol: f64,
        freq_tol: f64,
    ) -> Result<Vec<usize>, CorpusError> {
        let pool = self.qualifiers(profile, length_tol, freq_tol);
        if pool.len() < n {
            return Err(CorpusError::TooFewQualifiers {
                available: pool.len(),
                requested: n,
            });
        }
        let mut rng = seeded_rng(seed);
        Ok(index::sample(&mut rng, pool.len(), n).into_iter().map(|i| pool[i]).collect())
    }

    pub fn sample_matched(
        &self,
        profile: &FrequencyProfile,
        n: usize,
        seed: u64,
        length_tol: f64,
        freq_tol: f64,
    ) -> Result<Vec<String>, CorpusError> {
        Ok(self
            .sample_matched_ids(profile, n, seed, length_tol, freq_tol)?
            .into_iter()
            .map(|i| self.sources[i].clone())
            .collect())
    }

    /// The `k` most frequent lowercase alphabetic tokens outside a stopword
    /// list, by count then alphabetically.
    pub fn frequent_words(&self, k: usize) -> Vec<String> {
        let stop: HashSet<&str> = STOPWORDS.iter().copied().collect();
        let mut words: Vec<(&String, &u64)> = self
            .freq
            .iter()
            .filter(|(w, _)| w.len() > 1 && w.chars().all(|c| c.is_alphabetic()) && !stop.contains(w.as_str()))
            .collect();
        words.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
        words.into_iter().take(k).map(|(w, _)| w.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn toy() -> ParallelCorpus {
        ParallelCorpus::from_pairs([
            ("I knew it by heart .", "Ik kende het uit het hoofd ."),
            ("The king sleeps .", "De koning slaapt ."),
            ("She learnt the poem by heart .", "Ze leerde het gedicht door hart ."),
            ("By heart , the king said .", "Uit het hoofd , zei de koning ."),
            ("the the the", "de de de"),
        ])
    }

    #[test]
    fn ingest_files() {
        let dir = tempfile::tempdir().unwrap();
        let (s, t) = (dir.path().join("s"), dir.path().join("t"));
        std::fs::write(&s, "a\nb\nc\n").unwrap();
        std::fs::write(&t, "x\ny\nz\n").unwrap();
        let c = ParallelCorpus::ingest(&s, &t).unwrap();
        assert_eq!(c.len(), 3);
        let mut f = std::fs::OpenOptions::new().append(true).open(&t).unwrap();
        writeln!(f, "w").unwrap();
        match ParallelCorpus::ingest(&s, &t).unwrap_err() {
            CorpusError::LineCountMismatch { source_lines, target_lines } => {
                assert_eq!((source_lines, target_lines), (3, 4))
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn frequency_is_case_insensitive_count() {
        let c = toy();
        assert_eq!(c.frequency("the"), 6);
        assert_eq!(c.frequency("missing"), 0);
    }

    #[test]
    fn exact_search_is_case_sensitive_and_contiguous() {
        let c = toy();
        assert_eq!(c.find_exact("by heart").unwrap(), vec![0, 2]);
        assert_eq!(c.find_exact("By heart").unwrap(), vec![3]);
        assert!(c.find_exact("heart by").unwrap().is_empty());
        assert!(c.find_exact("unicorn").unwrap().is_empty());
        assert!(matches!(c.find_exact("  "), Err(CorpusError::EmptyPhrase)));
    }

    #[test]
    fn literal_rate_token_level() {
        let c = toy();
        assert_eq!(c.literal_rate(&[0, 2], &["hart"]).unwrap(), 0.5);
        assert_eq!(c.literal_rate(&[0], &["har"]).unwrap(), 0.0);
        assert!(matches!(c.literal_rate(&[], &["hart"]), Err(CorpusError::NoOccurrences)));
        assert!(matches!(c.literal_rate(&[99], &["hart"]), Err(CorpusError::UnknownRecord(99))));
    }

    #[test]
    fn sampling_respects_profile() {
        let c = toy();
        let p = c.profile("The queen sleeps .").unwrap();
        assert_eq!(p.length, 4.0);
        let got = c.sample_matched(&p, 1, 3, 1.0, 10.0).unwrap();
        assert_eq!(got.len(), 1);
        assert!(matches!(
            c.sample_matched(&p, 50, 3, 0.0, 0.0),
            Err(CorpusError::TooFewQualifiers { .. })
        ));
    }

    #[test]
    fn frequent_words_skip_stopwords() {
        let c = toy();
        let w = c.frequent_words(3);
        assert_eq!(w[0], "heart");
        assert!(!w.contains(&"the".to_string()));
    }
}
