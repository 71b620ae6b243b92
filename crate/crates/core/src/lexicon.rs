//! POS-, subcategory- and number-tagged English vocabulary.
//!
//! The lexicon is a tab-separated table with columns
//! `surface  pos  subcategory  number`, `#` starting a comment. Number is
//! one of `sg`, `pl` or `inv` (the long forms `singular`, `plural`,
//! `invariant` are accepted too).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN: &str = include_str!("../data/lexicon.tsv");

/// Verbs whose third-person singular is not produced by the suffix rule.
const INFLECTION_EXCEPTIONS: &[(&str, &str)] =
    &[("be", "is"), ("have", "has"), ("do", "does"), ("go", "goes")];

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("unknown lexical class {pos}:{subcategory} (number {number})")]
    UnknownClass {
        pos: Pos,
        subcategory: String,
        number: Number,
    },
    #[error("incomplete paradigm for verb lemma {lemma:?}: missing {missing} form {form:?}")]
    IncompleteParadigm {
        lemma: String,
        missing: Number,
        form: String,
    },
    #[error("lexicon line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pos {
    N,
    V,
    Adv,
    P,
    Pro,
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "N" => Ok(Pos::N),
            "V" => Ok(Pos::V),
            "Adv" => Ok(Pos::Adv),
            "P" => Ok(Pos::P),
            "Pro" => Ok(Pos::Pro),
            other => Err(format!("unknown POS tag {other:?}")),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pos::N => "N",
            Pos::V => "V",
            Pos::Adv => "Adv",
            Pos::P => "P",
            Pos::Pro => "Pro",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Number {
    Singular,
    Plural,
    Invariant,
}

impl Number {
    /// The two numbers an agreement variable ranges over.
    pub const AGREEING: [Number; 2] = [Number::Singular, Number::Plural];

    pub fn short(self) -> &'static str {
        match self {
            Number::Singular => "sg",
            Number::Plural => "pl",
            Number::Invariant => "inv",
        }
    }
}

impl FromStr for Number {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sg" | "singular" => Ok(Number::Singular),
            "pl" | "plural" => Ok(Number::Plural),
            "inv" | "invariant" => Ok(Number::Invariant),
            other => Err(format!("unknown number {other:?}")),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub surface: String,
    pub pos: Pos,
    pub subcategory: String,
    pub number: Number,
}

/// Read-only vocabulary store. Lookups are pure and return surfaces in
/// lexicographic order.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    classes: BTreeMap<(Pos, String), BTreeMap<Number, BTreeSet<String>>>,
}

impl Lexicon {
    /// The vocabulary shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin lexicon is well-formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| LexiconError::Syntax {
                line: lineno + 1,
                message,
            };
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(syntax(format!("expected 4 columns, found {}", cols.len())));
            }
            let surface = cols[0];
            if surface.is_empty() || surface.contains(char::is_whitespace) {
                return Err(syntax(format!("surface {surface:?} must be a single token")));
            }
            let entry = LexiconEntry {
                surface: surface.to_string(),
                pos: cols[1].parse().map_err(syntax)?,
                subcategory: cols[2].to_string(),
                number: cols[3].parse().map_err(syntax)?,
            };
            let fresh = lexicon
                .classes
                .entry((entry.pos, entry.subcategory.clone()))
                .or_default()
                .entry(entry.number)
                .or_default()
                .insert(entry.surface.clone());
            if !fresh {
                return Err(syntax(format!(
                    "duplicate entry {} {}:{}:{}",
                    entry.surface, entry.pos, entry.subcategory, entry.number
                )));
            }
            lexicon.entries.push(entry);
        }
        Ok(lexicon)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_class(&self, pos: Pos, subcategory: &str) -> bool {
        self.classes.contains_key(&(pos, subcategory.to_string()))
    }

    /// All surfaces of the class with the given number. Invariant entries
    /// match any singular or plural query.
    pub fn lookup(
        &self,
        pos: Pos,
        subcategory: &str,
        number: Number,
    ) -> Result<Vec<String>, LexiconError> {
        let unknown = || LexiconError::UnknownClass {
            pos,
            subcategory: subcategory.to_string(),
            number,
        };
        let class = self
            .classes
            .get(&(pos, subcategory.to_string()))
            .ok_or_else(unknown)?;
        let mut out = BTreeSet::new();
        if let Some(words) = class.get(&number) {
            out.extend(words.iter().cloned());
        }
        if number != Number::Invariant {
            if let Some(words) = class.get(&Number::Invariant) {
                out.extend(words.iter().cloned());
            }
        }
        if out.is_empty() {
            return Err(unknown());
        }
        Ok(out.into_iter().collect())
    }

    /// Every surface of the class regardless of number.
    pub fn lookup_any(&self, pos: Pos, subcategory: &str) -> Result<Vec<String>, LexiconError> {
        let class = self
            .classes
            .get(&(pos, subcategory.to_string()))
            .ok_or_else(|| LexiconError::UnknownClass {
                pos,
                subcategory: subcategory.to_string(),
                number: Number::Invariant,
            })?;
        let all: BTreeSet<String> = class.values().flatten().cloned().collect();
        Ok(all.into_iter().collect())
    }

    /// Numbers under which `surface` is listed in the class.
    pub fn numbers_of(&self, pos: Pos, subcategory: &str, surface: &str) -> Vec<Number> {
        self.classes
            .get(&(pos, subcategory.to_string()))
            .map(|class| {
                class
                    .iter()
                    .filter(|(_, words)| words.contains(surface))
                    .map(|(n, _)| *n)
                    .collect()
            })
            .unwrap_or_default()
    }

    fn has_verb(&self, surface: &str, number: Number) -> bool {
        self.classes.iter().any(|((pos, _), by_number)| {
            *pos == Pos::V && by_number.get(&number).is_some_and(|w| w.contains(surface))
        })
    }

    /// The verb form agreeing with a subject of the given number.
    pub fn agree(&self, subject_number: Number, verb_lemma: &str) -> Result<String, LexiconError> {
        let singular = third_person_singular(verb_lemma);
        if !self.has_verb(verb_lemma, Number::Plural) {
            return Err(LexiconError::IncompleteParadigm {
                lemma: verb_lemma.to_string(),
                missing: Number::Plural,
                form: verb_lemma.to_string(),
            });
        }
        if !self.has_verb(&singular, Number::Singular) {
            return Err(LexiconError::IncompleteParadigm {
                lemma: verb_lemma.to_string(),
                missing: Number::Singular,
                form: singular,
            });
        }
        Ok(match subject_number {
            Number::Singular => singular,
            Number::Plural | Number::Invariant => verb_lemma.to_string(),
        })
    }

    /// Structural problems against the vocabulary invariants, empty when the
    /// lexicon is complete.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        for ((pos, sub), by_number) in &self.classes {
            let count = |n| by_number.get(&n).map_or(0, BTreeSet::len);
            let (sg, pl) = (count(Number::Singular), count(Number::Plural));
            match (pos, sub.as_str()) {
                (Pos::N, "people" | "elite" | "vehicle") if sg != pl || sg == 0 => issues.push(
                    format!("N:{sub} has {sg} singular and {pl} plural forms"),
                ),
                (Pos::N, "quantity") if sg == 0 || pl != 0 => {
                    issues.push(format!("N:quantity must be singular only ({sg} sg, {pl} pl)"))
                }
                (Pos::V, _) => {
                    for lemma in by_number.get(&Number::Plural).into_iter().flatten() {
                        let form = third_person_singular(lemma);
                        if !by_number
                            .get(&Number::Singular)
                            .is_some_and(|w| w.contains(&form))
                        {
                            issues.push(format!("V:{sub} lemma {lemma:?} lacks singular {form:?}"));
                        }
                    }
                    if sg != pl {
                        issues.push(format!("V:{sub} has {sg} singular and {pl} plural forms"));
                    }
                }
                _ => {}
            }
        }
        issues
    }
}

/// English third-person singular present of a verb lemma.
pub fn third_person_singular(lemma: &str) -> String {
    if let Some((_, form)) = INFLECTION_EXCEPTIONS.iter().find(|(l, _)| *l == lemma) {
        return form.to_string();
    }
    let bytes = lemma.as_bytes();
    let n = bytes.len();
    if n >= 2 && bytes[n - 1] == b'y' && !is_vowel(bytes[n - 2]) {
        return format!("{}ies", &lemma[..n - 1]);
    }
    if ["s", "x", "z", "ch", "sh"].iter().any(|s| lemma.ends_with(s)) {
        return format!("{lemma}es");
    }
    format!("{lemma}s")
}

/// Inverse of [`third_person_singular`]; words that are not a third-person
/// singular present (e.g. past tense) come back unchanged.
pub fn base_form(verb: &str) -> String {
    if let Some((lemma, _)) = INFLECTION_EXCEPTIONS.iter().find(|(_, f)| *f == verb) {
        return lemma.to_string();
    }
    if let Some(stem) = verb.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    for suffix in ["sses", "xes", "zes", "ches", "shes"] {
        if verb.ends_with(suffix) {
            return verb[..verb.len() - 2].to_string();
        }
    }
    match verb.strip_suffix('s') {
        Some(stem) if !stem.is_empty() && !stem.ends_with('s') => stem.to_string(),
        _ => verb.to_string(),
    }
}

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}
