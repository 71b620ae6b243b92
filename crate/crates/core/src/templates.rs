//! Fixed-structure sentence templates, their binding spaces, and slot-level
//! perturbations.
//!
//! A template is a sequence of [`Element`]s. Every non-literal element draws
//! its surface from a pool that depends on the values of the template's
//! agreement variables; the binding space is the disjoint union, over
//! variable assignments, of the cartesian product of those pools. Indices
//! into that space are decoded in mixed radix, which is what makes seeded
//! sampling without replacement exact.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::{base_form, Lexicon, LexiconError, Number, Pos};
use crate::text::{capitalize, decapitalize, seeded_rng};

const BUILTIN_SYNTHETIC: &str = include_str!("../data/synthetic_templates.txt");

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown template id {0}")]
    UnknownTemplate(u32),
    #[error("binding space exhausted for template {template_id}: requested {requested}, maximum {max}")]
    Exhausted {
        template_id: u32,
        requested: usize,
        max: u64,
    },
    #[error("no substitute for {surface:?} in template {template_id}")]
    NoSubstitute { template_id: u32, surface: String },
    #[error("template {template_id} has no {role:?} slot")]
    MissingRole { template_id: u32, role: Role },
    #[error("empty filler pool for template {0}")]
    EmptyFillerPool(u32),
    #[error("sentence does not belong to template {0}'s binding space")]
    ForeignBinding(u32),
    #[error("count must be at least 1")]
    ZeroCount,
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("reading templates: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NumberConstraint {
    /// Any entry of the class, regardless of number.
    Free,
    Fixed(Number),
    /// Shares its number with every element carrying the same variable.
    Agree(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Subject,
    Object,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSpec {
    pub pos: Pos,
    pub subcategory: String,
    pub number: NumberConstraint,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Literal(String),
    Slot(SlotSpec),
    /// A fixed verb lemma inflected for the number of `var`.
    AgreeingVerb { lemma: String, var: String },
    /// A corpus-harvested phrase (semi-natural templates).
    Filler { label: String, var: Option<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: u32,
    pub elements: Vec<Element>,
}

impl Template {
    /// Parse a template body such as
    /// `The [N:people:a]@subj [V:transitive:a] the [N:elite:sg]@obj .`
    pub fn parse(id: u32, body: &str) -> Result<Self, String> {
        let elements = body
            .split_whitespace()
            .map(parse_element)
            .collect::<Result<Vec<_>, _>>()?;
        if elements.is_empty() {
            return Err("empty template".into());
        }
        match elements.last() {
            Some(Element::Literal(p)) if p == "." || p == "?" => {}
            _ => return Err("template must end with \" .\" or \" ?\"".into()),
        }
        Ok(Template { id, elements })
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.elements
            .iter()
            .any(|e| matches!(e, Element::Slot(s) if s.role == role))
    }

    fn role_position(&self, role: Role) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| matches!(e, Element::Slot(s) if s.role == role))
    }
}

fn parse_element(token: &str) -> Result<Element, String> {
    if let Some(rest) = token.strip_prefix('[') {
        let (inner, suffix) = rest
            .split_once(']')
            .ok_or_else(|| format!("unclosed slot {token:?}"))?;
        let role = match suffix {
            "" => Role::Other,
            "@subj" => Role::Subject,
            "@obj" => Role::Object,
            other => return Err(format!("unknown role suffix {other:?}")),
        };
        let parts: Vec<&str> = inner.split(':').collect();
        if !(2..=3).contains(&parts.len()) {
            return Err(format!("slot {token:?} must be [POS:subcategory(:number)]"));
        }
        let number = match parts.get(2) {
            None => NumberConstraint::Free,
            Some(n) => match n.parse::<Number>() {
                Ok(num) => NumberConstraint::Fixed(num),
                Err(_) if is_identifier(n) => NumberConstraint::Agree(n.to_string()),
                Err(e) => return Err(e),
            },
        };
        return Ok(Element::Slot(SlotSpec {
            pos: parts[0].parse()?,
            subcategory: parts[1].to_string(),
            number,
            role,
        }));
    }
    if let Some(inner) = token.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
        let (lemma, var) = inner
            .split_once(':')
            .ok_or_else(|| format!("agreeing verb {token:?} must be {{lemma:var}}"))?;
        return Ok(Element::AgreeingVerb {
            lemma: lemma.to_string(),
            var: var.to_string(),
        });
    }
    if let Some(inner) = token.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        let (label, var) = match inner.split_once(':') {
            Some((l, v)) => (l, Some(v.to_string())),
            None => (inner, None),
        };
        return Ok(Element::Filler {
            label: label.to_string(),
            var,
        });
    }
    Ok(Element::Literal(token.to_string()))
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse a template file: `id<TAB>body` per line, `#` comments.
pub fn parse_template_file(text: &str) -> Result<Vec<Template>, TemplateError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| TemplateError::Syntax {
            line: lineno + 1,
            message,
        };
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| syntax("expected id<TAB>template".into()))?;
        let id: u32 = id
            .trim()
            .parse()
            .map_err(|_| syntax(format!("bad template id {id:?}")))?;
        out.push(Template::parse(id, body).map_err(syntax)?);
    }
    Ok(out)
}

/// A harvested phrase that fills a fragment slot. `number` is set when the
/// phrase carries subject agreement of its own (e.g. "are gon na ...").
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filler {
    pub text: String,
    pub number: Option<Number>,
}

/// A template instance. `binding` maps element index to surface for every
/// non-literal element; `text` is reproducible from it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundSentence {
    pub template_id: u32,
    pub binding: BTreeMap<usize, String>,
    pub text: String,
}

#[derive(Debug, Clone)]
struct Block {
    pools: Vec<Vec<String>>,
    size: u64,
}

/// The enumerable set of all valid bindings of one template.
#[derive(Debug, Clone)]
pub struct BindingSpace {
    template: Template,
    lexicon: Arc<Lexicon>,
    positions: Vec<usize>,
    blocks: Vec<Block>,
    total: u64,
}

impl BindingSpace {
    pub fn new(
        template: Template,
        lexicon: Arc<Lexicon>,
        fillers: &[Filler],
    ) -> Result<Self, TemplateError> {
        let mut vars: Vec<String> = Vec::new();
        for e in &template.elements {
            let var = match e {
                Element::Slot(SlotSpec {
                    number: NumberConstraint::Agree(v),
                    ..
                })
                | Element::AgreeingVerb { var: v, .. } => Some(v),
                Element::Filler { var: Some(v), .. } => Some(v),
                _ => None,
            };
            if let Some(v) = var {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
        }
        let has_filler = template
            .elements
            .iter()
            .any(|e| matches!(e, Element::Filler { .. }));
        if has_filler && fillers.is_empty() {
            return Err(TemplateError::EmptyFillerPool(template.id));
        }
        let positions: Vec<usize> = template
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| !matches!(e, Element::Literal(_)))
            .map(|(i, _)| i)
            .collect();

        let mut blocks = Vec::new();
        let assignments = 1usize << vars.len();
        for code in 0..assignments {
            let number_of = |v: &str| {
                let k = vars.iter().position(|x| x == v).expect("collected above");
                Number::AGREEING[(code >> (vars.len() - 1 - k)) & 1]
            };
            let mut pools = Vec::with_capacity(positions.len());
            for &p in &positions {
                let pool = match &template.elements[p] {
                    Element::Slot(spec) => match &spec.number {
                        NumberConstraint::Free => lexicon.lookup_any(spec.pos, &spec.subcategory)?,
                        NumberConstraint::Fixed(n) => {
                            lexicon.lookup(spec.pos, &spec.subcategory, *n)?
                        }
                        NumberConstraint::Agree(v) => {
                            lexicon.lookup(spec.pos, &spec.subcategory, number_of(v))?
                        }
                    },
                    Element::AgreeingVerb { lemma, var } => {
                        vec![lexicon.agree(number_of(var), lemma)?]
                    }
                    Element::Filler { var, .. } => {
                        let wanted = var.as_deref().map(number_of);
                        let mut seen = std::collections::HashSet::new();
                        fillers
                            .iter()
                            .filter(|f| match (wanted, f.number) {
                                (Some(w), Some(n)) => w == n,
                                _ => true,
                            })
                            .filter(|f| seen.insert(f.text.clone()))
                            .map(|f| f.text.clone())
                            .collect()
                    }
                    Element::Literal(_) => unreachable!("literals are not positions"),
                };
                pools.push(pool);
            }
            let size = pools
                .iter()
                .try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64))
                .expect("binding space fits in u64");
            if size > 0 {
                blocks.push(Block { pools, size });
            }
        }
        let total = blocks.iter().map(|b| b.size).sum();
        Ok(BindingSpace {
            template,
            lexicon,
            positions,
            blocks,
            total,
        })
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    /// Number of distinct bindings.
    pub fn size(&self) -> u64 {
        self.total
    }

    /// The binding with the given index in `0..size()`.
    pub fn decode(&self, mut index: u64) -> BTreeMap<usize, String> {
        assert!(index < self.total, "binding index out of range");
        let block = self
            .blocks
            .iter()
            .find(|b| {
                if index < b.size {
                    true
                } else {
                    index -= b.size;
                    false
                }
            })
            .expect("index within total");
        let mut binding = BTreeMap::new();
        for (slot, pool) in self.positions.iter().zip(&block.pools).rev() {
            let len = pool.len() as u64;
            binding.insert(*slot, pool[(index % len) as usize].clone());
            index /= len;
        }
        binding
    }

    fn chunks(&self, binding: &BTreeMap<usize, String>) -> Vec<String> {
        self.template
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| match e {
                Element::Literal(t) => t.clone(),
                _ => {
                    let surface = binding.get(&i).cloned().unwrap_or_default();
                    if i == 0 {
                        capitalize(&surface)
                    } else {
                        surface
                    }
                }
            })
            .collect()
    }

    pub fn render(&self, binding: &BTreeMap<usize, String>) -> String {
        self.chunks(binding).join(" ")
    }

    fn bind(&self, binding: BTreeMap<usize, String>) -> BoundSentence {
        BoundSentence {
            template_id: self.template.id,
            text: self.render(&binding),
            binding,
        }
    }

    /// `count` distinct bindings drawn without replacement.
    pub fn sample(&self, count: usize, seed: u64) -> Result<Vec<BoundSentence>, TemplateError> {
        if count == 0 {
            return Err(TemplateError::ZeroCount);
        }
        if count as u64 > self.total {
            return Err(TemplateError::Exhausted {
                template_id: self.template.id,
                requested: count,
                max: self.total,
            });
        }
        let mut rng = seeded_rng(seed);
        let length = usize::try_from(self.total).expect("binding space fits in usize");
        Ok(index::sample(&mut rng, length, count)
            .into_iter()
            .map(|i| self.bind(self.decode(i as u64)))
            .collect())
    }

    /// One binding drawn uniformly.
    pub fn sample_one(&self, rng: &mut impl Rng) -> BoundSentence {
        self.bind(self.decode(rng.random_range(0..self.total)))
    }

    fn block_of(&self, s: &BoundSentence) -> Option<&Block> {
        self.blocks.iter().find(|b| {
            self.positions
                .iter()
                .zip(&b.pools)
                .all(|(p, pool)| s.binding.get(p).is_some_and(|w| pool.contains(w)))
        })
    }

    /// Replace the noun in the first slot carrying `role` by a different
    /// noun of the same class and number.
    pub fn perturb(
        &self,
        s: &BoundSentence,
        role: Role,
        seed: u64,
    ) -> Result<BoundSentence, TemplateError> {
        let id = self.template.id;
        if s.template_id != id {
            return Err(TemplateError::ForeignBinding(id));
        }
        let slot = self
            .template
            .role_position(role)
            .ok_or(TemplateError::MissingRole { template_id: id, role })?;
        let Element::Slot(spec) = &self.template.elements[slot] else {
            unreachable!("role positions are slots")
        };
        let block = self.block_of(s).ok_or(TemplateError::ForeignBinding(id))?;
        let k = self.positions.iter().position(|p| *p == slot).expect("slot is a position");
        let current = &s.binding[&slot];
        let numbers = self.lexicon.numbers_of(spec.pos, &spec.subcategory, current);
        let candidates: Vec<&String> = block.pools[k]
            .iter()
            .filter(|w| *w != current)
            .filter(|w| {
                self.lexicon
                    .numbers_of(spec.pos, &spec.subcategory, w)
                    .iter()
                    .any(|n| numbers.contains(n))
            })
            .collect();
        if candidates.is_empty() {
            return Err(TemplateError::NoSubstitute {
                template_id: id,
                surface: current.clone(),
            });
        }
        let mut rng = seeded_rng(seed);
        let pick = candidates[rng.random_range(0..candidates.len())].clone();
        let mut binding = s.binding.clone();
        binding.insert(slot, pick);
        Ok(self.bind(binding))
    }

    /// Render `s` with a relative clause (e.g. "that eats the doughnut")
    /// after a human noun. The clause verb is put in the plural when the
    /// noun is plural.
    pub fn attach_clause(&self, s: &BoundSentence, clause: &str) -> Result<String, TemplateError> {
        let id = self.template.id;
        let human = |spec: &SlotSpec| {
            spec.pos == Pos::N && matches!(spec.subcategory.as_str(), "people" | "elite")
        };
        let slots = || {
            self.template.elements.iter().enumerate().filter_map(|(i, e)| match e {
                Element::Slot(spec) if human(spec) => Some((i, spec)),
                _ => None,
            })
        };
        let (at, spec) = slots()
            .find(|(_, s)| s.number == NumberConstraint::Fixed(Number::Singular))
            .or_else(|| slots().find(|(_, s)| s.role == Role::Object))
            .or_else(|| slots().find(|(_, s)| s.role == Role::Subject))
            .ok_or(TemplateError::MissingRole {
                template_id: id,
                role: Role::Object,
            })?;
        let noun = s.binding.get(&at).ok_or(TemplateError::ForeignBinding(id))?;
        let numbers = self.lexicon.numbers_of(spec.pos, &spec.subcategory, noun);
        let plural = numbers.contains(&Number::Plural) && !numbers.contains(&Number::Singular);
        let clause = if plural { pluralize_clause(clause) } else { clause.to_string() };
        let mut chunks = self.chunks(&s.binding);
        chunks.insert(at + 1, clause);
        Ok(chunks.join(" "))
    }
}

/// Put the verb of a "that <verb> ..." clause in the plural.
fn pluralize_clause(clause: &str) -> String {
    let mut words: Vec<String> = clause.split(' ').map(str::to_string).collect();
    if words.len() >= 2 && words[0].eq_ignore_ascii_case("that") {
        words[1] = base_form(&words[1]);
    }
    words.join(" ")
}

/// Anything that can produce and perturb template instances.
pub trait SentenceSource {
    fn template_ids(&self) -> Vec<u32>;
    fn space(&self, template_id: u32) -> Result<&BindingSpace, TemplateError>;

    fn instantiate(
        &self,
        template_id: u32,
        count: usize,
        seed: u64,
    ) -> Result<Vec<BoundSentence>, TemplateError> {
        self.space(template_id)?.sample(count, seed)
    }

    fn perturb(&self, s: &BoundSentence, role: Role, seed: u64) -> Result<BoundSentence, TemplateError> {
        self.space(s.template_id)?.perturb(s, role, seed)
    }

    fn attach_clause(&self, s: &BoundSentence, clause: &str) -> Result<String, TemplateError> {
        self.space(s.template_id)?.attach_clause(s, clause)
    }
}

/// The ten synthetic templates over a lexicon.
#[derive(Debug, Clone)]
pub struct SyntheticGrammar {
    lexicon: Arc<Lexicon>,
    spaces: BTreeMap<u32, BindingSpace>,
}

impl SyntheticGrammar {
    pub fn builtin() -> Self {
        Self::new(Arc::new(Lexicon::builtin()), parse_template_file(BUILTIN_SYNTHETIC).expect("builtin templates parse"))
            .expect("builtin templates resolve against the builtin lexicon")
    }

    pub fn with_lexicon(lexicon: Arc<Lexicon>) -> Result<Self, TemplateError> {
        Self::new(lexicon, parse_template_file(BUILTIN_SYNTHETIC)?)
    }

    pub fn load(lexicon: Arc<Lexicon>, path: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path)?;
        Self::new(lexicon, parse_template_file(&text)?)
    }

    pub fn new(lexicon: Arc<Lexicon>, templates: Vec<Template>) -> Result<Self, TemplateError> {
        let mut spaces = BTreeMap::new();
        for t in templates {
            spaces.insert(t.id, BindingSpace::new(t, lexicon.clone(), &[])?);
        }
        Ok(SyntheticGrammar { lexicon, spaces })
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    /// NP -> NP': change the subject noun.
    pub fn perturb_np(&self, s: &BoundSentence, seed: u64) -> Result<BoundSentence, TemplateError> {
        self.perturb(s, Role::Subject, seed)
    }

    /// VP -> VP': change the noun inside the verb phrase.
    pub fn perturb_vp(&self, s: &BoundSentence, seed: u64) -> Result<BoundSentence, TemplateError> {
        self.perturb(s, Role::Object, seed)
    }
}

impl SentenceSource for SyntheticGrammar {
    fn template_ids(&self) -> Vec<u32> {
        self.spaces.keys().copied().collect()
    }

    fn space(&self, template_id: u32) -> Result<&BindingSpace, TemplateError> {
        self.spaces
            .get(&template_id)
            .ok_or(TemplateError::UnknownTemplate(template_id))
    }
}

/// Byte range within a text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunction {
    pub text: String,
    /// Where the second conjunct sits in `text`.
    pub second: Span,
}

/// How the second conjunct's first letter is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondCasing {
    /// Generated sentences: "The child ..." becomes "the child ...".
    Lowercase,
    /// Natural sentences keep their casing.
    Preserve,
}

/// `"<first without final mark> and <second>"`.
pub fn conjoin(first: &str, second: &str, casing: SecondCasing) -> Conjunction {
    let head = strip_final_mark(first);
    let second = second.trim();
    let second = match casing {
        SecondCasing::Lowercase => decapitalize(second),
        SecondCasing::Preserve => second.to_string(),
    };
    let text = format!("{head} and {second}");
    let start = head.len() + " and ".len();
    Conjunction {
        second: Span {
            start,
            end: text.len(),
        },
        text,
    }
}

fn strip_final_mark(s: &str) -> &str {
    let s = s.trim_end();
    s.strip_suffix(['.', '?', '!']).map_or(s, str::trim_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn grammar() -> SyntheticGrammar {
        SyntheticGrammar::builtin()
    }

    #[test]
    fn template_one_shape() {
        let g = grammar();
        let out = g.instantiate(1, 3000, 11).unwrap();
        assert_eq!(out.len(), 3000);
        let lex = g.lexicon();
        for s in &out {
            let toks = tokenize(&s.text);
            assert_eq!(toks.len(), 6);
            assert_eq!(toks[0], "The");
            assert_eq!(toks[3], "the");
            assert_eq!(toks[5], ".");
            assert!(lex.lookup_any(Pos::N, "people").unwrap().contains(&toks[1]));
            assert!(lex.lookup(Pos::N, "elite", Number::Singular).unwrap().contains(&toks[4]));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = grammar();
        assert_eq!(g.instantiate(1, 1, 5).unwrap(), g.instantiate(1, 1, 5).unwrap());
        assert_eq!(g.instantiate(7, 50, 5).unwrap(), g.instantiate(7, 50, 5).unwrap());
    }

    #[test]
    fn exhaustion_reports_maximum() {
        let lex = Lexicon::parse(
            "poet\tN\tpeople\tsg\npoets\tN\tpeople\tpl\nking\tN\telite\tsg\n\
             sees\tV\ttransitive\tsg\nsee\tV\ttransitive\tpl\n",
        )
        .unwrap();
        let t = Template::parse(1, "The [N:people:a]@subj [V:transitive:a] the [N:elite:sg]@obj .").unwrap();
        let g = SyntheticGrammar::new(Arc::new(lex), vec![t]).unwrap();
        // brute force: subject number in {sg, pl}, one noun and one verb each, one object
        assert_eq!(g.space(1).unwrap().size(), 2);
        assert_eq!(g.instantiate(1, 2, 0).unwrap().len(), 2);
        match g.instantiate(1, 3, 0).unwrap_err() {
            TemplateError::Exhausted { max, .. } => assert_eq!(max, 2),
            e => panic!("unexpected {e}"),
        }
        // only one singular people noun: no substitute
        let s = g.instantiate(1, 2, 0).unwrap().remove(0);
        assert!(matches!(g.perturb_np(&s, 0), Err(TemplateError::NoSubstitute { .. })));
    }

    #[test]
    fn perturb_np_keeps_number_and_other_slots() {
        let g = grammar();
        let lex = g.lexicon().clone();
        for s in g.instantiate(9, 200, 3).unwrap() {
            let p = g.perturb_np(&s, 1).unwrap();
            let changed: Vec<_> = s.binding.keys().filter(|k| s.binding[k] != p.binding[k]).collect();
            assert_eq!(changed.len(), 1);
            let slot = *changed[0];
            assert_eq!(slot, 1);
            assert_eq!(
                lex.numbers_of(Pos::N, "people", &s.binding[&slot]),
                lex.numbers_of(Pos::N, "people", &p.binding[&slot])
            );
        }
    }

    #[test]
    fn perturbations_change_one_token() {
        let g = grammar();
        for id in g.template_ids() {
            for s in g.instantiate(id, 100, id as u64).unwrap() {
                for p in [g.perturb_np(&s, 9).unwrap(), g.perturb_vp(&s, 9).unwrap()] {
                    let (a, b) = (tokenize(&s.text), tokenize(&p.text));
                    assert_eq!(a.len(), b.len());
                    assert_eq!(a.iter().zip(&b).filter(|(x, y)| x != y).count(), 1, "{} / {}", s.text, p.text);
                }
            }
        }
    }

    #[test]
    fn template_six_object_is_embedded_plural_noun() {
        let g = grammar();
        let s = g.instantiate(6, 1, 4).unwrap().remove(0);
        let p = g.perturb_vp(&s, 4).unwrap();
        let lex = g.lexicon();
        let plural = lex.lookup(Pos::N, "people", Number::Plural).unwrap();
        let obj = &p.binding[&5];
        assert!(plural.contains(obj));
        assert_ne!(obj, &s.binding[&5]);
    }

    #[test]
    fn sentence_initial_slot_is_capitalised() {
        let lex = Arc::new(Lexicon::builtin());
        let t = Template::parse(1, "[N:people:pl]@subj [V:intransitive:pl] .").unwrap();
        let g = SyntheticGrammar::new(lex, vec![t]).unwrap();
        let s = g.instantiate(1, 1, 0).unwrap().remove(0);
        assert!(s.text.chars().next().unwrap().is_uppercase());
        let p = g.perturb_np(&s, 0).unwrap();
        assert!(p.text.chars().next().unwrap().is_uppercase());
        assert!(p.binding[&0].chars().next().unwrap().is_lowercase());
    }

    #[test]
    fn clause_attaches_after_singular_object() {
        let g = grammar();
        let s = g.instantiate(1, 1, 0).unwrap().remove(0);
        let out = g.attach_clause(&s, "that eats the doughnut").unwrap();
        let obj = &s.binding[&4];
        assert!(out.ends_with(&format!("the {obj} that eats the doughnut .")));
        // plural embedded noun in template 6 gets a plural clause verb
        let s6 = g.instantiate(6, 1, 0).unwrap().remove(0);
        let out6 = g.attach_clause(&s6, "that eats the doughnut").unwrap();
        assert!(out6.contains(&format!("{} that eat the doughnut", s6.binding[&5])));
    }

    #[test]
    fn conjoin_example() {
        let c = conjoin("The poet criticises the king .", "The child sleeps .", SecondCasing::Lowercase);
        assert_eq!(c.text, "The poet criticises the king and the child sleeps .");
        assert_eq!(&c.text[c.second.start..c.second.end], "the child sleeps .");
        assert_eq!(c.text.find("the child sleeps").unwrap(), c.second.start);
    }

    #[test]
    fn conjoin_self_and_natural_casing() {
        let x = "Peter said so .";
        let c = conjoin(x, x, SecondCasing::Preserve);
        assert_eq!(c.text.matches("Peter said so").count(), 2);
        assert!(c.text.ends_with(x));
    }

    #[test]
    fn dsl_errors() {
        assert!(Template::parse(1, "The [N:people").is_err());
        assert!(Template::parse(1, "The [N:people] sleeps").is_err());
        assert!(Template::parse(1, "The [N:people]@who .").is_err());
        assert!(Template::parse(1, "The [Q:people] .").is_err());
        assert!(parse_template_file("x\tThe [N:people] .").is_err());
    }
}
