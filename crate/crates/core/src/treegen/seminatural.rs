//! Ten templates whose NP or VP slot is filled with corpus-harvested phrases.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::lexicon::{Lexicon, Number};
use crate::templates::{BindingSpace, Filler, SentenceSource, Template, TemplateError};

use super::tree::{parse_bracketed, Fragment};

const BUILTIN_TEMPLATES: &str = include_str!("../../data/seminatural_templates.txt");
const BUILTIN_FILLERS: &str = include_str!("../../data/fillers.tsv");
/// Parses of one example filler per template, in template order.
pub const SAMPLE_TREEBANK: &str = include_str!("../../data/sample_treebank.txt");

#[derive(Debug, Clone)]
pub struct SemiNaturalTemplate {
    pub template: Template,
    pub fragment: Fragment,
}

/// Parse `id<TAB>frame<TAB>fragment` lines.
pub fn parse_seminatural_templates(text: &str) -> Result<Vec<SemiNaturalTemplate>, TemplateError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| TemplateError::Syntax { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        let [id, frame, fragment] = cols[..] else {
            return Err(syntax("expected id<TAB>frame<TAB>fragment".into()));
        };
        let id: u32 = id.trim().parse().map_err(|_| syntax(format!("bad template id {id:?}")))?;
        let template = Template::parse(id, frame).map_err(syntax)?;
        let fragment = parse_bracketed(fragment).map_err(|e| syntax(e.to_string()))?;
        out.push(SemiNaturalTemplate { template, fragment });
    }
    Ok(out)
}

/// Parse `template_id<TAB>yield[<TAB>sg|pl]` lines.
pub fn parse_fillers(text: &str) -> Result<BTreeMap<u32, Vec<Filler>>, TemplateError> {
    let mut out: BTreeMap<u32, Vec<Filler>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| TemplateError::Syntax { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) || cols[1].trim().is_empty() {
            return Err(syntax("expected template_id<TAB>yield[<TAB>number]".into()));
        }
        let id: u32 = cols[0].trim().parse().map_err(|_| syntax(format!("bad template id {:?}", cols[0])))?;
        let number = match cols.get(2) {
            None => None,
            Some(n) => Some(n.trim().parse::<Number>().map_err(syntax)?),
        };
        out.entry(id).or_default().push(Filler {
            text: cols[1].trim().to_string(),
            number,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SemiNaturalGrammar {
    templates: BTreeMap<u32, SemiNaturalTemplate>,
    fillers: BTreeMap<u32, Vec<Filler>>,
    spaces: BTreeMap<u32, BindingSpace>,
}

impl SemiNaturalGrammar {
    pub fn builtin() -> Self {
        Self::with_lexicon(Arc::new(Lexicon::builtin())).expect("builtin semi-natural data resolves")
    }

    pub fn with_lexicon(lexicon: Arc<Lexicon>) -> Result<Self, TemplateError> {
        Self::new(
            lexicon,
            parse_seminatural_templates(BUILTIN_TEMPLATES)?,
            parse_fillers(BUILTIN_FILLERS)?,
        )
    }

    pub fn load(
        lexicon: Arc<Lexicon>,
        templates: impl AsRef<Path>,
        fillers: impl AsRef<Path>,
    ) -> Result<Self, TemplateError> {
        Self::new(
            lexicon,
            parse_seminatural_templates(&std::fs::read_to_string(templates)?)?,
            parse_fillers(&std::fs::read_to_string(fillers)?)?,
        )
    }

    /// Fails with [`TemplateError::EmptyFillerPool`] for a template without
    /// fillers.
    pub fn new(
        lexicon: Arc<Lexicon>,
        templates: Vec<SemiNaturalTemplate>,
        fillers: BTreeMap<u32, Vec<Filler>>,
    ) -> Result<Self, TemplateError> {
        let mut spaces = BTreeMap::new();
        let mut by_id = BTreeMap::new();
        for t in templates {
            let id = t.template.id;
            let pool = fillers.get(&id).map(Vec::as_slice).unwrap_or(&[]);
            spaces.insert(id, BindingSpace::new(t.template.clone(), lexicon.clone(), pool)?);
            by_id.insert(id, t);
        }
        Ok(SemiNaturalGrammar {
            templates: by_id,
            fillers,
            spaces,
        })
    }

    pub fn fragment(&self, template_id: u32) -> Result<&Fragment, TemplateError> {
        self.templates
            .get(&template_id)
            .map(|t| &t.fragment)
            .ok_or(TemplateError::UnknownTemplate(template_id))
    }

    pub fn fillers(&self, template_id: u32) -> &[Filler] {
        self.fillers.get(&template_id).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl SentenceSource for SemiNaturalGrammar {
    fn template_ids(&self) -> Vec<u32> {
        self.spaces.keys().copied().collect()
    }

    fn space(&self, template_id: u32) -> Result<&BindingSpace, TemplateError> {
        self.spaces
            .get(&template_id)
            .ok_or(TemplateError::UnknownTemplate(template_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates::Element;
    use crate::treegen::fragments::match_fragment;
    use crate::treegen::tree::parse_treebank;

    #[test]
    fn table_example_template_two() {
        let g = SemiNaturalGrammar::builtin();
        let space = g.space(2).unwrap();
        let t = space.template();
        let filler = t.elements.iter().position(|e| matches!(e, Element::Filler { .. })).unwrap();
        let binding = BTreeMap::from([(1, "men".to_string()), (filler, "are gon na have to move off-camera".to_string())]);
        assert_eq!(space.render(&binding), "The men are gon na have to move off-camera .");
    }

    #[test]
    fn three_thousand_per_template() {
        let g = SemiNaturalGrammar::builtin();
        for id in g.template_ids() {
            assert!(g.space(id).unwrap().size() >= 3000, "template {id}");
        }
    }

    #[test]
    fn sentences_contain_filler() {
        let g = SemiNaturalGrammar::builtin();
        for id in g.template_ids() {
            for s in g.instantiate(id, 300, 8).unwrap() {
                let filler = g.space(id).unwrap().template().elements.iter()
                    .position(|e| matches!(e, Element::Filler { .. })).unwrap();
                assert!(s.text.contains(&s.binding[&filler]));
            }
        }
    }

    #[test]
    fn sample_parses_match_fragments_and_are_fillers() {
        let g = SemiNaturalGrammar::builtin();
        let bank = parse_treebank(SAMPLE_TREEBANK).unwrap();
        assert_eq!(bank.len(), 10);
        for (i, tree) in bank.iter().enumerate() {
            let id = i as u32 + 1;
            assert!(!match_fragment(tree, g.fragment(id).unwrap()).is_empty(), "template {id}");
            assert!(g.fillers(id).iter().any(|f| f.text == tree.yield_string()), "template {id}");
        }
    }

    #[test]
    fn missing_fillers_rejected() {
        let templates = parse_seminatural_templates(BUILTIN_TEMPLATES).unwrap();
        let err = SemiNaturalGrammar::new(Arc::new(Lexicon::builtin()), templates, BTreeMap::new()).unwrap_err();
        assert!(err.to_string().contains("empty filler pool"));
    }

    #[test]
    fn agreement_in_vp_templates() {
        let g = SemiNaturalGrammar::builtin();
        let lex = Lexicon::builtin();
        for s in g.instantiate(2, 500, 1).unwrap() {
            let noun = &s.binding[&1];
            let sg = lex.numbers_of(crate::lexicon::Pos::N, "people", noun).contains(&Number::Singular);
            assert_eq!(s.text.contains(" is going"), sg, "{}", s.text);
        }
    }
}
