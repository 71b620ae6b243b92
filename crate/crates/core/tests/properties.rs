use std::collections::{BTreeMap, HashMap};

use compoeval::corpus::ParallelCorpus;
use compoeval::eval::{
    consistency_full, consistency_one_word, detect_overgeneralisation, normalize, pearson, synonym_consistency,
    token_diff, EvalResult, Metric,
};
use compoeval::lexicon::base_form;
use compoeval::report::{aggregate, AggregateTable, GroupKey, Weighting};
use compoeval::suites::{builtin_idioms, Condition, DataType};
use compoeval::templates::{conjoin, SecondCasing, SentenceSource, SyntheticGrammar};
use compoeval::text::tokenize;
use compoeval::treegen::{count_fragments, count_fragments_with_budget, parse_bracketed, Tree};
use proptest::prelude::*;

fn label() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["S", "NP", "VP", "PP", "DT", "-NONE-", "NN$"]).prop_map(String::from)
}

fn word() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["the", "dog", ".", ",", "'s", "runs", "10", "%"]).prop_map(String::from)
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![word().prop_map(Tree::leaf), label().prop_map(Tree::open)];
    leaf.prop_recursive(4, 24, 3, |inner| {
        (label(), prop::collection::vec(inner, 1..4)).prop_map(|(l, kids)| Tree::node(l, kids))
    })
    .prop_map(|t| match t {
        Tree::Leaf(_) => Tree::node("S", vec![t]),
        t => t,
    })
}

fn indel(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) if x == y => indel(ra, rb),
        (Some((_, ra)), Some((_, rb))) => 1 + indel(ra, b).min(indel(a, rb)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tree_serialization_round_trips(t in tree()) {
        prop_assert_eq!(parse_bracketed(&t.to_string()).unwrap(), t);
    }
}

proptest! {
    #[test]
    fn diff_cost_is_indel_distance(
        a in prop::collection::vec(0u8..3, 0..8),
        b in prop::collection::vec(0u8..3, 0..8),
    ) {
        let cost: usize = token_diff(&a, &b).iter().map(|r| r.a_len + r.b_len).sum();
        prop_assert_eq!(cost, indel(&a, &b));
    }

    #[test]
    fn diff_is_empty_only_for_equal(a in prop::collection::vec(0u8..3, 0..10), b in prop::collection::vec(0u8..3, 0..10)) {
        prop_assert_eq!(token_diff(&a, &b).is_empty(), a == b);
    }

    #[test]
    fn pearson_is_bounded_symmetric_and_affine_invariant(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..30),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let Ok(r) = pearson(&x, &y) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson(&y, &x).unwrap() - r).abs() < 1e-12);
            let moved: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
            prop_assert!((pearson(&moved, &y).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn consistency_is_symmetric(
        a in prop::collection::vec(prop::sample::select(vec!["de", "het", "De", "man", "vrouw", "ziet", "."]), 0..8),
        b in prop::collection::vec(prop::sample::select(vec!["de", "het", "De", "man", "vrouw", "ziet", "."]), 0..8),
    ) {
        let (a, b) = (a.join(" "), b.join(" "));
        prop_assert_eq!(consistency_one_word(&a, &b), consistency_one_word(&b, &a));
        prop_assert_eq!(consistency_full(&a, &b), consistency_full(&b, &a));
        let syn = vec![vec!["man".to_string()], vec!["vrouw".to_string()]];
        prop_assert_eq!(synonym_consistency(&a, &b, &syn), synonym_consistency(&b, &a, &syn));
        if consistency_full(&a, &b) {
            prop_assert!(consistency_one_word(&a, &b));
        }
    }

    #[test]
    fn normalization_is_idempotent(a in prop::collection::vec(prop::sample::select(vec!["De", "het", "Man", "ziet", ""]), 0..6)) {
        let once = normalize(&a);
        prop_assert_eq!(normalize(&once), once);
    }

    #[test]
    fn detector_is_monotone_in_target_and_keywords(
        idiom in 0usize..20,
        words in prop::collection::vec(prop::sample::select(vec!["hart", "hoofd", "uit", "het", "boord", "samen", "ogen"]), 0..6),
        extra in prop::sample::select(vec!["hart", "kunst", "tijdje", "zomaar"]),
    ) {
        let mut spec = builtin_idioms()[idiom].clone();
        let target = words.join(" ");
        let before = detect_overgeneralisation(&target, &spec);
        let longer = format!("{} {}", target, extra);
        prop_assert!(!before || detect_overgeneralisation(&longer, &spec));
        spec.literal_dutch.push(extra.to_string());
        prop_assert!(!before || detect_overgeneralisation(&target, &spec));
    }
}

fn result(data: usize, size: usize, template: u32, verdict: bool) -> EvalResult {
    EvalResult {
        item_id: format!("{data}/{size}/{template}"),
        metric: Metric::Consistency,
        verdict,
        flagged: false,
        condition: Condition::NpSwap,
        data_type: [DataType::Synthetic, DataType::SemiNatural][data],
        template_id: Some(template),
        training_size: ["small", "medium", "full"][size].to_string(),
        checkpoint: "final".into(),
        unit: None,
    }
}

fn results() -> impl Strategy<Value = Vec<EvalResult>> {
    prop::collection::vec((0usize..2, 0usize..3, 1u32..11, any::<bool>()), 1..60)
        .prop_map(|v| v.into_iter().map(|(d, s, t, ok)| result(d, s, t, ok)).collect())
}

proptest! {
    #[test]
    fn aggregate_is_permutation_invariant(rs in results(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = rs.clone();
        shuffled.shuffle(&mut compoeval::text::seeded_rng(seed));
        let keys = [GroupKey::DataType, GroupKey::TrainingSize, GroupKey::TemplateId];
        prop_assert_eq!(aggregate(&rs, &keys).unwrap(), aggregate(&shuffled, &keys).unwrap());
        let a = aggregate(&rs, &keys).unwrap().rollup(&[GroupKey::DataType], Weighting::Equal).unwrap();
        let b = aggregate(&shuffled, &keys).unwrap().rollup(&[GroupKey::DataType], Weighting::Equal).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pooled_rollup_reproduces_coarser_aggregate(rs in results()) {
        let fine = aggregate(&rs, &[GroupKey::DataType, GroupKey::TrainingSize, GroupKey::TemplateId]).unwrap();
        let rolled = fine.rollup(&[GroupKey::DataType, GroupKey::TrainingSize], Weighting::Count).unwrap();
        let mut brute: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
        for r in &rs {
            let e = brute.entry((r.data_type.name().to_string(), r.training_size.clone())).or_default();
            e.0 += r.verdict as usize;
            e.1 += 1;
        }
        prop_assert_eq!(rolled.rows.len(), brute.len());
        for row in &rolled.rows {
            let (hits, n) = brute[&(row.keys[0].clone(), row.keys[1].clone())];
            prop_assert_eq!(row.count, n);
            prop_assert!((row.value - hits as f64 / n as f64).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&row.value));
        }
    }

    #[test]
    fn aggregate_tsv_round_trips(rs in results()) {
        let t = aggregate(&rs, &[GroupKey::TemplateId, GroupKey::Metric, GroupKey::Unit]).unwrap();
        prop_assert_eq!(AggregateTable::parse_tsv(&t.to_tsv()).unwrap(), t);
    }

    #[test]
    fn find_exact_matches_scan(
        lines in prop::collection::vec(prop::collection::vec(prop::sample::select(vec!["a", "b", "B", "c", "."]), 1..8), 1..40),
        query in prop::collection::vec(prop::sample::select(vec!["a", "b", "B", "c", "."]), 1..3),
    ) {
        let sources: Vec<String> = lines.iter().map(|l| l.join(" ")).collect();
        let corpus = ParallelCorpus::from_pairs(sources.iter().map(|s| (s.clone(), "x".to_string())));
        let scan: Vec<usize> = sources
            .iter()
            .enumerate()
            .filter(|(_, s)| tokenize(s).windows(query.len()).any(|w| w == query.as_slice()))
            .map(|(i, _)| i)
            .collect();
        prop_assert_eq!(corpus.find_exact(&query.join(" ")).unwrap(), scan);
    }

    #[test]
    fn conjunction_span_points_at_second_conjunct(t1 in 1u32..11, t2 in 1u32..11, seed in any::<u64>()) {
        let g = SyntheticGrammar::builtin();
        let a = &g.instantiate(t1, 1, seed).unwrap()[0].text;
        let b = &g.instantiate(t2, 1, seed ^ 1).unwrap()[0].text;
        let c = conjoin(a, b, SecondCasing::Preserve);
        prop_assert_eq!(&c.text[c.second.start..c.second.end], b.as_str());
        prop_assert!(c.text[..c.second.start].ends_with(" and "));
    }
}

/// Every fragment rooted at `t`, with each nonterminal child cut or
/// expanded.
fn fragments_at(t: &Tree) -> Vec<String> {
    let kids = t.children();
    if kids.is_empty() {
        return Vec::new();
    }
    let mut partial: Vec<Vec<String>> = vec![Vec::new()];
    for c in kids {
        let mut options = match c {
            Tree::Leaf(w) => vec![w.clone()],
            Tree::Node { label, .. } => vec![format!("({label} )")],
        };
        options.extend(fragments_at(c));
        partial = partial
            .into_iter()
            .flat_map(|p| options.iter().map(move |o| [p.clone(), vec![o.clone()]].concat()))
            .collect();
    }
    partial.into_iter().map(|cs| format!("({} {})", t.label(), cs.join(" "))).collect()
}

#[test]
fn fragment_counts_match_exhaustive_enumeration() {
    let bank = [
        parse_bracketed("(S (NP (DT the) (NN dog)) (VP (VB runs)))").unwrap(),
        parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VB runs) (NP (DT the) (NN dog))))").unwrap(),
    ];
    let mut oracle: HashMap<String, usize> = HashMap::new();
    for t in &bank {
        for node in t.preorder() {
            for f in fragments_at(node) {
                *oracle.entry(f).or_default() += 1;
            }
        }
    }
    let got = count_fragments_with_budget(&bank, 1, usize::MAX, 1000).unwrap();
    assert_eq!(got.len(), oracle.len());
    for r in &got {
        assert_eq!(oracle[&r.fragment], r.count, "{}", r.fragment);
        assert_eq!(r.nonterminals, r.tree().nonterminals());
    }
    assert!(got.windows(2).all(|w| w[0].count > w[1].count || (w[0].count == w[1].count && w[0].fragment < w[1].fragment)));
    let top = count_fragments(&bank, 3, 1).unwrap();
    assert_eq!(top[0].fragment, "(NP (DT ) (NN ))");
    assert_eq!(top[0].count, 3);
}

#[test]
fn clause_verbs_reduce_to_base_form() {
    for (v, base) in [
        ("enjoys", "enjoy"),
        ("loves", "love"),
        ("researches", "research"),
        ("has", "have"),
        ("caught", "caught"),
        ("eats", "eat"),
        ("travels", "travel"),
        ("uses", "use"),
        ("owns", "own"),
        ("drinks", "drink"),
        ("wears", "wear"),
        ("plays", "play"),
        ("knows", "know"),
        ("sells", "sell"),
    ] {
        assert_eq!(base_form(v), base, "{v}");
    }
}
