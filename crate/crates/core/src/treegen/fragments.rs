//! Top-down fragment matching and frequency counting.
//!
//! A fragment rooted at a node keeps that node's full child sequence and, for
//! every nonterminal child, either recurses or cuts it to an open slot.
//! Counting enumerates all such fragments up to a node budget.

use std::collections::HashMap;

use rayon::prelude::*;
use thiserror::Error;

use super::tree::{Fragment, Tree};

pub const DEFAULT_NODE_BUDGET: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FragmentError {
    #[error("min_nonterminals must be at least 1")]
    ZeroMinimum,
}

/// Does `frag` embed at the root of `tree`?
pub fn embeds_at(tree: &Tree, frag: &Fragment) -> bool {
    match (tree, frag) {
        (Tree::Leaf(a), Tree::Leaf(b)) => a == b,
        (Tree::Node { label: la, children: ca }, Tree::Node { label: lb, children: cb }) => {
            la == lb
                && (cb.is_empty()
                    || (ca.len() == cb.len() && ca.iter().zip(cb).all(|(a, b)| embeds_at(a, b))))
        }
        _ => false,
    }
}

/// Preorder indices (as in [`Tree::preorder`]) of every node where `frag`
/// embeds.
pub fn match_fragment(tree: &Tree, frag: &Fragment) -> Vec<usize> {
    tree.preorder()
        .into_iter()
        .enumerate()
        .filter(|(_, t)| embeds_at(t, frag))
        .map(|(i, _)| i)
        .collect()
}

/// Yields of all subtrees of `treebank` matching `frag`, first occurrence
/// order, without duplicates.
pub fn harvest_fillers(treebank: &[Tree], frag: &Fragment) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for tree in treebank {
        for t in tree.preorder() {
            if embeds_at(t, frag) {
                let y = t.yield_string();
                if seen.insert(y.clone()) {
                    out.push(y);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedFragment {
    pub fragment: String,
    pub count: usize,
    pub nonterminals: usize,
}

impl RankedFragment {
    pub fn tree(&self) -> Fragment {
        super::tree::parse_bracketed(&self.fragment).expect("serialized fragments parse")
    }
}

#[derive(Clone)]
struct Cut {
    text: String,
    size: usize,
    nonterminals: usize,
}

// Returns the expanded fragments rooted at `node` and records every expanded
// fragment of `node` and its descendants in `counts`.
fn collect(node: &Tree, budget: usize, counts: &mut HashMap<String, (usize, usize)>) -> Vec<Cut> {
    let Tree::Node { label, children } = node else {
        return Vec::new();
    };
    if children.is_empty() {
        return Vec::new();
    }
    let mut options: Vec<Vec<Cut>> = Vec::with_capacity(children.len());
    for c in children {
        let mut opts = match c {
            Tree::Leaf(w) => vec![Cut {
                text: w.clone(),
                size: 1,
                nonterminals: 0,
            }],
            Tree::Node { label, .. } => vec![Cut {
                text: format!("({label} )"),
                size: 1,
                nonterminals: 1,
            }],
        };
        opts.extend(collect(c, budget, counts));
        options.push(opts);
    }
    // the root node itself plus one node per child at minimum
    let floor = 1 + children.len();
    let mut partial: Vec<(Vec<&str>, usize, usize)> = vec![(Vec::new(), 1, 1)];
    for (k, opts) in options.iter().enumerate() {
        let remaining = children.len() - k - 1;
        let mut next = Vec::new();
        for (parts, size, nt) in &partial {
            for o in opts {
                let s = size + o.size;
                if s + remaining <= budget {
                    let mut p = parts.clone();
                    p.push(&o.text);
                    next.push((p, s, nt + o.nonterminals));
                }
            }
        }
        partial = next;
    }
    let out: Vec<Cut> = if floor > budget {
        Vec::new()
    } else {
        partial
            .into_iter()
            .map(|(parts, size, nonterminals)| Cut {
                text: format!("({label} {})", parts.join(" ")),
                size,
                nonterminals,
            })
            .collect()
    };
    for c in &out {
        counts.entry(c.text.clone()).or_insert((0, c.nonterminals)).0 += 1;
    }
    out
}

/// Rank fragments by occurrence count (desc), then serialization (asc).
pub fn count_fragments(
    treebank: &[Tree],
    min_nonterminals: usize,
    top_k: usize,
) -> Result<Vec<RankedFragment>, FragmentError> {
    count_fragments_with_budget(treebank, min_nonterminals, top_k, DEFAULT_NODE_BUDGET)
}

pub fn count_fragments_with_budget(
    treebank: &[Tree],
    min_nonterminals: usize,
    top_k: usize,
    node_budget: usize,
) -> Result<Vec<RankedFragment>, FragmentError> {
    if min_nonterminals == 0 {
        return Err(FragmentError::ZeroMinimum);
    }
    if top_k == 0 || treebank.is_empty() {
        return Ok(Vec::new());
    }
    let counts = treebank
        .par_iter()
        .fold(HashMap::new, |mut acc, t| {
            collect(t, node_budget, &mut acc);
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, (n, nt)) in b {
                a.entry(k).or_insert((0, nt)).0 += n;
            }
            a
        });
    let mut ranked: Vec<RankedFragment> = counts
        .into_iter()
        .filter(|(_, (_, nt))| *nt >= min_nonterminals)
        .map(|(fragment, (count, nonterminals))| RankedFragment {
            fragment,
            count,
            nonterminals,
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.fragment.cmp(&b.fragment)));
    ranked.truncate(top_k);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treegen::tree::parse_bracketed;

    fn t(s: &str) -> Tree {
        parse_bracketed(s).unwrap()
    }

    #[test]
    fn single_open_slot_matches_nn() {
        let tree = t("(NP (DT the) (NN king))");
        assert_eq!(match_fragment(&tree, &t("(NN )")), vec![3]);
        assert!(match_fragment(&tree, &t("(VP )")).is_empty());
    }

    #[test]
    fn counts_on_tiny_tree() {
        let tree = t("(NP (DT the) (NN king))");
        let ranked = count_fragments(&[tree], 1, usize::MAX).unwrap();
        let mut got: Vec<_> = ranked.iter().map(|r| r.fragment.as_str()).collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                "(DT the)",
                "(NN king)",
                "(NP (DT ) (NN ))",
                "(NP (DT ) (NN king))",
                "(NP (DT the) (NN ))",
                "(NP (DT the) (NN king))",
            ]
        );
        assert!(ranked.iter().all(|r| r.count == 1));
    }

    #[test]
    fn ranking_and_edges() {
        let bank = vec![t("(S (NP (NN a)) (VP (VB b)))"), t("(S (NP (NN c)) (VP (VB b)))")];
        let ranked = count_fragments(&bank, 1, 3).unwrap();
        assert_eq!(ranked.len(), 3);
        assert!(ranked[0].count >= ranked[1].count);
        assert_eq!(ranked[0].count, 2);
        assert!(count_fragments(&bank, 1, 0).unwrap().is_empty());
        assert!(count_fragments(&[], 1, 5).unwrap().is_empty());
        assert_eq!(count_fragments(&bank, 0, 5), Err(FragmentError::ZeroMinimum));
        let big = count_fragments(&bank, 5, usize::MAX).unwrap();
        assert!(big.iter().all(|r| r.nonterminals >= 5));
    }

    #[test]
    fn budget_bounds_fragment_size() {
        let tree = t("(S (NP (DT the) (NN king)) (VP (VBZ sleeps)))");
        for r in count_fragments_with_budget(&[tree], 1, usize::MAX, 5).unwrap() {
            assert!(r.tree().size() <= 5, "{}", r.fragment);
        }
    }
}
