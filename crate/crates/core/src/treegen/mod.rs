//! Constituency trees, tree fragments, and the semi-natural templates built
//! on them.

pub mod fragments;
pub mod seminatural;
pub mod tree;

pub use fragments::{count_fragments, count_fragments_with_budget, harvest_fillers, match_fragment, RankedFragment};
pub use seminatural::{parse_fillers, parse_seminatural_templates, SemiNaturalGrammar, SemiNaturalTemplate, SAMPLE_TREEBANK};
pub use tree::{parse_bracketed, parse_treebank, Fragment, Tree, TreeSyntaxError};
