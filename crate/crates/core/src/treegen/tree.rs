//! Bracketed constituency trees.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tree syntax error at offset {offset}: {message}")]
pub struct TreeSyntaxError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum TreebankError {
    #[error("treebank line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: TreeSyntaxError,
    },
    #[error("reading treebank: {0}")]
    Io(#[from] std::io::Error),
}

/// A constituency tree. A `Node` without children is an open slot: it only
/// occurs in fragments and matches any subtree with the same label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tree {
    Node { label: String, children: Vec<Tree> },
    Leaf(String),
}

/// A tree whose frontier may contain open slots.
pub type Fragment = Tree;

impl Tree {
    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(word: impl Into<String>) -> Tree {
        Tree::Leaf(word.into())
    }

    pub fn open(label: impl Into<String>) -> Tree {
        Tree::node(label, Vec::new())
    }

    pub fn label(&self) -> &str {
        match self {
            Tree::Node { label, .. } => label,
            Tree::Leaf(w) => w,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Node { children, .. } => children,
            Tree::Leaf(_) => &[],
        }
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Tree::Node { children, .. } if children.is_empty())
    }

    /// Total number of nodes, leaves included.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(Tree::size).sum::<usize>()
    }

    pub fn nonterminals(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { children, .. } => 1 + children.iter().map(Tree::nonterminals).sum::<usize>(),
        }
    }

    /// All nodes in preorder (leaves included).
    pub fn preorder(&self) -> Vec<&Tree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(t.children().iter().rev());
        }
        out
    }

    /// Terminal words joined by single spaces.
    pub fn yield_string(&self) -> String {
        self.preorder()
            .into_iter()
            .filter_map(|t| match t {
                Tree::Leaf(w) => Some(w.as_str()),
                _ => None,
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Leaf(w) => f.write_str(w),
            Tree::Node { label, children } => {
                write!(f, "({label} ")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Tree {
    type Err = TreeSyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bracketed(s)
    }
}

/// Parse one bracketed tree, e.g. `(NP (DT the) (NN king))`.
pub fn parse_bracketed(text: &str) -> Result<Tree, TreeSyntaxError> {
    let mut p = Parser { text, pos: 0 };
    p.skip_ws();
    if p.peek() != Some('(') {
        return Err(p.error("expected '('"));
    }
    let tree = p.node()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("trailing input after tree"));
    }
    Ok(tree)
}

/// One tree per non-empty line.
pub fn parse_treebank(text: &str) -> Result<Vec<Tree>, TreebankError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_bracketed(l).map_err(|source| TreebankError::Line { line: i + 1, source }))
        .collect()
}

pub fn load_treebank(path: impl AsRef<std::path::Path>) -> Result<Vec<Tree>, TreebankError> {
    parse_treebank(&std::fs::read_to_string(path)?)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek().filter(|c| c.is_whitespace()) {
            self.pos += c.len_utf8();
        }
    }

    fn error(&self, message: &str) -> TreeSyntaxError {
        TreeSyntaxError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn atom(&mut self) -> &str {
        let start = self.pos;
        while let Some(c) = self.peek().filter(|c| !c.is_whitespace() && *c != '(' && *c != ')') {
            self.pos += c.len_utf8();
        }
        &self.text[start..self.pos]
    }

    // Called with the cursor on '('.
    fn node(&mut self) -> Result<Tree, TreeSyntaxError> {
        self.pos += 1;
        let label = self.atom().to_string();
        let mut children = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.error("unexpected end of input, expected ')'")),
                Some(')') => {
                    self.pos += 1;
                    return Ok(Tree::Node { label, children });
                }
                Some('(') => children.push(self.node()?),
                Some(_) => children.push(Tree::Leaf(self.atom().to_string())),
            }
        }
    }
}
