//! Newick parsing and serialization.
//!
//! The accepted grammar is rooted, binary, and leaf-labeled:
//!
//! ```text
//! tree    := subtree ';'  |  ';'
//! subtree := '(' subtree ',' subtree ')' length?  |  label length?
//! label   := [A-Za-z0-9_.-]+
//! length  := ':' number
//! ```
//!
//! Branch lengths are parsed and discarded; internal node labels and
//! non-binary vertices are rejected. ASCII whitespace may separate tokens.
//! Errors carry the byte offset of the offending input. `";"` alone denotes
//! the empty tree, and serialization emits canonical form, so
//! `parse_newick(to_newick(t)) == t` for every unplanted tree.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Error;
use crate::tree::{Label, NodeKind, Subtree, Tree};

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    seen: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            seen: BTreeSet::new(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn syntax(&self, message: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn label(&mut self) -> Result<Label, Error> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(crate::tree::is_label_byte)
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.syntax("expected a label or '('"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("label bytes are ASCII")
            .to_string();
        if !self.seen.insert(text.clone()) {
            return Err(Error::DuplicateLabel {
                label: text,
                offset: start,
            });
        }
        Label::new(text)
    }

    /// Consumes an optional `:length` annotation, discarding the value.
    fn branch_length(&mut self) -> Result<(), Error> {
        self.skip_ws();
        if self.peek() == Some(b':') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self
                .peek()
                .is_some_and(|b| b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E' | b'+' | b'-'))
            {
                self.pos += 1;
            }
            if self.pos == start {
                return Err(self.syntax("expected a branch length after ':'"));
            }
        }
        Ok(())
    }

    fn subtree(&mut self) -> Result<Subtree, Error> {
        self.skip_ws();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let left = self.subtree()?;
            self.skip_ws();
            if self.peek() != Some(b',') {
                return Err(if self.peek() == Some(b')') {
                    Error::NonBinary { offset: self.pos }
                } else {
                    self.syntax("expected ','")
                });
            }
            self.pos += 1;
            let right = self.subtree()?;
            self.skip_ws();
            match self.peek() {
                Some(b')') => self.pos += 1,
                Some(b',') => return Err(Error::NonBinary { offset: self.pos }),
                _ => return Err(self.syntax("expected ')'")),
            }
            if self.peek().is_some_and(crate::tree::is_label_byte) {
                return Err(Error::InternalLabel { offset: self.pos });
            }
            self.branch_length()?;
            Ok(Subtree::inner(left, right))
        } else {
            let label = self.label()?;
            self.branch_length()?;
            Ok(Subtree::Leaf(label))
        }
    }

    fn document(&mut self) -> Result<Tree, Error> {
        self.skip_ws();
        let shape = if self.peek() == Some(b';') {
            None
        } else {
            Some(self.subtree()?)
        };
        self.skip_ws();
        if self.peek() != Some(b';') {
            return Err(self.syntax("expected ';'"));
        }
        self.pos += 1;
        self.skip_ws();
        if self.pos != self.bytes.len() {
            return Err(self.syntax("trailing input after ';'"));
        }
        Ok(Tree::from_parts(shape, false))
    }
}

/// Parses one Newick expression into a canonical [`Tree`].
pub fn parse_newick(text: &str) -> Result<Tree, Error> {
    Parser::new(text).document()
}

fn write_node(tree: &Tree, id: usize, out: &mut String) {
    match tree.kind(id) {
        NodeKind::Leaf(l) => out.push_str(l.as_str()),
        NodeKind::Inner(a, b) => {
            out.push('(');
            write_node(tree, *a, out);
            out.push(',');
            write_node(tree, *b, out);
            out.push(')');
        }
        NodeKind::Planted(c) => write_node(tree, *c, out),
    }
}

/// Serializes a tree in canonical Newick form; the empty tree is `";"`.
/// A planted root is not expressible in Newick and is omitted.
pub fn to_newick(tree: &Tree) -> String {
    let mut out = String::new();
    if let Some(root) = tree.root() {
        write_node(tree, root, &mut out);
    }
    out.push(';');
    out
}

impl Tree {
    pub fn to_newick(&self) -> String {
        to_newick(self)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&to_newick(self))
    }
}
