//! Text front-end: lexer, parser and printer for `.foc` files.

mod lexer;
mod parse;
pub mod pretty;

pub use parse::{parse, parse_expr, parse_with_recovery};

use crate::kernel::{StructureDecl, Theory, Vocabulary};

#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    Vocabulary(Vocabulary),
    Theory(Theory),
    Structure(StructureDecl),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceFile {
    pub name: String,
    pub blocks: Vec<Block>,
}

impl SourceFile {
    pub fn vocabularies(&self) -> impl Iterator<Item = &Vocabulary> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Vocabulary(v) => Some(v),
            _ => None,
        })
    }

    pub fn theories(&self) -> impl Iterator<Item = &Theory> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Theory(t) => Some(t),
            _ => None,
        })
    }

    pub fn structures(&self) -> impl Iterator<Item = &StructureDecl> {
        self.blocks.iter().filter_map(|b| match b {
            Block::Structure(s) => Some(s),
            _ => None,
        })
    }

    /// Last vocabulary declared under `name`.
    pub fn vocabulary(&self, name: &str) -> Option<&Vocabulary> {
        self.vocabularies().filter(|v| v.name == name).last()
    }
}
