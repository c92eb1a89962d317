use super::diag::Span;
use super::expr::{Binder, Expr};

/// A domain element as written in an enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    Ident(String),
    Int(i64),
    Bool(bool),
    /// `` `σ ``
    Concept(String),
}

/// Right-hand side of `name := …`.
#[derive(Clone, Debug, PartialEq)]
pub enum TableLit {
    /// `{a, (b, c)}`: the listed tuples are true, or the listed elements form a type.
    Set(Vec<Vec<Literal>>),
    /// `{k -> v, (k1, k2) -> v}`
    Map(Vec<(Vec<Literal>, Literal)>),
    /// `c := v` for nullary symbols.
    Value(Literal),
    /// `{lo..hi}`, only for type interpretations.
    Range(i64, i64),
    /// `<unknown>`
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub name: String,
    pub table: TableLit,
    /// `else v` default for tuples the table omits.
    pub default: Option<Literal>,
    pub span: Span,
}

/// `!x̄ in T̄: head(x̄) <- body.` or `!x̄ in T̄: head(x̄) = value <- body.`
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub binders: Vec<Binder>,
    pub head: String,
    /// Distinct variables bound by `binders`.
    pub args: Vec<String>,
    /// Output term for function heads.
    pub value: Option<Expr>,
    pub body: Expr,
    pub span: Span,
}

/// Rules defining one symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Definition {
    pub rules: Vec<Rule>,
    pub span: Span,
}

impl Definition {
    pub fn symbol(&self) -> &str {
        &self.rules[0].head
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theory {
    pub name: String,
    pub vocabulary: String,
    pub axioms: Vec<Expr>,
    pub definitions: Vec<Definition>,
    pub assignments: Vec<Assignment>,
    pub span: Span,
}

impl Theory {
    pub fn new(name: impl Into<String>, vocabulary: impl Into<String>) -> Self {
        Theory {
            name: name.into(),
            vocabulary: vocabulary.into(),
            axioms: Vec::new(),
            definitions: Vec::new(),
            assignments: Vec::new(),
            span: Span::default(),
        }
    }

    pub fn defined_symbols(&self) -> Vec<&str> {
        self.definitions.iter().map(Definition::symbol).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructureDecl {
    pub name: String,
    pub vocabulary: String,
    pub assignments: Vec<Assignment>,
    pub span: Span,
}
