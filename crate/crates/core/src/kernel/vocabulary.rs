use std::collections::HashMap;
use thiserror::Error;

use super::diag::{Diagnostic, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId(pub u32);

impl TypeId {
    pub const BOOL: TypeId = TypeId(0);
    pub const INT: TypeId = TypeId(1);
    pub const CONCEPT: TypeId = TypeId(2);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Names that may not be used for user types or symbols.
pub const RESERVED: &[&str] = &[
    "vocabulary", "theory", "structure", "type", "in", "if", "then", "else", "true", "false",
    "sum", "lambda", "Concept", "Bool", "Int", "arity", "input", "output",
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    pub args: Vec<TypeId>,
    pub out: TypeId,
}

impl Signature {
    pub fn new(args: Vec<TypeId>, out: TypeId) -> Self {
        Signature { args, out }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_predicate(&self) -> bool {
        self.out == TypeId::BOOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypeInterp {
    Bool,
    /// Unbounded integers. Legal as an output type only.
    Int,
    /// Contiguous integer range `lo..=hi`; covers both `Int[lo..hi]` and `{lo..hi}`.
    IntRange { lo: i64, hi: i64 },
    Concept,
    Enum(Vec<String>),
    ConceptSubtype(Signature),
    /// Declared as `type T` with the domain supplied by a structure.
    Open,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeDecl {
    pub name: String,
    pub interp: TypeInterp,
    pub builtin: bool,
    /// Conceptual subtypes written inline in signatures get a synthetic entry.
    pub anonymous: bool,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDecl {
    pub name: String,
    pub sig: Signature,
    pub span: Span,
}

/// The intensional object of a vocabulary symbol. One per symbol, no synonyms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Concept {
    pub symbol: SymbolId,
    pub sig: Signature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Query {
    Arity,
    /// 1-based argument position.
    Input(usize),
    Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Introspection {
    Arity(usize),
    Type(TypeId),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("argument index {index} out of range for a concept of arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
}

#[derive(Clone, Debug)]
pub struct Vocabulary {
    pub name: String,
    pub span: Span,
    types: Vec<TypeDecl>,
    symbols: Vec<SymbolDecl>,
    type_index: HashMap<String, TypeId>,
    symbol_index: HashMap<String, SymbolId>,
    subtype_index: HashMap<Signature, TypeId>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Vocabulary) -> bool {
        self.name == other.name && self.types == other.types && self.symbols == other.symbols
    }
}

impl Vocabulary {
    pub fn new(name: impl Into<String>) -> Self {
        let mut voc = Vocabulary {
            name: name.into(),
            span: Span::default(),
            types: Vec::new(),
            symbols: Vec::new(),
            type_index: HashMap::new(),
            symbol_index: HashMap::new(),
            subtype_index: HashMap::new(),
        };
        for (name, interp) in [("Bool", TypeInterp::Bool), ("Int", TypeInterp::Int), ("Concept", TypeInterp::Concept)] {
            voc.push_type(TypeDecl { name: name.into(), interp, builtin: true, anonymous: false, span: Span::default() });
        }
        voc
    }

    fn push_type(&mut self, decl: TypeDecl) -> TypeId {
        let id = TypeId(self.types.len() as u32);
        if let TypeInterp::ConceptSubtype(sig) = &decl.interp {
            self.subtype_index.entry(sig.clone()).or_insert(id);
        }
        if !decl.anonymous {
            self.type_index.insert(decl.name.clone(), id);
        }
        self.types.push(decl);
        id
    }

    pub fn add_type(&mut self, name: &str, interp: TypeInterp, span: Span) -> Result<TypeId, Diagnostic> {
        if RESERVED.contains(&name) {
            return Err(Diagnostic::error("ReservedName", span, format!("`{name}` is reserved")));
        }
        if self.type_index.contains_key(name) {
            return Err(Diagnostic::error("DuplicateType", span, format!("type `{name}` declared twice")));
        }
        Ok(self.push_type(TypeDecl { name: name.into(), interp, builtin: false, anonymous: false, span }))
    }

    /// Returns the (shared) type for `Concept[sig]`.
    pub fn intern_subtype(&mut self, sig: Signature) -> TypeId {
        if let Some(&id) = self.subtype_index.get(&sig) {
            return id;
        }
        let name = format!("Concept[{}]", self.show_sig(&sig));
        self.push_type(TypeDecl {
            name,
            interp: TypeInterp::ConceptSubtype(sig),
            builtin: false,
            anonymous: true,
            span: Span::default(),
        })
    }

    pub fn subtype_of(&self, sig: &Signature) -> Option<TypeId> {
        self.subtype_index.get(sig).copied()
    }

    pub fn add_symbol(&mut self, name: &str, sig: Signature, span: Span) -> Result<SymbolId, Diagnostic> {
        if RESERVED.contains(&name) {
            return Err(Diagnostic::error("ReservedName", span, format!("`{name}` is reserved")));
        }
        if self.symbol_index.contains_key(name) {
            return Err(Diagnostic::error("DuplicateSymbol", span, format!("symbol `{name}` declared twice")));
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(SymbolDecl { name: name.into(), sig, span });
        self.symbol_index.insert(name.into(), id);
        Ok(id)
    }

    pub fn types(&self) -> &[TypeDecl] {
        &self.types
    }

    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.symbols
    }

    pub fn ty(&self, id: TypeId) -> &TypeDecl {
        &self.types[id.index()]
    }

    pub fn symbol(&self, id: SymbolId) -> &SymbolDecl {
        &self.symbols[id.index()]
    }

    pub fn type_id(&self, name: &str) -> Option<TypeId> {
        self.type_index.get(name).copied()
    }

    pub fn symbol_id(&self, name: &str) -> Option<SymbolId> {
        self.symbol_index.get(name).copied()
    }

    pub fn symbol_ids(&self) -> impl Iterator<Item = SymbolId> {
        (0..self.symbols.len() as u32).map(SymbolId)
    }

    /// Finds the enumeration type declaring `name` as a constructor.
    pub fn constructor(&self, name: &str) -> Option<(TypeId, usize)> {
        self.types.iter().enumerate().find_map(|(i, t)| match &t.interp {
            TypeInterp::Enum(names) => names.iter().position(|n| n == name).map(|p| (TypeId(i as u32), p)),
            _ => None,
        })
    }

    pub fn is_int_like(&self, id: TypeId) -> bool {
        matches!(self.ty(id).interp, TypeInterp::Int | TypeInterp::IntRange { .. })
    }

    pub fn is_concept_like(&self, id: TypeId) -> bool {
        matches!(self.ty(id).interp, TypeInterp::Concept | TypeInterp::ConceptSubtype(_))
    }

    pub fn int_bounds(&self, id: TypeId) -> Option<(i64, i64)> {
        match self.ty(id).interp {
            TypeInterp::IntRange { lo, hi } => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn concept(&self, symbol: SymbolId) -> Concept {
        Concept { symbol, sig: self.symbol(symbol).sig.clone() }
    }

    /// All concepts in declaration order, optionally restricted to one signature.
    pub fn concept_domain(&self, filter: Option<&Signature>) -> Vec<Concept> {
        self.symbol_ids()
            .filter(|&s| filter.is_none_or(|f| &self.symbol(s).sig == f))
            .map(|s| self.concept(s))
            .collect()
    }

    pub fn introspect(&self, c: &Concept, query: Query) -> Result<Introspection, KernelError> {
        match query {
            Query::Arity => Ok(Introspection::Arity(c.sig.arity())),
            Query::Input(i) => {
                if i == 0 || i > c.sig.arity() {
                    return Err(KernelError::IndexOutOfRange { index: i, arity: c.sig.arity() });
                }
                Ok(Introspection::Type(c.sig.args[i - 1]))
            }
            Query::Output => Ok(Introspection::Type(c.sig.out)),
        }
    }

    pub fn show_type(&self, id: TypeId) -> &str {
        &self.ty(id).name
    }

    pub fn show_sig(&self, sig: &Signature) -> String {
        let args = if sig.args.is_empty() {
            "()".to_string()
        } else {
            sig.args.iter().map(|&t| self.show_type(t)).collect::<Vec<_>>().join("**")
        };
        format!("{}->{}", args, self.show_type(sig.out))
    }

    /// Structural checks that the builder methods cannot enforce on their own.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut ctors: HashMap<&str, &str> = HashMap::new();
        for t in &self.types {
            match &t.interp {
                TypeInterp::Enum(names) => {
                    if names.is_empty() {
                        diags.push(Diagnostic::error("EmptyType", t.span, format!("type `{}` has no elements", t.name)));
                    }
                    for (i, n) in names.iter().enumerate() {
                        if names[..i].contains(n) {
                            diags.push(Diagnostic::error(
                                "DuplicateConstructor",
                                t.span,
                                format!("`{n}` listed twice in `{}`", t.name),
                            ));
                        } else if let Some(other) = ctors.insert(n, &t.name) {
                            diags.push(Diagnostic::error(
                                "DuplicateConstructor",
                                t.span,
                                format!("`{n}` is a constructor of both `{other}` and `{}`", t.name),
                            ));
                        }
                        if self.symbol_index.contains_key(n.as_str()) {
                            diags.push(Diagnostic::error(
                                "DuplicateConstructor",
                                t.span,
                                format!("constructor `{n}` clashes with a symbol"),
                            ));
                        }
                    }
                }
                TypeInterp::IntRange { lo, hi } if lo > hi => {
                    diags.push(Diagnostic::error("EmptyType", t.span, format!("type `{}` has empty range", t.name)));
                }
                _ => {}
            }
        }
        for s in &self.symbols {
            for &a in &s.sig.args {
                if matches!(self.ty(a).interp, TypeInterp::Int) {
                    diags.push(Diagnostic::error(
                        "UnboundedInt",
                        s.span,
                        format!("argument type `{}` of `{}` needs explicit bounds", self.show_type(a), s.name),
                    ));
                }
            }
        }
        diags
    }
}
