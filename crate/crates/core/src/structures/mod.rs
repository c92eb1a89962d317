//! Universes, partial and total structures, and their enumeration.
//!
//! Tables are dense: one output per argument tuple, tuples ordered
//! lexicographically with the last argument varying fastest. The value of a
//! concept is always read from its symbol's table, so interpretations are
//! coherent by construction.

mod io;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{Signature, SymbolId, TypeId, TypeInterp, Vocabulary};

pub use io::{build_structure, extend_structure, load_structure, save_structure, structure_to_json};

pub const DEFAULT_EXPANSION_CAP: u128 = 10_000_000;

/// A domain element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elem {
    Bool(bool),
    Int(i64),
    /// Constructor `idx` of an enumerated type, or element `idx` of an open type.
    Named { ty: TypeId, idx: u32 },
    Concept(SymbolId),
    /// A type as a value, produced by introspection.
    Type(TypeId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructError {
    #[error("type `{0}` has no finite domain")]
    UnboundedInt(String),
    #[error("type `{0}` has no domain; assign it in the structure")]
    MissingDomain(String),
    #[error("{count} expansions exceed the cap of {cap}")]
    CombinatorialLimit { count: u128, cap: u128 },
}

impl StructError {
    pub fn code(&self) -> &'static str {
        match self {
            StructError::UnboundedInt(_) => "UnboundedInt",
            StructError::MissingDomain(_) => "MissingDomain",
            StructError::CombinatorialLimit { .. } => "CombinatorialLimit",
        }
    }
}

/// Index arithmetic for one symbol's table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shape {
    pub sizes: Vec<usize>,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    domains: Vec<Option<Vec<Elem>>>,
    open_names: Vec<Vec<String>>,
    /// For conceptual subtypes: position of each symbol in the domain, or `u32::MAX`.
    concept_pos: Vec<Vec<u32>>,
    shapes: Vec<Shape>,
}

impl Universe {
    /// Builds all domains; `open` supplies the elements of open types.
    pub fn build(voc: &Vocabulary, open: &[(TypeId, Vec<String>)]) -> Result<Universe, StructError> {
        let mut domains = Vec::new();
        let mut open_names = Vec::new();
        let mut concept_pos = Vec::new();
        for (i, t) in voc.types().iter().enumerate() {
            let id = TypeId(i as u32);
            let mut names = Vec::new();
            let mut pos = Vec::new();
            let dom = match &t.interp {
                TypeInterp::Bool => Some(vec![Elem::Bool(false), Elem::Bool(true)]),
                TypeInterp::Int => None,
                TypeInterp::IntRange { lo, hi } => Some((*lo..=*hi).map(Elem::Int).collect()),
                TypeInterp::Enum(ns) => Some((0..ns.len() as u32).map(|idx| Elem::Named { ty: id, idx }).collect()),
                TypeInterp::Open => match open.iter().find(|(t, _)| *t == id) {
                    Some((_, ns)) => {
                        names = ns.clone();
                        Some((0..ns.len() as u32).map(|idx| Elem::Named { ty: id, idx }).collect())
                    }
                    None => {
                        // Only an error if something needs the domain.
                        None
                    }
                },
                TypeInterp::Concept => Some(voc.symbol_ids().map(Elem::Concept).collect()),
                TypeInterp::ConceptSubtype(sig) => {
                    let members = voc.concept_domain(Some(sig));
                    pos = vec![u32::MAX; voc.symbols().len()];
                    for (p, c) in members.iter().enumerate() {
                        pos[c.symbol.index()] = p as u32;
                    }
                    Some(members.into_iter().map(|c| Elem::Concept(c.symbol)).collect())
                }
            };
            domains.push(dom);
            open_names.push(names);
            concept_pos.push(pos);
        }
        let mut u = Universe { domains, open_names, concept_pos, shapes: Vec::new() };
        for s in voc.symbols() {
            let mut sizes = Vec::new();
            for &a in &s.sig.args {
                sizes.push(u.domain_checked(voc, a)?.len());
            }
            let len = sizes.iter().product();
            u.shapes.push(Shape { sizes, len });
        }
        Ok(u)
    }

    fn domain_checked(&self, voc: &Vocabulary, ty: TypeId) -> Result<&[Elem], StructError> {
        match &self.domains[ty.index()] {
            Some(d) => Ok(d),
            None if matches!(voc.ty(ty).interp, TypeInterp::Open) => {
                Err(StructError::MissingDomain(voc.ty(ty).name.clone()))
            }
            None => Err(StructError::UnboundedInt(voc.ty(ty).name.clone())),
        }
    }

    /// Ordered domain of a type; `None` for unbounded Int and unassigned open types.
    pub fn domain(&self, ty: TypeId) -> Option<&[Elem]> {
        self.domains[ty.index()].as_deref()
    }

    /// Position of `e` in the domain of `ty`.
    pub fn index(&self, ty: TypeId, e: Elem) -> Option<usize> {
        let dom = self.domains[ty.index()].as_ref()?;
        let i = match e {
            Elem::Bool(b) if ty == TypeId::BOOL => b as usize,
            Elem::Int(n) => match dom.first() {
                Some(Elem::Int(lo)) => usize::try_from(n.checked_sub(*lo)?).ok()?,
                _ => return None,
            },
            Elem::Named { ty: t, idx } if t == ty => idx as usize,
            Elem::Concept(s) => {
                let pos = &self.concept_pos[ty.index()];
                if pos.is_empty() {
                    // The full concept type, or a non-concept type.
                    match dom.first() {
                        Some(Elem::Concept(_)) => s.index(),
                        _ => return None,
                    }
                } else {
                    match pos.get(s.index()) {
                        Some(&p) if p != u32::MAX => p as usize,
                        _ => return None,
                    }
                }
            }
            _ => return None,
        };
        (i < dom.len() && dom[i] == e).then_some(i)
    }

    pub fn contains(&self, ty: TypeId, e: Elem) -> bool {
        match (self.domain(ty), e) {
            (None, Elem::Int(_)) => ty == TypeId::INT,
            _ => self.index(ty, e).is_some(),
        }
    }

    pub fn shape(&self, sym: SymbolId) -> &Shape {
        &self.shapes[sym.index()]
    }

    pub fn open_names(&self, ty: TypeId) -> &[String] {
        &self.open_names[ty.index()]
    }

    /// Element of an open type by name; such names are supplied by structures only.
    pub fn open_element(&self, name: &str) -> Option<Elem> {
        self.open_names.iter().enumerate().find_map(|(t, ns)| {
            ns.iter().position(|n| n == name).map(|idx| Elem::Named { ty: TypeId(t as u32), idx: idx as u32 })
        })
    }
}

/// `$^I` reads this; absent tables mean the symbol is uninterpreted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub values: Vec<Elem>,
}

#[derive(Clone, Debug)]
pub struct Structure {
    pub name: String,
    voc: Arc<Vocabulary>,
    universe: Arc<Universe>,
    tables: Vec<Option<Arc<Table>>>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Structure) -> bool {
        self.voc == other.voc && self.universe == other.universe && self.tables == other.tables
    }
}

impl Eq for Structure {}

impl Structure {
    /// A structure interpreting nothing.
    pub fn new(voc: Arc<Vocabulary>, universe: Arc<Universe>) -> Self {
        let n = voc.symbols().len();
        Structure { name: "S".into(), voc, universe, tables: vec![None; n] }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.voc
    }

    pub fn vocabulary_arc(&self) -> &Arc<Vocabulary> {
        &self.voc
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn universe_arc(&self) -> &Arc<Universe> {
        &self.universe
    }

    /// Domain of a type, with a typed error when it is not finite.
    pub fn domain(&self, ty: TypeId) -> Result<&[Elem], StructError> {
        self.universe.domain_checked(&self.voc, ty)
    }

    /// Members of `Concept[sig]`, whether or not that subtype is declared.
    pub fn concepts_of(&self, sig: &Signature) -> Vec<Elem> {
        self.voc.concept_domain(Some(sig)).into_iter().map(|c| Elem::Concept(c.symbol)).collect()
    }

    pub fn table(&self, sym: SymbolId) -> Option<&Table> {
        self.tables[sym.index()].as_deref()
    }

    pub fn is_interpreted(&self, sym: SymbolId) -> bool {
        self.tables[sym.index()].is_some()
    }

    pub fn is_total(&self) -> bool {
        self.tables.iter().all(Option::is_some)
    }

    pub fn uninterpreted(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.voc.symbol_ids().filter(|&s| !self.is_interpreted(s))
    }

    /// Installs a table after checking its size and output domain.
    pub fn set_table(&mut self, sym: SymbolId, table: Table) -> Result<(), String> {
        let shape = self.universe.shape(sym);
        if table.values.len() != shape.len {
            return Err(format!("table for `{}` has {} entries, expected {}", self.voc.symbol(sym).name, table.values.len(), shape.len));
        }
        let out = self.voc.symbol(sym).sig.out;
        if let Some(bad) = table.values.iter().find(|&&v| !self.universe.contains(out, v)) {
            return Err(format!("`{}` is outside the domain of `{}`", self.show(*bad), self.voc.ty(out).name));
        }
        self.tables[sym.index()] = Some(Arc::new(table));
        Ok(())
    }

    pub fn clear_table(&mut self, sym: SymbolId) {
        self.tables[sym.index()] = None;
    }

    /// Table position of an argument tuple, `None` when an argument is outside its domain.
    pub fn tuple_index(&self, sym: SymbolId, args: &[Elem]) -> Option<usize> {
        let sig = &self.voc.symbol(sym).sig;
        if args.len() != sig.arity() {
            return None;
        }
        let shape = self.universe.shape(sym);
        let mut idx = 0usize;
        for ((&a, &ty), &size) in args.iter().zip(&sig.args).zip(&shape.sizes) {
            idx = idx * size + self.universe.index(ty, a)?;
        }
        Some(idx)
    }

    pub fn tuple_at(&self, sym: SymbolId, mut idx: usize) -> Vec<Elem> {
        let sig = &self.voc.symbol(sym).sig;
        let shape = self.universe.shape(sym);
        let mut out = vec![Elem::Bool(false); sig.arity()];
        for i in (0..sig.arity()).rev() {
            let size = shape.sizes[i];
            out[i] = self.universe.domain(sig.args[i]).expect("argument domains are finite")[idx % size];
            idx /= size;
        }
        out
    }

    /// `σ(d̄)`, or `None` when σ is uninterpreted or `d̄` is outside its domain.
    pub fn value(&self, sym: SymbolId, args: &[Elem]) -> Option<Elem> {
        let t = self.table(sym)?;
        Some(t.values[self.tuple_index(sym, args)?])
    }

    /// Typing context binding the open-type element names, for queries that mention them.
    pub fn typing_context(&self) -> crate::typecheck::TypingContext {
        let mut g = crate::typecheck::TypingContext::new();
        for (t, names) in self.universe.open_names.iter().enumerate() {
            for n in names {
                g.push(n.clone(), crate::typecheck::Ty::Named(TypeId(t as u32)));
            }
        }
        g
    }

    pub fn show(&self, e: Elem) -> String {
        show_elem(&self.voc, &self.universe, e)
    }

    /// Number of total expansions, saturating.
    pub fn expansion_count(&self) -> Result<u128, StructError> {
        let mut count: u128 = 1;
        for s in self.uninterpreted() {
            let out = self.domain(self.voc.symbol(s).sig.out)?.len() as u128;
            let cells = self.universe.shape(s).len as u32;
            count = count.saturating_mul(out.checked_pow(cells).unwrap_or(u128::MAX));
        }
        Ok(count)
    }

    /// Every total structure extending this one, in lexicographic order over
    /// (symbol declaration, tuple, output domain position).
    pub fn expansions(&self, cap: u128) -> Result<Expansions, StructError> {
        let count = self.expansion_count()?;
        if count > cap {
            return Err(StructError::CombinatorialLimit { count, cap });
        }
        let mut cells = Vec::new();
        for s in self.uninterpreted() {
            let out = self.domain(self.voc.symbol(s).sig.out)?.to_vec();
            cells.push((s, self.universe.shape(s).len, out));
        }
        let digits = cells.iter().map(|(_, len, _)| vec![0usize; *len]).collect();
        Ok(Expansions { base: self.clone(), cells, digits, done: count == 0 })
    }
}

pub fn show_elem(voc: &Vocabulary, u: &Universe, e: Elem) -> String {
    match e {
        Elem::Bool(b) => b.to_string(),
        Elem::Int(n) => n.to_string(),
        Elem::Named { ty, idx } => match &voc.ty(ty).interp {
            TypeInterp::Enum(ns) => ns[idx as usize].clone(),
            _ => u.open_names(ty)[idx as usize].clone(),
        },
        Elem::Concept(s) => format!("`{}", voc.symbol(s).name),
        Elem::Type(t) => voc.show_type(t).to_string(),
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&save_structure(self))
    }
}

/// Odometer over the uninterpreted cells; the last cell varies fastest.
pub struct Expansions {
    base: Structure,
    cells: Vec<(SymbolId, usize, Vec<Elem>)>,
    digits: Vec<Vec<usize>>,
    done: bool,
}

impl Iterator for Expansions {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        if self.done {
            return None;
        }
        let mut s = self.base.clone();
        for ((sym, _, out), digits) in self.cells.iter().zip(&self.digits) {
            let values = digits.iter().map(|&d| out[d]).collect();
            s.tables[sym.index()] = Some(Arc::new(Table { values }));
        }
        // advance
        self.done = true;
        'outer: for (ci, (_, _, out)) in self.cells.iter().enumerate().rev() {
            for d in self.digits[ci].iter_mut().rev() {
                *d += 1;
                if *d < out.len() {
                    self.done = false;
                    break 'outer;
                }
                *d = 0;
            }
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests;
