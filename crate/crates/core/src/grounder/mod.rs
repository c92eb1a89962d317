//! Instantiation of a theory into variable-free constraints over table cells.
//!
//! A cell is one argument tuple of a symbol left open by the input structure.
//! Atoms read `σ(d̄) = v`; a cell holds exactly one value, which is the
//! exactly-one group of the finite-domain encoding.

mod emit;
mod inst;
mod kleene;
mod simplify;

use std::collections::HashSet;

use thiserror::Error;

pub use emit::{render, show_formula, show_term, smt2};
pub use kleene::TermValue;
pub use simplify::simplify;

use crate::kernel::{Diagnostic, SymbolId, Theory, TypeId};
use crate::structures::{extend_structure, Elem, Structure, DEFAULT_EXPANSION_CAP};

pub type CellId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroundError {
    #[error("the theory is not well-formed")]
    Invalid(Vec<Diagnostic>),
    #[error("grounding needs {count} instantiations, above the cap of {cap}")]
    CombinatorialLimit { count: u128, cap: u128 },
    #[error("`{0}` ranges over unbounded integers")]
    UnboundedInt(String),
    #[error("type `{0}` has no domain in the structure")]
    MissingDomain(String),
    #[error("internal grounding error: {0}")]
    InternalError(String),
}

impl GroundError {
    pub fn code(&self) -> &'static str {
        match self {
            GroundError::Invalid(_) => "InvalidTheory",
            GroundError::CombinatorialLimit { .. } => "CombinatorialLimit",
            GroundError::UnboundedInt(_) => "UnboundedInt",
            GroundError::MissingDomain(_) => "MissingDomain",
            GroundError::InternalError(_) => "InternalError",
        }
    }
}

/// Relations kept after normalization: `a > b` becomes `b < a`, `a ~= b` becomes `~(a = b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Lt,
    Leq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GTerm {
    Const(Elem),
    Cell(CellId),
    /// Value of the branch whose guard holds. Guards are pairwise exclusive;
    /// when none holds the term is undefined.
    Choice(Vec<(GF, GTerm)>),
    /// Number of true formulas.
    Count(Vec<GF>),
    Add(Vec<GTerm>),
    Mul(Box<GTerm>, Box<GTerm>),
    Neg(Box<GTerm>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GF {
    Const(bool),
    /// The cell holds the value. Predicate cells only appear with `true`.
    Atom(CellId, Elem),
    Not(Box<GF>),
    And(Vec<GF>),
    Or(Vec<GF>),
    Iff(Box<GF>, Box<GF>),
    Cmp(Rel, GTerm, GTerm),
}

fn int_of(t: &GTerm) -> Option<i64> {
    match t {
        GTerm::Const(Elem::Int(n)) => Some(*n),
        _ => None,
    }
}

fn int_like(t: &GTerm) -> bool {
    matches!(t, GTerm::Const(Elem::Int(_)) | GTerm::Count(_) | GTerm::Add(_) | GTerm::Mul(..) | GTerm::Neg(_))
}

// Smart constructors named after the operations they build.
#[allow(clippy::should_implement_trait)]
impl GTerm {
    pub fn int(n: i64) -> GTerm {
        GTerm::Const(Elem::Int(n))
    }

    /// The term with no value.
    pub fn undefined() -> GTerm {
        GTerm::Choice(Vec::new())
    }

    pub fn choice(branches: Vec<(GF, GTerm)>) -> GTerm {
        let mut kept = Vec::with_capacity(branches.len());
        for (g, t) in branches {
            match g {
                GF::Const(false) => {}
                GF::Const(true) if kept.is_empty() => return t,
                g => kept.push((g, t)),
            }
        }
        GTerm::Choice(kept)
    }

    pub fn count(items: Vec<GF>) -> GTerm {
        let mut k = 0i64;
        let mut rest = Vec::new();
        for f in items {
            match f {
                GF::Const(true) => k += 1,
                GF::Const(false) => {}
                f => rest.push(f),
            }
        }
        if rest.is_empty() {
            GTerm::int(k)
        } else {
            GTerm::add(vec![GTerm::Count(rest), GTerm::int(k)])
        }
    }

    /// Sum with nested sums flattened and constants folded into one trailing summand.
    pub fn add(items: Vec<GTerm>) -> GTerm {
        let mut k = 0i64;
        let mut rest = Vec::new();
        let mut stack: Vec<GTerm> = items.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            match t {
                GTerm::Add(inner) => stack.extend(inner.into_iter().rev()),
                GTerm::Const(Elem::Int(n)) => match k.checked_add(n) {
                    Some(s) => k = s,
                    None => return GTerm::undefined(),
                },
                t => rest.push(t),
            }
        }
        match (rest.len(), k) {
            (0, k) => GTerm::int(k),
            (1, 0) => rest.pop().expect("one summand"),
            (_, 0) => GTerm::Add(rest),
            _ => {
                rest.push(GTerm::int(k));
                GTerm::Add(rest)
            }
        }
    }

    pub fn neg(t: GTerm) -> GTerm {
        match t {
            GTerm::Const(Elem::Int(n)) => n.checked_neg().map(GTerm::int).unwrap_or_else(GTerm::undefined),
            GTerm::Neg(inner) => *inner,
            t => GTerm::Neg(Box::new(t)),
        }
    }

    pub fn mul(a: GTerm, b: GTerm) -> GTerm {
        match (int_of(&a), int_of(&b)) {
            (Some(x), Some(y)) => x.checked_mul(y).map(GTerm::int).unwrap_or_else(GTerm::undefined),
            (Some(1), None) => b,
            (None, Some(1)) => a,
            _ => GTerm::Mul(Box::new(a), Box::new(b)),
        }
    }

    /// A formula used as a Boolean value.
    pub fn of_formula(f: GF) -> GTerm {
        match f {
            GF::Const(b) => GTerm::Const(Elem::Bool(b)),
            GF::Atom(c, Elem::Bool(true)) => GTerm::Cell(c),
            f => {
                let neg = GF::not(f.clone());
                GTerm::Choice(vec![(f, GTerm::Const(Elem::Bool(true))), (neg, GTerm::Const(Elem::Bool(false)))])
            }
        }
    }

    /// Splits a trailing integer constant off a sum.
    fn split_offset(self) -> (Option<GTerm>, i64) {
        match self {
            GTerm::Const(Elem::Int(n)) => (None, n),
            GTerm::Add(mut items) => match items.last().and_then(int_of) {
                Some(k) => {
                    items.pop();
                    (Some(GTerm::add(items)), k)
                }
                None => (Some(GTerm::Add(items)), 0),
            },
            t => (Some(t), 0),
        }
    }

    pub fn cells(&self, out: &mut Vec<CellId>) {
        match self {
            GTerm::Const(_) => {}
            GTerm::Cell(c) => out.push(*c),
            GTerm::Choice(bs) => {
                for (g, t) in bs {
                    g.cells(out);
                    t.cells(out);
                }
            }
            GTerm::Count(fs) => fs.iter().for_each(|f| f.cells(out)),
            GTerm::Add(ts) => ts.iter().for_each(|t| t.cells(out)),
            GTerm::Mul(a, b) => {
                a.cells(out);
                b.cells(out);
            }
            GTerm::Neg(t) => t.cells(out),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            GTerm::Const(_) | GTerm::Cell(_) => 1,
            GTerm::Choice(bs) => 1 + bs.iter().map(|(g, t)| g.size() + t.size()).sum::<usize>(),
            GTerm::Count(fs) => 1 + fs.iter().map(GF::size).sum::<usize>(),
            GTerm::Add(ts) => 1 + ts.iter().map(GTerm::size).sum::<usize>(),
            GTerm::Mul(a, b) => 1 + a.size() + b.size(),
            GTerm::Neg(t) => 1 + t.size(),
        }
    }
}

#[allow(clippy::should_implement_trait)]
impl GF {
    pub fn not(f: GF) -> GF {
        match f {
            GF::Const(b) => GF::Const(!b),
            GF::Not(inner) => *inner,
            f => GF::Not(Box::new(f)),
        }
    }

    pub fn and(items: Vec<GF>) -> GF {
        let mut out = Vec::new();
        let mut stack: Vec<GF> = items.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                GF::Const(true) => {}
                GF::Const(false) => return GF::Const(false),
                GF::And(inner) => stack.extend(inner.into_iter().rev()),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => GF::Const(true),
            1 => out.pop().expect("one conjunct"),
            _ => GF::And(out),
        }
    }

    pub fn or(items: Vec<GF>) -> GF {
        let mut out = Vec::new();
        let mut stack: Vec<GF> = items.into_iter().rev().collect();
        while let Some(f) = stack.pop() {
            match f {
                GF::Const(false) => {}
                GF::Const(true) => return GF::Const(true),
                GF::Or(inner) => stack.extend(inner.into_iter().rev()),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => GF::Const(false),
            1 => out.pop().expect("one disjunct"),
            _ => GF::Or(out),
        }
    }

    pub fn implies(a: GF, b: GF) -> GF {
        GF::or(vec![GF::not(a), b])
    }

    pub fn iff(a: GF, b: GF) -> GF {
        match (a, b) {
            (GF::Const(x), GF::Const(y)) => GF::Const(x == y),
            (GF::Const(true), f) | (f, GF::Const(true)) => f,
            (GF::Const(false), f) | (f, GF::Const(false)) => GF::not(f),
            (a, b) => GF::Iff(Box::new(a), Box::new(b)),
        }
    }

    /// `a = b`, pushed through case splits so that cells meet constants as atoms.
    pub fn eq(a: GTerm, b: GTerm) -> GF {
        match (a, b) {
            (GTerm::Const(x), GTerm::Const(y)) => GF::Const(x == y),
            (GTerm::Cell(c), GTerm::Const(v)) | (GTerm::Const(v), GTerm::Cell(c)) => GF::atom(c, v),
            (GTerm::Choice(bs), other) | (other, GTerm::Choice(bs)) => {
                GF::or(bs.into_iter().map(|(g, t)| GF::and(vec![g, GF::eq(t, other.clone())])).collect())
            }
            (a, b) if int_like(&a) || int_like(&b) => GF::cmp(Rel::Eq, a, b),
            (a, b) => GF::Cmp(Rel::Eq, a, b),
        }
    }

    pub fn atom(c: CellId, v: Elem) -> GF {
        match v {
            Elem::Bool(false) => GF::not(GF::Atom(c, Elem::Bool(true))),
            v => GF::Atom(c, v),
        }
    }

    /// Integer comparison with constants folded and moved to one side.
    pub fn cmp(rel: Rel, a: GTerm, b: GTerm) -> GF {
        if let (Some(x), Some(y)) = (int_of(&a), int_of(&b)) {
            return GF::Const(match rel {
                Rel::Eq => x == y,
                Rel::Lt => x < y,
                Rel::Leq => x <= y,
            });
        }
        if rel == Rel::Eq && !(int_like(&a) || int_like(&b)) {
            return GF::Cmp(rel, a, b);
        }
        let (ra, ka) = a.split_offset();
        let (rb, kb) = b.split_offset();
        let (a, b) = match (ra, rb) {
            (None, Some(rb)) => match ka.checked_sub(kb) {
                Some(k) => (GTerm::int(k), rb),
                None => return GF::Const(false),
            },
            (Some(ra), None) => match kb.checked_sub(ka) {
                Some(k) => (ra, GTerm::int(k)),
                None => return GF::Const(false),
            },
            (ra, rb) => (restore(ra, ka), restore(rb, kb)),
        };
        match (rel, &a, &b) {
            (Rel::Eq, GTerm::Cell(c), GTerm::Const(v)) | (Rel::Eq, GTerm::Const(v), GTerm::Cell(c)) => GF::atom(*c, *v),
            _ => GF::Cmp(rel, a, b),
        }
    }

    /// Any relation, with equality going through [`GF::eq`].
    pub fn cmp_any(rel: Rel, a: GTerm, b: GTerm) -> GF {
        match rel {
            Rel::Eq => GF::eq(a, b),
            rel => GF::cmp(rel, a, b),
        }
    }

    pub fn cells(&self, out: &mut Vec<CellId>) {
        match self {
            GF::Const(_) => {}
            GF::Atom(c, _) => out.push(*c),
            GF::Not(f) => f.cells(out),
            GF::And(fs) | GF::Or(fs) => fs.iter().for_each(|f| f.cells(out)),
            GF::Iff(a, b) => {
                a.cells(out);
                b.cells(out);
            }
            GF::Cmp(_, a, b) => {
                a.cells(out);
                b.cells(out);
            }
        }
    }

    /// Distinct cells in order of first occurrence.
    pub fn cell_set(&self) -> Vec<CellId> {
        let mut all = Vec::new();
        self.cells(&mut all);
        let mut seen = HashSet::new();
        all.retain(|c| seen.insert(*c));
        all
    }

    pub fn size(&self) -> usize {
        match self {
            GF::Const(_) | GF::Atom(..) => 1,
            GF::Not(f) => 1 + f.size(),
            GF::And(fs) | GF::Or(fs) => 1 + fs.iter().map(GF::size).sum::<usize>(),
            GF::Iff(a, b) => 1 + a.size() + b.size(),
            GF::Cmp(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

fn restore(t: Option<GTerm>, k: i64) -> GTerm {
    match t {
        None => GTerm::int(k),
        Some(t) if k == 0 => t,
        Some(t) => GTerm::add(vec![t, GTerm::int(k)]),
    }
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub sym: SymbolId,
    pub args: Vec<Elem>,
    /// Computed from the theory's definitions instead of searched.
    pub defined: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    /// Index of the axiom it came from.
    pub axiom: usize,
    pub formula: GF,
}

/// Ground form of a theory over a partial structure.
#[derive(Clone, Debug)]
pub struct Grounding {
    /// The input structure with the theory's own assignments applied.
    pub base: Structure,
    pub cells: Vec<Cell>,
    pub constraints: Vec<Constraint>,
    offsets: Vec<Option<usize>>,
    domains: Vec<Option<Vec<Elem>>>,
    bounds: Vec<Option<(i64, i64)>>,
    /// Per cell, the constraint `cell = t` that fixes an unbounded integer cell.
    pub derived: Vec<Option<usize>>,
    /// Derived cells ordered so that each is computed after those it reads.
    pub derived_order: Vec<CellId>,
}

impl Grounding {
    fn new(base: Structure, defined: &[SymbolId]) -> Grounding {
        let voc = base.vocabulary_arc().clone();
        let n = voc.symbols().len();
        let mut offsets = vec![None; n];
        let mut domains = vec![None; n];
        let mut bounds = vec![None; n];
        let mut cells = Vec::new();
        for sym in voc.symbol_ids() {
            let out = voc.symbol(sym).sig.out;
            let dom = base.domain(out).ok().map(<[Elem]>::to_vec);
            bounds[sym.index()] = match dom.as_deref() {
                Some([Elem::Int(lo), .., Elem::Int(hi)]) => Some((*lo, *hi)),
                Some([Elem::Int(n)]) => Some((*n, *n)),
                _ => None,
            };
            domains[sym.index()] = dom;
            if base.is_interpreted(sym) {
                continue;
            }
            offsets[sym.index()] = Some(cells.len());
            let len = base.universe().shape(sym).len;
            for i in 0..len {
                cells.push(Cell { sym, args: base.tuple_at(sym, i), defined: defined.contains(&sym) });
            }
        }
        let derived = vec![None; cells.len()];
        Grounding { base, cells, constraints: Vec::new(), offsets, domains, bounds, derived, derived_order: Vec::new() }
    }

    pub fn cell(&self, sym: SymbolId, args: &[Elem]) -> Option<CellId> {
        Some(self.offsets[sym.index()]? + self.base.tuple_index(sym, args)?)
    }

    /// Possible values of a cell; `None` for unbounded integers.
    pub fn domain(&self, c: CellId) -> Option<&[Elem]> {
        self.domains[self.cells[c].sym.index()].as_deref()
    }

    pub fn bounds(&self, c: CellId) -> Option<(i64, i64)> {
        self.bounds[self.cells[c].sym.index()]
    }

    pub fn out_type(&self, c: CellId) -> TypeId {
        self.base.vocabulary().symbol(self.cells[c].sym).sig.out
    }

    /// Cells that the search branches on: neither defined nor derived.
    pub fn is_decision(&self, c: CellId) -> bool {
        !self.cells[c].defined && self.derived[c].is_none()
    }

    /// Finds the defining equation of every unbounded integer cell.
    fn analyze(&mut self) -> Result<(), GroundError> {
        self.derived = vec![None; self.cells.len()];
        for (i, con) in self.constraints.iter().enumerate() {
            if let Some((c, _)) = defining(&con.formula) {
                if self.domain(c).is_none() && !self.cells[c].defined && self.derived[c].is_none() {
                    self.derived[c] = Some(i);
                }
            }
        }
        // An inconsistent set needs no values at all.
        let inconsistent = self.constraints.iter().any(|c| c.formula == GF::Const(false));
        for c in 0..self.cells.len() {
            if !inconsistent && self.domain(c).is_none() && !self.cells[c].defined && self.derived[c].is_none() {
                let name = &self.base.vocabulary().symbol(self.cells[c].sym).name;
                return Err(GroundError::UnboundedInt(name.clone()));
            }
        }
        // Topological order over derived cells; a cycle leaves the value open.
        let mut order = Vec::new();
        let mut state = vec![0u8; self.cells.len()];
        for c in 0..self.cells.len() {
            if self.derived[c].is_some() {
                self.visit(c, &mut state, &mut order)?;
            }
        }
        self.derived_order = order;
        Ok(())
    }

    fn visit(&self, c: CellId, state: &mut [u8], order: &mut Vec<CellId>) -> Result<(), GroundError> {
        match state[c] {
            2 => return Ok(()),
            1 => {
                let name = &self.base.vocabulary().symbol(self.cells[c].sym).name;
                return Err(GroundError::UnboundedInt(name.clone()));
            }
            _ => {}
        }
        state[c] = 1;
        let (_, t) = defining(&self.constraints[self.derived[c].expect("derived cell")].formula).expect("defining equation");
        let mut reads = Vec::new();
        t.cells(&mut reads);
        for d in reads {
            if self.derived[d].is_some() {
                self.visit(d, state, order)?;
            }
        }
        state[c] = 2;
        order.push(c);
        Ok(())
    }

    /// Cell values read off a structure over the same universe.
    pub fn values_in(&self, s: &Structure) -> Vec<Option<Elem>> {
        self.cells.iter().map(|c| s.value(c.sym, &c.args)).collect()
    }

    /// The base structure with every fully assigned, non-defined symbol filled in.
    pub fn structure_from(&self, vals: &[Option<Elem>]) -> Structure {
        let mut s = self.base.clone();
        let voc = self.base.vocabulary_arc().clone();
        for sym in voc.symbol_ids() {
            let Some(start) = self.offsets[sym.index()] else { continue };
            let len = self.base.universe().shape(sym).len;
            if self.cells[start..start + len].iter().any(|c| c.defined) {
                continue;
            }
            let values: Option<Vec<Elem>> = vals[start..start + len].iter().copied().collect();
            if let Some(values) = values {
                s.set_table(sym, crate::structures::Table { values }).expect("cell values lie in their domains");
            }
        }
        s
    }

    /// Whether every constraint holds under a full assignment.
    pub fn satisfied_by(&self, vals: &[Option<Elem>]) -> bool {
        self.constraints.iter().all(|c| self.eval_formula(vals, &c.formula) == Some(true))
    }

    pub fn show_cell(&self, c: CellId) -> String {
        let cell = &self.cells[c];
        let name = &self.base.vocabulary().symbol(cell.sym).name;
        let args: Vec<String> = cell.args.iter().map(|&e| self.base.show(e)).collect();
        format!("{name}({})", args.join(", "))
    }
}

/// `cell = t` (in either orientation) with `t` not reading the cell.
pub(crate) fn defining(f: &GF) -> Option<(CellId, GTerm)> {
    let (c, t) = match f {
        GF::Atom(c, v @ Elem::Int(_)) => (*c, GTerm::Const(*v)),
        GF::Cmp(Rel::Eq, GTerm::Cell(c), t) | GF::Cmp(Rel::Eq, t, GTerm::Cell(c)) => (*c, t.clone()),
        _ => return None,
    };
    let mut reads = Vec::new();
    t.cells(&mut reads);
    (!reads.contains(&c)).then_some((c, t))
}

/// Splits top-level conjunctions and drops constraints that are already true.
fn push_split(out: &mut Vec<Constraint>, axiom: usize, f: GF) {
    match f {
        GF::And(fs) => fs.into_iter().for_each(|f| push_split(out, axiom, f)),
        GF::Const(true) => {}
        f => out.push(Constraint { axiom, formula: f }),
    }
}

pub fn ground(theory: &Theory, partial: &Structure) -> Result<Grounding, GroundError> {
    ground_with_cap(theory, partial, DEFAULT_EXPANSION_CAP)
}

/// Grounds every axiom; `cap` bounds the total number of quantifier instantiations.
pub fn ground_with_cap(theory: &Theory, partial: &Structure, cap: u128) -> Result<Grounding, GroundError> {
    let voc = partial.vocabulary();
    let diags = crate::typecheck::check_theory(voc, theory);
    if crate::kernel::diag::has_errors(&diags) {
        return Err(GroundError::Invalid(diags));
    }
    let own: Vec<_> = theory.assignments.iter().collect();
    let base = extend_structure(partial, &own).map_err(GroundError::Invalid)?;
    let defined: Vec<SymbolId> = theory.defined_symbols().iter().filter_map(|n| voc.symbol_id(n)).collect();
    let mut g = Grounding::new(base, &defined);
    let mut constraints = Vec::new();
    let mut inst = inst::Inst::new(&g, cap);
    for (i, axiom) in theory.axioms.iter().enumerate() {
        let phi = crate::typecheck::desugar_guards(voc, axiom).map_err(GroundError::Invalid)?;
        let f = inst.sentence(&phi)?;
        push_split(&mut constraints, i, f);
    }
    g.constraints = constraints;
    g.analyze()?;
    Ok(g)
}
