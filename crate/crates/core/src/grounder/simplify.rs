//! Model-preserving cleanup of a constraint set.
//!
//! Unit constraints (`p(a)`, `~p(a)`, `f(a) = v`) and defining equations of
//! unbounded integer cells are substituted into the other constraints; the
//! originals are kept so the model set does not change.

use std::collections::HashSet;

use super::{defining, push_split, Constraint, Grounding, GF, GTerm};
use crate::structures::Elem;

const MAX_SUBSTITUTED_SIZE: usize = 64;
const MAX_ROUNDS: usize = 8;

struct Facts {
    value: Vec<Option<GTerm>>,
    source: Vec<usize>,
}

fn facts(g: &Grounding, cons: &[Constraint]) -> Facts {
    let n = g.cells.len();
    let mut f = Facts { value: vec![None; n], source: vec![usize::MAX; n] };
    for (i, con) in cons.iter().enumerate() {
        let (c, t) = match &con.formula {
            GF::Atom(c, v) => (*c, GTerm::Const(*v)),
            GF::Not(inner) => match &**inner {
                GF::Atom(c, Elem::Bool(true)) => (*c, GTerm::Const(Elem::Bool(false))),
                _ => continue,
            },
            other => match defining(other) {
                Some((c, t)) if g.domain(c).is_none() && t.size() <= MAX_SUBSTITUTED_SIZE => (c, t),
                _ => continue,
            },
        };
        if f.value[c].is_none() {
            f.value[c] = Some(t);
            f.source[c] = i;
        }
    }
    f
}

struct Rewriter<'a> {
    g: &'a Grounding,
    facts: &'a Facts,
    current: usize,
    empty: Vec<Option<Elem>>,
}

impl Rewriter<'_> {
    fn cell(&self, c: usize) -> Option<&GTerm> {
        if self.facts.source[c] == self.current {
            return None;
        }
        self.facts.value[c].as_ref()
    }

    /// Folds a node whose value is fixed regardless of the open cells.
    fn fold(&self, f: GF) -> GF {
        match &f {
            GF::Atom(..) | GF::Cmp(..) => match self.g.eval_formula(&self.empty, &f) {
                Some(b) => GF::Const(b),
                None => f,
            },
            _ => f,
        }
    }

    fn formula(&self, f: &GF) -> GF {
        let out = match f {
            GF::Const(b) => GF::Const(*b),
            GF::Atom(c, v) => match self.cell(*c) {
                Some(t) => GF::eq(t.clone(), GTerm::Const(*v)),
                None => GF::Atom(*c, *v),
            },
            GF::Not(inner) => GF::not(self.formula(inner)),
            GF::And(fs) => GF::and(fs.iter().map(|f| self.formula(f)).collect()),
            GF::Or(fs) => GF::or(fs.iter().map(|f| self.formula(f)).collect()),
            GF::Iff(a, b) => GF::iff(self.formula(a), self.formula(b)),
            GF::Cmp(rel, a, b) => GF::cmp_any(*rel, self.term(a), self.term(b)),
        };
        self.fold(out)
    }

    fn term(&self, t: &GTerm) -> GTerm {
        match t {
            GTerm::Const(e) => GTerm::Const(*e),
            GTerm::Cell(c) => self.cell(*c).cloned().unwrap_or(GTerm::Cell(*c)),
            GTerm::Choice(bs) => GTerm::choice(bs.iter().map(|(g, t)| (self.formula(g), self.term(t))).collect()),
            GTerm::Count(fs) => GTerm::count(fs.iter().map(|f| self.formula(f)).collect()),
            GTerm::Add(ts) => GTerm::add(ts.iter().map(|t| self.term(t)).collect()),
            GTerm::Mul(a, b) => GTerm::mul(self.term(a), self.term(b)),
            GTerm::Neg(t) => GTerm::neg(self.term(t)),
        }
    }
}

/// Constant folding, unit substitution and removal of satisfied constraints.
/// The result has exactly the models of the input.
pub fn simplify(g: &Grounding) -> Grounding {
    let mut cons = g.constraints.clone();
    for _ in 0..MAX_ROUNDS {
        let facts = facts(g, &cons);
        let mut next = Vec::with_capacity(cons.len());
        for (i, con) in cons.iter().enumerate() {
            let rw = Rewriter { g, facts: &facts, current: i, empty: vec![None; g.cells.len()] };
            push_split(&mut next, con.axiom, rw.formula(&con.formula));
        }
        let mut seen = HashSet::new();
        next.retain(|c| seen.insert(c.formula.clone()));
        if let Some(bad) = next.iter().find(|c| c.formula == GF::Const(false)) {
            next = vec![bad.clone()];
        }
        let done = next == cons;
        cons = next;
        if done {
            break;
        }
    }
    let mut out = g.clone();
    out.constraints = cons;
    // Defining equations are never rewritten by their own substitution, so this cannot fail.
    out.analyze().expect("simplification keeps defining equations");
    out
}
