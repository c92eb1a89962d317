//! Stratified least-fixpoint evaluation of inductive definitions.

use super::{binder_domain, truth, EvalError, Evaluator, VarAssignment};
use crate::kernel::{BinOp, Binder, Definition, Expr, ExprKind, QuantKind, Range, Rule, Signature, SymbolId, TypeInterp, TypeRef, Vocabulary};
use crate::structures::{Elem, Structure, Table};

struct DepWalk<'a> {
    voc: &'a Vocabulary,
    defined: &'a [SymbolId],
    /// Concept variables with their statically known signature.
    guards: Vec<(String, Option<Signature>)>,
    out: Vec<(SymbolId, bool)>,
}

impl DepWalk<'_> {
    fn binder_sig(&self, b: &Binder) -> Option<Signature> {
        match &b.range {
            Range::Type(TypeRef::Subtype(sig)) => self.voc.resolve_sig(sig),
            Range::Pred(p) => {
                let sig = &self.voc.symbol(self.voc.symbol_id(p)?).sig;
                match &self.voc.ty(*sig.args.first()?).interp {
                    TypeInterp::ConceptSubtype(s) => Some(s.clone()),
                    _ => None,
                }
            }
            Range::Type(TypeRef::Named(_)) => None,
        }
    }

    fn symbol(&mut self, sym: SymbolId, positive: bool) {
        if self.defined.contains(&sym) {
            // Function values are not monotone in anything.
            let monotone = self.voc.symbol(sym).sig.is_predicate();
            self.out.push((sym, positive && monotone));
        }
    }

    fn range(&mut self, b: &Binder, positive: bool) {
        if let Range::Pred(p) = &b.range {
            if let Some(id) = self.voc.symbol_id(p) {
                self.symbol(id, positive);
            }
        }
    }

    fn walk(&mut self, e: &Expr, positive: bool) {
        match &e.kind {
            ExprKind::SymApp(name, args) => {
                if let Some(id) = self.voc.symbol_id(name) {
                    self.symbol(id, positive);
                }
                for a in args {
                    self.walk(a, false);
                }
            }
            ExprKind::ValueApp(f, args) => {
                let sig = match &f.kind {
                    ExprKind::Var(v) => self.guards.iter().rev().find(|(n, _)| n == v).and_then(|(_, s)| s.clone()),
                    _ => None,
                };
                let targets: Vec<SymbolId> = self
                    .defined
                    .iter()
                    .copied()
                    .filter(|&d| {
                        let dsig = &self.voc.symbol(d).sig;
                        sig.as_ref().map_or(dsig.arity() == args.len(), |s| s == dsig)
                    })
                    .collect();
                for d in targets {
                    self.symbol(d, positive && sig.is_some());
                }
                self.walk(f, false);
                for a in args {
                    self.walk(a, false);
                }
            }
            ExprKind::Not(inner) => self.walk(inner, !positive),
            ExprKind::Binary(BinOp::And | BinOp::Or, l, r) => {
                self.walk(l, positive);
                self.walk(r, positive);
            }
            ExprKind::Binary(BinOp::Implies, l, r) => {
                self.walk(l, !positive);
                self.walk(r, positive);
            }
            ExprKind::Binary(_, l, r) => {
                self.walk(l, false);
                self.walk(r, false);
            }
            ExprKind::Quant(k, b, body) => {
                self.range(b, positive && *k == QuantKind::Exists);
                self.guards.push((b.var.clone(), self.binder_sig(b)));
                self.walk(body, positive);
                self.guards.pop();
            }
            ExprKind::Count(bs, body) => {
                for b in bs {
                    self.range(b, false);
                    self.guards.push((b.var.clone(), self.binder_sig(b)));
                }
                self.walk(body, false);
                for _ in bs {
                    self.guards.pop();
                }
            }
            ExprKind::Sum(b, body) => {
                self.range(b, false);
                self.guards.push((b.var.clone(), self.binder_sig(b)));
                self.walk(body, false);
                self.guards.pop();
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                self.guards.push((var.clone(), self.voc.resolve_sig(sig)));
                self.walk(then, positive);
                self.guards.pop();
                self.walk(els, positive);
            }
            ExprKind::Introspect(_, inner) | ExprKind::Neg(inner) => self.walk(inner, false),
            ExprKind::Bool(_)
            | ExprKind::Num(_)
            | ExprKind::Var(_)
            | ExprKind::Ctor(_)
            | ExprKind::TypeLit(_)
            | ExprKind::Intension(_) => {}
        }
    }
}

fn rule_deps(voc: &Vocabulary, defined: &[SymbolId], r: &Rule) -> Vec<(SymbolId, bool)> {
    let mut w = DepWalk { voc, defined, guards: Vec::new(), out: Vec::new() };
    for b in &r.binders {
        w.range(b, true);
        let sig = w.binder_sig(b);
        w.guards.push((b.var.clone(), sig));
    }
    w.walk(&r.body, true);
    if let Some(v) = &r.value {
        w.walk(v, false);
    }
    w.out
}

/// Groups definitions into strata, dependencies first. Mutual recursion is
/// allowed only through positive occurrences of predicates.
pub fn dependency_strata(voc: &Vocabulary, defs: &[Definition]) -> Result<Vec<Vec<usize>>, EvalError> {
    let syms: Vec<SymbolId> = defs.iter().map(|d| voc.symbol_id(d.symbol()).expect("checked head")).collect();
    let n = defs.len();
    let edges: Vec<Vec<(usize, bool)>> = defs
        .iter()
        .map(|d| {
            d.rules
                .iter()
                .flat_map(|r| rule_deps(voc, &syms, r))
                .map(|(s, pos)| (syms.iter().position(|&x| x == s).expect("defined"), pos))
                .collect()
        })
        .collect();

    // Tarjan's algorithm; components come out dependencies first.
    struct Tarjan<'e> {
        edges: &'e [Vec<(usize, bool)>],
        index: Vec<Option<usize>>,
        low: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next: usize,
        comps: Vec<Vec<usize>>,
    }
    impl Tarjan<'_> {
        fn visit(&mut self, v: usize) {
            self.index[v] = Some(self.next);
            self.low[v] = self.next;
            self.next += 1;
            self.stack.push(v);
            self.on_stack[v] = true;
            for &(w, _) in &self.edges[v] {
                match self.index[w] {
                    None => {
                        self.visit(w);
                        self.low[v] = self.low[v].min(self.low[w]);
                    }
                    Some(iw) if self.on_stack[w] => self.low[v] = self.low[v].min(iw),
                    Some(_) => {}
                }
            }
            if Some(self.low[v]) == self.index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = self.stack.pop().expect("non-empty");
                    self.on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                self.comps.push(comp);
            }
        }
    }
    let mut t = Tarjan {
        edges: &edges,
        index: vec![None; n],
        low: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next: 0,
        comps: Vec::new(),
    };
    for v in 0..n {
        if t.index[v].is_none() {
            t.visit(v);
        }
    }
    let comps = t.comps;
    for comp in &comps {
        for &v in comp {
            for &(w, pos) in &edges[v] {
                if comp.contains(&w) && (!pos || !voc.symbol(syms[v]).sig.is_predicate()) {
                    return Err(EvalError::NonStratified(defs[v].symbol().to_string()));
                }
            }
        }
    }
    Ok(comps)
}

/// Calls `f` for every binding of the rule's variables that satisfies its
/// predicate ranges.
fn for_each_binding(
    ev: &Evaluator,
    env: &mut VarAssignment,
    binders: &[Binder],
    f: &mut dyn FnMut(&mut VarAssignment) -> Result<(), EvalError>,
) -> Result<(), EvalError> {
    let Some((b, rest)) = binders.split_first() else { return f(env) };
    let (dom, member) = binder_domain(ev.s, b).ok_or(EvalError::UndefinedResult)?;
    for e in dom {
        if let Some(p) = member {
            match truth(ev.s.value(p, &[e])) {
                Some(true) => {}
                Some(false) => continue,
                None => return Err(EvalError::UndefinedResult),
            }
        }
        env.push(b.var.clone(), e);
        let r = for_each_binding(ev, env, rest, f);
        env.pop();
        r?;
    }
    Ok(())
}

fn head_tuple(env: &VarAssignment, r: &Rule) -> Result<Vec<Elem>, EvalError> {
    r.args.iter().map(|a| env.lookup(a).ok_or(EvalError::UndefinedResult)).collect()
}

fn show_tuple(s: &Structure, t: &[Elem]) -> String {
    t.iter().map(|&e| s.show(e)).collect::<Vec<_>>().join(", ")
}

fn eval_predicates(s: &mut Structure, defs: &[&Definition]) -> Result<(), EvalError> {
    let syms: Vec<SymbolId> = defs.iter().map(|d| s.vocabulary().symbol_id(d.symbol()).expect("checked")).collect();
    for &sym in &syms {
        let len = s.universe().shape(sym).len;
        s.set_table(sym, Table { values: vec![Elem::Bool(false); len] }).expect("well-sized");
    }
    loop {
        let mut next: Vec<Vec<Elem>> = syms.iter().map(|&sym| s.table(sym).expect("set").values.clone()).collect();
        let mut changed = false;
        {
            let ev = Evaluator::new(s);
            for (di, d) in defs.iter().enumerate() {
                for r in &d.rules {
                    let mut env = VarAssignment::new();
                    for_each_binding(&ev, &mut env, &r.binders, &mut |env| {
                        if truth(ev.eval(env, &r.body)).ok_or(EvalError::UndefinedResult)? {
                            let t = head_tuple(env, r)?;
                            let idx = ev.s.tuple_index(syms[di], &t).ok_or(EvalError::UndefinedResult)?;
                            if next[di][idx] != Elem::Bool(true) {
                                next[di][idx] = Elem::Bool(true);
                                changed = true;
                            }
                        }
                        Ok(())
                    })?;
                }
            }
        }
        if !changed {
            return Ok(());
        }
        for (sym, values) in syms.iter().zip(next) {
            s.set_table(*sym, Table { values }).expect("well-sized");
        }
    }
}

fn eval_function(s: &mut Structure, d: &Definition) -> Result<(), EvalError> {
    let voc = s.vocabulary_arc().clone();
    let sym = voc.symbol_id(d.symbol()).expect("checked");
    let out_ty = voc.symbol(sym).sig.out;
    let mut values: Vec<Option<Elem>> = vec![None; s.universe().shape(sym).len];
    {
        let ev = Evaluator::new(s);
        for r in &d.rules {
            let value_expr = r.value.as_ref().ok_or(EvalError::UndefinedResult)?;
            let mut env = VarAssignment::new();
            for_each_binding(&ev, &mut env, &r.binders, &mut |env| {
                if !truth(ev.eval(env, &r.body)).ok_or(EvalError::UndefinedResult)? {
                    return Ok(());
                }
                let v = ev.eval(env, value_expr).ok_or(EvalError::UndefinedResult)?;
                if !ev.s.universe().contains(out_ty, v) {
                    return Err(EvalError::OutOfDomain { symbol: d.symbol().into(), value: ev.s.show(v) });
                }
                let t = head_tuple(env, r)?;
                let idx = ev.s.tuple_index(sym, &t).ok_or(EvalError::UndefinedResult)?;
                match values[idx] {
                    Some(old) if old != v => {
                        Err(EvalError::MultipleValues { symbol: d.symbol().into(), tuple: show_tuple(ev.s, &t) })
                    }
                    _ => {
                        values[idx] = Some(v);
                        Ok(())
                    }
                }
            })?;
        }
    }
    let mut table = Vec::with_capacity(values.len());
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Some(v) => table.push(v),
            None => {
                let t = s.tuple_at(sym, i);
                return Err(EvalError::NoValue { symbol: d.symbol().into(), tuple: show_tuple(s, &t) });
            }
        }
    }
    s.set_table(sym, Table { values: table }).expect("values were checked");
    Ok(())
}

/// Extends `s` with the tables of all defined symbols. Existing tables for
/// defined symbols are discarded and recomputed.
pub fn with_definitions(s: &Structure, defs: &[Definition]) -> Result<Structure, EvalError> {
    let mut out = s.clone();
    if defs.is_empty() {
        return Ok(out);
    }
    let strata = dependency_strata(s.vocabulary(), defs)?;
    for d in defs {
        let sym = s.vocabulary().symbol_id(d.symbol()).expect("checked");
        out.clear_table(sym);
    }
    for comp in strata {
        let group: Vec<&Definition> = comp.iter().map(|&i| &defs[i]).collect();
        let sym = s.vocabulary().symbol_id(group[0].symbol()).expect("checked");
        if s.vocabulary().symbol(sym).sig.is_predicate() {
            eval_predicates(&mut out, &group)?;
        } else {
            eval_function(&mut out, group[0])?;
        }
    }
    Ok(out)
}

/// Tables of the defined symbols, in definition order.
pub fn eval_definitions(s: &Structure, defs: &[Definition]) -> Result<Vec<(SymbolId, Table)>, EvalError> {
    let full = with_definitions(s, defs)?;
    Ok(defs
        .iter()
        .map(|d| {
            let sym = s.vocabulary().symbol_id(d.symbol()).expect("checked");
            (sym, full.table(sym).expect("computed").clone())
        })
        .collect())
}
