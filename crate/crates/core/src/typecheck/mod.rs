//! Well-formedness judgments: every value application must be guarded by the
//! static kind of its concept, and every term must fit its position.
//!
//! The checker is a single pass over the tree; [`CheckReport::judgment_steps`]
//! counts rule applications so linearity can be measured.

mod desugar;

pub use desugar::desugar_guards;

use crate::kernel::{
    BinOp, Diagnostic, Expr, ExprKind, Query, Range, Rule, Signature, Span, Theory, TypeId, TypeInterp, TypeRef,
    Vocabulary,
};

/// Static type of a term or formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Bool,
    /// Integer with statically known bounds when available.
    Int(Option<(i64, i64)>),
    /// Enumerated or open custom type.
    Named(TypeId),
    /// Some concept, signature unknown.
    Concept,
    /// A concept whose signature is statically known: the guarded kind.
    ConceptOf(Signature),
    /// A type as a value (`input`/`output` results).
    TypeVal,
}

impl Ty {
    pub fn of_type(voc: &Vocabulary, id: TypeId) -> Ty {
        match &voc.ty(id).interp {
            TypeInterp::Bool => Ty::Bool,
            TypeInterp::Int => Ty::Int(None),
            TypeInterp::IntRange { lo, hi } => Ty::Int(Some((*lo, *hi))),
            TypeInterp::Concept => Ty::Concept,
            TypeInterp::ConceptSubtype(sig) => Ty::ConceptOf(sig.clone()),
            TypeInterp::Enum(_) | TypeInterp::Open => Ty::Named(id),
        }
    }

    fn is_concept(&self) -> bool {
        matches!(self, Ty::Concept | Ty::ConceptOf(_))
    }

    pub fn show(&self, voc: &Vocabulary) -> String {
        match self {
            Ty::Bool => "Bool".into(),
            Ty::Int(None) => "Int".into(),
            Ty::Int(Some((lo, hi))) => format!("Int[{lo}..{hi}]"),
            Ty::Named(id) => voc.ty(*id).name.clone(),
            Ty::Concept => "Concept".into(),
            Ty::ConceptOf(sig) => format!("Concept[{}]", voc.show_sig(sig)),
            Ty::TypeVal => "type".into(),
        }
    }
}

/// Typing context: innermost binding last.
#[derive(Clone, Debug, Default)]
pub struct TypingContext {
    bindings: Vec<(String, Ty)>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, var: impl Into<String>, ty: Ty) {
        self.bindings.push((var.into(), ty));
    }

    pub fn pop(&mut self) {
        self.bindings.pop();
    }

    pub fn lookup(&self, var: &str) -> Option<&Ty> {
        self.bindings.iter().rev().find(|(v, _)| v == var).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    fn truncate(&mut self, n: usize) {
        self.bindings.truncate(n);
    }
}

#[derive(Clone, Debug, Default)]
pub struct CheckReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub node_count: usize,
    pub judgment_steps: usize,
}

pub(crate) struct Checker<'v> {
    pub voc: &'v Vocabulary,
    pub gamma: TypingContext,
    pub diags: Vec<Diagnostic>,
    pub steps: usize,
    /// Report free variables as sentence-level errors.
    sentence: bool,
}

fn add_iv(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let ((a0, a1), (b0, b1)) = (a?, b?);
    Some((a0.checked_add(b0)?, a1.checked_add(b1)?))
}

fn neg_iv(a: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let (lo, hi) = a?;
    Some((hi.checked_neg()?, lo.checked_neg()?))
}

fn mul_iv(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let ((a0, a1), (b0, b1)) = (a?, b?);
    let ps = [a0.checked_mul(b0)?, a0.checked_mul(b1)?, a1.checked_mul(b0)?, a1.checked_mul(b1)?];
    Some((*ps.iter().min()?, *ps.iter().max()?))
}

fn join_iv(a: Option<(i64, i64)>, b: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let ((a0, a1), (b0, b1)) = (a?, b?);
    Some((a0.min(b0), a1.max(b1)))
}

impl<'v> Checker<'v> {
    pub fn new(voc: &'v Vocabulary) -> Self {
        Checker { voc, gamma: TypingContext::new(), diags: Vec::new(), steps: 0, sentence: false }
    }

    fn error(&mut self, code: &'static str, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(code, span, msg));
    }

    fn show(&self, t: &Ty) -> String {
        t.show(self.voc)
    }

    fn extend(&mut self, var: &str, ty: Ty, span: Span) {
        self.steps += 1;
        if self.gamma.lookup(var).is_some() {
            self.diags.push(Diagnostic::warning("ShadowedVariable", span, format!("`{var}` shadows an outer binding")));
        }
        self.gamma.push(var, ty);
    }

    /// Static kind of a source-level type used as a range.
    pub fn range_type(&mut self, t: &TypeRef, span: Span) -> Option<Ty> {
        match t {
            TypeRef::Named(n) => match self.voc.type_id(n) {
                Some(id) => Some(Ty::of_type(self.voc, id)),
                None => {
                    self.error("UnknownType", span, format!("unknown type `{n}`"));
                    None
                }
            },
            TypeRef::Subtype(sig) => match self.voc.resolve_sig(sig) {
                Some(sig) => Some(Ty::ConceptOf(sig)),
                None => {
                    self.error("UnknownType", span, "unknown type in conceptual subtype");
                    None
                }
            },
        }
    }

    /// Element type of a binder; `None` when the range does not resolve.
    pub fn binder_type(&mut self, range: &Range, span: Span) -> Option<Ty> {
        let ty = match range {
            Range::Type(t) => self.range_type(t, span)?,
            Range::Pred(p) => {
                let Some(id) = self.voc.symbol_id(p) else {
                    self.error("UnknownSymbol", span, format!("unknown symbol `{p}`"));
                    return None;
                };
                let sig = &self.voc.symbol(id).sig;
                if sig.arity() != 1 || !sig.is_predicate() {
                    self.error("TypeMismatch", span, format!("`{p}` is not a unary predicate and cannot be a range"));
                    return None;
                }
                Ty::of_type(self.voc, sig.args[0])
            }
        };
        if ty == Ty::Int(None) {
            // Still bind the variable as an integer to avoid follow-up errors.
            self.error("UnboundedInt", span, "cannot quantify over unbounded Int");
        }
        Some(ty)
    }

    fn expect_bool(&mut self, e: &Expr) {
        if let Some(t) = self.infer(e) {
            if t != Ty::Bool {
                let msg = format!("expected a formula, found a term of type {}", self.show(&t));
                self.error("TypeMismatch", e.span, msg);
            }
        }
    }

    fn expect_int(&mut self, e: &Expr) -> Option<Option<(i64, i64)>> {
        match self.infer(e)? {
            Ty::Int(r) => Some(r),
            t => {
                let msg = format!("expected an integer, found {}", self.show(&t));
                self.error("TypeMismatch", e.span, msg);
                None
            }
        }
    }

    /// Can a value of type `arg` be passed where the vocabulary expects `param`?
    fn assignable(&self, arg: &Ty, param: TypeId) -> bool {
        match (arg, Ty::of_type(self.voc, param)) {
            (Ty::Int(r), Ty::Int(p)) => match (r, p) {
                (_, None) => true,
                (Some((a, b)), Some((lo, hi))) => lo <= *a && *b <= hi,
                (None, Some(_)) => false,
            },
            (a, Ty::Concept) => a.is_concept(),
            (a, p) => *a == p,
        }
    }

    fn comparable(a: &Ty, b: &Ty) -> bool {
        match (a, b) {
            (Ty::Int(_), Ty::Int(_)) => true,
            (Ty::Concept, t) | (t, Ty::Concept) => t.is_concept(),
            _ => a == b,
        }
    }

    fn check_args(&mut self, what: &str, sig: &Signature, args: &[Expr], span: Span) -> bool {
        if args.len() != sig.arity() {
            self.error(
                "ArityMismatch",
                span,
                format!("{what} expects {} argument(s), got {}", sig.arity(), args.len()),
            );
            for a in args {
                self.infer(a);
            }
            return false;
        }
        let mut ok = true;
        for (a, &p) in args.iter().zip(&sig.args) {
            if let Some(t) = self.infer(a) {
                if !self.assignable(&t, p) {
                    let msg = format!(
                        "argument of {what} has type {}, expected {}",
                        self.show(&t),
                        self.voc.show_type(p)
                    );
                    self.error("TypeMismatch", a.span, msg);
                    ok = false;
                }
            } else {
                ok = false;
            }
        }
        ok
    }

    /// Infers the static type of `e`, reporting violations. `None` means an error
    /// was already reported below this node.
    pub fn infer(&mut self, e: &Expr) -> Option<Ty> {
        self.steps += 1;
        match &e.kind {
            ExprKind::Bool(_) => Some(Ty::Bool),
            ExprKind::Num(n) => Some(Ty::Int(Some((*n, *n)))),
            ExprKind::Var(v) => match self.gamma.lookup(v) {
                Some(t) => Some(t.clone()),
                None => {
                    let code = if self.sentence { "FreeVariableInSentence" } else { "UnboundVariable" };
                    self.error(code, e.span, format!("variable `{v}` is not bound"));
                    None
                }
            },
            ExprKind::Ctor(c) => match self.voc.constructor(c) {
                Some((ty, _)) => Some(Ty::Named(ty)),
                None => {
                    self.error("UnknownSymbol", e.span, format!("unknown constructor `{c}`"));
                    None
                }
            },
            ExprKind::TypeLit(t) => {
                self.range_type(t, e.span)?;
                Some(Ty::TypeVal)
            }
            ExprKind::SymApp(s, args) => {
                let Some(id) = self.voc.symbol_id(s) else {
                    self.error("UnknownSymbol", e.span, format!("unknown symbol `{s}`"));
                    return None;
                };
                let sig = self.voc.symbol(id).sig.clone();
                let ok = self.check_args(&format!("`{s}`"), &sig, args, e.span);
                ok.then(|| Ty::of_type(self.voc, sig.out))
            }
            ExprKind::Intension(s) => match self.voc.symbol_id(s) {
                Some(id) => Some(Ty::ConceptOf(self.voc.symbol(id).sig.clone())),
                None => {
                    self.error("UnknownSymbol", e.span, format!("unknown symbol `{s}`"));
                    None
                }
            },
            ExprKind::ValueApp(f, args) => {
                let ft = self.infer(f);
                match ft {
                    Some(Ty::ConceptOf(sig)) => {
                        let ok = self.check_args("the value application", &sig, args, e.span);
                        ok.then(|| Ty::of_type(self.voc, sig.out))
                    }
                    Some(t) => {
                        let msg = format!(
                            "value application on a term of kind {}; guard it with a conceptual subtype",
                            self.show(&t)
                        );
                        self.error("UnguardedValueApp", e.span, msg);
                        for a in args {
                            self.infer(a);
                        }
                        None
                    }
                    None => {
                        for a in args {
                            self.infer(a);
                        }
                        None
                    }
                }
            }
            ExprKind::Introspect(q, inner) => {
                let t = self.infer(inner)?;
                match (q, &t) {
                    (Query::Arity, t) if t.is_concept() => Some(Ty::Int(None)),
                    (Query::Output, t) if t.is_concept() => Some(Ty::TypeVal),
                    (Query::Input(i), Ty::ConceptOf(sig)) => {
                        if *i == 0 || *i > sig.arity() {
                            self.error(
                                "IndexOutOfRange",
                                e.span,
                                format!("argument index {i} out of range for a concept of arity {}", sig.arity()),
                            );
                            return None;
                        }
                        Some(Ty::TypeVal)
                    }
                    (Query::Input(_), Ty::Concept) => {
                        self.error("UnguardedValueApp", e.span, "`input` needs a concept of known signature");
                        None
                    }
                    _ => {
                        let msg = format!("introspection on a non-concept of type {}", self.show(&t));
                        self.error("TypeMismatch", e.span, msg);
                        None
                    }
                }
            }
            ExprKind::Not(inner) => {
                self.expect_bool(inner);
                Some(Ty::Bool)
            }
            ExprKind::Neg(inner) => Some(Ty::Int(neg_iv(self.expect_int(inner)?))),
            ExprKind::Binary(op, l, r) if op.is_connective() => {
                self.expect_bool(l);
                self.expect_bool(r);
                Some(Ty::Bool)
            }
            ExprKind::Binary(op, l, r) if op.is_arith() => {
                let a = self.expect_int(l);
                let b = self.expect_int(r);
                let (a, b) = (a?, b?);
                Some(Ty::Int(match op {
                    BinOp::Add => add_iv(a, b),
                    BinOp::Sub => add_iv(a, neg_iv(b)),
                    _ => mul_iv(a, b),
                }))
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.infer(l);
                let b = self.infer(r);
                let (a, b) = (a?, b?);
                let ok = match op {
                    BinOp::Eq | BinOp::Neq => Self::comparable(&a, &b),
                    _ => matches!((&a, &b), (Ty::Int(_), Ty::Int(_))),
                };
                if !ok {
                    let msg = format!("cannot compare {} with {} using `{}`", self.show(&a), self.show(&b), op.symbol());
                    self.error("TypeMismatch", e.span, msg);
                }
                Some(Ty::Bool)
            }
            ExprKind::Quant(_, b, body) => {
                let depth = self.gamma.len();
                let ty = self.binder_type(&b.range, b.span);
                // Keep checking the body even when the range failed.
                self.extend(&b.var, ty.unwrap_or(Ty::Concept), b.span);
                self.expect_bool(body);
                self.gamma.truncate(depth);
                Some(Ty::Bool)
            }
            ExprKind::Count(bs, body) => {
                let depth = self.gamma.len();
                for b in bs {
                    let ty = self.binder_type(&b.range, b.span);
                    self.extend(&b.var, ty.unwrap_or(Ty::Concept), b.span);
                }
                self.expect_bool(body);
                self.gamma.truncate(depth);
                Some(Ty::Int(None))
            }
            ExprKind::Sum(b, body) => {
                let depth = self.gamma.len();
                let ty = self.binder_type(&b.range, b.span);
                self.extend(&b.var, ty.unwrap_or(Ty::Concept), b.span);
                let r = self.expect_int(body);
                self.gamma.truncate(depth);
                r?;
                Some(Ty::Int(None))
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                let bound = self.gamma.lookup(var).is_some();
                if !bound {
                    let code = if self.sentence { "FreeVariableInSentence" } else { "UnboundVariable" };
                    self.error(code, e.span, format!("guard on unbound variable `{var}`"));
                }
                let Some(sig) = self.voc.resolve_sig(sig) else {
                    self.error("UnknownType", e.span, "unknown type in guard signature");
                    return None;
                };
                let depth = self.gamma.len();
                self.steps += 1;
                self.gamma.push(var.clone(), Ty::ConceptOf(sig));
                let a = self.infer(then);
                self.gamma.truncate(depth);
                let b = self.infer(els);
                let (a, b) = (a?, b?);
                match (&a, &b) {
                    (Ty::Int(x), Ty::Int(y)) => Some(Ty::Int(join_iv(*x, *y))),
                    _ if a == b => Some(a),
                    _ if a.is_concept() && b.is_concept() => Some(Ty::Concept),
                    _ => {
                        let msg = format!("guard branches have types {} and {}", self.show(&a), self.show(&b));
                        self.error("TypeMismatch", e.span, msg);
                        None
                    }
                }
            }
        }
    }

    fn check_rule(&mut self, r: &Rule) {
        let depth = self.gamma.len();
        for b in &r.binders {
            let ty = self.binder_type(&b.range, b.span);
            self.extend(&b.var, ty.unwrap_or(Ty::Concept), b.span);
        }
        let Some(id) = self.voc.symbol_id(&r.head) else {
            self.error("UnknownSymbol", r.span, format!("unknown symbol `{}`", r.head));
            self.gamma.truncate(depth);
            return;
        };
        let sig = self.voc.symbol(id).sig.clone();
        let head: Vec<Expr> = r.args.iter().map(|a| Expr::new(ExprKind::Var(a.clone()), r.span)).collect();
        self.check_args(&format!("`{}`", r.head), &sig, &head, r.span);
        match (&r.value, sig.is_predicate()) {
            (None, true) => {}
            (Some(v), false) => {
                if let Some(t) = self.infer(v) {
                    if !self.assignable(&t, sig.out) {
                        let msg = format!("rule value has type {}, expected {}", self.show(&t), self.voc.show_type(sig.out));
                        self.error("TypeMismatch", v.span, msg);
                    }
                }
            }
            (Some(v), true) => self.error("TypeMismatch", v.span, format!("predicate `{}` takes no value", r.head)),
            (None, false) => self.error("TypeMismatch", r.span, format!("function `{}` needs `= value` in its head", r.head)),
        }
        self.expect_bool(&r.body);
        self.gamma.truncate(depth);
    }
}

/// Checks a closed formula: `∅ ⊢f φ`.
pub fn check_sentence(voc: &Vocabulary, phi: &Expr) -> CheckReport {
    let mut c = Checker::new(voc);
    c.sentence = true;
    c.expect_bool(phi);
    let ok = !crate::kernel::diag::has_errors(&c.diags);
    CheckReport { ok, diagnostics: c.diags, node_count: phi.node_count(), judgment_steps: c.steps }
}

/// Infers the type of a term under `gamma`, as used for CLI queries.
pub fn check_term(voc: &Vocabulary, gamma: &TypingContext, t: &Expr) -> Result<Ty, Vec<Diagnostic>> {
    let mut c = Checker::new(voc);
    c.gamma = gamma.clone();
    match c.infer(t) {
        Some(ty) if !crate::kernel::diag::has_errors(&c.diags) => Ok(ty),
        _ => Err(c.diags),
    }
}

pub fn count_judgment_steps(voc: &Vocabulary, phi: &Expr) -> (usize, usize) {
    let r = check_sentence(voc, phi);
    (r.node_count, r.judgment_steps)
}

/// Checks every axiom and definition rule of a theory.
pub fn check_theory(voc: &Vocabulary, theory: &Theory) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for a in &theory.axioms {
        diags.extend(check_sentence(voc, a).diagnostics);
    }
    let mut seen = Vec::new();
    for d in &theory.definitions {
        let sym = d.symbol();
        if seen.contains(&sym) {
            diags.push(Diagnostic::error("DuplicateDefinition", d.span, format!("`{sym}` is defined twice")));
        }
        seen.push(sym);
        if theory.assignments.iter().any(|a| a.name == sym) {
            diags.push(Diagnostic::error("ConflictError", d.span, format!("`{sym}` is both defined and assigned")));
        }
        let mut c = Checker::new(voc);
        c.sentence = true;
        for r in &d.rules {
            c.check_rule(r);
        }
        diags.extend(c.diags);
    }
    diags
}

#[cfg(test)]
mod tests;
