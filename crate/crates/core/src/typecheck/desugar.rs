//! Rewrites the sugared forms into explicit guards:
//!
//! * `Qx in Concept[sig]: φ` becomes `Qx in Concept: if x::[sig] then φ else n`, with
//!   `n` the quantifier's neutral element;
//! * a predicate range whose argument is a conceptual subtype gets the same guard
//!   around the membership test;
//! * `$(e)(ts)` on a composite `e` is lifted out of its atom through a fresh
//!   `?y in Concept[sig]: y = e & ...`.

use std::collections::HashSet;

use super::{check_sentence, Checker, Ty};
use crate::kernel::{BinOp, Binder, Diagnostic, Expr, ExprKind, QuantKind, Range, Span, TypeRef, Vocabulary};

struct Desugar<'v> {
    c: Checker<'v>,
    taken: HashSet<String>,
}

fn concept_range() -> Range {
    Range::Type(TypeRef::Named("Concept".into()))
}

fn boxed(e: Expr) -> Box<Expr> {
    Box::new(e)
}

impl<'v> Desugar<'v> {
    fn fresh(&mut self) -> String {
        let name = std::iter::once("y".to_string())
            .chain((1..).map(|i| format!("y{i}")))
            .find(|n| !self.taken.contains(n))
            .expect("unbounded name supply");
        self.taken.insert(name.clone());
        name
    }

    fn bind(&mut self, b: &Binder) -> Ty {
        let ty = self.c.binder_type(&b.range, b.span).unwrap_or(Ty::Concept);
        self.c.gamma.push(b.var.clone(), ty.clone());
        ty
    }

    fn guard(&self, var: &str, sig: &crate::kernel::Signature, then: Expr, els: Expr) -> Expr {
        Expr::synth(ExprKind::IfGuard { var: var.into(), sig: self.c.voc.sig_ref(sig), then: boxed(then), els: boxed(els) })
    }

    fn formula(&mut self, e: &Expr) -> Expr {
        let kind = match &e.kind {
            ExprKind::Not(inner) => ExprKind::Not(boxed(self.formula(inner))),
            ExprKind::Binary(op, l, r) if op.is_connective() => {
                ExprKind::Binary(*op, boxed(self.formula(l)), boxed(self.formula(r)))
            }
            ExprKind::Quant(k, b, body) => {
                let ty = self.bind(b);
                let body = self.formula(body);
                self.c.gamma.pop();
                let neutral = Expr::synth(ExprKind::Bool(*k == QuantKind::Forall));
                match (ty, &b.range) {
                    (Ty::ConceptOf(sig), Range::Type(_)) => {
                        let binder = Binder { range: concept_range(), ..b.clone() };
                        ExprKind::Quant(*k, binder, boxed(self.guard(&b.var, &sig, body, neutral)))
                    }
                    (Ty::ConceptOf(sig), Range::Pred(p)) => {
                        let member = Expr::app(p, vec![Expr::var(&b.var)]);
                        let op = if *k == QuantKind::Forall { BinOp::Implies } else { BinOp::And };
                        let inner = Expr::binary(op, member, body);
                        let binder = Binder { range: concept_range(), ..b.clone() };
                        ExprKind::Quant(*k, binder, boxed(self.guard(&b.var, &sig, inner, neutral)))
                    }
                    _ => ExprKind::Quant(*k, b.clone(), boxed(body)),
                }
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                let resolved = self.c.voc.resolve_sig(sig).map(Ty::ConceptOf).unwrap_or(Ty::Concept);
                self.c.gamma.push(var.clone(), resolved);
                let then = self.formula(then);
                self.c.gamma.pop();
                let els = self.formula(els);
                ExprKind::IfGuard { var: var.clone(), sig: sig.clone(), then: boxed(then), els: boxed(els) }
            }
            _ => {
                let atom = self.term(e);
                return self.lift(atom);
            }
        };
        Expr::new(kind, e.span)
    }

    fn term(&mut self, e: &Expr) -> Expr {
        let kind = match &e.kind {
            ExprKind::Count(bs, cond) => {
                let tys: Vec<Ty> = bs.iter().map(|b| self.bind(b)).collect();
                let mut cond = self.formula(cond);
                for _ in bs {
                    self.c.gamma.pop();
                }
                let mut binders = bs.clone();
                for (b, ty) in bs.iter().zip(tys).rev() {
                    if let Ty::ConceptOf(sig) = ty {
                        if let Range::Pred(p) = &b.range {
                            cond = Expr::binary(BinOp::And, Expr::app(p, vec![Expr::var(&b.var)]), cond);
                        }
                        cond = self.guard(&b.var, &sig, cond, Expr::synth(ExprKind::Bool(false)));
                    }
                }
                for b in &mut binders {
                    if matches!(self.c.binder_type(&b.range, b.span), Some(Ty::ConceptOf(_))) {
                        b.range = concept_range();
                    }
                }
                ExprKind::Count(binders, boxed(cond))
            }
            ExprKind::Sum(b, t) => {
                let ty = self.bind(b);
                let t = self.term(t);
                self.c.gamma.pop();
                match (ty, &b.range) {
                    (Ty::ConceptOf(sig), Range::Type(_)) => {
                        let binder = Binder { range: concept_range(), ..b.clone() };
                        ExprKind::Sum(binder, boxed(self.guard(&b.var, &sig, t, Expr::synth(ExprKind::Num(0)))))
                    }
                    _ => ExprKind::Sum(b.clone(), boxed(t)),
                }
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                let resolved = self.c.voc.resolve_sig(sig).map(Ty::ConceptOf).unwrap_or(Ty::Concept);
                self.c.gamma.push(var.clone(), resolved);
                let then = self.term(then);
                self.c.gamma.pop();
                let els = self.term(els);
                ExprKind::IfGuard { var: var.clone(), sig: sig.clone(), then: boxed(then), els: boxed(els) }
            }
            // A formula in term position, e.g. an operand of `=` between Booleans.
            ExprKind::Quant(..) => return self.formula(e),
            ExprKind::Not(inner) => ExprKind::Not(boxed(self.term(inner))),
            ExprKind::Neg(inner) => ExprKind::Neg(boxed(self.term(inner))),
            ExprKind::Introspect(q, inner) => ExprKind::Introspect(*q, boxed(self.term(inner))),
            ExprKind::Binary(op, l, r) => ExprKind::Binary(*op, boxed(self.term(l)), boxed(self.term(r))),
            ExprKind::SymApp(s, args) => ExprKind::SymApp(s.clone(), args.iter().map(|a| self.term(a)).collect()),
            ExprKind::ValueApp(f, args) => {
                ExprKind::ValueApp(boxed(self.term(f)), args.iter().map(|a| self.term(a)).collect())
            }
            _ => return e.clone(),
        };
        Expr::new(kind, e.span)
    }

    /// Lifts composite value applications out of an atom, outermost first.
    fn lift(&mut self, atom: Expr) -> Expr {
        let mut found = None;
        let rewritten = self.replace_first(&atom, &mut found);
        let Some((y, f)) = found else { return atom };
        let Some(Ty::ConceptOf(sig)) = self.c.infer(&f) else {
            // Ill-typed input is rejected before desugaring, so this is unreachable.
            return atom;
        };
        self.c.gamma.push(y.clone(), Ty::ConceptOf(sig.clone()));
        let def = self.lift(Expr::binary(BinOp::Eq, Expr::var(&y), f));
        let rest = self.lift(rewritten);
        self.c.gamma.pop();
        let body = Expr::binary(BinOp::And, def, rest);
        let guarded = self.guard(&y, &sig, body, Expr::synth(ExprKind::Bool(false)));
        let binder = Binder { var: y, range: concept_range(), span: Span::default() };
        Expr::new(ExprKind::Quant(QuantKind::Exists, binder, boxed(guarded)), atom.span)
    }

    /// Replaces the first composite `$(e)` not under a binder by `$(y)`.
    fn replace_first(&mut self, e: &Expr, found: &mut Option<(String, Expr)>) -> Expr {
        if found.is_some() {
            return e.clone();
        }
        let kind = match &e.kind {
            ExprKind::ValueApp(f, args) if !matches!(f.kind, ExprKind::Var(_)) => {
                let y = self.fresh();
                *found = Some((y.clone(), (**f).clone()));
                ExprKind::ValueApp(boxed(Expr::var(&y)), args.clone())
            }
            ExprKind::ValueApp(f, args) => {
                ExprKind::ValueApp(f.clone(), args.iter().map(|a| self.replace_first(a, found)).collect())
            }
            ExprKind::SymApp(s, args) => {
                ExprKind::SymApp(s.clone(), args.iter().map(|a| self.replace_first(a, found)).collect())
            }
            ExprKind::Binary(op, l, r) => {
                let l = self.replace_first(l, found);
                ExprKind::Binary(*op, boxed(l), boxed(self.replace_first(r, found)))
            }
            ExprKind::Neg(inner) => ExprKind::Neg(boxed(self.replace_first(inner, found))),
            ExprKind::Not(inner) => ExprKind::Not(boxed(self.replace_first(inner, found))),
            ExprKind::Introspect(q, inner) => ExprKind::Introspect(*q, boxed(self.replace_first(inner, found))),
            _ => return e.clone(),
        };
        Expr::new(kind, e.span)
    }
}

/// Makes every guard explicit. The input must pass [`check_sentence`]; so does the output.
pub fn desugar_guards(voc: &Vocabulary, phi: &Expr) -> Result<Expr, Vec<Diagnostic>> {
    let report = check_sentence(voc, phi);
    if !report.ok {
        return Err(report.diagnostics);
    }
    let mut names = Vec::new();
    phi.collect_var_names(&mut names);
    let mut d = Desugar { c: Checker::new(voc), taken: names.into_iter().collect() };
    let out = d.formula(phi);
    let after = check_sentence(voc, &out);
    if !after.ok {
        return Err(after.diagnostics);
    }
    Ok(out)
}
