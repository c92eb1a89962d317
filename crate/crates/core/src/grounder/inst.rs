//! Outermost-first instantiation of desugared sentences.
//!
//! Each quantifier is expanded over its finite range and the body is grounded
//! under the new binding at once, so guards, introspection and interpreted
//! symbols fold to constants as soon as their arguments are known.

use super::{GroundError, Grounding, Rel, GF, GTerm};
use crate::evaluator::{binder_domain, VarAssignment};
use crate::kernel::{BinOp, Binder, Expr, ExprKind, QuantKind, Query, Range, SymbolId, TypeRef};
use crate::structures::{Elem, Structure};

type R<T> = Result<T, GroundError>;

pub(super) struct Inst<'g> {
    g: &'g Grounding,
    s: &'g Structure,
    env: VarAssignment,
    steps: u128,
    cap: u128,
}

impl<'g> Inst<'g> {
    pub(super) fn new(g: &'g Grounding, cap: u128) -> Self {
        Inst { g, s: &g.base, env: VarAssignment::new(), steps: 0, cap }
    }

    pub(super) fn sentence(&mut self, phi: &Expr) -> R<GF> {
        self.formula(phi)
    }

    fn tick(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.cap {
            return Err(GroundError::CombinatorialLimit { count: self.steps, cap: self.cap });
        }
        Ok(())
    }

    fn range(&self, b: &Binder) -> R<(Vec<Elem>, Option<SymbolId>)> {
        binder_domain(self.s, b).ok_or_else(|| {
            let voc = self.s.vocabulary();
            match &b.range {
                Range::Type(TypeRef::Named(n)) if voc.type_id(n).is_some_and(|t| voc.is_int_like(t)) => {
                    GroundError::UnboundedInt(n.clone())
                }
                Range::Type(TypeRef::Named(n)) => GroundError::MissingDomain(n.clone()),
                Range::Type(TypeRef::Subtype(_)) => GroundError::InternalError(format!("bad range for `{}`", b.var)),
                Range::Pred(p) => GroundError::MissingDomain(p.clone()),
            }
        })
    }

    /// Runs `f` once per element of the binder's range, with its membership condition.
    fn each<T>(&mut self, b: &Binder, mut f: impl FnMut(&mut Self, GF) -> R<Option<T>>) -> R<Vec<T>> {
        let (dom, member) = self.range(b)?;
        let mut out = Vec::with_capacity(dom.len());
        for e in dom {
            self.tick()?;
            let m = match member {
                Some(p) => GF::eq(self.app(p, vec![GTerm::Const(e)])?, GTerm::Const(Elem::Bool(true))),
                None => GF::Const(true),
            };
            self.env.push(b.var.clone(), e);
            let r = f(self, m);
            self.env.pop();
            match r? {
                Some(t) => out.push(t),
                None => break,
            }
        }
        Ok(out)
    }

    fn guard(&self, var: &str, sig: &crate::kernel::SigRef) -> R<bool> {
        let voc = self.s.vocabulary();
        let v = self.env.lookup(var).ok_or_else(|| GroundError::InternalError(format!("guard on unbound `{var}`")))?;
        let want = voc.resolve_sig(sig).ok_or_else(|| GroundError::InternalError("unresolved guard".into()))?;
        Ok(matches!(v, Elem::Concept(c) if voc.symbol(c).sig == want))
    }

    pub(super) fn formula(&mut self, e: &Expr) -> R<GF> {
        Ok(match &e.kind {
            ExprKind::Bool(b) => GF::Const(*b),
            ExprKind::Not(inner) => GF::not(self.formula(inner)?),
            ExprKind::Binary(op, l, r) if op.is_connective() => {
                let a = self.formula(l)?;
                // Short-circuit only where the result no longer depends on the right side.
                match (op, &a) {
                    (BinOp::And, GF::Const(false)) | (BinOp::Or, GF::Const(true)) => return Ok(a),
                    (BinOp::Implies, GF::Const(false)) => return Ok(GF::Const(true)),
                    _ => {}
                }
                let b = self.formula(r)?;
                match op {
                    BinOp::And => GF::and(vec![a, b]),
                    BinOp::Or => GF::or(vec![a, b]),
                    BinOp::Implies => GF::implies(a, b),
                    _ => GF::iff(a, b),
                }
            }
            ExprKind::Binary(op, l, r) if op.is_comparison() => {
                let a = self.term(l)?;
                let b = self.term(r)?;
                match op {
                    BinOp::Eq => GF::eq(a, b),
                    BinOp::Neq => GF::not(GF::eq(a, b)),
                    BinOp::Lt => GF::cmp(Rel::Lt, a, b),
                    BinOp::Leq => GF::cmp(Rel::Leq, a, b),
                    BinOp::Gt => GF::cmp(Rel::Lt, b, a),
                    _ => GF::cmp(Rel::Leq, b, a),
                }
            }
            ExprKind::Quant(k, b, body) => {
                let k = *k;
                let parts = self.each(b, |this, m| {
                    if m == GF::Const(false) {
                        return Ok(Some(GF::Const(k == QuantKind::Forall)));
                    }
                    let body = this.formula(body)?;
                    let part = match k {
                        QuantKind::Forall => GF::implies(m, body),
                        QuantKind::Exists => GF::and(vec![m, body]),
                    };
                    let decided = part == GF::Const(k == QuantKind::Exists);
                    Ok(if decided { None } else { Some(part) })
                })?;
                let len = parts.len();
                let full = self.range(b)?.0.len();
                match k {
                    // Stopped early: some instance decided the quantifier.
                    _ if len < full => GF::Const(k == QuantKind::Exists),
                    QuantKind::Forall => GF::and(parts),
                    QuantKind::Exists => GF::or(parts),
                }
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                if self.guard(var, sig)? {
                    self.formula(then)?
                } else {
                    self.formula(els)?
                }
            }
            _ => GF::eq(self.term(e)?, GTerm::Const(Elem::Bool(true))),
        })
    }

    fn term(&mut self, e: &Expr) -> R<GTerm> {
        let voc = self.s.vocabulary();
        Ok(match &e.kind {
            ExprKind::Bool(b) => GTerm::Const(Elem::Bool(*b)),
            ExprKind::Num(n) => GTerm::int(*n),
            ExprKind::Var(v) => match self.env.lookup(v).or_else(|| self.s.universe().open_element(v)) {
                Some(e) => GTerm::Const(e),
                None => return Err(GroundError::InternalError(format!("unbound variable `{v}`"))),
            },
            ExprKind::Ctor(c) => match voc.constructor(c) {
                Some((ty, idx)) => GTerm::Const(Elem::Named { ty, idx: idx as u32 }),
                None => return Err(GroundError::InternalError(format!("unknown constructor `{c}`"))),
            },
            ExprKind::TypeLit(t) => match voc.resolve_type(t) {
                Some(t) => GTerm::Const(Elem::Type(t)),
                None => return Err(GroundError::InternalError("unresolved type".into())),
            },
            ExprKind::Intension(name) => match voc.symbol_id(name) {
                Some(s) => GTerm::Const(Elem::Concept(s)),
                None => return Err(GroundError::InternalError(format!("unknown symbol `{name}`"))),
            },
            ExprKind::SymApp(name, args) => {
                let sym = voc.symbol_id(name).ok_or_else(|| GroundError::InternalError(format!("unknown symbol `{name}`")))?;
                let args = self.terms(args)?;
                self.app(sym, args)?
            }
            ExprKind::ValueApp(f, args) => {
                let f = self.term(f)?;
                let args = self.terms(args)?;
                self.on_value(f, &mut |this, c| match c {
                    Elem::Concept(sym) if this.s.vocabulary().symbol(sym).sig.arity() == args.len() => {
                        this.app(sym, args.clone())
                    }
                    _ => Ok(GTerm::undefined()),
                })?
            }
            ExprKind::Introspect(q, inner) => {
                let t = self.term(inner)?;
                let q = *q;
                self.on_value(t, &mut |this, c| {
                    let Elem::Concept(sym) = c else { return Ok(GTerm::undefined()) };
                    let sig = &this.s.vocabulary().symbol(sym).sig;
                    Ok(match q {
                        Query::Arity => GTerm::int(sig.arity() as i64),
                        Query::Output => GTerm::Const(Elem::Type(sig.out)),
                        Query::Input(i) => match i.checked_sub(1).and_then(|i| sig.args.get(i)) {
                            Some(&t) => GTerm::Const(Elem::Type(t)),
                            None => GTerm::undefined(),
                        },
                    })
                })?
            }
            ExprKind::Neg(inner) => GTerm::neg(self.term(inner)?),
            ExprKind::Binary(op, l, r) if op.is_arith() => {
                let a = self.term(l)?;
                let b = self.term(r)?;
                match op {
                    BinOp::Add => GTerm::add(vec![a, b]),
                    BinOp::Sub => GTerm::add(vec![a, GTerm::neg(b)]),
                    _ => GTerm::mul(a, b),
                }
            }
            ExprKind::Count(bs, cond) => {
                let mut items = Vec::new();
                self.count_items(bs, cond, Vec::new(), &mut items)?;
                GTerm::count(items)
            }
            ExprKind::Sum(b, t) => {
                let items = self.each(b, |this, m| {
                    if m == GF::Const(false) {
                        return Ok(Some(GTerm::int(0)));
                    }
                    let t = this.term(t)?;
                    Ok(Some(match m {
                        GF::Const(true) => t,
                        m => {
                            let neg = GF::not(m.clone());
                            GTerm::Choice(vec![(m, t), (neg, GTerm::int(0))])
                        }
                    }))
                })?;
                GTerm::add(items)
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                if self.guard(var, sig)? {
                    self.term(then)?
                } else {
                    self.term(els)?
                }
            }
            // Connectives, comparisons and quantifiers used as Boolean values.
            _ => GTerm::of_formula(self.formula(e)?),
        })
    }

    fn terms(&mut self, args: &[Expr]) -> R<Vec<GTerm>> {
        args.iter().map(|a| self.term(a)).collect()
    }

    fn count_items(&mut self, bs: &[Binder], cond: &Expr, conj: Vec<GF>, out: &mut Vec<GF>) -> R<()> {
        let Some((b, rest)) = bs.split_first() else {
            let c = self.formula(cond)?;
            out.push(GF::and(conj.into_iter().chain([c]).collect()));
            return Ok(());
        };
        self.each(b, |this, m| {
            if m != GF::Const(false) {
                let mut conj = conj.clone();
                conj.push(m);
                this.count_items(rest, cond, conj, out)?;
            }
            Ok(Some(()))
        })?;
        Ok(())
    }

    /// Applies `f` to each possible value of `t`, case-splitting on cells.
    fn on_value(&mut self, t: GTerm, f: &mut dyn FnMut(&mut Self, Elem) -> R<GTerm>) -> R<GTerm> {
        match t {
            GTerm::Const(e) => f(self, e),
            GTerm::Cell(c) => {
                let dom = self.g.domain(c).ok_or_else(|| GroundError::InternalError("case split on an unbounded cell".into()))?;
                let mut branches = Vec::with_capacity(dom.len());
                for &v in dom {
                    branches.push((GF::atom(c, v), f(self, v)?));
                }
                Ok(GTerm::choice(branches))
            }
            GTerm::Choice(bs) => {
                let mut branches = Vec::with_capacity(bs.len());
                for (g, t) in bs {
                    branches.push((g, self.on_value(t, f)?));
                }
                Ok(GTerm::choice(branches))
            }
            _ => Err(GroundError::InternalError("case split on an arithmetic term".into())),
        }
    }

    /// `σ(args)`: a constant for interpreted symbols, a cell otherwise; open
    /// arguments are split over the parameter domain.
    fn app(&mut self, sym: SymbolId, args: Vec<GTerm>) -> R<GTerm> {
        let voc = self.s.vocabulary();
        if args.len() != voc.symbol(sym).sig.arity() {
            return Ok(GTerm::undefined());
        }
        if let Some(i) = args.iter().position(|a| !matches!(a, GTerm::Const(_))) {
            let ty = voc.symbol(sym).sig.args[i];
            let dom = self.s.domain(ty).map_err(|_| GroundError::MissingDomain(voc.ty(ty).name.clone()))?.to_vec();
            let mut branches = Vec::with_capacity(dom.len());
            for v in dom {
                let g = GF::eq(args[i].clone(), GTerm::Const(v));
                if g == GF::Const(false) {
                    continue;
                }
                let mut fixed = args.clone();
                fixed[i] = GTerm::Const(v);
                branches.push((g, self.app(sym, fixed)?));
            }
            return Ok(GTerm::choice(branches));
        }
        let vals: Vec<Elem> = args
            .into_iter()
            .map(|a| match a {
                GTerm::Const(e) => e,
                _ => unreachable!("all arguments are constants"),
            })
            .collect();
        if self.s.is_interpreted(sym) {
            return Ok(self.s.value(sym, &vals).map(GTerm::Const).unwrap_or_else(GTerm::undefined));
        }
        Ok(self.g.cell(sym, &vals).map(GTerm::Cell).unwrap_or_else(GTerm::undefined))
    }
}
