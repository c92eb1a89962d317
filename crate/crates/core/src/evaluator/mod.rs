//! Partial valuation of terms and formulas in a structure.
//!
//! Connectives, quantifiers and aggregates are strict: a compound is defined
//! only when every part it inspects is defined. Guards are the one exception:
//! only the selected branch must be defined.

mod definitions;

use thiserror::Error;

pub use definitions::{dependency_strata, eval_definitions, with_definitions};

use crate::kernel::{BinOp, Binder, Expr, ExprKind, QuantKind, Query, Range, Signature, TypeRef};
use crate::structures::{Elem, Structure};

/// `Some(e)` when defined, `None` for the undefined value.
pub type Value = Option<Elem>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("the sentence has no truth value in this structure")]
    UndefinedResult,
    #[error("`{0}` depends negatively on its own stratum")]
    NonStratified(String),
    #[error("`{symbol}` derives several values for ({tuple})")]
    MultipleValues { symbol: String, tuple: String },
    #[error("`{symbol}` derives no value for ({tuple})")]
    NoValue { symbol: String, tuple: String },
    #[error("`{symbol}` derives `{value}`, outside its output type")]
    OutOfDomain { symbol: String, value: String },
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::UndefinedResult => "UndefinedResult",
            EvalError::NonStratified(_) => "NonStratified",
            EvalError::MultipleValues { .. } => "MultipleValues",
            EvalError::NoValue { .. } => "NoValue",
            EvalError::OutOfDomain { .. } => "OutOfDomain",
        }
    }
}

/// Variable assignment; lookups see the innermost binding.
#[derive(Clone, Debug, Default)]
pub struct VarAssignment {
    stack: Vec<(String, Elem)>,
}

impl VarAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, var: impl Into<String>, e: Elem) {
        self.stack.push((var.into(), e));
    }

    pub fn pop(&mut self) {
        self.stack.pop();
    }

    pub fn lookup(&self, var: &str) -> Option<Elem> {
        self.stack.iter().rev().find(|(v, _)| v == var).map(|(_, e)| *e)
    }

    fn set_top(&mut self, e: Elem) {
        self.stack.last_mut().expect("a binding was pushed").1 = e;
    }
}

/// Elements a binder ranges over, plus the membership predicate for predicate ranges.
pub(crate) fn binder_domain(s: &Structure, b: &Binder) -> Option<(Vec<Elem>, Option<crate::kernel::SymbolId>)> {
    let voc = s.vocabulary();
    match &b.range {
        Range::Type(TypeRef::Named(n)) => Some((s.domain(voc.type_id(n)?).ok()?.to_vec(), None)),
        Range::Type(TypeRef::Subtype(sig)) => Some((s.concepts_of(&voc.resolve_sig(sig)?), None)),
        Range::Pred(p) => {
            let id = voc.symbol_id(p)?;
            let sig = &voc.symbol(id).sig;
            if sig.arity() != 1 {
                return None;
            }
            Some((s.domain(sig.args[0]).ok()?.to_vec(), Some(id)))
        }
    }
}

fn truth(v: Value) -> Option<bool> {
    match v? {
        Elem::Bool(b) => Some(b),
        _ => None,
    }
}

fn int(v: Value) -> Option<i64> {
    match v? {
        Elem::Int(n) => Some(n),
        _ => None,
    }
}

/// Signature of a concept value, `None` for other elements.
fn concept_sig(s: &Structure, e: Elem) -> Option<&Signature> {
    match e {
        Elem::Concept(sym) => Some(&s.vocabulary().symbol(sym).sig),
        _ => None,
    }
}

pub struct Evaluator<'s> {
    pub s: &'s Structure,
}

impl<'s> Evaluator<'s> {
    pub fn new(s: &'s Structure) -> Self {
        Evaluator { s }
    }

    fn apply(&self, sym: crate::kernel::SymbolId, args: &[Elem]) -> Value {
        self.s.value(sym, args)
    }

    fn args(&self, env: &mut VarAssignment, args: &[Expr]) -> Option<Vec<Elem>> {
        // Strict: every argument is evaluated.
        let vals: Vec<Value> = args.iter().map(|a| self.eval(env, a)).collect();
        vals.into_iter().collect()
    }

    /// Calls `f` once per binding of `b`; returns `None` when the range is not finite.
    fn each<T>(
        &self,
        env: &mut VarAssignment,
        b: &Binder,
        mut f: impl FnMut(&Self, &mut VarAssignment, Option<bool>) -> T,
    ) -> Option<Vec<T>> {
        let (dom, member) = binder_domain(self.s, b)?;
        let mut out = Vec::with_capacity(dom.len());
        env.push(b.var.clone(), Elem::Bool(false));
        for e in dom {
            env.set_top(e);
            let m = member.map(|p| truth(self.apply(p, &[e])));
            // An undefined membership test makes the whole binder undefined.
            let m = match m {
                Some(None) => {
                    env.pop();
                    return None;
                }
                Some(Some(b)) => Some(b),
                None => None,
            };
            out.push(f(self, env, m));
        }
        env.pop();
        Some(out)
    }

    fn count(&self, env: &mut VarAssignment, bs: &[Binder], cond: &Expr) -> Option<i64> {
        let Some((b, rest)) = bs.split_first() else {
            return truth(self.eval(env, cond)).map(i64::from);
        };
        let parts = self.each(env, b, |ev, env, member| {
            let n = ev.count(env, rest, cond)?;
            Some(if member == Some(false) { 0 } else { n })
        })?;
        parts.into_iter().try_fold(0i64, |acc, p| acc.checked_add(p?))
    }

    pub fn eval(&self, env: &mut VarAssignment, e: &Expr) -> Value {
        let voc = self.s.vocabulary();
        match &e.kind {
            ExprKind::Bool(b) => Some(Elem::Bool(*b)),
            ExprKind::Num(n) => Some(Elem::Int(*n)),
            ExprKind::Var(v) => env.lookup(v).or_else(|| self.s.universe().open_element(v)),
            ExprKind::Ctor(c) => voc.constructor(c).map(|(ty, idx)| Elem::Named { ty, idx: idx as u32 }),
            ExprKind::TypeLit(t) => voc.resolve_type(t).map(Elem::Type),
            ExprKind::SymApp(name, args) => {
                let sym = voc.symbol_id(name)?;
                let args = self.args(env, args)?;
                self.apply(sym, &args)
            }
            ExprKind::Intension(name) => voc.symbol_id(name).map(Elem::Concept),
            ExprKind::ValueApp(f, args) => {
                let f = self.eval(env, f);
                let args = self.args(env, args);
                let Some(Elem::Concept(sym)) = f else { return None };
                // `value` rejects arity and domain mismatches.
                self.apply(sym, &args?)
            }
            ExprKind::Introspect(q, inner) => {
                let v = self.eval(env, inner)?;
                let sig = concept_sig(self.s, v)?;
                match q {
                    Query::Arity => Some(Elem::Int(sig.arity() as i64)),
                    Query::Output => Some(Elem::Type(sig.out)),
                    Query::Input(i) => i.checked_sub(1).and_then(|i| sig.args.get(i)).map(|&t| Elem::Type(t)),
                }
            }
            ExprKind::Not(inner) => truth(self.eval(env, inner)).map(|b| Elem::Bool(!b)),
            ExprKind::Neg(inner) => int(self.eval(env, inner))?.checked_neg().map(Elem::Int),
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(env, l);
                let b = self.eval(env, r);
                match op {
                    BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Equiv => {
                        let (a, b) = (truth(a)?, truth(b)?);
                        Some(Elem::Bool(match op {
                            BinOp::And => a && b,
                            BinOp::Or => a || b,
                            BinOp::Implies => !a || b,
                            _ => a == b,
                        }))
                    }
                    BinOp::Eq => Some(Elem::Bool(a? == b?)),
                    BinOp::Neq => Some(Elem::Bool(a? != b?)),
                    BinOp::Lt | BinOp::Leq | BinOp::Gt | BinOp::Geq => {
                        let (a, b) = (int(a)?, int(b)?);
                        Some(Elem::Bool(match op {
                            BinOp::Lt => a < b,
                            BinOp::Leq => a <= b,
                            BinOp::Gt => a > b,
                            _ => a >= b,
                        }))
                    }
                    BinOp::Add => int(a)?.checked_add(int(b)?).map(Elem::Int),
                    BinOp::Sub => int(a)?.checked_sub(int(b)?).map(Elem::Int),
                    BinOp::Mul => int(a)?.checked_mul(int(b)?).map(Elem::Int),
                }
            }
            ExprKind::Quant(k, b, body) => {
                let vals = self.each(env, b, |ev, env, member| {
                    let v = truth(ev.eval(env, body))?;
                    // Non-members satisfy ∀ and falsify ∃, like `P(x) => φ` and `P(x) & φ`.
                    Some(match member {
                        Some(false) => *k == QuantKind::Forall,
                        _ => v,
                    })
                })?;
                let vals: Option<Vec<bool>> = vals.into_iter().collect();
                let vals = vals?;
                Some(Elem::Bool(match k {
                    QuantKind::Forall => vals.iter().all(|&v| v),
                    QuantKind::Exists => vals.iter().any(|&v| v),
                }))
            }
            ExprKind::Count(bs, cond) => self.count(env, bs, cond).map(Elem::Int),
            ExprKind::Sum(b, t) => {
                let parts = self.each(env, b, |ev, env, member| match member {
                    Some(false) => Some(0),
                    _ => int(ev.eval(env, t)),
                })?;
                parts.into_iter().try_fold(0i64, |acc, p| acc.checked_add(p?)).map(Elem::Int)
            }
            ExprKind::IfGuard { var, sig, then, els } => {
                let v = env.lookup(var)?;
                let want = voc.resolve_sig(sig)?;
                if concept_sig(self.s, v) == Some(&want) {
                    self.eval(env, then)
                } else {
                    self.eval(env, els)
                }
            }
        }
    }
}

/// Value of `e` under `env`.
pub fn eval(s: &Structure, env: &mut VarAssignment, e: &Expr) -> Value {
    Evaluator::new(s).eval(env, e)
}

/// Truth value of a closed formula; an undefined result is an error, since it
/// cannot happen for checked sentences in total structures.
pub fn eval_sentence(s: &Structure, phi: &Expr) -> Result<bool, EvalError> {
    match eval(s, &mut VarAssignment::new(), phi) {
        Some(Elem::Bool(b)) => Ok(b),
        _ => Err(EvalError::UndefinedResult),
    }
}

#[cfg(test)]
mod tests;
