//! Unified term/formula syntax tree.
//!
//! Symbols, types and variables are referred to by name; resolution against a
//! [`Vocabulary`](super::Vocabulary) happens in the checker, evaluator and grounder.

use super::diag::Span;
use super::vocabulary::Query;

/// A type as written in source: a name or `Concept[sig]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Named(String),
    Subtype(SigRef),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SigRef {
    pub args: Vec<TypeRef>,
    pub out: Box<TypeRef>,
}

/// What a bound variable ranges over: a type, or the members of a unary predicate
/// (`!x in sel: ...`).
#[derive(Clone, Debug, PartialEq)]
pub enum Range {
    Type(TypeRef),
    Pred(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub var: String,
    pub range: Range,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QuantKind {
    Forall,
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Equiv,
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "&",
            BinOp::Or => "|",
            BinOp::Implies => "=>",
            BinOp::Equiv => "<=>",
            BinOp::Eq => "=",
            BinOp::Neq => "~=",
            BinOp::Lt => "<",
            BinOp::Leq => "=<",
            BinOp::Gt => ">",
            BinOp::Geq => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    pub fn is_connective(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Equiv)
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Leq | BinOp::Gt | BinOp::Geq)
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Bool(bool),
    Num(i64),
    Var(String),
    /// Constructor of an enumerated type, e.g. `laptop`.
    Ctor(String),
    /// A type used as a value, compared against `input`/`output` introspection.
    TypeLit(TypeRef),
    /// `σ(t1, …, tn)`; nullary symbols carry an empty argument list.
    SymApp(String, Vec<Expr>),
    /// `` `σ ``
    Intension(String),
    /// `$(e)(t1, …, tn)`
    ValueApp(Box<Expr>, Vec<Expr>),
    Introspect(Query, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Quant(QuantKind, Binder, Box<Expr>),
    Count(Vec<Binder>, Box<Expr>),
    Sum(Binder, Box<Expr>),
    /// `if x::[sig] then a else b`
    IfGuard { var: String, sig: SigRef, then: Box<Expr>, els: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    /// Node without source location, for synthesized trees.
    pub fn synth(kind: ExprKind) -> Self {
        Expr { kind, span: Span::default() }
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        let span = l.span.to(r.span);
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), span)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        let span = e.span;
        Expr::new(ExprKind::Not(Box::new(e)), span)
    }

    pub fn var(name: &str) -> Self {
        Expr::synth(ExprKind::Var(name.into()))
    }

    pub fn app(sym: &str, args: Vec<Expr>) -> Self {
        Expr::synth(ExprKind::SymApp(sym.into(), args))
    }

    /// Direct children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Bool(_)
            | ExprKind::Num(_)
            | ExprKind::Var(_)
            | ExprKind::Ctor(_)
            | ExprKind::TypeLit(_)
            | ExprKind::Intension(_) => vec![],
            ExprKind::SymApp(_, args) => args.iter().collect(),
            ExprKind::ValueApp(f, args) => std::iter::once(f.as_ref()).chain(args.iter()).collect(),
            ExprKind::Introspect(_, e) | ExprKind::Not(e) | ExprKind::Neg(e) => vec![e],
            ExprKind::Binary(_, l, r) => vec![l, r],
            ExprKind::Quant(_, _, b) | ExprKind::Count(_, b) | ExprKind::Sum(_, b) => vec![b],
            ExprKind::IfGuard { then, els, .. } => vec![then, els],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Variable names occurring anywhere (bound or free).
    pub fn collect_var_names(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Var(v) => out.push(v.clone()),
            ExprKind::Quant(_, b, _) | ExprKind::Sum(b, _) => out.push(b.var.clone()),
            ExprKind::Count(bs, _) => out.extend(bs.iter().map(|b| b.var.clone())),
            ExprKind::IfGuard { var, .. } => out.push(var.clone()),
            _ => {}
        }
        for c in self.children() {
            c.collect_var_names(out);
        }
    }

    /// Symbol names applied or quoted in the expression, including predicate ranges.
    pub fn collect_symbols(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::SymApp(s, _) | ExprKind::Intension(s) => out.push(s.clone()),
            ExprKind::Quant(_, b, _) | ExprKind::Sum(b, _) => {
                if let Range::Pred(p) = &b.range {
                    out.push(p.clone());
                }
            }
            ExprKind::Count(bs, _) => {
                for b in bs {
                    if let Range::Pred(p) = &b.range {
                        out.push(p.clone());
                    }
                }
            }
            _ => {}
        }
        for c in self.children() {
            c.collect_symbols(out);
        }
    }
}
