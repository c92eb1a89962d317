//! Deterministic printer whose output re-parses to the same tree.

use std::fmt::Write;

use crate::kernel::{
    Assignment, BinOp, Binder, Expr, ExprKind, Literal, QuantKind, Query, Range, Rule, SigRef,
    StructureDecl, TableLit, Theory, TypeInterp, TypeRef, Vocabulary,
};

use super::{Block, SourceFile};

const INDENT: &str = "    ";

fn binop_prec(op: BinOp) -> u8 {
    match op {
        BinOp::Equiv => 1,
        BinOp::Implies => 2,
        BinOp::Or => 3,
        BinOp::And => 4,
        BinOp::Eq | BinOp::Neq | BinOp::Lt | BinOp::Leq | BinOp::Gt | BinOp::Geq => 6,
        BinOp::Add | BinOp::Sub => 7,
        BinOp::Mul => 8,
    }
}

const NOT_PREC: u8 = 5;
const NEG_PREC: u8 = 9;
/// Quantifiers and guards swallow everything to their right.
const OPEN_PREC: u8 = 0;

pub fn type_ref(t: &TypeRef) -> String {
    match t {
        TypeRef::Named(n) => n.clone(),
        TypeRef::Subtype(sig) => format!("Concept[{}]", sig_ref(sig)),
    }
}

pub fn sig_ref(sig: &SigRef) -> String {
    let args = match sig.args.len() {
        0 => "()".to_string(),
        _ => sig.args.iter().map(type_ref).collect::<Vec<_>>().join("**"),
    };
    format!("{}->{}", args, type_ref(&sig.out))
}

fn range(r: &Range) -> String {
    match r {
        Range::Type(t) => type_ref(t),
        Range::Pred(p) => p.clone(),
    }
}

fn binder(b: &Binder) -> String {
    format!("{} in {}", b.var, range(&b.range))
}

fn list(args: &[Expr]) -> String {
    args.iter().map(|a| expr_prec(a, 0)).collect::<Vec<_>>().join(", ")
}

pub fn expr(e: &Expr) -> String {
    expr_prec(e, 0)
}

fn wrap(s: String, own: u8, ctx: u8) -> String {
    if own < ctx {
        format!("({s})")
    } else {
        s
    }
}

pub fn expr_prec(e: &Expr, ctx: u8) -> String {
    match &e.kind {
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Num(n) => n.to_string(),
        ExprKind::Var(v) | ExprKind::Ctor(v) => v.clone(),
        ExprKind::TypeLit(t) => type_ref(t),
        ExprKind::SymApp(s, args) => format!("{}({})", s, list(args)),
        ExprKind::Intension(s) => format!("`{s}"),
        ExprKind::ValueApp(f, args) => format!("$({})({})", expr_prec(f, 0), list(args)),
        ExprKind::Introspect(q, e) => match q {
            Query::Arity => format!("arity({})", expr_prec(e, 0)),
            Query::Output => format!("output({})", expr_prec(e, 0)),
            Query::Input(i) => format!("input({}, {})", expr_prec(e, 0), i),
        },
        ExprKind::Not(inner) => wrap(format!("~{}", expr_prec(inner, NOT_PREC)), NOT_PREC, ctx),
        ExprKind::Neg(inner) => {
            let body = match inner.kind {
                ExprKind::Num(_) => format!("({})", expr_prec(inner, 0)),
                _ => expr_prec(inner, NEG_PREC),
            };
            wrap(format!("-{body}"), NEG_PREC, ctx)
        }
        ExprKind::Binary(op, l, r) => {
            let p = binop_prec(*op);
            let (lp, rp) = match op {
                BinOp::Implies => (p + 1, p),
                _ if op.is_comparison() => (p + 1, p + 1),
                _ => (p, p + 1),
            };
            wrap(format!("{} {} {}", expr_prec(l, lp), op.symbol(), expr_prec(r, rp)), p, ctx)
        }
        ExprKind::Quant(k, b, body) => {
            let q = if *k == QuantKind::Forall { "!" } else { "?" };
            wrap(format!("{}{}: {}", q, binder(b), expr_prec(body, 0)), OPEN_PREC, ctx)
        }
        ExprKind::Count(bs, cond) => {
            let bs = bs.iter().map(binder).collect::<Vec<_>>().join(", ");
            format!("#{{{}: {}}}", bs, expr_prec(cond, 0))
        }
        ExprKind::Sum(b, t) => format!("sum(lambda {}: {})", binder(b), expr_prec(t, 0)),
        ExprKind::IfGuard { var, sig, then, els } => wrap(
            format!("if {}::[{}] then {} else {}", var, sig_ref(sig), expr_prec(then, 0), expr_prec(els, 0)),
            OPEN_PREC,
            ctx,
        ),
    }
}

pub fn literal(l: &Literal) -> String {
    match l {
        Literal::Ident(s) => s.clone(),
        Literal::Int(n) => n.to_string(),
        Literal::Bool(b) => b.to_string(),
        Literal::Concept(s) => format!("`{s}"),
    }
}

fn tuple(t: &[Literal]) -> String {
    if t.len() == 1 {
        literal(&t[0])
    } else {
        format!("({})", t.iter().map(literal).collect::<Vec<_>>().join(", "))
    }
}

pub fn table(t: &TableLit) -> String {
    match t {
        TableLit::Set(rows) => format!("{{{}}}", rows.iter().map(|r| tuple(r)).collect::<Vec<_>>().join(", ")),
        TableLit::Map(rows) => format!(
            "{{{}}}",
            rows.iter().map(|(k, v)| format!("{} -> {}", tuple(k), literal(v))).collect::<Vec<_>>().join(", ")
        ),
        TableLit::Value(v) => literal(v),
        TableLit::Range(lo, hi) => format!("{{{lo}..{hi}}}"),
        TableLit::Unknown => "<unknown>".to_string(),
    }
}

pub fn assignment(a: &Assignment) -> String {
    let mut s = format!("{} := {}", a.name, table(&a.table));
    if let Some(d) = &a.default {
        let _ = write!(s, " else {}", literal(d));
    }
    s.push('.');
    s
}

pub fn rule(r: &Rule) -> String {
    let mut s = String::new();
    for b in &r.binders {
        let _ = write!(s, "!{}: ", binder(b));
    }
    let _ = write!(s, "{}({})", r.head, r.args.join(", "));
    if let Some(v) = &r.value {
        let _ = write!(s, " = {}", expr_prec(v, 7));
    }
    let _ = write!(s, " <- {}.", expr(&r.body));
    s
}

pub fn vocabulary(v: &Vocabulary) -> String {
    let mut s = format!("vocabulary {} {{\n", v.name);
    for t in v.types().iter().filter(|t| !t.builtin && !t.anonymous) {
        let interp = match &t.interp {
            TypeInterp::Open => String::new(),
            TypeInterp::Int => " := Int".to_string(),
            TypeInterp::IntRange { lo, hi } => format!(" := {{{lo}..{hi}}}"),
            TypeInterp::Enum(names) => format!(" := {{{}}}", names.join(", ")),
            // Only anonymous or builtin types carry these.
            TypeInterp::Bool | TypeInterp::Concept | TypeInterp::ConceptSubtype(_) => String::new(),
        };
        let _ = writeln!(s, "{INDENT}type {}{}", t.name, interp);
    }
    for sym in v.symbols() {
        let _ = writeln!(s, "{INDENT}{}: {}", sym.name, sig_ref(&v.sig_ref(&sym.sig)));
    }
    s.push_str("}\n");
    s
}

pub fn theory(t: &Theory) -> String {
    let mut s = format!("theory {} : {} {{\n", t.name, t.vocabulary);
    for a in &t.assignments {
        let _ = writeln!(s, "{INDENT}{}", assignment(a));
    }
    for d in &t.definitions {
        let _ = writeln!(s, "{INDENT}{{");
        for r in &d.rules {
            let _ = writeln!(s, "{INDENT}{INDENT}{}", rule(r));
        }
        let _ = writeln!(s, "{INDENT}}}");
    }
    for a in &t.axioms {
        let _ = writeln!(s, "{INDENT}{}.", expr(a));
    }
    s.push_str("}\n");
    s
}

pub fn structure_decl(st: &StructureDecl) -> String {
    let mut s = format!("structure {} : {} {{\n", st.name, st.vocabulary);
    for a in &st.assignments {
        let _ = writeln!(s, "{INDENT}{}", assignment(a));
    }
    s.push_str("}\n");
    s
}

pub fn source_file(f: &SourceFile) -> String {
    f.blocks
        .iter()
        .map(|b| match b {
            Block::Vocabulary(v) => vocabulary(v),
            Block::Theory(t) => theory(t),
            Block::Structure(s) => structure_decl(s),
        })
        .collect::<Vec<_>>()
        .join("\n")
}
