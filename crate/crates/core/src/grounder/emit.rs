//! Text forms of a grounding: the stable listing and a debug SMT-LIB script.

use std::fmt::Write;

use super::{Grounding, Rel, GF, GTerm};
use crate::structures::Elem;

fn rel_symbol(rel: Rel) -> &'static str {
    match rel {
        Rel::Eq => "=",
        Rel::Lt => "<",
        Rel::Leq => "=<",
    }
}

fn wrap(g: &Grounding, f: &GF, parent_binds_tighter: bool) -> String {
    let s = show_formula(g, f);
    let compound = matches!(f, GF::And(_) | GF::Or(_) | GF::Iff(..));
    if compound && parent_binds_tighter {
        format!("({s})")
    } else {
        s
    }
}

pub fn show_formula(g: &Grounding, f: &GF) -> String {
    match f {
        GF::Const(b) => b.to_string(),
        GF::Atom(c, Elem::Bool(true)) => g.show_cell(*c),
        GF::Atom(c, v) => format!("{} = {}", g.show_cell(*c), g.base.show(*v)),
        GF::Not(inner) => match &**inner {
            GF::Atom(_, Elem::Bool(true)) | GF::Const(_) => format!("~{}", show_formula(g, inner)),
            _ => format!("~({})", show_formula(g, inner)),
        },
        GF::And(fs) => fs.iter().map(|f| wrap(g, f, !matches!(f, GF::And(_)))).collect::<Vec<_>>().join(" & "),
        GF::Or(fs) => fs.iter().map(|f| wrap(g, f, !matches!(f, GF::Or(_)))).collect::<Vec<_>>().join(" | "),
        GF::Iff(a, b) => format!("{} <=> {}", wrap(g, a, true), wrap(g, b, true)),
        GF::Cmp(rel, a, b) => format!("{} {} {}", show_term(g, a), rel_symbol(*rel), show_term(g, b)),
    }
}

pub fn show_term(g: &Grounding, t: &GTerm) -> String {
    let inner = |t: &GTerm| match t {
        GTerm::Add(_) | GTerm::Mul(..) => format!("({})", show_term(g, t)),
        _ => show_term(g, t),
    };
    match t {
        GTerm::Const(e) => g.base.show(*e),
        GTerm::Cell(c) => g.show_cell(*c),
        GTerm::Choice(bs) => {
            let parts: Vec<String> =
                bs.iter().map(|(c, t)| format!("{} -> {}", show_formula(g, c), show_term(g, t))).collect();
            format!("case{{{}}}", parts.join("; "))
        }
        GTerm::Count(fs) => format!("count({})", fs.iter().map(|f| show_formula(g, f)).collect::<Vec<_>>().join(", ")),
        GTerm::Add(ts) => ts.iter().map(|t| show_term(g, t)).collect::<Vec<_>>().join(" + "),
        GTerm::Mul(a, b) => format!("{} * {}", inner(a), inner(b)),
        GTerm::Neg(t) => format!("-{}", inner(t)),
    }
}

/// One constraint per line, in grounding order.
pub fn render(g: &Grounding) -> String {
    let mut out = String::new();
    for c in &g.constraints {
        let _ = writeln!(out, "{}.", show_formula(g, &c.formula));
    }
    out
}

/// Integer code of a non-numeric element; equal elements of one type share a code.
fn code(e: Elem) -> i64 {
    match e {
        Elem::Bool(b) => b as i64,
        Elem::Int(n) => n,
        Elem::Named { idx, .. } => idx as i64,
        Elem::Concept(s) => s.index() as i64,
        Elem::Type(t) => t.index() as i64,
    }
}

fn smt_int(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

fn smt_name(g: &Grounding, c: usize) -> String {
    format!("|{}|", g.show_cell(c))
}

fn smt_formula(g: &Grounding, f: &GF) -> String {
    let list = |op: &str, fs: &[GF]| format!("({op} {})", fs.iter().map(|f| smt_formula(g, f)).collect::<Vec<_>>().join(" "));
    match f {
        GF::Const(b) => b.to_string(),
        GF::Atom(c, Elem::Bool(true)) => smt_name(g, *c),
        GF::Atom(c, v) => format!("(= {} {})", smt_name(g, *c), smt_int(code(*v))),
        GF::Not(inner) => format!("(not {})", smt_formula(g, inner)),
        GF::And(fs) => list("and", fs),
        GF::Or(fs) => list("or", fs),
        GF::Iff(a, b) => format!("(= {} {})", smt_formula(g, a), smt_formula(g, b)),
        GF::Cmp(rel, a, b) => {
            let op = match rel {
                Rel::Eq => "=",
                Rel::Lt => "<",
                Rel::Leq => "<=",
            };
            format!("({op} {} {})", smt_term(g, a), smt_term(g, b))
        }
    }
}

fn smt_term(g: &Grounding, t: &GTerm) -> String {
    match t {
        GTerm::Const(Elem::Bool(b)) => b.to_string(),
        GTerm::Const(e) => smt_int(code(*e)),
        GTerm::Cell(c) => smt_name(g, *c),
        GTerm::Choice(bs) => match bs.split_last() {
            // An undefined term has no SMT counterpart; 0 stands in.
            None => "0".to_string(),
            Some(((_, last), rest)) => rest.iter().rev().fold(smt_term(g, last), |acc, (c, t)| {
                format!("(ite {} {} {acc})", smt_formula(g, c), smt_term(g, t))
            }),
        },
        GTerm::Count(fs) if fs.is_empty() => "0".to_string(),
        GTerm::Count(fs) => {
            let parts: Vec<String> = fs.iter().map(|f| format!("(ite {} 1 0)", smt_formula(g, f))).collect();
            format!("(+ {})", parts.join(" "))
        }
        GTerm::Add(ts) => format!("(+ {})", ts.iter().map(|t| smt_term(g, t)).collect::<Vec<_>>().join(" ")),
        GTerm::Mul(a, b) => format!("(* {} {})", smt_term(g, a), smt_term(g, b)),
        GTerm::Neg(t) => format!("(- {})", smt_term(g, t)),
    }
}

/// SMT-LIB rendering for inspection with an external solver. Non-numeric
/// values are encoded as integers; a comment lists the codes of each cell.
pub fn smt2(g: &Grounding) -> String {
    let mut out = String::from("(set-logic QF_LIA)\n");
    for c in 0..g.cells.len() {
        let name = smt_name(g, c);
        if g.out_type(c) == crate::kernel::TypeId::BOOL {
            let _ = writeln!(out, "(declare-const {name} Bool)");
            continue;
        }
        let _ = writeln!(out, "(declare-const {name} Int)");
        match g.domain(c) {
            Some(dom) if matches!(dom.first(), Some(Elem::Int(_))) => {
                let (lo, hi) = g.bounds(c).expect("integer domain");
                let _ = writeln!(out, "(assert (and (<= {} {name}) (<= {name} {})))", smt_int(lo), smt_int(hi));
            }
            Some(dom) => {
                let legend: Vec<String> = dom.iter().map(|&e| format!("{}={}", g.base.show(e), code(e))).collect();
                let _ = writeln!(out, "; {}", legend.join(" "));
                let options: Vec<String> = dom.iter().map(|&e| format!("(= {name} {})", code(e))).collect();
                let _ = writeln!(out, "(assert (or {}))", options.join(" "));
            }
            None => {}
        }
    }
    for con in &g.constraints {
        let _ = writeln!(out, "(assert {})", smt_formula(g, &con.formula));
    }
    out.push_str("(check-sat)\n");
    out
}
