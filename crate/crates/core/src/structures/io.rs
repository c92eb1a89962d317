//! Conversion between enumerated assignments and dense tables.

use std::collections::HashMap;
use std::fmt::Write;
use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{Elem, Structure, Table, Universe};
use crate::kernel::{Assignment, Diagnostic, Literal, SymbolId, TableLit, TypeId, TypeInterp, Vocabulary};
use crate::parser::{pretty, SourceFile};

fn err(a: &Assignment, code: &'static str, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(code, a.span, msg)
}

fn literal_elem(voc: &Vocabulary, u: &Universe, ty: TypeId, lit: &Literal) -> Result<Elem, String> {
    let decl = voc.ty(ty);
    let e = match (lit, &decl.interp) {
        (Literal::Bool(b), TypeInterp::Bool) => Elem::Bool(*b),
        (Literal::Int(n), TypeInterp::Int | TypeInterp::IntRange { .. }) => Elem::Int(*n),
        (Literal::Ident(s), TypeInterp::Enum(names)) => match names.iter().position(|n| n == s) {
            Some(idx) => Elem::Named { ty, idx: idx as u32 },
            None => return Err(format!("`{s}` is not an element of `{}`", decl.name)),
        },
        (Literal::Ident(s), TypeInterp::Open) => match u.open_names(ty).iter().position(|n| n == s) {
            Some(idx) => Elem::Named { ty, idx: idx as u32 },
            None => return Err(format!("`{s}` is not an element of `{}`", decl.name)),
        },
        (Literal::Concept(s), TypeInterp::Concept | TypeInterp::ConceptSubtype(_)) => match voc.symbol_id(s) {
            Some(id) => Elem::Concept(id),
            None => return Err(format!("unknown symbol `{s}`")),
        },
        _ => return Err(format!("`{}` is not a value of type `{}`", pretty::literal(lit), decl.name)),
    };
    if !u.contains(ty, e) {
        return Err(format!("`{}` is outside the domain of `{}`", pretty::literal(lit), decl.name));
    }
    Ok(e)
}

fn tuple_elems(voc: &Vocabulary, u: &Universe, sym: SymbolId, row: &[Literal]) -> Result<Vec<Elem>, String> {
    let sig = &voc.symbol(sym).sig;
    if row.len() != sig.arity() {
        return Err(format!("tuple of length {} for `{}` of arity {}", row.len(), voc.symbol(sym).name, sig.arity()));
    }
    row.iter().zip(&sig.args).map(|(l, &t)| literal_elem(voc, u, t, l)).collect()
}

/// Table for one symbol assignment; `Ok(None)` for `<unknown>`.
fn table_for(s: &Structure, sym: SymbolId, a: &Assignment) -> Result<Option<Table>, Diagnostic> {
    let voc = s.vocabulary();
    let u = s.universe();
    let sig = &voc.symbol(sym).sig;
    let len = u.shape(sym).len;
    let e = |m: String| err(a, "TypeMismatch", m);
    let rows: Vec<(Vec<Literal>, Literal)> = match &a.table {
        TableLit::Unknown => return Ok(None),
        TableLit::Value(v) if sig.arity() == 0 => vec![(vec![], v.clone())],
        TableLit::Value(_) => return Err(e(format!("`{}` takes arguments; give a set or map", a.name))),
        TableLit::Range(lo, hi) if sig.is_predicate() => {
            (*lo..=*hi).map(|n| (vec![Literal::Int(n)], Literal::Bool(true))).collect()
        }
        TableLit::Range(..) => return Err(e(format!("a range cannot interpret function `{}`", a.name))),
        TableLit::Set(rows) if sig.is_predicate() => {
            if a.default.is_some() {
                return Err(e(format!("set form for `{}` takes no `else` value", a.name)));
            }
            rows.iter().map(|r| (r.clone(), Literal::Bool(true))).collect()
        }
        TableLit::Set(rows) if rows.is_empty() => vec![],
        TableLit::Set(_) => return Err(e(format!("function `{}` needs a map `{{args -> value}}`", a.name))),
        TableLit::Map(rows) => rows.clone(),
    };
    let default = match (&a.default, sig.is_predicate(), &a.table) {
        (Some(d), _, _) => Some(literal_elem(voc, u, sig.out, d).map_err(e)?),
        (None, true, TableLit::Set(_) | TableLit::Range(..)) => Some(Elem::Bool(false)),
        _ => None,
    };
    let mut values: Vec<Option<Elem>> = vec![None; len];
    for (args, v) in &rows {
        let tuple = tuple_elems(voc, u, sym, args).map_err(e)?;
        let idx = s.tuple_index(sym, &tuple).expect("tuple elements were checked");
        let v = literal_elem(voc, u, sig.out, v).map_err(e)?;
        match values[idx] {
            Some(old) if old != v => {
                let shown: Vec<_> = args.iter().map(pretty::literal).collect();
                return Err(err(a, "ConflictError", format!("`{}({})` is given two values", a.name, shown.join(", "))));
            }
            _ => values[idx] = Some(v),
        }
    }
    let mut out = Vec::with_capacity(len);
    for (i, v) in values.into_iter().enumerate() {
        match v.or(default) {
            Some(v) => out.push(v),
            None => {
                let t: Vec<_> = s.tuple_at(sym, i).into_iter().map(|e| s.show(e)).collect();
                return Err(err(
                    a,
                    "TotalityError",
                    format!("`{}` has no value for ({}) and no `else` default", a.name, t.join(", ")),
                ));
            }
        }
    }
    Ok(Some(Table { values: out }))
}

/// Builds a structure from assignments, which may come from several blocks
/// (a structure plus theory-level `:=`). Conflicting tables are an error.
pub fn build_structure(voc: Arc<Vocabulary>, assignments: &[&Assignment]) -> Result<Structure, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut open: Vec<(TypeId, Vec<String>)> = Vec::new();
    for a in assignments.iter().filter(|a| voc.symbol_id(&a.name).is_none()) {
        let Some(ty) = voc.type_id(&a.name) else {
            diags.push(err(a, "UnknownSymbol", format!("unknown symbol `{}`", a.name)));
            continue;
        };
        if voc.ty(ty).interp != TypeInterp::Open {
            diags.push(err(a, "TypeMismatch", format!("type `{}` is fixed by its vocabulary", a.name)));
            continue;
        }
        let names: Option<Vec<String>> = match &a.table {
            TableLit::Set(rows) => rows
                .iter()
                .map(|r| match &r[..] {
                    [Literal::Ident(s)] if voc.constructor(s).is_none() && voc.symbol_id(s).is_none() => Some(s.clone()),
                    _ => None,
                })
                .collect(),
            _ => None,
        };
        let Some(names) = names else {
            diags.push(err(a, "TypeMismatch", format!("`{}` needs a set of fresh element names", a.name)));
            continue;
        };
        if names.is_empty() {
            diags.push(err(a, "EmptyType", format!("type `{}` has an empty domain", a.name)));
            continue;
        }
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != names.len() {
            diags.push(err(a, "DuplicateConstructor", format!("repeated element in `{}`", a.name)));
            continue;
        }
        match open.iter().find(|(t, _)| *t == ty) {
            Some((_, old)) if *old != names => {
                diags.push(err(a, "ConflictError", format!("type `{}` is given two domains", a.name)));
            }
            Some(_) => {}
            None => open.push((ty, names)),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let span = assignments.first().map(|a| a.span).unwrap_or_default();
    let universe = Universe::build(&voc, &open).map_err(|e| vec![Diagnostic::error(e.code(), span, e.to_string())])?;
    let mut s = Structure::new(voc.clone(), Arc::new(universe));
    let mut seen: HashMap<SymbolId, &Assignment> = HashMap::new();
    for a in assignments {
        let Some(sym) = voc.symbol_id(&a.name) else { continue };
        let table = match table_for(&s, sym, a) {
            Ok(t) => t,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        if let Some(prev) = seen.get(&sym) {
            if table_for(&s, sym, prev).ok().flatten() != table {
                diags.push(err(a, "ConflictError", format!("`{}` is assigned two different tables", a.name)));
            }
            continue;
        }
        seen.insert(sym, a);
        if let Some(t) = table {
            s.set_table(sym, t).map_err(|m| vec![err(a, "TypeMismatch", m)])?;
        }
    }
    if diags.is_empty() {
        Ok(s)
    } else {
        Err(diags)
    }
}

/// Layers symbol assignments (typically a theory's `:=` facts) over `base`.
/// Type domains are fixed by `base`; a symbol already interpreted differently is a conflict.
pub fn extend_structure(base: &Structure, assignments: &[&Assignment]) -> Result<Structure, Vec<Diagnostic>> {
    let voc = base.vocabulary();
    let mut s = base.clone();
    let mut diags = Vec::new();
    for a in assignments {
        let Some(sym) = voc.symbol_id(&a.name) else {
            let d = match voc.type_id(&a.name) {
                Some(_) => err(a, "ConflictError", format!("the domain of `{}` is fixed by the structure", a.name)),
                None => err(a, "UnknownSymbol", format!("unknown symbol `{}`", a.name)),
            };
            diags.push(d);
            continue;
        };
        let table = match table_for(&s, sym, a) {
            Ok(Some(t)) => t,
            Ok(None) => continue,
            Err(d) => {
                diags.push(d);
                continue;
            }
        };
        match s.table(sym) {
            Some(old) if *old != table => {
                diags.push(err(a, "ConflictError", format!("`{}` is assigned two different tables", a.name)));
            }
            Some(_) => {}
            None => {
                if let Err(m) = s.set_table(sym, table) {
                    diags.push(err(a, "TypeMismatch", m));
                }
            }
        }
    }
    if diags.is_empty() {
        Ok(s)
    } else {
        Err(diags)
    }
}

/// Loads a structure block (the first one when `name` is `None`) over its vocabulary.
pub fn load_structure(file: &SourceFile, name: Option<&str>) -> Result<Structure, Vec<Diagnostic>> {
    let decl = match name {
        Some(n) => file.structures().find(|s| s.name == n),
        None => file.structures().next(),
    };
    let Some(decl) = decl else {
        let msg = format!("no structure {}", name.map(|n| format!("`{n}`")).unwrap_or_default());
        return Err(vec![Diagnostic::error("UnknownStructure", Default::default(), msg.trim_end())]);
    };
    let Some(voc) = file.vocabulary(&decl.vocabulary) else {
        let msg = format!("unknown vocabulary `{}`", decl.vocabulary);
        return Err(vec![Diagnostic::error("UnknownVocabulary", decl.span, msg)]);
    };
    let refs: Vec<&Assignment> = decl.assignments.iter().collect();
    let mut s = build_structure(Arc::new(voc.clone()), &refs)?;
    s.name = decl.name.clone();
    Ok(s)
}

fn join(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().collect::<Vec<_>>().join(", ")
}

fn show_tuple(s: &Structure, t: &[Elem]) -> String {
    if t.len() == 1 {
        s.show(t[0])
    } else {
        format!("({})", join(t.iter().map(|&e| s.show(e))))
    }
}

/// Canonical text form: open type domains, then one assignment per symbol in
/// declaration order. Predicates use sets; functions use maps whose `else`
/// value is the most frequent output.
pub fn save_structure(s: &Structure) -> String {
    let voc = s.vocabulary();
    let mut out = format!("structure {} : {} {{\n", s.name, voc.name);
    for (i, t) in voc.types().iter().enumerate() {
        let names = s.universe().open_names(TypeId(i as u32));
        if t.interp == TypeInterp::Open && !names.is_empty() {
            let _ = writeln!(out, "    {} := {{{}}}.", t.name, names.join(", "));
        }
    }
    for sym in voc.symbol_ids() {
        let decl = voc.symbol(sym);
        let _ = write!(out, "    {} := ", decl.name);
        match s.table(sym) {
            None => out.push_str("<unknown>"),
            Some(t) if decl.sig.arity() == 0 => out.push_str(&s.show(t.values[0])),
            Some(t) if decl.sig.is_predicate() => {
                let rows = (0..t.values.len())
                    .filter(|&i| t.values[i] == Elem::Bool(true))
                    .map(|i| show_tuple(s, &s.tuple_at(sym, i)));
                let _ = write!(out, "{{{}}}", join(rows));
            }
            Some(t) => {
                let dom = s.domain(decl.sig.out).map(|d| d.to_vec()).unwrap_or_default();
                let mut counts: Vec<(Elem, usize)> = Vec::new();
                for &v in &t.values {
                    match counts.iter_mut().find(|(e, _)| *e == v) {
                        Some((_, c)) => *c += 1,
                        None => counts.push((v, 1)),
                    }
                }
                // Most frequent, ties broken by domain order then first occurrence.
                let rank = |e: &Elem| dom.iter().position(|d| d == e).unwrap_or(usize::MAX);
                let default = counts
                    .iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then_with(|| rank(&b.0).cmp(&rank(&a.0))))
                    .map(|(e, _)| *e)
                    .expect("tables of functions are non-empty");
                let rows = (0..t.values.len())
                    .filter(|&i| t.values[i] != default)
                    .map(|i| format!("{} -> {}", show_tuple(s, &s.tuple_at(sym, i)), s.show(t.values[i])));
                let _ = write!(out, "{{{}}} else {}", join(rows), s.show(default));
            }
        }
        out.push_str(".\n");
    }
    out.push_str("}\n");
    out
}

pub fn structure_to_json(s: &Structure) -> Value {
    let voc = s.vocabulary();
    let mut types = Map::new();
    for (i, t) in voc.types().iter().enumerate() {
        let names = s.universe().open_names(TypeId(i as u32));
        if t.interp == TypeInterp::Open && !names.is_empty() {
            types.insert(t.name.clone(), json!(names));
        }
    }
    let mut symbols = Map::new();
    for sym in voc.symbol_ids() {
        let decl = voc.symbol(sym);
        let v = match s.table(sym) {
            None => Value::Null,
            Some(t) if decl.sig.is_predicate() => Value::Array(
                (0..t.values.len())
                    .filter(|&i| t.values[i] == Elem::Bool(true))
                    .map(|i| json!(s.tuple_at(sym, i).into_iter().map(|e| s.show(e)).collect::<Vec<_>>()))
                    .collect(),
            ),
            Some(t) => Value::Array(
                (0..t.values.len())
                    .map(|i| {
                        let mut row: Vec<String> = s.tuple_at(sym, i).into_iter().map(|e| s.show(e)).collect();
                        row.push(s.show(t.values[i]));
                        json!(row)
                    })
                    .collect(),
            ),
        };
        symbols.insert(decl.name.clone(), v);
    }
    json!({ "name": s.name, "vocabulary": voc.name, "types": types, "symbols": symbols })
}
