//! Three-valued evaluation of ground constraints under a partial cell assignment.
//!
//! `Some(false)` is only returned when every completion falsifies the formula,
//! which is what propagation relies on. Under a full assignment the result is
//! exact. An undefined term makes the comparison reading it false.

use super::{CellId, Grounding, Rel, GF, GTerm};
use crate::structures::Elem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermValue {
    Known(Elem),
    /// An integer within the closed interval.
    Range(i128, i128),
    Unknown,
    Undefined,
}

impl TermValue {
    fn interval(self) -> Option<(i128, i128)> {
        match self {
            TermValue::Known(Elem::Int(n)) => Some((n as i128, n as i128)),
            TermValue::Range(lo, hi) => Some((lo, hi)),
            _ => None,
        }
    }

    fn from_interval(lo: i128, hi: i128) -> TermValue {
        if lo == hi {
            match i64::try_from(lo) {
                Ok(n) => TermValue::Known(Elem::Int(n)),
                Err(_) => TermValue::Undefined,
            }
        } else {
            TermValue::Range(lo, hi)
        }
    }
}

impl Grounding {
    pub fn eval_formula(&self, vals: &[Option<Elem>], f: &GF) -> Option<bool> {
        match f {
            GF::Const(b) => Some(*b),
            GF::Atom(c, v) => match vals[*c] {
                Some(x) => Some(x == *v),
                None => self.cannot_hold(*c, *v).then_some(false),
            },
            GF::Not(f) => self.eval_formula(vals, f).map(|b| !b),
            GF::And(fs) => {
                let mut open = false;
                for f in fs {
                    match self.eval_formula(vals, f) {
                        Some(false) => return Some(false),
                        None => open = true,
                        Some(true) => {}
                    }
                }
                (!open).then_some(true)
            }
            GF::Or(fs) => {
                let mut open = false;
                for f in fs {
                    match self.eval_formula(vals, f) {
                        Some(true) => return Some(true),
                        None => open = true,
                        Some(false) => {}
                    }
                }
                (!open).then_some(false)
            }
            GF::Iff(a, b) => Some(self.eval_formula(vals, a)? == self.eval_formula(vals, b)?),
            GF::Cmp(rel, a, b) => {
                let x = self.eval_term(vals, a);
                let y = self.eval_term(vals, b);
                compare(*rel, x, y)
            }
        }
    }

    fn cannot_hold(&self, c: CellId, v: Elem) -> bool {
        match self.domain(c) {
            Some(dom) => !dom.contains(&v),
            None => !matches!(v, Elem::Int(_)),
        }
    }

    pub fn eval_term(&self, vals: &[Option<Elem>], t: &GTerm) -> TermValue {
        match t {
            GTerm::Const(e) => TermValue::Known(*e),
            GTerm::Cell(c) => match vals[*c] {
                Some(e) => TermValue::Known(e),
                None => match self.bounds(*c) {
                    Some((lo, hi)) => TermValue::from_interval(lo as i128, hi as i128),
                    None => TermValue::Unknown,
                },
            },
            GTerm::Choice(bs) => {
                let mut acc: Option<TermValue> = None;
                for (g, t) in bs {
                    let v = match self.eval_formula(vals, g) {
                        Some(false) => continue,
                        Some(true) => return self.eval_term(vals, t),
                        None => self.eval_term(vals, t),
                    };
                    acc = Some(match (acc, v) {
                        (_, TermValue::Undefined | TermValue::Unknown) => return TermValue::Unknown,
                        (None, v) => v,
                        (Some(a), v) if a == v => a,
                        (Some(a), v) => match (a.interval(), v.interval()) {
                            (Some((l1, h1)), Some((l2, h2))) => TermValue::Range(l1.min(l2), h1.max(h2)),
                            _ => TermValue::Unknown,
                        },
                    });
                }
                match acc {
                    Some(v) => v,
                    // Every guard is false.
                    None if bs.iter().all(|(g, _)| self.eval_formula(vals, g) == Some(false)) => TermValue::Undefined,
                    None => TermValue::Unknown,
                }
            }
            GTerm::Count(fs) => {
                let (mut lo, mut hi) = (0i128, 0i128);
                for f in fs {
                    match self.eval_formula(vals, f) {
                        Some(true) => {
                            lo += 1;
                            hi += 1;
                        }
                        None => hi += 1,
                        Some(false) => {}
                    }
                }
                TermValue::from_interval(lo, hi)
            }
            GTerm::Add(ts) => {
                let (mut lo, mut hi) = (0i128, 0i128);
                let mut unknown = false;
                for t in ts {
                    match self.eval_term(vals, t) {
                        TermValue::Undefined => return TermValue::Undefined,
                        v => match v.interval() {
                            Some((l, h)) => {
                                lo += l;
                                hi += h;
                            }
                            None => unknown = true,
                        },
                    }
                }
                if unknown {
                    TermValue::Unknown
                } else {
                    TermValue::from_interval(lo, hi)
                }
            }
            GTerm::Mul(a, b) => {
                let x = self.eval_term(vals, a);
                let y = self.eval_term(vals, b);
                if x == TermValue::Undefined || y == TermValue::Undefined {
                    return TermValue::Undefined;
                }
                match (x.interval(), y.interval()) {
                    (Some((l1, h1)), Some((l2, h2))) => {
                        let products = [l1 * l2, l1 * h2, h1 * l2, h1 * h2];
                        let lo = products.iter().copied().min().expect("four products");
                        let hi = products.iter().copied().max().expect("four products");
                        TermValue::from_interval(lo, hi)
                    }
                    _ => TermValue::Unknown,
                }
            }
            GTerm::Neg(t) => match self.eval_term(vals, t) {
                TermValue::Undefined => TermValue::Undefined,
                v => match v.interval() {
                    Some((lo, hi)) => TermValue::from_interval(-hi, -lo),
                    None => TermValue::Unknown,
                },
            },
        }
    }
}

fn compare(rel: Rel, x: TermValue, y: TermValue) -> Option<bool> {
    if x == TermValue::Undefined || y == TermValue::Undefined {
        return Some(false);
    }
    if rel == Rel::Eq {
        if let (TermValue::Known(a), TermValue::Known(b)) = (x, y) {
            return Some(a == b);
        }
    }
    let ((l1, h1), (l2, h2)) = (x.interval()?, y.interval()?);
    match rel {
        Rel::Eq if h1 < l2 || h2 < l1 => Some(false),
        Rel::Eq if l1 == h1 && l2 == h2 => Some(l1 == l2),
        Rel::Lt if h1 < l2 => Some(true),
        Rel::Lt if l1 >= h2 => Some(false),
        Rel::Leq if h1 <= l2 => Some(true),
        Rel::Leq if l1 > h2 => Some(false),
        _ => None,
    }
}
