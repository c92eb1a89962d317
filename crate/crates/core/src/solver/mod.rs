//! Model expansion by depth-first search over ground cells.
//!
//! Decision cells are tried in declaration order, values in domain order, so
//! models come out in the same order as [`Structure::expansions`]. Each
//! constraint is re-examined when one of its cells changes: a value that makes
//! it false in every completion is ruled out, and a cell with one value left is
//! assigned. Defined symbols are computed at the leaves and must match.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::evaluator::{dependency_strata, eval_sentence, with_definitions, EvalError};
use crate::grounder::{self, CellId, GroundError, Grounding, TermValue};
use crate::kernel::Theory;
use crate::parser::pretty;
use crate::structures::{extend_structure, Elem, Structure, DEFAULT_EXPANSION_CAP};

/// Constraints with more open cells than this are only evaluated, not probed.
const PROBE_LIMIT: usize = 16;

#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// Stop after this many models; 0 asks for all of them.
    pub max_models: usize,
    /// Bound on grounding instantiations and on search decisions.
    pub expansion_cap: u128,
    pub time_limit: Option<Duration>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { max_models: 1, expansion_cap: DEFAULT_EXPANSION_CAP, time_limit: None }
    }
}

impl SolveConfig {
    pub fn all() -> Self {
        SolveConfig { max_models: 0, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Capped,
    Timeout,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Capped => "CAPPED",
            Status::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Statistics {
    pub decisions: u64,
    pub propagations: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: Status,
    pub models: Vec<Structure>,
    pub stats: Statistics,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Definitions(#[from] EvalError),
    #[error("the candidate structure leaves `{0}` uninterpreted")]
    NotTotal(String),
}

impl SolveError {
    pub fn code(&self) -> &'static str {
        match self {
            SolveError::Ground(e) => e.code(),
            SolveError::Definitions(e) => e.code(),
            SolveError::NotTotal(_) => "NotTotal",
        }
    }
}

/// Grounds, simplifies and solves.
pub fn model_expand(theory: &Theory, partial: &Structure, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    let g = grounder::ground_with_cap(theory, partial, cfg.expansion_cap)?;
    solve(&grounder::simplify(&g), theory, cfg)
}

/// Searches the models of a grounding of `theory`.
pub fn solve(g: &Grounding, theory: &Theory, cfg: &SolveConfig) -> Result<SolveResult, SolveError> {
    dependency_strata(g.base.vocabulary(), &theory.definitions)?;
    let start = Instant::now();
    let mut occurs = vec![Vec::new(); g.cells.len()];
    let mut open_cells = Vec::with_capacity(g.constraints.len());
    for (i, c) in g.constraints.iter().enumerate() {
        let cells = c.formula.cell_set();
        for &cell in &cells {
            occurs[cell].push(i);
        }
        open_cells.push(cells.into_iter().filter(|&c| g.is_decision(c)).collect());
    }
    let mut search = Search {
        g,
        theory,
        cfg,
        occurs,
        open_cells,
        start,
        models: Vec::new(),
        stats: Statistics::default(),
        stop: None,
    };
    let inconsistent = g.constraints.iter().any(|c| c.formula == grounder::GF::Const(false));
    if !inconsistent {
        let vals = vec![None; g.cells.len()];
        let all: Vec<usize> = (0..g.constraints.len()).collect();
        search.node(vals, all);
    }
    let status = match search.stop {
        Some(s) => s,
        None if search.models.is_empty() => Status::Unsat,
        None => Status::Sat,
    };
    let mut stats = search.stats;
    stats.elapsed = start.elapsed();
    Ok(SolveResult { status, models: search.models, stats })
}

struct Search<'a> {
    g: &'a Grounding,
    theory: &'a Theory,
    cfg: &'a SolveConfig,
    occurs: Vec<Vec<usize>>,
    open_cells: Vec<Vec<CellId>>,
    start: Instant,
    models: Vec<Structure>,
    stats: Statistics,
    /// Set once the search must end early.
    stop: Option<Status>,
}

impl Search<'_> {
    fn node(&mut self, mut vals: Vec<Option<Elem>>, queue: Vec<usize>) {
        if !self.propagate(&mut vals, queue) {
            return;
        }
        let Some(c) = (0..vals.len()).find(|&c| vals[c].is_none() && self.g.is_decision(c)) else {
            self.leaf(vals);
            return;
        };
        let dom = self.g.domain(c).expect("decision cells have finite domains");
        for &v in dom {
            if self.stop.is_some() {
                return;
            }
            self.stats.decisions += 1;
            if self.stats.decisions as u128 > self.cfg.expansion_cap {
                self.stop = Some(Status::Capped);
                return;
            }
            if self.cfg.time_limit.is_some_and(|t| self.start.elapsed() > t) {
                self.stop = Some(Status::Timeout);
                return;
            }
            let mut next = vals.clone();
            next[c] = Some(v);
            self.node(next, self.occurs[c].clone());
        }
    }

    /// Runs the constraint queue to a fixpoint; `false` on conflict.
    fn propagate(&mut self, vals: &mut [Option<Elem>], mut queue: Vec<usize>) -> bool {
        let g = self.g;
        let mut queued = vec![false; g.constraints.len()];
        for &i in &queue {
            queued[i] = true;
        }
        loop {
            while let Some(i) = queue.pop() {
                queued[i] = false;
                let f = &g.constraints[i].formula;
                match g.eval_formula(vals, f) {
                    Some(true) => continue,
                    Some(false) => return false,
                    None => {}
                }
                let open: Vec<CellId> = self.open_cells[i].iter().copied().filter(|&c| vals[c].is_none()).collect();
                if open.len() > PROBE_LIMIT {
                    continue;
                }
                for c in open {
                    let mut survivor = None;
                    let mut survivors = 0;
                    for &v in g.domain(c).expect("decision cells have finite domains") {
                        vals[c] = Some(v);
                        if g.eval_formula(vals, f) != Some(false) {
                            survivors += 1;
                            survivor = Some(v);
                        }
                    }
                    vals[c] = None;
                    match survivors {
                        0 => return false,
                        1 => {
                            vals[c] = survivor;
                            self.stats.propagations += 1;
                            for &j in &self.occurs[c] {
                                if !queued[j] {
                                    queued[j] = true;
                                    queue.push(j);
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
            // Derived integer cells take their value as soon as it is determined.
            let mut changed = false;
            for &c in &g.derived_order {
                if vals[c].is_some() {
                    continue;
                }
                let (_, t) = grounder::defining(&g.constraints[g.derived[c].expect("derived")].formula).expect("defining");
                match g.eval_term(vals, &t) {
                    TermValue::Known(v) => {
                        vals[c] = Some(v);
                        self.stats.propagations += 1;
                        changed = true;
                        for &j in &self.occurs[c] {
                            if !queued[j] {
                                queued[j] = true;
                                queue.push(j);
                            }
                        }
                    }
                    TermValue::Undefined => return false,
                    _ => {}
                }
            }
            if !changed {
                return true;
            }
        }
    }

    fn leaf(&mut self, mut vals: Vec<Option<Elem>>) {
        let g = self.g;
        let mut s = g.structure_from(&vals);
        if !self.theory.definitions.is_empty() {
            let Ok(full) = with_definitions(&s, &self.theory.definitions) else { return };
            // Symbols the input already interprets must agree with the fixpoint.
            for d in &self.theory.definitions {
                let Some(sym) = g.base.vocabulary().symbol_id(d.symbol()) else { return };
                if g.base.is_interpreted(sym) && g.base.table(sym) != full.table(sym) {
                    return;
                }
            }
            s = full;
        }
        for (c, cell) in g.cells.iter().enumerate() {
            if cell.defined {
                vals[c] = s.value(cell.sym, &cell.args);
            }
        }
        if !g.satisfied_by(&vals) {
            return;
        }
        // Independent recheck; a disagreement would be a grounding bug.
        let ok = self.theory.axioms.iter().all(|a| eval_sentence(&s, a) == Ok(true));
        debug_assert!(ok, "ground model rejected by the evaluator:\n{s}");
        if !ok {
            return;
        }
        s.name = format!("model{}", self.models.len() + 1);
        self.models.push(s);
        if self.cfg.max_models != 0 && self.models.len() >= self.cfg.max_models {
            self.stop = Some(Status::Sat);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport {
    pub index: usize,
    pub text: String,
    /// `Err(UndefinedResult)` flags an evaluator bug rather than a false axiom.
    pub holds: Result<bool, EvalError>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelReport {
    pub axioms: Vec<AxiomReport>,
    /// Defined symbols whose table differs from the fixpoint.
    pub definition_mismatches: Vec<String>,
    pub definition_error: Option<EvalError>,
}

impl ModelReport {
    pub fn ok(&self) -> bool {
        self.axioms.iter().all(|a| a.holds == Ok(true))
            && self.definition_mismatches.is_empty()
            && self.definition_error.is_none()
    }

    /// Indices of axioms that are false or undefined.
    pub fn failing(&self) -> Vec<usize> {
        self.axioms.iter().filter(|a| a.holds != Ok(true)).map(|a| a.index).collect()
    }
}

/// Evaluates every axiom and definition of `theory` in a total candidate.
pub fn check_model(theory: &Theory, candidate: &Structure) -> Result<ModelReport, SolveError> {
    let voc = candidate.vocabulary();
    let diags = crate::typecheck::check_theory(voc, theory);
    if crate::kernel::diag::has_errors(&diags) {
        return Err(GroundError::Invalid(diags).into());
    }
    let own: Vec<_> = theory.assignments.iter().collect();
    let s = extend_structure(candidate, &own).map_err(GroundError::Invalid)?;
    if let Some(sym) = s.uninterpreted().next() {
        return Err(SolveError::NotTotal(voc.symbol(sym).name.clone()));
    }
    let axioms = theory
        .axioms
        .iter()
        .enumerate()
        .map(|(index, a)| AxiomReport { index, text: pretty::expr(a), holds: eval_sentence(&s, a) })
        .collect();
    let mut definition_mismatches = Vec::new();
    let mut definition_error = None;
    match with_definitions(&s, &theory.definitions) {
        Ok(fix) => {
            for d in &theory.definitions {
                if let Some(sym) = voc.symbol_id(d.symbol()) {
                    if fix.table(sym) != s.table(sym) && !definition_mismatches.contains(&d.symbol().to_string()) {
                        definition_mismatches.push(d.symbol().to_string());
                    }
                }
            }
        }
        Err(e) => definition_error = Some(e),
    }
    Ok(ModelReport { axioms, definition_mismatches, definition_error })
}

#[cfg(test)]
mod tests;
