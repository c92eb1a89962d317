//! Recursive-descent parser for `vocabulary`, `theory` and `structure` blocks.
//!
//! Operator precedence, loosest first: `<=>`, `=>` (right-assoc), `|`, `&`,
//! `~`, comparisons (non-assoc), `+ -`, `*`, unary `-`. Quantifier bodies and
//! `else` branches extend as far to the right as possible.

use crate::kernel::{
    Assignment, BinOp, Binder, Definition, Diagnostic, Expr, ExprKind, Literal, QuantKind, Query,
    Range, Rule, SigRef, Signature, Span, StructureDecl, TableLit, Theory, TypeId, TypeInterp,
    TypeRef, Vocabulary,
};

use super::lexer::{lex, Tok, Token};
use super::{Block, SourceFile};

type PResult<T> = Result<T, Diagnostic>;

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    vocabularies: Vec<Vocabulary>,
    /// Index of the vocabulary used to classify identifiers.
    current: Option<usize>,
    scope: Vec<String>,
}

fn syntax(span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error("SyntaxError", span, msg)
}

impl Parser {
    fn new(src: &str) -> (Self, Vec<Diagnostic>) {
        let (toks, diags) = lex(src);
        (
            Parser { toks, pos: 0, vocabularies: Vec::new(), current: None, scope: Vec::new() },
            diags,
        )
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(syntax(self.span(), format!("expected {}, found {}", tok.describe(), self.peek().describe())))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(syntax(self.span(), format!("expected `{kw}`, found {}", self.peek().describe())))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            other => Err(syntax(self.span(), format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn matching_brace(&self, open: usize) -> usize {
        let mut depth = 0i32;
        for (i, t) in self.toks.iter().enumerate().skip(open) {
            match t.tok {
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    depth -= 1;
                    if depth == 0 {
                        return i;
                    }
                }
                _ => {}
            }
        }
        self.toks.len() - 1
    }

    fn cur(&self) -> Option<&Vocabulary> {
        self.current.map(|i| &self.vocabularies[i])
    }

    fn voc(&self) -> PResult<&Vocabulary> {
        self.cur().ok_or_else(|| Diagnostic::error("UnknownVocabulary", self.span(), "no vocabulary in scope"))
    }

    // ---------------------------------------------------------------- file

    fn file(&mut self, name: &str, diags: &mut Vec<Diagnostic>) -> SourceFile {
        let mut blocks = Vec::new();
        while *self.peek() != Tok::Eof {
            let start = self.pos;
            let kw = match self.peek() {
                Tok::Ident(s) if s == "vocabulary" || s == "theory" || s == "structure" => s.clone(),
                _ => {
                    diags.push(syntax(
                        self.span(),
                        format!("expected `vocabulary`, `theory` or `structure`, found {}", self.peek().describe()),
                    ));
                    self.skip_to_block_start();
                    continue;
                }
            };
            let result = match kw.as_str() {
                "vocabulary" => self.vocabulary_block(diags).map(Block::Vocabulary),
                "theory" => self.theory_block().map(Block::Theory),
                _ => self.structure_block().map(Block::Structure),
            };
            match result {
                Ok(b) => {
                    if let Block::Vocabulary(v) = &b {
                        self.vocabularies.push(v.clone());
                    }
                    blocks.push(b);
                }
                Err(d) => {
                    diags.push(d);
                    let is_block_kw = |t: &Tok| matches!(t, Tok::Ident(s) if s == "vocabulary" || s == "theory" || s == "structure");
                    let open = self.toks[start + 1..]
                        .iter()
                        .position(|t| t.tok == Tok::LBrace || is_block_kw(&t.tok))
                        .map(|p| p + start + 1)
                        .filter(|&o| self.toks[o].tok == Tok::LBrace);
                    match open {
                        Some(o) => {
                            self.pos = self.matching_brace(o);
                            self.bump();
                        }
                        None => self.skip_to_block_start(),
                    }
                }
            }
            self.current = None;
            self.scope.clear();
        }
        SourceFile { name: name.to_string(), blocks }
    }

    fn skip_to_block_start(&mut self) {
        self.bump();
        let mut depth = 0i32;
        while *self.peek() != Tok::Eof {
            match self.peek() {
                Tok::LBrace => depth += 1,
                Tok::RBrace => depth -= 1,
                Tok::Ident(s) if depth <= 0 && (s == "vocabulary" || s == "theory" || s == "structure") => return,
                _ => {}
            }
            self.bump();
        }
    }

    fn optional_name(&mut self) -> Option<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Some(s)
            }
            _ => None,
        }
    }

    // ---------------------------------------------------------- vocabulary

    fn vocabulary_block(&mut self, diags: &mut Vec<Diagnostic>) -> PResult<Vocabulary> {
        let start = self.bump().span;
        let name = self.optional_name().unwrap_or_else(|| "V".to_string());
        let mut voc = Vocabulary::new(name);
        self.expect(&Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            if self.eat_kw("type") {
                self.type_decl(&mut voc)?;
            } else {
                self.symbol_decl(&mut voc)?;
            }
            self.eat(&Tok::Dot);
        }
        voc.span = start.to(self.prev_span());
        diags.extend(voc.validate());
        Ok(voc)
    }

    fn type_decl(&mut self, voc: &mut Vocabulary) -> PResult<()> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        let interp = if self.eat(&Tok::Assign) { self.type_interp()? } else { TypeInterp::Open };
        for (n, sp) in names {
            voc.add_type(&n, interp.clone(), sp)?;
        }
        Ok(())
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(if neg { -n } else { n })
            }
            other => Err(syntax(self.span(), format!("expected integer, found {}", other.describe()))),
        }
    }

    fn type_interp(&mut self) -> PResult<TypeInterp> {
        if self.eat_kw("Int") {
            if self.eat(&Tok::LBracket) {
                let lo = self.signed_int()?;
                self.expect(&Tok::DotDot)?;
                let hi = self.signed_int()?;
                self.expect(&Tok::RBracket)?;
                return Ok(TypeInterp::IntRange { lo, hi });
            }
            return Ok(TypeInterp::Int);
        }
        self.expect(&Tok::LBrace)?;
        if matches!(self.peek(), Tok::Num(_) | Tok::Minus) {
            let lo = self.signed_int()?;
            self.expect(&Tok::DotDot)?;
            let hi = self.signed_int()?;
            self.expect(&Tok::RBrace)?;
            return Ok(TypeInterp::IntRange { lo, hi });
        }
        let mut names = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                names.push(self.ident()?.0);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(TypeInterp::Enum(names))
    }

    fn symbol_decl(&mut self, voc: &mut Vocabulary) -> PResult<()> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(&Tok::Colon)?;
        let sig = self.sig_ref()?;
        let sig = self.intern_sig(voc, &sig)?;
        for (n, sp) in names {
            voc.add_symbol(&n, sig.clone(), sp)?;
        }
        Ok(())
    }

    fn intern_type(&self, voc: &mut Vocabulary, t: &TypeRef, span: Span) -> PResult<TypeId> {
        match t {
            TypeRef::Named(n) => voc
                .type_id(n)
                .ok_or_else(|| Diagnostic::error("UnknownType", span, format!("unknown type `{n}`"))),
            TypeRef::Subtype(sig) => {
                let sig = self.intern_sig(voc, sig)?;
                Ok(voc.intern_subtype(sig))
            }
        }
    }

    fn intern_sig(&self, voc: &mut Vocabulary, sig: &SigRef) -> PResult<Signature> {
        let span = self.prev_span();
        let args = sig.args.iter().map(|a| self.intern_type(voc, a, span)).collect::<PResult<Vec<_>>>()?;
        Ok(Signature::new(args, self.intern_type(voc, &sig.out, span)?))
    }

    /// `T1 ** T2 -> T`, `(T1 ** T2) -> T`, `() -> T`, or a bare `T` (nullary).
    fn sig_ref(&mut self) -> PResult<SigRef> {
        let args = if self.eat(&Tok::LParen) {
            let mut args = Vec::new();
            if !self.eat(&Tok::RParen) {
                args.push(self.type_ref()?);
                while self.eat(&Tok::StarStar) {
                    args.push(self.type_ref()?);
                }
                self.expect(&Tok::RParen)?;
            }
            self.expect(&Tok::Arrow)?;
            args
        } else {
            let first = self.type_ref()?;
            let mut args = vec![first];
            while self.eat(&Tok::StarStar) {
                args.push(self.type_ref()?);
            }
            if !self.eat(&Tok::Arrow) {
                if args.len() == 1 {
                    return Ok(SigRef { args: vec![], out: Box::new(args.pop().unwrap()) });
                }
                return Err(syntax(self.span(), "expected `->` in signature"));
            }
            args
        };
        let out = self.type_ref()?;
        Ok(SigRef { args, out: Box::new(out) })
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        let (name, _) = self.ident()?;
        if name == "Concept" && self.eat(&Tok::LBracket) {
            let sig = self.sig_ref()?;
            self.expect(&Tok::RBracket)?;
            return Ok(TypeRef::Subtype(sig));
        }
        Ok(TypeRef::Named(name))
    }

    // -------------------------------------------------------------- theory

    fn select_vocabulary(&mut self, name: Option<String>, span: Span) -> PResult<String> {
        let idx = match &name {
            Some(n) => self.vocabularies.iter().rposition(|v| &v.name == n),
            None => self.vocabularies.len().checked_sub(1),
        };
        let idx = idx.ok_or_else(|| {
            Diagnostic::error(
                "UnknownVocabulary",
                span,
                match &name {
                    Some(n) => format!("vocabulary `{n}` is not declared before this block"),
                    None => "no vocabulary declared before this block".to_string(),
                },
            )
        })?;
        self.current = Some(idx);
        Ok(self.vocabularies[idx].name.clone())
    }

    fn block_header(&mut self, default: &str) -> PResult<(String, String, Span)> {
        let start = self.bump().span;
        let name = self.optional_name().unwrap_or_else(|| default.to_string());
        let voc_name = if self.eat(&Tok::Colon) { Some(self.ident()?.0) } else { None };
        let voc = self.select_vocabulary(voc_name, start)?;
        Ok((name, voc, start))
    }

    fn theory_block(&mut self) -> PResult<Theory> {
        let (name, voc, start) = self.block_header("T")?;
        let mut theory = Theory::new(name, voc);
        self.expect(&Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            if *self.peek() == Tok::LBrace {
                self.definition_block(&mut theory.definitions)?;
                self.eat(&Tok::Dot);
            } else if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Assign {
                theory.assignments.push(self.assignment()?);
            } else if *self.peek() == Tok::Dot && *self.peek_at(1) == Tok::Dot {
                // `...` placeholder lines in examples
                self.bump();
                self.bump();
                self.eat(&Tok::Dot);
            } else {
                let e = self.expr()?;
                self.expect(&Tok::Dot)?;
                theory.axioms.push(e);
            }
        }
        theory.span = start.to(self.prev_span());
        Ok(theory)
    }

    fn definition_block(&mut self, defs: &mut Vec<Definition>) -> PResult<()> {
        let start = self.expect(&Tok::LBrace)?;
        let mut rules: Vec<Rule> = Vec::new();
        while !self.eat(&Tok::RBrace) {
            rules.push(self.rule()?);
        }
        let span = start.to(self.prev_span());
        if rules.is_empty() {
            return Err(syntax(span, "empty definition"));
        }
        // One Definition per defined symbol, in order of first appearance.
        let mut heads: Vec<String> = Vec::new();
        for r in &rules {
            if !heads.contains(&r.head) {
                heads.push(r.head.clone());
            }
        }
        for h in heads {
            let rs: Vec<Rule> = rules.iter().filter(|r| r.head == h).cloned().collect();
            defs.push(Definition { rules: rs, span });
        }
        Ok(())
    }

    fn rule(&mut self) -> PResult<Rule> {
        let start = self.span();
        let depth = self.scope.len();
        let mut binders = Vec::new();
        while self.eat(&Tok::Bang) {
            binders.extend(self.binders()?);
            self.expect(&Tok::Colon)?;
        }
        let (head, head_span) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            loop {
                if !matches!(self.peek(), Tok::Ident(_)) {
                    return Err(Diagnostic::error(
                        "NonNormalHead",
                        self.span(),
                        format!("rule head arguments must be variables, found {}", self.peek().describe()),
                    ));
                }
                let (a, sp) = self.ident()?;
                if !self.scope[depth..].contains(&a) {
                    return Err(Diagnostic::error(
                        "NonNormalHead",
                        sp,
                        format!("rule head argument `{a}` must be a variable bound by the rule"),
                    ));
                }
                if args.contains(&a) {
                    return Err(Diagnostic::error("NonNormalHead", sp, format!("variable `{a}` repeated in rule head")));
                }
                args.push(a);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma)?;
            }
        }
        if self.voc()?.symbol_id(&head).is_none() {
            return Err(Diagnostic::error("UnknownSymbol", head_span, format!("unknown symbol `{head}`")));
        }
        let value = if self.eat(&Tok::Eq) { Some(self.arith()?) } else { None };
        self.expect(&Tok::RuleArrow)?;
        let body = self.expr()?;
        self.expect(&Tok::Dot)?;
        self.scope.truncate(depth);
        Ok(Rule { binders, head, args, value, body, span: start.to(self.prev_span()) })
    }

    // ----------------------------------------------------------- structure

    fn structure_block(&mut self) -> PResult<StructureDecl> {
        let (name, voc, start) = self.block_header("S")?;
        self.expect(&Tok::LBrace)?;
        let mut assignments = Vec::new();
        while !self.eat(&Tok::RBrace) {
            assignments.push(self.assignment()?);
        }
        Ok(StructureDecl { name, vocabulary: voc, assignments, span: start.to(self.prev_span()) })
    }

    fn assignment(&mut self) -> PResult<Assignment> {
        let (name, start) = self.ident()?;
        self.expect(&Tok::Assign)?;
        let table = self.table_lit()?;
        let default = if self.eat_kw("else") { Some(self.literal()?) } else { None };
        self.eat(&Tok::Dot);
        Ok(Assignment { name, table, default, span: start.to(self.prev_span()) })
    }

    fn table_lit(&mut self) -> PResult<TableLit> {
        if *self.peek() == Tok::Lt && matches!(self.peek_at(1), Tok::Ident(s) if s == "unknown") {
            self.bump();
            self.bump();
            self.expect(&Tok::Gt)?;
            return Ok(TableLit::Unknown);
        }
        if !self.eat(&Tok::LBrace) {
            return Ok(TableLit::Value(self.literal()?));
        }
        if self.eat(&Tok::RBrace) {
            return Ok(TableLit::Set(vec![]));
        }
        if matches!(self.peek(), Tok::Num(_) | Tok::Minus) && *self.peek_at(1) == Tok::DotDot
            || *self.peek() == Tok::Minus && *self.peek_at(2) == Tok::DotDot
        {
            let lo = self.signed_int()?;
            self.expect(&Tok::DotDot)?;
            let hi = self.signed_int()?;
            self.expect(&Tok::RBrace)?;
            return Ok(TableLit::Range(lo, hi));
        }
        let mut set = Vec::new();
        let mut map = Vec::new();
        loop {
            let tuple = self.tuple()?;
            if self.eat(&Tok::Arrow) {
                if !set.is_empty() {
                    return Err(syntax(self.prev_span(), "mixing set and map entries"));
                }
                map.push((tuple, self.literal()?));
            } else {
                if !map.is_empty() {
                    return Err(syntax(self.span(), "mixing set and map entries"));
                }
                set.push(tuple);
            }
            if self.eat(&Tok::RBrace) {
                break;
            }
            self.expect(&Tok::Comma)?;
        }
        Ok(if map.is_empty() { TableLit::Set(set) } else { TableLit::Map(map) })
    }

    fn tuple(&mut self) -> PResult<Vec<Literal>> {
        if self.eat(&Tok::LParen) {
            let mut items = Vec::new();
            if self.eat(&Tok::RParen) {
                return Ok(items);
            }
            loop {
                items.push(self.literal()?);
                if self.eat(&Tok::RParen) {
                    return Ok(items);
                }
                self.expect(&Tok::Comma)?;
            }
        }
        Ok(vec![self.literal()?])
    }

    fn literal(&mut self) -> PResult<Literal> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Literal::Bool(true))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Literal::Bool(false))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(Literal::Ident(s))
            }
            Tok::Quote(s) => {
                self.bump();
                Ok(Literal::Concept(s))
            }
            Tok::Num(_) | Tok::Minus => Ok(Literal::Int(self.signed_int()?)),
            other => Err(syntax(self.span(), format!("expected a value, found {}", other.describe()))),
        }
    }

    // --------------------------------------------------------- expressions

    pub(super) fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Equiv) {
            let rhs = self.implies()?;
            lhs = Expr::binary(BinOp::Equiv, lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Expr> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Expr::binary(BinOp::Implies, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                let e = self.unary()?;
                let span = start.to(e.span);
                Ok(Expr::new(ExprKind::Not(Box::new(e)), span))
            }
            Tok::Bang | Tok::Question => {
                let kind = if self.bump().tok == Tok::Bang { QuantKind::Forall } else { QuantKind::Exists };
                let depth = self.scope.len();
                let binders = self.binders()?;
                self.expect(&Tok::Colon)?;
                let mut body = self.expr()?;
                self.scope.truncate(depth);
                let span = start.to(body.span);
                for b in binders.into_iter().rev() {
                    body = Expr::new(ExprKind::Quant(kind, b, Box::new(body)), span);
                }
                Ok(body)
            }
            Tok::Ident(s) if s == "if" => {
                self.bump();
                let (var, _) = self.ident()?;
                self.expect(&Tok::ColonColon)?;
                self.expect(&Tok::LBracket)?;
                let sig = self.sig_ref()?;
                self.expect(&Tok::RBracket)?;
                self.expect_kw("then")?;
                let then = self.expr()?;
                self.expect_kw("else")?;
                let els = self.expr()?;
                let span = start.to(els.span);
                Ok(Expr::new(ExprKind::IfGuard { var, sig, then: Box::new(then), els: Box::new(els) }, span))
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.arith()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Neq => BinOp::Neq,
            Tok::Lt => BinOp::Lt,
            Tok::Leq => BinOp::Leq,
            Tok::Gt => BinOp::Gt,
            Tok::Geq => BinOp::Geq,
            Tok::In if *self.peek_at(1) == Tok::LBrace => return self.membership(lhs),
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.arith()?;
        Ok(Expr::binary(op, lhs, rhs))
    }

    /// `t in {a, b}` is sugar for `t = a | t = b`.
    fn membership(&mut self, lhs: Expr) -> PResult<Expr> {
        self.bump();
        self.expect(&Tok::LBrace)?;
        let mut out: Option<Expr> = None;
        loop {
            let item = self.arith()?;
            let eq = Expr::binary(BinOp::Eq, lhs.clone(), item);
            out = Some(match out {
                None => eq,
                Some(acc) => Expr::binary(BinOp::Or, acc, eq),
            });
            if self.eat(&Tok::RBrace) {
                break;
            }
            self.expect(&Tok::Comma)?;
        }
        Ok(out.expect("at least one element"))
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.negation()?;
        while self.eat(&Tok::Star) {
            let rhs = self.negation()?;
            lhs = Expr::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Minus) {
            if let Tok::Num(n) = *self.peek() {
                let sp = start.to(self.bump().span);
                return Ok(Expr::new(ExprKind::Num(-n), sp));
            }
            let e = self.negation()?;
            let span = start.to(e.span);
            return Ok(Expr::new(ExprKind::Neg(Box::new(e)), span));
        }
        self.primary()
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(&Tok::Comma)?;
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.span();
        let tok = self.peek().clone();
        let node = |p: &Self, k: ExprKind| Expr::new(k, start.to(p.prev_span()));
        match tok {
            Tok::Num(n) => {
                self.bump();
                Ok(node(self, ExprKind::Num(n)))
            }
            Tok::Quote(s) => {
                self.bump();
                Ok(node(self, ExprKind::Intension(s)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Dollar => {
                self.bump();
                self.expect(&Tok::LParen)?;
                let f = self.expr()?;
                self.expect(&Tok::RParen)?;
                let args = self.args()?;
                Ok(node(self, ExprKind::ValueApp(Box::new(f), args)))
            }
            Tok::Hash => {
                self.bump();
                self.expect(&Tok::LBrace)?;
                let depth = self.scope.len();
                let binders = self.binders()?;
                self.expect(&Tok::Colon)?;
                let cond = self.expr()?;
                self.expect(&Tok::RBrace)?;
                self.scope.truncate(depth);
                Ok(node(self, ExprKind::Count(binders, Box::new(cond))))
            }
            Tok::Ident(name) => self.ident_expr(name, start),
            other => Err(syntax(start, format!("expected an expression, found {}", other.describe()))),
        }
    }

    fn ident_expr(&mut self, name: String, start: Span) -> PResult<Expr> {
        self.bump();
        let node = |p: &Self, k: ExprKind| Expr::new(k, start.to(p.prev_span()));
        match name.as_str() {
            "true" => return Ok(node(self, ExprKind::Bool(true))),
            "false" => return Ok(node(self, ExprKind::Bool(false))),
            "sum" => {
                self.expect(&Tok::LParen)?;
                self.expect_kw("lambda")?;
                let depth = self.scope.len();
                let mut binders = self.binders()?;
                if binders.len() != 1 {
                    return Err(syntax(start, "sum binds exactly one variable"));
                }
                self.expect(&Tok::Colon)?;
                let term = self.expr()?;
                self.expect(&Tok::RParen)?;
                self.scope.truncate(depth);
                return Ok(node(self, ExprKind::Sum(binders.remove(0), Box::new(term))));
            }
            "arity" | "output" if *self.peek() == Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                let q = if name == "arity" { Query::Arity } else { Query::Output };
                return Ok(node(self, ExprKind::Introspect(q, Box::new(e))));
            }
            "input" if *self.peek() == Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::Comma)?;
                let i = match self.bump().tok {
                    Tok::Num(n) if n >= 0 => n as usize,
                    _ => return Err(syntax(self.prev_span(), "expected an argument position")),
                };
                self.expect(&Tok::RParen)?;
                return Ok(node(self, ExprKind::Introspect(Query::Input(i), Box::new(e))));
            }
            "Concept" => {
                let t = if self.eat(&Tok::LBracket) {
                    let sig = self.sig_ref()?;
                    self.expect(&Tok::RBracket)?;
                    TypeRef::Subtype(sig)
                } else {
                    TypeRef::Named(name)
                };
                return Ok(node(self, ExprKind::TypeLit(t)));
            }
            _ => {}
        }
        if *self.peek() == Tok::LParen {
            let args = self.args()?;
            return Ok(node(self, ExprKind::SymApp(name, args)));
        }
        if self.scope.contains(&name) {
            return Ok(node(self, ExprKind::Var(name)));
        }
        if let Some(voc) = self.cur() {
            if voc.symbol_id(&name).is_some() {
                return Ok(node(self, ExprKind::SymApp(name, vec![])));
            }
            if voc.constructor(&name).is_some() {
                return Ok(node(self, ExprKind::Ctor(name)));
            }
            if voc.type_id(&name).is_some() {
                return Ok(node(self, ExprKind::TypeLit(TypeRef::Named(name))));
            }
        }
        Ok(node(self, ExprKind::Var(name)))
    }

    /// `x, y in T, z in P`: pushes the bound names onto the scope.
    fn binders(&mut self) -> PResult<Vec<Binder>> {
        let mut out = Vec::new();
        loop {
            let mut group = vec![self.ident()?];
            while self.eat(&Tok::Comma) {
                group.push(self.ident()?);
            }
            if !self.eat(&Tok::In) {
                return Err(Diagnostic::error(
                    "MissingRange",
                    self.span(),
                    format!("quantified variable `{}` needs a range (`in T`)", group[0].0),
                ));
            }
            let range = self.range()?;
            for (var, span) in group {
                self.scope.push(var.clone());
                out.push(Binder { var, range: range.clone(), span });
            }
            if *self.peek() == Tok::Comma {
                self.bump();
                continue;
            }
            return Ok(out);
        }
    }

    fn range(&mut self) -> PResult<Range> {
        let t = self.type_ref()?;
        if let TypeRef::Named(n) = &t {
            if let Some(voc) = self.cur() {
                if voc.type_id(n).is_none() && voc.symbol_id(n).is_some() {
                    return Ok(Range::Pred(n.clone()));
                }
            }
        }
        Ok(Range::Type(t))
    }
}

/// Parses a whole file, recovering at block boundaries.
pub fn parse_with_recovery(name: &str, src: &str) -> (SourceFile, Vec<Diagnostic>) {
    let (mut p, mut diags) = Parser::new(src);
    let file = p.file(name, &mut diags);
    (file, diags)
}

/// Parses a whole file; any error diagnostic fails the parse.
pub fn parse(src: &str) -> Result<SourceFile, Vec<Diagnostic>> {
    let (file, diags) = parse_with_recovery("<input>", src);
    if crate::kernel::diag::has_errors(&diags) {
        Err(diags)
    } else {
        Ok(file)
    }
}

/// Parses one expression against `voc`, with `bound` variables in scope.
pub fn parse_expr(voc: &Vocabulary, src: &str, bound: &[&str]) -> Result<Expr, Vec<Diagnostic>> {
    let (toks, diags) = lex(src);
    if !diags.is_empty() {
        return Err(diags);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        vocabularies: vec![voc.clone()],
        current: Some(0),
        scope: bound.iter().map(|s| s.to_string()).collect(),
    };
    let e = p.expr().map_err(|d| vec![d])?;
    p.eat(&Tok::Dot);
    if *p.peek() != Tok::Eof {
        return Err(vec![syntax(p.span(), format!("unexpected {}", p.peek().describe()))]);
    }
    Ok(e)
}
