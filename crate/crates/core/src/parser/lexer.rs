use crate::kernel::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `` `name ``
    Quote(String),
    Num(i64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    DotDot,
    Colon,
    ColonColon,
    Assign,
    Bang,
    Question,
    Tilde,
    Amp,
    Pipe,
    Implies,
    Equiv,
    Eq,
    Neq,
    Lt,
    Leq,
    Gt,
    Geq,
    Arrow,
    RuleArrow,
    Star,
    StarStar,
    Plus,
    Minus,
    Hash,
    Dollar,
    /// `in` or `\in`
    In,
    Unknown,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Quote(s) => format!("`{s}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::DotDot => "..",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Assign => ":=",
            Tok::Bang => "!",
            Tok::Question => "?",
            Tok::Tilde => "~",
            Tok::Amp => "&",
            Tok::Pipe => "|",
            Tok::Implies => "=>",
            Tok::Equiv => "<=>",
            Tok::Eq => "=",
            Tok::Neq => "~=",
            Tok::Lt => "<",
            Tok::Leq => "=<",
            Tok::Gt => ">",
            Tok::Geq => ">=",
            Tok::Arrow => "->",
            Tok::RuleArrow => "<-",
            Tok::Star => "*",
            Tok::StarStar => "**",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Hash => "#",
            Tok::Dollar => "$",
            Tok::In => "in",
            _ => "?",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

// Longest operators first.
const PUNCT: &[(&str, Tok)] = &[
    ("<=>", Tok::Equiv),
    ("::", Tok::ColonColon),
    (":=", Tok::Assign),
    ("..", Tok::DotDot),
    ("~=", Tok::Neq),
    ("=>", Tok::Implies),
    ("=<", Tok::Leq),
    (">=", Tok::Geq),
    ("->", Tok::Arrow),
    ("<-", Tok::RuleArrow),
    ("**", Tok::StarStar),
    ("{", Tok::LBrace),
    ("}", Tok::RBrace),
    ("(", Tok::LParen),
    (")", Tok::RParen),
    ("[", Tok::LBracket),
    ("]", Tok::RBracket),
    (",", Tok::Comma),
    (".", Tok::Dot),
    (":", Tok::Colon),
    ("!", Tok::Bang),
    ("?", Tok::Question),
    ("~", Tok::Tilde),
    ("&", Tok::Amp),
    ("|", Tok::Pipe),
    ("=", Tok::Eq),
    ("<", Tok::Lt),
    (">", Tok::Gt),
    ("*", Tok::Star),
    ("+", Tok::Plus),
    ("-", Tok::Minus),
    ("#", Tok::Hash),
    ("$", Tok::Dollar),
];

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

/// Splits `src` into tokens. Lexical errors become `Unknown` tokens plus a diagnostic,
/// so the parser can still recover at block boundaries.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1u32, 0usize);
    let span = |start: usize, end: usize, line: u32, line_start: usize| {
        Span::new(start, line, (start - line_start + 1) as u32, (end - start) as u32)
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if is_ident_start(c) {
            while i < bytes.len() && is_ident_char(bytes[i]) {
                i += 1;
            }
            let word = &src[start..i];
            let tok = if word == "in" { Tok::In } else { Tok::Ident(word.to_string()) };
            toks.push(Token { tok, span: span(start, i, line, line_start) });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let tok = match src[start..i].parse::<i64>() {
                Ok(n) => Tok::Num(n),
                Err(_) => {
                    diags.push(Diagnostic::error(
                        "SyntaxError",
                        span(start, i, line, line_start),
                        "integer literal too large",
                    ));
                    Tok::Unknown
                }
            };
            toks.push(Token { tok, span: span(start, i, line, line_start) });
            continue;
        }
        if c == b'`' {
            i += 1;
            if i < bytes.len() && is_ident_start(bytes[i]) {
                let name_start = i;
                while i < bytes.len() && is_ident_char(bytes[i]) {
                    i += 1;
                }
                let tok = Tok::Quote(src[name_start..i].to_string());
                toks.push(Token { tok, span: span(start, i, line, line_start) });
            } else {
                diags.push(Diagnostic::error(
                    "SyntaxError",
                    span(start, i, line, line_start),
                    "expected a symbol name after `",
                ));
                toks.push(Token { tok: Tok::Unknown, span: span(start, i, line, line_start) });
            }
            continue;
        }
        if src[i..].starts_with("\\in") {
            i += 3;
            toks.push(Token { tok: Tok::In, span: span(start, i, line, line_start) });
            continue;
        }
        if let Some((text, tok)) = PUNCT.iter().find(|(p, _)| src[i..].starts_with(p)) {
            i += text.len();
            toks.push(Token { tok: tok.clone(), span: span(start, i, line, line_start) });
            continue;
        }
        // Skip one whole UTF-8 character.
        let width = src[i..].chars().next().map_or(1, char::len_utf8);
        i += width;
        let sp = span(start, i, line, line_start);
        diags.push(Diagnostic::error("SyntaxError", sp, format!("unexpected character {:?}", &src[start..i])));
        toks.push(Token { tok: Tok::Unknown, span: sp });
    }
    let end = span(bytes.len(), bytes.len(), line, line_start);
    toks.push(Token { tok: Tok::Eof, span: end });
    (toks, diags)
}
