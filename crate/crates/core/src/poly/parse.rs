use std::fmt;

use thiserror::Error;

use super::polynomial::Polynomial;
use super::system::PolynomialSystem;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UndeclaredVariable(String),
    BadNumber(String),
    MissingHeader(&'static str),
    DuplicateVariable(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Syntax(s) => write!(f, "syntax error: {s}"),
            Self::UndeclaredVariable(v) => write!(f, "undeclared variable `{v}`"),
            Self::BadNumber(s) => write!(f, "bad number `{s}`"),
            Self::MissingHeader(h) => write!(f, "missing `{h}` header"),
            Self::DuplicateVariable(v) => write!(f, "variable `{v}` declared twice"),
        }
    }
}

/// Error location is 1-based line and column in the original text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(line: usize, column: usize, kind: ParseErrorKind) -> Self {
        Self { line, column, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
}

impl Lexer {
    fn new(src: &str, line: usize, col0: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
            col0,
        }
    }

    fn peek_char(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn err(&self, at: usize, kind: ParseErrorKind) -> ParseError {
        ParseError::new(self.line, self.col0 + at, kind)
    }

    /// Returns the token and its 0-based character offset.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        while matches!(self.peek_char(0), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek_char(0) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '*' => {
                if self.peek_char(1) == Some('*') {
                    self.pos += 1;
                    Tok::Caret
                } else {
                    Tok::Star
                }
            }
            c if c.is_ascii_digit() || c == '.' => return self.number(start),
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(c) = self.peek_char(0) {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                return Ok((Tok::Ident(s), start));
            }
            other => {
                return Err(self.err(start, ParseErrorKind::Syntax(format!("unexpected `{other}`"))))
            }
        };
        self.pos += 1;
        Ok((tok, start))
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let mut s = String::new();
        while let Some(c) = self.peek_char(0) {
            if c.is_ascii_digit() || c == '.' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        // exponent only when digits follow, so `2e` stays `2 * e`
        if let Some('e' | 'E') = self.peek_char(0) {
            let signed = matches!(self.peek_char(1), Some('+' | '-'));
            let digit_at = if signed { 2 } else { 1 };
            if matches!(self.peek_char(digit_at), Some(d) if d.is_ascii_digit()) {
                for _ in 0..digit_at {
                    s.push(self.peek_char(0).unwrap());
                    self.pos += 1;
                }
                while let Some(c) = self.peek_char(0) {
                    if c.is_ascii_digit() {
                        s.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
            }
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((Tok::Num(v), start)),
            _ => Err(self.err(start, ParseErrorKind::BadNumber(s))),
        }
    }
}

struct Parser<'n> {
    lex: Lexer,
    tok: Tok,
    at: usize,
    names: &'n [String],
}

impl<'n> Parser<'n> {
    fn new(src: &str, names: &'n [String], line: usize, col0: usize) -> Result<Self, ParseError> {
        let mut lex = Lexer::new(src, line, col0);
        let (tok, at) = lex.next()?;
        Ok(Self { lex, tok, at, names })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lex.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        self.lex.err(self.at, kind)
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump()?;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump()?;
                    let at = self.at;
                    let d = self.unary()?;
                    let c = constant_value(&d).ok_or_else(|| {
                        self.lex.err(
                            at,
                            ParseErrorKind::Syntax("division by a non-constant".into()),
                        )
                    })?;
                    if c == 0.0 {
                        return Err(self.lex.err(at, ParseErrorKind::Syntax("division by zero".into())));
                    }
                    acc = acc.scale(1.0 / c);
                }
                Tok::Num(_) | Tok::Ident(_) | Tok::LParen => {
                    acc = &acc * &self.power()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        match self.tok {
            Tok::Minus => {
                self.bump()?;
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let base = self.atom()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let e = match self.tok {
            Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
            Tok::LParen => {
                return Err(self.err(ParseErrorKind::Syntax(
                    "exponent must be a nonnegative integer literal".into(),
                )))
            }
            _ => {
                return Err(self.err(ParseErrorKind::Syntax(
                    "exponent must be a nonnegative integer".into(),
                )))
            }
        };
        self.bump()?;
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match std::mem::replace(&mut self.tok, Tok::End) {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Polynomial::constant(self.nvars(), v))
            }
            Tok::Ident(name) => {
                let Some(i) = self.names.iter().position(|n| *n == name) else {
                    return Err(self.err(ParseErrorKind::UndeclaredVariable(name)));
                };
                self.bump()?;
                Ok(Polynomial::var(self.nvars(), i))
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.err(ParseErrorKind::Syntax("expected `)`".into())));
                }
                self.bump()?;
                Ok(inner)
            }
            other => {
                self.tok = other.clone();
                let what = match other {
                    Tok::End => "unexpected end of expression".to_string(),
                    t => format!("unexpected {t:?}"),
                };
                Err(self.err(ParseErrorKind::Syntax(what)))
            }
        }
    }
}

fn constant_value(p: &Polynomial) -> Option<f64> {
    match p.num_terms() {
        0 => Some(0.0),
        1 => p.terms().next().filter(|(m, _)| m.is_one()).map(|(_, c)| c),
        _ => None,
    }
}

/// Parses one polynomial over the given variable names. `line` and `col0`
/// locate the text inside a larger file for error messages.
pub(crate) fn parse_polynomial_at(
    text: &str,
    names: &[String],
    line: usize,
    col0: usize,
) -> Result<Polynomial, ParseError> {
    let mut p = Parser::new(text, names, line, col0)?;
    let out = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.err(ParseErrorKind::Syntax("trailing input".into())));
    }
    Ok(out)
}

pub fn parse_polynomial(text: &str, names: &[String]) -> Result<Polynomial, ParseError> {
    parse_polynomial_at(text, names, 1, 1)
}

/// Strips a `#` comment.
pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Splits a line at `;`, yielding non-blank pieces with their 1-based column.
pub(crate) fn statements(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for piece in line.split(';') {
        if !piece.trim().is_empty() {
            out.push((line[..start].chars().count() + 1, piece));
        }
        start += piece.len() + 1;
    }
    out
}

/// Reads a header line `keyword name+`, validating the names.
pub(crate) fn parse_header(
    body: &str,
    keyword: &'static str,
    lineno: usize,
) -> Result<Vec<String>, ParseError> {
    let trimmed = body.trim_start();
    let offset = body.len() - trimmed.len();
    let rest = trimmed
        .strip_prefix(keyword)
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or_else(|| ParseError::new(lineno, offset + 1, ParseErrorKind::MissingHeader(keyword)))?;
    let mut names: Vec<String> = Vec::new();
    let base = offset + keyword.len();
    for (at, piece) in words(rest) {
        let at = base + at;
        let valid = piece
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() || c == '_')
            && piece.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !valid {
            return Err(ParseError::new(
                lineno,
                at + 1,
                ParseErrorKind::Syntax(format!("invalid variable name `{piece}`")),
            ));
        }
        if names.iter().any(|n| n == piece) {
            return Err(ParseError::new(
                lineno,
                at + 1,
                ParseErrorKind::DuplicateVariable(piece.to_string()),
            ));
        }
        names.push(piece.to_string());
    }
    if names.is_empty() {
        return Err(ParseError::new(
            lineno,
            offset + 1,
            ParseErrorKind::Syntax(format!("`{keyword}` needs at least one name")),
        ));
    }
    Ok(names)
}

/// Whitespace-separated words with their byte offsets.
pub(crate) fn words(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(st)) => {
                out.push((st, &s[st..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(st) = start {
        out.push((st, &s[st..]));
    }
    out
}

/// Parses the system file format: a `vars` header, then polynomials
/// separated by newlines or `;`, with `#` comments.
pub fn parse_system(text: &str) -> Result<PolynomialSystem, ParseError> {
    let mut names: Option<Vec<String>> = None;
    let mut polys = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        match &names {
            None => names = Some(parse_header(body, "vars", lineno)?),
            Some(vars) => {
                for (col, stmt) in statements(body) {
                    polys.push(parse_polynomial_at(stmt, vars, lineno, col)?);
                }
            }
        }
    }
    let names = names.ok_or_else(|| ParseError::new(1, 1, ParseErrorKind::MissingHeader("vars")))?;
    Ok(PolynomialSystem::new(names, polys).expect("parsed polynomials share the declared ring"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{format_system, Monomial};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn bivariate_system() {
        let sys = parse_system("vars x y\nx^2 + y^2 - 2 ; 2*x*y^2 - x + 1\n").unwrap();
        assert_eq!(sys.len(), 2);
        assert_eq!(sys.degrees(), vec![2, 3]);
        assert_eq!(sys.names(), &names(&["x", "y"])[..]);
    }

    #[test]
    fn zero_and_structure() {
        let sys = parse_system("vars x y\n0\nx - y ; y - x").unwrap();
        assert!(sys.polys()[0].is_zero());
        assert_eq!(sys.len(), 3);
        assert_ne!(sys.polys()[1], sys.polys()[2]);
    }

    #[test]
    fn implicit_products_and_powers() {
        let n = names(&["x", "y"]);
        let p = parse_polynomial("2x y^2 - 3e-1 x**3 + (x+1)(x-1) / 2", &n).unwrap();
        assert_eq!(p.coeff(&Monomial::new(vec![1, 2])), 2.0);
        assert_eq!(p.coeff(&Monomial::new(vec![3, 0])), -0.3);
        assert_eq!(p.coeff(&Monomial::new(vec![2, 0])), 0.5);
        assert_eq!(p.coeff(&Monomial::new(vec![0, 0])), -0.5);
        let q = parse_polynomial("-x^2", &n).unwrap();
        assert_eq!(q.coeff(&Monomial::new(vec![2, 0])), -1.0);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_system("vars x y\nx + z").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        assert_eq!(e.kind, ParseErrorKind::UndeclaredVariable("z".into()));

        let e = parse_system("vars x\n# c\n x + 1.2.3").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::BadNumber(_)));

        let e = parse_system("vars x\nx + * 2").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse_system("x + 1").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MissingHeader("vars"));
    }

    #[test]
    fn round_trip() {
        let text = "vars x y z\nx^2*z/3 - 1e-20*y + 0.1\n2*y*z - y; x*y\n";
        let sys = parse_system(text).unwrap();
        let again = parse_system(&format_system(&sys)).unwrap();
        assert_eq!(sys, again);
    }
}
