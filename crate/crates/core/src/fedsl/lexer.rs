use std::fmt;

use super::ast::Span;
use super::error::{ErrorKind, ExecError};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Lexer<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span { line: self.line, column: self.column }
    }

    fn error(span: Span, message: impl Into<String>) -> ExecError {
        ExecError::at(ErrorKind::ParseError, span, message)
    }

    fn string(&mut self, start: Span) -> Result<Tok, ExecError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(Self::error(start, "unterminated string literal")),
                Some('"') => return Ok(Tok::Str(out)),
                Some('\\') => {
                    let at = self.here();
                    match self.bump() {
                        Some('"') => out.push('"'),
                        Some('\\') => out.push('\\'),
                        Some('n') => out.push('\n'),
                        Some('t') => out.push('\t'),
                        Some('r') => out.push('\r'),
                        Some(c) => return Err(Self::error(at, format!("unknown escape sequence `\\{c}`"))),
                        None => return Err(Self::error(start, "unterminated string literal")),
                    }
                }
                Some(c) => out.push(c),
            }
        }
    }

    fn number(&mut self, first: char, start: Span) -> Result<Tok, ExecError> {
        let mut text = String::from(first);
        let digits = |lx: &mut Self, text: &mut String| {
            while let Some(&c) = lx.chars.peek() {
                if c.is_ascii_digit() {
                    text.push(c);
                    lx.bump();
                } else {
                    break;
                }
            }
        };
        digits(self, &mut text);
        if self.chars.peek() == Some(&'.') {
            text.push('.');
            self.bump();
            if !self.chars.peek().is_some_and(char::is_ascii_digit) {
                return Err(Self::error(start, format!("malformed number `{text}`")));
            }
            digits(self, &mut text);
        }
        if matches!(self.chars.peek(), Some('e' | 'E')) {
            text.push('e');
            self.bump();
            if let Some(&c @ ('+' | '-')) = self.chars.peek() {
                text.push(c);
                self.bump();
            }
            if !self.chars.peek().is_some_and(char::is_ascii_digit) {
                return Err(Self::error(start, format!("malformed number `{text}`")));
            }
            digits(self, &mut text);
        }
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Tok::Number(v)),
            _ => Err(Self::error(start, format!("number `{text}` is out of range"))),
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, ExecError> {
    let mut lx = Lexer { chars: source.chars().peekable(), line: 1, column: 1 };
    let mut out = Vec::new();
    loop {
        let span = lx.here();
        let Some(c) = lx.bump() else {
            out.push(Token { tok: Tok::Eof, span });
            return Ok(out);
        };
        let tok = match c {
            c if c.is_whitespace() => continue,
            '#' => {
                while lx.chars.peek().is_some_and(|&c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '=' if lx.chars.peek() == Some(&'=') => {
                lx.bump();
                Tok::EqEq
            }
            '!' if lx.chars.peek() == Some(&'=') => {
                lx.bump();
                Tok::NotEq
            }
            '<' | '>' => {
                let eq = lx.chars.peek() == Some(&'=');
                if eq {
                    lx.bump();
                }
                match (c, eq) {
                    ('<', false) => Tok::Lt,
                    ('<', true) => Tok::Le,
                    ('>', false) => Tok::Gt,
                    _ => Tok::Ge,
                }
            }
            '"' => lx.string(span)?,
            c if c.is_ascii_digit() => lx.number(c, span)?,
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::from(c);
                while let Some(&c) = lx.chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        s.push(c);
                        lx.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            other => return Err(Lexer::error(span, format!("unexpected character `{other}`"))),
        };
        out.push(Token { tok, span });
    }
}
