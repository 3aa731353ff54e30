//! Recursive-descent parser.
//!
//! ```text
//! script     := statement*
//! statement  := feature | drop
//! feature    := "feature" STRING "{" field ","? field "}"
//! field      := "usefulness" ":" STRING | "expr" ":" expr
//! drop       := "drop" STRING ("reason" STRING)?
//! expr       := or
//! or         := and ("or" and)*
//! and        := not ("and" not)*
//! not        := "not" not | comparison
//! comparison := additive (cmp additive)?
//! additive   := mult (("+" | "-") mult)*
//! mult       := unary (("*" | "/") unary)*
//! unary      := "-" unary | primary
//! primary    := NUMBER | STRING | "true" | "false" | "col" "(" STRING ")"
//!             | IDENT "(" (arg ("," arg)*)? ")" | "(" expr ")" | "[" (expr ("," expr)*)? "]"
//! ```

use super::ast::{BinaryOp, Expr, ExprKind, FeatureScript, Span, Statement, UnaryOp};
use super::error::{ErrorKind, ExecError};
use super::lexer::{tokenize, Tok, Token};

pub fn parse(source: &str) -> Result<FeatureScript, ExecError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut statements = Vec::new();
    while p.peek() != &Tok::Eof {
        statements.push(p.statement()?);
    }
    Ok(FeatureScript { statements, source_text: source.to_string() })
}

/// Parses a single expression (used by tests and tooling).
pub fn parse_expr(source: &str) -> Result<Expr, ExecError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof, "end of expression")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn error_here(&self, expected: &str) -> ExecError {
        ExecError::at(ErrorKind::ParseError, self.span(), format!("expected {expected}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<Span, ExecError> {
        if self.peek() == tok {
            Ok(self.advance().span)
        } else {
            Err(self.error_here(what))
        }
    }

    fn string(&mut self, what: &str) -> Result<String, ExecError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error_here(what)),
        }
    }

    fn statement(&mut self) -> Result<Statement, ExecError> {
        let span = self.span();
        if self.is_keyword("feature") {
            self.advance();
            self.feature(span)
        } else if self.is_keyword("drop") {
            self.advance();
            let name = self.string("column name string after `drop`")?;
            let reason = if self.is_keyword("reason") {
                self.advance();
                Some(self.string("reason string")?)
            } else {
                None
            };
            Ok(Statement::DropColumn { name, reason, span })
        } else {
            Err(self.error_here("`feature` or `drop`"))
        }
    }

    fn feature(&mut self, span: Span) -> Result<Statement, ExecError> {
        let name = self.string("feature name string after `feature`")?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut usefulness: Option<String> = None;
        let mut expr: Option<Expr> = None;
        loop {
            let field_span = self.span();
            if self.is_keyword("usefulness") {
                if usefulness.is_some() {
                    return Err(ExecError::at(ErrorKind::ParseError, field_span, "duplicate `usefulness` field"));
                }
                self.advance();
                self.expect(&Tok::Colon, "`:`")?;
                let text = self.string("usefulness string")?;
                if text.trim().is_empty() {
                    return Err(ExecError::at(ErrorKind::ParseError, field_span, "usefulness must not be empty"));
                }
                usefulness = Some(text);
            } else if self.is_keyword("expr") {
                if expr.is_some() {
                    return Err(ExecError::at(ErrorKind::ParseError, field_span, "duplicate `expr` field"));
                }
                self.advance();
                self.expect(&Tok::Colon, "`:`")?;
                expr = Some(self.expr()?);
            } else if self.peek() == &Tok::RBrace {
                self.advance();
                break;
            } else {
                return Err(self.error_here("`usefulness`, `expr` or `}`"));
            }
            if self.peek() == &Tok::Comma {
                self.advance();
            }
        }
        let missing = |field: &str| {
            ExecError::at(ErrorKind::ParseError, span, format!("feature \"{name}\" is missing the `{field}` field"))
        };
        let usefulness = usefulness.ok_or_else(|| missing("usefulness"))?;
        let expr = expr.ok_or_else(|| missing("expr"))?;
        Ok(Statement::FeatureDef { name, usefulness, expr, span })
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ExecError> {
        self.binary_level(1)
    }

    /// Left-associative levels `or` (1), `and` (2); `not` (3); comparison
    /// (4, non-associative); additive (5); multiplicative (6).
    fn binary_level(&mut self, level: u8) -> Result<Expr, ExecError> {
        match level {
            3 => {
                if self.is_keyword("not") {
                    let span = self.advance().span;
                    let operand = self.binary_level(3)?;
                    return Ok(Expr::new(ExprKind::Unary(UnaryOp::Not, Box::new(operand)), span));
                }
                self.binary_level(4)
            }
            4 => {
                let lhs = self.binary_level(5)?;
                if let Some(op) = self.binary_op(4) {
                    let span = self.advance().span;
                    let rhs = self.binary_level(5)?;
                    if self.binary_op(4).is_some() {
                        return Err(ExecError::at(
                            ErrorKind::ParseError,
                            self.span(),
                            "comparisons cannot be chained; add parentheses",
                        ));
                    }
                    return Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span));
                }
                Ok(lhs)
            }
            7 => self.unary(),
            _ => {
                let mut lhs = self.binary_level(level + 1)?;
                while let Some(op) = self.binary_op(level) {
                    let span = self.advance().span;
                    let rhs = self.binary_level(level + 1)?;
                    lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
                }
                Ok(lhs)
            }
        }
    }

    fn binary_op(&self, level: u8) -> Option<BinaryOp> {
        let op = match self.peek() {
            Tok::Ident(s) if s == "or" => BinaryOp::Or,
            Tok::Ident(s) if s == "and" => BinaryOp::And,
            Tok::EqEq => BinaryOp::Eq,
            Tok::NotEq => BinaryOp::Ne,
            Tok::Lt => BinaryOp::Lt,
            Tok::Le => BinaryOp::Le,
            Tok::Gt => BinaryOp::Gt,
            Tok::Ge => BinaryOp::Ge,
            Tok::Plus => BinaryOp::Add,
            Tok::Minus => BinaryOp::Sub,
            Tok::Star => BinaryOp::Mul,
            Tok::Slash => BinaryOp::Div,
            _ => return None,
        };
        (op.precedence() == level).then_some(op)
    }

    fn unary(&mut self) -> Result<Expr, ExecError> {
        if self.peek() == &Tok::Minus {
            let span = self.advance().span;
            let operand = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnaryOp::Neg, Box::new(operand)), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExecError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(v) => {
                self.advance();
                Ok(Expr::new(ExprKind::Number(v), span))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::new(ExprKind::Text(s), span))
            }
            Tok::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.advance();
                let items = self.delimited(&Tok::RBracket, "`,` or `]`")?;
                Ok(Expr::new(ExprKind::List(items), span))
            }
            Tok::Ident(name) => match name.as_str() {
                "true" | "false" => {
                    self.advance();
                    Ok(Expr::new(ExprKind::Bool(name == "true"), span))
                }
                "and" | "or" | "not" | "feature" | "drop" | "usefulness" | "expr" | "reason" => {
                    Err(self.error_here("expression"))
                }
                _ => {
                    self.advance();
                    if self.peek() != &Tok::LParen {
                        return Err(ExecError::at(
                            ErrorKind::ParseError,
                            span,
                            format!("unexpected identifier `{name}`; reference columns as col(\"{name}\")"),
                        ));
                    }
                    self.advance();
                    if name == "col" {
                        let col = self.string("column name string inside col(...)")?;
                        self.expect(&Tok::RParen, "`)`")?;
                        return Ok(Expr::new(ExprKind::Column(col), span));
                    }
                    let args = self.delimited(&Tok::RParen, "`,` or `)`")?;
                    Ok(Expr::new(ExprKind::Call(name, args), span))
                }
            },
            _ => Err(self.error_here("expression")),
        }
    }

    fn delimited(&mut self, close: &Tok, what: &str) -> Result<Vec<Expr>, ExecError> {
        let mut items = Vec::new();
        if self.peek() == close {
            self.advance();
            return Ok(items);
        }
        loop {
            items.push(self.expr()?);
            if self.peek() == &Tok::Comma {
                self.advance();
            } else if self.peek() == close {
                self.advance();
                return Ok(items);
            } else {
                return Err(self.error_here(what));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_feature() {
        let s = parse(r#"feature "ratio" { usefulness: "u" expr: col("calc") / col("urea") }"#).unwrap();
        assert_eq!(s.statements.len(), 1);
        let Statement::FeatureDef { name, expr, .. } = &s.statements[0] else { panic!() };
        assert_eq!(name, "ratio");
        assert!(matches!(&expr.kind, ExprKind::Binary(BinaryOp::Div, a, b)
            if a.kind == ExprKind::Column("calc".into()) && b.kind == ExprKind::Column("urea".into())));
    }

    #[test]
    fn empty_program() {
        assert!(parse("").unwrap().statements.is_empty());
        assert!(parse("  # only a comment\n").unwrap().statements.is_empty());
    }

    #[test]
    fn missing_expression_is_reported_at_the_gap() {
        let err = parse(r#"feature "x" { expr: }"#).unwrap_err();
        assert_eq!(err.kind, ErrorKind::ParseError);
        assert_eq!(err.location, Some(Span { line: 1, column: 21 }));
        assert_eq!(err.to_string(), "ParseError at line 1, column 21: expected expression, found `}`");
    }

    #[test]
    fn precedence() {
        let e = parse_expr("1 + 2 * 3 == 7 and not true or false").unwrap();
        let ExprKind::Binary(BinaryOp::Or, lhs, _) = &e.kind else { panic!("{e:?}") };
        let ExprKind::Binary(BinaryOp::And, cmp, not) = &lhs.kind else { panic!() };
        assert!(matches!(not.kind, ExprKind::Unary(UnaryOp::Not, _)));
        let ExprKind::Binary(BinaryOp::Eq, sum, _) = &cmp.kind else { panic!() };
        let ExprKind::Binary(BinaryOp::Add, _, prod) = &sum.kind else { panic!() };
        assert!(matches!(prod.kind, ExprKind::Binary(BinaryOp::Mul, _, _)));
    }

    #[test]
    fn drop_and_lists() {
        let s = parse(
            "drop \"left-weight\" reason \"captured by moment\"\n\
             feature \"g\" { usefulness: \"u\", expr: bin(col(\"Age\"), [0, 12], [\"Child\"]) }\n\
             drop \"x\"",
        )
        .unwrap();
        assert_eq!(s.statements.len(), 3);
        assert!(matches!(&s.statements[2], Statement::DropColumn { reason: None, .. }));
    }

    #[test]
    fn parse_errors() {
        let cases = [
            ("feature x", "expected feature name string after `feature`, found `x`"),
            ("feature \"a\" { usefulness: \"\" expr: 1 }", "usefulness must not be empty"),
            ("feature \"a\" { expr: 1 }", "feature \"a\" is missing the `usefulness` field"),
            (
                "feature \"a\" { usefulness: \"u\" expr: foo }",
                "unexpected identifier `foo`; reference columns as col(\"foo\")",
            ),
            ("feature \"a\" { usefulness: \"u\" expr: 1 < 2 < 3 }", "comparisons cannot be chained; add parentheses"),
            ("select", "expected `feature` or `drop`, found `select`"),
            (
                "feature \"a\" { usefulness: \"u\" expr: col(1) }",
                "expected column name string inside col(...), found number 1",
            ),
        ];
        for (src, msg) in cases {
            let err = parse(src).unwrap_err();
            assert_eq!(err.kind, ErrorKind::ParseError, "{src}");
            assert_eq!(err.message, msg, "{src}");
        }
    }
}
