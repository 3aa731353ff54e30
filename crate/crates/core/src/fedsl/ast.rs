use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Precedence of `not`, between `and` and the comparisons.
pub const NOT_PRECEDENCE: u8 = 3;
/// Precedence of unary minus.
pub const NEG_PRECEDENCE: u8 = 7;

#[derive(Clone, Debug)]
pub enum ExprKind {
    Column(String),
    Number(f64),
    Text(String),
    Bool(bool),
    /// Bracketed literal list; only meaningful as a function argument.
    List(Vec<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
}

/// Expression node. Equality ignores source positions.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl PartialEq for ExprKind {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (self, other) {
            (Column(a), Column(b)) | (Text(a), Text(b)) => a == b,
            (Number(a), Number(b)) => a.to_bits() == b.to_bits(),
            (Bool(a), Bool(b)) => a == b,
            (List(a), List(b)) => a == b,
            (Unary(o1, a), Unary(o2, b)) => o1 == o2 && a == b,
            (Binary(o1, a1, b1), Binary(o2, a2, b2)) => o1 == o2 && a1 == a2 && b1 == b2,
            (Call(n1, a1), Call(n2, a2)) => n1 == n2 && a1 == a2,
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Statement {
    FeatureDef { name: String, usefulness: String, expr: Expr, span: Span },
    DropColumn { name: String, reason: Option<String>, span: Span },
}

impl Statement {
    pub fn span(&self) -> Span {
        match self {
            Statement::FeatureDef { span, .. } | Statement::DropColumn { span, .. } => *span,
        }
    }
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Statement::FeatureDef { name: n1, usefulness: u1, expr: e1, .. },
                Statement::FeatureDef { name: n2, usefulness: u2, expr: e2, .. },
            ) => n1 == n2 && u1 == u2 && e1 == e2,
            (
                Statement::DropColumn { name: n1, reason: r1, .. },
                Statement::DropColumn { name: n2, reason: r2, .. },
            ) => n1 == n2 && r1 == r2,
            _ => false,
        }
    }
}

/// A parsed program: feature definitions and column drops, in order.
#[derive(Clone, Debug, Default)]
pub struct FeatureScript {
    pub statements: Vec<Statement>,
    pub source_text: String,
}

impl FeatureScript {
    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Concatenates scripts in order (the running accepted program).
    pub fn concat<'a>(scripts: impl IntoIterator<Item = &'a FeatureScript>) -> FeatureScript {
        let mut out = FeatureScript::default();
        for s in scripts {
            out.statements.extend(s.statements.iter().cloned());
            if !s.source_text.is_empty() {
                if !out.source_text.is_empty() && !out.source_text.ends_with('\n') {
                    out.source_text.push('\n');
                }
                out.source_text.push_str(&s.source_text);
            }
        }
        out
    }
}

/// Structural equality; source text is not compared.
impl PartialEq for FeatureScript {
    fn eq(&self, other: &Self) -> bool {
        self.statements == other.statements
    }
}
