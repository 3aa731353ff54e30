//! Static checking: name resolution, the closed function whitelist and typing.

use super::ast::{BinaryOp, Expr, ExprKind, FeatureScript, Span, Statement, UnaryOp};
use super::error::{ErrorKind, ExecError};
use crate::tabular::Dtype;

/// Description of one whitelisted function, as shown to the model.
pub struct FunctionSig {
    pub name: &'static str,
    pub signature: &'static str,
    pub summary: &'static str,
}

/// The complete set of callable functions. Nothing else is reachable.
pub const FUNCTIONS: &[FunctionSig] = &[
    FunctionSig {
        name: "if_else",
        signature: "if_else(cond: boolean, then: T, else: T) -> T",
        summary: "pick `then` where cond is true, else `else`",
    },
    FunctionSig {
        name: "bin",
        signature: "bin(x: number, [e0, ..., ek], [\"l1\", ..., \"lk\"]) -> category",
        summary: "label of the interval (e[i-1], e[i]]; missing outside (e0, ek]",
    },
    FunctionSig {
        name: "str_split",
        signature: "str_split(s: text, \"sep\", index) -> text",
        summary: "part `index` of s split on sep; negative index counts from the end",
    },
    FunctionSig {
        name: "str_char",
        signature: "str_char(s: text, index) -> text",
        summary: "character at `index`; negative counts from the end",
    },
    FunctionSig {
        name: "str_extract_int",
        signature: "str_extract_int(s: text) -> number",
        summary: "first run of digits in s; missing if none",
    },
    FunctionSig {
        name: "str_endswith",
        signature: "str_endswith(s: text, \"suffix\") -> boolean",
        summary: "whether s ends with suffix",
    },
    FunctionSig {
        name: "str_contains",
        signature: "str_contains(s: text, \"needle\") -> boolean",
        summary: "whether s contains needle",
    },
    FunctionSig {
        name: "fill_missing",
        signature: "fill_missing(x: T, literal: T) -> T",
        summary: "replace missing cells with a literal",
    },
    FunctionSig { name: "is_missing", signature: "is_missing(x) -> boolean", summary: "true where x is missing" },
    FunctionSig {
        name: "as_number",
        signature: "as_number(x: text | category | boolean) -> number",
        summary: "parse text as a number (missing if unparseable); booleans become 0/1",
    },
    FunctionSig {
        name: "as_int",
        signature: "as_int(x: number) -> number",
        summary: "truncate toward zero; fails if any input cell is missing",
    },
    FunctionSig {
        name: "as_category",
        signature: "as_category(x) -> category",
        summary: "treat values as category labels",
    },
    FunctionSig { name: "abs", signature: "abs(x: number) -> number", summary: "absolute value" },
    FunctionSig {
        name: "log",
        signature: "log(x: number) -> number",
        summary: "natural logarithm; missing where x <= 0",
    },
    FunctionSig { name: "min2", signature: "min2(a: number, b: number) -> number", summary: "smaller of a and b" },
    FunctionSig { name: "max2", signature: "max2(a: number, b: number) -> number", summary: "larger of a and b" },
];

pub fn is_whitelisted(name: &str) -> bool {
    FUNCTIONS.iter().any(|f| f.name == name)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Number(f64),
    Boolean(bool),
    Text(String),
}

/// Resolved function with its literal arguments extracted.
#[derive(Clone, Debug, PartialEq)]
pub enum Func {
    IfElse,
    Bin { edges: Vec<f64>, labels: Vec<String> },
    StrSplit { sep: String, index: i64 },
    StrChar { index: i64 },
    StrExtractInt,
    StrEndsWith(String),
    StrContains(String),
    FillMissing(Literal),
    IsMissing,
    AsNumber,
    AsInt,
    AsCategory,
    Abs,
    Log,
    Min2,
    Max2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogicOp {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TNode {
    Column(String),
    Literal(Literal),
    Neg(Box<TExpr>),
    Not(Box<TExpr>),
    Arith(ArithOp, Box<TExpr>, Box<TExpr>),
    Compare(CmpOp, Box<TExpr>, Box<TExpr>),
    Logic(LogicOp, Box<TExpr>, Box<TExpr>),
    /// Only the non-literal arguments are kept in `args`.
    Call(Func, Vec<TExpr>),
}

/// Typed expression. `id` numbers nodes in post-order within a statement.
#[derive(Clone, Debug, PartialEq)]
pub struct TExpr {
    pub node: TNode,
    pub ty: Dtype,
    pub span: Span,
    pub id: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TypedStatement {
    Feature {
        name: String,
        expr: TExpr,
        /// Dictionary order for category outputs produced directly by `bin`.
        labels: Option<Vec<String>>,
    },
    Drop {
        name: String,
    },
}

/// A script checked against a concrete schema.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedScript {
    pub script: FeatureScript,
    pub input_schema: Vec<(String, Dtype)>,
    pub output_schema: Vec<(String, Dtype)>,
    pub target: String,
    pub steps: Vec<TypedStatement>,
}

fn type_name(t: Dtype) -> &'static str {
    t.as_str()
}

/// Checks `script` against the columns in `schema`. Features defined earlier
/// are visible to later statements; dropped columns are not.
pub fn validate(script: &FeatureScript, schema: &[(String, Dtype)], target: &str) -> Result<TypedScript, ExecError> {
    let mut scope: Vec<(String, Dtype)> = schema.to_vec();
    let mut steps = Vec::with_capacity(script.statements.len());
    for stmt in &script.statements {
        match stmt {
            Statement::FeatureDef { name, expr, span, .. } => {
                if scope.iter().any(|(n, _)| n == name) {
                    return Err(ExecError::at(
                        ErrorKind::DuplicateFeature,
                        *span,
                        format!("column \"{name}\" already exists"),
                    ));
                }
                let mut checker = Checker { scope: &scope, target, next_id: 0 };
                let texpr = checker.expr(expr)?;
                let labels = match &texpr.node {
                    TNode::Call(Func::Bin { labels, .. }, _) => Some(labels.clone()),
                    _ => None,
                };
                scope.push((name.clone(), texpr.ty));
                steps.push(TypedStatement::Feature { name: name.clone(), expr: texpr, labels });
            }
            Statement::DropColumn { name, span, .. } => {
                if name == target {
                    return Err(ExecError::at(
                        ErrorKind::TypeError,
                        *span,
                        format!("cannot drop the prediction target \"{name}\""),
                    ));
                }
                let Some(pos) = scope.iter().position(|(n, _)| n == name) else {
                    return Err(ExecError::at(
                        ErrorKind::UnknownColumn,
                        *span,
                        format!("cannot drop unknown column \"{name}\""),
                    ));
                };
                scope.remove(pos);
                steps.push(TypedStatement::Drop { name: name.clone() });
            }
        }
    }
    Ok(TypedScript {
        script: script.clone(),
        input_schema: schema.to_vec(),
        output_schema: scope,
        target: target.to_string(),
        steps,
    })
}

struct Checker<'a> {
    scope: &'a [(String, Dtype)],
    target: &'a str,
    next_id: usize,
}

fn is_stringy(t: Dtype) -> bool {
    matches!(t, Dtype::Text | Dtype::Category)
}

fn literal_number(e: &Expr) -> Option<f64> {
    match &e.kind {
        ExprKind::Number(v) => Some(*v),
        ExprKind::Unary(UnaryOp::Neg, inner) => literal_number(inner).map(|v| -v),
        _ => None,
    }
}

impl Checker<'_> {
    fn node(&mut self, node: TNode, ty: Dtype, span: Span) -> TExpr {
        let id = self.next_id;
        self.next_id += 1;
        TExpr { node, ty, span, id }
    }

    fn expr(&mut self, e: &Expr) -> Result<TExpr, ExecError> {
        match &e.kind {
            ExprKind::Column(name) => {
                if name == self.target {
                    return Err(ExecError::at(
                        ErrorKind::UnknownColumn,
                        e.span,
                        format!("column \"{name}\" is the prediction target and cannot be used as an input"),
                    ));
                }
                let ty = self.scope.iter().find(|(n, _)| n == name).map(|(_, t)| *t).ok_or_else(|| {
                    ExecError::at(ErrorKind::UnknownColumn, e.span, format!("unknown column \"{name}\""))
                })?;
                Ok(self.node(TNode::Column(name.clone()), ty, e.span))
            }
            ExprKind::Number(v) => Ok(self.node(TNode::Literal(Literal::Number(*v)), Dtype::Number, e.span)),
            ExprKind::Text(s) => Ok(self.node(TNode::Literal(Literal::Text(s.clone())), Dtype::Text, e.span)),
            ExprKind::Bool(b) => Ok(self.node(TNode::Literal(Literal::Boolean(*b)), Dtype::Boolean, e.span)),
            ExprKind::List(_) => {
                Err(ExecError::at(ErrorKind::TypeError, e.span, "list literals are only allowed as arguments of bin"))
            }
            ExprKind::Unary(op, operand) => {
                let inner = self.expr(operand)?;
                match op {
                    UnaryOp::Neg if inner.ty == Dtype::Number => {
                        Ok(self.node(TNode::Neg(Box::new(inner)), Dtype::Number, e.span))
                    }
                    UnaryOp::Not if inner.ty == Dtype::Boolean => {
                        Ok(self.node(TNode::Not(Box::new(inner)), Dtype::Boolean, e.span))
                    }
                    _ => {
                        let sym = if *op == UnaryOp::Neg { "-" } else { "not" };
                        Err(ExecError::at(
                            ErrorKind::TypeError,
                            e.span,
                            format!("operator '{sym}' cannot be applied to {}", type_name(inner.ty)),
                        ))
                    }
                }
            }
            ExprKind::Binary(op, lhs, rhs) => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                self.binary(*op, l, r, e.span)
            }
            ExprKind::Call(name, args) => self.call(name, args, e.span),
        }
    }

    fn binary(&mut self, op: BinaryOp, l: TExpr, r: TExpr, span: Span) -> Result<TExpr, ExecError> {
        use Dtype::*;
        let mismatch = |l: &TExpr, r: &TExpr| {
            ExecError::at(
                ErrorKind::TypeError,
                span,
                format!("operator '{}' cannot be applied to {} and {}", op.symbol(), type_name(l.ty), type_name(r.ty)),
            )
        };
        let (node, ty) = match op {
            BinaryOp::Add | BinaryOp::Sub | BinaryOp::Mul | BinaryOp::Div => {
                if l.ty != Number || r.ty != Number {
                    return Err(mismatch(&l, &r));
                }
                let a = match op {
                    BinaryOp::Add => ArithOp::Add,
                    BinaryOp::Sub => ArithOp::Sub,
                    BinaryOp::Mul => ArithOp::Mul,
                    _ => ArithOp::Div,
                };
                (TNode::Arith(a, Box::new(l), Box::new(r)), Number)
            }
            BinaryOp::Eq | BinaryOp::Ne => {
                let ok = l.ty == r.ty || (is_stringy(l.ty) && is_stringy(r.ty));
                if !ok {
                    return Err(mismatch(&l, &r));
                }
                let c = if op == BinaryOp::Eq { CmpOp::Eq } else { CmpOp::Ne };
                (TNode::Compare(c, Box::new(l), Box::new(r)), Boolean)
            }
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                if l.ty != Number || r.ty != Number {
                    return Err(mismatch(&l, &r));
                }
                let c = match op {
                    BinaryOp::Lt => CmpOp::Lt,
                    BinaryOp::Le => CmpOp::Le,
                    BinaryOp::Gt => CmpOp::Gt,
                    _ => CmpOp::Ge,
                };
                (TNode::Compare(c, Box::new(l), Box::new(r)), Boolean)
            }
            BinaryOp::And | BinaryOp::Or => {
                if l.ty != Boolean || r.ty != Boolean {
                    return Err(mismatch(&l, &r));
                }
                let g = if op == BinaryOp::And { LogicOp::And } else { LogicOp::Or };
                (TNode::Logic(g, Box::new(l), Box::new(r)), Boolean)
            }
        };
        Ok(self.node(node, ty, span))
    }

    fn call(&mut self, name: &str, args: &[Expr], span: Span) -> Result<TExpr, ExecError> {
        if !is_whitelisted(name) {
            let allowed: Vec<&str> = FUNCTIONS.iter().map(|f| f.name).collect();
            return Err(ExecError::at(
                ErrorKind::TypeError,
                span,
                format!("unknown function `{name}`; allowed functions are {}", allowed.join(", ")),
            ));
        }
        let arity = match name {
            "if_else" | "bin" => 3,
            "str_split" => 3,
            "str_char" | "str_endswith" | "str_contains" | "fill_missing" | "min2" | "max2" => 2,
            _ => 1,
        };
        if args.len() != arity {
            return Err(ExecError::at(
                ErrorKind::ArityError,
                span,
                format!(
                    "function `{name}` expects {arity} argument{}, got {}",
                    if arity == 1 { "" } else { "s" },
                    args.len()
                ),
            ));
        }
        let type_err = |msg: String| ExecError::at(ErrorKind::TypeError, span, msg);
        let arg_err = |pos: usize, expected: &str, found: Dtype| {
            type_err(format!("argument {pos} of `{name}` must be {expected}, found {}", type_name(found)))
        };
        let literal_int = |e: &Expr, pos: usize| -> Result<i64, ExecError> {
            match literal_number(e) {
                Some(v) if v.fract() == 0.0 && v.abs() < 1e15 => Ok(v as i64),
                _ => Err(type_err(format!("argument {pos} of `{name}` must be an integer literal"))),
            }
        };
        let literal_text = |e: &Expr, pos: usize| -> Result<String, ExecError> {
            match &e.kind {
                ExprKind::Text(s) => Ok(s.clone()),
                _ => Err(type_err(format!("argument {pos} of `{name}` must be a string literal"))),
            }
        };

        let (func, targs, ty) = match name {
            "if_else" => {
                let c = self.expr(&args[0])?;
                let a = self.expr(&args[1])?;
                let b = self.expr(&args[2])?;
                if c.ty != Dtype::Boolean {
                    return Err(arg_err(1, "boolean", c.ty));
                }
                let ty = if a.ty == b.ty {
                    a.ty
                } else if is_stringy(a.ty) && is_stringy(b.ty) {
                    Dtype::Category
                } else {
                    return Err(type_err(format!(
                        "branches of `if_else` have different types: {} and {}",
                        type_name(a.ty),
                        type_name(b.ty)
                    )));
                };
                (Func::IfElse, vec![c, a, b], ty)
            }
            "bin" => {
                let x = self.expr(&args[0])?;
                if x.ty != Dtype::Number {
                    return Err(arg_err(1, "number", x.ty));
                }
                let edges: Vec<f64> = match &args[1].kind {
                    ExprKind::List(items) => items
                        .iter()
                        .map(|i| literal_number(i).ok_or_else(|| type_err("bin edges must be number literals".into())))
                        .collect::<Result<_, _>>()?,
                    _ => return Err(type_err("argument 2 of `bin` must be a list of number literals".into())),
                };
                let labels: Vec<String> = match &args[2].kind {
                    ExprKind::List(items) => items
                        .iter()
                        .map(|i| match &i.kind {
                            ExprKind::Text(s) => Ok(s.clone()),
                            _ => Err(type_err("bin labels must be string literals".into())),
                        })
                        .collect::<Result<_, _>>()?,
                    _ => return Err(type_err("argument 3 of `bin` must be a list of string literals".into())),
                };
                if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(type_err("bin edges must contain at least 2 strictly increasing numbers".into()));
                }
                if labels.len() + 1 != edges.len() {
                    return Err(type_err(format!(
                        "bin needs {} labels for {} edges, got {}",
                        edges.len() - 1,
                        edges.len(),
                        labels.len()
                    )));
                }
                let mut sorted = labels.clone();
                sorted.sort();
                sorted.dedup();
                if sorted.len() != labels.len() {
                    return Err(type_err("bin labels must be distinct".into()));
                }
                (Func::Bin { edges, labels }, vec![x], Dtype::Category)
            }
            "str_split" | "str_char" | "str_extract_int" | "str_endswith" | "str_contains" => {
                let s = self.expr(&args[0])?;
                if !is_stringy(s.ty) {
                    return Err(arg_err(1, "text", s.ty));
                }
                let (func, ty) = match name {
                    "str_split" => {
                        let sep = literal_text(&args[1], 2)?;
                        if sep.is_empty() {
                            return Err(type_err("separator of `str_split` must not be empty".into()));
                        }
                        (Func::StrSplit { sep, index: literal_int(&args[2], 3)? }, Dtype::Text)
                    }
                    "str_char" => (Func::StrChar { index: literal_int(&args[1], 2)? }, Dtype::Text),
                    "str_extract_int" => (Func::StrExtractInt, Dtype::Number),
                    "str_endswith" => (Func::StrEndsWith(literal_text(&args[1], 2)?), Dtype::Boolean),
                    _ => (Func::StrContains(literal_text(&args[1], 2)?), Dtype::Boolean),
                };
                (func, vec![s], ty)
            }
            "fill_missing" => {
                let x = self.expr(&args[0])?;
                let lit = match (&args[1].kind, literal_number(&args[1])) {
                    (_, Some(v)) => Literal::Number(v),
                    (ExprKind::Bool(b), _) => Literal::Boolean(*b),
                    (ExprKind::Text(s), _) => Literal::Text(s.clone()),
                    _ => return Err(type_err("argument 2 of `fill_missing` must be a literal".into())),
                };
                let compatible = matches!(
                    (&lit, x.ty),
                    (Literal::Number(_), Dtype::Number)
                        | (Literal::Boolean(_), Dtype::Boolean)
                        | (Literal::Text(_), Dtype::Text | Dtype::Category)
                );
                if !compatible {
                    let lit_ty = match lit {
                        Literal::Number(_) => "number",
                        Literal::Boolean(_) => "boolean",
                        Literal::Text(_) => "text",
                    };
                    return Err(type_err(format!(
                        "`fill_missing` literal of type {lit_ty} does not match {}",
                        type_name(x.ty)
                    )));
                }
                let ty = x.ty;
                (Func::FillMissing(lit), vec![x], ty)
            }
            "is_missing" => (Func::IsMissing, vec![self.expr(&args[0])?], Dtype::Boolean),
            "as_category" => (Func::AsCategory, vec![self.expr(&args[0])?], Dtype::Category),
            "as_number" => {
                let x = self.expr(&args[0])?;
                if x.ty == Dtype::Number {
                    return Err(arg_err(1, "text, category or boolean", x.ty));
                }
                (Func::AsNumber, vec![x], Dtype::Number)
            }
            "as_int" | "abs" | "log" => {
                let x = self.expr(&args[0])?;
                if x.ty != Dtype::Number {
                    return Err(arg_err(1, "number", x.ty));
                }
                let f = match name {
                    "as_int" => Func::AsInt,
                    "abs" => Func::Abs,
                    _ => Func::Log,
                };
                (f, vec![x], Dtype::Number)
            }
            "min2" | "max2" => {
                let a = self.expr(&args[0])?;
                let b = self.expr(&args[1])?;
                if a.ty != Dtype::Number {
                    return Err(arg_err(1, "number", a.ty));
                }
                if b.ty != Dtype::Number {
                    return Err(arg_err(2, "number", b.ty));
                }
                (if name == "min2" { Func::Min2 } else { Func::Max2 }, vec![a, b], Dtype::Number)
            }
            _ => unreachable!("whitelist and dispatch disagree on `{name}`"),
        };
        Ok(self.node(TNode::Call(func, targs), ty, span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedsl::parser::parse;

    fn schema(cols: &[(&str, Dtype)]) -> Vec<(String, Dtype)> {
        cols.iter().map(|(n, t)| (n.to_string(), *t)).collect()
    }

    fn check(src: &str, cols: &[(&str, Dtype)]) -> Result<TypedScript, ExecError> {
        validate(&parse(src).unwrap(), &schema(cols), "y")
    }

    const BASE: &[(&str, Dtype)] = &[
        ("calc", Dtype::Number),
        ("urea", Dtype::Number),
        ("Cabin", Dtype::Text),
        ("Age", Dtype::Number),
        ("y", Dtype::Category),
    ];

    fn feature(src_expr: &str) -> String {
        format!("feature \"f\" {{ usefulness: \"u\" expr: {src_expr} }}")
    }

    #[test]
    fn ratio_is_number() {
        let t = check(&feature("col(\"calc\") / col(\"urea\")"), BASE).unwrap();
        let TypedStatement::Feature { expr, .. } = &t.steps[0] else { panic!() };
        assert_eq!(expr.ty, Dtype::Number);
        assert_eq!(t.output_schema.last().unwrap(), &("f".to_string(), Dtype::Number));
    }

    #[test]
    fn text_division_is_type_error() {
        let err = check(&feature("col(\"Cabin\") / 2"), BASE).unwrap_err();
        assert_eq!(err.kind, ErrorKind::TypeError);
        assert_eq!(err.message, "operator '/' cannot be applied to text and number");
    }

    #[test]
    fn drop_hides_column_from_later_statements() {
        let cols = &[("left-weight", Dtype::Number), ("left-distance", Dtype::Number), ("y", Dtype::Category)];
        let ok = "feature \"left_moment\" { usefulness: \"u\" expr: col(\"left-weight\") * col(\"left-distance\") }\n\
                  drop \"left-weight\" reason \"captured by left_moment\"";
        let t = check(ok, cols).unwrap();
        assert!(t.output_schema.iter().all(|(n, _)| n != "left-weight"));
        let bad = format!("{ok}\n{}", feature("col(\"left-weight\")"));
        let err = check(&bad, cols).unwrap_err();
        assert_eq!(err.kind, ErrorKind::UnknownColumn);
        assert_eq!(err.message, "unknown column \"left-weight\"");
    }

    #[test]
    fn later_statements_see_earlier_features() {
        let src =
            format!("{}\nfeature \"g\" {{ usefulness: \"u\" expr: col(\"f\") * 2 }}", feature("col(\"calc\") + 1"));
        assert!(check(&src, BASE).is_ok());
    }

    #[test]
    fn error_kinds() {
        let cases: &[(&str, ErrorKind, &str)] = &[
            ("col(\"nope\")", ErrorKind::UnknownColumn, "unknown column \"nope\""),
            ("abs(1, 2)", ErrorKind::ArityError, "function `abs` expects 1 argument, got 2"),
            ("bin(col(\"Age\"), [0, 1])", ErrorKind::ArityError, "function `bin` expects 3 arguments, got 2"),
            ("system(\"ls\")", ErrorKind::TypeError, "unknown function `system`; allowed functions are if_else, bin, str_split, str_char, str_extract_int, str_endswith, str_contains, fill_missing, is_missing, as_number, as_int, as_category, abs, log, min2, max2"),
            ("col(\"y\")", ErrorKind::UnknownColumn, "column \"y\" is the prediction target and cannot be used as an input"),
            ("true + true", ErrorKind::TypeError, "operator '+' cannot be applied to boolean and boolean"),
            ("bin(col(\"Age\"), [0, 5, 3], [\"a\", \"b\"])", ErrorKind::TypeError, "bin edges must contain at least 2 strictly increasing numbers"),
            ("bin(col(\"Age\"), [0, 5], [\"a\", \"b\"])", ErrorKind::TypeError, "bin needs 1 labels for 2 edges, got 2"),
            ("fill_missing(col(\"Age\"), \"x\")", ErrorKind::TypeError, "`fill_missing` literal of type text does not match number"),
            ("str_char(col(\"Cabin\"), 0.5)", ErrorKind::TypeError, "argument 2 of `str_char` must be an integer literal"),
            ("as_number(col(\"Age\"))", ErrorKind::TypeError, "argument 1 of `as_number` must be text, category or boolean, found number"),
            ("[1, 2]", ErrorKind::TypeError, "list literals are only allowed as arguments of bin"),
            ("if_else(true, 1, \"a\")", ErrorKind::TypeError, "branches of `if_else` have different types: number and text"),
            ("col(\"Cabin\") < \"a\"", ErrorKind::TypeError, "operator '<' cannot be applied to text and text"),
        ];
        for (src, kind, msg) in cases {
            let err = check(&feature(src), BASE).unwrap_err();
            assert_eq!((&err.kind, err.message.as_str()), (kind, *msg), "{src}");
        }
    }

    #[test]
    fn duplicates_and_target_drop() {
        let dup = format!("{}\n{}", feature("1"), feature("2"));
        assert_eq!(check(&dup, BASE).unwrap_err().kind, ErrorKind::DuplicateFeature);
        let shadow = "feature \"Age\" { usefulness: \"u\" expr: 1 }";
        assert_eq!(check(shadow, BASE).unwrap_err().message, "column \"Age\" already exists");
        let err = check("drop \"y\"", BASE).unwrap_err();
        assert_eq!(err.message, "cannot drop the prediction target \"y\"");
        assert_eq!(check("drop \"zz\"", BASE).unwrap_err().kind, ErrorKind::UnknownColumn);
    }

    #[test]
    fn category_text_mixing() {
        let cols = &[("c", Dtype::Category), ("t", Dtype::Text), ("y", Dtype::Category)];
        let t = check(&feature("if_else(col(\"c\") == \"x\", col(\"t\"), col(\"c\"))"), cols).unwrap();
        assert_eq!(t.output_schema.last().unwrap().1, Dtype::Category);
    }

    #[test]
    fn post_order_ids() {
        let t = check(&feature("abs(col(\"Age\")) + 1"), BASE).unwrap();
        let TypedStatement::Feature { expr, .. } = &t.steps[0] else { panic!() };
        assert_eq!(expr.id, 3);
        let TNode::Arith(_, l, r) = &expr.node else { panic!() };
        assert_eq!((l.id, r.id), (1, 2));
    }
}
