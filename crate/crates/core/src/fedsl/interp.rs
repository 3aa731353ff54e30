//! Column-at-a-time interpreter.
//!
//! Every node is evaluated over all rows before its parent, producing a value
//! vector plus validity mask. All subexpressions are evaluated eagerly
//! (including both branches of `if_else`), so `as_int` fails whenever any row
//! reaching it is missing. When several rows fail, the lowest row wins, then
//! the earliest node in post-order.

use std::sync::Arc;

use super::ast::Span;
use super::error::{ErrorKind, ExecError};
use super::validate::{validate, ArithOp, CmpOp, Func, Literal, LogicOp, TExpr, TNode, TypedScript, TypedStatement};
use crate::par::map_rows;
use crate::tabular::{Column, ColumnData, Dtype, Table};

#[derive(Clone, Debug)]
enum Vector {
    Num(Vec<f64>, Vec<bool>),
    Bool(Vec<bool>, Vec<bool>),
    /// Codes into a shared dictionary.
    Cat(Vec<u32>, Arc<Vec<String>>, Vec<bool>),
    Text(Vec<String>, Vec<bool>),
}

impl Vector {
    fn valid(&self) -> &[bool] {
        match self {
            Vector::Num(_, v) | Vector::Bool(_, v) | Vector::Cat(_, _, v) | Vector::Text(_, v) => v,
        }
    }

    fn str_at(&self, i: usize) -> &str {
        match self {
            Vector::Cat(c, d, _) => &d[c[i] as usize],
            Vector::Text(s, _) => &s[i],
            _ => unreachable!("validator guarantees a text operand"),
        }
    }

    fn into_num(self) -> (Vec<f64>, Vec<bool>) {
        match self {
            Vector::Num(v, m) => (v, m),
            _ => unreachable!("validator guarantees a number operand"),
        }
    }

    fn into_bool(self) -> (Vec<bool>, Vec<bool>) {
        match self {
            Vector::Bool(v, m) => (v, m),
            _ => unreachable!("validator guarantees a boolean operand"),
        }
    }
}

fn and_masks(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

/// Marks non-finite results missing and zeroes every missing slot.
fn finite(mut vals: Vec<f64>, mut valid: Vec<bool>) -> Vector {
    for (v, ok) in vals.iter_mut().zip(valid.iter_mut()) {
        if !v.is_finite() {
            *ok = false;
        }
        if !*ok {
            *v = 0.0;
        }
    }
    Vector::Num(vals, valid)
}

#[derive(Clone, Copy)]
struct Failure {
    row: usize,
    id: usize,
    span: Span,
}

struct Eval<'t> {
    table: &'t Table,
    n: usize,
    failure: Option<Failure>,
}

/// Validates against the table's schema and evaluates.
pub fn execute(script: &super::FeatureScript, table: &Table) -> Result<Table, ExecError> {
    let typed = validate(script, &table.schema(), table.target())?;
    evaluate(&typed, table)
}

/// Applies a validated script to `table`, returning a new table. The input
/// is never modified and a failure leaves no partial result.
pub fn evaluate(typed: &TypedScript, table: &Table) -> Result<Table, ExecError> {
    if typed.input_schema != table.schema() || typed.target != table.target() {
        let revalidated = validate(&typed.script, &table.schema(), table.target())?;
        return evaluate(&revalidated, table);
    }
    let mut current = table.clone();
    for step in &typed.steps {
        match step {
            TypedStatement::Feature { name, expr, labels } => {
                let mut ev = Eval { table: &current, n: current.row_count(), failure: None };
                let v = ev.eval(expr);
                if let Some(f) = ev.failure {
                    return Err(as_int_error(name, f.row, f.span));
                }
                let column = to_column(name, expr.ty, v, labels.as_deref());
                current = current.with_column(column).map_err(|e| internal(e.to_string()))?;
            }
            TypedStatement::Drop { name } => {
                current = current.without_column(name).map_err(|e| internal(e.to_string()))?;
            }
        }
    }
    Ok(current)
}

pub(crate) fn as_int_error(feature: &str, row: usize, span: Span) -> ExecError {
    ExecError::at(
        ErrorKind::RuntimeError,
        span,
        format!("cannot convert missing value to integer (feature \"{feature}\", row {row})"),
    )
}

fn internal(msg: String) -> ExecError {
    ExecError::new(ErrorKind::RuntimeError, msg, None)
}

fn to_column(name: &str, ty: Dtype, v: Vector, labels: Option<&[String]>) -> Column {
    match (ty, v) {
        (Dtype::Number, Vector::Num(vals, valid)) => Column::new(name, ColumnData::Number(vals), valid),
        (Dtype::Boolean, Vector::Bool(vals, valid)) => Column::new(name, ColumnData::Boolean(vals), valid),
        (Dtype::Text, Vector::Text(vals, valid)) => Column::new(name, ColumnData::Text(vals), valid),
        (Dtype::Text, v @ Vector::Cat(..)) => {
            let vals = (0..v.valid().len()).map(|i| v.str_at(i).to_string()).collect();
            Column::new(name, ColumnData::Text(vals), v.valid().to_vec())
        }
        (Dtype::Category, v) => {
            let cells: Vec<Option<&str>> = (0..v.valid().len()).map(|i| v.valid()[i].then(|| v.str_at(i))).collect();
            return match labels {
                Some(l) => Column::category_with_labels(name, &cells, l.to_vec()).expect("bin labels cover outputs"),
                None => Column::category(name, &cells),
            };
        }
        (ty, v) => unreachable!("type {ty} does not match vector {v:?}"),
    }
    .expect("vector lengths agree")
}

/// Parses a decimal number the way CSV cells are read.
pub(crate) fn parse_decimal(s: &str) -> Option<f64> {
    let t = s.trim();
    if t.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E') {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn first_digit_run(s: &str) -> Option<f64> {
    let start = s.find(|c: char| c.is_ascii_digit())?;
    let rest = &s[start..];
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    rest[..end].parse::<f64>().ok().filter(|v| v.is_finite())
}

pub(crate) fn number_label(v: f64) -> String {
    format!("{v}")
}

fn resolve_index(index: i64, len: usize) -> Option<usize> {
    let i = if index < 0 { len as i64 + index } else { index };
    (0..len as i64).contains(&i).then_some(i as usize)
}

pub(crate) fn split_part(s: &str, sep: &str, index: i64) -> Option<String> {
    let parts: Vec<&str> = s.split(sep).collect();
    resolve_index(index, parts.len()).map(|i| parts[i].to_string())
}

pub(crate) fn char_at(s: &str, index: i64) -> Option<String> {
    let chars: Vec<char> = s.chars().collect();
    resolve_index(index, chars.len()).map(|i| chars[i].to_string())
}

pub(crate) fn bin_index(x: f64, edges: &[f64]) -> Option<usize> {
    if x <= edges[0] || x > edges[edges.len() - 1] {
        return None;
    }
    edges.windows(2).position(|w| w[0] < x && x <= w[1])
}

impl Eval<'_> {
    fn record_failure(&mut self, row: usize, e: &TExpr) {
        let better = match self.failure {
            None => true,
            Some(f) => (row, e.id) < (f.row, f.id),
        };
        if better {
            self.failure = Some(Failure { row, id: e.id, span: e.span });
        }
    }

    fn eval(&mut self, e: &TExpr) -> Vector {
        let n = self.n;
        match &e.node {
            TNode::Column(name) => {
                let c = self.table.column(name).expect("validated column");
                let valid = c.validity().to_vec();
                match c.data() {
                    ColumnData::Number(v) => Vector::Num(v.clone(), valid),
                    ColumnData::Boolean(v) => Vector::Bool(v.clone(), valid),
                    ColumnData::Category { codes, labels } => {
                        Vector::Cat(codes.clone(), Arc::new(labels.clone()), valid)
                    }
                    ColumnData::Text(v) => Vector::Text(v.clone(), valid),
                }
            }
            TNode::Literal(lit) => match lit {
                Literal::Number(x) => finite(vec![*x; n], vec![true; n]),
                Literal::Boolean(b) => Vector::Bool(vec![*b; n], vec![true; n]),
                Literal::Text(s) => Vector::Cat(vec![0; n], Arc::new(vec![s.clone()]), vec![true; n]),
            },
            TNode::Neg(inner) => {
                let (v, m) = self.eval(inner).into_num();
                finite(v.into_iter().map(|x| -x).collect(), m)
            }
            TNode::Not(inner) => {
                let (v, m) = self.eval(inner).into_bool();
                Vector::Bool(v.into_iter().map(|x| !x).collect(), m)
            }
            TNode::Arith(op, l, r) => {
                let (a, ma) = self.eval(l).into_num();
                let (b, mb) = self.eval(r).into_num();
                let mut valid = and_masks(&ma, &mb);
                let vals: Vec<f64> = match op {
                    ArithOp::Add => map_rows(n, |i| a[i] + b[i]),
                    ArithOp::Sub => map_rows(n, |i| a[i] - b[i]),
                    ArithOp::Mul => map_rows(n, |i| a[i] * b[i]),
                    ArithOp::Div => {
                        for (ok, d) in valid.iter_mut().zip(&b) {
                            if *d == 0.0 {
                                *ok = false;
                            }
                        }
                        map_rows(n, |i| a[i] / b[i])
                    }
                };
                finite(vals, valid)
            }
            TNode::Compare(op, l, r) => {
                let lv = self.eval(l);
                let rv = self.eval(r);
                let valid = and_masks(lv.valid(), rv.valid());
                let vals: Vec<bool> = match (&lv, &rv) {
                    (Vector::Num(a, _), Vector::Num(b, _)) => map_rows(n, |i| match op {
                        CmpOp::Eq => a[i] == b[i],
                        CmpOp::Ne => a[i] != b[i],
                        CmpOp::Lt => a[i] < b[i],
                        CmpOp::Le => a[i] <= b[i],
                        CmpOp::Gt => a[i] > b[i],
                        CmpOp::Ge => a[i] >= b[i],
                    }),
                    (Vector::Bool(a, _), Vector::Bool(b, _)) => {
                        map_rows(n, |i| if *op == CmpOp::Eq { a[i] == b[i] } else { a[i] != b[i] })
                    }
                    _ => map_rows(n, |i| (lv.str_at(i) == rv.str_at(i)) == (*op == CmpOp::Eq)),
                };
                Vector::Bool(vals, valid)
            }
            TNode::Logic(op, l, r) => {
                let (a, ma) = self.eval(l).into_bool();
                let (b, mb) = self.eval(r).into_bool();
                let vals = match op {
                    LogicOp::And => map_rows(n, |i| a[i] && b[i]),
                    LogicOp::Or => map_rows(n, |i| a[i] || b[i]),
                };
                Vector::Bool(vals, and_masks(&ma, &mb))
            }
            TNode::Call(func, args) => self.call(e, func, args),
        }
    }

    fn call(&mut self, e: &TExpr, func: &Func, args: &[TExpr]) -> Vector {
        let n = self.n;
        match func {
            Func::IfElse => {
                let (c, mc) = self.eval(&args[0]).into_bool();
                let a = self.eval(&args[1]);
                let b = self.eval(&args[2]);
                let pick = |i: usize| c[i];
                let valid: Vec<bool> =
                    (0..n).map(|i| mc[i] && if pick(i) { a.valid()[i] } else { b.valid()[i] }).collect();
                match (a, b) {
                    (Vector::Num(x, _), Vector::Num(y, _)) => {
                        finite(map_rows(n, |i| if pick(i) { x[i] } else { y[i] }), valid)
                    }
                    (Vector::Bool(x, _), Vector::Bool(y, _)) => {
                        Vector::Bool(map_rows(n, |i| if pick(i) { x[i] } else { y[i] }), valid)
                    }
                    (a, b) => Vector::Text(
                        map_rows(n, |i| if pick(i) { a.str_at(i) } else { b.str_at(i) }.to_string()),
                        valid,
                    ),
                }
            }
            Func::Bin { edges, labels } => {
                let (x, mx) = self.eval(&args[0]).into_num();
                let idx: Vec<Option<usize>> = map_rows(n, |i| if mx[i] { bin_index(x[i], edges) } else { None });
                let valid = idx.iter().map(Option::is_some).collect();
                let codes = idx.iter().map(|i| i.unwrap_or(0) as u32).collect();
                Vector::Cat(codes, Arc::new(labels.clone()), valid)
            }
            Func::StrSplit { .. } | Func::StrChar { .. } => {
                let s = self.eval(&args[0]);
                let f = |x: &str| match func {
                    Func::StrSplit { sep, index } => split_part(x, sep, *index),
                    Func::StrChar { index } => char_at(x, *index),
                    _ => unreachable!(),
                };
                let out: Vec<Option<String>> = match &s {
                    // Category inputs: compute once per label.
                    Vector::Cat(codes, dict, m) => {
                        let per_label: Vec<Option<String>> = dict.iter().map(|l| f(l)).collect();
                        (0..n).map(|i| if m[i] { per_label[codes[i] as usize].clone() } else { None }).collect()
                    }
                    _ => map_rows(n, |i| if s.valid()[i] { f(s.str_at(i)) } else { None }),
                };
                let valid = out.iter().map(Option::is_some).collect();
                Vector::Text(out.into_iter().map(Option::unwrap_or_default).collect(), valid)
            }
            Func::StrExtractInt | Func::AsNumber => {
                let s = self.eval(&args[0]);
                let parsed: Vec<Option<f64>> = match (&s, func) {
                    (Vector::Bool(v, m), _) => (0..n).map(|i| m[i].then(|| if v[i] { 1.0 } else { 0.0 })).collect(),
                    (_, Func::StrExtractInt) => {
                        map_rows(n, |i| if s.valid()[i] { first_digit_run(s.str_at(i)) } else { None })
                    }
                    _ => map_rows(n, |i| if s.valid()[i] { parse_decimal(s.str_at(i)) } else { None }),
                };
                let valid = parsed.iter().map(Option::is_some).collect();
                finite(parsed.into_iter().map(|v| v.unwrap_or(0.0)).collect(), valid)
            }
            Func::StrEndsWith(pat) | Func::StrContains(pat) => {
                let s = self.eval(&args[0]);
                let ends = matches!(func, Func::StrEndsWith(_));
                let vals = map_rows(n, |i| {
                    s.valid()[i]
                        && if ends { s.str_at(i).ends_with(pat.as_str()) } else { s.str_at(i).contains(pat.as_str()) }
                });
                Vector::Bool(vals, s.valid().to_vec())
            }
            Func::FillMissing(lit) => {
                let x = self.eval(&args[0]);
                let all = vec![true; n];
                match (x, lit) {
                    (Vector::Num(mut v, m), Literal::Number(f)) => {
                        for (val, ok) in v.iter_mut().zip(&m) {
                            if !*ok {
                                *val = *f;
                            }
                        }
                        finite(v, all)
                    }
                    (Vector::Bool(mut v, m), Literal::Boolean(b)) => {
                        for (val, ok) in v.iter_mut().zip(&m) {
                            if !*ok {
                                *val = *b;
                            }
                        }
                        Vector::Bool(v, all)
                    }
                    (Vector::Cat(mut codes, dict, m), Literal::Text(s)) => {
                        let mut dict = (*dict).clone();
                        let code = match dict.iter().position(|l| l == s) {
                            Some(c) => c,
                            None => {
                                dict.push(s.clone());
                                dict.len() - 1
                            }
                        } as u32;
                        for (c, ok) in codes.iter_mut().zip(&m) {
                            if !*ok {
                                *c = code;
                            }
                        }
                        Vector::Cat(codes, Arc::new(dict), all)
                    }
                    (Vector::Text(mut v, m), Literal::Text(s)) => {
                        for (val, ok) in v.iter_mut().zip(&m) {
                            if !*ok {
                                *val = s.clone();
                            }
                        }
                        Vector::Text(v, all)
                    }
                    _ => unreachable!("validator matched literal and operand types"),
                }
            }
            Func::IsMissing => {
                let x = self.eval(&args[0]);
                Vector::Bool(x.valid().iter().map(|v| !v).collect(), vec![true; n])
            }
            Func::AsInt => {
                let (v, m) = self.eval(&args[0]).into_num();
                if let Some(row) = m.iter().position(|ok| !ok) {
                    self.record_failure(row, e);
                }
                finite(map_rows(n, |i| v[i].trunc()), m)
            }
            Func::AsCategory => {
                let x = self.eval(&args[0]);
                match x {
                    Vector::Num(v, m) => Vector::Text(v.iter().map(|x| number_label(*x)).collect(), m),
                    Vector::Bool(v, m) => Vector::Text(v.iter().map(|b| b.to_string()).collect(), m),
                    other => other,
                }
            }
            Func::Abs | Func::Log => {
                let (v, mut m) = self.eval(&args[0]).into_num();
                let vals = if matches!(func, Func::Abs) {
                    map_rows(n, |i| v[i].abs())
                } else {
                    for (ok, x) in m.iter_mut().zip(&v) {
                        if *x <= 0.0 {
                            *ok = false;
                        }
                    }
                    map_rows(n, |i| v[i].ln())
                };
                finite(vals, m)
            }
            Func::Min2 | Func::Max2 => {
                let (a, ma) = self.eval(&args[0]).into_num();
                let (b, mb) = self.eval(&args[1]).into_num();
                let min = matches!(func, Func::Min2);
                finite(map_rows(n, |i| if min { a[i].min(b[i]) } else { a[i].max(b[i]) }), and_masks(&ma, &mb))
            }
        }
    }
}
