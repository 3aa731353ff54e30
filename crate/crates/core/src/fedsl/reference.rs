//! Row-at-a-time interpreter, kept deliberately naive. Tests compare it
//! against the column interpreter on generated scripts and tables.

use std::collections::BTreeSet;

use super::error::ExecError;
use super::interp::as_int_error;
use super::validate::{validate, ArithOp, CmpOp, Func, Literal, LogicOp, TExpr, TNode, TypedStatement};
use super::FeatureScript;
use crate::tabular::{CellRef, Column, Dtype, Table};

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Missing,
    Num(f64),
    Bool(bool),
    Str(String),
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::Num(v)
    } else {
        Value::Missing
    }
}

/// Validates and evaluates `script` one row at a time.
pub fn reference_evaluate(script: &FeatureScript, table: &Table) -> Result<Table, ExecError> {
    let typed = validate(script, &table.schema(), table.target())?;
    let mut current = table.clone();
    for step in &typed.steps {
        match step {
            TypedStatement::Feature { name, expr, labels } => {
                let mut values = Vec::with_capacity(current.row_count());
                for row in 0..current.row_count() {
                    let mut fail = None;
                    let v = eval(expr, &current, row, &mut fail);
                    if let Some((_, span)) = fail {
                        return Err(as_int_error(name, row, span));
                    }
                    values.push(v);
                }
                let col = build(name, expr.ty, values, labels.as_deref());
                current = current.with_column(col).expect("validated name");
            }
            TypedStatement::Drop { name } => {
                current = current.without_column(name).expect("validated drop");
            }
        }
    }
    Ok(current)
}

fn build(name: &str, ty: Dtype, values: Vec<Value>, labels: Option<&[String]>) -> Column {
    match ty {
        Dtype::Number => Column::number(
            name,
            values.into_iter().map(|v| if let Value::Num(x) = v { Some(x) } else { None }).collect(),
        ),
        Dtype::Boolean => Column::boolean(
            name,
            values.into_iter().map(|v| if let Value::Bool(b) = v { Some(b) } else { None }).collect(),
        ),
        Dtype::Text => {
            Column::text(name, values.into_iter().map(|v| if let Value::Str(s) = v { Some(s) } else { None }).collect())
        }
        Dtype::Category => {
            let cells: Vec<Option<String>> =
                values.into_iter().map(|v| if let Value::Str(s) = v { Some(s) } else { None }).collect();
            let dict = match labels {
                Some(l) => l.to_vec(),
                None => cells.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect(),
            };
            Column::category_with_labels(name, &cells, dict).expect("dictionary covers values")
        }
    }
}

fn cell(table: &Table, name: &str, row: usize) -> Value {
    match table.column(name).expect("validated column").cell(row) {
        CellRef::Missing => Value::Missing,
        CellRef::Number(x) => Value::Num(x),
        CellRef::Boolean(b) => Value::Bool(b),
        CellRef::Category(s) | CellRef::Text(s) => Value::Str(s.to_string()),
    }
}

fn index(i: i64, len: usize) -> Option<usize> {
    let len = len as i64;
    let j = if i < 0 { i + len } else { i };
    if j >= 0 && j < len {
        Some(j as usize)
    } else {
        None
    }
}

fn eval(e: &TExpr, t: &Table, row: usize, fail: &mut Option<(usize, super::ast::Span)>) -> Value {
    use Value::*;
    match &e.node {
        TNode::Column(name) => cell(t, name, row),
        TNode::Literal(Literal::Number(x)) => num(*x),
        TNode::Literal(Literal::Boolean(b)) => Bool(*b),
        TNode::Literal(Literal::Text(s)) => Str(s.clone()),
        TNode::Neg(a) => match eval(a, t, row, fail) {
            Num(x) => num(-x),
            _ => Missing,
        },
        TNode::Not(a) => match eval(a, t, row, fail) {
            Bool(b) => Bool(!b),
            _ => Missing,
        },
        TNode::Arith(op, l, r) => {
            let (a, b) = (eval(l, t, row, fail), eval(r, t, row, fail));
            let (Num(a), Num(b)) = (a, b) else { return Missing };
            match op {
                ArithOp::Add => num(a + b),
                ArithOp::Sub => num(a - b),
                ArithOp::Mul => num(a * b),
                ArithOp::Div if b == 0.0 => Missing,
                ArithOp::Div => num(a / b),
            }
        }
        TNode::Compare(op, l, r) => {
            let (a, b) = (eval(l, t, row, fail), eval(r, t, row, fail));
            match (a, b) {
                (Missing, _) | (_, Missing) => Missing,
                (Num(a), Num(b)) => Bool(match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                }),
                (a, b) => Bool((a == b) == (*op == CmpOp::Eq)),
            }
        }
        TNode::Logic(op, l, r) => {
            let (a, b) = (eval(l, t, row, fail), eval(r, t, row, fail));
            match (a, b) {
                (Bool(a), Bool(b)) => Bool(if *op == LogicOp::And { a && b } else { a || b }),
                _ => Missing,
            }
        }
        TNode::Call(func, args) => {
            // Evaluate every argument first, left to right.
            let vals: Vec<Value> = args.iter().map(|a| eval(a, t, row, fail)).collect();
            let a = vals[0].clone();
            match func {
                Func::IfElse => match a {
                    Bool(true) => vals[1].clone(),
                    Bool(false) => vals[2].clone(),
                    _ => Missing,
                },
                Func::Bin { edges, labels } => match a {
                    Num(x) => {
                        for k in 0..labels.len() {
                            if edges[k] < x && x <= edges[k + 1] {
                                return Str(labels[k].clone());
                            }
                        }
                        Missing
                    }
                    _ => Missing,
                },
                Func::StrSplit { sep, index: i } => match a {
                    Str(s) => {
                        let parts: Vec<&str> = s.split(sep.as_str()).collect();
                        index(*i, parts.len()).map_or(Missing, |j| Str(parts[j].to_string()))
                    }
                    _ => Missing,
                },
                Func::StrChar { index: i } => match a {
                    Str(s) => {
                        let chars: Vec<char> = s.chars().collect();
                        index(*i, chars.len()).map_or(Missing, |j| Str(chars[j].to_string()))
                    }
                    _ => Missing,
                },
                Func::StrExtractInt => match a {
                    Str(s) => {
                        let digits: String =
                            s.chars().skip_while(|c| !c.is_ascii_digit()).take_while(|c| c.is_ascii_digit()).collect();
                        if digits.is_empty() {
                            Missing
                        } else {
                            digits.parse::<f64>().map_or(Missing, num)
                        }
                    }
                    _ => Missing,
                },
                Func::StrEndsWith(p) => match a {
                    Str(s) => Bool(s.ends_with(p.as_str())),
                    _ => Missing,
                },
                Func::StrContains(p) => match a {
                    Str(s) => Bool(s.contains(p.as_str())),
                    _ => Missing,
                },
                Func::FillMissing(lit) => match a {
                    Missing => match lit {
                        Literal::Number(x) => num(*x),
                        Literal::Boolean(b) => Bool(*b),
                        Literal::Text(s) => Str(s.clone()),
                    },
                    v => v,
                },
                Func::IsMissing => Bool(a == Missing),
                Func::AsNumber => match a {
                    Bool(b) => Num(if b { 1.0 } else { 0.0 }),
                    Str(s) => {
                        let s = s.trim();
                        let has_alpha = s.chars().any(|c| c.is_ascii_alphabetic() && !matches!(c, 'e' | 'E'));
                        if has_alpha {
                            Missing
                        } else {
                            s.parse::<f64>().map_or(Missing, num)
                        }
                    }
                    _ => Missing,
                },
                Func::AsInt => match a {
                    Num(x) => num(x.trunc()),
                    _ => {
                        if fail.is_none_or(|(id, _)| e.id < id) {
                            *fail = Some((e.id, e.span));
                        }
                        Missing
                    }
                },
                Func::AsCategory => match a {
                    Num(x) => Str(format!("{x}")),
                    Bool(b) => Str(if b { "true" } else { "false" }.to_string()),
                    v => v,
                },
                Func::Abs => match a {
                    Num(x) => num(x.abs()),
                    _ => Missing,
                },
                Func::Log => match a {
                    Num(x) if x > 0.0 => num(x.ln()),
                    _ => Missing,
                },
                Func::Min2 | Func::Max2 => match (a, vals[1].clone()) {
                    (Num(x), Num(y)) => num(if matches!(func, Func::Min2) { x.min(y) } else { x.max(y) }),
                    _ => Missing,
                },
            }
        }
    }
}
