use std::fmt::Write;

use super::ast::{Expr, ExprKind, FeatureScript, Statement, UnaryOp, NEG_PRECEDENCE, NOT_PRECEDENCE};

const ATOM: u8 = 8;

/// Canonical text of a script. Comments and original layout are not kept.
pub fn pretty_print(script: &FeatureScript) -> String {
    let mut out = String::new();
    for (i, stmt) in script.statements.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_statement(&mut out, stmt);
    }
    out
}

fn print_statement(out: &mut String, stmt: &Statement) {
    match stmt {
        Statement::FeatureDef { name, usefulness, expr, .. } => {
            let _ = writeln!(out, "feature {} {{", quote(name));
            let _ = writeln!(out, "    usefulness: {}", quote(usefulness));
            let _ = writeln!(out, "    expr: {}", print_expr(expr));
            out.push_str("}\n");
        }
        Statement::DropColumn { name, reason, .. } => {
            let _ = write!(out, "drop {}", quote(name));
            if let Some(r) = reason {
                let _ = write!(out, " reason {}", quote(r));
            }
            out.push('\n');
        }
    }
}

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            '\t' => q.push_str("\\t"),
            '\r' => q.push_str("\\r"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        ExprKind::Unary(UnaryOp::Not, _) => NOT_PRECEDENCE,
        ExprKind::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
        _ => ATOM,
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_child(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Column(name) => {
            let _ = write!(out, "col({})", quote(name));
        }
        ExprKind::Number(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Text(s) => out.push_str(&quote(s)),
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::List(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
        ExprKind::Unary(op, operand) => {
            let (text, prec) = match op {
                UnaryOp::Neg => ("-", NEG_PRECEDENCE),
                UnaryOp::Not => ("not ", NOT_PRECEDENCE),
            };
            out.push_str(text);
            // `--x` would still lex, but a space keeps it readable.
            if *op == UnaryOp::Neg && matches!(operand.kind, ExprKind::Unary(UnaryOp::Neg, _)) {
                out.push(' ');
            }
            write_child(out, operand, precedence(operand) < prec);
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let p = op.precedence();
            let left_parens = if op.is_comparison() { precedence(lhs) <= p } else { precedence(lhs) < p };
            write_child(out, lhs, left_parens);
            let _ = write!(out, " {} ", op.symbol());
            write_child(out, rhs, precedence(rhs) <= p);
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, item);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedsl::parser::{parse, parse_expr};

    #[test]
    fn empty_script_prints_empty() {
        assert_eq!(pretty_print(&FeatureScript::default()), "");
    }

    #[test]
    fn ratio_round_trips() {
        let s = parse(r#"feature "ratio" { usefulness: "u" expr: col("calc") / col("urea") }"#).unwrap();
        let text = pretty_print(&s);
        assert_eq!(text, "feature \"ratio\" {\n    usefulness: \"u\"\n    expr: col(\"calc\") / col(\"urea\")\n}\n");
        assert_eq!(parse(&text).unwrap(), s);
    }

    #[test]
    fn comments_are_dropped() {
        let s = parse("# leading\ndrop \"a\" # trailing\n").unwrap();
        assert_eq!(pretty_print(&s), "drop \"a\"\n");
    }

    #[test]
    fn minimal_parentheses() {
        for (src, canon) in [
            ("(1 + 2) * 3", "(1 + 2) * 3"),
            ("1 - (2 - 3)", "1 - (2 - 3)"),
            ("(1 - 2) - 3", "1 - 2 - 3"),
            ("(not true) == false", "(not true) == false"),
            ("not (1 < 2)", "not 1 < 2"),
            ("-(-(1))", "- -1"),
            ("-(1 + 2)", "-(1 + 2)"),
            ("(1 < 2) == (3 < 4)", "(1 < 2) == (3 < 4)"),
            ("f([1, -2], \"a\\\"b\")", "f([1, -2], \"a\\\"b\")"),
        ] {
            let e = parse_expr(src).unwrap();
            let printed = print_expr(&e);
            assert_eq!(printed, canon, "{src}");
            assert_eq!(parse_expr(&printed).unwrap(), e, "{src}");
        }
    }
}
