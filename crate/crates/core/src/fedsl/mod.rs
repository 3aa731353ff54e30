//! The feature language: a closed set of column expressions that can be
//! parsed, printed back canonically, type-checked against a table schema and
//! executed.
//!
//! ```text
//! feature "cabin_deck" {
//!     usefulness: "Deck letter groups passengers by location on the ship."
//!     expr: if_else(is_missing(col("Cabin")), "Unknown", str_char(col("Cabin"), 0))
//! }
//! drop "Cabin" reason "Replaced by cabin_deck."
//! ```

mod ast;
mod error;
mod interp;
mod lexer;
mod parser;
mod printer;
mod reference;
mod validate;

pub use ast::{BinaryOp, Expr, ExprKind, FeatureScript, Span, Statement, UnaryOp};
pub use error::{ErrorKind, ExecError};
pub use interp::{evaluate, execute};
pub use lexer::{tokenize, Tok, Token};
pub use parser::{parse, parse_expr};
pub use printer::{pretty_print, print_expr, quote};
pub use reference::reference_evaluate;
pub use validate::{
    is_whitelisted, validate, ArithOp, CmpOp, Func, FunctionSig, Literal, LogicOp, TExpr, TNode, TypedScript,
    TypedStatement, FUNCTIONS,
};
