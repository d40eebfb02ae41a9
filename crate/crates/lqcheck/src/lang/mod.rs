//! Tagged lqCCS abstract syntax, the `.lq` parser, pretty printer and
//! expression evaluator.

mod ast;
mod eval;
mod lexer;
mod parser;
mod pretty;

pub use ast::{
    substitute, tags_of, ChanType, Expr, Prefix, Process, Program, Scheduler, Tag, Value,
};
pub use eval::{eval_closed, eval_expr, EvalError};
pub use parser::{parse, parse_with_eps, ParseError};

#[cfg(test)]
mod tests;
