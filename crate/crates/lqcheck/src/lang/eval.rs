//! Big-step evaluation of closed classical expressions.

use super::ast::{Expr, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable {0:?}")]
    Unbound(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// Evaluates `e` under `bindings`. Qubit equality compares names only.
pub fn eval_expr(e: &Expr, bindings: &BTreeMap<String, Value>) -> Result<Value, EvalError> {
    match e {
        Expr::Var(x) => bindings.get(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
        Expr::Bool(b) => Ok(Value::Bool(*b)),
        Expr::Nat(n) => Ok(Value::Nat(*n)),
        Expr::Qubit(q) => Ok(Value::Qubit(q.clone())),
        Expr::Not(a) => match eval_expr(a, bindings)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            v => Err(EvalError::TypeMismatch(format!("not applied to {v}"))),
        },
        Expr::Or(a, b) => match (eval_expr(a, bindings)?, eval_expr(b, bindings)?) {
            (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x || y)),
            (x, y) => Err(EvalError::TypeMismatch(format!("{x} or {y}"))),
        },
        Expr::Le(a, b) => match (eval_expr(a, bindings)?, eval_expr(b, bindings)?) {
            (Value::Nat(x), Value::Nat(y)) => Ok(Value::Bool(x <= y)),
            (x, y) => Err(EvalError::TypeMismatch(format!("{x} <= {y}"))),
        },
        Expr::Eq(a, b) => match (eval_expr(a, bindings)?, eval_expr(b, bindings)?) {
            (Value::Nat(x), Value::Nat(y)) => Ok(Value::Bool(x == y)),
            (Value::Bool(x), Value::Bool(y)) => Ok(Value::Bool(x == y)),
            (Value::Qubit(x), Value::Qubit(y)) => Ok(Value::Bool(x == y)),
            (x, y) => Err(EvalError::TypeMismatch(format!("{x} = {y}"))),
        },
    }
}

/// Evaluates a closed expression (no free variables expected).
pub fn eval_closed(e: &Expr) -> Result<Value, EvalError> {
    eval_expr(e, &BTreeMap::new())
}
