//! Abstract syntax of tagged lqCCS processes and programs.

use crate::qmath::{DensityOperator, Measurement, Superoperator};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A syntactic tag naming one non-deterministic choice.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(pub String);

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A scheduler selects a tagged action or a synchronization pair.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheduler {
    Single(Tag),
    Pair(Tag, Tag),
}

impl fmt::Display for Scheduler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheduler::Single(t) => write!(f, "{t}"),
            Scheduler::Pair(t, u) => write!(f, "({t},{u})"),
        }
    }
}

/// Base values exchanged over channels and bound by measurements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Nat(u64),
    Qubit(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Qubit(q) => write!(f, "{q}"),
        }
    }
}

/// Classical and quantum expressions. `q = q'` compares qubit names only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(String),
    Bool(bool),
    Nat(u64),
    Qubit(String),
    Not(Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
}

/// A tagged action prefix.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Prefix {
    Tau(Tag),
    TauPair(Tag, Tag),
    /// `t : c?x`
    Recv(Tag, String, String),
    /// `t : c!e`
    Send(Tag, String, Expr),
    /// `t : E(e~)` for a named superoperator
    Sop(Tag, String, Vec<Expr>),
    /// `t : meas M(e~ > x)`
    Meas(Tag, String, Vec<Expr>, String),
}

impl Prefix {
    pub fn tags(&self) -> Vec<&Tag> {
        match self {
            Prefix::Tau(t)
            | Prefix::Recv(t, _, _)
            | Prefix::Send(t, _, _)
            | Prefix::Sop(t, _, _)
            | Prefix::Meas(t, _, _, _) => vec![t],
            Prefix::TauPair(t, u) => vec![t, u],
        }
    }

    /// The variable bound by this prefix for the continuation, if any.
    pub fn binder(&self) -> Option<&str> {
        match self {
            Prefix::Recv(_, _, x) | Prefix::Meas(_, _, _, x) => Some(x),
            _ => None,
        }
    }
}

/// Tagged lqCCS process terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Process {
    /// `nil[e~]`: deadlock discarding (keeping ownership of) the listed qubits.
    Nil(Vec<Expr>),
    Prefix(Prefix, Box<Process>),
    Ite(Expr, Box<Process>, Box<Process>),
    Sum(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Restrict(Box<Process>, BTreeSet<String>),
}

impl Process {
    pub fn prefix(p: Prefix, cont: Process) -> Process {
        Process::Prefix(p, Box::new(cont))
    }
}

fn expr_subst(e: &Expr, x: &str, v: &Expr) -> Expr {
    match e {
        Expr::Var(y) if y == x => v.clone(),
        Expr::Var(_) | Expr::Bool(_) | Expr::Nat(_) | Expr::Qubit(_) => e.clone(),
        Expr::Not(a) => Expr::Not(Box::new(expr_subst(a, x, v))),
        Expr::Or(a, b) => Expr::Or(Box::new(expr_subst(a, x, v)), Box::new(expr_subst(b, x, v))),
        Expr::Le(a, b) => Expr::Le(Box::new(expr_subst(a, x, v)), Box::new(expr_subst(b, x, v))),
        Expr::Eq(a, b) => Expr::Eq(Box::new(expr_subst(a, x, v)), Box::new(expr_subst(b, x, v))),
    }
}

fn value_expr(v: &Value) -> Expr {
    match v {
        Value::Bool(b) => Expr::Bool(*b),
        Value::Nat(n) => Expr::Nat(*n),
        Value::Qubit(q) => Expr::Qubit(q.clone()),
    }
}

/// Capture-avoiding substitution `P[v/x]`. Values are closed, so avoiding
/// capture reduces to stopping at binders that shadow `x`.
pub fn substitute(p: &Process, x: &str, v: &Value) -> Process {
    let ve = value_expr(v);
    subst_expr(p, x, &ve)
}

fn subst_expr(p: &Process, x: &str, ve: &Expr) -> Process {
    match p {
        Process::Nil(es) => Process::Nil(es.iter().map(|e| expr_subst(e, x, ve)).collect()),
        Process::Prefix(pre, cont) => {
            let pre2 = match pre {
                Prefix::Tau(_) | Prefix::TauPair(_, _) => pre.clone(),
                Prefix::Recv(t, c, y) => Prefix::Recv(t.clone(), c.clone(), y.clone()),
                Prefix::Send(t, c, e) => Prefix::Send(t.clone(), c.clone(), expr_subst(e, x, ve)),
                Prefix::Sop(t, n, es) => {
                    Prefix::Sop(t.clone(), n.clone(), es.iter().map(|e| expr_subst(e, x, ve)).collect())
                }
                Prefix::Meas(t, n, es, y) => Prefix::Meas(
                    t.clone(),
                    n.clone(),
                    es.iter().map(|e| expr_subst(e, x, ve)).collect(),
                    y.clone(),
                ),
            };
            let cont2 = if pre.binder() == Some(x) { (**cont).clone() } else { subst_expr(cont, x, ve) };
            Process::Prefix(pre2, Box::new(cont2))
        }
        Process::Ite(e, a, b) => Process::Ite(
            expr_subst(e, x, ve),
            Box::new(subst_expr(a, x, ve)),
            Box::new(subst_expr(b, x, ve)),
        ),
        Process::Sum(a, b) => {
            Process::Sum(Box::new(subst_expr(a, x, ve)), Box::new(subst_expr(b, x, ve)))
        }
        Process::Par(a, b) => {
            Process::Par(Box::new(subst_expr(a, x, ve)), Box::new(subst_expr(b, x, ve)))
        }
        Process::Restrict(a, cs) => Process::Restrict(Box::new(subst_expr(a, x, ve)), cs.clone()),
    }
}

/// All tags that syntactically appear in `p`.
pub fn tags_of(p: &Process) -> BTreeSet<Tag> {
    let mut out = BTreeSet::new();
    collect_tags(p, &mut out);
    out
}

fn collect_tags(p: &Process, out: &mut BTreeSet<Tag>) {
    match p {
        Process::Nil(_) => {}
        Process::Prefix(pre, cont) => {
            for t in pre.tags() {
                out.insert(t.clone());
            }
            collect_tags(cont, out);
        }
        Process::Ite(_, a, b) | Process::Sum(a, b) | Process::Par(a, b) => {
            collect_tags(a, out);
            collect_tags(b, out);
        }
        Process::Restrict(a, _) => collect_tags(a, out),
    }
}

/// Channel value types. `bit` is sugar for `nat(0..1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChanType {
    Qubit,
    Nat { max: u64 },
}

impl ChanType {
    pub fn is_quantum(&self) -> bool {
        matches!(self, ChanType::Qubit)
    }
}

/// A parsed program: declarations, named operator tables, inlined process
/// definitions and the initial state (a point or a finite mixture).
#[derive(Clone, Debug)]
pub struct Program {
    pub channels: BTreeMap<String, ChanType>,
    pub register: Vec<String>,
    pub superops: BTreeMap<String, Superoperator>,
    pub measurements: BTreeMap<String, Measurement>,
    pub defs: Vec<(String, Process)>,
    pub initial: Vec<(f64, DensityOperator)>,
    pub eps: f64,
}

impl Program {
    /// Wire index of a register qubit.
    pub fn qubit_index(&self, name: &str) -> Option<usize> {
        self.register.iter().position(|q| q == name)
    }

    /// The entry process: the definition named `Main`, or the last one.
    pub fn main(&self) -> &Process {
        self.defs
            .iter()
            .find(|(n, _)| n == "Main")
            .or_else(|| self.defs.last())
            .map(|(_, p)| p)
            .expect("program without process definitions")
    }

    pub fn main_name(&self) -> &str {
        self.defs
            .iter()
            .find(|(n, _)| n == "Main")
            .or_else(|| self.defs.last())
            .map(|(n, _)| n.as_str())
            .expect("program without process definitions")
    }
}
