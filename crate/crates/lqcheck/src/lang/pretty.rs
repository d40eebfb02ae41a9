//! Re-parseable textual rendering of expressions, processes and programs.

use super::ast::*;
use crate::qmath::{builtin_measurement, builtin_superoperator, CMatrix};
use num_complex::Complex64;
use std::fmt;

// expression precedence: 1 = or, 2 = comparison, 3 = atom
fn fmt_expr(e: &Expr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Var(x) => write!(f, "{x}"),
        Expr::Bool(b) => write!(f, "{b}"),
        Expr::Nat(n) => write!(f, "{n}"),
        Expr::Qubit(q) => write!(f, "{q}"),
        Expr::Not(a) => {
            write!(f, "not ")?;
            fmt_expr(a, 3, f)
        }
        Expr::Or(a, b) => {
            if level > 1 {
                write!(f, "(")?;
            }
            fmt_expr(a, 1, f)?;
            write!(f, " or ")?;
            fmt_expr(b, 2, f)?;
            if level > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Le(a, b) => fmt_cmp(a, "<=", b, level, f),
        Expr::Eq(a, b) => fmt_cmp(a, "=", b, level, f),
    }
}

fn fmt_cmp(a: &Expr, op: &str, b: &Expr, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level > 2 {
        write!(f, "(")?;
    }
    fmt_expr(a, 3, f)?;
    write!(f, " {op} ")?;
    fmt_expr(b, 3, f)?;
    if level > 2 {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 1, f)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prefix::Tau(t) => write!(f, "{t}:tau"),
            Prefix::TauPair(t, u) => write!(f, "({t},{u}):tau"),
            Prefix::Recv(t, c, x) => write!(f, "{t}:{c}?{x}"),
            Prefix::Send(t, c, e) => write!(f, "{t}:{c}!{e}"),
            Prefix::Sop(t, n, args) => {
                write!(f, "{t}:{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Prefix::Meas(t, n, args, x) => {
                // coin names embed their parameter, e.g. "coin(0.5)"
                if let Some(inner) = n.strip_suffix(')') {
                    if n.starts_with("coin(") {
                        return write!(f, "{t}:meas {inner} > {x})");
                    }
                }
                write!(f, "{t}:meas {n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, " > {x})")
            }
        }
    }
}

// process precedence: 0 = parallel, 1 = sum, 2 = base
fn fmt_proc(p: &Process, level: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match p {
        Process::Nil(es) => {
            write!(f, "nil[")?;
            for (i, e) in es.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")
        }
        Process::Prefix(pre, cont) => {
            write!(f, "{pre} . ")?;
            fmt_proc(cont, 2, f)
        }
        Process::Ite(e, a, b) => {
            write!(f, "if {e} then ")?;
            fmt_proc(a, 2, f)?;
            write!(f, " else ")?;
            fmt_proc(b, 2, f)
        }
        Process::Sum(a, b) => {
            if level > 1 {
                write!(f, "(")?;
            }
            fmt_proc(a, 1, f)?;
            write!(f, " + ")?;
            fmt_proc(b, 2, f)?;
            if level > 1 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Process::Par(a, b) => {
            if level > 0 {
                write!(f, "(")?;
            }
            fmt_proc(a, 0, f)?;
            write!(f, " || ")?;
            fmt_proc(b, 1, f)?;
            if level > 0 {
                write!(f, ")")?;
            }
            Ok(())
        }
        Process::Restrict(a, cs) => {
            write!(f, "(")?;
            fmt_proc(a, 0, f)?;
            write!(f, ") \\ {{")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "}}")
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_proc(self, 0, f)
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn fmt_matrix(m: &CMatrix) -> String {
    let mut rows = Vec::new();
    for i in 0..m.rows() {
        let cells: Vec<String> = (0..m.cols()).map(|j| fmt_complex(m.get(i, j))).collect();
        rows.push(format!("[{}]", cells.join(", ")));
    }
    format!("[{}]", rows.join(", "))
}

impl Program {
    /// Renders the program back to `.lq` source. Parsing the result yields a
    /// structurally identical program (definitions stay inlined).
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for (name, ty) in &self.channels {
            let ty = match ty {
                ChanType::Qubit => "qubit".to_string(),
                ChanType::Nat { max } => format!("nat(0..{max})"),
            };
            out.push_str(&format!("channel {name} : {ty}\n"));
        }
        if !self.register.is_empty() {
            out.push_str(&format!("qubits {}\n", self.register.join(" ")));
        }
        for (name, sop) in &self.superops {
            if builtin_superoperator(name, self.eps).is_some() {
                continue;
            }
            let mats: Vec<String> = sop.kraus().iter().map(fmt_matrix).collect();
            out.push_str(&format!("superop {name} = {}\n", mats.join(", ")));
        }
        for (name, m) in &self.measurements {
            if builtin_measurement(name, self.eps).is_some() || name.starts_with("coin(") {
                continue;
            }
            let mats: Vec<String> = (0..m.n_outcomes())
                .map(|i| fmt_matrix(&m.outcome_matrix(i)))
                .collect();
            out.push_str(&format!("measurement {name} = {}\n", mats.join(", ")));
        }
        if !self.register.is_empty() || !self.initial.is_empty() {
            if self.initial.len() == 1 && (self.initial[0].0 - 1.0).abs() < 1e-12 {
                out.push_str(&format!("state dm{}\n", fmt_matrix(self.initial[0].1.matrix())));
            } else {
                let parts: Vec<String> = self
                    .initial
                    .iter()
                    .map(|(w, op)| format!("{w} dm{}", fmt_matrix(op.matrix())))
                    .collect();
                out.push_str(&format!("state mix {}\n", parts.join(" , ")));
            }
        }
        for (name, body) in &self.defs {
            out.push_str(&format!("proc {name} = {body}\n"));
        }
        out
    }
}
