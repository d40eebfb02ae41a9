//! Recursive-descent parser for the `.lq` program format.
//!
//! Statements are keyword-led (`channel`, `qubits`, `state`, `superop`,
//! `measurement`, `proc`) and may span lines. Process definitions are
//! non-recursive macros, inlined at their use sites. Superoperator and
//! measurement names resolve against the built-in table plus any explicit
//! Kraus declarations; unknown names and arity mismatches are parse errors.

use super::ast::*;
use super::lexer::{lex, Pos, SpannedTok, Tok};
use crate::qmath::{
    builtin_measurement, builtin_superoperator, coin_measurement, ket, outer, tensor, CMatrix,
    DensityOperator, Measurement, StateVector, Superoperator, DEFAULT_EPS,
};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

const KEYWORDS: &[&str] = &[
    "channel", "qubits", "state", "proc", "superop", "measurement", "nil", "if", "then", "else",
    "meas", "tau", "mix", "maxmixed", "dm", "amp", "true", "false", "not", "and", "or", "qubit",
    "bit", "nat",
];

pub fn parse(src: &str) -> Result<Program, ParseError> {
    parse_with_eps(src, DEFAULT_EPS)
}

pub fn parse_with_eps(src: &str, eps: f64) -> Result<Program, ParseError> {
    let toks = lex(src).map_err(|e| ParseError { line: e.pos.line, col: e.pos.col, msg: e.msg })?;
    let mut p = Parser {
        toks,
        pos: 0,
        prog: Program {
            channels: BTreeMap::new(),
            register: Vec::new(),
            superops: BTreeMap::new(),
            measurements: BTreeMap::new(),
            defs: Vec::new(),
            initial: Vec::new(),
            eps,
        },
        state_seen: false,
    };
    p.program()?;
    Ok(p.prog)
}

struct Parser {
    toks: Vec<SpannedTok>,
    pos: usize,
    prog: Program,
    state_seen: bool,
}

impl Parser {
    fn here(&self) -> Pos {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let p = self.here();
        Err(ParseError { line: p.line, col: p.col, msg: msg.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn next_tok(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, want: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == want => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected {want}, found {t}"))
            }
            None => self.err(format!("expected {want}, found end of input")),
        }
    }

    fn eat_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {kw:?}")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.err(format!("keyword {s:?} cannot be used as {what}"))
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn number_f64(&mut self) -> Result<f64, ParseError> {
        match self.next_tok() {
            Some(Tok::Float(x)) => Ok(x),
            Some(Tok::Nat(n)) => Ok(n as f64),
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a number")
            }
        }
    }

    // ---- statements ---------------------------------------------------

    fn program(&mut self) -> Result<(), ParseError> {
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Ident(s) => match s.as_str() {
                    "channel" => self.channel_stmt()?,
                    "qubits" => self.qubits_stmt()?,
                    "state" => self.state_stmt()?,
                    "superop" => self.kraus_stmt(false)?,
                    "measurement" => self.kraus_stmt(true)?,
                    "proc" => self.proc_stmt()?,
                    other => {
                        let other = other.to_string();
                        return self.err(format!("expected a statement keyword, found {other:?}"));
                    }
                },
                t => {
                    let t = t.clone();
                    return self.err(format!("expected a statement keyword, found {t}"));
                }
            }
        }
        if self.prog.defs.is_empty() {
            return self.err("program has no process definitions");
        }
        if !self.prog.register.is_empty() && !self.state_seen {
            return self.err("program declares qubits but no initial state");
        }
        if self.prog.register.is_empty() && !self.state_seen {
            self.prog.initial = vec![(1.0, DensityOperator::scalar(1.0))];
        }
        Ok(())
    }

    fn channel_stmt(&mut self) -> Result<(), ParseError> {
        self.eat_kw("channel")?;
        let name = self.ident("a channel name")?;
        if self.prog.channels.contains_key(&name) {
            return self.err(format!("channel {name:?} declared twice"));
        }
        self.eat(&Tok::Colon)?;
        let ty = match self.peek() {
            Some(Tok::Ident(s)) if s == "qubit" => {
                self.pos += 1;
                ChanType::Qubit
            }
            Some(Tok::Ident(s)) if s == "bit" => {
                self.pos += 1;
                ChanType::Nat { max: 1 }
            }
            Some(Tok::Ident(s)) if s == "nat" => {
                self.pos += 1;
                self.eat(&Tok::LParen)?;
                let lo = match self.next_tok() {
                    Some(Tok::Nat(n)) => n,
                    _ => return self.err("expected range start"),
                };
                self.eat(&Tok::DotDot)?;
                let hi = match self.next_tok() {
                    Some(Tok::Nat(n)) => n,
                    _ => return self.err("expected range end"),
                };
                self.eat(&Tok::RParen)?;
                if lo != 0 {
                    return self.err("nat ranges must start at 0");
                }
                ChanType::Nat { max: hi }
            }
            _ => return self.err("expected channel type: qubit, bit or nat(0..k)"),
        };
        self.prog.channels.insert(name, ty);
        Ok(())
    }

    fn qubits_stmt(&mut self) -> Result<(), ParseError> {
        self.eat_kw("qubits")?;
        if !self.prog.register.is_empty() {
            return self.err("qubit register declared twice");
        }
        while let Some(Tok::Ident(s)) = self.peek() {
            if KEYWORDS.contains(&s.as_str()) {
                break;
            }
            let name = s.clone();
            if self.prog.register.contains(&name) {
                return self.err(format!("qubit {name:?} declared twice"));
            }
            self.prog.register.push(name);
            self.pos += 1;
        }
        if self.prog.register.is_empty() {
            return self.err("empty qubit register declaration");
        }
        Ok(())
    }

    fn state_stmt(&mut self) -> Result<(), ParseError> {
        self.eat_kw("state")?;
        if self.state_seen {
            return self.err("initial state declared twice");
        }
        self.state_seen = true;
        let dim = 1usize << self.prog.register.len();
        let mut entries = Vec::new();
        if self.at_kw("mix") {
            self.pos += 1;
            loop {
                let w = self.number_f64()?;
                if w <= 0.0 {
                    return self.err("mixture weights must be positive");
                }
                let op = self.state_expr()?;
                entries.push((w, op));
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            let total: f64 = entries.iter().map(|(w, _)| w).sum();
            if total > 1.0 + 1e-6 {
                return self.err(format!("mixture weights sum to {total}, above one"));
            }
        } else {
            entries.push((1.0, self.state_expr()?));
        }
        for (_, op) in &entries {
            if op.dim() != dim {
                return self.err(format!(
                    "state dimension {} does not match the {}-qubit register",
                    op.dim(),
                    self.prog.register.len()
                ));
            }
        }
        self.prog.initial = entries;
        Ok(())
    }

    fn state_expr(&mut self) -> Result<DensityOperator, ParseError> {
        let mut op = self.state_atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            let rhs = self.state_atom()?;
            op = tensor(&op, &rhs);
        }
        Ok(op)
    }

    fn state_atom(&mut self) -> Result<DensityOperator, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ket(label)) => {
                self.pos += 1;
                match ket(&label) {
                    Ok(v) => Ok(outer(&v)),
                    Err(e) => self.err(e.to_string()),
                }
            }
            Some(Tok::Ident(s)) if s == "maxmixed" => {
                self.pos += 1;
                self.eat(&Tok::LParen)?;
                let n = match self.next_tok() {
                    Some(Tok::Nat(n)) => n as usize,
                    _ => return self.err("expected qubit count"),
                };
                self.eat(&Tok::RParen)?;
                Ok(DensityOperator::maximally_mixed(n))
            }
            Some(Tok::Ident(s)) if s == "dm" => {
                self.pos += 1;
                let m = self.matrix()?;
                if m.rows() != m.cols() || !m.rows().is_power_of_two() {
                    return self.err("dm literal must be square with power-of-two dimension");
                }
                if !m.is_hermitian(1e-7) {
                    return self.err("dm literal is not Hermitian");
                }
                if !m.is_psd(1e-7) {
                    return self.err("dm literal is not positive semidefinite");
                }
                if m.trace().re > 1.0 + 1e-6 {
                    return self.err("dm literal has trace above one");
                }
                DensityOperator::from_matrix(m).map_err(|e| {
                    let p = self.here();
                    ParseError { line: p.line, col: p.col, msg: e.to_string() }
                })
            }
            Some(Tok::Ident(s)) if s == "amp" => {
                self.pos += 1;
                self.eat(&Tok::LBracket)?;
                let mut amps = Vec::new();
                loop {
                    amps.push(self.complex()?);
                    if self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                self.eat(&Tok::RBracket)?;
                let v = match StateVector::from_amps(amps) {
                    Ok(v) => v,
                    Err(e) => return self.err(e.to_string()),
                };
                if (v.norm_sqr() - 1.0).abs() > 1e-6 {
                    return self.err("amp literal is not a unit vector");
                }
                Ok(outer(&v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let op = self.state_expr()?;
                self.eat(&Tok::RParen)?;
                Ok(op)
            }
            _ => self.err("expected a state: |..>, maxmixed(n), dm[[..]], amp[..]"),
        }
    }

    fn matrix(&mut self) -> Result<CMatrix, ParseError> {
        self.eat(&Tok::LBracket)?;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        loop {
            self.eat(&Tok::LBracket)?;
            let mut row = Vec::new();
            loop {
                row.push(self.complex()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.eat(&Tok::RBracket)?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return self.err("ragged matrix literal");
                }
            }
            rows.push(row);
            if self.peek() == Some(&Tok::Comma) && self.peek_at(1) == Some(&Tok::LBracket) {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.eat(&Tok::RBracket)?;
        let mut m = CMatrix::zeros(rows.len(), rows[0].len());
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        Ok(m)
    }

    /// Complex literals: `a`, `-a`, `bi`, `-bi`, `a+bi`, `a-bi`.
    fn complex(&mut self) -> Result<Complex64, ParseError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let first = self.number_f64()?;
        let first = if neg { -first } else { first };
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "i") {
            self.pos += 1;
            return Ok(Complex64::new(0.0, first));
        }
        let sign = match self.peek() {
            Some(Tok::Plus) => 1.0,
            Some(Tok::Minus) => -1.0,
            _ => return Ok(Complex64::new(first, 0.0)),
        };
        // only consume the sign if an imaginary part follows
        let save = self.pos;
        self.pos += 1;
        match self.next_tok() {
            Some(Tok::Float(x)) => {
                if matches!(self.peek(), Some(Tok::Ident(s)) if s == "i") {
                    self.pos += 1;
                    Ok(Complex64::new(first, sign * x))
                } else {
                    self.pos = save;
                    Ok(Complex64::new(first, 0.0))
                }
            }
            Some(Tok::Nat(n)) => {
                if matches!(self.peek(), Some(Tok::Ident(s)) if s == "i") {
                    self.pos += 1;
                    Ok(Complex64::new(first, sign * n as f64))
                } else {
                    self.pos = save;
                    Ok(Complex64::new(first, 0.0))
                }
            }
            _ => {
                self.pos = save;
                Ok(Complex64::new(first, 0.0))
            }
        }
    }

    fn kraus_stmt(&mut self, is_measurement: bool) -> Result<(), ParseError> {
        let kw = if is_measurement { "measurement" } else { "superop" };
        self.eat_kw(kw)?;
        let start = self.here();
        let name = self.ident("an operator name")?;
        let clash = builtin_superoperator(&name, self.prog.eps).is_some()
            || builtin_measurement(&name, self.prog.eps).is_some()
            || self.prog.superops.contains_key(&name)
            || self.prog.measurements.contains_key(&name);
        if clash {
            return self.err(format!("operator name {name:?} is already defined"));
        }
        self.eat(&Tok::Equals)?;
        let mut mats = vec![self.matrix()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            mats.push(self.matrix()?);
        }
        let eps = self.prog.eps;
        if is_measurement {
            match Measurement::new(mats, eps) {
                Ok(m) => {
                    self.prog.measurements.insert(name, m);
                }
                Err(e) => {
                    return Err(ParseError { line: start.line, col: start.col, msg: e.to_string() })
                }
            }
        } else {
            match Superoperator::new(mats, eps) {
                Ok(s) => {
                    self.prog.superops.insert(name, s);
                }
                Err(e) => {
                    return Err(ParseError { line: start.line, col: start.col, msg: e.to_string() })
                }
            }
        }
        Ok(())
    }

    fn proc_stmt(&mut self) -> Result<(), ParseError> {
        self.eat_kw("proc")?;
        let name = self.ident("a process name")?;
        if self.prog.defs.iter().any(|(n, _)| n == &name) {
            return self.err(format!("process {name:?} defined twice"));
        }
        self.eat(&Tok::Equals)?;
        let body = self.process()?;
        self.prog.defs.push((name, body));
        Ok(())
    }

    // ---- processes ----------------------------------------------------

    fn process(&mut self) -> Result<Process, ParseError> {
        let mut p = self.sum()?;
        while self.peek() == Some(&Tok::ParOp) {
            self.pos += 1;
            let rhs = self.sum()?;
            p = Process::Par(Box::new(p), Box::new(rhs));
        }
        Ok(p)
    }

    fn sum(&mut self) -> Result<Process, ParseError> {
        let mut p = self.base()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            let rhs = self.base()?;
            p = Process::Sum(Box::new(p), Box::new(rhs));
        }
        Ok(p)
    }

    fn base(&mut self) -> Result<Process, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "nil" => {
                self.pos += 1;
                self.eat(&Tok::LBracket)?;
                let mut es = Vec::new();
                if self.peek() != Some(&Tok::RBracket) {
                    loop {
                        es.push(self.expr()?);
                        if self.peek() == Some(&Tok::Comma) {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(&Tok::RBracket)?;
                self.suffixes(Process::Nil(es))
            }
            Some(Tok::Ident(s)) if s == "if" => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat_kw("then")?;
                let a = self.base()?;
                self.eat_kw("else")?;
                let b = self.base()?;
                Ok(Process::Ite(e, Box::new(a), Box::new(b)))
            }
            Some(Tok::Ident(_)) => {
                if self.peek_at(1) == Some(&Tok::Colon) {
                    self.prefix_chain()
                } else {
                    let start = self.here();
                    let name = self.ident("a process name")?;
                    let body = match self.prog.defs.iter().find(|(n, _)| n == &name) {
                        Some((_, p)) => p.clone(),
                        None => {
                            return Err(ParseError {
                                line: start.line,
                                col: start.col,
                                msg: format!("unknown process {name:?}"),
                            })
                        }
                    };
                    self.suffixes(body)
                }
            }
            Some(Tok::LParen) => {
                if let Some(p) = self.try_tagpair_prefix()? {
                    return Ok(p);
                }
                if let Some(p) = self.try_action_ite()? {
                    return Ok(p);
                }
                self.pos += 1;
                let p = self.process()?;
                self.eat(&Tok::RParen)?;
                self.suffixes(p)
            }
            _ => self.err("expected a process"),
        }
    }

    fn suffixes(&mut self, mut p: Process) -> Result<Process, ParseError> {
        while self.peek() == Some(&Tok::Backslash) {
            self.pos += 1;
            self.eat(&Tok::LBrace)?;
            let mut cs = std::collections::BTreeSet::new();
            loop {
                let c = self.ident("a channel name")?;
                if !self.prog.channels.contains_key(&c) {
                    return self.err(format!("unknown channel {c:?} in restriction"));
                }
                cs.insert(c);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            self.eat(&Tok::RBrace)?;
            p = Process::Restrict(Box::new(p), cs);
        }
        Ok(p)
    }

    /// `(t, t') : tau [^n] . P`
    fn try_tagpair_prefix(&mut self) -> Result<Option<Process>, ParseError> {
        let save = self.pos;
        let shape = matches!(
            (self.peek(), self.peek_at(1), self.peek_at(2), self.peek_at(3), self.peek_at(4)),
            (
                Some(Tok::LParen),
                Some(Tok::Ident(_)),
                Some(Tok::Comma),
                Some(Tok::Ident(_)),
                Some(Tok::RParen)
            )
        ) && self.peek_at(5) == Some(&Tok::Colon);
        if !shape {
            return Ok(None);
        }
        self.pos += 1;
        let t1 = self.ident("a tag")?;
        self.eat(&Tok::Comma)?;
        let t2 = self.ident("a tag")?;
        self.eat(&Tok::RParen)?;
        self.eat(&Tok::Colon)?;
        if !self.at_kw("tau") {
            self.pos = save;
            return Ok(None);
        }
        self.pos += 1;
        let reps = self.tau_power()?;
        self.eat(&Tok::Dot)?;
        let cont = self.base()?;
        let mut p = cont;
        for _ in 0..reps {
            p = Process::prefix(Prefix::TauPair(Tag(t1.clone()), Tag(t2.clone())), p);
        }
        Ok(Some(p))
    }

    /// `(if e then t:a else t':a') . P`, sugar for pushing the continuation
    /// into both branches.
    fn try_action_ite(&mut self) -> Result<Option<Process>, ParseError> {
        let save = self.pos;
        if !(self.peek() == Some(&Tok::LParen)
            && matches!(self.peek_at(1), Some(Tok::Ident(s)) if s == "if"))
        {
            return Ok(None);
        }
        self.pos += 2;
        let attempt = (|| -> Result<(Expr, Vec<(Prefix, usize)>, Vec<(Prefix, usize)>), ParseError> {
            let e = self.expr()?;
            self.eat_kw("then")?;
            let a = self.tagged_action()?;
            self.eat_kw("else")?;
            let b = self.tagged_action()?;
            self.eat(&Tok::RParen)?;
            self.eat(&Tok::Dot)?;
            Ok((e, a, b))
        })();
        match attempt {
            Ok((e, a, b)) => {
                let cont = self.base()?;
                let build = |acts: Vec<(Prefix, usize)>, cont: &Process| {
                    let mut p = cont.clone();
                    for (pre, reps) in acts.into_iter().rev() {
                        for _ in 0..reps {
                            p = Process::prefix(pre.clone(), p);
                        }
                    }
                    p
                };
                Ok(Some(Process::Ite(
                    e,
                    Box::new(build(a, &cont)),
                    Box::new(build(b, &cont)),
                )))
            }
            Err(_) => {
                self.pos = save;
                Ok(None)
            }
        }
    }

    fn tau_power(&mut self) -> Result<usize, ParseError> {
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.next_tok() {
                Some(Tok::Nat(n)) if n >= 1 => Ok(n as usize),
                _ => self.err("expected a positive repetition count after ^"),
            }
        } else {
            Ok(1)
        }
    }

    /// A single `tag : action` with optional `^n`, no continuation.
    fn tagged_action(&mut self) -> Result<Vec<(Prefix, usize)>, ParseError> {
        let tag = Tag(self.ident("a tag")?);
        self.eat(&Tok::Colon)?;
        let (pre, reps) = self.action(tag)?;
        Ok(vec![(pre, reps)])
    }

    fn prefix_chain(&mut self) -> Result<Process, ParseError> {
        let tag = Tag(self.ident("a tag")?);
        self.eat(&Tok::Colon)?;
        let (pre, reps) = self.action(tag)?;
        self.eat(&Tok::Dot)?;
        let cont = self.base()?;
        let mut p = cont;
        for _ in 0..reps {
            p = Process::prefix(pre.clone(), p);
        }
        Ok(p)
    }

    fn action(&mut self, tag: Tag) -> Result<(Prefix, usize), ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "tau" => {
                self.pos += 1;
                let reps = self.tau_power()?;
                Ok((Prefix::Tau(tag), reps))
            }
            Some(Tok::Ident(s)) if s == "meas" => {
                self.pos += 1;
                let (name, args, binder) = self.measurement_call()?;
                Ok((Prefix::Meas(tag, name, args, binder), 1))
            }
            Some(Tok::Ident(_)) => {
                let start = self.here();
                let name = self.ident("a channel or operator name")?;
                match self.peek() {
                    Some(Tok::Bang) => {
                        self.pos += 1;
                        self.check_channel(&name, start)?;
                        let e = self.expr()?;
                        Ok((Prefix::Send(tag, name, e), 1))
                    }
                    Some(Tok::Question) => {
                        self.pos += 1;
                        self.check_channel(&name, start)?;
                        let x = self.binder()?;
                        Ok((Prefix::Recv(tag, name, x), 1))
                    }
                    Some(Tok::LParen) => {
                        self.pos += 1;
                        let sop = match self.prog.superops.get(&name) {
                            Some(s) => s.clone(),
                            None => match builtin_superoperator(&name, self.prog.eps) {
                                Some(s) => {
                                    self.prog.superops.insert(name.clone(), s.clone());
                                    s
                                }
                                None => {
                                    return Err(ParseError {
                                        line: start.line,
                                        col: start.col,
                                        msg: format!("unknown superoperator {name:?}"),
                                    })
                                }
                            },
                        };
                        let mut args = Vec::new();
                        if self.peek() != Some(&Tok::RParen) {
                            loop {
                                args.push(self.qubit_arg()?);
                                if self.peek() == Some(&Tok::Comma) {
                                    self.pos += 1;
                                } else {
                                    break;
                                }
                            }
                        }
                        self.eat(&Tok::RParen)?;
                        if args.len() != sop.arity() {
                            return Err(ParseError {
                                line: start.line,
                                col: start.col,
                                msg: format!(
                                    "superoperator {name:?} expects {} qubits, got {}",
                                    sop.arity(),
                                    args.len()
                                ),
                            });
                        }
                        Ok((Prefix::Sop(tag, name, args), 1))
                    }
                    _ => self.err("expected !, ? or ( after the name"),
                }
            }
            _ => self.err("expected an action"),
        }
    }

    fn check_channel(&self, name: &str, at: Pos) -> Result<(), ParseError> {
        if self.prog.channels.contains_key(name) {
            Ok(())
        } else {
            Err(ParseError { line: at.line, col: at.col, msg: format!("unknown channel {name:?}") })
        }
    }

    fn binder(&mut self) -> Result<String, ParseError> {
        let start = self.here();
        let x = self.ident("a variable")?;
        if self.prog.register.contains(&x) {
            return Err(ParseError {
                line: start.line,
                col: start.col,
                msg: format!("binder {x:?} shadows a register qubit"),
            });
        }
        Ok(x)
    }

    fn qubit_arg(&mut self) -> Result<Expr, ParseError> {
        let start = self.here();
        let e = self.expr()?;
        match &e {
            Expr::Qubit(_) | Expr::Var(_) => Ok(e),
            _ => Err(ParseError {
                line: start.line,
                col: start.col,
                msg: "operator arguments must be qubits or variables".into(),
            }),
        }
    }

    fn measurement_call(&mut self) -> Result<(String, Vec<Expr>, String), ParseError> {
        let start = self.here();
        let name = self.ident("a measurement name")?;
        self.eat(&Tok::LParen)?;
        if name == "coin" {
            let p = self.number_f64()?;
            if !(0.0..=1.0).contains(&p) {
                return self.err("coin probability must lie in [0, 1]");
            }
            self.eat(&Tok::Greater)?;
            let x = self.binder()?;
            self.eat(&Tok::RParen)?;
            let full = format!("coin({p})");
            if !self.prog.measurements.contains_key(&full) {
                let m = coin_measurement(p, self.prog.eps).map_err(|e| ParseError {
                    line: start.line,
                    col: start.col,
                    msg: e.to_string(),
                })?;
                self.prog.measurements.insert(full.clone(), m);
            }
            return Ok((full, Vec::new(), x));
        }
        let meas = match self.prog.measurements.get(&name) {
            Some(m) => m.clone(),
            None => match builtin_measurement(&name, self.prog.eps) {
                Some(m) => {
                    self.prog.measurements.insert(name.clone(), m.clone());
                    m
                }
                None => {
                    return Err(ParseError {
                        line: start.line,
                        col: start.col,
                        msg: format!("unknown measurement {name:?}"),
                    })
                }
            },
        };
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::Greater) {
            loop {
                args.push(self.qubit_arg()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.eat(&Tok::Greater)?;
        let x = self.binder()?;
        self.eat(&Tok::RParen)?;
        if args.len() != meas.arity() {
            return Err(ParseError {
                line: start.line,
                col: start.col,
                msg: format!(
                    "measurement {name:?} expects {} qubits, got {}",
                    meas.arity(),
                    args.len()
                ),
            });
        }
        Ok((name, args, x))
    }

    // ---- expressions ---------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.and_expr()?;
        while self.at_kw("or") {
            self.pos += 1;
            let rhs = self.and_expr()?;
            e = Expr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.cmp_expr()?;
        while self.at_kw("and") {
            self.pos += 1;
            let rhs = self.cmp_expr()?;
            // a and b  ==  not (not a or not b)
            e = Expr::Not(Box::new(Expr::Or(
                Box::new(Expr::Not(Box::new(e))),
                Box::new(Expr::Not(Box::new(rhs))),
            )));
        }
        Ok(e)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let e = self.atom_expr()?;
        match self.peek() {
            Some(Tok::Equals) => {
                self.pos += 1;
                let rhs = self.atom_expr()?;
                Ok(Expr::Eq(Box::new(e), Box::new(rhs)))
            }
            Some(Tok::LessEq) => {
                self.pos += 1;
                let rhs = self.atom_expr()?;
                Ok(Expr::Le(Box::new(e), Box::new(rhs)))
            }
            Some(Tok::NotEq) => {
                self.pos += 1;
                let rhs = self.atom_expr()?;
                Ok(Expr::Not(Box::new(Expr::Eq(Box::new(e), Box::new(rhs)))))
            }
            _ => Ok(e),
        }
    }

    fn atom_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) if s == "not" => {
                self.pos += 1;
                let e = self.atom_expr()?;
                Ok(Expr::Not(Box::new(e)))
            }
            Some(Tok::Ident(s)) if s == "true" => {
                self.pos += 1;
                Ok(Expr::Bool(true))
            }
            Some(Tok::Ident(s)) if s == "false" => {
                self.pos += 1;
                Ok(Expr::Bool(false))
            }
            Some(Tok::Nat(n)) => {
                self.pos += 1;
                Ok(Expr::Nat(n))
            }
            Some(Tok::Ident(_)) => {
                let name = self.ident("a variable or qubit")?;
                if self.prog.register.contains(&name) {
                    Ok(Expr::Qubit(name))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen)?;
                Ok(e)
            }
            _ => self.err("expected an expression"),
        }
    }
}
