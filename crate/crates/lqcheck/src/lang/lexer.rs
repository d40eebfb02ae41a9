//! Tokenizer for the `.lq` program format. `--` starts a line comment.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    Float(f64),
    /// `|...>` ket literal, content between the bars.
    Ket(String),
    Colon,
    Dot,
    DotDot,
    Bang,
    Question,
    Plus,
    Minus,
    Star,
    Caret,
    ParOp,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Backslash,
    Equals,
    LessEq,
    NotEq,
    Greater,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Nat(n) => write!(f, "{n}"),
            Tok::Float(x) => write!(f, "{x}"),
            Tok::Ket(s) => write!(f, "|{s}>"),
            Tok::Colon => write!(f, ":"),
            Tok::Dot => write!(f, "."),
            Tok::DotDot => write!(f, ".."),
            Tok::Bang => write!(f, "!"),
            Tok::Question => write!(f, "?"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Star => write!(f, "*"),
            Tok::Caret => write!(f, "^"),
            Tok::ParOp => write!(f, "||"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::Comma => write!(f, ","),
            Tok::Backslash => write!(f, "\\"),
            Tok::Equals => write!(f, "="),
            Tok::LessEq => write!(f, "<="),
            Tok::NotEq => write!(f, "!="),
            Tok::Greater => write!(f, ">"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug)]
pub struct SpannedTok {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub fn lex(src: &str) -> Result<Vec<SpannedTok>, LexError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! pos {
        () => {
            Pos { line, col }
        };
    }
    while i < chars.len() {
        let c = chars[i];
        let here = pos!();
        let mut push = |tok: Tok, width: usize| {
            out.push(SpannedTok { tok, pos: here });
            width
        };
        let advance = match c {
            '\n' => {
                line += 1;
                col = 0;
                1
            }
            c if c.is_whitespace() => 1,
            '-' if i + 1 < chars.len() && chars[i + 1] == '-' => {
                let mut j = i;
                while j < chars.len() && chars[j] != '\n' {
                    j += 1;
                }
                j - i
            }
            '|' if i + 1 < chars.len() && chars[i + 1] == '|' => push(Tok::ParOp, 2),
            '|' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' && chars[j] != '\n' {
                    j += 1;
                }
                if j >= chars.len() || chars[j] != '>' {
                    return Err(LexError { pos: here, msg: "unterminated ket literal".into() });
                }
                let content: String = chars[i + 1..j].iter().collect();
                push(Tok::Ket(content), j - i + 1)
            }
            '.' if i + 1 < chars.len() && chars[i + 1] == '.' => push(Tok::DotDot, 2),
            '.' => push(Tok::Dot, 1),
            ':' => push(Tok::Colon, 1),
            '!' if i + 1 < chars.len() && chars[i + 1] == '=' => push(Tok::NotEq, 2),
            '!' => push(Tok::Bang, 1),
            '?' => push(Tok::Question, 1),
            '+' => push(Tok::Plus, 1),
            '-' => push(Tok::Minus, 1),
            '*' => push(Tok::Star, 1),
            '^' => push(Tok::Caret, 1),
            '(' => push(Tok::LParen, 1),
            ')' => push(Tok::RParen, 1),
            '[' => push(Tok::LBracket, 1),
            ']' => push(Tok::RBracket, 1),
            '{' => push(Tok::LBrace, 1),
            '}' => push(Tok::RBrace, 1),
            ',' => push(Tok::Comma, 1),
            '\\' => push(Tok::Backslash, 1),
            '=' => push(Tok::Equals, 1),
            '<' if i + 1 < chars.len() && chars[i + 1] == '=' => push(Tok::LessEq, 2),
            '>' => push(Tok::Greater, 1),
            c if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let is_float = j + 1 < chars.len()
                    && chars[j] == '.'
                    && chars[j + 1].is_ascii_digit();
                if is_float {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    // exponent part, e.g. 1.5e-3
                    if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                        let mut k = j + 1;
                        if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                            k += 1;
                        }
                        if k < chars.len() && chars[k].is_ascii_digit() {
                            while k < chars.len() && chars[k].is_ascii_digit() {
                                k += 1;
                            }
                            j = k;
                        }
                    }
                    let text: String = chars[i..j].iter().collect();
                    let v: f64 = text.parse().map_err(|_| LexError {
                        pos: here,
                        msg: format!("bad float literal {text:?}"),
                    })?;
                    push(Tok::Float(v), j - i)
                } else {
                    let text: String = chars[i..j].iter().collect();
                    let v: u64 = text.parse().map_err(|_| LexError {
                        pos: here,
                        msg: format!("bad integer literal {text:?}"),
                    })?;
                    push(Tok::Nat(v), j - i)
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[i..j].iter().collect();
                push(Tok::Ident(text), j - i)
            }
            other => {
                return Err(LexError { pos: here, msg: format!("unexpected character {other:?}") })
            }
        };
        i += advance;
        col += advance;
    }
    Ok(out)
}
