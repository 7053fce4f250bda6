//! Recursive-descent parser for the expression grammar.
//!
//! Variables `z1..zn` and `zb1..zbn`, declared parameter names, declared
//! constant names, literals (`1.5`, `2e-3`, `i`, `pi`), operators
//! `+ - * / ^` with integer exponents, unary minus, the functions
//! `sin cos exp log conj re im abs2`, parentheses and `#` line comments.

use super::{Expr, Var};
use std::fmt;

/// Parse error with a zero-based byte offset into the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at column {}: {}", self.pos + 1, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// Declares which identifiers an expression may reference.
#[derive(Clone, Debug, Default)]
pub struct ExprContext {
    /// ambient complex dimension; enables `z1..zn` / `zb1..zbn`
    pub n: usize,
    /// parameter names, in order (`Param(k)` is `params[k]`)
    pub params: Vec<String>,
    /// named real constants, substituted at parse time
    pub constants: Vec<(String, f64)>,
}

impl ExprContext {
    pub fn ambient(n: usize) -> ExprContext {
        ExprContext {
            n,
            params: Vec::new(),
            constants: Vec::new(),
        }
    }

    pub fn parameters(names: &[String]) -> ExprContext {
        ExprContext {
            n: 0,
            params: names.to_vec(),
            constants: Vec::new(),
        }
    }

    pub fn with_constants(mut self, constants: &[(String, f64)]) -> ExprContext {
        self.constants = constants.to_vec();
        self
    }

    /// Parse `text` against this context.
    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        let tokens = lex(text)?;
        let mut p = Parser {
            ctx: self,
            tokens,
            pos: 0,
        };
        let e = p.expr()?;
        match p.peek() {
            Token::End => Ok(e),
            t => Err(ParseError {
                pos: p.peek_pos(),
                msg: format!("unexpected {}", t.describe()),
            }),
        }
    }
}

/// Convenience wrapper for [`ExprContext::parse`].
pub fn parse_expr(text: &str, ctx: &ExprContext) -> Result<Expr, ParseError> {
    ctx.parse(text)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(x) => format!("number {}", x),
            Token::Ident(s) => format!("identifier '{}'", s),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Comma => "','".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' | '\n' => i += 1,
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' | '\u{2212}' => {
                out.push((i, Token::Minus));
                i += c.len_utf8();
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            ',' => {
                out.push((i, Token::Comma));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let x: f64 = s.parse().map_err(|_| ParseError {
                    pos: start,
                    msg: format!("malformed number '{}'", s),
                })?;
                out.push((start, Token::Number(x)));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    pos: i,
                    msg: format!("unexpected character '{}'", c),
                });
            }
        }
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

const FUNCTIONS: &[&str] = &["sin", "cos", "exp", "log", "conj", "re", "im", "abs2"];

struct Parser<'a> {
    ctx: &'a ExprContext,
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn peek_pos(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].1.clone();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(ParseError {
                pos: self.peek_pos(),
                msg: format!("expected {}, found {}", want.describe(), self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.bump();
                    acc = Expr::add(acc, self.term()?);
                }
                Token::Minus => {
                    self.bump();
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.bump();
                    acc = Expr::mul(acc, self.unary()?);
                }
                Token::Slash => {
                    let pos = self.peek_pos();
                    self.bump();
                    let den = self.unary()?;
                    if den.is_zero() {
                        return Err(ParseError {
                            pos,
                            msg: "division by the literal zero constant".into(),
                        });
                    }
                    acc = Expr::quot(acc, den);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            return Ok(Expr::neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.bump();
        let k = self.exponent()?;
        Ok(Expr::pow(base, k))
    }

    fn exponent(&mut self) -> Result<i32, ParseError> {
        let mut sign = 1i32;
        let mut parens = false;
        if *self.peek() == Token::LParen {
            parens = true;
            self.bump();
        }
        if *self.peek() == Token::Minus {
            sign = -1;
            self.bump();
        }
        let pos = self.peek_pos();
        let value = match self.bump() {
            Token::Number(x) => {
                if x.fract() != 0.0 || x.abs() > i32::MAX as f64 {
                    return Err(ParseError {
                        pos,
                        msg: format!("exponent must be an integer, found {}", x),
                    });
                }
                x as i32
            }
            t => {
                return Err(ParseError {
                    pos,
                    msg: format!("exponent must be an integer literal, found {}", t.describe()),
                });
            }
        };
        if parens {
            self.expect(Token::RParen)?;
        }
        Ok(sign * value)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.peek_pos();
        match self.bump() {
            Token::Number(x) => Ok(Expr::real(x)),
            Token::LParen => {
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            Token::Ident(name) => self.ident(pos, &name),
            t => Err(ParseError {
                pos,
                msg: format!("expected a value, found {}", t.describe()),
            }),
        }
    }

    fn ident(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        if name == "i" {
            return Ok(Expr::i());
        }
        if name == "pi" {
            return Ok(Expr::real(std::f64::consts::PI));
        }
        if FUNCTIONS.contains(&name) {
            return self.call(pos, name);
        }
        if let Some(v) = self.variable(name) {
            return v.map(Expr::var);
        }
        if let Some(k) = self.ctx.params.iter().position(|p| p == name) {
            return Ok(Expr::var(Var::Param(k as u32)));
        }
        if let Some((_, x)) = self.ctx.constants.iter().find(|(c, _)| c == name) {
            return Ok(Expr::real(*x));
        }
        Err(ParseError {
            pos,
            msg: format!("unknown identifier '{}'", name),
        })
    }

    /// Recognizes `z<digits>` / `zb<digits>` and range-checks against `n`.
    fn variable(&self, name: &str) -> Option<Result<Var, ParseError>> {
        let (anti, digits) = if let Some(d) = name.strip_prefix("zb") {
            (true, d)
        } else if let Some(d) = name.strip_prefix('z') {
            (false, d)
        } else {
            return None;
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let j: usize = match digits.parse() {
            Ok(j) => j,
            Err(_) => return None,
        };
        let pos = self.tokens[self.pos - 1].0;
        if j == 0 || j > self.ctx.n {
            return Some(Err(ParseError {
                pos,
                msg: format!("variable '{}' out of range (n = {})", name, self.ctx.n),
            }));
        }
        let idx = (j - 1) as u32;
        Some(Ok(if anti { Var::Anti(idx) } else { Var::Holo(idx) }))
    }

    fn call(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        self.expect(Token::LParen)?;
        let arg = self.expr()?;
        if *self.peek() == Token::Comma {
            return Err(ParseError {
                pos,
                msg: format!("function '{}' takes exactly one argument", name),
            });
        }
        self.expect(Token::RParen)?;
        Ok(match name {
            "sin" => Expr::sin(arg),
            "cos" => Expr::cos(arg),
            "exp" => Expr::exp(arg),
            "log" => Expr::log(arg),
            "conj" => arg.conjugate(),
            "re" => Expr::re(arg),
            "im" => Expr::im(arg),
            "abs2" => Expr::abs2(arg),
            _ => unreachable!(),
        })
    }
}
