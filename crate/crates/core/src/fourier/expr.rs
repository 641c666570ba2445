//! Expressions over named algebra elements, `U` and `U*`.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ['-'] primary ('^' int | "'")*
//! primary:= identifier | 'U' | number ['i'] | '(' expr ')'
//! ```
//!
//! `'` is the adjoint; `U^k` only takes non-negative integer exponents, so
//! adjoint powers are written `(U')^k` or `U'^k`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, PartialEq)]
pub enum Expr {
    Generator { name: String, value: ComplexMatrix },
    U,
    Scalar(C64),
    Sum(Vec<Expr>),
    Neg(Box<Expr>),
    Product(Vec<Expr>),
    Power(Box<Expr>, u32),
    Adjoint(Box<Expr>),
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Generator { name, .. } => write!(f, "{name}"),
            Expr::U => write!(f, "U"),
            Expr::Scalar(c) => write!(f, "{c}"),
            Expr::Sum(v) => f.debug_tuple("sum").field(v).finish(),
            Expr::Neg(e) => f.debug_tuple("neg").field(e).finish(),
            Expr::Product(v) => f.debug_tuple("product").field(v).finish(),
            Expr::Power(e, k) => f.debug_tuple("power").field(e).field(k).finish(),
            Expr::Adjoint(e) => f.debug_tuple("adjoint").field(e).finish(),
        }
    }
}

impl Expr {
    /// Direct matrix evaluation by walking the tree.
    pub fn evaluate(&self, u: &ComplexMatrix) -> ComplexMatrix {
        let n = u.dim();
        match self {
            Expr::Generator { value, .. } => value.clone(),
            Expr::U => u.clone(),
            Expr::Scalar(c) => ComplexMatrix::identity(n).scale(*c),
            Expr::Sum(terms) => terms.iter().fold(ComplexMatrix::zeros(n), |acc, t| acc + t.evaluate(u)),
            Expr::Neg(e) => -e.evaluate(u),
            Expr::Product(fs) => fs.iter().fold(ComplexMatrix::identity(n), |acc, t| acc * t.evaluate(u)),
            Expr::Power(e, k) => e.evaluate(u).pow(*k),
            Expr::Adjoint(e) => e.evaluate(u).adjoint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Imag(f64),
    Plus,
    Minus,
    Star,
    Caret,
    Prime,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((start, Tok::Plus)),
            '-' => out.push((start, Tok::Minus)),
            '*' => out.push((start, Tok::Star)),
            '^' => out.push((start, Tok::Caret)),
            '\'' => out.push((start, Tok::Prime)),
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            c if c.is_ascii_digit() || c == '.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // exponent part
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let lit = &text[start..i];
                let value: f64 =
                    lit.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{lit}`") })?;
                if i < bytes.len()
                    && bytes[i] == b'i'
                    && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_')
                {
                    i += 1;
                    out.push((start, Tok::Imag(value)));
                } else {
                    out.push((start, Tok::Num(value)));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character `{other}`") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    dim: usize,
    table: &'a HashMap<String, ComplexMatrix>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Product(factors) })
    }

    fn factor(&mut self) -> Result<Expr> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Caret) => {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Num(v)) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 => {
                            e = Expr::Power(Box::new(e), v as u32);
                        }
                        _ => {
                            self.at -= 1;
                            return self.err("exponent must be a non-negative integer literal (write U' for adjoints)");
                        }
                    }
                }
                Some(Tok::Prime) => {
                    self.bump();
                    e = Expr::Adjoint(Box::new(e));
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Ident(name)) if name == "U" => Ok(Expr::U),
            Some(Tok::Ident(name)) => match self.table.get(&name) {
                Some(m) if m.dim() != self.dim => Err(Error::DimensionMismatch { left: self.dim, right: m.dim() }),
                Some(m) => Ok(Expr::Generator { name, value: m.clone() }),
                None => Err(Error::UnknownGenerator(name)),
            },
            Some(Tok::Num(v)) => Ok(Expr::Scalar(C64::new(v, 0.0))),
            Some(Tok::Imag(v)) => Ok(Expr::Scalar(C64::new(0.0, v))),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(e),
                    _ => {
                        self.at -= 1;
                        self.err("expected `)`")
                    }
                }
            }
            Some(t) => Err(Error::Syntax { pos, msg: format!("unexpected token {t:?}") }),
            None => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
        }
    }
}

/// Parses `text` against a generator table for operators on `C^dim`.
pub fn parse(text: &str, dim: usize, table: &HashMap<String, ComplexMatrix>) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, end: text.len(), dim, table };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> HashMap<String, ComplexMatrix> {
        let mut t = HashMap::new();
        t.insert("a".to_string(), ComplexMatrix::diag(&[1.0, 2.0]));
        t.insert("b".to_string(), ComplexMatrix::diag(&[-1.0, 0.5]));
        t
    }

    #[test]
    fn product_with_adjoint() {
        let e = parse("U * U' * U", 2, &table()).unwrap();
        assert_eq!(e, Expr::Product(vec![Expr::U, Expr::Adjoint(Box::new(Expr::U)), Expr::U]));
    }

    #[test]
    fn sum_of_two_terms() {
        match parse("a*U^2 + U'*b", 2, &table()).unwrap() {
            Expr::Sum(terms) => {
                assert_eq!(terms.len(), 2);
                assert!(matches!(&terms[0], Expr::Product(f) if matches!(f[1], Expr::Power(_, 2))));
            }
            other => panic!("expected sum, got {other:?}"),
        }
    }

    #[test]
    fn negative_power_rejected() {
        assert!(matches!(parse("U^(-1)", 2, &table()), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("U^-1", 2, &table()), Err(Error::Syntax { .. })));
        assert!(matches!(parse("U^1.5", 2, &table()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse("a + ", 2, &table()), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse("(a + b", 2, &table()), Err(Error::Syntax { pos: 6, .. })));
        assert!(matches!(parse("a $ b", 2, &table()), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("a b", 2, &table()), Err(Error::Syntax { pos: 2, .. })));
        assert!(matches!(parse("c * U", 2, &table()), Err(Error::UnknownGenerator(n)) if n == "c"));
        assert!(matches!(parse("a", 3, &table()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn literals_and_adjoint_powers() {
        let e = parse("2.5e-1i*(U')^3 - 3", 2, &table()).unwrap();
        let u = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let direct = e.evaluate(&u);
        assert_eq!(direct, ComplexMatrix::identity(2).scale_real(-3.0));
        let e = parse("U'^2", 2, &table()).unwrap();
        assert_eq!(e, Expr::Power(Box::new(Expr::Adjoint(Box::new(Expr::U))), 2));
        let e = parse("(a + i) '", 2, &table());
        assert!(matches!(e, Err(Error::UnknownGenerator(n)) if n == "i"));
        let e = parse("(a + 1i)'", 2, &table()).unwrap();
        let v = e.evaluate(&u);
        assert_eq!(v.get(1, 1), C64::new(2.0, -1.0));
    }
}
