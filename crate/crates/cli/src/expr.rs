//! Expression language for operators and complex scalars.
//!
//! Grammar:
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//! A number followed immediately by `i` is an imaginary literal; the bare
//! name `i` is the imaginary unit. Scalars and operators mix freely under `*`;
//! `+`/`-` require two operators or two scalars.

use num_complex::Complex64 as C64;

use nhur::Operator;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(C64),
    Ident(String),
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && matches!(chars[i], '0'..='9' | '.') {
                    i += 1;
                }
                // Exponent part, e.g. 2e-3.
                if i < chars.len()
                    && (chars[i] == 'e' || chars[i] == 'E')
                    && i + 1 < chars.len()
                    && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '+' || chars[i + 1] == '-')
                {
                    i += 2;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let re: f64 = text.parse().map_err(|_| format!("bad number '{text}'"))?;
                if i < chars.len() && chars[i] == 'i' {
                    i += 1;
                    out.push(Token::Num(C64::new(0.0, re)));
                } else {
                    out.push(Token::Num(C64::new(re, 0.0)));
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character '{other}'")),
        }
    }
    Ok(out)
}

/// An evaluated expression: a complex scalar or an operator.
#[derive(Debug, Clone)]
pub enum Value {
    Scalar(C64),
    Op(Operator),
}

impl Value {
    pub fn into_operator(self, what: &str) -> Result<Operator, String> {
        match self {
            Value::Op(op) => Ok(op),
            Value::Scalar(_) => Err(format!("{what}: expected an operator, got a scalar")),
        }
    }

    pub fn into_scalar(self, what: &str) -> Result<C64, String> {
        match self {
            Value::Scalar(z) => Ok(z),
            Value::Op(_) => Err(format!("{what}: expected a scalar, got an operator")),
        }
    }
}

/// Name and function resolution hook provided by the runner.
pub trait Resolver {
    fn resolve_name(&mut self, name: &str) -> Result<Value, String>;
    fn apply_function(&mut self, name: &str, arg: Value) -> Result<Value, String>;
}

struct Parser<'a, R: Resolver> {
    tokens: Vec<Token>,
    pos: usize,
    resolver: &'a mut R,
}

impl<'a, R: Resolver> Parser<'a, R> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Value, String> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            let minus = match tok {
                Token::Plus => false,
                Token::Minus => true,
                _ => break,
            };
            self.next();
            let rhs = self.term()?;
            acc = add(acc, rhs, minus)?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value, String> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.next();
            let rhs = self.factor()?;
            acc = mul(acc, rhs)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Value, String> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            let v = self.factor()?;
            return mul(Value::Scalar(C64::new(-1.0, 0.0)), v);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Value, String> {
        match self.next() {
            Some(Token::Num(z)) => Ok(Value::Scalar(z)),
            Some(Token::Ident(name)) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    self.next();
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Token::RParen) => {}
                        _ => return Err(format!("missing ')' after {name}(...)")),
                    }
                    self.resolver.apply_function(&name, arg)
                } else {
                    self.resolver.resolve_name(&name)
                }
            }
            Some(Token::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(v),
                    _ => Err("missing ')'".into()),
                }
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}

fn add(lhs: Value, rhs: Value, minus: bool) -> Result<Value, String> {
    let sign = if minus { -1.0 } else { 1.0 };
    match (lhs, rhs) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(a + b * sign)),
        (Value::Op(a), Value::Op(b)) => {
            if a.dim() != b.dim() {
                return Err(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
            }
            let b = b.scale(C64::new(sign, 0.0));
            Ok(Value::Op(&a + &b))
        }
        _ => Err("cannot add a scalar and an operator; multiply by the identity first".into()),
    }
}

fn mul(lhs: Value, rhs: Value) -> Result<Value, String> {
    match (lhs, rhs) {
        (Value::Scalar(a), Value::Scalar(b)) => Ok(Value::Scalar(a * b)),
        (Value::Scalar(a), Value::Op(b)) | (Value::Op(b), Value::Scalar(a)) => {
            Ok(Value::Op(b.scale(a)))
        }
        (Value::Op(a), Value::Op(b)) => {
            if a.dim() != b.dim() {
                return Err(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
            }
            Ok(Value::Op(&a * &b))
        }
    }
}

/// Evaluates an expression against the given resolver.
pub fn eval<R: Resolver>(src: &str, resolver: &mut R) -> Result<Value, String> {
    let tokens = lex(src)?;
    if tokens.is_empty() {
        return Err("empty expression".into());
    }
    let mut parser = Parser { tokens, pos: 0, resolver };
    let v = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("trailing input after position {}", parser.pos));
    }
    Ok(v)
}

/// A resolver that only knows the imaginary unit; used for scalar literals.
pub struct ScalarOnly;

impl Resolver for ScalarOnly {
    fn resolve_name(&mut self, name: &str) -> Result<Value, String> {
        if name == "i" {
            Ok(Value::Scalar(C64::new(0.0, 1.0)))
        } else {
            Err(format!("unknown name '{name}' in a scalar expression"))
        }
    }

    fn apply_function(&mut self, name: &str, _arg: Value) -> Result<Value, String> {
        Err(format!("unknown function '{name}' in a scalar expression"))
    }
}

/// Parses a complex literal such as "1+0.5i", "-i" or "2e-3".
pub fn parse_complex(src: &str) -> Result<C64, String> {
    eval(src, &mut ScalarOnly)?.into_scalar(src)
}
