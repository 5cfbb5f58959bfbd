//! Reader for rendered expressions.
//!
//! Accepts the engine's own output syntax: `+ - * / ^`, parentheses, the
//! imaginary unit `i`, parameter names, momenta `p0..p3` (or `P0..P3`),
//! coordinates `x0..x3`, the functions `cos sin cosh sinh exp` of a linear
//! momentum argument, and a trailing `O(n)` truncation marker.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use crate::duality::PhaseValue;
use crate::momentum::{FunctionError, LinearForm, MomentumFunction, Transcendental};
use crate::scalar::{GaussRat, Param, ParamScalar, MOMENTUM_COUNT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset} in `{input}`")]
pub struct ParseError {
    pub input: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(BigRational),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Token)>, (usize, String)> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(k + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = k;
            while k < bytes.len() && (bytes[k].is_ascii_digit() || bytes[k] == b'.') {
                k += 1;
            }
            let mut exponent = 0i64;
            if k < bytes.len() && (bytes[k] == b'e' || bytes[k] == b'E') {
                let mut j = k + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    exponent = s[k + 1..j].parse().map_err(|_| (k, "bad exponent".to_string()))?;
                    k = j;
                }
            }
            let text = &s[start..k];
            let mantissa = text.split('e').next().unwrap_or(text).split('E').next().unwrap_or(text);
            out.push((
                start,
                Token::Number(decimal(mantissa, exponent).ok_or((start, format!("bad number `{text}`")))?),
            ));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = k;
            while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            out.push((start, Token::Ident(s[start..k].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((k, Token::Op(c)));
            k += 1;
        } else {
            return Err((k, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn decimal(mantissa: &str, exponent: i64) -> Option<BigRational> {
    let (int, frac) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let ten = BigInt::from(10);
    let shift = exponent - frac.len() as i64;
    let scale = num_traits::pow(ten, shift.unsigned_abs() as usize);
    Some(if shift >= 0 { BigRational::from_integer(digits * scale) } else { BigRational::new(digits, scale) })
}

/// `F(p) + Σ c_μ x_μ` with `c_μ` still allowed to depend on `p` while parsing.
#[derive(Clone)]
struct Value {
    f: MomentumFunction,
    lin: [MomentumFunction; MOMENTUM_COUNT],
}

impl Value {
    fn function(f: MomentumFunction) -> Self {
        Value { f, lin: Default::default() }
    }

    fn has_linear(&self) -> bool {
        self.lin.iter().any(|c| !c.is_zero())
    }

    fn combine(&self, o: &Value, sign: i64) -> Result<Value, FunctionError> {
        let s = ParamScalar::int(sign);
        let mut lin = self.lin.clone();
        for (a, b) in lin.iter_mut().zip(&o.lin) {
            *a = a.checked_add(&b.scale(&s))?;
        }
        Ok(Value { f: self.f.checked_add(&o.f.scale(&s))?, lin })
    }

    fn mul(&self, o: &Value) -> Result<Value, String> {
        if self.has_linear() && o.has_linear() {
            return Err("product of two coordinates is not a phase-space value".into());
        }
        let e = |r: Result<MomentumFunction, FunctionError>| r.map_err(|e| e.to_string());
        let mut lin: [MomentumFunction; MOMENTUM_COUNT] = Default::default();
        for mu in 0..MOMENTUM_COUNT {
            lin[mu] = e(e(self.f.checked_mul(&o.lin[mu]))?.checked_add(&e(o.f.checked_mul(&self.lin[mu]))?))?;
        }
        Ok(Value { f: e(self.f.checked_mul(&o.f))?, lin })
    }

    fn scale(&self, c: &ParamScalar) -> Value {
        Value { f: self.f.scale(c), lin: self.lin.clone().map(|l| l.scale(c)) }
    }
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<(usize, Token)>,
    pos: usize,
    order: Option<u32>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        let offset = self.tokens.get(self.pos).map(|t| t.0).unwrap_or(self.input.len());
        ParseError { input: self.input.to_string(), offset, message: message.into() }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> PResult<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> PResult<Value> {
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        let mut acc: Option<Value> = None;
        loop {
            if let Some(Token::Ident(name)) = self.peek() {
                if name == "O" && self.tokens.get(self.pos + 1).map(|t| &t.1) == Some(&Token::Op('(')) {
                    self.truncation_marker()?;
                    break;
                }
            }
            let t = self.term()?;
            acc = Some(match acc {
                None => t.scale(&ParamScalar::int(sign)),
                Some(a) => a.combine(&t, sign).map_err(|e| self.error(e.to_string()))?,
            });
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else {
                break;
            }
        }
        acc.ok_or_else(|| self.error("empty expression"))
    }

    fn truncation_marker(&mut self) -> PResult<()> {
        self.pos += 1;
        self.expect('(')?;
        let n = match self.tokens.get(self.pos).map(|t| t.1.clone()) {
            Some(Token::Number(q)) if q.is_integer() && q > BigRational::zero() => {
                self.pos += 1;
                u32::try_from(q.to_integer()).map_err(|_| self.error("order too large"))?
            }
            _ => return Err(self.error("expected a positive integer order")),
        };
        self.expect(')')?;
        if self.order.is_some() {
            return Err(self.error("repeated truncation marker"));
        }
        self.order = Some(n - 1u32);
        Ok(())
    }

    fn term(&mut self) -> PResult<Value> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                let rhs = self.power()?;
                acc = acc.mul(&rhs).map_err(|e| self.error(e))?;
            } else if self.eat('/') {
                let q = match self.tokens.get(self.pos).map(|t| t.1.clone()) {
                    Some(Token::Number(q)) if !q.is_zero() => {
                        self.pos += 1;
                        q
                    }
                    _ => return Err(self.error("division only by a nonzero number")),
                };
                acc = acc.scale(&ParamScalar::constant(GaussRat::new(q.recip(), BigRational::zero())));
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> PResult<Value> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let e = match self.tokens.get(self.pos).map(|t| t.1.clone()) {
            Some(Token::Number(q)) if q.is_integer() && q >= BigRational::zero() => {
                self.pos += 1;
                u32::try_from(q.to_integer()).map_err(|_| self.error("exponent too large"))?
            }
            _ => return Err(self.error("expected a nonnegative integer exponent")),
        };
        let mut acc = Value::function(MomentumFunction::one());
        for _ in 0..e {
            acc = acc.mul(&base).map_err(|m| self.error(m))?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> PResult<Value> {
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error("unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Token::Number(q) => Ok(Value::function(MomentumFunction::scalar(&ParamScalar::constant(GaussRat::new(
                q,
                BigRational::zero(),
            ))))),
            Token::Op('(') => {
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Token::Op('-') => Ok(self.power()?.scale(&ParamScalar::int(-1))),
            Token::Op(c) => {
                self.pos -= 1;
                Err(self.error(format!("unexpected `{c}`")))
            }
            Token::Ident(name) => self.identifier(&name),
        }
    }

    fn identifier(&mut self, name: &str) -> PResult<Value> {
        if name == "i" {
            return Ok(Value::function(MomentumFunction::scalar(&ParamScalar::i())));
        }
        if let Some(kind) = Transcendental::from_name(name) {
            self.expect('(')?;
            let arg = self.expr()?;
            self.expect(')')?;
            if arg.has_linear() {
                return Err(self.error(format!("{name} of a coordinate")));
            }
            let lf = arg
                .f
                .as_exact_polynomial()
                .and_then(|p| LinearForm::from_poly(&p))
                .ok_or_else(|| self.error(format!("argument of {name} must be linear in the momenta")))?;
            return Ok(Value::function(MomentumFunction::atom(kind, &lf)));
        }
        if let Some(p) = Param::from_name(name) {
            return Ok(Value::function(MomentumFunction::scalar(&ParamScalar::param(p))));
        }
        let index = |rest: &str| rest.parse::<usize>().ok().filter(|&m| m < MOMENTUM_COUNT && rest.len() == 1);
        if let Some(mu) = name.strip_prefix(['p', 'P']).and_then(index) {
            return Ok(Value::function(MomentumFunction::momentum(mu)));
        }
        if let Some(mu) = name.strip_prefix('x').and_then(index) {
            let mut v = Value::function(MomentumFunction::zero());
            v.lin[mu] = MomentumFunction::one();
            return Ok(v);
        }
        self.pos -= 1;
        Err(self.error(format!("unknown identifier `{name}`")))
    }
}

fn run(input: &str) -> PResult<(Value, Option<u32>)> {
    let tokens =
        tokenize(input).map_err(|(offset, message)| ParseError { input: input.to_string(), offset, message })?;
    let mut p = Parser { input, tokens, pos: 0, order: None };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.error("trailing input"));
    }
    Ok((v, p.order))
}

/// Reads `F(p) + Σ c_μ x_μ`.
pub fn parse_phase_value(input: &str) -> Result<PhaseValue, ParseError> {
    let (v, order) = run(input)?;
    let fail = |m: &str| ParseError { input: input.to_string(), offset: 0, message: m.to_string() };
    let mut linear: [ParamScalar; MOMENTUM_COUNT] = Default::default();
    for (c, l) in linear.iter_mut().zip(&v.lin) {
        *c = l
            .as_exact_polynomial()
            .and_then(ParamScalar::from_poly)
            .ok_or_else(|| fail("coordinate coefficients must be momentum-free parameters"))?;
    }
    let function = match order {
        Some(n) => v.f.with_order(n).map_err(|e| fail(&e.to_string()))?,
        None => v.f,
    };
    Ok(PhaseValue { function, linear })
}

/// Reads a momentum function.
pub fn parse_function(input: &str) -> Result<MomentumFunction, ParseError> {
    let v = parse_phase_value(input)?;
    if v.linear.iter().any(|c| !c.is_zero()) {
        return Err(ParseError { input: input.into(), offset: 0, message: "coordinates not allowed here".into() });
    }
    Ok(v.function)
}

/// Reads a parameter-ring value such as `1/10`, `0.25` or `2*alpha`.
pub fn parse_scalar(input: &str) -> Result<ParamScalar, ParseError> {
    let f = parse_function(input)?;
    f.as_exact_polynomial().and_then(ParamScalar::from_poly).ok_or_else(|| ParseError {
        input: input.into(),
        offset: 0,
        message: "expected a momentum-free exact value".into(),
    })
}

/// Exact rational from a decimal literal such as `0.1` or `1e-3`.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let (m, e) = match text.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse().ok()?),
        None => (text, 0),
    };
    let (neg, m) = match m.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, m),
    };
    let q = decimal(m, e)?;
    Some(if neg { -q } else { q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duality::{preset_table, RelationTable, PRESETS};
    use proptest::prelude::*;

    #[test]
    fn reads_rendered_relations() {
        let v = parse_phase_value("2*i*hbar*alpha*x2").unwrap();
        assert_eq!(v.render(), "2*i*hbar*alpha*x2");
        let f = parse_function("-i*hbar*cos(alpha*p0)").unwrap();
        assert_eq!(f.render('p'), "-i*hbar*cos(alpha*p0)");
        assert_eq!(parse_scalar("0.1").unwrap(), ParamScalar::ratio(1, 10));
        assert_eq!(parse_scalar("1e-2").unwrap(), ParamScalar::ratio(1, 100));
        assert_eq!(
            parse_scalar("1/2*beta").unwrap(),
            ParamScalar::param(Param::Beta).scale(&GaussRat::from_ratio(1, 2))
        );
    }

    #[test]
    fn reads_truncated_series() {
        let f = parse_function("1 - 1/2*alpha^2*p0^2 + O(3)").unwrap();
        assert_eq!(f.order(), Some(2));
        assert_eq!(f.render('p'), "1 - 1/2*alpha^2*p0^2 + O(3)");
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in ["", "x0*x1", "cos(x0)", "foo", "2*/3", "p7", "(alpha", "1/0", "cos(p0*p1)"] {
            assert!(parse_phase_value(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn preset_tables_round_trip() {
        for name in PRESETS {
            let t = preset_table(name).unwrap();
            for (a, b) in RelationTable::display_pairs() {
                let v = t.get(a, b);
                let back = parse_phase_value(&v.render()).unwrap();
                assert_eq!(back, v, "{name} [{a},{b}] = {}", v.render());
            }
        }
    }

    proptest! {
        #[test]
        fn polynomial_values_round_trip(c in -20i64..20, d in 1i64..9, e in 0u32..4, mu in 0usize..4, nu in 0usize..4) {
            let f = MomentumFunction::momentum(mu)
                .checked_mul(&MomentumFunction::scalar(&ParamScalar::param(Param::Alpha).pow(e)))
                .unwrap()
                .scale(&ParamScalar::ratio(c, d));
            let v = PhaseValue { function: f, linear: Default::default() }
                .add(&PhaseValue::coordinate(nu, ParamScalar::param(Param::Beta).scale(&GaussRat::from_parts((0, 1), (c, d)))));
            prop_assert_eq!(parse_phase_value(&v.render()).unwrap(), v);
        }
    }
}
