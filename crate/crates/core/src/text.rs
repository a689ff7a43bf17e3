//! Text forms of field elements, polynomials and series, and their parser.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr     := ['+'|'-'] term (('+'|'-') term)*
//! term     := unary (('*'|'/') unary)*
//! unary    := '-' unary | atom ['^' exponent]
//! exponent := ['-'] INT | '(' ['-'] INT ['/' INT] ')'
//! atom     := INT | 'g' | 'th' | 't' | '(' expr ')'
//!           | 'O' '(' expr ')' | 'tail' '(' rat ',' rat ',' '[' expr (',' expr)* ']' ')'
//! ```
//!
//! `g` is the field generator, `th` is theta and `t` the Tate-algebra variable.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};
use crate::poly::{FqTPoly, RatFunc, TPoly, ThetaPoly};
use crate::series::{exp, CInftyElem, Exp};

fn wrap(s: String) -> String {
    if s.contains('+') || s.contains('/') {
        format!("({s})")
    } else {
        s
    }
}

fn fmt_rat(e: Exp) -> String {
    if e.is_integer() {
        e.to_integer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

fn pow_suffix(var: &str, e: Exp) -> String {
    if e.is_zero() {
        String::new()
    } else if e.is_one() {
        var.to_string()
    } else if e.is_integer() {
        format!("{var}^{}", e.to_integer())
    } else {
        format!("{var}^({})", fmt_rat(e))
    }
}

fn term(coef: String, var_part: String) -> String {
    match (coef.as_str(), var_part.is_empty()) {
        (_, true) => coef,
        ("1", false) => var_part,
        _ => format!("{}*{var_part}", wrap(coef)),
    }
}

pub fn fmt_elem(t: &FieldTower, a: FFElem) -> String {
    t.fmt_elem(a)
}

impl fmt::Display for ThetaPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tower();
        let parts: Vec<String> = (0..self.coeffs().len())
            .rev()
            .filter(|&k| !self.coeff(k).is_zero())
            .map(|k| term(t.fmt_elem(self.coeff(k)), pow_suffix("th", exp(k as i64))))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", wrap(self.num().to_string()), format_args!("({})", self.den()))
        }
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = (0..self.coeffs().len())
            .rev()
            .filter(|&j| !self.coeff(j).is_zero())
            .map(|j| term(self.coeff(j).to_string(), pow_suffix("t", exp(j as i64))))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

impl fmt::Display for FqTPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tower();
        let parts: Vec<String> = (0..self.coeffs().len())
            .rev()
            .filter(|&j| !self.coeffs()[j].is_zero())
            .map(|j| term(t.fmt_elem(self.coeffs()[j]), pow_suffix("t", exp(j as i64))))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

impl fmt::Display for CInftyElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tower();
        let mut parts: Vec<String> =
            self.terms().rev().map(|(&e, &c)| term(t.fmt_elem(c), pow_suffix("th", e))).collect();
        for ((s, k), b) in self.tails().collect::<Vec<_>>().into_iter().rev() {
            let bs: Vec<String> = b.iter().map(|&c| t.fmt_elem(c)).collect();
            parts.push(format!("tail({},{},[{}])", fmt_rat(*s), fmt_rat(*k), bs.join(",")));
        }
        if let Some(fl) = self.floor() {
            let e = if fl.is_integer() { fl.to_integer().to_string() } else { format!("({})", fmt_rat(fl)) };
            parts.push(format!("O(th^{e})"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

/// Text of a polynomial in `t` with series coefficients, highest degree first.
pub fn fmt_series_poly(coeffs: &[CInftyElem]) -> String {
    let parts: Vec<String> = (0..coeffs.len())
        .rev()
        .filter(|&j| !coeffs[j].is_exact_zero())
        .map(|j| {
            let c = coeffs[j].to_string();
            let c = if c.contains('+') || c.contains('/') || c.contains('O') { format!("({c})") } else { c };
            term(c, pow_suffix("t", exp(j as i64)))
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join("+")
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = cs[st..i].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| Error::Parse(format!("number {s} too large")))?));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(cs[st..i].iter().collect()));
        } else if "+-*/^()[],".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

pub(crate) trait Domain {
    type V: Clone;
    fn int(&self, n: i64) -> Result<Self::V>;
    fn sym(&self, name: &str) -> Result<Self::V>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Result<Self::V>;
    fn neg(&self, a: &Self::V) -> Result<Self::V>;
    fn mul(&self, a: &Self::V, b: &Self::V) -> Result<Self::V>;
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V>;
    fn pow(&self, a: &Self::V, e: Exp) -> Result<Self::V>;
    fn big_o(&self, _a: &Self::V) -> Result<Self::V> {
        Err(Error::Parse("O(...) is not allowed here".into()))
    }
    fn tail(&self, _s: Exp, _k: Exp, _b: Vec<Self::V>) -> Result<Self::V> {
        Err(Error::Parse("tail(...) is not allowed here".into()))
    }
}

struct Parser<'a, D: Domain> {
    toks: Vec<Tok>,
    pos: usize,
    dom: &'a D,
}

impl<'a, D: Domain> Parser<'a, D> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected '{c}' at token {}", self.pos)))
        }
    }
    fn num(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Tok::Num(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => Err(Error::Parse(format!("expected a number at token {}", self.pos))),
        }
    }
    fn rational(&mut self) -> Result<Exp> {
        let neg = self.eat('-');
        let a = self.num()?;
        let b = if self.eat('/') { self.num()? } else { 1 };
        if b == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        let r = Exp::new(a, b);
        Ok(if neg { -r } else { r })
    }
    fn exponent(&mut self) -> Result<Exp> {
        if self.eat('(') {
            let r = self.rational()?;
            self.expect(')')?;
            Ok(r)
        } else {
            let neg = self.eat('-');
            let n = exp(self.num()?);
            Ok(if neg { -n } else { n })
        }
    }
    fn expr(&mut self) -> Result<D::V> {
        let neg = self.eat('-');
        if !neg {
            self.eat('+');
        }
        let mut acc = self.term()?;
        if neg {
            acc = self.dom.neg(&acc)?;
        }
        loop {
            if self.eat('+') {
                let r = self.term()?;
                acc = self.dom.add(&acc, &r)?;
            } else if self.eat('-') {
                let r = self.term()?;
                acc = self.dom.add(&acc, &self.dom.neg(&r)?)?;
            } else {
                return Ok(acc);
            }
        }
    }
    fn term(&mut self) -> Result<D::V> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                let r = self.unary()?;
                acc = self.dom.mul(&acc, &r)?;
            } else if self.eat('/') {
                let r = self.unary()?;
                acc = self.dom.div(&acc, &r)?;
            } else {
                return Ok(acc);
            }
        }
    }
    fn unary(&mut self) -> Result<D::V> {
        if self.eat('-') {
            let v = self.unary()?;
            return self.dom.neg(&v);
        }
        let a = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            return self.dom.pow(&a, e);
        }
        Ok(a)
    }
    fn atom(&mut self) -> Result<D::V> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                self.dom.int(n)
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "O" => {
                        self.expect('(')?;
                        let v = self.expr()?;
                        self.expect(')')?;
                        self.dom.big_o(&v)
                    }
                    "tail" => {
                        self.expect('(')?;
                        let s = self.rational()?;
                        self.expect(',')?;
                        let k = self.rational()?;
                        self.expect(',')?;
                        self.expect('[')?;
                        let mut b = vec![self.expr()?];
                        while self.eat(',') {
                            b.push(self.expr()?);
                        }
                        self.expect(']')?;
                        self.expect(')')?;
                        self.dom.tail(s, k, b)
                    }
                    _ => self.dom.sym(&name),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn run<D: Domain>(dom: &D, s: &str) -> Result<D::V> {
    let toks = tokenize(s)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty input".into()));
    }
    let mut p = Parser { toks, pos: 0, dom };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(v)
}

struct PolyDom {
    tower: Arc<FieldTower>,
    allow_theta: bool,
    allow_t: bool,
}

impl Domain for PolyDom {
    type V = TPoly;
    fn int(&self, n: i64) -> Result<TPoly> {
        Ok(TPoly::constant(RatFunc::from_int(&self.tower, n)))
    }
    fn sym(&self, name: &str) -> Result<TPoly> {
        match name {
            "g" => Ok(TPoly::constant(RatFunc::constant(&self.tower, self.tower.generator()))),
            "th" if self.allow_theta => Ok(TPoly::constant(RatFunc::theta(&self.tower))),
            "t" if self.allow_t => Ok(TPoly::t_pow(&self.tower, 1)),
            _ => Err(Error::Parse(format!("unknown symbol {name}"))),
        }
    }
    fn add(&self, a: &TPoly, b: &TPoly) -> Result<TPoly> {
        Ok(a + b)
    }
    fn neg(&self, a: &TPoly) -> Result<TPoly> {
        Ok(-a)
    }
    fn mul(&self, a: &TPoly, b: &TPoly) -> Result<TPoly> {
        Ok(a * b)
    }
    fn div(&self, a: &TPoly, b: &TPoly) -> Result<TPoly> {
        match b.degree() {
            Some(0) => Ok(a.scale(&b.coeff(0).inv()?)),
            None => Err(Error::DivisionByZero),
            _ => Err(Error::Parse("division by a polynomial in t".into())),
        }
    }
    fn pow(&self, a: &TPoly, e: Exp) -> Result<TPoly> {
        if !e.is_integer() {
            return Err(Error::Parse("fractional exponent in a polynomial".into()));
        }
        let n = e.to_integer();
        if n < 0 {
            return match a.degree() {
                Some(0) => Ok(TPoly::constant(a.coeff(0).pow(n)?)),
                _ => Err(Error::Parse("negative power of a polynomial in t".into())),
            };
        }
        Ok((0..n).fold(TPoly::one(&self.tower), |acc, _| &acc * a))
    }
}

pub fn parse_tpoly(tower: &Arc<FieldTower>, s: &str) -> Result<TPoly> {
    run(&PolyDom { tower: tower.clone(), allow_theta: true, allow_t: true }, s)
}

pub fn parse_ratfunc(tower: &Arc<FieldTower>, s: &str) -> Result<RatFunc> {
    let p = run(&PolyDom { tower: tower.clone(), allow_theta: true, allow_t: false }, s)?;
    Ok(p.coeff(0))
}

pub fn parse_ffelem(tower: &Arc<FieldTower>, s: &str) -> Result<FFElem> {
    let p = run(&PolyDom { tower: tower.clone(), allow_theta: false, allow_t: false }, s)?;
    let c = p.coeff(0);
    Ok(c.num().coeff(0))
}

pub fn parse_fq_tpoly(tower: &Arc<FieldTower>, s: &str) -> Result<FqTPoly> {
    let p = run(&PolyDom { tower: tower.clone(), allow_theta: false, allow_t: true }, s)?;
    FqTPoly::new(tower, p.coeffs().iter().map(|c| c.num().coeff(0)).collect())
}

struct SeriesDom {
    tower: Arc<FieldTower>,
}

fn as_constant(v: &CInftyElem) -> Option<FFElem> {
    if !v.is_exact() || v.has_tails() {
        return None;
    }
    let ts: Vec<_> = v.terms().collect();
    match ts.as_slice() {
        [] => Some(FFElem::ZERO),
        [(e, c)] if e.is_zero() => Some(**c),
        _ => None,
    }
}

fn as_monomial(v: &CInftyElem) -> Option<(FFElem, Exp)> {
    if !v.is_exact() || v.has_tails() {
        return None;
    }
    let ts: Vec<_> = v.terms().collect();
    match ts.as_slice() {
        [(e, c)] => Some((**c, **e)),
        _ => None,
    }
}

impl Domain for SeriesDom {
    type V = CInftyElem;
    fn int(&self, n: i64) -> Result<CInftyElem> {
        Ok(CInftyElem::constant(&self.tower, self.tower.from_int(n)))
    }
    fn sym(&self, name: &str) -> Result<CInftyElem> {
        match name {
            "g" => Ok(CInftyElem::constant(&self.tower, self.tower.generator())),
            "th" => Ok(CInftyElem::theta(&self.tower)),
            _ => Err(Error::Parse(format!("unknown symbol {name}"))),
        }
    }
    fn add(&self, a: &CInftyElem, b: &CInftyElem) -> Result<CInftyElem> {
        Ok(a.add(b))
    }
    fn neg(&self, a: &CInftyElem) -> Result<CInftyElem> {
        Ok(a.neg())
    }
    fn mul(&self, a: &CInftyElem, b: &CInftyElem) -> Result<CInftyElem> {
        a.mul(b)
    }
    fn div(&self, a: &CInftyElem, b: &CInftyElem) -> Result<CInftyElem> {
        a.mul(&b.inv(None)?)
    }
    fn pow(&self, a: &CInftyElem, e: Exp) -> Result<CInftyElem> {
        if let Some((c, x)) = as_monomial(a) {
            if e.is_integer() {
                return Ok(CInftyElem::monomial(&self.tower, self.tower.pow(c, e.to_integer()), x * e));
            }
            if c == FFElem::ONE {
                return Ok(CInftyElem::monomial(&self.tower, c, x * e));
            }
        }
        if e.is_integer() && !e.is_negative() {
            return a.pow(e.to_integer() as u32);
        }
        Err(Error::Parse("unsupported power".into()))
    }
    fn big_o(&self, a: &CInftyElem) -> Result<CInftyElem> {
        match as_monomial(a) {
            Some((c, e)) if c == FFElem::ONE => Ok(CInftyElem::zero_to(&self.tower, e)),
            _ => Err(Error::Parse("O(...) takes a power of th".into())),
        }
    }
    fn tail(&self, s: Exp, k: Exp, b: Vec<CInftyElem>) -> Result<CInftyElem> {
        let b = b
            .iter()
            .map(|v| as_constant(v).ok_or_else(|| Error::Parse("tail coefficients must be constants".into())))
            .collect::<Result<Vec<_>>>()?;
        CInftyElem::tail(&self.tower, s, k, b)
    }
}

pub fn parse_series(tower: &Arc<FieldTower>, s: &str) -> Result<CInftyElem> {
    run(&SeriesDom { tower: tower.clone() }, s)
}

struct SeriesPolyDom {
    inner: SeriesDom,
}

fn lift1(v: CInftyElem) -> Vec<CInftyElem> {
    vec![v]
}

impl Domain for SeriesPolyDom {
    type V = Vec<CInftyElem>;
    fn int(&self, n: i64) -> Result<Self::V> {
        self.inner.int(n).map(lift1)
    }
    fn sym(&self, name: &str) -> Result<Self::V> {
        if name == "t" {
            let t = &self.inner.tower;
            return Ok(vec![CInftyElem::zero(t), CInftyElem::one(t)]);
        }
        self.inner.sym(name).map(lift1)
    }
    fn add(&self, a: &Self::V, b: &Self::V) -> Result<Self::V> {
        let n = a.len().max(b.len());
        let z = CInftyElem::zero(&self.inner.tower);
        Ok((0..n).map(|j| a.get(j).unwrap_or(&z).add(b.get(j).unwrap_or(&z))).collect())
    }
    fn neg(&self, a: &Self::V) -> Result<Self::V> {
        Ok(a.iter().map(|c| c.neg()).collect())
    }
    fn mul(&self, a: &Self::V, b: &Self::V) -> Result<Self::V> {
        let mut out = vec![CInftyElem::zero(&self.inner.tower); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].add(&x.mul(y)?);
            }
        }
        Ok(out)
    }
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V> {
        if b.len() != 1 {
            return Err(Error::Parse("division by a polynomial in t".into()));
        }
        let inv = b[0].inv(None)?;
        a.iter().map(|c| c.mul(&inv)).collect()
    }
    fn pow(&self, a: &Self::V, e: Exp) -> Result<Self::V> {
        if a.len() == 1 {
            return self.inner.pow(&a[0], e).map(lift1);
        }
        if !e.is_integer() || e.is_negative() {
            return Err(Error::Parse("unsupported power of t".into()));
        }
        let one = vec![CInftyElem::one(&self.inner.tower)];
        (0..e.to_integer()).try_fold(one, |acc, _| self.mul(&acc, a))
    }
    fn big_o(&self, a: &Self::V) -> Result<Self::V> {
        if a.len() != 1 {
            return Err(Error::Parse("O(...) takes a power of th".into()));
        }
        self.inner.big_o(&a[0]).map(lift1)
    }
    fn tail(&self, s: Exp, k: Exp, b: Vec<Self::V>) -> Result<Self::V> {
        let b = b
            .into_iter()
            .map(|v| if v.len() == 1 { Ok(v[0].clone()) } else { Err(Error::Parse("bad tail".into())) })
            .collect::<Result<Vec<_>>>()?;
        self.inner.tail(s, k, b).map(lift1)
    }
}

/// Parses a polynomial in `t` with series coefficients (as printed by [`fmt_series_poly`]).
pub fn parse_series_poly(tower: &Arc<FieldTower>, s: &str) -> Result<Vec<CInftyElem>> {
    let mut v = run(&SeriesPolyDom { inner: SeriesDom { tower: tower.clone() } }, s)?;
    while v.last().is_some_and(|c| c.is_exact_zero()) {
        v.pop();
    }
    Ok(v)
}

/// Parses an `F_p`-polynomial given either as a coefficient list `1,0,1`
/// (low degree first) or in the variable `x`, e.g. `x^2+1`.
pub fn parse_fp_poly(p: u32, s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.contains('x') {
        let prime = FieldTower::new(p, 1, None, 1)?;
        let t = parse_tpoly(&prime, &s.replace('x', "t"))?;
        return Ok(t.coeffs().iter().map(|c| c.num().coeff(0).packed()).collect());
    }
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<i64>()
                .map(|v| v.rem_euclid(p as i64) as u32)
                .map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_elements_round_trip() {
        let t = FieldTower::new(3, 1, None, 3).unwrap();
        for a in t.elements() {
            assert_eq!(parse_ffelem(&t, &t.fmt_elem(a)).unwrap(), a);
        }
        assert_eq!(t.fmt_elem(parse_ffelem(&t, "g^2+2*g+1").unwrap()), "g^2+2*g+1");
    }

    #[test]
    fn rational_functions_round_trip() {
        let t = FieldTower::for_q(3).unwrap();
        let x = parse_ratfunc(&t, "(th^2+1)/(th-1)").unwrap();
        assert_eq!(x.norm_exp(), Some(1));
        assert_eq!(parse_ratfunc(&t, &x.to_string()).unwrap(), x);
        assert_eq!(parse_ratfunc(&t, "1/(th+2)").unwrap().to_string(), "1/(th+2)");
    }

    #[test]
    fn tpoly_text() {
        let t = FieldTower::for_q(3).unwrap();
        let g = parse_tpoly(&t, "-t+2*th").unwrap();
        assert_eq!(g.to_string(), "2*t+2*th");
        assert_eq!(parse_tpoly(&t, &g.to_string()).unwrap(), g);
    }

    #[test]
    fn series_text() {
        let t = FieldTower::new(3, 1, None, 2).unwrap();
        let s = "(g+1)*th^2+th^(2/3)+2+tail(0,1,[g,1])+O(th^-5)";
        let x = parse_series(&t, s).unwrap();
        assert_eq!(x.to_string(), s);
        let y = parse_series(&t, "th^-1+th^-2+O(th^-4)").unwrap();
        assert_eq!(y.to_string(), "th^-1+th^-2+O(th^-4)");
        assert_eq!(parse_series(&t, "0").unwrap(), CInftyElem::zero(&t));
    }

    #[test]
    fn series_polynomials_round_trip() {
        let t = FieldTower::for_q(3).unwrap();
        let v = parse_series_poly(&t, "(th+tail(0,1,[1]))*t^2+2").unwrap();
        assert_eq!(v.len(), 3);
        let s = fmt_series_poly(&v);
        assert_eq!(parse_series_poly(&t, &s).unwrap(), v);
    }

    #[test]
    fn fp_polynomials() {
        assert_eq!(parse_fp_poly(3, "x^2+1").unwrap(), vec![1, 0, 1]);
        assert_eq!(parse_fp_poly(3, "1,0,1").unwrap(), vec![1, 0, 1]);
    }

    proptest! {
        #[test]
        fn series_round_trip(terms in prop::collection::vec((-20i64..6, 1i64..4, 1u32..9), 0..6), fl in proptest::option::of(-30i64..-20)) {
            let t = FieldTower::new(3, 1, None, 2).unwrap();
            let mut x = terms.iter().fold(CInftyElem::zero(&t), |acc, &(a, e, c)| {
                acc.add(&CInftyElem::monomial(&t, FFElem(c), Exp::new(a, e)))
            });
            if let Some(f) = fl {
                x = x.truncate(exp(f));
            }
            prop_assert_eq!(parse_series(&t, &x.to_string()).unwrap(), x);
        }
    }
}
