//! Approximations of elements of `C_infinity`: Laurent series in `1/theta`
//! with rational exponents, a certified precision floor, and exact
//! Frobenius tails.
//!
//! A tail `tail(s, k, [b_1, ..., b_P])` stands for the infinite sum
//! `sum_{i>=1} b_i theta^(s + k/q^i)` with `b` periodic of period `P`. Such
//! sums are what Artin-Schreier equations with positive exponents produce,
//! e.g. `y^q - y = theta` is solved by `theta^(1/q) + theta^(1/q^2) + ...`.
//! Tails are kept in a normal form (`1/q < k <= 1`, minimal period) so that
//! every element has exactly one representation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed};

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};
use crate::poly::{unify2, RatFunc, ThetaPoly};

/// Exponents of `theta`.
pub type Exp = Ratio<i64>;

/// Default number of `theta`-digits kept when an exact input must be expanded.
pub const DEFAULT_PREC: i64 = 40;

pub fn exp(n: i64) -> Exp {
    Exp::from_integer(n)
}

/// An exponent extended by `-inf` and `+inf`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum ExtExp {
    NegInf,
    Finite(Exp),
    PosInf,
}

impl ExtExp {
    pub fn from_opt(e: Option<Exp>) -> Self {
        e.map_or(ExtExp::NegInf, ExtExp::Finite)
    }
    pub fn finite(self) -> Option<Exp> {
        match self {
            ExtExp::Finite(e) => Some(e),
            _ => None,
        }
    }
    pub fn is_finite(self) -> bool {
        matches!(self, ExtExp::Finite(_))
    }
}

impl fmt::Display for ExtExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtExp::NegInf => write!(f, "-inf"),
            ExtExp::PosInf => write!(f, "inf"),
            ExtExp::Finite(e) => write!(f, "{e}"),
        }
    }
}

/// Outcome of comparing two approximations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Comparison {
    Equal,
    Unequal,
    Indistinguishable,
}

type TailKey = (Exp, Exp);

/// A certified approximation of an element of `C_infinity`.
#[derive(Clone, Debug)]
pub struct CInftyElem {
    tower: Arc<FieldTower>,
    terms: BTreeMap<Exp, FFElem>,
    tails: BTreeMap<TailKey, Vec<FFElem>>,
    floor: Option<Exp>,
}

impl PartialEq for CInftyElem {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = align(self, other);
        a.floor == b.floor && a.terms == b.terms && a.tails == b.tails
    }
}
impl Eq for CInftyElem {}

fn align(a: &CInftyElem, b: &CInftyElem) -> (CInftyElem, CInftyElem) {
    if a.tower.same(&b.tower) {
        return (a.clone(), b.clone());
    }
    let t = unify2(&a.tower, &b.tower);
    (a.embed(&t).unwrap(), b.embed(&t).unwrap())
}

fn minimal_period(mut b: Vec<FFElem>) -> Vec<FFElem> {
    let n = b.len();
    for d in 1..n {
        if n % d == 0 && (d..n).all(|i| b[i] == b[i - d]) {
            b.truncate(d);
            return b;
        }
    }
    b
}

/// `q^(-i)` as an exponent, or `None` on overflow.
fn inv_q_pow(q: i64, i: u32) -> Option<Exp> {
    q.checked_pow(i).map(|d| Exp::new(1, d))
}

impl CInftyElem {
    /// Exact zero.
    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        CInftyElem { tower: tower.clone(), terms: BTreeMap::new(), tails: BTreeMap::new(), floor: None }
    }
    /// `O(theta^floor)`.
    pub fn zero_to(tower: &Arc<FieldTower>, floor: Exp) -> Self {
        let mut z = Self::zero(tower);
        z.floor = Some(floor);
        z
    }
    pub fn constant(tower: &Arc<FieldTower>, c: FFElem) -> Self {
        Self::monomial(tower, c, exp(0))
    }
    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::constant(tower, FFElem::ONE)
    }
    /// `c * theta^e`, exact.
    pub fn monomial(tower: &Arc<FieldTower>, c: FFElem, e: Exp) -> Self {
        let mut z = Self::zero(tower);
        z.add_term(e, c);
        z
    }
    pub fn theta(tower: &Arc<FieldTower>) -> Self {
        Self::monomial(tower, FFElem::ONE, exp(1))
    }
    /// The element `sum_{i>=1} b_i theta^(s + k/q^i)`, exact.
    pub fn tail(tower: &Arc<FieldTower>, s: Exp, k: Exp, b: Vec<FFElem>) -> Result<Self> {
        if b.is_empty() || !k.is_positive() {
            return Err(Error::Parse("a tail needs a positive scale and at least one coefficient".into()));
        }
        let mut z = Self::zero(tower);
        z.add_tail(s, k, b);
        Ok(z)
    }

    /// Laurent expansion of a rational function, certified down to `floor`
    /// (exclusive); polynomials are exact.
    pub fn from_ratfunc(x: &RatFunc, floor: Exp) -> Self {
        let tower = x.tower().clone();
        let mut out = Self::zero(&tower);
        if x.is_zero() {
            return out;
        }
        let num = x.num();
        if x.is_poly() {
            for (k, &c) in num.coeffs().iter().enumerate() {
                out.add_term(exp(k as i64), c);
            }
            return out;
        }
        let den = x.den();
        let d = den.degree().unwrap() as i64;
        let lc_inv = tower.inv(den.lc()).unwrap();
        let mut rem: BTreeMap<i64, FFElem> = num
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, &c)| (k as i64, c))
            .collect();
        let fl = floor.floor().to_integer();
        out.floor = Some(floor);
        while let Some((&k, &r)) = rem.iter().next_back() {
            let e = k - d;
            if exp(e) <= floor {
                return out;
            }
            let c = tower.mul(r, lc_inv);
            out.add_term(exp(e), c);
            for (j, &dj) in den.coeffs().iter().enumerate() {
                let pos = e + j as i64;
                if pos <= fl + d - 1 && pos != k {
                    continue;
                }
                let v = tower.sub(rem.get(&pos).copied().unwrap_or(FFElem::ZERO), tower.mul(c, dj));
                if v.is_zero() {
                    rem.remove(&pos);
                } else {
                    rem.insert(pos, v);
                }
            }
            rem.remove(&k);
        }
        out.floor = None;
        out
    }

    /// Laurent expansion keeping `prec` digits below the leading exponent.
    pub fn embed_ratfunc(x: &RatFunc, prec: i64) -> Self {
        let top = x.norm_exp().unwrap_or(0);
        Self::from_ratfunc(x, exp(top - prec))
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    /// Explicit terms, by increasing exponent.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exp, &FFElem)> {
        self.terms.iter()
    }
    /// Tails as `((s, k), b)`.
    pub fn tails(&self) -> impl Iterator<Item = (&TailKey, &Vec<FFElem>)> {
        self.tails.iter()
    }
    pub fn has_tails(&self) -> bool {
        !self.tails.is_empty()
    }
    pub fn floor(&self) -> Option<Exp> {
        self.floor
    }
    pub fn is_exact(&self) -> bool {
        self.floor.is_none()
    }
    fn has_content(&self) -> bool {
        !self.terms.is_empty() || !self.tails.is_empty()
    }
    pub fn is_exact_zero(&self) -> bool {
        !self.has_content() && self.floor.is_none()
    }
    /// No information survives above the floor.
    pub fn is_zero_at_precision(&self) -> bool {
        !self.has_content()
    }
    /// Least common denominator of the explicit exponents.
    pub fn ram_index(&self) -> i64 {
        self.terms.keys().fold(1, |acc, e| acc.lcm(e.denom()))
    }

    fn q(&self) -> i64 {
        self.tower.q() as i64
    }

    fn add_term(&mut self, e: Exp, c: FFElem) {
        if c.is_zero() || self.floor.is_some_and(|f| e <= f) {
            return;
        }
        match self.terms.entry(e) {
            Entry::Occupied(mut o) => {
                let v = self.tower.add(*o.get(), c);
                if v.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = v;
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    fn add_tail(&mut self, s: Exp, k: Exp, mut b: Vec<FFElem>) {
        if b.iter().all(|c| c.is_zero()) {
            return;
        }
        let q = exp(self.q());
        let mut k = k;
        loop {
            if k > Exp::one() {
                self.add_term(s + k / q, b[0]);
                b.rotate_left(1);
                k /= q;
            } else if k <= Exp::one() / q {
                b.rotate_right(1);
                let c = self.tower.neg(b[0]);
                self.add_term(s + k, c);
                k *= q;
            } else {
                break;
            }
        }
        if let Some(f) = self.floor {
            if s < f {
                let mut step = k / q;
                for i in 0.. {
                    let e = s + step;
                    if e <= f {
                        break;
                    }
                    self.add_term(e, b[i % b.len()]);
                    step /= q;
                }
                return;
            }
        }
        let t = self.tower.clone();
        match self.tails.entry((s, k)) {
            Entry::Vacant(v) => {
                v.insert(minimal_period(b));
            }
            Entry::Occupied(mut o) => {
                let a = o.get();
                let l = a.len().lcm(&b.len());
                let sum: Vec<FFElem> = (0..l).map(|i| t.add(a[i % a.len()], b[i % b.len()])).collect();
                if sum.iter().all(|c| c.is_zero()) {
                    o.remove();
                } else {
                    *o.get_mut() = minimal_period(sum);
                }
            }
        }
    }

    /// Largest exponent on the chain of a tail whose total coefficient is nonzero.
    fn tail_max_exp(&self, key: &TailKey) -> Exp {
        let q = self.q();
        let mut last = key.0;
        for i in 1..=64u32 {
            let Some(step) = inv_q_pow(q, i) else { break };
            last = key.0 + key.1 * step;
            if !self.coeff_at(last).is_zero() {
                return last;
            }
        }
        last
    }

    /// Largest exponent carrying a nonzero coefficient, if any.
    pub fn norm_exp(&self) -> Option<Exp> {
        let a = self.terms.keys().rev().find(|e| !self.coeff_at(**e).is_zero()).copied();
        let b = self.tails.keys().map(|k| self.tail_max_exp(k)).max();
        a.max(b)
    }

    /// An upper bound for the norm of the approximated value.
    pub fn norm_bound(&self) -> ExtExp {
        match self.norm_exp() {
            Some(e) => ExtExp::Finite(e),
            None => ExtExp::from_opt(self.floor),
        }
    }

    /// The largest surviving exponent, or the floor when nothing survives
    /// (`-inf` for exact zero).
    pub fn residual_exp(&self) -> ExtExp {
        self.norm_bound()
    }

    /// Leading explicit term.
    pub fn leading(&self) -> Option<(Exp, FFElem)> {
        self.terms.iter().next_back().map(|(&e, &c)| (e, c))
    }

    /// Coefficient of `theta^e`, counting tails.
    pub fn coeff_at(&self, e: Exp) -> FFElem {
        let mut c = self.terms.get(&e).copied().unwrap_or(FFElem::ZERO);
        let q = self.q();
        for ((s, k), b) in &self.tails {
            if e <= *s {
                continue;
            }
            let r = k / (e - s);
            if !r.is_integer() {
                continue;
            }
            let mut v = r.to_integer();
            let mut i = 0usize;
            while v > 1 && v % q == 0 {
                v /= q;
                i += 1;
            }
            if v == 1 && i >= 1 {
                c = self.tower.add(c, b[(i - 1) % b.len()]);
            }
        }
        c
    }

    pub fn embed(&self, tower: &Arc<FieldTower>) -> Result<Self> {
        if self.tower.same(tower) {
            return Ok(self.clone());
        }
        let f = |c: &FFElem| tower.embed_from(&self.tower, *c);
        Ok(CInftyElem {
            tower: tower.clone(),
            terms: self.terms.iter().map(|(e, c)| Ok((*e, f(c)?))).collect::<Result<_>>()?,
            tails: self
                .tails
                .iter()
                .map(|(k, b)| Ok((*k, b.iter().map(f).collect::<Result<Vec<_>>>()?)))
                .collect::<Result<_>>()?,
            floor: self.floor,
        })
    }

    /// Forgets everything at or below `f`.
    pub fn truncate(&self, f: Exp) -> Self {
        let floor = Some(self.floor.map_or(f, |g| g.max(f)));
        if floor == self.floor {
            return self.clone();
        }
        let mut out = CInftyElem { tower: self.tower.clone(), terms: BTreeMap::new(), tails: BTreeMap::new(), floor };
        for (&e, &c) in self.terms.range(floor.unwrap()..).filter(|(e, _)| Some(**e) > floor) {
            out.terms.insert(e, c);
        }
        for ((s, k), b) in &self.tails {
            out.add_tail(*s, *k, b.clone());
        }
        out
    }

    /// Same value with the floor lowered to `f` when that loses nothing
    /// (exact elements stay exact).
    pub fn with_floor_at_most(&self, f: Option<Exp>) -> Self {
        let mut out = self.clone();
        if let (Some(a), Some(b)) = (self.floor, f) {
            out.floor = Some(a.min(b));
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(self.tower.neg(FFElem::ONE))
    }

    pub fn scale(&self, c: FFElem) -> Self {
        let t = &self.tower;
        if c.is_zero() {
            return Self::zero(t);
        }
        CInftyElem {
            tower: t.clone(),
            terms: self.terms.iter().map(|(&e, &x)| (e, t.mul(x, c))).collect(),
            tails: self.tails.iter().map(|(&k, b)| (k, b.iter().map(|&x| t.mul(x, c)).collect())).collect(),
            floor: self.floor,
        }
    }

    /// Multiplication by `c * theta^e`.
    pub fn mul_monomial(&self, c: FFElem, e: Exp) -> Self {
        let t = &self.tower;
        if c.is_zero() {
            return Self::zero(t);
        }
        let mut out = Self::zero(t);
        out.floor = self.floor.map(|f| f + e);
        for (&x, &v) in &self.terms {
            out.terms.insert(x + e, t.mul(v, c));
        }
        for (&(s, k), b) in &self.tails {
            out.tails.insert((s + e, k), b.iter().map(|&x| t.mul(x, c)).collect());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = align(self, other);
        let floor = a.floor.max(b.floor);
        let mut out = match floor {
            Some(f) => a.truncate(f),
            None => a,
        };
        for (&e, &c) in &b.terms {
            out.add_term(e, c);
        }
        for (&(s, k), v) in &b.tails {
            out.add_tail(s, k, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = align(self, other);
        let t = a.tower.clone();
        if a.is_exact_zero() || b.is_exact_zero() {
            return Ok(Self::zero(&t));
        }
        if a.has_tails() && b.has_tails() {
            return Err(Error::Unsupported("product of two elements with Frobenius tails".into()));
        }
        let na = a.norm_bound().finite().unwrap();
        let nb = b.norm_bound().finite().unwrap();
        let floor = a.floor.map(|f| f + nb).max(b.floor.map(|f| f + na));
        let mut out = Self::zero(&t);
        out.floor = floor;
        let top_b = b.terms.keys().next_back().copied();
        for (&e1, &c1) in a.terms.iter().rev() {
            if let (Some(f), Some(tb)) = (floor, top_b) {
                if e1 + tb <= f {
                    break;
                }
            }
            for (&e2, &c2) in b.terms.iter().rev() {
                let e = e1 + e2;
                if floor.is_some_and(|f| e <= f) {
                    break;
                }
                out.add_term(e, t.mul(c1, c2));
            }
        }
        for (x, y) in [(&a, &b), (&b, &a)] {
            for (&(s, k), v) in &x.tails {
                for (&e, &c) in &y.terms {
                    out.add_tail(s + e, k, v.iter().map(|&z| t.mul(z, c)).collect());
                }
            }
        }
        Ok(out)
    }

    /// `x^(q^k)`; negative `k` takes iterated `q`-th roots.
    pub fn frobenius(&self, k: i64) -> Self {
        let mut x = self.clone();
        if k >= 0 {
            for _ in 0..k {
                x = x.frob_step();
            }
        } else {
            for _ in 0..-k {
                x = x.root_step();
            }
        }
        x
    }

    fn frob_step(&self) -> Self {
        let t = &self.tower;
        let q = exp(self.q());
        let mut out = Self::zero(t);
        out.floor = self.floor.map(|f| f * q);
        for (&e, &c) in &self.terms {
            out.terms.insert(e * q, t.frob(c, 1));
        }
        for (&(s, k), b) in &self.tails {
            out.add_term(s * q + k, t.frob(b[0], 1));
            let mut nb: Vec<FFElem> = b.iter().map(|&c| t.frob(c, 1)).collect();
            nb.rotate_left(1);
            out.add_tail(s * q, k, nb);
        }
        out
    }

    fn root_step(&self) -> Self {
        let t = &self.tower;
        let q = exp(self.q());
        let mut out = Self::zero(t);
        out.floor = self.floor.map(|f| f / q);
        for (&e, &c) in &self.terms {
            out.terms.insert(e / q, t.frob(c, -1));
        }
        for (&(s, k), b) in &self.tails {
            let mut nb: Vec<FFElem> = b.iter().map(|&c| t.frob(c, -1)).collect();
            nb.rotate_right(1);
            out.add_term(s / q + k / q, t.neg(nb[0]));
            out.add_tail(s / q, k, nb);
        }
        out
    }

    /// The unique `q`-th root.
    pub fn qth_root(&self) -> Self {
        self.root_step()
    }

    /// Multiplicative inverse. Inexact inputs keep their relative precision;
    /// exact inputs are expanded down to `floor` (or [`DEFAULT_PREC`] digits).
    pub fn inv(&self, floor: Option<Exp>) -> Result<Self> {
        if self.has_tails() {
            return Err(Error::Unsupported("inverse of an element with Frobenius tails".into()));
        }
        let (nu, lead) = self.leading().ok_or(Error::ImpreciseZero)?;
        let t = &self.tower;
        let natural = self.floor.map(|f| f - nu - nu);
        let floor = match (natural, floor) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => -nu - exp(DEFAULT_PREC),
        };
        let lead_inv = t.inv(lead)?;
        let mut out = Self::zero_to(t, floor);
        let mut rem: BTreeMap<Exp, FFElem> = BTreeMap::from([(exp(0), FFElem::ONE)]);
        while let Some((&k, &r)) = rem.iter().next_back() {
            let e = k - nu;
            if e <= floor {
                break;
            }
            let c = t.mul(r, lead_inv);
            out.add_term(e, c);
            for (&ex, &cx) in &self.terms {
                let pos = e + ex;
                if pos != k && pos - nu <= floor {
                    continue;
                }
                let v = t.sub(rem.get(&pos).copied().unwrap_or(FFElem::ZERO), t.mul(c, cx));
                if v.is_zero() {
                    rem.remove(&pos);
                } else {
                    rem.insert(pos, v);
                }
            }
            rem.remove(&k);
        }
        if rem.is_empty() && self.is_exact() {
            // exact inverse of a monomial
            let mut exact = out.clone();
            exact.floor = None;
            if self.terms.len() == 1 {
                return Ok(exact);
            }
        }
        Ok(out)
    }

    /// Canonical representative of `x + A` together with the removed element of `A`.
    pub fn split_mod_a(&self) -> (Self, ThetaPoly) {
        let t = &self.tower;
        let mut ks: Vec<i64> = self
            .terms
            .keys()
            .filter(|e| e.is_integer() && !e.is_negative())
            .map(|e| e.to_integer())
            .collect();
        for (s, _) in self.tails.keys() {
            let k = s.floor().to_integer() + 1;
            if k >= 0 {
                ks.push(k);
            }
        }
        ks.sort();
        ks.dedup();
        let mut out = self.clone();
        let mut a = vec![FFElem::ZERO; ks.last().map_or(0, |&k| k as usize + 1)];
        for k in ks {
            let p = t.proj_fq(self.coeff_at(exp(k)));
            if !p.is_zero() {
                out.add_term(exp(k), t.neg(p));
                a[k as usize] = p;
            }
        }
        (out, ThetaPoly::new(t, a))
    }

    pub fn reduce_mod_a(&self) -> Self {
        self.split_mod_a().0
    }

    /// Three-valued comparison at the common precision.
    pub fn compare(&self, other: &Self) -> Comparison {
        let d = self.sub(other);
        if d.has_content() {
            Comparison::Unequal
        } else if d.is_exact() {
            Comparison::Equal
        } else {
            Comparison::Indistinguishable
        }
    }

    /// Whether `self` and `other` agree modulo `A` at the common precision.
    pub fn equal_mod_a(&self, other: &Self) -> bool {
        self.sub(other).reduce_mod_a().is_zero_at_precision()
    }

    /// `sum_k c_k theta^k` for a polynomial in `theta`.
    pub fn from_theta_poly(p: &ThetaPoly) -> Self {
        let mut out = Self::zero(p.tower());
        for (k, &c) in p.coeffs().iter().enumerate() {
            out.add_term(exp(k as i64), c);
        }
        out
    }

    /// `x^e` for `e >= 0` by repeated multiplication.
    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(&self.tower);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }
}
