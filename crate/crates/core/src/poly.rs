//! Polynomials in `theta` over `F_{q^m}`, the rational functions they
//! generate, and polynomials in `t` over those rational functions.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binom_mod(mut n: u64, mut k: u64, p: u32) -> u32 {
    if k > n {
        return 0;
    }
    let pp = p as u64;
    let mut acc = 1u64;
    while k > 0 || n > 0 {
        let (a, b) = (n % pp, k % pp);
        if b > a {
            return 0;
        }
        // C(a, b) mod p for a, b < p
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..b {
            num = num * ((a - i) % pp) % pp;
            den = den * ((i + 1) % pp) % pp;
        }
        acc = acc * num % pp * crate::field::fp::inv(den as u32, p) as u64 % pp;
        n /= pp;
        k /= pp;
    }
    acc as u32
}

pub(crate) fn unify2(a: &Arc<FieldTower>, b: &Arc<FieldTower>) -> Arc<FieldTower> {
    FieldTower::unify(a, b).expect("operands live in incompatible field towers")
}

/// A polynomial in `theta` with coefficients in `F_{q^m}`, low degree first.
#[derive(Clone, Debug)]
pub struct ThetaPoly {
    tower: Arc<FieldTower>,
    coeffs: Vec<FFElem>,
}

impl PartialEq for ThetaPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.tower.same(&other.tower) {
            return self.coeffs == other.coeffs;
        }
        match FieldTower::unify(&self.tower, &other.tower) {
            Ok(t) => self.embed(&t).unwrap().coeffs == other.embed(&t).unwrap().coeffs,
            Err(_) => false,
        }
    }
}
impl Eq for ThetaPoly {}

impl ThetaPoly {
    pub fn new(tower: &Arc<FieldTower>, mut coeffs: Vec<FFElem>) -> Self {
        while coeffs.last() == Some(&FFElem::ZERO) {
            coeffs.pop();
        }
        ThetaPoly { tower: tower.clone(), coeffs }
    }
    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        Self::new(tower, Vec::new())
    }
    pub fn constant(tower: &Arc<FieldTower>, c: FFElem) -> Self {
        Self::new(tower, vec![c])
    }
    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::constant(tower, FFElem::ONE)
    }
    /// `c * theta^k`.
    pub fn monomial(tower: &Arc<FieldTower>, c: FFElem, k: usize) -> Self {
        let mut v = vec![FFElem::ZERO; k + 1];
        v[k] = c;
        Self::new(tower, v)
    }
    pub fn theta(tower: &Arc<FieldTower>) -> Self {
        Self::monomial(tower, FFElem::ONE, 1)
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn coeffs(&self) -> &[FFElem] {
        &self.coeffs
    }
    pub fn coeff(&self, k: usize) -> FFElem {
        self.coeffs.get(k).copied().unwrap_or(FFElem::ZERO)
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn lc(&self) -> FFElem {
        self.coeffs.last().copied().unwrap_or(FFElem::ZERO)
    }
    /// Whether every coefficient lies in `F_q`.
    pub fn is_over_fq(&self) -> bool {
        self.coeffs.iter().all(|&c| self.tower.is_in_fq(c))
    }

    pub fn embed(&self, tower: &Arc<FieldTower>) -> Result<Self> {
        if self.tower.same(tower) {
            return Ok(self.clone());
        }
        let cs = self.coeffs.iter().map(|&c| tower.embed_from(&self.tower, c)).collect::<Result<_>>()?;
        Ok(Self::new(tower, cs))
    }

    fn aligned(&self, other: &Self) -> (Arc<FieldTower>, Self, Self) {
        if self.tower.same(&other.tower) {
            return (self.tower.clone(), self.clone(), other.clone());
        }
        let t = unify2(&self.tower, &other.tower);
        (t.clone(), self.embed(&t).unwrap(), other.embed(&t).unwrap())
    }

    pub fn scale(&self, c: FFElem) -> Self {
        let t = &self.tower;
        Self::new(t, self.coeffs.iter().map(|&x| t.mul(x, c)).collect())
    }

    /// Multiplication by `theta^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![FFElem::ZERO; k];
        v.extend_from_slice(&self.coeffs);
        Self::new(&self.tower, v)
    }

    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let (t, a, d) = self.aligned(d);
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let dd = d.coeffs.len() - 1;
        let li = t.inv(d.lc())?;
        let mut r = a.coeffs.clone();
        let mut quo = vec![FFElem::ZERO; r.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let top = r.len() - 1;
            let c = t.mul(r[top], li);
            let s = top - dd;
            quo[s] = c;
            for (k, &dk) in d.coeffs.iter().enumerate() {
                r[s + k] = t.sub(r[s + k], t.mul(c, dk));
            }
            while r.last() == Some(&FFElem::ZERO) {
                r.pop();
            }
        }
        Ok((Self::new(&t, quo), Self::new(&t, r)))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.tower.inv(self.lc()).unwrap())
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let (_, mut a, mut b) = self.aligned(other);
        while !b.is_zero() {
            let r = a.divrem(&b).unwrap().1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Evaluation at a field element.
    pub fn eval(&self, x: FFElem) -> FFElem {
        let t = &self.tower;
        self.coeffs.iter().rev().fold(FFElem::ZERO, |acc, &c| t.add(t.mul(acc, x), c))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.tower);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Add for &ThetaPoly {
    type Output = ThetaPoly;
    fn add(self, o: &ThetaPoly) -> ThetaPoly {
        let (t, a, b) = self.aligned(o);
        let n = a.coeffs.len().max(b.coeffs.len());
        ThetaPoly::new(&t, (0..n).map(|k| t.add(a.coeff(k), b.coeff(k))).collect())
    }
}
impl Sub for &ThetaPoly {
    type Output = ThetaPoly;
    fn sub(self, o: &ThetaPoly) -> ThetaPoly {
        self + &(-o)
    }
}
impl Neg for &ThetaPoly {
    type Output = ThetaPoly;
    fn neg(self) -> ThetaPoly {
        let t = &self.tower;
        ThetaPoly::new(t, self.coeffs.iter().map(|&c| t.neg(c)).collect())
    }
}
impl Mul for &ThetaPoly {
    type Output = ThetaPoly;
    fn mul(self, o: &ThetaPoly) -> ThetaPoly {
        let (t, a, b) = self.aligned(o);
        if a.is_zero() || b.is_zero() {
            return ThetaPoly::zero(&t);
        }
        let mut v = vec![FFElem::ZERO; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, &y) in b.coeffs.iter().enumerate() {
                v[i + j] = t.add(v[i + j], t.mul(x, y));
            }
        }
        ThetaPoly::new(&t, v)
    }
}

/// An element of `F_{q^m}(theta)` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: ThetaPoly,
    den: ThetaPoly,
}

impl RatFunc {
    pub fn new(num: ThetaPoly, den: ThetaPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (t, num, den) = num.aligned(&den);
        if num.is_zero() {
            return Ok(Self::zero(&t));
        }
        let g = num.gcd(&den);
        let num = num.divrem(&g)?.0;
        let den = den.divrem(&g)?.0;
        let li = t.inv(den.lc())?;
        Ok(RatFunc { num: num.scale(li), den: den.scale(li) })
    }
    pub fn from_poly(p: ThetaPoly) -> Self {
        let den = ThetaPoly::one(p.tower());
        RatFunc { num: p, den }
    }
    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        Self::from_poly(ThetaPoly::zero(tower))
    }
    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::from_poly(ThetaPoly::one(tower))
    }
    pub fn constant(tower: &Arc<FieldTower>, c: FFElem) -> Self {
        Self::from_poly(ThetaPoly::constant(tower, c))
    }
    pub fn from_int(tower: &Arc<FieldTower>, c: i64) -> Self {
        Self::constant(tower, tower.from_int(c))
    }
    pub fn theta(tower: &Arc<FieldTower>) -> Self {
        Self::from_poly(ThetaPoly::theta(tower))
    }
    /// `theta^k` for any integer `k`.
    pub fn theta_pow(tower: &Arc<FieldTower>, k: i64) -> Self {
        let m = ThetaPoly::monomial(tower, FFElem::ONE, k.unsigned_abs() as usize);
        if k >= 0 {
            Self::from_poly(m)
        } else {
            RatFunc { num: ThetaPoly::one(tower), den: m }
        }
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        self.num.tower()
    }
    pub fn num(&self) -> &ThetaPoly {
        &self.num
    }
    pub fn den(&self) -> &ThetaPoly {
        &self.den
    }
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn is_poly(&self) -> bool {
        self.den.degree() == Some(0)
    }
    /// `Some(e)` with `|x| = q^e`, or `None` for zero.
    pub fn norm_exp(&self) -> Option<i64> {
        Some(self.num.degree()? as i64 - self.den.degree().unwrap() as i64)
    }
    pub fn embed(&self, tower: &Arc<FieldTower>) -> Result<Self> {
        Ok(RatFunc { num: self.num.embed(tower)?, den: self.den.embed(tower)? })
    }
    pub fn inv(&self) -> Result<Self> {
        Self::new(self.den.clone(), self.num.clone())
    }
    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self * &o.inv()?)
    }
    pub fn scale(&self, c: FFElem) -> Self {
        Self::new(self.num.scale(c), self.den.clone()).unwrap()
    }
    /// Evaluation at a field element (the denominator must not vanish there).
    pub fn eval(&self, x: FFElem) -> Result<FFElem> {
        self.tower().div(self.num.eval(x), self.den.eval(x))
    }
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        Ok(Self::new(base.num.pow(e.unsigned_abs() as u32), base.den.pow(e.unsigned_abs() as u32)).unwrap())
    }
    /// Whether this is a polynomial with coefficients in `F_q`.
    pub fn is_in_a(&self) -> bool {
        self.is_poly() && self.num.is_over_fq()
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, o: &RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(&self.num + &o.num, self.den.clone()).unwrap();
        }
        RatFunc::new(&(&self.num * &o.den) + &(&o.num * &self.den), &self.den * &o.den).unwrap()
    }
}
impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, o: &RatFunc) -> RatFunc {
        self + &(-o)
    }
}
impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}
impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, o: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &o.num, &self.den * &o.den).unwrap()
    }
}

/// A polynomial in `t` with coefficients in `F_{q^m}(theta)`, low degree first.
#[derive(Clone, Debug)]
pub struct TPoly {
    tower: Arc<FieldTower>,
    coeffs: Vec<RatFunc>,
}

impl PartialEq for TPoly {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}
impl Eq for TPoly {}

impl TPoly {
    pub fn new(tower: &Arc<FieldTower>, mut coeffs: Vec<RatFunc>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let tower = coeffs.iter().fold(tower.clone(), |acc, c| unify2(&acc, c.tower()));
        let coeffs = coeffs.into_iter().map(|c| c.embed(&tower).unwrap()).collect();
        TPoly { tower, coeffs }
    }
    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        Self::new(tower, Vec::new())
    }
    pub fn constant(c: RatFunc) -> Self {
        let t = c.tower().clone();
        Self::new(&t, vec![c])
    }
    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::constant(RatFunc::one(tower))
    }
    /// `t^k`.
    pub fn t_pow(tower: &Arc<FieldTower>, k: usize) -> Self {
        let mut v = vec![RatFunc::zero(tower); k + 1];
        v[k] = RatFunc::one(tower);
        Self::new(tower, v)
    }
    /// `(t - theta)^n`.
    pub fn t_minus_theta_pow(tower: &Arc<FieldTower>, n: usize) -> Self {
        let lin = Self::new(tower, vec![-&RatFunc::theta(tower), RatFunc::one(tower)]);
        (0..n).fold(Self::one(tower), |acc, _| &acc * &lin)
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn coeffs(&self) -> &[RatFunc] {
        &self.coeffs
    }
    pub fn coeff(&self, j: usize) -> RatFunc {
        self.coeffs.get(j).cloned().unwrap_or_else(|| RatFunc::zero(&self.tower))
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn embed(&self, tower: &Arc<FieldTower>) -> Result<Self> {
        let cs = self.coeffs.iter().map(|c| c.embed(tower)).collect::<Result<_>>()?;
        Ok(Self::new(tower, cs))
    }
    pub fn scale(&self, c: &RatFunc) -> Self {
        Self::new(&self.tower, self.coeffs.iter().map(|x| x * c).collect())
    }
    /// Multiplication by `t^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![RatFunc::zero(&self.tower); k];
        v.extend(self.coeffs.iter().cloned());
        Self::new(&self.tower, v)
    }

    /// The `j`-th hyperderivative: `d^j t^k = C(k, j) t^(k-j)`.
    pub fn hyperderiv(&self, j: usize) -> Self {
        let p = self.tower.p();
        let v = (j..self.coeffs.len())
            .map(|k| {
                let b = binom_mod(k as u64, j as u64, p);
                self.coeffs[k].scale(self.tower.from_int(b as i64))
            })
            .collect();
        Self::new(&self.tower, v)
    }

    pub fn eval_at_zero(&self) -> RatFunc {
        self.coeff(0)
    }

    pub fn eval_at(&self, x: &RatFunc) -> RatFunc {
        self.coeffs.iter().rev().fold(RatFunc::zero(&self.tower), |acc, c| &(&acc * x) + c)
    }

    pub fn eval_at_theta(&self) -> RatFunc {
        self.eval_at(&RatFunc::theta(&self.tower))
    }

    /// `((d^j f)(theta))_{j=0..=deg}`: the coefficients of the expansion in powers of `t - theta`.
    pub fn expand_at_theta(&self) -> Vec<RatFunc> {
        (0..self.coeffs.len()).map(|j| self.hyperderiv(j).eval_at_theta()).collect()
    }

    /// `sum_j xs[j] (t - theta)^j`.
    pub fn from_expansion(tower: &Arc<FieldTower>, xs: &[RatFunc]) -> Self {
        let lin = Self::new(tower, vec![-&RatFunc::theta(tower), RatFunc::one(tower)]);
        xs.iter().rev().fold(Self::zero(tower), |acc, x| &(&acc * &lin) + &Self::constant(x.clone()))
    }

    /// Division by a polynomial with invertible leading coefficient.
    pub fn divrem(&self, d: &Self) -> Result<(Self, Self)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let tower = unify2(&self.tower, &d.tower);
        let d = d.embed(&tower)?;
        let li = d.coeffs[dd].inv()?;
        let mut r: Vec<RatFunc> = self.embed(&tower)?.coeffs;
        let mut quo = vec![RatFunc::zero(&tower); r.len().saturating_sub(dd).max(1)];
        while r.len() > dd {
            let top = r.len() - 1;
            let c = &r[top] * &li;
            let s = top - dd;
            for (k, dk) in d.coeffs.iter().enumerate() {
                r[s + k] = &r[s + k] - &(&c * dk);
            }
            quo[s] = c;
            while r.last().is_some_and(|x| x.is_zero()) {
                r.pop();
            }
        }
        Ok((Self::new(&tower, quo), Self::new(&tower, r)))
    }

    /// Largest `|coefficient|` exponent, i.e. the Gauss norm; `None` for zero.
    pub fn gauss_norm_exp(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|c| c.norm_exp()).max()
    }

    /// `max_j |(d^j f)(theta)|` exponent; `None` for zero.
    pub fn theta_norm_exp(&self) -> Option<i64> {
        self.expand_at_theta().iter().filter_map(|c| c.norm_exp()).max()
    }
}

impl Add for &TPoly {
    type Output = TPoly;
    fn add(self, o: &TPoly) -> TPoly {
        let t = unify2(&self.tower, &o.tower);
        let n = self.coeffs.len().max(o.coeffs.len());
        TPoly::new(&t, (0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect())
    }
}
impl Sub for &TPoly {
    type Output = TPoly;
    fn sub(self, o: &TPoly) -> TPoly {
        self + &(-o)
    }
}
impl Neg for &TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        TPoly::new(&self.tower, self.coeffs.iter().map(|c| -c).collect())
    }
}
impl Mul for &TPoly {
    type Output = TPoly;
    fn mul(self, o: &TPoly) -> TPoly {
        let t = unify2(&self.tower, &o.tower);
        if self.is_zero() || o.is_zero() {
            return TPoly::zero(&t);
        }
        let mut v = vec![RatFunc::zero(&t); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in o.coeffs.iter().enumerate() {
                v[i + j] = &v[i + j] + &(x * y);
            }
        }
        TPoly::new(&t, v)
    }
}

/// A polynomial in `t` with coefficients in `F_q`, low degree first.
#[derive(Clone, Debug)]
pub struct FqTPoly {
    tower: Arc<FieldTower>,
    coeffs: Vec<FFElem>,
}

impl PartialEq for FqTPoly {
    fn eq(&self, other: &Self) -> bool {
        self.at_theta() == other.at_theta()
    }
}
impl Eq for FqTPoly {}

impl FqTPoly {
    pub fn new(tower: &Arc<FieldTower>, mut coeffs: Vec<FFElem>) -> Result<Self> {
        while coeffs.last() == Some(&FFElem::ZERO) {
            coeffs.pop();
        }
        if coeffs.iter().any(|&c| !tower.is_in_fq(c)) {
            return Err(Error::Config("F_q[t] coefficient outside F_q".into()));
        }
        Ok(FqTPoly { tower: tower.clone(), coeffs })
    }
    pub fn from_ints(tower: &Arc<FieldTower>, cs: &[i64]) -> Self {
        Self::new(tower, cs.iter().map(|&c| tower.from_int(c)).collect()).unwrap()
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn coeffs(&self) -> &[FFElem] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
    pub fn to_tpoly(&self) -> TPoly {
        TPoly::new(&self.tower, self.coeffs.iter().map(|&c| RatFunc::constant(&self.tower, c)).collect())
    }
    /// `a(theta)`.
    pub fn at_theta(&self) -> ThetaPoly {
        ThetaPoly::new(&self.tower, self.coeffs.clone())
    }
    /// `(d^j a)(theta)`.
    pub fn hyperderiv_at_theta(&self, j: usize) -> ThetaPoly {
        let p = self.tower.p();
        let v = (j..self.coeffs.len())
            .map(|k| self.tower.mul(self.coeffs[k], self.tower.from_int(binom_mod(k as u64, j as u64, p) as i64)))
            .collect();
        ThetaPoly::new(&self.tower, v)
    }
}

/// Both Taylor expansions of a polynomial of degree `<= n`, ordered `d^n, ..., d^0`.
#[derive(Clone, Debug)]
pub struct DnExpansion {
    pub at_zero: Vec<RatFunc>,
    pub at_theta: Vec<RatFunc>,
    pub verified: bool,
}

/// The change-of-expansion matrix: `(d^j f)(0) = sum_{i>=j} C(i,j) (-theta)^(i-j) (d^i f)(theta)`,
/// with rows and columns indexed `n, ..., 0`.
pub fn dn_matrix(tower: &Arc<FieldTower>, n: usize) -> Vec<Vec<RatFunc>> {
    let p = tower.p();
    let minus_theta = -&RatFunc::theta(tower);
    (0..=n)
        .map(|r| {
            let j = n - r;
            (0..=n)
                .map(|c| {
                    let i = n - c;
                    if i < j {
                        return RatFunc::zero(tower);
                    }
                    let b = binom_mod(i as u64, j as u64, p);
                    minus_theta.pow((i - j) as i64).unwrap().scale(tower.from_int(b as i64))
                })
                .collect()
        })
        .collect()
}

/// Largest entry exponent of [`dn_matrix`], i.e. `log_q |D_n|`.
pub fn dn_norm_exp(tower: &Arc<FieldTower>, n: usize) -> i64 {
    dn_matrix(tower, n).iter().flatten().filter_map(|x| x.norm_exp()).max().unwrap_or(0)
}

pub fn dn_expansion_change(f: &TPoly, n: usize) -> Result<DnExpansion> {
    if f.degree().is_some_and(|d| d > n) {
        return Err(Error::Shape(format!("degree of f exceeds n = {n}")));
    }
    let tower = f.tower();
    let at_zero: Vec<RatFunc> = (0..=n).rev().map(|j| f.hyperderiv(j).eval_at_zero()).collect();
    let at_theta: Vec<RatFunc> = (0..=n).rev().map(|j| f.hyperderiv(j).eval_at_theta()).collect();
    let m = dn_matrix(tower, n);
    let verified = m.iter().zip(&at_zero).all(|(row, z)| {
        let s = row.iter().zip(&at_theta).fold(RatFunc::zero(tower), |acc, (a, x)| &acc + &(a * x));
        &s == z
    });
    Ok(DnExpansion { at_zero, at_theta, verified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t3() -> Arc<FieldTower> {
        FieldTower::for_q(3).unwrap()
    }

    fn tp(t: &Arc<FieldTower>, cs: &[&[i64]]) -> TPoly {
        TPoly::new(
            t,
            cs.iter()
                .map(|c| RatFunc::from_poly(ThetaPoly::new(t, c.iter().map(|&x| t.from_int(x)).collect())))
                .collect(),
        )
    }

    #[test]
    fn lucas_binomials() {
        assert_eq!(binom_mod(3, 1, 3), 0);
        assert_eq!(binom_mod(4, 2, 3), 0);
        assert_eq!(binom_mod(5, 2, 3), 1);
        assert_eq!(binom_mod(10, 3, 7), (120 % 7) as u32);
        for n in 0..30u64 {
            for k in 0..=n {
                let exact = (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128);
                assert_eq!(binom_mod(n, k, 2) as u128, exact % 2);
                assert_eq!(binom_mod(n, k, 5) as u128, exact % 5);
            }
        }
    }

    #[test]
    fn norms_of_rational_functions() {
        let t = t3();
        assert_eq!(RatFunc::theta(&t).norm_exp(), Some(1));
        assert_eq!(RatFunc::zero(&t).norm_exp(), None);
        let x = RatFunc::one(&t).div(&(&RatFunc::theta(&t) - &RatFunc::one(&t))).unwrap();
        assert_eq!(x.norm_exp(), Some(-1));
    }

    #[test]
    fn rational_functions_reduce() {
        let t = t3();
        let th = RatFunc::theta(&t);
        let x = RatFunc::new((&th * &th).num().clone(), th.num().clone()).unwrap();
        assert_eq!(x, th);
        let y = &th.inv().unwrap() * &th;
        assert_eq!(y, RatFunc::one(&t));
    }

    #[test]
    fn hyperderivative_examples() {
        let t = t3();
        assert_eq!(TPoly::t_pow(&t, 2).hyperderiv(1), tp(&t, &[&[], &[2]]));
        assert!(TPoly::t_pow(&t, 3).hyperderiv(1).is_zero());
        assert_eq!(TPoly::t_pow(&t, 2).hyperderiv(2), TPoly::one(&t));
    }

    #[test]
    fn dn_example() {
        let t = t3();
        let d = dn_expansion_change(&TPoly::t_pow(&t, 1), 1).unwrap();
        assert!(d.verified);
        assert_eq!(d.at_zero, vec![RatFunc::one(&t), RatFunc::zero(&t)]);
        assert_eq!(d.at_theta, vec![RatFunc::one(&t), RatFunc::theta(&t)]);
        let m = dn_matrix(&t, 1);
        assert_eq!(m[1][0], -&RatFunc::theta(&t));
        assert_eq!(m[0][1], RatFunc::zero(&t));
    }

    #[test]
    fn expansion_round_trip() {
        let t = t3();
        let f = tp(&t, &[&[1, 2], &[0, 0, 1], &[2], &[1, 1]]);
        let back = TPoly::from_expansion(&t, &f.expand_at_theta());
        assert_eq!(back, f);
    }

    fn arb_tpoly(q: u64) -> impl Strategy<Value = (u64, Vec<Vec<i64>>)> {
        (Just(q), prop::collection::vec(prop::collection::vec(0i64..3, 0..4), 0..9))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn product_rule((q, a) in arb_tpoly(3), b in prop::collection::vec(prop::collection::vec(0i64..3, 0..3), 0..5), j in 0usize..5) {
            let t = FieldTower::for_q(q).unwrap();
            let refs = |v: &Vec<Vec<i64>>| tp(&t, &v.iter().map(|x| x.as_slice()).collect::<Vec<_>>());
            let (f, g) = (refs(&a), refs(&b));
            let lhs = (&f * &g).hyperderiv(j);
            let rhs = (0..=j).fold(TPoly::zero(&t), |acc, i| &acc + &(&f.hyperderiv(i) * &g.hyperderiv(j - i)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn dn_relation_and_norms(a in prop::collection::vec(prop::collection::vec(0i64..2, 0..4), 0..9)) {
            let t = FieldTower::for_q(2).unwrap();
            let f = tp(&t, &a.iter().map(|x| x.as_slice()).collect::<Vec<_>>());
            let n = f.degree().unwrap_or(0);
            let d = dn_expansion_change(&f, n).unwrap();
            prop_assert!(d.verified);
            if let (Some(a), Some(b)) = (f.gauss_norm_exp(), f.theta_norm_exp()) {
                prop_assert!(a <= dn_norm_exp(&t, n) + b);
            }
        }
    }
}
