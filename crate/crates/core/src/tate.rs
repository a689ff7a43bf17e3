//! Truncated elements of the Tate algebra `C_infinity<t>`.
//!
//! A [`TateElem`] stores the coefficients of `t^0 .. t^(L-1)` and a
//! [`TailBound`] on the norms of all later coefficients. Elements may carry a
//! formal factor `varpi^v`, where `varpi^(q-1) = -theta`; this is how the
//! leading factor of `Omega` is represented.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};
use crate::poly::{binom_mod, unify2, FqTPoly, TPoly};
use crate::series::{exp, CInftyElem, Exp, ExtExp, DEFAULT_PREC};
use crate::text::fmt_series_poly;

/// Bound on the coefficients beyond the stored ones:
/// `Linear { intercept: a, slope: b }` means `norm(c_j) <= a - b*j` for every
/// `j` past the stored range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailBound {
    Exact,
    Linear { intercept: Exp, slope: Exp },
    Unbounded,
}

impl TailBound {
    /// Bound on `norm(c_j)`.
    pub fn at(&self, j: usize) -> ExtExp {
        match *self {
            TailBound::Exact => ExtExp::NegInf,
            TailBound::Linear { intercept, slope } => ExtExp::Finite(intercept - slope * exp(j as i64)),
            TailBound::Unbounded => ExtExp::PosInf,
        }
    }

    /// Bound on `sup_{j >= j0} norm(c_j)`.
    pub fn sup_from(&self, j0: usize) -> ExtExp {
        match *self {
            TailBound::Linear { slope, .. } if slope.is_negative() => ExtExp::PosInf,
            _ => self.at(j0),
        }
    }

    fn slope(&self) -> Option<Exp> {
        match *self {
            TailBound::Linear { slope, .. } => Some(slope),
            _ => None,
        }
    }
}

fn ext_add(a: ExtExp, b: Exp) -> ExtExp {
    match a {
        ExtExp::Finite(x) => ExtExp::Finite(x + b),
        o => o,
    }
}

fn q_pow(q: i64, k: i64) -> Exp {
    if k >= 0 {
        exp(q.pow(k as u32))
    } else {
        Exp::new(1, q.pow((-k) as u32))
    }
}

/// `(-1)^r` for an exponent whose denominator is a power of `q`.
fn sign_pow(t: &FieldTower, r: Exp) -> FFElem {
    if r.numer().rem_euclid(2) == 1 {
        t.neg(FFElem::ONE)
    } else {
        FFElem::ONE
    }
}

/// A truncated element of the Tate algebra with a certified tail bound.
#[derive(Clone, Debug)]
pub struct TateElem {
    tower: Arc<FieldTower>,
    coeffs: Vec<CInftyElem>,
    varpi: i64,
    tail: TailBound,
}

impl TateElem {
    pub fn new(tower: &Arc<FieldTower>, coeffs: Vec<CInftyElem>, tail: TailBound) -> Self {
        let tower = coeffs.iter().fold(tower.clone(), |acc, c| unify2(&acc, c.tower()));
        let mut x = TateElem { tower, coeffs, varpi: 0, tail };
        x.trim();
        x
    }

    fn trim(&mut self) {
        if self.tail == TailBound::Exact {
            while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
                self.coeffs.pop();
            }
        }
    }

    pub fn zero(tower: &Arc<FieldTower>) -> Self {
        Self::new(tower, vec![], TailBound::Exact)
    }

    pub fn one(tower: &Arc<FieldTower>) -> Self {
        Self::constant(CInftyElem::one(tower))
    }

    pub fn constant(c: CInftyElem) -> Self {
        let t = c.tower().clone();
        Self::new(&t, vec![c], TailBound::Exact)
    }

    /// A polynomial in `t` with series coefficients.
    pub fn from_series_poly(tower: &Arc<FieldTower>, coeffs: Vec<CInftyElem>) -> Self {
        Self::new(tower, coeffs, TailBound::Exact)
    }

    /// Expansion of a polynomial in `t`; the coefficient of `t^j` is certified
    /// down to `floor - j` when it is not a polynomial in `theta`.
    pub fn from_tpoly(f: &TPoly, floor: Exp) -> Self {
        let cs = f
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| CInftyElem::from_ratfunc(c, floor - exp(j as i64)))
            .collect();
        Self::new(f.tower(), cs, TailBound::Exact)
    }

    pub fn from_fq_tpoly(f: &FqTPoly) -> Self {
        let t = f.tower();
        Self::new(t, f.coeffs().iter().map(|&c| CInftyElem::constant(t, c)).collect(), TailBound::Exact)
    }

    /// The same element multiplied by the formal factor `varpi^v`.
    pub fn with_varpi(mut self, v: i64) -> Self {
        self.varpi += v;
        self
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        &self.tower
    }
    pub fn coeffs(&self) -> &[CInftyElem] {
        &self.coeffs
    }
    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
    pub fn tail_bound(&self) -> TailBound {
        self.tail
    }
    pub fn varpi(&self) -> i64 {
        self.varpi
    }
    pub fn is_exact(&self) -> bool {
        self.tail == TailBound::Exact && self.coeffs.iter().all(|c| c.is_exact())
    }
    pub fn is_exact_zero(&self) -> bool {
        self.tail == TailBound::Exact && self.coeffs.is_empty()
    }

    /// Coefficient of `t^j`; past the stored range this is `O(theta^bound)`.
    pub fn coeff(&self, j: usize) -> Result<CInftyElem> {
        if let Some(c) = self.coeffs.get(j) {
            return Ok(c.clone());
        }
        match self.tail.at(j) {
            ExtExp::NegInf => Ok(CInftyElem::zero(&self.tower)),
            ExtExp::Finite(b) => Ok(CInftyElem::zero_to(&self.tower, b)),
            ExtExp::PosInf => Err(Error::Precision(format!("coefficient of t^{j} is not bounded"))),
        }
    }

    fn padded(&self, l: usize) -> Result<Vec<CInftyElem>> {
        (0..l).map(|j| self.coeff(j)).collect()
    }

    fn q(&self) -> i64 {
        self.tower.q() as i64
    }

    /// Smallest `A` with `norm(c_j) <= A - slope*j` for all `j`; assumes the
    /// tail slope is at least `slope`.
    fn envelope(&self, slope: Exp) -> ExtExp {
        let stored = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| ext_add(c.norm_bound(), slope * exp(j as i64)))
            .max()
            .unwrap_or(ExtExp::NegInf);
        let tail = match self.tail {
            TailBound::Linear { intercept, .. } => ExtExp::Finite(intercept),
            other => other.at(0),
        };
        stored.max(tail)
    }

    fn check_varpi(&self, o: &Self) -> Result<()> {
        if self.varpi != o.varpi {
            return Err(Error::Unsupported("sum of elements with different varpi factors".into()));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.is_exact_zero() {
            return Ok(o.clone());
        }
        if o.is_exact_zero() {
            return Ok(self.clone());
        }
        self.check_varpi(o)?;
        let tower = unify2(&self.tower, &o.tower);
        let (l, tail) = match (self.tail, o.tail) {
            (TailBound::Unbounded, _) | (_, TailBound::Unbounded) => {
                let l = [self, o].iter().filter(|x| x.tail == TailBound::Unbounded).map(|x| x.len()).min().unwrap();
                (l, TailBound::Unbounded)
            }
            (TailBound::Exact, TailBound::Exact) => (self.len().max(o.len()), TailBound::Exact),
            (TailBound::Exact, t) | (t, TailBound::Exact) => (self.len().max(o.len()), t),
            (
                TailBound::Linear { intercept: a1, slope: b1 },
                TailBound::Linear { intercept: a2, slope: b2 },
            ) => (self.len().max(o.len()), TailBound::Linear { intercept: a1.max(a2), slope: b1.min(b2) }),
        };
        let (x, y) = (self.padded(l)?, o.padded(l)?);
        let cs = x.iter().zip(&y).map(|(a, b)| a.add(b)).collect();
        let mut out = Self::new(&tower, cs, tail);
        out.varpi = self.varpi;
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(|c| c.neg()).collect();
        out
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    /// Multiplication by a constant series.
    pub fn scale(&self, c: &CInftyElem) -> Result<Self> {
        if c.is_exact_zero() {
            return Ok(Self::zero(&self.tower));
        }
        let cs = self.coeffs.iter().map(|x| x.mul(c)).collect::<Result<Vec<_>>>()?;
        let tail = match (self.tail, c.norm_bound()) {
            (TailBound::Linear { intercept, slope }, ExtExp::Finite(n)) => {
                TailBound::Linear { intercept: intercept + n, slope }
            }
            (t, _) => t,
        };
        let mut out = Self::new(&unify2(&self.tower, c.tower()), cs, tail);
        out.varpi = self.varpi;
        Ok(out)
    }

    /// Multiplication by `t^k`.
    pub fn mul_t_pow(&self, k: usize) -> Self {
        if self.is_exact_zero() {
            return self.clone();
        }
        let mut cs = vec![CInftyElem::zero(&self.tower); k];
        cs.extend(self.coeffs.iter().cloned());
        let tail = match self.tail {
            TailBound::Linear { intercept, slope } => {
                TailBound::Linear { intercept: intercept + slope * exp(k as i64), slope }
            }
            t => t,
        };
        let mut out = Self::new(&self.tower, cs, tail);
        out.varpi = self.varpi;
        out
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let tower = unify2(&self.tower, &o.tower);
        if self.is_exact_zero() || o.is_exact_zero() {
            return Ok(Self::zero(&tower));
        }
        let (l, tail) = match (self.tail, o.tail) {
            (TailBound::Exact, TailBound::Exact) => (self.len() + o.len() - 1, TailBound::Exact),
            (TailBound::Unbounded, _) | (_, TailBound::Unbounded) => {
                let l = [self, o].iter().filter(|x| x.tail == TailBound::Unbounded).map(|x| x.len()).min().unwrap();
                (l, TailBound::Unbounded)
            }
            (t1, t2) => {
                let slope = match (t1.slope(), t2.slope()) {
                    (Some(a), Some(b)) => a.min(b),
                    (a, b) => a.or(b).unwrap(),
                };
                let tail = match (self.envelope(slope), o.envelope(slope)) {
                    (ExtExp::Finite(a), ExtExp::Finite(b)) => TailBound::Linear { intercept: a + b, slope },
                    (ExtExp::NegInf, _) | (_, ExtExp::NegInf) => TailBound::Exact,
                    _ => TailBound::Unbounded,
                };
                (self.len().max(o.len()), tail)
            }
        };
        let (x, y) = (self.padded(l)?, o.padded(l)?);
        let mut cs = vec![CInftyElem::zero(&tower); l];
        for (i, a) in x.iter().enumerate().take(l) {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate().take(l - i) {
                if !b.is_exact_zero() {
                    cs[i + j] = cs[i + j].add(&a.mul(b)?);
                }
            }
        }
        let mut out = Self::new(&tower, cs, tail);
        out.varpi = self.varpi + o.varpi;
        Ok(out)
    }

    /// The `k`-fold Frobenius twist: coefficients are raised to the power `q^k`.
    pub fn twist(&self, k: i64) -> Self {
        let q = self.q();
        let qk = q_pow(q, k);
        let r = exp(self.varpi) * (qk - Exp::one()) / exp(q - 1);
        let sign = sign_pow(&self.tower, r);
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let y = c.frobenius(k);
                if r.is_zero() {
                    y
                } else {
                    y.mul_monomial(sign, r)
                }
            })
            .collect();
        let tail = match self.tail {
            TailBound::Linear { intercept, slope } => TailBound::Linear { intercept: intercept * qk + r, slope: slope * qk },
            t => t,
        };
        TateElem { tower: self.tower.clone(), coeffs, varpi: self.varpi, tail }
    }

    /// `x(theta)`, with the tail bound folded into the precision floor.
    pub fn eval_at_theta(&self) -> Result<CInftyElem> {
        let q = self.q();
        if self.varpi % (q - 1) != 0 {
            return Err(Error::NotEvaluable("the varpi factor is not a power of theta".into()));
        }
        let v = self.varpi / (q - 1);
        let mut acc = CInftyElem::zero(&self.tower);
        for (j, c) in self.coeffs.iter().enumerate() {
            acc = acc.add(&c.mul_monomial(FFElem::ONE, exp(j as i64)));
        }
        match self.tail {
            TailBound::Exact => {}
            TailBound::Linear { intercept, slope } if slope >= Exp::one() => {
                let l = exp(self.len() as i64);
                acc = acc.add(&CInftyElem::zero_to(&self.tower, intercept - (slope - Exp::one()) * l));
            }
            _ => return Err(Error::NotEvaluable("the tail bound does not certify convergence at t = theta".into())),
        }
        if v == 0 {
            return Ok(acc);
        }
        let sign = sign_pow(&self.tower, exp(v));
        Ok(acc.mul_monomial(sign, exp(v)))
    }

    fn varpi_norm(&self) -> Exp {
        Exp::new(self.varpi, self.q() - 1)
    }

    /// Exponent of the Gauss norm (an upper bound when precision is limited).
    pub fn gauss_norm_exp(&self) -> ExtExp {
        let stored = self.coeffs.iter().map(|c| c.norm_bound()).max().unwrap_or(ExtExp::NegInf);
        ext_add(stored.max(self.tail.sup_from(self.len())), self.varpi_norm())
    }

    /// Exponent of `sup_j |c_j theta^j|`.
    pub fn weighted_norm_exp(&self) -> ExtExp {
        let stored = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| ext_add(c.norm_bound(), exp(j as i64)))
            .max()
            .unwrap_or(ExtExp::NegInf);
        let tail = match self.tail {
            TailBound::Linear { intercept, slope } => {
                TailBound::Linear { intercept, slope: slope - Exp::one() }.sup_from(self.len())
            }
            t => t.at(0),
        };
        ext_add(stored.max(tail), self.varpi_norm())
    }

    /// The certified precision: nothing above this exponent is unknown.
    pub fn floor_exp(&self) -> ExtExp {
        let stored = self.coeffs.iter().map(|c| ExtExp::from_opt(c.floor())).max().unwrap_or(ExtExp::NegInf);
        ext_add(stored.max(self.tail.sup_from(self.len())), self.varpi_norm())
    }

    /// Whether nothing survives above the precision floor.
    pub fn is_zero_at_precision(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_at_precision())
    }

    /// `q`-power-free check: every stored coefficient is fixed by the twist,
    /// i.e. lies in `F_q` at the available precision.
    pub fn is_fq_poly_at_precision(&self) -> bool {
        self.twist(1).sub(self).map(|d| d.is_zero_at_precision()).unwrap_or(false)
    }
}

impl fmt::Display for TateElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = fmt_series_poly(&self.coeffs);
        if self.varpi == 0 {
            write!(f, "{body}")
        } else {
            write!(f, "varpi^({})*({body})", self.varpi)
        }
    }
}

/// `1/(theta^(q^i) - t)^n` to `t`-degree `t_prec`. With `i = 0` this is
/// `(-1)^n/(t - theta)^n`.
pub fn geom_expand(tower: &Arc<FieldTower>, i: u32, n: u32, t_prec: usize) -> Result<TateElem> {
    if n == 0 {
        return Ok(TateElem::one(tower));
    }
    let q = tower.q() as i64;
    let qi = q.checked_pow(i).ok_or_else(|| Error::Resource("q^i overflows".into()))?;
    let p = tower.p();
    let cs = (0..=t_prec)
        .map(|j| {
            let b = binom_mod((j + n as usize - 1) as u64, (n - 1) as u64, p);
            CInftyElem::monomial(tower, FFElem(b), exp(-qi * (n as i64 + j as i64)))
        })
        .collect();
    Ok(TateElem::new(tower, cs, TailBound::Linear { intercept: exp(-(n as i64) * qi), slope: exp(qi) }))
}

/// `(-1)^n/(t - theta)^n` expanded around `t = 0`.
pub fn pole_expansion(tower: &Arc<FieldTower>, n: u32, t_prec: usize) -> TateElem {
    geom_expand(tower, 0, n, t_prec).expect("q^0 does not overflow")
}

/// Truncation of `Omega = varpi^(-q) prod_{i>=1} (1 - t/theta^(q^i))`, using at
/// most `n_factors` factors and `prec` digits.
pub fn omega_trunc(tower: &Arc<FieldTower>, n_factors: u32, t_prec: usize, prec: i64) -> TateElem {
    let q = tower.q() as i64;
    let mut used = 0u32;
    let mut qi = 1i64;
    while used < n_factors && qi <= prec.max(q) / q {
        used += 1;
        qi *= q;
    }
    let used = used.max(n_factors.min(1));
    let qi = q.pow(used);
    let floor = exp(-qi * q);
    let mut cs: Vec<CInftyElem> = (0..=t_prec)
        .map(|j| if j == 0 { CInftyElem::one(tower) } else { CInftyElem::zero_to(tower, floor) })
        .collect();
    for i in 1..=used {
        let e = exp(-q.pow(i));
        for j in (1..=t_prec).rev() {
            let d = cs[j - 1].mul_monomial(tower.neg(FFElem::ONE), e);
            cs[j] = cs[j].add(&d);
        }
    }
    TateElem::new(tower, cs, TailBound::Linear { intercept: exp(0), slope: exp(q) }).with_varpi(-q)
}

/// Gauss norm `||f||` and `||f||_theta` exponents of an exact polynomial.
pub fn gauss_norms(f: &TPoly) -> (Option<i64>, Option<i64>) {
    (f.gauss_norm_exp(), f.theta_norm_exp())
}

/// Residual report of a difference equation `Psi^(-1) = Phi Psi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffEqReport {
    pub residual: ExtExp,
    pub floor: ExtExp,
}

impl DiffEqReport {
    pub fn passes(&self) -> bool {
        self.residual <= self.floor
    }
}

/// Product of matrices of Tate elements.
pub fn mat_mul(a: &[Vec<TateElem>], b: &[Vec<TateElem>]) -> Result<Vec<Vec<TateElem>>> {
    let inner = b.len();
    if a.iter().any(|r| r.len() != inner) || b.iter().any(|r| r.len() != b[0].len()) {
        return Err(Error::Shape("non-conformable matrices".into()));
    }
    let cols = b.first().map_or(0, |r| r.len());
    let tower = a.iter().flatten().chain(b.iter().flatten()).map(|x| x.tower().clone()).next();
    let tower = tower.ok_or_else(|| Error::Shape("empty matrix".into()))?;
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|c| {
                    row.iter().enumerate().try_fold(TateElem::zero(&tower), |acc, (k, x)| acc.add(&x.mul(&b[k][c])?))
                })
                .collect()
        })
        .collect()
}

/// Measures `Psi^(-1) - Phi Psi` entrywise.
pub fn check_diff_eq(phi: &[Vec<TPoly>], psi: &[Vec<TateElem>]) -> Result<DiffEqReport> {
    let r = phi.len();
    if phi.iter().any(|row| row.len() != r) || psi.len() != r || psi.iter().any(|row| row.len() != r) {
        return Err(Error::Shape("Phi and Psi must be square of the same size".into()));
    }
    let floor = exp(-DEFAULT_PREC);
    let phi_t: Vec<Vec<TateElem>> =
        phi.iter().map(|row| row.iter().map(|f| TateElem::from_tpoly(f, floor)).collect()).collect();
    let prod = mat_mul(&phi_t, psi)?;
    let mut residual = ExtExp::NegInf;
    let mut fl = ExtExp::NegInf;
    for (i, row) in psi.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let d = x.twist(-1).sub(&prod[i][j])?;
            residual = residual.max(d.gauss_norm_exp());
            fl = fl.max(d.floor_exp());
        }
    }
    Ok(DiffEqReport { residual, floor: fl })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RatFunc;
    use crate::text::parse_tpoly;
    use proptest::prelude::*;

    fn t3() -> Arc<FieldTower> {
        FieldTower::for_q(3).unwrap()
    }

    #[test]
    fn twist_of_linear_term() {
        let t = FieldTower::new(3, 1, None, 2).unwrap();
        let c = CInftyElem::constant(&t, t.generator());
        let x = TateElem::from_series_poly(&t, vec![CInftyElem::zero(&t), c]);
        let y = x.twist(1);
        assert_eq!(y.coeffs()[1], CInftyElem::constant(&t, t.frob(t.generator(), 1)));
        let back = y.twist(-1);
        assert!(back.sub(&x).unwrap().is_exact_zero());
    }

    #[test]
    fn fq_polynomials_are_fixed_by_twist() {
        let t = t3();
        let f = TateElem::from_fq_tpoly(&FqTPoly::from_ints(&t, &[1, 2, 0, 1]));
        assert!(f.twist(1).sub(&f).unwrap().is_exact_zero());
    }

    #[test]
    fn gauss_norm_examples() {
        let t = t3();
        let f = parse_tpoly(&t, "-t+2*th").unwrap();
        assert_eq!(gauss_norms(&f).0, Some(1));
        assert_eq!(gauss_norms(&TPoly::zero(&t)), (None, None));
        let g = parse_tpoly(&t, "th*t^2+1").unwrap();
        assert_eq!(gauss_norms(&g).0, Some(1));
    }

    #[test]
    fn geometric_expansion() {
        let t = t3();
        let x = geom_expand(&t, 1, 1, 30).unwrap().eval_at_theta().unwrap();
        let th = RatFunc::theta(&t);
        let want = RatFunc::one(&t).div(&(&th.pow(3).unwrap() - &th)).unwrap();
        let want = CInftyElem::from_ratfunc(&want, exp(-200));
        assert!(x.sub(&want).is_zero_at_precision());
        assert_eq!(x.floor(), Some(exp(-3 - 2 * 31)));
        // i=1, n=2: coefficients C(j+1,1) = 1, 2, 0 mod 3
        let y = geom_expand(&t, 1, 2, 2).unwrap();
        assert_eq!(y.coeffs()[0], CInftyElem::monomial(&t, FFElem::ONE, exp(-6)));
        assert_eq!(y.coeffs()[1], CInftyElem::monomial(&t, t.from_int(2), exp(-9)));
        assert!(y.coeffs()[2].is_exact_zero());
        assert_eq!(geom_expand(&t, 1, 0, 5).unwrap().coeffs().len(), 1);
    }

    #[test]
    fn omega_is_a_trivialization() {
        for q in [2u64, 3, 4, 5] {
            let t = FieldTower::for_q(q).unwrap();
            let om = omega_trunc(&t, 20, 16, 40);
            assert_eq!(om.gauss_norm_exp(), ExtExp::Finite(Exp::new(-(q as i64), q as i64 - 1)));
            let phi = vec![vec![parse_tpoly(&t, "t-th").unwrap()]];
            let rep = check_diff_eq(&phi, &[vec![om.clone()]]).unwrap();
            assert!(rep.passes(), "q={q}: {rep:?}");
            // a constant perturbation is detected
            let bad = om.add(&TateElem::one(&t).with_varpi(-(q as i64))).unwrap();
            let rep = check_diff_eq(&phi, &[vec![bad]]).unwrap();
            assert!(!rep.passes());
            // the residual is -t varpi^(-q)
            assert_eq!(rep.residual, ExtExp::Finite(Exp::new(-(q as i64), q as i64 - 1)));
        }
    }

    #[test]
    fn identity_trivializes_identity() {
        let t = t3();
        let rep = check_diff_eq(&[vec![TPoly::one(&t)]], &[vec![TateElem::one(&t)]]).unwrap();
        assert_eq!(rep.residual, ExtExp::NegInf);
        assert!(rep.passes());
        let x = TateElem::constant(CInftyElem::one(&t).add(&CInftyElem::theta(&t)));
        assert!(!check_diff_eq(&[vec![TPoly::one(&t)]], &[vec![x]]).unwrap().passes());
    }

    #[test]
    fn shape_mismatch() {
        let t = t3();
        assert!(check_diff_eq(&[vec![TPoly::one(&t)]], &[]).is_err());
    }

    fn random_tate(t: &Arc<FieldTower>, spec: &[(i64, i64, u32)]) -> TateElem {
        let cs = spec.iter().map(|&(e1, e2, c)| {
            CInftyElem::monomial(t, t.from_int(c as i64), exp(e1)).add(&CInftyElem::monomial(t, FFElem::ONE, exp(e2 - 10)))
        });
        TateElem::new(t, cs.collect(), TailBound::Exact)
    }

    proptest! {
        #[test]
        fn gauss_norm_is_multiplicative(a in prop::collection::vec((-5i64..4, -5i64..4, 1u32..3), 1..5),
                                        b in prop::collection::vec((-5i64..4, -5i64..4, 1u32..3), 1..5)) {
            let t = t3();
            let (x, y) = (random_tate(&t, &a), random_tate(&t, &b));
            let p = x.mul(&y).unwrap();
            let sum = |u: ExtExp, v: ExtExp| ext_add(u, v.finite().unwrap());
            prop_assert_eq!(p.gauss_norm_exp(), sum(x.gauss_norm_exp(), y.gauss_norm_exp()));
        }

        #[test]
        fn twist_is_multiplicative(a in prop::collection::vec((-5i64..4, -5i64..4, 1u32..3), 1..5),
                                   b in prop::collection::vec((-5i64..4, -5i64..4, 1u32..3), 1..5),
                                   k in -2i64..3) {
            let t = FieldTower::new(3, 1, None, 2).unwrap();
            let (x, y) = (random_tate(&t, &a), random_tate(&t, &b).scale(&CInftyElem::constant(&t, t.generator())).unwrap());
            let lhs = x.mul(&y).unwrap().twist(k);
            let rhs = x.twist(k).mul(&y.twist(k)).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().is_exact_zero());
        }

        #[test]
        fn torsor_action_preserves_trivializations(cs in prop::collection::vec(0i64..3, 1..4)) {
            let t = t3();
            let b = FqTPoly::from_ints(&t, &cs);
            prop_assume!(!b.is_zero());
            let om = omega_trunc(&t, 20, 12, 40);
            let psi = om.mul(&TateElem::from_fq_tpoly(&b)).unwrap();
            let phi = vec![vec![parse_tpoly(&t, "t-th").unwrap()]];
            prop_assert!(check_diff_eq(&phi, &[vec![psi]]).unwrap().passes());
        }

        #[test]
        fn compare_norms_inequality(cs in prop::collection::vec((0i64..3, 0usize..3), 0..9)) {
            let t = t3();
            let th = RatFunc::theta(&t);
            let f = TPoly::new(&t, cs.iter().map(|&(c, d)| &RatFunc::from_int(&t, c) * &th.pow(d as i64).unwrap()).collect());
            if let (Some(a), Some(b)) = gauss_norms(&f) {
                let n = f.degree().unwrap();
                prop_assert!(a <= crate::poly::dn_norm_exp(&t, n) + b);
            }
        }
    }
}
