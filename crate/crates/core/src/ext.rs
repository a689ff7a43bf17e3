//! The extension module `V_n`: column vectors `(x_(n-1), ..., x_0)` on which
//! `t` acts by the Jordan block with `theta` on the diagonal. A point is
//! identified with the polynomial `sum_j x_j (t - theta)^j` modulo
//! `(t - theta)^n`, and `[a]` is multiplication by `a`.
//!
//! On top of the module sit the continuation of `Li_n` through small
//! generators and the search for `F_q[t]`-linear relations among points.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};
use crate::kochubei::{kpl_eval, Residual};
use crate::poly::{binom_mod, unify2, FqTPoly, RatFunc, TPoly, ThetaPoly};
use crate::series::{exp, CInftyElem, Exp};
use crate::tate::{pole_expansion, TailBound, TateElem};
use crate::text::{parse_fq_tpoly, parse_fp_poly, parse_ratfunc, parse_series_poly};
use crate::wp::{wp_coeff, wp_inverse, WpConfig};

/// Iteration cap of [`small_generate`].
pub const SMALL_GEN_CAP: usize = 256;

/// A point of `V_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtPoint {
    /// `x_(n-1), ..., x_0`.
    entries: Vec<RatFunc>,
}

impl ExtPoint {
    /// From `(x_(n-1), ..., x_0)`.
    pub fn new(entries: Vec<RatFunc>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Shape("a point of V_n needs n >= 1 entries".into()));
        }
        let t = entries.iter().fold(entries[0].tower().clone(), |acc, x| unify2(&acc, x.tower()));
        let entries = entries.iter().map(|x| x.embed(&t)).collect::<Result<Vec<_>>>()?;
        Ok(ExtPoint { entries })
    }

    /// `(0, ..., 0, u)`.
    pub fn constant(n: usize, u: RatFunc) -> Result<Self> {
        let mut e = vec![RatFunc::zero(u.tower()); n.saturating_sub(1)];
        e.push(u);
        Self::new(e)
    }

    /// The point of a polynomial of degree `< n`.
    pub fn from_poly(f: &TPoly, n: usize) -> Result<Self> {
        if f.degree().is_some_and(|d| d >= n) {
            return Err(Error::Shape(format!("degree {} is not below {n}", f.degree().unwrap())));
        }
        let mut xs = f.expand_at_theta();
        xs.resize(n, RatFunc::zero(f.tower()));
        xs.reverse();
        Self::new(xs)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }
    pub fn tower(&self) -> &Arc<FieldTower> {
        self.entries[0].tower()
    }
    pub fn entries(&self) -> &[RatFunc] {
        &self.entries
    }
    /// `x_j`.
    pub fn coord(&self, j: usize) -> &RatFunc {
        &self.entries[self.n() - 1 - j]
    }
    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }
    /// `sum_j x_j (t - theta)^j`.
    pub fn to_poly(&self) -> TPoly {
        let xs: Vec<RatFunc> = (0..self.n()).map(|j| self.coord(j).clone()).collect();
        TPoly::from_expansion(self.tower(), &xs)
    }
    fn from_coords(xs: Vec<RatFunc>) -> Result<Self> {
        let mut xs = xs;
        xs.reverse();
        Self::new(xs)
    }
}

/// `((d^j a)(theta))_j` as rational functions over `tower`.
fn hyper_at_theta(a: &FqTPoly, n: usize, tower: &Arc<FieldTower>) -> Result<Vec<RatFunc>> {
    (0..n).map(|j| RatFunc::from_poly(a.hyperderiv_at_theta(j)).embed(tower)).collect()
}

/// `[a]_n v`.
pub fn t_action(a: &FqTPoly, v: &ExtPoint) -> Result<ExtPoint> {
    let t = unify2(a.tower(), v.tower());
    let n = v.n();
    let al = hyper_at_theta(a, n, &t)?;
    let x: Vec<RatFunc> = (0..n).map(|j| v.coord(j).embed(&t)).collect::<Result<_>>()?;
    let y = (0..n)
        .map(|j| (0..=j).fold(RatFunc::zero(&t), |acc, i| &acc + &(&al[i] * &x[j - i])))
        .collect();
    ExtPoint::from_coords(y)
}

/// `[a]_n^(-1) v`, solving the triangular system.
pub fn t_inverse_action(a: &FqTPoly, v: &ExtPoint) -> Result<ExtPoint> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let t = unify2(a.tower(), v.tower());
    let n = v.n();
    let al = hyper_at_theta(a, n, &t)?;
    let a0 = al[0].inv()?;
    let mut x: Vec<RatFunc> = Vec::with_capacity(n);
    for j in 0..n {
        let mut r = v.coord(j).embed(&t)?;
        for i in 1..=j {
            r = &r - &(&al[i] * &x[j - i]);
        }
        x.push(&r * &a0);
    }
    ExtPoint::from_coords(x)
}

fn t_poly(tower: &Arc<FieldTower>) -> FqTPoly {
    FqTPoly::from_ints(tower, &[0, 1])
}

/// `(-1)^n`.
fn sign(tower: &Arc<FieldTower>, n: usize) -> RatFunc {
    RatFunc::from_int(tower, if n % 2 == 0 { 1 } else { -1 })
}

/// The point of `f` together with `G` such that `f - wp(G)(t - theta)^n` has
/// degree `< n` (absent when `deg f < n` already).
pub fn vpoint_from_poly(f: &TPoly, n: usize, target: Exp, cfg: &WpConfig) -> Result<(ExtPoint, Option<TateElem>)> {
    if f.degree().is_none_or(|d| d < n) {
        return Ok((ExtPoint::from_poly(f, n)?, None));
    }
    let (quo, rem) = f.divrem(&TPoly::t_minus_theta_pow(f.tower(), n))?;
    let q = exp(f.tower().q() as i64);
    let g = wp_inverse(&TateElem::from_tpoly(&quo, target / q), target, cfg)?;
    Ok((ExtPoint::from_poly(&rem, n)?, Some(g)))
}

/// Outcome of [`small_generate`]: `[t]^ell` applied to the point of `g` is the input.
#[derive(Clone, Debug)]
pub struct SmallGen {
    pub ell: usize,
    pub g: TPoly,
}

/// The least `ell` for which the polynomial of `[t]_n^(-ell) v` has Gauss norm `< q^n`.
pub fn small_generate(v: &ExtPoint) -> Result<SmallGen> {
    let n = v.n() as i64;
    let t = t_poly(v.tower());
    let mut cur = v.clone();
    for ell in 0..=SMALL_GEN_CAP {
        let g = cur.to_poly();
        if g.gauss_norm_exp().is_none_or(|e| e < n) {
            return Ok(SmallGen { ell, g });
        }
        cur = t_inverse_action(&t, &cur)?;
    }
    Err(Error::Resource(format!("no small generator within {SMALL_GEN_CAP} steps")))
}

/// `B` with `wp(B) = ((-1)^n f - (-1)^n t^ell g)/(t - theta)^n`, canonical branch.
/// Non-divisibility means the two classes differ.
pub fn class_correction(f: &TPoly, g: &TPoly, ell: usize, n: usize, target: Exp, cfg: &WpConfig) -> Result<TateElem> {
    let tower = unify2(f.tower(), g.tower());
    let s = sign(&tower, n);
    let num = &f.embed(&tower)?.scale(&s) - &g.embed(&tower)?.shift(ell).scale(&s);
    let (quo, rem) = num.divrem(&TPoly::t_minus_theta_pow(&tower, n))?;
    if !rem.is_zero() {
        return Err(Error::ClassMismatch(format!("remainder {rem} modulo (t-th)^{n}")));
    }
    let q = exp(tower.q() as i64);
    wp_inverse(&TateElem::from_tpoly(&quo, target / q), target, cfg)
}

/// The continued value of `Li_n(u)` and the data that produced it.
#[derive(Clone, Debug)]
pub struct KplContinuation {
    /// Representative modulo `A`.
    pub value: CInftyElem,
    pub ell: usize,
    pub g: TPoly,
    pub b: TateElem,
}

impl KplContinuation {
    /// Degree over `F_q` of the constants needed by the correction.
    pub fn ext_degree(&self) -> u32 {
        self.value.tower().m().max(self.b.tower().m())
    }
}

/// A series argument for `kpl_eval` accurate enough for a result at `target`.
fn kpl_arg(x: &RatFunc, n: u32, target: Exp) -> CInftyElem {
    CInftyElem::from_ratfunc(x, (target / exp(x.tower().q() as i64) + exp(n as i64)).floor())
}

/// `Li_n(u)` continued to all `u`: `[t]^(-ell)` brings `v_u` to a small class
/// `g`, and `L_(u,n) = t^ell L_(g,n) + B` is evaluated at `t = theta`.
pub fn continue_kpl(n: u32, u: &RatFunc, target: Exp, cfg: &WpConfig) -> Result<KplContinuation> {
    let tower = u.tower().clone();
    if u.is_zero() {
        return Ok(KplContinuation {
            value: CInftyElem::zero(&tower),
            ell: 0,
            g: TPoly::zero(&tower),
            b: TateElem::zero(&tower),
        });
    }
    let q = exp(tower.q() as i64);
    if n == 0 {
        let x = CInftyElem::from_ratfunc(u, target / q);
        let b = wp_coeff(&x, target, cfg)?.value;
        return Ok(KplContinuation {
            value: b.reduce_mod_a(),
            ell: 0,
            g: TPoly::zero(&tower),
            b: TateElem::constant(b),
        });
    }
    let nn = n as usize;
    let s = sign(&tower, nn);
    let sg = small_generate(&ExtPoint::constant(nn, &s * u)?)?;
    let g = sg.g.scale(&s);
    let b = class_correction(&TPoly::constant(u.clone()), &g, sg.ell, nn, target, cfg)?;
    let mut value = b.eval_at_theta()?;
    for (j, gj) in g.coeffs().iter().enumerate() {
        if gj.is_zero() {
            continue;
        }
        let sh = exp((sg.ell + j) as i64);
        let li = kpl_eval(n, &kpl_arg(gj, n, target - sh), target - sh)?;
        value = value.add(&li.mul_monomial(FFElem::ONE, sh));
    }
    Ok(KplContinuation { value: value.reduce_mod_a(), ell: sg.ell, g, b })
}

/// Smallest `t`-precision for which the `wp` route certifies `target` at `|u| = q^nu`.
pub fn wp_route_t_prec(q: u64, n: u32, nu: i64, target: Exp) -> usize {
    let q = q as i64;
    let lead = exp(q * (nu - n as i64));
    let need = ((lead - target) / exp(q - 1)).ceil().to_integer();
    need.max(1) as usize
}

/// `Li_n(u)` continued by solving `wp(F) = (-1)^n u/(t - theta)^n` in the
/// Tate algebra and evaluating at `t = theta`.
pub fn continue_kpl_wp_route(n: u32, u: &RatFunc, t_prec: usize, target: Exp, cfg: &WpConfig) -> Result<CInftyElem> {
    let tower = u.tower().clone();
    if u.is_zero() {
        return Ok(CInftyElem::zero(&tower));
    }
    let q = exp(tower.q() as i64);
    let x = CInftyElem::from_ratfunc(u, (target / q).floor());
    let g = pole_expansion(&tower, n, t_prec).scale(&x)?;
    let f = wp_inverse(&g, target, cfg)?;
    Ok(f.eval_at_theta()?.reduce_mod_a())
}

/// `F_q`-kernel of a matrix whose entries lie in `F_q`.
fn nullspace(t: &FieldTower, rows: &[Vec<FFElem>], ncols: usize) -> Vec<Vec<FFElem>> {
    let mut m: Vec<Vec<FFElem>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = t.inv(m[r][c]).unwrap();
        for x in m[r].iter_mut() {
            *x = t.mul(*x, inv);
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for k in 0..ncols {
                    m[i][k] = t.sub(m[i][k], t.mul(f, m[r][k]));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![FFElem::ZERO; ncols];
            v[free] = FFElem::ONE;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = t.neg(m[i][free]);
            }
            v
        })
        .collect()
}

/// Incremental echelon basis of a subspace of `F_q^N`.
struct Span<'a> {
    t: &'a FieldTower,
    basis: Vec<(usize, Vec<FFElem>)>,
}

impl<'a> Span<'a> {
    fn reduce(&self, v: &[FFElem]) -> Vec<FFElem> {
        let mut v = v.to_vec();
        for (p, b) in &self.basis {
            let f = v[*p];
            if !f.is_zero() {
                for (x, y) in v.iter_mut().zip(b) {
                    *x = self.t.sub(*x, self.t.mul(f, *y));
                }
            }
        }
        v
    }
    /// Adds `v`; returns its normalized reduction when it was new.
    fn insert(&mut self, v: &[FFElem]) -> Option<Vec<FFElem>> {
        let mut v = self.reduce(v);
        let p = v.iter().position(|x| !x.is_zero())?;
        let inv = self.t.inv(v[p]).unwrap();
        for x in v.iter_mut() {
            *x = self.t.mul(*x, inv);
        }
        self.basis.push((p, v.clone()));
        Some(v)
    }
}

/// A linear relation `sum_i [a_i]_n v_(u_i) = 0`, optionally lifted.
#[derive(Clone, Debug)]
pub struct Relation {
    pub n: u32,
    pub u_list: Vec<RatFunc>,
    pub coefficients: Vec<FqTPoly>,
    pub deg_bound: usize,
    /// `B` with `wp(B) = sum_i a_i (-1)^n u_i/(t - theta)^n`.
    pub b: Option<TateElem>,
    pub residual: Option<Residual>,
}

impl Relation {
    pub fn degree(&self) -> usize {
        self.coefficients.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }
}

/// Whether `sum_i [a_i]_n v_(u_i) = 0` holds exactly, with `v_u = (0, ..., 0, (-1)^n u)`.
pub fn is_module_relation(coeffs: &[FqTPoly], u_list: &[RatFunc], n: usize) -> Result<bool> {
    if coeffs.len() != u_list.len() || u_list.is_empty() {
        return Err(Error::Shape(format!("{} coefficients for {} points", coeffs.len(), u_list.len())));
    }
    let mut acc: Option<ExtPoint> = None;
    for (a, u) in coeffs.iter().zip(u_list) {
        let s = sign(u.tower(), n);
        let w = t_action(a, &ExtPoint::constant(n, &s * u)?)?;
        acc = Some(match acc {
            None => w,
            Some(x) => {
                let t = unify2(x.tower(), w.tower());
                ExtPoint::new(
                    x.entries().iter().zip(w.entries()).map(|(p, q)| Ok(&p.embed(&t)? + &q.embed(&t)?)).collect::<Result<_>>()?,
                )?
            }
        });
    }
    Ok(acc.unwrap().is_zero())
}

/// A basis of the `F_q[t]`-relations among `v_(u_1), ..., v_(u_k)` with
/// coefficients of degree at most `deg_bound`, built degree by degree so that
/// no returned relation is an `F_q[t]`-combination of earlier ones.
/// An empty result only says that no relation exists up to the bound.
pub fn relation_search(u_list: &[RatFunc], n: usize, deg_bound: usize) -> Result<Vec<Relation>> {
    if u_list.is_empty() || n == 0 {
        return Err(Error::Shape("need at least one point and n >= 1".into()));
    }
    let tower = u_list.iter().fold(u_list[0].tower().clone(), |acc, x| unify2(&acc, x.tower()));
    let us = u_list.iter().map(|u| u.embed(&tower)).collect::<Result<Vec<_>>>()?;
    let mut lcm = ThetaPoly::one(&tower);
    for u in &us {
        let g = lcm.gcd(u.den());
        lcm = (&lcm * u.den()).divrem(&g)?.0;
    }
    let polys: Vec<ThetaPoly> = us.iter().map(|u| Ok(u.num() * &lcm.divrem(u.den())?.0)).collect::<Result<_>>()?;
    let k = us.len();
    let width = deg_bound + 1;
    let ncols = k * width;
    let top = polys.iter().filter_map(|p| p.degree()).max().unwrap_or(0) + deg_bound;
    let p = tower.p();
    let m = tower.fq_coords(FFElem::ONE).len();
    let mut rows = Vec::new();
    for j in 0..n {
        for e in 0..=top {
            let mut block = vec![vec![FFElem::ZERO; ncols]; m];
            for (i, pi) in polys.iter().enumerate() {
                for kk in j..width {
                    if e < kk {
                        continue;
                    }
                    let c = pi.coeff(e - kk);
                    let b = binom_mod(kk as u64, j as u64, p);
                    if c.is_zero() || b == 0 {
                        continue;
                    }
                    let v = tower.mul(c, tower.from_int(b as i64));
                    for (r, x) in tower.fq_coords(v).into_iter().enumerate() {
                        block[r][i * width + kk] = x;
                    }
                }
            }
            rows.extend(block.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())));
        }
    }
    let mut span = Span { t: &tower, basis: Vec::new() };
    let mut gens: Vec<(Vec<FFElem>, usize)> = Vec::new();
    for d in 0..=deg_bound {
        for (g, dg) in gens.clone() {
            let mut sh = vec![FFElem::ZERO; ncols];
            for i in 0..k {
                for kk in 0..=dg {
                    sh[i * width + kk + d - dg] = g[i * width + kk];
                }
            }
            span.insert(&sh);
        }
        let cols: Vec<usize> = (0..ncols).filter(|c| c % width <= d).collect();
        let sub: Vec<Vec<FFElem>> = rows.iter().map(|r| cols.iter().map(|&c| r[c]).collect()).collect();
        for v in nullspace(&tower, &sub, cols.len()) {
            let mut full = vec![FFElem::ZERO; ncols];
            for (x, &c) in v.iter().zip(&cols) {
                full[c] = *x;
            }
            if let Some(g) = span.insert(&full) {
                gens.push((g, d));
            }
        }
    }
    gens.into_iter()
        .map(|(g, _)| {
            let coefficients = (0..k)
                .map(|i| FqTPoly::new(&tower, g[i * width..(i + 1) * width].to_vec()))
                .collect::<Result<Vec<_>>>()?;
            Ok(Relation { n: n as u32, u_list: us.clone(), coefficients, deg_bound, b: None, residual: None })
        })
        .collect()
}

/// Lifts a module relation to `sum_i a_i(theta) Li_n(u_i) - B(theta) in A`
/// and verifies it numerically at `target`.
pub fn lift_relation(
    coeffs: &[FqTPoly],
    u_list: &[RatFunc],
    n: usize,
    deg_bound: usize,
    target: Exp,
    cfg: &WpConfig,
) -> Result<Relation> {
    if !is_module_relation(coeffs, u_list, n)? {
        return Err(Error::ClassMismatch("the coefficients do not annihilate the points".into()));
    }
    let tower = u_list.iter().fold(u_list[0].tower().clone(), |acc, x| unify2(&acc, x.tower()));
    let s = sign(&tower, n);
    let mut sum = TPoly::zero(&tower);
    for (a, u) in coeffs.iter().zip(u_list) {
        sum = &sum + &a.to_tpoly().embed(&tower)?.scale(&(&s * &u.embed(&tower)?));
    }
    let (quo, rem) = sum.divrem(&TPoly::t_minus_theta_pow(&tower, n))?;
    if !rem.is_zero() {
        return Err(Error::ClassMismatch(format!("remainder {rem} modulo (t-th)^{n}")));
    }
    let q = exp(tower.q() as i64);
    let b = wp_inverse(&TateElem::from_tpoly(&quo, target / q), target, cfg)?;
    let mut rel = Relation {
        n: n as u32,
        u_list: u_list.to_vec(),
        coefficients: coeffs.to_vec(),
        deg_bound,
        b: Some(b),
        residual: None,
    };
    rel.residual = Some(verify_relation(&rel, target, cfg)?);
    Ok(rel)
}

/// Residual of `sum_i a_i(theta) Li_n(u_i) - B(theta)` modulo `A`, with every
/// value recomputed through the continuation pipeline.
pub fn verify_relation(rel: &Relation, target: Exp, cfg: &WpConfig) -> Result<Residual> {
    let b = rel.b.as_ref().ok_or_else(|| Error::Shape("the relation has no correction term".into()))?;
    let mut acc = b.eval_at_theta()?.neg();
    for (a, u) in rel.coefficients.iter().zip(&rel.u_list) {
        if a.is_zero() {
            continue;
        }
        let d = exp(a.degree().unwrap() as i64);
        let v = continue_kpl(rel.n, u, target - d, cfg)?.value;
        acc = acc.add(&CInftyElem::from_theta_poly(&a.at_theta()).mul(&v)?);
    }
    Ok(Residual::of(&acc.reduce_mod_a()))
}

/// Line-oriented serialization of a relation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationCertificate {
    pub q: u64,
    pub p: u32,
    pub fq_modulus: String,
    pub n: u32,
    pub u_list: Vec<String>,
    pub coefficients: Vec<String>,
    pub deg_bound: usize,
    /// Coefficients of `B` as a polynomial in `t`, in the extension of degree `ext_degree`.
    pub b: Option<String>,
    pub ext_degree: u32,
    pub residual_exponent: Option<String>,
    pub floor_exponent: Option<String>,
    pub pass: Option<bool>,
}

fn fmt_fp_poly(cs: &[u32]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

impl RelationCertificate {
    pub fn from_relation(rel: &Relation) -> Self {
        let t = rel.u_list[0].tower();
        let ext = rel.b.as_ref().map_or(1, |b| b.tower().m());
        RelationCertificate {
            q: t.q(),
            p: t.p(),
            fq_modulus: fmt_fp_poly(t.fq_modulus()),
            n: rel.n,
            u_list: rel.u_list.iter().map(|u| u.to_string()).collect(),
            coefficients: rel.coefficients.iter().map(|c| c.to_string()).collect(),
            deg_bound: rel.deg_bound,
            b: rel.b.as_ref().map(|b| b.to_string()),
            ext_degree: ext,
            residual_exponent: rel.residual.map(|r| r.residual.to_string()),
            floor_exponent: rel.residual.map(|r| r.floor.to_string()),
            pass: rel.residual.map(|r| r.passes()),
        }
    }

    /// Rebuilds the relation over the recorded fields.
    pub fn to_relation(&self) -> Result<Relation> {
        let (p, ell) = crate::field::split_prime_power(self.q)
            .ok_or_else(|| Error::Config(format!("q = {} is not a prime power", self.q)))?;
        if p != self.p {
            return Err(Error::Config(format!("p = {} does not divide q = {}", self.p, self.q)));
        }
        let modulus = if ell > 1 { Some(parse_fp_poly(p, &self.fq_modulus)?) } else { None };
        let base = FieldTower::new(p, ell, modulus, 1)?;
        let u_list = self.u_list.iter().map(|s| parse_ratfunc(&base, s)).collect::<Result<Vec<_>>>()?;
        let coefficients = self.coefficients.iter().map(|s| parse_fq_tpoly(&base, s)).collect::<Result<Vec<_>>>()?;
        let mut ext = base.clone();
        while ext.m() < self.ext_degree {
            ext = ext.enlarge(p)?;
        }
        if ext.m() != self.ext_degree {
            return Err(Error::Config(format!("extension degree {} is not reachable", self.ext_degree)));
        }
        let b = match &self.b {
            Some(s) => Some(TateElem::new(&ext, parse_series_poly(&ext, s)?, TailBound::Exact)),
            None => None,
        };
        Ok(Relation { n: self.n, u_list, coefficients, deg_bound: self.deg_bound, b, residual: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kochubei::is_zero_mod_a;
    use proptest::prelude::*;

    fn t3() -> Arc<FieldTower> {
        FieldTower::for_q(3).unwrap()
    }
    fn rf(t: &Arc<FieldTower>, s: &str) -> RatFunc {
        parse_ratfunc(t, s).unwrap()
    }
    fn tp(t: &Arc<FieldTower>, s: &str) -> TPoly {
        crate::text::parse_tpoly(t, s).unwrap()
    }

    #[test]
    fn inverse_t_on_theta_squared() {
        let t = t3();
        let v = ExtPoint::new(vec![RatFunc::zero(&t), rf(&t, "th^2")]).unwrap();
        let w = t_inverse_action(&t_poly(&t), &v).unwrap();
        assert_eq!(w.entries(), &[rf(&t, "-1"), rf(&t, "th")]);
        assert_eq!(t_action(&FqTPoly::from_ints(&t, &[1]), &v).unwrap(), v);
        assert_eq!(t_action(&t_poly(&t), &w).unwrap(), v);
    }

    #[test]
    fn small_generator_of_theta_squared() {
        let t = t3();
        let v = ExtPoint::constant(2, rf(&t, "th^2")).unwrap();
        let sg = small_generate(&v).unwrap();
        assert_eq!(sg.ell, 1);
        assert_eq!(sg.g, tp(&t, "-t+2*th"));
        let again = small_generate(&ExtPoint::from_poly(&sg.g, 2).unwrap()).unwrap();
        assert_eq!(again.ell, 0);
    }

    #[test]
    fn correction_in_f27() {
        let t = t3();
        let b = class_correction(&tp(&t, "th^2"), &tp(&t, "-t+2*th"), 1, 2, exp(-30), &WpConfig::default()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.tower().m(), 3);
        let c = b.coeff(0).unwrap();
        // B^(1/q) - B = 1 over F_27, and B is a genuine constant
        let lhs = c.frobenius(-1).sub(&c);
        assert_eq!(lhs, CInftyElem::one(c.tower()));
        assert!(c.is_exact() && c.norm_exp() == Some(exp(0)));
        let z = class_correction(&tp(&t, "t*th"), &tp(&t, "th"), 1, 2, exp(-30), &WpConfig::default()).unwrap();
        assert!(z.is_exact_zero());
        let bad = class_correction(&tp(&t, "th^2"), &tp(&t, "th"), 1, 2, exp(-30), &WpConfig::default());
        assert!(matches!(bad, Err(Error::ClassMismatch(_))));
    }

    #[test]
    fn points_of_polynomials() {
        let t = t3();
        let cfg = WpConfig::default();
        let (v, g) = vpoint_from_poly(&tp(&t, "t+th"), 2, exp(-20), &cfg).unwrap();
        assert!(g.is_none());
        assert_eq!(v.to_poly(), tp(&t, "t+th"));
        let (v, g) = vpoint_from_poly(&TPoly::t_minus_theta_pow(&t, 2), 2, exp(-20), &cfg).unwrap();
        assert!(v.is_zero());
        let g = g.unwrap();
        let w = g.twist(-1).sub(&g).unwrap();
        assert_eq!(w.coeff(0).unwrap(), CInftyElem::one(w.tower()));
    }

    #[test]
    fn paper_example_continuation() {
        let t = t3();
        let cfg = WpConfig::default();
        let target = exp(-30);
        let c = continue_kpl(2, &rf(&t, "th^2"), target, &cfg).unwrap();
        assert_eq!((c.ell, c.g.clone()), (1, tp(&t, "-t+2*th")));
        assert_eq!(c.ext_degree(), 3);
        let b = c.b.coeff(0).unwrap();
        let li2 = kpl_eval(2, &CInftyElem::from_ratfunc(&rf(&t, "2*th"), exp(-40)), exp(-31)).unwrap();
        let li1 = kpl_eval(2, &CInftyElem::one(&t), exp(-32)).unwrap();
        let rhs = b.add(&li2.mul_monomial(FFElem::ONE, exp(1))).sub(&li1.mul_monomial(FFElem::ONE, exp(2)));
        let r = Residual::of(&c.value.sub(&rhs).reduce_mod_a());
        assert!(r.residual <= crate::series::ExtExp::Finite(exp(-25)), "{r:?}");
        let w = continue_kpl_wp_route(2, &rf(&t, "th^2"), wp_route_t_prec(3, 2, 2, target), target, &cfg).unwrap();
        assert!(is_zero_mod_a(&w.sub(&c.value)));
    }

    #[test]
    fn routes_agree_inside_disc() {
        let t = t3();
        let cfg = WpConfig::default();
        let target = exp(-20);
        for (n, s) in [(1, "1"), (2, "th"), (3, "th^2+th^-1")] {
            let u = rf(&t, s);
            let a = continue_kpl(n, &u, target, &cfg).unwrap();
            assert_eq!(a.ell, 0);
            let d = kpl_eval(n, &CInftyElem::from_ratfunc(&u, exp(-40)), target).unwrap();
            assert!(is_zero_mod_a(&a.value.sub(&d)));
            let nu = u.norm_exp().unwrap();
            let w = continue_kpl_wp_route(n, &u, wp_route_t_prec(3, n, nu, target), target, &cfg).unwrap();
            assert!(is_zero_mod_a(&w.sub(&d)));
        }
        assert!(continue_kpl(2, &RatFunc::zero(&t), target, &cfg).unwrap().value.is_exact_zero());
        assert!(continue_kpl_wp_route(2, &RatFunc::zero(&t), 4, target, &cfg).unwrap().is_exact_zero());
    }

    #[test]
    fn independence_and_dependence() {
        let t = t3();
        assert!(relation_search(&[rf(&t, "1"), rf(&t, "th")], 2, 6).unwrap().is_empty());
        let r = relation_search(&[rf(&t, "1"), rf(&t, "2")], 1, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].coefficients, vec![FqTPoly::from_ints(&t, &[1]), FqTPoly::from_ints(&t, &[1])]);
        let r = relation_search(&[rf(&t, "th^-1+1"), rf(&t, "1+th")], 1, 3).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].coefficients, vec![FqTPoly::from_ints(&t, &[0, 1]), FqTPoly::from_ints(&t, &[2])]);
        let r = relation_search(&[rf(&t, "th^2"), rf(&t, "-1"), rf(&t, "2*th")], 2, 4).unwrap();
        assert!(r.iter().all(|x| is_module_relation(&x.coefficients, &x.u_list, 2).unwrap()));
        assert!(r.iter().any(|x| x.coefficients
            == vec![FqTPoly::from_ints(&t, &[1]), FqTPoly::from_ints(&t, &[0, 0, -1]), FqTPoly::from_ints(&t, &[0, -1])]));
    }

    #[test]
    fn lifted_relations_verify() {
        let t = t3();
        let cfg = WpConfig::default();
        let target = exp(-22);
        let us = [rf(&t, "th^2"), rf(&t, "-1"), rf(&t, "2*th")];
        let cs = [FqTPoly::from_ints(&t, &[1]), FqTPoly::from_ints(&t, &[0, 0, -1]), FqTPoly::from_ints(&t, &[0, -1])];
        let rel = lift_relation(&cs, &us, 2, 4, target, &cfg).unwrap();
        assert!(rel.residual.unwrap().passes(), "{:?}", rel.residual);
        let b = rel.b.as_ref().unwrap();
        assert_eq!(b.tower().m(), 3);
        let cert = RelationCertificate::from_relation(&rel);
        let json = serde_json::to_string(&cert).unwrap();
        let back: RelationCertificate = serde_json::from_str(&json).unwrap();
        let rel2 = back.to_relation().unwrap();
        assert!(verify_relation(&rel2, target, &cfg).unwrap().passes());
        let mut bad = rel2.clone();
        bad.coefficients[2] = FqTPoly::from_ints(&t, &[0, 1]);
        assert!(!verify_relation(&bad, target, &cfg).unwrap().passes());
        let mut bad = rel2;
        bad.b = Some(b.add(&TateElem::constant(CInftyElem::constant(b.tower(), b.tower().generator()))).unwrap());
        let r = verify_relation(&bad, target, &cfg).unwrap();
        assert!(r.residual >= crate::series::ExtExp::Finite(exp(0)));

        let trivial = lift_relation(&vec![FqTPoly::from_ints(&t, &[1]); 2], &[rf(&t, "1"), rf(&t, "2")], 1, 0, target, &cfg).unwrap();
        assert!(trivial.b.as_ref().unwrap().is_exact_zero());
        assert!(trivial.residual.unwrap().passes());
        let u = rf(&t, "th^-1");
        let shifted = lift_relation(
            &[FqTPoly::from_ints(&t, &[0, 1]), FqTPoly::from_ints(&t, &[-1])],
            &[u.clone(), &u * &RatFunc::theta(&t)],
            1,
            1,
            target,
            &cfg,
        )
        .unwrap();
        assert!(shifted.residual.unwrap().passes());
        let wrong = lift_relation(&vec![FqTPoly::from_ints(&t, &[1]); 2], &[rf(&t, "1"), rf(&t, "1")], 1, 0, target, &cfg);
        assert!(matches!(wrong, Err(Error::ClassMismatch(_))));
    }

    fn arb_point() -> impl Strategy<Value = (usize, Vec<Vec<i64>>)> {
        (1usize..=4).prop_flat_map(|n| (Just(n), prop::collection::vec(prop::collection::vec(-1i64..=1, 1..=4), n)))
    }

    fn point(t: &Arc<FieldTower>, xs: &[Vec<i64>]) -> ExtPoint {
        ExtPoint::new(xs.iter().map(|c| RatFunc::from_poly(ThetaPoly::new(t, c.iter().map(|&x| t.from_int(x)).collect()))).collect()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn action_round_trips((_, xs) in arb_point(), a in prop::collection::vec(-1i64..=1, 1..=5)) {
            let t = t3();
            let v = point(&t, &xs);
            let a = FqTPoly::from_ints(&t, &a);
            prop_assume!(!a.is_zero());
            let w = t_action(&a, &v).unwrap();
            prop_assert_eq!(t_inverse_action(&a, &w).unwrap(), v.clone());
            prop_assert_eq!(w.is_zero(), v.is_zero());
            // [a] agrees with multiplication of the polynomial modulo (t - theta)^n
            let prod = &a.to_tpoly() * &v.to_poly();
            let (_, r) = prod.divrem(&TPoly::t_minus_theta_pow(&t, v.n())).unwrap();
            prop_assert_eq!(ExtPoint::from_poly(&r, v.n()).unwrap(), w);
        }

        #[test]
        fn small_generation((n, xs) in arb_point()) {
            let t = t3();
            let v = point(&t, &xs);
            let sg = small_generate(&v).unwrap();
            prop_assert!(sg.g.gauss_norm_exp().is_none_or(|e| e < n as i64));
            let back = (0..sg.ell).try_fold(ExtPoint::from_poly(&sg.g, n).unwrap(), |x, _| t_action(&t_poly(&t), &x)).unwrap();
            prop_assert_eq!(back, v.clone());
            let s = sign(&t, n);
            let f = v.to_poly().scale(&s);
            let g = sg.g.scale(&s);
            prop_assert!(class_correction(&f, &g, sg.ell, n, exp(-10), &WpConfig::default()).is_ok());
        }
    }
}
