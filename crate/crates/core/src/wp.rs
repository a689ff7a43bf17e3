//! Artin-Schreier equations over `C_infinity` and the map
//! `wp(F) = F^(-1) - F` on the Tate algebra.
//!
//! Solutions are canonical: the constant term of every root has zero
//! `F_q`-component, so `wp_inverse(0) = 0` and outputs are deterministic.
//! When a constant equation has no root in the current field the tower is
//! enlarged by a factor `p`.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::field::{FFElem, FieldTower};
use crate::poly::FqTPoly;
use crate::series::{exp, CInftyElem, Exp};
use crate::tate::{TailBound, TateElem};

/// Guards on field growth.
#[derive(Clone, Copy, Debug)]
pub struct WpConfig {
    /// Largest allowed exponent denominator of explicit terms, as a power of `q`.
    pub max_ram_power: u32,
    /// Largest allowed extension degree over `F_q`.
    pub max_ext_degree: u32,
}

impl Default for WpConfig {
    fn default() -> Self {
        WpConfig { max_ram_power: 4, max_ext_degree: 12 }
    }
}

/// A root together with the field it lives in.
#[derive(Clone, Debug)]
pub struct ASRoot {
    pub value: CInftyElem,
    /// Degree over `F_q` of the constant field of `value`.
    pub ext_degree: u32,
    /// Common denominator of the explicit exponents of `value`.
    pub ram_index: i64,
}

impl ASRoot {
    fn new(value: CInftyElem, cfg: &WpConfig) -> Result<Self> {
        let q = value.tower().q() as i64;
        let ram_index = value.ram_index();
        let bound = q.checked_pow(cfg.max_ram_power).unwrap_or(i64::MAX);
        if ram_index > bound {
            return Err(Error::Resource(format!("ramification index {ram_index} exceeds {bound}")));
        }
        Ok(ASRoot { ext_degree: value.tower().m(), ram_index, value })
    }

    pub fn tower(&self) -> &Arc<FieldTower> {
        self.value.tower()
    }
}

/// Canonical root of `y^q - y = c` for a constant, enlarging the tower if needed.
pub fn as_solve_const_grow(
    tower: &Arc<FieldTower>,
    c: FFElem,
    cfg: &WpConfig,
) -> Result<(Arc<FieldTower>, FFElem)> {
    let mut t = tower.clone();
    let mut c = c;
    loop {
        if let Some(y) = t.as_solve_const(c) {
            return Ok((t, y));
        }
        let big = t.enlarge(t.p())?;
        if big.m() > cfg.max_ext_degree {
            return Err(Error::Resource(format!("extension degree {} exceeds {}", big.m(), cfg.max_ext_degree)));
        }
        c = big.embed_from(&t, c)?;
        t = big;
    }
}

/// The parts of `c` with negative, zero and positive exponents.
struct Split {
    neg: CInftyElem,
    zero: FFElem,
    pos_terms: Vec<(Exp, FFElem)>,
    pos_tails: Vec<(Exp, Vec<FFElem>)>,
}

fn split(c: &CInftyElem) -> Result<Split> {
    let t = c.tower();
    let q = exp(t.q() as i64);
    let mut pos_terms: Vec<(Exp, FFElem)> =
        c.terms().filter(|(e, _)| e.is_positive()).map(|(&e, &a)| (e, a)).collect();
    let mut pos_tails = Vec::new();
    for (&(s, k), b) in c.tails() {
        if s.is_positive() {
            return Err(Error::Unsupported("Artin-Schreier equation with a tail at positive shift".into()));
        }
        if s.is_zero() {
            pos_tails.push((k, b.clone()));
            continue;
        }
        let mut step = k / q;
        let mut i = 0;
        while (s + step).is_positive() {
            pos_terms.push((s + step, b[i % b.len()]));
            step /= q;
            i += 1;
        }
    }
    let zero = c.coeff_at(exp(0));
    let mut handled = CInftyElem::constant(t, zero);
    for &(e, a) in &pos_terms {
        handled = handled.add(&CInftyElem::monomial(t, a, e));
    }
    for (k, b) in &pos_tails {
        handled = handled.add(&CInftyElem::tail(t, exp(0), *k, b.clone())?);
    }
    Ok(Split { neg: c.sub(&handled), zero, pos_terms, pos_tails })
}

/// `sum_{i>=1} a^(q^-i) theta^(k/q^i)`, the root of `y^q - y = a theta^k` with
/// only positive exponents.
fn positive_root(t: &Arc<FieldTower>, a: FFElem, k: Exp) -> Result<CInftyElem> {
    let mut b = vec![t.frob(a, -1)];
    loop {
        let next = t.frob(*b.last().unwrap(), -1);
        if next == b[0] {
            break;
        }
        b.push(next);
    }
    CInftyElem::tail(t, exp(0), k, b)
}

/// Root with positive exponents of `y^q - y = tail(0, k, b)`.
fn positive_tail_root(t: &Arc<FieldTower>, k: Exp, b: &[FFElem]) -> Result<CInftyElem> {
    // y = sum_{m>=2} c_m theta^(k/q^m) with c_1 = 0, c_{m+1} = (b_m + c_m)^(1/q)
    let q = exp(t.q() as i64);
    let p = b.len();
    let mut seen: HashMap<(usize, FFElem), usize> = HashMap::new();
    let mut cs = vec![FFElem::ZERO];
    let mut m = 1usize;
    loop {
        let state = ((m - 1) % p, cs[m - 1]);
        if let Some(&m1) = seen.get(&state) {
            let mut y = CInftyElem::zero(t);
            let mut scale = k;
            for c in cs.iter().take(m1 - 1) {
                scale /= q;
                y = y.add(&CInftyElem::monomial(t, *c, scale));
            }
            let period = cs[m1 - 1..m - 1].to_vec();
            return Ok(y.add(&CInftyElem::tail(t, exp(0), scale, period)?));
        }
        seen.insert(state, m);
        let next = t.frob(t.add(b[(m - 1) % p], cs[m - 1]), -1);
        cs.push(next);
        m += 1;
    }
}

fn solve_positive(t: &Arc<FieldTower>, s: &Split) -> Result<CInftyElem> {
    let mut y = CInftyElem::zero(t);
    for &(e, a) in &s.pos_terms {
        y = y.add(&positive_root(t, a, e)?);
    }
    for (k, b) in &s.pos_tails {
        y = y.add(&positive_tail_root(t, *k, b)?);
    }
    Ok(y)
}

/// `-sum_{i>=0} c^(q^i)` for `c` with negative exponents, down to `floor`.
fn solve_negative(c: &CInftyElem, floor: Exp) -> Result<CInftyElem> {
    let t = c.tower();
    let Some(top) = c.norm_exp() else {
        return Ok(CInftyElem::zero_to(t, floor));
    };
    let q = exp(t.q() as i64);
    let mut y = CInftyElem::zero_to(t, floor);
    let mut x = c.truncate(floor);
    let mut bound = top;
    while bound > floor {
        y = y.sub(&x);
        x = x.frobenius(1).truncate(floor);
        bound *= q;
    }
    Ok(y)
}

fn embed_split(s: Split, t: &Arc<FieldTower>) -> Result<Split> {
    let from = s.neg.tower().clone();
    let f = |c: FFElem| t.embed_from(&from, c);
    Ok(Split {
        neg: s.neg.embed(t)?,
        zero: f(s.zero)?,
        pos_terms: s.pos_terms.into_iter().map(|(e, a)| Ok((e, f(a)?))).collect::<Result<_>>()?,
        pos_tails: s
            .pos_tails
            .into_iter()
            .map(|(k, b)| Ok((k, b.into_iter().map(f).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<_>>()?,
    })
}

/// Working floor for the negative part: the input's own floor or `target`,
/// whichever is higher.
fn working_floor(c: &CInftyElem, target: Exp) -> Exp {
    c.floor().map_or(target, |f| f.max(target))
}

/// Canonical `y` with `y^q - y = c`, certified down to `target` (or the
/// precision of `c`).
pub fn as_solve_series(c: &CInftyElem, target: Exp, cfg: &WpConfig) -> Result<ASRoot> {
    let s = split(c)?;
    let (t, y0) = as_solve_const_grow(c.tower(), s.zero, cfg)?;
    let s = embed_split(s, &t)?;
    let neg = if s.neg.is_exact_zero() { CInftyElem::zero(&t) } else { solve_negative(&s.neg, working_floor(c, target))? };
    let mut y = neg.add(&CInftyElem::constant(&t, y0)).add(&solve_positive(&t, &s)?);
    if let Some(f) = c.floor().filter(|f| f.is_positive()) {
        y = y.add(&CInftyElem::zero_to(&t, f / exp(t.q() as i64)));
    }
    ASRoot::new(y, cfg)
}

/// Canonical `F` with `F^(1/q) - F = g`, certified down to `target`.
pub fn wp_coeff(g: &CInftyElem, target: Exp, cfg: &WpConfig) -> Result<ASRoot> {
    let q = exp(g.tower().q() as i64);
    let s = split(&g.neg())?;
    // F = y^q where y^q - y = -g; the constant is solved directly so that it is canonical
    let g0q = g.tower().frob(g.coeff_at(exp(0)), 1);
    let (t, f0) = as_solve_const_grow(g.tower(), g.tower().neg(g0q), cfg)?;
    let s = embed_split(s, &t)?;
    let neg = if s.neg.is_exact_zero() {
        CInftyElem::zero(&t)
    } else {
        solve_negative(&s.neg, working_floor(g, target / q))?
    };
    let mut f = neg.add(&solve_positive(&t, &s)?).frobenius(1).add(&CInftyElem::constant(&t, f0));
    if let Some(fl) = g.floor().filter(|f| !f.is_negative()) {
        f = f.add(&CInftyElem::zero_to(&t, fl));
    }
    ASRoot::new(f, cfg)
}

/// Canonical `F` with `F^(-1) - F = g`. The coefficient of `t^j` is certified
/// down to `target - j`.
pub fn wp_inverse(g: &TateElem, target: Exp, cfg: &WpConfig) -> Result<TateElem> {
    if g.varpi() != 0 {
        return Err(Error::Unsupported("wp_inverse of an element with a varpi factor".into()));
    }
    let q = exp(g.tower().q() as i64);
    let tail = match g.tail_bound() {
        TailBound::Exact => TailBound::Exact,
        TailBound::Linear { intercept, slope } if !slope.is_negative() && intercept - slope * exp(g.len() as i64) < Exp::zero() => {
            TailBound::Linear { intercept: intercept * q, slope: slope * q }
        }
        _ => {
            return Err(Error::Precision(
                "the tail bound does not certify decay; raise the t-precision".into(),
            ))
        }
    };
    let mut tower = g.tower().clone();
    let mut out = Vec::with_capacity(g.len());
    for (j, c) in g.coeffs().iter().enumerate() {
        let c = c.embed(&tower)?;
        let r = wp_coeff(&c, target - exp(j as i64), cfg)?;
        tower = r.tower().clone();
        out.push(r.value);
    }
    let out = out.into_iter().map(|c| c.embed(&tower)).collect::<Result<Vec<_>>>()?;
    Ok(TateElem::new(&tower, out, tail))
}

/// `wp_inverse(g) + shift`: another preimage, differing by an element of `F_q[t]`.
pub fn wp_inverse_shifted(g: &TateElem, shift: &FqTPoly, target: Exp, cfg: &WpConfig) -> Result<TateElem> {
    wp_inverse(g, target, cfg)?.add(&TateElem::from_fq_tpoly(shift))
}

/// `wp(F) = F^(-1) - F`.
pub fn wp(f: &TateElem) -> Result<TateElem> {
    f.twist(-1).sub(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_series;
    use proptest::prelude::*;

    fn t3() -> Arc<FieldTower> {
        FieldTower::for_q(3).unwrap()
    }

    fn check_as(c: &CInftyElem, y: &CInftyElem) {
        let q = y.tower().q() as u32;
        let lhs = y.frobenius(1).sub(y);
        let d = lhs.sub(&c.embed(y.tower()).unwrap());
        assert!(d.is_zero_at_precision(), "residual {d} for y = {y}");
        let _ = q;
    }

    #[test]
    fn constant_equations() {
        let t = t3();
        let r = as_solve_series(&CInftyElem::zero(&t), exp(-20), &WpConfig::default()).unwrap();
        assert!(r.value.is_exact_zero());
        let c = CInftyElem::constant(&t, t.from_int(-1));
        let r = as_solve_series(&c, exp(-20), &WpConfig::default()).unwrap();
        assert_eq!(r.ext_degree, 3);
        check_as(&c, &r.value);
        // brute force over F_27: exactly three roots of y^3 - y + 1, ours has zero F_3 part
        let big = r.tower().clone();
        let roots: Vec<_> = big
            .elements()
            .filter(|&y| big.add(big.sub(big.pow(y, 3), y), FFElem::ONE).is_zero())
            .collect();
        assert_eq!(roots.len(), 3);
        let y0 = r.value.coeff_at(exp(0));
        assert!(roots.contains(&y0));
        assert!(big.proj_fq(y0).is_zero());
    }

    #[test]
    fn negative_exponents() {
        let t = t3();
        let c = parse_series(&t, "th^-1").unwrap();
        let r = as_solve_series(&c, exp(-30), &WpConfig::default()).unwrap();
        assert_eq!(r.value.to_string(), "2*th^-1+2*th^-3+2*th^-9+2*th^-27+O(th^-30)");
        check_as(&c, &r.value);
    }

    #[test]
    fn positive_exponents_ramify() {
        let t = t3();
        let c = parse_series(&t, "th").unwrap();
        let r = as_solve_series(&c, exp(-30), &WpConfig::default()).unwrap();
        assert_eq!(r.value.to_string(), "tail(0,1,[1])");
        assert_eq!(r.value.norm_exp(), Some(Exp::new(1, 3)));
        check_as(&c, &r.value);
        let c = parse_series(&t, "g*th^5+th^2+th^(1/2)+2+th^-2+O(th^-40)").unwrap();
        let r = as_solve_series(&c, exp(-40), &WpConfig::default()).unwrap();
        check_as(&c, &r.value);
    }

    #[test]
    fn tails_in_the_input() {
        let t = FieldTower::new(3, 1, None, 2).unwrap();
        for s in ["tail(0,1,[g,1])+th^(1/3)", "tail(-1,1,[1,2])+O(th^-20)", "th^-1*tail(0,1,[1])+th^(1/9)+O(th^-30)"] {
            let c = parse_series(&t, s).unwrap();
            let r = as_solve_series(&c, exp(-30), &WpConfig::default()).unwrap();
            check_as(&c, &r.value);
            let f = wp_coeff(&c, exp(-30), &WpConfig::default()).unwrap().value;
            let d = f.qth_root().sub(&f).sub(&c.embed(f.tower()).unwrap());
            assert!(d.is_zero_at_precision(), "{s}: {d}");
        }
    }

    #[test]
    fn wp_of_zero_is_zero() {
        let t = t3();
        let f = wp_inverse(&TateElem::zero(&t), exp(-20), &WpConfig::default()).unwrap();
        assert!(f.is_exact_zero());
    }

    #[test]
    fn positive_shift_tails_are_rejected() {
        let t = t3();
        let c = parse_series(&t, "tail(1,1,[1])").unwrap();
        assert!(matches!(as_solve_series(&c, exp(-5), &WpConfig::default()), Err(Error::Unsupported(_))));
    }

    fn random_g(t: &Arc<FieldTower>, spec: &[(i64, u32, i64)]) -> TateElem {
        let cs = spec
            .iter()
            .map(|&(e, c, e2)| {
                CInftyElem::monomial(t, t.from_int(c as i64), exp(e)).add(&CInftyElem::monomial(t, FFElem::ONE, exp(e2)))
            })
            .collect();
        TateElem::new(t, cs, TailBound::Exact)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn wp_roundtrip(spec in prop::collection::vec((-5i64..4, 0u32..3, -5i64..4), 1..6), q in prop::sample::select(vec![2u64, 3])) {
            let t = FieldTower::for_q(q).unwrap();
            let g = random_g(&t, &spec);
            let f = wp_inverse(&g, exp(-30), &WpConfig::default()).unwrap();
            let r = wp(&f).unwrap().sub(&g).unwrap();
            prop_assert!(r.is_zero_at_precision());
        }

        #[test]
        fn wp_inverse_is_linear_up_to_kernel(a in prop::collection::vec((-5i64..4, 0u32..3, -5i64..4), 1..4),
                                             b in prop::collection::vec((-5i64..4, 0u32..3, -5i64..4), 1..4)) {
            let t = t3();
            let cfg = WpConfig::default();
            let (x, y) = (random_g(&t, &a), random_g(&t, &b));
            let fs = wp_inverse(&x.add(&y).unwrap(), exp(-30), &cfg).unwrap();
            let fx = wp_inverse(&x, exp(-30), &cfg).unwrap();
            let fy = wp_inverse(&y, exp(-30), &cfg).unwrap();
            let d = fs.sub(&fx).unwrap().sub(&fy).unwrap();
            prop_assert!(d.is_fq_poly_at_precision());
        }

        #[test]
        fn preimages_differ_by_fq_polynomials(a in prop::collection::vec((-5i64..4, 0u32..3, -5i64..4), 1..4),
                                              s in prop::collection::vec(0i64..3, 1..4)) {
            let t = t3();
            let cfg = WpConfig::default();
            let g = random_g(&t, &a);
            let shift = FqTPoly::from_ints(&t, &s);
            let f1 = wp_inverse(&g, exp(-30), &cfg).unwrap();
            let f2 = wp_inverse_shifted(&g, &shift, exp(-30), &cfg).unwrap();
            prop_assert!(wp(&f2).unwrap().sub(&g).unwrap().is_zero_at_precision());
            prop_assert!(f2.sub(&f1).unwrap().is_fq_poly_at_precision());
        }
    }
}
