//! Finite fields `F_{q^m}` with a distinguished subfield `F_q`.
//!
//! Every field is stored flat over `F_p`: an element is a polynomial in the
//! generator `g` of degree `< ell*m` with coefficients in `F_p`, packed as a
//! base-`p` integer. Multiplication goes through log/exp tables and addition
//! through Zech logarithms, so all operations are table lookups.
//!
//! Towers grow by [`FieldTower::enlarge`]. An enlarged tower remembers its
//! parent together with the image of the parent generator, which makes
//! embeddings along a chain canonical and composable.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Largest field size for which tables are built.
pub const MAX_FIELD_SIZE: u64 = 1 << 22;

const NO_LOG: u32 = u32::MAX;

/// An element of some [`FieldTower`], as a packed base-`p` digit string.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FFElem(pub(crate) u32);

impl FFElem {
    pub const ZERO: FFElem = FFElem(0);
    pub const ONE: FFElem = FFElem(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The packed digit value (coefficient of `g^k` is digit `k` in base `p`).
    pub fn packed(self) -> u32 {
        self.0
    }
}

/// Dense polynomial arithmetic over a prime field, coefficients low to high.
pub(crate) mod fp {
    pub fn trim(a: &mut Vec<u32>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    pub fn pow(a: u32, mut e: u64, p: u32) -> u32 {
        let p = p as u64;
        let mut base = a as u64 % p;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        acc as u32
    }

    pub fn inv(a: u32, p: u32) -> u32 {
        pow(a, p as u64 - 2, p)
    }

    pub fn sub(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let len = a.len().max(b.len());
        let mut out: Vec<u32> = (0..len)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    pub fn mul(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x as u64 * y as u64) % p as u64;
            }
        }
        let mut out: Vec<u32> = out.into_iter().map(|v| v as u32).collect();
        trim(&mut out);
        out
    }

    pub fn rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        let mut r = a.to_vec();
        trim(&mut r);
        let df = f.len() - 1;
        let lc_inv = inv(f[df], p) as u64;
        while r.len() > df {
            let top = r.len() - 1;
            let c = r[top] as u64 * lc_inv % p as u64;
            let shift = top - df;
            for (k, &fk) in f.iter().enumerate() {
                let v = (r[shift + k] as u64 + (p as u64 - c) * fk as u64) % p as u64;
                r[shift + k] = v as u32;
            }
            trim(&mut r);
        }
        r
    }

    pub fn mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
        rem(&mul(a, b, p), f, p)
    }

    pub fn powmod(a: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
        let mut base = rem(a, f, p);
        let mut acc = vec![1u32];
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &base, f, p);
            }
            e >>= 1;
            if e > 0 {
                base = mulmod(&base, &base, f, p);
            }
        }
        rem(&acc, f, p)
    }

    pub fn gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
        let mut x = a.to_vec();
        let mut y = b.to_vec();
        trim(&mut x);
        trim(&mut y);
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        if let Some(&lc) = x.last() {
            let li = inv(lc, p) as u64;
            for c in x.iter_mut() {
                *c = (*c as u64 * li % p as u64) as u32;
            }
        }
        x
    }

    /// Rabin's irreducibility test for a monic polynomial.
    pub fn is_irreducible(f: &[u32], p: u32) -> bool {
        let n = f.len().saturating_sub(1);
        if n == 0 || f[n] != 1 {
            return false;
        }
        if n == 1 {
            return true;
        }
        let x = vec![0u32, 1];
        let mut frob = vec![x.clone()];
        let mut h = x.clone();
        for _ in 0..n {
            h = powmod(&h, p as u64, f, p);
            frob.push(h.clone());
        }
        if rem(&sub(&frob[n], &x, p), f, p) != Vec::<u32>::new() {
            return false;
        }
        for r in super::prime_factors(n as u64) {
            let k = n / r as usize;
            let d = sub(&frob[k], &x, p);
            if gcd(&d, f, p) != vec![1] {
                return false;
            }
        }
        true
    }

    /// Whether `x` generates the multiplicative group of `F_p[x]/(f)`.
    pub fn x_is_primitive(f: &[u32], p: u32) -> bool {
        let n = f.len() - 1;
        let order = (p as u64).pow(n as u32) - 1;
        let x = vec![0u32, 1];
        super::prime_factors(order)
            .into_iter()
            .all(|r| powmod(&x, order / r, f, p) != vec![1])
    }

    /// Solves `a x = b` over `F_p`; free variables are set to zero.
    pub fn solve(mut a: Vec<Vec<u32>>, mut b: Vec<u32>, p: u32) -> Option<Vec<u32>> {
        let rows = a.len();
        let cols = if rows == 0 { 0 } else { a[0].len() };
        let pp = p as u64;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else {
                continue;
            };
            a.swap(r, piv);
            b.swap(r, piv);
            let li = inv(a[r][c], p) as u64;
            for k in 0..cols {
                a[r][k] = (a[r][k] as u64 * li % pp) as u32;
            }
            b[r] = (b[r] as u64 * li % pp) as u32;
            for i in 0..rows {
                if i != r && a[i][c] != 0 {
                    let f = a[i][c] as u64;
                    for k in 0..cols {
                        a[i][k] = ((a[i][k] as u64 + (pp - f) * a[r][k] as u64) % pp) as u32;
                    }
                    b[i] = ((b[i] as u64 + (pp - f) * b[r] as u64) % pp) as u32;
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows {
                break;
            }
        }
        if b[r..].iter().any(|&v| v != 0) {
            return None;
        }
        let mut x = vec![0u32; cols];
        for (i, &c) in pivots.iter().enumerate() {
            x[c] = b[i];
        }
        Some(x)
    }
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits a prime power `q = p^ell`.
pub fn split_prime_power(q: u64) -> Option<(u32, u32)> {
    let f = prime_factors(q);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut ell = 0;
    let mut v = q;
    while v > 1 {
        v /= p;
        ell += 1;
    }
    Some((p as u32, ell))
}

fn digits_of(mut v: u64, p: u32, n: usize) -> Vec<u32> {
    (0..n)
        .map(|_| {
            let d = (v % p as u64) as u32;
            v /= p as u64;
            d
        })
        .collect()
}

fn first_primitive(p: u32, n: u32) -> Vec<u32> {
    let count = (p as u64).pow(n);
    for k in 0..count {
        let mut f = digits_of(k, p, n as usize);
        f.push(1);
        if n > 1 && f[0] == 0 {
            continue;
        }
        if fp::is_irreducible(&f, p) && (n == 1 || fp::x_is_primitive(&f, p)) {
            return f;
        }
    }
    unreachable!("primitive polynomials exist in every degree")
}

struct Parent {
    tower: Arc<FieldTower>,
    /// Images of the parent's `g^k`, `k < parent.n`.
    gen_powers: Vec<FFElem>,
}

/// The field `F_{q^m}` together with its subfield `F_q`, `q = p^ell`.
pub struct FieldTower {
    p: u32,
    ell: u32,
    m: u32,
    n: u32,
    q: u64,
    size: u64,
    fq_modulus: Vec<u32>,
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    fq_gen: FFElem,
    coord_inv: Vec<Vec<u32>>,
    parent: Option<Parent>,
    key: String,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower(F_{}^{} over F_{}, key {})", self.q, self.m, self.p, self.key)
    }
}

fn cache() -> &'static Mutex<HashMap<String, Arc<FieldTower>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<FieldTower>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl FieldTower {
    /// Builds `F_{q^m}` with `q = p^ell`. `fq_modulus` defaults to the first
    /// primitive polynomial of degree `ell` (or `x` when `ell = 1`).
    pub fn new(p: u32, ell: u32, fq_modulus: Option<Vec<u32>>, m: u32) -> Result<Arc<Self>> {
        if p < 2 || prime_factors(p as u64) != vec![p as u64] {
            return Err(Error::Config(format!("p = {p} is not prime")));
        }
        if ell == 0 || m == 0 {
            return Err(Error::Config("degrees must be positive".into()));
        }
        let n = ell.checked_mul(m).ok_or_else(|| Error::Resource("field degree overflow".into()))?;
        let size = (p as u64)
            .checked_pow(n)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| Error::Resource(format!("field of size {p}^{n} exceeds {MAX_FIELD_SIZE}")))?;
        let fq_modulus = match fq_modulus {
            Some(f) => {
                if f.len() != ell as usize + 1 || f.iter().any(|&c| c >= p) {
                    return Err(Error::Config(format!("fq modulus must have degree {ell} over F_{p}")));
                }
                if !fp::is_irreducible(&f, p) {
                    return Err(Error::Config("fq modulus is not monic irreducible".into()));
                }
                f
            }
            None if ell == 1 => vec![0, 1],
            None => first_primitive(p, ell),
        };
        let key = format!("{p}:{ell}:{fq_modulus:?}:{m}");
        if let Some(t) = cache().lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let modulus = if m == 1 { fq_modulus.clone() } else { first_primitive(p, n) };
        let mut t = Self::assemble(p, ell, m, size, fq_modulus.clone(), modulus, key.clone());
        t.fq_gen = if m == 1 { t.class_of_x() } else { t.least_root(&fq_modulus) };
        t.coord_inv = t.coordinate_inverse();
        let t = Arc::new(t);
        Ok(cache().lock().unwrap().entry(key).or_insert(t).clone())
    }

    /// The base field `F_q` (`m = 1`) with the default modulus.
    pub fn for_q(q: u64) -> Result<Arc<Self>> {
        let (p, ell) =
            split_prime_power(q).ok_or_else(|| Error::Config(format!("q = {q} is not a prime power")))?;
        Self::new(p, ell, None, 1)
    }

    /// The extension of degree `factor` over this tower, embedded canonically.
    pub fn enlarge(self: &Arc<Self>, factor: u32) -> Result<Arc<Self>> {
        if factor == 1 {
            return Ok(self.clone());
        }
        let m = self
            .m
            .checked_mul(factor)
            .ok_or_else(|| Error::Resource("extension degree overflow".into()))?;
        let n = self.ell * m;
        let size = (self.p as u64)
            .checked_pow(n)
            .filter(|&s| s <= MAX_FIELD_SIZE)
            .ok_or_else(|| {
                Error::Resource(format!("extension F_{}^{} exceeds the table bound", self.q, m))
            })?;
        let key = format!("{}>{}", self.key, m);
        if let Some(t) = cache().lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let modulus = first_primitive(self.p, n);
        let mut t = Self::assemble(self.p, self.ell, m, size, self.fq_modulus.clone(), modulus, key.clone());
        let gamma = t.least_root(&self.modulus);
        let mut gen_powers = Vec::with_capacity(self.n as usize);
        let mut acc = FFElem::ONE;
        for _ in 0..self.n {
            gen_powers.push(acc);
            acc = t.mul(acc, gamma);
        }
        t.parent = Some(Parent { tower: self.clone(), gen_powers });
        t.fq_gen = t.map_parent(self.fq_gen);
        t.coord_inv = t.coordinate_inverse();
        let t = Arc::new(t);
        Ok(cache().lock().unwrap().entry(key).or_insert(t).clone())
    }

    fn assemble(p: u32, ell: u32, m: u32, size: u64, fq_modulus: Vec<u32>, modulus: Vec<u32>, key: String) -> Self {
        let n = ell * m;
        let q = (p as u64).pow(ell);
        let order = (size - 1) as usize;
        let slow_mul = |a: u32, b: u32| -> u32 {
            let da = digits_of(a as u64, p, n as usize);
            let db = digits_of(b as u64, p, n as usize);
            let r = fp::mulmod(&da, &db, &modulus, p);
            r.iter().rev().fold(0u64, |acc, &d| acc * p as u64 + d as u64) as u32
        };
        let slow_pow = |a: u32, mut e: u64| -> u32 {
            let mut base = a;
            let mut acc = 1u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = slow_mul(acc, base);
                }
                base = slow_mul(base, base);
                e >>= 1;
            }
            acc
        };
        let factors = prime_factors(order as u64);
        let x_class = if n > 1 { p } else { (p - modulus[0] % p) % p };
        let gamma = std::iter::once(x_class)
            .chain(1..size as u32)
            .find(|&c| c != 0 && factors.iter().all(|&r| slow_pow(c, order as u64 / r) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order.max(1)];
        let mut log = vec![NO_LOG; size as usize];
        let mut v = 1u32;
        let fast = n > 1 && gamma == p;
        for k in 0..order {
            exp[k] = v;
            log[v as usize] = k as u32;
            v = if fast { times_x(v, p, n, &modulus) } else { slow_mul(v, gamma) };
        }
        for k in order..2 * order {
            exp[k] = exp[k - order];
        }
        let mut zech = vec![NO_LOG; order.max(1)];
        for k in 0..order {
            let s = add_digits(1, exp[k], p, n);
            zech[k] = if s == 0 { NO_LOG } else { log[s as usize] };
        }
        FieldTower {
            p,
            ell,
            m,
            n,
            q,
            size,
            fq_modulus,
            modulus,
            exp,
            log,
            zech,
            fq_gen: FFElem::ONE,
            coord_inv: Vec::new(),
            parent: None,
            key,
        }
    }

    fn class_of_x(&self) -> FFElem {
        if self.n > 1 {
            FFElem(self.p)
        } else {
            FFElem((self.p - self.modulus[0] % self.p) % self.p)
        }
    }

    /// Least packed root of an `F_p`-polynomial whose roots lie in this field.
    fn least_root(&self, f: &[u32]) -> FFElem {
        let d = (f.len() - 1) as u32;
        let sub = (self.p as u64).pow(d) - 1;
        let step = (self.size - 1) / sub;
        if f[0] == 0 {
            return FFElem::ZERO;
        }
        let mut best: Option<FFElem> = None;
        for k in 0..sub {
            let z = FFElem(self.exp[(k * step) as usize]);
            let val = f.iter().rev().fold(FFElem::ZERO, |acc, &c| self.add(self.mul(acc, z), FFElem(c)));
            if val.is_zero() && best.map_or(true, |b| z < b) {
                best = Some(z);
            }
        }
        best.expect("polynomial splits in this field")
    }

    fn coordinate_inverse(&self) -> Vec<Vec<u32>> {
        let n = self.n as usize;
        let g = self.class_of_x();
        let mut cols = Vec::with_capacity(n);
        for j in 0..self.m {
            for i in 0..self.ell {
                let v = self.mul(self.pow(self.fq_gen, i as i64), self.pow(g, j as i64));
                cols.push(self.digits(v));
            }
        }
        // Invert by solving for each unit vector.
        let a: Vec<Vec<u32>> = (0..n).map(|r| (0..n).map(|c| cols[c][r]).collect()).collect();
        let mut inv = vec![vec![0u32; n]; n];
        for k in 0..n {
            let mut e = vec![0u32; n];
            e[k] = 1;
            let x = fp::solve(a.clone(), e, self.p).expect("basis of F_q-coordinates");
            for r in 0..n {
                inv[r][k] = x[r];
            }
        }
        inv
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn ell(&self) -> u32 {
        self.ell
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// Degree of the field over `F_q`.
    pub fn m(&self) -> u32 {
        self.m
    }
    /// Degree of the field over `F_p`.
    pub fn degree(&self) -> u32 {
        self.n
    }
    pub fn size(&self) -> u64 {
        self.size
    }
    pub fn fq_modulus(&self) -> &[u32] {
        &self.fq_modulus
    }
    /// The defining polynomial of the flat representation over `F_p`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }
    /// The element `g`.
    pub fn generator(&self) -> FFElem {
        self.class_of_x()
    }
    /// The chosen root of the `F_q` modulus.
    pub fn fq_generator(&self) -> FFElem {
        self.fq_gen
    }
    pub fn parent(&self) -> Option<&Arc<FieldTower>> {
        self.parent.as_ref().map(|p| &p.tower)
    }

    /// Minimal polynomial of `g` over `F_q`, low to high, coefficients in `F_q`.
    pub fn ext_modulus(&self) -> Vec<FFElem> {
        let g = self.generator();
        let mut poly = vec![FFElem::ONE];
        for k in 0..self.m {
            let root = self.frob(g, k as i64);
            let mut next = vec![FFElem::ZERO; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i + 1] = self.add(next[i + 1], c);
                next[i] = self.sub(next[i], self.mul(c, root));
            }
            poly = next;
        }
        poly
    }

    pub fn same(&self, other: &FieldTower) -> bool {
        std::ptr::eq(self, other) || self.key == other.key
    }

    /// Whether `other` is this tower or one of its ancestors.
    pub fn extends(&self, other: &FieldTower) -> bool {
        if self.same(other) {
            return true;
        }
        self.parent.as_ref().is_some_and(|p| p.tower.extends(other))
    }

    /// The smaller of two comparable towers' common extension.
    pub fn unify(a: &Arc<FieldTower>, b: &Arc<FieldTower>) -> Result<Arc<FieldTower>> {
        if a.extends(b) {
            Ok(a.clone())
        } else if b.extends(a) {
            Ok(b.clone())
        } else {
            Err(Error::MixedContext(format!("{a:?} and {b:?}")))
        }
    }

    fn map_parent(&self, y: FFElem) -> FFElem {
        let par = self.parent.as_ref().expect("tower has a parent");
        let ds = par.tower.digits(y);
        let mut acc = FFElem::ZERO;
        for (k, &d) in ds.iter().enumerate() {
            if d != 0 {
                acc = self.add(acc, self.mul(FFElem(d), par.gen_powers[k]));
            }
        }
        acc
    }

    /// Embeds an element of an ancestor tower.
    pub fn embed_from(&self, from: &FieldTower, x: FFElem) -> Result<FFElem> {
        if self.same(from) {
            return Ok(x);
        }
        match &self.parent {
            Some(par) => {
                let y = par.tower.embed_from(from, x)?;
                Ok(self.map_parent(y))
            }
            None => Err(Error::MixedContext(format!("{from:?} is not a subfield of {self:?}"))),
        }
    }

    fn order(&self) -> u64 {
        self.size - 1
    }

    pub fn add(&self, a: FFElem, b: FFElem) -> FFElem {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        if self.p == 2 {
            return FFElem(a.0 ^ b.0);
        }
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let order = self.order() as u32;
        let d = if lb >= la { lb - la } else { lb + order - la };
        match self.zech[d as usize] {
            NO_LOG => FFElem::ZERO,
            z => FFElem(self.exp[(la + z) as usize]),
        }
    }

    pub fn neg(&self, a: FFElem) -> FFElem {
        if a.0 == 0 || self.p == 2 {
            return a;
        }
        let la = self.log[a.0 as usize] as u64;
        FFElem(self.exp[((la + self.order() / 2) % self.order()) as usize])
    }

    pub fn sub(&self, a: FFElem, b: FFElem) -> FFElem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FFElem, b: FFElem) -> FFElem {
        if a.0 == 0 || b.0 == 0 {
            return FFElem::ZERO;
        }
        FFElem(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: FFElem) -> Result<FFElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let la = self.log[a.0 as usize] as u64;
        Ok(FFElem(self.exp[((self.order() - la) % self.order()) as usize]))
    }

    pub fn div(&self, a: FFElem, b: FFElem) -> Result<FFElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: FFElem, e: i64) -> FFElem {
        if a.0 == 0 {
            assert!(e >= 0, "negative power of zero");
            return if e == 0 { FFElem::ONE } else { FFElem::ZERO };
        }
        let order = self.order() as i128;
        let l = self.log[a.0 as usize] as i128 * (e as i128).rem_euclid(order) % order;
        FFElem(self.exp[l as usize])
    }

    /// `a^(q^k)`; negative `k` gives iterated `q`-th roots.
    pub fn frob(&self, a: FFElem, k: i64) -> FFElem {
        if a.0 == 0 || self.order() == 1 {
            return a;
        }
        let k = k.rem_euclid(self.m as i64) as u64;
        let mult = pow_mod(self.q, k, self.order());
        let l = self.log[a.0 as usize] as u64 * mult % self.order();
        FFElem(self.exp[l as usize])
    }

    /// The image of an integer in the prime field.
    pub fn from_int(&self, c: i64) -> FFElem {
        FFElem(c.rem_euclid(self.p as i64) as u32)
    }

    /// Coefficients of `g^k`, `k < degree`.
    pub fn digits(&self, a: FFElem) -> Vec<u32> {
        digits_of(a.0 as u64, self.p, self.n as usize)
    }

    pub fn from_digits(&self, ds: &[u32]) -> Result<FFElem> {
        if ds.len() > self.n as usize || ds.iter().any(|&d| d >= self.p) {
            return Err(Error::Parse(format!("digits {ds:?} do not describe an element of {self:?}")));
        }
        Ok(FFElem(ds.iter().rev().fold(0u64, |acc, &d| acc * self.p as u64 + d as u64) as u32))
    }

    pub fn is_in_fq(&self, a: FFElem) -> bool {
        self.frob(a, 1) == a
    }

    /// Coordinates of `a` in the `F_q`-basis `1, g, ..., g^(m-1)`.
    pub fn fq_coords(&self, a: FFElem) -> Vec<FFElem> {
        let d = self.digits(a);
        let n = self.n as usize;
        let c: Vec<u32> = (0..n)
            .map(|r| (0..n).map(|k| self.coord_inv[r][k] as u64 * d[k] as u64).sum::<u64>() as u32 % self.p)
            .collect();
        (0..self.m as usize)
            .map(|j| {
                (0..self.ell as usize).fold(FFElem::ZERO, |acc, i| {
                    let ai = self.pow(self.fq_gen, i as i64);
                    self.add(acc, self.mul(FFElem(c[j * self.ell as usize + i]), ai))
                })
            })
            .collect()
    }

    /// The `F_q`-component of `a` along `1` in the basis of [`Self::fq_coords`].
    pub fn proj_fq(&self, a: FFElem) -> FFElem {
        if self.m == 1 {
            return a;
        }
        self.fq_coords(a)[0]
    }

    /// All elements of `F_q`, in increasing packed order.
    pub fn fq_elements(&self) -> Vec<FFElem> {
        let step = self.order() / (self.q - 1);
        let mut v: Vec<FFElem> = std::iter::once(FFElem::ZERO)
            .chain((0..self.q - 1).map(|k| FFElem(self.exp[(k * step) as usize])))
            .collect();
        v.sort();
        v
    }

    /// All field elements in packed order.
    pub fn elements(&self) -> impl Iterator<Item = FFElem> {
        (0..self.size as u32).map(FFElem)
    }

    /// The canonical root of `y^q - y = c` in this field, if one exists.
    ///
    /// Roots differ by `F_q`; the canonical one has zero `F_q`-component.
    pub fn as_solve_const(&self, c: FFElem) -> Option<FFElem> {
        let n = self.n as usize;
        let cols: Vec<Vec<u32>> = (0..n)
            .map(|k| {
                let e = FFElem((self.p as u64).pow(k as u32) as u32);
                self.digits(self.sub(self.frob(e, 1), e))
            })
            .collect();
        let a: Vec<Vec<u32>> = (0..n).map(|r| (0..n).map(|k| cols[k][r]).collect()).collect();
        let y = fp::solve(a, self.digits(c), self.p)?;
        let y = self.from_digits(&y).ok()?;
        Some(self.sub(y, self.proj_fq(y)))
    }

    /// Text form: a polynomial in `g` with decimal coefficients, highest degree first.
    pub fn fmt_elem(&self, a: FFElem) -> String {
        if a.is_zero() {
            return "0".into();
        }
        let ds = self.digits(a);
        let mut parts = Vec::new();
        for k in (0..ds.len()).rev() {
            let d = ds[k];
            if d == 0 {
                continue;
            }
            parts.push(match (k, d) {
                (0, d) => d.to_string(),
                (1, 1) => "g".into(),
                (1, d) => format!("{d}*g"),
                (k, 1) => format!("g^{k}"),
                (k, d) => format!("{d}*g^{k}"),
            });
        }
        parts.join("+")
    }

    /// Whether the text form of `a` has more than one term.
    pub fn is_compound(&self, a: FFElem) -> bool {
        self.digits(a).iter().filter(|&&d| d != 0).count() > 1
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let mut base = (b % m) as u128;
    let mut acc = 1u128 % m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m as u128;
        }
        base = base * base % m as u128;
        e >>= 1;
    }
    acc as u64
}

fn add_digits(a: u32, b: u32, p: u32, n: u32) -> u32 {
    let (mut a, mut b) = (a as u64, b as u64);
    let mut out = 0u64;
    let mut w = 1u64;
    for _ in 0..n {
        out += ((a % p as u64 + b % p as u64) % p as u64) * w;
        a /= p as u64;
        b /= p as u64;
        w *= p as u64;
    }
    out as u32
}

fn times_x(v: u32, p: u32, n: u32, modulus: &[u32]) -> u32 {
    let pp = p as u64;
    let top_w = pp.pow(n - 1);
    let v = v as u64;
    let top = v / top_w;
    let shifted = (v % top_w) * pp;
    if top == 0 {
        return shifted as u32;
    }
    // subtract top * (modulus - x^n)
    let mut out = 0u64;
    let mut w = 1u64;
    let mut s = shifted;
    for k in 0..n as usize {
        let d = s % pp;
        s /= pp;
        let nd = (d + pp * pp - top * modulus[k] as u64 % pp) % pp;
        out += nd * w;
        w *= pp;
    }
    out as u32
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rabin_matches_brute_force() {
        // x^2+1 over F_3 irreducible, x^2+2 = (x-1)(x+1)
        assert!(fp::is_irreducible(&[1, 0, 1], 3));
        assert!(!fp::is_irreducible(&[2, 0, 1], 3));
        assert!(fp::is_irreducible(&[1, 1, 1], 2));
        assert!(!fp::is_irreducible(&[0, 1, 1], 2));
        for k in 0..27u64 {
            let mut f = digits_of(k, 3, 3);
            f.push(1);
            let has_root = (0..3).any(|x| f.iter().rev().fold(0, |acc, &c| (acc * x + c) % 3) == 0);
            assert_eq!(fp::is_irreducible(&f, 3), !has_root, "{f:?}");
        }
    }

    #[test]
    fn tables_agree_with_polynomial_multiplication() {
        let t = FieldTower::new(3, 1, None, 3).unwrap();
        let m = t.modulus().to_vec();
        for a in t.elements() {
            for b in t.elements().step_by(5) {
                let r = fp::mulmod(&t.digits(a), &t.digits(b), &m, 3);
                let r = t.from_digits(&r).unwrap();
                assert_eq!(t.mul(a, b), r);
                let s: Vec<u32> = t.digits(a).iter().zip(t.digits(b)).map(|(x, y)| (x + y) % 3).collect();
                assert_eq!(t.add(a, b), t.from_digits(&s).unwrap());
            }
        }
    }

    #[test]
    fn fq_inside_extension() {
        let t = FieldTower::new(2, 2, None, 2).unwrap();
        assert_eq!(t.size(), 16);
        let fq = t.fq_elements();
        assert_eq!(fq.len(), 4);
        assert!(fq.iter().all(|&a| t.is_in_fq(a)));
        let a = t.fq_generator();
        let f = t.fq_modulus();
        let val = f.iter().rev().fold(FFElem::ZERO, |acc, &c| t.add(t.mul(acc, a), FFElem(c)));
        assert!(val.is_zero());
        for x in t.elements() {
            let c = t.fq_coords(x);
            let back = c.iter().enumerate().fold(FFElem::ZERO, |acc, (j, &cj)| {
                t.add(acc, t.mul(cj, t.pow(t.generator(), j as i64)))
            });
            assert_eq!(back, x);
            assert!(c.iter().all(|&cj| t.is_in_fq(cj)));
        }
    }

    #[test]
    fn artin_schreier_constants_and_enlargement() {
        let t = FieldTower::for_q(3).unwrap();
        // y^3 - y = 1 has no root in F_3.
        assert_eq!(t.as_solve_const(FFElem::ONE), None);
        let big = t.enlarge(3).unwrap();
        assert_eq!(big.size(), 27);
        let one = big.embed_from(&t, FFElem::ONE).unwrap();
        let y = big.as_solve_const(one).unwrap();
        assert_eq!(big.sub(big.frob(y, 1), y), one);
        assert!(big.proj_fq(y).is_zero());
        assert!(Arc::ptr_eq(&big, &t.enlarge(3).unwrap()));
    }

    #[test]
    fn embeddings_compose() {
        let t = FieldTower::for_q(2).unwrap();
        let a = t.enlarge(2).unwrap();
        let b = a.enlarge(2).unwrap();
        assert!(b.extends(&t));
        for x in a.elements() {
            for y in a.elements() {
                let (ex, ey) = (b.embed_from(&a, x).unwrap(), b.embed_from(&a, y).unwrap());
                assert_eq!(b.embed_from(&a, a.mul(x, y)).unwrap(), b.mul(ex, ey));
                assert_eq!(b.embed_from(&a, a.add(x, y)).unwrap(), b.add(ex, ey));
            }
        }
        assert!(FieldTower::unify(&t, &b).unwrap().same(&b));
    }

    #[test]
    fn oversized_field_is_rejected() {
        assert!(matches!(FieldTower::new(2, 30, None, 1), Err(Error::Resource(_))));
        assert!(matches!(FieldTower::for_q(6), Err(Error::Config(_))));
    }

    #[test]
    fn ext_modulus_has_g_as_root() {
        let t = FieldTower::new(3, 1, None, 3).unwrap();
        let em = t.ext_modulus();
        assert_eq!(em.len(), 4);
        let g = t.generator();
        let v = em.iter().rev().fold(FFElem::ZERO, |acc, &c| t.add(t.mul(acc, g), c));
        assert!(v.is_zero());
    }

    proptest! {
        #[test]
        fn field_axioms(a in 0u32..81, b in 0u32..81, c in 0u32..81) {
            let t = FieldTower::new(3, 2, None, 2).unwrap();
            let (a, b, c) = (FFElem(a), FFElem(b), FFElem(c));
            prop_assert_eq!(t.mul(a, t.add(b, c)), t.add(t.mul(a, b), t.mul(a, c)));
            prop_assert_eq!(t.add(a, t.neg(a)), FFElem::ZERO);
            if !a.is_zero() {
                prop_assert_eq!(t.mul(a, t.inv(a).unwrap()), FFElem::ONE);
            }
            prop_assert_eq!(t.frob(t.frob(a, 1), -1), a);
            prop_assert_eq!(t.frob(t.add(a, b), 1), t.add(t.frob(a, 1), t.frob(b, 1)));
        }
    }
}
