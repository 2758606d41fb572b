//! Finite fields F_{p^k} for primes 3 < p < 2^16.
//!
//! Elements are stored as their index `Σ c_i p^i` in the coefficient basis
//! `1, x, ..., x^{k-1}` of `F_p[x]/(modulus)`. Fields with at most
//! [`TABLE_LIMIT`] elements additionally carry exp/log/Zech tables so that
//! every operation is a handful of lookups; larger fields fall back to
//! coefficient arithmetic. Both paths produce identical results.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{is_prime, prime_factors};
use crate::error::{Error, Result};
use crate::poly::Poly;

/// Largest field order that gets log tables.
pub const TABLE_LIMIT: u64 = 1 << 22;

/// Largest extension degree over F_p representable with 64-bit indices for p >= 5.
pub const MAX_K: usize = 27;

const NONE: u32 = u32::MAX;

pub type Field = Arc<FieldDesc>;

/// An element of some [`FieldDesc`], identified by its coefficient index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElem(pub(crate) u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Index `Σ c_i p^i` of the element.
    pub fn index(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

struct Tables {
    generator: FieldElem,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
}

pub struct FieldDesc {
    p: u64,
    k: u32,
    order: u64,
    modulus: Vec<u64>,
    tables: Option<Tables>,
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldDesc")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .field("tables", &self.tables.is_some())
            .finish()
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldDesc {}

impl std::hash::Hash for FieldDesc {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p, self.k).hash(state);
    }
}

fn cache() -> &'static Mutex<HashMap<(u64, u32), Field>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Field>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn embed_cache() -> &'static Mutex<HashMap<(u64, u32, u32), FieldElem>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32, u32), FieldElem>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Builds (or fetches from the process-wide cache) the field F_{p^k}.
///
/// The modulus is the lexicographically smallest monic irreducible of degree
/// `k`, comparing coefficients from the constant term upward. For `k = 1` the
/// modulus is `x`.
pub fn make_field(p: u64, k: u32) -> Result<Field> {
    if !(p > 3 && p < (1 << 16) && is_prime(p)) {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    if k == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    if let Some(f) = cache().lock().unwrap().get(&(p, k)) {
        return Ok(f.clone());
    }
    let order = p.checked_pow(k).ok_or(Error::FieldTooLarge { p, k })?;
    let modulus = if k == 1 {
        vec![0, 1]
    } else {
        smallest_irreducible(p, k as usize)
    };
    let mut desc = FieldDesc {
        p,
        k,
        order,
        modulus,
        tables: None,
    };
    if order <= TABLE_LIMIT {
        desc.tables = Some(desc.build_tables());
    }
    let field = Arc::new(desc);
    let mut guard = cache().lock().unwrap();
    Ok(guard.entry((p, k)).or_insert(field).clone())
}

impl FieldDesc {
    pub fn characteristic(&self) -> u64 {
        self.p
    }

    /// Degree over the prime field.
    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn has_tables(&self) -> bool {
        self.tables.is_some()
    }

    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    /// The class of the integer `n` in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElem {
        FieldElem(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn from_index(&self, idx: u64) -> Result<FieldElem> {
        if idx >= self.order {
            return Err(Error::InvalidInput(format!(
                "index {idx} out of range for field of order {}",
                self.order
            )));
        }
        Ok(FieldElem(idx))
    }

    /// Element with the given coefficients (constant first); entries are reduced mod p.
    pub fn from_coeffs(&self, coeffs: &[u64]) -> Result<FieldElem> {
        if coeffs.len() > self.k as usize {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for a degree-{} field",
                coeffs.len(),
                self.k
            )));
        }
        let mut idx = 0u64;
        for &c in coeffs.iter().rev() {
            idx = idx * self.p + c % self.p;
        }
        Ok(FieldElem(idx))
    }

    /// Coefficient vector of length `k`, constant first.
    pub fn coeffs(&self, a: FieldElem) -> Vec<u64> {
        let mut out = vec![0; self.k as usize];
        let mut x = a.0;
        for c in out.iter_mut() {
            *c = x % self.p;
            x /= self.p;
        }
        out
    }

    /// The class of `x` modulo the defining polynomial (for `k = 1`, the root of `x`, i.e. 0).
    pub fn generator_x(&self) -> FieldElem {
        if self.k == 1 {
            FieldElem(0)
        } else {
            FieldElem(self.p)
        }
    }

    /// Iterator over all elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElem> {
        (0..self.order).map(FieldElem)
    }

    #[inline]
    fn decode(&self, a: FieldElem, out: &mut [u64; MAX_K]) {
        let mut x = a.0;
        for c in out.iter_mut().take(self.k as usize) {
            *c = x % self.p;
            x /= self.p;
        }
    }

    #[inline]
    fn encode(&self, c: &[u64]) -> FieldElem {
        let mut idx = 0u64;
        for &d in c[..self.k as usize].iter().rev() {
            idx = idx * self.p + d;
        }
        FieldElem(idx)
    }

    fn add_digits(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let (mut x, mut y) = (a.0, b.0);
        let mut idx = 0u64;
        let mut place = 1u64;
        for i in 0..self.k {
            let d = (x % self.p + y % self.p) % self.p;
            idx += d * place;
            x /= self.p;
            y /= self.p;
            if i + 1 < self.k {
                place *= self.p;
            }
        }
        FieldElem(idx)
    }

    fn neg_digits(&self, a: FieldElem) -> FieldElem {
        let mut x = a.0;
        let mut idx = 0u64;
        let mut place = 1u64;
        for i in 0..self.k {
            let d = (self.p - x % self.p) % self.p;
            idx += d * place;
            x /= self.p;
            if i + 1 < self.k {
                place *= self.p;
            }
        }
        FieldElem(idx)
    }

    fn mul_generic(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let k = self.k as usize;
        let p = self.p;
        let mut da = [0u64; MAX_K];
        let mut db = [0u64; MAX_K];
        self.decode(a, &mut da);
        self.decode(b, &mut db);
        let mut prod = [0u64; 2 * MAX_K];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
            }
        }
        for i in (k..2 * k - 1).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            prod[i] = 0;
            for j in 0..k {
                let t = c * self.modulus[j] % p;
                prod[i - k + j] = (prod[i - k + j] + p - t) % p;
            }
        }
        self.encode(&prod[..k])
    }

    fn pow_generic(&self, a: FieldElem, mut e: u128) -> FieldElem {
        let mut base = a;
        let mut acc = FieldElem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_generic(acc, base);
            }
            base = self.mul_generic(base, base);
            e >>= 1;
        }
        acc
    }

    fn build_tables(&self) -> Tables {
        let q = self.order;
        let n = q - 1;
        let factors = prime_factors(n);
        let generator = (1..q)
            .map(FieldElem)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&r| self.pow_generic(g, (n / r) as u128) != FieldElem::ONE)
            })
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0u32; n as usize];
        let mut log = vec![NONE; q as usize];
        let mut cur = FieldElem::ONE;
        for i in 0..n as usize {
            exp[i] = cur.0 as u32;
            log[cur.0 as usize] = i as u32;
            cur = if self.k == 1 {
                FieldElem(cur.0 * generator.0 % self.p)
            } else {
                self.mul_generic(cur, generator)
            };
        }
        let zech = exp
            .iter()
            .map(|&e| {
                let s = self.add_digits(FieldElem(e as u64), FieldElem::ONE);
                if s.0 == 0 {
                    NONE
                } else {
                    log[s.0 as usize]
                }
            })
            .collect();
        Tables {
            generator,
            exp,
            log,
            zech,
        }
    }

    /// Primitive element used for the log tables, if present.
    pub fn primitive_element(&self) -> Option<FieldElem> {
        self.tables.as_ref().map(|t| t.generator)
    }

    /// Discrete log to the table generator (`None` for zero or for table-less fields).
    #[inline]
    pub fn log(&self, a: FieldElem) -> Option<u32> {
        let t = self.tables.as_ref()?;
        let l = t.log[a.0 as usize];
        (l != NONE).then_some(l)
    }

    /// Inverse of [`FieldDesc::log`]. Panics if the field has no tables.
    #[inline]
    pub fn exp(&self, l: u64) -> FieldElem {
        let t = self.tables.as_ref().expect("field has log tables");
        FieldElem(t.exp[(l % (self.order - 1)) as usize] as u64)
    }

    /// `log(1 + g^l)`, `None` when `1 + g^l = 0`. Panics if the field has no tables.
    #[inline]
    pub fn zech(&self, l: u64) -> Option<u32> {
        let t = self.tables.as_ref().expect("field has log tables");
        let z = t.zech[(l % (self.order - 1)) as usize];
        (z != NONE).then_some(z)
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            let s = a.0 + b.0;
            return FieldElem(if s >= self.p { s - self.p } else { s });
        }
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        match &self.tables {
            Some(t) => {
                let n = self.order - 1;
                let la = t.log[a.0 as usize] as u64;
                let lb = t.log[b.0 as usize] as u64;
                let z = t.zech[((lb + n - la) % n) as usize];
                if z == NONE {
                    FieldElem::ZERO
                } else {
                    FieldElem(t.exp[((la + z as u64) % n) as usize] as u64)
                }
            }
            None => self.add_digits(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: FieldElem) -> FieldElem {
        if a.0 == 0 {
            return a;
        }
        if self.k == 1 {
            return FieldElem(self.p - a.0);
        }
        match &self.tables {
            Some(t) => {
                let n = self.order - 1;
                let la = t.log[a.0 as usize] as u64;
                FieldElem(t.exp[((la + n / 2) % n) as usize] as u64)
            }
            None => self.neg_digits(a),
        }
    }

    #[inline]
    pub fn sub(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        if self.k == 1 {
            return FieldElem(a.0 * b.0 % self.p);
        }
        if a.0 == 0 || b.0 == 0 {
            return FieldElem::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let n = self.order - 1;
                let s = t.log[a.0 as usize] as u64 + t.log[b.0 as usize] as u64;
                FieldElem(t.exp[(s % n) as usize] as u64)
            }
            None => self.mul_generic(a, b),
        }
    }

    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: FieldElem, e: u128) -> FieldElem {
        if e == 0 {
            return FieldElem::ONE;
        }
        if a.0 == 0 {
            return FieldElem::ZERO;
        }
        match &self.tables {
            Some(t) => {
                let n = (self.order - 1) as u128;
                let l = t.log[a.0 as usize] as u128 * (e % n) % n;
                FieldElem(t.exp[l as usize] as u64)
            }
            None => self.pow_generic(a, e),
        }
    }

    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(match &self.tables {
            Some(t) => {
                let n = self.order - 1;
                let la = t.log[a.0 as usize] as u64;
                FieldElem(t.exp[((n - la) % n) as usize] as u64)
            }
            None => self.pow_generic(a, (self.order - 2) as u128),
        })
    }

    pub fn div(&self, a: FieldElem, b: FieldElem) -> Result<FieldElem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Quadratic character: 0 at zero, 1 on nonzero squares, -1 otherwise.
    #[inline]
    pub fn chi(&self, a: FieldElem) -> i32 {
        if a.0 == 0 {
            return 0;
        }
        match &self.tables {
            Some(t) => {
                if t.log[a.0 as usize] % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
            None => {
                if self.pow_generic(a, ((self.order - 1) / 2) as u128) == FieldElem::ONE {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_square(&self, a: FieldElem) -> bool {
        self.chi(a) >= 0
    }

    /// A square root of `a`; of the two roots the one with smaller index is returned.
    pub fn sqrt(&self, a: FieldElem) -> Result<FieldElem> {
        if a.0 == 0 {
            return Ok(a);
        }
        if self.chi(a) < 0 {
            return Err(Error::NotASquare);
        }
        let r = match &self.tables {
            Some(t) => FieldElem(t.exp[(t.log[a.0 as usize] / 2) as usize] as u64),
            None => self.tonelli_shanks(a),
        };
        let s = self.neg(r);
        Ok(if s < r { s } else { r })
    }

    fn tonelli_shanks(&self, a: FieldElem) -> FieldElem {
        let n = self.order - 1;
        let mut s = 0;
        let mut odd = n;
        while odd % 2 == 0 {
            odd /= 2;
            s += 1;
        }
        let z = (2..self.order)
            .map(FieldElem)
            .find(|&z| self.chi(z) < 0)
            .expect("odd field has a non-residue");
        let mut m = s;
        let mut c = self.pow(z, odd as u128);
        let mut t = self.pow(a, odd as u128);
        let mut r = self.pow(a, odd.div_ceil(2) as u128);
        while t != FieldElem::ONE {
            let mut i = 0;
            let mut tt = t;
            while tt != FieldElem::ONE {
                tt = self.mul(tt, tt);
                i += 1;
            }
            let mut b = c;
            for _ in 0..(m - i - 1) {
                b = self.mul(b, b);
            }
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        r
    }

    /// The p-power Frobenius.
    pub fn frobenius(&self, a: FieldElem) -> FieldElem {
        self.pow(a, self.p as u128)
    }

    /// Embeds `a ∈ self` into `target`, whose degree must be a multiple of ours.
    ///
    /// The generator `x` of `self` is sent to the smallest-index root of
    /// `self.modulus` in `target`.
    pub fn embed(&self, a: FieldElem, target: &FieldDesc) -> Result<FieldElem> {
        let root = self.embedding_root(target)?;
        if self.k == 1 {
            return Ok(a);
        }
        let coeffs = self.coeffs(a);
        let mut acc = FieldElem::ZERO;
        for &c in coeffs.iter().rev() {
            acc = target.add(target.mul(acc, root), FieldElem(c));
        }
        Ok(acc)
    }

    /// Image of the class of `x` under the canonical embedding into `target`.
    pub fn embedding_root(&self, target: &FieldDesc) -> Result<FieldElem> {
        if self.p != target.p {
            return Err(Error::CharacteristicMismatch);
        }
        if target.k % self.k != 0 {
            return Err(Error::DegreeMismatch {
                from: self.k,
                to: target.k,
            });
        }
        if self.k == 1 {
            return Ok(FieldElem::ZERO);
        }
        if self.k == target.k {
            return Ok(self.generator_x());
        }
        let key = (self.p, self.k, target.k);
        if let Some(&r) = embed_cache().lock().unwrap().get(&key) {
            return Ok(r);
        }
        let modulus = Poly::from_coeffs(self.modulus.iter().map(|&c| FieldElem(c)).collect());
        let roots = modulus.roots(target);
        let root = *roots.first().ok_or_else(|| {
            Error::InvariantViolation("irreducible modulus has no root in extension".into())
        })?;
        embed_cache().lock().unwrap().insert(key, root);
        Ok(root)
    }
}

/// Lexicographically smallest monic irreducible of degree k over F_p, comparing
/// the constant coefficient first.
fn smallest_irreducible(p: u64, k: usize) -> Vec<u64> {
    let total = p.pow(k as u32);
    for n in 0..total {
        let mut f = vec![0u64; k + 1];
        let mut x = n;
        for i in (0..k).rev() {
            f[i] = x % p;
            x /= p;
        }
        f[k] = 1;
        if f[0] != 0 && fp_poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials of every degree exist")
}

/// Minimal polynomial arithmetic over F_p on `u64` coefficient vectors, used
/// only to pick field moduli before any `FieldDesc` exists.
pub(crate) mod fp_poly {
    use crate::arith::prime_factors;

    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    fn inv_mod(a: u64, p: u64) -> u64 {
        crate::arith::pow_mod(a, p - 2, p)
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r = trim(a.to_vec());
        let m = trim(m.to_vec());
        let dm = m.len() - 1;
        let lead_inv = inv_mod(m[dm], p);
        while r.len() > dm {
            let c = r[r.len() - 1] * lead_inv % p;
            let shift = r.len() - 1 - dm;
            for (j, &mj) in m.iter().enumerate() {
                r[shift + j] = (r[shift + j] + p - c * mj % p) % p;
            }
            r = trim(r);
        }
        r
    }

    fn mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut prod = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        rem(&prod, m, p)
    }

    fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &b, m, p);
            }
            b = mulmod(&b, &b, m, p);
            e >>= 1;
        }
        acc
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut a = trim(a.to_vec());
        let mut b = trim(b.to_vec());
        while !b.is_empty() {
            let r = rem(&a, &b, p);
            a = b;
            b = r;
        }
        a
    }

    fn sub_x(h: &[u64], p: u64) -> Vec<u64> {
        let mut v = h.to_vec();
        if v.len() < 2 {
            v.resize(2, 0);
        }
        v[1] = (v[1] + p - 1) % p;
        trim(v)
    }

    /// Rabin's test: f (monic, degree k) is irreducible over F_p iff
    /// x^{p^k} = x mod f and gcd(x^{p^{k/r}} - x, f) = 1 for every prime r | k.
    pub fn is_irreducible(f: &[u64], p: u64) -> bool {
        let k = f.len() - 1;
        if k == 1 {
            return true;
        }
        let x = vec![0u64, 1];
        let mut frob = vec![rem(&x, f, p)];
        for _ in 0..k {
            let prev = frob.last().unwrap().clone();
            frob.push(powmod(&prev, p, f, p));
        }
        if trim(sub_x(&frob[k], p)).iter().any(|&c| c != 0) {
            return false;
        }
        prime_factors(k as u64).into_iter().all(|r| {
            let g = gcd(&sub_x(&frob[k / r as usize], p), f, p);
            g.len() == 1
        })
    }
}
