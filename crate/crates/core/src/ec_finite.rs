//! Short Weierstrass curves `y^2 = x^3 + a x + b` over finite fields.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arith::prime_factors;
use crate::error::{Error, Result};
use crate::field::{Field, FieldDesc, FieldElem};
use crate::function_field::PolyOverFq;
use crate::poly::Poly;

/// Fields up to this size are counted with the x-loop; above it, with
/// baby-step/giant-step order finding.
pub const NAIVE_LIMIT: u64 = crate::field::TABLE_LIMIT;

/// `-16(4a^3 + 27b^2)`.
pub fn discriminant(f: &FieldDesc, a: FieldElem, b: FieldElem) -> FieldElem {
    let a3 = f.mul(f.mul(a, a), a);
    let inner = f.add(f.mul(f.from_int(4), a3), f.mul(f.from_int(27), f.mul(b, b)));
    f.mul(f.from_int(-16), inner)
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub field: Field,
    pub a: FieldElem,
    pub b: FieldElem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine(FieldElem, FieldElem),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PointCount {
    /// `#E(F)`.
    pub n: u64,
    /// `q + 1 - N`.
    pub trace: i64,
}

impl Curve {
    pub fn new(field: Field, a: FieldElem, b: FieldElem) -> Result<Self> {
        if discriminant(&field, a, b).is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(Curve { field, a, b })
    }

    pub fn from_ints(field: &Field, a: i64, b: i64) -> Result<Self> {
        Curve::new(field.clone(), field.from_int(a), field.from_int(b))
    }

    /// Base change to an extension field.
    pub fn base_change(&self, target: &Field) -> Result<Curve> {
        Curve::new(
            target.clone(),
            self.field.embed(self.a, target)?,
            self.field.embed(self.b, target)?,
        )
    }

    /// `x^3 + a x + b` as a polynomial.
    pub fn cubic(&self) -> Poly {
        Poly::from_coeffs(vec![self.b, self.a, FieldElem::ZERO, FieldElem::ONE])
    }

    pub fn rhs(&self, x: FieldElem) -> FieldElem {
        let f = &self.field;
        f.add(f.mul(f.add(f.mul(x, x), self.a), x), self.b)
    }

    pub fn contains(&self, p: &Point) -> bool {
        match *p {
            Point::Infinity => true,
            Point::Affine(x, y) => self.field.mul(y, y) == self.rhs(x),
        }
    }

    pub fn neg(&self, p: &Point) -> Point {
        match *p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x, self.field.neg(y)),
        }
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let f = &self.field;
        match (*p, *q) {
            (Point::Infinity, _) => *q,
            (_, Point::Infinity) => *p,
            (Point::Affine(x1, y1), Point::Affine(x2, y2)) => {
                let lambda = if x1 == x2 {
                    if f.add(y1, y2).is_zero() {
                        return Point::Infinity;
                    }
                    let num = f.add(f.mul(f.from_int(3), f.mul(x1, x1)), self.a);
                    f.div(num, f.add(y1, y1)).expect("y != 0")
                } else {
                    f.div(f.sub(y2, y1), f.sub(x2, x1)).expect("x1 != x2")
                };
                let x3 = f.sub(f.sub(f.mul(lambda, lambda), x1), x2);
                let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
                Point::Affine(x3, y3)
            }
        }
    }

    pub fn mul(&self, p: &Point, mut n: u64) -> Point {
        let mut acc = Point::Infinity;
        let mut base = *p;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.add(&base, &base);
            }
        }
        acc
    }

    /// Quadratic twist by a non-residue `c`: `y^2 = x^3 + a c^2 x + b c^3`.
    pub fn twist(&self) -> Curve {
        let f = &self.field;
        let c = f
            .elements()
            .skip(1)
            .find(|&c| f.chi(c) < 0)
            .expect("odd field has non-residues");
        let c2 = f.mul(c, c);
        Curve {
            field: self.field.clone(),
            a: f.mul(self.a, c2),
            b: f.mul(self.b, f.mul(c2, c)),
        }
    }
}

fn count_from_sum(q: u64, chi_sum: i64) -> PointCount {
    PointCount {
        n: (q as i64 + 1 + chi_sum) as u64,
        trace: -chi_sum,
    }
}

/// `Σ_x χ(x^3 + a x + b)` over the field, in the log domain.
fn chi_sum_tables(f: &FieldDesc, a: FieldElem, b: FieldElem) -> i64 {
    let n = f.order() - 1;
    let la = f.log(a).map(|l| l as u64);
    let lb = f.log(b).map(|l| l as u64);
    let parity = |l: u64| if l % 2 == 0 { 1 } else { -1 };
    let mut sum: i64 = lb.map_or(0, parity);
    for i in 0..n {
        let l3 = (3 * i) % n;
        // log(x^3 + a x), x = g^i
        let ls1 = match la {
            None => Some(l3),
            Some(la) => f.zech((la + 2 * n - 2 * i % n) % n).map(|z| (l3 + z as u64) % n),
        };
        let ls = match (ls1, lb) {
            (None, lb) => lb,
            (Some(l), None) => Some(l),
            (Some(l), Some(lb)) => f.zech((lb + n - l) % n).map(|z| (l + z as u64) % n),
        };
        if let Some(l) = ls {
            sum += parity(l);
        }
    }
    sum
}

/// Point count by summing the quadratic character over every x.
pub fn point_count_naive(c: &Curve) -> PointCount {
    let f = &c.field;
    let sum = if f.has_tables() {
        chi_sum_tables(f, c.a, c.b)
    } else {
        f.elements().map(|x| f.chi(c.rhs(x)) as i64).sum()
    };
    count_from_sum(f.order(), sum)
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn hasse_interval(q: u64) -> (u64, u64) {
    let s = isqrt(4 * q);
    let w = if s * s == 4 * q { s } else { s + 1 };
    ((q + 1).saturating_sub(w), q + 1 + w)
}

fn random_point(c: &Curve, rng: &mut ChaCha8Rng) -> Point {
    let f = &c.field;
    loop {
        let x = FieldElem(rng.gen_range(0..f.order()));
        let v = c.rhs(x);
        if let Ok(y) = f.sqrt(v) {
            return Point::Affine(x, y);
        }
    }
}

/// Exact order of `p`, using that it divides some integer in `[lo, hi]`.
fn point_order(c: &Curve, p: &Point, lo: u64, hi: u64) -> Result<u64> {
    let width = hi - lo;
    let s = isqrt(width) + 1;
    let mut baby: HashMap<Point, u64> = HashMap::with_capacity(s as usize + 1);
    let mut cur = Point::Infinity;
    for j in 0..=s {
        baby.entry(cur).or_insert(j);
        cur = c.add(&cur, p);
    }
    let giant = c.mul(p, s);
    let mut r = c.mul(p, lo);
    let mut multiple = None;
    let mut i = 0;
    while lo + i * s <= hi + s {
        if let Some(&j) = baby.get(&c.neg(&r)) {
            multiple = Some(lo + i * s + j);
            break;
        }
        r = c.add(&r, &giant);
        i += 1;
    }
    let mut m = multiple
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::InvariantViolation("no multiple of the point order in the Hasse interval".into()))?;
    for r in prime_factors(m) {
        while m % r == 0 && c.mul(p, m / r) == Point::Infinity {
            m /= r;
        }
    }
    Ok(m)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / crate::arith::gcd(a, b) * b
}

/// Group order by baby-step/giant-step on random points of the curve and
/// its quadratic twist, until a single candidate in the Hasse interval remains.
/// Falls back to enumeration when the candidates stay ambiguous on a field of
/// order at most [`NAIVE_LIMIT`].
pub fn point_count_bsgs(c: &Curve, seed: u64) -> Result<PointCount> {
    let f = &c.field;
    let q = f.order();
    let (lo, hi) = hasse_interval(q);
    let twist = c.twist();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut l_main, mut l_twist) = (1u64, 1u64);
    for round in 0..64 {
        if round % 2 == 0 {
            let p = random_point(c, &mut rng);
            l_main = lcm(l_main, point_order(c, &p, lo, hi)?);
        } else {
            let p = random_point(&twist, &mut rng);
            l_twist = lcm(l_twist, point_order(&twist, &p, lo, hi)?);
        }
        let first = lo.div_ceil(l_main) * l_main;
        let candidates: Vec<u64> = (first..=hi)
            .step_by(l_main as usize)
            .filter(|&n| (2 * q + 2 - n) % l_twist == 0)
            .take(2)
            .collect();
        if candidates.len() == 1 {
            let n = candidates[0];
            return Ok(PointCount {
                n,
                trace: q as i64 + 1 - n as i64,
            });
        }
    }
    // Over small fields the exponents of E and its twist can leave several
    // candidates (Mestre's theorem only guarantees isolation for q > 229).
    if q <= NAIVE_LIMIT {
        return Ok(point_count_naive(c));
    }
    Err(Error::InvariantViolation(
        "baby-step/giant-step did not isolate the group order".into(),
    ))
}

/// `#E(F)` and the trace of Frobenius.
pub fn point_count(c: &Curve) -> Result<PointCount> {
    if discriminant(&c.field, c.a, c.b).is_zero() {
        return Err(Error::SingularCurve);
    }
    if c.field.order() <= NAIVE_LIMIT {
        Ok(point_count_naive(c))
    } else {
        point_count_bsgs(c, 0x5eed ^ c.a.index() ^ (c.b.index() << 1))
    }
}

/// `true` iff the trace is divisible by the characteristic.
pub fn is_supersingular(c: &Curve) -> Result<bool> {
    let t = point_count(c)?.trace;
    Ok(t.rem_euclid(c.field.characteristic() as i64) == 0)
}

const UNSET: i32 = i32::MIN;

/// Traces of Frobenius for every nonsingular `(a, b)` over one field.
///
/// Every curve with `ab ≠ 0` is the twist by `λ = 3b/(2a)` of
/// `y^2 = x^3 + 3k x + 2k`, `k = 4a^3/(27b^2)`, so its trace is `χ(λ)` times
/// the trace stored for `k`. Curves with `a = 0` or `b = 0` have their own
/// tables, filled orbit by orbit under `(a, b) -> (λ^2 a, λ^3 b)`.
pub struct TraceTable {
    field: Field,
    by_k: Vec<i32>,
    a_zero: Vec<i32>,
    b_zero: Vec<i32>,
    three: FieldElem,
    two: FieldElem,
    four_over_27: FieldElem,
}

impl TraceTable {
    pub fn new(field: &Field) -> Result<Self> {
        if !field.has_tables() {
            return Err(Error::budget(
                "trace table",
                field.order() as u128,
                crate::field::TABLE_LIMIT as u128,
            ));
        }
        let f = field.as_ref();
        let q = f.order() as usize;
        let three = f.from_int(3);
        let two = f.from_int(2);
        let minus_one = f.from_int(-1);

        // One representative per Galois-conjugacy class of k.
        let mut reps = Vec::new();
        let mut seen = vec![false; q];
        for k in f.elements().skip(1) {
            if seen[k.index() as usize] || k == minus_one {
                continue;
            }
            let mut c = k;
            loop {
                seen[c.index() as usize] = true;
                c = f.frobenius(c);
                if c == k {
                    break;
                }
            }
            reps.push(k);
        }
        let rep_traces: Vec<i32> = reps
            .par_iter()
            .map(|&k| -chi_sum_tables(f, f.mul(three, k), f.mul(two, k)) as i32)
            .collect();
        let mut by_k = vec![UNSET; q];
        for (&k, &t) in reps.iter().zip(&rep_traces) {
            let mut c = k;
            loop {
                by_k[c.index() as usize] = t;
                c = f.frobenius(c);
                if c == k {
                    break;
                }
            }
        }

        let fill = |scale_a: bool| {
            let mut table = vec![UNSET; q];
            for v in f.elements().skip(1) {
                if table[v.index() as usize] != UNSET {
                    continue;
                }
                let t = if scale_a {
                    -chi_sum_tables(f, v, FieldElem::ZERO)
                } else {
                    -chi_sum_tables(f, FieldElem::ZERO, v)
                } as i32;
                for lambda in f.elements().skip(1) {
                    let l2 = f.mul(lambda, lambda);
                    let s = if scale_a { l2 } else { f.mul(l2, lambda) };
                    table[f.mul(s, v).index() as usize] = f.chi(lambda) * t;
                }
            }
            table
        };
        let b_zero = fill(true);
        let a_zero = fill(false);
        let four_over_27 = f.div(f.from_int(4), f.from_int(27))?;
        Ok(TraceTable {
            field: field.clone(),
            by_k,
            a_zero,
            b_zero,
            three,
            two,
            four_over_27,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Trace of `y^2 = x^3 + a x + b`; `None` if the curve is singular.
    #[inline]
    pub fn trace(&self, a: FieldElem, b: FieldElem) -> Option<i64> {
        let f = &self.field;
        let t = match (a.is_zero(), b.is_zero()) {
            (true, true) => return None,
            (true, false) => self.a_zero[b.index() as usize],
            (false, true) => self.b_zero[a.index() as usize],
            (false, false) => {
                let a3 = f.mul(f.mul(a, a), a);
                let b2 = f.mul(b, b);
                let k = f.mul(self.four_over_27, f.div(a3, b2).ok()?);
                let t = self.by_k[k.index() as usize];
                if t == UNSET {
                    return None;
                }
                let lambda = f.div(f.mul(self.three, b), f.mul(self.two, a)).ok()?;
                f.chi(lambda) * t
            }
        };
        Some(t as i64)
    }

    pub fn point_count(&self, a: FieldElem, b: FieldElem) -> Option<PointCount> {
        let t = self.trace(a, b)?;
        Some(PointCount {
            n: (self.field.order() as i64 + 1 - t) as u64,
            trace: t,
        })
    }
}

/// Shared trace table for a field, built once per process.
pub fn trace_table(field: &Field) -> Result<Arc<TraceTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Arc<TraceTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (field.characteristic(), field.degree());
    if let Some(t) = cache.lock().expect("trace cache").get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(TraceTable::new(field)?);
    cache.lock().expect("trace cache").insert(key, table.clone());
    Ok(table)
}

/// A key shared by curves over one field that are quadratic twists of each
/// other via `(a, b) -> (λ^2 a, λ^3 b)`. Equal keys imply twist-equivalence.
pub fn twist_class_key(f: &FieldDesc, a: FieldElem, b: FieldElem) -> (u8, u64) {
    if !f.has_tables() {
        return (3, a.index() * f.order() + b.index());
    }
    match (a.is_zero(), b.is_zero()) {
        (true, _) => (1, f.log(b).map_or(u64::MAX, |l| l as u64 % 3)),
        (_, true) => (2, f.log(a).map_or(u64::MAX, |l| l as u64 % 2)),
        _ => {
            let a3 = f.mul(f.mul(a, a), a);
            let k = f.div(a3, f.mul(b, b)).expect("b != 0");
            (0, k.index())
        }
    }
}

fn binomial_mod(n: u64, k: u64, p: u64) -> u64 {
    // n < p here, so the factorials are units.
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..k {
        num = num * ((n - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * crate::arith::pow_mod(den, p - 2, p) % p
}

/// Multinomial terms `(i, j, k, coeff)` of `x^{p-1}` in `(x^3 + A x + B)^{(p-1)/2}`:
/// the coefficient is `coeff · A^j · B^k`.
fn hasse_terms(p: u64) -> Vec<(u64, u64, u64, u64)> {
    let m = (p - 1) / 2;
    let mut out = Vec::new();
    for i in 0..=m {
        if 3 * i > p - 1 {
            break;
        }
        let j = p - 1 - 3 * i;
        if i + j > m {
            continue;
        }
        let k = m - i - j;
        let c = binomial_mod(m, i, p) * binomial_mod(m - i, j, p) % p;
        out.push((i, j, k, c));
    }
    out
}

/// Coefficient of `x^{p-1}` in `(x^3 + a x + b)^{(p-1)/2}` over `F_q[T]`.
/// The generic fibre is supersingular iff this vanishes.
pub fn hasse_invariant(a: &PolyOverFq, b: &PolyOverFq) -> PolyOverFq {
    let base = a.base();
    let p = base.characteristic();
    let mut acc = PolyOverFq::zero(base);
    for (_, j, k, c) in hasse_terms(p) {
        let term = a.pow(j).mul(&b.pow(k)).scale_int(c as i64);
        acc = acc.add(&term);
    }
    acc
}

/// The same invariant for a curve over a finite field.
pub fn hasse_invariant_elem(f: &FieldDesc, a: FieldElem, b: FieldElem) -> FieldElem {
    let p = f.characteristic();
    hasse_terms(p).into_iter().fold(FieldElem::ZERO, |acc, (_, j, k, c)| {
        let term = f.mul(
            f.from_int(c as i64),
            f.mul(f.pow(a, j as u128), f.pow(b, k as u128)),
        );
        f.add(acc, term)
    })
}

/// `ψ_n` for odd `n`, and `ψ_n / y` for even `n`, as polynomials in `x`.
pub fn division_poly_reduced(n: u32, c: &Curve) -> Poly {
    let mut memo = HashMap::new();
    reduced_rec(n, c, &mut memo)
}

fn reduced_rec(n: u32, c: &Curve, memo: &mut HashMap<u32, Poly>) -> Poly {
    if let Some(p) = memo.get(&n) {
        return p.clone();
    }
    let f = &c.field;
    let (a, b) = (c.a, c.b);
    let int = |v: i64| f.from_int(v);
    let out = match n {
        0 => Poly::zero(),
        1 => Poly::one(),
        2 => Poly::constant(int(2)),
        3 => Poly::from_coeffs(vec![
            f.neg(f.mul(a, a)),
            f.mul(int(12), b),
            f.mul(int(6), a),
            FieldElem::ZERO,
            int(3),
        ]),
        4 => {
            let a2 = f.mul(a, a);
            let inner = Poly::from_coeffs(vec![
                f.sub(f.neg(f.mul(int(8), f.mul(b, b))), f.mul(a2, a)),
                f.neg(f.mul(int(4), f.mul(a, b))),
                f.neg(f.mul(int(5), a2)),
                f.mul(int(20), b),
                f.mul(int(5), a),
                FieldElem::ZERO,
                FieldElem::ONE,
            ]);
            inner.scale(int(4), f)
        }
        _ => {
            let m = n / 2;
            if n % 2 == 1 {
                let fy = c.cubic();
                let f2 = fy.mul(&fy, f);
                let g = |k: u32, memo: &mut HashMap<u32, Poly>| reduced_rec(k, c, memo);
                let gm = g(m, memo);
                let gm3 = gm.mul(&gm, f).mul(&gm, f);
                let gp1 = g(m + 1, memo);
                let gp13 = gp1.mul(&gp1, f).mul(&gp1, f);
                let t1 = g(m + 2, memo).mul(&gm3, f);
                let t2 = g(m - 1, memo).mul(&gp13, f);
                if m % 2 == 0 {
                    f2.mul(&t1, f).sub(&t2, f)
                } else {
                    t1.sub(&f2.mul(&t2, f), f)
                }
            } else {
                let g = |k: u32, memo: &mut HashMap<u32, Poly>| reduced_rec(k, c, memo);
                let gm1 = g(m - 1, memo);
                let gp1 = g(m + 1, memo);
                let t1 = g(m + 2, memo).mul(&gm1.mul(&gm1, f), f);
                let t2 = g(m - 2, memo).mul(&gp1.mul(&gp1, f), f);
                let half = f.inv(int(2)).expect("odd characteristic");
                g(m, memo).mul(&t1.sub(&t2, f), f).scale(half, f)
            }
        }
    };
    memo.insert(n, out.clone());
    out
}

/// The division polynomial `ψ_l` for odd `l`; its roots are the
/// x-coordinates of the nonzero l-torsion points.
pub fn division_poly(ell: u32, c: &Curve) -> Result<Poly> {
    if ell % 2 == 0 {
        return Err(Error::InvalidInput(format!("division_poly needs odd l, got {ell}")));
    }
    if ell as u64 == c.field.characteristic() {
        return Err(Error::LevelIsCharacteristic(ell));
    }
    Ok(division_poly_reduced(ell, c))
}

/// Rank `r` with `#E[l](F_{Q^m}) = l^r`, where `F_Q` is the curve's field.
///
/// Works entirely with polynomials over the curve's own field: the roots of
/// `ψ_l` (or of the cubic for `l = 2`) in `F_{Q^m}` are isolated by
/// `gcd(·, x^{Q^m} - x)`, and for odd `l` only those with `x^3 + a x + b`
/// a square in `F_{Q^m}` contribute points.
pub fn torsion_rank(c: &Curve, ell: u32, m: u32) -> Result<u32> {
    let f = &c.field;
    if ell as u64 == f.characteristic() {
        return Err(Error::LevelIsCharacteristic(ell));
    }
    if !crate::arith::is_prime(ell as u64) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("extension degree must be >= 1".into()));
    }
    let big = (f.order() as u128)
        .checked_pow(m)
        .ok_or_else(|| Error::budget("torsion extension field order", u128::MAX, u128::MAX >> 1))?;
    let count: u64 = if ell == 2 {
        1 + c.cubic().count_roots_in(big, f)? as u64
    } else {
        let psi = division_poly(ell, c)?;
        let split = psi.split_part(big, f)?;
        if split.degree().unwrap_or(0) == 0 {
            1
        } else {
            let rhs = c.cubic().rem(&split, f)?;
            let h = rhs.powmod((big - 1) / 2, &split, f)?;
            let squares = h.sub(&Poly::one(), f).gcd(&split, f);
            1 + 2 * squares.degree().unwrap_or(0) as u64
        }
    };
    let ell = ell as u64;
    match count {
        1 => Ok(0),
        c if c == ell => Ok(1),
        c if c == ell * ell => Ok(2),
        other => Err(Error::InvariantViolation(format!(
            "{other} points of order dividing {ell}"
        ))),
    }
}
