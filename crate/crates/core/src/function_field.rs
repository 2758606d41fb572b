//! The ring `O_K = F_q[T]` of the rational function field `K = F_q(T)`,
//! with the place at infinity given by `ord_∞ = -deg`.
//!
//! Ideals are identified with their monic generators throughout.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::arith::{gcd, is_prime, pow_mod};
use crate::error::{Error, Result};
use crate::field::{make_field, Field, FieldDesc, FieldElem, TABLE_LIMIT};
use crate::poly::Poly;

/// An element of `F_q[T]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyOverFq {
    base: Field,
    poly: Poly,
}

impl fmt::Debug for PolyOverFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyOverFq[q={}]({})", self.base.order(), self)
    }
}

/// Comma-separated coefficient indices, constant term first; `0` for the zero polynomial.
impl fmt::Display for PolyOverFq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.poly.coeffs().iter().map(|c| c.index().to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `|f|_∞ = q^{deg f}`, kept as the pair `(q, deg f)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Height {
    pub q: u64,
    /// `None` for the zero polynomial, whose absolute value is 0.
    pub deg: Option<u32>,
}

impl Height {
    pub fn value(&self) -> u128 {
        match self.deg {
            None => 0,
            Some(d) => (self.q as u128).pow(d),
        }
    }
}

impl PolyOverFq {
    pub fn new(base: Field, poly: Poly) -> Self {
        PolyOverFq { base, poly }
    }

    pub fn from_elems(base: Field, coeffs: Vec<FieldElem>) -> Self {
        PolyOverFq::new(base, Poly::from_coeffs(coeffs))
    }

    /// Coefficients as integers reduced into the prime field.
    pub fn from_ints(base: &Field, coeffs: &[i64]) -> Self {
        let c = coeffs.iter().map(|&x| base.from_int(x)).collect();
        PolyOverFq::from_elems(base.clone(), c)
    }

    pub fn zero(base: &Field) -> Self {
        PolyOverFq::new(base.clone(), Poly::zero())
    }

    /// Parses the comma-separated coefficient-index format written by `Display`.
    pub fn parse(base: &Field, s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(PolyOverFq::zero(base));
        }
        let coeffs = s
            .split(',')
            .map(|t| {
                let v: u64 = t
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad coefficient {t:?}")))?;
                base.from_index(v)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PolyOverFq::from_elems(base.clone(), coeffs))
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        self.poly.coeffs()
    }

    pub fn degree(&self) -> Option<usize> {
        self.poly.degree()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn abs_inf(&self) -> Height {
        Height {
            q: self.base.order(),
            deg: self.degree().map(|d| d as u32),
        }
    }

    fn lift(&self, poly: Poly) -> Self {
        PolyOverFq::new(self.base.clone(), poly)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.lift(self.poly.add(&o.poly, &self.base))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.lift(self.poly.sub(&o.poly, &self.base))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.lift(self.poly.mul(&o.poly, &self.base))
    }

    pub fn scale_int(&self, c: i64) -> Self {
        self.lift(self.poly.scale(self.base.from_int(c), &self.base))
    }

    pub fn pow(&self, e: u64) -> Self {
        self.lift(self.poly.pow(e, &self.base))
    }

    pub fn rem(&self, m: &Self) -> Result<Self> {
        Ok(self.lift(self.poly.rem(&m.poly, &self.base)?))
    }

    pub fn eval(&self, t: FieldElem) -> FieldElem {
        self.poly.eval(t, &self.base)
    }

    /// Exact square root in `F_q[T]`, if `self` is a square.
    pub fn sqrt(&self) -> Option<Self> {
        let f = &self.base;
        let Some(deg) = self.degree() else {
            return Some(self.clone());
        };
        if deg % 2 == 1 {
            return None;
        }
        let lead_root = f.sqrt(self.poly.lead()).ok()?;
        let half = deg / 2;
        let c = self.coeffs();
        // Solve for the root's coefficients from the top down.
        let mut s = vec![FieldElem::ZERO; half + 1];
        s[half] = lead_root;
        let two_lead_inv = f.inv(f.add(lead_root, lead_root)).ok()?;
        for i in (0..half).rev() {
            // coefficient of T^{half + i} in s^2 equals c[half + i]
            let mut acc = c[half + i];
            for j in (i + 1)..half {
                let m = half + i - j;
                if m > j && m <= half {
                    acc = f.sub(acc, f.mul(f.from_int(2), f.mul(s[j], s[m])));
                } else if m == j {
                    acc = f.sub(acc, f.mul(s[j], s[j]));
                }
            }
            s[i] = f.mul(acc, two_lead_inv);
        }
        let root = PolyOverFq::from_elems(f.clone(), s);
        (root.mul(&root) == *self).then_some(root)
    }
}

/// `Δ(a, b) = -16(4a^3 + 27b^2)`.
pub fn discriminant(a: &PolyOverFq, b: &PolyOverFq) -> PolyOverFq {
    let a3 = a.pow(3).scale_int(4);
    let b2 = b.pow(2).scale_int(27);
    a3.add(&b2).scale_int(-16)
}

/// A prime ideal of `F_q[T]`: a monic irreducible generator together with a
/// fixed isomorphism `F_q[T]/(gen) ≅ F_{q^deg}` sending `T` to `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeIdeal {
    pub gen: PolyOverFq,
    pub degree: u32,
    pub residue: Field,
    /// The smallest-index root of `gen` in `residue`.
    pub root: FieldElem,
}

impl PrimeIdeal {
    /// Residue norm `q^{deg P}`.
    pub fn norm(&self) -> u64 {
        self.residue.order()
    }
}

impl fmt::Display for PrimeIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.gen)
    }
}

/// `f mod P`, as an element of the residue field of `P`.
pub fn reduce_mod_prime(f: &PolyOverFq, prime: &PrimeIdeal) -> FieldElem {
    let res = &prime.residue;
    let base = f.base();
    let mut acc = FieldElem::ZERO;
    if base.degree() == 1 {
        for &c in f.coeffs().iter().rev() {
            acc = res.add(res.mul(acc, prime.root), c);
        }
    } else {
        for &c in f.coeffs().iter().rev() {
            let e = base.embed(c, res).expect("residue field extends the base");
            acc = res.add(res.mul(acc, prime.root), e);
        }
    }
    acc
}

type PrimeCache = Mutex<HashMap<(u64, u32, u32), Arc<Vec<PrimeIdeal>>>>;

fn prime_cache() -> &'static PrimeCache {
    static CACHE: OnceLock<PrimeCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The residue field `F_{q^d}` used for degree-`d` primes over `base`.
pub fn residue_field(base: &FieldDesc, d: u32) -> Result<Field> {
    let k = base
        .degree()
        .checked_mul(d)
        .ok_or(Error::FieldTooLarge { p: base.characteristic(), k: u32::MAX })?;
    make_field(base.characteristic(), k)
}

/// All monic irreducibles of degree exactly `d`, in lexicographic order
/// (leading coefficient most significant, constant term fastest).
///
/// Each prime is found as a Frobenius orbit of size `d` in `F_{q^d}`; the orbit
/// member with the smallest index becomes the canonical root.
pub fn primes_of_degree(base: &Field, d: u32) -> Result<Arc<Vec<PrimeIdeal>>> {
    if d == 0 {
        return Err(Error::InvalidInput("prime degree must be >= 1".into()));
    }
    let key = (base.characteristic(), base.degree(), d);
    if let Some(v) = prime_cache().lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let q = base.order();
    let size = (q as u128).checked_pow(d).unwrap_or(u128::MAX);
    if size > TABLE_LIMIT as u128 {
        return Err(Error::budget(
            format!("enumerating degree-{d} primes over F_{q}"),
            size,
            TABLE_LIMIT as u128,
        ));
    }
    let res = residue_field(base, d)?;
    // Pull coefficients back from the residue field to the base field.
    let pullback: Option<HashMap<FieldElem, FieldElem>> = if base.degree() == 1 {
        None
    } else {
        let mut m = HashMap::new();
        for c in base.elements() {
            m.insert(base.embed(c, &res)?, c);
        }
        Some(m)
    };
    let mut visited = vec![false; res.order() as usize];
    let mut out = Vec::new();
    for theta in res.elements() {
        if visited[theta.index() as usize] {
            continue;
        }
        let mut orbit = vec![theta];
        let mut cur = res.pow(theta, q as u128);
        while cur != theta {
            orbit.push(cur);
            cur = res.pow(cur, q as u128);
        }
        for o in &orbit {
            visited[o.index() as usize] = true;
        }
        if orbit.len() != d as usize {
            continue;
        }
        let mut minpoly = Poly::one();
        for &o in &orbit {
            minpoly = minpoly.mul(&Poly::from_coeffs(vec![res.neg(o), FieldElem::ONE]), &res);
        }
        let coeffs: Vec<FieldElem> = minpoly
            .coeffs()
            .iter()
            .map(|c| match &pullback {
                None => *c,
                Some(m) => m[c],
            })
            .collect();
        out.push(PrimeIdeal {
            gen: PolyOverFq::from_elems(base.clone(), coeffs),
            degree: d,
            residue: res.clone(),
            root: theta,
        });
    }
    out.sort_by(|x, y| x.gen.coeffs().iter().rev().cmp(y.gen.coeffs().iter().rev()));
    let out = Arc::new(out);
    prime_cache().lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// Primes of degree `1..=max_deg`, sorted by `(degree, lex)`.
pub fn enumerate_primes(base: &Field, max_deg: u32) -> Result<Vec<PrimeIdeal>> {
    let mut out = Vec::new();
    for d in 1..=max_deg {
        out.extend(primes_of_degree(base, d)?.iter().cloned());
    }
    Ok(out)
}

/// Result of counting `Σ_K(Q; l, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaCount {
    pub count: u64,
    /// Whether `d` lies in the cyclic subgroup `<q mod l>`.
    pub in_image: bool,
    /// Whether `q^Q ≡ d (mod l)`, the normalisation under which the
    /// count is comparable to `q^Q / Q`.
    pub congruent_at_top: bool,
    /// `count · Q / q^Q`.
    pub normalized: f64,
}

/// Number of primes `P` with `deg P <= Q` and `q^{deg P} ≡ d (mod l)`.
pub fn sigma_count(q: u64, top: u32, ell: u64, d: u64) -> Result<SigmaCount> {
    if !is_prime(ell) {
        return Err(Error::InvalidInput(format!("{ell} is not prime")));
    }
    if q % ell == 0 {
        return Err(Error::InvalidInput(format!("l = {ell} divides q = {q}")));
    }
    if gcd(d % ell, ell) != 1 {
        return Err(Error::InvalidInput(format!("{d} is not a unit mod {ell}")));
    }
    let d = d % ell;
    let mut count = 0u64;
    let mut in_image = false;
    for deg in 1..=top {
        if pow_mod(q, deg as u64, ell) == d {
            count += crate::arith::irreducible_count(q, deg);
        }
    }
    let order = crate::arith::mult_order(q, ell).expect("q is a unit mod l");
    for e in 0..order {
        if pow_mod(q, e, ell) == d {
            in_image = true;
        }
    }
    let normalized = if top == 0 {
        0.0
    } else {
        count as f64 * top as f64 / (q as f64).powi(top as i32)
    };
    Ok(SigmaCount {
        count,
        in_image,
        congruent_at_top: pow_mod(q, top as u64, ell) == d,
        normalized,
    })
}

/// A pair `(a, b)` of `F_q[T]` describing `y^2 = x^3 + a x + b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurvePair {
    pub a: PolyOverFq,
    pub b: PolyOverFq,
}

impl CurvePair {
    pub fn discriminant(&self) -> PolyOverFq {
        discriminant(&self.a, &self.b)
    }
}

/// The height box `{(a, b) : deg a <= x, deg b <= x}` over `F_q`.
#[derive(Clone, Debug)]
pub struct CurveBox {
    pub base: Field,
    pub x: u32,
}

impl CurveBox {
    pub fn new(base: Field, x: u32) -> Self {
        CurveBox { base, x }
    }

    /// Number of polynomials of degree `<= x`.
    pub fn side(&self) -> u128 {
        (self.base.order() as u128).pow(self.x + 1)
    }

    /// `q^{2x+2}`, the box size before removing singular pairs.
    pub fn total_pairs(&self) -> u128 {
        self.side() * self.side()
    }

    /// Polynomial number `idx` among those of degree `<= x`: base-q digits,
    /// constant term least significant.
    pub fn poly_at(&self, mut idx: u64) -> PolyOverFq {
        let q = self.base.order();
        let mut coeffs = Vec::with_capacity(self.x as usize + 1);
        for _ in 0..=self.x {
            coeffs.push(FieldElem(idx % q));
            idx /= q;
        }
        PolyOverFq::from_elems(self.base.clone(), coeffs)
    }

    /// Pair number `idx`; `b` varies fastest.
    pub fn pair_at(&self, idx: u64) -> CurvePair {
        let side = self.side() as u64;
        CurvePair {
            a: self.poly_at(idx / side),
            b: self.poly_at(idx % side),
        }
    }

    /// Nonsingular pairs with index in `range`, in index order.
    pub fn chunk(&self, range: std::ops::Range<u64>) -> impl Iterator<Item = (u64, CurvePair)> + '_ {
        range.filter_map(move |i| {
            let pair = self.pair_at(i);
            (!pair.discriminant().is_zero()).then_some((i, pair))
        })
    }
}

/// Streams `C(x)`: every pair in the box with `Δ ≠ 0`, exactly once, in index order.
pub fn enumerate_box(
    cbox: &CurveBox,
    budget: u128,
) -> Result<impl Iterator<Item = CurvePair> + '_> {
    let total = cbox.total_pairs();
    if total > budget || total > u64::MAX as u128 {
        return Err(Error::budget("curve box", total, budget));
    }
    Ok(cbox.chunk(0..total as u64).map(|(_, p)| p))
}

/// A nonunit squarefree ideal together with its prime factors.
#[derive(Clone, Debug)]
pub struct SquarefreeIdeal {
    pub gen: PolyOverFq,
    pub factors: Vec<PrimeIdeal>,
}

impl SquarefreeIdeal {
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|p| p.degree).sum()
    }
}

/// Squarefree monic polynomials of degree `1..=Q` with their factorizations,
/// sorted by `(degree, lex)`. The unit ideal is not included.
pub fn squarefree_ideals(base: &Field, top: u32) -> Result<Vec<SquarefreeIdeal>> {
    if top == 0 {
        return Ok(Vec::new());
    }
    let primes = enumerate_primes(base, top)?;
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    fn rec(
        primes: &[PrimeIdeal],
        start: usize,
        budget: u32,
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        for i in start..primes.len() {
            if primes[i].degree > budget {
                break;
            }
            stack.push(i);
            out.push(stack.clone());
            rec(primes, i + 1, budget - primes[i].degree, stack, out);
            stack.pop();
        }
    }
    let mut sets = Vec::new();
    rec(&primes, 0, top, &mut stack, &mut sets);
    for set in sets {
        let mut gen = PolyOverFq::from_ints(base, &[1]);
        let mut factors = Vec::with_capacity(set.len());
        for &i in &set {
            gen = gen.mul(&primes[i].gen);
            factors.push(primes[i].clone());
        }
        out.push(SquarefreeIdeal { gen, factors });
    }
    out.sort_by(|x, y| {
        x.gen
            .degree()
            .cmp(&y.gen.degree())
            .then_with(|| x.gen.coeffs().iter().rev().cmp(y.gen.coeffs().iter().rev()))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::irreducible_count;

    fn f(q: u64) -> Field {
        make_field(q, 1).unwrap()
    }

    fn monic_polys(base: &Field, deg: u32) -> Vec<PolyOverFq> {
        let q = base.order();
        (0..q.pow(deg))
            .map(|mut idx| {
                let mut c = Vec::new();
                for _ in 0..deg {
                    c.push(FieldElem(idx % q));
                    idx /= q;
                }
                c.push(FieldElem::ONE);
                PolyOverFq::from_elems(base.clone(), c)
            })
            .collect()
    }

    fn has_no_proper_factor(p: &PolyOverFq) -> bool {
        let deg = p.degree().unwrap() as u32;
        (1..=deg / 2).all(|d| monic_polys(p.base(), d).iter().all(|g| !p.rem(g).unwrap().is_zero()))
    }

    #[test]
    fn heights() {
        let base = f(5);
        assert_eq!(PolyOverFq::from_ints(&base, &[1, 0, 1]).abs_inf().value(), 25);
        assert_eq!(PolyOverFq::from_ints(&base, &[3]).abs_inf().value(), 1);
        assert_eq!(PolyOverFq::zero(&base).abs_inf().value(), 0);
    }

    #[test]
    fn display_and_parse() {
        let base = f(5);
        let p = PolyOverFq::from_ints(&base, &[1, 0, 1]);
        assert_eq!(p.to_string(), "1,0,1");
        assert_eq!(PolyOverFq::parse(&base, "1,0,1").unwrap(), p);
        assert!(PolyOverFq::parse(&base, "1,7").is_err());
    }

    #[test]
    fn prime_counts() {
        let p5 = enumerate_primes(&f(5), 1).unwrap();
        assert_eq!(p5.len(), 5);
        assert_eq!(p5[0].gen.to_string(), "0,1");
        assert_eq!(p5[4].gen.to_string(), "4,1");
        assert_eq!(enumerate_primes(&f(5), 2).unwrap().len(), 15);
        assert_eq!(enumerate_primes(&f(7), 2).unwrap().len(), 28);
    }

    #[test]
    fn primes_match_exhaustive_irreducibility() {
        for q in [5u64, 7] {
            let base = f(q);
            for d in 1..=3u32 {
                let expected: Vec<String> = monic_polys(&base, d)
                    .into_iter()
                    .filter(has_no_proper_factor)
                    .map(|p| p.to_string())
                    .collect();
                let got: Vec<String> =
                    primes_of_degree(&base, d).unwrap().iter().map(|p| p.gen.to_string()).collect();
                assert_eq!(got, expected, "q={q} d={d}");
            }
        }
    }

    #[test]
    fn primes_over_nonprime_base() {
        let base = make_field(5, 2).unwrap();
        let primes = primes_of_degree(&base, 2).unwrap();
        assert_eq!(primes.len() as u64, irreducible_count(25, 2));
        for p in primes.iter() {
            assert!(reduce_mod_prime(&p.gen, p).is_zero());
        }
    }

    #[test]
    fn necklace_identity() {
        for q in [5u64, 7, 11] {
            let base = f(q);
            let max_d = if q == 11 { 5 } else { 6 };
            let counts: Vec<u64> =
                (1..=max_d).map(|d| primes_of_degree(&base, d).unwrap().len() as u64).collect();
            for big_d in 1..=max_d {
                let total: u64 = (1..=big_d)
                    .filter(|d| big_d % d == 0)
                    .map(|d| d as u64 * counts[d as usize - 1])
                    .sum();
                assert_eq!(total, q.pow(big_d), "q={q} D={big_d}");
                assert_eq!(counts[big_d as usize - 1], irreducible_count(q, big_d));
            }
        }
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_count(5, 2, 3, 1).unwrap().count, 10);
        assert_eq!(sigma_count(5, 2, 3, 2).unwrap().count, 5);
        assert_eq!(sigma_count(5, 2, 2, 1).unwrap().count, 15);
        let s = sigma_count(7, 3, 3, 2).unwrap();
        assert_eq!(s.count, 0);
        assert!(!s.in_image);
        assert!(sigma_count(5, 2, 5, 1).is_err());
        assert!(sigma_count(5, 2, 3, 3).is_err());
    }

    #[test]
    fn sigma_matches_enumeration() {
        let base = f(5);
        let primes = enumerate_primes(&base, 4).unwrap();
        for ell in [2u64, 3, 7, 13] {
            for d in 1..ell {
                let brute = primes
                    .iter()
                    .filter(|p| pow_mod(5, p.degree as u64, ell) == d)
                    .count() as u64;
                assert_eq!(sigma_count(5, 4, ell, d).unwrap().count, brute);
            }
        }
    }

    #[test]
    fn reduction_examples() {
        let base = f(5);
        let p = primes_of_degree(&base, 1).unwrap()[4].clone(); // T + 4 = T - 1
        assert_eq!(p.gen.to_string(), "4,1");
        let g = PolyOverFq::from_ints(&base, &[1, 0, 1]);
        assert_eq!(reduce_mod_prime(&g, &p), FieldElem(2));
        assert_eq!(reduce_mod_prime(&p.gen, &p), FieldElem(0));
    }

    #[test]
    fn reduction_is_a_homomorphism() {
        use rand::{Rng, SeedableRng};
        let base = f(5);
        let prime = primes_of_degree(&base, 2).unwrap()[3].clone();
        let res = &prime.residue;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let random_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            let c: Vec<i64> = (0..rng.gen_range(0..6)).map(|_| rng.gen_range(0..5)).collect();
            PolyOverFq::from_ints(&base, &c)
        };
        // Oracle: remainder mod the generator, then evaluate the residue class at the root.
        let via_rem = |g: &PolyOverFq| {
            let r = g.rem(&prime.gen).unwrap();
            r.coeffs().iter().rev().fold(FieldElem::ZERO, |acc, &c| res.add(res.mul(acc, prime.root), c))
        };
        for _ in 0..100 {
            let a = random_poly(&mut rng);
            let b = random_poly(&mut rng);
            let ra = reduce_mod_prime(&a, &prime);
            let rb = reduce_mod_prime(&b, &prime);
            assert_eq!(reduce_mod_prime(&a.mul(&b), &prime), res.mul(ra, rb));
            assert_eq!(reduce_mod_prime(&a.add(&b), &prime), res.add(ra, rb));
            assert_eq!(ra, via_rem(&a));
            let multiple = a.mul(&prime.gen);
            assert!(reduce_mod_prime(&multiple, &prime).is_zero());
        }
    }

    fn brute_singular(cbox: &CurveBox) -> u64 {
        (0..cbox.total_pairs() as u64)
            .filter(|&i| cbox.pair_at(i).discriminant().is_zero())
            .count() as u64
    }

    #[test]
    fn box_examples() {
        assert_eq!(enumerate_box(&CurveBox::new(f(5), 0), u128::MAX).unwrap().count(), 20);
        assert_eq!(enumerate_box(&CurveBox::new(f(5), 1), u128::MAX).unwrap().count(), 620);
        assert_eq!(enumerate_box(&CurveBox::new(f(11), 0), u128::MAX).unwrap().count(), 110);
        assert!(matches!(
            enumerate_box(&CurveBox::new(f(5), 3), 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn singular_locus_is_the_cuspidal_family() {
        let base = f(5);
        for x in 0..=2u32 {
            let cbox = CurveBox::new(base.clone(), x);
            let singular = brute_singular(&cbox);
            // (-3c^2, 2c^3) with deg c <= x/3
            assert_eq!(singular, 5u64.pow(x / 3 + 1), "x={x}");
        }
    }

    #[test]
    fn box_count_ratio_converges() {
        let base = f(5);
        let ratio = |x: u32| {
            let cbox = CurveBox::new(base.clone(), x);
            let c = cbox.total_pairs() as u64 - brute_singular(&cbox);
            c as f64 / 5f64.powi(2 * x as i32)
        };
        let (r2, r3) = (ratio(2), ratio(3));
        assert!((r2 / r3 - 1.0).abs() < 0.02, "{r2} {r3}");
    }

    #[test]
    fn discriminant_commutes_with_reduction() {
        let base = f(7);
        let primes = enumerate_primes(&base, 2).unwrap();
        let cbox = CurveBox::new(base.clone(), 1);
        for idx in (0..cbox.total_pairs() as u64).step_by(97) {
            let pair = cbox.pair_at(idx);
            let disc = pair.discriminant();
            for p in &primes {
                let res = &p.residue;
                let (a, b) = (reduce_mod_prime(&pair.a, p), reduce_mod_prime(&pair.b, p));
                let local = crate::ec_finite::discriminant(res, a, b);
                assert_eq!(local, reduce_mod_prime(&disc, p));
            }
        }
    }

    #[test]
    fn squarefree_examples_and_oracle() {
        assert_eq!(squarefree_ideals(&f(5), 1).unwrap().len(), 5);
        assert_eq!(squarefree_ideals(&f(5), 2).unwrap().len(), 25);
        assert_eq!(squarefree_ideals(&f(7), 2).unwrap().len(), 49);
        assert!(squarefree_ideals(&f(5), 0).unwrap().is_empty());
        let base = f(5);
        let ideals = squarefree_ideals(&base, 3).unwrap();
        let expected: Vec<String> = (1..=3)
            .flat_map(|d| monic_polys(&base, d))
            .filter(|p| {
                let d = PolyOverFq::new(base.clone(), p.poly().derivative(&base));
                p.poly().gcd(d.poly(), &base).degree() == Some(0)
            })
            .map(|p| p.to_string())
            .collect();
        let got: Vec<String> = ideals.iter().map(|i| i.gen.to_string()).collect();
        assert_eq!(got, expected);
        for ideal in &ideals {
            let prod = ideal
                .factors
                .iter()
                .fold(PolyOverFq::from_ints(&base, &[1]), |acc, p| acc.mul(&p.gen));
            assert_eq!(prod, ideal.gen);
        }
    }

    #[test]
    fn polynomial_square_roots() {
        let base = f(5);
        let s = PolyOverFq::from_ints(&base, &[2, 1, 3]);
        let sq = s.mul(&s);
        let r = sq.sqrt().unwrap();
        assert_eq!(r.mul(&r), sq);
        assert!(PolyOverFq::from_ints(&base, &[0, 1]).sqrt().is_none());
        assert!(PolyOverFq::from_ints(&base, &[0, 0, 2]).sqrt().is_none());
        assert!(PolyOverFq::from_ints(&base, &[1, 0, 1]).sqrt().is_none());
    }
}
