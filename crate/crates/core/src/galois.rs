//! Frobenius data for curves over `K = F_q(T)` and one-sided image certification.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::arith::{gcd, generated_subgroup, mult_order};
use crate::census::ScalarResolver;
use crate::ec_finite::{self, hasse_invariant, Curve, TraceTable};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::function_field::{discriminant, primes_of_degree, reduce_mod_prime, CurvePair, PolyOverFq, PrimeIdeal};
use crate::gl2::{class_table, surjectivity_criterion, Certification, ClassTable};
use crate::poly::Poly;

/// `E : y^2 = x^3 + a x + b` over `F_q(T)` with `a, b ∈ F_q[T]`.
#[derive(Clone, Debug)]
pub struct GlobalCurve {
    pub a: PolyOverFq,
    pub b: PolyOverFq,
    pub disc: PolyOverFq,
    hasse: OnceLock<PolyOverFq>,
}

impl GlobalCurve {
    pub fn new(a: PolyOverFq, b: PolyOverFq) -> Result<Self> {
        if a.base() != b.base() {
            return Err(Error::CharacteristicMismatch);
        }
        let p = a.base().characteristic();
        if p <= 3 {
            return Err(Error::UnsupportedCharacteristic(p));
        }
        let disc = discriminant(&a, &b);
        if disc.is_zero() {
            return Err(Error::SingularCurve);
        }
        Ok(GlobalCurve {
            a,
            b,
            disc,
            hasse: OnceLock::new(),
        })
    }

    pub fn from_pair(pair: &CurvePair) -> Result<Self> {
        GlobalCurve::new(pair.a.clone(), pair.b.clone())
    }

    pub fn base(&self) -> &Field {
        self.a.base()
    }

    /// Hasse invariant of the generic fibre; zero iff `E` is supersingular.
    pub fn hasse(&self) -> &PolyOverFq {
        self.hasse.get_or_init(|| hasse_invariant(&self.a, &self.b))
    }
}

/// Frobenius data at a prime of good reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobRecord {
    pub degree: u32,
    /// Position of the prime among the primes of its degree.
    pub prime_index: usize,
    #[serde(skip)]
    pub a_p: FieldElem,
    #[serde(skip)]
    pub b_p: FieldElem,
    pub n: u64,
    pub trace: i64,
    pub ordinary: bool,
}

/// Primes and per-degree trace tables up to a fixed scan depth, shared by
/// every curve scanned over the same base field.
pub struct ScanContext {
    pub base: Field,
    pub max_degree: u32,
    primes: Vec<Arc<Vec<PrimeIdeal>>>,
    traces: Vec<Arc<TraceTable>>,
    pub resolver: ScalarResolver,
}

impl ScanContext {
    pub fn new(base: &Field, max_degree: u32) -> Result<Self> {
        if max_degree == 0 {
            return Err(Error::InvalidInput("scan depth must be >= 1".into()));
        }
        let mut primes = Vec::new();
        let mut traces = Vec::new();
        for d in 1..=max_degree {
            let ps = primes_of_degree(base, d)?;
            let residue = ps
                .first()
                .map(|p| p.residue.clone())
                .ok_or_else(|| Error::InvariantViolation(format!("no primes of degree {d}")))?;
            traces.push(ec_finite::trace_table(&residue)?);
            primes.push(ps);
        }
        Ok(ScanContext {
            base: base.clone(),
            max_degree,
            primes,
            traces,
            resolver: ScalarResolver::new(),
        })
    }

    pub fn q(&self) -> u64 {
        self.base.order()
    }

    pub fn p(&self) -> u64 {
        self.base.characteristic()
    }

    pub fn prime(&self, degree: u32, index: usize) -> &PrimeIdeal {
        &self.primes[degree as usize - 1][index]
    }

    pub fn primes(&self, degree: u32) -> &[PrimeIdeal] {
        &self.primes[degree as usize - 1]
    }

    /// Feeds good-reduction records to `visit` in scan order until it breaks.
    pub fn for_each_record<F>(&self, e: &GlobalCurve, mut visit: F) -> Result<()>
    where
        F: FnMut(&FrobRecord) -> Result<ControlFlow<()>>,
    {
        if e.base() != &self.base {
            return Err(Error::CharacteristicMismatch);
        }
        let p = self.p() as i64;
        for d in 1..=self.max_degree {
            let table = &self.traces[d as usize - 1];
            for (i, prime) in self.primes(d).iter().enumerate() {
                let a_p = reduce_mod_prime(&e.a, prime);
                let b_p = reduce_mod_prime(&e.b, prime);
                let Some(pc) = table.point_count(a_p, b_p) else { continue };
                let rec = FrobRecord {
                    degree: d,
                    prime_index: i,
                    a_p,
                    b_p,
                    n: pc.n,
                    trace: pc.trace,
                    ordinary: pc.trace.rem_euclid(p) != 0,
                };
                if visit(&rec)?.is_break() {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// The reduction of `E` at the prime of `rec`.
    pub fn reduction(&self, rec: &FrobRecord) -> Curve {
        Curve {
            field: self.prime(rec.degree, rec.prime_index).residue.clone(),
            a: rec.a_p,
            b: rec.b_p,
        }
    }
}

/// One record per good prime of degree `<= D`, degree by degree in prime order.
pub fn frobenius_scan(ctx: &ScanContext, e: &GlobalCurve) -> Result<Vec<FrobRecord>> {
    let mut out = Vec::new();
    ctx.for_each_record(e, |r| {
        out.push(r.clone());
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(out)
}

/// Smallest `D` such that every element of `<q mod l>` is some `q^d`, `d <= D`,
/// for every `l` in `ells` other than the characteristic.
pub fn default_scan_depth(q: u64, ells: &[u32]) -> u32 {
    let p = crate::arith::prime_factors(q)[0];
    ells.iter()
        .filter(|&&l| l as u64 != p)
        .map(|&l| mult_order(q, l as u64).unwrap_or(1) as u32)
        .max()
        .unwrap_or(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum EllImage {
    CertifiedSurjective,
    CandidateExceptional { missing: Vec<usize>, max_degree: u32 },
}

impl EllImage {
    pub fn is_certified(&self) -> bool {
        matches!(self, EllImage::CertifiedSurjective)
    }
}

/// Accumulates observed Frobenius classes for one `l`.
pub struct EllTracker {
    pub ell: u32,
    q: u64,
    table: Arc<ClassTable>,
    observed: BTreeSet<usize>,
    dets: BTreeSet<u32>,
    certified: bool,
}

impl EllTracker {
    pub fn new(ell: u32, q: u64) -> Result<Self> {
        if crate::arith::prime_factors(q)[0] == ell as u64 {
            return Err(Error::LevelIsCharacteristic(ell));
        }
        Ok(EllTracker {
            ell,
            q,
            table: class_table(ell)?,
            observed: BTreeSet::new(),
            dets: BTreeSet::new(),
            certified: false,
        })
    }

    /// Class of Frobenius at the record's prime.
    pub fn class_of(&self, ctx: &ScanContext, rec: &FrobRecord) -> Result<usize> {
        let det = crate::arith::pow_mod(self.q, rec.degree as u64, self.ell as u64) as i64;
        let flag = ctx.resolver.resolve(&ctx.reduction(rec), self.ell, rec.trace)?;
        self.table.frobenius_class(rec.trace, det, flag)
    }

    pub fn observe(&mut self, ctx: &ScanContext, rec: &FrobRecord) -> Result<()> {
        if self.certified {
            return Ok(());
        }
        let id = self.class_of(ctx, rec)?;
        self.observed.insert(id);
        self.dets.insert(self.table.class(id).det);
        self.certified = surjectivity_criterion(&self.table, self.q, &self.observed, &self.dets).is_certified();
        Ok(())
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn image(&self, max_degree: u32) -> EllImage {
        match surjectivity_criterion(&self.table, self.q, &self.observed, &self.dets) {
            Certification::Certified => EllImage::CertifiedSurjective,
            Certification::Undetermined { missing, .. } => EllImage::CandidateExceptional { missing, max_degree },
        }
    }
}

/// Maps every record to its class in `Γ_l` and applies the surjectivity criterion.
pub fn classify_image_ell(ctx: &ScanContext, records: &[FrobRecord], ell: u32) -> Result<EllImage> {
    let mut tracker = EllTracker::new(ell, ctx.q())?;
    for r in records {
        tracker.observe(ctx, r)?;
    }
    Ok(tracker.image(ctx.max_degree))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PImage {
    Supersingular,
    CertifiedSurjective,
    CandidateExceptional { subgroup: Vec<u64> },
}

impl PImage {
    pub fn is_certified(&self) -> bool {
        matches!(self, PImage::CertifiedSurjective)
    }
}

/// The unit-root character: the traces mod `p` at ordinary primes generate
/// a subgroup of `(Z/p)^x`; certified when it is everything.
pub fn classify_image_p(e: &GlobalCurve, records: &[FrobRecord]) -> PImage {
    if e.hasse().is_zero() {
        return PImage::Supersingular;
    }
    let p = e.base().characteristic();
    let gens = records
        .iter()
        .filter(|r| r.ordinary)
        .map(|r| r.trace.rem_euclid(p as i64) as u64);
    let subgroup = generated_subgroup(gens, p);
    if subgroup.len() as u64 == p - 1 {
        PImage::CertifiedSurjective
    } else {
        PImage::CandidateExceptional { subgroup }
    }
}

/// The mod-2 image as a subgroup of `GL_2(F_2) ≅ S_3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Mod2Image {
    Trivial,
    Order2,
    Cyclic3,
    Full,
}

impl Mod2Image {
    pub fn is_surjective(&self) -> bool {
        matches!(self, Mod2Image::Full)
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

fn roots_in_base(f: &Field, a: FieldElem, b: FieldElem) -> Vec<FieldElem> {
    if f.order() <= 64 {
        f.elements()
            .filter(|&x| f.add(f.mul(f.add(f.mul(x, x), a), x), b).is_zero())
            .collect()
    } else {
        Poly::from_coeffs(vec![b, a, FieldElem::ZERO, FieldElem::ONE]).roots(f)
    }
}

fn lagrange(f: &Field, xs: &[FieldElem], ys: &[FieldElem]) -> Poly {
    let mut acc = Poly::zero();
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = Poly::constant(yi);
        for (j, &xj) in xs.iter().enumerate() {
            if i == j {
                continue;
            }
            let inv = f.inv(f.sub(xi, xj)).expect("distinct nodes");
            let lin = Poly::from_coeffs(vec![f.neg(f.mul(xj, inv)), inv]);
            basis = basis.mul(&lin, f);
        }
        acc = acc.add(&basis, f);
    }
    acc
}

/// Distinct roots of `x^3 + a x + b` in `F_q[T]`.
///
/// A root `r` satisfies `3 deg r <= max(deg a + deg r, deg b)`, so
/// `deg r <= e = max(deg a / 2, deg b / 3)`; its values at `e + 1` points are
/// roots of the specialized cubics, which bounds the candidates to check.
pub fn cubic_roots_over_k(e: &GlobalCurve) -> Vec<PolyOverFq> {
    let f = e.base();
    let deg = |p: &PolyOverFq| p.degree().map(|d| d as i64).unwrap_or(-1);
    let bound = (deg(&e.a) / 2).max(deg(&e.b) / 3).max(0) as usize;
    let is_root = |r: &Poly| {
        let r3 = r.mul(r, f).mul(r, f);
        r3.add(&e.a.poly().mul(r, f), f).add(e.b.poly(), f).is_zero()
    };
    let mut found: BTreeSet<Vec<FieldElem>> = BTreeSet::new();
    if (f.order() as usize) < bound + 1 {
        let total = (f.order() as u128).pow(bound as u32 + 1);
        for idx in 0..total as u64 {
            let mut i = idx;
            let coeffs: Vec<FieldElem> = (0..=bound)
                .map(|_| {
                    let c = FieldElem(i % f.order());
                    i /= f.order();
                    c
                })
                .collect();
            let r = Poly::from_coeffs(coeffs);
            if is_root(&r) {
                found.insert(r.coeffs().to_vec());
            }
        }
    } else {
        let nodes: Vec<FieldElem> = f.elements().take(bound + 1).collect();
        let mut local = Vec::with_capacity(nodes.len());
        for &t in &nodes {
            let rs = roots_in_base(f, e.a.eval(t), e.b.eval(t));
            if rs.is_empty() {
                return Vec::new();
            }
            local.push(rs);
        }
        let mut choice = vec![0usize; nodes.len()];
        loop {
            let ys: Vec<FieldElem> = choice.iter().zip(&local).map(|(&c, rs)| rs[c]).collect();
            let r = lagrange(f, &nodes, &ys);
            if is_root(&r) {
                found.insert(r.coeffs().to_vec());
            }
            let mut k = 0;
            loop {
                if k == choice.len() {
                    return found
                        .into_iter()
                        .map(|c| PolyOverFq::from_elems(f.clone(), c))
                        .collect();
                }
                choice[k] += 1;
                if choice[k] < local[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
    found
        .into_iter()
        .map(|c| PolyOverFq::from_elems(f.clone(), c))
        .collect()
}

/// Exact mod-2 image from the factorization of `x^3 + a x + b` over `K` and
/// the squareness of `-4a^3 - 27b^2` in `F_q[T]`.
pub fn exact_mod2(e: &GlobalCurve) -> Mod2Image {
    match cubic_roots_over_k(e).len() {
        3 => Mod2Image::Trivial,
        1 => Mod2Image::Order2,
        _ => {
            let a3 = e.a.pow(3);
            let disc = a3.scale_int(-4).sub(&e.b.pow(2).scale_int(27));
            if disc.sqrt().is_some() {
                Mod2Image::Cyclic3
            } else {
                Mod2Image::Full
            }
        }
    }
}

fn strip_p(mut n: u64, p: u64) -> u64 {
    while n > 0 && n % p == 0 {
        n /= p;
    }
    n
}

/// Prime-to-p part of `gcd_P N_P`; the prime-to-p torsion of `E(K)` divides it.
pub fn torsion_bound(records: &[FrobRecord], p: u64) -> Result<u64> {
    if records.is_empty() {
        return Err(Error::EmptyRecords);
    }
    Ok(strip_p(records.iter().fold(0, |g, r| gcd(g, r.n)), p))
}

/// [`torsion_bound`] over the full scan, stopping as soon as the bound is 1.
pub fn torsion_bound_scan(ctx: &ScanContext, e: &GlobalCurve) -> Result<u64> {
    let p = ctx.p();
    let mut g = 0u64;
    let mut any = false;
    ctx.for_each_record(e, |r| {
        any = true;
        g = strip_p(gcd(g, r.n), p);
        Ok(if g == 1 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) })
    })?;
    if !any {
        return Err(Error::EmptyRecords);
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EllEntry {
    pub ell: u32,
    pub image: EllImage,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageReport {
    pub per_ell: Vec<EllEntry>,
    pub mod_p: PImage,
    pub mod2_exact: Option<Mod2Image>,
    pub torsion_bound: Option<u64>,
    pub max_degree: u32,
}

/// Scans `E` to the context's depth and classifies every requested level;
/// `l = p` selects the unit-root character.
pub fn image_report(ctx: &ScanContext, e: &GlobalCurve, ells: &[u32]) -> Result<(Vec<FrobRecord>, ImageReport)> {
    let records = frobenius_scan(ctx, e)?;
    let p = ctx.p();
    let mut per_ell = Vec::new();
    for &ell in ells.iter().filter(|&&l| l as u64 != p) {
        per_ell.push(EllEntry {
            ell,
            image: classify_image_ell(ctx, &records, ell)?,
        });
    }
    let report = ImageReport {
        per_ell,
        mod_p: classify_image_p(e, &records),
        mod2_exact: ells.contains(&2).then(|| exact_mod2(e)),
        torsion_bound: torsion_bound(&records, p).ok(),
        max_degree: ctx.max_degree,
    };
    Ok((records, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_field;
    use crate::function_field::{CurveBox, enumerate_box};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f5() -> Field {
        make_field(5, 1).unwrap()
    }

    fn curve(base: &Field, a: &[i64], b: &[i64]) -> GlobalCurve {
        GlobalCurve::new(PolyOverFq::from_ints(base, a), PolyOverFq::from_ints(base, b)).unwrap()
    }

    fn record_at<'a>(ctx: &ScanContext, recs: &'a [FrobRecord], gen: &str) -> Option<&'a FrobRecord> {
        recs.iter().find(|r| ctx.prime(r.degree, r.prime_index).gen.to_string() == gen)
    }

    #[test]
    fn scan_examples() {
        let base = f5();
        let ctx = ScanContext::new(&base, 2).unwrap();
        // T - 1 is "4,1"; T is "0,1"
        let e = curve(&base, &[], &[0, 1]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let r = record_at(&ctx, &recs, "4,1").unwrap();
        assert_eq!((r.n, r.trace), (6, 0));
        let e = curve(&base, &[0, 1], &[]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let r = record_at(&ctx, &recs, "4,1").unwrap();
        assert_eq!((r.n, r.trace), (4, 2));
        assert!(record_at(&ctx, &recs, "0,1").is_none());
        for r in &recs {
            let bound = 2.0 * (ctx.prime(r.degree, r.prime_index).norm() as f64).sqrt();
            assert!((r.trace.abs() as f64) <= bound);
        }
    }

    #[test]
    fn exact_mod2_examples() {
        let base = f5();
        assert_eq!(exact_mod2(&curve(&base, &[0, 1], &[])), Mod2Image::Order2);
        assert_eq!(exact_mod2(&curve(&base, &[], &[0, 1])), Mod2Image::Full);
        // x^3 - x = x(x-1)(x+1)
        assert_eq!(exact_mod2(&curve(&base, &[-1], &[])), Mod2Image::Trivial);
        // (x - T)(x^2 + T x + c) with c = T^2 + 1: a = c - T^2 = 1, b = -T c
        assert_eq!(exact_mod2(&curve(&base, &[1], &[0, -1, 0, -1])), Mod2Image::Order2);
        assert!(matches!(
            GlobalCurve::new(PolyOverFq::from_ints(&base, &[-3]), PolyOverFq::from_ints(&base, &[2])),
            Err(Error::SingularCurve)
        ));
    }

    #[test]
    fn exact_mod2_matches_local_oracle() {
        // Oracle: brute-force roots of the cubic among all polynomials of
        // degree <= 2, plus squareness of the discriminant by brute force.
        let base = f5();
        let cbox = CurveBox::new(base.clone(), 1);
        let all: Vec<PolyOverFq> = (0..125u64)
            .map(|i| CurveBox::new(base.clone(), 2).poly_at(i))
            .collect();
        for pair in enumerate_box(&cbox, u128::MAX).unwrap() {
            let e = GlobalCurve::from_pair(&pair).unwrap();
            let roots = all
                .iter()
                .filter(|r| r.pow(3).add(&e.a.mul(r)).add(&e.b).is_zero())
                .count();
            let disc = e.a.pow(3).scale_int(-4).sub(&e.b.pow(2).scale_int(27));
            let disc_square = all.iter().any(|s| s.mul(s) == disc);
            let expected = match (roots, disc_square) {
                (3, _) => Mod2Image::Trivial,
                (1, _) => Mod2Image::Order2,
                (0, true) => Mod2Image::Cyclic3,
                (0, false) => Mod2Image::Full,
                _ => unreachable!(),
            };
            assert_eq!(exact_mod2(&e), expected, "a={} b={}", e.a, e.b);
        }
    }

    #[test]
    fn sampler_never_certifies_with_rational_two_torsion() {
        let base = f5();
        let ctx = ScanContext::new(&base, 4).unwrap();
        let e = curve(&base, &[0, 1], &[]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        assert!(!classify_image_ell(&ctx, &recs, 2).unwrap().is_certified());
        let e = curve(&base, &[], &[0, 1]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let cert = classify_image_ell(&ctx, &recs, 2).unwrap().is_certified();
        assert_eq!(cert, exact_mod2(&e).is_surjective());
    }

    #[test]
    fn determinant_obstruction_at_depth_one() {
        let base = f5();
        let ctx = ScanContext::new(&base, 1).unwrap();
        let e = curve(&base, &[1, 2], &[3, 0, 1]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let EllImage::CandidateExceptional { missing, .. } = classify_image_ell(&ctx, &recs, 3).unwrap() else {
            panic!("certified at depth 1")
        };
        assert_eq!(missing, class_table(3).unwrap().det1_classes());
    }

    #[test]
    fn mod_p_examples() {
        let base = f5();
        let ctx = ScanContext::new(&base, 1).unwrap();
        let e = curve(&base, &[], &[0, 1]);
        assert_eq!(classify_image_p(&e, &frobenius_scan(&ctx, &e).unwrap()), PImage::Supersingular);
        let e = curve(&base, &[0, 1], &[]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let first = record_at(&ctx, &recs, "4,1").unwrap().clone();
        assert_eq!(classify_image_p(&e, &[first]), PImage::CertifiedSurjective);
        let e = curve(&base, &[1], &[0, 1]);
        let fake: Vec<FrobRecord> = frobenius_scan(&ctx, &e)
            .unwrap()
            .into_iter()
            .filter(|r| r.trace.rem_euclid(5) == 1 || r.trace.rem_euclid(5) == 4)
            .collect();
        if let PImage::CandidateExceptional { subgroup } = classify_image_p(&e, &fake) {
            assert!(subgroup.len() <= 2);
        }
    }

    #[test]
    fn torsion_examples() {
        let base = f5();
        let ctx = ScanContext::new(&base, 1).unwrap();
        let e = curve(&base, &[0, 1], &[]);
        let recs = frobenius_scan(&ctx, &e).unwrap();
        let two: Vec<FrobRecord> = ["4,1", "3,1"]
            .iter()
            .map(|g| record_at(&ctx, &recs, g).unwrap().clone())
            .collect();
        assert_eq!((two[0].n, two[1].n), (4, 2));
        assert_eq!(torsion_bound(&two, 5).unwrap(), 2);
        assert_eq!(torsion_bound(&two[..1], 5).unwrap(), 4);
        assert!(matches!(torsion_bound(&[], 5), Err(Error::EmptyRecords)));
        assert_eq!(torsion_bound_scan(&ctx, &e).unwrap(), torsion_bound(&recs, 5).unwrap());
    }

    #[test]
    fn supersingular_coherence_on_j0_family() {
        let base = f5();
        let ctx = ScanContext::new(&base, 3).unwrap();
        for b in [&[0i64, 1][..], &[1, 1], &[2, 0, 1], &[1, 3, 4]] {
            let e = curve(&base, &[], b);
            assert!(e.hasse().is_zero());
            for r in frobenius_scan(&ctx, &e).unwrap() {
                assert_eq!(r.trace.rem_euclid(5), 0);
                assert!(!r.ordinary);
            }
        }
    }

    #[test]
    fn char_poly_consistency_and_monotonicity() {
        let base = f5();
        let ctxs: Vec<ScanContext> = (1..=4).map(|d| ScanContext::new(&base, d).unwrap()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut done = 0;
        while done < 50 {
            let a: Vec<i64> = (0..3).map(|_| rng.gen_range(0..5)).collect();
            let b: Vec<i64> = (0..3).map(|_| rng.gen_range(0..5)).collect();
            let Ok(e) = GlobalCurve::new(PolyOverFq::from_ints(&base, &a), PolyOverFq::from_ints(&base, &b)) else {
                continue;
            };
            done += 1;
            for ell in [2u32, 3, 7] {
                let table = class_table(ell).unwrap();
                let tracker = EllTracker::new(ell, 5).unwrap();
                let ctx = &ctxs[3];
                for r in frobenius_scan(ctx, &e).unwrap() {
                    let c = table.class(tracker.class_of(ctx, &r).unwrap());
                    assert_eq!(c.trace as i64, r.trace.rem_euclid(ell as i64));
                    assert_eq!(c.det as u64, crate::arith::pow_mod(5, r.degree as u64, ell as u64));
                }
                let mut prev: Option<EllImage> = None;
                for ctx in &ctxs {
                    let img = classify_image_ell(ctx, &frobenius_scan(ctx, &e).unwrap(), ell).unwrap();
                    if let Some(prev) = &prev {
                        match (prev, &img) {
                            (EllImage::CertifiedSurjective, other) => assert!(other.is_certified()),
                            (
                                EllImage::CandidateExceptional { missing: m0, .. },
                                EllImage::CandidateExceptional { missing: m1, .. },
                            ) => assert!(m1.iter().all(|c| m0.contains(c))),
                            _ => {}
                        }
                    }
                    prev = Some(img);
                }
            }
        }
    }

    #[test]
    fn soundness_over_small_box() {
        let base = f5();
        let ctx = ScanContext::new(&base, 2).unwrap();
        for pair in enumerate_box(&CurveBox::new(base.clone(), 1), u128::MAX).unwrap() {
            let e = GlobalCurve::from_pair(&pair).unwrap();
            let recs = frobenius_scan(&ctx, &e).unwrap();
            if classify_image_ell(&ctx, &recs, 2).unwrap().is_certified() {
                assert!(exact_mod2(&e).is_surjective());
            }
            if pair.b.is_zero() {
                assert_eq!(torsion_bound(&recs, 5).unwrap() % 2, 0);
            }
        }
    }

    #[test]
    fn scan_depth_defaults() {
        assert_eq!(default_scan_depth(11, &[2, 3, 5, 7, 13]), 12);
        assert_eq!(default_scan_depth(5, &[2]), 1);
        assert_eq!(default_scan_depth(5, &[3]), 2);
        assert_eq!(default_scan_depth(5, &[5]), 1);
    }
}
