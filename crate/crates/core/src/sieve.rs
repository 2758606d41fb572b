//! The two-dimensional large sieve over `F_q[T]`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{irreducible_count, pow_mod};
use crate::census::{omega_ell_census, omega_p_census, CensusTable, Level};
use crate::error::{Error, Result};
use crate::field::make_field;
use crate::function_field::{primes_of_degree, reduce_mod_prime, squarefree_ideals, CurvePair};
use crate::gl2::class_table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SieveParams {
    pub q: u64,
    /// Box exponent: `|a|, |b| <= q^R`.
    pub r: u32,
    /// Modulus degree cutoff.
    pub big_q: u32,
    pub g: u32,
}

/// Local densities `ω(d)` for primes of degree `d`, with a per-degree filter
/// selecting which primes take part in the sieve.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaProfile {
    pub q: u64,
    /// `omega[d]` for `d = 1..=max_degree`; slot 0 is unused.
    omega: Vec<BigRational>,
    filter: Vec<bool>,
}

impl OmegaProfile {
    pub fn new(q: u64, omega_by_degree: Vec<BigRational>, filter_by_degree: Vec<bool>) -> Result<Self> {
        if omega_by_degree.len() != filter_by_degree.len() {
            return Err(Error::InvalidInput("omega and filter lengths differ".into()));
        }
        for (i, w) in omega_by_degree.iter().enumerate() {
            if w < &BigRational::zero() || w > &BigRational::one() {
                return Err(Error::InvalidInput(format!("omega({}) = {w} outside [0, 1]", i + 1)));
            }
        }
        let mut omega = vec![BigRational::zero()];
        omega.extend(omega_by_degree);
        let mut filter = vec![false];
        filter.extend(filter_by_degree);
        Ok(OmegaProfile { q, omega, filter })
    }

    /// The same `ω` at every degree `1..=max_degree`, no filter.
    pub fn constant(q: u64, max_degree: u32, w: BigRational) -> Result<Self> {
        let n = max_degree as usize;
        OmegaProfile::new(q, vec![w; n], vec![true; n])
    }

    pub fn max_degree(&self) -> u32 {
        self.omega.len() as u32 - 1
    }

    /// `ω(d)`, zero for filtered-out degrees.
    pub fn omega(&self, d: u32) -> BigRational {
        if self.passes(d) {
            self.omega[d as usize].clone()
        } else {
            BigRational::zero()
        }
    }

    pub fn passes(&self, d: u32) -> bool {
        self.filter.get(d as usize).copied().unwrap_or(false)
    }

    fn check_covers(&self, big_q: u32) -> Result<()> {
        if big_q > self.max_degree() {
            return Err(Error::InvalidInput(format!(
                "profile covers degrees <= {}, Q = {big_q}",
                self.max_degree()
            )));
        }
        Ok(())
    }

    /// `ω/(1 - ω)` at degree `d`.
    fn weight(&self, d: u32) -> Result<BigRational> {
        let w = self.omega(d);
        if w == BigRational::one() {
            return Err(Error::OmegaIsOne(d));
        }
        Ok(&w / (BigRational::one() - &w))
    }
}

fn q_pow(q: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(q), e as usize)
}

/// Builds `ω(d) = #Ω(d)/q^{2d}` for `d = 1..=max_degree` from censuses with
/// `n = d`. For `l ≠ p` the filter keeps the degrees with `q^d ≡ det C (mod l)`;
/// the mod-p profile keeps every degree. `target` is a class id, or `t` for mod p.
pub fn omega_from_census(censuses: &[CensusTable], target: usize, max_degree: u32) -> Result<OmegaProfile> {
    let first = censuses.first().ok_or(Error::MissingCensus(1))?;
    let (q, level) = (first.q, first.level);
    let det = match level {
        Level::Ell(ell) => Some((ell, class_table(ell)?.class(target).det)),
        Level::P => None,
    };
    let mut omega = Vec::new();
    let mut filter = Vec::new();
    for d in 1..=max_degree {
        let census = censuses
            .iter()
            .find(|c| c.n == d && c.q == q && c.level == level)
            .ok_or(Error::MissingCensus(d))?;
        let passes = match det {
            Some((ell, det)) => pow_mod(q, d as u64, ell as u64) == det as u64,
            None => true,
        };
        let count = census.counts.get(target).copied().unwrap_or(0);
        omega.push(if passes {
            BigRational::new(count.into(), q_pow(q, 2 * d))
        } else {
            BigRational::zero()
        });
        filter.push(passes);
    }
    OmegaProfile::new(q, omega, filter)
}

/// Runs the censuses for `n = 1..=max_degree` and builds the profile.
pub fn omega_profile(q: u64, level: Level, target: usize, max_degree: u32, budget: u128) -> Result<OmegaProfile> {
    let censuses = (1..=max_degree)
        .map(|n| match level {
            Level::Ell(ell) => omega_ell_census(q, n, ell, budget),
            Level::P => omega_p_census(q, n, budget),
        })
        .collect::<Result<Vec<_>>>()?;
    omega_from_census(&censuses, target, max_degree)
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `L(Q) = 1 + Σ_I Π_{P | I} ω_P/(1 - ω_P)` over nonunit squarefree monic `I`
/// of degree `<= Q` whose prime factors all pass the filter.
///
/// Evaluated as the coefficient sum up to `z^Q` of `Π_d (1 + w_d z^d)^{π_q(d)}`.
pub fn l_of_q(profile: &OmegaProfile, big_q: u32) -> Result<BigRational> {
    profile.check_covers(big_q)?;
    let top = big_q as usize;
    let mut series = vec![BigRational::zero(); top + 1];
    series[0] = BigRational::one();
    for d in 1..=big_q {
        if !profile.passes(d) || profile.omega(d).is_zero() {
            continue;
        }
        let w = profile.weight(d)?;
        let pi = irreducible_count(profile.q, d);
        let du = d as usize;
        // (1 + w z^d)^pi, truncated at degree Q
        let terms: Vec<BigRational> = (0..=(top / du) as u64)
            .take_while(|&j| j <= pi)
            .map(|j| BigRational::from_integer(binomial(pi, j)) * num_traits::pow(w.clone(), j as usize))
            .collect();
        let mut next = vec![BigRational::zero(); top + 1];
        for (i, s) in series.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            for (j, t) in terms.iter().enumerate() {
                let k = i + j * du;
                if k > top {
                    break;
                }
                next[k] += s * t;
            }
        }
        series = next;
    }
    Ok(series.into_iter().fold(BigRational::zero(), |a, b| a + b))
}

/// [`l_of_q`] by listing every squarefree ideal.
pub fn l_of_q_brute(profile: &OmegaProfile, big_q: u32) -> Result<BigRational> {
    profile.check_covers(big_q)?;
    let base = make_field_for(profile.q)?;
    let mut total = BigRational::one();
    for ideal in squarefree_ideals(&base, big_q)? {
        if !ideal.factors.iter().all(|p| profile.passes(p.degree)) {
            continue;
        }
        let mut prod = BigRational::one();
        for p in &ideal.factors {
            prod *= profile.weight(p.degree)?;
        }
        total += prod;
    }
    Ok(total)
}

fn make_field_for(q: u64) -> Result<crate::field::Field> {
    let (p, k) = crate::arith::prime_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
    make_field(p, k)
}

/// `1 + Σ_{filtered P, deg P <= Q} ω_P`.
pub fn l_lower(profile: &OmegaProfile, big_q: u32) -> Result<BigRational> {
    profile.check_covers(big_q)?;
    let mut acc = BigRational::one();
    for d in 1..=big_q {
        if profile.passes(d) {
            acc += BigRational::from_integer(irreducible_count(profile.q, d).into()) * profile.omega(d);
        }
    }
    Ok(acc)
}

/// `q^{2 max(R + 1, 2Q + 2g)} / L`.
pub fn sieve_bound(params: &SieveParams, l: &BigRational) -> Result<BigRational> {
    if l.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let e = (params.r + 1).max(2 * params.big_q + 2 * params.g);
    Ok(BigRational::from_integer(q_pow(params.q, 2 * e)) / l)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveReport {
    pub params: SieveParams,
    pub l_exact: String,
    pub l_exact_f64: f64,
    pub l_lower: String,
    pub l_lower_f64: f64,
    pub bound: f64,
    pub actual: Option<u64>,
    pub pass: Option<bool>,
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `L_exact`, `L_lower` and the bound without a test set.
pub fn sieve_report(params: &SieveParams, profile: &OmegaProfile) -> Result<SieveReport> {
    let l = l_of_q(profile, params.big_q)?;
    let lower = l_lower(profile, params.big_q)?;
    let bound = sieve_bound(params, &l)?;
    Ok(SieveReport {
        params: *params,
        l_exact: l.to_string(),
        l_exact_f64: to_f64(&l),
        l_lower: lower.to_string(),
        l_lower_f64: to_f64(&lower),
        bound: to_f64(&bound),
        actual: None,
        pass: None,
    })
}

/// Checks the local certificate `#W_P <= (1 - ω_P) q^{2 deg P}` at every
/// filtered prime of degree `<= Q` by reducing `W`, then compares
/// `#{w ∈ W : |w|_∞ <= q^R}` with the sieve bound.
pub fn verify_sieve(w: &[CurvePair], params: &SieveParams, profile: &OmegaProfile) -> Result<SieveReport> {
    let mut report = sieve_report(params, profile)?;
    let base = make_field_for(params.q)?;
    for d in 1..=params.big_q {
        if !profile.passes(d) {
            continue;
        }
        let allowed = (BigRational::one() - profile.omega(d)) * BigRational::from_integer(q_pow(params.q, 2 * d));
        for prime in primes_of_degree(&base, d)?.iter() {
            let image: HashSet<(u64, u64)> = w
                .iter()
                .map(|pair| {
                    (
                        reduce_mod_prime(&pair.a, prime).index(),
                        reduce_mod_prime(&pair.b, prime).index(),
                    )
                })
                .collect();
            let size = image.len() as u64;
            if BigRational::from_integer(size.into()) > allowed {
                return Err(Error::CertificateViolation {
                    prime: prime.to_string(),
                    image: size,
                    allowed: to_f64(&allowed),
                });
            }
        }
    }
    let within = |p: &crate::function_field::PolyOverFq| p.degree().is_none_or(|d| d as u32 <= params.r);
    let actual = w.iter().filter(|pair| within(&pair.a) && within(&pair.b)).count() as u64;
    let bound = sieve_bound(params, &l_of_q(profile, params.big_q)?)?;
    report.actual = Some(actual);
    report.pass = Some(BigRational::from_integer(actual.into()) <= bound);
    Ok(report)
}
