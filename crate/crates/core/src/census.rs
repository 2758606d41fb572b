//! Exhaustive Frobenius-class censuses over `F_{q^n}^2` and their comparison
//! with the Chebotarev main term.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{mult_order, pow_mod, prime_power};
use crate::ec_finite::{self, twist_class_key, Curve};
use crate::error::{Error, Result};
use crate::field::{make_field, Field, FieldElem};
use crate::gl2::{class_table, gl2_order, sl2_order, ClassTable};

/// Default cap on enumerated pairs per census.
pub const DEFAULT_CENSUS_BUDGET: u128 = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Level {
    /// The mod-l representation, `l ≠ p`.
    Ell(u32),
    /// The mod-p unit-root character.
    P,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusTable {
    pub q: u64,
    pub n: u32,
    pub p: u64,
    pub level: Level,
    /// Indexed by class id for `Level::Ell`, by `t` (with slot 0 unused) for `Level::P`.
    pub counts: Vec<u64>,
    pub supersingular: u64,
    pub total: u64,
    pub warning: Option<String>,
}

impl CensusTable {
    /// `q^n`.
    pub fn field_order(&self) -> u64 {
        self.q.pow(self.n)
    }

    /// `q^{2n}`.
    pub fn pairs(&self) -> u64 {
        self.field_order() * self.field_order()
    }
}

/// Decides scalar versus non-semisimple Frobenius for repeated eigenvalues,
/// caching the answer per twist class since twisting preserves it.
#[derive(Default)]
pub struct ScalarResolver {
    cache: Mutex<HashMap<(u32, u64, u32, (u8, u64)), bool>>,
}

impl ScalarResolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` when `trace^2 ≠ 4 q^n (mod l)`; otherwise whether Frobenius acts
    /// on `E[l]` as a scalar, i.e. whether all of `E[l]` is rational over the
    /// extension of degree `ord(u)`, `u = trace/2`.
    pub fn resolve(&self, curve: &Curve, ell: u32, trace: i64) -> Result<Option<bool>> {
        let f = &curve.field;
        let l = ell as i64;
        let det = (f.order() % ell as u64) as i64;
        let t = trace.rem_euclid(l);
        if (t * t - 4 * det).rem_euclid(l) != 0 {
            return Ok(None);
        }
        let u = if ell == 2 {
            1
        } else {
            (t * pow_mod(2, ell as u64 - 2, ell as u64) as i64).rem_euclid(l) as u64
        };
        let m = mult_order(u, ell as u64).expect("eigenvalue is a unit") as u32;
        let key = (ell, f.characteristic(), f.degree(), twist_class_key(f, curve.a, curve.b));
        if let Some(&flag) = self.cache.lock().expect("scalar cache").get(&key) {
            return Ok(Some(flag));
        }
        let flag = ec_finite::torsion_rank(curve, ell, m)? == 2;
        self.cache.lock().expect("scalar cache").insert(key, flag);
        Ok(Some(flag))
    }
}

fn census_field(q: u64, n: u32, budget: u128) -> Result<(Field, u64)> {
    let (p, k) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
    if p <= 3 {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    let qn = (q as u128)
        .checked_pow(n)
        .ok_or_else(|| Error::budget("census pairs", u128::MAX, budget))?;
    let needed = qn.saturating_mul(qn);
    if needed > budget {
        return Err(Error::budget(format!("census over F_{q}^{n}"), needed, budget));
    }
    Ok((make_field(p, k * n)?, p))
}

fn is_singular(f: &crate::field::FieldDesc, a: FieldElem, b: FieldElem, c4: FieldElem, c27: FieldElem) -> bool {
    let a3 = f.mul(f.mul(a, a), a);
    f.add(f.mul(c4, a3), f.mul(c27, f.mul(b, b))).is_zero()
}

fn add_counts(mut x: Vec<u64>, y: Vec<u64>) -> Vec<u64> {
    for (a, b) in x.iter_mut().zip(y) {
        *a += b;
    }
    x
}

/// Runs `row(a, counts)` for every `a` in parallel and sums the count vectors.
fn sweep<F>(field: &Field, width: usize, row: F) -> Result<Vec<u64>>
where
    F: Fn(FieldElem, &mut [u64]) -> Result<()> + Sync,
{
    (0..field.order())
        .into_par_iter()
        .try_fold(
            || vec![0u64; width],
            |mut acc, ai| {
                row(FieldElem(ai), &mut acc)?;
                Ok(acc)
            },
        )
        .try_reduce(|| vec![0u64; width], |x, y| Ok(add_counts(x, y)))
}

fn ell_warning(p: u64, ell: u32) -> Option<String> {
    let l = ell as u64;
    (l % p == 0 || (l - 1) % p == 0 || (l + 1) % p == 0).then(|| {
        format!("p = {p} divides l(l-1)(l+1) for l = {ell}; the Chebotarev comparison is unsupported here")
    })
}

/// Counts of `(a, b) ∈ F_{q^n}^2` with `Δ ≠ 0` by the class of Frobenius on `E[l]`.
pub fn omega_ell_census(q: u64, n: u32, ell: u32, budget: u128) -> Result<CensusTable> {
    if ell == 2 {
        omega2_census_fast(q, n, budget)
    } else {
        omega_ell_census_generic(q, n, ell, budget)
    }
}

/// Trace-based census valid for every `l`, resolving repeated eigenvalues via
/// torsion ranks.
pub fn omega_ell_census_generic(q: u64, n: u32, ell: u32, budget: u128) -> Result<CensusTable> {
    let (field, p) = census_field(q, n, budget)?;
    if ell as u64 == p {
        return Err(Error::LevelIsCharacteristic(ell));
    }
    let table = class_table(ell)?;
    let traces = ec_finite::trace_table(&field)?;
    let resolver = ScalarResolver::new();
    let f = field.as_ref();
    let det = (field.order() % ell as u64) as i64;
    let counts = sweep(&field, table.classes.len(), |a, acc| {
        for b in f.elements() {
            let Some(t) = traces.trace(a, b) else { continue };
            let curve = Curve {
                field: field.clone(),
                a,
                b,
            };
            let flag = resolver.resolve(&curve, ell, t)?;
            acc[table.frobenius_class(t, det, flag)?] += 1;
        }
        Ok(())
    })?;
    Ok(CensusTable {
        q,
        n,
        p,
        level: Level::Ell(ell),
        total: counts.iter().sum(),
        counts,
        supersingular: 0,
        warning: ell_warning(p, ell),
    })
}

/// `l = 2` census from the number of roots of `x^3 + a x + b`: three roots give
/// the identity, one root a transposition, none a 3-cycle.
pub fn omega2_census_fast(q: u64, n: u32, budget: u128) -> Result<CensusTable> {
    let (field, p) = census_field(q, n, budget)?;
    let table = class_table(2)?;
    let identity = table.frobenius_class(0, 1, Some(true))?;
    let transposition = table.frobenius_class(0, 1, Some(false))?;
    let three_cycle = table.frobenius_class(1, 1, None)?;
    let f = field.as_ref();
    let (c4, c27) = (f.from_int(4), f.from_int(27));
    let qn = f.order() as usize;
    let counts = sweep(&field, table.classes.len(), |a, acc| {
        let mut hist = vec![0u8; qn];
        for x in f.elements() {
            let v = f.mul(f.add(f.mul(x, x), a), x);
            hist[v.index() as usize] += 1;
        }
        for b in f.elements() {
            if is_singular(f, a, b, c4, c27) {
                continue;
            }
            let class = match hist[f.neg(b).index() as usize] {
                3 => identity,
                1 => transposition,
                0 => three_cycle,
                r => {
                    return Err(Error::InvariantViolation(format!(
                        "squarefree cubic with {r} roots"
                    )))
                }
            };
            acc[class] += 1;
        }
        Ok(())
    })?;
    Ok(CensusTable {
        q,
        n,
        p,
        level: Level::Ell(2),
        total: counts.iter().sum(),
        counts,
        supersingular: 0,
        warning: ell_warning(p, 2),
    })
}

/// Counts by `t = trace mod p`; supersingular curves (trace ≡ 0) are placed
/// under `t = 1` and also tallied separately.
pub fn omega_p_census(q: u64, n: u32, budget: u128) -> Result<CensusTable> {
    let (field, p) = census_field(q, n, budget)?;
    let traces = ec_finite::trace_table(&field)?;
    let f = field.as_ref();
    let pi = p as i64;
    // Slot p holds the supersingular tally.
    let raw = sweep(&field, p as usize + 1, |a, acc| {
        for b in f.elements() {
            let Some(t) = traces.trace(a, b) else { continue };
            match t.rem_euclid(pi) {
                0 => {
                    acc[1] += 1;
                    acc[p as usize] += 1;
                }
                r => acc[r as usize] += 1,
            }
        }
        Ok(())
    })?;
    let supersingular = raw[p as usize];
    let counts = raw[..p as usize].to_vec();
    Ok(CensusTable {
        q,
        n,
        p,
        level: Level::P,
        total: counts.iter().sum(),
        counts,
        supersingular,
        warning: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassDeviation {
    pub class_id: usize,
    pub trace: u32,
    pub det: Option<u32>,
    pub count: u64,
    pub density: f64,
    pub target: f64,
    pub deviation: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub q: u64,
    pub n: u32,
    pub level: Level,
    pub rows: Vec<ClassDeviation>,
    /// `max deviation / envelope` over the rows.
    pub fitted_constant: Option<f64>,
    pub max_deviation: f64,
}

/// Compares each eligible class density with its Chebotarev target.
///
/// For `l ≠ p` the eligible classes are those with `det ≡ q^n (mod l)`, the
/// target is `#C / #SL_2(Z/l)` and the envelope is
/// `q^{3n/2} sqrt(#C #GL_2^3) / q^{2n}`. For the mod-p census the target is
/// `1/(p-1)` and the envelope `q^{3n/2} (p-1)^{3/2} / q^{2n}`.
pub fn chebotarev_report(census: &CensusTable, table: Option<&ClassTable>) -> Result<DeviationReport> {
    let qn = census.field_order() as f64;
    let pairs = census.pairs() as f64;
    let scale = qn.powf(1.5) / pairs;
    let mut rows = Vec::new();
    match census.level {
        Level::Ell(ell) => {
            let table = table.ok_or_else(|| Error::InvalidInput("class table required".into()))?;
            if table.ell != ell {
                return Err(Error::InvalidInput(format!("class table for {} given for level {ell}", table.ell)));
            }
            let det = (census.field_order() % ell as u64) as u32;
            let gl = gl2_order(ell) as f64;
            for c in table.classes.iter().filter(|c| c.det == det) {
                let count = census.counts[c.id];
                let density = count as f64 / pairs;
                let target = c.size as f64 / sl2_order(ell) as f64;
                rows.push(ClassDeviation {
                    class_id: c.id,
                    trace: c.trace,
                    det: Some(c.det),
                    count,
                    density,
                    target,
                    deviation: (density - target).abs(),
                    envelope: scale * (c.size as f64 * gl.powi(3)).sqrt(),
                });
            }
        }
        Level::P => {
            let pm1 = (census.p - 1) as f64;
            for t in 1..census.p as usize {
                let count = census.counts[t];
                let density = count as f64 / pairs;
                let target = 1.0 / pm1;
                rows.push(ClassDeviation {
                    class_id: t,
                    trace: t as u32,
                    det: None,
                    count,
                    density,
                    target,
                    deviation: (density - target).abs(),
                    envelope: scale * pm1.powf(1.5),
                });
            }
        }
    }
    let fitted_constant = rows
        .iter()
        .map(|r| r.deviation / r.envelope)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let max_deviation = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(DeviationReport {
        q: census.q,
        n: census.n,
        level: census.level,
        rows,
        fitted_constant,
        max_deviation,
    })
}

impl DeviationReport {
    /// Columns `class_id,trace,det,count,density,target,deviation,envelope`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class_id,trace,det,count,density,target,deviation,envelope\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.12},{:.12},{:.12},{:.12}\n",
                r.class_id,
                r.trace,
                r.det.map(|d| d.to_string()).unwrap_or_default(),
                r.count,
                r.density,
                r.target,
                r.deviation,
                r.envelope
            ));
        }
        out
    }
}
