//! Brute-force group theory of `GL_2(Z/l)` for primes `l <= 13`.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::arith::{generated_subgroup, is_prime, prime_power, primes_below};
use crate::error::{Error, Result};

/// Largest supported level.
pub const MAX_LEVEL: u32 = 13;

/// A 2x2 matrix `[[a, b], [c, d]]` with entries reduced mod `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Mat2 {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Mat2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64, ell: u32) -> Mat2 {
        let r = |v: i64| v.rem_euclid(ell as i64) as u32;
        Mat2 {
            a: r(a),
            b: r(b),
            c: r(c),
            d: r(d),
        }
    }

    pub fn identity() -> Mat2 {
        Mat2 { a: 1, b: 0, c: 0, d: 1 }
    }

    /// `((a l + b) l + c) l + d`.
    pub fn index(&self, ell: u32) -> usize {
        let l = ell as usize;
        ((self.a as usize * l + self.b as usize) * l + self.c as usize) * l + self.d as usize
    }

    pub fn from_index(idx: usize, ell: u32) -> Mat2 {
        let l = ell as usize;
        Mat2 {
            a: (idx / (l * l * l)) as u32,
            b: (idx / (l * l) % l) as u32,
            c: (idx / l % l) as u32,
            d: (idx % l) as u32,
        }
    }

    pub fn mul(&self, o: &Mat2, ell: u32) -> Mat2 {
        let m = |x: u32, y: u32, z: u32, w: u32| (x * y + z * w) % ell;
        Mat2 {
            a: m(self.a, o.a, self.b, o.c),
            b: m(self.a, o.b, self.b, o.d),
            c: m(self.c, o.a, self.d, o.c),
            d: m(self.c, o.b, self.d, o.d),
        }
    }

    pub fn det(&self, ell: u32) -> u32 {
        ((self.a * self.d + ell * ell - (self.b * self.c) % ell) % ell) % ell
    }

    pub fn trace(&self, ell: u32) -> u32 {
        (self.a + self.d) % ell
    }

    pub fn is_scalar(&self) -> bool {
        self.b == 0 && self.c == 0 && self.a == self.d
    }

    pub fn inv(&self, ell: u32) -> Option<Mat2> {
        let det = self.det(ell);
        if det == 0 {
            return None;
        }
        let di = crate::arith::pow_mod(det as u64, ell as u64 - 2, ell as u64) as i64;
        Some(Mat2::new(
            self.d as i64 * di,
            -(self.b as i64) * di,
            -(self.c as i64) * di,
            self.a as i64 * di,
            ell,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjClass {
    pub id: usize,
    pub representative: Mat2,
    pub size: u64,
    pub trace: u32,
    pub det: u32,
    pub scalar: bool,
}

/// Conjugacy classes of `GL_2(Z/l)`, ordered by their smallest-index member.
#[derive(Debug)]
pub struct ClassTable {
    pub ell: u32,
    pub classes: Vec<ConjClass>,
    index: HashMap<(u32, u32, bool), usize>,
    membership: Vec<u32>,
}

pub fn gl2_order(ell: u32) -> u64 {
    let l = ell as u64;
    (l * l - 1) * (l * l - l)
}

pub fn sl2_order(ell: u32) -> u64 {
    let l = ell as u64;
    l * (l * l - 1)
}

fn check_level(ell: u32) -> Result<()> {
    if ell > MAX_LEVEL || !is_prime(ell as u64) {
        return Err(Error::UnsupportedLevel(ell));
    }
    Ok(())
}

/// All invertible matrices mod `l`, in index order.
pub fn gl2_elements(ell: u32) -> Vec<Mat2> {
    let l = ell as usize;
    (0..l.pow(4))
        .map(|i| Mat2::from_index(i, ell))
        .filter(|m| m.det(ell) != 0)
        .collect()
}

fn build_table(ell: u32) -> ClassTable {
    let group = gl2_elements(ell);
    let inverses: Vec<Mat2> = group.iter().map(|s| s.inv(ell).expect("invertible")).collect();
    let n = (ell as usize).pow(4);
    let mut membership = vec![u32::MAX; n];
    let mut classes = Vec::new();
    for m in &group {
        if membership[m.index(ell)] != u32::MAX {
            continue;
        }
        let id = classes.len();
        let mut size = 0;
        for (s, si) in group.iter().zip(&inverses) {
            let c = s.mul(m, ell).mul(si, ell);
            let slot = &mut membership[c.index(ell)];
            if *slot == u32::MAX {
                *slot = id as u32;
                size += 1;
            }
        }
        classes.push(ConjClass {
            id,
            representative: *m,
            size,
            trace: m.trace(ell),
            det: m.det(ell),
            scalar: m.is_scalar(),
        });
    }
    let index = classes
        .iter()
        .map(|c| ((c.trace, c.det, c.scalar), c.id))
        .collect();
    ClassTable {
        ell,
        classes,
        index,
        membership,
    }
}

/// The class table for `l`, built once per process.
pub fn class_table(ell: u32) -> Result<Arc<ClassTable>> {
    check_level(ell)?;
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<ClassTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("class cache").get(&ell) {
        return Ok(t.clone());
    }
    let table = Arc::new(build_table(ell));
    cache.lock().expect("class cache").insert(ell, table.clone());
    Ok(table)
}

impl ClassTable {
    pub fn class(&self, id: usize) -> &ConjClass {
        &self.classes[id]
    }

    /// Class id of an invertible matrix.
    pub fn class_of(&self, m: &Mat2) -> Result<usize> {
        match self.membership[m.index(self.ell)] {
            u32::MAX => Err(Error::SingularDeterminant(self.ell)),
            id => Ok(id as usize),
        }
    }

    /// Ids of the classes with determinant 1.
    pub fn det1_classes(&self) -> Vec<usize> {
        self.classes.iter().filter(|c| c.det == 1 % self.ell).map(|c| c.id).collect()
    }

    /// The class of a Frobenius element from its trace and determinant.
    ///
    /// When `trace^2 = 4 det` the eigenvalue is repeated and `scalar` must say
    /// whether the element is the scalar matrix or the non-semisimple class.
    pub fn frobenius_class(&self, trace: i64, det: i64, scalar: Option<bool>) -> Result<usize> {
        let l = self.ell as i64;
        let t = trace.rem_euclid(l) as u32;
        let d = det.rem_euclid(l) as u32;
        if d == 0 {
            return Err(Error::SingularDeterminant(self.ell));
        }
        let disc = (t as i64 * t as i64 - 4 * d as i64).rem_euclid(l);
        let flag = if disc == 0 {
            scalar.ok_or(Error::AmbiguousClass {
                ell: self.ell,
                trace: t,
                det: d,
            })?
        } else {
            false
        };
        self.index
            .get(&(t, d, flag))
            .copied()
            .ok_or_else(|| Error::InvariantViolation(format!("no class with trace {t}, det {d} mod {l}")))
    }

    /// CSV with columns `id,trace,det,size,scalar_flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,trace,det,size,scalar_flag\n");
        for c in &self.classes {
            out.push_str(&format!("{},{},{},{},{}\n", c.id, c.trace, c.det, c.size, c.scalar));
        }
        out
    }
}

/// `Γ_l`: matrices whose determinant lies in `<q mod l>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaEll {
    pub ell: u32,
    pub q_mod: u32,
    pub det_subgroup: Vec<u32>,
    pub member_classes: Vec<usize>,
}

impl GammaEll {
    pub fn order(&self) -> u64 {
        sl2_order(self.ell) * self.det_subgroup.len() as u64
    }
}

pub fn gamma_ell(ell: u32, q: u64) -> Result<GammaEll> {
    let table = class_table(ell)?;
    let (p, _) = prime_power(q).ok_or_else(|| Error::InvalidInput(format!("{q} is not a prime power")))?;
    if p == ell as u64 {
        return Err(Error::LevelIsCharacteristic(ell));
    }
    let det_subgroup: Vec<u32> = generated_subgroup([q % ell as u64], ell as u64)
        .into_iter()
        .map(|d| d as u32)
        .collect();
    let member_classes = table
        .classes
        .iter()
        .filter(|c| det_subgroup.contains(&c.det))
        .map(|c| c.id)
        .collect();
    Ok(GammaEll {
        ell,
        q_mod: (q % ell as u64) as u32,
        det_subgroup,
        member_classes,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Certification {
    Certified,
    /// Det-1 classes not yet observed, and whether the observed determinants
    /// already generate `<q mod l>`.
    Undetermined { missing: Vec<usize>, dets_generate: bool },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified)
    }
}

/// Certifies `ρ(G_K) = Γ_l` once every det-1 class has been observed and the
/// observed determinants generate `<q mod l>`.
pub fn surjectivity_criterion(
    table: &ClassTable,
    q: u64,
    observed: &BTreeSet<usize>,
    observed_dets: &BTreeSet<u32>,
) -> Certification {
    let ell = table.ell as u64;
    let missing: Vec<usize> = table
        .det1_classes()
        .into_iter()
        .filter(|c| !observed.contains(c))
        .collect();
    let target = generated_subgroup([q % ell], ell);
    let have = generated_subgroup(observed_dets.iter().map(|&d| d as u64), ell);
    let dets_generate = have == target;
    if missing.is_empty() && dets_generate {
        Certification::Certified
    } else {
        Certification::Undetermined { missing, dets_generate }
    }
}

/// `2 + max { l prime : l <= 12 g + 6 + 3 e_4 + 4 e_3 }`, where `e_j = 1` if
/// `l ≡ 1 (mod j)` and `-1` otherwise.
pub fn c_of_g(g: u64) -> u64 {
    let bound = 12 * g + 13;
    let e = |l: u64, j: u64| if l % j == 1 { 1i64 } else { -1 };
    primes_below(bound + 1)
        .into_iter()
        .filter(|&l| l as i64 <= 12 * g as i64 + 6 + 3 * e(l, 4) + 4 * e(l, 3))
        .max()
        .map(|l| l + 2)
        .expect("l = 2 always qualifies")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum HypothesisResult {
    Pass,
    Fail { witness: u64 },
}

/// Looks for a prime `l ≠ p`, `l < c(g)`, with `p | l - 1` or `p | l + 1`.
pub fn hypothesis_check(p: u64, g: u64) -> Result<HypothesisResult> {
    if !is_prime(p) || p <= 3 {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    let witness = primes_below(c_of_g(g))
        .into_iter()
        .filter(|&l| l != p)
        .find(|&l| (l - 1) % p == 0 || (l + 1) % p == 0);
    Ok(match witness {
        Some(witness) => HypothesisResult::Fail { witness },
        None => HypothesisResult::Pass,
    })
}

/// Subgroup generated by `gens`, as a sorted list of matrix indices.
pub fn subgroup_closure(gens: &[Mat2], ell: u32) -> Vec<usize> {
    let n = (ell as usize).pow(4);
    let mut seen = vec![false; n];
    let id = Mat2::identity();
    seen[id.index(ell)] = true;
    let mut members = vec![id];
    let mut i = 0;
    while i < members.len() {
        let x = members[i];
        for g in gens {
            let y = x.mul(g, ell);
            if !seen[y.index(ell)] {
                seen[y.index(ell)] = true;
                members.push(y);
            }
        }
        i += 1;
    }
    let mut out: Vec<usize> = members.iter().map(|m| m.index(ell)).collect();
    out.sort_unstable();
    out
}
