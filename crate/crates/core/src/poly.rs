//! Dense univariate polynomials over a [`FieldDesc`], constant term first.

use crate::error::{Error, Result};
use crate::field::{FieldDesc, FieldElem};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<FieldElem>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(FieldElem::ONE)
    }

    pub fn constant(c: FieldElem) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Poly::from_coeffs(vec![FieldElem::ZERO, FieldElem::ONE])
    }

    pub fn from_coeffs(mut coeffs: Vec<FieldElem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FieldElem {
        self.coeffs.get(i).copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> FieldElem {
        self.coeffs.last().copied().unwrap_or(FieldElem::ZERO)
    }

    pub fn add(&self, other: &Poly, f: &FieldDesc) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &Poly, f: &FieldDesc) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::from_coeffs((0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn neg(&self, f: &FieldDesc) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&c| f.neg(c)).collect())
    }

    pub fn scale(&self, c: FieldElem, f: &FieldDesc) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|&x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, other: &Poly, f: &FieldDesc) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![FieldElem::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn pow(&self, mut e: u64, f: &FieldDesc) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, f);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, f);
            }
        }
        acc
    }

    pub fn divrem(&self, d: &Poly, f: &FieldDesc) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = f.inv(d.lead())?;
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut q = vec![FieldElem::ZERO; r.len() - dd];
        for i in (dd..r.len()).rev() {
            let c = f.mul(r[i], lead_inv);
            if c.is_zero() {
                continue;
            }
            q[i - dd] = c;
            for (j, &dj) in d.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                r[idx] = f.sub(r[idx], f.mul(c, dj));
            }
        }
        r.truncate(dd);
        Ok((Poly::from_coeffs(q), Poly::from_coeffs(r)))
    }

    pub fn rem(&self, d: &Poly, f: &FieldDesc) -> Result<Poly> {
        Ok(self.divrem(d, f)?.1)
    }

    pub fn monic(&self, f: &FieldDesc) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let inv = f.inv(self.lead()).expect("nonzero leading coefficient");
        self.scale(inv, f)
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Poly, f: &FieldDesc) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, f).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn mulmod(&self, other: &Poly, m: &Poly, f: &FieldDesc) -> Result<Poly> {
        self.mul(other, f).rem(m, f)
    }

    /// `self^e mod m`.
    pub fn powmod(&self, mut e: u128, m: &Poly, f: &FieldDesc) -> Result<Poly> {
        let mut acc = Poly::one().rem(m, f)?;
        let mut base = self.rem(m, f)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mulmod(&base, m, f)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mulmod(&base, m, f)?;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, x: FieldElem, f: &FieldDesc) -> FieldElem {
        self.coeffs
            .iter()
            .rev()
            .fold(FieldElem::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    pub fn derivative(&self, f: &FieldDesc) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| f.mul(c, f.from_int(i as i64)))
                .collect(),
        )
    }

    /// Number of distinct roots in F_{Q} where `Q = field_order`, which must be
    /// a power of the order of the coefficient field: `deg gcd(self, x^Q - x)`.
    pub fn count_roots_in(&self, big_order: u128, f: &FieldDesc) -> Result<usize> {
        Ok(self.split_part(big_order, f)?.degree().unwrap_or(0))
    }

    /// `gcd(self, x^Q - x)`, the product of the distinct linear factors over F_Q.
    pub fn split_part(&self, big_order: u128, f: &FieldDesc) -> Result<Poly> {
        if self.is_zero() {
            return Err(Error::InvalidInput("zero polynomial has every root".into()));
        }
        if self.degree() == Some(0) {
            return Ok(Poly::one());
        }
        let m = self.monic(f);
        let xq = Poly::x().powmod(big_order, &m, f)?;
        Ok(xq.sub(&Poly::x(), f).gcd(&m, f))
    }

    /// All distinct roots lying in `f`, in ascending index order.
    ///
    /// Equal-degree splitting with the shifts `x + δ` for δ in index order, so
    /// the output is deterministic.
    pub fn roots(&self, f: &FieldDesc) -> Vec<FieldElem> {
        if self.is_zero() {
            return Vec::new();
        }
        let g = match self.split_part(f.order() as u128, f) {
            Ok(g) => g,
            Err(_) => return Vec::new(),
        };
        let mut out = Vec::new();
        split_linear(&g, f, &mut out);
        out.sort_unstable();
        out
    }
}

fn split_linear(g: &Poly, f: &FieldDesc, out: &mut Vec<FieldElem>) {
    match g.degree() {
        None | Some(0) => {}
        Some(1) => {
            let r = f.div(f.neg(g.coeff(0)), g.coeff(1)).expect("linear factor");
            out.push(r);
        }
        Some(d) => {
            let half = ((f.order() - 1) / 2) as u128;
            for delta in f.elements() {
                let shifted = Poly::from_coeffs(vec![delta, FieldElem::ONE]);
                let h = shifted
                    .powmod(half, g, f)
                    .expect("monic modulus")
                    .sub(&Poly::one(), f)
                    .gcd(g, f);
                let dh = h.degree().unwrap_or(0);
                if dh > 0 && dh < d {
                    let (cofactor, _) = g.divrem(&h, f).expect("exact division");
                    split_linear(&h, f, out);
                    split_linear(&cofactor.monic(f), f, out);
                    return;
                }
            }
            unreachable!("some shift separates distinct roots");
        }
    }
}
