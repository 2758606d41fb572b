//! Elliptic curves over `F_q(T)`: Frobenius censuses over finite fields,
//! conjugacy classes of `GL2(Z/l)`, mod-l image sampling, the large sieve
//! for `F_q[T]`, and density experiments over height boxes.
//!
//! Module map:
//! - [`field`], [`poly`]: arithmetic in `F_{p^k}` and polynomials over it.
//! - [`function_field`]: `O_K = F_q[T]`, primes, reduction, the curve box `C(x)`.
//! - [`ec_finite`]: point counts, Hasse invariants, division polynomials, torsion ranks.
//! - [`gl2`]: class tables, `Γ_l`, Frobenius class lookup, uniformity constant.
//! - [`census`]: exhaustive Frobenius-class counts and Chebotarev deviation reports.
//! - [`galois`]: per-curve Frobenius scans and one-sided image certification.
//! - [`sieve`]: local densities, `L(Q)` and the two-dimensional large sieve bound.
//! - [`experiments`]: the drivers behind the command-line tool.

pub mod arith;
pub mod census;
pub mod ec_finite;
pub mod error;
pub mod experiments;
pub mod field;
pub mod function_field;
pub mod galois;
pub mod gl2;
pub mod poly;
pub mod sieve;

pub use error::{Error, Result};
pub use field::{make_field, Field, FieldDesc, FieldElem};
pub use poly::Poly;
