//! Lower bounds on the number of nodes of a cubature formula.
//!
//! For degree `2k` or `2k + 1`, any rule needs at least `dim P_n^k` nodes.
//! For odd degree `2k + 1` and a centrally symmetric functional Möller's
//! bound is sharper:
//!
//! ```text
//! N >= C(n+k, n) + Σ_{s=1}^{n-1} 2^{s-n} C(s+k, s)              (k odd)
//! N >= C(n+k, n) + Σ_{s=1}^{n-1} (1 - 2^{s-n}) C(s+k-1, s)      (k even)
//! ```
//!
//! which equals `n² + n + 1` at degree 5. Everything is evaluated in exact
//! rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("Möller's bound is only known for odd degree; got degree {0}")]
    EvenDegree(u32),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("bound does not fit in 64 bits")]
    Overflow,
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn to_u64(value: &BigInt) -> Result<u64, BoundsError> {
    value.to_u64().ok_or(BoundsError::Overflow)
}

/// `dim P_n^k = C(n + k, n)`.
pub fn dim_poly_space(n: usize, k: u32) -> Result<u64, BoundsError> {
    if n == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    to_u64(&binomial(n as u64 + k as u64, k as u64))
}

/// Möller's lower bound for a centrally symmetric rule of odd `degree`,
/// rounded up if the rational value is not an integer.
pub fn moller_bound(n: usize, degree: u32) -> Result<u64, BoundsError> {
    if degree.is_multiple_of(2) {
        return Err(BoundsError::EvenDegree(degree));
    }
    if n == 0 {
        return Err(BoundsError::ZeroDimension);
    }
    let k = (degree / 2) as u64;
    let n64 = n as u64;
    let mut total = BigRational::from_integer(binomial(n64 + k, n64));
    for s in 1..n64 {
        let power = BigRational::new(BigInt::one(), BigInt::one() << (n64 - s) as usize);
        let term = if k % 2 == 1 {
            power * BigRational::from_integer(binomial(s + k, s))
        } else {
            (BigRational::one() - power) * BigRational::from_integer(binomial(s + k - 1, s))
        };
        total += term;
    }
    to_u64(&total.ceil().to_integer())
}

/// `2 dim P_n^k - {0 if k odd, 1 if k even}`, the implicit form of the bound.
pub fn moller_bound_implicit(n: usize, degree: u32) -> Result<u64, BoundsError> {
    if degree.is_multiple_of(2) {
        return Err(BoundsError::EvenDegree(degree));
    }
    let k = degree / 2;
    let dim = dim_poly_space(n, k)?;
    Ok(2 * dim - u64::from(k.is_multiple_of(2)))
}

/// Lower bounds next to the size of a constructed rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub dimension: usize,
    pub degree: u32,
    pub dim_bound: u64,
    pub moller_bound: u64,
    pub rule_points: u64,
    /// `rule_points - moller_bound`; negative only for an invalid rule.
    pub gap: i64,
}

impl BoundReport {
    pub fn new(n: usize, degree: u32, rule_points: usize) -> Result<Self, BoundsError> {
        let dim_bound = dim_poly_space(n, degree / 2)?;
        let moller = moller_bound(n, degree)?;
        Ok(Self {
            dimension: n,
            degree,
            dim_bound,
            moller_bound: moller,
            rule_points: rule_points as u64,
            gap: rule_points as i64 - moller as i64,
        })
    }
}
