//! Exactness checks for cubature rules.
//!
//! [`exactness_sweep`] compares a rule against [`MomentOracle`] on every
//! monomial up to a given degree. [`brute_force_integral`] is a second,
//! independent oracle: a tensor-product 4-point Gauss rule per axis whose
//! nodes come from root-finding on Legendre / Hermite polynomials.

use serde::Serialize;
use thiserror::Error;

use crate::constructor::CubatureRule;
use crate::moments::{MeasureSpec, MomentError, MomentOracle, Region, MAX_ORACLE_DEGREE};
use crate::multi_index::monomials_up_to;
use crate::polyparse::Polynomial;

/// Default tolerance of the exactness sweep.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Largest dimension the tensor-product oracle accepts.
pub const BRUTE_FORCE_MAX_DIMENSION: usize = 8;

const GAUSS_POINTS: usize = 4;
const ROOT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("polynomial uses {poly} variables but the rule has dimension {rule}")]
    DimensionMismatch { rule: usize, poly: usize },
    #[error("rule has dimension {rule} but the measure has dimension {measure}")]
    MeasureMismatch { rule: usize, measure: usize },
    #[error("sweep degree {requested} exceeds the {available} available for this measure")]
    DegreeTooHigh { requested: u32, available: u32 },
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error("brute-force oracle does not support {0}")]
    UnsupportedMeasure(String),
    #[error("brute-force oracle is limited to n <= {BRUTE_FORCE_MAX_DIMENSION}, got n = {0}")]
    DimensionTooLarge(usize),
}

/// Worst error among the monomials of one total degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeError {
    pub degree: u32,
    pub max_rel_error: f64,
    pub worst_monomial: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub degrees: Vec<DegreeError>,
    /// Every degree up to the rule's declared degree is within tolerance.
    pub pass: bool,
    pub tolerance: f64,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report is serializable");
        text.push('\n');
        text
    }

    pub fn degree(&self, degree: u32) -> Option<&DegreeError> {
        self.degrees.iter().find(|d| d.degree == degree)
    }

    /// Degrees whose error exceeds the tolerance.
    pub fn failing_degrees(&self) -> Vec<u32> {
        self.degrees
            .iter()
            .filter(|d| d.max_rel_error.is_nan() || d.max_rel_error > self.tolerance)
            .map(|d| d.degree)
            .collect()
    }
}

/// Node `i` and, when `paired`, its antipode at `i + 1` with equal weight.
#[derive(Debug, Clone, Copy)]
struct Group {
    index: usize,
    paired: bool,
}

fn antipodal_groups(rule: &CubatureRule) -> Vec<Group> {
    let mut groups = Vec::with_capacity(rule.len());
    let mut i = 0;
    while i < rule.len() {
        let paired = i + 1 < rule.len()
            && rule.weights[i] == rule.weights[i + 1]
            && rule.nodes[i]
                .iter()
                .zip(&rule.nodes[i + 1])
                .all(|(a, b)| *b == -*a);
        groups.push(Group { index: i, paired });
        i += if paired { 2 } else { 1 };
    }
    groups
}

fn grouped_sum(rule: &CubatureRule, groups: &[Group], f: impl Fn(usize) -> f64) -> f64 {
    groups
        .iter()
        .map(|g| {
            let value = if g.paired {
                f(g.index) + f(g.index + 1)
            } else {
                f(g.index)
            };
            rule.weights[g.index] * value
        })
        .sum()
}

/// `Σ w_i p(x_i)`, with `p(x) + p(-x)` formed before weighting for
/// antipodal node pairs so odd monomials give exactly zero.
pub fn apply_rule(rule: &CubatureRule, poly: &Polynomial) -> Result<f64, VerifyError> {
    if poly.inferred_dimension() > rule.dimension {
        return Err(VerifyError::DimensionMismatch {
            rule: rule.dimension,
            poly: poly.inferred_dimension(),
        });
    }
    let groups = antipodal_groups(rule);
    Ok(poly
        .terms()
        .iter()
        .map(|(alpha, c)| c * grouped_sum(rule, &groups, |i| monomial_at(alpha, &rule.nodes[i])))
        .sum())
}

fn monomial_at(alpha: &[u32], x: &[f64]) -> f64 {
    alpha
        .iter()
        .zip(x)
        .filter(|(&e, _)| e > 0)
        .map(|(&e, &v)| v.powi(e as i32))
        .product()
}

/// Relative error of `got` against `exact`, measured against the mass when
/// the exact value is zero.
pub fn relative_error(got: f64, exact: f64, mass: f64) -> f64 {
    if exact == 0.0 {
        got.abs() / mass.abs()
    } else {
        (got - exact).abs() / exact.abs()
    }
}

/// Compares the rule with the oracle on every monomial of total degree
/// `<= max_degree`, enumerated in graded lexicographic order.
pub fn exactness_sweep(
    rule: &CubatureRule,
    oracle: &MomentOracle,
    max_degree: u32,
    tolerance: f64,
) -> Result<VerificationReport, VerifyError> {
    let n = rule.dimension;
    if oracle.measure().dimension() != n {
        return Err(VerifyError::MeasureMismatch {
            rule: n,
            measure: oracle.measure().dimension(),
        });
    }
    let available = oracle.max_degree().min(MAX_ORACLE_DEGREE);
    if max_degree > available {
        return Err(VerifyError::DegreeTooHigh {
            requested: max_degree,
            available,
        });
    }
    let groups = antipodal_groups(rule);
    // powers[i][axis * stride + e] = x_i[axis]^e
    let stride = max_degree as usize + 1;
    let powers: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|x| {
            x.iter()
                .flat_map(|&v| (0..stride).map(move |e| v.powi(e as i32)))
                .collect()
        })
        .collect();
    let mass = oracle.mass();
    let mut degrees: Vec<DegreeError> = (0..=max_degree)
        .map(|degree| DegreeError {
            degree,
            max_rel_error: 0.0,
            worst_monomial: vec![0; n],
        })
        .collect();
    for alpha in monomials_up_to(n, max_degree) {
        let support: Vec<(usize, usize)> = alpha
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(axis, &e)| (axis, e as usize))
            .collect();
        let got = grouped_sum(rule, &groups, |i| {
            support
                .iter()
                .map(|&(axis, e)| powers[i][axis * stride + e])
                .product()
        });
        let exact = oracle.evaluate(&alpha)?;
        let err = relative_error(got, exact, mass);
        let slot = &mut degrees[alpha.iter().sum::<u32>() as usize];
        // NaN counts as worst.
        if err.is_nan() || err > slot.max_rel_error {
            slot.max_rel_error = err;
            slot.worst_monomial = alpha;
        }
    }
    let pass = degrees
        .iter()
        .filter(|d| d.degree <= rule.declared_degree)
        .all(|d| d.max_rel_error <= tolerance);
    Ok(VerificationReport {
        degrees,
        pass,
        tolerance,
    })
}

/// Legendre `P_n(x)` and `P_{n-1}(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    for k in 1..n {
        let next = ((2 * k + 1) as f64 * x * cur - k as f64 * prev) / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Physicists' Hermite `H_n(x)` and `H_{n-1}(x)`.
fn hermite(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, 2.0 * x);
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Roots of `f` on `[lo, hi]`: sign changes on a uniform grid, narrowed by
/// bisection and polished with Newton.
fn roots(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    count: usize,
) -> Vec<f64> {
    let steps = 4000;
    let h = (hi - lo) / steps as f64;
    let mut found = Vec::with_capacity(count);
    let mut a = lo;
    let mut fa = f(a);
    for k in 1..=steps {
        let b = lo + k as f64 * h;
        let fb = f(b);
        if fa == 0.0 {
            found.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r, mut fl) = (a, b, fa);
            while r - l > 1e-6 {
                let m = 0.5 * (l + r);
                let fm = f(m);
                if fl * fm <= 0.0 {
                    r = m;
                } else {
                    l = m;
                    fl = fm;
                }
            }
            let mut x = 0.5 * (l + r);
            for _ in 0..50 {
                let dx = f(x) / df(x);
                x -= dx;
                if dx.abs() <= ROOT_TOL * x.abs().max(1.0) {
                    break;
                }
            }
            found.push(x);
        }
        a = b;
        fa = fb;
    }
    assert_eq!(found.len(), count, "root bracketing missed a root");
    found
}

/// 4-point Gauss–Legendre nodes and weights on `[-1, 1]` (weights sum to 2).
pub fn gauss_legendre_4() -> ([f64; 4], [f64; 4]) {
    let n = GAUSS_POINTS;
    let dp = |x: f64| {
        let (p, q) = legendre(n, x);
        n as f64 * (x * p - q) / (x * x - 1.0)
    };
    let xs = roots(|x| legendre(n, x).0, dp, -1.0 + 1e-9, 1.0 - 1e-9, n);
    let mut nodes = [0.0; 4];
    let mut weights = [0.0; 4];
    for (k, &x) in xs.iter().enumerate() {
        let d = dp(x);
        nodes[k] = x;
        weights[k] = 2.0 / ((1.0 - x * x) * d * d);
    }
    (nodes, weights)
}

/// 4-point Gauss–Hermite nodes and weights for `exp(-x²)` on `R`
/// (weights sum to `√π`).
pub fn gauss_hermite_4() -> ([f64; 4], [f64; 4]) {
    let n = GAUSS_POINTS;
    let dh = |x: f64| 2.0 * n as f64 * hermite(n, x).1;
    let xs = roots(|x| hermite(n, x).0, dh, -4.0, 4.0, n);
    // w = 2^{n-1} n! √π / (n² H_{n-1}(x)²)
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let scale = 2f64.powi(n as i32 - 1) * factorial * std::f64::consts::PI.sqrt() / (n * n) as f64;
    let mut nodes = [0.0; 4];
    let mut weights = [0.0; 4];
    for (k, &x) in xs.iter().enumerate() {
        let h = hermite(n, x).1;
        nodes[k] = x;
        weights[k] = scale / (h * h);
    }
    (nodes, weights)
}

/// Integral of `poly` under the cube (constant weight 1/2 per axis) or the
/// Gaussian measure by a tensor-product 4-point Gauss rule, exact for
/// per-axis degree <= 7.
pub fn brute_force_integral(measure: &MeasureSpec, poly: &Polynomial) -> Result<f64, VerifyError> {
    let n = measure.dimension();
    if n > BRUTE_FORCE_MAX_DIMENSION {
        return Err(VerifyError::DimensionTooLarge(n));
    }
    if poly.inferred_dimension() > n {
        return Err(VerifyError::DimensionMismatch {
            rule: n,
            poly: poly.inferred_dimension(),
        });
    }
    let (nodes, weights) = match measure.region() {
        Region::ProductCube { alpha } if alpha.iter().all(|&a| a == 0.0) => {
            let (x, w) = gauss_legendre_4();
            (x, w.map(|v| 0.5 * v))
        }
        Region::GaussianFullSpace => gauss_hermite_4(),
        _ => return Err(VerifyError::UnsupportedMeasure(measure.region_tag())),
    };
    let mut index = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut weight = 1.0;
        for (axis, &k) in index.iter().enumerate() {
            point[axis] = nodes[k];
            weight *= weights[k];
        }
        total += weight * poly.evaluate(&point);
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(total);
            }
            index[axis] += 1;
            if index[axis] < GAUSS_POINTS {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}
