//! Closed-form moments for every supported measure.
//!
//! A measure is either a symmetric product measure on `[-1, 1]^n` (each
//! axis weight normalized to unit mass) or a spherically symmetric measure
//! whose weight depends on `|x|` only. [`MomentOracle`] returns the exact
//! integral of any monomial of total degree `<= 6` under the measure; the
//! constructors and the exactness harness are both checked against it.
//!
//! Radial moments factor as `L(x^α) = R(|α|) · S(α)` where `S` is the
//! sphere-surface integral ([`surface_monomial_integral`]) and `R(k)` the
//! radial integral `∫ ρ(t) t^{n-1+k} dt` over the radial support.

use std::fmt;

use thiserror::Error;

use crate::multi_index::{has_odd_component, total_degree};
use crate::special::{ln_gamma_half, ln_pi_pow_half};

/// Smallest dimension the degree-5 sphere rule exists for.
pub const MIN_DIMENSION: usize = 4;

/// Highest total degree the oracle is defined for.
pub const MAX_ORACLE_DEGREE: u32 = 6;

/// Relative tolerance on odd one-dimensional moments of custom product axes.
const ODD_MOMENT_RTOL: f64 = 1e-14;

/// Relative tolerance on `L(x1^4) = 3 L(x1^2 x2^2)` for custom radial input.
const RADIAL_IDENTITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MomentError {
    #[error("dimension {0} is below the minimum of {MIN_DIMENSION}")]
    DimensionTooSmall(usize),
    #[error("Gegenbauer exponent {0} must be finite and greater than -1")]
    InvalidAlpha(f64),
    #[error("expected {expected} per-axis parameters, got {got}")]
    AxisCount { expected: usize, got: usize },
    #[error("axis {axis} is out of range for dimension {dimension}")]
    AxisOutOfRange { axis: usize, dimension: usize },
    #[error("shell inner radius {0} must lie in [0, 1)")]
    InvalidShellRadius(f64),
    #[error("axis {axis}: odd moment m{order} = {value} is not zero")]
    OddMomentNonzero { axis: usize, order: usize, value: f64 },
    #[error("invalid moments: {0}")]
    InvalidMoments(String),
    #[error(
        "radial moments violate L(x1^4) = 3 L(x1^2 x2^2): {fourth} vs 3 * {mixed} (spherical symmetry requires it)"
    )]
    RadialIdentity { fourth: f64, mixed: f64 },
    #[error("monomial of degree {0} is beyond the moments known for this measure")]
    DegreeUnavailable(u32),
    #[error("multi-index has {got} components but the measure has dimension {dimension}")]
    IndexDimension { got: usize, dimension: usize },
    #[error("operation needs a {expected} measure, got {got}")]
    WrongKind { expected: &'static str, got: MeasureKind },
    #[error("region tag '{0}' is not recognized")]
    UnknownRegion(String),
    #[error("region '{0}' cannot be rebuilt from its tag; supply its moments explicitly")]
    NeedsExplicitMoments(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    ProductCube,
    GaussianFullSpace,
    UnitBall,
    SphericalShell,
    ExpRadial,
    CustomProduct,
    CustomRadial,
}

impl MeasureKind {
    pub fn is_product(self) -> bool {
        matches!(self, MeasureKind::ProductCube | MeasureKind::CustomProduct)
    }

    pub fn is_spherical(self) -> bool {
        !self.is_product()
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MeasureKind::ProductCube => "product-cube",
            MeasureKind::GaussianFullSpace => "gaussian",
            MeasureKind::UnitBall => "unit-ball",
            MeasureKind::SphericalShell => "spherical-shell",
            MeasureKind::ExpRadial => "exp-radial",
            MeasureKind::CustomProduct => "custom-product",
            MeasureKind::CustomRadial => "custom-radial",
        };
        f.write_str(name)
    }
}

/// Raw one-dimensional moments `m0..=m6` of a symmetric axis weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMoments {
    raw: [f64; 7],
}

impl AxisMoments {
    /// Moments of a symmetric weight given only its even moments.
    pub fn even(m0: f64, m2: f64, m4: f64, m6: f64) -> Result<Self, MomentError> {
        Self::from_raw([m0, 0.0, m2, 0.0, m4, 0.0, m6])
    }

    /// Moments `m0..=m6`; the odd ones must vanish.
    pub fn from_raw(raw: [f64; 7]) -> Result<Self, MomentError> {
        Self::validate(&raw, 0)?;
        Ok(Self { raw })
    }

    fn validate(raw: &[f64; 7], axis: usize) -> Result<(), MomentError> {
        if raw.iter().any(|m| !m.is_finite()) {
            return Err(MomentError::InvalidMoments(format!(
                "axis {axis}: moments must be finite"
            )));
        }
        let scale = raw.iter().fold(0.0_f64, |acc, m| acc.max(m.abs()));
        for order in [1, 3, 5] {
            if raw[order].abs() > ODD_MOMENT_RTOL * scale {
                return Err(MomentError::OddMomentNonzero {
                    axis,
                    order,
                    value: raw[order],
                });
            }
        }
        let [m0, _, m2, _, m4, _, m6] = *raw;
        if m0 <= 0.0 || m2 <= 0.0 || m4 <= 0.0 || m6 <= 0.0 {
            return Err(MomentError::InvalidMoments(format!(
                "axis {axis}: even moments of a positive weight must be positive"
            )));
        }
        // Hankel positivity of a nonnegative symmetric weight.
        if m0 * m4 < m2 * m2 || m2 * m6 < m4 * m4 {
            return Err(MomentError::InvalidMoments(format!(
                "axis {axis}: moments are not those of a nonnegative weight"
            )));
        }
        Ok(())
    }

    /// `m0` (the axis mass).
    pub fn mass(&self) -> f64 {
        self.raw[0]
    }

    /// `(1, m2/m0, m4/m0, m6/m0)`.
    pub fn normalized(&self) -> [f64; 4] {
        let m0 = self.raw[0];
        [1.0, self.raw[2] / m0, self.raw[4] / m0, self.raw[6] / m0]
    }

    pub fn raw(&self) -> [f64; 7] {
        self.raw
    }
}

/// The four moments that determine a spherically symmetric functional up
/// to degree 5: `L(1)`, `L(x1^2)`, `L(x1^4)` and `L(x1^2 x2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialMoments {
    pub mass: f64,
    pub second: f64,
    pub fourth: f64,
    pub mixed: f64,
}

impl RadialMoments {
    /// Same moments divided by the mass.
    pub fn normalized(&self) -> Self {
        Self {
            mass: 1.0,
            second: self.second / self.mass,
            fourth: self.fourth / self.mass,
            mixed: self.mixed / self.mass,
        }
    }

    /// `|L(x1^4) - 3 L(x1^2 x2^2)| / |L(x1^4)|`.
    pub fn identity_defect(&self) -> f64 {
        (self.fourth - 3.0 * self.mixed).abs() / self.fourth.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// `[-1, 1]^n` with weight `∏ c_i (1 - x_i²)^{α_i}`, each factor of unit
    /// mass. `α_i = 0` is the constant weight 1/2.
    ProductCube { alpha: Vec<f64> },
    /// `R^n` with weight `exp(-|x|²)`.
    GaussianFullSpace,
    /// `|x| <= 1` with weight 1.
    UnitBall,
    /// `r <= |x| <= 1` with weight 1.
    SphericalShell { inner_radius: f64 },
    /// `R^n` with weight `exp(-|x|)`.
    ExpRadial,
    /// `[-1, 1]^n` with a product weight given by its axis moments.
    CustomProduct { axes: Vec<AxisMoments> },
    /// Spherically symmetric functional given by its low moments.
    CustomRadial { moments: RadialMoments },
}

/// Region and weight of an integral `L(f) = ∫ ρ f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    dimension: usize,
    region: Region,
}

fn check_dimension(n: usize) -> Result<(), MomentError> {
    if n < MIN_DIMENSION {
        Err(MomentError::DimensionTooSmall(n))
    } else {
        Ok(())
    }
}

impl MeasureSpec {
    /// Constant weight `1/2` per axis on `[-1, 1]^n`.
    pub fn cube(n: usize) -> Result<Self, MomentError> {
        Self::gegenbauer(n, 0.0)
    }

    /// Normalized `(1 - x_i²)^α` on every axis.
    pub fn gegenbauer(n: usize, alpha: f64) -> Result<Self, MomentError> {
        check_dimension(n)?;
        Self::gegenbauer_axes(vec![alpha; n])
    }

    /// Normalized `(1 - x_i²)^{α_i}` with one exponent per axis.
    pub fn gegenbauer_axes(alpha: Vec<f64>) -> Result<Self, MomentError> {
        check_dimension(alpha.len())?;
        if let Some(&bad) = alpha.iter().find(|a| !a.is_finite() || **a <= -1.0) {
            return Err(MomentError::InvalidAlpha(bad));
        }
        Ok(Self {
            dimension: alpha.len(),
            region: Region::ProductCube { alpha },
        })
    }

    pub fn gaussian(n: usize) -> Result<Self, MomentError> {
        check_dimension(n)?;
        Ok(Self {
            dimension: n,
            region: Region::GaussianFullSpace,
        })
    }

    pub fn unit_ball(n: usize) -> Result<Self, MomentError> {
        check_dimension(n)?;
        Ok(Self {
            dimension: n,
            region: Region::UnitBall,
        })
    }

    pub fn shell(n: usize, inner_radius: f64) -> Result<Self, MomentError> {
        check_dimension(n)?;
        if !(0.0..1.0).contains(&inner_radius) {
            return Err(MomentError::InvalidShellRadius(inner_radius));
        }
        Ok(Self {
            dimension: n,
            region: Region::SphericalShell { inner_radius },
        })
    }

    pub fn exp_radial(n: usize) -> Result<Self, MomentError> {
        check_dimension(n)?;
        Ok(Self {
            dimension: n,
            region: Region::ExpRadial,
        })
    }

    /// Product measure on `[-1, 1]^n` with per-axis moments.
    pub fn custom_product(axes: Vec<AxisMoments>) -> Result<Self, MomentError> {
        check_dimension(axes.len())?;
        for (axis, m) in axes.iter().enumerate() {
            AxisMoments::validate(&m.raw, axis)?;
        }
        Ok(Self {
            dimension: axes.len(),
            region: Region::CustomProduct { axes },
        })
    }

    /// Spherically symmetric measure known only through its low moments.
    /// Rejected unless `L(x1^4) = 3 L(x1^2 x2^2)` holds to 1e-9.
    pub fn custom_radial(n: usize, moments: RadialMoments) -> Result<Self, MomentError> {
        check_dimension(n)?;
        let RadialMoments {
            mass,
            second,
            fourth,
            mixed,
        } = moments;
        if [mass, second, fourth, mixed]
            .iter()
            .any(|v| !v.is_finite() || *v <= 0.0)
        {
            return Err(MomentError::InvalidMoments(
                "radial moments must be finite and positive".into(),
            ));
        }
        if moments.identity_defect() > RADIAL_IDENTITY_RTOL {
            return Err(MomentError::RadialIdentity { fourth, mixed });
        }
        Ok(Self {
            dimension: n,
            region: Region::CustomRadial { moments },
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn region(&self) -> &Region {
        &self.region
    }

    pub fn kind(&self) -> MeasureKind {
        match self.region {
            Region::ProductCube { .. } => MeasureKind::ProductCube,
            Region::GaussianFullSpace => MeasureKind::GaussianFullSpace,
            Region::UnitBall => MeasureKind::UnitBall,
            Region::SphericalShell { .. } => MeasureKind::SphericalShell,
            Region::ExpRadial => MeasureKind::ExpRadial,
            Region::CustomProduct { .. } => MeasureKind::CustomProduct,
            Region::CustomRadial { .. } => MeasureKind::CustomRadial,
        }
    }

    pub fn is_product(&self) -> bool {
        self.kind().is_product()
    }

    pub fn is_spherical(&self) -> bool {
        self.kind().is_spherical()
    }

    /// Total mass `L(1)`.
    pub fn mass(&self) -> f64 {
        match &self.region {
            Region::ProductCube { .. } => 1.0,
            Region::CustomProduct { axes } => axes.iter().map(AxisMoments::mass).product(),
            Region::CustomRadial { moments } => moments.mass,
            _ => self.ln_radial_factor(0).exp() * crate::special::sphere_surface(self.dimension),
        }
    }

    /// `ln ∫ ρ(t) t^{n-1+k} dt` for the named radial weights.
    fn ln_radial_factor(&self, k: u32) -> f64 {
        let n = self.dimension as u32;
        match self.region {
            Region::GaussianFullSpace => ln_gamma_half(n + k) - std::f64::consts::LN_2,
            Region::UnitBall => -((n + k) as f64).ln(),
            Region::SphericalShell { inner_radius } => {
                let p = (n + k) as i32;
                (-inner_radius.powi(p)).ln_1p() - (p as f64).ln()
            }
            Region::ExpRadial => ln_gamma_half(2 * (n + k)),
            _ => unreachable!("radial factor requested for a non-radial measure"),
        }
    }

    /// Tag stored in rule files; [`MeasureSpec::from_region_tag`] inverts it
    /// for the named regions.
    pub fn region_tag(&self) -> String {
        match &self.region {
            Region::ProductCube { alpha } => {
                if alpha.iter().all(|&a| a == 0.0) {
                    "cube".to_string()
                } else if alpha.iter().all(|&a| a == alpha[0]) {
                    format!("cube(alpha={})", alpha[0])
                } else {
                    let list: Vec<String> = alpha.iter().map(|a| a.to_string()).collect();
                    format!("cube(alpha={})", list.join(","))
                }
            }
            Region::GaussianFullSpace => "gaussian".to_string(),
            Region::UnitBall => "ball".to_string(),
            Region::SphericalShell { inner_radius } => format!("shell(r={inner_radius})"),
            Region::ExpRadial => "exp-radial".to_string(),
            Region::CustomProduct { .. } => "custom-product".to_string(),
            Region::CustomRadial { .. } => "custom-radial".to_string(),
        }
    }

    /// Rebuild a named measure from its region tag.
    pub fn from_region_tag(tag: &str, n: usize) -> Result<Self, MomentError> {
        let tag = tag.trim();
        let (name, args) = match tag.find('(') {
            Some(open) if tag.ends_with(')') => (&tag[..open], Some(&tag[open + 1..tag.len() - 1])),
            Some(_) => return Err(MomentError::UnknownRegion(tag.to_string())),
            None => (tag, None),
        };
        let value_of = |key: &str| -> Result<&str, MomentError> {
            args.and_then(|a| a.trim().strip_prefix(key))
                .and_then(|rest| rest.trim_start().strip_prefix('='))
                .map(str::trim)
                .ok_or_else(|| MomentError::UnknownRegion(tag.to_string()))
        };
        let parse_f64 = |s: &str| -> Result<f64, MomentError> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| MomentError::UnknownRegion(tag.to_string()))
        };
        match (name, args) {
            ("cube", None) => Self::cube(n),
            ("cube", Some(_)) => {
                let alphas = value_of("alpha")?
                    .split(',')
                    .map(parse_f64)
                    .collect::<Result<Vec<_>, _>>()?;
                match alphas.len() {
                    1 => Self::gegenbauer(n, alphas[0]),
                    len if len == n => Self::gegenbauer_axes(alphas),
                    len => Err(MomentError::AxisCount {
                        expected: n,
                        got: len,
                    }),
                }
            }
            ("gaussian", None) => Self::gaussian(n),
            ("ball", None) => Self::unit_ball(n),
            ("shell", Some(_)) => Self::shell(n, parse_f64(value_of("r")?)?),
            ("shell", None) => Self::shell(n, 0.0),
            ("exp-radial", None) => Self::exp_radial(n),
            ("custom-product", _) | ("custom-radial", _) => {
                Err(MomentError::NeedsExplicitMoments(tag.to_string()))
            }
            _ => Err(MomentError::UnknownRegion(tag.to_string())),
        }
    }
}

/// `∫_{U_n} x^α dσ = 2 ∏ Γ((α_i+1)/2) / Γ((n+|α|)/2)` when every `α_i` is
/// even, zero otherwise. Components past `alpha.len()` are zero.
///
/// # Panics
///
/// Panics if `n < 2` or `alpha.len() > n`.
pub fn surface_monomial_integral(n: usize, alpha: &[u32]) -> f64 {
    assert!(n >= 2, "sphere surface integrals need n >= 2");
    assert!(alpha.len() <= n, "multi-index longer than the dimension");
    if has_odd_component(alpha) {
        return 0.0;
    }
    ln_surface_monomial(n, alpha).exp()
}

fn ln_surface_monomial(n: usize, alpha: &[u32]) -> f64 {
    let zeros = (n - alpha.len()) as f64;
    let ln_half_gamma = ln_gamma_half(1);
    let mut acc = std::f64::consts::LN_2 + zeros * ln_half_gamma;
    for &a in alpha {
        acc += ln_gamma_half(a + 1);
    }
    acc - ln_gamma_half(n as u32 + total_degree(alpha))
}

/// Normalized even moment `m_{2k}` of `(1 - x²)^α` on `[-1, 1]`:
/// `B(k + 1/2, α + 1) / B(1/2, α + 1) = ∏_{j<k} (j + 1/2) / (j + α + 3/2)`.
pub fn gegenbauer_moment(alpha: f64, k: u32) -> f64 {
    (0..k)
        .map(|j| (j as f64 + 0.5) / (j as f64 + alpha + 1.5))
        .product()
}

/// `L(x⁴) - 3 L(x²)²` for the normalized `(1 - x²)^α` weight.
pub fn gegenbauer_fourth_defect(alpha: f64) -> f64 {
    let s = 2.0 * alpha + 3.0;
    -6.0 / (s * s * (2.0 * alpha + 5.0))
}

/// Normalized moments `(m0, m2, m4, m6)` of one axis of a product measure.
pub fn product_axis_moments(spec: &MeasureSpec, axis: usize) -> Result<[f64; 4], MomentError> {
    if axis >= spec.dimension {
        return Err(MomentError::AxisOutOfRange {
            axis,
            dimension: spec.dimension,
        });
    }
    match &spec.region {
        Region::ProductCube { alpha } => {
            let a = alpha[axis];
            Ok([
                1.0,
                gegenbauer_moment(a, 1),
                gegenbauer_moment(a, 2),
                gegenbauer_moment(a, 3),
            ])
        }
        Region::CustomProduct { axes } => Ok(axes[axis].normalized()),
        _ => Err(MomentError::WrongKind {
            expected: "product",
            got: spec.kind(),
        }),
    }
}

/// `(L(1), L(x1²), L(x1⁴), L(x1² x2²))` of a spherically symmetric measure,
/// unnormalized.
pub fn radial_moments(spec: &MeasureSpec) -> Result<RadialMoments, MomentError> {
    if let Region::CustomRadial { moments } = &spec.region {
        return Ok(*moments);
    }
    if !spec.is_spherical() {
        return Err(MomentError::WrongKind {
            expected: "spherically symmetric",
            got: spec.kind(),
        });
    }
    let oracle = MomentOracle::new(spec);
    let eval = |alpha: &[u32]| oracle.evaluate(alpha);
    Ok(RadialMoments {
        mass: eval(&[])?,
        second: eval(&[2])?,
        fourth: eval(&[4])?,
        mixed: eval(&[2, 2])?,
    })
}

/// Exact monomial integrals `L(x^α)` for a fixed measure.
#[derive(Debug, Clone)]
pub struct MomentOracle {
    spec: MeasureSpec,
    mass: f64,
    axes: Vec<[f64; 4]>,
}

impl MomentOracle {
    pub fn new(spec: &MeasureSpec) -> Self {
        let axes = if spec.is_product() {
            (0..spec.dimension)
                .map(|i| product_axis_moments(spec, i).expect("axis in range"))
                .collect()
        } else {
            Vec::new()
        };
        Self {
            spec: spec.clone(),
            mass: spec.mass(),
            axes,
        }
    }

    pub fn measure(&self) -> &MeasureSpec {
        &self.spec
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Highest total degree [`MomentOracle::evaluate`] answers.
    pub fn max_degree(&self) -> u32 {
        match self.spec.region {
            Region::CustomRadial { .. } => 5,
            _ => MAX_ORACLE_DEGREE,
        }
    }

    /// `L(x^α)`; `alpha` may omit trailing zero exponents.
    pub fn evaluate(&self, alpha: &[u32]) -> Result<f64, MomentError> {
        let n = self.spec.dimension;
        if alpha.len() > n {
            return Err(MomentError::IndexDimension {
                got: alpha.len(),
                dimension: n,
            });
        }
        let degree = total_degree(alpha);
        if degree > self.max_degree() {
            return Err(MomentError::DegreeUnavailable(degree));
        }
        if has_odd_component(alpha) {
            return Ok(0.0);
        }
        if self.spec.is_product() {
            let value = alpha
                .iter()
                .zip(&self.axes)
                .map(|(&a, m)| m[(a / 2) as usize])
                .product::<f64>();
            return Ok(self.mass * value);
        }
        if let Region::CustomRadial { moments } = &self.spec.region {
            let value = match degree {
                0 => moments.mass,
                2 => moments.second,
                4 if alpha.contains(&4) => moments.fourth,
                4 => moments.mixed,
                _ => unreachable!("odd or too-high degree handled above"),
            };
            return Ok(value);
        }
        Ok((self.spec.ln_radial_factor(degree) + ln_surface_monomial(n, alpha)).exp())
    }

    /// `Σ c_α L(x^α)` over the terms of a polynomial.
    pub fn integrate(&self, poly: &crate::polyparse::Polynomial) -> Result<f64, MomentError> {
        poly.terms()
            .iter()
            .map(|(alpha, c)| self.evaluate(alpha).map(|v| c * v))
            .sum()
    }
}

/// `π^{n/2}`.
pub fn pi_pow_half(n: usize) -> f64 {
    ln_pi_pow_half(n).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma_half, sphere_surface};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn surface_constant_is_v() {
        // V = 2π^{n/2} / Γ(n/2)
        assert!(rel(surface_monomial_integral(4, &[]), 2.0 * PI * PI) < 1e-15);
        for n in 2..=20 {
            let v = 2.0 * PI.powf(n as f64 / 2.0) / statrs::function::gamma::gamma(n as f64 / 2.0);
            assert!(rel(surface_monomial_integral(n, &[0; 2]), v) < 1e-13);
        }
    }

    #[test]
    fn surface_second_moment_is_v_over_n() {
        assert!(rel(surface_monomial_integral(4, &[2, 0, 0, 0]), PI * PI / 2.0) < 1e-15);
        for n in 2..=12 {
            let v = sphere_surface(n);
            let sum: f64 = (0..n)
                .map(|i| {
                    let mut alpha = vec![0; n];
                    alpha[i] = 2;
                    surface_monomial_integral(n, &alpha)
                })
                .sum();
            assert!(rel(sum, v) < 1e-14, "n={n}");
        }
    }

    #[test]
    fn surface_odd_is_zero() {
        assert_eq!(surface_monomial_integral(5, &[1]), 0.0);
        assert_eq!(surface_monomial_integral(5, &[2, 3, 0, 2]), 0.0);
    }

    #[test]
    fn surface_matches_circle_quadrature() {
        // On U_2, ∫ cos^a sin^b dθ by a fine trapezoid rule (exact for trig polynomials).
        let m = 64;
        for (a, b) in [(0, 0), (2, 0), (4, 2), (2, 2), (6, 0)] {
            let h = 2.0 * PI / m as f64;
            let sum: f64 = (0..m)
                .map(|k| {
                    let t = k as f64 * h;
                    t.cos().powi(a) * t.sin().powi(b)
                })
                .sum::<f64>()
                * h;
            let got = surface_monomial_integral(2, &[a as u32, b as u32]);
            assert!((got - sum).abs() < 1e-13, "{a},{b}: {got} vs {sum}");
        }
    }

    #[test]
    fn cube_half_weight_moments() {
        let spec = MeasureSpec::cube(4).unwrap();
        let m = product_axis_moments(&spec, 2).unwrap();
        let expected = [1.0, 1.0 / 3.0, 1.0 / 5.0, 1.0 / 7.0];
        for (g, e) in m.iter().zip(expected) {
            assert!((g - e).abs() < 1e-16);
        }
        assert!(matches!(
            product_axis_moments(&spec, 4),
            Err(MomentError::AxisOutOfRange { .. })
        ));
    }

    #[test]
    fn gegenbauer_alpha_zero_is_constant_weight() {
        let a = MeasureSpec::gegenbauer(5, 0.0).unwrap();
        let b = MeasureSpec::cube(5).unwrap();
        assert_eq!(
            product_axis_moments(&a, 0).unwrap(),
            product_axis_moments(&b, 0).unwrap()
        );
    }

    #[test]
    fn gegenbauer_moments_match_beta_oracle() {
        use statrs::function::beta::ln_beta;
        for alpha in [-0.5, 0.0, 0.5, 1.0, 2.0, 3.7] {
            for k in 1..=3u32 {
                let oracle =
                    (ln_beta(k as f64 + 0.5, alpha + 1.0) - ln_beta(0.5, alpha + 1.0)).exp();
                assert!(rel(gegenbauer_moment(alpha, k), oracle) < 1e-13);
            }
        }
    }

    #[test]
    fn gegenbauer_fourth_defect_against_beta_oracle() {
        use statrs::function::beta::ln_beta;
        for alpha in [0.0, 1.0, 2.0, -0.5, 4.25] {
            let m = |k: f64| (ln_beta(k + 0.5, alpha + 1.0) - ln_beta(0.5, alpha + 1.0)).exp();
            let oracle = m(2.0) - 3.0 * m(1.0).powi(2);
            assert!(rel(gegenbauer_fourth_defect(alpha), oracle) < 1e-12, "alpha={alpha}");
            assert!(gegenbauer_fourth_defect(alpha) < 0.0);
        }
        // The published closed form agrees at α = 0 only.
        let published = |a: f64| -6.0 / ((a / 2.0 + 3.0).powi(2) * (a / 2.0 + 5.0));
        assert!(rel(published(0.0), gegenbauer_fourth_defect(0.0)) < 1e-15);
        assert!(rel(published(1.0), gegenbauer_fourth_defect(1.0)) > 0.5);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            MeasureSpec::cube(3).unwrap_err(),
            MomentError::DimensionTooSmall(3)
        );
        assert!(matches!(
            MeasureSpec::gegenbauer(4, -1.0),
            Err(MomentError::InvalidAlpha(_))
        ));
        assert!(matches!(
            MeasureSpec::shell(4, 1.0),
            Err(MomentError::InvalidShellRadius(_))
        ));
        assert!(matches!(
            MeasureSpec::shell(4, -0.1),
            Err(MomentError::InvalidShellRadius(_))
        ));
        assert!(matches!(
            AxisMoments::from_raw([1.0, 1e-3, 0.3, 0.0, 0.2, 0.0, 0.1]),
            Err(MomentError::OddMomentNonzero { order: 1, .. })
        ));
        assert!(AxisMoments::from_raw([1.0, 1e-17, 1.0 / 3.0, 0.0, 0.2, 0.0, 1.0 / 7.0]).is_ok());
    }

    #[test]
    fn gaussian_closed_forms() {
        let spec = MeasureSpec::gaussian(4).unwrap();
        let r = radial_moments(&spec).unwrap();
        let pi2 = PI * PI;
        assert!(rel(r.mass, pi2) < 1e-14);
        assert!(rel(r.second, pi2 / 2.0) < 1e-14);
        assert!(rel(r.fourth, 3.0 * pi2 / 4.0) < 1e-14);
        assert!(rel(r.mixed, pi2 / 4.0) < 1e-14);
        let oracle = MomentOracle::new(&spec);
        // x1^2 x2^4: (√π/2)(3√π/4)π
        let v = oracle.evaluate(&[2, 4]).unwrap();
        assert!(rel(v, 3.0 * pi2 / 8.0) < 1e-14);
    }

    #[test]
    fn ball_closed_forms() {
        for n in 4..=12usize {
            let r = radial_moments(&MeasureSpec::unit_ball(n).unwrap()).unwrap();
            let mass = pi_pow_half(n) / gamma_half(n as u32 + 2);
            let nf = n as f64;
            assert!(rel(r.mass, mass) < 1e-13);
            assert!(rel(r.second / r.mass, 1.0 / (nf + 2.0)) < 1e-13);
            assert!(rel(r.mixed / r.mass, 1.0 / ((nf + 2.0) * (nf + 4.0))) < 1e-13);
            assert!(rel(r.fourth, 3.0 * r.mixed) < 1e-13);
        }
    }

    #[test]
    fn shell_with_zero_radius_is_ball() {
        for n in 4..=9 {
            let a = radial_moments(&MeasureSpec::shell(n, 0.0).unwrap()).unwrap();
            let b = radial_moments(&MeasureSpec::unit_ball(n).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn exp_radial_mass() {
        // mass = V Γ(n)
        for n in 4..=10usize {
            let spec = MeasureSpec::exp_radial(n).unwrap();
            let expected = sphere_surface(n) * statrs::function::gamma::gamma(n as f64);
            assert!(rel(spec.mass(), expected) < 1e-13);
        }
    }

    #[test]
    fn odd_multi_indices_are_exactly_zero() {
        let spec = MeasureSpec::exp_radial(6).unwrap();
        let oracle = MomentOracle::new(&spec);
        assert_eq!(oracle.evaluate(&[1, 2, 2]).unwrap(), 0.0);
        assert_eq!(oracle.evaluate(&[0, 0, 0, 0, 0, 5]).unwrap(), 0.0);
    }

    #[test]
    fn oracle_degree_limits() {
        let spec = MeasureSpec::cube(4).unwrap();
        let oracle = MomentOracle::new(&spec);
        assert!(matches!(
            oracle.evaluate(&[8]),
            Err(MomentError::DegreeUnavailable(8))
        ));
        assert!(matches!(
            oracle.evaluate(&[0, 0, 0, 0, 2]),
            Err(MomentError::IndexDimension { .. })
        ));
    }

    #[test]
    fn cube_negative_control_ratio() {
        let oracle = MomentOracle::new(&MeasureSpec::cube(5).unwrap());
        let ratio = oracle.evaluate(&[4]).unwrap() / oracle.evaluate(&[2, 2]).unwrap();
        assert!((ratio - 9.0 / 5.0).abs() < 1e-14);
    }

    #[test]
    fn custom_radial_identity_check() {
        let good = RadialMoments {
            mass: 2.0,
            second: 1.0,
            fourth: 1.5,
            mixed: 0.5,
        };
        assert!(MeasureSpec::custom_radial(5, good).is_ok());
        let bad = RadialMoments { fourth: 1.6, ..good };
        assert!(matches!(
            MeasureSpec::custom_radial(5, bad),
            Err(MomentError::RadialIdentity { .. })
        ));
        let oracle = MomentOracle::new(&MeasureSpec::custom_radial(5, good).unwrap());
        assert_eq!(oracle.evaluate(&[0, 0, 4]).unwrap(), 1.5);
        assert_eq!(oracle.evaluate(&[0, 2, 0, 2]).unwrap(), 0.5);
        assert_eq!(oracle.max_degree(), 5);
        assert!(oracle.evaluate(&[6]).is_err());
    }

    #[test]
    fn custom_product_normalizes() {
        let axis = AxisMoments::even(2.0, 2.0 / 3.0, 0.4, 2.0 / 7.0).unwrap();
        let spec = MeasureSpec::custom_product(vec![axis; 4]).unwrap();
        assert_eq!(spec.mass(), 16.0);
        let m = product_axis_moments(&spec, 1).unwrap();
        assert!((m[1] - 1.0 / 3.0).abs() < 1e-16);
        let oracle = MomentOracle::new(&spec);
        assert!(rel(oracle.evaluate(&[2, 2]).unwrap(), 16.0 / 9.0) < 1e-15);
    }

    #[test]
    fn region_tags_round_trip() {
        let specs = [
            MeasureSpec::cube(5).unwrap(),
            MeasureSpec::gegenbauer(5, 1.5).unwrap(),
            MeasureSpec::gegenbauer_axes(vec![0.0, 1.0, 2.0, 0.5]).unwrap(),
            MeasureSpec::gaussian(5).unwrap(),
            MeasureSpec::unit_ball(5).unwrap(),
            MeasureSpec::shell(5, 0.3).unwrap(),
            MeasureSpec::exp_radial(5).unwrap(),
        ];
        for spec in specs {
            let tag = spec.region_tag();
            let back = MeasureSpec::from_region_tag(&tag, spec.dimension()).unwrap();
            assert_eq!(back, spec, "{tag}");
        }
        assert!(matches!(
            MeasureSpec::from_region_tag("custom-radial", 5),
            Err(MomentError::NeedsExplicitMoments(_))
        ));
        assert!(MeasureSpec::from_region_tag("torus", 5).is_err());
    }
}
