//! Assembly of the fifth-degree rules.
//!
//! Both families start from the sphere rule `Q` scaled by a diagonal matrix
//! `T` and weighted by a free parameter `γ`:
//!
//! ```text
//! Q̃(f) = γA Σ [f(T a_r) + f(-T a_r)] + γB Σ [f(T b_j) + f(-T b_j)]
//! ```
//!
//! `T` is chosen so that `Q̃` reproduces every degree-4 moment except the
//! pure fourth powers (product case) or every degree-4 moment (spherical
//! case). The residual functional `L̃ = L - Q̃` then only has moments
//! `L̃(1)`, `L̃(x_i²)`, `L̃(x_i⁴)`, which a symmetric pair of points on each
//! axis plus the origin reproduce.
//!
//! All functionals are normalized to unit mass during construction; weights
//! are multiplied by the true mass at assembly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::moller_bound;
use crate::moments::{
    product_axis_moments, radial_moments, surface_monomial_integral, MeasureKind, MeasureSpec,
    MomentError, Region,
};
use crate::sphere_rule::{SphereRule, SphereRuleError};

/// Center weights with `|C| <= ZERO_CENTER_RTOL · mass` are dropped.
pub const ZERO_CENTER_RTOL: f64 = 1e-14;

/// Inflation applied when the strict `γ` inequality is the binding one.
pub const STRICT_INFLATION: f64 = 1e-9;

/// Relative threshold under which a product-case residual moment counts as 0.
const RESIDUAL_ZERO_RTOL: f64 = 1e-12;

/// Spherical measures are accepted when `L(x1⁴) = 3L(x1²x2²)` holds to this.
const SPHERICAL_IDENTITY_RTOL: f64 = 1e-9;

/// Slack on region membership tests (nodes land exactly on the boundary).
const REGION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error(transparent)]
    Sphere(#[from] SphereRuleError),
    #[error("{0} is not a product measure; use the spherical construction")]
    NotProduct(MeasureKind),
    #[error("{0} is not spherically symmetric; use the product construction")]
    NotSpherical(MeasureKind),
    #[error("gamma = {0} must be finite and positive")]
    InvalidGamma(f64),
    #[error("axes disagree on the sign of L(x^4) - 3 L(x^2)^2; no single gamma makes every axis solvable")]
    MixedResidualSigns,
    #[error("gamma = {gamma} is not admissible: {reason}")]
    GammaNotAdmissible { gamma: f64, reason: String },
    #[error(
        "axis {axis}: residual moments L~(x^2) = {second:e}, L~(x^4) = {fourth:e}; the construction needs L~(x_i^2) * L~(x_i^4) > 0 (or both zero)"
    )]
    SignMismatch { axis: usize, second: f64, fourth: f64 },
    #[error("nonpositive radicand {value:e} while scaling axis {axis}; the moments are inconsistent")]
    NonpositiveRadicand { axis: usize, value: f64 },
}

/// Outcome of [`select_gamma`].
#[derive(Debug, Clone, PartialEq)]
pub struct GammaChoice {
    pub gamma: f64,
    /// The admissibility inequalities that keep nodes inside the cube hold.
    pub in_region: bool,
    pub warnings: Vec<String>,
}

/// `c = L₁(x1²) / √L₁(x1²x2²) = √2 π^{n/4} (n+2) / (2 √Γ(n/2+2))`, the
/// factor with `Q̃(x_i²) = c √γ L(x_i²)` in the product case.
pub fn sphere_coupling(n: usize) -> f64 {
    let second = surface_monomial_integral(n, &[2]);
    let mixed = surface_monomial_integral(n, &[2, 2]);
    second / mixed.sqrt()
}

/// `1/c² = 2Γ(n/2+2) / (π^{n/2} (n+2)²)`: the `γ` at which `L̃(x²)`
/// vanishes in the product case.
pub fn critical_gamma(n: usize) -> f64 {
    let c = sphere_coupling(n);
    1.0 / (c * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DefectSign {
    Negative,
    Zero,
    Positive,
}

struct ProductAxes {
    second: Vec<f64>,
    fourth: Vec<f64>,
}

impl ProductAxes {
    fn of(measure: &MeasureSpec) -> Result<Self, ConstructionError> {
        if !measure.is_product() {
            return Err(ConstructionError::NotProduct(measure.kind()));
        }
        let mut second = Vec::with_capacity(measure.dimension());
        let mut fourth = Vec::with_capacity(measure.dimension());
        for axis in 0..measure.dimension() {
            let m = product_axis_moments(measure, axis)?;
            second.push(m[1]);
            fourth.push(m[2]);
        }
        Ok(Self { second, fourth })
    }

    fn defect(&self, axis: usize) -> f64 {
        self.fourth[axis] - 3.0 * self.second[axis].powi(2)
    }

    fn defect_sign(&self) -> Result<DefectSign, ConstructionError> {
        let signs: Vec<DefectSign> = (0..self.second.len())
            .map(|i| {
                let d = self.defect(i);
                if d.abs() <= RESIDUAL_ZERO_RTOL * self.second[i].powi(2) {
                    DefectSign::Zero
                } else if d < 0.0 {
                    DefectSign::Negative
                } else {
                    DefectSign::Positive
                }
            })
            .collect();
        if signs.iter().all(|&s| s == signs[0]) {
            Ok(signs[0])
        } else {
            Err(ConstructionError::MixedResidualSigns)
        }
    }
}

/// `γ` for the product construction.
///
/// Without an override this is the smallest `γ` that keeps every node in
/// the cube: `a_ii <= 1` and `0 < L̃(x_i⁴)/L̃(x_i²) <= 1`. When no such `γ`
/// exists (`L(x⁴) > 3L(x²)²` with an empty interval) the bound `a_ii <= 1`
/// is used and `in_region` is false.
pub fn select_gamma(
    measure: &MeasureSpec,
    gamma_override: Option<f64>,
) -> Result<GammaChoice, ConstructionError> {
    let axes = ProductAxes::of(measure)?;
    let n = measure.dimension();
    let critical = critical_gamma(n);
    let mixed_surface = surface_monomial_integral(n, &[2, 2]);
    let sign = axes.defect_sign()?;

    // a_ii <= 1  <=>  γ >= L(x_i²)² / L₁(x1²x2²)
    let region_lower = axes
        .second
        .iter()
        .map(|m2| m2 * m2 / mixed_surface)
        .fold(0.0_f64, f64::max);
    // L̃(x⁴)/L̃(x²) <= 1, written as a bound on γ relative to 1/c².
    let ratio_bound = |i: usize| -> f64 {
        let m2 = axes.second[i];
        critical * ((m2 - axes.defect(i)) / m2).powi(2)
    };

    if let Some(gamma) = gamma_override {
        return validate_override(gamma, sign, critical, region_lower, &axes, ratio_bound);
    }

    let mut warnings = Vec::new();
    let (gamma, in_region) = match sign {
        DefectSign::Negative => {
            let ratio_lower = (0..n).map(ratio_bound).fold(0.0_f64, f64::max);
            let lower = region_lower.max(ratio_lower);
            if critical >= lower {
                (critical * (1.0 + STRICT_INFLATION), true)
            } else {
                (lower, true)
            }
        }
        DefectSign::Zero => (critical, region_lower <= critical),
        DefectSign::Positive => {
            let upper = (0..n)
                .map(|i| {
                    if axes.defect(i) < axes.second[i] {
                        ratio_bound(i)
                    } else {
                        0.0
                    }
                })
                .fold(critical, f64::min);
            if region_lower < upper {
                (region_lower, true)
            } else {
                warnings.push(
                    "no gamma keeps every node inside the cube (L(x^4) > 3 L(x^2)^2); some points lie outside the region"
                        .to_string(),
                );
                (region_lower, false)
            }
        }
    };
    Ok(GammaChoice {
        gamma,
        in_region,
        warnings,
    })
}

fn validate_override(
    gamma: f64,
    sign: DefectSign,
    critical: f64,
    region_lower: f64,
    axes: &ProductAxes,
    ratio_bound: impl Fn(usize) -> f64,
) -> Result<GammaChoice, ConstructionError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(ConstructionError::InvalidGamma(gamma));
    }
    let not_admissible = |reason: String| ConstructionError::GammaNotAdmissible { gamma, reason };
    match sign {
        DefectSign::Negative if gamma <= critical => {
            return Err(not_admissible(format!(
                "L(x^4) < 3 L(x^2)^2 needs L~(x^2) < 0, i.e. gamma > {critical:e}"
            )))
        }
        DefectSign::Positive if gamma >= critical => {
            return Err(not_admissible(format!(
                "L(x^4) > 3 L(x^2)^2 needs L~(x^2) > 0, i.e. gamma < {critical:e}"
            )))
        }
        DefectSign::Zero if (gamma - critical).abs() > RESIDUAL_ZERO_RTOL * critical => {
            return Err(not_admissible(format!(
                "L(x^4) = 3 L(x^2)^2 needs L~(x^2) = 0, i.e. gamma = {critical:e}"
            )))
        }
        _ => {}
    }
    let n = axes.second.len();
    let ratio_ok = (0..n).all(|i| match sign {
        DefectSign::Negative => gamma >= ratio_bound(i) * (1.0 - REGION_TOL),
        DefectSign::Positive => gamma <= ratio_bound(i) * (1.0 + REGION_TOL),
        DefectSign::Zero => true,
    });
    let in_region = gamma >= region_lower * (1.0 - REGION_TOL) && ratio_ok;
    let warnings = if in_region {
        Vec::new()
    } else {
        vec![format!(
            "gamma = {gamma} violates the in-region conditions; some points lie outside the cube"
        )]
    };
    Ok(GammaChoice {
        gamma,
        in_region,
        warnings,
    })
}

/// `γ` zeroing `L̃(x²)` for a spherically symmetric measure:
/// `γ = L(x1²)² / L(x1²x2²) · 2Γ(n/2+2) / (π^{n/2} (n+2)²)` (normalized moments).
pub fn spherical_gamma(measure: &MeasureSpec) -> Result<f64, ConstructionError> {
    let moments = checked_radial(measure)?;
    let n = measure.dimension();
    Ok(moments.second * moments.second / moments.mixed * critical_gamma(n))
}

fn checked_radial(
    measure: &MeasureSpec,
) -> Result<crate::moments::RadialMoments, ConstructionError> {
    if !measure.is_spherical() {
        return Err(ConstructionError::NotSpherical(measure.kind()));
    }
    let moments = radial_moments(measure)?;
    if moments.identity_defect() > SPHERICAL_IDENTITY_RTOL {
        return Err(MomentError::RadialIdentity {
            fourth: moments.fourth,
            mixed: moments.mixed,
        }
        .into());
    }
    Ok(moments.normalized())
}

/// The scaled sphere part `Q̃`: nodes `±T a_r`, `±T b_j` (each `+` node
/// directly followed by its negation) with weights `γA·mass`, `γB·mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledSpherePart {
    pub scale_diag: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub weight_a: f64,
    pub weight_b: f64,
}

/// Diagonal of `T`.
///
/// Product: `a_ii = √(L(x_i²) / √(γ L₁(x1²x2²)))`.
/// Spherical: `a_ii = ⁴√(L(x1²x2²) / (γ L₁(x1²x2²)))`.
pub fn scale_diagonal(measure: &MeasureSpec, gamma: f64) -> Result<Vec<f64>, ConstructionError> {
    let n = measure.dimension();
    let mixed_surface = surface_monomial_integral(n, &[2, 2]);
    if measure.is_product() {
        let axes = ProductAxes::of(measure)?;
        let denom = (gamma * mixed_surface).sqrt();
        axes.second
            .iter()
            .enumerate()
            .map(|(axis, m2)| {
                let radicand = m2 / denom;
                positive_radicand(axis, radicand).map(f64::sqrt)
            })
            .collect()
    } else {
        let moments = checked_radial(measure)?;
        let radicand = moments.mixed / (gamma * mixed_surface);
        let a = positive_radicand(0, radicand)?.sqrt().sqrt();
        Ok(vec![a; n])
    }
}

fn positive_radicand(axis: usize, value: f64) -> Result<f64, ConstructionError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConstructionError::NonpositiveRadicand { axis, value })
    }
}

/// `Q̃` for `measure` at parameter `gamma`.
pub fn scaled_sphere_part(
    measure: &MeasureSpec,
    gamma: f64,
) -> Result<ScaledSpherePart, ConstructionError> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(ConstructionError::InvalidGamma(gamma));
    }
    let scale = scale_diagonal(measure, gamma)?;
    sphere_part_with_scale(measure, gamma, scale)
}

fn sphere_part_with_scale(
    measure: &MeasureSpec,
    gamma: f64,
    scale_diag: Vec<f64>,
) -> Result<ScaledSpherePart, ConstructionError> {
    let sphere = SphereRule::new(measure.dimension())?;
    let mass = measure.mass();
    let weight_a = gamma * sphere.weight_a * mass;
    let weight_b = gamma * sphere.weight_b * mass;
    let mut nodes = Vec::with_capacity(sphere.point_count());
    let mut weights = Vec::with_capacity(sphere.point_count());
    let mut push_orbit = |orbit: &[Vec<f64>], w: f64| {
        for direction in orbit {
            let x: Vec<f64> = direction.iter().zip(&scale_diag).map(|(d, s)| s * d).collect();
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            nodes.push(x);
            nodes.push(neg);
            weights.push(w);
            weights.push(w);
        }
    };
    if !sphere.a_orbit_vanishes() {
        push_orbit(&sphere.nodes_a, weight_a);
    }
    push_orbit(&sphere.nodes_b, weight_b);
    Ok(ScaledSpherePart {
        scale_diag,
        nodes,
        weights,
        weight_a,
        weight_b,
    })
}

/// Normalized moments of `L̃ = L - Q̃` that are not zero by symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMoments {
    /// `L̃(1) = 1 - γV`.
    pub total: f64,
    /// `L̃(x_i²)` per axis.
    pub second: Vec<f64>,
    /// `L̃(x_i⁴)` per axis.
    pub fourth: Vec<f64>,
    /// Absolute thresholds below which `second[i]` / `fourth[i]` count as zero.
    pub second_tol: Vec<f64>,
    pub fourth_tol: Vec<f64>,
    /// Largest `|L̃(x_i² x_k²)|` relative to `L(x_i² x_k²)`, i != k.
    pub mixed_defect: f64,
}

/// Residual moments of `L̃` at parameter `gamma`.
pub fn residual_moments(
    measure: &MeasureSpec,
    gamma: f64,
) -> Result<ResidualMoments, ConstructionError> {
    let n = measure.dimension();
    let sphere_total = surface_monomial_integral(n, &[]);
    let mixed_surface = surface_monomial_integral(n, &[2, 2]);
    let c = sphere_coupling(n);
    let total = 1.0 - gamma * sphere_total;
    let scale = scale_diagonal(measure, gamma)?;
    if measure.is_product() {
        let axes = ProductAxes::of(measure)?;
        let factor = 1.0 - c * gamma.sqrt();
        let second = axes.second.iter().map(|m2| m2 * factor).collect();
        let fourth = (0..n).map(|i| axes.defect(i)).collect();
        let mut mixed_defect = 0.0_f64;
        for i in 0..n {
            for k in i + 1..n {
                let exact = axes.second[i] * axes.second[k];
                let rule = gamma * (scale[i] * scale[k]).powi(2) * mixed_surface;
                mixed_defect = mixed_defect.max((exact - rule).abs() / exact);
            }
        }
        Ok(ResidualMoments {
            total,
            second,
            fourth,
            second_tol: axes.second.iter().map(|m| RESIDUAL_ZERO_RTOL * m).collect(),
            fourth_tol: axes
                .second
                .iter()
                .map(|m| RESIDUAL_ZERO_RTOL * m * m)
                .collect(),
            mixed_defect,
        })
    } else {
        let m = checked_radial(measure)?;
        let second = m.second - c * (gamma * m.mixed).sqrt();
        let fourth = m.fourth - 3.0 * m.mixed;
        let rule_mixed = gamma * scale[0].powi(4) * mixed_surface;
        Ok(ResidualMoments {
            total,
            second: vec![second; n],
            fourth: vec![fourth; n],
            second_tol: vec![RESIDUAL_ZERO_RTOL * m.second; n],
            fourth_tol: vec![SPHERICAL_IDENTITY_RTOL * m.fourth; n],
            mixed_defect: (m.mixed - rule_mixed).abs() / m.mixed,
        })
    }
}

/// One symmetric pair `±v e_i`, each point carrying `weight`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisPair {
    pub magnitude: f64,
    pub weight: f64,
}

/// Degree-5 rule for `L̃`: symmetric axis pairs plus a center weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRule {
    /// `None` for axes whose residual moments both vanish.
    pub axes: Vec<Option<AxisPair>>,
    pub center: f64,
}

/// Solves `Σ_j w_ij v_ij^m = L̃(x_i^m)` (m = 1..5) and the mass equation:
/// `v = √(L̃(x⁴)/L̃(x²))`, `w = L̃(x²)² / (2 L̃(x⁴))`, `C = L̃(1) - Σ 2w`.
pub fn solve_residual(residual: &ResidualMoments) -> Result<ResidualRule, ConstructionError> {
    let mut center = residual.total;
    let mut axes = Vec::with_capacity(residual.second.len());
    for (axis, (&second, &fourth)) in residual.second.iter().zip(&residual.fourth).enumerate() {
        let second_zero = second.abs() <= residual.second_tol[axis];
        let fourth_zero = fourth.abs() <= residual.fourth_tol[axis];
        if second_zero && fourth_zero {
            axes.push(None);
            continue;
        }
        if second_zero || fourth_zero || second * fourth < 0.0 {
            return Err(ConstructionError::SignMismatch {
                axis,
                second,
                fourth,
            });
        }
        let magnitude = (fourth / second).sqrt();
        let weight = second * second / (2.0 * fourth);
        center -= 2.0 * weight;
        axes.push(Some(AxisPair { magnitude, weight }));
    }
    Ok(ResidualRule { axes, center })
}

/// A cubature rule as an explicit weighted point set.
#[derive(Debug, Clone, PartialEq)]
pub struct CubatureRule {
    pub dimension: usize,
    /// Region tag (see [`MeasureSpec::region_tag`]).
    pub region: String,
    pub declared_degree: u32,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub gamma: f64,
    /// Diagonal of the scaling matrix; empty for rules loaded from files.
    pub scale_diag: Vec<f64>,
    pub mass: f64,
    pub points_in_region: bool,
    pub has_negative_weights: bool,
    pub attains_moller_bound: bool,
    /// The center weight was below the zero threshold and dropped.
    pub center_dropped: bool,
    pub warnings: Vec<String>,
}

impl CubatureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn node_in_region(region: &Region, x: &[f64]) -> bool {
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    match region {
        Region::ProductCube { .. } | Region::CustomProduct { .. } => {
            x.iter().all(|v| v.abs() <= 1.0 + REGION_TOL)
        }
        Region::UnitBall => norm2 <= 1.0 + REGION_TOL,
        Region::SphericalShell { inner_radius } => {
            norm2 <= 1.0 + REGION_TOL && norm2 >= inner_radius * inner_radius - REGION_TOL
        }
        Region::GaussianFullSpace | Region::ExpRadial | Region::CustomRadial { .. } => true,
    }
}

fn assemble(
    measure: &MeasureSpec,
    declared_degree: u32,
    gamma: f64,
    sphere: ScaledSpherePart,
    residual: ResidualRule,
    mut warnings: Vec<String>,
) -> Result<CubatureRule, ConstructionError> {
    let n = measure.dimension();
    let mass = measure.mass();
    let ScaledSpherePart {
        scale_diag,
        mut nodes,
        mut weights,
        ..
    } = sphere;
    for (axis, pair) in residual.axes.iter().enumerate() {
        if let Some(AxisPair { magnitude, weight }) = *pair {
            for sign in [1.0, -1.0] {
                let mut x = vec![0.0; n];
                x[axis] = sign * magnitude;
                nodes.push(x);
                weights.push(weight * mass);
            }
        }
    }
    let center_dropped = residual.center.abs() <= ZERO_CENTER_RTOL;
    if !center_dropped {
        nodes.push(vec![0.0; n]);
        weights.push(residual.center * mass);
    }

    let outside: Vec<bool> = nodes.iter().map(|x| !node_in_region(measure.region(), x)).collect();
    let points_in_region = !outside.iter().any(|&o| o);
    let center_outside = !center_dropped && outside[outside.len() - 1];
    if center_outside {
        warnings.push("origin outside region".to_string());
    }
    let others = outside.iter().filter(|&&o| o).count() - usize::from(center_outside);
    if others > 0 {
        warnings.push(format!("{others} nodes lie outside the integration region"));
    }
    let attains_moller_bound = moller_bound(n, declared_degree)
        .map(|b| nodes.len() as u64 == b)
        .unwrap_or(false);
    Ok(CubatureRule {
        dimension: n,
        region: measure.region_tag(),
        declared_degree,
        has_negative_weights: weights.iter().any(|&w| w < 0.0),
        nodes,
        weights,
        gamma,
        scale_diag,
        mass,
        points_in_region,
        attains_moller_bound,
        center_dropped,
        warnings,
    })
}

/// Degree-5 rule with at most `n² + 5n + 3` points for a product measure.
pub fn build_product_rule(
    measure: &MeasureSpec,
    gamma_override: Option<f64>,
) -> Result<CubatureRule, ConstructionError> {
    let choice = select_gamma(measure, gamma_override)?;
    let sphere = scaled_sphere_part(measure, choice.gamma)?;
    let residual = residual_moments(measure, choice.gamma)?;
    let solved = solve_residual(&residual)?;
    assemble(measure, 5, choice.gamma, sphere, solved, choice.warnings)
}

/// Degree-5 rule with `n² + 3n + 3` points (`n² + n + 1` at `n = 7`) for a
/// spherically symmetric measure.
pub fn build_spherical_rule(measure: &MeasureSpec) -> Result<CubatureRule, ConstructionError> {
    let gamma = spherical_gamma(measure)?;
    let sphere = scaled_sphere_part(measure, gamma)?;
    let residual = residual_moments(measure, gamma)?;
    let solved = solve_residual(&residual)?;
    debug_assert!(solved.axes.iter().all(Option::is_none));
    assemble(measure, 5, gamma, sphere, solved, Vec::new())
}

/// Degree-3 rule `Q̃ + (1 - γV) f(0)` with `γ = Γ(n/2+1) / (π^{n/2} (n+2))`,
/// the `γ` at which `L̃(x_i²)` vanishes.
pub fn build_degree3_rule(measure: &MeasureSpec) -> Result<CubatureRule, ConstructionError> {
    let n = measure.dimension();
    let gamma = critical_gamma(n);
    let mixed_surface = surface_monomial_integral(n, &[2, 2]);
    let seconds: Vec<f64> = if measure.is_product() {
        ProductAxes::of(measure)?.second
    } else {
        let m = radial_moments(measure)?.normalized();
        vec![m.second; n]
    };
    let denom = (gamma * mixed_surface).sqrt();
    let scale = seconds
        .iter()
        .enumerate()
        .map(|(axis, m2)| positive_radicand(axis, m2 / denom).map(f64::sqrt))
        .collect::<Result<Vec<_>, _>>()?;
    let sphere = sphere_part_with_scale(measure, gamma, scale)?;
    let total = 1.0 - gamma * surface_monomial_integral(n, &[]);
    let residual = ResidualRule {
        axes: vec![None; n],
        center: total,
    };
    assemble(measure, 3, gamma, sphere, residual, Vec::new())
}

/// Product measures go through [`build_product_rule`], spherically
/// symmetric ones through [`build_spherical_rule`].
pub fn build_rule(
    measure: &MeasureSpec,
    gamma_override: Option<f64>,
) -> Result<CubatureRule, ConstructionError> {
    if measure.is_product() {
        build_product_rule(measure, gamma_override)
    } else {
        build_spherical_rule(measure)
    }
}

#[derive(Debug, Error)]
pub enum RuleFileError {
    #[error("cannot read or write rule file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed rule file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent rule file: {0}")]
    Inconsistent(String),
}

/// On-disk layout of a rule.
#[derive(Debug, Serialize, Deserialize)]
struct RuleFile {
    dimension: usize,
    degree: u32,
    region: String,
    gamma: f64,
    mass: f64,
    points_in_region: bool,
    has_negative_weights: bool,
    attains_moller_bound: bool,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl CubatureRule {
    /// JSON with fixed field order; floats in shortest round-trip form.
    pub fn to_json(&self) -> String {
        let file = RuleFile {
            dimension: self.dimension,
            degree: self.declared_degree,
            region: self.region.clone(),
            gamma: self.gamma,
            mass: self.mass,
            points_in_region: self.points_in_region,
            has_negative_weights: self.has_negative_weights,
            attains_moller_bound: self.attains_moller_bound,
            nodes: self.nodes.clone(),
            weights: self.weights.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("rule is serializable");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, RuleFileError> {
        let file: RuleFile = serde_json::from_str(text)?;
        if file.nodes.len() != file.weights.len() {
            return Err(RuleFileError::Inconsistent(format!(
                "{} nodes but {} weights",
                file.nodes.len(),
                file.weights.len()
            )));
        }
        if let Some((i, node)) = file
            .nodes
            .iter()
            .enumerate()
            .find(|(_, x)| x.len() != file.dimension)
        {
            return Err(RuleFileError::Inconsistent(format!(
                "node {i} has {} coordinates, expected {}",
                node.len(),
                file.dimension
            )));
        }
        let finite = file.nodes.iter().flatten().chain(&file.weights).all(|v| v.is_finite());
        if !finite || !file.mass.is_finite() {
            return Err(RuleFileError::Inconsistent("non-finite value".into()));
        }
        Ok(Self {
            dimension: file.dimension,
            region: file.region,
            declared_degree: file.degree,
            has_negative_weights: file.has_negative_weights,
            nodes: file.nodes,
            weights: file.weights,
            gamma: file.gamma,
            scale_diag: Vec::new(),
            mass: file.mass,
            points_in_region: file.points_in_region,
            attains_moller_bound: file.attains_moller_bound,
            center_dropped: false,
            warnings: Vec::new(),
        })
    }

    /// One row per node (`x1..xn,weight`) after a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dimension).map(|i| format!("x{i}")).collect();
        out.push_str(&header.join(","));
        out.push_str(",weight\n");
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            for v in x {
                out.push_str(&format!("{v:?},"));
            }
            out.push_str(&format!("{w:?}\n"));
        }
        out
    }

    pub fn load(path: &Path) -> Result<Self, RuleFileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::MomentOracle;
    use crate::multi_index::monomials_up_to;
    use crate::special::{gamma_half, sphere_surface};
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    fn apply(rule: &CubatureRule, alpha: &[u32]) -> f64 {
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| w * alpha.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product::<f64>())
            .sum()
    }

    #[test]
    fn coupling_matches_closed_form() {
        for n in 4..=14usize {
            let nf = n as f64;
            let closed = 2f64.sqrt() * PI.powf(nf / 4.0) * (nf + 2.0)
                / (2.0 * gamma_half(n as u32 + 4).sqrt());
            assert!(close(sphere_coupling(n), closed, 1e-13), "n={n}");
            let g3 = gamma_half(n as u32 + 2) / (PI.powf(nf / 2.0) * (nf + 2.0));
            assert!(close(critical_gamma(n), g3, 1e-13));
        }
    }

    #[test]
    fn cube_gamma_and_unit_scale() {
        for n in 4..=12usize {
            let m = MeasureSpec::cube(n).unwrap();
            let choice = select_gamma(&m, None).unwrap();
            let expected = 2.0 * gamma_half(n as u32 + 4) / (9.0 * PI.powf(n as f64 / 2.0));
            assert!(close(choice.gamma, expected, 1e-13), "n={n}");
            assert!(choice.in_region);
            for a in scale_diagonal(&m, choice.gamma).unwrap() {
                assert!((a - 1.0).abs() < 1e-12);
            }
        }
        let g = select_gamma(&MeasureSpec::cube(4).unwrap(), None).unwrap().gamma;
        assert!(close(g * sphere_surface(4), 8.0 / 3.0, 1e-14));
    }

    #[test]
    fn cube_residuals_and_solution() {
        let m = MeasureSpec::cube(4).unwrap();
        let g = select_gamma(&m, None).unwrap().gamma;
        let r = residual_moments(&m, g).unwrap();
        assert!(close(r.fourth[0], -2.0 / 15.0, 1e-14));
        assert!(close(r.second[0], -1.0 / 3.0, 1e-13));
        assert!(r.mixed_defect < 1e-13);
        let s = solve_residual(&r).unwrap();
        let pair = s.axes[0].unwrap();
        assert!(close(pair.magnitude, 90f64.sqrt() / 15.0, 1e-13));
        assert!(close(pair.weight, -5.0 / 12.0, 1e-13));
        assert!(close(s.center, 5.0 / 3.0, 1e-13));
    }

    #[test]
    fn override_equal_to_selection_is_identical() {
        let m = MeasureSpec::gegenbauer(6, 1.5).unwrap();
        let a = build_product_rule(&m, None).unwrap();
        let b = build_product_rule(&m, Some(a.gamma)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn override_validation() {
        let m = MeasureSpec::cube(5).unwrap();
        assert!(matches!(
            build_product_rule(&m, Some(-1.0)),
            Err(ConstructionError::InvalidGamma(_))
        ));
        assert!(matches!(
            build_product_rule(&m, Some(critical_gamma(5) * 0.5)),
            Err(ConstructionError::GammaNotAdmissible { .. })
        ));
        // Admissible but pushes the sphere part outside the cube.
        let rule = build_product_rule(&m, Some(critical_gamma(5) * 1.01)).unwrap();
        assert!(!rule.points_in_region);
        assert!(!rule.warnings.is_empty());
    }

    #[test]
    fn gamma_family_stays_exact() {
        let m = MeasureSpec::cube(5).unwrap();
        let oracle = MomentOracle::new(&m);
        let base = select_gamma(&m, None).unwrap().gamma;
        for factor in [1.0, 1.3, 2.0, 5.0] {
            let rule = build_product_rule(&m, Some(base * factor)).unwrap();
            for alpha in monomials_up_to(5, 5) {
                let exact = oracle.evaluate(&alpha).unwrap();
                let got = apply(&rule, &alpha);
                assert!((got - exact).abs() < 1e-10, "{factor} {alpha:?}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn product_rule_rejects_radial() {
        let g = MeasureSpec::gaussian(5).unwrap();
        assert!(matches!(
            build_product_rule(&g, None),
            Err(ConstructionError::NotProduct(_))
        ));
        let c = MeasureSpec::cube(5).unwrap();
        assert!(matches!(
            build_spherical_rule(&c),
            Err(ConstructionError::NotSpherical(_))
        ));
    }

    #[test]
    fn sign_mismatch_is_reported() {
        let r = ResidualMoments {
            total: 0.5,
            second: vec![0.1; 4],
            fourth: vec![-0.1; 4],
            second_tol: vec![1e-14; 4],
            fourth_tol: vec![1e-14; 4],
            mixed_defect: 0.0,
        };
        let err = solve_residual(&r).unwrap_err();
        assert!(matches!(err, ConstructionError::SignMismatch { axis: 0, .. }));
        assert!(err.to_string().contains("L~(x_i^2) * L~(x_i^4) > 0"));
    }

    #[test]
    fn gaussian_matches_lu_formula() {
        for n in 4..=12usize {
            let nf = n as f64;
            let m = MeasureSpec::gaussian(n).unwrap();
            let rule = build_spherical_rule(&m).unwrap();
            let pn = PI.powf(nf / 2.0);
            let center = *rule.weights.last().unwrap();
            assert!(close(center, 2.0 * pn / (nf + 2.0), 1e-12));
            assert!(close(rule.scale_diag[0], (nf / 2.0 + 1.0).sqrt(), 1e-12));
            let wb = 2.0 * (nf - 1.0).powi(2) * pn / ((nf + 1.0).powi(2) * (nf + 2.0).powi(2));
            let b_index = if n == 7 { 0 } else { 2 * (n + 1) };
            assert!(close(rule.weights[b_index], wb, 1e-12));
            if n != 7 {
                let wa = nf * nf * (7.0 - nf) * pn / (2.0 * (nf + 1.0).powi(2) * (nf + 2.0).powi(2));
                assert!(close(rule.weights[0], wa, 1e-12));
            }
        }
    }

    #[test]
    fn exp_radial_gamma_and_scale() {
        for n in 4..=10usize {
            let nf = n as f64;
            let m = MeasureSpec::exp_radial(n).unwrap();
            let g = spherical_gamma(&m).unwrap();
            let expected = (nf + 1.0) * gamma_half(n as u32 + 2)
                / (PI.powf(nf / 2.0) * (nf + 2.0) * (nf + 3.0));
            assert!(close(g, expected, 1e-12));
            let a = scale_diagonal(&m, g).unwrap()[0];
            assert!(close(a, ((nf + 2.0) * (nf + 3.0)).sqrt(), 1e-12));
        }
    }

    #[test]
    fn ball_gamma_and_scale() {
        for n in 4..=10usize {
            let nf = n as f64;
            let m = MeasureSpec::unit_ball(n).unwrap();
            let g = spherical_gamma(&m).unwrap();
            let expected = 2.0 * (nf + 4.0) * gamma_half(n as u32 + 4)
                / ((nf + 2.0).powi(3) * PI.powf(nf / 2.0));
            assert!(close(g, expected, 1e-12));
            let rule = build_spherical_rule(&m).unwrap();
            assert!(close(rule.scale_diag[0], ((nf + 2.0) / (nf + 4.0)).sqrt(), 1e-12));
            assert!(rule.points_in_region);
        }
    }

    #[test]
    fn spherical_residuals_vanish() {
        for m in [
            MeasureSpec::gaussian(6).unwrap(),
            MeasureSpec::shell(6, 0.4).unwrap(),
            MeasureSpec::exp_radial(6).unwrap(),
        ] {
            let g = spherical_gamma(&m).unwrap();
            let r = residual_moments(&m, g).unwrap();
            let scale = radial_moments(&m).unwrap().normalized();
            assert!(r.second[0].abs() < 1e-14 * scale.second);
            assert!(r.fourth[0].abs() < 1e-13 * scale.fourth);
            // L̃(x⁴) vanishes for any γ by spherical symmetry.
            let r2 = residual_moments(&m, 2.0 * g).unwrap();
            assert!(r2.fourth[0].abs() < 1e-13 * scale.fourth);
            assert!(r.mixed_defect < 1e-13);
        }
    }

    #[test]
    fn shell_flags_origin() {
        let m = MeasureSpec::shell(5, 0.5).unwrap();
        let rule = build_spherical_rule(&m).unwrap();
        assert!(!rule.points_in_region);
        assert!(rule.warnings.iter().any(|w| w == "origin outside region"));
    }

    #[test]
    fn counts_and_ordering() {
        let rule = build_product_rule(&MeasureSpec::cube(4).unwrap(), None).unwrap();
        assert_eq!(rule.len(), 39);
        assert!(close(rule.weight_sum(), 1.0, 1e-13));
        // a-orbit first, node followed by its negation.
        for k in (0..2 * 15).step_by(2) {
            let neg: Vec<f64> = rule.nodes[k].iter().map(|v| -v).collect();
            assert_eq!(rule.nodes[k + 1], neg);
        }
        assert!(rule.nodes.last().unwrap().iter().all(|&v| v == 0.0));
        let seven = build_product_rule(&MeasureSpec::cube(7).unwrap(), None).unwrap();
        assert_eq!(seven.len(), 71);
        let gauss7 = build_spherical_rule(&MeasureSpec::gaussian(7).unwrap()).unwrap();
        assert_eq!(gauss7.len(), 57);
        assert!(gauss7.attains_moller_bound);
    }

    #[test]
    fn degree3_rule_center_and_mass() {
        let m = MeasureSpec::cube(6).unwrap();
        let rule = build_degree3_rule(&m).unwrap();
        assert_eq!(rule.declared_degree, 3);
        assert!(close(rule.weight_sum(), 1.0, 1e-13));
        let g = MeasureSpec::gaussian(6).unwrap();
        let r3 = build_degree3_rule(&g).unwrap();
        let r5 = build_spherical_rule(&g).unwrap();
        assert!(close(r3.gamma, r5.gamma, 1e-13));
    }

    #[test]
    fn gaussian_like_custom_product_uses_critical_gamma() {
        // 1-D moments of exp(-x²)/√π: 1, 1/2, 3/4, 15/8.
        let axis = crate::moments::AxisMoments::even(1.0, 0.5, 0.75, 1.875).unwrap();
        let m = MeasureSpec::custom_product(vec![axis; 5]).unwrap();
        let rule = build_product_rule(&m, None).unwrap();
        assert!(close(rule.gamma, critical_gamma(5), 1e-14));
        assert_eq!(rule.len(), 5 * 5 + 3 * 5 + 3);
        let oracle = MomentOracle::new(&m);
        for alpha in monomials_up_to(5, 5) {
            let exact = oracle.evaluate(&alpha).unwrap();
            assert!((apply(&rule, &alpha) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_axis_signs_rejected() {
        let neg = crate::moments::AxisMoments::even(1.0, 1.0 / 3.0, 0.2, 1.0 / 7.0).unwrap();
        let pos = crate::moments::AxisMoments::even(1.0, 0.1, 0.05, 0.03).unwrap();
        let m = MeasureSpec::custom_product(vec![neg, neg, pos, pos]).unwrap();
        assert!(matches!(
            select_gamma(&m, None),
            Err(ConstructionError::MixedResidualSigns)
        ));
    }

    #[test]
    fn heavy_tailed_axes_still_build() {
        // m4 > 3 m2²: residual fourth moment positive.
        let pos = crate::moments::AxisMoments::even(1.0, 0.1, 0.05, 0.03).unwrap();
        let m = MeasureSpec::custom_product(vec![pos; 4]).unwrap();
        let choice = select_gamma(&m, None).unwrap();
        assert!(choice.gamma < critical_gamma(4));
        let rule = build_product_rule(&m, None).unwrap();
        let oracle = MomentOracle::new(&m);
        for alpha in monomials_up_to(4, 5) {
            let exact = oracle.evaluate(&alpha).unwrap();
            assert!((apply(&rule, &alpha) - exact).abs() < 1e-10, "{alpha:?}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let rule = build_spherical_rule(&MeasureSpec::shell(6, 0.3).unwrap()).unwrap();
        let text = rule.to_json();
        let back = CubatureRule::from_json(&text).unwrap();
        assert_eq!(back.nodes, rule.nodes);
        assert_eq!(back.weights, rule.weights);
        assert_eq!(back.to_json(), text);
        let keys = [
            "\"dimension\"", "\"degree\"", "\"region\"", "\"gamma\"", "\"mass\"",
            "\"points_in_region\"", "\"has_negative_weights\"", "\"attains_moller_bound\"",
            "\"nodes\"", "\"weights\"",
        ];
        let mut last = 0;
        for key in keys {
            let at = text.find(key).unwrap();
            assert!(at >= last, "{key} out of order");
            last = at;
        }
    }

    #[test]
    fn json_rejects_inconsistent_files() {
        let bad = r#"{"dimension":2,"degree":5,"region":"cube","gamma":1,"mass":1,
            "points_in_region":true,"has_negative_weights":false,"attains_moller_bound":false,
            "nodes":[[0,0]],"weights":[1,2]}"#;
        assert!(matches!(
            CubatureRule::from_json(bad),
            Err(RuleFileError::Inconsistent(_))
        ));
        assert!(matches!(
            CubatureRule::from_json("{"),
            Err(RuleFileError::Json(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let rule = build_product_rule(&MeasureSpec::cube(4).unwrap(), None).unwrap();
        let csv = rule.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x1,x2,x3,x4,weight");
        assert_eq!(lines.count(), 39);
    }
}
