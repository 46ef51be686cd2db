//! Mysovskikh's degree-5 cubature formula on the unit sphere surface `U_n`:
//!
//! ```text
//! ∫_{U_n} f dσ ≈ A Σ_{r=1}^{n+1} [f(a_r) + f(-a_r)] + B Σ_{j=1}^{n(n+1)/2} [f(b_j) + f(-b_j)]
//! ```
//!
//! The `a_r` are the vertices of a regular simplex inscribed in the sphere
//! and the `b_j` the normalized midpoints of its edges.

use thiserror::Error;

use crate::special::sphere_surface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SphereRuleError {
    #[error("the degree-5 sphere rule needs n >= 4, got n = {0}")]
    DimensionTooSmall(usize),
}

/// Nodes and weights of the sphere rule. Each node stands for the pair
/// `±node`; both signs carry the same weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dimension: usize,
    /// Simplex vertices `a_1..a_{n+1}`.
    pub nodes_a: Vec<Vec<f64>>,
    /// Edge midpoints `b_j` for pairs `k < l`, in lexicographic order.
    pub nodes_b: Vec<Vec<f64>>,
    pub weight_a: f64,
    pub weight_b: f64,
    /// Surface content `V` of `U_n`.
    pub surface: f64,
}

fn check(n: usize) -> Result<(), SphereRuleError> {
    if n < 4 {
        Err(SphereRuleError::DimensionTooSmall(n))
    } else {
        Ok(())
    }
}

/// Unit vectors, one per node pair.
pub type Directions = Vec<Vec<f64>>;

/// Simplex vertices `a_r` (r = 1..=n+1) and edge directions `b_j`.
pub fn mysovskikh_nodes(n: usize) -> Result<(Directions, Directions), SphereRuleError> {
    check(n)?;
    let nf = n as f64;
    let a: Vec<Vec<f64>> = (1..=n + 1)
        .map(|r| {
            (1..=n)
                .map(|i| {
                    let (i_f, r_f) = (i as f64, r as f64);
                    if i < r {
                        -((nf + 1.0) / (nf * (nf - i_f + 2.0) * (nf - i_f + 1.0))).sqrt()
                    } else if i == r {
                        ((nf + 1.0) * (nf - r_f + 1.0) / (nf * (nf - r_f + 2.0))).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let scale = (nf / (2.0 * (nf - 1.0))).sqrt();
    let mut b = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..=n {
        for l in k + 1..=n {
            b.push(
                a[k].iter()
                    .zip(&a[l])
                    .map(|(x, y)| scale * (x + y))
                    .collect(),
            );
        }
    }
    Ok((a, b))
}

/// Weights `(A, B)`; `A` is exactly zero at `n = 7`.
pub fn mysovskikh_weights(n: usize) -> Result<(f64, f64), SphereRuleError> {
    check(n)?;
    let v = sphere_surface(n);
    let nf = n as f64;
    let np1 = nf + 1.0;
    let a = if n == 7 {
        0.0
    } else {
        nf * (7.0 - nf) * v / (2.0 * np1 * np1 * (nf + 2.0))
    };
    let b = 2.0 * (nf - 1.0).powi(2) * v / (nf * np1 * np1 * (nf + 2.0));
    Ok((a, b))
}

impl SphereRule {
    pub fn new(n: usize) -> Result<Self, SphereRuleError> {
        let (nodes_a, nodes_b) = mysovskikh_nodes(n)?;
        let (weight_a, weight_b) = mysovskikh_weights(n)?;
        Ok(Self {
            dimension: n,
            nodes_a,
            nodes_b,
            weight_a,
            weight_b,
            surface: sphere_surface(n),
        })
    }

    /// `A < 0`, which happens for `n > 7`.
    pub fn has_negative_weights(&self) -> bool {
        self.weight_a < 0.0
    }

    /// The `a`-orbit carries no weight (only at `n = 7`).
    pub fn a_orbit_vanishes(&self) -> bool {
        self.dimension == 7
    }

    /// Number of distinct nodes with nonzero weight.
    pub fn point_count(&self) -> usize {
        let a = if self.a_orbit_vanishes() { 0 } else { 2 * self.nodes_a.len() };
        a + 2 * self.nodes_b.len()
    }

    /// Apply the rule to `f`, pairing `f(x) + f(-x)` before accumulating.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        let mut neg = vec![0.0; self.dimension];
        let mut pair_sum = |nodes: &[Vec<f64>]| -> f64 {
            nodes
                .iter()
                .map(|x| {
                    for (dst, src) in neg.iter_mut().zip(x) {
                        *dst = -src;
                    }
                    f(x) + f(&neg)
                })
                .sum()
        };
        let a_part = if self.a_orbit_vanishes() { 0.0 } else { pair_sum(&self.nodes_a) };
        let b_part = pair_sum(&self.nodes_b);
        self.weight_a * a_part + self.weight_b * b_part
    }

    /// Rule applied to the monomial `x^α`.
    pub fn integrate_monomial(&self, alpha: &[u32]) -> f64 {
        self.integrate(|x| {
            alpha
                .iter()
                .zip(x)
                .map(|(&e, &xi)| xi.powi(e as i32))
                .product()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::surface_monomial_integral;
    use crate::multi_index::{monomials_up_to, total_degree};

    #[test]
    fn first_vertex_is_unit_axis() {
        let (a, _) = mysovskikh_nodes(4).unwrap();
        assert!((a[0][0] - 1.0).abs() < 1e-15);
        assert_eq!(&a[0][1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn all_nodes_are_unit_vectors() {
        for n in 4..=12 {
            let (a, b) = mysovskikh_nodes(n).unwrap();
            assert_eq!(a.len(), n + 1);
            assert_eq!(b.len(), n * (n + 1) / 2);
            for x in a.iter().chain(&b) {
                let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12, "n={n}: {norm}");
            }
        }
    }

    #[test]
    fn simplex_vertices_have_equal_inner_products() {
        // Regular simplex: <a_k, a_l> = -1/n for k != l.
        let n = 6;
        let (a, _) = mysovskikh_nodes(n).unwrap();
        for k in 0..=n {
            for l in k + 1..=n {
                let dot: f64 = a[k].iter().zip(&a[l]).map(|(x, y)| x * y).sum();
                assert!((dot + 1.0 / n as f64).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn weights_reproduce_surface() {
        for n in 4..=12 {
            let (a, b) = mysovskikh_weights(n).unwrap();
            let nf = n as f64;
            let v = sphere_surface(n);
            let total = 2.0 * (nf + 1.0) * a + nf * (nf + 1.0) * b;
            assert!((total - v).abs() < 1e-12 * v, "n={n}");
        }
    }

    #[test]
    fn weight_signs() {
        assert_eq!(mysovskikh_weights(7).unwrap().0, 0.0);
        assert!(mysovskikh_weights(8).unwrap().0 < 0.0);
        assert!(mysovskikh_weights(6).unwrap().0 > 0.0);
        assert!(SphereRule::new(9).unwrap().has_negative_weights());
        assert!(!SphereRule::new(7).unwrap().has_negative_weights());
    }

    #[test]
    fn rejects_low_dimensions() {
        for n in 0..4 {
            assert_eq!(
                SphereRule::new(n).unwrap_err(),
                SphereRuleError::DimensionTooSmall(n)
            );
        }
    }

    #[test]
    fn degree_five_on_the_sphere() {
        for n in 4..=10 {
            let rule = SphereRule::new(n).unwrap();
            for alpha in monomials_up_to(n, 5) {
                let got = rule.integrate_monomial(&alpha);
                if total_degree(&alpha) % 2 == 1 {
                    // Cancels exactly within each antipodal pair.
                    assert_eq!(got, 0.0, "n={n} {alpha:?}");
                }
                let exact = surface_monomial_integral(n, &alpha);
                assert!(
                    (got - exact).abs() <= 1e-10 * rule.surface,
                    "n={n} {alpha:?}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn point_counts() {
        assert_eq!(SphereRule::new(4).unwrap().point_count(), 30);
        assert_eq!(SphereRule::new(7).unwrap().point_count(), 56);
    }
}
