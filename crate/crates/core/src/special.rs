//! Gamma-function values at half-integer arguments.
//!
//! Every Gamma value the constructions need has the form `Γ(k/2)` for a
//! positive integer `k`, so the recurrence `Γ(x + 1) = x Γ(x)` from
//! `Γ(1/2) = √π` and `Γ(1) = 1` gives them to within a few ulps. Values are
//! carried as logarithms so dimensions past 170 do not overflow.

use std::f64::consts::PI;

/// Running products are flushed into the log sum once they pass this size.
const FLUSH_AT: f64 = 1e250;

/// `ln Γ(twice / 2)` for a positive integer `twice`.
///
/// # Panics
///
/// Panics if `twice == 0` (pole of Γ at 0).
pub fn ln_gamma_half(twice: u32) -> f64 {
    assert!(twice > 0, "Gamma has a pole at 0");
    // Γ(m + 1/2) = √π ∏_{j<m} (j + 1/2),   Γ(m + 1) = ∏_{j=1..m} j
    let (mut log_sum, start, steps) = if twice % 2 == 1 {
        (0.5 * PI.ln(), 0.5, (twice - 1) / 2)
    } else {
        (0.0, 1.0, twice / 2 - 1)
    };
    let mut product = 1.0_f64;
    let mut factor = start;
    for _ in 0..steps {
        product *= factor;
        factor += 1.0;
        if product > FLUSH_AT {
            log_sum += product.ln();
            product = 1.0;
        }
    }
    log_sum + product.ln()
}

/// `Γ(twice / 2)`; overflows to infinity past `twice ≈ 342`.
pub fn gamma_half(twice: u32) -> f64 {
    ln_gamma_half(twice).exp()
}

/// `ln π^{n/2}`.
pub fn ln_pi_pow_half(n: usize) -> f64 {
    0.5 * n as f64 * PI.ln()
}

/// Surface content `V = 2π^{n/2} / Γ(n/2)` of the unit sphere in `R^n`.
pub fn sphere_surface(n: usize) -> f64 {
    ln_sphere_surface(n).exp()
}

/// `ln V` for the unit sphere in `R^n`.
pub fn ln_sphere_surface(n: usize) -> f64 {
    std::f64::consts::LN_2 + ln_pi_pow_half(n) - ln_gamma_half(n as u32)
}
