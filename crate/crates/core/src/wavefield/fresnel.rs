//! The normalized Fresnel function `Φ(α) = c ∫_{-∞}^{α} e^{it²} dt`, `c = e^{-iπ/4}/√π`.
//!
//! `Φ(-∞) = 0`, `Φ(+∞) = 1`, `Φ(0) = 1/2` and `Φ(α) + Φ(-α) = 1`. Evaluated
//! through the complementary error function on the ray `arg z = -π/4`:
//! `∫_a^∞ e^{it²} dt = (√π/2) e^{iπ/4} erfc(e^{-iπ/4} a)`, so that
//! `Φ(α) = 1 - erfc(e^{-iπ/4} α)/2` for `α ≥ 0`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `e^{-iπ/4} / √π`.
pub fn fresnel_constant() -> Complex64 {
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2) / PI.sqrt()
}

/// Below this `|z|` the Maclaurin series of erf is used, above it a continued fraction.
const SERIES_LIMIT: f64 = 2.5;

/// `erfc(e^{-iπ/4} a)` for `a ≥ 0`.
fn erfc_diagonal(a: f64) -> Complex64 {
    let z = Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2) * a;
    if a <= SERIES_LIMIT {
        1.0 - erf_series(z)
    } else {
        erfc_continued_fraction(z)
    }
}

fn erf_series(z: Complex64) -> Complex64 {
    // erf z = 2/√π Σ (-1)^n z^{2n+1} / (n! (2n+1))
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    for n in 1..200 {
        power *= -z2 / n as f64;
        let term = power / (2 * n + 1) as f64;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum * (2.0 / PI.sqrt())
}

fn erfc_continued_fraction(z: Complex64) -> Complex64 {
    // erfc z = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), Re z > 0,
    // evaluated with the modified Lentz method
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..5000 {
        let an = n as f64 / 2.0;
        d = z + an * d;
        if d.norm() < tiny {
            d = Complex64::new(tiny, 0.0);
        }
        c = z + an / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z * z).exp() / (PI.sqrt() * f)
}

/// `Φ(α)`.
pub fn phi(alpha: f64) -> Complex64 {
    if alpha >= 0.0 {
        1.0 - 0.5 * erfc_diagonal(alpha)
    } else {
        0.5 * erfc_diagonal(-alpha)
    }
}

/// `Φ'(α) = c e^{iα²}`.
pub fn phi_prime(alpha: f64) -> Complex64 {
    fresnel_constant() * Complex64::from_polar(1.0, alpha * alpha)
}

/// Leading asymptotic term `c e^{iα²} / (2iα)` of `Φ(α) - H(α)` as `|α| → ∞`.
pub fn phi_asymptote(alpha: f64) -> Complex64 {
    phi_prime(alpha) / Complex64::new(0.0, 2.0 * alpha)
}

/// `ΔΦ(α) = Φ(α) - H(α) - c e^{iα²}/(2iα)`, which is `O(|α|⁻³)`. For `α > 0`
/// this is `Φ(α) - 1 - c e^{iα²}/(2iα)`. Undefined at `α = 0`.
pub fn delta_phi(alpha: f64) -> Complex64 {
    let step = if alpha > 0.0 { 1.0 } else { 0.0 };
    phi(alpha) - step - phi_asymptote(alpha)
}
