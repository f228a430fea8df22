//! Quadrature rules on the reference triangle and the unit interval.
//!
//! Triangle rules are given in barycentric coordinates with weights summing to one,
//! so an integral is `area · Σ w f(λ)`.

/// Barycentric point and weight.
pub type TriPoint = ([f64; 3], f64);

const A6: f64 = 0.445_948_490_915_965;
const B6: f64 = 0.091_576_213_509_771;
const WA6: f64 = 0.223_381_589_678_011;
const WB6: f64 = 0.109_951_743_655_322;

/// Six points, exact for polynomials of degree 4.
pub const TRIANGLE_DEG4: [TriPoint; 6] = [
    ([1.0 - 2.0 * A6, A6, A6], WA6),
    ([A6, 1.0 - 2.0 * A6, A6], WA6),
    ([A6, A6, 1.0 - 2.0 * A6], WA6),
    ([1.0 - 2.0 * B6, B6, B6], WB6),
    ([B6, 1.0 - 2.0 * B6, B6], WB6),
    ([B6, B6, 1.0 - 2.0 * B6], WB6),
];

const A7: f64 = 0.059_715_871_789_770;
const B7: f64 = 0.470_142_064_105_115;
const C7: f64 = 0.797_426_985_353_087;
const D7: f64 = 0.101_286_507_323_456;
const WA7: f64 = 0.132_394_152_788_506;
const WC7: f64 = 0.125_939_180_544_827;

/// Seven points, exact for polynomials of degree 5. Used for error norms.
pub const TRIANGLE_DEG5: [TriPoint; 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 0.225),
    ([A7, B7, B7], WA7),
    ([B7, A7, B7], WA7),
    ([B7, B7, A7], WA7),
    ([C7, D7, D7], WC7),
    ([D7, C7, D7], WC7),
    ([D7, D7, C7], WC7),
];

/// Three-point Gauss–Legendre on `[0, 1]`, exact to degree 5: `(t, w)` with `Σ w = 1`.
pub const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫_T λ0^a λ1^b λ2^c / |T| = 2 a! b! c! / (a+b+c+2)!`
    fn exact(a: u32, b: u32, c: u32) -> f64 {
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * f(a) * f(b) * f(c) / f(a + b + c + 2)
    }

    fn check(rule: &[TriPoint], degree: u32) {
        for a in 0..=degree {
            for b in 0..=degree - a {
                let c = degree - a - b;
                let q: f64 = rule
                    .iter()
                    .map(|(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32) * l[2].powi(c as i32))
                    .sum();
                assert!((q - exact(a, b, c)).abs() < 1e-14, "({a},{b},{c}): {q}");
            }
        }
    }

    #[test]
    fn triangle_rules_are_exact() {
        for d in 0..=4 {
            check(&TRIANGLE_DEG4, d);
        }
        for d in 0..=5 {
            check(&TRIANGLE_DEG5, d);
        }
    }

    #[test]
    fn gauss_is_exact_to_degree_five() {
        for p in 0..=5 {
            let q: f64 = GAUSS3.iter().map(|(t, w)| w * t.powi(p)).sum();
            assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-15, "degree {p}");
        }
    }
}
