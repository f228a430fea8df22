#![allow(dead_code)]

use num_complex::Complex64;
use threebody::geometry::{wavevector, ConfigPoint, PlaneVec, WindowSpec};
use threebody::pair1d::PairPotential;
use threebody::wavefield::{Cutoff, FieldModel, FieldSpec};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

pub fn sqrt3() -> f64 {
    3f64.sqrt()
}

/// Swap-symmetric control direction `q = (1, 1, -2)`.
pub fn control_spec() -> FieldSpec {
    FieldSpec {
        potential: PairPotential::default(),
        q: wavevector(1.0, sqrt3()),
        window: WindowSpec::default(),
        cutoff: Some(Cutoff { inner: 4.0, outer: 10.0 }),
        pair_tol: 1e-10,
    }
}

/// `k₁ = p₁ = √2`, which needs narrower windows.
pub fn oblique_spec() -> FieldSpec {
    FieldSpec {
        q: wavevector(SQRT2, SQRT2),
        window: WindowSpec {
            inner: 5f64.to_radians(),
            outer: 10f64.to_radians(),
        },
        ..control_spec()
    }
}

pub fn model(spec: &FieldSpec) -> FieldModel {
    FieldModel::new(spec).expect("valid field model")
}

/// Five-point chart stencil of `(-Δ + Σv - E) f` at `x`, returned with the
/// size of the two operator terms, `|Δ_h f| + |(Σv - E) f|`, for relative checks.
pub fn fd_operator(
    f: impl Fn(&ConfigPoint) -> Complex64,
    model: &FieldModel,
    x: &ConfigPoint,
    h: f64,
) -> (Complex64, f64) {
    let [cx, cy] = x.chart();
    let at = |dx: f64, dy: f64| f(&PlaneVec::from_chart(cx + dx, cy + dy));
    let centre = f(x);
    let lap = (at(h, 0.0) + at(-h, 0.0) + at(0.0, h) + at(0.0, -h) - 4.0 * centre) / (h * h);
    let pot = model.potential_sum(x) - model.energy();
    (-lap + pot * centre, lap.norm() + pot.abs() * centre.norm())
}

/// Same stencil with Richardson extrapolation from `h` and `h/2` (fourth order).
pub fn fd_operator_extrapolated(
    f: impl Fn(&ConfigPoint) -> Complex64 + Copy,
    model: &FieldModel,
    x: &ConfigPoint,
    h: f64,
) -> (Complex64, f64) {
    let (a, sa) = fd_operator(f, model, x, h);
    let (b, sb) = fd_operator(f, model, x, h / 2.0);
    ((4.0 * b - a) / 3.0, sa.max(sb))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
