//! One-dimensional pair problem: `-χ'' + v χ = k² χ` for an even, compactly
//! supported, non-negative potential.
//!
//! The scattering solution is normalised by its asymptotics
//!
//! ```text
//! χ(x, k) = s(k) e^{ikx}                 for x ≥  b/2
//! χ(x, k) = e^{ikx} + r(k) e^{-ikx}      for x ≤ -b/2
//! ```
//!
//! and extended to negative wavenumbers by `χ(x, -k) = χ(-x, k)`. Inside the
//! support the solution is tabulated together with its derivative and read back
//! by cubic Hermite interpolation.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Even pair interaction `v(x)`, identically zero for `|x| ≥ support_halfwidth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairPotential {
    /// `amplitude · exp(1/((x/h)² - 1) + 1)` on `|x| < h`. With `amplitude = 2`
    /// and `h = 1/4` this is the reference bump used throughout the project.
    Bump { amplitude: f64, halfwidth: f64 },
    /// Rectangular barrier of the given height on `|x| < halfwidth`.
    SquareBarrier { height: f64, halfwidth: f64 },
    /// Free motion.
    Zero,
}

impl Default for PairPotential {
    fn default() -> Self {
        PairPotential::Bump {
            amplitude: 2.0,
            halfwidth: 0.25,
        }
    }
}

impl PairPotential {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            PairPotential::Bump {
                amplitude,
                halfwidth,
            } => {
                let z = x / halfwidth;
                if z.abs() < 1.0 {
                    amplitude * (1.0 / (z * z - 1.0) + 1.0).exp()
                } else {
                    0.0
                }
            }
            PairPotential::SquareBarrier { height, halfwidth } => {
                // closed interval so the sweep sees a smooth integrand on the support
                if x.abs() <= halfwidth {
                    height
                } else {
                    0.0
                }
            }
            PairPotential::Zero => 0.0,
        }
    }

    /// `b/2`: the potential vanishes for `|x| >` this value.
    pub fn support_halfwidth(&self) -> f64 {
        match *self {
            PairPotential::Bump { halfwidth, .. } | PairPotential::SquareBarrier { halfwidth, .. } => {
                halfwidth
            }
            PairPotential::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            PairPotential::Bump { amplitude, halfwidth } => amplitude == 0.0 || halfwidth == 0.0,
            PairPotential::SquareBarrier { height, halfwidth } => height == 0.0 || halfwidth == 0.0,
            PairPotential::Zero => true,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let (a, h) = match *self {
            PairPotential::Bump { amplitude, halfwidth } => (amplitude, halfwidth),
            PairPotential::SquareBarrier { height, halfwidth } => (height, halfwidth),
            PairPotential::Zero => return Ok(()),
        };
        if !(a >= 0.0 && a.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "pair potential amplitude must be finite and non-negative, got {a}"
            )));
        }
        if !(h >= 0.0 && h.is_finite()) {
            return Err(Error::ConfigInvalid(format!(
                "pair potential halfwidth must be finite and non-negative, got {h}"
            )));
        }
        Ok(())
    }
}

/// Scattering data of the pair problem at one wavenumber `k > 0`.
#[derive(Debug, Clone)]
pub struct PairScattering {
    pub k: f64,
    /// Transmission coefficient.
    pub s: Complex64,
    /// Reflection coefficient.
    pub r: Complex64,
    potential: PairPotential,
    halfwidth: f64,
    step: f64,
    chi: Vec<Complex64>,
    dchi: Vec<Complex64>,
}

/// Minimum number of tabulation intervals across the support.
pub const MIN_TABLE_INTERVALS: usize = 2048;
const MAX_TABLE_INTERVALS: usize = 1 << 22;

/// Integrates the pair equation across the support and extracts `s(k)`, `r(k)`.
///
/// The RK4 sweep runs from `x = b/2` (where `χ = e^{ikx}`) down to `x = -b/2`.
/// The step count is doubled until successive coefficient estimates agree to
/// `tol`; the finer sweep provides the table.
pub fn solve_pair(potential: &PairPotential, k: f64, tol: f64) -> Result<PairScattering> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::PairIntegration(format!("wavenumber must be positive, got {k}")));
    }
    if !(tol > 0.0) {
        return Err(Error::PairIntegration(format!("tolerance must be positive, got {tol}")));
    }
    potential.validate()?;
    let halfwidth = potential.support_halfwidth();
    if potential.is_zero() {
        return Ok(PairScattering {
            k,
            s: Complex64::new(1.0, 0.0),
            r: Complex64::new(0.0, 0.0),
            potential: PairPotential::Zero,
            halfwidth: 0.0,
            step: 0.0,
            chi: Vec::new(),
            dchi: Vec::new(),
        });
    }

    let mut n = MIN_TABLE_INTERVALS;
    let mut coarse = sweep(potential, k, halfwidth, n)?;
    loop {
        let fine = sweep(potential, k, halfwidth, 2 * n)?;
        let defect = (fine.s - coarse.s).norm() + (fine.r - coarse.r).norm();
        if defect < tol {
            return Ok(fine);
        }
        n *= 2;
        if n > MAX_TABLE_INTERVALS {
            return Err(Error::PairIntegration(format!(
                "no convergence at k = {k}: coefficient defect {defect:e} with {n} steps"
            )));
        }
        coarse = fine;
    }
}

/// Solves the pair problem for each wavenumber (in parallel), preserving order.
pub fn solve_pairs(potential: &PairPotential, ks: &[f64], tol: f64) -> Result<Vec<PairScattering>> {
    ks.par_iter().map(|&k| solve_pair(potential, k, tol)).collect()
}

fn sweep(potential: &PairPotential, k: f64, halfwidth: f64, n: usize) -> Result<PairScattering> {
    let step = 2.0 * halfwidth / n as f64;
    let k2 = k * k;
    let rhs = |x: f64, y: [Complex64; 2]| -> [Complex64; 2] { [y[1], (potential.value(x) - k2) * y[0]] };

    let mut chi = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut dchi = chi.clone();
    let start = (I * k * halfwidth).exp();
    let mut y = [start, I * k * start];
    chi[n] = y[0];
    dchi[n] = y[1];
    let h = -step;
    for i in (0..n).rev() {
        let x = -halfwidth + (i + 1) as f64 * step;
        let k1 = rhs(x, y);
        let k2 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(x + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(x + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for c in 0..2 {
            y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        chi[i] = y[0];
        dchi[i] = y[1];
    }

    // Match at x = -b/2 onto A e^{ikx} + B e^{-ikx}.
    let e = (-I * k * halfwidth).exp();
    let a = (I * k * y[0] + y[1]) / (2.0 * I * k * e);
    let b = (I * k * y[0] - y[1]) * e / (2.0 * I * k);
    if !(a.norm() > 1e-300) || !a.norm().is_finite() {
        return Err(Error::PairIntegration(format!(
            "vanishing incoming amplitude |A| = {:e} at k = {k}",
            a.norm()
        )));
    }
    let scale = a.inv();
    chi.iter_mut().for_each(|c| *c *= scale);
    dchi.iter_mut().for_each(|c| *c *= scale);
    Ok(PairScattering {
        k,
        s: scale,
        r: b * scale,
        potential: *potential,
        halfwidth,
        step,
        chi,
        dchi,
    })
}

impl PairScattering {
    /// `|s|² + |r|² - 1`.
    pub fn unitarity_defect(&self) -> f64 {
        self.s.norm_sqr() + self.r.norm_sqr() - 1.0
    }

    pub fn support_halfwidth(&self) -> f64 {
        self.halfwidth
    }

    /// `χ(x, k_signed)`; the magnitude of `k_signed` must be this table's `k`.
    pub fn chi(&self, x: f64, k_signed: f64) -> Complex64 {
        self.chi_with_derivative(x, k_signed).0
    }

    /// `(χ, ∂χ/∂x)` at `(x, k_signed)`.
    pub fn chi_with_derivative(&self, x: f64, k_signed: f64) -> (Complex64, Complex64) {
        debug_assert!(
            (k_signed.abs() - self.k).abs() <= 1e-9 * self.k,
            "table for k = {} queried at {k_signed}",
            self.k
        );
        if k_signed < 0.0 {
            let (v, d) = self.forward(-x);
            (v, -d)
        } else {
            self.forward(x)
        }
    }

    fn forward(&self, x: f64) -> (Complex64, Complex64) {
        let k = self.k;
        if x >= self.halfwidth {
            let e = (I * k * x).exp();
            return (self.s * e, I * k * self.s * e);
        }
        if x <= -self.halfwidth {
            let e = (I * k * x).exp();
            let ec = e.conj();
            return (e + self.r * ec, I * k * (e - self.r * ec));
        }
        let n = self.chi.len() - 1;
        let u = (x + self.halfwidth) / self.step;
        let i = (u.floor() as usize).min(n - 1);
        let t = u - i as f64;
        let h = self.step;
        let xi = -self.halfwidth + i as f64 * h;
        let xj = xi + h;
        let k2 = k * k;
        // χ'' = (v - k²) χ supplies the slopes for interpolating χ'.
        let ddi = (self.potential.value(xi) - k2) * self.chi[i];
        let ddj = (self.potential.value(xj) - k2) * self.chi[i + 1];
        let value = hermite(t, h, self.chi[i], self.dchi[i], self.chi[i + 1], self.dchi[i + 1]);
        let deriv = hermite(t, h, self.dchi[i], ddi, self.dchi[i + 1], ddj);
        (value, deriv)
    }
}

fn hermite(t: f64, h: f64, p0: Complex64, m0: Complex64, p1: Complex64, m1: Complex64) -> Complex64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    p0 * h00 + m0 * (h10 * h) + p1 * h01 + m1 * (h11 * h)
}

/// Pair data for the finite set of `|k|` values a field construction needs.
#[derive(Debug, Clone)]
pub struct PairSet {
    entries: Vec<PairScattering>,
}

impl PairSet {
    /// Solves once per distinct magnitude (relative tolerance `1e-9`).
    pub fn build(potential: &PairPotential, magnitudes: &[f64], tol: f64) -> Result<Self> {
        let mut distinct: Vec<f64> = Vec::new();
        for &m in magnitudes {
            let m = m.abs();
            if !distinct.iter().any(|&d| (d - m).abs() <= 1e-9 * d.max(m)) {
                distinct.push(m);
            }
        }
        distinct.sort_by(f64::total_cmp);
        Ok(Self {
            entries: solve_pairs(potential, &distinct, tol)?,
        })
    }

    /// Scattering data at `|k|`.
    ///
    /// # Panics
    /// If no table was built for this magnitude.
    pub fn get(&self, k: f64) -> &PairScattering {
        let m = k.abs();
        self.entries
            .iter()
            .find(|e| (e.k - m).abs() <= 1e-9 * e.k.max(m))
            .unwrap_or_else(|| panic!("no pair table for |k| = {m}"))
    }

    pub fn entries(&self) -> &[PairScattering] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> PairPotential {
        PairPotential::default()
    }

    #[test]
    fn potential_values() {
        let v = bump();
        assert_eq!(v.value(0.0), 2.0);
        assert_eq!(v.value(0.25), 0.0);
        assert_eq!(v.value(-0.3), 0.0);
        for i in 0..50 {
            let x = -0.3 + 0.6 * i as f64 / 49.0;
            assert_eq!(v.value(x), v.value(-x));
            assert!(v.value(x) >= 0.0);
        }
        // flat at the edge of the support
        assert!(v.value(0.2499) < 1e-100);
    }

    #[test]
    fn free_motion() {
        let ps = solve_pair(&PairPotential::Zero, 2.0, 1e-10).unwrap();
        assert_eq!(ps.s, Complex64::new(1.0, 0.0));
        assert_eq!(ps.r, Complex64::new(0.0, 0.0));
        let expected = (I * 2.0).exp();
        assert!((ps.chi(1.0, 2.0) - expected).norm() < 1e-15);
        assert!((ps.chi(-1.0, -2.0) - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(solve_pair(&bump(), 0.0, 1e-10).is_err());
        assert!(solve_pair(&bump(), -1.0, 1e-10).is_err());
        assert!(solve_pair(&bump(), 1.0, 0.0).is_err());
    }

    #[test]
    fn matching_conditions() {
        let k = 1.3;
        let ps = solve_pair(&bump(), k, 1e-10).unwrap();
        let hw = 0.25;
        let right = ps.chi(hw, k);
        assert!((right - ps.s * (I * k * hw).exp()).norm() < 1e-15);
        let left = ps.chi(-hw, k);
        let expected = (-I * k * hw).exp() + ps.r * (I * k * hw).exp();
        assert!((left - expected).norm() < 1e-12);
        // the tabulated endpoint agrees with the exterior form
        let inside = ps.chi(-hw + 1e-12, k);
        assert!((inside - expected).norm() < 1e-9);
    }

    #[test]
    fn negative_k_extension() {
        let k = 2.0;
        let ps = solve_pair(&bump(), k, 1e-10).unwrap();
        for i in 0..41 {
            let x = -1.0 + 2.0 * i as f64 / 40.0;
            assert!((ps.chi(x, -k) - ps.chi(-x, k)).norm() < 1e-15);
        }
    }

    #[test]
    fn wronskian_is_conserved() {
        // W(χ, χ̄) = χ χ̄' - χ' χ̄ is constant for real v and equals -2ik|s|² and -2ik(1-|r|²).
        for &k in &[0.5, 1.0, 2.0_f64.sqrt(), 2.0] {
            let ps = solve_pair(&bump(), k, 1e-10).unwrap();
            let right = Complex64::new(0.0, -2.0 * k * ps.s.norm_sqr());
            let left = Complex64::new(0.0, -2.0 * k * (1.0 - ps.r.norm_sqr()));
            assert!((right - left).norm() < 1e-8 * k);
            for i in 0..50 {
                let x = -0.25 + 0.5 * (i as f64 + 0.5) / 50.0;
                let (c, d) = ps.chi_with_derivative(x, k);
                let w = c * d.conj() - d * c.conj();
                assert!((w - right).norm() < 1e-8 * k, "k={k} x={x} w={w} expected {right}");
            }
        }
    }

    #[test]
    fn ode_residual_of_interpolant() {
        let v = bump();
        let k = 2.0;
        let ps = solve_pair(&v, k, 1e-10).unwrap();
        let h = 1e-3;
        for i in 0..50 {
            let x = -0.24 + 0.48 * i as f64 / 49.0;
            let c = ps.chi(x, k);
            let lap = (ps.chi(x + h, k) - 2.0 * c + ps.chi(x - h, k)) / (h * h);
            let res = -lap + (v.value(x) - k * k) * c;
            // relative to the size of the two operator terms
            let scale = lap.norm() + (v.value(x) - k * k).abs() * c.norm();
            assert!(res.norm() < 1e-5 * scale, "x={x} residual {}", res.norm() / scale);
        }
    }

    #[test]
    fn scattering_matrix_is_unitary() {
        for &k in &[0.5, 1.0, 2.0_f64.sqrt(), 2.0, 3.7] {
            let ps = solve_pair(&bump(), k, 1e-10).unwrap();
            assert!(ps.unitarity_defect().abs() < 1e-8);
            let off = ps.s * ps.r.conj() + ps.s.conj() * ps.r;
            assert!(off.re.abs() < 1e-8, "k={k}: {off}");
        }
    }

    #[test]
    fn pair_set_deduplicates() {
        let set = PairSet::build(&bump(), &[1.0, -1.0, 2.0, 1.0 + 1e-12], 1e-10).unwrap();
        assert_eq!(set.entries().len(), 2);
        assert_eq!(set.get(-2.0).k, 2.0);
    }
}
