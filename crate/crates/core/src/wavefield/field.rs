//! The explicit approximate field: ray field `ψ_R`, window-corrected `ψ₀`,
//! radially cut off `ψ₁ = ζψ₀`, and the closed-form discrepancy `Q[ψ₁]`.
//!
//! All sector formulas are written for a wavevector in the canonical sector
//! `{q₁ > 0, q₂ > 0, q₃ < 0}`. Any other `q` is first mapped there by a
//! symmetry `g` of the Hamiltonian, and `ψ(x; q) = ψ(gx; gq)`.

use num_complex::Complex64;

use super::fresnel;
use crate::error::{Error, Result};
use crate::geometry::{
    anomalous_rays, build_fan, ConfigPoint, Frame, HalfLine, Isometry, KVector, PlaneVec, SectorFan, Window,
    WindowSpec,
};
use crate::pair1d::{PairPotential, PairSet};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `S(z) = z³(10 - 15z + 6z²)` on `[0, 1]`, clamped outside, with its first two derivatives.
pub fn smoothstep(z: f64) -> (f64, f64, f64) {
    if z <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if z >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let z2 = z * z;
        let w = 1.0 - z;
        (
            z2 * z * (10.0 - 15.0 * z + 6.0 * z2),
            30.0 * z2 * w * w,
            60.0 * z * w * (1.0 - 2.0 * z),
        )
    }
}

/// Radii of the cutoff `ζ(|x|)`: zero below `inner`, one above `outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

impl Cutoff {
    /// `(ζ, ζ', ζ'')` in the radial variable.
    pub fn profile(&self, r: f64) -> (f64, f64, f64) {
        let w = self.outer - self.inner;
        let (s, ds, dds) = smoothstep((r - self.inner) / w);
        (s, ds / w, dds / (w * w))
    }
}

/// Inputs of a field construction.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub potential: PairPotential,
    pub q: KVector,
    pub window: WindowSpec,
    /// `None` is only accepted for the free system.
    pub cutoff: Option<Cutoff>,
    pub pair_tol: f64,
}

/// `coef · χ_frame(x, wave)`.
#[derive(Debug, Clone, Copy)]
pub struct RayTerm {
    pub frame: Frame,
    pub wave: KVector,
    pub coef: Complex64,
}

/// Amplitudes of `e^{i⟨q₂₃,x⟩}` carried by the ray field on either side of `q₂₃`:
/// `R₁ = r₁r₂s₃` clockwise, `R₂ = r₁r₃s₂ + s₁r₃r₂` counterclockwise, with
/// `s_j = s(|q_j|)` for the canonical `q`. Around `q₂₁` the roles swap.
#[derive(Debug, Clone, Copy)]
pub struct AnomalousAmplitudes {
    pub r1: Complex64,
    pub r2: Complex64,
}

#[derive(Debug, Clone)]
pub struct FieldModel {
    potential: PairPotential,
    q: KVector,
    energy: f64,
    to_canonical: Isometry,
    from_canonical: Isometry,
    fan: SectorFan,
    pairs: PairSet,
    terms: [Vec<RayTerm>; 6],
    /// Clockwise minus counterclockwise amplitude for each window.
    jumps: [Complex64; 2],
    amplitudes: AnomalousAmplitudes,
    cutoff: Option<Cutoff>,
}

/// Fields and derivatives of the blending term around one anomalous ray.
struct WindowTerm {
    zeta: f64,
    dzeta: f64,
    ddzeta: f64,
    /// `F = e^{i⟨q_a,x⟩}(Φ(α) - H(-δ))`, `∂_ω F`, `∂_r F`.
    f: Complex64,
    df_omega: Complex64,
    df_r: Complex64,
}

impl FieldModel {
    pub fn new(spec: &FieldSpec) -> Result<Self> {
        spec.potential.validate()?;
        let q = spec.q;
        let energy = q.inner(&q);
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::FieldModel(format!("wavevector {q} has no positive energy")));
        }
        let to_canonical = Isometry::canonicalizing(&q)
            .ok_or_else(|| Error::DegenerateFan(format!("wavevector {q} lies on a screen")))?;
        let qc = to_canonical.apply(&q);
        let fan = build_fan(&qc, spec.window)?;

        let halfwidth = spec.potential.support_halfwidth();
        match spec.cutoff {
            None if !spec.potential.is_zero() => {
                return Err(Error::FieldModel(
                    "a radial cutoff is required unless the pair potential vanishes".into(),
                ))
            }
            None => {}
            Some(c) => {
                if !(c.inner > 0.0 && c.inner < c.outer && c.outer.is_finite()) {
                    return Err(Error::FieldModel(format!(
                        "cutoff radii must satisfy 0 < r1 < r2, got {} and {}",
                        c.inner, c.outer
                    )));
                }
                check_strip_clearance(&fan, halfwidth, c.inner)?;
            }
        }

        let pairs = PairSet::build(&spec.potential, &qc.0, spec.pair_tol)?;
        let s = |j: usize| pairs.get(qc.0[j]).s;
        let r = |j: usize| pairs.get(qc.0[j]).r;
        let (s1, s2, s3) = (s(0), s(1), s(2));
        let (r1, r2, r3) = (r(0), r(1), r(2));
        let t1 = |p: KVector| p.reflect(Frame::One);
        let t2 = |p: KVector| p.reflect(Frame::Two);
        let t3 = |p: KVector| p.reflect(Frame::Three);
        let term = |frame, wave, coef| RayTerm { frame, wave, coef };
        use Frame::{One, Three, Two};

        let mut terms: [Vec<RayTerm>; 6] = Default::default();
        for (i, sector) in fan.sectors.iter().enumerate() {
            terms[i] = match (sector.screen.frame, sector.screen.positive) {
                (One, true) => vec![term(One, qc, s2 * s3)],
                (Two, false) => vec![term(Two, qc, s3 * s1)],
                (Three, false) => vec![term(Three, qc, s2), term(Three, t1(qc), s3 * r1)],
                (Three, true) => vec![term(Three, qc, s1), term(Three, t2(qc), s3 * r2)],
                (Two, true) => vec![
                    term(Two, qc, ONE),
                    term(Two, t3(qc), r3 * s2),
                    term(Two, t1(t2(qc)), r3 * r2),
                    term(Two, t1(qc), r1),
                ],
                (One, false) => vec![
                    term(One, qc, ONE),
                    term(One, t3(qc), r3 * s1),
                    term(One, t2(t1(qc)), r3 * r1),
                    term(One, t2(qc), r2),
                ],
            };
        }

        let mut model = FieldModel {
            potential: spec.potential,
            q,
            energy,
            to_canonical,
            from_canonical: to_canonical.inverse(),
            fan,
            pairs,
            terms,
            jumps: [ZERO; 2],
            amplitudes: AnomalousAmplitudes {
                r1: r1 * r2 * s3,
                r2: r1 * r3 * s2 + s1 * r3 * r2,
            },
            cutoff: spec.cutoff,
        };
        // read the jump off the far-field plane-wave content on either side
        for w in 0..2 {
            let window = model.fan.windows[w];
            let ray = model.fan.rays.iter().position(|r| r.kind == window.kind).expect("anomalous ray in fan");
            let ccw = ray;
            let cw = (ray + 5) % 6;
            let probe = 1e3 * (1.0 + halfwidth) * window.direction;
            let a_cw = model.plane_wave_amplitude(cw, &probe, &window.direction);
            let a_ccw = model.plane_wave_amplitude(ccw, &probe, &window.direction);
            model.jumps[w] = a_cw - a_ccw;
        }
        Ok(model)
    }

    pub fn q(&self) -> KVector {
        self.q
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn potential(&self) -> &PairPotential {
        &self.potential
    }

    pub fn cutoff(&self) -> Option<Cutoff> {
        self.cutoff
    }

    pub fn pairs(&self) -> &PairSet {
        &self.pairs
    }

    /// The fan of the canonical wavevector.
    pub fn canonical_fan(&self) -> &SectorFan {
        &self.fan
    }

    /// The symmetry mapping the configured `q` to the canonical one.
    pub fn canonicalization(&self) -> Isometry {
        self.to_canonical
    }

    pub fn amplitudes(&self) -> AnomalousAmplitudes {
        self.amplitudes
    }

    /// Clockwise minus counterclockwise ray-field amplitude across each anomalous
    /// ray, ordered like [`FieldModel::windows`].
    pub fn jumps(&self) -> [Complex64; 2] {
        self.jumps
    }

    /// The two correction windows in the original (non-canonical) frame. The
    /// isometry may reverse orientation, so angles are recomputed from the
    /// mapped direction and the window is symmetric about it.
    pub fn windows(&self) -> [Window; 2] {
        self.fan.windows.map(|w| {
            let direction = self.from_canonical.apply(&w.direction);
            Window {
                direction,
                center: direction.angle(),
                ..w
            }
        })
    }

    /// Terms of the ray-field formula used in canonical sector `i`.
    pub fn sector_terms(&self, i: usize) -> &[RayTerm] {
        &self.terms[i]
    }

    /// Maps a point into canonical coordinates.
    pub fn to_canonical(&self, x: &ConfigPoint) -> ConfigPoint {
        self.to_canonical.apply(x)
    }

    /// `χ_j(x, p) = χ(x_j, k_j) e^{i p_j y_j}` with `(k_j, p_j)` the frame-`j`
    /// Jacobi components of `p`. Evaluated in the coordinates given (no canonicalization).
    pub fn channel_wave(&self, frame: Frame, wave: &KVector, x: &ConfigPoint) -> Complex64 {
        let (xj, yj) = x.jacobi(frame);
        let (kj, pj) = wave.jacobi(frame);
        self.pairs.get(kj).chi(xj, kj) * Complex64::from_polar(1.0, pj * yj)
    }

    /// `χ_j` and its chart gradient.
    fn channel_wave_gradient(&self, frame: Frame, wave: &KVector, x: &ConfigPoint) -> (Complex64, [Complex64; 2]) {
        let (xj, yj) = x.jacobi(frame);
        let (kj, pj) = wave.jacobi(frame);
        let (c, dc) = self.pairs.get(kj).chi_with_derivative(xj, kj);
        let e = Complex64::from_polar(1.0, pj * yj);
        let dx = dc * e;
        let dy = I * pj * c * e;
        let n = frame.normal();
        let t = frame.tangent();
        (c * e, [dx * n[0] + dy * t[0], dx * n[1] + dy * t[1]])
    }

    /// Coefficient of `e^{i⟨p,x⟩}` in sector `i`'s formula, using the exterior
    /// forms of each channel wave at `x` (which must lie outside the strips).
    fn plane_wave_amplitude(&self, sector: usize, x: &ConfigPoint, p: &KVector) -> Complex64 {
        let tol = 1e-9 * p.norm();
        let mut total = ZERO;
        for t in &self.terms[sector] {
            let kj = t.wave.component(t.frame);
            let ps = self.pairs.get(kj);
            if x.component(t.frame) * kj > 0.0 {
                if (t.wave - *p).norm() < tol {
                    total += t.coef * ps.s;
                }
            } else {
                if (t.wave - *p).norm() < tol {
                    total += t.coef;
                }
                if (t.wave.reflect(t.frame) - *p).norm() < tol {
                    total += t.coef * ps.r;
                }
            }
        }
        total
    }

    fn ray_canonical(&self, xc: &ConfigPoint) -> Complex64 {
        self.ray_in_sector(self.fan.classify(xc).sector, xc)
    }

    /// Formula of canonical sector `sector` evaluated at the canonical point `xc`,
    /// wherever `xc` lies. Used to compare one-sided limits across rays.
    pub fn ray_in_sector(&self, sector: usize, xc: &ConfigPoint) -> Complex64 {
        self.terms[sector]
            .iter()
            .map(|t| t.coef * self.channel_wave(t.frame, &t.wave, xc))
            .sum()
    }

    fn ray_gradient_canonical(&self, xc: &ConfigPoint) -> (Complex64, [Complex64; 2]) {
        let sector = self.fan.classify(xc).sector;
        let mut value = ZERO;
        let mut grad = [ZERO; 2];
        for t in &self.terms[sector] {
            let (v, g) = self.channel_wave_gradient(t.frame, &t.wave, xc);
            value += t.coef * v;
            grad[0] += t.coef * g[0];
            grad[1] += t.coef * g[1];
        }
        (value, grad)
    }

    fn window_term(&self, w: usize, xc: &ConfigPoint, delta: f64) -> WindowTerm {
        let window = &self.fan.windows[w];
        let spec = window.spec;
        let ramp = spec.outer - spec.inner;
        let (zeta, dzeta, ddzeta) = if delta.abs() <= spec.inner {
            (1.0, 0.0, 0.0)
        } else if delta < 0.0 {
            let (s, ds, dds) = smoothstep((delta + spec.outer) / ramp);
            (s, ds / ramp, dds / (ramp * ramp))
        } else {
            let (s, ds, dds) = smoothstep((spec.outer - delta) / ramp);
            (s, -ds / ramp, dds / (ramp * ramp))
        };

        let qn = window.direction.norm();
        let r = xc.norm();
        let root = (2.0 * qn * r).sqrt();
        let half = -0.5 * delta;
        let alpha = root * half.sin();
        let plane = Complex64::from_polar(1.0, window.direction.inner(xc));
        // the clockwise side (δ < 0) is the lit side where Φ → 1
        let step = if delta < 0.0 { 1.0 } else { 0.0 };
        let phi = fresnel::phi(alpha) - step;
        let dphi = fresnel::phi_prime(alpha);
        let f = plane * phi;
        let df_omega = plane * (I * (-qn * r * delta.sin()) * phi + dphi * (-0.5 * root * half.cos()));
        let df_r = if r > 0.0 {
            plane * (I * qn * delta.cos() * phi + dphi * (alpha / (2.0 * r)))
        } else {
            ZERO
        };
        WindowTerm {
            zeta,
            dzeta,
            ddzeta,
            f,
            df_omega,
            df_r,
        }
    }

    fn corrected_canonical(&self, xc: &ConfigPoint) -> Complex64 {
        let placement = self.fan.classify(xc);
        let mut value = self.ray_canonical(xc);
        if let Some((w, delta)) = placement.window {
            let t = self.window_term(w, xc, delta);
            value += self.jumps[w] * t.zeta * t.f;
        }
        value
    }

    /// `(ψ₀, ∂_r ψ₀, Q[ψ₀])` in canonical coordinates. `Q[ψ₀]` is the closed form
    /// valid wherever the strips are disjoint and away from the windows.
    fn corrected_with_radial(&self, xc: &ConfigPoint) -> (Complex64, Complex64, Complex64) {
        let placement = self.fan.classify(xc);
        let r = xc.norm();
        let (mut value, grad) = self.ray_gradient_canonical(xc);
        let [cx, cy] = xc.chart();
        let mut dr = if r > 0.0 { (grad[0] * cx + grad[1] * cy) / r } else { ZERO };
        let mut q0 = ZERO;
        if let Some((w, delta)) = placement.window {
            let t = self.window_term(w, xc, delta);
            let j = self.jumps[w];
            value += j * t.zeta * t.f;
            dr += j * t.zeta * t.df_r;
            q0 -= j * (t.ddzeta * t.f + 2.0 * t.dzeta * t.df_omega) / (r * r);
        }
        (value, dr, q0)
    }

    /// `ψ_R(x)`. Directions on a ray use the counterclockwise sector.
    pub fn psi_ray(&self, x: &ConfigPoint) -> Complex64 {
        self.ray_canonical(&self.to_canonical(x))
    }

    /// `ψ₀(x)`: the ray field with the jumps across `q₂₃`, `q₂₁` blended by Fresnel functions.
    pub fn psi_corrected(&self, x: &ConfigPoint) -> Complex64 {
        self.corrected_canonical(&self.to_canonical(x))
    }

    /// `ψ₁(x) = ζ(|x|) ψ₀(x)`; `ψ₀` itself when no cutoff is configured.
    pub fn psi_one(&self, x: &ConfigPoint) -> Complex64 {
        let xc = self.to_canonical(x);
        match self.cutoff {
            None => self.corrected_canonical(&xc),
            Some(c) => {
                let (z, _, _) = c.profile(xc.norm());
                if z == 0.0 {
                    ZERO
                } else {
                    z * self.corrected_canonical(&xc)
                }
            }
        }
    }

    /// `Q[ψ₁](x) = (-Δ + Σ v(x_j) - E) ψ₁` from closed forms.
    pub fn discrepancy(&self, x: &ConfigPoint) -> Complex64 {
        let xc = self.to_canonical(x);
        let r = xc.norm();
        match self.cutoff {
            None => {
                if self.fan.classify(&xc).window.is_none() || r == 0.0 {
                    return ZERO;
                }
                self.corrected_with_radial(&xc).2
            }
            Some(c) => {
                if r <= c.inner {
                    return ZERO;
                }
                let in_window = self.fan.classify(&xc).window.is_some();
                if r >= c.outer && !in_window {
                    return ZERO;
                }
                let (z, dz, ddz) = c.profile(r);
                let (psi0, dr, q0) = self.corrected_with_radial(&xc);
                z * q0 - 2.0 * dz * dr - psi0 * (ddz + dz / r)
            }
        }
    }

    /// `ψ₁` and `Q[ψ₁]` together.
    pub fn psi_one_and_discrepancy(&self, x: &ConfigPoint) -> (Complex64, Complex64) {
        (self.psi_one(x), self.discrepancy(x))
    }

    /// `Σ_j v(x_j)`.
    pub fn potential_sum(&self, x: &ConfigPoint) -> f64 {
        x.0.iter().map(|&c| self.potential.value(c)).sum()
    }

    /// `e^{i⟨q, x⟩}`.
    pub fn plane_wave(&self, x: &ConfigPoint) -> Complex64 {
        Complex64::from_polar(1.0, self.q.inner(x))
    }

    /// Reflects a canonical-frame direction back to the configured frame.
    pub fn from_canonical(&self, x: &PlaneVec) -> PlaneVec {
        self.from_canonical.apply(x)
    }

    /// The anomalous directions `q₂₃`, `q₂₁` of the configured `q`.
    pub fn anomalous_directions(&self) -> (KVector, KVector) {
        anomalous_rays(&self.q)
    }
}

/// Outside radius `r1` the three strips `|x_j| < b/2` must be pairwise disjoint,
/// no ray may cross a strip, and no window may reach one.
fn check_strip_clearance(fan: &SectorFan, halfwidth: f64, r1: f64) -> Result<()> {
    if halfwidth == 0.0 {
        return Ok(());
    }
    if r1 <= 2.0 * halfwidth {
        return Err(Error::FieldModel(format!(
            "inner cutoff radius {r1} does not separate the interaction strips (need > {})",
            2.0 * halfwidth
        )));
    }
    let strip = (halfwidth / r1).asin();
    for h in HalfLine::all() {
        let a = h.angle();
        for ray in &fan.rays {
            let gap = crate::geometry::angle_diff(ray.angle, a).abs();
            if gap <= strip {
                return Err(Error::FieldModel(format!(
                    "ray {} crosses the strip along {h} outside r1 = {r1}",
                    ray.kind
                )));
            }
        }
        for w in &fan.windows {
            let gap = crate::geometry::angle_diff(w.center, a).abs();
            if gap <= w.spec.outer + strip {
                return Err(Error::FieldModel(format!(
                    "window of {} (±{:.2}°) reaches the strip along {h} at r1 = {r1} (strip half-angle {:.2}°)",
                    w.kind,
                    w.spec.outer.to_degrees(),
                    strip.to_degrees()
                )));
            }
        }
    }
    Ok(())
}
