//! Radiation-condition audits and far-field profiles of a solved correction field.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fem::P2Field;
use crate::geometry::{ConfigPoint, PlaneVec};
use crate::wavefield::FieldModel;
use crate::{Error, Result};

/// Fewer samples than this per circle are rejected.
pub const MIN_CIRCLE_SAMPLES: usize = 720;

/// `N(r) = ∫_{S_r} |ξ|² ds` and `M(r) = ∫_{S_r} |(∂_r - i√E) ξ|² ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleNorms {
    pub radius: f64,
    pub n: f64,
    pub m: f64,
}

fn circle_points(r: f64, samples: usize) -> Vec<(f64, [f64; 2])> {
    (0..samples)
        .map(|k| {
            let theta = TAU * k as f64 / samples as f64;
            (theta, [r * theta.cos(), r * theta.sin()])
        })
        .collect()
}

fn check_radius(xi: &P2Field, r: f64) -> Result<()> {
    if r > 0.0 && r < xi.mesh.radius {
        Ok(())
    } else {
        Err(Error::ConfigInvalid(format!("probe radius {r} must lie in (0, {})", xi.mesh.radius)))
    }
}

/// Trapezoidal rule on `samples` equally spaced angles, radial derivative from the P2 gradient.
pub fn boundary_norms(xi: &P2Field, energy: f64, radii: &[f64], samples: usize) -> Result<Vec<CircleNorms>> {
    if samples < MIN_CIRCLE_SAMPLES {
        return Err(Error::ConfigInvalid(format!("need at least {MIN_CIRCLE_SAMPLES} samples per circle")));
    }
    let k = Complex64::new(0.0, energy.sqrt());
    radii
        .iter()
        .map(|&r| {
            check_radius(xi, r)?;
            let terms: Vec<(f64, f64)> = circle_points(r, samples)
                .par_iter()
                .map(|&(theta, x)| {
                    let (v, g) = xi.evaluate_with_gradient(x)?;
                    let dr = g[0] * theta.cos() + g[1] * theta.sin();
                    Ok((v.norm_sqr(), (dr - k * v).norm_sqr()))
                })
                .collect::<Result<_>>()?;
            let ds = TAU * r / samples as f64;
            let n = terms.iter().map(|t| t.0).sum::<f64>() * ds;
            let m = terms.iter().map(|t| t.1).sum::<f64>() * ds;
            Ok(CircleNorms { radius: r, n, m })
        })
        .collect()
}

/// `ξ` sampled on a circle, with the anomalous window centres for annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    pub radius: f64,
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
    pub window_centers: [f64; 2],
}

pub fn angular_profile(xi: &P2Field, r: f64, samples: usize, window_centers: [f64; 2]) -> Result<AngularProfile> {
    check_radius(xi, r)?;
    let pts = circle_points(r, samples);
    let values = pts.par_iter().map(|&(_, x)| xi.evaluate(x)).collect::<Result<_>>()?;
    Ok(AngularProfile { radius: r, angles: pts.iter().map(|p| p.0).collect(), values, window_centers })
}

impl AngularProfile {
    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Local maxima of `|ξ(θ)|` (periodic), largest first, as `(angle, |ξ|)`.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        let a = self.magnitudes();
        let n = a.len();
        let mut peaks: Vec<(f64, f64)> = (0..n)
            .filter(|&k| a[k] > 0.0 && a[k] >= a[(k + n - 1) % n] && a[k] > a[(k + 1) % n])
            .map(|k| (self.angles[k], a[k]))
            .collect();
        peaks.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
        peaks
    }

    /// `g(θ) ≈ ξ(rθ̂) √r e^{-i√E r}`. Diagnostic only.
    pub fn amplitude(&self, energy: f64) -> Vec<Complex64> {
        let phase = Complex64::from_polar(self.radius.sqrt(), -energy.sqrt() * self.radius);
        self.values.iter().map(|v| v * phase).collect()
    }
}

/// `ψ = ψ₁ + ξ` at chart points.
pub fn total_field(model: &FieldModel, xi: &P2Field, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
    points
        .par_iter()
        .map(|&x| Ok(model.psi_one(&ConfigPoint::from_chart(x[0], x[1])) + xi.evaluate(x)?))
        .collect()
}

/// Chart image of `x` under the exchange of particles 1 and 2.
pub fn swap_chart(x: [f64; 2]) -> [f64; 2] {
    PlaneVec::from_chart(x[0], x[1]).swap12().chart()
}

/// `‖ξ - ξ∘S‖ / ‖ξ‖` in L² over the part of the mesh with `|x| ≥ inner`, where
/// `S` is the particle exchange and `ξ∘S` is evaluated on the reflected points.
/// Points whose image falls outside the polygon compare against themselves.
pub fn symmetry_defect(xi: &P2Field, inner: f64) -> f64 {
    let mask = |x: [f64; 2]| x[0].hypot(x[1]) >= inner;
    let diff = xi.l2_integral(|x, u| {
        if !mask(x) {
            return 0.0;
        }
        let v = xi.evaluate(swap_chart(x)).unwrap_or(u);
        (u - v).norm_sqr()
    });
    let norm = xi.l2_integral(|x, u| if mask(x) { u.norm_sqr() } else { 0.0 });
    if norm > 0.0 { (diff / norm).sqrt() } else { 0.0 }
}

/// Inputs of [`diagnose`].
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSettings {
    pub radii: Vec<f64>,
    pub samples: usize,
    pub profile_radius: f64,
    pub profile_samples: usize,
    /// The symmetry defect is also reported for `|x| ≥` this radius.
    pub symmetry_inner: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub energy: f64,
    pub norms: Vec<CircleNorms>,
    pub profile: AngularProfile,
    /// Outer half-width of the anomalous windows.
    pub window_halfwidth: f64,
    /// `(whole disk, |x| ≥ symmetry_inner)` when `q` is fixed by the particle exchange.
    pub symmetry: Option<(f64, f64)>,
}

pub fn diagnose(model: &FieldModel, xi: &P2Field, s: &DiagnosticsSettings) -> Result<DiagnosticsReport> {
    let energy = model.energy();
    let norms = boundary_norms(xi, energy, &s.radii, s.samples)?;
    let windows = model.windows();
    let profile = angular_profile(xi, s.profile_radius, s.profile_samples, windows.map(|w| w.center))?;
    let q = model.q();
    let symmetric = (q.swap12() - q).norm() < 1e-12 * q.norm();
    let symmetry = symmetric.then(|| (symmetry_defect(xi, 0.0), symmetry_defect(xi, s.symmetry_inner)));
    Ok(DiagnosticsReport { energy, norms, profile, window_halfwidth: windows[0].spec.outer, symmetry })
}

impl DiagnosticsReport {
    /// `(max N - min N) / min N` over the probe radii, zero for a vanishing field.
    pub fn n_variation(&self) -> f64 {
        let n = self.norms.iter().map(|c| c.n);
        let (lo, hi) = n.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 { 0.0 } else { (hi - lo) / lo }
    }

    /// Largest `M(r) / (E N(r))` over the probe radii.
    pub fn m_ratio(&self) -> f64 {
        self.norms.iter().filter(|c| c.n > 0.0).map(|c| c.m / (self.energy * c.n)).fold(0.0, f64::max)
    }

    /// Index of the anomalous window containing `angle`, if any.
    pub fn window_of(&self, angle: f64) -> Option<usize> {
        self.profile
            .window_centers
            .iter()
            .position(|&c| crate::geometry::angle_diff(angle, c).abs() <= self.window_halfwidth)
    }

    /// The two largest peaks of `|ξ(θ)|` lie in different anomalous windows.
    pub fn dominant_peaks_in_windows(&self) -> bool {
        let peaks = self.profile.peaks();
        if peaks.len() < 2 {
            return false;
        }
        match (self.window_of(peaks[0].0), self.window_of(peaks[1].0)) {
            (Some(a), Some(b)) => a != b,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_mesh, Mesh, MeshParams, SizeField};
    use std::sync::Arc;

    fn mesh() -> Arc<Mesh> {
        Arc::new(build_mesh(&MeshParams { radius: 8.0, size: SizeField::uniform(0.3), min_angle_deg: 20.0, max_vertices: 100_000 }).unwrap())
    }

    #[test]
    fn zero_field_gives_zero_diagnostics() {
        let xi = P2Field::zero(mesh());
        for c in boundary_norms(&xi, 4.0, &[3.0, 7.0], 720).unwrap() {
            assert_eq!((c.n, c.m), (0.0, 0.0));
        }
        let p = angular_profile(&xi, 7.0, 360, [0.0, 1.0]).unwrap();
        assert!(p.magnitudes().iter().all(|&v| v == 0.0));
        assert!(p.peaks().is_empty());
        assert_eq!(symmetry_defect(&xi, 0.0), 0.0);
    }

    #[test]
    fn outgoing_wave_norms() {
        // ξ = e^{ikr} / √r: N = 2π exactly, M = 2π/(4r²)
        let k = 2.0;
        let f = |x: [f64; 2]| {
            let r = x[0].hypot(x[1]);
            Complex64::from_polar(1.0 / r.sqrt(), k * r)
        };
        let mesh = Arc::new(
            build_mesh(&MeshParams { radius: 8.0, size: SizeField::uniform(0.15), min_angle_deg: 20.0, max_vertices: 200_000 })
                .unwrap(),
        );
        let xi = P2Field::interpolate(mesh, f);
        let norms = boundary_norms(&xi, k * k, &[4.0, 6.0], 1440).unwrap();
        for c in norms {
            assert!((c.n - TAU).abs() < 1e-3 * TAU, "{c:?}");
            let m = TAU / (4.0 * c.radius * c.radius);
            assert!((c.m - m).abs() < 0.1 * m, "{c:?} vs {m}");
        }
        assert!(boundary_norms(&xi, 4.0, &[9.0], 720).is_err());
        assert!(boundary_norms(&xi, 4.0, &[5.0], 100).is_err());
    }

    #[test]
    fn profile_peaks_and_amplitude() {
        let xi = P2Field::interpolate(mesh(), |x| {
            let t = x[1].atan2(x[0]);
            Complex64::new(1.0 + (2.0 * t).cos(), 0.0) * x[0].hypot(x[1])
        });
        let p = angular_profile(&xi, 6.0, 720, [0.0, 1.0]).unwrap();
        let peaks = p.peaks();
        assert_eq!(peaks.len(), 2);
        for (a, v) in &peaks[..2] {
            assert!(a.sin().abs() < 1e-9 && (v - 12.0).abs() < 1e-2, "{a} {v}");
        }
        let g = p.amplitude(4.0);
        assert!((g[0].norm() - 12.0 * 6f64.sqrt()).abs() < 1e-1);
    }

    #[test]
    fn swap_is_an_involution_and_detects_asymmetry() {
        let x = [1.3, -0.4];
        let y = swap_chart(swap_chart(x));
        assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
        // the exchange fixes the line through (1, √3)
        let fixed = [0.5, 0.5 * 3f64.sqrt()];
        let s = swap_chart(fixed);
        assert!((s[0] - fixed[0]).abs() < 1e-14 && (s[1] - fixed[1]).abs() < 1e-14);
        let m = mesh();
        let symmetric = P2Field::interpolate(m.clone(), |x| {
            let p = PlaneVec::from_chart(x[0], x[1]);
            Complex64::new((p.0[0] + p.0[1]).cos(), p.0[2])
        });
        assert!(symmetric_defect_small(&symmetric));
        let skew = P2Field::interpolate(m, |x| Complex64::new(x[0], 0.0));
        assert!(symmetry_defect(&skew, 0.0) > 0.5);
    }

    fn symmetric_defect_small(u: &P2Field) -> bool {
        symmetry_defect(u, 0.0) < 1e-2
    }
}
