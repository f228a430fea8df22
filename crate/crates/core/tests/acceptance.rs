//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threebody::diagnostics::{diagnose, DiagnosticsSettings};
use threebody::fem::{build_mesh, BoundaryCondition, FemProblem, Manufactured, MeshParams, MeshPlan, P2Field, SizeField, SolverOptions};
use threebody::geometry::{angle_diff, PlaneVec, RayKind};
use threebody::pair1d::{solve_pair, PairPotential};
use threebody::wavefield::{delta_phi, phi, FieldSpec};

type Outcome = Result<String, String>;

/// Number, name, check and time budget in seconds.
type Criterion = (u32, &'static str, fn() -> Outcome, Option<u64>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

fn within(outcome: Outcome, elapsed: Duration, budget: Option<Duration>) -> Outcome {
    match (outcome, budget) {
        (Ok(d), Some(b)) if elapsed > b => Err(format!("{d}; took {elapsed:.1?}, budget {b:?}")),
        (o, _) => o,
    }
}

fn unitarity() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0, SQRT2, 2.0] {
        for v in [PairPotential::default(), PairPotential::SquareBarrier { height: 3.0, halfwidth: 0.3 }] {
            let p = solve_pair(&v, k, 1e-10).map_err(|e| e.to_string())?;
            worst = worst.max(p.unitarity_defect().abs());
        }
    }
    check(worst < 1e-8, format!("max ||s|²+|r|²-1| = {worst:.1e}"))
}

/// `(s, r)` of a square barrier of height `v` on `|x| < a` from the transfer
/// matrix of the two interfaces.
fn barrier_closed_form(v: f64, a: f64, k: f64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let kappa = Complex64::new(k * k - v, 0.0).sqrt();
    let w = 2.0 * a;
    let (c, s) = ((kappa * w).cos(), (kappa * w).sin());
    let denom = c - 0.5 * i * (kappa / k + k / kappa) * s;
    let t = (-i * k * w).exp() / denom;
    let r = (-2.0 * i * k * a).exp() * 0.5 * i * (kappa / k - k / kappa) * s / denom;
    (t, r)
}

fn square_barrier() -> Outcome {
    let mut worst: f64 = 0.0;
    for (v, a, k) in [(2.0, 0.25, 1.0), (5.0, 0.4, 1.5), (1.0, 0.5, SQRT2)] {
        let p = solve_pair(&PairPotential::SquareBarrier { height: v, halfwidth: a }, k, 1e-11).map_err(|e| e.to_string())?;
        let (s, r) = barrier_closed_form(v, a, k);
        worst = worst.max((p.s - s).norm()).max((p.r - r).norm());
    }
    check(worst < 1e-6, format!("max |Δs|, |Δr| = {worst:.1e}"))
}

fn fresnel() -> Outcome {
    let centre = (phi(0.0) - 0.5).norm();
    let sym = [0.5, 2.0, 7.0].iter().map(|&a| (phi(a) + phi(-a) - 1.0).norm()).fold(0.0, f64::max);
    let ratio = delta_phi(10.0).norm() / delta_phi(20.0).norm();
    check(
        centre < 1e-10 && sym < 1e-10 && (6.0..=10.0).contains(&ratio),
        format!("|Φ(0)-1/2| = {centre:.1e}, max |Φ(α)+Φ(-α)-1| = {sym:.1e}, |ΔΦ(10)/ΔΦ(20)| = {ratio:.3}"),
    )
}

fn ray_exactness() -> Outcome {
    let m = model(&control_spec());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut n, mut worst) = (0, 0.0f64);
    while n < 100 {
        let x = PlaneVec::from_polar(rng.random_range(5.0..50.0), rng.random_range(0.0..TAU));
        let xc = m.to_canonical(&x);
        let off_screens = x.0.iter().all(|c| c.abs() >= 0.6);
        let off_rays = m.canonical_fan().rays.iter().all(|r| angle_diff(xc.angle(), r.angle).abs() >= 5f64.to_radians());
        if !off_screens || !off_rays {
            continue;
        }
        n += 1;
        let (res, scale) = fd_operator_extrapolated(|p| m.psi_ray(p), &m, &x, 2e-3);
        worst = worst.max(res.norm() / scale);
    }
    check(worst < 1e-5, format!("max relative residual {worst:.1e} at {n} points"))
}

fn ray_structure() -> Outcome {
    let m = model(&control_spec());
    let amps = m.amplitudes();
    let (mut smooth, mut jump) = (0.0f64, 0.0f64);
    for (i, ray) in m.canonical_fan().rays.iter().enumerate() {
        for r in [10.0, 50.0, 200.0] {
            let x = (r / ray.vector.norm()) * ray.vector;
            let d = m.ray_in_sector((i + 5) % 6, &x) - m.ray_in_sector(i, &x);
            let plane = Complex64::from_polar(1.0, ray.vector.inner(&x));
            match ray.kind {
                RayKind::Anomalous23 => jump = jump.max((d - plane * (amps.r1 - amps.r2)).norm()),
                RayKind::Anomalous21 => jump = jump.max((d - plane * (amps.r2 - amps.r1)).norm()),
                _ => smooth = smooth.max(d.norm()),
            }
        }
    }
    check(
        smooth < 1e-10 && jump < 1e-10,
        format!("smooth-ray mismatch {smooth:.1e}, anomalous jump error {jump:.1e} (|R1-R2| = {:.2e})", (amps.r1 - amps.r2).norm()),
    )
}

fn helmholtz_correction() -> Outcome {
    let spec = control_spec();
    let m = model(&spec);
    let free = model(&FieldSpec { potential: PairPotential::Zero, cutoff: None, ..spec });
    let (q23, _) = m.anomalous_directions();
    let (qn, centre) = (q23.norm(), q23.angle());
    let f = |x: &PlaneVec| {
        let alpha = (2.0 * qn * x.norm()).sqrt() * (-0.5 * angle_diff(x.angle(), centre)).sin();
        Complex64::from_polar(1.0, q23.inner(x)) * phi(alpha)
    };
    let inner = m.windows()[0].spec.inner.to_degrees();
    let mut worst: f64 = 0.0;
    for r in [12.0, 20.0, 40.0] {
        for k in -4..=4 {
            let d = 0.95 * inner * k as f64 / 4.0;
            let x = PlaneVec::from_polar(r, centre + d.to_radians());
            let (res, scale) = fd_operator_extrapolated(f, &free, &x, 2e-3);
            worst = worst.max(res.norm() / scale);
        }
    }
    check(worst < 1e-5, format!("max relative (-Δ-E) residual {worst:.1e}"))
}

fn discrepancy_oracle() -> Outcome {
    let m = model(&control_spec());
    let c = m.cutoff().unwrap();
    let windows = m.windows();
    let h = 1e-3;
    let clear = 4.0 * h;
    let smooth = |x: &PlaneVec| {
        let r = x.norm();
        (r - c.inner).abs() >= clear
            && (r - c.outer).abs() >= clear
            && windows.iter().all(|w| w.angles().iter().all(|&a| (angle_diff(x.angle(), a) * r).abs() >= clear))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut n, mut worst) = (0, 0.0f64);
    while n < 200 {
        let x = if n % 2 == 0 {
            PlaneVec::from_polar(rng.random_range(4.0..10.0), rng.random_range(0.0..TAU))
        } else {
            let w = windows[n / 2 % 2];
            PlaneVec::from_polar(rng.random_range(4.0..60.0), w.center + rng.random_range(-1.0..1.0) * w.spec.outer)
        };
        if !smooth(&x) {
            continue;
        }
        n += 1;
        let q = m.discrepancy(&x);
        let (fd, scale) = fd_operator_extrapolated(|p| m.psi_one(p), &m, &x, h);
        worst = worst.max((q - fd).norm() / scale.max(q.norm()));
    }
    check(worst < 1e-4, format!("max relative mismatch {worst:.1e} at {n} points"))
}

fn decay_law() -> Outcome {
    let m = model(&control_spec());
    let radii = [20.0, 40.0, 80.0, 160.0];
    let peaks: Vec<f64> = radii
        .iter()
        .map(|&r| {
            m.windows()
                .iter()
                .flat_map(|w| {
                    (0..=4000).map(move |i| w.center - w.spec.outer + 2.0 * w.spec.outer * i as f64 / 4000.0)
                })
                .map(|a| m.discrepancy(&PlaneVec::from_polar(r, a)).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = loglog_slope(&radii, &peaks);
    check((slope + 2.5).abs() <= 0.15, format!("log-log slope {slope:.3}"))
}

fn fem_verification() -> Outcome {
    let data = Manufactured::plane_wave(4.0, [1.5 * 0.3f64.cos(), 1.5 * 0.3f64.sin()]);
    let mut details = Vec::new();
    let mut ok = true;
    for bc in [BoundaryCondition::Plain, BoundaryCondition::Corrected] {
        let params = MeshParams { radius: 10.0, size: SizeField::uniform(0.8), min_angle_deg: 20.0, max_vertices: 1_000_000 };
        let mut mesh = build_mesh(&params).map_err(|e| e.to_string())?;
        let (mut errors, mut residual) = (Vec::new(), 0.0f64);
        for level in 0..3 {
            if level > 0 {
                mesh = mesh.refine_uniform().map_err(|e| e.to_string())?;
            }
            let problem = FemProblem::assemble(Arc::new(mesh.clone()), &data, bc).map_err(|e| e.to_string())?;
            let (xi, report) = problem.solve(&SolverOptions::default()).map_err(|e| e.to_string())?;
            residual = residual.max(report.residual);
            errors.push(xi.l2_error(&data.value));
        }
        let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        ok &= residual < 1e-8 && orders.iter().all(|&o| o >= 2.7);
        details.push(format!("{}: orders {:.2}, {:.2}, residual {residual:.1e}", bc.name(), orders[0], orders[1]));
    }
    check(ok, details.join("; "))
}

fn free_system() -> Outcome {
    let spec = FieldSpec { potential: PairPotential::Zero, cutoff: None, ..control_spec() };
    let m = model(&spec);
    let plan = MeshPlan { h: 0.5, ..MeshPlan::default() };
    let mesh = Arc::new(plan.build(&m).map_err(|e| e.to_string())?);
    let problem = FemProblem::assemble(mesh.clone(), &m, BoundaryCondition::Plain).map_err(|e| e.to_string())?;
    let (xi, _) = problem.solve(&SolverOptions::default()).map_err(|e| e.to_string())?;
    let psi = P2Field::interpolate(mesh, |x| m.psi_one(&PlaneVec::from_chart(x[0], x[1])));
    let (a, b) = (xi.l2_norm(), psi.l2_norm());
    check(a < 1e-8 * b, format!("‖ξ‖ = {a:.1e}, ‖ψ₁‖ = {b:.3e}"))
}

fn desk_run() -> Outcome {
    let spec = control_spec();
    let m = model(&spec);
    let plan = MeshPlan::default();
    let t = Instant::now();
    let mesh = Arc::new(plan.build(&m).map_err(|e| e.to_string())?);
    let dofs = mesh.dofs();
    let problem = FemProblem::assemble(mesh, &m, BoundaryCondition::Plain).map_err(|e| e.to_string())?;
    let (xi, report) = problem.solve(&SolverOptions::default()).map_err(|e| e.to_string())?;
    let solve_time = t.elapsed();
    let settings = DiagnosticsSettings {
        radii: (18..=24).map(f64::from).collect(),
        samples: 1440,
        profile_radius: 22.0,
        profile_samples: 1440,
        symmetry_inner: 14.0,
    };
    let d = diagnose(&m, &xi, &settings).map_err(|e| e.to_string())?;
    let finite = d.norms.iter().all(|c| c.n.is_finite() && c.n > 0.0 && c.m.is_finite());
    let variation = d.n_variation();
    let m_ratio = d.m_ratio();
    let (whole, outer) = d.symmetry.ok_or("control q lost its swap symmetry")?;
    let peaks: Vec<String> = d.profile.peaks().iter().take(2).map(|(a, _)| format!("{:.1}°", a.to_degrees())).collect();
    let in_windows = d.dominant_peaks_in_windows();
    check(
        finite && variation < 0.25 && m_ratio <= 0.05 && whole < 1e-2 && in_windows,
        format!(
            "{dofs} dofs, residual {:.1e}, mesh+solve {solve_time:.1?}; N variation {:.1}%, max M/(E N) {m_ratio:.1e}, \
             swap defect {whole:.1e} (|x| ≥ 14: {outer:.1e}), peaks {} in windows: {in_windows}",
            report.residual,
            100.0 * variation,
            peaks.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "pair unitarity", unitarity, Some(1)),
        (2, "square-barrier oracle", square_barrier, Some(1)),
        (3, "Fresnel kernel", fresnel, None),
        (4, "ray ansatz exactness", ray_exactness, Some(10)),
        (5, "continuity and jumps", ray_structure, None),
        (6, "Helmholtz correction term", helmholtz_correction, None),
        (7, "discrepancy oracle", discrepancy_oracle, Some(30)),
        (8, "discrepancy decay law", decay_law, None),
        (9, "FEM manufactured solution", fem_verification, Some(300)),
        (10, "free-system null test", free_system, None),
        (11, "desk-scale run", desk_run, Some(1800)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (n, name, f, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == &n.to_string()) {
            continue;
        }
        let t = Instant::now();
        let outcome = within(f(), t.elapsed(), budget.map(Duration::from_secs));
        let elapsed = t.elapsed();
        match outcome {
            Ok(d) => println!("criterion {n:>2} PASS  {name}: {d} [{elapsed:.2?}]"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {d} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 { ExitCode::FAILURE } else { ExitCode::SUCCESS }
}
