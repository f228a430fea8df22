//! Weak form of `(-Δ + Σv - E) ξ = -Q` on the meshed disk with a Robin
//! radiation condition `∂_n ξ = ρ ξ + g` on the boundary:
//!
//! `∫ ∇ξ·∇w + (Σv - E) ξ w - ρ ∫_∂ ξ w = -∫ Q w + ∫_∂ g w`
//!
//! with `ρ = i√E` (plain) or `ρ = i√E - 1/(2R)` (corrected). Test functions are
//! not conjugated, so the matrix is complex symmetric.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mesh::Mesh;
use super::p2::{element, shape, Affine, P2Field};
use super::quadrature::{GAUSS3, TRIANGLE_DEG4};
use super::solver::{solve, SolveReport, SolverOptions};
use super::sparse::CscMatrix;
use crate::geometry::ConfigPoint;
use crate::wavefield::FieldModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Plain,
    Corrected,
}

impl BoundaryCondition {
    pub fn robin(self, energy: f64, radius: f64) -> Complex64 {
        let plain = Complex64::new(0.0, energy.sqrt());
        match self {
            BoundaryCondition::Plain => plain,
            BoundaryCondition::Corrected => plain - 1.0 / (2.0 * radius),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Plain => "plain",
            BoundaryCondition::Corrected => "corrected",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plain" => Some(BoundaryCondition::Plain),
            "corrected" => Some(BoundaryCondition::Corrected),
            _ => None,
        }
    }
}

/// Coefficients and data of the boundary-value problem, in chart coordinates.
pub trait Source: Sync {
    fn energy(&self) -> f64;
    /// `v(x₁) + v(x₂) + v(x₃)`.
    fn potential(&self, x: [f64; 2]) -> f64;
    /// The source `Q` in `Hξ - Eξ = -Q`.
    fn discrepancy(&self, x: [f64; 2]) -> Complex64;
    /// `g` in `∂_n ξ = ρ ξ + g`; zero for a pure radiation condition.
    fn boundary_data(&self, _x: [f64; 2], _normal: [f64; 2], _robin: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

impl Source for FieldModel {
    fn energy(&self) -> f64 {
        FieldModel::energy(self)
    }

    fn potential(&self, x: [f64; 2]) -> f64 {
        self.potential_sum(&ConfigPoint::from_chart(x[0], x[1]))
    }

    fn discrepancy(&self, x: [f64; 2]) -> Complex64 {
        FieldModel::discrepancy(self, &ConfigPoint::from_chart(x[0], x[1]))
    }
}

type ScalarFn = Box<dyn Fn([f64; 2]) -> Complex64 + Send + Sync>;
type GradientFn = Box<dyn Fn([f64; 2]) -> [Complex64; 2] + Send + Sync>;

/// Data manufactured from a prescribed exact solution with `Σv ≡ 0`:
/// `Q = Δξ* + E ξ*` and `g = ∂_n ξ* - ρ ξ*`.
pub struct Manufactured {
    pub energy: f64,
    pub value: ScalarFn,
    pub gradient: GradientFn,
    pub laplacian: ScalarFn,
}

impl Manufactured {
    /// `ξ* = e^{i d·x}`.
    pub fn plane_wave(energy: f64, d: [f64; 2]) -> Self {
        let wave = move |x: [f64; 2]| Complex64::from_polar(1.0, d[0] * x[0] + d[1] * x[1]);
        let i = Complex64::new(0.0, 1.0);
        Manufactured {
            energy,
            value: Box::new(wave),
            gradient: Box::new(move |x| [i * d[0] * wave(x), i * d[1] * wave(x)]),
            laplacian: Box::new(move |x| -(d[0] * d[0] + d[1] * d[1]) * wave(x)),
        }
    }

    /// `ξ* = c + a·x + xᵀ B x` with symmetric `B = [[b0, b1], [b1, b2]]`.
    pub fn quadratic(energy: f64, c: Complex64, a: [Complex64; 2], b: [Complex64; 3]) -> Self {
        Manufactured {
            energy,
            value: Box::new(move |x| {
                c + a[0] * x[0] + a[1] * x[1] + b[0] * x[0] * x[0] + 2.0 * b[1] * x[0] * x[1] + b[2] * x[1] * x[1]
            }),
            gradient: Box::new(move |x| {
                [a[0] + 2.0 * (b[0] * x[0] + b[1] * x[1]), a[1] + 2.0 * (b[1] * x[0] + b[2] * x[1])]
            }),
            laplacian: Box::new(move |_| 2.0 * (b[0] + b[2])),
        }
    }
}

impl Source for Manufactured {
    fn energy(&self) -> f64 {
        self.energy
    }

    fn potential(&self, _x: [f64; 2]) -> f64 {
        0.0
    }

    fn discrepancy(&self, x: [f64; 2]) -> Complex64 {
        (self.laplacian)(x) + self.energy * (self.value)(x)
    }

    fn boundary_data(&self, x: [f64; 2], normal: [f64; 2], robin: Complex64) -> Complex64 {
        let g = (self.gradient)(x);
        g[0] * normal[0] + g[1] * normal[1] - robin * (self.value)(x)
    }
}

/// Assembled system for the correction field.
#[derive(Debug, Clone)]
pub struct FemProblem {
    pub mesh: Arc<Mesh>,
    pub energy: f64,
    pub bc: BoundaryCondition,
    pub matrix: CscMatrix,
    pub rhs: Vec<Complex64>,
}

type ElementBlock = ([[f64; 6]; 6], [Complex64; 6]);

fn element_block(e: &Affine, source: &dyn Source, energy: f64) -> ElementBlock {
    let mut k = [[0.0; 6]; 6];
    let mut f = [Complex64::new(0.0, 0.0); 6];
    let area = e.area();
    for &(l, w) in &TRIANGLE_DEG4 {
        let x = e.point(l);
        let n = shape(l);
        let g = e.shape_gradients(l);
        let wq = w * area;
        let c = source.potential(x) - energy;
        let q = source.discrepancy(x);
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += wq * (g[i][0] * g[j][0] + g[i][1] * g[j][1] + c * n[i] * n[j]);
            }
            f[i] -= wq * q * n[i];
        }
    }
    (k, f)
}

impl FemProblem {
    pub fn assemble(mesh: Arc<Mesh>, source: &dyn Source, bc: BoundaryCondition) -> Result<FemProblem> {
        let energy = source.energy();
        let blocks: Vec<ElementBlock> = (0..mesh.triangles.len())
            .into_par_iter()
            .map(|t| {
                let e = element(&mesh, t);
                if !(e.det > 0.0) {
                    return Err(Error::QuadratureFailure { triangle: t, jacobian: e.det });
                }
                Ok(element_block(&e, source, energy))
            })
            .collect::<Result<_>>()?;
        let n = mesh.dofs();
        let mut triplets = Vec::with_capacity(36 * blocks.len() + 9 * mesh.boundary_edges.len());
        let mut rhs = vec![Complex64::new(0.0, 0.0); n];
        for (tri, (k, f)) in mesh.triangles.iter().zip(&blocks) {
            for i in 0..6 {
                for j in 0..6 {
                    triplets.push((tri[i], tri[j], Complex64::new(k[i][j], 0.0)));
                }
                rhs[tri[i]] += f[i];
            }
        }
        let robin = bc.robin(energy, mesh.radius);
        for edge in &mesh.boundary_edges {
            let (a, b) = (mesh.nodes[edge[0]], mesh.nodes[edge[1]]);
            let t = [b[0] - a[0], b[1] - a[1]];
            let len = t[0].hypot(t[1]);
            // counterclockwise boundary: outward normal is the tangent turned clockwise
            let normal = [t[1] / len, -t[0] / len];
            let dofs = [edge[0], edge[1], edge[2]];
            for &(s, w) in &GAUSS3 {
                let x = [a[0] + s * t[0], a[1] + s * t[1]];
                let n = [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)];
                let wq = w * len;
                let g = source.boundary_data(x, normal, robin);
                for i in 0..3 {
                    for j in 0..3 {
                        triplets.push((dofs[i], dofs[j], -robin * wq * n[i] * n[j]));
                    }
                    rhs[dofs[i]] += wq * g * n[i];
                }
            }
        }
        let matrix = CscMatrix::from_triplets(n, &triplets);
        Ok(FemProblem { mesh, energy, bc, matrix, rhs })
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<(P2Field, SolveReport)> {
        let (x, report) = solve(&self.matrix, &self.rhs, opts)?;
        Ok((P2Field::new(self.mesh.clone(), x), report))
    }

    /// `Σ conj(ξ_i) A_ij ξ_j`, the form evaluated at `(ξ, ξ̄)`.
    pub fn energy_form(&self, xi: &[Complex64]) -> Complex64 {
        self.matrix.mul_vec(xi).iter().zip(xi).map(|(a, x)| x.conj() * a).sum()
    }
}
