//! Quadratic Lagrange elements: shape functions, point location and evaluation
//! of a nodal field.
//!
//! Local node order is the three corners followed by the midpoints of edges
//! 0-1, 1-2 and 2-0.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::mesh::Mesh;
use super::quadrature::TRIANGLE_DEG5;
use crate::{Error, Result};

pub fn shape(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

/// `∂N_i/∂λ_k`.
pub fn shape_dl(l: [f64; 3]) -> [[f64; 3]; 6] {
    [
        [4.0 * l[0] - 1.0, 0.0, 0.0],
        [0.0, 4.0 * l[1] - 1.0, 0.0],
        [0.0, 0.0, 4.0 * l[2] - 1.0],
        [4.0 * l[1], 4.0 * l[0], 0.0],
        [0.0, 4.0 * l[2], 4.0 * l[1]],
        [4.0 * l[2], 0.0, 4.0 * l[0]],
    ]
}

/// The affine map of a straight triangle.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub corners: [[f64; 2]; 3],
    /// Twice the signed area.
    pub det: f64,
    /// `∇λ_k`, constant on the triangle.
    pub grad_l: [[f64; 2]; 3],
}

impl Affine {
    pub fn new(corners: [[f64; 2]; 3]) -> Self {
        let [a, b, c] = corners;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
        let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
        let g0 = [-g1[0] - g2[0], -g1[1] - g2[1]];
        Affine { corners, det, grad_l: [g0, g1, g2] }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn point(&self, l: [f64; 3]) -> [f64; 2] {
        let [a, b, c] = self.corners;
        [
            l[0] * a[0] + l[1] * b[0] + l[2] * c[0],
            l[0] * a[1] + l[1] * b[1] + l[2] * c[1],
        ]
    }

    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let a = self.corners[0];
        let d = [x[0] - a[0], x[1] - a[1]];
        let l1 = self.grad_l[1][0] * d[0] + self.grad_l[1][1] * d[1];
        let l2 = self.grad_l[2][0] * d[0] + self.grad_l[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Physical gradients of the six shape functions.
    pub fn shape_gradients(&self, l: [f64; 3]) -> [[f64; 2]; 6] {
        let dl = shape_dl(l);
        let mut g = [[0.0; 2]; 6];
        for (gi, di) in g.iter_mut().zip(dl) {
            for k in 0..3 {
                gi[0] += di[k] * self.grad_l[k][0];
                gi[1] += di[k] * self.grad_l[k][1];
            }
        }
        g
    }
}

pub fn element(mesh: &Mesh, t: usize) -> Affine {
    let n = &mesh.triangles[t];
    Affine::new([mesh.nodes[n[0]], mesh.nodes[n[1]], mesh.nodes[n[2]]])
}

/// Uniform bucket grid over the bounding square of the disk.
#[derive(Debug, Clone)]
pub struct Locator {
    origin: f64,
    cell: f64,
    cells: usize,
    start: Vec<usize>,
    items: Vec<usize>,
}

/// Points this far outside every triangle (in barycentric units) are still accepted.
const LOCATE_SLACK: f64 = 1e-9;

impl Locator {
    pub fn new(mesh: &Mesh) -> Self {
        let origin = -mesh.radius * (1.0 + 1e-9);
        let cells = ((mesh.triangles.len() as f64).sqrt().ceil() as usize).max(1);
        let cell = -2.0 * origin / cells as f64;
        let index = |v: f64| (((v - origin) / cell).floor().max(0.0) as usize).min(cells - 1);
        let bbox = |t: &[usize; 6]| {
            let p = [mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]];
            let (x0, x1) = (p.iter().map(|q| q[0]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[0]).fold(f64::NEG_INFINITY, f64::max));
            let (y0, y1) = (p.iter().map(|q| q[1]).fold(f64::INFINITY, f64::min), p.iter().map(|q| q[1]).fold(f64::NEG_INFINITY, f64::max));
            (index(x0), index(x1), index(y0), index(y1))
        };
        let mut count = vec![0usize; cells * cells + 1];
        for t in &mesh.triangles {
            let (i0, i1, j0, j1) = bbox(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    count[j * cells + i + 1] += 1;
                }
            }
        }
        for k in 0..cells * cells {
            count[k + 1] += count[k];
        }
        let mut fill = count.clone();
        let mut items = vec![0usize; count[cells * cells]];
        for (id, t) in mesh.triangles.iter().enumerate() {
            let (i0, i1, j0, j1) = bbox(t);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    items[fill[j * cells + i]] = id;
                    fill[j * cells + i] += 1;
                }
            }
        }
        Locator { origin, cell, cells, start: count, items }
    }

    /// Containing triangle and barycentric coordinates of `x`.
    pub fn locate(&self, mesh: &Mesh, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let i = ((x[0] - self.origin) / self.cell).floor();
        let j = ((x[1] - self.origin) / self.cell).floor();
        if !(i >= 0.0 && j >= 0.0 && (i as usize) < self.cells && (j as usize) < self.cells) {
            return None;
        }
        let k = j as usize * self.cells + i as usize;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.items[self.start[k]..self.start[k + 1]] {
            let l = element(mesh, t).barycentric(x);
            let m = l[0].min(l[1]).min(l[2]);
            if m >= 0.0 {
                return Some((t, l));
            }
            if m >= -LOCATE_SLACK && best.is_none_or(|b| m > b.2) {
                best = Some((t, l, m));
            }
        }
        best.map(|(t, l, _)| (t, l))
    }
}

/// A nodal P2 field on a mesh.
#[derive(Debug, Clone)]
pub struct P2Field {
    pub mesh: Arc<Mesh>,
    pub values: Vec<Complex64>,
    locator: Locator,
}

impl P2Field {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Complex64>) -> Self {
        assert_eq!(mesh.dofs(), values.len());
        let locator = Locator::new(&mesh);
        P2Field { mesh, values, locator }
    }

    pub fn zero(mesh: Arc<Mesh>) -> Self {
        let n = mesh.dofs();
        P2Field::new(mesh, vec![Complex64::new(0.0, 0.0); n])
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<Mesh>, f: impl Fn([f64; 2]) -> Complex64 + Sync) -> Self {
        let values = mesh.nodes.par_iter().map(|&x| f(x)).collect();
        P2Field::new(mesh, values)
    }

    fn local(&self, t: usize) -> [Complex64; 6] {
        self.mesh.triangles[t].map(|n| self.values[n])
    }

    fn locate(&self, x: [f64; 2]) -> Result<(usize, [f64; 3])> {
        self.locator
            .locate(&self.mesh, x)
            .ok_or(Error::PointOutsideDomain { x: x[0], y: x[1] })
    }

    pub fn evaluate(&self, x: [f64; 2]) -> Result<Complex64> {
        let (t, l) = self.locate(x)?;
        Ok(self.local(t).iter().zip(shape(l)).map(|(v, n)| v * n).sum())
    }

    /// Value and chart gradient at `x`.
    pub fn evaluate_with_gradient(&self, x: [f64; 2]) -> Result<(Complex64, [Complex64; 2])> {
        let (t, l) = self.locate(x)?;
        let u = self.local(t);
        let g = element(&self.mesh, t).shape_gradients(l);
        let value = u.iter().zip(shape(l)).map(|(v, n)| v * n).sum();
        let mut grad = [Complex64::new(0.0, 0.0); 2];
        for (v, gi) in u.iter().zip(g) {
            grad[0] += v * gi[0];
            grad[1] += v * gi[1];
        }
        Ok((value, grad))
    }

    pub fn evaluate_many(&self, points: &[[f64; 2]]) -> Result<Vec<Complex64>> {
        points.par_iter().map(|&x| self.evaluate(x)).collect()
    }

    /// `‖u_h - f‖_{L²}` over the meshed polygon, degree-5 quadrature per triangle.
    pub fn l2_error(&self, f: impl Fn([f64; 2]) -> Complex64 + Sync) -> f64 {
        self.l2_integral(|x, u| (u - f(x)).norm_sqr()).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_integral(|_, u| u.norm_sqr()).sqrt()
    }

    /// `∫ g(x, u_h(x)) dx`, summed in triangle order.
    pub fn l2_integral(&self, g: impl Fn([f64; 2], Complex64) -> f64 + Sync) -> f64 {
        let parts: Vec<f64> = (0..self.mesh.triangles.len())
            .into_par_iter()
            .map(|t| {
                let e = element(&self.mesh, t);
                let u = self.local(t);
                TRIANGLE_DEG5
                    .iter()
                    .map(|&(l, w)| {
                        let uh: Complex64 = u.iter().zip(shape(l)).map(|(v, n)| v * n).sum();
                        w * g(e.point(l), uh)
                    })
                    .sum::<f64>()
                    * e.area()
            })
            .collect();
        parts.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{build_mesh, MeshParams, SizeField};

    fn mesh() -> Arc<Mesh> {
        Arc::new(
            build_mesh(&MeshParams { radius: 2.0, size: SizeField::uniform(0.4), min_angle_deg: 20.0, max_vertices: 10_000 })
                .unwrap(),
        )
    }

    #[test]
    fn shape_functions_are_nodal() {
        let nodes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]];
        for (i, l) in nodes.iter().enumerate() {
            let n = shape(*l);
            for (j, v) in n.iter().enumerate() {
                assert_eq!(*v, if i == j { 1.0 } else { 0.0 });
            }
        }
        let l = [0.2, 0.3, 0.5];
        assert!((shape(l).iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratics_are_reproduced_with_gradients() {
        let m = mesh();
        let f = |x: [f64; 2]| Complex64::new(1.0 + x[0] - 2.0 * x[0] * x[1], x[1] * x[1]);
        let grad = |x: [f64; 2]| [Complex64::new(1.0 - 2.0 * x[1], 0.0), Complex64::new(-2.0 * x[0], 2.0 * x[1])];
        let u = P2Field::interpolate(m.clone(), f);
        for x in [[0.1, 0.2], [-1.3, 0.7], [0.0, -1.9], [1.4, 1.4]] {
            let (v, g) = u.evaluate_with_gradient(x).unwrap();
            assert!((v - f(x)).norm() < 1e-12);
            let e = grad(x);
            assert!((g[0] - e[0]).norm() < 1e-11 && (g[1] - e[1]).norm() < 1e-11);
        }
        assert!(u.l2_error(f) < 1e-12);
        for (i, x) in m.nodes.iter().enumerate().step_by(7) {
            assert!((u.evaluate(*x).unwrap() - u.values[i]).norm() < 1e-14 * u.values[i].norm().max(1.0));
        }
    }

    #[test]
    fn outside_points_are_rejected() {
        let u = P2Field::zero(mesh());
        assert!(matches!(u.evaluate([2.5, 0.0]), Err(Error::PointOutsideDomain { .. })));
        assert!(matches!(u.evaluate([0.0, 40.0]), Err(Error::PointOutsideDomain { .. })));
        // every point of the polygon is found
        for e in &u.mesh.boundary_edges {
            let (a, b) = (u.mesh.nodes[e[0]], u.mesh.nodes[e[1]]);
            assert!(u.evaluate([0.3 * a[0] + 0.7 * b[0], 0.3 * a[1] + 0.7 * b[1]]).is_ok());
        }
    }

    #[test]
    fn area_integral() {
        let u = P2Field::interpolate(mesh(), |_| Complex64::new(1.0, 0.0));
        let n = u.mesh.boundary_edges.len() as f64;
        let polygon = 0.5 * n * 4.0 * (std::f64::consts::TAU / n).sin();
        assert!((u.l2_norm().powi(2) - polygon).abs() < 1e-12 * polygon);
    }
}
