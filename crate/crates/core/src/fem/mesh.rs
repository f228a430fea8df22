//! Quadratic triangle meshes of a disk.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use super::delaunay::{refine_disk, RefineParams};
use crate::error::{Error, Result};

/// Region tag of a triangle, used for local refinement and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Generic,
    Strip,
    Window,
    Core,
}

impl Region {
    fn code(self) -> u8 {
        match self {
            Region::Generic => 0,
            Region::Strip => 1,
            Region::Window => 2,
            Region::Core => 3,
        }
    }

    fn from_code(c: u8) -> Option<Region> {
        match c {
            0 => Some(Region::Generic),
            1 => Some(Region::Strip),
            2 => Some(Region::Window),
            3 => Some(Region::Core),
            _ => None,
        }
    }
}

/// Target edge length: `h` in general, scaled down inside the interaction
/// strips, the anomalous windows and a central disk. Where regions overlap the
/// smallest factor wins.
#[derive(Debug, Clone)]
pub struct SizeField {
    pub h: f64,
    /// `b/2`; strips are refined out to `b/2 + h`.
    pub strip_halfwidth: f64,
    pub strip_factor: f64,
    /// `(centre angle, half-width)` of each refined wedge.
    pub windows: Vec<(f64, f64)>,
    pub window_factor: f64,
    /// Wedges are only refined beyond this radius.
    pub window_radius: f64,
    pub core_radius: f64,
    pub core_factor: f64,
}

impl SizeField {
    pub fn uniform(h: f64) -> Self {
        SizeField {
            h,
            strip_halfwidth: 0.0,
            strip_factor: 1.0,
            windows: Vec::new(),
            window_factor: 1.0,
            window_radius: 0.0,
            core_radius: 0.0,
            core_factor: 1.0,
        }
    }

    pub fn region(&self, p: [f64; 2]) -> Region {
        self.refinement(p).0
    }

    fn refinement(&self, p: [f64; 2]) -> (Region, f64) {
        let mut best = (Region::Generic, 1.0);
        let candidates = [
            (Region::Strip, self.strip_factor, self.in_strip(p)),
            (Region::Window, self.window_factor, self.in_window(p)),
            (Region::Core, self.core_factor, p[0].hypot(p[1]) <= self.core_radius),
        ];
        for (region, factor, inside) in candidates {
            if inside && factor < best.1 {
                best = (region, factor);
            }
        }
        best
    }

    fn in_strip(&self, p: [f64; 2]) -> bool {
        // frame components x_j of the chart point
        let s3 = 3f64.sqrt();
        let x = [p[0], 0.5 * (-p[0] + s3 * p[1]), 0.5 * (-p[0] - s3 * p[1])];
        let reach = self.strip_halfwidth + self.h;
        self.strip_halfwidth > 0.0 && x.iter().any(|c| c.abs() <= reach)
    }

    fn in_window(&self, p: [f64; 2]) -> bool {
        if p[0].hypot(p[1]) < self.window_radius {
            return false;
        }
        let a = p[1].atan2(p[0]);
        self.windows.iter().any(|&(c, w)| {
            let d = (a - c).rem_euclid(TAU);
            d.min(TAU - d) <= w
        })
    }

    pub fn at(&self, p: [f64; 2]) -> f64 {
        self.h * self.refinement(p).1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub radius: f64,
    /// Vertices first, then edge midpoints.
    pub nodes: Vec<[f64; 2]>,
    pub vertex_count: usize,
    /// Corners `0, 1, 2` counterclockwise, then midpoints of edges `0-1`, `1-2`, `2-0`.
    pub triangles: Vec<[usize; 6]>,
    /// `[a, b, midpoint]` with `a → b` counterclockwise along the circle.
    pub boundary_edges: Vec<[usize; 3]>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshStats {
    pub vertices: usize,
    pub triangles: usize,
    pub dofs: usize,
    pub min_angle_deg: f64,
    pub max_angle_deg: f64,
    pub min_edge: f64,
    pub max_edge: f64,
    pub mean_edge: f64,
    pub boundary_edges: usize,
}

/// Mesh construction parameters.
#[derive(Debug, Clone)]
pub struct MeshParams {
    pub radius: f64,
    pub size: SizeField,
    /// Every angle must be at least this after refinement.
    pub min_angle_deg: f64,
    pub max_vertices: usize,
}

/// Delaunay-refined quadratic mesh of the disk `|x| ≤ radius`.
pub fn build_mesh(params: &MeshParams) -> Result<Mesh> {
    let size = &params.size;
    if !(params.radius > 0.0 && size.h > 0.0 && size.h < params.radius) {
        return Err(Error::ConfigInvalid(format!(
            "mesh needs 0 < h < R, got h = {} and R = {}",
            size.h, params.radius
        )));
    }
    let factors_ok = |f: f64| f > 0.0 && f <= 1.0;
    if ![size.strip_factor, size.window_factor, size.core_factor].into_iter().all(factors_ok) {
        return Err(Error::ConfigInvalid(format!(
            "refinement factors must lie in (0, 1], got {}, {} and {}",
            size.strip_factor, size.window_factor, size.core_factor
        )));
    }
    let smallest = size.h * size.strip_factor.min(size.window_factor).min(size.core_factor);
    let field = |p: [f64; 2]| size.at(p);
    let disk = refine_disk(&RefineParams {
        radius: params.radius,
        boundary_h: size.h,
        size: &field,
        radius_edge: std::f64::consts::SQRT_2,
        min_edge: 0.05 * smallest,
        max_vertices: params.max_vertices,
    })?;
    let mesh = Mesh::from_linear(params.radius, disk.points, &disk.triangles, &disk.boundary, |p| {
        size.region(p)
    })?;
    let stats = mesh.stats();
    if stats.min_angle_deg < params.min_angle_deg {
        return Err(Error::MeshQuality(format!(
            "minimum angle {:.2}° below the required {:.2}°",
            stats.min_angle_deg, params.min_angle_deg
        )));
    }
    Ok(mesh)
}

fn angle_at(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let u = [a[0] - p[0], a[1] - p[1]];
    let v = [b[0] - p[0], b[1] - p[1]];
    (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1])
}

impl Mesh {
    /// Adds straight-edge midpoints to a linear triangulation.
    pub fn from_linear(
        radius: f64,
        mut nodes: Vec<[f64; 2]>,
        triangles: &[[usize; 3]],
        boundary: &[usize],
        region: impl Fn([f64; 2]) -> Region,
    ) -> Result<Mesh> {
        let vertex_count = nodes.len();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * triangles.len() / 2 + boundary.len());
        let mut p2 = Vec::with_capacity(triangles.len());
        let mut regions = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let [a, b, c] = tri.map(|v| nodes[v]);
            let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if !(det > 0.0) {
                return Err(Error::QuadratureFailure {
                    triangle: t,
                    jacobian: det,
                });
            }
            let mut m = [0usize; 3];
            for (e, (i, j)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let key = (tri[i].min(tri[j]), tri[i].max(tri[j]));
                m[e] = *mid.entry(key).or_insert_with(|| {
                    let (p, q) = (nodes[tri[i]], nodes[tri[j]]);
                    nodes.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                    nodes.len() - 1
                });
            }
            p2.push([tri[0], tri[1], tri[2], m[0], m[1], m[2]]);
            regions.push(region([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]));
        }
        let n = boundary.len();
        let mut boundary_edges = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (boundary[k], boundary[(k + 1) % n]);
            let m = *mid.get(&(a.min(b), a.max(b))).ok_or_else(|| {
                Error::MeshQuality(format!("boundary chord {a}-{b} is not a mesh edge"))
            })?;
            boundary_edges.push([a, b, m]);
        }
        Ok(Mesh {
            radius,
            nodes,
            vertex_count,
            triangles: p2,
            boundary_edges,
            regions,
        })
    }

    pub fn dofs(&self) -> usize {
        self.nodes.len()
    }

    /// Boundary vertices in counterclockwise order.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_edges.iter().map(|e| e[0]).collect()
    }

    pub fn stats(&self) -> MeshStats {
        let mut min_angle = f64::INFINITY;
        let mut max_angle: f64 = 0.0;
        let mut min_edge = f64::INFINITY;
        let mut max_edge: f64 = 0.0;
        let mut sum = 0.0;
        let mut count = 0usize;
        // each edge owns one midpoint node
        let mut seen = vec![false; self.nodes.len() - self.vertex_count];
        for t in &self.triangles {
            let p = [self.nodes[t[0]], self.nodes[t[1]], self.nodes[t[2]]];
            for i in 0..3 {
                let a = angle_at(p[i], p[(i + 1) % 3], p[(i + 2) % 3]).to_degrees();
                min_angle = min_angle.min(a);
                max_angle = max_angle.max(a);
                let m = t[3 + i] - self.vertex_count;
                if !seen[m] {
                    seen[m] = true;
                    let l = (p[i][0] - p[(i + 1) % 3][0]).hypot(p[i][1] - p[(i + 1) % 3][1]);
                    min_edge = min_edge.min(l);
                    max_edge = max_edge.max(l);
                    sum += l;
                    count += 1;
                }
            }
        }
        MeshStats {
            vertices: self.vertex_count,
            triangles: self.triangles.len(),
            dofs: self.dofs(),
            min_angle_deg: min_angle,
            max_angle_deg: max_angle,
            min_edge,
            max_edge,
            mean_edge: sum / count.max(1) as f64,
            boundary_edges: self.boundary_edges.len(),
        }
    }

    /// Largest distance of a boundary vertex from the circle.
    pub fn boundary_defect(&self) -> f64 {
        self.boundary_edges
            .iter()
            .map(|e| {
                let p = self.nodes[e[0]];
                (p[0].hypot(p[1]) - self.radius).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Splits every triangle into four. New boundary vertices are moved onto the circle.
    pub fn refine_uniform(&self) -> Result<Mesh> {
        let mut nodes = self.nodes.clone();
        for e in &self.boundary_edges {
            let p = nodes[e[2]];
            let s = self.radius / p[0].hypot(p[1]);
            nodes[e[2]] = [p[0] * s, p[1] * s];
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        let mut regions = Vec::with_capacity(4 * self.triangles.len());
        for (t, n) in self.triangles.iter().enumerate() {
            let [a, b, c, ab, bc, ca] = *n;
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
            regions.extend_from_slice(&[self.regions[t]; 4]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            boundary.push(e[0]);
            boundary.push(e[2]);
        }
        let mut mesh = Mesh::from_linear(self.radius, nodes, &triangles, &boundary, |_| Region::Generic)?;
        mesh.regions = regions;
        Ok(mesh)
    }

    /// Writes the plain-text format: header comment lines, then `radius`, the
    /// node list, the triangle list (six node indices and a region code) and
    /// the boundary edges.
    pub fn write(&self, path: &Path, header: &[String]) -> Result<()> {
        let mut out = String::with_capacity(64 * self.nodes.len());
        out.push_str("# threebody mesh v1\n");
        for h in header {
            let _ = writeln!(out, "# {h}");
        }
        let _ = writeln!(out, "radius {}", self.radius);
        let _ = writeln!(out, "nodes {} {}", self.nodes.len(), self.vertex_count);
        for p in &self.nodes {
            let _ = writeln!(out, "{} {}", p[0], p[1]);
        }
        let _ = writeln!(out, "triangles {}", self.triangles.len());
        for (t, r) in self.triangles.iter().zip(&self.regions) {
            let _ = writeln!(out, "{} {} {} {} {} {} {}", t[0], t[1], t[2], t[3], t[4], t[5], r.code());
        }
        let _ = writeln!(out, "boundary {}", self.boundary_edges.len());
        for e in &self.boundary_edges {
            let _ = writeln!(out, "{} {} {}", e[0], e[1], e[2]);
        }
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(out.as_bytes())?;
        f.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Mesh> {
        let bad = |reason: String| Error::Format {
            path: path.to_path_buf(),
            reason,
        };
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = file
            .lines()
            .map(|l| l.map_err(Error::from))
            .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty() || s.starts_with('#')));
        let mut next = |what: &str| -> Result<String> {
            lines.next().unwrap_or_else(|| Err(bad(format!("unexpected end of file, expected {what}"))))
        };
        fn fields<T: std::str::FromStr>(line: &str, n: usize) -> Option<Vec<T>> {
            let v: Vec<T> = line.split_whitespace().map(|s| s.parse().ok()).collect::<Option<_>>()?;
            (v.len() == n).then_some(v)
        }
        let keyed = |line: String, key: &str| -> Result<Vec<String>> {
            let mut it = line.split_whitespace();
            if it.next() != Some(key) {
                return Err(bad(format!("expected `{key}`, found `{line}`")));
            }
            Ok(it.map(String::from).collect())
        };
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|e| bad(format!("{s}: {e}")));

        let r = keyed(next("radius")?, "radius")?;
        let radius: f64 = r
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad radius".into()))?;
        let n = keyed(next("nodes")?, "nodes")?;
        if n.len() != 2 {
            return Err(bad("`nodes` needs a node count and a vertex count".into()));
        }
        let (count, vertex_count) = (parse_usize(&n[0])?, parse_usize(&n[1])?);
        let mut nodes = Vec::with_capacity(count);
        for i in 0..count {
            let l = next("node")?;
            let v: Vec<f64> = fields(&l, 2).ok_or_else(|| bad(format!("node {i}: `{l}`")))?;
            nodes.push([v[0], v[1]]);
        }
        let t = keyed(next("triangles")?, "triangles")?;
        let tcount = parse_usize(t.first().ok_or_else(|| bad("missing triangle count".into()))?)?;
        let mut triangles = Vec::with_capacity(tcount);
        let mut regions = Vec::with_capacity(tcount);
        for i in 0..tcount {
            let l = next("triangle")?;
            let v: Vec<usize> = fields(&l, 7).ok_or_else(|| bad(format!("triangle {i}: `{l}`")))?;
            if v[..6].iter().any(|&k| k >= count) {
                return Err(bad(format!("triangle {i} references a missing node")));
            }
            triangles.push([v[0], v[1], v[2], v[3], v[4], v[5]]);
            regions.push(Region::from_code(v[6] as u8).ok_or_else(|| bad(format!("triangle {i}: bad region")))?);
        }
        let b = keyed(next("boundary")?, "boundary")?;
        let bcount = parse_usize(b.first().ok_or_else(|| bad("missing boundary count".into()))?)?;
        let mut boundary_edges = Vec::with_capacity(bcount);
        for i in 0..bcount {
            let l = next("boundary edge")?;
            let v: Vec<usize> = fields(&l, 3).ok_or_else(|| bad(format!("boundary edge {i}: `{l}`")))?;
            if v.iter().any(|&k| k >= count) {
                return Err(bad(format!("boundary edge {i} references a missing node")));
            }
            boundary_edges.push([v[0], v[1], v[2]]);
        }
        Ok(Mesh {
            radius,
            nodes,
            vertex_count,
            triangles,
            boundary_edges,
            regions,
        })
    }
}
