//! Incremental Delaunay triangulation (Bowyer–Watson) with exact predicates,
//! and Delaunay refinement of a disk.
//!
//! The disk is approximated by the polygon of its boundary vertices. That
//! polygon is convex, so its edges are always Delaunay edges and no
//! constrained triangulation is needed. Circumcentres that would encroach on a
//! boundary chord split the chord at the arc midpoint instead.

use robust::{incircle, orient2d, Coord};
use std::collections::VecDeque;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Triangles whose circumradius exceeds this multiple of the target size are
/// split. Calibrated so the mean edge length comes out close to the target.
const SIZE_RADIUS_RATIO: f64 = 0.95;

#[derive(Debug, Clone, Copy)]
struct Tri {
    /// Counterclockwise.
    v: [usize; 3],
    /// `n[i]` is across the edge opposite `v[i]`.
    n: [usize; 3],
    alive: bool,
}

fn coord(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

pub struct Triangulation {
    pts: Vec<[f64; 2]>,
    tris: Vec<Tri>,
    free: Vec<usize>,
    last: usize,
    // scratch buffers reused between insertions
    cavity: Vec<usize>,
    mark: Vec<u32>,
    stamp: u32,
}

/// Outcome of one insertion.
pub enum Inserted {
    Vertex(usize),
    /// The point coincides with an existing vertex.
    Duplicate(usize),
}

impl Triangulation {
    /// An empty triangulation inside a super-triangle that contains the disk of
    /// radius `extent` around the origin by a wide margin. The three super
    /// vertices are indices 0, 1, 2.
    pub fn new(extent: f64) -> Self {
        let d = 1e3 * extent;
        let pts = vec![[-3.0 * d, -2.0 * d], [3.0 * d, -2.0 * d], [0.0, 4.0 * d]];
        let tris = vec![Tri {
            v: [0, 1, 2],
            n: [NONE; 3],
            alive: true,
        }];
        Triangulation {
            pts,
            tris,
            free: Vec::new(),
            last: 0,
            cavity: Vec::new(),
            mark: vec![0],
            stamp: 0,
        }
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.pts
    }

    pub fn is_super(&self, v: usize) -> bool {
        v < 3
    }

    fn orient(&self, a: usize, b: usize, p: [f64; 2]) -> f64 {
        orient2d(coord(self.pts[a]), coord(self.pts[b]), coord(p))
    }

    /// Visibility walk; terminates on Delaunay triangulations.
    fn locate(&self, p: [f64; 2]) -> usize {
        let mut t = self.last;
        if !self.tris[t].alive {
            t = self.tris.iter().position(|t| t.alive).expect("nonempty triangulation");
        }
        let mut steps = 0usize;
        'walk: loop {
            steps += 1;
            debug_assert!(steps < 10 * self.tris.len() + 100, "point location did not terminate");
            let tri = self.tris[t];
            // start from a rotating edge to avoid pathological zig-zags
            for k in 0..3 {
                let i = (k + steps) % 3;
                let (a, b) = (tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]);
                if self.orient(a, b, p) < 0.0 {
                    let next = tri.n[i];
                    if next == NONE {
                        return t;
                    }
                    t = next;
                    continue 'walk;
                }
            }
            return t;
        }
    }

    fn in_circumcircle(&self, t: usize, p: [f64; 2]) -> bool {
        let v = self.tris[t].v;
        incircle(coord(self.pts[v[0]]), coord(self.pts[v[1]]), coord(self.pts[v[2]]), coord(p)) > 0.0
    }

    fn alloc(&mut self, tri: Tri) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            i
        } else {
            self.tris.push(tri);
            self.mark.push(0);
            self.tris.len() - 1
        }
    }

    /// Inserts `p`, returning the new triangles through `created`.
    pub fn insert(&mut self, p: [f64; 2], created: &mut Vec<usize>) -> Inserted {
        created.clear();
        let start = self.locate(p);
        for &v in &self.tris[start].v {
            if self.pts[v] == p {
                return Inserted::Duplicate(v);
            }
        }
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        let mut cavity = std::mem::take(&mut self.cavity);
        cavity.clear();
        cavity.push(start);
        self.mark[start] = stamp;
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for &nb in &self.tris[t].n {
                if nb != NONE && self.mark[nb] != stamp && self.in_circumcircle(nb, p) {
                    self.mark[nb] = stamp;
                    cavity.push(nb);
                }
            }
        }

        // boundary of the cavity: (a, b, outside neighbour)
        let mut rim: Vec<(usize, usize, usize)> = Vec::with_capacity(cavity.len() + 2);
        for &t in &cavity {
            let tri = self.tris[t];
            for i in 0..3 {
                let nb = tri.n[i];
                if nb == NONE || self.mark[nb] != stamp {
                    rim.push((tri.v[(i + 1) % 3], tri.v[(i + 2) % 3], nb));
                }
            }
        }
        let pi = self.pts.len();
        self.pts.push(p);
        for &t in &cavity {
            self.tris[t].alive = false;
            self.free.push(t);
        }
        for &(a, b, outer) in &rim {
            let t = self.alloc(Tri {
                v: [a, b, pi],
                n: [NONE, NONE, outer],
                alive: true,
            });
            if outer != NONE {
                let o = &mut self.tris[outer];
                for i in 0..3 {
                    if o.v[(i + 1) % 3] == b && o.v[(i + 2) % 3] == a {
                        o.n[i] = t;
                    }
                }
            }
            created.push(t);
        }
        // fan adjacency: edge (b, p) of triangle (a, b, p) is shared with the
        // triangle starting at b, edge (p, a) with the one ending at a
        for (k, &(a, b, _)) in rim.iter().enumerate() {
            let t = created[k];
            let after = rim.iter().position(|r| r.0 == b).expect("closed cavity rim");
            let before = rim.iter().position(|r| r.1 == a).expect("closed cavity rim");
            self.tris[t].n[0] = created[after];
            self.tris[t].n[1] = created[before];
        }
        self.last = created[0];
        self.cavity = cavity;
        Inserted::Vertex(pi)
    }

    /// Live triangles, optionally skipping those touching the super-triangle.
    pub fn triangles(&self, include_super: bool) -> Vec<[usize; 3]> {
        self.tris
            .iter()
            .filter(|t| t.alive && (include_super || t.v.iter().all(|&v| v >= 3)))
            .map(|t| t.v)
            .collect()
    }

    fn tri(&self, t: usize) -> Option<[usize; 3]> {
        let tri = self.tris[t];
        tri.alive.then_some(tri.v)
    }
}

/// Geometry of one triangle.
pub fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let (bx, by) = (b[0] - a[0], b[1] - a[1]);
    let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    [a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Parameters of the disk refinement.
pub struct RefineParams<'a> {
    pub radius: f64,
    /// Initial boundary chord length.
    pub boundary_h: f64,
    /// Target edge length at a point.
    pub size: &'a (dyn Fn([f64; 2]) -> f64 + Sync),
    /// Circumradius-to-shortest-edge bound; `√2` guarantees angles above 20.7°.
    pub radius_edge: f64,
    /// Edges shorter than this are never split further.
    pub min_edge: f64,
    pub max_vertices: usize,
}

/// Result of refinement: vertices (boundary vertices listed first around the
/// circle in angular order are marked), counterclockwise triangles.
pub struct DiskTriangulation {
    pub points: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary vertex indices in counterclockwise order.
    pub boundary: Vec<usize>,
}

/// Delaunay refinement of the disk `|x| ≤ radius`.
pub fn refine_disk(params: &RefineParams) -> Result<DiskTriangulation> {
    let r = params.radius;
    let mut tri = Triangulation::new(r);
    let mut created = Vec::new();
    let nb = ((TAU * r / params.boundary_h).ceil() as usize).max(8);
    // (angle, vertex) sorted by angle
    let mut boundary: Vec<(f64, usize)> = Vec::with_capacity(4 * nb);
    let mut queue: VecDeque<(usize, [usize; 3])> = VecDeque::new();
    for i in 0..nb {
        let a = TAU * i as f64 / nb as f64;
        match tri.insert([r * a.cos(), r * a.sin()], &mut created) {
            Inserted::Vertex(v) => boundary.push((a, v)),
            Inserted::Duplicate(_) => unreachable!("distinct boundary points"),
        }
    }
    if let Inserted::Vertex(_) = tri.insert([0.0, 0.0], &mut created) {}
    for (t, v) in tri.tris.iter().enumerate().filter(|(_, t)| t.alive).map(|(i, t)| (i, t.v)) {
        queue.push_back((t, v));
    }

    let chord_of = |boundary: &[(f64, usize)], angle: f64| -> usize {
        // index k of the chord from boundary[k] to boundary[k+1] (cyclic) containing angle
        match boundary.partition_point(|&(a, _)| a <= angle) {
            0 => boundary.len() - 1,
            k => k - 1,
        }
    };

    while let Some((t, snapshot)) = queue.pop_front() {
        let Some(v) = tri.tri(t) else { continue };
        if v != snapshot || v.iter().any(|&x| tri.is_super(x)) {
            continue;
        }
        let p = [tri.pts[v[0]], tri.pts[v[1]], tri.pts[v[2]]];
        let edges = [dist(p[1], p[2]), dist(p[2], p[0]), dist(p[0], p[1])];
        let shortest = edges.iter().cloned().fold(f64::INFINITY, f64::min);
        let cc = circumcenter(p[0], p[1], p[2]);
        let rc = dist(cc, p[0]);
        let centroid = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let target = (params.size)(centroid);
        let too_big = rc > SIZE_RADIUS_RATIO * target;
        let skinny = rc > params.radius_edge * shortest;
        if !(too_big || skinny) || (!too_big && shortest < params.min_edge) {
            continue;
        }
        if tri.pts.len() >= params.max_vertices {
            return Err(Error::MeshQuality(format!(
                "refinement exceeded {} vertices",
                params.max_vertices
            )));
        }

        // does the circumcentre encroach on (or lie beyond) a boundary chord?
        let angle = cc[1].atan2(cc[0]).rem_euclid(TAU);
        let k = chord_of(&boundary, angle);
        let n = boundary.len();
        let mut split = None;
        for dk in [0, n - 1, 1] {
            let i = (k + dk) % n;
            let (a, b) = (tri.pts[boundary[i].1], tri.pts[boundary[(i + 1) % n].1]);
            let outside = orient2d(coord(a), coord(b), coord(cc)) <= 0.0;
            let dot = (a[0] - cc[0]) * (b[0] - cc[0]) + (a[1] - cc[1]) * (b[1] - cc[1]);
            if (dk == 0 && outside) || dot <= 0.0 {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let a0 = boundary[i].0;
                let a1 = if i + 1 == n { boundary[0].0 + TAU } else { boundary[i + 1].0 };
                let chord = dist(tri.pts[boundary[i].1], tri.pts[boundary[(i + 1) % n].1]);
                if chord < params.min_edge {
                    continue;
                }
                let am = (0.5 * (a0 + a1)).rem_euclid(TAU);
                if let Inserted::Vertex(v) = tri.insert([r * am.cos(), r * am.sin()], &mut created) {
                    let pos = boundary.partition_point(|&(a, _)| a < am);
                    boundary.insert(pos, (am, v));
                }
                // the triangle may still be bad after the split
                queue.push_back((t, snapshot));
            }
            None => {
                if let Inserted::Duplicate(_) = tri.insert(cc, &mut created) {
                    continue;
                }
            }
        }
        for &c in &created {
            queue.push_back((c, tri.tris[c].v));
        }
    }

    // compact: drop the super vertices and renumber
    let triangles = tri.triangles(false);
    let mut map = vec![NONE; tri.pts.len()];
    let mut points = Vec::with_capacity(tri.pts.len() - 3);
    for t in &triangles {
        for &v in t {
            if map[v] == NONE {
                map[v] = points.len();
                points.push(tri.pts[v]);
            }
        }
    }
    let triangles: Vec<[usize; 3]> = triangles.iter().map(|t| t.map(|v| map[v])).collect();
    let boundary: Vec<usize> = boundary.iter().map(|&(_, v)| map[v]).collect();
    if boundary.contains(&NONE) {
        return Err(Error::MeshQuality("a boundary vertex is not part of the mesh".into()));
    }
    Ok(DiskTriangulation {
        points,
        triangles,
        boundary,
    })
}
