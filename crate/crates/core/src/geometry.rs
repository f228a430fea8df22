//! The configuration plane `Γ = {x₁ + x₂ + x₃ = 0}`, its Jacobi frames, the
//! reflections generating the permutation group, and the fan of six rays `σq`.
//!
//! Points are stored as zero-sum triples. The planar chart used for polar
//! angles, meshing and output is the frame-1 Jacobi pair `(X, Y) = (x₁, y₁)`,
//! where `y_j = (x_{j+1} - x_{j+2}) / √3` (cyclic indices). In this chart the
//! screen `l_j = {x_j = 0}` is spanned by the unit vector `l_j` along which
//! `x_{j+1}` increases: `l₁` points at 90°, `l₂` at 210° and `l₃` at 330°.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// One of the three pair frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Frame {
    One,
    Two,
    Three,
}

impl Frame {
    pub const ALL: [Frame; 3] = [Frame::One, Frame::Two, Frame::Three];

    /// Zero-based component index.
    pub fn index(self) -> usize {
        match self {
            Frame::One => 0,
            Frame::Two => 1,
            Frame::Three => 2,
        }
    }

    /// From the 1-based label.
    pub fn from_label(j: usize) -> Option<Frame> {
        match j {
            1 => Some(Frame::One),
            2 => Some(Frame::Two),
            3 => Some(Frame::Three),
            _ => None,
        }
    }

    pub fn label(self) -> usize {
        self.index() + 1
    }

    /// Chart coordinates of the unit normal `k_j` (direction of increasing `x_j`).
    pub fn normal(self) -> [f64; 2] {
        match self {
            Frame::One => [1.0, 0.0],
            Frame::Two => [-0.5, 0.5 * SQRT3],
            Frame::Three => [-0.5, -0.5 * SQRT3],
        }
    }

    /// Chart coordinates of the unit screen direction `l_j`.
    pub fn tangent(self) -> [f64; 2] {
        match self {
            Frame::One => [0.0, 1.0],
            Frame::Two => [-0.5 * SQRT3, -0.5],
            Frame::Three => [0.5 * SQRT3, -0.5],
        }
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A vector of `Γ` stored as its three (zero-sum) coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneVec(pub [f64; 3]);

/// A configuration point.
pub type ConfigPoint = PlaneVec;
/// A wavevector; `E = |q|²`.
pub type KVector = PlaneVec;

impl PlaneVec {
    pub const ZERO: PlaneVec = PlaneVec([0.0; 3]);

    /// From a triple, which must sum to zero within `1e-12` of its scale.
    pub fn new(c: [f64; 3]) -> Result<Self> {
        let scale = c.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let sum = c[0] + c[1] + c[2];
        if sum.abs() > 1e-12 * scale {
            return Err(Error::ConfigInvalid(format!(
                "({}, {}, {}) is not on the zero-sum plane (sum {sum:e})",
                c[0], c[1], c[2]
            )));
        }
        Ok(PlaneVec(c))
    }

    /// From frame-1 chart coordinates.
    pub fn from_chart(x: f64, y: f64) -> Self {
        PlaneVec([x, 0.5 * (-x + SQRT3 * y), 0.5 * (-x - SQRT3 * y)])
    }

    pub fn chart(&self) -> [f64; 2] {
        [self.0[0], (self.0[1] - self.0[2]) / SQRT3]
    }

    /// From Jacobi coordinates `(x_j, y_j)` of frame `j`.
    pub fn from_jacobi(frame: Frame, xj: f64, yj: f64) -> Self {
        let n = frame.normal();
        let t = frame.tangent();
        PlaneVec::from_chart(xj * n[0] + yj * t[0], xj * n[1] + yj * t[1])
    }

    /// Jacobi coordinates `(x_j, y_j)`; `x_j` is just the `j`-th component.
    pub fn jacobi(&self, frame: Frame) -> (f64, f64) {
        let j = frame.index();
        let c = &self.0;
        (c[j], (c[(j + 1) % 3] - c[(j + 2) % 3]) / SQRT3)
    }

    pub fn component(&self, frame: Frame) -> f64 {
        self.0[frame.index()]
    }

    /// `⟨a, b⟩ = (2/3) Σ a_i b_i`.
    pub fn inner(&self, other: &PlaneVec) -> f64 {
        2.0 / 3.0 * (self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2])
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// The reflection `τ_j` across `l_j`: negate every component and swap the two
    /// components other than `j`.
    pub fn reflect(&self, frame: Frame) -> Self {
        let c = self.0;
        match frame {
            Frame::One => PlaneVec([-c[0], -c[2], -c[1]]),
            Frame::Two => PlaneVec([-c[2], -c[1], -c[0]]),
            Frame::Three => PlaneVec([-c[1], -c[0], -c[2]]),
        }
    }

    /// `(x₃, x₁, x₂)`, a rotation by 120° (equals `τ₂τ₃ = τ₃τ₁ = τ₁τ₂`).
    pub fn cycle(&self) -> Self {
        PlaneVec([self.0[2], self.0[0], self.0[1]])
    }

    /// `(x₂, x₁, x₃)`.
    pub fn swap12(&self) -> Self {
        PlaneVec([self.0[1], self.0[0], self.0[2]])
    }

    /// Polar angle in the chart, in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        let [x, y] = self.chart();
        wrap_angle(y.atan2(x))
    }

    pub fn from_polar(r: f64, angle: f64) -> Self {
        PlaneVec::from_chart(r * angle.cos(), r * angle.sin())
    }
}

impl Add for PlaneVec {
    type Output = PlaneVec;
    fn add(self, o: PlaneVec) -> PlaneVec {
        PlaneVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for PlaneVec {
    type Output = PlaneVec;
    fn sub(self, o: PlaneVec) -> PlaneVec {
        PlaneVec([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for PlaneVec {
    type Output = PlaneVec;
    fn neg(self) -> PlaneVec {
        PlaneVec([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<PlaneVec> for f64 {
    type Output = PlaneVec;
    fn mul(self, v: PlaneVec) -> PlaneVec {
        PlaneVec([self * v.0[0], self * v.0[1], self * v.0[2]])
    }
}

impl fmt::Display for PlaneVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6})", self.0[0], self.0[1], self.0[2])
    }
}

/// Maps an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed difference `a - b` mapped to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Wavevector from its frame-1 Jacobi components `(k₁, p₁)`.
pub fn wavevector(k1: f64, p1: f64) -> KVector {
    PlaneVec::from_jacobi(Frame::One, k1, p1)
}

/// The anomalous directions `q₂₃ = τ₂τ₃q = (q₃, q₁, q₂)` and
/// `q₂₁ = τ₂τ₁q = (q₂, q₃, q₁)`.
pub fn anomalous_rays(q: &KVector) -> (KVector, KVector) {
    (q.cycle(), q.cycle().cycle())
}

/// Element of the dihedral symmetry group of `Γ` generated by coordinate
/// permutations and the point reflection `x → -x`. The Hamiltonian is invariant
/// under all of them (the pair potential is even).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    perm: [usize; 3],
    sign: f64,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        perm: [0, 1, 2],
        sign: 1.0,
    };

    /// `x ↦ sign · (x_{perm[0]}, x_{perm[1]}, x_{perm[2]})`.
    pub fn apply(&self, x: &PlaneVec) -> PlaneVec {
        let c = &x.0;
        PlaneVec([
            self.sign * c[self.perm[0]],
            self.sign * c[self.perm[1]],
            self.sign * c[self.perm[2]],
        ])
    }

    pub fn inverse(&self) -> Isometry {
        let mut perm = [0; 3];
        for (i, &p) in self.perm.iter().enumerate() {
            perm[p] = i;
        }
        Isometry { perm, sign: self.sign }
    }

    pub fn is_identity(&self) -> bool {
        *self == Isometry::IDENTITY
    }

    /// An isometry mapping `q` into the canonical sector `{x₁ > 0, x₂ > 0, x₃ < 0}`
    /// (the sector between `-l₂` and `l₁`). `None` if `q` lies on a screen.
    pub fn canonicalizing(q: &KVector) -> Option<Isometry> {
        if q.0.contains(&0.0) {
            return None;
        }
        let positives = q.0.iter().filter(|&&c| c > 0.0).count();
        let sign = if positives == 2 { 1.0 } else { -1.0 };
        let signed: Vec<f64> = q.0.iter().map(|c| sign * c).collect();
        let neg = (0..3).find(|&i| signed[i] < 0.0)?;
        let pos: Vec<usize> = (0..3).filter(|&i| i != neg).collect();
        Some(Isometry {
            perm: [pos[0], pos[1], neg],
            sign,
        })
    }
}

/// Half-line `sign · l_j` of a screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfLine {
    pub frame: Frame,
    pub positive: bool,
}

impl HalfLine {
    pub fn direction(&self) -> [f64; 2] {
        let t = self.frame.tangent();
        if self.positive {
            t
        } else {
            [-t[0], -t[1]]
        }
    }

    pub fn angle(&self) -> f64 {
        let [x, y] = self.direction();
        wrap_angle(y.atan2(x))
    }

    pub fn all() -> [HalfLine; 6] {
        let mut out = [HalfLine {
            frame: Frame::One,
            positive: true,
        }; 6];
        for (i, f) in Frame::ALL.iter().enumerate() {
            out[2 * i] = HalfLine {
                frame: *f,
                positive: true,
            };
            out[2 * i + 1] = HalfLine {
                frame: *f,
                positive: false,
            };
        }
        out
    }
}

impl fmt::Display for HalfLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}l{}", if self.positive { "+" } else { "-" }, self.frame)
    }
}

/// Which group image a ray of the fan is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RayKind {
    Identity,
    Reflected(Frame),
    /// `q₂₃ = τ₂τ₃q`.
    Anomalous23,
    /// `q₂₁ = τ₂τ₁q`.
    Anomalous21,
}

impl RayKind {
    pub fn is_anomalous(self) -> bool {
        matches!(self, RayKind::Anomalous23 | RayKind::Anomalous21)
    }
}

impl fmt::Display for RayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RayKind::Identity => write!(f, "q"),
            RayKind::Reflected(j) => write!(f, "tau{j} q"),
            RayKind::Anomalous23 => write!(f, "q23"),
            RayKind::Anomalous21 => write!(f, "q21"),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub kind: RayKind,
    pub vector: KVector,
    pub angle: f64,
}

/// Angular sector between two consecutive rays, named by the screen half-line it contains.
#[derive(Debug, Clone, Copy)]
pub struct KSector {
    pub start: f64,
    /// May exceed `2π` for the sector that wraps around.
    pub end: f64,
    pub screen: HalfLine,
}

/// Angular offsets of the correction window around an anomalous ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub inner: f64,
    pub outer: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            inner: 8f64.to_radians(),
            outer: 16f64.to_radians(),
        }
    }
}

/// The four angles `ω₁ < ω₂ < ω_anom < ω₃ < ω₄` around an anomalous ray.
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub kind: RayKind,
    pub direction: KVector,
    pub center: f64,
    pub spec: WindowSpec,
}

impl Window {
    /// `[ω₁, ω₂, ω₃, ω₄]`, unwrapped around the centre.
    pub fn angles(&self) -> [f64; 4] {
        let (c, i, o) = (self.center, self.spec.inner, self.spec.outer);
        [c - o, c - i, c + i, c + o]
    }

    /// Signed offset `ω - ω_anom` if the direction lies strictly inside `(ω₁, ω₄)`.
    pub fn offset(&self, angle: f64) -> Option<f64> {
        let d = angle_diff(angle, self.center);
        (d.abs() < self.spec.outer).then_some(d)
    }
}

#[derive(Debug, Clone)]
pub struct SectorFan {
    pub q: KVector,
    /// Sorted by angle.
    pub rays: [Ray; 6],
    /// `sectors[i]` spans `rays[i]` to `rays[i + 1]`.
    pub sectors: [KSector; 6],
    /// Windows around `q₂₃` and `q₂₁`, in that order.
    pub windows: [Window; 2],
}

/// Result of locating a direction in the fan.
#[derive(Debug, Clone, Copy)]
pub struct Placement {
    pub sector: usize,
    pub screen: HalfLine,
    pub angle: f64,
    /// Index into `SectorFan::windows` and the signed offset from its centre.
    pub window: Option<(usize, f64)>,
}

/// Rays closer than this (radians) are treated as coincident.
pub const FAN_TOLERANCE: f64 = 1e-6;

/// Builds the fan of `q`: six sorted rays, the screen label of each sector and
/// the correction windows around the two anomalous rays.
pub fn build_fan(q: &KVector, window: WindowSpec) -> Result<SectorFan> {
    if !(window.inner > 0.0 && window.inner < window.outer) {
        return Err(Error::DegenerateFan(format!(
            "window offsets must satisfy 0 < inner < outer, got {} and {}",
            window.inner, window.outer
        )));
    }
    if !(q.norm() > 0.0) {
        return Err(Error::DegenerateFan("zero wavevector".into()));
    }
    let (q23, q21) = anomalous_rays(q);
    let images = [
        (RayKind::Identity, *q),
        (RayKind::Reflected(Frame::One), q.reflect(Frame::One)),
        (RayKind::Reflected(Frame::Two), q.reflect(Frame::Two)),
        (RayKind::Reflected(Frame::Three), q.reflect(Frame::Three)),
        (RayKind::Anomalous23, q23),
        (RayKind::Anomalous21, q21),
    ];
    let mut rays = images.map(|(kind, vector)| Ray {
        kind,
        vector,
        angle: vector.angle(),
    });
    rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));

    let gaps: Vec<f64> = (0..6)
        .map(|i| {
            let next = if i == 5 { rays[0].angle + TAU } else { rays[i + 1].angle };
            next - rays[i].angle
        })
        .collect();
    if let Some(i) = (0..6).find(|&i| gaps[i] < FAN_TOLERANCE) {
        return Err(Error::DegenerateFan(format!(
            "rays {} and {} coincide",
            rays[i].kind,
            rays[(i + 1) % 6].kind
        )));
    }

    let mut sectors = [KSector {
        start: 0.0,
        end: 0.0,
        screen: HalfLine {
            frame: Frame::One,
            positive: true,
        },
    }; 6];
    for i in 0..6 {
        let start = rays[i].angle;
        let end = start + gaps[i];
        let inside: Vec<HalfLine> = HalfLine::all()
            .into_iter()
            .filter(|h| {
                let d = (h.angle() - start).rem_euclid(TAU);
                d > FAN_TOLERANCE && d < gaps[i] - FAN_TOLERANCE
            })
            .collect();
        if inside.len() != 1 {
            return Err(Error::DegenerateFan(format!(
                "sector from {} to {} contains {} screen half-lines",
                rays[i].kind,
                rays[(i + 1) % 6].kind,
                inside.len()
            )));
        }
        sectors[i] = KSector {
            start,
            end,
            screen: inside[0],
        };
    }

    let windows = [(RayKind::Anomalous23, q23), (RayKind::Anomalous21, q21)].map(|(kind, direction)| Window {
        kind,
        direction,
        center: direction.angle(),
        spec: window,
    });
    for w in &windows {
        for r in rays.iter().filter(|r| r.kind != w.kind) {
            if angle_diff(r.angle, w.center).abs() <= window.outer {
                return Err(Error::DegenerateFan(format!(
                    "window of {} (±{:.2}°) reaches ray {}",
                    w.kind,
                    window.outer.to_degrees(),
                    r.kind
                )));
            }
        }
    }

    Ok(SectorFan {
        q: *q,
        rays,
        sectors,
        windows,
    })
}

impl SectorFan {
    /// Locates the direction of `x` (which must be nonzero). Directions on a
    /// ray belong to the counterclockwise sector.
    pub fn classify(&self, x: &ConfigPoint) -> Placement {
        self.classify_angle(x.angle())
    }

    pub fn classify_angle(&self, angle: f64) -> Placement {
        let angle = wrap_angle(angle);
        // last ray with angle <= direction, wrapping to the final sector
        let sector = self.rays.iter().rposition(|r| r.angle <= angle).unwrap_or(5);
        let window = self
            .windows
            .iter()
            .enumerate()
            .find_map(|(i, w)| w.offset(angle).map(|d| (i, d)));
        Placement {
            sector,
            screen: self.sectors[sector].screen,
            angle,
            window,
        }
    }

    /// Index of the sector containing the given half-line.
    pub fn sector_of(&self, screen: HalfLine) -> usize {
        self.sectors
            .iter()
            .position(|s| s.screen == screen)
            .expect("every half-line lies in exactly one sector")
    }

    pub fn min_gap(&self) -> f64 {
        (0..6)
            .map(|i| self.sectors[i].end - self.sectors[i].start)
            .fold(f64::INFINITY, f64::min)
    }
}
