//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` and text after ` #` are comments. Numbers may be
//! written as `sqrt(x)`. Every key has a default, so an empty file describes the
//! desk run. The hash is taken over the canonical listing of all effective values,
//! so comments and key order do not change it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use threebody::fem::{BoundaryCondition, MeshPlan, SolverOptions};
use threebody::geometry::{wavevector, WindowSpec};
use threebody::pair1d::PairPotential;
use threebody::wavefield::{Cutoff, FieldSpec};
use threebody::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: PairPotential,
    pub energy: f64,
    pub k1: f64,
    pub p1: f64,
    pub r1: f64,
    pub r2: f64,
    /// `false` switches the radial cutoff off (free system only).
    pub cutoff: bool,
    /// Window offsets in degrees.
    pub window_inner_deg: f64,
    pub window_outer_deg: f64,
    pub pair_tol: f64,
    pub mesh: MeshPlan,
    pub bc: BoundaryCondition,
    pub solver: SolverOptions,
    pub probe_radii: Vec<f64>,
    pub probe_samples: usize,
    pub profile_radius: f64,
    pub profile_samples: usize,
    /// Symmetry defects are also reported for `|x| ≥` this radius.
    pub symmetry_inner: f64,
    pub grid_points: usize,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential: PairPotential::default(),
            energy: 4.0,
            k1: 1.0,
            p1: 3f64.sqrt(),
            r1: 4.0,
            r2: 10.0,
            cutoff: true,
            window_inner_deg: 8.0,
            window_outer_deg: 16.0,
            pair_tol: 1e-10,
            mesh: MeshPlan::default(),
            bc: BoundaryCondition::Plain,
            solver: SolverOptions::default(),
            probe_radii: vec![16.0, 17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 23.0, 24.0],
            probe_samples: 1440,
            profile_radius: 22.0,
            profile_samples: 1440,
            symmetry_inner: 14.0,
            grid_points: 201,
            output: PathBuf::from("out"),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

fn number(key: &str, v: &str) -> Result<f64> {
    let v = v.trim();
    let parsed = if let Some(inner) = v.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
        inner.trim().parse::<f64>().ok().filter(|x| *x >= 0.0).map(f64::sqrt)
    } else {
        v.parse::<f64>().ok()
    };
    parsed.filter(|x| x.is_finite()).ok_or_else(|| invalid(format!("{key}: `{v}` is not a number")))
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.trim().parse::<usize>().map_err(|_| invalid(format!("{key}: `{v}` is not a non-negative integer")))
}

fn switch(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "on" | "true" | "yes" => Ok(true),
        "off" | "false" | "no" => Ok(false),
        _ => Err(invalid(format!("{key}: expected on/off, got `{v}`"))),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, String> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split(" #").next().unwrap_or("").trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| invalid(format!("line {}: expected `key = value`", n + 1)))?;
            if entries.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(invalid(format!("line {}: duplicate key `{}`", n + 1, k.trim())));
            }
        }
        let mut c = RunConfig::default();
        let (mut kind, mut amplitude, mut halfwidth) = ("bump".to_string(), 2.0, 0.25);
        for (k, v) in &entries {
            let key = k.as_str();
            match key {
                "potential" => kind = v.clone(),
                "potential.amplitude" => amplitude = number(key, v)?,
                "potential.halfwidth" => halfwidth = number(key, v)?,
                "energy" => c.energy = number(key, v)?,
                "k1" => c.k1 = number(key, v)?,
                "p1" => c.p1 = number(key, v)?,
                "r1" => c.r1 = number(key, v)?,
                "r2" => c.r2 = number(key, v)?,
                "cutoff" => c.cutoff = switch(key, v)?,
                "window.inner" => c.window_inner_deg = number(key, v)?,
                "window.outer" => c.window_outer_deg = number(key, v)?,
                "pair.tol" => c.pair_tol = number(key, v)?,
                "mesh.radius" => c.mesh.radius = number(key, v)?,
                "mesh.h" => c.mesh.h = number(key, v)?,
                "mesh.strip_factor" => c.mesh.strip_factor = number(key, v)?,
                "mesh.window_factor" => c.mesh.window_factor = number(key, v)?,
                "mesh.core_factor" => c.mesh.core_factor = number(key, v)?,
                "mesh.core_margin" => c.mesh.core_margin = number(key, v)?,
                "mesh.min_angle" => c.mesh.min_angle_deg = number(key, v)?,
                "mesh.max_vertices" => c.mesh.max_vertices = count(key, v)?,
                "bc" => c.bc = BoundaryCondition::parse(v).ok_or_else(|| invalid(format!("bc: expected plain or corrected, got `{v}`")))?,
                "solver.direct_threshold" => c.solver.direct_threshold = count(key, v)?,
                "solver.tolerance" => c.solver.tolerance = number(key, v)?,
                "solver.restart" => c.solver.restart = count(key, v)?,
                "solver.max_iterations" => c.solver.max_iterations = count(key, v)?,
                "probe.radii" => {
                    c.probe_radii = v.split(',').map(|r| number(key, r)).collect::<Result<_>>()?;
                }
                "probe.samples" => c.probe_samples = count(key, v)?,
                "profile.radius" => c.profile_radius = number(key, v)?,
                "profile.samples" => c.profile_samples = count(key, v)?,
                "symmetry.inner" => c.symmetry_inner = number(key, v)?,
                "grid.points" => c.grid_points = count(key, v)?,
                "output" => c.output = PathBuf::from(v),
                _ => return Err(invalid(format!("unknown key `{k}`"))),
            }
        }
        c.potential = match kind.as_str() {
            "bump" => PairPotential::Bump { amplitude, halfwidth },
            "square" => PairPotential::SquareBarrier { height: amplitude, halfwidth },
            "zero" => PairPotential::Zero,
            other => return Err(invalid(format!("potential: unknown kind `{other}`"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.energy > 0.0) {
            return Err(invalid(format!("energy must be positive, got {}", self.energy)));
        }
        let defect = self.k1 * self.k1 + self.p1 * self.p1 - self.energy;
        if defect.abs() > 1e-10 {
            return Err(invalid(format!("k1² + p1² - E = {defect:e}, must vanish to 1e-10")));
        }
        if !(0.0 < self.r1 && self.r1 < self.r2 && self.r2 < self.mesh.radius) {
            return Err(invalid(format!(
                "need 0 < r1 < r2 < R, got r1 = {}, r2 = {}, R = {}",
                self.r1, self.r2, self.mesh.radius
            )));
        }
        if !(0.0 < self.window_inner_deg && self.window_inner_deg < self.window_outer_deg) {
            return Err(invalid("need 0 < window.inner < window.outer"));
        }
        if !(self.mesh.h > 0.0) {
            return Err(invalid("mesh.h must be positive"));
        }
        let inside = |r: f64| r > 0.0 && r < self.mesh.radius - self.mesh.h;
        if self.probe_radii.is_empty() || !self.probe_radii.iter().all(|&r| inside(r)) {
            return Err(invalid(format!("probe radii must lie in (0, R - h) = (0, {})", self.mesh.radius - self.mesh.h)));
        }
        if !inside(self.profile_radius) {
            return Err(invalid("profile.radius must lie in (0, R - h)"));
        }
        if self.grid_points < 2 {
            return Err(invalid("grid.points must be at least 2"));
        }
        if !self.cutoff && !self.potential.is_zero() {
            return Err(invalid("cutoff = off is only allowed with potential = zero"));
        }
        Ok(())
    }

    pub fn field_spec(&self) -> FieldSpec {
        FieldSpec {
            potential: self.potential,
            q: wavevector(self.k1, self.p1),
            window: WindowSpec { inner: self.window_inner_deg.to_radians(), outer: self.window_outer_deg.to_radians() },
            cutoff: self.cutoff.then_some(Cutoff { inner: self.r1, outer: self.r2 }),
            pair_tol: self.pair_tol,
        }
    }

    /// All effective values, one `key = value` per line in key order. The output
    /// directory is excluded so a rerun elsewhere keeps the hash.
    pub fn canonical(&self) -> String {
        let (kind, amplitude, halfwidth) = match self.potential {
            PairPotential::Bump { amplitude, halfwidth } => ("bump", amplitude, halfwidth),
            PairPotential::SquareBarrier { height, halfwidth } => ("square", height, halfwidth),
            PairPotential::Zero => ("zero", 0.0, 0.0),
        };
        let radii: Vec<String> = self.probe_radii.iter().map(|r| format!("{r:?}")).collect();
        let entries: Vec<(&str, String)> = vec![
            ("bc", self.bc.name().to_string()),
            ("cutoff", if self.cutoff { "on" } else { "off" }.to_string()),
            ("energy", format!("{:?}", self.energy)),
            ("grid.points", self.grid_points.to_string()),
            ("k1", format!("{:?}", self.k1)),
            ("mesh.core_factor", format!("{:?}", self.mesh.core_factor)),
            ("mesh.core_margin", format!("{:?}", self.mesh.core_margin)),
            ("mesh.h", format!("{:?}", self.mesh.h)),
            ("mesh.max_vertices", self.mesh.max_vertices.to_string()),
            ("mesh.min_angle", format!("{:?}", self.mesh.min_angle_deg)),
            ("mesh.radius", format!("{:?}", self.mesh.radius)),
            ("mesh.strip_factor", format!("{:?}", self.mesh.strip_factor)),
            ("mesh.window_factor", format!("{:?}", self.mesh.window_factor)),
            ("p1", format!("{:?}", self.p1)),
            ("pair.tol", format!("{:?}", self.pair_tol)),
            ("potential", kind.to_string()),
            ("potential.amplitude", format!("{amplitude:?}")),
            ("potential.halfwidth", format!("{halfwidth:?}")),
            ("probe.radii", radii.join(",")),
            ("probe.samples", self.probe_samples.to_string()),
            ("profile.radius", format!("{:?}", self.profile_radius)),
            ("profile.samples", self.profile_samples.to_string()),
            ("r1", format!("{:?}", self.r1)),
            ("r2", format!("{:?}", self.r2)),
            ("solver.direct_threshold", self.solver.direct_threshold.to_string()),
            ("solver.max_iterations", self.solver.max_iterations.to_string()),
            ("solver.restart", self.solver.restart.to_string()),
            ("solver.tolerance", format!("{:?}", self.solver.tolerance)),
            ("symmetry.inner", format!("{:?}", self.symmetry_inner)),
            ("window.inner", format!("{:?}", self.window_inner_deg)),
            ("window.outer", format!("{:?}", self.window_outer_deg)),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// SHA-256 of the canonical listing, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_desk_run() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.mesh.radius, 25.0);
        assert_eq!(RunConfig::parse(&c.canonical()).unwrap().hash(), c.hash());
    }

    #[test]
    fn comments_and_order_do_not_change_the_hash() {
        let a = RunConfig::parse("# desk\nk1 = 1\np1 = sqrt(3)  # exact\n").unwrap();
        let b = RunConfig::parse("p1 = sqrt(3)\n\nk1 = 1.0\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = RunConfig::parse("mesh.h = 0.3\n").unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn large_domain_configuration_is_accepted() {
        let c = RunConfig::parse("energy = 4\nk1 = 1\np1 = sqrt(3)\nr1 = 4\nr2 = 14.5\nmesh.radius = 190\nmesh.h = 0.3\nprobe.radii = 150,170,185\nprofile.radius = 185\n").unwrap();
        assert_eq!(c.mesh.radius, 190.0);
        assert!(c.canonical().contains("r2 = 14.5"));
    }

    #[test]
    fn invariants_are_enforced() {
        for bad in [
            "k1 = 1\np1 = 1.7",
            "r1 = 12",
            "r2 = 30",
            "probe.radii = 10,25",
            "mesh.h = 0",
            "window.inner = 20",
            "bc = dirichlet",
            "potential = coulomb",
            "cutoff = off",
            "unknown = 1",
            "k1 = 1\nk1 = 1",
            "energy",
            "r1 = four",
        ] {
            let e = RunConfig::parse(bad).unwrap_err();
            assert!(e.is_config(), "{bad}: {e}");
        }
        assert!(RunConfig::parse("potential = zero\ncutoff = off").is_ok());
    }
}
