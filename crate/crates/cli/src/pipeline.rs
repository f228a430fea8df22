//! Stage execution and artifact files.
//!
//! Every artifact starts with comment lines `# threebody <kind>` and
//! `# config <hash>`. Mesh and solution files whose hash matches the current
//! configuration are reused instead of recomputed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use threebody::diagnostics::{diagnose, DiagnosticsReport, DiagnosticsSettings};
use threebody::fem::{FemProblem, Mesh, P2Field, SolveReport};
use threebody::geometry::ConfigPoint;
use threebody::pair1d::PairPotential;
use threebody::wavefield::FieldModel;
use threebody::{Error, Result};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Pair,
    Field,
    Mesh,
    Solve,
    Diagnose,
    All,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Pair => "pair",
            Stage::Field => "field",
            Stage::Mesh => "mesh",
            Stage::Solve => "solve",
            Stage::Diagnose => "diagnose",
            Stage::All => "all",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        [Stage::Pair, Stage::Field, Stage::Mesh, Stage::Solve, Stage::Diagnose, Stage::All]
            .into_iter()
            .find(|st| st.name() == s)
    }

    /// Stages whose artifacts are written when `self` is requested.
    fn plan(self) -> Vec<Stage> {
        match self {
            Stage::All => vec![Stage::Pair, Stage::Field, Stage::Mesh, Stage::Solve, Stage::Diagnose],
            s => vec![s],
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub hash: String,
    pub files: Vec<PathBuf>,
    pub timings: Vec<(&'static str, f64)>,
    pub reused: Vec<PathBuf>,
    pub solve: Option<SolveReport>,
    pub diagnostics: Option<DiagnosticsReport>,
}

fn fmt(v: f64) -> String {
    if v.is_finite() { format!("{v:e}") } else { "nan".into() }
}

fn header(kind: &str, hash: &str) -> String {
    format!("# threebody {kind}\n# config {hash}\n")
}

/// Config hash recorded in an artifact, if the file exists and has one.
fn recorded_hash(path: &Path) -> Option<String> {
    use std::io::BufRead;
    let file = std::io::BufReader::new(fs::File::open(path).ok()?);
    file.lines()
        .map_while(|l| l.ok())
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# config ").map(|h| h.trim().to_string()))
}

fn stage_err(stage: Stage) -> impl Fn(Error) -> Error {
    move |e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage { stage: stage.name(), source: Box::new(e) },
    }
}

struct Runner<'a> {
    config: &'a RunConfig,
    out: PathBuf,
    summary: RunSummary,
    model: Option<Arc<FieldModel>>,
    mesh: Option<Arc<Mesh>>,
    xi: Option<P2Field>,
}

impl<'a> Runner<'a> {
    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents)?;
        self.summary.files.push(path);
        Ok(())
    }

    fn model(&mut self) -> Result<Arc<FieldModel>> {
        if self.model.is_none() {
            self.model = Some(Arc::new(FieldModel::new(&self.config.field_spec())?));
        }
        Ok(self.model.clone().unwrap())
    }

    fn mesh(&mut self) -> Result<Arc<Mesh>> {
        if let Some(m) = &self.mesh {
            return Ok(m.clone());
        }
        let path = self.out.join("mesh.txt");
        let mesh = if recorded_hash(&path).as_deref() == Some(self.summary.hash.as_str()) {
            self.summary.reused.push(path.clone());
            Mesh::read(&path)?
        } else {
            let model = self.model()?;
            let mesh = self.config.mesh.build(&model)?;
            mesh.write(&path, &[format!("config {}", self.summary.hash)])?;
            self.summary.files.push(path);
            mesh
        };
        let mesh = Arc::new(mesh);
        self.mesh = Some(mesh.clone());
        Ok(mesh)
    }

    fn solve(&mut self, force: bool) -> Result<P2Field> {
        if let Some(xi) = &self.xi {
            return Ok(xi.clone());
        }
        let mesh = self.mesh()?;
        let path = self.out.join("solution.csv");
        if !force && recorded_hash(&path).as_deref() == Some(self.summary.hash.as_str()) {
            let xi = read_solution(&path, mesh)?;
            self.summary.reused.push(path);
            self.xi = Some(xi.clone());
            return Ok(xi);
        }
        let model = self.model()?;
        let problem = FemProblem::assemble(mesh, model.as_ref(), self.config.bc)?;
        let (xi, report) = problem.solve(&self.config.solver)?;
        let mut out = header("solution", &self.summary.hash);
        let _ = writeln!(out, "# bc {}", self.config.bc.name());
        out.push_str("node,x,y,re_xi,im_xi\n");
        for (i, (x, v)) in xi.mesh.nodes.iter().zip(&xi.values).enumerate() {
            let _ = writeln!(out, "{i},{},{},{},{}", fmt(x[0]), fmt(x[1]), fmt(v.re), fmt(v.im));
        }
        self.write("solution.csv", &out)?;
        self.summary.solve = Some(report);
        self.xi = Some(xi.clone());
        Ok(xi)
    }

    fn pair(&mut self) -> Result<()> {
        let model = self.model()?;
        let hash = self.summary.hash.clone();
        let mut table = header("pair table", &hash);
        table.push_str("k,re_s,im_s,re_r,im_r,unitarity_defect\n");
        let mut chi = header("pair solutions", &hash);
        chi.push_str("k,x,re_chi,im_chi,re_dchi,im_dchi\n");
        for p in model.pairs().entries() {
            let _ = writeln!(table, "{},{},{},{},{},{}", fmt(p.k), fmt(p.s.re), fmt(p.s.im), fmt(p.r.re), fmt(p.r.im), fmt(p.unitarity_defect()));
            let b = p.support_halfwidth().max(0.25);
            for i in 0..=200 {
                let x = -b + 2.0 * b * i as f64 / 200.0;
                let (v, d) = p.chi_with_derivative(x, p.k);
                let _ = writeln!(chi, "{},{},{},{},{},{}", fmt(p.k), fmt(x), fmt(v.re), fmt(v.im), fmt(d.re), fmt(d.im));
            }
        }
        self.write("pair.csv", &table)?;
        self.write("chi.csv", &chi)
    }

    fn field(&mut self) -> Result<()> {
        let model = self.model()?;
        let n = self.config.grid_points;
        let r = self.config.mesh.radius;
        let coord = |i: usize| -r + 2.0 * r * i as f64 / (n - 1) as f64;
        let rows: Vec<String> = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (x, y) = (coord(k % n), coord(k / n));
                if x.hypot(y) > r {
                    return format!("{},{},nan,nan,nan,nan,nan,nan\n", fmt(x), fmt(y));
                }
                let p = ConfigPoint::from_chart(x, y);
                let (psi1, q) = model.psi_one_and_discrepancy(&p);
                let psir = model.psi_ray(&p);
                format!(
                    "{},{},{},{},{},{},{},{}\n",
                    fmt(x), fmt(y), fmt(psi1.re), fmt(psi1.im), fmt(psir.re), fmt(psir.im), fmt(q.re), fmt(q.im)
                )
            })
            .collect();
        let mut out = header("field grid", &self.summary.hash);
        let _ = writeln!(out, "# grid {n} x {n} on [-{r}, {r}]^2, rows with y outer, nan outside the disk");
        out.push_str("x,y,re_psi1,im_psi1,re_psir,im_psir,re_q,im_q\n");
        out.extend(rows);
        self.write("field.csv", &out)?;
        let mut windows = header("windows", &self.summary.hash);
        windows.push_str("center,inner,outer\n");
        for w in model.windows() {
            let _ = writeln!(windows, "{},{},{}", fmt(w.center), fmt(w.spec.inner), fmt(w.spec.outer));
        }
        self.write("windows.csv", &windows)
    }

    fn diagnose(&mut self) -> Result<()> {
        let model = self.model()?;
        let xi = self.solve(false)?;
        let c = self.config;
        let settings = DiagnosticsSettings {
            radii: c.probe_radii.clone(),
            samples: c.probe_samples,
            profile_radius: c.profile_radius,
            profile_samples: c.profile_samples,
            symmetry_inner: c.symmetry_inner,
        };
        let report = diagnose(&model, &xi, &settings)?;
        let hash = self.summary.hash.clone();
        let mut norms = header("boundary norms", &hash);
        norms.push_str("r,n,m,m_over_en\n");
        for c in &report.norms {
            let _ = writeln!(norms, "{},{},{},{}", fmt(c.radius), fmt(c.n), fmt(c.m), fmt(c.m / (report.energy * c.n)));
        }
        self.write("norms.csv", &norms)?;
        let mut profile = header("angular profile", &hash);
        let _ = writeln!(profile, "# radius {}", fmt(report.profile.radius));
        let _ = writeln!(profile, "# window_centers {} {}", fmt(report.profile.window_centers[0]), fmt(report.profile.window_centers[1]));
        let _ = writeln!(profile, "# g is a diagnostic only");
        profile.push_str("theta,re_xi,im_xi,abs_xi,re_g,im_g\n");
        let g = report.profile.amplitude(report.energy);
        for ((t, v), g) in report.profile.angles.iter().zip(&report.profile.values).zip(g) {
            let _ = writeln!(profile, "{},{},{},{},{},{}", fmt(*t), fmt(v.re), fmt(v.im), fmt(v.norm()), fmt(g.re), fmt(g.im));
        }
        self.write("profile.csv", &profile)?;
        self.summary.diagnostics = Some(report);
        Ok(())
    }

    fn run_stage(&mut self, stage: Stage) -> Result<()> {
        let start = Instant::now();
        match stage {
            Stage::Pair => self.pair(),
            Stage::Field => self.field(),
            Stage::Mesh => self.mesh().map(|_| ()),
            Stage::Solve => self.solve(true).map(|_| ()),
            Stage::Diagnose => self.diagnose(),
            Stage::All => unreachable!("expanded by plan"),
        }
        .map_err(stage_err(stage))?;
        self.summary.timings.push((stage.name(), start.elapsed().as_secs_f64()));
        Ok(())
    }
}

/// Runs `stage` (and, for `All`, every stage in dependency order) into `config.output`.
pub fn run(config: &RunConfig, stage: Stage) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(&config.output)?;
    let mut runner = Runner {
        config,
        out: config.output.clone(),
        summary: RunSummary { hash: config.hash(), ..Default::default() },
        model: None,
        mesh: None,
        xi: None,
    };
    for s in stage.plan() {
        runner.run_stage(s)?;
    }
    let text = summary_text(config, &runner);
    runner.write("summary.txt", &text)?;
    Ok(runner.summary)
}

fn summary_text(config: &RunConfig, runner: &Runner) -> String {
    let s = &runner.summary;
    let mut out = header("run summary", &s.hash);
    out.push_str("\n[config]\n");
    out.push_str(&config.canonical());
    if let Some(m) = &runner.mesh {
        let st = m.stats();
        let _ = write!(
            out,
            "\n[mesh]\nvertices = {}\ntriangles = {}\ndofs = {}\nboundary_edges = {}\nedge_length = {:.4} .. {:.4} (mean {:.4})\nangles = {:.2} .. {:.2} deg\n",
            st.vertices, st.triangles, st.dofs, st.boundary_edges, st.min_edge, st.max_edge, st.mean_edge, st.min_angle_deg, st.max_angle_deg
        );
    }
    if let Some(r) = &s.solve {
        let _ = write!(out, "\n[solve]\nsolver = {:?}\nrelative_residual = {:e}\niterations = {}\n", r.kind, r.residual, r.iterations);
    }
    if let Some(d) = &s.diagnostics {
        let _ = write!(out, "\n[diagnostics]\nn_variation = {:.4}\nmax_m_over_en = {:e}\n", d.n_variation(), d.m_ratio());
        for c in &d.norms {
            let _ = writeln!(out, "r = {}: N = {:e}, M = {:e}", c.radius, c.n, c.m);
        }
        let centers = d.profile.window_centers.map(f64::to_degrees);
        let _ = writeln!(out, "window_centers_deg = {:.2}, {:.2} (half-width {:.2})", centers[0], centers[1], d.window_halfwidth.to_degrees());
        for (a, v) in d.profile.peaks().iter().take(4) {
            let inside = d.window_of(*a).map_or("outside windows".to_string(), |w| format!("in window {w}"));
            let _ = writeln!(out, "peak {:.2} deg: |xi| = {:e} ({inside})", a.to_degrees(), v);
        }
        let _ = writeln!(out, "dominant_peaks_in_windows = {}", d.dominant_peaks_in_windows());
        match d.symmetry {
            Some((whole, outer)) => {
                let _ = writeln!(out, "swap_defect = {whole:e}\nswap_defect_outer = {outer:e} (|x| >= {})", config.symmetry_inner);
            }
            None => out.push_str("swap_defect = n/a (q not exchange-symmetric)\n"),
        }
    }
    if !s.reused.is_empty() {
        out.push_str("\n[reused]\n");
        for p in &s.reused {
            let _ = writeln!(out, "{}", p.display());
        }
    }
    out.push_str("\n[timings]\n");
    for (stage, t) in &s.timings {
        let _ = writeln!(out, "{stage} = {t:.3} s");
    }
    out
}

fn read_solution(path: &Path, mesh: Arc<Mesh>) -> Result<P2Field> {
    let bad = |reason: String| Error::Format { path: path.to_path_buf(), reason };
    let text = fs::read_to_string(path)?;
    let mut values = Vec::with_capacity(mesh.dofs());
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 fields in `{line}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number `{s}`")));
        values.push(Complex64::new(num(f[3])?, num(f[4])?));
    }
    if values.len() != mesh.dofs() {
        return Err(bad(format!("{} values for {} nodes", values.len(), mesh.dofs())));
    }
    Ok(P2Field::new(mesh, values))
}

/// Human-readable description of the configuration and the derived geometry.
pub fn describe(config: &RunConfig) -> Result<String> {
    let model = FieldModel::new(&config.field_spec())?;
    let mut out = String::new();
    let _ = writeln!(out, "config hash {}", config.hash());
    out.push_str(&config.canonical());
    let q = model.q();
    let _ = writeln!(out, "\nq = {q} (|q|² = {:.12})", q.inner(&q));
    let potential = match config.potential {
        PairPotential::Bump { .. } => "bump",
        PairPotential::SquareBarrier { .. } => "square barrier",
        PairPotential::Zero => "none",
    };
    let _ = writeln!(out, "pair potential: {potential}, support |x| <= {}", config.potential.support_halfwidth());
    for p in model.pairs().entries() {
        let _ = writeln!(out, "  k = {:.6}: s = {:.8}, r = {:.8}, |s|²+|r|²-1 = {:.1e}", p.k, p.s, p.r, p.unitarity_defect());
    }
    let (a23, a21) = model.anomalous_directions();
    let _ = writeln!(out, "anomalous directions: q23 at {:.2} deg, q21 at {:.2} deg", a23.angle().to_degrees(), a21.angle().to_degrees());
    let amp = model.amplitudes();
    let _ = writeln!(out, "anomalous amplitudes: R1 = {:.8}, R2 = {:.8}", amp.r1, amp.r2);
    let [j23, j21] = model.jumps();
    let _ = writeln!(out, "jumps: {j23:.8} (q23), {j21:.8} (q21)");
    for w in model.windows() {
        let _ = writeln!(out, "window at {:.2} deg: {:.1}..{:.1} deg offsets", w.center.to_degrees(), w.spec.inner.to_degrees(), w.spec.outer.to_degrees());
    }
    let area = std::f64::consts::PI * config.mesh.radius * config.mesh.radius;
    // a mean edge h gives about 2.3/h² triangles per unit area and two nodes per triangle
    let estimate = 4.6 * area / (config.mesh.h * config.mesh.h);
    let _ = writeln!(out, "mesh R = {}, h = {}: roughly {:.1e} P2 degrees of freedom before local refinement", config.mesh.radius, config.mesh.h, estimate);
    Ok(out)
}
