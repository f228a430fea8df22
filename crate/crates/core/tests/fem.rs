use std::sync::Arc;
use std::time::Instant;

use threebody::fem::{build_mesh, BoundaryCondition, FemProblem, Manufactured, Mesh, MeshParams, SizeField, SolverOptions};

fn disk(radius: f64, h: f64) -> Mesh {
    build_mesh(&MeshParams { radius, size: SizeField::uniform(h), min_angle_deg: 20.0, max_vertices: 1_000_000 }).unwrap()
}

/// L² errors of the plane-wave manufactured solution on a base mesh and two uniform refinements.
fn mms_errors(bc: BoundaryCondition, h: f64) -> Vec<f64> {
    let d = [1.5 * 0.3f64.cos(), 1.5 * 0.3f64.sin()];
    let data = Manufactured::plane_wave(4.0, d);
    let mut mesh = disk(10.0, h);
    let mut errors = Vec::new();
    for level in 0..3 {
        if level > 0 {
            mesh = mesh.refine_uniform().unwrap();
        }
        let t = Instant::now();
        let problem = FemProblem::assemble(Arc::new(mesh.clone()), &data, bc).unwrap();
        let (xi, report) = problem.solve(&SolverOptions::default()).unwrap();
        assert!(report.residual < 1e-8, "residual {}", report.residual);
        let e = xi.l2_error(&data.value);
        eprintln!("level {level}: dofs {} error {e:e} residual {:e} ({:?})", mesh.dofs(), report.residual, t.elapsed());
        errors.push(e);
    }
    errors
}

#[test]
fn manufactured_solution_converges_at_third_order() {
    for bc in [BoundaryCondition::Plain, BoundaryCondition::Corrected] {
        let e = mms_errors(bc, 0.8);
        for w in e.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 2.7, "{bc:?}: order {order} from {e:?}");
        }
    }
}

#[test]
fn pointwise_error_decays_like_h_cubed() {
    let data = Manufactured::plane_wave(4.0, [0.4, -1.2]);
    let coarse = disk(6.0, 0.5);
    let fine = coarse.refine_uniform().unwrap();
    let points: Vec<[f64; 2]> = (0..200)
        .map(|k| {
            let r = 5.5 * ((k as f64 * 0.618_034) % 1.0).sqrt();
            let a = k as f64 * 2.399_963;
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let worst = |mesh: Mesh| {
        let (xi, _) = FemProblem::assemble(Arc::new(mesh), &data, BoundaryCondition::Plain)
            .unwrap()
            .solve(&SolverOptions::default())
            .unwrap();
        points.iter().map(|&x| (xi.evaluate(x).unwrap() - (data.value)(x)).norm()).fold(0.0, f64::max)
    };
    let (ec, ef) = (worst(coarse), worst(fine));
    assert!(ef < 1e-2 && ec / ef > 6.0, "{ec:e} -> {ef:e}");
}
