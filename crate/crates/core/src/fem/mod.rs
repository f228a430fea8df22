pub mod assembly;
pub mod delaunay;
pub mod mesh;
pub mod p2;
pub mod plan;
pub mod quadrature;
pub mod solver;
pub mod sparse;

pub use assembly::{BoundaryCondition, FemProblem, Manufactured, Source};
pub use mesh::{build_mesh, Mesh, MeshParams, MeshStats, Region, SizeField};
pub use p2::P2Field;
pub use plan::MeshPlan;
pub use solver::{SolveReport, SolverKind, SolverOptions};
pub use sparse::CscMatrix;
