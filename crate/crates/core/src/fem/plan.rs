//! Mesh sizing derived from a field model.

use super::mesh::{build_mesh, Mesh, MeshParams, SizeField};
use crate::wavefield::FieldModel;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshPlan {
    pub radius: f64,
    pub h: f64,
    pub strip_factor: f64,
    pub window_factor: f64,
    /// Factor for the disk `r ≤ r₂ + core_margin` where ξ is of order one.
    pub core_factor: f64,
    pub core_margin: f64,
    pub min_angle_deg: f64,
    pub max_vertices: usize,
}

impl Default for MeshPlan {
    fn default() -> Self {
        MeshPlan {
            radius: 25.0,
            h: 0.25,
            strip_factor: 0.6,
            window_factor: 0.6,
            core_factor: 0.35,
            core_margin: 1.0,
            min_angle_deg: 20.0,
            max_vertices: 20_000_000,
        }
    }
}

impl MeshPlan {
    pub fn size_field(&self, model: &FieldModel) -> SizeField {
        let mut size = SizeField::uniform(self.h);
        size.strip_halfwidth = model.potential().support_halfwidth();
        size.strip_factor = self.strip_factor;
        size.windows = model.windows().iter().map(|w| (w.center, w.spec.outer)).collect();
        size.window_factor = self.window_factor;
        if let Some(c) = model.cutoff() {
            size.window_radius = c.inner;
            size.core_radius = c.outer + self.core_margin;
            size.core_factor = self.core_factor;
        }
        size
    }

    pub fn params(&self, model: &FieldModel) -> MeshParams {
        MeshParams {
            radius: self.radius,
            size: self.size_field(model),
            min_angle_deg: self.min_angle_deg,
            max_vertices: self.max_vertices,
        }
    }

    pub fn build(&self, model: &FieldModel) -> Result<Mesh> {
        build_mesh(&self.params(model))
    }
}
