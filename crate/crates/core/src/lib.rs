//! Vertex importance ranking for triangle meshes.
//!
//! The pipeline computes per-vertex curvature descriptors, scores vertices
//! with a weighted set of sign criteria (or a small feature network trained
//! on decimation survival), and measures how many selected vertices a
//! quadric-error simplifier removes.

pub mod curvature;
pub mod decimate;
pub mod fixtures;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod neuro;
pub mod ranking;
pub mod scalar;

pub use geometry::Vec3;
pub use scalar::Real;

pub type Mesh64 = mesh::Mesh<f64>;
pub type Mesh32 = mesh::Mesh<f32>;
pub type VertexDescriptors64 = curvature::VertexDescriptors<f64>;
pub type VertexDescriptors32 = curvature::VertexDescriptors<f32>;
pub type FnnModel64 = neuro::FnnModel<f64>;
pub type FnnModel32 = neuro::FnnModel<f32>;
pub type StabilityRanking64 = ranking::StabilityRanking<f64>;
pub type StabilityRanking32 = ranking::StabilityRanking<f32>;
pub type CriterionSet64 = ranking::CriterionSet<f64>;
pub type CriterionSet32 = ranking::CriterionSet<f32>;
