//! Discrete curvature: cotangent Laplace–Beltrami, angle deficit, mixed
//! areas, principal curvatures, quadric fitting and dihedral extrema.
//!
//! Two independent estimators of Gaussian curvature are provided: the
//! angle-deficit operator over the 1-ring (`kappa_g`) and the curvature of a
//! least-squares height field fitted in a normal-aligned frame (`kappa_g1`).

mod descriptors;
mod operators;
mod quadric;
mod ring;

use thiserror::Error;

pub use descriptors::{
    compute_descriptors, describe_vertex, DescriptorFlags, VertexDescriptor, VertexDescriptors, ANGLE_SNAP,
    QUADRIC_SNAP,
};
pub use operators::{
    dihedral_extrema, estimate_normal, gaussian_curvature, local_frame, mean_curvature_normal, mixed_area,
    principal_curvatures, LocalFrame, PrincipalCurvatures, COT_CLAMP, FRAME_SINGULAR,
};
pub use quadric::{fit_quadric, quadric_curvatures, QuadricCurvatures, QuadricFit, MIN_QUADRIC_SAMPLES};
pub use ring::{one_ring, OneRing, RingTriangle};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurvatureError {
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("vertex {vertex}: every incident triangle is degenerate")]
    DegenerateRing { vertex: usize },
    #[error("vertex {vertex}: incident face normals cancel out")]
    ZeroNormal { vertex: usize },
    #[error("vertex {vertex}: no interior edge")]
    NoInteriorEdge { vertex: usize },
    #[error("quadric fit needs {needed} samples, found {found}")]
    TooFewNeighbors { found: usize, needed: usize },
    #[error("quadric fit is rank deficient")]
    RankDeficient,
}
