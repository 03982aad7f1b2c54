//! Triangle mesh container, OBJ/OFF I/O, topology indexing and defect classification.

mod io;
mod risk;
mod topology;

use std::collections::HashSet;

use thiserror::Error;

use crate::geometry::{triangle_cross, Vec3};
use crate::scalar::Real;

pub use io::{load_mesh, write_mesh, write_point_cloud, MeshFormat};
pub use risk::{classify_risky, validate, DefectReport, RiskClass, DEFAULT_FLAT_TOL};
pub use topology::{Edge, TopologyIndex};

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: face has {count} vertices, only triangles are accepted")]
    NonTriangleFace { line: usize, count: usize },
    #[error("face {face}: vertex index {index} out of range for {vertex_count} vertices")]
    IndexOutOfRange { face: usize, index: i64, vertex_count: usize },
    #[error("face {face} repeats a vertex index: {indices:?}")]
    RepeatedIndex { face: usize, indices: [usize; 3] },
    #[error("face {face} duplicates face {original}")]
    DuplicateFace { face: usize, original: usize },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteVertex { vertex: usize },
    #[error("input is not valid ASCII text")]
    NotAscii,
}

/// Indexed triangle mesh. Vertex order is significant: every ranking refers
/// back to these indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<Vec3<T>>,
    faces: Vec<[usize; 3]>,
}

impl<T: Real> Mesh<T> {
    /// Builds a mesh, checking index range, distinct corners and duplicate
    /// faces (same cyclic order).
    pub fn new(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if let Some(vertex) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(MeshError::NonFiniteVertex { vertex });
        }
        let n = vertices.len();
        let mut seen = std::collections::HashMap::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i >= n) {
                return Err(MeshError::IndexOutOfRange {
                    face: fi,
                    index: bad as i64,
                    vertex_count: n,
                });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::RepeatedIndex { face: fi, indices: *f });
            }
            if let Some(original) = seen.insert(canonical_rotation(*f), fi) {
                return Err(MeshError::DuplicateFace { face: fi, original });
            }
        }
        Ok(Self { vertices, faces })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn position(&self, v: usize) -> Vec3<T> {
        self.vertices[v]
    }

    /// Unnormalized face normal (twice the area vector).
    pub fn face_cross(&self, f: usize) -> Vec3<T> {
        let [a, b, c] = self.faces[f];
        triangle_cross(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn face_area(&self, f: usize) -> T {
        self.face_cross(f).norm() * T::lit(0.5)
    }

    /// Axis-aligned bounding box, `None` for an empty mesh.
    pub fn bounding_box(&self) -> Option<(Vec3<T>, Vec3<T>)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (
                Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }

    pub fn bounding_box_diagonal(&self) -> T {
        self.bounding_box()
            .map(|(lo, hi)| (hi - lo).norm())
            .unwrap_or_else(T::zero)
    }

    /// Same connectivity with every position mapped through `f`.
    pub fn map_positions(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|&p| f(p)).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Relabels vertices: old vertex `i` becomes `perm[i]`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.vertices.len(), "permutation length");
        let mut vertices = vec![Vec3::zero(); self.vertices.len()];
        for (old, &new) in perm.iter().enumerate() {
            vertices[new] = self.vertices[old];
        }
        let faces = self
            .faces
            .iter()
            .map(|f| [perm[f[0]], perm[f[1]], perm[f[2]]])
            .collect();
        Self { vertices, faces }
    }

    /// Disjoint union; `other`'s indices are shifted past this mesh's vertices.
    pub fn merged(&self, other: &Self) -> Self {
        let offset = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut faces = self.faces.clone();
        faces.extend(
            other
                .faces
                .iter()
                .map(|f| [f[0] + offset, f[1] + offset, f[2] + offset]),
        );
        Self { vertices, faces }
    }

    /// Converts to another scalar type (through `f64`).
    pub fn cast<U: Real>(&self) -> Mesh<U> {
        Mesh {
            vertices: self
                .vertices
                .iter()
                .map(|p| Vec3::new(U::lit(p.x.to_f64_lossy()), U::lit(p.y.to_f64_lossy()), U::lit(p.z.to_f64_lossy())))
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// Euler characteristic `V - E + F` counting every vertex.
    pub fn euler_characteristic(&self) -> i64 {
        let edges: HashSet<Edge> = self
            .faces
            .iter()
            .flat_map(|f| [Edge::new(f[0], f[1]), Edge::new(f[1], f[2]), Edge::new(f[2], f[0])])
            .collect();
        self.vertices.len() as i64 - edges.len() as i64 + self.faces.len() as i64
    }
}

/// Rotation of `f` starting at its smallest index; equal for faces that
/// differ only by cyclic rotation.
pub(crate) fn canonical_rotation(f: [usize; 3]) -> [usize; 3] {
    let k = (0..3).min_by_key(|&i| f[i]).unwrap_or(0);
    [f[k], f[(k + 1) % 3], f[(k + 2) % 3]]
}
