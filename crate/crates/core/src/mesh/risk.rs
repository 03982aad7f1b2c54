use std::collections::HashMap;

use super::{Edge, Mesh, TopologyIndex};
use crate::scalar::Real;

/// Default flatness tolerance in radians.
pub const DEFAULT_FLAT_TOL: f64 = 1e-3;

/// Per-vertex risk flags. Only `isolated` implies anything about the others
/// (an isolated vertex has no faces, hence is never boundary or flat).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RiskClass {
    pub isolated: bool,
    pub boundary: bool,
    pub complex: bool,
    pub flat: bool,
}

impl RiskClass {
    pub fn is_risky(&self) -> bool {
        self.isolated || self.boundary || self.complex || self.flat
    }
}

pub fn classify_risky<T: Real>(mesh: &Mesh<T>, topo: &TopologyIndex, flat_tol: T) -> Vec<RiskClass> {
    let normals: Vec<_> = (0..mesh.face_count())
        .map(|f| mesh.face_cross(f).normalized())
        .collect();
    (0..mesh.vertex_count())
        .map(|v| {
            if topo.is_isolated(v) {
                return RiskClass {
                    isolated: true,
                    ..RiskClass::default()
                };
            }
            let mut flat = true;
            for &n in topo.ring(v) {
                let fs = topo.edge_faces(v, n);
                if fs.len() != 2 {
                    continue;
                }
                match (normals[fs[0]], normals[fs[1]]) {
                    (Some(a), Some(b)) => {
                        if a.angle_to(b) >= flat_tol {
                            flat = false;
                        }
                    }
                    _ => flat = false,
                }
            }
            RiskClass {
                isolated: false,
                boundary: topo.is_boundary(v),
                complex: !topo.is_manifold(v),
                flat,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DefectReport {
    pub isolated_vertices: Vec<usize>,
    /// Edges shared by more than two faces.
    pub complex_edges: Vec<Edge>,
    /// Non-isolated vertices whose neighbourhood is not a disk or half-disk.
    pub complex_vertices: Vec<usize>,
    /// Face pairs spanning the same three vertices (either orientation).
    pub duplicate_faces: Vec<(usize, usize)>,
}

impl DefectReport {
    pub fn is_clean(&self) -> bool {
        self.isolated_vertices.is_empty()
            && self.complex_edges.is_empty()
            && self.complex_vertices.is_empty()
            && self.duplicate_faces.is_empty()
    }

    pub fn defect_count(&self) -> usize {
        self.isolated_vertices.len()
            + self.complex_edges.len()
            + self.complex_vertices.len()
            + self.duplicate_faces.len()
    }
}

pub fn validate<T: Real>(mesh: &Mesh<T>, topo: &TopologyIndex) -> DefectReport {
    let mut report = DefectReport::default();
    for v in 0..mesh.vertex_count() {
        if topo.is_isolated(v) {
            report.isolated_vertices.push(v);
        } else if !topo.is_manifold(v) {
            report.complex_vertices.push(v);
        }
    }
    report.complex_edges = topo
        .edges()
        .filter(|&(_, c)| c > 2)
        .map(|(e, _)| e)
        .collect();

    let mut first: HashMap<[usize; 3], usize> = HashMap::new();
    for (fi, f) in mesh.faces().iter().enumerate() {
        let mut key = *f;
        key.sort_unstable();
        if let Some(&orig) = first.get(&key) {
            report.duplicate_faces.push((orig, fi));
        } else {
            first.insert(key, fi);
        }
    }
    report
}
