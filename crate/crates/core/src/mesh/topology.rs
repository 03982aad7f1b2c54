use std::collections::BTreeMap;

use super::Mesh;
use crate::scalar::Real;

/// Undirected edge with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    pub fn other(self, v: usize) -> usize {
        if v == self.lo {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Adjacency tables derived from a [`Mesh`].
///
/// 1-rings are stored sorted by vertex index; cyclic order is recovered from
/// faces where it is needed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyIndex {
    rings: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    boundary: Vec<bool>,
    manifold: Vec<bool>,
    edges: BTreeMap<Edge, Vec<usize>>,
}

impl TopologyIndex {
    pub fn build<T: Real>(mesh: &Mesh<T>) -> Self {
        let n = mesh.vertex_count();
        let mut rings = vec![Vec::new(); n];
        let mut vertex_faces = vec![Vec::new(); n];
        let mut edges: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();

        for (fi, f) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                vertex_faces[a].push(fi);
                rings[a].push(b);
                rings[b].push(a);
                edges.entry(Edge::new(a, b)).or_default().push(fi);
            }
        }
        for r in &mut rings {
            r.sort_unstable();
            r.dedup();
        }

        let mut boundary = vec![false; n];
        let mut manifold = vec![true; n];
        for (e, fs) in &edges {
            match fs.len() {
                1 => {
                    boundary[e.lo] = true;
                    boundary[e.hi] = true;
                }
                2 => {}
                _ => {
                    manifold[e.lo] = false;
                    manifold[e.hi] = false;
                }
            }
        }

        let mut index = Self {
            rings,
            vertex_faces,
            boundary,
            manifold,
            edges,
        };
        for v in 0..n {
            if index.manifold[v] && index.fan_components(mesh, v) > 1 {
                index.manifold[v] = false;
            }
        }
        index
    }

    /// Number of edge-connected components among the faces around `v`.
    fn fan_components<T: Real>(&self, mesh: &Mesh<T>, v: usize) -> usize {
        let faces = &self.vertex_faces[v];
        if faces.len() <= 1 {
            return faces.len();
        }
        let mut parent: Vec<usize> = (0..faces.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..faces.len() {
            for j in (i + 1)..faces.len() {
                let fi = mesh.faces()[faces[i]];
                let fj = mesh.faces()[faces[j]];
                let shares_spoke = fi.iter().any(|&x| x != v && fj.contains(&x));
                if shares_spoke {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        (0..faces.len())
            .filter(|&i| find(&mut parent, i) == i)
            .count()
    }

    pub fn vertex_count(&self) -> usize {
        self.rings.len()
    }

    /// 1-ring neighbours, sorted ascending.
    pub fn ring(&self, v: usize) -> &[usize] {
        &self.rings[v]
    }

    /// Incident faces in ascending face order; its length is the face valence `#f`.
    pub fn incident_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn face_valence(&self, v: usize) -> usize {
        self.vertex_faces[v].len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn is_manifold(&self, v: usize) -> bool {
        self.manifold[v]
    }

    pub fn is_isolated(&self, v: usize) -> bool {
        self.vertex_faces[v].is_empty()
    }

    /// Faces incident to edge `(a, b)`; empty if the edge does not exist.
    pub fn edge_faces(&self, a: usize, b: usize) -> &[usize] {
        self.edges
            .get(&Edge::new(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn edge_face_count(&self, a: usize, b: usize) -> usize {
        self.edge_faces(a, b).len()
    }

    /// Every edge with its incident-face count, in ascending edge order.
    pub fn edges(&self) -> impl Iterator<Item = (Edge, usize)> + '_ {
        self.edges.iter().map(|(e, f)| (*e, f.len()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices within two edges of `v`, excluding `v`, sorted ascending.
    pub fn two_ring(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.rings[v]
            .iter()
            .flat_map(|&n| std::iter::once(n).chain(self.rings[n].iter().copied()))
            .filter(|&n| n != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}
