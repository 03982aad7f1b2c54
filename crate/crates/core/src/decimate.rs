//! Quadric-error half-edge collapse with removal tracking, and seeded
//! Gaussian coordinate noise.
//!
//! A half-edge collapse `u → v` deletes `u` and reconnects its faces to `v`.
//! Positions never move, so every surviving vertex keeps its original index
//! and coordinates; the trace records which vertex went when.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::mesh::Mesh;
use crate::scalar::{fmt_sig17, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecimateError {
    #[error("removal fraction {0} outside [0, 1)")]
    FractionOutOfRange(f64),
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("noise sigma {0} must be finite and non-negative")]
    InvalidSigma(f64),
}

/// Ordered record of removed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecimationTrace {
    vertex_count: usize,
    requested: usize,
    removals: Vec<usize>,
    absorbed_by: Vec<usize>,
    step_of: Vec<Option<usize>>,
}

impl DecimationTrace {
    fn new(vertex_count: usize, requested: usize) -> Self {
        Self {
            vertex_count,
            requested,
            removals: Vec::new(),
            absorbed_by: Vec::new(),
            step_of: vec![None; vertex_count],
        }
    }

    fn push(&mut self, removed: usize, kept: usize) {
        self.step_of[removed] = Some(self.removals.len());
        self.removals.push(removed);
        self.absorbed_by.push(kept);
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of removals the caller asked for.
    pub fn requested(&self) -> usize {
        self.requested
    }

    /// Removed vertices in removal order; step `k` is position `k`.
    pub fn removals(&self) -> &[usize] {
        &self.removals
    }

    /// The surviving endpoint of each collapse, aligned with [`Self::removals`].
    pub fn absorbed_by(&self) -> &[usize] {
        &self.absorbed_by
    }

    pub fn removed_count(&self) -> usize {
        self.removals.len()
    }

    /// How many requested removals could not be performed.
    pub fn shortfall(&self) -> usize {
        self.requested - self.removals.len()
    }

    /// Zero-based removal step of `v`, `None` for survivors.
    pub fn removal_step(&self, v: usize) -> Option<usize> {
        self.step_of[v]
    }

    /// Whether `v` is gone after the first `removed` collapses.
    pub fn is_removed_after(&self, v: usize, removed: usize) -> bool {
        self.step_of[v].is_some_and(|s| s < removed)
    }

    /// Vertices still present after the first `removed` collapses, ascending.
    pub fn survivors_after(&self, removed: usize) -> Vec<usize> {
        (0..self.vertex_count)
            .filter(|&v| !self.is_removed_after(v, removed))
            .collect()
    }

    pub fn survivors(&self) -> Vec<usize> {
        self.survivors_after(self.removals.len())
    }

    /// Old index → index in the compacted simplified mesh (`None` if removed).
    pub fn compaction_map(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.step_of
            .iter()
            .map(|s| {
                s.is_none().then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// CSV `vertex_index,removal_step,survival_depth`; survivors have step −1.
    pub fn to_csv(&self) -> String {
        let depth = survival_depth::<f64>(self);
        let mut out = String::from("vertex_index,removal_step,survival_depth\n");
        for (v, d) in depth.iter().enumerate() {
            let step = self.step_of[v].map_or(-1, |s| s as i64);
            let _ = writeln!(out, "{v},{step},{}", fmt_sig17(*d));
        }
        out
    }

    /// CSV `old_index,new_index` with −1 for removed vertices.
    pub fn compaction_csv(&self) -> String {
        let mut out = String::from("old_index,new_index\n");
        for (v, n) in self.compaction_map().iter().enumerate() {
            let n = n.map_or(-1, |n| n as i64);
            let _ = writeln!(out, "{v},{n}");
        }
        out
    }
}

/// Removal progress at which each vertex left: the `r`-th of `R` removals
/// (1-based) gets `r / R`, survivors get 1.
pub fn survival_depth<T: Real>(trace: &DecimationTrace) -> Vec<T> {
    let total = T::lit(trace.removals.len() as f64);
    trace
        .step_of
        .iter()
        .map(|s| match s {
            Some(s) => T::lit((s + 1) as f64) / total,
            None => T::one(),
        })
        .collect()
}

/// Number of removals for a fraction of `vertex_count`, rounded up.
pub fn removal_target(vertex_count: usize, fraction: f64) -> usize {
    let t = (vertex_count as f64 * fraction).ceil() as usize;
    t.min(vertex_count)
}

/// Symmetric 4×4 plane quadric, upper triangle row-major.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Quadric([f64; 10]);

impl Quadric {
    fn plane(n: [f64; 3], d: f64, weight: f64) -> Self {
        let p = [n[0], n[1], n[2], d];
        let mut q = [0.0; 10];
        let mut k = 0;
        for i in 0..4 {
            for j in i..4 {
                q[k] = weight * p[i] * p[j];
                k += 1;
            }
        }
        Self(q)
    }

    fn add(&mut self, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(other.0) {
            *a += b;
        }
    }

    fn sum(&self, other: &Self) -> Self {
        let mut s = *self;
        s.add(other);
        s
    }

    fn eval(&self, p: [f64; 3]) -> f64 {
        let q = &self.0;
        let [x, y, z] = p;
        q[0] * x * x + 2.0 * q[1] * x * y + 2.0 * q[2] * x * z + 2.0 * q[3] * x + q[4] * y * y + 2.0 * q[5] * y * z
            + 2.0 * q[6] * y
            + q[7] * z * z
            + 2.0 * q[8] * z
            + q[9]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    cost: f64,
    from: usize,
    to: usize,
    stamp_from: u32,
    stamp_to: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.from.cmp(&other.from))
            .then(self.to.cmp(&other.to))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Collapser {
    pos: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vertex_faces: Vec<Vec<usize>>,
    removed: Vec<bool>,
    quadrics: Vec<Quadric>,
    stamps: Vec<u32>,
    heap: BinaryHeap<Reverse<Candidate>>,
    min_area: f64,
}

impl Collapser {
    fn new<T: Real>(mesh: &Mesh<T>) -> Self {
        let pos: Vec<[f64; 3]> = mesh
            .vertices()
            .iter()
            .map(|p| [p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()])
            .collect();
        let n = pos.len();
        let faces = mesh.faces().to_vec();
        let mut vertex_faces = vec![Vec::new(); n];
        let mut quadrics = vec![Quadric::default(); n];
        for (f, tri) in faces.iter().enumerate() {
            let cross = cross_of(&pos, *tri);
            let len = norm(cross);
            for &v in tri {
                vertex_faces[v].push(f);
            }
            if len > 0.0 {
                let nrm = [cross[0] / len, cross[1] / len, cross[2] / len];
                let d = -dot(nrm, pos[tri[0]]);
                let q = Quadric::plane(nrm, d, 0.5 * len);
                for &v in tri {
                    quadrics[v].add(&q);
                }
            }
        }
        let diag = mesh.bounding_box_diagonal().to_f64_lossy();
        Self {
            pos,
            face_alive: vec![true; faces.len()],
            faces,
            vertex_faces,
            removed: vec![false; n],
            quadrics,
            stamps: vec![0; n],
            heap: BinaryHeap::new(),
            min_area: 1e-12 * diag * diag,
        }
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vertex_faces[v]
            .iter()
            .flat_map(|&f| self.faces[f])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn faces_on_edge(&self, a: usize, b: usize) -> usize {
        self.vertex_faces[a]
            .iter()
            .filter(|&&f| self.faces[f].contains(&b))
            .count()
    }

    fn push_edges_of(&mut self, v: usize) {
        for w in self.neighbors(v) {
            self.push(v, w);
            self.push(w, v);
        }
    }

    fn push(&mut self, from: usize, to: usize) {
        let cost = self.quadrics[from].sum(&self.quadrics[to]).eval(self.pos[to]);
        self.heap.push(Reverse(Candidate {
            cost,
            from,
            to,
            stamp_from: self.stamps[from],
            stamp_to: self.stamps[to],
        }));
    }

    fn rebuild(&mut self) {
        self.heap.clear();
        for v in 0..self.pos.len() {
            if !self.removed[v] {
                for w in self.neighbors(v) {
                    self.push(v, w);
                }
            }
        }
    }

    fn is_current(&self, c: &Candidate) -> bool {
        !self.removed[c.from]
            && !self.removed[c.to]
            && self.stamps[c.from] == c.stamp_from
            && self.stamps[c.to] == c.stamp_to
    }

    fn is_legal(&self, u: usize, v: usize) -> bool {
        let nu = self.neighbors(u);
        if nu.binary_search(&v).is_err() {
            return false;
        }
        // u must be an interior manifold vertex: every spoke on two faces and
        // as many faces as spokes (a single closed fan).
        if nu.len() != self.vertex_faces[u].len() || nu.iter().any(|&w| self.faces_on_edge(u, w) != 2) {
            return false;
        }
        let nv = self.neighbors(v);
        if nv.iter().any(|&w| self.faces_on_edge(v, w) > 2) {
            return false;
        }
        let common: Vec<usize> = nu.iter().copied().filter(|w| nv.binary_search(w).is_ok()).collect();
        if common.len() != 2 {
            return false;
        }
        if common.iter().any(|&w| self.neighbors(w).len() <= 3) {
            return false;
        }
        for &f in &self.vertex_faces[u] {
            let tri = self.faces[f];
            if tri.contains(&v) {
                continue;
            }
            let before = cross_of(&self.pos, tri);
            let after = cross_of(&self.pos, tri.map(|w| if w == u { v } else { w }));
            if 0.5 * norm(after) <= self.min_area || dot(before, after) <= 0.0 {
                return false;
            }
        }
        true
    }

    fn collapse(&mut self, u: usize, v: usize) {
        for f in std::mem::take(&mut self.vertex_faces[u]) {
            let tri = self.faces[f];
            if tri.contains(&v) {
                self.face_alive[f] = false;
                for w in tri {
                    if w != u {
                        self.vertex_faces[w].retain(|&g| g != f);
                    }
                }
            } else {
                self.faces[f] = tri.map(|w| if w == u { v } else { w });
                self.vertex_faces[v].push(f);
            }
        }
        self.removed[u] = true;
        let qu = self.quadrics[u];
        self.quadrics[v].add(&qu);
        self.stamps[v] = self.stamps[v].wrapping_add(1);
        self.push_edges_of(v);
    }

    /// Performs up to `target` collapses, recording them in `trace`.
    fn run(&mut self, target: usize, trace: &mut DecimationTrace) {
        self.rebuild();
        loop {
            let mut progressed = false;
            while trace.removed_count() < target {
                let Some(Reverse(c)) = self.heap.pop() else { break };
                if self.is_current(&c) && self.is_legal(c.from, c.to) {
                    self.collapse(c.from, c.to);
                    trace.push(c.from, c.to);
                    progressed = true;
                }
            }
            // Collapses rejected earlier may have become legal; retry from a
            // fresh queue until a full pass makes no progress.
            if trace.removed_count() >= target || !progressed {
                break;
            }
            self.rebuild();
        }
    }
}

fn cross_of(pos: &[[f64; 3]], [a, b, c]: [usize; 3]) -> [f64; 3] {
    let (p, q, r) = (pos[a], pos[b], pos[c]);
    let e1 = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    let e2 = [r[0] - p[0], r[1] - p[1], r[2] - p[2]];
    [
        e1[1] * e2[2] - e1[2] * e2[1],
        e1[2] * e2[0] - e1[0] * e2[2],
        e1[0] * e2[1] - e1[1] * e2[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Removes `⌈|V|·fraction⌉` vertices by cheapest legal half-edge collapse.
///
/// Collapses never touch boundary or non-manifold vertices, never violate
/// the link condition and never flip or flatten a face. If legal collapses
/// run out first, the trace reports the shortfall. The quadric-error order
/// is fully deterministic; `seed` is accepted so that every channel in the
/// pipeline shares one signature, and does not influence the result.
pub fn decimate<T: Real>(
    mesh: &Mesh<T>,
    fraction: f64,
    seed: u64,
) -> Result<(Mesh<T>, DecimationTrace), DecimateError> {
    let _ = seed;
    if !(0.0..1.0).contains(&fraction) {
        return Err(DecimateError::FractionOutOfRange(fraction));
    }
    if mesh.vertex_count() == 0 {
        return Err(DecimateError::EmptyMesh);
    }
    let target = removal_target(mesh.vertex_count(), fraction);
    let mut trace = DecimationTrace::new(mesh.vertex_count(), target);
    if target == 0 {
        return Ok((mesh.clone(), trace));
    }
    let mut c = Collapser::new(mesh);
    c.run(target, &mut trace);

    let map = trace.compaction_map();
    let vertices = mesh
        .vertices()
        .iter()
        .zip(&map)
        .filter(|(_, m)| m.is_some())
        .map(|(p, _)| *p)
        .collect();
    let faces = c
        .faces
        .iter()
        .zip(&c.face_alive)
        .filter(|(_, &alive)| alive)
        .map(|(tri, _)| tri.map(|w| map[w].expect("live face references a removed vertex")))
        .collect();
    let simplified = Mesh::new(vertices, faces).expect("collapse preserved mesh invariants");
    Ok((simplified, trace))
}

/// Adds seeded normal noise with standard deviation `sigma · bbox diagonal`
/// to every coordinate.
pub fn gaussian_perturb<T: Real>(mesh: &Mesh<T>, sigma: f64, seed: u64) -> Result<Mesh<T>, DecimateError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(DecimateError::InvalidSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(mesh.clone());
    }
    let std_dev = sigma * mesh.bounding_box_diagonal().to_f64_lossy();
    let normal = Normal::new(0.0, std_dev).map_err(|_| DecimateError::InvalidSigma(sigma))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved: Vec<Vec3<T>> = mesh
        .vertices()
        .iter()
        .map(|p| {
            let mut noise = || T::lit(normal.sample(&mut rng));
            Vec3::new(p.x + noise(), p.y + noise(), p.z + noise())
        })
        .collect();
    Ok(Mesh::new(moved, mesh.faces().to_vec()).expect("noise keeps connectivity valid"))
}
