//! Procedural test meshes.
//!
//! All generators are deterministic and produce outward-oriented faces.

use std::collections::HashMap;

use crate::geometry::Vec3;
use crate::mesh::Mesh;
use crate::scalar::Real;

fn build<T: Real>(vertices: Vec<Vec3<T>>, faces: Vec<[usize; 3]>) -> Mesh<T> {
    Mesh::new(vertices, faces).expect("fixture generators emit valid meshes")
}

pub fn single_triangle<T: Real>() -> Mesh<T> {
    build(
        vec![Vec3::zero(), Vec3::unit_x(), Vec3::unit_y()],
        vec![[0, 1, 2]],
    )
}

pub fn tetrahedron<T: Real>() -> Mesh<T> {
    build(
        vec![
            Vec3::from_f64(1.0, 1.0, 1.0),
            Vec3::from_f64(1.0, -1.0, -1.0),
            Vec3::from_f64(-1.0, 1.0, -1.0),
            Vec3::from_f64(-1.0, -1.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )
}

/// Regular octahedron with vertices on the unit axes.
pub fn octahedron<T: Real>() -> Mesh<T> {
    let v = vec![
        Vec3::from_f64(1.0, 0.0, 0.0),
        Vec3::from_f64(-1.0, 0.0, 0.0),
        Vec3::from_f64(0.0, 1.0, 0.0),
        Vec3::from_f64(0.0, -1.0, 0.0),
        Vec3::from_f64(0.0, 0.0, 1.0),
        Vec3::from_f64(0.0, 0.0, -1.0),
    ];
    let f = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    build(v, f)
}

/// Two triangles sharing edge (0, 1) plus a third fin on the same edge.
pub fn three_face_edge<T: Real>() -> Mesh<T> {
    build(
        vec![
            Vec3::from_f64(0.0, 0.0, 0.0),
            Vec3::from_f64(1.0, 0.0, 0.0),
            Vec3::from_f64(0.5, 1.0, 0.0),
            Vec3::from_f64(0.5, -1.0, 0.0),
            Vec3::from_f64(0.5, 0.0, 1.0),
        ],
        vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
    )
}

/// Copy of `mesh` with one unreferenced vertex appended.
pub fn with_isolated_vertex<T: Real>(mesh: &Mesh<T>) -> Mesh<T> {
    let mut v = mesh.vertices().to_vec();
    v.push(Vec3::from_f64(10.0, 10.0, 10.0));
    build(v, mesh.faces().to_vec())
}

/// Unit cube `[0,1]^3`; vertex `i` sits at `(i & 1, (i >> 1) & 1, (i >> 2) & 1)`.
///
/// Face diagonals avoid corners 0 and 7, so those two corners have exactly
/// three incident right-angled triangles.
pub fn cube<T: Real>() -> Mesh<T> {
    let v = (0..8)
        .map(|i| Vec3::from_f64((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
        .collect();
    let quads = [
        [0, 4, 6, 2],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 2, 3, 1],
        [4, 5, 7, 6],
    ];
    let mut f = Vec::with_capacity(12);
    for [a, b, c, d] in quads {
        if [0, 7].contains(&a) || [0, 7].contains(&c) {
            f.push([a, b, d]);
            f.push([b, c, d]);
        } else {
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
    }
    build(v, f)
}

/// Regular grid in the `z = 0` plane with `nx × ny` cells, normals `+z`.
pub fn planar_grid<T: Real>(nx: usize, ny: usize, spacing: f64) -> Mesh<T> {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            v.push(Vec3::from_f64(i as f64 * spacing, j as f64 * spacing, 0.0));
        }
    }
    let mut f = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = grid_index(nx, i, j);
            let b = grid_index(nx, i + 1, j);
            let c = grid_index(nx, i + 1, j + 1);
            let d = grid_index(nx, i, j + 1);
            f.push([a, b, c]);
            f.push([a, c, d]);
        }
    }
    build(v, f)
}

/// Vertex index of grid point `(i, j)` in [`planar_grid`].
pub fn grid_index(nx: usize, i: usize, j: usize) -> usize {
    j * (nx + 1) + i
}

/// Planar fan of six unit equilateral triangles around vertex 0.
pub fn hexagon_fan<T: Real>() -> Mesh<T> {
    let mut v = vec![Vec3::zero()];
    for k in 0..6 {
        let a = k as f64 * std::f64::consts::PI / 3.0;
        v.push(Vec3::from_f64(a.cos(), a.sin(), 0.0));
    }
    let f = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
    build(v, f)
}

/// Fan of eight triangles around vertex 0 whose rim alternates up and down,
/// `z = height · cos 2φ` on the unit circle: a saddle at the centre.
pub fn saddle_fan<T: Real>(height: f64) -> Mesh<T> {
    let mut v = vec![Vec3::zero()];
    for k in 0..8 {
        let a = k as f64 * std::f64::consts::FRAC_PI_4;
        v.push(Vec3::from_f64(a.cos(), a.sin(), height * (2.0 * a).cos()));
    }
    let f = (0..8).map(|k| [0, 1 + k, 1 + (k + 1) % 8]).collect();
    build(v, f)
}

/// Geodesic sphere: icosahedron subdivided `levels` times, projected to `radius`.
/// Level 3 has 642 vertices.
pub fn icosphere<T: Real>(levels: usize, radius: f64) -> Mesh<T> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut pts: Vec<[f64; 3]> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let unit = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / n, p[1] / n, p[2] / n]
    };
    for p in &mut pts {
        *p = unit(*p);
    }
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, pts: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (pa, pb) = (pts[a], pts[b]);
                pts.push(unit([
                    (pa[0] + pb[0]) / 2.0,
                    (pa[1] + pb[1]) / 2.0,
                    (pa[2] + pb[2]) / 2.0,
                ]));
                pts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut pts);
            let bc = mid(b, c, &mut pts);
            let ca = mid(c, a, &mut pts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let v = pts
        .into_iter()
        .map(|p| Vec3::from_f64(p[0] * radius, p[1] * radius, p[2] * radius))
        .collect();
    build(v, faces)
}

/// Open tube of the given radius along `z`: `rings` circles of `segments`
/// vertices each, spaced `spacing` apart.
pub fn cylinder<T: Real>(radius: f64, segments: usize, rings: usize, spacing: f64) -> Mesh<T> {
    let mut v = Vec::with_capacity(segments * rings);
    for j in 0..rings {
        for i in 0..segments {
            let a = i as f64 * std::f64::consts::TAU / segments as f64;
            v.push(Vec3::from_f64(radius * a.cos(), radius * a.sin(), j as f64 * spacing));
        }
    }
    let id = |i: usize, j: usize| j * segments + (i % segments);
    let mut f = Vec::new();
    for j in 0..rings - 1 {
        for i in 0..segments {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(v, f)
}

/// Box with half-extents `extents`, every face an `n × n` grid, edges and
/// corners rounded with `radius` (0 keeps sharp edges).
///
/// Grid points whose projection stays inside the shrunk box keep their exact
/// planar position, so face interiors are exactly flat.
pub fn rounded_box<T: Real>(n: usize, extents: [f64; 3], radius: f64) -> Mesh<T> {
    assert!(n >= 1);
    let mut ids: HashMap<[usize; 3], usize> = HashMap::new();
    let mut lattice: Vec<[usize; 3]> = Vec::new();
    let mut faces = Vec::with_capacity(12 * n * n);

    // (fixed axis, fixed value, u axis, v axis) with u × v pointing outward.
    let sides: [(usize, usize, usize, usize); 6] = [
        (0, n, 1, 2),
        (0, 0, 2, 1),
        (1, n, 2, 0),
        (1, 0, 0, 2),
        (2, n, 0, 1),
        (2, 0, 1, 0),
    ];
    for (axis, value, ua, va) in sides {
        let mut id = |i: usize, j: usize| {
            let mut p = [0usize; 3];
            p[axis] = value;
            p[ua] = i;
            p[va] = j;
            *ids.entry(p).or_insert_with(|| {
                lattice.push(p);
                lattice.len() - 1
            })
        };
        for j in 0..n {
            for i in 0..n {
                let a = id(i, j);
                let b = id(i + 1, j);
                let c = id(i + 1, j + 1);
                let d = id(i, j + 1);
                if (i + j) % 2 == 0 {
                    faces.push([a, b, c]);
                    faces.push([a, c, d]);
                } else {
                    faces.push([a, b, d]);
                    faces.push([b, c, d]);
                }
            }
        }
    }

    let v = lattice
        .iter()
        .map(|l| {
            let mut p = [0.0; 3];
            let mut inner = [0.0; 3];
            for k in 0..3 {
                p[k] = (2.0 * l[k] as f64 / n as f64 - 1.0) * extents[k];
                let lim = (extents[k] - radius).max(0.0);
                inner[k] = p[k].clamp(-lim, lim);
            }
            let d = [p[0] - inner[0], p[1] - inner[1], p[2] - inner[2]];
            let len = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            let on_plane = (0..3).filter(|&k| d[k] != 0.0).count() <= 1;
            if radius == 0.0 || len == 0.0 || on_plane {
                Vec3::from_f64(p[0], p[1], p[2])
            } else {
                let s = radius / len;
                Vec3::from_f64(inner[0] + d[0] * s, inner[1] + d[1] * s, inner[2] + d[2] * s)
            }
        })
        .collect();
    build(v, faces)
}

/// Disjoint union of a level-2 icosphere and a finely gridded sharp cube
/// offset along `x`: a mesh with known salient (cube corners) and flat
/// (cube face interiors) regions.
pub fn sphere_and_cube<T: Real>() -> Mesh<T> {
    let sphere = icosphere::<T>(2, 1.0);
    let cube = rounded_box::<T>(6, [1.0, 1.0, 1.0], 0.0)
        .map_positions(|p| p + Vec3::from_f64(4.0, 0.0, 0.0));
    sphere.merged(&cube)
}

/// 5402-vertex cube with rounded edges and corners used for the survival
/// benchmark.
pub fn benchmark_box<T: Real>() -> Mesh<T> {
    rounded_box(30, [1.0, 1.0, 1.0], 0.3)
}

/// A differently proportioned rounded box (3458 vertices) used to train
/// the network that is then evaluated on [`benchmark_box`].
pub fn training_box<T: Real>() -> Mesh<T> {
    rounded_box(24, [1.0, 0.8, 0.6], 0.35)
}

/// Fixture meshes by name, as exposed on the command line.
pub const NAMED: [&str; 7] = [
    "tetrahedron",
    "octahedron",
    "cube",
    "icosphere",
    "sphere-and-cube",
    "benchmark-box",
    "training-box",
];

pub fn by_name<T: Real>(name: &str) -> Option<Mesh<T>> {
    Some(match name {
        "tetrahedron" => tetrahedron(),
        "octahedron" => octahedron(),
        "cube" => cube(),
        "icosphere" => icosphere(3, 1.0),
        "sphere-and-cube" => sphere_and_cube(),
        "benchmark-box" => benchmark_box(),
        "training-box" => training_box(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{validate, TopologyIndex};

    fn assert_closed_clean<T: Real>(m: &Mesh<T>) {
        let t = TopologyIndex::build(m);
        assert!(validate(m, &t).is_clean());
        assert!(t.edges().all(|(_, c)| c == 2));
        assert_eq!(3 * m.face_count(), 2 * t.edge_count());
    }

    #[test]
    fn closed_fixtures_are_clean_spheres() {
        for m in [
            tetrahedron::<f64>(),
            octahedron(),
            cube(),
            icosphere(3, 1.0),
            rounded_box(8, [1.0, 1.0, 1.0], 0.4),
        ] {
            assert_closed_clean(&m);
            assert_eq!(m.euler_characteristic(), 2);
        }
    }

    #[test]
    fn icosphere_level3_has_642_vertices() {
        assert_eq!(icosphere::<f64>(3, 1.0).vertex_count(), 642);
    }

    #[test]
    fn rounded_box_vertex_count() {
        let m = rounded_box::<f64>(30, [1.0, 1.0, 1.0], 0.5);
        assert_eq!(m.vertex_count(), 6 * 31 * 31 - 12 * 31 + 8);
    }

    #[test]
    fn named_fixtures() {
        assert_eq!(benchmark_box::<f64>().vertex_count(), 5402);
        assert_eq!(training_box::<f64>().vertex_count(), 3458);
        for name in NAMED {
            let m = by_name::<f64>(name).unwrap();
            assert!(m.vertex_count() > 0);
        }
        assert!(by_name::<f64>("teapot").is_none());
    }

    #[test]
    fn outward_orientation() {
        for m in [icosphere::<f64>(1, 1.0), rounded_box(4, [1.0, 1.0, 1.0], 0.3)] {
            for f in 0..m.face_count() {
                let [a, b, c] = m.faces()[f];
                let centroid = (m.position(a) + m.position(b) + m.position(c)) / 3.0;
                assert!(m.face_cross(f).dot(centroid) > 0.0);
            }
        }
        let c = cube::<f64>();
        let mid = Vec3::from_f64(0.5, 0.5, 0.5);
        for f in 0..c.face_count() {
            let [a, _, _] = c.faces()[f];
            assert!(c.face_cross(f).dot(c.position(a) - mid) > 0.0);
        }
    }
}
