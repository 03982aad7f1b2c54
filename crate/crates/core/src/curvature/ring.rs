use std::collections::HashMap;

use super::CurvatureError;
use crate::geometry::Vec3;
use crate::mesh::{Mesh, TopologyIndex};
use crate::scalar::Real;

/// Relative area threshold below which an incident triangle is treated as degenerate.
pub(crate) const DEGENERATE_REL: f64 = 1e-12;

/// One incident triangle `(centre, a, b)` in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct RingTriangle<T> {
    pub face: usize,
    pub a: usize,
    pub b: usize,
    /// `p_a - p_centre`
    pub to_a: Vec3<T>,
    /// `p_b - p_centre`
    pub to_b: Vec3<T>,
    pub angle_center: T,
    pub angle_a: T,
    pub angle_b: T,
    pub area: T,
    /// Unit normal; zero for degenerate triangles.
    pub normal: Vec3<T>,
    pub degenerate: bool,
}

/// Faces around a vertex, chained into fan order where the neighbourhood is manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct OneRing<T> {
    pub center: usize,
    pub position: Vec3<T>,
    /// Neighbours in fan order (first and last differ for open fans).
    pub neighbors: Vec<usize>,
    pub triangles: Vec<RingTriangle<T>>,
    /// The fan closes on itself (interior vertex).
    pub closed: bool,
    /// Every triangle could be chained into a single fan.
    pub manifold: bool,
}

impl<T: Real> OneRing<T> {
    /// Sum of the corner angles at the centre over non-degenerate triangles.
    pub fn angle_sum(&self) -> T {
        self.usable().map(|t| t.angle_center).sum()
    }

    pub fn usable(&self) -> impl Iterator<Item = &RingTriangle<T>> {
        self.triangles.iter().filter(|t| !t.degenerate)
    }

    pub fn degenerate_count(&self) -> usize {
        self.triangles.iter().filter(|t| t.degenerate).count()
    }

    /// For each neighbour (fan order): its offset from the centre and the
    /// angles opposite the spoke `centre → neighbour`. Interior spokes carry
    /// two angles, boundary spokes one.
    pub fn opposite_angles(&self) -> Vec<(usize, Vec3<T>, Vec<T>)> {
        let mut slot: HashMap<usize, usize> = HashMap::new();
        let mut out: Vec<(usize, Vec3<T>, Vec<T>)> = Vec::new();
        let mut push = |n: usize, off: Vec3<T>, ang: T, out: &mut Vec<(usize, Vec3<T>, Vec<T>)>| {
            let i = *slot.entry(n).or_insert_with(|| {
                out.push((n, off, Vec::new()));
                out.len() - 1
            });
            out[i].2.push(ang);
        };
        for t in self.usable() {
            push(t.a, t.to_a, t.angle_b, &mut out);
            push(t.b, t.to_b, t.angle_a, &mut out);
        }
        out
    }
}

fn ring_triangle<T: Real>(mesh: &Mesh<T>, face: usize, c: usize, a: usize, b: usize) -> RingTriangle<T> {
    let pc = mesh.position(c);
    let pa = mesh.position(a);
    let pb = mesh.position(b);
    let to_a = pa - pc;
    let to_b = pb - pc;
    let cross = to_a.cross(to_b);
    let longest = to_a
        .norm_squared()
        .max(to_b.norm_squared())
        .max((pb - pa).norm_squared());
    let twice_area = cross.norm();
    let degenerate = twice_area.is_nan() || twice_area <= T::lit(DEGENERATE_REL) * longest;
    RingTriangle {
        face,
        a,
        b,
        to_a,
        to_b,
        angle_center: to_a.angle_to(to_b),
        angle_a: (pc - pa).angle_to(pb - pa),
        angle_b: (pc - pb).angle_to(pa - pb),
        area: twice_area * T::lit(0.5),
        normal: if degenerate {
            Vec3::zero()
        } else {
            cross / twice_area
        },
        degenerate,
    }
}

/// Gathers the incident triangles of `v` and orders them into a fan.
pub fn one_ring<T: Real>(mesh: &Mesh<T>, topo: &TopologyIndex, v: usize) -> Result<OneRing<T>, CurvatureError> {
    if v >= mesh.vertex_count() {
        return Err(CurvatureError::VertexOutOfRange {
            vertex: v,
            count: mesh.vertex_count(),
        });
    }
    let mut tris: Vec<RingTriangle<T>> = topo
        .incident_faces(v)
        .iter()
        .map(|&fi| {
            let f = mesh.faces()[fi];
            let k = f.iter().position(|&x| x == v).expect("incident face contains vertex");
            ring_triangle(mesh, fi, v, f[(k + 1) % 3], f[(k + 2) % 3])
        })
        .collect();
    if tris.is_empty() {
        return Ok(OneRing {
            center: v,
            position: mesh.position(v),
            neighbors: Vec::new(),
            triangles: tris,
            closed: false,
            manifold: true,
        });
    }

    // Chain faces: the successor of (c, a, b) is the face (c, b, x).
    let mut by_a: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        by_a.entry(t.a).or_default().push(i);
    }
    let bs: Vec<usize> = tris.iter().map(|t| t.b).collect();
    let unique_chain = by_a.values().all(|l| l.len() == 1);
    let start = (0..tris.len())
        .find(|&i| !bs.contains(&tris[i].a))
        .unwrap_or(0);

    let mut order = Vec::with_capacity(tris.len());
    let mut used = vec![false; tris.len()];
    let mut cur = start;
    let mut closed = false;
    if unique_chain {
        loop {
            order.push(cur);
            used[cur] = true;
            match by_a.get(&tris[cur].b).map(|l| l[0]) {
                Some(next) if next == start => {
                    closed = true;
                    break;
                }
                Some(next) if !used[next] => cur = next,
                _ => break,
            }
        }
    }
    let manifold = order.len() == tris.len() && topo.is_manifold(v);
    if order.len() != tris.len() {
        closed = false;
        order.extend((0..tris.len()).filter(|&i| !used[i]));
    }

    let mut slots: Vec<Option<RingTriangle<T>>> = tris.drain(..).map(Some).collect();
    let triangles: Vec<RingTriangle<T>> = order
        .iter()
        .map(|&i| slots[i].take().expect("each triangle placed once"))
        .collect();

    let mut neighbors = Vec::with_capacity(triangles.len() + 1);
    for t in &triangles {
        for n in [t.a, t.b] {
            if !neighbors.contains(&n) {
                neighbors.push(n);
            }
        }
    }
    Ok(OneRing {
        center: v,
        position: mesh.position(v),
        neighbors,
        triangles,
        closed: closed && manifold,
        manifold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn hexagon_fan_equilateral() {
        let m = fixtures::hexagon_fan::<f64>();
        let t = TopologyIndex::build(&m);
        let r = one_ring(&m, &t, 0).unwrap();
        assert_eq!(r.neighbors, vec![1, 2, 3, 4, 5, 6]);
        assert!(r.closed);
        for tri in &r.triangles {
            assert!((tri.angle_center - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cube_corner_right_angles() {
        let m = fixtures::cube::<f64>();
        let t = TopologyIndex::build(&m);
        let r = one_ring(&m, &t, 0).unwrap();
        assert_eq!(r.triangles.len(), 3);
        assert!(r.closed);
        for tri in &r.triangles {
            assert!((tri.angle_center - PI / 2.0).abs() < 1e-12);
        }
        assert!((r.angle_sum() - 1.5 * PI).abs() < 1e-12);
        // corner 1 touches two face diagonals: angles 90 + 45 + 45 + 45 + 45
        let r1 = one_ring(&m, &t, 1).unwrap();
        assert!((r1.angle_sum() - 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn single_triangle_open_ring() {
        let m = fixtures::single_triangle::<f64>();
        let t = TopologyIndex::build(&m);
        let r = one_ring(&m, &t, 0).unwrap();
        assert_eq!(r.neighbors.len(), 2);
        assert_eq!(r.triangles.len(), 1);
        assert!(!r.closed);
        let ops = r.opposite_angles();
        assert!(ops.iter().all(|(_, _, a)| a.len() == 1));
    }

    #[test]
    fn degenerate_triangle_is_flagged() {
        let m = Mesh::<f64>::new(
            vec![
                Vec3::zero(),
                Vec3::from_f64(1.0, 0.0, 0.0),
                Vec3::from_f64(2.0, 0.0, 0.0),
                Vec3::from_f64(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        let t = TopologyIndex::build(&m);
        let r = one_ring(&m, &t, 0).unwrap();
        assert_eq!(r.degenerate_count(), 1);
        assert_eq!(r.usable().count(), 1);
    }

    #[test]
    fn interior_spokes_have_two_opposite_angles() {
        let m = fixtures::octahedron::<f64>();
        let t = TopologyIndex::build(&m);
        let r = one_ring(&m, &t, 4).unwrap();
        let ops = r.opposite_angles();
        assert_eq!(ops.len(), 4);
        for (_, _, angles) in ops {
            assert_eq!(angles.len(), 2);
            for a in angles {
                assert!(a > 0.0 && a < PI);
            }
        }
    }

    #[test]
    fn out_of_range_vertex() {
        let m = fixtures::single_triangle::<f64>();
        let t = TopologyIndex::build(&m);
        assert!(one_ring(&m, &t, 3).is_err());
    }
}
