use std::fmt::Write as _;

use bitflags::bitflags;
use rayon::prelude::*;

use super::{
    dihedral_extrema, estimate_normal, fit_quadric, gaussian_curvature, local_frame, mean_curvature_normal,
    mixed_area, one_ring, principal_curvatures, quadric_curvatures, MIN_QUADRIC_SAMPLES,
};
use crate::geometry::Vec3;
use crate::mesh::{Mesh, TopologyIndex};
use crate::scalar::{fmt_sig17, Real};

/// Angle sums within this many radians of 2π, and dihedral deviations
/// within this of zero, are snapped to the exact value.
pub const ANGLE_SNAP: f64 = 1e-9;

/// Dimensionless threshold for zeroing fitted quadric coefficients.
pub const QUADRIC_SNAP: f64 = 1e-9;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct DescriptorFlags: u16 {
        const ISOLATED = 1;
        const BOUNDARY = 1 << 1;
        const NON_MANIFOLD = 1 << 2;
        /// Some incident triangle had zero area and was skipped.
        const DEGENERATE = 1 << 3;
        const NO_AREA = 1 << 4;
        const NO_NORMAL = 1 << 5;
        const NO_QUADRIC = 1 << 6;
    }
}

impl DescriptorFlags {
    /// Flags that remove a vertex from ranking.
    pub const EXCLUDING: Self = Self::ISOLATED
        .union(Self::BOUNDARY)
        .union(Self::NON_MANIFOLD)
        .union(Self::NO_AREA)
        .union(Self::NO_NORMAL)
        .union(Self::NO_QUADRIC);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexDescriptor<T> {
    /// Angle sum at the vertex.
    pub theta: T,
    pub mixed_area: T,
    /// Mean-curvature normal `K`.
    pub mean_curvature_normal: Vec3<T>,
    pub normal: Vec3<T>,
    pub kappa_h: T,
    pub kappa_g: T,
    pub kappa1: T,
    pub kappa2: T,
    /// Gaussian curvature of the fitted quadric.
    pub kappa_g1: T,
    /// Mean curvature of the fitted quadric.
    pub kappa_h1: T,
    pub psi_min: T,
    pub psi_max: T,
    pub delta: T,
    /// `κ_H² - κ_G` came out negative and was clamped to zero.
    pub delta_clamped: bool,
    pub flags: DescriptorFlags,
}

impl<T: Real> VertexDescriptor<T> {
    fn neutral(flags: DescriptorFlags) -> Self {
        Self {
            theta: T::two_pi(),
            mixed_area: T::zero(),
            mean_curvature_normal: Vec3::zero(),
            normal: Vec3::zero(),
            kappa_h: T::zero(),
            kappa_g: T::zero(),
            kappa1: T::zero(),
            kappa2: T::zero(),
            kappa_g1: T::zero(),
            kappa_h1: T::zero(),
            psi_min: T::zero(),
            psi_max: T::zero(),
            delta: T::zero(),
            delta_clamped: false,
            flags,
        }
    }

    pub fn is_excluded(&self) -> bool {
        self.flags.intersects(DescriptorFlags::EXCLUDING)
    }

    /// The scalar descriptors in CSV column order (without index, normal and flags).
    pub fn scalars(&self) -> [T; 9] {
        [
            self.theta,
            self.mixed_area,
            self.kappa_h,
            self.kappa_g,
            self.kappa_g1,
            self.kappa1,
            self.kappa2,
            self.psi_min,
            self.psi_max,
        ]
    }
}

/// Per-vertex descriptor table, indexed like the mesh vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexDescriptors<T> {
    records: Vec<VertexDescriptor<T>>,
}

impl<T: Real> VertexDescriptors<T> {
    pub fn from_records(records: Vec<VertexDescriptor<T>>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[VertexDescriptor<T>] {
        &self.records
    }

    pub fn get(&self, v: usize) -> &VertexDescriptor<T> {
        &self.records[v]
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `excluded[v]` is true for vertices left out of ranking.
    pub fn excluded_mask(&self) -> Vec<bool> {
        self.records.iter().map(VertexDescriptor::is_excluded).collect()
    }

    pub fn rankable_count(&self) -> usize {
        self.records.iter().filter(|r| !r.is_excluded()).count()
    }

    /// Number of vertices whose discriminant needed clamping.
    pub fn delta_clamp_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| r.delta_clamped)
            .count()
    }

    /// `Σ (2π - θ)` over vertices that have at least one face.
    pub fn total_angle_deficit(&self) -> T {
        self.records
            .iter()
            .filter(|r| !r.flags.contains(DescriptorFlags::ISOLATED))
            .map(|r| T::two_pi() - r.theta)
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,theta,A_mixed,kH,kG,kG1,k1,k2,psi_min,psi_max,nx,ny,nz,flags\n");
        for (i, r) in self.records.iter().enumerate() {
            let _ = write!(out, "{i}");
            for x in r.scalars() {
                let _ = write!(out, ",{}", fmt_sig17(x));
            }
            for x in r.normal.to_array() {
                let _ = write!(out, ",{}", fmt_sig17(x));
            }
            let _ = writeln!(out, ",{}", r.flags.bits());
        }
        out
    }
}

fn snap_to<T: Real>(x: T, target: T) -> T {
    if (x - target).abs() < T::lit(ANGLE_SNAP) {
        target
    } else {
        x
    }
}

/// Computes every descriptor for vertex `v`; failures become flags.
pub fn describe_vertex<T: Real>(mesh: &Mesh<T>, topo: &TopologyIndex, v: usize) -> VertexDescriptor<T> {
    if topo.is_isolated(v) {
        return VertexDescriptor::neutral(DescriptorFlags::ISOLATED);
    }
    let ring = match one_ring(mesh, topo, v) {
        Ok(r) => r,
        Err(_) => return VertexDescriptor::neutral(DescriptorFlags::NO_AREA),
    };
    let mut flags = DescriptorFlags::empty();
    flags.set(DescriptorFlags::BOUNDARY, topo.is_boundary(v));
    flags.set(DescriptorFlags::NON_MANIFOLD, !topo.is_manifold(v) || !ring.manifold);
    flags.set(DescriptorFlags::DEGENERATE, ring.degenerate_count() > 0);

    let mut d = VertexDescriptor::neutral(flags);
    d.theta = snap_to(ring.angle_sum(), T::two_pi());

    match mixed_area(&ring) {
        Ok(area) => {
            d.mixed_area = area;
            d.mean_curvature_normal = mean_curvature_normal(&ring, area);
            d.kappa_h = d.mean_curvature_normal.norm() * T::lit(0.5);
            // theta is snapped, so an intrinsically flat vertex gets exactly zero
            d.kappa_g = if flags.contains(DescriptorFlags::BOUNDARY) || d.theta == T::two_pi() {
                T::zero()
            } else {
                gaussian_curvature(&ring, area)
            };
            let p = principal_curvatures(d.kappa_h, d.kappa_g);
            d.kappa1 = p.k1;
            d.kappa2 = p.k2;
            d.delta = p.delta;
            d.delta_clamped = p.clamped;
        }
        Err(_) => d.flags |= DescriptorFlags::NO_AREA,
    }

    match estimate_normal(&ring) {
        Ok(n) => {
            d.normal = n;
            let frame = local_frame(n);
            let mut sample: Vec<usize> = topo.ring(v).to_vec();
            if sample.len() < MIN_QUADRIC_SAMPLES {
                sample = topo.two_ring(v);
            }
            let points: Vec<Vec3<T>> = sample.iter().map(|&j| mesh.position(j)).collect();
            match fit_quadric(&points, &frame, ring.position) {
                Ok(fit) => {
                    let eps = T::lit(QUADRIC_SNAP);
                    let fit = fit.snapped(eps);
                    let q = quadric_curvatures(&fit);
                    // 4ac - b² lost to cancellation carries no sign
                    let four_ac = T::lit(4.0) * fit.a * fit.c;
                    let det = four_ac - fit.b * fit.b;
                    let cancelled = det.abs() <= eps * (four_ac.abs() + fit.b * fit.b);
                    // `+ 0` folds a negative zero into positive zero
                    d.kappa_g1 = if cancelled { T::zero() } else { q.kappa_g + T::zero() };
                    d.kappa_h1 = q.kappa_h + T::zero();
                }
                Err(_) => d.flags |= DescriptorFlags::NO_QUADRIC,
            }
        }
        Err(_) => d.flags |= DescriptorFlags::NO_NORMAL | DescriptorFlags::NO_QUADRIC,
    }

    if let Ok((lo, hi)) = dihedral_extrema(&ring) {
        d.psi_min = snap_to(lo, T::zero());
        d.psi_max = snap_to(hi, T::zero());
    }
    d
}

/// Descriptor table for every vertex, computed in parallel. The result does
/// not depend on the number of worker threads.
pub fn compute_descriptors<T: Real>(mesh: &Mesh<T>, topo: &TopologyIndex) -> VertexDescriptors<T> {
    let records = (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| describe_vertex(mesh, topo, v))
        .collect();
    VertexDescriptors { records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn describe(m: &Mesh<f64>) -> VertexDescriptors<f64> {
        compute_descriptors(m, &TopologyIndex::build(m))
    }

    #[test]
    fn icosphere_has_no_flags() {
        let d = describe(&fixtures::icosphere(3, 1.0));
        assert!(d.records().iter().all(|r| r.flags.is_empty()), "{:?}", d.records()[0].flags);
    }

    #[test]
    fn isolated_vertex_is_flagged() {
        let m = fixtures::with_isolated_vertex(&fixtures::octahedron());
        let d = describe(&m);
        assert!(d.get(6).flags.contains(DescriptorFlags::ISOLATED));
        assert!(d.get(6).is_excluded());
        assert!((0..6).all(|v| !d.get(v).flags.contains(DescriptorFlags::ISOLATED)));
    }

    #[test]
    fn planar_grid_interior_is_neutral() {
        let m = fixtures::planar_grid(6, 6, 0.5);
        let d = describe(&m);
        let r = d.get(fixtures::grid_index(6, 3, 3));
        assert_eq!(r.theta, TAU);
        assert_eq!(r.kappa_g, 0.0);
        assert_eq!((r.psi_min, r.psi_max), (0.0, 0.0));
        assert_eq!(r.kappa_g1, 0.0);
        assert!(r.mean_curvature_normal.norm() < 1e-9);
        assert!(d.get(0).flags.contains(DescriptorFlags::BOUNDARY));
        assert_eq!(d.get(0).kappa_g, 0.0);
    }

    #[test]
    fn cube_corner_descriptors() {
        let d = describe(&fixtures::cube());
        let c = d.get(0);
        assert!((c.theta - 1.5 * PI).abs() < 1e-12);
        assert!((c.mixed_area - 0.75).abs() < 1e-12);
        assert!((c.kappa_g - FRAC_PI_2 / 0.75).abs() < 1e-12);
        assert!(c.kappa_g1 > 0.0, "{c:?}");
        assert!((c.psi_min - FRAC_PI_2).abs() < 1e-12);
        let deficit: f64 = d.total_angle_deficit();
        assert!((deficit - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn saddle_centre() {
        let d = describe(&fixtures::saddle_fan(0.5));
        let c = d.get(0);
        assert!(c.theta > TAU && c.kappa_g < 0.0 && c.kappa_g1 < 0.0, "{c:?}");
        assert!(c.psi_min < 0.0 && c.psi_max > 0.0);
        assert!(!c.is_excluded());
    }

    #[test]
    fn principal_order_holds_everywhere() {
        let d = describe(&fixtures::rounded_box(6, [1.0, 0.7, 0.5], 0.3));
        for r in d.records() {
            assert!(r.kappa1 >= r.kappa2);
            assert!(r.psi_min <= r.psi_max);
            assert!((r.kappa_h - r.mean_curvature_normal.norm() / 2.0).abs() == 0.0);
        }
    }

    #[test]
    fn csv_has_fixed_columns() {
        let csv = describe(&fixtures::octahedron()).to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "index,theta,A_mixed,kH,kG,kG1,k1,k2,psi_min,psi_max,nx,ny,nz,flags"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 14);
        assert_eq!(row[1].parse::<f64>().unwrap(), describe(&fixtures::octahedron()).get(0).theta);
    }
}
