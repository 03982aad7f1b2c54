//! Discrete differential operators on a vertex 1-ring.

use super::{CurvatureError, OneRing};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Angles outside `[COT_CLAMP, π - COT_CLAMP]` are clamped before taking the cotangent.
pub const COT_CLAMP: f64 = 1e-6;

/// Below this norm the projected x-axis is replaced by the y-axis in [`local_frame`].
pub const FRAME_SINGULAR: f64 = 1e-8;

pub(crate) fn clamped_cot<T: Real>(angle: T) -> T {
    let lo = T::lit(COT_CLAMP);
    let a = angle.max(lo).min(T::PI() - lo);
    a.cos() / a.sin()
}

/// Mixed Voronoi/barycentric area around the centre vertex.
///
/// Non-obtuse triangles contribute their circumcentric Voronoi share; an
/// obtuse triangle contributes half its area if the obtuse corner is the
/// centre and a quarter otherwise.
pub fn mixed_area<T: Real>(ring: &OneRing<T>) -> Result<T, CurvatureError> {
    let right = T::FRAC_PI_2();
    let mut total = T::zero();
    let mut any = false;
    for t in ring.usable() {
        any = true;
        total = total
            + if t.angle_center > right {
                t.area * T::lit(0.5)
            } else if t.angle_a > right || t.angle_b > right {
                t.area * T::lit(0.25)
            } else {
                (t.to_a.norm_squared() * clamped_cot(t.angle_b) + t.to_b.norm_squared() * clamped_cot(t.angle_a))
                    * T::lit(0.125)
            };
    }
    if any && total > T::zero() {
        Ok(total)
    } else {
        Err(CurvatureError::DegenerateRing { vertex: ring.center })
    }
}

/// Cotangent-weighted Laplace–Beltrami of the position: `K = 2 κ_H n`.
pub fn mean_curvature_normal<T: Real>(ring: &OneRing<T>, mixed_area: T) -> Vec3<T> {
    let mut sum = Vec3::zero();
    for (_, offset, angles) in ring.opposite_angles() {
        let w: T = angles.into_iter().map(clamped_cot).sum();
        sum += offset * w;
    }
    sum / (T::lit(2.0) * mixed_area)
}

/// Angle-deficit Gaussian curvature `(2π - Σθ) / A`.
pub fn gaussian_curvature<T: Real>(ring: &OneRing<T>, mixed_area: T) -> T {
    (T::two_pi() - ring.angle_sum()) / mixed_area
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalCurvatures<T> {
    pub k1: T,
    pub k2: T,
    /// `κ_H² - κ_G` after clamping at zero.
    pub delta: T,
    /// The raw discriminant was negative.
    pub clamped: bool,
}

pub fn principal_curvatures<T: Real>(kappa_h: T, kappa_g: T) -> PrincipalCurvatures<T> {
    let raw = kappa_h * kappa_h - kappa_g;
    let clamped = raw < T::zero();
    let delta = raw.max(T::zero());
    let root = delta.sqrt();
    PrincipalCurvatures {
        k1: kappa_h + root,
        k2: kappa_h - root,
        delta,
        clamped,
    }
}

/// Area-weighted mean of incident face normals.
pub fn estimate_normal<T: Real>(ring: &OneRing<T>) -> Result<Vec3<T>, CurvatureError> {
    let mut sum = Vec3::zero();
    let mut mass = T::zero();
    for t in ring.usable() {
        sum += t.normal * t.area;
        mass = mass + t.area;
    }
    if mass > T::zero() && sum.norm() > T::lit(1e-12) * mass {
        Ok(sum / sum.norm())
    } else {
        Err(CurvatureError::ZeroNormal { vertex: ring.center })
    }
}

/// Rows of the global-to-local rotation; `r3` is the surface normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame<T> {
    pub r1: Vec3<T>,
    pub r2: Vec3<T>,
    pub r3: Vec3<T>,
}

impl<T: Real> LocalFrame<T> {
    /// Coordinates of `v` in the frame.
    pub fn to_local(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.r1.dot(v), self.r2.dot(v), self.r3.dot(v))
    }
}

/// Frame with `r1` along the global x-axis projected onto the tangent plane.
pub fn local_frame<T: Real>(n: Vec3<T>) -> LocalFrame<T> {
    let project = |axis: Vec3<T>| axis - n * n.dot(axis);
    let mut p = project(Vec3::unit_x());
    if p.norm() < T::lit(FRAME_SINGULAR) {
        p = project(Vec3::unit_y());
    }
    let r1 = p / p.norm();
    LocalFrame {
        r1,
        r2: n.cross(r1),
        r3: n,
    }
}

/// Signed dihedral deviation over the interior spokes of the ring:
/// zero for coplanar faces, positive across convex edges.
pub fn dihedral_extrema<T: Real>(ring: &OneRing<T>) -> Result<(T, T), CurvatureError> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for t in ring.usable() {
        // The face across spoke (centre, t.b) is the one that starts at t.b.
        let mut across = ring.usable().filter(|u| u.a == t.b && u.face != t.face);
        let (Some(u), None) = (across.next(), across.next()) else {
            continue;
        };
        let magnitude = t.normal.angle_to(u.normal);
        let signed = if t.normal.dot(u.to_b) > T::zero() {
            -magnitude
        } else {
            magnitude
        };
        lo = lo.min(signed);
        hi = hi.max(signed);
    }
    if lo.is_finite() {
        Ok((lo, hi))
    } else {
        Err(CurvatureError::NoInteriorEdge { vertex: ring.center })
    }
}
