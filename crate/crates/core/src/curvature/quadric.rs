//! Local height-field fitting `z = a x² + b x y + c y² + d x + e y`.

use super::{CurvatureError, LocalFrame};
use crate::geometry::Vec3;
use crate::scalar::Real;

/// Minimum number of samples for the five-coefficient fit.
pub const MIN_QUADRIC_SAMPLES: usize = 5;

const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricFit<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub e: T,
    /// Euclidean norm of the height residual.
    pub residual: T,
    pub neighbor_count: usize,
    /// Mean tangential distance of the samples; the length scale of the fit.
    pub scale: T,
}

impl<T: Real> QuadricFit<T> {
    pub fn from_coefficients(a: T, b: T, c: T, d: T, e: T) -> Self {
        Self {
            a,
            b,
            c,
            d,
            e,
            residual: T::zero(),
            neighbor_count: 0,
            scale: T::one(),
        }
    }

    /// Zeroes coefficients that are negligible relative to the sample scale
    /// (`|a|·scale`, `|d|` and so on below `eps`), removing round-off signs on
    /// flat patches.
    pub fn snapped(mut self, eps: T) -> Self {
        let snap = |x: T, dimless: T| if dimless.abs() < eps { T::zero() } else { x };
        self.a = snap(self.a, self.a * self.scale);
        self.b = snap(self.b, self.b * self.scale);
        self.c = snap(self.c, self.c * self.scale);
        self.d = snap(self.d, self.d);
        self.e = snap(self.e, self.e);
        self
    }
}

/// Least squares by Householder QR. Returns the solution and the residual norm.
pub(crate) fn least_squares<T: Real, const N: usize>(
    rows: &[[T; N]],
    rhs: &[T],
) -> Option<([T; N], T)> {
    let m = rows.len();
    if m < N || rhs.len() != m {
        return None;
    }
    let mut a: Vec<[T; N]> = rows.to_vec();
    let mut b: Vec<T> = rhs.to_vec();
    let col_scale = (0..N)
        .map(|k| a.iter().map(|r| r[k] * r[k]).sum::<T>().sqrt())
        .fold(T::zero(), T::max);
    if col_scale.is_nan() || col_scale <= T::zero() {
        return None;
    }

    for k in 0..N {
        let norm = a[k..].iter().map(|r| r[k] * r[k]).sum::<T>().sqrt();
        if norm <= T::lit(RANK_TOL) * col_scale {
            return None;
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k..].iter().map(|r| r[k]).collect();
        v[0] = v[0] - alpha;
        let vv: T = v.iter().map(|&x| x * x).sum();
        if vv > T::zero() {
            for j in k..N {
                let s: T = v.iter().zip(&a[k..]).map(|(&vi, r)| vi * r[j]).sum();
                let f = (s + s) / vv;
                for (vi, r) in v.iter().zip(a[k..].iter_mut()) {
                    r[j] = r[j] - f * *vi;
                }
            }
            let s: T = v.iter().zip(&b[k..]).map(|(&vi, &bi)| vi * bi).sum();
            let f = (s + s) / vv;
            for (vi, bi) in v.iter().zip(b[k..].iter_mut()) {
                *bi = *bi - f * *vi;
            }
        }
    }

    let mut x = [T::zero(); N];
    for k in (0..N).rev() {
        let mut s = b[k];
        for j in (k + 1)..N {
            s = s - a[k][j] * x[j];
        }
        x[k] = s / a[k][k];
    }
    let residual = b[N..].iter().map(|&r| r * r).sum::<T>().sqrt();
    Some((x, residual))
}

/// Fits the extended quadric to `points` expressed in `frame` around `center`.
pub fn fit_quadric<T: Real>(
    points: &[Vec3<T>],
    frame: &LocalFrame<T>,
    center: Vec3<T>,
) -> Result<QuadricFit<T>, CurvatureError> {
    if points.len() < MIN_QUADRIC_SAMPLES {
        return Err(CurvatureError::TooFewNeighbors {
            found: points.len(),
            needed: MIN_QUADRIC_SAMPLES,
        });
    }
    let local: Vec<Vec3<T>> = points.iter().map(|&p| frame.to_local(p - center)).collect();
    let scale = local
        .iter()
        .map(|p| (p.x * p.x + p.y * p.y).sqrt())
        .sum::<T>()
        / T::lit(local.len() as f64);
    if scale.is_nan() || scale <= T::zero() {
        return Err(CurvatureError::RankDeficient);
    }
    // Columns in scale-free coordinates keep the system balanced.
    let rows: Vec<[T; 5]> = local
        .iter()
        .map(|p| {
            let (u, w) = (p.x / scale, p.y / scale);
            [u * u, u * w, w * w, u, w]
        })
        .collect();
    let heights: Vec<T> = local.iter().map(|p| p.z).collect();
    let (x, residual) = least_squares(&rows, &heights).ok_or(CurvatureError::RankDeficient)?;
    let s2 = scale * scale;
    Ok(QuadricFit {
        a: x[0] / s2,
        b: x[1] / s2,
        c: x[2] / s2,
        d: x[3] / scale,
        e: x[4] / scale,
        residual,
        neighbor_count: points.len(),
        scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricCurvatures<T> {
    pub k1: T,
    pub k2: T,
    pub kappa_g: T,
    pub kappa_h: T,
}

/// Closed-form curvatures of the fitted height field at the origin.
pub fn quadric_curvatures<T: Real>(fit: &QuadricFit<T>) -> QuadricCurvatures<T> {
    let QuadricFit { a, b, c, d, e, .. } = *fit;
    let root = ((a - c) * (a - c) + b * b).sqrt();
    let g = T::one() + d * d + e * e;
    QuadricCurvatures {
        k1: a + c + root,
        k2: a + c - root,
        kappa_g: (T::lit(4.0) * a * c - b * b) / (g * g),
        kappa_h: (a + c + a * e * e + c * d * d - b * d * e) / (g * g * g).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::local_frame;

    fn disk_samples(k: usize, r: f64, f: impl Fn(f64, f64) -> f64) -> Vec<Vec3<f64>> {
        (0..k)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / k as f64 + 0.3;
                let (x, y) = (r * t.cos(), r * t.sin());
                Vec3::new(x, y, f(x, y))
            })
            .collect()
    }

    #[test]
    fn exact_paraboloid() {
        let pts = disk_samples(8, 0.7, |x, y| x * x + y * y);
        let fit = fit_quadric(&pts, &local_frame(Vec3::unit_z()), Vec3::zero()).unwrap();
        for (got, want) in [(fit.a, 1.0), (fit.b, 0.0), (fit.c, 1.0), (fit.d, 0.0), (fit.e, 0.0)] {
            assert!((got - want).abs() < 1e-12, "{fit:?}");
        }
        assert!(fit.residual < 1e-10);
    }

    #[test]
    fn general_quadric_recovered_from_scattered_points() {
        let f = |x: f64, y: f64| 0.3 * x * x - 1.2 * x * y + 2.0 * y * y + 0.1 * x - 0.4 * y;
        let pts: Vec<_> = [(0.1, 0.2), (-0.3, 0.05), (0.2, -0.25), (-0.15, -0.2), (0.4, 0.1), (0.0, 0.33), (-0.2, 0.3)]
            .iter()
            .map(|&(x, y)| Vec3::new(x, y, f(x, y)))
            .collect();
        let fit = fit_quadric(&pts, &local_frame(Vec3::unit_z()), Vec3::zero()).unwrap();
        assert!((fit.a - 0.3).abs() < 1e-10 && (fit.b + 1.2).abs() < 1e-10 && (fit.c - 2.0).abs() < 1e-10);
        assert!((fit.d - 0.1).abs() < 1e-10 && (fit.e + 0.4).abs() < 1e-10);
    }

    #[test]
    fn sphere_cap_curving_toward_normal() {
        // lower hemisphere of the unit sphere centred at (0, 0, 1): z ≈ (x² + y²) / 2
        let pts = disk_samples(12, 0.1, |x, y| 1.0 - (1.0 - x * x - y * y).sqrt());
        let fit = fit_quadric(&pts, &local_frame(Vec3::unit_z()), Vec3::zero()).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-2 && (fit.c - 0.5).abs() < 1e-2, "{fit:?}");
        assert!(fit.b.abs() < 1e-6);
    }

    #[test]
    fn too_few_and_collinear() {
        let pts = disk_samples(4, 1.0, |_, _| 0.0);
        assert!(matches!(
            fit_quadric(&pts, &local_frame(Vec3::unit_z()), Vec3::zero()),
            Err(CurvatureError::TooFewNeighbors { found: 4, needed: 5 })
        ));
        let line: Vec<_> = (1..8).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(matches!(
            fit_quadric(&line, &local_frame(Vec3::unit_z()), Vec3::zero()),
            Err(CurvatureError::RankDeficient)
        ));
    }

    #[test]
    fn closed_form_examples() {
        let q = quadric_curvatures(&QuadricFit::from_coefficients(0.5, 0.0, 0.5, 0.0, 0.0));
        assert_eq!((q.k1, q.k2, q.kappa_g, q.kappa_h), (1.0, 1.0, 1.0, 1.0));
        let q = quadric_curvatures(&QuadricFit::from_coefficients(0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!((q.k1, q.k2, q.kappa_g, q.kappa_h), (0.0, 0.0, 0.0, 0.0));
        let q = quadric_curvatures(&QuadricFit::from_coefficients(1.0, 0.0, -1.0, 0.0, 0.0));
        assert_eq!((q.k1, q.k2, q.kappa_g, q.kappa_h), (2.0, -2.0, -4.0, 0.0));
    }

    #[test]
    fn snapping_is_scale_relative() {
        let mut fit = QuadricFit::from_coefficients(1e-14, 0.3, 0.0, 1e-12, 0.2);
        fit.scale = 0.5;
        let s = fit.snapped(1e-9);
        assert_eq!((s.a, s.b, s.d, s.e), (0.0, 0.3, 0.0, 0.2));
    }
}
