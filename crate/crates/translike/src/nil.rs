//! Nil geometry: translation curves, the inverse problem, translation
//! distance, Apollonius fields and the translation-like triangular surface.
//!
//! Points live in the projective model with right-acting translations
//! `(1,a,b,c) -> (1, x+a, y+b, z+bx+c)`; translation curves from the origin
//! have the closed form `(u t, v t, u v t^2 / 2 + w t)` for a unit direction
//! `(u, v, w)` given by geographic angles.

use nalgebra::{Matrix3, Vector3};

use crate::model::{
    Aabb, AffinePoint, ApolloniusSpec, Collineation, GeomError, Result, ScalarField,
};

/// Geographic direction angles and arclength of a translation curve from the
/// origin: direction `(cos(theta)cos(phi), cos(theta)sin(phi), sin(theta))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NilCurveParams {
    pub phi: f64,
    pub theta: f64,
    pub r: f64,
}

pub fn direction(phi: f64, theta: f64) -> Vector3<f64> {
    Vector3::new(
        theta.cos() * phi.cos(),
        theta.cos() * phi.sin(),
        theta.sin(),
    )
}

/// Point of the unit-speed translation curve at parameter `t in [0, r]`.
pub fn curve_point(params: &NilCurveParams, t: f64) -> AffinePoint {
    let d = direction(params.phi, params.theta);
    AffinePoint::new(d.x * t, d.y * t, 0.5 * d.x * d.y * t * t + d.z * t)
}

/// Scaled tangent at the origin of the translation curve ending at `p`:
/// `(x, y, z - xy/2)`, whose Euclidean norm is the translation distance.
pub fn tangent_functional(p: &AffinePoint) -> Vector3<f64> {
    Vector3::new(p.x, p.y, p.z - p.x * p.y / 2.0)
}

/// Inverse problem: direction angles and arclength reaching `p` from the origin.
pub fn inverse(p: &AffinePoint) -> Result<NilCurveParams> {
    let t = tangent_functional(p);
    let r = t.norm();
    if r == 0.0 {
        return Err(GeomError::ZeroLength);
    }
    let planar = t.x.hypot(t.y);
    Ok(NilCurveParams {
        phi: t.y.atan2(t.x),
        theta: t.z.atan2(planar),
        r,
    })
}

/// Translation distance from the origin: `sqrt(x^2 + y^2 + (z - xy/2)^2)`.
pub fn distance_from_origin(p: &AffinePoint) -> f64 {
    tangent_functional(p).norm()
}

/// Translation mapping the origin to `p`.
pub fn translation(p: &AffinePoint) -> Collineation {
    let (a, b, c) = (p.x, p.y, p.z);
    Collineation::from_rows([
        [1.0, a, b, c],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, a],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Closed-form inverse of `translation(p)`.
pub fn translation_inverse(p: &AffinePoint) -> Collineation {
    let (a, b, c) = (p.x, p.y, p.z);
    Collineation::from_rows([
        [1.0, -a, -b, a * b - c],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, -a],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Translation distance measured by pulling `p` back to the origin.
pub fn distance(p: &AffinePoint, q: &AffinePoint) -> f64 {
    let pulled = translation_inverse(p)
        .apply(q)
        .expect("affine translation is never singular");
    distance_from_origin(&pulled)
}

/// `sigma * d(P1, P) - d(P, P2)`; the zero set is the Apollonius surface.
pub fn apollonius_field(spec: &ApolloniusSpec) -> ScalarField {
    let spec = *spec;
    ScalarField::everywhere(
        move |p| spec.sigma * distance(&spec.p1, p) - distance(&spec.p2, p),
        Aabb::cube(3.0),
    )
}

/// Translation-like triangular surface through the origin, `p2` and `p3`.
///
/// In the generic case the surface is the hyperbolic paraboloid
/// `z = xy/2 + cx*x + cy*y`; when the base projections of the two tangents are
/// parallel it degenerates to a plane through the z axis.
#[derive(Debug, Clone, Copy)]
pub enum NilTriangle {
    Explicit {
        p2: AffinePoint,
        p3: AffinePoint,
        cx: f64,
        cy: f64,
    },
    /// Plane `nx*x + ny*y = 0` through the z axis.
    Plane {
        p2: AffinePoint,
        p3: AffinePoint,
        nx: f64,
        ny: f64,
    },
}

pub fn triangle_surface(p2: &AffinePoint, p3: &AffinePoint) -> Result<NilTriangle> {
    let t2 = tangent_functional(p2);
    let t3 = tangent_functional(p3);
    if t2.cross(&t3).norm() < 1e-12 {
        return Err(GeomError::DegenerateTriangle(
            "all three points lie on one translation curve".into(),
        ));
    }
    let (a, b, c) = (p2.x, p2.y, p2.z);
    let (d, e, f) = (p3.x, p3.y, p3.z);
    let det = a * e - b * d;
    if det.abs() < 1e-12 {
        let (nx, ny) = if a.hypot(b) > 1e-12 { (b, -a) } else { (e, -d) };
        return Ok(NilTriangle::Plane {
            p2: *p2,
            p3: *p3,
            nx,
            ny,
        });
    }
    let cx = (b * d * e - a * b * e + 2.0 * c * e - 2.0 * b * f) / (2.0 * det);
    let cy = (a * b * d - a * d * e + 2.0 * a * f - 2.0 * c * d) / (2.0 * det);
    Ok(NilTriangle::Explicit {
        p2: *p2,
        p3: *p3,
        cx,
        cy,
    })
}

impl NilTriangle {
    /// Height of the explicit graph; `None` for the degenerate plane case.
    pub fn explicit_z(&self, x: f64, y: f64) -> Option<f64> {
        match self {
            NilTriangle::Explicit { cx, cy, .. } => Some(x * y / 2.0 + cx * x + cy * y),
            NilTriangle::Plane { .. } => None,
        }
    }

    /// Residual whose zero set is the surface: `z - explicit(x, y)` in the
    /// generic case, the plane equation otherwise.
    pub fn residual(&self, p: &AffinePoint) -> f64 {
        match self {
            NilTriangle::Explicit { .. } => p.z - self.explicit_z(p.x, p.y).unwrap(),
            NilTriangle::Plane { nx, ny, .. } => nx * p.x + ny * p.y,
        }
    }

    /// Triple product of the three origin tangents of the pulled-back points;
    /// vanishes exactly on the surface and is used as an independent check of
    /// the explicit form.
    pub fn triple_product(&self, p: &AffinePoint) -> f64 {
        let (p2, p3) = match self {
            NilTriangle::Explicit { p2, p3, .. } | NilTriangle::Plane { p2, p3, .. } => (p2, p3),
        };
        let (x, y, z) = (p.x, p.y, p.z);
        let q1 = AffinePoint::new(-x, -y, x * y - z);
        let q2 = AffinePoint::new(p2.x - x, p2.y - y, p2.z - z - p2.y * x + x * y);
        let q3 = AffinePoint::new(p3.x - x, p3.y - y, p3.z - z - p3.y * x + x * y);
        Matrix3::from_rows(&[
            tangent_functional(&q1).transpose(),
            tangent_functional(&q2).transpose(),
            tangent_functional(&q3).transpose(),
        ])
        .determinant()
    }

    pub fn field(self) -> ScalarField {
        ScalarField::everywhere(move |p| self.residual(p), Aabb::cube(3.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EXACT_TOL, ROUND_TRIP_TOL};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn curve_point_axes() {
        let p = curve_point(
            &NilCurveParams {
                phi: 0.0,
                theta: 0.0,
                r: 1.0,
            },
            1.0,
        );
        assert!(p.dist_euclid(&AffinePoint::new(1.0, 0.0, 0.0)) < EXACT_TOL);
        let fibre = curve_point(
            &NilCurveParams {
                phi: 1.3,
                theta: FRAC_PI_2,
                r: 2.5,
            },
            2.5,
        );
        assert!(fibre.dist_euclid(&AffinePoint::new(0.0, 0.0, 2.5)) < EXACT_TOL);
        let diag = curve_point(
            &NilCurveParams {
                phi: FRAC_PI_4,
                theta: 0.0,
                r: 2.0f64.sqrt(),
            },
            2.0f64.sqrt(),
        );
        assert!(diag.dist_euclid(&AffinePoint::new(1.0, 1.0, 0.5)) < EXACT_TOL);
    }

    #[test]
    fn inverse_axis_cases() {
        let p = inverse(&AffinePoint::new(1.0, 0.0, 0.0)).unwrap();
        assert!((p.phi, p.theta, p.r) == (0.0, 0.0, 1.0));

        let fibre = inverse(&AffinePoint::new(0.0, 0.0, 2.0)).unwrap();
        assert!((fibre.theta - FRAC_PI_2).abs() < EXACT_TOL && (fibre.r - 2.0).abs() < EXACT_TOL);

        let neg_y = inverse(&AffinePoint::new(0.0, -3.0, 0.0)).unwrap();
        assert!((neg_y.phi + FRAC_PI_2).abs() < EXACT_TOL);
        assert!(neg_y.theta.abs() < EXACT_TOL && (neg_y.r - 3.0).abs() < EXACT_TOL);

        assert!(matches!(
            inverse(&AffinePoint::new(0.0, 0.0, 0.0)),
            Err(GeomError::ZeroLength)
        ));
    }

    #[test]
    fn inverse_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = AffinePoint::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let params = inverse(&p).unwrap();
            assert!(params.phi >= -PI && params.phi <= PI);
            assert!(params.theta.abs() <= FRAC_PI_2 && params.r >= 0.0);
            let back = curve_point(&params, params.r);
            assert!(back.dist_euclid(&p) < ROUND_TRIP_TOL);
        }
    }

    #[test]
    fn distance_cases() {
        let e0 = AffinePoint::origin(crate::model::GeometryId::Nil);
        assert!((distance(&e0, &AffinePoint::new(1.0, 0.0, 0.0)) - 1.0).abs() < EXACT_TOL);
        let p = AffinePoint::new(0.4, -1.1, 0.6);
        assert_eq!(distance(&p, &p), 0.0);
        let q = AffinePoint::new(0.9, 0.8, -0.7);
        let formula = ((q.x * q.x)
            + (q.y * q.y)
            + (q.z - q.x * q.y / 2.0) * (q.z - q.x * q.y / 2.0))
            .sqrt();
        assert!((distance(&e0, &q) - formula).abs() < EXACT_TOL);
    }

    #[test]
    fn translation_pullback_matches_closed_form() {
        // T^{-1} with p=(a,b,c) maps (1,x,y,z) to (1, x-a, y-b, a(b-y)-c+z).
        let p = AffinePoint::new(0.7, -0.4, 1.2);
        let q = AffinePoint::new(-0.3, 0.9, 0.5);
        let img = translation_inverse(&p).apply(&q).unwrap();
        let expect = AffinePoint::new(
            q.x - p.x,
            q.y - p.y,
            p.x * (p.y - q.y) - p.z + q.z,
        );
        assert!(img.dist_euclid(&expect) < EXACT_TOL);
        let back = translation_inverse(&p).apply(&p).unwrap();
        assert!(back.dist_euclid(&AffinePoint::new(0.0, 0.0, 0.0)) < EXACT_TOL);
        // p = origin gives the identity.
        let id = translation(&AffinePoint::new(0.0, 0.0, 0.0));
        assert!(id.apply(&q).unwrap().dist_euclid(&q) < EXACT_TOL);
    }

    #[test]
    fn tangent_functional_norm_is_distance() {
        assert_eq!(tangent_functional(&AffinePoint::new(0.0, 0.0, 0.0)).norm(), 0.0);
        let along_x = tangent_functional(&AffinePoint::new(1.0, 0.0, 0.0));
        assert!((along_x - Vector3::new(1.0, 0.0, 0.0)).norm() < EXACT_TOL);
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        for _ in 0..100 {
            let p = AffinePoint::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            assert!((tangent_functional(&p).norm() - distance(&e0, &p)).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn apollonius_midpoint_and_ratio_points() {
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        let p2 = AffinePoint::new(0.5, 1.0, 0.5);
        let params = inverse(&p2).unwrap();

        let bisector =
            apollonius_field(&ApolloniusSpec::new(e0, p2, 1.0).unwrap());
        let mid = curve_point(&params, params.r / 2.0);
        assert!(bisector.eval(&mid).abs() < ROUND_TRIP_TOL);
        assert!((bisector.eval(&e0) + distance(&e0, &p2)).abs() < EXACT_TOL);

        let ratio2 = apollonius_field(&ApolloniusSpec::new(e0, p2, 2.0).unwrap());
        let third = curve_point(&params, params.r / 3.0);
        assert!(ratio2.eval(&third).abs() < ROUND_TRIP_TOL);
    }

    #[test]
    fn subgroup_property() {
        let params = NilCurveParams {
            phi: 0.8,
            theta: -0.4,
            r: 3.0,
        };
        let (t1, t2) = (0.7, 1.4);
        let lhs = curve_point(&params, t1 + t2);
        let rhs = translation(&curve_point(&params, t2))
            .apply(&curve_point(&params, t1))
            .unwrap();
        assert!(lhs.dist_euclid(&rhs) < EXACT_TOL);
    }

    #[test]
    fn triangle_vertices_on_surface() {
        let p2 = AffinePoint::new(2.0, 1.0, 1.0);
        let p3 = AffinePoint::new(-2.0, 2.0, 0.0);
        let tri = triangle_surface(&p2, &p3).unwrap();
        for v in [AffinePoint::new(0.0, 0.0, 0.0), p2, p3] {
            assert!(tri.residual(&v).abs() < 1e-12);
            assert!(tri.triple_product(&v).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_explicit_matches_triple_product_zero_set() {
        let tri = triangle_surface(
            &AffinePoint::new(2.0, 1.0, 1.0),
            &AffinePoint::new(-2.0, 2.0, 0.0),
        )
        .unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let z = tri.explicit_z(x, y).unwrap();
            assert!(tri.triple_product(&AffinePoint::new(x, y, z)).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_degenerate_cases() {
        // Both points on one translation curve.
        let params = NilCurveParams {
            phi: 0.3,
            theta: 0.7,
            r: 2.0,
        };
        let a = curve_point(&params, 1.0);
        let b = curve_point(&params, 2.0);
        assert!(matches!(
            triangle_surface(&a, &b),
            Err(GeomError::DegenerateTriangle(_))
        ));

        // Parallel base projections give a plane through the z axis.
        let tri = triangle_surface(
            &AffinePoint::new(1.0, 1.0, 0.5),
            &AffinePoint::new(2.0, 2.0, -0.3),
        )
        .unwrap();
        assert!(matches!(tri, NilTriangle::Plane { .. }));
        assert!(tri.residual(&AffinePoint::new(0.0, 0.0, 5.0)).abs() < EXACT_TOL);
        assert!(tri.residual(&AffinePoint::new(1.0, 1.0, -2.0)).abs() < EXACT_TOL);
    }

    #[test]
    fn triangle_transitivity() {
        let p2 = AffinePoint::new(2.0, 1.0, 1.0);
        let p3 = AffinePoint::new(-2.0, 2.0, 0.0);
        let tri = triangle_surface(&p2, &p3).unwrap();
        let (g, h) = (0.9, -1.3);
        let p4 = AffinePoint::new(g, h, tri.explicit_z(g, h).unwrap());
        let tri2 = triangle_surface(&p2, &p4).unwrap();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let dz = (tri.explicit_z(x, y).unwrap() - tri2.explicit_z(x, y).unwrap()).abs();
            assert!(dz < 1e-9, "transitivity deviation {dz}");
        }
    }

    #[test]
    fn triangle_is_hyperbolic_paraboloid() {
        let tri = triangle_surface(
            &AffinePoint::new(2.0, 1.0, 1.0),
            &AffinePoint::new(-2.0, 2.0, 0.0),
        )
        .unwrap();
        let h = 0.37;
        let z = |x: f64, y: f64| tri.explicit_z(x, y).unwrap();
        for (x, y) in [(0.1, -0.4), (1.2, 0.9), (-0.8, 1.5)] {
            let dxx = z(x + h, y) - 2.0 * z(x, y) + z(x - h, y);
            let dyy = z(x, y + h) - 2.0 * z(x, y) + z(x, y - h);
            let dxy = (z(x + h, y + h) - z(x + h, y - h) - z(x - h, y + h) + z(x - h, y - h))
                / (4.0 * h * h);
            assert!(dxx.abs() < 1e-12 && dyy.abs() < 1e-12);
            assert!((dxy - 0.5).abs() < 1e-9);
        }
    }
}
