//! Sol geometry: translation curves, the inverse problem, distance with the
//! three-branch closed form, Apollonius fields and the triangular surface with
//! its explicit logarithmic form.
//!
//! Translations act as `(1,x,y,z) -> (1, x + a e^{-z}, y + b e^{z}, z + c)`
//! read right-to-left: the matrix of the target point `(a,b,c)` scales the
//! base plane exponentially with the fibre coordinate.

use nalgebra::{Matrix3, Vector3};

use crate::model::{
    Aabb, AffinePoint, ApolloniusSpec, Collineation, GeomError, Result, ScalarField,
};
use crate::util::{exp_ratio, exp_ratio_neg};

/// Geographic direction angles and arclength of a translation curve from the
/// origin: initial velocity `(cos(theta)cos(phi), cos(theta)sin(phi), sin(theta))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolCurveParams {
    pub phi: f64,
    pub theta: f64,
    pub t: f64,
}

/// Point of the unit-speed translation curve at parameter `s in [0, t]`.
///
/// The two printed branches (`theta != 0` exponential, `theta = 0` linear)
/// are unified through `exp_ratio`, whose value at 0 removes the singularity.
pub fn curve_point(params: &SolCurveParams, s: f64) -> AffinePoint {
    let (u, v, w) = (
        params.theta.cos() * params.phi.cos(),
        params.theta.cos() * params.phi.sin(),
        params.theta.sin(),
    );
    let z = s * w;
    AffinePoint::new(u * s / exp_ratio(-z), v * s / exp_ratio(z), z)
}

/// Scaled tangent at the origin of the translation curve ending at `p`:
/// `(xz/(1 - e^{-z}), yz/(e^z - 1), z)`, continuous through `z = 0`.
pub fn tangent_functional(p: &AffinePoint) -> Vector3<f64> {
    Vector3::new(p.x * exp_ratio_neg(p.z), p.y * exp_ratio(p.z), p.z)
}

/// Inverse problem: direction angles and arclength reaching `p` from the origin.
pub fn inverse(p: &AffinePoint) -> Result<SolCurveParams> {
    let tau = tangent_functional(p);
    let t = tau.norm();
    if t == 0.0 {
        return Err(GeomError::ZeroLength);
    }
    Ok(SolCurveParams {
        phi: tau.y.atan2(tau.x),
        theta: tau.z.atan2(tau.x.hypot(tau.y)),
        t,
    })
}

/// Translation distance from the origin:
/// `|z|/|e^z - 1| * sqrt(x^2 e^{2z} + (e^z - 1)^2 + y^2)` for `z != 0`,
/// `sqrt(x^2 + y^2)` for `z = 0`.
pub fn distance_from_origin(p: &AffinePoint) -> f64 {
    tangent_functional(p).norm()
}

/// Translation mapping the origin to `p`.
pub fn translation(p: &AffinePoint) -> Collineation {
    let (a, b, c) = (p.x, p.y, p.z);
    Collineation::from_rows([
        [1.0, a, b, c],
        [0.0, (-c).exp(), 0.0, 0.0],
        [0.0, 0.0, c.exp(), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Closed-form inverse of `translation(p)`:
/// maps `(1,x,y,z)` to `(1, (x-a)e^c, (y-b)e^{-c}, z-c)`.
pub fn translation_inverse(p: &AffinePoint) -> Collineation {
    let (a, b, c) = (p.x, p.y, p.z);
    Collineation::from_rows([
        [1.0, -a * c.exp(), -b * (-c).exp(), -c],
        [0.0, c.exp(), 0.0, 0.0],
        [0.0, 0.0, (-c).exp(), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

/// Translation distance measured by pulling `p` back to the origin.
pub fn distance(p: &AffinePoint, q: &AffinePoint) -> f64 {
    let pulled = translation_inverse(p)
        .apply(q)
        .expect("sol translation is never singular");
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

/// The same Apollonius value evaluated through the literal branch table
/// (`z` away from `{0, c}`, `z = c`, `z = 0`) instead of the unified
/// `exp_ratio` form; kept as an independent cross-check.
pub fn apollonius_branch_value(spec: &ApolloniusSpec, p: &AffinePoint) -> f64 {
    debug_assert!(spec.p1.dist_euclid(&AffinePoint::new(0.0, 0.0, 0.0)) == 0.0);
    let (a, b, c) = (spec.p2.x, spec.p2.y, spec.p2.z);
    let (x, y, z) = (p.x, p.y, p.z);
    let d1 = if z == 0.0 {
        x.hypot(y)
    } else {
        z.abs() / z.exp_m1().abs()
            * ((x * x) * (2.0 * z).exp() + z.exp_m1().powi(2) + y * y).sqrt()
    };
    // Pulled-back coordinates of P relative to P2.
    let (px, py, pz) = ((x - a) * c.exp(), (y - b) * (-c).exp(), z - c);
    let d2 = if pz == 0.0 {
        px.hypot(py)
    } else {
        pz.abs() / pz.exp_m1().abs()
            * ((px * px) * (2.0 * pz).exp() + pz.exp_m1().powi(2) + py * py).sqrt()
    };
    spec.sigma * d1 - d2
}

/// Triangular surface through the origin, `p2 = (a,b,c)` and `p3 = (d,e,f)`.
///
/// The coplanarity condition of the three pulled-back tangents factors into a
/// nowhere-zero prefactor times the bracket `e^z (cx*x - k) - (cy*y - k)`,
/// giving the explicit form `z = ln((cy*y - k)/(cx*x - k))` where numerator
/// and denominator share a sign.
#[derive(Debug, Clone, Copy)]
pub struct SolTriangle {
    pub p2: AffinePoint,
    pub p3: AffinePoint,
    /// Coefficient of `x` in the bracket: `e(e^c - 1) - b(e^f - 1)`.
    pub cx: f64,
    /// Coefficient of `y`: `d e^f (e^c - 1) - a e^c (e^f - 1)`.
    pub cy: f64,
    /// Shared constant `a e e^c - b d e^f`.
    pub k: f64,
}

pub fn triangle_surface(p2: &AffinePoint, p3: &AffinePoint) -> Result<SolTriangle> {
    let t2 = tangent_functional(p2);
    let t3 = tangent_functional(p3);
    if t2.cross(&t3).norm() < 1e-12 {
        return Err(GeomError::DegenerateTriangle(
            "all three points lie on one translation curve".into(),
        ));
    }
    let (a, b, c) = (p2.x, p2.y, p2.z);
    let (d, e, f) = (p3.x, p3.y, p3.z);
    let cx = e * c.exp_m1() - b * f.exp_m1();
    let cy = d * f.exp() * c.exp_m1() - a * c.exp() * f.exp_m1();
    if cx.abs() < 1e-12 && cy.abs() < 1e-12 {
        return Err(GeomError::DegenerateTriangle(
            "both explicit-form denominators vanish".into(),
        ));
    }
    let k = a * e * c.exp() - b * d * f.exp();
    Ok(SolTriangle {
        p2: *p2,
        p3: *p3,
        cx,
        cy,
        k,
    })
}

impl SolTriangle {
    fn num_den(&self, x: f64, y: f64) -> (f64, f64) {
        (self.cy * y - self.k, self.cx * x - self.k)
    }

    /// Simplified residual `e^z * (cx*x - k) - (cy*y - k)` sharing its zero
    /// set with the full triple product.
    pub fn bracket(&self, p: &AffinePoint) -> f64 {
        let (n, d) = self.num_den(p.x, p.y);
        p.z.exp() * d - n
    }

    /// Domain of the explicit form: numerator and denominator both nonzero
    /// and of the same sign.
    pub fn in_domain(&self, x: f64, y: f64) -> bool {
        let (n, d) = self.num_den(x, y);
        n * d > 0.0
    }

    /// `z = ln((cy*y - k)/(cx*x - k))`; errors outside the domain.
    pub fn explicit_z(&self, x: f64, y: f64) -> Result<f64> {
        let (n, d) = self.num_den(x, y);
        if !(n * d > 0.0) {
            return Err(GeomError::OutsideDomain);
        }
        Ok((n / d).ln())
    }

    /// The vertical line `(k/cx, k/cy)` lying entirely on the surface.
    pub fn critical_line(&self) -> Option<(f64, f64)> {
        (self.cx.abs() > 1e-12 && self.cy.abs() > 1e-12)
            .then(|| (self.k / self.cx, self.k / self.cy))
    }

    /// Coplanarity determinant of the three pulled-back tangent functionals;
    /// vanishes exactly on the surface.
    pub fn triple_product(&self, p: &AffinePoint) -> f64 {
        let pull = translation_inverse(p);
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        let rows: Vec<_> = [e0, self.p2, self.p3]
            .iter()
            .map(|v| tangent_functional(&pull.apply(v).expect("sol pullback is affine")))
            .collect();
        Matrix3::from_rows(&[rows[0].transpose(), rows[1].transpose(), rows[2].transpose()])
            .determinant()
    }

    pub fn field(self) -> ScalarField {
        ScalarField::everywhere(move |p| self.bracket(p), Aabb::cube(3.0))
    }
}

/// Transitivity probe: rebuilds the surface from the origin, `p2` and a point
/// `p4` of the surface, and reports the largest explicit-height deviation over
/// a sample grid of the shared domain.
pub fn triangle_transitivity_check(
    p2: &AffinePoint,
    p3: &AffinePoint,
    p4: &AffinePoint,
) -> Result<f64> {
    let tri = triangle_surface(p2, p3)?;
    let z4 = tri.explicit_z(p4.x, p4.y)?;
    if (z4 - p4.z).abs() > 1e-9 {
        return Err(GeomError::OffSurface((z4 - p4.z).abs()));
    }
    let tri2 = triangle_surface(p2, p4)?;
    let mut max_dev = 0.0f64;
    let n = 40;
    for i in 0..=n {
        for j in 0..=n {
            let x = -3.0 + 6.0 * i as f64 / n as f64;
            let y = -3.0 + 6.0 * j as f64 / n as f64;
            if let (Ok(za), Ok(zb)) = (tri.explicit_z(x, y), tri2.explicit_z(x, y)) {
                max_dev = max_dev.max((za - zb).abs());
            }
        }
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EXACT_TOL, ROUND_TRIP_TOL};
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_PI_2;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn curve_point_cases() {
        let base = curve_point(
            &SolCurveParams {
                phi: 0.0,
                theta: 0.0,
                t: 5.0,
            },
            5.0,
        );
        assert!(base.dist_euclid(&AffinePoint::new(5.0, 0.0, 0.0)) < EXACT_TOL);

        let fibre = curve_point(
            &SolCurveParams {
                phi: 0.9,
                theta: FRAC_PI_2,
                t: 2.0,
            },
            2.0,
        );
        assert!(fibre.dist_euclid(&AffinePoint::new(0.0, 0.0, 2.0)) < EXACT_TOL);
    }

    #[test]
    fn curve_branches_agree_near_theta_zero() {
        let (phi, t) = (0.7, 1.8);
        let tiny = curve_point(
            &SolCurveParams {
                phi,
                theta: 1e-9,
                t,
            },
            t,
        );
        let flat = AffinePoint::new(t * phi.cos(), t * phi.sin(), 0.0);
        assert!(tiny.dist_euclid(&flat) < 1e-8);
    }

    #[test]
    fn curve_matches_printed_exponential_branch() {
        let p = SolCurveParams {
            phi: 0.4,
            theta: -0.9,
            t: 1.7,
        };
        let s = 1.3;
        let got = curve_point(&p, s);
        let (sin_t, cos_t) = p.theta.sin_cos();
        let cot = cos_t / sin_t;
        let printed = AffinePoint::new(
            -cot * p.phi.cos() * ((-s * sin_t).exp() - 1.0),
            cot * p.phi.sin() * ((s * sin_t).exp() - 1.0),
            s * sin_t,
        );
        assert!(got.dist_euclid(&printed) < EXACT_TOL);
    }

    #[test]
    fn inverse_cases() {
        let p = inverse(&AffinePoint::new(3.0, 4.0, 0.0)).unwrap();
        assert!(p.theta.abs() < EXACT_TOL && (p.t - 5.0).abs() < EXACT_TOL);

        let fibre = inverse(&AffinePoint::new(0.0, 0.0, -1.5)).unwrap();
        assert!((fibre.theta + FRAC_PI_2).abs() < EXACT_TOL);
        assert!((fibre.t - 1.5).abs() < EXACT_TOL);

        assert!(matches!(
            inverse(&AffinePoint::new(0.0, 0.0, 0.0)),
            Err(GeomError::ZeroLength)
        ));
    }

    #[test]
    fn inverse_round_trip_random() {
        let mut rng = rng(17);
        for _ in 0..300 {
            let p = AffinePoint::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let params = inverse(&p).unwrap();
            let back = curve_point(&params, params.t);
            assert!(back.dist_euclid(&p) < ROUND_TRIP_TOL, "{p:?}");
        }
    }

    #[test]
    fn distance_cases() {
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        assert!((distance(&e0, &AffinePoint::new(3.0, 4.0, 0.0)) - 5.0).abs() < EXACT_TOL);
        assert!((distance(&e0, &AffinePoint::new(0.0, 0.0, -2.5)) - 2.5).abs() < EXACT_TOL);
        let p = AffinePoint::new(0.3, -0.8, 1.4);
        assert_eq!(distance(&p, &p), 0.0);
        let mut rng = rng(23);
        for _ in 0..200 {
            let q = AffinePoint::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            assert!((distance(&e0, &q) - inverse(&q).unwrap().t).abs() < ROUND_TRIP_TOL);
        }
    }

    #[test]
    fn distance_closed_form_matches() {
        let (x, y, z) = (0.7f64, -1.1f64, 0.9f64);
        let closed = z.abs() / z.exp_m1().abs()
            * ((x * x) * (2.0 * z).exp() + z.exp_m1().powi(2) + y * y).sqrt();
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        assert!((distance(&e0, &AffinePoint::new(x, y, z)) - closed).abs() < EXACT_TOL);
    }

    #[test]
    fn translation_round_trip() {
        let p = AffinePoint::new(0.4, -1.3, 0.8);
        assert!(
            translation(&p)
                .apply(&AffinePoint::new(0.0, 0.0, 0.0))
                .unwrap()
                .dist_euclid(&p)
                < EXACT_TOL
        );
        assert!(
            translation_inverse(&p)
                .apply(&p)
                .unwrap()
                .dist_euclid(&AffinePoint::new(0.0, 0.0, 0.0))
                < EXACT_TOL
        );
        let q = AffinePoint::new(1.1, 0.6, -0.9);
        let round = translation_inverse(&p)
            .apply(&translation(&p).apply(&q).unwrap())
            .unwrap();
        assert!(round.dist_euclid(&q) < EXACT_TOL);
    }

    #[test]
    fn subgroup_property() {
        let params = SolCurveParams {
            phi: -0.6,
            theta: 0.5,
            t: 3.0,
        };
        let (t1, t2) = (0.8, 1.1);
        let lhs = curve_point(&params, t1 + t2);
        let rhs = translation(&curve_point(&params, t2))
            .apply(&curve_point(&params, t1))
            .unwrap();
        assert!(lhs.dist_euclid(&rhs) < EXACT_TOL);
    }

    #[test]
    fn tangent_functional_limits() {
        assert_eq!(tangent_functional(&AffinePoint::new(0.0, 0.0, 0.0)).norm(), 0.0);
        let small = tangent_functional(&AffinePoint::new(0.9, -0.4, 1e-8));
        let flat = tangent_functional(&AffinePoint::new(0.9, -0.4, 0.0));
        assert!((small - flat).norm() < 1e-7);
        let mut rng = rng(29);
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
    fn apollonius_midpoint_and_branches() {
        let e0 = AffinePoint::new(0.0, 0.0, 0.0);
        let p2 = AffinePoint::new(-1.0, 1.0, 0.5);
        let spec = ApolloniusSpec::new(e0, p2, 1.0).unwrap();
        let field = apollonius_field(&spec);
        let params = inverse(&p2).unwrap();
        let mid = curve_point(&params, params.t / 2.0);
        assert!(field.eval(&mid).abs() < ROUND_TRIP_TOL);
        assert!(field.eval(&e0) < 0.0);

        // Branch-table evaluation agrees with the unified form on and off
        // the critical heights z = 0 and z = c.
        let mut rng = rng(31);
        for _ in 0..200 {
            let mut p = AffinePoint::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            match rng.gen_range(0..4) {
                0 => p.z = 0.0,
                1 => p.z = p2.z,
                2 => p.z += 1e-9,
                _ => {}
            }
            let a = field.eval(&p);
            let b = apollonius_branch_value(&spec, &p);
            assert!((a - b).abs() < 1e-9, "{p:?}: {a} vs {b}");
        }
    }

    fn showcase_triangle() -> SolTriangle {
        triangle_surface(
            &AffinePoint::new(-1.0, 1.0, 1.0),
            &AffinePoint::new(0.5, 1.0, 0.5),
        )
        .unwrap()
    }

    #[test]
    fn triangle_vertices_on_surface() {
        let tri = showcase_triangle();
        for v in [AffinePoint::new(0.0, 0.0, 0.0), tri.p2, tri.p3] {
            assert!(tri.bracket(&v).abs() < 1e-12, "bracket at {v:?}");
            assert!(tri.triple_product(&v).abs() < 1e-12, "triple at {v:?}");
        }
    }

    #[test]
    fn triangle_explicit_matches_triple_product() {
        let tri = showcase_triangle();
        let mut rng = rng(37);
        let mut hits = 0;
        while hits < 200 {
            let (x, y) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let Ok(z) = tri.explicit_z(x, y) else { continue };
            if !z.is_finite() || z.abs() > 5.0 {
                continue;
            }
            let p = AffinePoint::new(x, y, z);
            assert!(tri.bracket(&p).abs() < 1e-9);
            assert!(tri.triple_product(&p).abs() < 1e-9, "{p:?}");
            hits += 1;
        }
    }

    #[test]
    fn triangle_outside_domain_errors() {
        let tri = showcase_triangle();
        let (xc, yc) = tri.critical_line().unwrap();
        // Crossing exactly one critical line flips one sign and leaves the
        // domain.
        assert!(matches!(
            tri.explicit_z(xc + 0.1, yc),
            Err(GeomError::OutsideDomain)
        ));
    }

    #[test]
    fn critical_line_lies_on_surface() {
        let tri = showcase_triangle();
        let (xc, yc) = tri.critical_line().unwrap();
        for i in 0..100 {
            let z = -3.0 + 6.0 * i as f64 / 99.0;
            let p = AffinePoint::new(xc, yc, z);
            assert!(tri.bracket(&p).abs() < 1e-9);
            assert!(tri.triple_product(&p).abs() < 1e-9);
        }
    }

    #[test]
    fn level_sets_are_lines() {
        let tri = showcase_triangle();
        // Three surface points at equal height must be collinear.
        for z in [-0.8f64, 0.3, 1.2] {
            let mut pts = Vec::new();
            let mut x = -3.0;
            while pts.len() < 3 && x < 3.0 {
                // Solve the bracket for y at this (x, z).
                let y = (z.exp() * (tri.cx * x - tri.k) + tri.k) / tri.cy;
                if y.is_finite() && y.abs() < 10.0 {
                    pts.push(Vector3::new(x, y, z));
                }
                x += 1.7;
            }
            assert_eq!(pts.len(), 3);
            let cross = (pts[1] - pts[0]).cross(&(pts[2] - pts[0]));
            assert!(cross.norm() < 1e-9);
        }
    }

    #[test]
    fn triangle_transitivity() {
        let p2 = AffinePoint::new(-1.0, 1.0, 1.0);
        let p3 = AffinePoint::new(0.5, 1.0, 0.5);
        let tri = triangle_surface(&p2, &p3).unwrap();

        // p4 = p3 reproduces the same surface exactly.
        assert!(triangle_transitivity_check(&p2, &p3, &p3).unwrap() < 1e-12);

        let (g, h) = (0.3, 0.7);
        let p4 = AffinePoint::new(g, h, tri.explicit_z(g, h).unwrap());
        assert!(triangle_transitivity_check(&p2, &p3, &p4).unwrap() < 1e-9);

        // An off-surface p4 is rejected by the checker, and the surface it
        // would span deviates visibly.
        let off = AffinePoint::new(g, h, p4.z + 1e-3);
        assert!(matches!(
            triangle_transitivity_check(&p2, &p3, &off),
            Err(GeomError::OffSurface(_))
        ));
        let tri_off = triangle_surface(&p2, &off).unwrap();
        let mut max_dev = 0.0f64;
        for i in 0..=20 {
            for j in 0..=20 {
                let (x, y) = (-3.0 + 0.3 * i as f64, -3.0 + 0.3 * j as f64);
                if let (Ok(za), Ok(zb)) = (tri.explicit_z(x, y), tri_off.explicit_z(x, y)) {
                    max_dev = max_dev.max((za - zb).abs());
                }
            }
        }
        assert!(max_dev > 1e-6, "perturbation invisible: {max_dev}");
    }

    #[test]
    fn triangle_degenerate_cases() {
        let params = SolCurveParams {
            phi: 0.4,
            theta: 0.6,
            t: 2.0,
        };
        let a = curve_point(&params, 0.9);
        let b = curve_point(&params, 1.7);
        assert!(matches!(
            triangle_surface(&a, &b),
            Err(GeomError::DegenerateTriangle(_))
        ));
    }
}
