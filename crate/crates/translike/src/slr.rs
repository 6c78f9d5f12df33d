//! SL(2,R)~ geometry in the one-chart hyperboloid model: three-class
//! translation curves, the inverse problem, distance, translation matrices and
//! the model-plane triangular surface.
//!
//! Homogeneous points behave like split quaternions; the translation taking
//! the origin to `X` is right multiplication by `X`, and translation curves
//! are one-parameter subgroups `exp(tA)` for a pure direction `A`.

use nalgebra::{Matrix4, RowVector4, Vector3};

use crate::model::{
    Aabb, AffinePoint, ApolloniusSpec, Collineation, GeomError, GeometryId, Result, ScalarField,
};
use crate::util::{atan_ratio, atanh_ratio, tan_ratio, tanh_ratio};

/// Curve class by the sign of `cos(2*alpha)` (equivalently of
/// `x^2 - y^2 - z^2` at the endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlrClass {
    H2Like,
    LightLike,
    FibreLike,
}

/// Direction angles, class and arclength of a translation curve from the
/// origin; the initial velocity is
/// `(sin(alpha), cos(alpha)cos(lambda), cos(alpha)sin(lambda))`.
///
/// `alpha` is signed: negative values run the fibre component backwards,
/// covering endpoints with negative first coordinate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SlrCurveParams {
    pub lambda: f64,
    pub alpha: f64,
    pub s: f64,
    pub class: SlrClass,
}

/// Directions with `|cos(2 alpha)|` below this are treated as light-like;
/// `cos(pi/2)` itself only evaluates to ~6e-17.
const CLASS_TOL: f64 = 1e-14;

pub fn classify(alpha: f64) -> SlrClass {
    let n = (2.0 * alpha).cos();
    if n > CLASS_TOL {
        SlrClass::H2Like
    } else if n < -CLASS_TOL {
        SlrClass::FibreLike
    } else {
        SlrClass::LightLike
    }
}

fn unit_direction(alpha: f64, lambda: f64) -> Vector3<f64> {
    Vector3::new(
        alpha.sin(),
        alpha.cos() * lambda.cos(),
        alpha.cos() * lambda.sin(),
    )
}

/// Point of the unit-speed translation curve at parameter `s`.
///
/// All three class rows are the same formula `f(s) * direction` with
/// `f = tanh(ks)/k`, `s`, or `tan(ks)/k` according to the sign of
/// `cos(2 alpha)`; the ratio helpers make the light-like limit exact.
pub fn curve_point(params: &SlrCurveParams, s: f64) -> Result<AffinePoint> {
    let n = (2.0 * params.alpha).cos();
    let factor = if n > CLASS_TOL {
        tanh_ratio(n.sqrt(), s)
    } else if n < -CLASS_TOL {
        let k = (-n).sqrt();
        if k * s.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(GeomError::OutOfChart);
        }
        tan_ratio(k, s)
    } else {
        s
    };
    Ok(AffinePoint::from_vec(
        unit_direction(params.alpha, params.lambda) * factor,
    ))
}

/// Inverse problem: class, direction angles and arclength for the endpoint `p`.
pub fn inverse(p: &AffinePoint) -> Result<SlrCurveParams> {
    let (a, b, c) = (p.x, p.y, p.z);
    let n = p.vec().norm();
    if n == 0.0 {
        return Err(GeomError::ZeroLength);
    }
    let alpha = a.atan2(b.hypot(c));
    let lambda = c.atan2(b);
    let disc = a * a - b * b - c * c;
    let sd = disc.abs().sqrt();
    let (class, s) = if disc.abs() <= CLASS_TOL * n * n {
        (SlrClass::LightLike, n)
    } else if disc < 0.0 {
        if sd >= 1.0 {
            return Err(GeomError::OutOfChart);
        }
        (SlrClass::H2Like, n * atanh_ratio(sd))
    } else if disc > 0.0 {
        (SlrClass::FibreLike, n * atan_ratio(sd))
    } else {
        (SlrClass::LightLike, n)
    };
    Ok(SlrCurveParams {
        lambda,
        alpha,
        s,
        class,
    })
}

/// Matrix of right multiplication by the raw homogeneous vector
/// `(x0, x1, x2, x3)`; with `x0 = 1` this is the translation carrying the
/// origin to the point.
pub fn tangent_matrix_raw(v: &RowVector4<f64>) -> Matrix4<f64> {
    let (x0, x1, x2, x3) = (v[0], v[1], v[2], v[3]);
    Matrix4::from_fn(|i, j| {
        [
            [x0, x1, x2, x3],
            [-x1, x0, x3, -x2],
            [x2, x3, x0, x1],
            [x3, -x2, -x1, x0],
        ][i][j]
    })
}

/// Translation mapping the origin to `p`.
pub fn translation(p: &AffinePoint) -> Collineation {
    Collineation::from_matrix(tangent_matrix_raw(&RowVector4::new(1.0, p.x, p.y, p.z)))
}

pub fn translation_inverse(p: &AffinePoint) -> Result<Collineation> {
    translation(p).inverse()
}

/// Raw homogeneous representative `exp(s A)` of the translation curve, with
/// `A = (0, sin(alpha), cos(alpha)cos(lambda), cos(alpha)sin(lambda))`.
pub fn raw_curve(alpha: f64, lambda: f64, s: f64) -> RowVector4<f64> {
    let d = unit_direction(alpha, lambda);
    let n = (2.0 * alpha).cos();
    let (scalar, vec) = if n > CLASS_TOL {
        let k = n.sqrt();
        ((k * s).cosh(), (k * s).sinh() / k)
    } else if n < -CLASS_TOL {
        let k = (-n).sqrt();
        ((k * s).cos(), (k * s).sin() / k)
    } else {
        (1.0, s)
    };
    RowVector4::new(scalar, vec * d.x, vec * d.y, vec * d.z)
}

/// Translation distance: arclength of the pulled-back endpoint.
pub fn distance(p: &AffinePoint, q: &AffinePoint) -> Result<f64> {
    if p.dist_euclid(q) == 0.0 {
        return Ok(0.0);
    }
    let pulled = translation_inverse(p)?.apply(q)?;
    if !pulled.is_valid(GeometryId::Slr) {
        return Err(GeomError::OutOfChart);
    }
    Ok(inverse(&pulled)?.s)
}

/// Chart quantity `1 + x^2 - y^2 - z^2`; positive inside the model.
pub fn chart_margin(p: &AffinePoint) -> f64 {
    1.0 + p.x * p.x - p.y * p.y - p.z * p.z
}

/// Conservative validity for grid sampling: keeps a safety band to the chart
/// boundary so interpolation along grid edges between valid corners stays
/// evaluable.
pub fn well_inside_chart(p: &AffinePoint) -> bool {
    chart_margin(p) > 0.08
}

/// `sigma * d(E0, P) - d(E0, T_{P2}^{-1} P)`; samples that leave the chart are
/// reported invalid rather than erroring.
pub fn apollonius_field(spec: &ApolloniusSpec) -> ScalarField {
    let spec = *spec;
    let pull = translation_inverse(&spec.p2).expect("slr translation of a chart point inverts");
    let e0 = AffinePoint::origin(GeometryId::Slr);
    let sample = move |p: &AffinePoint| -> Result<f64> {
        let pulled = pull.apply(p)?;
        if !p.is_valid(GeometryId::Slr) || !pulled.is_valid(GeometryId::Slr) {
            return Err(GeomError::OutOfChart);
        }
        Ok(spec.sigma * distance(&e0, p)? - inverse(&pulled).map(|r| r.s).unwrap_or(0.0))
    };
    let margins = move |p: &AffinePoint| -> bool {
        well_inside_chart(p)
            && pull
                .apply(p)
                .map(|q| well_inside_chart(&q))
                .unwrap_or(false)
    };
    ScalarField::new(
        move |p| sample(p).unwrap_or(f64::NAN),
        margins,
        Aabb::cube(0.95),
    )
}

/// Triangular surface: translation curves are Euclidean lines of the model,
/// so the surface through the origin, `p2` and `p3` is their common plane.
#[derive(Debug, Clone, Copy)]
pub struct SlrTriangle {
    /// Unit normal of the plane through the origin.
    pub normal: Vector3<f64>,
}

pub fn triangle_surface(p2: &AffinePoint, p3: &AffinePoint) -> Result<SlrTriangle> {
    let n = p2.vec().cross(&p3.vec());
    if n.norm() < 1e-12 {
        return Err(GeomError::DegenerateTriangle(
            "origin, p2 and p3 are collinear in the model".into(),
        ));
    }
    Ok(SlrTriangle {
        normal: n.normalize(),
    })
}

impl SlrTriangle {
    pub fn residual(&self, p: &AffinePoint) -> f64 {
        self.normal.dot(&p.vec())
    }

    pub fn field(self) -> ScalarField {
        ScalarField::new(
            move |p| self.residual(p),
            well_inside_chart,
            Aabb::cube(0.95),
        )
    }
}
