//! The product geometries S²×R and H²×R handled uniformly: translation
//! curves, pull-back isometries, tangent functional, distance, the projected
//! triangular surface with its per-fibre closed form, and the
//! non-transitivity demonstration.
//!
//! Points `(1,x,y,z)` project along fibre lines onto the unit sphere
//! (`x²+y²+z² = 1`) or unit hyperboloid (`x²-y²-z² = 1, x > 0`); the fibre
//! coordinate is the logarithm of the projective norm. The origin is
//! `E0 = (1,1,0,0)`.

use nalgebra::{Matrix4, Vector3};

use crate::model::{
    Aabb, AffinePoint, Collineation, GeomError, GeometryId, Result, ScalarField,
};
use crate::util::{clamp_cosh, clamp_unit};

fn check_product(geometry: GeometryId) {
    assert!(geometry.is_product(), "not a product geometry: {geometry}");
}

/// `+1` for S²×R, `-1` for H²×R.
fn sign(geometry: GeometryId) -> f64 {
    match geometry {
        GeometryId::S2xR => 1.0,
        GeometryId::H2xR => -1.0,
        other => panic!("not a product geometry: {other}"),
    }
}

/// `C(t)`/`S(t)`: circular functions on the sphere, hyperbolic on the
/// hyperboloid.
fn cs(geometry: GeometryId, t: f64) -> (f64, f64) {
    if geometry == GeometryId::S2xR {
        (t.cos(), t.sin())
    } else {
        (t.cosh(), t.sinh())
    }
}

/// Signed quadratic form `x² ± (y² + z²)` whose square root is the fibre
/// projective norm.
fn quad(geometry: GeometryId, p: &AffinePoint) -> f64 {
    p.x * p.x + sign(geometry) * (p.y * p.y + p.z * p.z)
}

/// Minkowski product of signature `(+,-,-)` used on the hyperboloid.
fn mip(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    u.x * v.x - u.y * v.y - u.z * v.z
}

/// Direction angles and arclength of a translation curve from `E0`; the
/// initial velocity is `(sin(v), cos(v)cos(u), cos(v)sin(u))`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProductCurveParams {
    pub u: f64,
    pub v: f64,
    pub tau: f64,
    pub geometry: GeometryId,
}

/// Point of the unit-speed translation curve at parameter `t in [0, tau]`.
pub fn curve_point(params: &ProductCurveParams, t: f64) -> AffinePoint {
    check_product(params.geometry);
    let fibre = (t * params.v.sin()).exp();
    let (c, s) = cs(params.geometry, t * params.v.cos());
    AffinePoint::new(
        fibre * c,
        fibre * s * params.u.cos(),
        fibre * s * params.u.sin(),
    )
}

/// Scaled tangent at `E0` of the translation curve ending at `p`
/// (fibre component, then the two base components); its Euclidean norm is
/// the translation distance from `E0`.
pub fn tangent_functional(geometry: GeometryId, p: &AffinePoint) -> Vector3<f64> {
    let q = quad(geometry, p);
    let fibre = 0.5 * q.ln();
    let rho = p.y.hypot(p.z);
    let arc = if geometry == GeometryId::S2xR {
        clamp_unit(p.x / q.sqrt()).acos()
    } else {
        clamp_cosh(p.x / q.sqrt()).acosh()
    };
    if rho == 0.0 {
        // Base distance survives the limit (nonzero only at the spherical
        // antipode, where the base direction is arbitrary).
        Vector3::new(fibre, arc, 0.0)
    } else {
        Vector3::new(fibre, p.y * arc / rho, p.z * arc / rho)
    }
}

/// Inverse problem: direction angles and arclength reaching `p` from `E0`.
pub fn inverse(geometry: GeometryId, p: &AffinePoint) -> Result<ProductCurveParams> {
    check_product(geometry);
    if !p.is_valid(geometry) {
        return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
    }
    let t = tangent_functional(geometry, p);
    let tau = t.norm();
    if tau == 0.0 {
        return Err(GeomError::ZeroLength);
    }
    Ok(ProductCurveParams {
        u: t.z.atan2(t.y),
        v: t.x.atan2(t.y.hypot(t.z)),
        tau,
        geometry,
    })
}

/// Pull-back isometry mapping `p` to `E0 = (1,1,0,0)`.
///
/// The closed-form matrix has a removable singularity on the fibre axis
/// `y = z = 0`, where the rotational limit `diag(1, 1/x, 1/x, 1/x)` is used.
pub fn pullback(geometry: GeometryId, p: &AffinePoint) -> Result<Collineation> {
    check_product(geometry);
    if !p.is_valid(geometry) {
        return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
    }
    let (x, y, z) = (p.x, p.y, p.z);
    let pm = sign(geometry);
    let q = quad(geometry, p);
    let rho2 = y * y + z * z;
    if rho2 == 0.0 {
        return Ok(Collineation::from_matrix(Matrix4::from_diagonal(
            &nalgebra::Vector4::new(1.0, 1.0 / x, 1.0 / x, 1.0 / x),
        )));
    }
    let sq = q.sqrt();
    let off = y * z * (x - sq) / (q * rho2);
    Ok(Collineation::from_rows([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, x / q, -y / q, -z / q],
        [0.0, pm * y / q, (x * y * y + z * z * sq) / (q * rho2), off],
        [0.0, pm * z / q, off, (x * z * z + y * y * sq) / (q * rho2)],
    ]))
}

/// Translation distance: norm of the tangent functional of the pulled-back
/// endpoint.
pub fn distance(geometry: GeometryId, p: &AffinePoint, q: &AffinePoint) -> Result<f64> {
    if !q.is_valid(geometry) {
        return Err(GeomError::InvalidPoint(q.x, q.y, q.z, geometry));
    }
    let pulled = pullback(geometry, p)?.apply(q)?;
    Ok(tangent_functional(geometry, &pulled).norm())
}

/// Projection along the fibre line: unit-surface point and fibre coordinate
/// `ln|p|`.
pub fn project_to_unit(geometry: GeometryId, p: &AffinePoint) -> (Vector3<f64>, f64) {
    let n = quad(geometry, p).sqrt();
    (p.vec() / n, n.ln())
}

/// Intrinsic distance between unit-surface points, computed from the chord
/// so that nearby points resolve to full precision (`acos`/`acosh` lose half
/// the mantissa near 1).
fn unit_distance(geometry: GeometryId, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let diff = a - b;
    if geometry == GeometryId::S2xR {
        if a.dot(b) >= 0.0 {
            2.0 * (diff.norm() / 2.0).min(1.0).asin()
        } else {
            clamp_unit(a.dot(b)).acos()
        }
    } else {
        // sinh(d/2) = sqrt(-<a-b, a-b>) / 2 for unit timelike vectors.
        2.0 * ((-mip(&diff, &diff)).max(0.0).sqrt() / 2.0).asinh()
    }
}

/// Positive-definite inner product on the tangent plane at a unit-surface
/// point.
fn tangent_inner(geometry: GeometryId, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    if geometry == GeometryId::S2xR {
        u.dot(v)
    } else {
        -mip(u, v)
    }
}

/// Unit tangent at `a` of the geodesic toward `b`, assuming `0 < d < π`.
fn geodesic_dir(
    geometry: GeometryId,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    d: f64,
) -> Vector3<f64> {
    if geometry == GeometryId::S2xR {
        (b - a * d.cos()) / d.sin()
    } else {
        (b - a * d.cosh()) / d.sinh()
    }
}

/// Orthonormal oriented frame of the tangent plane at a unit-surface point.
fn frame_at(geometry: GeometryId, a: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axis = if a.y.abs() < 0.9 * a.norm() {
        Vector3::new(0.0, 1.0, 0.0)
    } else {
        Vector3::new(0.0, 0.0, 1.0)
    };
    if geometry == GeometryId::S2xR {
        let e1 = (axis - a * axis.dot(a)).normalize();
        (e1, a.cross(&e1))
    } else {
        let raw = axis - a * mip(&axis, a);
        let e1 = raw / (-mip(&raw, &raw)).sqrt();
        // Minkowski cross product: eta * (a x e1) is ip-orthogonal to both.
        let c = a.cross(&e1);
        let e2 = Vector3::new(c.x, -c.y, -c.z);
        let e2 = e2 / (-mip(&e2, &e2)).sqrt();
        (e1, e2)
    }
}

/// Projected data of the triangle as seen from a unit-surface direction:
/// distances to the three projected vertices, directed angles between them,
/// and the vertices' fibre coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ProjectedTriangle {
    pub d: [f64; 3],
    pub gamma: [f64; 3],
    pub logs: [f64; 3],
}

/// Triangular surface of `E0`, `p2` and `p3`; validates non-degeneracy once
/// and then evaluates residuals / solves fibres.
#[derive(Debug, Clone, Copy)]
pub struct ProductTriangle {
    pub geometry: GeometryId,
    units: [Vector3<f64>; 3],
    logs: [f64; 3],
}

pub fn triangle_surface(
    geometry: GeometryId,
    p2: &AffinePoint,
    p3: &AffinePoint,
) -> Result<ProductTriangle> {
    check_product(geometry);
    let e0 = AffinePoint::origin(geometry);
    for p in [p2, p3] {
        if !p.is_valid(geometry) {
            return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
        }
    }
    let verts = [e0, *p2, *p3];
    let projected: Vec<_> = verts
        .iter()
        .map(|p| project_to_unit(geometry, p))
        .collect();
    for (i, (ui, _)) in projected.iter().enumerate() {
        for (uj, _) in projected.iter().skip(i + 1) {
            let d = unit_distance(geometry, ui, uj);
            if d < 1e-9 {
                return Err(GeomError::DegenerateTriangle(
                    "two vertices project to the same fibre line".into(),
                ));
            }
            if geometry == GeometryId::S2xR && d > std::f64::consts::PI - 1e-9 {
                return Err(GeomError::DegenerateTriangle(
                    "two vertices project to antipodal points".into(),
                ));
            }
        }
    }
    let t2 = tangent_functional(geometry, p2);
    let t3 = tangent_functional(geometry, p3);
    if t2.cross(&t3).norm() < 1e-12 {
        return Err(GeomError::DegenerateTriangle(
            "all three points lie on one translation curve".into(),
        ));
    }
    Ok(ProductTriangle {
        geometry,
        units: [projected[0].0, projected[1].0, projected[2].0],
        logs: [projected[0].1, projected[1].1, projected[2].1],
    })
}

impl ProductTriangle {
    pub fn vertex_units(&self) -> &[Vector3<f64>; 3] {
        &self.units
    }

    pub fn vertex_logs(&self) -> &[f64; 3] {
        &self.logs
    }

    /// Distances, directed angles and fibre coordinates of the projected
    /// triangle as seen from the unit-surface direction `dir`.
    pub fn project(&self, dir: &Vector3<f64>) -> Result<ProjectedTriangle> {
        let g = self.geometry;
        let mut d = [0.0; 3];
        for i in 0..3 {
            d[i] = unit_distance(g, dir, &self.units[i]);
            if d[i] < 1e-12 {
                return Err(GeomError::DegenerateTriangle(
                    "direction coincides with a projected vertex".into(),
                ));
            }
            if g == GeometryId::S2xR && d[i] > std::f64::consts::PI - 1e-12 {
                return Err(GeomError::DegenerateTriangle(
                    "direction antipodal to a projected vertex".into(),
                ));
            }
        }
        let (e1, e2) = frame_at(g, dir);
        let mut beta = [0.0; 3];
        for i in 0..3 {
            let t = geodesic_dir(g, dir, &self.units[i], d[i]);
            beta[i] = tangent_inner(g, &t, &e2).atan2(tangent_inner(g, &t, &e1));
        }
        Ok(ProjectedTriangle {
            d,
            gamma: [beta[2] - beta[1], beta[0] - beta[2], beta[1] - beta[0]],
            logs: self.logs,
        })
    }

    /// Residual of the coplanarity condition at a model point; zero exactly
    /// on the surface.
    pub fn residual(&self, p: &AffinePoint) -> Result<f64> {
        if !p.is_valid(self.geometry) {
            return Err(GeomError::InvalidPoint(p.x, p.y, p.z, self.geometry));
        }
        let (dir, lp) = project_to_unit(self.geometry, p);
        for (unit, log) in self.units.iter().zip(self.logs) {
            if unit_distance(self.geometry, &dir, unit) < 1e-12 {
                // On a vertex fibre the surface point is the vertex itself.
                return Ok(lp - log);
            }
        }
        let t = self.project(&dir)?;
        Ok(self.residual_of(&t, lp))
    }

    fn residual_of(&self, t: &ProjectedTriangle, lp: f64) -> f64 {
        t.d[0] * t.d[1] * t.gamma[2].sin() * (t.logs[2] - lp)
            + t.d[1] * t.d[2] * t.gamma[0].sin() * (t.logs[0] - lp)
            + t.d[2] * t.d[0] * t.gamma[1].sin() * (t.logs[1] - lp)
    }

    /// The unique fibre coordinate of the surface along the fibre of `dir`,
    /// by the weighted-average closed form.
    pub fn fibre_solve(&self, dir: &Vector3<f64>) -> Result<f64> {
        for (unit, log) in self.units.iter().zip(self.logs) {
            if unit_distance(self.geometry, &dir.clone(), unit) < 1e-9 {
                return Ok(log);
            }
        }
        let t = self.project(dir)?;
        let w3 = t.d[0] * t.d[1] * t.gamma[2].sin();
        let w1 = t.d[1] * t.d[2] * t.gamma[0].sin();
        let w2 = t.d[2] * t.d[0] * t.gamma[1].sin();
        let den = w1 + w2 + w3;
        if den.abs() < 1e-12 {
            return Err(GeomError::DegenerateFibre);
        }
        Ok((w3 * t.logs[2] + w1 * t.logs[0] + w2 * t.logs[1]) / den)
    }

    /// Model point of the surface over the unit-surface direction `dir`.
    pub fn solve_point(&self, dir: &Vector3<f64>) -> Result<AffinePoint> {
        let lp = self.fibre_solve(dir)?;
        Ok(AffinePoint::from_vec(dir * lp.exp()))
    }

    /// Interior unit-surface direction with the given barycentric-style
    /// weights of the three projected vertices.
    pub fn blend_direction(&self, w: [f64; 3]) -> Vector3<f64> {
        let v = self.units[0] * w[0] + self.units[1] * w[1] + self.units[2] * w[2];
        if self.geometry == GeometryId::S2xR {
            v / v.norm()
        } else {
            v / mip(&v, &v).sqrt()
        }
    }

    pub fn field(self) -> ScalarField {
        let h = if self.geometry == GeometryId::S2xR {
            3.0
        } else {
            4.0
        };
        let geometry = self.geometry;
        ScalarField::new(
            move |p| self.residual(p).unwrap_or(f64::NAN),
            move |p| p.is_valid(geometry),
            Aabb::cube(h),
        )
    }
}

/// Builds `P4` as the translation-curve midpoint of `P1 P3` and reports the
/// largest residual of the surface through `P1, P2, P4` over sample points of
/// the surface through `P1, P2, P3`; a strictly positive result exhibits the
/// non-transitivity of the construction.
pub fn nontransitivity_demo(
    geometry: GeometryId,
    p2: &AffinePoint,
    p3: &AffinePoint,
) -> Result<f64> {
    let tri = triangle_surface(geometry, p2, p3)?;
    let params = inverse(geometry, p3)?;
    let p4 = curve_point(&params, params.tau / 2.0);
    let tri4 = triangle_surface(geometry, p2, &p4)?;
    let mut max_dev = 0.0f64;
    let n = 12;
    for i in 0..=n {
        for j in 0..=(n - i) {
            let k = n - i - j;
            // Skip vertex directions where the projected angles degenerate.
            if i == n || j == n || k == n {
                continue;
            }
            let w = [i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64];
            let dir = tri.blend_direction(w);
            let on_surface = tri.solve_point(&dir)?;
            debug_assert!(tri.residual(&on_surface)?.abs() < 1e-9);
            max_dev = max_dev.max(tri4.residual(&on_surface)?.abs());
        }
    }
    Ok(max_dev)
}
