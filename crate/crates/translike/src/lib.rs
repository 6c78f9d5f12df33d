//! Translation-curve geometry kernel for the Thurston geometries Nil, Sol,
//! SL(2,R)~, S²×R and H²×R: translation distances, inverse problems,
//! Apollonius/bisector surfaces, translation-like triangular surfaces,
//! Dirichlet-Voronoi membership, verification oracles and mesh extraction.

pub mod checks;
pub mod mesh;
pub mod model;
pub mod nil;
pub mod oracles;
pub mod product;
pub mod showcase;
pub mod slr;
pub mod sol;
pub mod util;

pub use model::{
    Aabb, AffinePoint, ApolloniusSpec, Collineation, GeomError, GeometryId, OrbitList, Result,
    ScalarField, TriangleMesh, dv_classify, dv_membership,
};

/// Translation distance `d^t(p, q)` in the given geometry.
pub fn distance(geometry: GeometryId, p: &AffinePoint, q: &AffinePoint) -> Result<f64> {
    for pt in [p, q] {
        if !pt.is_valid(geometry) {
            return Err(GeomError::InvalidPoint(pt.x, pt.y, pt.z, geometry));
        }
    }
    match geometry {
        GeometryId::Nil => Ok(nil::distance(p, q)),
        GeometryId::Sol => Ok(sol::distance(p, q)),
        GeometryId::Slr => slr::distance(p, q),
        GeometryId::S2xR | GeometryId::H2xR => product::distance(geometry, p, q),
    }
}

/// Apollonius field `sigma * d(p1, P) - d(p2, P)` for the twisted
/// geometries. A kernel away from the origin is handled by pulling the
/// whole configuration back with the translation taking `p1` to `E0`.
pub fn apollonius_field(geometry: GeometryId, spec: &ApolloniusSpec) -> Result<ScalarField> {
    if geometry.is_product() {
        return Err(GeomError::InvalidParameter(
            "apollonius surfaces are provided for nil, sol and slr".into(),
        ));
    }
    for p in [&spec.p1, &spec.p2] {
        if !p.is_valid(geometry) {
            return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
        }
    }
    let origin = AffinePoint::origin(geometry);
    if spec.p1.dist_euclid(&origin) <= 1e-15 {
        return Ok(match geometry {
            GeometryId::Nil => nil::apollonius_field(spec),
            GeometryId::Sol => sol::apollonius_field(spec),
            _ => slr::apollonius_field(spec),
        });
    }
    let pull = match geometry {
        GeometryId::Nil => nil::translation_inverse(&spec.p1),
        GeometryId::Sol => sol::translation_inverse(&spec.p1),
        _ => slr::translation_inverse(&spec.p1)?,
    };
    let inner_spec = ApolloniusSpec::new(origin, pull.apply(&spec.p2)?, spec.sigma)?;
    let inner = std::sync::Arc::new(apollonius_field(geometry, &inner_spec)?);
    let bounds = if geometry == GeometryId::Slr {
        inner.bounds
    } else {
        // Recentre the default meshing box on the kernel.
        let b = inner.bounds;
        Aabb::new(
            [b.min[0] + spec.p1.x, b.min[1] + spec.p1.y, b.min[2] + spec.p1.z],
            [b.max[0] + spec.p1.x, b.max[1] + spec.p1.y, b.max[2] + spec.p1.z],
        )
    };
    let inner2 = inner.clone();
    let pull2 = pull;
    Ok(ScalarField::new(
        move |p| match pull.apply(p) {
            Ok(q) => inner.eval(&q),
            Err(_) => f64::NAN,
        },
        move |p| pull2.apply(p).map(|q| inner2.valid(&q)).unwrap_or(false),
        bounds,
    ))
}

/// Translation-like triangular surface on `E0`, `p2`, `p3` in any of the
/// five geometries, in its preferred representation.
#[derive(Debug, Clone, Copy)]
pub enum TriangleSurface {
    Nil(nil::NilTriangle),
    Sol(sol::SolTriangle),
    Slr(slr::SlrTriangle),
    Product(product::ProductTriangle),
}

pub fn triangle_surface(
    geometry: GeometryId,
    p2: &AffinePoint,
    p3: &AffinePoint,
) -> Result<TriangleSurface> {
    for p in [p2, p3] {
        if !p.is_valid(geometry) {
            return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
        }
    }
    Ok(match geometry {
        GeometryId::Nil => TriangleSurface::Nil(nil::triangle_surface(p2, p3)?),
        GeometryId::Sol => TriangleSurface::Sol(sol::triangle_surface(p2, p3)?),
        GeometryId::Slr => TriangleSurface::Slr(slr::triangle_surface(p2, p3)?),
        GeometryId::S2xR | GeometryId::H2xR => {
            TriangleSurface::Product(product::triangle_surface(geometry, p2, p3)?)
        }
    })
}

impl TriangleSurface {
    /// Implicit residual of the preferred representation; zero on the surface.
    pub fn residual(&self, p: &AffinePoint) -> Result<f64> {
        match self {
            TriangleSurface::Nil(t) => Ok(t.residual(p)),
            TriangleSurface::Sol(t) => Ok(t.bracket(p)),
            TriangleSurface::Slr(t) => Ok(t.residual(p)),
            TriangleSurface::Product(t) => t.residual(p),
        }
    }

    pub fn field(&self) -> ScalarField {
        match self {
            TriangleSurface::Nil(t) => t.field(),
            TriangleSurface::Sol(t) => t.field(),
            TriangleSurface::Slr(t) => t.field(),
            TriangleSurface::Product(t) => t.field(),
        }
    }

    /// Meshes the surface in its preferred representation: explicit graphs
    /// for Nil and Sol, plane extraction for SL(2,R)~ and fibre-solved
    /// barycentric patches for the product geometries.
    pub fn mesh(&self, bounds: Aabb, resolution: [usize; 3], iso_tol: f64) -> Result<TriangleMesh> {
        let grid = mesh::GridSpec::new(bounds, resolution, iso_tol)?;
        match self {
            TriangleSurface::Nil(t) => {
                if let nil::NilTriangle::Explicit { .. } = t {
                    let mut m = mesh::mesh_graph(
                        |x, y| {
                            t.explicit_z(x, y)
                                .filter(|z| *z >= bounds.min[2] && *z <= bounds.max[2])
                        },
                        &grid,
                    );
                    m.set_residuals_from(&t.field());
                    Ok(m)
                } else {
                    // Vertical plane through the fibre axis.
                    mesh::extract_isosurface(&t.field(), &grid)
                }
            }
            TriangleSurface::Sol(t) => {
                let mut m = mesh::mesh_graph(
                    |x, y| {
                        t.explicit_z(x, y)
                            .ok()
                            .filter(|z| z.is_finite() && *z >= bounds.min[2] && *z <= bounds.max[2])
                    },
                    &grid,
                );
                m.set_residuals_from(&t.field());
                Ok(m)
            }
            TriangleSurface::Slr(t) => mesh::extract_isosurface(&t.field(), &grid),
            TriangleSurface::Product(t) => {
                let n = resolution[0].max(resolution[1]);
                let mut m = mesh::mesh_barycentric(
                    |w| {
                        let dir = t.blend_direction(w);
                        t.solve_point(&dir).ok().map(|p| {
                            [p.x, p.y, p.z]
                        })
                    },
                    n,
                );
                m.set_residuals_from(&t.field());
                Ok(m)
            }
        }
    }
}
