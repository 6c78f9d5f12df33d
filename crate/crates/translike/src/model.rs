//! Shared model-level types: homogeneous points, projective collineations,
//! scalar fields, triangle meshes and Dirichlet-Voronoi orbit lists.
//!
//! All points are stored in the inhomogeneous chart of the projective model:
//! the homogeneous point `(1, x, y, z)` is kept as the triple `(x, y, z)` and
//! every operation renormalizes so the zeroth coordinate is exactly 1.

use nalgebra::{Matrix4, RowVector4, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for contracts that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for round trips through transcendental inverses.
pub const ROUND_TRIP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("singular projective map: zeroth coordinate vanished")]
    SingularMap,
    #[error("zero-length curve: point coincides with the origin")]
    ZeroLength,
    #[error("degenerate triangle configuration: {0}")]
    DegenerateTriangle(String),
    #[error("point leaves the model chart")]
    OutOfChart,
    #[error("orbit image list is empty")]
    EmptyOrbit,
    #[error("orbit image list does not contain the kernel point")]
    KernelMissing,
    #[error("degenerate fibre direction: weighted-average denominator vanished")]
    DegenerateFibre,
    #[error("evaluation outside the explicit-form domain")]
    OutsideDomain,
    #[error("point ({0}, {1}, {2}) is not a valid {3} model point")]
    InvalidPoint(f64, f64, f64, GeometryId),
    #[error("point is not on the surface (residual {0:.3e})")]
    OffSurface(f64),
    #[error("integration would need more than 1e7 steps")]
    TooManySteps,
    #[error("shooting found no direction reaching the target (best endpoint error {0:.3e})")]
    Unreachable(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;

/// The five geometries handled by this kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryId {
    Nil,
    Sol,
    Slr,
    S2xR,
    H2xR,
}

impl GeometryId {
    pub const ALL: [GeometryId; 5] = [
        GeometryId::Nil,
        GeometryId::Sol,
        GeometryId::Slr,
        GeometryId::S2xR,
        GeometryId::H2xR,
    ];

    pub fn is_product(self) -> bool {
        matches!(self, GeometryId::S2xR | GeometryId::H2xR)
    }
}

impl std::fmt::Display for GeometryId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GeometryId::Nil => "nil",
            GeometryId::Sol => "sol",
            GeometryId::Slr => "slr",
            GeometryId::S2xR => "s2xr",
            GeometryId::H2xR => "h2xr",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for GeometryId {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nil" => Ok(GeometryId::Nil),
            "sol" => Ok(GeometryId::Sol),
            "slr" | "sl2r" => Ok(GeometryId::Slr),
            "s2xr" => Ok(GeometryId::S2xR),
            "h2xr" => Ok(GeometryId::H2xR),
            other => Err(GeomError::InvalidParameter(format!(
                "unknown geometry '{other}' (expected nil, sol, slr, s2xr or h2xr)"
            ))),
        }
    }
}

/// Inhomogeneous coordinates of the normalized homogeneous point `(1, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", from = "[f64; 3]")]
pub struct AffinePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<AffinePoint> for [f64; 3] {
    fn from(p: AffinePoint) -> Self {
        [p.x, p.y, p.z]
    }
}

impl From<[f64; 3]> for AffinePoint {
    fn from(a: [f64; 3]) -> Self {
        AffinePoint::new(a[0], a[1], a[2])
    }
}

impl AffinePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        AffinePoint { x, y, z }
    }

    /// Canonical origin of the geometry: `(1,0,0,0)` for Nil, Sol and SL(2,R)~,
    /// `(1,1,0,0)` for the product geometries.
    pub fn origin(geometry: GeometryId) -> Self {
        if geometry.is_product() {
            AffinePoint::new(1.0, 0.0, 0.0)
        } else {
            AffinePoint::new(0.0, 0.0, 0.0)
        }
    }

    pub fn vec(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vec(v: Vector3<f64>) -> Self {
        AffinePoint::new(v.x, v.y, v.z)
    }

    /// Model-validity predicate of the single chart used throughout.
    pub fn is_valid(&self, geometry: GeometryId) -> bool {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return false;
        }
        match geometry {
            GeometryId::Nil | GeometryId::Sol => true,
            // Interior of the one-sheeted hyperboloid solid.
            GeometryId::Slr => 1.0 + self.x * self.x - self.y * self.y - self.z * self.z > 0.0,
            GeometryId::S2xR => self.x * self.x + self.y * self.y + self.z * self.z > 0.0,
            GeometryId::H2xR => {
                self.x > 0.0 && self.x * self.x - self.y * self.y - self.z * self.z > 0.0
            }
        }
    }

    pub fn dist_euclid(&self, other: &AffinePoint) -> f64 {
        (self.vec() - other.vec()).norm()
    }
}

/// 4x4 projective collineation acting on row vectors `(1, x, y, z)` by right
/// multiplication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collineation {
    m: Matrix4<f64>,
}

impl Collineation {
    pub fn identity() -> Self {
        Collineation {
            m: Matrix4::identity(),
        }
    }

    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        Collineation { m }
    }

    /// Rows given top to bottom; the matrix multiplies row vectors on the right.
    pub fn from_rows(rows: [[f64; 4]; 4]) -> Self {
        Collineation {
            m: Matrix4::from_fn(|i, j| rows[i][j]),
        }
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.m
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                out[4 * i + j] = self.m[(i, j)];
            }
        }
        out
    }

    pub fn from_row_major(a: &[f64; 16]) -> Self {
        Collineation {
            m: Matrix4::from_fn(|i, j| a[4 * i + j]),
        }
    }

    /// Applies the collineation and renormalizes the zeroth coordinate to 1.
    pub fn apply(&self, p: &AffinePoint) -> Result<AffinePoint> {
        let v = RowVector4::new(1.0, p.x, p.y, p.z) * self.m;
        if v[0].abs() < 1e-14 {
            return Err(GeomError::SingularMap);
        }
        Ok(AffinePoint::new(v[1] / v[0], v[2] / v[0], v[3] / v[0]))
    }

    /// `apply(compose(c1, c2), p) == apply(c2, apply(c1, p))`.
    pub fn compose(&self, then: &Collineation) -> Collineation {
        Collineation {
            m: self.m * then.m,
        }
    }

    pub fn inverse(&self) -> Result<Collineation> {
        self.m
            .try_inverse()
            .map(Collineation::from_matrix)
            .ok_or(GeomError::SingularMap)
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Aabb { min, max }
    }

    /// The symmetric cube `[-h, h]^3`.
    pub fn cube(h: f64) -> Self {
        Aabb {
            min: [-h; 3],
            max: [h; 3],
        }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn is_degenerate(&self) -> bool {
        (0..3).any(|a| !(self.extent(a) > 0.0))
    }

    pub fn contains(&self, p: &AffinePoint) -> bool {
        let c = [p.x, p.y, p.z];
        (0..3).all(|a| c[a] >= self.min[a] && c[a] <= self.max[a])
    }
}

/// Real-valued sampler whose zero set is the represented surface.
pub struct ScalarField {
    eval: Box<dyn Fn(&AffinePoint) -> f64 + Send + Sync>,
    valid: Box<dyn Fn(&AffinePoint) -> bool + Send + Sync>,
    pub bounds: Aabb,
}

impl ScalarField {
    pub fn new<E, V>(eval: E, valid: V, bounds: Aabb) -> Self
    where
        E: Fn(&AffinePoint) -> f64 + Send + Sync + 'static,
        V: Fn(&AffinePoint) -> bool + Send + Sync + 'static,
    {
        ScalarField {
            eval: Box::new(eval),
            valid: Box::new(valid),
            bounds,
        }
    }

    pub fn everywhere<E>(eval: E, bounds: Aabb) -> Self
    where
        E: Fn(&AffinePoint) -> f64 + Send + Sync + 'static,
    {
        ScalarField::new(eval, |_| true, bounds)
    }

    pub fn eval(&self, p: &AffinePoint) -> f64 {
        (self.eval)(p)
    }

    pub fn valid(&self, p: &AffinePoint) -> bool {
        (self.valid)(p)
    }

    pub fn with_bounds(mut self, bounds: Aabb) -> Self {
        self.bounds = bounds;
        self
    }
}

/// Triangle soup with one residual sample per vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 3]>,
    pub residuals: Vec<f64>,
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |acc, r| acc.max(r.abs()))
    }

    /// Replaces per-vertex residuals with samples of `field`.
    pub fn set_residuals_from(&mut self, field: &ScalarField) {
        self.residuals = self
            .vertices
            .iter()
            .map(|v| field.eval(&AffinePoint::new(v[0], v[1], v[2])))
            .collect();
    }

    pub fn check_indices(&self) -> bool {
        self.faces
            .iter()
            .all(|f| f.iter().all(|&i| i < self.vertices.len()))
            && self.residuals.len() == self.vertices.len()
    }
}

/// Finite list of images of a kernel point under explicitly supplied group
/// elements; stands in for the full orbit of Definition-style D-V cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitList {
    pub kernel: AffinePoint,
    pub images: Vec<AffinePoint>,
}

impl OrbitList {
    pub fn new(kernel: AffinePoint, images: Vec<AffinePoint>) -> Result<Self> {
        if images.is_empty() {
            return Err(GeomError::EmptyOrbit);
        }
        let has_kernel = images
            .iter()
            .any(|p| p.dist_euclid(&kernel) <= EXACT_TOL);
        if !has_kernel {
            return Err(GeomError::KernelMissing);
        }
        Ok(OrbitList { kernel, images })
    }
}

/// Two fixed points and the distance ratio defining an Apollonius surface;
/// `sigma = 1` gives the bisector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApolloniusSpec {
    pub p1: AffinePoint,
    pub p2: AffinePoint,
    pub sigma: f64,
}

impl ApolloniusSpec {
    pub fn new(p1: AffinePoint, p2: AffinePoint, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if p1.dist_euclid(&p2) <= EXACT_TOL {
            return Err(GeomError::InvalidParameter(
                "the two fixed points coincide".into(),
            ));
        }
        Ok(ApolloniusSpec { p1, p2, sigma })
    }
}

/// D-V membership against a finite orbit: `q` belongs to the cell iff the
/// kernel is at least as close to `q` (in translation distance) as every image.
pub fn dv_membership(q: &AffinePoint, orbit: &OrbitList, geometry: GeometryId) -> Result<bool> {
    dv_classify(q, orbit, geometry).map(|(member, _)| member)
}

/// As `dv_membership`, additionally returning the index of the minimizing image.
pub fn dv_classify(
    q: &AffinePoint,
    orbit: &OrbitList,
    geometry: GeometryId,
) -> Result<(bool, usize)> {
    if orbit.images.is_empty() {
        return Err(GeomError::EmptyOrbit);
    }
    for p in std::iter::once(&orbit.kernel).chain(orbit.images.iter()).chain(std::iter::once(q)) {
        if !p.is_valid(geometry) {
            return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
        }
    }
    let d_kernel = crate::distance(geometry, &orbit.kernel, q)?;
    let mut best = f64::INFINITY;
    let mut best_idx = 0;
    for (i, image) in orbit.images.iter().enumerate() {
        let d = crate::distance(geometry, image, q)?;
        if d < best {
            best = d;
            best_idx = i;
        }
    }
    Ok((d_kernel <= best + EXACT_TOL, best_idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_apply() {
        let p = AffinePoint::new(2.0, 3.0, 4.0);
        let q = Collineation::identity().apply(&p).unwrap();
        assert_eq!(q, p);
    }

    #[test]
    fn nil_translation_moves_origin() {
        let t = crate::nil::translation(&AffinePoint::new(1.0, 1.0, 1.0));
        let q = t.apply(&AffinePoint::origin(GeometryId::Nil)).unwrap();
        assert_eq!((q.x, q.y, q.z), (1.0, 1.0, 1.0));
    }

    #[test]
    fn sol_translation_hand_evaluated() {
        // (1,1,1,0) moved by the Sol translation with parameters (1,1,1).
        let t = crate::sol::translation(&AffinePoint::new(1.0, 1.0, 1.0));
        let q = t.apply(&AffinePoint::new(1.0, 1.0, 0.0)).unwrap();
        assert!((q.x - (1.0 + (-1.0f64).exp())).abs() < EXACT_TOL);
        assert!((q.y - (1.0 + 1.0f64.exp())).abs() < EXACT_TOL);
        assert!((q.z - 1.0).abs() < EXACT_TOL);
    }

    #[test]
    fn compose_contracts() {
        let c = crate::nil::translation(&AffinePoint::new(0.3, -0.7, 1.1));
        let id = Collineation::identity();
        let p = AffinePoint::new(0.9, 0.2, -0.4);
        let lhs = id.compose(&c).apply(&p).unwrap();
        assert!(lhs.dist_euclid(&c.apply(&p).unwrap()) < EXACT_TOL);
        let round = c.compose(&c.inverse().unwrap()).apply(&p).unwrap();
        assert!(round.dist_euclid(&p) < EXACT_TOL);
    }

    #[test]
    fn compose_of_nil_translations_is_group_law() {
        let (a, b, c) = (0.5, -1.2, 0.3);
        let (x, y, z) = (1.1, 0.4, -0.8);
        let t1 = crate::nil::translation(&AffinePoint::new(a, b, c));
        let t2 = crate::nil::translation(&AffinePoint::new(x, y, z));
        let combined = t1.compose(&t2);
        let expected = crate::nil::translation(&AffinePoint::new(x + a, y + b, z + b * x + c));
        let p = AffinePoint::new(0.2, -0.6, 0.9);
        assert!(
            combined
                .apply(&p)
                .unwrap()
                .dist_euclid(&expected.apply(&p).unwrap())
                < EXACT_TOL
        );
    }

    #[test]
    fn dv_membership_base_plane() {
        let kernel = AffinePoint::new(0.0, 0.0, 0.0);
        let orbit = OrbitList::new(kernel, vec![kernel, AffinePoint::new(2.0, 0.0, 0.0)]).unwrap();
        // Base-plane Sol distances are Euclidean.
        assert!(dv_membership(&AffinePoint::new(0.5, 0.0, 0.0), &orbit, GeometryId::Sol).unwrap());
        assert!(!dv_membership(&AffinePoint::new(1.5, 0.0, 0.0), &orbit, GeometryId::Sol).unwrap());
        // Kernel itself is always a member.
        assert!(dv_membership(&kernel, &orbit, GeometryId::Sol).unwrap());
    }

    #[test]
    fn orbit_list_validation() {
        let kernel = AffinePoint::new(0.0, 0.0, 0.0);
        assert!(matches!(
            OrbitList::new(kernel, vec![]),
            Err(GeomError::EmptyOrbit)
        ));
        assert!(matches!(
            OrbitList::new(kernel, vec![AffinePoint::new(1.0, 0.0, 0.0)]),
            Err(GeomError::KernelMissing)
        ));
    }
}
