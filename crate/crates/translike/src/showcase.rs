//! Canonical demonstration datasets: the Apollonius/bisector and triangular
//! surfaces rendered by the bundled examples and exercised by the check
//! suites.

use crate::model::GeometryId;

#[derive(Debug, Clone, Copy)]
pub struct ApolloniusShowcase {
    pub name: &'static str,
    pub geometry: GeometryId,
    pub p2: [f64; 3],
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct TriangleShowcase {
    pub name: &'static str,
    pub geometry: GeometryId,
    pub p2: [f64; 3],
    pub p3: [f64; 3],
}

pub const APOLLONIUS: [ApolloniusShowcase; 6] = [
    ApolloniusShowcase {
        name: "nil-apollonius",
        geometry: GeometryId::Nil,
        p2: [-1.0, 1.0, 1.0],
        sigma: 2.0,
    },
    ApolloniusShowcase {
        name: "nil-bisector",
        geometry: GeometryId::Nil,
        p2: [0.5, 1.0, 0.5],
        sigma: 1.0,
    },
    ApolloniusShowcase {
        name: "sol-apollonius",
        geometry: GeometryId::Sol,
        p2: [-1.0, 1.0, 0.5],
        sigma: 0.5,
    },
    ApolloniusShowcase {
        name: "sol-bisector",
        geometry: GeometryId::Sol,
        p2: [-1.0, 1.0, 0.5],
        sigma: 1.0,
    },
    ApolloniusShowcase {
        name: "slr-apollonius",
        geometry: GeometryId::Slr,
        p2: [0.0, 1.0 / 6.0, 0.2],
        sigma: 2.0,
    },
    ApolloniusShowcase {
        name: "slr-bisector",
        geometry: GeometryId::Slr,
        p2: [0.25, 0.6, 0.0],
        sigma: 1.0,
    },
];

pub const TRIANGLES: [TriangleShowcase; 4] = [
    TriangleShowcase {
        name: "sol-triangle",
        geometry: GeometryId::Sol,
        p2: [-1.0, 1.0, 1.0],
        p3: [0.5, 1.0, 0.5],
    },
    TriangleShowcase {
        name: "nil-triangle",
        geometry: GeometryId::Nil,
        p2: [2.0, 1.0, 1.0],
        p3: [-2.0, 2.0, 0.0],
    },
    TriangleShowcase {
        name: "s2xr-triangle",
        geometry: GeometryId::S2xR,
        p2: [0.0, -2.0, 2.0],
        p3: [-2.0, -1.0, -2.0],
    },
    TriangleShowcase {
        name: "h2xr-triangle",
        geometry: GeometryId::H2xR,
        p2: [3.0, 1.0, 1.0],
        p3: [1.9, -1.0, 1.2],
    },
];
