//! Isosurface extraction and mesh output.
//!
//! Implicit surfaces are extracted by marching tetrahedra on a regular grid
//! (six tetrahedra per cell sharing the main diagonal), with each crossing
//! polished along its edge until the field residual meets the iso tolerance.
//! Explicit graphs and parametric patches get direct grid triangulations.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::model::{Aabb, AffinePoint, GeomError, Result, ScalarField, TriangleMesh};

/// Sampling grid for surface extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub bounds: Aabb,
    pub resolution: [usize; 3],
    pub iso_tol: f64,
}

impl GridSpec {
    pub fn new(bounds: Aabb, resolution: [usize; 3], iso_tol: f64) -> Result<Self> {
        if bounds.is_degenerate() {
            return Err(GeomError::InvalidParameter("degenerate bounds".into()));
        }
        if resolution.iter().any(|&r| r < 8) {
            return Err(GeomError::InvalidParameter(
                "resolution must be at least 8 per axis".into(),
            ));
        }
        if !(iso_tol > 0.0) {
            return Err(GeomError::InvalidParameter(
                "iso tolerance must be positive".into(),
            ));
        }
        Ok(GridSpec {
            bounds,
            resolution,
            iso_tol,
        })
    }

    pub fn with_default_tol(bounds: Aabb, resolution: [usize; 3]) -> Result<Self> {
        GridSpec::new(bounds, resolution, 1e-6)
    }

    fn point(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let f = |axis: usize, idx: usize| {
            self.bounds.min[axis]
                + self.bounds.extent(axis) * idx as f64 / self.resolution[axis] as f64
        };
        [f(0, i), f(1, j), f(2, k)]
    }
}

/// The six tetrahedra of a cell, as corner indices in the bitwise
/// `x + 2y + 4z` numbering; all contain the main diagonal 0-7, so shared
/// faces between cells triangulate consistently.
const TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 3, 2, 7],
    [0, 2, 6, 7],
    [0, 6, 4, 7],
    [0, 4, 5, 7],
    [0, 5, 1, 7],
];

fn polish_edge(
    field: &ScalarField,
    a: [f64; 3],
    b: [f64; 3],
    va: f64,
    vb: f64,
    tol: f64,
) -> ([f64; 3], f64) {
    let eval_at = |t: f64| {
        let p = [
            a[0] + (b[0] - a[0]) * t,
            a[1] + (b[1] - a[1]) * t,
            a[2] + (b[2] - a[2]) * t,
        ];
        (p, field.eval(&AffinePoint::new(p[0], p[1], p[2])))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let (mut flo, mut fhi) = (va, vb);
    let mut t = va / (va - vb);
    let (mut cur_p, mut cur_f) = eval_at(t);
    // Best finite sample so far, falling back to the better corner.
    let (mut best_p, mut best_f) = if va.abs() <= vb.abs() { (a, va) } else { (b, vb) };
    for _ in 0..80 {
        if cur_f.is_finite() && cur_f.abs() < best_f.abs() {
            best_p = cur_p;
            best_f = cur_f;
        }
        if best_f.abs() <= tol {
            break;
        }
        if cur_f.is_finite() {
            if (cur_f < 0.0) == (flo < 0.0) {
                lo = t;
                flo = cur_f;
            } else {
                hi = t;
                fhi = cur_f;
            }
        } else {
            // A validity hole inside the bracket: shrink toward the smaller
            // of the two bracket residuals.
            if flo.abs() <= fhi.abs() {
                hi = t;
            } else {
                lo = t;
            }
        }
        // Secant step, clamped into the bracket; bisection if degenerate.
        let secant = if (fhi - flo).is_finite() && (fhi - flo).abs() > 1e-300 {
            lo + (hi - lo) * flo / (flo - fhi)
        } else {
            0.5 * (lo + hi)
        };
        t = if secant > lo && secant < hi {
            secant
        } else {
            0.5 * (lo + hi)
        };
        (cur_p, cur_f) = eval_at(t);
    }
    (best_p, best_f)
}

/// Marching-tetrahedra extraction of the zero set of `field`; cells touching
/// invalid or non-finite samples are skipped, and every emitted vertex is
/// polished along its grid edge to `grid.iso_tol`.
pub fn extract_isosurface(field: &ScalarField, grid: &GridSpec) -> Result<TriangleMesh> {
    let [nx, ny, nz] = grid.resolution;
    let (px, py) = (nx + 1, ny + 1);
    let gid = |i: usize, j: usize, k: usize| i + px * (j + py * k);

    // Parallel sampling over z-slabs; NaN marks invalid samples.
    let values: Vec<f64> = (0..=nz)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut slab = Vec::with_capacity(px * py);
            for j in 0..=ny {
                for i in 0..=nx {
                    let [x, y, z] = grid.point(i, j, k);
                    let p = AffinePoint::new(x, y, z);
                    let v = if field.valid(&p) {
                        field.eval(&p)
                    } else {
                        f64::NAN
                    };
                    slab.push(v);
                }
            }
            slab
        })
        .collect();

    struct RawVertex {
        corners: (usize, usize),
    }
    let mut edge_to_vertex: HashMap<(usize, usize), usize> = HashMap::new();
    let mut raw: Vec<RawVertex> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();

    let mut corner_ids = [0usize; 8];
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for (c, id) in corner_ids.iter_mut().enumerate() {
                    *id = gid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                }
                if corner_ids.iter().any(|&id| !values[id].is_finite()) {
                    continue;
                }
                for tet in &TETS {
                    let ids = [
                        corner_ids[tet[0]],
                        corner_ids[tet[1]],
                        corner_ids[tet[2]],
                        corner_ids[tet[3]],
                    ];
                    let neg: Vec<usize> = (0..4).filter(|&v| values[ids[v]] < 0.0).collect();
                    let mut edge_vertex = |a: usize, b: usize| -> usize {
                        let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                        *edge_to_vertex.entry(key).or_insert_with(|| {
                            raw.push(RawVertex { corners: key });
                            raw.len() - 1
                        })
                    };
                    match neg.len() {
                        1 | 3 => {
                            let lone = if neg.len() == 1 {
                                neg[0]
                            } else {
                                (0..4).find(|v| !neg.contains(v)).unwrap()
                            };
                            let others: Vec<usize> =
                                (0..4).filter(|&v| v != lone).collect();
                            let tri = [
                                edge_vertex(lone, others[0]),
                                edge_vertex(lone, others[1]),
                                edge_vertex(lone, others[2]),
                            ];
                            if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                                faces.push(tri);
                            }
                        }
                        2 => {
                            let (a, b) = (neg[0], neg[1]);
                            let pos: Vec<usize> =
                                (0..4).filter(|v| !neg.contains(v)).collect();
                            let (c, d) = (pos[0], pos[1]);
                            let (ac, ad, bc, bd) = (
                                edge_vertex(a, c),
                                edge_vertex(a, d),
                                edge_vertex(b, c),
                                edge_vertex(b, d),
                            );
                            for tri in [[ac, ad, bd], [ac, bd, bc]] {
                                if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                                    faces.push(tri);
                                }
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    // Place and polish each unique vertex in parallel.
    let placed: Vec<([f64; 3], f64)> = raw
        .par_iter()
        .map(|v| {
            let (ga, gb) = v.corners;
            let to_ijk = |g: usize| (g % px, (g / px) % py, g / (px * py));
            let (ia, ja, ka) = to_ijk(ga);
            let (ib, jb, kb) = to_ijk(gb);
            polish_edge(
                field,
                grid.point(ia, ja, ka),
                grid.point(ib, jb, kb),
                values[ga],
                values[gb],
                grid.iso_tol,
            )
        })
        .collect();

    let mut mesh = TriangleMesh::default();
    mesh.vertices = placed.iter().map(|(p, _)| *p).collect();
    mesh.residuals = placed.iter().map(|(_, r)| *r).collect();
    mesh.faces = faces;
    debug_assert!(mesh.check_indices());
    Ok(mesh)
}

/// Regular-grid triangulation of an explicit graph `z = f(x, y)` over the
/// part of the `(x, y)` window where `domain` holds and `f` is finite.
pub fn mesh_graph(
    f: impl Fn(f64, f64) -> Option<f64> + Sync,
    grid: &GridSpec,
) -> TriangleMesh {
    let [nx, ny, _] = grid.resolution;
    let coord = |axis: usize, idx: usize| {
        grid.bounds.min[axis]
            + grid.bounds.extent(axis) * idx as f64 / grid.resolution[axis] as f64
    };
    let heights: Vec<Option<f64>> = (0..=ny)
        .flat_map(|j| {
            (0..=nx).map(move |i| (i, j))
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(i, j)| {
            f(coord(0, i), coord(1, j)).filter(|z| z.is_finite())
        })
        .collect();

    let mut mesh = TriangleMesh::default();
    let mut vertex_of: Vec<Option<usize>> = vec![None; heights.len()];
    let gid = |i: usize, j: usize| i + (nx + 1) * j;
    for j in 0..ny {
        for i in 0..nx {
            let quad = [gid(i, j), gid(i + 1, j), gid(i + 1, j + 1), gid(i, j + 1)];
            if quad.iter().any(|&g| heights[g].is_none()) {
                continue;
            }
            let mut v = [0usize; 4];
            for (slot, &g) in v.iter_mut().zip(&quad) {
                *slot = *vertex_of[g].get_or_insert_with(|| {
                    let (gi, gj) = (g % (nx + 1), g / (nx + 1));
                    mesh.vertices
                        .push([coord(0, gi), coord(1, gj), heights[g].unwrap()]);
                    mesh.residuals.push(0.0);
                    mesh.vertices.len() - 1
                });
            }
            mesh.faces.push([v[0], v[1], v[2]]);
            mesh.faces.push([v[0], v[2], v[3]]);
        }
    }
    mesh
}

/// Triangulated parametric patch over the triangle `w0 + w1 + w2 = 1` of
/// barycentric weights; `point` may reject samples (holes are clipped).
pub fn mesh_barycentric(
    point: impl Fn([f64; 3]) -> Option<[f64; 3]> + Sync,
    n: usize,
) -> TriangleMesh {
    let coords: Vec<(usize, usize)> = (0..=n)
        .flat_map(|i| (0..=(n - i)).map(move |j| (i, j)))
        .collect();
    let samples: Vec<Option<[f64; 3]>> = coords
        .par_iter()
        .map(|&(i, j)| {
            let k = n - i - j;
            point([i as f64 / n as f64, j as f64 / n as f64, k as f64 / n as f64])
        })
        .collect();
    let index: HashMap<(usize, usize), usize> = coords
        .iter()
        .enumerate()
        .map(|(idx, &c)| (c, idx))
        .collect();

    let mut mesh = TriangleMesh::default();
    let mut vertex_of: Vec<Option<usize>> = vec![None; samples.len()];
    let emit = |mesh: &mut TriangleMesh, vertex_of: &mut Vec<Option<usize>>, tri: [(usize, usize); 3]| {
        let idxs: Vec<usize> = tri.iter().map(|c| index[c]).collect();
        if idxs.iter().any(|&s| samples[s].is_none()) {
            return;
        }
        let mut v = [0usize; 3];
        for (slot, &s) in v.iter_mut().zip(&idxs) {
            *slot = *vertex_of[s].get_or_insert_with(|| {
                mesh.vertices.push(samples[s].unwrap());
                mesh.residuals.push(0.0);
                mesh.vertices.len() - 1
            });
        }
        mesh.faces.push(v);
    };
    for i in 0..n {
        for j in 0..(n - i) {
            emit(&mut mesh, &mut vertex_of, [(i, j), (i + 1, j), (i, j + 1)]);
            if i + j + 1 < n {
                emit(&mut mesh, &mut vertex_of, [(i + 1, j), (i + 1, j + 1), (i, j + 1)]);
            }
        }
    }
    mesh
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Ply,
}

impl std::str::FromStr for MeshFormat {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(MeshFormat::Obj),
            "ply" => Ok(MeshFormat::Ply),
            other => Err(GeomError::InvalidParameter(format!(
                "unknown mesh format '{other}' (expected obj or ply)"
            ))),
        }
    }
}

/// Writes the mesh; OBJ uses 1-based `v`/`f` lines, PLY is ascii 1.0.
/// Output is byte-stable for identical input meshes.
pub fn export(mesh: &TriangleMesh, format: MeshFormat, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    match format {
        MeshFormat::Obj => {
            for v in &mesh.vertices {
                writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
            }
            for f in &mesh.faces {
                writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
            }
        }
        MeshFormat::Ply => {
            writeln!(w, "ply")?;
            writeln!(w, "format ascii 1.0")?;
            writeln!(w, "element vertex {}", mesh.vertices.len())?;
            writeln!(w, "property float x")?;
            writeln!(w, "property float y")?;
            writeln!(w, "property float z")?;
            writeln!(w, "element face {}", mesh.faces.len())?;
            writeln!(w, "property list uchar int vertex_indices")?;
            writeln!(w, "end_header")?;
            for v in &mesh.vertices {
                writeln!(w, "{} {} {}", v[0], v[1], v[2])?;
            }
            for f in &mesh.faces {
                writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_field() -> ScalarField {
        ScalarField::everywhere(
            |p| p.x * p.x + p.y * p.y + p.z * p.z - 1.0,
            Aabb::cube(2.0),
        )
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::with_default_tol(Aabb::cube(1.0), [4, 64, 64]).is_err());
        assert!(GridSpec::with_default_tol(Aabb::new([0.0; 3], [0.0, 1.0, 1.0]), [8, 8, 8]).is_err());
        assert!(GridSpec::new(Aabb::cube(1.0), [8, 8, 8], 0.0).is_err());
        assert!(GridSpec::with_default_tol(Aabb::cube(1.0), [8, 8, 8]).is_ok());
    }

    #[test]
    fn sphere_extraction() {
        let field = sphere_field();
        let grid = GridSpec::with_default_tol(field.bounds, [64, 64, 64]).unwrap();
        let mesh = extract_isosurface(&field, &grid).unwrap();
        assert!(!mesh.is_empty());
        assert!(mesh.check_indices());
        let cell = 4.0 / 64.0;
        for v in &mesh.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 1.0).abs() < 2.0 * cell, "radius {r}");
        }
        assert!(mesh.max_residual() <= grid.iso_tol);
    }

    #[test]
    fn no_root_means_empty_mesh() {
        let field = ScalarField::everywhere(|p| p.x * p.x + 1.0, Aabb::cube(1.0));
        let grid = GridSpec::with_default_tol(field.bounds, [8, 8, 8]).unwrap();
        assert!(extract_isosurface(&field, &grid).unwrap().is_empty());
    }

    #[test]
    fn refinement_does_not_worsen_residuals() {
        let field = sphere_field();
        let coarse = GridSpec::with_default_tol(field.bounds, [16, 16, 16]).unwrap();
        let fine = GridSpec::with_default_tol(field.bounds, [32, 32, 32]).unwrap();
        let mc = extract_isosurface(&field, &coarse).unwrap();
        let mf = extract_isosurface(&field, &fine).unwrap();
        assert!(mf.max_residual() <= mc.max_residual() * 1.1 + 1e-12);
    }

    #[test]
    fn invalid_cells_are_skipped() {
        let field = ScalarField::new(
            |p| p.z,
            |p| p.x < 0.0,
            Aabb::cube(1.0),
        );
        let grid = GridSpec::with_default_tol(field.bounds, [8, 8, 8]).unwrap();
        let mesh = extract_isosurface(&field, &grid).unwrap();
        assert!(!mesh.is_empty());
        for v in &mesh.vertices {
            assert!(v[0] < 0.0, "vertex in invalid half-space: {v:?}");
        }
    }

    #[test]
    fn graph_meshing() {
        let grid = GridSpec::with_default_tol(Aabb::cube(1.0), [8, 8, 8]).unwrap();
        let flat = mesh_graph(|_, _| Some(0.0), &grid);
        assert_eq!(flat.faces.len(), 2 * 8 * 8);
        assert!(flat.vertices.iter().all(|v| v[2] == 0.0));

        let clipped = mesh_graph(
            |x, y| (x * x + y * y < 0.5).then(|| x * y),
            &grid,
        );
        assert!(!clipped.is_empty());
        assert!(clipped.vertices.iter().all(|v| v[0] * v[0] + v[1] * v[1] < 0.5));

        let empty = mesh_graph(|_, _| None, &grid);
        assert!(empty.is_empty());
    }

    #[test]
    fn barycentric_meshing() {
        let mesh = mesh_barycentric(
            |w| Some([w[0], w[1], w[2]]),
            8,
        );
        assert_eq!(mesh.faces.len(), 64);
        assert!(mesh.check_indices());
    }

    #[test]
    fn export_round_trip() {
        let mut mesh = TriangleMesh::default();
        mesh.vertices = vec![[0.0, 0.0, 0.0], [1.0, 0.25, 0.0], [0.0, 1.0, 0.125]];
        mesh.faces = vec![[0, 1, 2]];
        mesh.residuals = vec![0.0; 3];
        let dir = tempfile::tempdir().unwrap();

        let obj_path = dir.path().join("tri.obj");
        export(&mesh, MeshFormat::Obj, &obj_path).unwrap();
        let text = std::fs::read_to_string(&obj_path).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 1);
        let parsed: Vec<[f64; 3]> = text
            .lines()
            .filter(|l| l.starts_with("v "))
            .map(|l| {
                let mut it = l.split_whitespace().skip(1);
                [0.0; 3].map(|_| it.next().unwrap().parse().unwrap())
            })
            .collect();
        assert_eq!(parsed, mesh.vertices);

        // Byte stability.
        let again = dir.path().join("tri2.obj");
        export(&mesh, MeshFormat::Obj, &again).unwrap();
        assert_eq!(std::fs::read(&obj_path).unwrap(), std::fs::read(&again).unwrap());

        let ply_path = dir.path().join("tri.ply");
        export(&mesh, MeshFormat::Ply, &ply_path).unwrap();
        let ply = std::fs::read_to_string(&ply_path).unwrap();
        assert!(ply.starts_with("ply\nformat ascii 1.0\n"));
        assert!(ply.contains("element vertex 3"));
        assert!(ply.contains("element face 1"));

        // Empty meshes still produce valid files.
        let empty_path = dir.path().join("empty.ply");
        export(&TriangleMesh::default(), MeshFormat::Ply, &empty_path).unwrap();
        assert!(std::fs::read_to_string(&empty_path)
            .unwrap()
            .contains("element vertex 0"));
    }
}
