//! Command-line front end: translation distances, inverse problems,
//! Apollonius/bisector and triangular surface meshes, D-V cell membership
//! and the self-check suites.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

use translike::checks::{self, Config, Sense, Suite};
use translike::mesh::{export, MeshFormat};
use translike::model::{Aabb, AffinePoint, ApolloniusSpec, GeometryId, OrbitList};
use translike::util::format_sig;
use translike::{dv_classify, nil, product, slr, sol};

#[derive(Parser)]
#[command(
    name = "translike",
    about = "Translation curves, distances and translation-like surfaces in Nil, Sol, SL(2,R)~, S2xR and H2xR",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MeshOpts {
    /// Grid resolution per axis (isosurfaces) or per patch edge (products)
    #[arg(long, default_value_t = 64)]
    res: usize,
    /// Meshing box as xmin,xmax,ymin,ymax,zmin,zmax (defaults per geometry)
    #[arg(long, value_parser = parse_bounds, allow_hyphen_values = true)]
    bounds: Option<Aabb>,
    /// Output mesh file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mesh file format
    #[arg(long, default_value = "obj")]
    format: String,
}

#[derive(Subcommand)]
enum Command {
    /// Translation distance between two points
    Distance {
        #[arg(long)]
        geometry: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: AffinePoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        to: AffinePoint,
    },
    /// Translation-curve parameters reaching a point from the origin
    Inverse {
        #[arg(long)]
        geometry: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: AffinePoint,
    },
    /// Mesh an Apollonius surface (bisector for sigma = 1)
    Apollonius {
        #[arg(long)]
        geometry: String,
        /// First fixed point (defaults to the origin)
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p1: Option<AffinePoint>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p2: AffinePoint,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[command(flatten)]
        mesh: MeshOpts,
    },
    /// Mesh the translation-like triangular surface on E0, p2, p3
    Triangle {
        #[arg(long)]
        geometry: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p2: AffinePoint,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p3: AffinePoint,
        #[command(flatten)]
        mesh: MeshOpts,
    },
    /// Dirichlet-Voronoi cell membership against a finite orbit
    Dvcell {
        #[arg(long)]
        geometry: String,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        kernel: AffinePoint,
        /// JSON file holding a list of orbit points [[x,y,z], ...]
        #[arg(long)]
        orbit_file: PathBuf,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        query: AffinePoint,
    },
    /// Run the seeded verification suites
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
        /// Inject an artificial deviation (demonstrates that checks can fail)
        #[arg(long, default_value_t = 0.0, hide = true)]
        perturb: f64,
    },
}

fn parse_point(s: &str) -> Result<AffinePoint, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(format!("expected x,y,z but got {} components", parts.len()));
    }
    Ok(AffinePoint::new(parts[0], parts[1], parts[2]))
}

fn parse_bounds(s: &str) -> Result<Aabb, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if v.len() != 6 {
        return Err(format!(
            "expected xmin,xmax,ymin,ymax,zmin,zmax but got {} components",
            v.len()
        ));
    }
    let b = Aabb::new([v[0], v[2], v[4]], [v[1], v[3], v[5]]);
    if b.is_degenerate() {
        return Err("bounds are degenerate".into());
    }
    Ok(b)
}

fn parse_geometry(s: &str) -> Result<GeometryId> {
    s.parse::<GeometryId>()
        .with_context(|| format!("unknown geometry '{s}'"))
}

fn validate(geometry: GeometryId, points: &[&AffinePoint]) -> Result<()> {
    for p in points {
        if !p.is_valid(geometry) {
            bail!(
                "point ({}, {}, {}) lies outside the model of {geometry}",
                p.x,
                p.y,
                p.z
            );
        }
    }
    Ok(())
}

fn write_mesh(
    mesh: &translike::TriangleMesh,
    opts: &MeshOpts,
    default_name: &str,
) -> Result<()> {
    let format: MeshFormat = opts.format.parse()?;
    let ext = match format {
        MeshFormat::Obj => "obj",
        MeshFormat::Ply => "ply",
    };
    let path = opts
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{default_name}.{ext}")));
    export(mesh, format, &path)?;
    println!(
        "wrote {} vertices / {} faces to {}",
        mesh.vertices.len(),
        mesh.faces.len(),
        path.display()
    );
    println!("max vertex residual: {:.6e}", mesh.max_residual());
    Ok(())
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Distance { geometry, from, to } => {
            let g = parse_geometry(&geometry)?;
            let d = translike::distance(g, &from, &to)?;
            println!("{}", format_sig(d, 12));
        }
        Command::Inverse { geometry, point } => {
            let g = parse_geometry(&geometry)?;
            validate(g, &[&point])?;
            let json = match g {
                GeometryId::Nil => serde_json::json!({
                    "geometry": g.to_string(),
                    "params": nil::inverse(&point)?,
                }),
                GeometryId::Sol => serde_json::json!({
                    "geometry": g.to_string(),
                    "params": sol::inverse(&point)?,
                }),
                GeometryId::Slr => serde_json::json!({
                    "geometry": g.to_string(),
                    "params": slr::inverse(&point)?,
                }),
                GeometryId::S2xR | GeometryId::H2xR => serde_json::json!({
                    "geometry": g.to_string(),
                    "params": product::inverse(g, &point)?,
                }),
            };
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::Apollonius {
            geometry,
            p1,
            p2,
            sigma,
            mesh,
        } => {
            let g = parse_geometry(&geometry)?;
            let p1 = p1.unwrap_or_else(|| AffinePoint::origin(g));
            let spec = ApolloniusSpec::new(p1, p2, sigma)?;
            let field = translike::apollonius_field(g, &spec)?;
            let bounds = mesh.bounds.unwrap_or(field.bounds);
            let grid = translike::mesh::GridSpec::with_default_tol(
                bounds,
                [mesh.res, mesh.res, mesh.res],
            )?;
            let m = translike::mesh::extract_isosurface(&field, &grid)?;
            if m.is_empty() {
                bail!("the surface does not intersect the meshing box");
            }
            write_mesh(&m, &mesh, &format!("{g}-apollonius"))?;
        }
        Command::Triangle {
            geometry,
            p2,
            p3,
            mesh,
        } => {
            let g = parse_geometry(&geometry)?;
            let tri = translike::triangle_surface(g, &p2, &p3)?;
            let bounds = mesh.bounds.unwrap_or(tri.field().bounds);
            let m = tri.mesh(bounds, [mesh.res, mesh.res, mesh.res], 1e-6)?;
            if m.is_empty() {
                bail!("the surface does not intersect the meshing box");
            }
            write_mesh(&m, &mesh, &format!("{g}-triangle"))?;
        }
        Command::Dvcell {
            geometry,
            kernel,
            orbit_file,
            query,
        } => {
            let g = parse_geometry(&geometry)?;
            let raw = std::fs::read_to_string(&orbit_file)
                .with_context(|| format!("reading {}", orbit_file.display()))?;
            let images: Vec<AffinePoint> =
                serde_json::from_str(&raw).context("orbit file must be a JSON list of points")?;
            let orbit = OrbitList::new(kernel, images)?;
            let (member, idx) = dv_classify(&query, &orbit, g)?;
            println!("member: {member}");
            println!("minimizing image index: {idx}");
        }
        Command::Check {
            suite,
            seed,
            perturb,
        } => {
            let suite: Suite = suite.parse()?;
            let cfg = Config { seed, perturb };
            let reports = checks::run_suite(suite, &cfg);
            let mut failures = 0usize;
            for r in &reports {
                let rel = match r.sense {
                    Sense::AtMost => "<=",
                    Sense::AtLeast => ">=",
                };
                let status = if r.pass() { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] {:<42} {:>12.5e} {rel} {:.1e}",
                    r.name, r.value, r.tol
                );
                if !r.pass() {
                    failures += 1;
                }
            }
            println!(
                "{} checks, {} failed",
                reports.len(),
                failures
            );
            if failures > 0 {
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
