//! Independent verification machinery: RK4 integration of the defining
//! translation-curve ODEs and a brute-force shooting oracle for distances.
//!
//! Nothing here reuses the closed-form curves: tangent transport is driven by
//! the translation matrices alone, so agreement with the geometry modules is
//! meaningful evidence.

use nalgebra::{RowVector4, Vector3};
use rayon::prelude::*;

use crate::model::{AffinePoint, Collineation, GeomError, GeometryId, Result};
use crate::{nil, product, slr, sol};

const MAX_STEPS: f64 = 1e7;

/// A translation-curve initial value problem: unit Euclidean tangent at the
/// origin, integration step and curve length.
#[derive(Debug, Clone, Copy)]
pub struct OdeSpec {
    pub geometry: GeometryId,
    pub tangent: Vector3<f64>,
    pub step: f64,
    pub length: f64,
}

impl OdeSpec {
    pub fn new(geometry: GeometryId, tangent: Vector3<f64>, step: f64, length: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1e-3) {
            return Err(GeomError::InvalidParameter(format!(
                "step must be in (0, 1e-3], got {step}"
            )));
        }
        if !(length > 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "length must be positive, got {length}"
            )));
        }
        if (tangent.norm() - 1.0).abs() > 1e-9 {
            return Err(GeomError::InvalidParameter(
                "tangent must have unit norm".into(),
            ));
        }
        Ok(OdeSpec {
            geometry,
            tangent,
            step,
            length,
        })
    }
}

/// Translation carrying the origin of the geometry to `p`.
fn translation_to(geometry: GeometryId, p: &AffinePoint) -> Result<Collineation> {
    match geometry {
        GeometryId::Nil => Ok(nil::translation(p)),
        GeometryId::Sol => Ok(sol::translation(p)),
        GeometryId::Slr => Ok(slr::translation(p)),
        GeometryId::S2xR | GeometryId::H2xR => product::pullback(geometry, p)?.inverse(),
    }
}

/// Velocity of the translation curve at `p`: the initial tangent transported
/// by the translation taking the origin to `p`.
fn velocity(geometry: GeometryId, tangent: &Vector3<f64>, p: &AffinePoint) -> Result<Vector3<f64>> {
    let t = translation_to(geometry, p)?;
    let d = RowVector4::new(0.0, tangent.x, tangent.y, tangent.z) * t.matrix();
    Ok(Vector3::new(d[1], d[2], d[3]))
}

fn rk4_affine(
    geometry: GeometryId,
    tangent: &Vector3<f64>,
    p: &AffinePoint,
    h: f64,
) -> Result<AffinePoint> {
    let at = |v: Vector3<f64>| -> Result<Vector3<f64>> {
        velocity(geometry, tangent, &AffinePoint::from_vec(v))
    };
    let y = p.vec();
    let k1 = at(y)?;
    let k2 = at(y + k1 * (h / 2.0))?;
    let k3 = at(y + k2 * (h / 2.0))?;
    let k4 = at(y + k3 * h)?;
    Ok(AffinePoint::from_vec(
        y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0),
    ))
}

fn slr_rate(tangent: &Vector3<f64>, c: &RowVector4<f64>) -> RowVector4<f64> {
    RowVector4::new(0.0, tangent.x, tangent.y, tangent.z) * slr::tangent_matrix_raw(c)
}

fn rk4_slr(tangent: &Vector3<f64>, c: &RowVector4<f64>, h: f64) -> RowVector4<f64> {
    let k1 = slr_rate(tangent, c);
    let k2 = slr_rate(tangent, &(c + k1 * (h / 2.0)));
    let k3 = slr_rate(tangent, &(c + k2 * (h / 2.0)));
    let k4 = slr_rate(tangent, &(c + k3 * h));
    c + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

fn normalize_slr(c: &RowVector4<f64>) -> Result<AffinePoint> {
    if c[0].abs() < 1e-9 {
        return Err(GeomError::OutOfChart);
    }
    Ok(AffinePoint::new(c[1] / c[0], c[2] / c[0], c[3] / c[0]))
}

fn integrate_raw(
    geometry: GeometryId,
    tangent: &Vector3<f64>,
    step: f64,
    length: f64,
    truncate_at_chart_exit: bool,
) -> Result<Vec<AffinePoint>> {
    let n = (length / step).ceil();
    if n > MAX_STEPS {
        return Err(GeomError::TooManySteps);
    }
    let n = n as usize;
    let mut out = Vec::with_capacity(n + 1);
    match geometry {
        GeometryId::Slr => {
            let mut c = RowVector4::new(1.0, 0.0, 0.0, 0.0);
            out.push(normalize_slr(&c)?);
            let mut t = 0.0;
            for _ in 0..n {
                let h = step.min(length - t);
                let next = rk4_slr(tangent, &c, h);
                if next[0] <= 1e-9 {
                    if truncate_at_chart_exit {
                        break;
                    }
                    return Err(GeomError::OutOfChart);
                }
                c = next;
                t += h;
                out.push(normalize_slr(&c)?);
            }
        }
        _ => {
            let mut p = AffinePoint::origin(geometry);
            out.push(p);
            let mut t = 0.0;
            for _ in 0..n {
                let h = step.min(length - t);
                p = rk4_affine(geometry, tangent, &p, h)?;
                t += h;
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Classical RK4 sampling of the translation curve defined by `spec`;
/// samples are spaced by `spec.step` along arclength.
pub fn integrate_translation_curve(spec: &OdeSpec) -> Result<Vec<AffinePoint>> {
    integrate_raw(spec.geometry, &spec.tangent, spec.step, spec.length, false)
}

fn direction_tangent(geometry: GeometryId, a: f64, b: f64) -> Vector3<f64> {
    match geometry {
        // (phi, theta) geographic angles.
        GeometryId::Nil | GeometryId::Sol => {
            Vector3::new(b.cos() * a.cos(), b.cos() * a.sin(), b.sin())
        }
        // (lambda, alpha) with the fibre component first.
        GeometryId::Slr => Vector3::new(b.sin(), b.cos() * a.cos(), b.cos() * a.sin()),
        // (u, v) with the fibre component first.
        GeometryId::S2xR | GeometryId::H2xR => {
            Vector3::new(b.sin(), b.cos() * a.cos(), b.cos() * a.sin())
        }
    }
}

/// Closest approach of one integrated curve to `target`: squared-distance
/// minimum over samples, parabola-refined, returning `(error, arclength)`.
fn closest_approach(
    geometry: GeometryId,
    tangent: &Vector3<f64>,
    step: f64,
    length: f64,
    target: &AffinePoint,
) -> (f64, f64) {
    let Ok(samples) = integrate_raw(geometry, tangent, step, length, true) else {
        return (f64::INFINITY, 0.0);
    };
    let d2: Vec<f64> = samples
        .iter()
        .map(|p| p.dist_euclid(target).powi(2))
        .collect();
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for (i, &v) in d2.iter().enumerate() {
        if v < best {
            best = v;
            best_i = i;
        }
    }
    if best_i == 0 || best_i + 1 >= d2.len() {
        return (best.sqrt(), best_i as f64 * step);
    }
    // Refine by projecting onto the local tangent: the miss is the component
    // of `target - sample` perpendicular to the curve. This stays accurate
    // (O(curvature * step^2)) where a parabola fit of d^2 floors out at
    // O(step^1.5) for near-zero minima.
    let chord = samples[best_i + 1].vec() - samples[best_i - 1].vec();
    let chord_len = chord.norm();
    if chord_len < 1e-300 {
        return (best.sqrt(), best_i as f64 * step);
    }
    let dir = chord / chord_len;
    let w = target.vec() - samples[best_i].vec();
    let along = w.dot(&dir);
    let err = (w - dir * along).norm();
    // Arclength runs 2*step across the chord.
    let t = best_i as f64 * step + along * (2.0 * step / chord_len);
    (err, t)
}

/// Brute-force translation distance from the origin to `p`: a coarse grid of
/// shooting directions followed by coordinate descent, returning the
/// arclength of the best-fitting curve.
pub fn oracle_distance(geometry: GeometryId, p: &AffinePoint) -> Result<f64> {
    if !p.is_valid(geometry) {
        return Err(GeomError::InvalidPoint(p.x, p.y, p.z, geometry));
    }
    use std::f64::consts::{FRAC_PI_2, PI};
    let origin = AffinePoint::origin(geometry);
    if p.dist_euclid(&origin) == 0.0 {
        return Ok(0.0);
    }
    // Search-length cap; for the sphere it is tight enough to exclude the
    // long way around the base.
    let reach = if geometry == GeometryId::S2xR {
        let q = p.x * p.x + p.y * p.y + p.z * p.z;
        PI.hypot(0.5 * q.ln()) + 0.3
    } else {
        4.0 + 2.0 * p.dist_euclid(&origin)
    };
    let eval = |a: f64, b: f64, step: f64| {
        closest_approach(geometry, &direction_tangent(geometry, a, b), step, reach, p)
    };

    let (na, nb) = (64, 32);
    let grid: Vec<(f64, f64)> = (0..na)
        .flat_map(|i| {
            (0..=nb).map(move |j| {
                (
                    -PI + 2.0 * PI * (i as f64 + 0.5) / na as f64,
                    -FRAC_PI_2 + PI * j as f64 / nb as f64,
                )
            })
        })
        .collect();
    let (mut a, mut b, _) = grid
        .par_iter()
        .map(|&(a, b)| {
            let (err, _) = eval(a, b, 2e-2);
            (a, b, err)
        })
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("grid is nonempty");

    let mut h = 0.12;
    let mut best = eval(a, b, 4e-3);
    for _ in 0..50 {
        let candidates = [
            (a + h, b),
            (a - h, b),
            (a, (b + h).min(FRAC_PI_2)),
            (a, (b - h).max(-FRAC_PI_2)),
        ];
        let scored: Vec<_> = candidates
            .par_iter()
            .map(|&(ca, cb)| (ca, cb, eval(ca, cb, 4e-3)))
            .collect();
        let mut improved = false;
        for (ca, cb, score) in scored {
            if score.0 < best.0 {
                best = score;
                a = ca;
                b = cb;
                improved = true;
            }
        }
        if !improved {
            h *= 0.7;
        }
    }
    // Two-stage fine evaluation: locate the closest approach at the working
    // step, then re-integrate only up to that arclength with a ten times
    // finer step, which shrinks the parabola-fit floor of the miss distance.
    let fine_eval = |a: f64, b: f64| {
        let (coarse_err, t_guess) = eval(a, b, 1e-3);
        if !coarse_err.is_finite() {
            return (coarse_err, t_guess);
        }
        let fine_len = (t_guess + 0.02).clamp(0.05, reach);
        let fine = closest_approach(
            geometry,
            &direction_tangent(geometry, a, b),
            1e-4,
            fine_len,
            p,
        );
        if fine.0.is_finite() && fine.0 <= coarse_err {
            fine
        } else {
            (coarse_err, t_guess)
        }
    };
    // Newton polish of err^2 over both angles jointly; the squared miss
    // distance is a smooth, possibly cross-coupled quadratic near the
    // optimum even though the miss distance itself is V-shaped there.
    // Moves are kept only when they actually improve.
    let mut delta = 3e-4;
    let f = |a: f64, b: f64| {
        let (e, _) = fine_eval(a, b);
        e * e
    };
    let mut f_best = f(a, b);
    for _ in 0..8 {
        if f_best < 1e-18 {
            break;
        }
        let (fpa, fma) = (f(a + delta, b), f(a - delta, b));
        let (fpb, fmb) = (f(a, b + delta), f(a, b - delta));
        let fab = f(a + delta, b + delta);
        let gx = (fpa - fma) / (2.0 * delta);
        let gy = (fpb - fmb) / (2.0 * delta);
        let hxx = (fpa - 2.0 * f_best + fma) / (delta * delta);
        let hyy = (fpb - 2.0 * f_best + fmb) / (delta * delta);
        let hxy = (fab - fpa - fpb + f_best) / (delta * delta);
        let det = hxx * hyy - hxy * hxy;
        let (sa, sb) = if det > 0.0 && hxx > 0.0 {
            ((hxy * gy - hyy * gx) / det, (hxy * gx - hxx * gy) / det)
        } else if hxx > 0.0 && hyy > 0.0 {
            (-gx / hxx, -gy / hyy)
        } else {
            delta *= 0.1;
            if delta < 1e-7 {
                break;
            }
            continue;
        };
        // Backtracking line search along the Newton direction.
        let clamp10 = 10.0 * delta;
        let mut improved = false;
        let mut scale = 1.0;
        for _ in 0..4 {
            let ca = a + (sa * scale).clamp(-clamp10, clamp10);
            let cb = (b + (sb * scale).clamp(-clamp10, clamp10)).clamp(-FRAC_PI_2, FRAC_PI_2);
            let f_new = f(ca, cb);
            if f_new < f_best {
                f_best = f_new;
                a = ca;
                b = cb;
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            // Shrink the probe scale: near the valley floor a smaller model
            // window resolves the remaining signal better.
            delta *= 0.1;
            if delta < 1e-7 {
                break;
            }
        }
    }
    let (err, t) = fine_eval(a, b);
    if err > 1e-6 {
        return Err(GeomError::Unreachable(err));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn ode_spec_validation() {
        let t = Vector3::new(1.0, 0.0, 0.0);
        assert!(OdeSpec::new(GeometryId::Nil, t, 1e-2, 1.0).is_err());
        assert!(OdeSpec::new(GeometryId::Nil, t * 2.0, 1e-3, 1.0).is_err());
        assert!(OdeSpec::new(GeometryId::Nil, t, 1e-3, -1.0).is_err());
        assert!(OdeSpec::new(GeometryId::Nil, t, 1e-4, 1.0).is_ok());
    }

    #[test]
    fn refuses_too_many_steps() {
        let spec = OdeSpec::new(GeometryId::Nil, Vector3::new(1.0, 0.0, 0.0), 1e-3, 1e6);
        assert!(matches!(
            integrate_translation_curve(&spec.unwrap()),
            Err(GeomError::TooManySteps)
        ));
    }

    #[test]
    fn nil_axis_curve() {
        let spec =
            OdeSpec::new(GeometryId::Nil, Vector3::new(1.0, 0.0, 0.0), 1e-3, 1.0).unwrap();
        let pts = integrate_translation_curve(&spec).unwrap();
        let end = pts.last().unwrap();
        assert!(end.dist_euclid(&AffinePoint::new(1.0, 0.0, 0.0)) < 1e-10);
    }

    #[test]
    fn sol_fibre_curve() {
        let spec =
            OdeSpec::new(GeometryId::Sol, Vector3::new(0.0, 0.0, 1.0), 1e-3, 0.7).unwrap();
        let end = *integrate_translation_curve(&spec).unwrap().last().unwrap();
        assert!(end.dist_euclid(&AffinePoint::new(0.0, 0.0, 0.7)) < 1e-10);
    }

    #[test]
    fn integrator_is_fourth_order() {
        // Halving the step should shrink the closed-form deviation ~16x; we
        // require at least 8x on a curved Sol example.
        let tangent = Vector3::new(0.5f64.cos() * 0.3f64.cos(), 0.5f64.cos() * 0.3f64.sin(), 0.5f64.sin());
        let tangent = tangent.normalize();
        let params = crate::sol::inverse(&{
            let spec = OdeSpec::new(GeometryId::Sol, tangent, 1e-3, 1.0).unwrap();
            *integrate_translation_curve(&spec).unwrap().last().unwrap()
        })
        .unwrap();
        let exact = crate::sol::curve_point(&params, params.t);
        let err_at = |step: f64| {
            let spec = OdeSpec::new(GeometryId::Sol, tangent, step, 1.0).unwrap();
            integrate_translation_curve(&spec)
                .unwrap()
                .last()
                .unwrap()
                .dist_euclid(&exact)
        };
        let (e1, e2) = (err_at(8e-4), err_at(4e-4));
        assert!(e1 / e2 > 8.0 || e1 < 1e-13, "ratio {} ({e1} vs {e2})", e1 / e2);
    }

    #[test]
    fn shooting_examples() {
        let d = oracle_distance(GeometryId::Nil, &AffinePoint::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - 1.0).abs() < 1e-5, "nil {d}");
        let d = oracle_distance(GeometryId::Sol, &AffinePoint::new(3.0, 4.0, 0.0)).unwrap();
        assert!((d - 5.0).abs() < 1e-5, "sol {d}");
        let d = oracle_distance(GeometryId::Slr, &AffinePoint::new(1.0, 0.0, 0.0)).unwrap();
        assert!((d - FRAC_PI_4).abs() < 1e-5, "slr {d}");
    }
}
