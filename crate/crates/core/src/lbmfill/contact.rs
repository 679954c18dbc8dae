//! Sessile-drop contact angle measurement and the adhesion calibration sweep.
//!
//! A hemispherical drop of component a is placed on a one-layer solid wall
//! at `z = 0` (wall plane `z = 0.5`), periodic in x and y, closed at the top.
//! The angle is measured through the electrolyte from a sphere fitted to the
//! `rho_a = (max + min) / 2` iso-surface.

use nalgebra::{Matrix4, Vector4};

use super::laplace::flat_coexistence;
use super::state::{CellType, LatticeState};
use super::{LbmError, ShanChenParams};
use crate::voxelgrid::Dims;

const WALL_PLANE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessileSetup {
    /// lateral edge of the periodic box
    pub width: usize,
    /// number of lattice layers including the wall layer
    pub height: usize,
    pub drop_radius: f64,
    /// iso-surface points closer than this to the wall plane are not fitted
    pub wall_exclusion: f64,
    pub max_steps: usize,
    pub check_interval: usize,
    /// change of the fitted angle between checks, degrees
    pub tol_deg: f64,
    pub workers: usize,
}

impl Default for SessileSetup {
    fn default() -> Self {
        SessileSetup {
            width: 40,
            height: 26,
            drop_radius: 10.0,
            wall_exclusion: 3.0,
            max_steps: 20_000,
            check_interval: 500,
            tol_deg: 0.05,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactAngle {
    /// sphere-fit angle through the electrolyte, degrees
    pub theta_deg: f64,
    /// cap-geometry estimate `2 atan(2 h / c)`, degrees
    pub theta_cap_deg: f64,
    pub sphere_radius: f64,
    /// apex height above the wall plane
    pub cap_height: f64,
    /// base diameter from the wetted area of the first fluid layer
    pub base_diameter: f64,
    pub steps: usize,
}

/// Equilibrates a sessile drop with the adhesion in `params` and measures the
/// contact angle.
pub fn measure_contact_angle(
    params: &ShanChenParams,
    setup: &SessileSetup,
) -> Result<ContactAngle, LbmError> {
    params.validate()?;
    let (w, h) = (setup.width, setup.height);
    if setup.drop_radius < 3.0
        || 2.0 * setup.drop_radius + 4.0 > w as f64
        || setup.drop_radius + 4.0 > h as f64
    {
        return Err(LbmError::Precondition(format!(
            "drop radius {} does not fit a {w}x{w}x{h} box",
            setup.drop_radius
        )));
    }
    let dims = Dims::new(w, w, h);
    let cell_type = (0..dims.len())
        .map(|i| {
            if dims.coords(i)[2] == 0 {
                CellType::SolidInterface
            } else {
                CellType::Fluid
            }
        })
        .collect();
    let [major, minor] = flat_coexistence(params)?;
    let centre = [w as f64 / 2.0, w as f64 / 2.0, WALL_PLANE];
    let mut st = LatticeState::from_cells(dims, cell_type, [true, true, false], setup.workers, |i| {
        let c = dims.coords(i);
        let d2: f64 = (0..3).map(|k| (c[k] as f64 - centre[k]).powi(2)).sum();
        if d2.sqrt() <= setup.drop_radius {
            ([major, minor], [0.0; 3])
        } else {
            ([minor, major], [0.0; 3])
        }
    })?;

    let mut prev: Option<f64> = None;
    let mut steps = 0;
    while steps < setup.max_steps {
        st.run(params, setup.check_interval)?;
        steps += setup.check_interval;
        let m = measure(&st, setup.wall_exclusion)?;
        if let Some(p) = prev {
            if (m.theta_deg - p).abs() <= setup.tol_deg {
                return Ok(ContactAngle { steps, ..m });
            }
        }
        prev = Some(m.theta_deg);
    }
    Err(LbmError::NotConverged(format!(
        "contact angle still drifting after {steps} steps"
    )))
}

/// Contact angle for each adhesion contrast `g` in `sweep`, using
/// `G_ads_a = -g`, `G_ads_b = +g` (positive `g` attracts the electrolyte).
pub fn contact_angle_calibration(
    sweep: &[f64],
    params: &ShanChenParams,
    setup: &SessileSetup,
) -> Result<Vec<(f64, ContactAngle)>, LbmError> {
    sweep
        .iter()
        .map(|&g| measure_contact_angle(&params.with_adhesion(-g, g), setup).map(|a| (g, a)))
        .collect()
}

fn measure(st: &LatticeState, exclusion: f64) -> Result<ContactAngle, LbmError> {
    let dims = st.dims();
    let (lo, hi) = st.density_extremes();
    let level = 0.5 * (lo[0] + hi[0]);
    let phi = |x: usize, y: usize, z: usize| st.densities(dims.index(x, y, z))[0] - level;

    // iso-surface crossings along lattice links between fluid cells
    let mut pts: Vec<[f64; 3]> = Vec::new();
    let mut apex = f64::NEG_INFINITY;
    for z in 1..dims.nz {
        for y in 0..dims.ny {
            for x in 0..dims.nx {
                let p0 = phi(x, y, z);
                let links = [
                    ((x + 1) % dims.nx, y, z, 0),
                    (x, (y + 1) % dims.ny, z, 1),
                    (x, y, z + 1, 2),
                ];
                for (nx, ny, nz, axis) in links {
                    if nz >= dims.nz {
                        continue;
                    }
                    let p1 = phi(nx, ny, nz);
                    if (p0 > 0.0) == (p1 > 0.0) {
                        continue;
                    }
                    let t = p0 / (p0 - p1);
                    let mut p = [x as f64, y as f64, z as f64];
                    // periodic wrap: place the crossing next to the lower cell
                    p[axis] += t;
                    if axis == 2 {
                        apex = apex.max(p[2]);
                    }
                    if p[2] - WALL_PLANE >= exclusion {
                        pts.push(p);
                    }
                }
            }
        }
    }
    if pts.len() < 10 {
        return Err(LbmError::NotConverged(format!(
            "only {} iso-surface points above the wall",
            pts.len()
        )));
    }
    let (c, r) = fit_sphere(&pts).ok_or_else(|| {
        LbmError::NotConverged("degenerate sphere fit".into())
    })?;
    let cos = (-(c[2] - WALL_PLANE) / r).clamp(-1.0, 1.0);
    let theta_deg = cos.acos().to_degrees();

    let mut area = 0.0;
    for y in 0..dims.ny {
        for x in 0..dims.nx {
            if phi(x, y, 1) > 0.0 {
                area += 1.0;
            }
        }
    }
    let base_diameter = 2.0 * (area / std::f64::consts::PI).sqrt();
    let cap_height = apex - WALL_PLANE;
    let theta_cap_deg = if base_diameter > 0.0 {
        (2.0 * (2.0 * cap_height / base_diameter).atan()).to_degrees()
    } else {
        180.0
    };
    Ok(ContactAngle {
        theta_deg,
        theta_cap_deg,
        sphere_radius: r,
        cap_height,
        base_diameter,
        steps: 0,
    })
}

/// Algebraic least-squares sphere `|p|^2 + D x + E y + F z + G = 0`.
pub(crate) fn fit_sphere(pts: &[[f64; 3]]) -> Option<([f64; 3], f64)> {
    // shift to the centroid for conditioning
    let n = pts.len() as f64;
    let mut m = [0.0; 3];
    for p in pts {
        for k in 0..3 {
            m[k] += p[k] / n;
        }
    }
    let mut ata = Matrix4::<f64>::zeros();
    let mut atb = Vector4::<f64>::zeros();
    for p in pts {
        let q = [p[0] - m[0], p[1] - m[1], p[2] - m[2]];
        let row = Vector4::new(q[0], q[1], q[2], 1.0);
        let rhs = -(q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
        ata += row * row.transpose();
        atb += row * rhs;
    }
    let sol = ata.lu().solve(&atb)?;
    let c = [-sol[0] / 2.0, -sol[1] / 2.0, -sol[2] / 2.0];
    let r2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2] - sol[3];
    if !(r2 > 0.0) {
        return None;
    }
    Some(([c[0] + m[0], c[1] + m[1], c[2] + m[2]], r2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_fit_recovers_cap() {
        let (c, r) = ([3.0, -1.0, 2.5], 7.0);
        let mut pts = Vec::new();
        for i in 0..40 {
            for j in 0..20 {
                // upper cap only
                let th = 0.05 + 1.2 * j as f64 / 20.0;
                let ph = i as f64 * 0.157;
                pts.push([
                    c[0] + r * th.sin() * ph.cos(),
                    c[1] + r * th.sin() * ph.sin(),
                    c[2] + r * th.cos(),
                ]);
            }
        }
        let (fc, fr) = fit_sphere(&pts).unwrap();
        for k in 0..3 {
            assert!((fc[k] - c[k]).abs() < 1e-9);
        }
        assert!((fr - r).abs() < 1e-9);
    }

    #[test]
    fn rejects_oversized_drop() {
        let setup = SessileSetup {
            width: 16,
            ..SessileSetup::default()
        };
        assert!(matches!(
            measure_contact_angle(&ShanChenParams::default(), &setup),
            Err(LbmError::Precondition(_))
        ));
    }
}
