//! Lattice/physical unit conversion and the one-parameter calibration of the
//! network model against a lattice Boltzmann pressure-saturation curve.
//!
//! Length is anchored on the median pore diameter, time on the kinematic
//! viscosity and pressure on the surface tension (Laplace scaling
//! `p ~ sigma / L`).

use thiserror::Error;

use crate::curve::PressureSaturationCurve;

#[derive(Debug, Error, PartialEq)]
pub enum UnitError {
    #[error("input {0} must be finite and > 0 (got {1})")]
    NonPositiveInput(&'static str, f64),
    #[error("saturation ranges overlap by {0:.3}, need at least 0.3")]
    NoOverlap(f64),
    #[error("reference curve needs at least two distinct pressures")]
    DegenerateCurve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    /// m per lattice length
    pub dx: f64,
    /// s per lattice step
    pub dt: f64,
    /// Pa per lattice pressure unit
    pub pressure_scale: f64,
}

/// `d50_phys` in µm, `sigma_phys` in N/m, `nu_phys` in m²/s; lattice inputs
/// in lattice units.
pub fn build_units(
    d50_phys: f64,
    d50_lat: f64,
    sigma_phys: f64,
    sigma_lat: f64,
    nu_phys: f64,
    nu_lat: f64,
) -> Result<UnitSystem, UnitError> {
    for (name, v) in [
        ("d50_phys", d50_phys),
        ("d50_lat", d50_lat),
        ("sigma_phys", sigma_phys),
        ("sigma_lat", sigma_lat),
        ("nu_phys", nu_phys),
        ("nu_lat", nu_lat),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(UnitError::NonPositiveInput(name, v));
        }
    }
    let dx = d50_phys * 1e-6 / d50_lat;
    Ok(UnitSystem {
        dx,
        dt: nu_lat * dx * dx / nu_phys,
        pressure_scale: sigma_phys / sigma_lat / dx,
    })
}

impl UnitSystem {
    pub fn pressure_to_physical(&self, p_lat: f64) -> f64 {
        p_lat * self.pressure_scale
    }

    pub fn pressure_to_lattice(&self, p_pa: f64) -> f64 {
        p_pa / self.pressure_scale
    }

    pub fn length_to_physical(&self, l_lat: f64) -> f64 {
        l_lat * self.dx
    }

    pub fn length_to_lattice(&self, l_m: f64) -> f64 {
        l_m / self.dx
    }

    pub fn time_to_physical(&self, steps: f64) -> f64 {
        steps * self.dt
    }

    pub fn time_to_lattice(&self, t_s: f64) -> f64 {
        t_s / self.dt
    }
}

/// Lattice curve to Pa; saturations are copied unchanged.
pub fn convert_curve(curve: &PressureSaturationCurve, units: &UnitSystem) -> PressureSaturationCurve {
    curve.scale_pressure(units.pressure_scale)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// factor applied to network pressures
    pub pressure_scale_correction: f64,
    /// RMS saturation mismatch at the optimum
    pub residual: f64,
}

pub const K_MIN: f64 = 1e-2;
pub const K_MAX: f64 = 1e2;
pub const PROBES: usize = 64;

/// Fits `k` so that the network curve with pressures multiplied by `k`
/// matches the reference (lattice Boltzmann) curve.
///
/// The objective is the RMS saturation difference of the two right-continuous
/// staircases, integrated exactly over the reference pressure window (the
/// union of both pressure grids gives the breakpoints). Curves are held
/// constant beyond their last sample and at their first sample below it.
///
/// The squared objective is piecewise linear in `k` between values where a
/// scaled network breakpoint crosses a reference breakpoint or a window edge,
/// so those crossings are evaluated alongside 64 log-spaced probes over
/// `[1e-2, 1e2]`. Golden-section search in `log k` then refines the bracket
/// around the best candidate.
pub fn calibrate_pnm(
    lbm: &PressureSaturationCurve,
    pnm: &PressureSaturationCurve,
) -> Result<Calibration, UnitError> {
    let overlap = saturation_overlap(lbm, pnm);
    if !(overlap >= 0.3) {
        return Err(UnitError::NoOverlap(overlap.max(0.0)));
    }
    let (lo, hi) = match (lbm.points().first(), lbm.points().last()) {
        (Some(a), Some(b)) if b.0 > a.0 => (a.0, b.0),
        _ => return Err(UnitError::DegenerateCurve),
    };
    let f = |k: f64| rms_mismatch(lbm, pnm, k, lo, hi);

    let probe = |i: usize| {
        (K_MIN.ln() + (K_MAX.ln() - K_MIN.ln()) * i as f64 / (PROBES - 1) as f64).exp()
    };
    let mut ks: Vec<f64> = (0..PROBES).map(probe).collect();
    let mut net: Vec<f64> = pnm.pressures().filter(|p| *p != 0.0).collect();
    net.dedup();
    for r in lbm.pressures() {
        for &p in &net {
            let k = r / p;
            if (K_MIN..=K_MAX).contains(&k) {
                ks.push(k);
            }
        }
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    let values: Vec<f64> = ks.iter().map(|&k| f(k)).collect();
    let best = (0..ks.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("candidates");
    let mut a = ks[best.saturating_sub(1)].ln();
    let mut b = ks[(best + 1).min(ks.len() - 1)].ln();

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c.exp()), f(d.exp()));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    let k_gs = (0.5 * (a + b)).exp();
    let r_gs = f(k_gs);
    let (k, residual) = if r_gs < values[best] {
        (k_gs, r_gs)
    } else {
        (ks[best], values[best])
    };
    Ok(Calibration {
        pressure_scale_correction: k,
        residual,
    })
}

fn saturation_overlap(a: &PressureSaturationCurve, b: &PressureSaturationCurve) -> f64 {
    let range = |c: &PressureSaturationCurve| {
        c.saturations()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)))
    };
    let (a0, a1) = range(a);
    let (b0, b1) = range(b);
    a1.min(b1) - a0.max(b0)
}

/// RMS of `S_ref(p) - S_net(p / k)` over `[lo, hi]`.
pub fn rms_mismatch(
    reference: &PressureSaturationCurve,
    network: &PressureSaturationCurve,
    k: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let scaled = network.scale_pressure(k);
    let mut breaks: Vec<f64> = reference
        .pressures()
        .chain(scaled.pressures())
        .filter(|&p| p > lo && p < hi)
        .collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        let diff = reference.step_at(w[0]) - scaled.step_at(w[0]);
        acc += diff * diff * (w[1] - w[0]);
    }
    (acc / (hi - lo)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_scaling() {
        let u = build_units(20.0, 20.0, 0.05, 0.05, 1e-6, 1e-6).unwrap();
        assert!((u.dx - 1e-6).abs() < 1e-18);
        assert!((u.pressure_scale - 1e6).abs() < 1e-6);
        assert!(build_units(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(build_units(1.0, 1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn time_scales_with_length_squared() {
        let a = build_units(10.0, 8.0, 0.03, 0.2, 3e-6, 1.0 / 6.0).unwrap();
        let b = build_units(20.0, 8.0, 0.03, 0.2, 3e-6, 1.0 / 6.0).unwrap();
        assert!((b.dx / a.dx - 2.0).abs() < 1e-12);
        assert!((b.dt / a.dt - 4.0).abs() < 1e-12);
        assert!((b.pressure_scale / a.pressure_scale - 0.5).abs() < 1e-12);
    }

    #[test]
    fn self_fit() {
        let c = PressureSaturationCurve::new(vec![
            (100.0, 0.1),
            (250.0, 0.3),
            (400.0, 0.7),
            (900.0, 1.0),
        ])
        .unwrap();
        let cal = calibrate_pnm(&c, &c).unwrap();
        assert!((cal.pressure_scale_correction - 1.0).abs() < 1e-3);
        assert!(cal.residual < 1e-4, "{}", cal.residual);
        let half = calibrate_pnm(&c, &c.scale_pressure(2.0)).unwrap();
        assert!((half.pressure_scale_correction - 0.5).abs() < 5e-3);
    }

    #[test]
    fn disjoint_ranges() {
        let a = PressureSaturationCurve::new(vec![(1.0, 0.0), (2.0, 0.2)]).unwrap();
        let b = PressureSaturationCurve::new(vec![(1.0, 0.5), (2.0, 1.0)]).unwrap();
        assert!(matches!(calibrate_pnm(&a, &b), Err(UnitError::NoOverlap(_))));
    }
}
