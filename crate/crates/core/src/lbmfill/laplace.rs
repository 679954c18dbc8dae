//! Laplace-law droplet test: a droplet of component a in a periodic box of
//! component b. The lattice surface tension follows from `dp = 2 sigma / R`,
//! with `R` the equimolar radius of component a.

use super::state::{CellType, LatticeState};
use super::{LbmError, ShanChenParams};
use crate::voxelgrid::Dims;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceOptions {
    /// box edge; defaults to `4 R` rounded up to an even number
    pub domain: Option<usize>,
    pub max_steps: usize,
    pub check_interval: usize,
    /// relative change of the pressure jump between checks
    pub tol: f64,
    pub workers: usize,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        LaplaceOptions {
            domain: None,
            max_steps: 20_000,
            check_interval: 250,
            tol: 1e-4,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceResult {
    /// radius requested at initialisation
    pub initial_radius: f64,
    /// equimolar radius of the equilibrated droplet
    pub radius: f64,
    pub p_inside: f64,
    pub p_outside: f64,
    pub delta_p: f64,
    /// `delta_p * radius / 2`
    pub sigma: f64,
    pub steps: usize,
}

/// Equilibrates a droplet of radius `radius` and measures the surface tension.
pub fn laplace_test(
    radius: f64,
    params: &ShanChenParams,
    opts: &LaplaceOptions,
) -> Result<LaplaceResult, LbmError> {
    params.validate()?;
    if !(radius >= 2.0) {
        return Err(LbmError::Precondition(format!(
            "droplet radius {radius} too small"
        )));
    }
    let min_edge = (4.0 * radius).ceil() as usize;
    let n = opts.domain.unwrap_or(min_edge + min_edge % 2);
    if n < min_edge {
        return Err(LbmError::Precondition(format!(
            "domain {n} smaller than 4R = {min_edge}"
        )));
    }
    let dims = Dims::cube(n);
    let centre = (n as f64 - 1.0) / 2.0;
    let [major, minor] = flat_coexistence(params)?;
    let mut st = LatticeState::from_cells(
        dims,
        vec![CellType::Fluid; dims.len()],
        [true; 3],
        opts.workers,
        |cell| {
            let c = dims.coords(cell);
            let d2: f64 = c.iter().map(|&v| (v as f64 - centre).powi(2)).sum();
            if d2.sqrt() <= radius {
                ([major, minor], [0.0; 3])
            } else {
                ([minor, major], [0.0; 3])
            }
        },
    )?;

    let mut prev: Option<f64> = None;
    let mut steps = 0;
    while steps < opts.max_steps {
        st.run(params, opts.check_interval)?;
        steps += opts.check_interval;
        let m = measure(&st, params, centre);
        if m.contrast < 0.1 * params.rho_major {
            return Err(LbmError::NotConverged(format!(
                "no droplet interface (density contrast {:.3e})",
                m.contrast
            )));
        }
        if let Some(p) = prev {
            if (m.delta_p - p).abs() <= opts.tol * m.delta_p.abs() {
                return Ok(LaplaceResult {
                    initial_radius: radius,
                    radius: m.radius,
                    p_inside: m.p_in,
                    p_outside: m.p_out,
                    delta_p: m.delta_p,
                    sigma: 0.5 * m.delta_p * m.radius,
                    steps,
                });
            }
        }
        prev = Some(m.delta_p);
    }
    Err(LbmError::NotConverged(format!(
        "pressure jump still drifting after {steps} steps"
    )))
}

struct Measurement {
    radius: f64,
    p_in: f64,
    p_out: f64,
    delta_p: f64,
    contrast: f64,
}

fn measure(st: &LatticeState, params: &ShanChenParams, centre: f64) -> Measurement {
    let dims = st.dims();
    // first pass: provisional radius from the electrolyte-majority volume
    let wet = (0..dims.len()).filter(|&c| st.is_electrolyte(c)).count();
    let r0 = (3.0 * wet as f64 / (4.0 * std::f64::consts::PI)).cbrt();
    let half = dims.nx as f64 / 2.0;
    let inner = 0.5 * r0;
    let outer = r0 + 0.5 * (half - r0);
    let (mut pin, mut nin, mut pout, mut nout) = (0.0, 0usize, 0.0, 0usize);
    let (mut ain, mut aout, mut mass) = (0.0, 0.0, 0.0);
    for cell in 0..dims.len() {
        let c = dims.coords(cell);
        let d = c
            .iter()
            .map(|&v| (v as f64 - centre).powi(2))
            .sum::<f64>()
            .sqrt();
        let r = st.densities(cell);
        mass += r[0];
        if d <= inner {
            pin += params.pressure(r);
            ain += r[0];
            nin += 1;
        } else if d >= outer {
            pout += params.pressure(r);
            aout += r[0];
            nout += 1;
        }
    }
    let (p_in, p_out) = (pin / nin.max(1) as f64, pout / nout.max(1) as f64);
    let (a_in, a_out) = (ain / nin.max(1) as f64, aout / nout.max(1) as f64);
    // equimolar dividing surface of component a
    let excess = (mass - a_out * dims.len() as f64) / (a_in - a_out);
    let radius = if excess > 0.0 {
        (3.0 * excess / (4.0 * std::f64::consts::PI)).cbrt()
    } else {
        r0
    };
    Measurement {
        radius,
        p_in,
        p_out,
        delta_p: p_in - p_out,
        contrast: a_in - a_out,
    }
}

/// Least-squares line `dp = slope / R + intercept` over several droplets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// mean of `dp * R / 2` over the droplets
    pub sigma_mean: f64,
    /// `(max - min) / mean` of `dp * R / 2`
    pub sigma_spread: f64,
    /// `max |sigma - mean| / mean`
    pub sigma_deviation: f64,
}

pub fn laplace_fit(results: &[LaplaceResult]) -> Option<LaplaceFit> {
    if results.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = results.iter().map(|r| 1.0 / r.radius).collect();
    let ys: Vec<f64> = results.iter().map(|r| r.delta_p).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let sig: Vec<f64> = results.iter().map(|r| r.sigma).collect();
    let sigma_mean = sig.iter().sum::<f64>() / n;
    let (lo, hi) = sig
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Some(LaplaceFit {
        slope,
        intercept,
        r_squared,
        sigma_mean,
        sigma_spread: (hi - lo) / sigma_mean.abs(),
        sigma_deviation: (hi - sigma_mean).max(sigma_mean - lo) / sigma_mean.abs(),
    })
}

/// Spinodal check: a near-uniform 50/50 mixture with a small deterministic
/// perturbation must phase-separate (`max rho_a / min rho_a > 10`) within
/// `max_steps`. Returns the density ratio reached.
pub fn check_separation(
    params: &ShanChenParams,
    n: usize,
    max_steps: usize,
) -> Result<f64, LbmError> {
    params.validate()?;
    let dims = Dims::cube(n);
    let mean = 0.5 * (params.rho_major + params.rho_minor);
    let mut st = LatticeState::from_cells(
        dims,
        vec![CellType::Fluid; dims.len()],
        [true; 3],
        1,
        |cell| {
            // deterministic pseudo-random perturbation of +-1 %
            let h = (cell as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
            let eps = 0.01 * ((h as f64 / (1u64 << 24) as f64) * 2.0 - 1.0);
            ([mean * (1.0 + eps), mean * (1.0 - eps)], [0.0; 3])
        },
    )?;
    let mut ratio = 1.0;
    let mut steps = 0;
    while steps < max_steps {
        let chunk = 100.min(max_steps - steps);
        st.run(params, chunk)?;
        steps += chunk;
        let (lo, hi) = st.density_extremes();
        ratio = hi[0] / lo[0].max(1e-300);
        if ratio > 10.0 {
            return Ok(ratio);
        }
    }
    Err(LbmError::NotConverged(format!(
        "mixture did not separate: max/min rho_a = {ratio:.3} after {steps} steps"
    )))
}

/// Bulk densities `[major, minor]` either side of an equilibrated flat
/// interface, started from `rho_major` / `rho_minor`.
pub fn flat_coexistence(params: &ShanChenParams) -> Result<[f64; 2], LbmError> {
    params.validate()?;
    let dims = Dims::new(1, 1, 64);
    let (hi, lo) = (params.rho_major, params.rho_minor);
    let mut st = LatticeState::from_cells(
        dims,
        vec![CellType::Fluid; dims.len()],
        [true; 3],
        1,
        |cell| {
            if (16..48).contains(&cell) {
                ([hi, lo], [0.0; 3])
            } else {
                ([lo, hi], [0.0; 3])
            }
        },
    )?;
    let mut prev = [hi, lo];
    for _ in 0..100 {
        st.run(params, 500)?;
        let bulk = st.densities(32);
        let change = (bulk[0] - prev[0]).abs() + (bulk[1] - prev[1]).abs();
        prev = bulk;
        if change <= 1e-10 {
            if bulk[0] - bulk[1] < 0.1 * hi {
                return Err(LbmError::NotConverged(format!(
                    "flat interface dissolved (bulk densities {bulk:?})"
                )));
            }
            return Ok(bulk);
        }
    }
    Err(LbmError::NotConverged(format!(
        "flat interface did not equilibrate (bulk densities {prev:?})"
    )))
}
