//! Quasi-static filling: the inlet reservoir is held at a stepped pressure
//! offset above the gas outlet and the lattice is relaxed at each level.

use super::d3q19::CS2;
use super::state::{init_lattice, LatticeState};
use super::{LbmError, ShanChenParams};
use crate::curve::PressureSaturationCurve;
use crate::voxelgrid::{Face, VoxelImage};

#[derive(Debug, Clone, PartialEq)]
pub struct FillProtocol {
    /// inlet minus outlet lattice pressure, strictly ascending
    pub pressure_steps: Vec<f64>,
    /// step budget per pressure level
    pub steps_per_level: usize,
    /// relative saturation change per `check_interval` steps
    pub convergence_tol: f64,
    pub check_interval: usize,
}

impl Default for FillProtocol {
    fn default() -> Self {
        FillProtocol {
            pressure_steps: Vec::new(),
            steps_per_level: 200_000,
            convergence_tol: 1e-3,
            check_interval: 1000,
        }
    }
}

impl FillProtocol {
    pub fn validate(&self) -> Result<(), LbmError> {
        if !self.pressure_steps.iter().all(|p| p.is_finite())
            || !self.pressure_steps.windows(2).all(|w| w[0] < w[1])
        {
            return Err(LbmError::Precondition(
                "pressure steps must be finite and strictly ascending".into(),
            ));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(LbmError::Precondition("convergence_tol must be > 0".into()));
        }
        if self.check_interval == 0 || self.steps_per_level == 0 {
            return Err(LbmError::Precondition(
                "check interval and step budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillLevel {
    pub pressure: f64,
    pub saturation: f64,
    pub steps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct FillResult {
    pub initial_saturation: f64,
    pub levels: Vec<FillLevel>,
    pub final_state: LatticeState,
}

impl FillResult {
    /// Pressure-saturation samples in lattice units.
    pub fn curve(&self) -> PressureSaturationCurve {
        PressureSaturationCurve::new(
            self.levels
                .iter()
                .map(|l| (l.pressure, l.saturation))
                .collect(),
        )
        .expect("levels ascend")
    }

    pub fn final_saturation(&self) -> f64 {
        self.levels
            .last()
            .map_or(self.initial_saturation, |l| l.saturation)
    }
}

/// Inlet (electrolyte) and outlet (gas) densities realising a lattice pressure
/// difference `dp` with the bulk equation of state.
pub fn boundary_densities(params: &ShanChenParams, dp: f64) -> Result<([f64; 2], [f64; 2]), LbmError> {
    let (major, minor) = (params.rho_major, params.rho_minor);
    let outlet = [minor, major];
    let p_out = params.pressure(outlet);
    let a = ((p_out + dp) / CS2 - minor) / (1.0 + params.g_ab * minor);
    if !(a > minor) {
        return Err(LbmError::Precondition(format!(
            "pressure offset {dp} leaves no electrolyte at the inlet"
        )));
    }
    Ok(([a, minor], outlet))
}

/// Builds the filling lattice for `img` and runs the protocol.
pub fn fill_simulation(
    img: &VoxelImage,
    params: &ShanChenParams,
    protocol: &FillProtocol,
    inlet: Face,
    outlet: Face,
    workers: usize,
) -> Result<FillResult, LbmError> {
    protocol.validate()?;
    let state = init_lattice(img, params, inlet, outlet, workers)?;
    run_fill(state, params, protocol, |_, _, _| Ok(()))
}

/// Runs the protocol on a prepared lattice. `on_level` sees every finished
/// level (index, record, state), e.g. for logging or checkpoints.
pub fn run_fill(
    mut state: LatticeState,
    params: &ShanChenParams,
    protocol: &FillProtocol,
    mut on_level: impl FnMut(usize, &FillLevel, &LatticeState) -> Result<(), LbmError>,
) -> Result<FillResult, LbmError> {
    protocol.validate()?;
    params.validate()?;
    let initial_saturation = state.saturation();
    let mut levels = Vec::with_capacity(protocol.pressure_steps.len());
    for (k, &dp) in protocol.pressure_steps.iter().enumerate() {
        let (inlet, outlet) = boundary_densities(params, dp)?;
        state.set_boundary_densities(inlet, outlet);
        let mut prev = state.saturation();
        let mut steps = 0;
        let mut converged = false;
        while steps < protocol.steps_per_level {
            let n = protocol.check_interval.min(protocol.steps_per_level - steps);
            state.run(params, n).map_err(|e| match e {
                LbmError::NumericBlowup { step, .. } => LbmError::NumericBlowup {
                    step,
                    level: Some(k),
                },
                other => other,
            })?;
            steps += n;
            let s = state.saturation();
            let change = (s - prev).abs() / s.max(prev).max(f64::MIN_POSITIVE);
            prev = s;
            if change < protocol.convergence_tol {
                converged = true;
                break;
            }
        }
        let level = FillLevel {
            pressure: dp,
            saturation: prev,
            steps,
            converged,
        };
        on_level(k, &level, &state)?;
        levels.push(level);
    }
    Ok(FillResult {
        initial_saturation,
        levels,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_validation() {
        let mut p = FillProtocol {
            pressure_steps: vec![0.0, 0.01, 0.01],
            ..FillProtocol::default()
        };
        assert!(p.validate().is_err());
        p.pressure_steps = vec![-0.01, 0.0, 0.02];
        assert!(p.validate().is_ok());
        p.convergence_tol = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn boundary_densities_realise_offset() {
        let params = ShanChenParams::default();
        for dp in [-0.05, 0.0, 0.03] {
            let (i, o) = boundary_densities(&params, dp).unwrap();
            let got = params.pressure(i) - params.pressure(o);
            assert!((got - dp).abs() < 1e-14);
        }
        assert!(boundary_densities(&params, -10.0).is_err());
    }
}
