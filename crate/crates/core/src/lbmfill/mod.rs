//! Two-component Shan-Chen lattice Boltzmann solver (D3Q19) for electrolyte
//! filling, with the calibration experiments it needs (Laplace droplet,
//! sessile-drop contact angle) and residual-gas analysis of the final state.
//!
//! Component `a` is the electrolyte, component `b` the displaced gas. The
//! inter-component force uses the pseudopotential `psi = rho`:
//!
//! `F_k(x) = -rho_k(x) * G_ab * sum_i w_i rho_other(x + e_i) e_i`
//!
//! and solid adhesion adds `-G_ads_k * rho_k(x) * sum_i w_i s(x + e_i) e_i`,
//! where `s` is 1 on interface solid. Forces enter through the common-velocity
//! shift `u_k^eq = u' + tau_k F_k / rho_k`. The bulk equation of state is
//! `p = c_s^2 (rho_a + rho_b) + c_s^2 G_ab rho_a rho_b`.

mod analysis;
mod checkpoint;
mod contact;
pub mod d3q19;
mod fill;
mod kernel;
mod laplace;
mod state;

pub use analysis::{analyze_phase_image, residual_gas_analysis, GasCluster, ResidualGas};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use contact::{
    contact_angle_calibration, measure_contact_angle, ContactAngle, SessileSetup,
};
pub use fill::{boundary_densities, fill_simulation, run_fill, FillLevel, FillProtocol, FillResult};
pub use laplace::{check_separation, flat_coexistence, laplace_fit, laplace_test, LaplaceFit, LaplaceOptions, LaplaceResult};
pub use state::{
    init_lattice, CellType, ImageRegion, LatticeState, SiteInit, RESERVOIR_LAYERS,
};

use d3q19::CS2;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LbmError {
    #[error("lattice has no fluid sites")]
    NoFluid,
    #[error("numeric blow-up at step {step}{}", level.map(|l| format!(" (pressure level {l})")).unwrap_or_default())]
    NumericBlowup { step: u64, level: Option<usize> },
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Voxel(#[from] crate::voxelgrid::VoxelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shan-Chen model parameters in lattice units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShanChenParams {
    /// inter-component cohesion strength
    pub g_ab: f64,
    /// adhesion of the electrolyte (a) to solid; negative attracts
    pub g_ads_a: f64,
    /// adhesion of the gas (b) to solid; negative attracts
    pub g_ads_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    /// density of a component in the phase where it dominates
    pub rho_major: f64,
    /// dissolved density of a component in the other phase
    pub rho_minor: f64,
}

impl Default for ShanChenParams {
    fn default() -> Self {
        ShanChenParams {
            g_ab: 2.6,
            g_ads_a: 0.0,
            g_ads_b: 0.0,
            tau_a: 1.0,
            tau_b: 1.0,
            rho_major: 1.0,
            rho_minor: 0.01,
        }
    }
}

impl ShanChenParams {
    pub fn validate(&self) -> Result<(), LbmError> {
        let finite = [
            self.g_ab,
            self.g_ads_a,
            self.g_ads_b,
            self.tau_a,
            self.tau_b,
            self.rho_major,
            self.rho_minor,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(LbmError::Precondition("non-finite parameter".into()));
        }
        if self.tau_a <= 0.5 || self.tau_b <= 0.5 {
            return Err(LbmError::Precondition(format!(
                "relaxation times must exceed 0.5 (got {}, {})",
                self.tau_a, self.tau_b
            )));
        }
        if self.rho_major <= 0.0 || self.rho_minor < 0.0 || self.rho_minor >= self.rho_major {
            return Err(LbmError::Precondition(format!(
                "need 0 <= rho_minor < rho_major (got {}, {})",
                self.rho_minor, self.rho_major
            )));
        }
        Ok(())
    }

    /// Bulk pressure `c_s^2 (rho_a + rho_b) + c_s^2 G rho_a rho_b`.
    pub fn pressure(&self, rho: [f64; 2]) -> f64 {
        CS2 * (rho[0] + rho[1]) + CS2 * self.g_ab * rho[0] * rho[1]
    }

    /// Lattice kinematic viscosity of the electrolyte, `c_s^2 (tau_a - 1/2)`.
    pub fn viscosity_a(&self) -> f64 {
        CS2 * (self.tau_a - 0.5)
    }

    /// Same parameters with adhesion strengths replaced.
    pub fn with_adhesion(&self, g_ads_a: f64, g_ads_b: f64) -> Self {
        ShanChenParams {
            g_ads_a,
            g_ads_b,
            ..*self
        }
    }

    /// Short hex digest of the parameter bit patterns.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for v in [
            self.g_ab,
            self.g_ads_a,
            self.g_ads_b,
            self.tau_a,
            self.tau_b,
            self.rho_major,
            self.rho_minor,
        ] {
            h.update(v.to_bits().to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}
