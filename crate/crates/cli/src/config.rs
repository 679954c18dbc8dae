//! Workflow configuration, read from a TOML file.
//!
//! ```toml
//! workers = 1
//! seed = 7
//! axis = "z"
//!
//! [structure.generate]
//! shape = [32, 32, 32]
//! voxel_size = 1.0
//! radius_mean = 4.0
//! radius_sd = 0.5
//! porosity = 0.5
//!
//! [fluids]
//! surface_tension = [0.03, 0.05]
//! contact_angle = [45.0, 60.0]
//! reference = [0.03, 60.0]
//! viscosity = 3e-6
//! ```
//!
//! `[structure] input = "file.vxi"` replaces the generator. `[snow]`,
//! `[lbm]` and `[fill]` are optional and default to the library values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use porefill::lbmfill::{FillProtocol, ShanChenParams};
use porefill::netextract::SnowParams;
use porefill::voxelgrid::SpherePackParams;
use porefill::{Axis, Dims};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowConfig {
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// transport axis; the inlet is its min face
    #[serde(default = "axis_z")]
    pub axis: String,
    pub structure: StructureConfig,
    #[serde(default)]
    pub snow: SnowConfig,
    pub fluids: FluidsConfig,
    #[serde(default)]
    pub lbm: LbmConfig,
    #[serde(default)]
    pub fill: FillConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub input: Option<PathBuf>,
    pub generate: Option<GenerateConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub shape: [usize; 3],
    #[serde(default = "unit")]
    pub voxel_size: f64,
    pub radius_mean: f64,
    #[serde(default)]
    pub radius_sd: f64,
    pub porosity: f64,
}

impl GenerateConfig {
    pub fn params(&self, seed: u64) -> SpherePackParams {
        SpherePackParams {
            dims: Dims::new(self.shape[0], self.shape[1], self.shape[2]),
            voxel_size: self.voxel_size,
            radius_mean: self.radius_mean,
            radius_sd: self.radius_sd,
            target_porosity: self.porosity,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SnowConfig {
    pub sigma: f64,
    pub maxfilter_radius: usize,
    pub merge_radius_factor: f64,
}

impl Default for SnowConfig {
    fn default() -> Self {
        let p = SnowParams::default();
        SnowConfig {
            sigma: p.sigma,
            maxfilter_radius: p.maxfilter_radius,
            merge_radius_factor: p.merge_radius_factor,
        }
    }
}

impl SnowConfig {
    pub fn params(&self) -> SnowParams {
        SnowParams {
            sigma: self.sigma,
            maxfilter_radius: self.maxfilter_radius,
            merge_radius_factor: self.merge_radius_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidsConfig {
    /// N/m
    pub surface_tension: Vec<f64>,
    /// degrees
    pub contact_angle: Vec<f64>,
    /// (surface tension, contact angle) of the lattice Boltzmann run
    pub reference: [f64; 2],
    /// electrolyte kinematic viscosity, m²/s
    #[serde(default = "default_viscosity")]
    pub viscosity: f64,
    #[serde(default = "yes")]
    pub trapping: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LbmConfig {
    pub g_ab: f64,
    pub g_ads_a: f64,
    pub g_ads_b: f64,
    pub tau_a: f64,
    pub tau_b: f64,
    pub rho_major: f64,
    pub rho_minor: f64,
    /// lattice surface tension from the Laplace calibration
    pub sigma_lat: f64,
}

impl Default for LbmConfig {
    fn default() -> Self {
        let p = ShanChenParams::default();
        LbmConfig {
            g_ab: p.g_ab,
            g_ads_a: p.g_ads_a,
            g_ads_b: p.g_ads_b,
            tau_a: p.tau_a,
            tau_b: p.tau_b,
            rho_major: p.rho_major,
            rho_minor: p.rho_minor,
            sigma_lat: 0.168,
        }
    }
}

impl LbmConfig {
    pub fn params(&self) -> ShanChenParams {
        ShanChenParams {
            g_ab: self.g_ab,
            g_ads_a: self.g_ads_a,
            g_ads_b: self.g_ads_b,
            tau_a: self.tau_a,
            tau_b: self.tau_b,
            rho_major: self.rho_major,
            rho_minor: self.rho_minor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FillConfig {
    pub pressure_steps: Vec<f64>,
    pub steps_per_level: usize,
    pub convergence_tol: f64,
    pub check_interval: usize,
}

impl Default for FillConfig {
    fn default() -> Self {
        let p = FillProtocol::default();
        FillConfig {
            pressure_steps: vec![0.0],
            steps_per_level: p.steps_per_level,
            convergence_tol: p.convergence_tol,
            check_interval: p.check_interval,
        }
    }
}

impl FillConfig {
    pub fn protocol(&self) -> FillProtocol {
        FillProtocol {
            pressure_steps: self.pressure_steps.clone(),
            steps_per_level: self.steps_per_level,
            convergence_tol: self.convergence_tol,
            check_interval: self.check_interval,
        }
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn axis_z() -> String {
    "z".into()
}

fn default_viscosity() -> f64 {
    3e-6
}

impl WorkflowConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: WorkflowConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn axis(&self) -> Result<Axis> {
        self.axis
            .parse()
            .map_err(|_| CliError::Config(format!("unknown axis {:?}", self.axis)))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(m));
        match (&self.structure.input, &self.structure.generate) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return bad("set exactly one of structure.input and structure.generate".into()),
        }
        if self.workers == 0 {
            return bad("workers must be >= 1".into());
        }
        self.axis()?;
        let f = &self.fluids;
        if f.surface_tension.is_empty() {
            return bad("fluids.surface_tension must not be empty".into());
        }
        if f.contact_angle.is_empty() {
            return bad("fluids.contact_angle must not be empty".into());
        }
        if f.surface_tension.iter().chain([&f.reference[0]]).any(|s| !(*s > 0.0)) {
            return bad("surface tensions must be > 0".into());
        }
        if f.contact_angle
            .iter()
            .chain([&f.reference[1]])
            .any(|t| !(0.0..=180.0).contains(t))
        {
            return bad("contact angles must lie in [0, 180]".into());
        }
        if !(f.viscosity > 0.0) || !(self.lbm.sigma_lat > 0.0) {
            return bad("viscosity and lbm.sigma_lat must be > 0".into());
        }
        self.snow
            .params()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.lbm
            .params()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.fill
            .protocol()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.fill.pressure_steps.is_empty() {
            return bad("fill.pressure_steps must not be empty".into());
        }
        Ok(())
    }
}
