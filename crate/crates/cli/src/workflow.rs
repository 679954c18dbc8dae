//! The end-to-end pipeline: structure, classification, network extraction,
//! one lattice Boltzmann reference fill, unit conversion and network
//! calibration, the network sweep over all fluid pairs, and transport
//! feedback. Stages whose inputs are unchanged since the last run are skipped.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use porefill::curve::PressureSaturationCurve;
use porefill::lbmfill::{analyze_phase_image, fill_simulation};
use porefill::netextract::{extract_network, median_pore_diameter, PoreNetwork};
use porefill::pnmperc::{invasion_percolation, FluidPair};
use porefill::transport::entrapment_penalty;
use porefill::unitbridge::{build_units, calibrate_pnm, convert_curve};
use porefill::voxelgrid::{classify_solid, generate_sphere_pack};
use porefill::{Axis, Face, VoxelImage};

use crate::config::WorkflowConfig;
use crate::error::{CliError, Result};
use crate::manifest::{hash_parts, sha256_file, Manifest};

pub const STRUCTURE: &str = "structure.vxi";
pub const CLASSIFIED: &str = "classified.vxi";
pub const PORES: &str = "network/pores.csv";
pub const THROATS: &str = "network/throats.csv";
pub const LBM_LATTICE: &str = "lbm/curve_lattice.csv";
pub const LBM_LEVELS: &str = "lbm/levels.csv";
pub const LBM_PHASES: &str = "lbm/phases.vxi";
pub const LBM_GAS: &str = "lbm/residual_gas.txt";
pub const LBM_CURVE: &str = "calibration/lbm_curve.csv";
pub const PNM_REFERENCE: &str = "calibration/pnm_reference.csv";
pub const CALIBRATION: &str = "calibration/calibration.txt";
pub const FEEDBACK: &str = "feedback.csv";
pub const SWEEP_DIR: &str = "sweep";

pub const FEEDBACK_HEADER: &str = "structure_sha256,theta_deg,sigma_n_per_m,saturation,\
d_eff_ratio_before,d_eff_ratio_after,tau_before,tau_after,wetted_solid_fraction";

#[derive(Debug, Clone)]
pub struct WorkflowReport {
    pub out: PathBuf,
    pub manifest: Manifest,
    pub ran: Vec<&'static str>,
    pub skipped: Vec<&'static str>,
}

/// `ps_s<sigma>_t<theta>.csv`
pub fn sweep_file_name(sigma: f64, theta: f64) -> String {
    format!("ps_s{sigma}_t{theta}.csv")
}

struct Runner<'a> {
    dir: &'a Path,
    manifest: Manifest,
    ran: Vec<&'static str>,
    skipped: Vec<&'static str>,
}

impl Runner<'_> {
    fn stage(
        &mut self,
        name: &'static str,
        input_hash: String,
        body: impl FnOnce(&Path) -> Result<Vec<String>>,
    ) -> Result<()> {
        if self.manifest.is_current(self.dir, name, &input_hash) {
            eprintln!("[{name}] up to date");
            self.skipped.push(name);
            return Ok(());
        }
        eprintln!("[{name}] running");
        let outputs = body(self.dir)?;
        self.manifest.record(self.dir, name, input_hash, &outputs)?;
        self.manifest.save(self.dir)?;
        self.ran.push(name);
        Ok(())
    }

    fn hash(&self, stage: &str, rel: &str) -> String {
        self.manifest.output_hash(stage, rel).unwrap_or_default().to_string()
    }
}

fn ensure_parent(path: &Path, stage: &'static str) -> Result<()> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).map_err(|e| CliError::stage(stage, e))?;
    }
    Ok(())
}

fn read_image(path: &Path, stage: &'static str) -> Result<VoxelImage> {
    VoxelImage::read_vxi(path).map_err(|e| CliError::stage(stage, e))
}

fn save_curve(curve: &PressureSaturationCurve, path: &Path, stage: &'static str) -> Result<()> {
    ensure_parent(path, stage)?;
    curve.save(path).map_err(|e| CliError::stage(stage, e))
}

fn load_curve(path: &Path, stage: &'static str) -> Result<PressureSaturationCurve> {
    PressureSaturationCurve::load(path).map_err(|e| CliError::stage(stage, e))
}

fn toml_of<T: serde::Serialize>(v: &T) -> String {
    toml::to_string(v).unwrap_or_default()
}

/// Runs every stage into `out`, resuming from an existing manifest.
pub fn run_workflow(cfg: &WorkflowConfig, out: &Path) -> Result<WorkflowReport> {
    cfg.validate()?;
    let axis: Axis = cfg.axis()?;
    let (inlet, outlet) = (Face::min_of(axis), Face::max_of(axis));
    fs::create_dir_all(out).map_err(|e| CliError::stage("setup", e))?;
    let mut r = Runner {
        dir: out,
        manifest: Manifest::load_or_default(out)?,
        ran: Vec::new(),
        skipped: Vec::new(),
    };

    let structure_input = match (&cfg.structure.input, &cfg.structure.generate) {
        (Some(path), _) => {
            let h = sha256_file(path).map_err(|e| CliError::stage("structure", e))?;
            hash_parts(&["input", &h])
        }
        (None, Some(g)) => hash_parts(&["generate".to_string(), toml_of(g), cfg.seed.to_string()]),
        (None, None) => unreachable!("validated"),
    };
    r.stage("structure", structure_input, |dir| {
        let img = match (&cfg.structure.input, &cfg.structure.generate) {
            (Some(path), _) => read_image(path, "structure")?,
            (None, Some(g)) => generate_sphere_pack(&g.params(cfg.seed))
                .map_err(|e| CliError::stage("structure", e))?,
            (None, None) => unreachable!("validated"),
        };
        img.write_vxi(dir.join(STRUCTURE))
            .map_err(|e| CliError::stage("structure", e))?;
        Ok(vec![STRUCTURE.into()])
    })?;

    let structure_hash = r.hash("structure", STRUCTURE);
    let h = hash_parts(&[structure_hash.clone()]);
    r.stage("classify", h, |dir| {
        let img = read_image(&dir.join(STRUCTURE), "classify")?;
        classify_solid(&img)
            .write_vxi(dir.join(CLASSIFIED))
            .map_err(|e| CliError::stage("classify", e))?;
        Ok(vec![CLASSIFIED.into()])
    })?;
    let classified_hash = r.hash("classify", CLASSIFIED);

    let h = hash_parts(&[classified_hash.clone(), toml_of(&cfg.snow)]);
    r.stage("extract", h, |dir| {
        let img = read_image(&dir.join(CLASSIFIED), "extract")?;
        let net = extract_network(&img, &cfg.snow.params())
            .map_err(|e| CliError::stage("extract", e))?;
        net.save(&dir.join("network"))
            .map_err(|e| CliError::stage("extract", e))?;
        Ok(vec![PORES.into(), THROATS.into()])
    })?;
    let network_hash = hash_parts(&[r.hash("extract", PORES), r.hash("extract", THROATS)]);

    let h = hash_parts(&[
        classified_hash.clone(),
        toml_of(&cfg.lbm),
        toml_of(&cfg.fill),
        cfg.axis.clone(),
    ]);
    let workers = cfg.workers;
    r.stage("lbm_fill", h, |dir| {
        let img = read_image(&dir.join(CLASSIFIED), "lbm_fill")?;
        let res = fill_simulation(
            &img,
            &cfg.lbm.params(),
            &cfg.fill.protocol(),
            inlet,
            outlet,
            workers,
        )
        .map_err(|e| CliError::lbm("lbm_fill", e))?;
        save_curve(&res.curve(), &dir.join(LBM_LATTICE), "lbm_fill")?;
        let mut levels = String::from("pressure_lat,saturation,steps,converged\n");
        for l in &res.levels {
            writeln!(levels, "{},{},{},{}", l.pressure, l.saturation, l.steps, l.converged).unwrap();
        }
        fs::write(dir.join(LBM_LEVELS), levels).map_err(|e| CliError::stage("lbm_fill", e))?;
        let phases = res.final_state.phase_image(img.voxel_size());
        phases
            .write_vxi(dir.join(LBM_PHASES))
            .map_err(|e| CliError::stage("lbm_fill", e))?;
        let gas = analyze_phase_image(&phases, Some(inlet), Some(outlet));
        let mut txt = String::new();
        writeln!(txt, "final_saturation={}", gas.final_saturation).unwrap();
        writeln!(txt, "cluster_count={}", gas.cluster_count).unwrap();
        writeln!(txt, "isolated_clusters={}", gas.isolated_clusters()).unwrap();
        writeln!(txt, "wetted_solid_fraction={}", gas.wetted_solid_fraction).unwrap();
        let vols: Vec<String> = gas.cluster_volumes().iter().map(|v| v.to_string()).collect();
        writeln!(txt, "cluster_volumes={}", vols.join(";")).unwrap();
        fs::write(dir.join(LBM_GAS), txt).map_err(|e| CliError::stage("lbm_fill", e))?;
        Ok(vec![
            LBM_LATTICE.into(),
            LBM_LEVELS.into(),
            LBM_PHASES.into(),
            LBM_GAS.into(),
        ])
    })?;
    let lbm_hash = r.hash("lbm_fill", LBM_LATTICE);
    let phases_hash = r.hash("lbm_fill", LBM_PHASES);

    let [sigma_ref, theta_ref] = cfg.fluids.reference;
    let h = hash_parts(&[
        network_hash.clone(),
        lbm_hash.clone(),
        toml_of(&cfg.fluids),
        toml_of(&cfg.lbm),
        cfg.axis.clone(),
    ]);
    r.stage("calibrate", h, |dir| {
        let net = PoreNetwork::load(&dir.join("network")).map_err(|e| CliError::stage("calibrate", e))?;
        let img = read_image(&dir.join(CLASSIFIED), "calibrate")?;
        let d50 = median_pore_diameter(&net).map_err(|e| CliError::stage("calibrate", e))?;
        let params = cfg.lbm.params();
        let units = build_units(
            d50,
            d50 / img.voxel_size(),
            sigma_ref,
            cfg.lbm.sigma_lat,
            cfg.fluids.viscosity,
            params.viscosity_a(),
        )
        .map_err(|e| CliError::stage("calibrate", e))?;
        let lbm = convert_curve(&load_curve(&dir.join(LBM_LATTICE), "calibrate")?, &units);
        save_curve(&lbm, &dir.join(LBM_CURVE), "calibrate")?;
        let fluids = FluidPair::new(sigma_ref, theta_ref).map_err(|e| CliError::stage("calibrate", e))?;
        let pnm = invasion_percolation(&net, &fluids, inlet, outlet, cfg.fluids.trapping)
            .map_err(|e| CliError::stage("calibrate", e))?
            .staircase();
        save_curve(&pnm, &dir.join(PNM_REFERENCE), "calibrate")?;
        let cal = calibrate_pnm(&lbm, &pnm).map_err(|e| CliError::stage("calibrate", e))?;
        let mut txt = String::new();
        writeln!(txt, "k={}", cal.pressure_scale_correction).unwrap();
        writeln!(txt, "residual={}", cal.residual).unwrap();
        writeln!(txt, "dx_m={}", units.dx).unwrap();
        writeln!(txt, "dt_s={}", units.dt).unwrap();
        writeln!(txt, "pressure_scale_pa={}", units.pressure_scale).unwrap();
        writeln!(txt, "d50_um={d50}").unwrap();
        writeln!(txt, "lbm_curve_sha256={lbm_hash}").unwrap();
        writeln!(txt, "network_sha256={network_hash}").unwrap();
        fs::write(dir.join(CALIBRATION), txt).map_err(|e| CliError::stage("calibrate", e))?;
        Ok(vec![LBM_CURVE.into(), PNM_REFERENCE.into(), CALIBRATION.into()])
    })?;

    let h = hash_parts(&[
        network_hash.clone(),
        r.hash("calibrate", CALIBRATION),
        toml_of(&cfg.fluids),
        cfg.axis.clone(),
    ]);
    r.stage("sweep", h, |dir| {
        let net = PoreNetwork::load(&dir.join("network")).map_err(|e| CliError::stage("sweep", e))?;
        let k = read_key(&dir.join(CALIBRATION), "k")?;
        let pairs: Vec<(f64, f64)> = cfg
            .fluids
            .surface_tension
            .iter()
            .flat_map(|&s| cfg.fluids.contact_angle.iter().map(move |&t| (s, t)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::stage("sweep", e))?;
        let curves: Vec<Result<PressureSaturationCurve>> = pool.install(|| {
            use rayon::prelude::*;
            pairs
                .par_iter()
                .map(|&(s, t)| {
                    let fluids = FluidPair::new(s, t).map_err(|e| CliError::stage("sweep", e))?;
                    let res = invasion_percolation(&net, &fluids, inlet, outlet, cfg.fluids.trapping)
                        .map_err(|e| CliError::stage("sweep", e))?;
                    Ok(res.staircase().scale_pressure(k))
                })
                .collect()
        });
        let mut outputs = Vec::new();
        for ((s, t), c) in pairs.iter().zip(curves) {
            let rel = format!("{SWEEP_DIR}/{}", sweep_file_name(*s, *t));
            save_curve(&c?, &dir.join(&rel), "sweep")?;
            outputs.push(rel);
        }
        Ok(outputs)
    })?;

    let h = hash_parts(&[
        classified_hash.clone(),
        phases_hash,
        cfg.axis.clone(),
        format!("{sigma_ref} {theta_ref}"),
    ]);
    r.stage("transport", h, |dir| {
        let before = read_image(&dir.join(CLASSIFIED), "transport")?;
        let after = read_image(&dir.join(LBM_PHASES), "transport")?;
        let pen = entrapment_penalty(&before, &after, axis)
            .map_err(|e| CliError::transport("transport", e))?;
        let row = format!(
            "{},{},{},{},{},{},{},{},{}",
            structure_hash,
            theta_ref,
            sigma_ref,
            pen.saturation,
            pen.before.d_eff_ratio,
            pen.after.d_eff_ratio,
            pen.before.tortuosity,
            pen.after.tortuosity,
            pen.wetted_solid_fraction
        );
        append_feedback(&dir.join(FEEDBACK), &row).map_err(|e| CliError::stage("transport", e))?;
        Ok(vec![FEEDBACK.into()])
    })?;

    Ok(WorkflowReport {
        out: out.to_path_buf(),
        manifest: r.manifest,
        ran: r.ran,
        skipped: r.skipped,
    })
}

/// Appends one row, writing the header first if the file is new.
pub fn append_feedback(path: &Path, row: &str) -> std::io::Result<()> {
    let fresh = !path.exists();
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{FEEDBACK_HEADER}")?;
    }
    writeln!(f, "{row}")
}

/// Value of `key` in a `key=value` report.
pub fn read_key(path: &Path, key: &str) -> Result<f64> {
    let text = fs::read_to_string(path).map_err(|_| CliError::MissingArtifact(path.into()))?;
    text.lines()
        .filter_map(|l| l.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .and_then(|(_, v)| v.trim().parse().ok())
        .ok_or_else(|| CliError::stage("calibrate", format!("{key} missing in {}", path.display())))
}
