use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use porefill::curve::PressureSaturationCurve;
use porefill::lbmfill::fill_simulation;
use porefill::netextract::{extract_network, network_stats, PoreNetwork, SnowParams};
use porefill::pnmperc::{curve_from_result, invasion_percolation, FluidPair};
use porefill::transport::{effective_diffusivity, entrapment_penalty, OPEN_PHASES};
use porefill::unitbridge::calibrate_pnm;
use porefill::voxelgrid::{classify_solid, generate_sphere_pack, porosity, SpherePackParams};
use porefill::{Axis, Dims, Face, Label, VoxelImage};
use porefill_cli::bench::bench_scaling;
use porefill_cli::config::WorkflowConfig;
use porefill_cli::manifest::sha256_file;
use porefill_cli::plot::emit_plots;
use porefill_cli::workflow::{append_feedback, run_workflow};
use porefill_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "porefill", version, about = "Pore-scale electrolyte filling workflow")]
struct Cli {
    /// workflow configuration (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output file or directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an overlapping-sphere structure (.vxi)
    Generate(GenerateArgs),
    /// Split solid into bulk and interface voxels
    Classify { input: PathBuf },
    /// Extract a pore network (pores.csv, throats.csv)
    Extract(ExtractArgs),
    /// Invasion percolation pressure-saturation curve
    Percolate(PercolateArgs),
    /// Lattice Boltzmann fill of a classified image using the [lbm] and [fill] config sections
    Fill(FillArgs),
    /// Fit the network pressure correction to a lattice Boltzmann curve
    Calibrate { lbm_curve: PathBuf, pnm_curve: PathBuf },
    /// Effective diffusivity, or the entrapment penalty when a filled image is given
    Transport(TransportArgs),
    /// Run the full pipeline from --config
    Workflow,
    /// Strong-scaling benchmark with the final-state hash gate
    Bench(BenchArgs),
    /// Write gnuplot scripts for a run directory
    Plot { dir: PathBuf },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, num_args = 3, default_values_t = [64usize, 64, 64])]
    shape: Vec<usize>,
    /// µm per voxel
    #[arg(long, default_value_t = 1.0)]
    voxel_size: f64,
    /// µm
    #[arg(long, default_value_t = 5.0)]
    radius_mean: f64,
    /// µm
    #[arg(long, default_value_t = 1.0)]
    radius_sd: f64,
    #[arg(long, default_value_t = 0.5)]
    porosity: f64,
}

#[derive(Args)]
struct ExtractArgs {
    input: PathBuf,
    #[arg(long, default_value_t = SnowParams::default().sigma)]
    sigma: f64,
    #[arg(long, default_value_t = SnowParams::default().maxfilter_radius)]
    r_max: usize,
    #[arg(long, default_value_t = SnowParams::default().merge_radius_factor)]
    merge: f64,
}

#[derive(Args)]
struct PercolateArgs {
    /// directory with pores.csv and throats.csv
    network: PathBuf,
    /// surface tension, N/m
    #[arg(long)]
    surface_tension: f64,
    /// contact angle, degrees
    #[arg(long)]
    theta: f64,
    #[arg(long, default_value = "zmin")]
    inlet: Face,
    #[arg(long)]
    trapping: bool,
    /// pressure grid in Pa (comma separated); defaults to the event staircase
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
}

#[derive(Args)]
struct FillArgs {
    input: PathBuf,
    #[arg(long, default_value = "z")]
    axis: Axis,
}

#[derive(Args)]
struct TransportArgs {
    input: PathBuf,
    /// filled image (ELECTROLYTE/GAS); appends a feedback row
    after: Option<PathBuf>,
    #[arg(long, default_value = "z")]
    axis: Axis,
    #[arg(long, default_value_t = f64::NAN)]
    theta: f64,
    #[arg(long, default_value_t = f64::NAN)]
    surface_tension: f64,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8])]
    worker_list: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn out_or(cli_out: &Option<PathBuf>, default: &str) -> PathBuf {
    cli_out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn read_image(path: &Path, stage: &'static str) -> Result<VoxelImage> {
    VoxelImage::read_vxi(path).map_err(|e| CliError::stage(stage, e))
}

fn load_config(cli: &Cli) -> Result<WorkflowConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = WorkflowConfig::load(path)?;
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match &cli.cmd {
        Command::Generate(a) => {
            let p = SpherePackParams {
                dims: Dims::new(a.shape[0], a.shape[1], a.shape[2]),
                voxel_size: a.voxel_size,
                radius_mean: a.radius_mean,
                radius_sd: a.radius_sd,
                target_porosity: a.porosity,
                seed: cli.seed.unwrap_or(0),
            };
            let img = generate_sphere_pack(&p).map_err(|e| CliError::stage("generate", e))?;
            let out = out_or(&cli.out, "structure.vxi");
            img.write_vxi(&out).map_err(|e| CliError::stage("generate", e))?;
            println!("porosity={}", porosity(&img));
        }
        Command::Classify { input } => {
            let img = classify_solid(&read_image(input, "classify")?);
            let out = out_or(&cli.out, "classified.vxi");
            img.write_vxi(&out).map_err(|e| CliError::stage("classify", e))?;
            println!(
                "solid_bulk={} solid_interface={}",
                img.count(Label::SolidBulk),
                img.count(Label::SolidInterface)
            );
        }
        Command::Extract(a) => {
            let img = read_image(&a.input, "extract")?;
            let params = SnowParams {
                sigma: a.sigma,
                maxfilter_radius: a.r_max,
                merge_radius_factor: a.merge,
            };
            params.validate().map_err(|e| CliError::Config(e.to_string()))?;
            let net = extract_network(&img, &params).map_err(|e| CliError::stage("extract", e))?;
            net.save(&out_or(&cli.out, "network"))
                .map_err(|e| CliError::stage("extract", e))?;
            let s = network_stats(&net).map_err(|e| CliError::stage("extract", e))?;
            println!(
                "pores={} throats={} d50_um={} coordination={}",
                s.pore_count, s.throat_count, s.d50, s.mean_coordination
            );
        }
        Command::Percolate(a) => {
            let net = PoreNetwork::load(&a.network).map_err(|e| CliError::stage("percolate", e))?;
            let fluids = FluidPair::new(a.surface_tension, a.theta)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let res = invasion_percolation(&net, &fluids, a.inlet, a.inlet.opposite(), a.trapping)
                .map_err(|e| CliError::stage("percolate", e))?;
            let curve = if a.grid.is_empty() {
                res.staircase()
            } else {
                let mut g = a.grid.clone();
                g.sort_by(f64::total_cmp);
                curve_from_result(&res, &g)
            };
            let out = out_or(&cli.out, "ps_curve.csv");
            curve.save(&out).map_err(|e| CliError::stage("percolate", e))?;
            println!(
                "final_saturation={} trapped_pores={}",
                res.final_saturation,
                res.trapped_pores.len()
            );
        }
        Command::Fill(a) => {
            let cfg = load_config(&cli)?;
            let img = read_image(&a.input, "fill")?;
            let res = fill_simulation(
                &img,
                &cfg.lbm.params(),
                &cfg.fill.protocol(),
                Face::min_of(a.axis),
                Face::max_of(a.axis),
                cfg.workers,
            )
            .map_err(|e| CliError::lbm("fill", e))?;
            let dir = out_or(&cli.out, "lbm");
            std::fs::create_dir_all(&dir).map_err(|e| CliError::stage("fill", e))?;
            res.curve()
                .save(&dir.join("curve_lattice.csv"))
                .map_err(|e| CliError::stage("fill", e))?;
            res.final_state
                .phase_image(img.voxel_size())
                .write_vxi(dir.join("phases.vxi"))
                .map_err(|e| CliError::stage("fill", e))?;
            for l in &res.levels {
                println!(
                    "dp={} saturation={} steps={} converged={}",
                    l.pressure, l.saturation, l.steps, l.converged
                );
            }
        }
        Command::Calibrate { lbm_curve, pnm_curve } => {
            let load = |p: &Path| {
                PressureSaturationCurve::load(p).map_err(|e| CliError::stage("calibrate", e))
            };
            let cal = calibrate_pnm(&load(lbm_curve)?, &load(pnm_curve)?)
                .map_err(|e| CliError::stage("calibrate", e))?;
            let report = format!(
                "k={}\nresidual={}\nlbm_curve_sha256={}\npnm_curve_sha256={}\n",
                cal.pressure_scale_correction,
                cal.residual,
                sha256_file(lbm_curve).map_err(|e| CliError::stage("calibrate", e))?,
                sha256_file(pnm_curve).map_err(|e| CliError::stage("calibrate", e))?,
            );
            std::fs::write(out_or(&cli.out, "calibration.txt"), &report)
                .map_err(|e| CliError::stage("calibrate", e))?;
            print!("{report}");
        }
        Command::Transport(a) => {
            let before = read_image(&a.input, "transport")?;
            match &a.after {
                None => {
                    let r = effective_diffusivity(&before, &OPEN_PHASES, a.axis)
                        .map_err(|e| CliError::transport("transport", e))?;
                    println!(
                        "d_eff_ratio={} tortuosity={} porosity_eff={} percolating={}",
                        r.d_eff_ratio, r.tortuosity, r.porosity_eff, r.percolating
                    );
                }
                Some(after) => {
                    let after = read_image(after, "transport")?;
                    let p = entrapment_penalty(&before, &after, a.axis)
                        .map_err(|e| CliError::transport("transport", e))?;
                    let row = format!(
                        "{},{},{},{},{},{},{},{},{}",
                        sha256_file(&a.input).map_err(|e| CliError::stage("transport", e))?,
                        a.theta,
                        a.surface_tension,
                        p.saturation,
                        p.before.d_eff_ratio,
                        p.after.d_eff_ratio,
                        p.before.tortuosity,
                        p.after.tortuosity,
                        p.wetted_solid_fraction
                    );
                    append_feedback(&out_or(&cli.out, "feedback.csv"), &row)
                        .map_err(|e| CliError::stage("transport", e))?;
                    println!("{row}");
                }
            }
        }
        Command::Workflow => {
            let cfg = load_config(&cli)?;
            let out = cli
                .out
                .clone()
                .or_else(|| cfg.out.clone())
                .unwrap_or_else(|| PathBuf::from("porefill_run"));
            let rep = run_workflow(&cfg, &out)?;
            println!(
                "artifacts={} ran={} skipped={} out={}",
                rep.manifest.artifact_count(),
                rep.ran.join(";"),
                rep.skipped.join(";"),
                out.display()
            );
        }
        Command::Bench(a) => {
            let res = bench_scaling(Dims::cube(a.size), a.steps, &a.worker_list)?;
            let csv = res.to_csv();
            std::fs::write(out_or(&cli.out, "bench.csv"), &csv)
                .map_err(|e| CliError::stage("bench", e))?;
            print!("{csv}");
        }
        Command::Plot { dir } => {
            let p = emit_plots(dir)?;
            for w in p.written {
                println!("{}", w.display());
            }
        }
    }
    Ok(())
}
