//! Strong-scaling benchmark of the lattice Boltzmann kernel.
//!
//! Every worker count runs the same workload. The final state hashes must
//! agree before any timing is reported.

use std::fmt::Write as _;
use std::time::Instant;

use porefill::lbmfill::{CellType, LatticeState, ShanChenParams};
use porefill::Dims;

use crate::error::{CliError, Result};

pub const WARMUP_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub workers: usize,
    pub dims: Dims,
    pub steps: usize,
    pub wall_seconds: f64,
    pub mlups: f64,
    pub speedup: f64,
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub state_hash: String,
}

/// One timed run: final state hash, seconds, site updates.
pub struct RunOutcome {
    pub hash: String,
    pub seconds: f64,
    pub site_updates: f64,
}

/// Periodic box with a lattice of solid spheres and a perturbed 50/50
/// mixture, so both fluid-fluid and fluid-solid forces are exercised.
pub fn bench_state(dims: Dims, workers: usize, params: &ShanChenParams) -> Result<LatticeState> {
    let spacing = 16.0;
    let radius = 4.0;
    let cells = (0..dims.len())
        .map(|i| {
            let c = dims.coords(i);
            let d2: f64 = c
                .iter()
                .map(|&v| {
                    let m = (v as f64 + 0.5) % spacing - spacing / 2.0;
                    m * m
                })
                .sum();
            if d2 <= radius * radius {
                CellType::SolidInterface
            } else {
                CellType::Fluid
            }
        })
        .collect();
    let mean = 0.5 * (params.rho_major + params.rho_minor);
    LatticeState::from_cells(dims, cells, [true; 3], workers, |i| {
        let h = (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 40;
        let eps = 0.01 * ((h as f64 / (1u64 << 24) as f64) - 0.5);
        ([mean * (1.0 + eps), mean * (1.0 - eps)], [0.0; 3])
    })
    .map_err(|e| CliError::lbm("bench", e))
}

/// Runs `steps` timed steps after the warm-up.
pub fn run_lbm(dims: Dims, steps: usize, workers: usize, params: &ShanChenParams) -> Result<RunOutcome> {
    let mut st = bench_state(dims, workers, params)?;
    st.run(params, WARMUP_STEPS).map_err(|e| CliError::lbm("bench", e))?;
    let t = Instant::now();
    st.run(params, steps).map_err(|e| CliError::lbm("bench", e))?;
    let seconds = t.elapsed().as_secs_f64();
    Ok(RunOutcome {
        hash: st.state_hash(),
        seconds,
        site_updates: st.active_sites() as f64 * steps as f64,
    })
}

pub fn bench_scaling(dims: Dims, steps: usize, workers: &[usize]) -> Result<BenchResult> {
    let params = ShanChenParams::default().with_adhesion(-0.1, 0.1);
    bench_with(dims, steps, workers, |w| run_lbm(dims, steps, w, &params))
}

/// Scaling table from an arbitrary runner; fails with `RESULT_MISMATCH`
/// when two worker counts end in different states.
pub fn bench_with(
    dims: Dims,
    steps: usize,
    workers: &[usize],
    mut run: impl FnMut(usize) -> Result<RunOutcome>,
) -> Result<BenchResult> {
    if workers.is_empty() || workers.contains(&0) || steps == 0 {
        return Err(CliError::Config("bench needs workers >= 1 and steps >= 1".into()));
    }
    let mut outcomes = Vec::with_capacity(workers.len());
    for &w in workers {
        let o = run(w)?;
        if let Some((w0, first)) = outcomes.first().map(|(w0, o0): &(usize, RunOutcome)| (*w0, &o0.hash)) {
            if *first != o.hash {
                return Err(CliError::ResultMismatch(w0, w));
            }
        }
        outcomes.push((w, o));
    }
    let base = outcomes
        .iter()
        .find(|(w, _)| *w == 1)
        .map(|(_, o)| o.seconds)
        .unwrap_or_else(|| outcomes[0].1.seconds * outcomes[0].0 as f64);
    let rows = outcomes
        .iter()
        .map(|(w, o)| {
            let speedup = if *w == 1 { 1.0 } else { base / o.seconds };
            BenchRow {
                workers: *w,
                dims,
                steps,
                wall_seconds: o.seconds,
                mlups: o.site_updates / o.seconds / 1e6,
                speedup,
                efficiency: speedup / *w as f64,
            }
        })
        .collect();
    Ok(BenchResult {
        rows,
        state_hash: outcomes[0].1.hash.clone(),
    })
}

impl BenchResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("workers,nx,ny,nz,steps,wall_seconds,mlups,speedup,efficiency\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.workers, r.dims.nx, r.dims.ny, r.dims.nz, r.steps, r.wall_seconds, r.mlups, r.speedup, r.efficiency
            )
            .unwrap();
        }
        s
    }
}
