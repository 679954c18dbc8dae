//! gnuplot scripts over the CSV artifacts of a run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::workflow::{LBM_CURVE, SWEEP_DIR};

pub const OVERLAY_SCRIPT: &str = "ps_overlay.gp";
pub const SCALING_SCRIPT: &str = "scaling.gp";
pub const BENCH_CSV: &str = "bench.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotScripts {
    pub written: Vec<PathBuf>,
    /// data files referenced by the overlay, relative to the run directory
    pub overlay_data: Vec<String>,
}

/// Writes `ps_overlay.gp` when curves exist and `scaling.gp` when
/// `bench.csv` exists. Paths inside the scripts are relative to `dir`.
pub fn emit_plots(dir: &Path) -> Result<PlotScripts> {
    let lbm = dir.join(LBM_CURVE);
    let mut sweep: Vec<String> = match std::fs::read_dir(dir.join(SWEEP_DIR)) {
        Ok(rd) => rd
            .filter_map(|e| e.ok())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| n.starts_with("ps_") && n.ends_with(".csv"))
            .map(|n| format!("{SWEEP_DIR}/{n}"))
            .collect(),
        Err(_) => Vec::new(),
    };
    sweep.sort();
    let bench = dir.join(BENCH_CSV);
    if !lbm.exists() && sweep.is_empty() && !bench.exists() {
        return Err(CliError::MissingArtifact(lbm));
    }

    let mut out = PlotScripts {
        written: Vec::new(),
        overlay_data: Vec::new(),
    };
    if lbm.exists() || !sweep.is_empty() {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,650\n");
        s.push_str("set output 'ps_overlay.png'\n");
        s.push_str("set xlabel 'capillary pressure [Pa]'\n");
        s.push_str("set ylabel 'electrolyte saturation [-]'\n");
        s.push_str("set yrange [0:1.05]\n");
        s.push_str("set key outside right\n");
        let mut items = Vec::new();
        if lbm.exists() {
            items.push(format!("'{LBM_CURVE}' skip 1 using 1:2 with points pt 7 title 'LBM'"));
            out.overlay_data.push(LBM_CURVE.to_string());
        }
        for f in &sweep {
            let title = f
                .trim_start_matches(&format!("{SWEEP_DIR}/ps_"))
                .trim_end_matches(".csv");
            items.push(format!("'{f}' skip 1 using 1:2 with steps title 'PNM {title}'"));
            out.overlay_data.push(f.clone());
        }
        writeln!(s, "plot {}", items.join(", \\\n     ")).unwrap();
        write_script(dir, OVERLAY_SCRIPT, &s, &mut out)?;
    }
    if bench.exists() {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str("set terminal pngcairo size 900,650\n");
        s.push_str("set output 'scaling.png'\n");
        s.push_str("set xlabel 'workers'\n");
        s.push_str("set ylabel 'speedup'\n");
        s.push_str("set logscale xy 2\n");
        s.push_str("set key left top\n");
        writeln!(
            s,
            "plot '{BENCH_CSV}' skip 1 using 1:8 with linespoints pt 7 title 'measured', \\\n     x with lines dt 2 title 'ideal'"
        )
        .unwrap();
        write_script(dir, SCALING_SCRIPT, &s, &mut out)?;
    }
    Ok(out)
}

fn write_script(dir: &Path, name: &str, text: &str, out: &mut PlotScripts) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::stage("plot", e))?;
    out.written.push(path);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_dir() {
        let d = tempfile::tempdir().unwrap();
        assert!(matches!(emit_plots(d.path()), Err(CliError::MissingArtifact(_))));
    }

    #[test]
    fn three_curves() {
        let d = tempfile::tempdir().unwrap();
        std::fs::create_dir_all(d.path().join("calibration")).unwrap();
        std::fs::create_dir_all(d.path().join(SWEEP_DIR)).unwrap();
        let csv = "pressure_pa,saturation\n1,0.5\n2,1\n";
        std::fs::write(d.path().join(LBM_CURVE), csv).unwrap();
        std::fs::write(d.path().join("sweep/ps_s0.03_t60.csv"), csv).unwrap();
        std::fs::write(d.path().join("sweep/ps_s0.03_t45.csv"), csv).unwrap();
        let a = emit_plots(d.path()).unwrap();
        assert_eq!(a.overlay_data.len(), 3);
        let first = std::fs::read(d.path().join(OVERLAY_SCRIPT)).unwrap();
        let text = String::from_utf8(first.clone()).unwrap();
        for f in &a.overlay_data {
            assert!(text.contains(f.as_str()));
        }
        emit_plots(d.path()).unwrap();
        assert_eq!(std::fs::read(d.path().join(OVERLAY_SCRIPT)).unwrap(), first);
    }
}
