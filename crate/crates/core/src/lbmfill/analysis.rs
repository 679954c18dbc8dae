//! Residual gas after filling: entrapped clusters and wetted solid surface.

use super::state::LatticeState;
use crate::voxelgrid::{connected_components, Connectivity, Face, Label, VoxelImage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GasCluster {
    pub volume: usize,
    pub touches_inlet: bool,
    pub touches_outlet: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGas {
    /// ELECTROLYTE voxels over ELECTROLYTE + GAS voxels
    pub final_saturation: f64,
    pub cluster_count: usize,
    /// 26-connected GAS clusters, largest first
    pub clusters: Vec<GasCluster>,
    /// interface solid face-adjacent to electrolyte over interface solid
    /// face-adjacent to any fluid (1 when no interface touches fluid)
    pub wetted_solid_fraction: f64,
}

impl ResidualGas {
    pub fn cluster_volumes(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.volume).collect()
    }

    /// Clusters that touch neither the inlet nor the outlet face.
    pub fn isolated_clusters(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| !c.touches_inlet && !c.touches_outlet)
            .count()
    }
}

/// Analyses the final lattice state over its image region.
pub fn residual_gas_analysis(state: &LatticeState, img: &VoxelImage) -> ResidualGas {
    let phases = state.phase_image(img.voxel_size());
    let flow = state.region().flow;
    analyze_phase_image(&phases, flow.map(|f| f.0), flow.map(|f| f.1))
}

/// Analyses an image whose pore space is labelled ELECTROLYTE or GAS.
pub fn analyze_phase_image(
    phases: &VoxelImage,
    inlet: Option<Face>,
    outlet: Option<Face>,
) -> ResidualGas {
    let dims = phases.dims();
    let wet = phases.count(Label::Electrolyte);
    let gas = phases.count(Label::Gas);
    let final_saturation = if wet + gas == 0 {
        0.0
    } else {
        wet as f64 / (wet + gas) as f64
    };

    let field = connected_components(phases, &[Label::Gas], Connectivity::TwentySix);
    let on = |face: Option<Face>| -> Vec<bool> {
        let mut hit = vec![false; field.count + 1];
        if let Some(f) = face {
            for id in field.ids_on_face(f) {
                hit[id as usize] = true;
            }
        }
        hit
    };
    let (at_in, at_out) = (on(inlet), on(outlet));
    let clusters = field
        .region_sizes()
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(id, volume)| GasCluster {
            volume,
            touches_inlet: at_in[id],
            touches_outlet: at_out[id],
        })
        .collect::<Vec<_>>();

    let (mut touching, mut wetted) = (0usize, 0usize);
    for i in 0..dims.len() {
        if phases.labels()[i] != Label::SolidInterface {
            continue;
        }
        let c = dims.coords(i);
        let (mut any, mut elec) = (false, false);
        for face in Face::ALL {
            let d = face_step(face);
            if let Some(j) = dims.offset(c, d) {
                match phases.labels()[j] {
                    Label::Electrolyte => {
                        any = true;
                        elec = true;
                    }
                    Label::Gas | Label::Pore => any = true,
                    _ => {}
                }
            }
        }
        touching += any as usize;
        wetted += elec as usize;
    }
    let wetted_solid_fraction = if touching == 0 {
        1.0
    } else {
        wetted as f64 / touching as f64
    };

    ResidualGas {
        final_saturation,
        cluster_count: clusters.len(),
        clusters,
        wetted_solid_fraction,
    }
}

fn face_step(face: Face) -> [isize; 3] {
    let mut d = [0isize; 3];
    d[face.axis().index()] = if face.is_min() { -1 } else { 1 };
    d
}
