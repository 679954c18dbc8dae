//! Pore-network extraction with the SNOW approach.
//!
//! Pipeline: distance map of the pore space, Gaussian smoothing, maximum-filter
//! peaks, plateau canonicalisation and proximity merging of peaks, marker
//! watershed on the negated smoothed map, then pore and throat measurement.
//! The result abstracts the pore space into spherical pores joined by
//! cylindrical throats.

mod io;
mod snow;

pub use snow::{extract_network, extract_regions, Extraction, SnowParams};

use thiserror::Error;

use crate::voxelgrid::Face;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("image has no pore voxels")]
    NoPorePhase,
    #[error("no pores survive peak correction")]
    EmptyNetwork,
    #[error("invalid extraction parameters: {0}")]
    BadParams(String),
    #[error("network file error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pore {
    pub id: usize,
    /// voxel-centre position of the pore peak, µm
    pub center: [f64; 3],
    /// twice the distance to solid at the peak, µm
    pub inscribed_diameter: f64,
    /// µm³
    pub volume: f64,
    pub region_voxels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Throat {
    /// smaller pore id
    pub pore_a: usize,
    pub pore_b: usize,
    /// µm
    pub diameter: f64,
    /// µm
    pub length: f64,
}

/// Pores with their throats and the pores touching each domain face.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoreNetwork {
    pub pores: Vec<Pore>,
    pub throats: Vec<Throat>,
    /// indexed like [`Face::ALL`]; sorted pore ids
    pub face_labels: [Vec<usize>; 6],
}

impl PoreNetwork {
    pub fn face_pores(&self, face: Face) -> &[usize] {
        &self.face_labels[face_slot(face)]
    }

    /// Faces touched by pore `id`.
    pub fn pore_faces(&self, id: usize) -> Vec<Face> {
        Face::ALL
            .into_iter()
            .filter(|&f| self.face_pores(f).binary_search(&id).is_ok())
            .collect()
    }

    pub fn total_volume(&self) -> f64 {
        self.pores.iter().map(|p| p.volume).sum()
    }

    /// Neighbour lists `(pore, throat id)` for every pore.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.pores.len()];
        for (t, th) in self.throats.iter().enumerate() {
            adj[th.pore_a].push((th.pore_b, t));
            adj[th.pore_b].push((th.pore_a, t));
        }
        adj
    }

    /// Checks the structural invariants: ids match positions, throats join
    /// distinct existing pores without duplicates, sizes are positive.
    pub fn validate(&self) -> Result<(), NetError> {
        for (i, p) in self.pores.iter().enumerate() {
            if p.id != i {
                return Err(NetError::Parse(format!("pore id {} at position {i}", p.id)));
            }
            if !(p.inscribed_diameter > 0.0) || !(p.volume >= 0.0) {
                return Err(NetError::Parse(format!("pore {i} has non-positive size")));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.throats {
            if t.pore_a >= t.pore_b || t.pore_b >= self.pores.len() {
                return Err(NetError::Parse(format!(
                    "throat ({}, {}) is not an ordered pair of existing pores",
                    t.pore_a, t.pore_b
                )));
            }
            if !seen.insert((t.pore_a, t.pore_b)) {
                return Err(NetError::Parse(format!(
                    "duplicate throat ({}, {})",
                    t.pore_a, t.pore_b
                )));
            }
            if !(t.diameter > 0.0) || !(t.length > 0.0) {
                return Err(NetError::Parse(format!(
                    "throat ({}, {}) has non-positive size",
                    t.pore_a, t.pore_b
                )));
            }
        }
        for ids in &self.face_labels {
            if ids.iter().any(|&i| i >= self.pores.len()) || ids.windows(2).any(|w| w[0] >= w[1]) {
                return Err(NetError::Parse("bad face label list".into()));
            }
        }
        Ok(())
    }
}

pub(crate) fn face_slot(face: Face) -> usize {
    Face::ALL.iter().position(|&f| f == face).expect("face in ALL")
}

/// Volume-weighted median inscribed diameter: the smallest `d` such that pores
/// with diameter `<= d` hold at least half of the pore volume.
pub fn median_pore_diameter(net: &PoreNetwork) -> Result<f64, NetError> {
    if net.pores.is_empty() {
        return Err(NetError::EmptyNetwork);
    }
    let mut v: Vec<(f64, f64)> = net
        .pores
        .iter()
        .map(|p| (p.inscribed_diameter, p.volume))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = v.iter().map(|p| p.1).sum();
    let mut cum = 0.0;
    let mut i = 0;
    while i < v.len() {
        let d = v[i].0;
        while i < v.len() && v[i].0 == d {
            cum += v[i].1;
            i += 1;
        }
        if 2.0 * cum >= total {
            return Ok(d);
        }
    }
    Ok(v[v.len() - 1].0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkStats {
    pub pore_count: usize,
    pub throat_count: usize,
    /// µm
    pub d50: f64,
    pub mean_coordination: f64,
}

pub fn network_stats(net: &PoreNetwork) -> Result<NetworkStats, NetError> {
    let d50 = median_pore_diameter(net)?;
    Ok(NetworkStats {
        pore_count: net.pores.len(),
        throat_count: net.throats.len(),
        d50,
        mean_coordination: 2.0 * net.throats.len() as f64 / net.pores.len() as f64,
    })
}
