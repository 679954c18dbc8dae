use super::{Dims, Label, VoxelImage};
use crate::dsu::DisjointSet;

/// Voxel adjacency used for connectivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    /// Face neighbours only.
    Six,
    /// Face, edge and corner neighbours.
    TwentySix,
}

impl Connectivity {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            6 => Some(Connectivity::Six),
            26 => Some(Connectivity::TwentySix),
            _ => None,
        }
    }

    /// All neighbour offsets for this adjacency.
    pub fn offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::new();
        for dz in -1isize..=1 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let l1 = dx.abs() + dy.abs() + dz.abs();
                    let keep = match self {
                        Connectivity::Six => l1 == 1,
                        Connectivity::TwentySix => l1 > 0,
                    };
                    if keep {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }

    /// Offsets that precede the centre voxel in linear scan order.
    fn backward_offsets(self) -> Vec<[isize; 3]> {
        self.offsets()
            .into_iter()
            .filter(|d| d[2] < 0 || (d[2] == 0 && (d[1] < 0 || (d[1] == 0 && d[0] < 0))))
            .collect()
    }
}

/// Region ids over a grid; 0 is background, regions are numbered 1..=count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    pub dims: Dims,
    pub ids: Vec<u32>,
    pub count: usize,
}

impl LabelField {
    pub fn region_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.count + 1];
        for &id in &self.ids {
            sizes[id as usize] += 1;
        }
        sizes
    }

    /// Ids of regions with at least one voxel in the boundary layer of `face`.
    pub fn ids_on_face(&self, face: super::Face) -> Vec<u32> {
        let mut seen = vec![false; self.count + 1];
        for (i, &id) in self.ids.iter().enumerate() {
            if id != 0 && self.dims.on_face(self.dims.coords(i), face) {
                seen[id as usize] = true;
            }
        }
        (1..=self.count as u32).filter(|&id| seen[id as usize]).collect()
    }
}

/// Labels connected regions of voxels whose label is in `phases`.
///
/// Regions are numbered by descending voxel count; equal sizes are ordered by
/// the smallest linear index they contain.
pub fn connected_components(
    img: &VoxelImage,
    phases: &[Label],
    connectivity: Connectivity,
) -> LabelField {
    let mask = img.mask(|l| phases.contains(&l));
    label_mask(&mask, img.dims(), connectivity)
}

/// Connected-component labelling of a boolean mask, with the same ordering
/// rule as [`connected_components`].
pub fn label_mask(mask: &[bool], dims: Dims, connectivity: Connectivity) -> LabelField {
    assert_eq!(mask.len(), dims.len());
    let back = connectivity.backward_offsets();
    let mut dsu = DisjointSet::new(dims.len());
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let c = dims.coords(i);
        for d in &back {
            if let Some(j) = dims.offset(c, *d) {
                if mask[j] {
                    dsu.union(i, j);
                }
            }
        }
    }

    // root -> (size, first index)
    let mut root_slot = vec![u32::MAX; dims.len()];
    let mut stats: Vec<(usize, usize)> = Vec::new();
    let mut roots = vec![0u32; dims.len()];
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let r = dsu.find(i);
        if root_slot[r] == u32::MAX {
            root_slot[r] = stats.len() as u32;
            stats.push((0, i));
        }
        let s = root_slot[r];
        stats[s as usize].0 += 1;
        roots[i] = s;
    }

    let mut order: Vec<usize> = (0..stats.len()).collect();
    order.sort_by(|&a, &b| stats[b].0.cmp(&stats[a].0).then(stats[a].1.cmp(&stats[b].1)));
    let mut rank = vec![0u32; stats.len()];
    for (r, &slot) in order.iter().enumerate() {
        rank[slot] = r as u32 + 1;
    }

    let ids = mask
        .iter()
        .enumerate()
        .map(|(i, &m)| if m { rank[roots[i] as usize] } else { 0 })
        .collect();
    LabelField {
        dims,
        ids,
        count: stats.len(),
    }
}
