use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use super::{face_slot, NetError, Pore, PoreNetwork, Throat};
use crate::dsu::DisjointSet;
use crate::voxelgrid::{
    label_mask, squared_distance_transform, Connectivity, Dims, Face, VoxelImage,
};

pub const UNASSIGNED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnowParams {
    /// Gaussian smoothing standard deviation, voxels
    pub sigma: f64,
    /// half-width of the cubic maximum filter, voxels
    pub maxfilter_radius: usize,
    /// peaks closer than `factor * max(dt)` are merged
    pub merge_radius_factor: f64,
}

impl Default for SnowParams {
    fn default() -> Self {
        SnowParams {
            sigma: 0.4,
            maxfilter_radius: 4,
            merge_radius_factor: 0.75,
        }
    }
}

impl SnowParams {
    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(NetError::BadParams(format!("sigma {} must be >= 0", self.sigma)));
        }
        if self.maxfilter_radius < 1 {
            return Err(NetError::BadParams("maxfilter_radius must be >= 1".into()));
        }
        if !(self.merge_radius_factor >= 0.0) || !self.merge_radius_factor.is_finite() {
            return Err(NetError::BadParams(format!(
                "merge_radius_factor {} must be >= 0",
                self.merge_radius_factor
            )));
        }
        Ok(())
    }
}

/// Network plus the watershed region of every voxel (`u32::MAX` on solid).
#[derive(Debug, Clone)]
pub struct Extraction {
    pub network: PoreNetwork,
    pub dims: Dims,
    pub regions: Vec<u32>,
    /// linear index of each pore's peak voxel
    pub peaks: Vec<usize>,
}

pub fn extract_network(img: &VoxelImage, params: &SnowParams) -> Result<PoreNetwork, NetError> {
    extract_regions(img, params).map(|e| e.network)
}

pub fn extract_regions(img: &VoxelImage, params: &SnowParams) -> Result<Extraction, NetError> {
    params.validate()?;
    let dims = img.dims();
    let vs = img.voxel_size();
    let pore = img.mask(|l| l.is_pore_space());
    if !pore.iter().any(|&p| p) {
        return Err(NetError::NoPorePhase);
    }

    let [nx, ny, nz] = dims.as_array();
    let cap = ((nx * nx + ny * ny + nz * nz) as f64).sqrt();
    let dt: Vec<f64> = squared_distance_transform(&pore, dims)
        .into_iter()
        .map(|v| v.sqrt().min(cap))
        .collect();
    let smooth = gaussian_filter(&dt, dims, params.sigma);
    let peaks = find_peaks(&smooth, &pore, dims, params.maxfilter_radius);
    let peaks = canonical_plateaus(&peaks, dims);
    let mut peaks = merge_peaks(&peaks, &dt, dims, params.merge_radius_factor);
    add_orphan_peaks(&mut peaks, &pore, &smooth, dims);
    if peaks.is_empty() {
        return Err(NetError::EmptyNetwork);
    }
    peaks.sort_unstable();

    let regions = watershed(&smooth, &pore, &peaks, dims);

    let mut counts = vec![0usize; peaks.len()];
    for &r in &regions {
        if r != UNASSIGNED {
            counts[r as usize] += 1;
        }
    }
    let pores: Vec<Pore> = peaks
        .iter()
        .enumerate()
        .map(|(id, &p)| {
            let c = dims.coords(p);
            Pore {
                id,
                center: [
                    (c[0] as f64 + 0.5) * vs,
                    (c[1] as f64 + 0.5) * vs,
                    (c[2] as f64 + 0.5) * vs,
                ],
                inscribed_diameter: 2.0 * dt[p] * vs,
                volume: counts[id] as f64 * vs * vs * vs,
                region_voxels: counts[id],
            }
        })
        .collect();

    // throats: widest constriction across each region interface
    let mut contacts: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    let forward: Vec<[isize; 3]> = Connectivity::TwentySix.offsets()[..]
        .iter()
        .copied()
        .filter(|d| (d[2], d[1], d[0]) > (0, 0, 0))
        .collect();
    for i in 0..dims.len() {
        let ri = regions[i];
        if ri == UNASSIGNED {
            continue;
        }
        let c = dims.coords(i);
        for &d in &forward {
            let Some(j) = dims.offset(c, d) else { continue };
            let rj = regions[j];
            if rj == UNASSIGNED || rj == ri {
                continue;
            }
            let key = (ri.min(rj), ri.max(rj));
            let v = dt[i].min(dt[j]);
            let e = contacts.entry(key).or_insert(0.0);
            if v > *e {
                *e = v;
            }
        }
    }
    let throats = contacts
        .into_iter()
        .map(|((a, b), v)| {
            let (pa, pb) = (&pores[a as usize], &pores[b as usize]);
            let dist = (0..3)
                .map(|k| (pa.center[k] - pb.center[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            let length = dist - 0.5 * (pa.inscribed_diameter + pb.inscribed_diameter);
            Throat {
                pore_a: a as usize,
                pore_b: b as usize,
                diameter: 2.0 * v * vs,
                length: length.max(vs),
            }
        })
        .collect();

    let mut face_labels: [Vec<usize>; 6] = Default::default();
    for face in Face::ALL {
        let mut hit = vec![false; peaks.len()];
        for (i, &r) in regions.iter().enumerate() {
            if r != UNASSIGNED && dims.on_face(dims.coords(i), face) {
                hit[r as usize] = true;
            }
        }
        face_labels[face_slot(face)] = (0..peaks.len()).filter(|&p| hit[p]).collect();
    }

    Ok(Extraction {
        network: PoreNetwork {
            pores,
            throats,
            face_labels,
        },
        dims,
        regions,
        peaks,
    })
}

/// Separable Gaussian filter with clamp-to-edge boundaries.
pub(crate) fn gaussian_filter(v: &[f64], dims: Dims, sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return v.to_vec();
    }
    let radius = (4.0 * sigma).ceil().max(1.0) as isize;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = kernel.iter().sum();
    for w in &mut kernel {
        *w /= norm;
    }
    let mut cur = v.to_vec();
    let n = dims.as_array();
    for axis in 0..3 {
        let len = n[axis] as isize;
        let stride = [1, n[0], n[0] * n[1]][axis];
        let mut out = vec![0.0; cur.len()];
        for i in 0..dims.len() {
            let c = dims.coords(i)[axis] as isize;
            let base = i - c as usize * stride;
            let mut acc = 0.0;
            for (t, w) in kernel.iter().enumerate() {
                let p = (c + t as isize - radius).clamp(0, len - 1) as usize;
                acc += w * cur[base + p * stride];
            }
            out[i] = acc;
        }
        cur = out;
    }
    cur
}

/// Cubic maximum filter of half-width `r` (outside voxels are ignored).
pub(crate) fn max_filter(v: &[f64], dims: Dims, r: usize) -> Vec<f64> {
    let mut cur = v.to_vec();
    let n = dims.as_array();
    for axis in 0..3 {
        let len = n[axis];
        let stride = [1, n[0], n[0] * n[1]][axis];
        let mut out = vec![0.0; cur.len()];
        for i in 0..dims.len() {
            let c = dims.coords(i)[axis];
            let base = i - c * stride;
            let lo = c.saturating_sub(r);
            let hi = (c + r).min(len - 1);
            out[i] = (lo..=hi)
                .map(|p| cur[base + p * stride])
                .fold(f64::NEG_INFINITY, f64::max);
        }
        cur = out;
    }
    cur
}

fn find_peaks(smooth: &[f64], pore: &[bool], dims: Dims, r: usize) -> Vec<bool> {
    let mf = max_filter(smooth, dims, r);
    (0..dims.len())
        .map(|i| pore[i] && smooth[i] > 0.0 && smooth[i] >= mf[i])
        .collect()
}

/// One voxel per 26-connected cluster of peak voxels: the smallest index.
pub(crate) fn canonical_plateaus(peaks: &[bool], dims: Dims) -> Vec<usize> {
    let field = label_mask(peaks, dims, Connectivity::TwentySix);
    let mut taken = vec![false; field.count + 1];
    let mut out = Vec::new();
    for (i, &id) in field.ids.iter().enumerate() {
        if id != 0 && !taken[id as usize] {
            taken[id as usize] = true;
            out.push(i);
        }
    }
    out
}

/// Joins peaks closer than `factor * max(dt)` transitively and keeps the peak
/// with the largest distance value of each group (smallest index on ties).
/// Merging is a union of pair relations, so the result does not depend on the
/// order in which pairs are visited and coarsens as `factor` grows.
pub(crate) fn merge_peaks(peaks: &[usize], dt: &[f64], dims: Dims, factor: f64) -> Vec<usize> {
    let n = peaks.len();
    let pos: Vec<[f64; 3]> = peaks
        .iter()
        .map(|&p| {
            let c = dims.coords(p);
            [c[0] as f64, c[1] as f64, c[2] as f64]
        })
        .collect();
    let mut dsu = DisjointSet::new(n);
    for a in 0..n {
        for b in a + 1..n {
            let d2: f64 = (0..3).map(|k| (pos[a][k] - pos[b][k]).powi(2)).sum();
            let reach = factor * dt[peaks[a]].max(dt[peaks[b]]);
            if d2.sqrt() < reach {
                dsu.union(a, b);
            }
        }
    }
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for a in 0..n {
        let root = dsu.find(a);
        let e = best.entry(root).or_insert(a);
        let (cur, cand) = (peaks[*e], peaks[a]);
        if dt[cand] > dt[cur] || (dt[cand] == dt[cur] && cand < cur) {
            *e = a;
        }
    }
    let mut out: Vec<usize> = best.values().map(|&a| peaks[a]).collect();
    out.sort_unstable();
    out
}

/// Gives every 26-connected pore component without a peak its highest voxel,
/// so the watershed covers the whole pore space.
fn add_orphan_peaks(peaks: &mut Vec<usize>, pore: &[bool], smooth: &[f64], dims: Dims) {
    let comps = label_mask(pore, dims, Connectivity::TwentySix);
    let mut has = vec![false; comps.count + 1];
    has[0] = true;
    for &p in peaks.iter() {
        has[comps.ids[p] as usize] = true;
    }
    let mut top: Vec<Option<usize>> = vec![None; comps.count + 1];
    for (i, &id) in comps.ids.iter().enumerate() {
        if has[id as usize] {
            continue;
        }
        let t = &mut top[id as usize];
        if t.map_or(true, |j| smooth[i] > smooth[j]) {
            *t = Some(i);
        }
    }
    peaks.extend(top.into_iter().flatten());
}

struct Entry {
    height: f64,
    order: u64,
    voxel: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // highest distance first, then first queued
    fn cmp(&self, other: &Self) -> Ordering {
        self.height
            .total_cmp(&other.height)
            .then_with(|| other.order.cmp(&self.order))
    }
}

/// Marker watershed flooding the negated map from the peaks over pore voxels
/// with 26-connectivity. A voxel takes the label of whichever basin reaches it
/// first; ties resolve by queue order.
pub(crate) fn watershed(smooth: &[f64], pore: &[bool], markers: &[usize], dims: Dims) -> Vec<u32> {
    let offsets = Connectivity::TwentySix.offsets();
    let mut label = vec![UNASSIGNED; dims.len()];
    let mut heap = BinaryHeap::new();
    let mut order = 0u64;
    for (id, &m) in markers.iter().enumerate() {
        label[m] = id as u32;
        heap.push(Entry {
            height: smooth[m],
            order,
            voxel: m,
        });
        order += 1;
    }
    while let Some(Entry { voxel, .. }) = heap.pop() {
        let c = dims.coords(voxel);
        for &d in &offsets {
            let Some(j) = dims.offset(c, d) else { continue };
            if pore[j] && label[j] == UNASSIGNED {
                label[j] = label[voxel];
                heap.push(Entry {
                    height: smooth[j],
                    order,
                    voxel: j,
                });
                order += 1;
            }
        }
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxelgrid::Label;

    fn balls(dims: Dims, spheres: &[([f64; 3], f64)]) -> VoxelImage {
        VoxelImage::from_fn(dims, 1.0, |x, y, z| {
            let inside = spheres.iter().any(|(c, r)| {
                let d2 = (x as f64 - c[0]).powi(2) + (y as f64 - c[1]).powi(2) + (z as f64 - c[2]).powi(2);
                d2 <= r * r
            });
            if inside {
                Label::Pore
            } else {
                Label::SolidBulk
            }
        })
        .unwrap()
    }

    #[test]
    fn single_sphere_is_one_pore() {
        let img = balls(Dims::cube(21), &[([10.0; 3], 8.0)]);
        let net = extract_network(&img, &SnowParams::default()).unwrap();
        assert_eq!(net.pores.len(), 1);
        assert!(net.throats.is_empty());
        assert_eq!(net.pores[0].region_voxels, img.count(Label::Pore));
    }

    #[test]
    fn two_overlapping_spheres() {
        let img = balls(Dims::new(48, 30, 30), &[([12.0, 15.0, 15.0], 10.0), ([27.0, 15.0, 15.0], 8.0)]);
        let ex = extract_regions(&img, &SnowParams::default()).unwrap();
        let net = &ex.network;
        assert_eq!(net.pores.len(), 2);
        assert_eq!(net.throats.len(), 1);
        let mut d: Vec<f64> = net.pores.iter().map(|p| p.inscribed_diameter).collect();
        d.sort_by(f64::total_cmp);
        assert!((d[0] - 16.0).abs() <= 2.0 && (d[1] - 20.0).abs() <= 2.0, "{d:?}");
        let total: usize = net.pores.iter().map(|p| p.region_voxels).sum();
        assert_eq!(total, img.count(Label::Pore));
    }

    #[test]
    fn straight_channel_is_one_pore() {
        let img = VoxelImage::from_fn(Dims::new(12, 12, 40), 1.0, |x, y, _| {
            let d2 = (x as f64 - 5.5).powi(2) + (y as f64 - 5.5).powi(2);
            if d2 <= 16.0 {
                Label::Pore
            } else {
                Label::SolidBulk
            }
        })
        .unwrap();
        let net = extract_network(&img, &SnowParams::default()).unwrap();
        assert_eq!(net.pores.len(), 1);
        assert!(net.throats.is_empty());
        assert_eq!(net.face_pores(Face::ZMin), &[0]);
        assert_eq!(net.face_pores(Face::ZMax), &[0]);
    }

    #[test]
    fn gaussian_preserves_constants_and_mass() {
        let dims = Dims::new(5, 4, 3);
        let v = vec![2.5; dims.len()];
        for x in gaussian_filter(&v, dims, 0.7) {
            assert!((x - 2.5).abs() < 1e-12);
        }
        assert_eq!(gaussian_filter(&v, dims, 0.0), v);
    }

    #[test]
    fn max_filter_matches_brute_force() {
        let dims = Dims::new(7, 5, 6);
        let v: Vec<f64> = (0..dims.len()).map(|i| ((i * 37) % 11) as f64).collect();
        let mf = max_filter(&v, dims, 2);
        for i in 0..dims.len() {
            let c = dims.coords(i);
            let mut m = f64::NEG_INFINITY;
            for j in 0..dims.len() {
                let d = dims.coords(j);
                if (0..3).all(|k| (c[k] as isize - d[k] as isize).abs() <= 2) {
                    m = m.max(v[j]);
                }
            }
            assert_eq!(mf[i], m);
        }
    }

    #[test]
    fn rejects_solid_only() {
        let img = VoxelImage::filled(Dims::cube(4), 1.0, Label::SolidBulk).unwrap();
        assert!(matches!(
            extract_network(&img, &SnowParams::default()),
            Err(NetError::NoPorePhase)
        ));
    }
}
