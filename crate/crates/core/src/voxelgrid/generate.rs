use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Dims, Label, VoxelError, VoxelImage};

const MAX_ATTEMPTS: usize = 1_000_000;
const POROSITY_TOL: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePackParams {
    pub dims: Dims,
    /// µm per voxel edge
    pub voxel_size: f64,
    /// µm
    pub radius_mean: f64,
    /// µm
    pub radius_sd: f64,
    pub target_porosity: f64,
    pub seed: u64,
}

/// Overlapping-sphere (Boolean model) solid phase in an open pore space.
///
/// Spheres with normally distributed radii are placed one at a time at
/// uniformly random centres. A sphere is rejected if it would push the
/// porosity more than 0.02 below the target; placement stops as soon as the
/// porosity is at or below the target.
pub fn generate_sphere_pack(p: &SpherePackParams) -> Result<VoxelImage, VoxelError> {
    if !(p.target_porosity > 0.0 && p.target_porosity < 1.0) {
        return Err(VoxelError::Precondition(format!(
            "target porosity must lie in (0, 1), got {}",
            p.target_porosity
        )));
    }
    if !(p.voxel_size > 0.0) || p.radius_mean < 2.0 * p.voxel_size || !(p.radius_sd >= 0.0) {
        return Err(VoxelError::Precondition(format!(
            "need radius_mean >= 2 voxels and radius_sd >= 0 (mean {}, sd {}, voxel {})",
            p.radius_mean, p.radius_sd, p.voxel_size
        )));
    }
    let mut img = VoxelImage::filled(p.dims, p.voxel_size, Label::Pore)?;
    let dims = p.dims;
    let total = dims.len() as f64;
    let mut solid = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let radius = Normal::new(p.radius_mean / p.voxel_size, p.radius_sd / p.voxel_size)
        .map_err(|e| VoxelError::Precondition(e.to_string()))?;
    let mut scratch: Vec<usize> = Vec::new();

    for _ in 0..MAX_ATTEMPTS {
        let porosity = 1.0 - solid as f64 / total;
        if porosity <= p.target_porosity {
            return Ok(img);
        }
        let r: f64 = radius.sample(&mut rng).max(1.0);
        let c = [
            rng.random::<f64>() * dims.nx as f64,
            rng.random::<f64>() * dims.ny as f64,
            rng.random::<f64>() * dims.nz as f64,
        ];
        scratch.clear();
        rasterize_ball(dims, c, r, |i| {
            if img.labels()[i] == Label::Pore {
                scratch.push(i);
            }
        });
        let after = 1.0 - (solid + scratch.len()) as f64 / total;
        if after < p.target_porosity - POROSITY_TOL {
            continue;
        }
        for &i in &scratch {
            img.labels_mut()[i] = Label::SolidBulk;
        }
        solid += scratch.len();
    }
    let reached = 1.0 - solid as f64 / total;
    if reached <= p.target_porosity {
        return Ok(img);
    }
    Err(VoxelError::UnreachablePorosity {
        attempts: MAX_ATTEMPTS,
        reached,
    })
}

/// Calls `f` with the index of every voxel whose centre lies within `r` of `c`
/// (coordinates in voxel units, voxel `i` centred at `i + 0.5`).
pub(crate) fn rasterize_ball(dims: Dims, c: [f64; 3], r: f64, mut f: impl FnMut(usize)) {
    let n = dims.as_array();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for k in 0..3 {
        let a = (c[k] - r - 0.5).ceil().max(0.0);
        let b = (c[k] + r - 0.5).floor().min(n[k] as f64 - 1.0);
        if a > b {
            return;
        }
        lo[k] = a as usize;
        hi[k] = b as usize;
    }
    let r2 = r * r;
    for z in lo[2]..=hi[2] {
        let dz = z as f64 + 0.5 - c[2];
        for y in lo[1]..=hi[1] {
            let dy = y as f64 + 0.5 - c[1];
            for x in lo[0]..=hi[0] {
                let dx = x as f64 + 0.5 - c[0];
                if dx * dx + dy * dy + dz * dz <= r2 {
                    f(dims.index(x, y, z));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxelgrid::porosity;

    fn params(target: f64, seed: u64) -> SpherePackParams {
        SpherePackParams {
            dims: Dims::cube(64),
            voxel_size: 1.0,
            radius_mean: 6.0,
            radius_sd: 1.0,
            target_porosity: target,
            seed,
        }
    }

    #[test]
    fn rejects_degenerate_porosity() {
        assert!(generate_sphere_pack(&params(1.0, 7)).is_err());
        assert!(generate_sphere_pack(&params(0.0, 7)).is_err());
        let mut p = params(0.5, 7);
        p.radius_mean = 1.5;
        assert!(generate_sphere_pack(&p).is_err());
    }

    #[test]
    fn hits_target_porosity() {
        let img = generate_sphere_pack(&params(0.5, 7)).unwrap();
        let eps = porosity(&img);
        assert!((0.48..=0.52).contains(&eps), "porosity {eps}");
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_sphere_pack(&params(0.5, 7)).unwrap();
        let b = generate_sphere_pack(&params(0.5, 7)).unwrap();
        assert_eq!(a.labels(), b.labels());
        let c = generate_sphere_pack(&params(0.5, 8)).unwrap();
        assert_ne!(a.labels(), c.labels());
    }

    #[test]
    fn ball_rasterization_clips_to_box() {
        let dims = Dims::cube(8);
        let mut n = 0;
        rasterize_ball(dims, [0.0, 0.0, 0.0], 3.0, |_| n += 1);
        // octant of a radius-3 ball sampled at half-integer centres
        let mut brute = 0;
        for z in 0..8 {
            for y in 0..8 {
                for x in 0..8 {
                    let d2 = [x, y, z].iter().map(|&v| (v as f64 + 0.5).powi(2)).sum::<f64>();
                    if d2 <= 9.0 {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(n, brute);
        let mut outside = 0;
        rasterize_ball(dims, [-10.0, 4.0, 4.0], 3.0, |_| outside += 1);
        assert_eq!(outside, 0);
    }
}
