use rayon::prelude::*;

use super::{Dims, Label, VoxelImage};

/// Per-voxel distances in voxel units, same layout as the source image.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    pub dims: Dims,
    pub values: Vec<f64>,
}

impl DistanceField {
    #[inline]
    pub fn at(&self, x: usize, y: usize, z: usize) -> f64 {
        self.values[self.dims.index(x, y, z)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Exact Euclidean distance from every `phase` voxel to the nearest voxel with
/// a different label; zero on non-`phase` voxels.
///
/// Only voxels inside the image count as obstacles. An image consisting
/// entirely of `phase` yields `+inf` everywhere.
pub fn distance_transform(img: &VoxelImage, phase: Label) -> DistanceField {
    let mask = img.mask(|l| l == phase);
    let mut values = squared_distance_transform(&mask, img.dims());
    for v in &mut values {
        *v = v.sqrt();
    }
    DistanceField {
        dims: img.dims(),
        values,
    }
}

/// Squared Euclidean distance transform of a boolean mask: for each `true`
/// voxel, the squared distance to the nearest `false` voxel.
///
/// Separable lower-envelope-of-parabolas algorithm, one pass per axis. All
/// intermediate values are sums of squared integers, so results are exact.
pub fn squared_distance_transform(mask: &[bool], dims: Dims) -> Vec<f64> {
    assert_eq!(mask.len(), dims.len());
    let mut g: Vec<f64> = mask
        .iter()
        .map(|&m| if m { f64::INFINITY } else { 0.0 })
        .collect();
    let [nx, ny, nz] = dims.as_array();

    // x lines are contiguous
    g.par_chunks_mut(nx).for_each(|line| {
        let mut buf = Workspace::new(nx);
        buf.transform(line);
    });

    // y lines: process each z-slab independently
    g.par_chunks_mut(nx * ny).for_each(|slab| {
        let mut buf = Workspace::new(ny);
        let mut line = vec![0.0; ny];
        for x in 0..nx {
            for y in 0..ny {
                line[y] = slab[x + nx * y];
            }
            buf.transform(&mut line);
            for y in 0..ny {
                slab[x + nx * y] = line[y];
            }
        }
    });

    // z lines: gather columns per y row
    if nz > 1 {
        let plane = nx * ny;
        let columns: Vec<Vec<f64>> = (0..plane)
            .into_par_iter()
            .map(|p| {
                let mut buf = Workspace::new(nz);
                let mut line: Vec<f64> = (0..nz).map(|z| g[p + plane * z]).collect();
                buf.transform(&mut line);
                line
            })
            .collect();
        for (p, col) in columns.iter().enumerate() {
            for (z, v) in col.iter().enumerate() {
                g[p + plane * z] = *v;
            }
        }
    }
    g
}

struct Workspace {
    v: Vec<usize>,
    z: Vec<f64>,
    out: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            v: vec![0; n],
            z: vec![0.0; n + 1],
            out: vec![0.0; n],
        }
    }

    /// In-place 1D squared distance transform of sampled function `f`.
    fn transform(&mut self, f: &mut [f64]) {
        let n = f.len();
        // parabolas are only rooted at finite samples
        let mut k: isize = -1;
        for q in 0..n {
            if !f[q].is_finite() {
                continue;
            }
            if k < 0 {
                k = 0;
                self.v[0] = q;
                self.z[0] = f64::NEG_INFINITY;
                self.z[1] = f64::INFINITY;
                continue;
            }
            loop {
                let p = self.v[k as usize];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * (q as f64 - p as f64));
                if s <= self.z[k as usize] {
                    k -= 1;
                    if k < 0 {
                        break;
                    }
                } else {
                    break;
                }
            }
            if k < 0 {
                k = 0;
                self.v[0] = q;
                self.z[0] = f64::NEG_INFINITY;
                self.z[1] = f64::INFINITY;
                continue;
            }
            let p = self.v[k as usize];
            let s =
                ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            k += 1;
            self.v[k as usize] = q;
            self.z[k as usize] = s;
            self.z[k as usize + 1] = f64::INFINITY;
        }
        if k < 0 {
            return; // no finite samples: leave the line at +inf
        }
        let mut j = 0usize;
        for q in 0..n {
            while self.z[j + 1] < q as f64 {
                j += 1;
            }
            let p = self.v[j];
            let d = q as f64 - p as f64;
            self.out[q] = d * d + f[p];
        }
        f.copy_from_slice(&self.out[..n]);
    }
}
