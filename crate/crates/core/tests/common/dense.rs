//! Dense direct solve of the voxel finite-volume diffusion problem.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use porefill::{Axis, Label, VoxelImage};

/// Dense direct solve of the same finite-volume problem, built voxel by voxel.
pub fn dense_d_eff(img: &VoxelImage, conducting: &[Label], axis: Axis) -> Option<f64> {
    let d = img.dims();
    let n = d.as_array();
    let a = axis.index();
    let on = |c: [usize; 3]| conducting.contains(&img.get(c[0], c[1], c[2]));
    let nbrs = |c: [usize; 3]| {
        let mut v = Vec::new();
        for k in 0..3 {
            if c[k] > 0 {
                let mut m = c;
                m[k] -= 1;
                v.push(m);
            }
            if c[k] + 1 < n[k] {
                let mut m = c;
                m[k] += 1;
                v.push(m);
            }
        }
        v
    };
    // flood from each face over conducting voxels
    let flood = |start: usize| {
        let mut seen = vec![false; d.len()];
        let mut q = VecDeque::new();
        for i in 0..d.len() {
            let c = d.coords(i);
            if c[a] == start && on(c) {
                seen[i] = true;
                q.push_back(c);
            }
        }
        while let Some(c) = q.pop_front() {
            for m in nbrs(c) {
                let j = d.index(m[0], m[1], m[2]);
                if on(m) && !seen[j] {
                    seen[j] = true;
                    q.push_back(m);
                }
            }
        }
        seen
    };
    let (lo, hi) = (flood(0), flood(n[a] - 1));
    let cells: Vec<usize> = (0..d.len()).filter(|&i| lo[i] && hi[i]).collect();
    if cells.is_empty() {
        return None;
    }
    let mut index = vec![usize::MAX; d.len()];
    for (k, &i) in cells.iter().enumerate() {
        index[i] = k;
    }
    let m = cells.len();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (k, &i) in cells.iter().enumerate() {
        let c = d.coords(i);
        for nb in nbrs(c) {
            let j = index[d.index(nb[0], nb[1], nb[2])];
            if j != usize::MAX {
                mat[(k, k)] += 1.0;
                mat[(k, j)] -= 1.0;
            }
        }
        if c[a] == 0 {
            mat[(k, k)] += 2.0;
            rhs[k] += 2.0;
        }
        if c[a] == n[a] - 1 {
            mat[(k, k)] += 2.0;
        }
    }
    let c = mat.lu().solve(&rhs)?;
    let flux: f64 = cells
        .iter()
        .enumerate()
        .filter(|(_, &i)| d.coords(i)[a] == 0)
        .map(|(k, _)| 2.0 * (1.0 - c[k]))
        .sum();
    let area = (d.len() / n[a]) as f64;
    Some(flux * n[a] as f64 / area)
}
