//! Effective diffusivity and tortuosity of a conducting phase, and the
//! transport penalty caused by gas left behind after filling.

use thiserror::Error;

use crate::lbmfill::analyze_phase_image;
use crate::voxelgrid::{label_mask, Axis, Connectivity, Face, Label, VoxelImage};

#[derive(Debug, Error, PartialEq)]
pub enum TransportError {
    #[error("no conducting path connects the two {0:?} faces")]
    NonPercolating(Axis),
    #[error("images differ in size")]
    DimsMismatch,
    #[error("solver stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
}

pub const SOLVER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportResult {
    /// D_eff / D0, 0 when not percolating
    pub d_eff_ratio: f64,
    /// eps / (D_eff / D0), infinite when not percolating
    pub tortuosity: f64,
    /// conducting voxels over all voxels
    pub porosity_eff: f64,
    pub direction: Axis,
    pub percolating: bool,
    pub iterations: usize,
}

impl TransportResult {
    pub fn require_percolating(self) -> Result<Self, TransportError> {
        if self.percolating {
            Ok(self)
        } else {
            Err(TransportError::NonPercolating(self.direction))
        }
    }
}

/// Pore space that conducts before filling.
pub const OPEN_PHASES: [Label; 3] = [Label::Pore, Label::Electrolyte, Label::Gas];

/// Steady diffusion through the `conducting` voxels with c = 1 on the min
/// face of `axis`, c = 0 on the max face and no flux elsewhere.
///
/// Finite volumes on the voxel grid with unit face conductance; the
/// Dirichlet values sit on the outer voxel faces (half a voxel away, so
/// conductance 2). Only face-connected components touching both faces carry
/// flux. Solved with Jacobi-preconditioned conjugate gradients.
pub fn effective_diffusivity(
    img: &VoxelImage,
    conducting: &[Label],
    axis: Axis,
) -> Result<TransportResult, TransportError> {
    let dims = img.dims();
    let mask = img.mask(|l| conducting.contains(&l));
    let porosity_eff = mask.iter().filter(|&&m| m).count() as f64 / dims.len() as f64;
    let (inlet, outlet) = (Face::min_of(axis), Face::max_of(axis));

    let field = label_mask(&mask, dims, Connectivity::Six);
    let mut spanning = vec![false; field.count + 1];
    let on_out = field.ids_on_face(outlet);
    for id in field.ids_on_face(inlet) {
        if on_out.binary_search(&id).is_ok() {
            spanning[id as usize] = true;
        }
    }
    let nonperc = TransportResult {
        d_eff_ratio: 0.0,
        tortuosity: f64::INFINITY,
        porosity_eff,
        direction: axis,
        percolating: false,
        iterations: 0,
    };
    if !spanning.iter().any(|&s| s) {
        return Ok(nonperc);
    }

    let sys = System::assemble(img, &field.ids, &spanning, axis);
    let (c, iterations) = sys.solve()?;
    let flux: f64 = sys
        .inlet_cells
        .iter()
        .map(|&k| 2.0 * (1.0 - c[k]))
        .sum();
    let length = dims.extent(axis) as f64;
    let (u, v) = axis.others();
    let area = (dims.extent(u) * dims.extent(v)) as f64;
    let d_eff_ratio = flux * length / area;
    Ok(TransportResult {
        d_eff_ratio,
        tortuosity: porosity_eff / d_eff_ratio,
        porosity_eff,
        direction: axis,
        percolating: true,
        iterations,
    })
}

/// Sparse symmetric system over the spanning voxels.
struct System {
    diag: Vec<f64>,
    /// face neighbours as unknown indices, `usize::MAX` when absent
    nbrs: Vec<[usize; 6]>,
    rhs: Vec<f64>,
    inlet_cells: Vec<usize>,
}

impl System {
    fn assemble(img: &VoxelImage, ids: &[u32], spanning: &[bool], axis: Axis) -> Self {
        let dims = img.dims();
        let mut index = vec![usize::MAX; dims.len()];
        let mut cells = Vec::new();
        for (i, &id) in ids.iter().enumerate() {
            if id != 0 && spanning[id as usize] {
                index[i] = cells.len();
                cells.push(i);
            }
        }
        let n = cells.len();
        let (inlet, outlet) = (Face::min_of(axis), Face::max_of(axis));
        let mut sys = System {
            diag: vec![0.0; n],
            nbrs: vec![[usize::MAX; 6]; n],
            rhs: vec![0.0; n],
            inlet_cells: Vec::new(),
        };
        for (k, &i) in cells.iter().enumerate() {
            let c = dims.coords(i);
            for (s, face) in Face::ALL.iter().enumerate() {
                let mut d = [0isize; 3];
                d[face.axis().index()] = if face.is_min() { -1 } else { 1 };
                if let Some(j) = dims.offset(c, d) {
                    if index[j] != usize::MAX {
                        sys.nbrs[k][s] = index[j];
                        sys.diag[k] += 1.0;
                    }
                }
            }
            if dims.on_face(c, inlet) {
                sys.diag[k] += 2.0;
                sys.rhs[k] += 2.0;
                sys.inlet_cells.push(k);
            }
            if dims.on_face(c, outlet) {
                sys.diag[k] += 2.0;
            }
        }
        sys
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for k in 0..x.len() {
            let mut acc = self.diag[k] * x[k];
            for &j in &self.nbrs[k] {
                if j != usize::MAX {
                    acc -= x[j];
                }
            }
            y[k] = acc;
        }
    }

    fn solve(&self) -> Result<(Vec<f64>, usize), TransportError> {
        let n = self.rhs.len();
        let max_iter = (10.0 * (n as f64).powf(2.0 / 3.0)).ceil() as usize;
        let b_norm = norm(&self.rhs);
        let mut x = vec![0.0; n];
        let mut r = self.rhs.clone();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz = dot(&r, &z);
        let mut residual = norm(&r) / b_norm;
        for it in 0..max_iter {
            if residual <= SOLVER_TOL {
                return Ok((x, it));
            }
            self.apply(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..n {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
                z[k] = r[k] / self.diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..n {
                p[k] = z[k] + beta * p[k];
            }
            residual = norm(&r) / b_norm;
        }
        if residual <= SOLVER_TOL {
            return Ok((x, max_iter));
        }
        Err(TransportError::NotConverged {
            iterations: max_iter,
            residual,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntrapmentPenalty {
    pub before: TransportResult,
    pub after: TransportResult,
    /// after minus before
    pub delta_d_eff: f64,
    /// after minus before, infinite when the filled image does not percolate
    pub delta_tau: f64,
    pub wetted_solid_fraction: f64,
    pub saturation: f64,
}

/// Compares the open pore space of `before` with the electrolyte of `after`.
/// The unfilled structure must percolate.
pub fn entrapment_penalty(
    before: &VoxelImage,
    after: &VoxelImage,
    axis: Axis,
) -> Result<EntrapmentPenalty, TransportError> {
    if before.dims() != after.dims() {
        return Err(TransportError::DimsMismatch);
    }
    let b = effective_diffusivity(before, &OPEN_PHASES, axis)?.require_percolating()?;
    let a = effective_diffusivity(after, &[Label::Electrolyte], axis)?;
    let gas = analyze_phase_image(after, Some(Face::min_of(axis)), Some(Face::max_of(axis)));
    Ok(EntrapmentPenalty {
        before: b,
        after: a,
        delta_d_eff: a.d_eff_ratio - b.d_eff_ratio,
        delta_tau: a.tortuosity - b.tortuosity,
        wetted_solid_fraction: gas.wetted_solid_fraction,
        saturation: gas.final_saturation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::voxelgrid::Dims;

    fn channel(n: usize, w: usize) -> VoxelImage {
        VoxelImage::from_fn(Dims::cube(n), 1.0, |x, y, _| {
            if x < w && y < w {
                Label::Pore
            } else {
                Label::SolidBulk
            }
        })
        .unwrap()
    }

    #[test]
    fn straight_channel() {
        let img = channel(8, 3);
        let r = effective_diffusivity(&img, &OPEN_PHASES, Axis::Z).unwrap();
        let phi = 9.0 / 64.0;
        assert!((r.d_eff_ratio - phi).abs() < 1e-7);
        assert!((r.tortuosity - 1.0).abs() < 1e-6);
        let across = effective_diffusivity(&img, &OPEN_PHASES, Axis::X).unwrap();
        assert!(!across.percolating);
        assert!(across.tortuosity.is_infinite());
    }

    #[test]
    fn open_cube() {
        let img = VoxelImage::filled(Dims::new(5, 6, 7), 1.0, Label::Electrolyte).unwrap();
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let r = effective_diffusivity(&img, &[Label::Electrolyte], axis).unwrap();
            assert!((r.d_eff_ratio - 1.0).abs() < 1e-7, "{axis:?} {}", r.d_eff_ratio);
        }
    }

    #[test]
    fn blocked_channel() {
        let before = channel(6, 2);
        let mut after = before.clone();
        for l in after.labels_mut() {
            if *l == Label::Pore {
                *l = Label::Electrolyte;
            }
        }
        let full = entrapment_penalty(&before, &after, Axis::Z).unwrap();
        assert_eq!(full.delta_tau, 0.0);
        assert_eq!(full.saturation, 1.0);
        for x in 0..2 {
            for y in 0..2 {
                after.set(x, y, 3, Label::Gas);
            }
        }
        let blocked = entrapment_penalty(&before, &after, Axis::Z).unwrap();
        assert!(!blocked.after.percolating);
        assert!(blocked.delta_tau.is_infinite());
        assert!((blocked.delta_d_eff + 4.0 / 36.0).abs() < 1e-7);
    }
}
