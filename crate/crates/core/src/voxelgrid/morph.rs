use super::{Axis, Face, Label, VoxelError, VoxelImage};

const FACE_OFFSETS: [[isize; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

/// Splits the solid phase into bulk and interface voxels.
///
/// A solid voxel becomes SOLID_INTERFACE when at least one of its six face
/// neighbours is not solid. The outside of the domain counts as solid.
pub fn classify_solid(img: &VoxelImage) -> VoxelImage {
    classify_solid_open(img, &[])
}

/// Like [`classify_solid`], but the outside of each face in `open_faces`
/// counts as fluid (a reservoir attached to that face).
pub fn classify_solid_open(img: &VoxelImage, open_faces: &[Face]) -> VoxelImage {
    let dims = img.dims();
    let src = img.labels();
    let mut out = img.clone();
    for (i, label) in out.labels_mut().iter_mut().enumerate() {
        if !src[i].is_solid() {
            continue;
        }
        let c = dims.coords(i);
        let exposed = FACE_OFFSETS.iter().enumerate().any(|(k, d)| match dims.offset(c, *d) {
            Some(j) => !src[j].is_solid(),
            None => open_faces.contains(&Face::ALL[k]),
        });
        *label = if exposed {
            Label::SolidInterface
        } else {
            Label::SolidBulk
        };
    }
    out
}

/// Square pattern of cylindrical holes drilled from the min face of `axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perforation {
    /// µm
    pub hole_diameter: f64,
    /// centre-to-centre spacing, µm
    pub pitch: f64,
    /// µm from the entry face
    pub depth: f64,
    pub axis: Axis,
}

/// Removes solid inside each hole; pore voxels are left alone.
///
/// Hole centres sit at `(i + 1/2) * pitch` along both in-plane axes. A voxel is
/// drilled when its centre lies within `hole_diameter / 2` of a hole axis and
/// no deeper than `depth`. If the input already carries interface labels the
/// result is re-classified so the bulk/interface split stays consistent.
pub fn perforate(img: &VoxelImage, p: &Perforation) -> Result<VoxelImage, VoxelError> {
    if !(p.hole_diameter > 0.0) || p.hole_diameter >= p.pitch {
        return Err(VoxelError::BadGeometry(format!(
            "hole diameter {} must be positive and below the pitch {}",
            p.hole_diameter, p.pitch
        )));
    }
    let dims = img.dims();
    let vs = img.voxel_size();
    let extent = dims.extent(p.axis) as f64 * vs;
    if p.depth < 0.0 || p.depth > extent + 1e-9 * extent {
        return Err(VoxelError::Precondition(format!(
            "depth {} outside [0, {extent}]",
            p.depth
        )));
    }
    let (u_axis, v_axis) = p.axis.others();
    let (nu, nv) = (dims.extent(u_axis), dims.extent(v_axis));
    let a = p.axis.index();
    let r2 = (p.hole_diameter / 2.0).powi(2);

    // in-plane footprint: true where any hole covers the column
    let mut footprint = vec![false; nu * nv];
    let centres_u = hole_centres(nu as f64 * vs, p.pitch);
    let centres_v = hole_centres(nv as f64 * vs, p.pitch);
    for iv in 0..nv {
        let pv = (iv as f64 + 0.5) * vs;
        for iu in 0..nu {
            let pu = (iu as f64 + 0.5) * vs;
            footprint[iu + nu * iv] = centres_u.iter().any(|&cu| {
                centres_v
                    .iter()
                    .any(|&cv| (pu - cu).powi(2) + (pv - cv).powi(2) <= r2)
            });
        }
    }

    let had_interface = img.labels().contains(&Label::SolidInterface);
    let mut out = img.clone();
    for i in 0..dims.len() {
        let c = dims.coords(i);
        if (c[a] as f64 + 0.5) * vs > p.depth {
            continue;
        }
        if footprint[c[u_axis.index()] + nu * c[v_axis.index()]] && out.labels()[i].is_solid() {
            out.labels_mut()[i] = Label::Pore;
        }
    }
    Ok(if had_interface {
        classify_solid(&out)
    } else {
        out
    })
}

fn hole_centres(extent: f64, pitch: f64) -> Vec<f64> {
    (0..)
        .map(|i| (i as f64 + 0.5) * pitch)
        .take_while(|&c| c < extent)
        .collect()
}
