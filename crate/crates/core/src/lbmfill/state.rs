use std::ops::Range;
use std::sync::Arc;

use rayon::{ThreadPool, ThreadPoolBuilder};
use sha2::{Digest, Sha256};

use super::d3q19::{equilibrium, ef, E, OPP, Q, W};
use super::{LbmError, ShanChenParams};
use crate::voxelgrid::{
    classify_solid_open, label_mask, Axis, Connectivity, Dims, Face, Label, VoxelImage,
};

/// Populations per lattice site: 19 for each of the two components.
pub(crate) const STRIDE: usize = 2 * Q;
pub(crate) const NONE: u32 = u32::MAX;

/// Number of lattice layers added in front of the inlet and behind the outlet.
/// The outermost one holds the boundary density.
pub const RESERVOIR_LAYERS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CellType {
    Fluid = 0,
    SolidInterface = 1,
    SolidBulk = 2,
    Inlet = 3,
    Outlet = 4,
}

impl CellType {
    #[inline]
    pub fn is_solid(self) -> bool {
        matches!(self, CellType::SolidInterface | CellType::SolidBulk)
    }
}

/// Placement of the voxel image inside the (possibly padded) lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageRegion {
    pub offset: [usize; 3],
    pub dims: Dims,
    /// inlet and outlet faces of the image, when the lattice was built for filling
    pub flow: Option<(Face, Face)>,
}

/// Two-component lattice: populations live only on non-solid sites ("slots").
///
/// Solid sites own no storage. Streaming is a pull with half-way bounce-back,
/// using a precomputed source table, so bulk solid is never visited and
/// interface solid is only consulted through the table and the per-slot wall
/// vector used for adhesion.
#[derive(Clone)]
pub struct LatticeState {
    pub(crate) dims: Dims,
    pub(crate) cell_type: Vec<CellType>,
    pub(crate) slot_of: Vec<u32>,
    pub(crate) cells: Vec<u32>,
    pub(crate) kind: Vec<CellType>,
    /// `nbr[s * Q + q]`: slot at `x - e_q`, or `NONE` for a wall
    pub(crate) nbr: Vec<u32>,
    /// sum of `w_q e_q` over interface-solid neighbours
    pub(crate) wall: Vec<[f64; 3]>,
    pub(crate) f: Vec<f64>,
    pub(crate) f_tmp: Vec<f64>,
    pub(crate) rho: Vec<[f64; 2]>,
    pub(crate) step: u64,
    pub(crate) inlet_rho: [f64; 2],
    pub(crate) outlet_rho: [f64; 2],
    pub(crate) region: ImageRegion,
    pub(crate) pore_path: bool,
    pub(crate) workers: usize,
    pub(crate) pool: Arc<ThreadPool>,
    pub(crate) slabs: Vec<Range<usize>>,
}

impl std::fmt::Debug for LatticeState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LatticeState")
            .field("dims", &self.dims)
            .field("slots", &self.cells.len())
            .field("step", &self.step)
            .field("workers", &self.workers)
            .finish()
    }
}

/// Initial condition of one fluid site: densities `[a, b]` and a common velocity.
pub type SiteInit = ([f64; 2], [f64; 3]);

impl LatticeState {
    /// Builds a lattice from explicit cell types. `init` is called for every
    /// non-solid cell index; inlet and outlet cells are held at the densities
    /// they are initialised with until [`LatticeState::set_boundary_densities`].
    pub fn from_cells(
        dims: Dims,
        cell_type: Vec<CellType>,
        periodic: [bool; 3],
        workers: usize,
        mut init: impl FnMut(usize) -> SiteInit,
    ) -> Result<Self, LbmError> {
        assert_eq!(cell_type.len(), dims.len());
        let mut slot_of = vec![NONE; dims.len()];
        let mut cells = Vec::new();
        for (i, t) in cell_type.iter().enumerate() {
            if !t.is_solid() {
                slot_of[i] = cells.len() as u32;
                cells.push(i as u32);
            }
        }
        if cells.is_empty() {
            return Err(LbmError::NoFluid);
        }
        let n = cells.len();
        let mut nbr = vec![NONE; n * Q];
        let mut wall = vec![[0.0; 3]; n];
        let kind: Vec<CellType> = cells.iter().map(|&c| cell_type[c as usize]).collect();
        for (s, &cell) in cells.iter().enumerate() {
            let c = dims.coords(cell as usize);
            for q in 1..Q {
                // source of the population travelling along e_q
                let back = [-E[q][0] as isize, -E[q][1] as isize, -E[q][2] as isize];
                if let Some(j) = neighbour(dims, periodic, c, back) {
                    if !cell_type[j].is_solid() {
                        nbr[s * Q + q] = slot_of[j];
                    }
                }
                let fwd = [E[q][0] as isize, E[q][1] as isize, E[q][2] as isize];
                if let Some(j) = neighbour(dims, periodic, c, fwd) {
                    if cell_type[j] == CellType::SolidInterface {
                        let e = ef(q);
                        for k in 0..3 {
                            wall[s][k] += W[q] * e[k];
                        }
                    }
                }
            }
        }

        let mut f = vec![0.0; n * STRIDE];
        let mut rho = vec![[0.0; 2]; n];
        let mut inlet_rho = [0.0; 2];
        let mut outlet_rho = [0.0; 2];
        for (s, &cell) in cells.iter().enumerate() {
            let (r, u) = init(cell as usize);
            if r.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(LbmError::Precondition(format!("bad initial density {r:?}")));
            }
            equilibrium(r[0], u, &mut f[s * STRIDE..s * STRIDE + Q]);
            equilibrium(r[1], u, &mut f[s * STRIDE + Q..(s + 1) * STRIDE]);
            rho[s] = r;
            match kind[s] {
                CellType::Inlet => inlet_rho = r,
                CellType::Outlet => outlet_rho = r,
                _ => {}
            }
        }

        let workers = workers.max(1);
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| LbmError::Precondition(format!("thread pool: {e}")))?;
        let slabs = slab_ranges(dims, &cells, workers);
        Ok(LatticeState {
            dims,
            cell_type,
            slot_of,
            f_tmp: f.clone(),
            f,
            cells,
            kind,
            nbr,
            wall,
            rho,
            step: 0,
            inlet_rho,
            outlet_rho,
            region: ImageRegion {
                offset: [0; 3],
                dims,
                flow: None,
            },
            pore_path: true,
            workers,
            pool: Arc::new(pool),
            slabs,
        })
    }

    /// Re-partitions the slab decomposition for a different worker count.
    pub fn set_workers(&mut self, workers: usize) -> Result<(), LbmError> {
        let workers = workers.max(1);
        self.pool = Arc::new(
            ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| LbmError::Precondition(format!("thread pool: {e}")))?,
        );
        self.slabs = slab_ranges(self.dims, &self.cells, workers);
        self.workers = workers;
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn region(&self) -> ImageRegion {
        self.region
    }

    /// False when no face-connected pore path joins inlet and outlet.
    pub fn has_pore_path(&self) -> bool {
        self.pore_path
    }

    pub fn cell_type(&self, cell: usize) -> CellType {
        self.cell_type[cell]
    }

    pub fn cell_types(&self) -> &[CellType] {
        &self.cell_type
    }

    /// Number of sites the kernel updates each step.
    pub fn active_sites(&self) -> usize {
        self.cells.len()
    }

    pub fn count(&self, t: CellType) -> usize {
        self.cell_type.iter().filter(|&&c| c == t).count()
    }

    /// Densities `[a, b]` at lattice cell `cell`; zero on solid cells.
    pub fn densities(&self, cell: usize) -> [f64; 2] {
        match self.slot_of[cell] {
            NONE => [0.0; 2],
            s => self.rho[s as usize],
        }
    }

    /// Population storage `[f_a(19), f_b(19)]` of a cell, if it is not solid.
    pub fn populations(&self, cell: usize) -> Option<&[f64]> {
        match self.slot_of[cell] {
            NONE => None,
            s => Some(&self.f[s as usize * STRIDE..(s as usize + 1) * STRIDE]),
        }
    }

    pub fn distributions(&self) -> &[f64] {
        &self.f
    }

    /// Total mass of each component, summed in fixed site order.
    pub fn masses(&self) -> [f64; 2] {
        let mut m = [0.0; 2];
        for r in &self.rho {
            m[0] += r[0];
            m[1] += r[1];
        }
        m
    }

    /// SHA-256 of all populations (little-endian f64), hex encoded.
    pub fn state_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.f {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Barycentric fluid velocity including the half-force correction.
    pub fn velocity(&self, cell: usize, params: &ShanChenParams) -> [f64; 3] {
        let s = match self.slot_of[cell] {
            NONE => return [0.0; 3],
            s => s as usize,
        };
        let mut j = [0.0; 3];
        for q in 1..Q {
            let e = ef(q);
            let w = self.f[s * STRIDE + q] + self.f[s * STRIDE + Q + q];
            for k in 0..3 {
                j[k] += w * e[k];
            }
        }
        let [ra, rb] = self.rho[s];
        let acc = self.accelerations(s, params);
        let total = ra + rb;
        if total <= 0.0 {
            return [0.0; 3];
        }
        let mut u = [0.0; 3];
        for k in 0..3 {
            u[k] = (j[k] + 0.5 * (ra * acc[0][k] + rb * acc[1][k])) / total;
        }
        u
    }

    /// Force per unit density on each component at slot `s`.
    #[inline(always)]
    pub(crate) fn accelerations(&self, s: usize, p: &ShanChenParams) -> [[f64; 3]; 2] {
        let mut sa = [0.0; 3];
        let mut sb = [0.0; 3];
        for q in 1..Q {
            let n = self.nbr[s * Q + OPP[q]];
            if n == NONE {
                continue;
            }
            let r = self.rho[n as usize];
            let e = ef(q);
            for k in 0..3 {
                sa[k] += W[q] * r[0] * e[k];
                sb[k] += W[q] * r[1] * e[k];
            }
        }
        let w = self.wall[s];
        let mut out = [[0.0; 3]; 2];
        for k in 0..3 {
            out[0][k] = -p.g_ab * sb[k] - p.g_ads_a * w[k];
            out[1][k] = -p.g_ab * sa[k] - p.g_ads_b * w[k];
        }
        out
    }

    /// Holds inlet and outlet sites at new `[a, b]` densities (zero velocity).
    pub fn set_boundary_densities(&mut self, inlet: [f64; 2], outlet: [f64; 2]) {
        self.inlet_rho = inlet;
        self.outlet_rho = outlet;
        for s in 0..self.cells.len() {
            let r = match self.kind[s] {
                CellType::Inlet => inlet,
                CellType::Outlet => outlet,
                _ => continue,
            };
            let cell = &mut self.f[s * STRIDE..(s + 1) * STRIDE];
            equilibrium(r[0], [0.0; 3], &mut cell[..Q]);
            equilibrium(r[1], [0.0; 3], &mut cell[Q..]);
            self.rho[s] = r;
        }
    }

    pub fn boundary_densities(&self) -> ([f64; 2], [f64; 2]) {
        (self.inlet_rho, self.outlet_rho)
    }

    /// Lattice cell index of image voxel `(x, y, z)`.
    pub fn image_cell(&self, x: usize, y: usize, z: usize) -> usize {
        let o = self.region.offset;
        self.dims.index(x + o[0], y + o[1], z + o[2])
    }

    /// True if component a holds the strict majority at `cell` (ties count as gas).
    #[inline]
    pub fn is_electrolyte(&self, cell: usize) -> bool {
        let [a, b] = self.densities(cell);
        a > b
    }

    /// Electrolyte-majority pore voxels over pore voxels, within the image region.
    pub fn saturation(&self) -> f64 {
        let d = self.region.dims;
        let (mut wet, mut pore) = (0usize, 0usize);
        for z in 0..d.nz {
            for y in 0..d.ny {
                for x in 0..d.nx {
                    let cell = self.image_cell(x, y, z);
                    if self.cell_type[cell].is_solid() {
                        continue;
                    }
                    pore += 1;
                    if self.is_electrolyte(cell) {
                        wet += 1;
                    }
                }
            }
        }
        if pore == 0 {
            0.0
        } else {
            wet as f64 / pore as f64
        }
    }

    /// Majority-phase labelling of the image region: pore voxels become
    /// ELECTROLYTE or GAS, solid voxels keep their interface/bulk label.
    pub fn phase_image(&self, voxel_size: f64) -> VoxelImage {
        let d = self.region.dims;
        VoxelImage::from_fn(d, voxel_size, |x, y, z| {
            let cell = self.image_cell(x, y, z);
            match self.cell_type[cell] {
                CellType::SolidBulk => Label::SolidBulk,
                CellType::SolidInterface => Label::SolidInterface,
                _ if self.is_electrolyte(cell) => Label::Electrolyte,
                _ => Label::Gas,
            }
        })
        .expect("region dims are valid")
    }

    /// Largest component density and whether any density is non-finite.
    pub fn density_extremes(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for r in &self.rho {
            for k in 0..2 {
                lo[k] = lo[k].min(r[k]);
                hi[k] = hi[k].max(r[k]);
            }
        }
        (lo, hi)
    }
}

fn neighbour(dims: Dims, periodic: [bool; 3], c: [usize; 3], d: [isize; 3]) -> Option<usize> {
    let n = dims.as_array();
    let mut p = [0usize; 3];
    for k in 0..3 {
        let mut v = c[k] as isize + d[k];
        if v < 0 || v >= n[k] as isize {
            if !periodic[k] {
                return None;
            }
            v = v.rem_euclid(n[k] as isize);
        }
        p[k] = v as usize;
    }
    Some(dims.index(p[0], p[1], p[2]))
}

/// Contiguous slot ranges covering whole z planes, one per worker.
fn slab_ranges(dims: Dims, cells: &[u32], workers: usize) -> Vec<Range<usize>> {
    let plane = dims.nx * dims.ny;
    let mut out = Vec::with_capacity(workers);
    let mut start = 0usize;
    for w in 0..workers {
        let z_end = (w + 1) * dims.nz / workers;
        let cell_end = (z_end * plane) as u32;
        let end = start + cells[start..].partition_point(|&c| c < cell_end);
        out.push(start..end);
        start = end;
    }
    debug_assert_eq!(start, cells.len());
    out
}

/// Builds the filling lattice: the classified image padded with reservoir
/// layers in front of `inlet` and behind `outlet`.
///
/// Pore voxels start as gas (component b), the inlet reservoir as electrolyte
/// (component a). Voxels labelled ELECTROLYTE in the image start wet.
pub fn init_lattice(
    img: &VoxelImage,
    params: &ShanChenParams,
    inlet: Face,
    outlet: Face,
    workers: usize,
) -> Result<LatticeState, LbmError> {
    params.validate()?;
    if inlet.opposite() != outlet {
        return Err(LbmError::Precondition(format!(
            "inlet {inlet} and outlet {outlet} must be opposite faces"
        )));
    }
    if !img.labels().iter().any(|l| l.is_pore_space()) {
        return Err(LbmError::NoFluid);
    }
    let axis: Axis = inlet.axis();
    let a = axis.index();
    let idims = img.dims();
    let mut ext = idims.as_array();
    ext[a] += 2 * RESERVOIR_LAYERS;
    let dims = Dims::new(ext[0], ext[1], ext[2]);
    let mut offset = [0usize; 3];
    offset[a] = RESERVOIR_LAYERS;

    let classified = classify_solid_open(img, &[inlet, outlet]);
    let mut cell_type = vec![CellType::Fluid; dims.len()];
    let mut wet = vec![false; dims.len()];
    for (i, ct) in cell_type.iter_mut().enumerate() {
        let c = dims.coords(i);
        let along = c[a];
        let in_min_res = along < RESERVOIR_LAYERS;
        let in_max_res = along >= RESERVOIR_LAYERS + idims.extent(axis);
        if in_min_res || in_max_res {
            let inlet_side = in_min_res == inlet.is_min();
            let outer = along == 0 || along + 1 == ext[a];
            *ct = match (outer, inlet_side) {
                (true, true) => CellType::Inlet,
                (true, false) => CellType::Outlet,
                _ => CellType::Fluid,
            };
            wet[i] = inlet_side;
            continue;
        }
        let mut ic = c;
        ic[a] -= RESERVOIR_LAYERS;
        let label = classified.get(ic[0], ic[1], ic[2]);
        *ct = match label {
            Label::SolidBulk => CellType::SolidBulk,
            Label::SolidInterface => CellType::SolidInterface,
            _ => CellType::Fluid,
        };
        wet[i] = label == Label::Electrolyte;
    }

    let (major, minor) = (params.rho_major, params.rho_minor);
    let mut state = LatticeState::from_cells(dims, cell_type, [false; 3], workers, |cell| {
        if wet[cell] {
            ([major, minor], [0.0; 3])
        } else {
            ([minor, major], [0.0; 3])
        }
    })?;
    state.region = ImageRegion {
        offset,
        dims: idims,
        flow: Some((inlet, outlet)),
    };

    let pore = img.mask(|l| l.is_pore_space());
    let comps = label_mask(&pore, idims, Connectivity::Six);
    let at_in = comps.ids_on_face(inlet);
    state.pore_path = comps.ids_on_face(outlet).iter().any(|id| at_in.contains(id));
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ShanChenParams {
        ShanChenParams {
            rho_minor: 0.0,
            ..ShanChenParams::default()
        }
    }

    #[test]
    fn all_solid_is_rejected() {
        let img = VoxelImage::filled(Dims::cube(4), 1.0, Label::SolidBulk).unwrap();
        assert!(matches!(
            init_lattice(&img, &params(), Face::ZMin, Face::ZMax, 1),
            Err(LbmError::NoFluid)
        ));
        let split = VoxelImage::from_fn(Dims::cube(4), 1.0, |_, _, z| {
            if z == 2 {
                Label::SolidBulk
            } else {
                Label::Pore
            }
        })
        .unwrap();
        let st = init_lattice(&split, &params(), Face::ZMin, Face::ZMax, 1).unwrap();
        assert!(!st.has_pore_path());
        let cells = vec![CellType::SolidBulk; 8];
        assert!(matches!(
            LatticeState::from_cells(Dims::cube(2), cells, [true; 3], 1, |_| ([1.0, 0.0], [0.0; 3])),
            Err(LbmError::NoFluid)
        ));
    }

    #[test]
    fn open_box_inlet_mass() {
        let img = VoxelImage::filled(Dims::cube(8), 1.0, Label::Pore).unwrap();
        let p = params();
        let st = init_lattice(&img, &p, Face::ZMin, Face::ZMax, 1).unwrap();
        let [ma, mb] = st.masses();
        let inlet_cells = (RESERVOIR_LAYERS * 64) as f64;
        assert_eq!(ma, inlet_cells * p.rho_major);
        assert_eq!(mb, (8 * 64 + RESERVOIR_LAYERS * 64) as f64 * p.rho_major);
        assert!(st.has_pore_path());
        assert_eq!(st.saturation(), 0.0);
    }

    #[test]
    fn reinit_is_bit_identical() {
        let img = VoxelImage::from_fn(Dims::cube(6), 1.0, |x, y, _| {
            if (x + y) % 3 == 0 {
                Label::SolidBulk
            } else {
                Label::Pore
            }
        })
        .unwrap();
        let a = init_lattice(&img, &params(), Face::XMin, Face::XMax, 2).unwrap();
        let b = init_lattice(&img, &params(), Face::XMin, Face::XMax, 2).unwrap();
        assert_eq!(a.distributions(), b.distributions());
        assert_eq!(a.state_hash(), b.state_hash());
    }

    #[test]
    fn bulk_solid_has_no_storage() {
        let img = VoxelImage::from_fn(Dims::cube(7), 1.0, |x, y, z| {
            if [x, y, z].iter().all(|&c| (1..=5).contains(&c)) {
                Label::SolidBulk
            } else {
                Label::Pore
            }
        })
        .unwrap();
        let st = init_lattice(&img, &params(), Face::ZMin, Face::ZMax, 1).unwrap();
        assert_eq!(st.count(CellType::SolidBulk), 27);
        assert_eq!(st.count(CellType::SolidInterface), 98);
        let open = st.dims().len() - 125;
        assert_eq!(st.active_sites(), open);
        assert_eq!(st.distributions().len(), open * STRIDE);
    }

    #[test]
    fn slabs_cover_all_sites() {
        let img = VoxelImage::filled(Dims::new(5, 4, 9), 1.0, Label::Pore).unwrap();
        let mut st = init_lattice(&img, &params(), Face::ZMin, Face::ZMax, 1).unwrap();
        for w in [1, 2, 3, 4, 8, 32] {
            st.set_workers(w).unwrap();
            assert_eq!(st.slabs.len(), w);
            assert_eq!(st.slabs.first().unwrap().start, 0);
            assert_eq!(st.slabs.last().unwrap().end, st.active_sites());
            for pair in st.slabs.windows(2) {
                assert_eq!(pair[0].end, pair[1].start);
            }
        }
    }
}
