//! `.lbc` checkpoints.
//!
//! One ASCII header line
//! `LBC1 nx ny nz step params_digest inlet_a inlet_b outlet_a outlet_b count`
//! (boundary densities as hex bit patterns) followed by `count` little-endian
//! f64 populations in slot order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::d3q19::Q;
use super::state::{CellType, LatticeState, STRIDE};
use super::{LbmError, ShanChenParams};

pub fn save_checkpoint(
    path: &Path,
    state: &LatticeState,
    params: &ShanChenParams,
) -> Result<(), LbmError> {
    let mut w = BufWriter::new(File::create(path)?);
    let d = state.dims;
    writeln!(
        w,
        "LBC1 {} {} {} {} {} {:016x} {:016x} {:016x} {:016x} {}",
        d.nx,
        d.ny,
        d.nz,
        state.step,
        params.digest(),
        state.inlet_rho[0].to_bits(),
        state.inlet_rho[1].to_bits(),
        state.outlet_rho[0].to_bits(),
        state.outlet_rho[1].to_bits(),
        state.f.len()
    )?;
    for v in &state.f {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Restores populations into `state`, which must have been built from the
/// same geometry. Densities are recomputed exactly as the stream step does,
/// so a restored run continues bit-identically.
pub fn load_checkpoint(
    path: &Path,
    state: &mut LatticeState,
    params: &ShanChenParams,
) -> Result<(), LbmError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = String::new();
    r.read_line(&mut header)?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 11 || tok[0] != "LBC1" {
        return Err(LbmError::Checkpoint("bad header".into()));
    }
    let num = |i: usize| -> Result<u64, LbmError> {
        tok[i]
            .parse()
            .map_err(|_| LbmError::Checkpoint(format!("bad header field {:?}", tok[i])))
    };
    let bits = |i: usize| -> Result<f64, LbmError> {
        u64::from_str_radix(tok[i], 16)
            .map(f64::from_bits)
            .map_err(|_| LbmError::Checkpoint(format!("bad header field {:?}", tok[i])))
    };
    let d = state.dims;
    let dims = [num(1)?, num(2)?, num(3)?];
    if dims != [d.nx as u64, d.ny as u64, d.nz as u64] {
        return Err(LbmError::Checkpoint(format!(
            "dims {dims:?} differ from lattice {d:?}"
        )));
    }
    if tok[5] != params.digest() {
        return Err(LbmError::Checkpoint(format!(
            "parameter digest {} differs from {}",
            tok[5],
            params.digest()
        )));
    }
    let count = num(10)? as usize;
    if count != state.f.len() {
        return Err(LbmError::Checkpoint(format!(
            "{count} populations, lattice has {}",
            state.f.len()
        )));
    }
    let inlet = [bits(6)?, bits(7)?];
    let outlet = [bits(8)?, bits(9)?];

    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)
        .map_err(|_| LbmError::Checkpoint("truncated population data".into()))?;
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(LbmError::Checkpoint("trailing bytes".into()));
    }
    for (v, chunk) in state.f.iter_mut().zip(buf.chunks_exact(8)) {
        *v = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
    }
    state.f_tmp.copy_from_slice(&state.f);
    state.step = num(4)?;
    state.inlet_rho = inlet;
    state.outlet_rho = outlet;
    for s in 0..state.cells.len() {
        state.rho[s] = match state.kind[s] {
            CellType::Inlet => inlet,
            CellType::Outlet => outlet,
            _ => {
                let cell = &state.f[s * STRIDE..(s + 1) * STRIDE];
                [cell[..Q].iter().sum(), cell[Q..].iter().sum()]
            }
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbmfill::init_lattice;
    use crate::voxelgrid::{Dims, Face, Label, VoxelImage};

    fn fixture() -> (VoxelImage, ShanChenParams) {
        let img = VoxelImage::from_fn(Dims::new(6, 6, 8), 1.0, |x, y, z| {
            if (x * 7 + y * 3 + z) % 5 == 0 {
                Label::SolidBulk
            } else {
                Label::Pore
            }
        })
        .unwrap();
        (img, ShanChenParams::default())
    }

    #[test]
    fn round_trip_continues_bit_identically() {
        let (img, p) = fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.lbc");
        let mut a = init_lattice(&img, &p, Face::ZMin, Face::ZMax, 1).unwrap();
        a.set_boundary_densities([1.05, 0.01], [0.01, 1.0]);
        a.run(&p, 30).unwrap();
        save_checkpoint(&path, &a, &p).unwrap();
        let mut b = init_lattice(&img, &p, Face::ZMin, Face::ZMax, 1).unwrap();
        load_checkpoint(&path, &mut b, &p).unwrap();
        assert_eq!(a.state_hash(), b.state_hash());
        assert_eq!(a.step_index(), b.step_index());
        a.run(&p, 20).unwrap();
        b.run(&p, 20).unwrap();
        assert_eq!(a.state_hash(), b.state_hash());
    }

    #[test]
    fn rejects_mismatches() {
        let (img, p) = fixture();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.lbc");
        let a = init_lattice(&img, &p, Face::ZMin, Face::ZMax, 1).unwrap();
        save_checkpoint(&path, &a, &p).unwrap();
        let mut b = a.clone();
        let other = p.with_adhesion(0.1, -0.1);
        assert!(matches!(
            load_checkpoint(&path, &mut b, &other),
            Err(LbmError::Checkpoint(_))
        ));
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.pop();
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            load_checkpoint(&path, &mut b, &p),
            Err(LbmError::Checkpoint(_))
        ));
    }
}
