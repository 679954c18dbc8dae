//! Pore-scale simulation of electrolyte filling in porous battery electrodes.
//!
//! The crate covers the pieces of the filling workflow: voxel structures
//! ([`voxelgrid`]), pore-network extraction ([`netextract`]), invasion
//! percolation on the network ([`pnmperc`]), a two-component Shan-Chen
//! lattice Boltzmann solver ([`lbmfill`]), lattice/physical unit conversion
//! and network calibration ([`unitbridge`]), and transport metrics of the
//! (partially) filled pore space ([`transport`]).

pub mod curve;
pub mod dsu;
pub mod lbmfill;
pub mod netextract;
pub mod pnmperc;
pub mod transport;
pub mod unitbridge;
pub mod voxelgrid;

pub use voxelgrid::{Axis, Dims, Face, Label, VoxelImage};
