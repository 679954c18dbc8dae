//! Voxel image model, `.vxi`/VTK I/O, synthetic structure generation and the
//! geometric primitives (distance transform, connected components) shared by
//! the extraction, percolation and transport code.

mod components;
mod edt;
mod generate;
mod image;
mod morph;

pub use components::{connected_components, label_mask, Connectivity, LabelField};
pub use edt::{distance_transform, squared_distance_transform, DistanceField};
pub use generate::{generate_sphere_pack, SpherePackParams};
pub use image::{porosity, Axis, Dims, Face, Label, VoxelImage};
pub use morph::{classify_solid, classify_solid_open, perforate, Perforation};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VoxelError {
    #[error("invalid dimensions {0}")]
    BadDims(Dims),
    #[error("voxel size must be positive and finite, got {0}")]
    BadVoxelSize(f64),
    #[error("label array has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reserved label code {0}")]
    ReservedLabel(u8),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("target porosity unreachable after {attempts} placement attempts (porosity {reached:.4})")]
    UnreachablePorosity { attempts: usize, reached: f64 },
    #[error("bad perforation geometry: {0}")]
    BadGeometry(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
