use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::VoxelError;

/// Cell label stored in a [`VoxelImage`]. The byte values are the on-disk codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    Pore = 0,
    SolidBulk = 1,
    SolidInterface = 2,
    Electrolyte = 3,
    Gas = 4,
}

impl Label {
    pub const ALL: [Label; 5] = [
        Label::Pore,
        Label::SolidBulk,
        Label::SolidInterface,
        Label::Electrolyte,
        Label::Gas,
    ];

    #[inline]
    pub fn is_solid(self) -> bool {
        matches!(self, Label::SolidBulk | Label::SolidInterface)
    }

    /// Pore space in the wide sense: empty, electrolyte-filled or gas-filled.
    #[inline]
    pub fn is_pore_space(self) -> bool {
        !self.is_solid()
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = VoxelError;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        match code {
            0 => Ok(Label::Pore),
            1 => Ok(Label::SolidBulk),
            2 => Ok(Label::SolidInterface),
            3 => Ok(Label::Electrolyte),
            4 => Ok(Label::Gas),
            other => Err(VoxelError::ReservedLabel(other)),
        }
    }
}

/// One of the three lattice axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: usize) -> Axis {
        match i {
            0 => Axis::X,
            1 => Axis::Y,
            _ => Axis::Z,
        }
    }

    /// The two axes orthogonal to `self`, in ascending order.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

impl std::str::FromStr for Axis {
    type Err = VoxelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(VoxelError::Parse(format!("unknown axis '{s}'"))),
        }
    }
}

/// One of the six faces of the box domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    pub const ALL: [Face; 6] = [
        Face::XMin,
        Face::XMax,
        Face::YMin,
        Face::YMax,
        Face::ZMin,
        Face::ZMax,
    ];

    pub fn axis(self) -> Axis {
        match self {
            Face::XMin | Face::XMax => Axis::X,
            Face::YMin | Face::YMax => Axis::Y,
            Face::ZMin | Face::ZMax => Axis::Z,
        }
    }

    pub fn is_min(self) -> bool {
        matches!(self, Face::XMin | Face::YMin | Face::ZMin)
    }

    pub fn opposite(self) -> Face {
        match self {
            Face::XMin => Face::XMax,
            Face::XMax => Face::XMin,
            Face::YMin => Face::YMax,
            Face::YMax => Face::YMin,
            Face::ZMin => Face::ZMax,
            Face::ZMax => Face::ZMin,
        }
    }

    pub fn min_of(axis: Axis) -> Face {
        match axis {
            Axis::X => Face::XMin,
            Axis::Y => Face::YMin,
            Axis::Z => Face::ZMin,
        }
    }

    pub fn max_of(axis: Axis) -> Face {
        Face::min_of(axis).opposite()
    }

    pub fn name(self) -> &'static str {
        match self {
            Face::XMin => "xmin",
            Face::XMax => "xmax",
            Face::YMin => "ymin",
            Face::YMax => "ymax",
            Face::ZMin => "zmin",
            Face::ZMax => "zmax",
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Face {
    type Err = VoxelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Face::ALL
            .into_iter()
            .find(|f| f.name() == s.to_ascii_lowercase())
            .ok_or_else(|| VoxelError::Parse(format!("unknown face '{s}'")))
    }
}

/// Grid extents with the linear index `i = x + nx * (y + ny * z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Dims {
    pub const fn new(nx: usize, ny: usize, nz: usize) -> Self {
        Dims { nx, ny, nz }
    }

    pub fn cube(n: usize) -> Self {
        Dims::new(n, n, n)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.nx * (y + self.ny * z)
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let x = i % self.nx;
        let r = i / self.nx;
        [x, r % self.ny, r / self.ny]
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn extent(&self, axis: Axis) -> usize {
        self.as_array()[axis.index()]
    }

    /// Index of the neighbour at `c + d`, or `None` outside the box.
    #[inline]
    pub fn offset(&self, c: [usize; 3], d: [isize; 3]) -> Option<usize> {
        let n = self.as_array();
        let mut p = [0usize; 3];
        for k in 0..3 {
            let v = c[k] as isize + d[k];
            if v < 0 || v >= n[k] as isize {
                return None;
            }
            p[k] = v as usize;
        }
        Some(self.index(p[0], p[1], p[2]))
    }

    /// True if voxel `c` lies in the boundary layer of `face`.
    pub fn on_face(&self, c: [usize; 3], face: Face) -> bool {
        let a = face.axis().index();
        if face.is_min() {
            c[a] == 0
        } else {
            c[a] + 1 == self.as_array()[a]
        }
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.nx, self.ny, self.nz)
    }
}

/// Labeled 3D voxel image with an isotropic voxel edge length in µm.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelImage {
    dims: Dims,
    voxel_size: f64,
    labels: Vec<Label>,
}

impl VoxelImage {
    pub fn filled(dims: Dims, voxel_size: f64, label: Label) -> Result<Self, VoxelError> {
        Self::from_labels(dims, voxel_size, vec![label; dims.len()])
    }

    pub fn from_labels(dims: Dims, voxel_size: f64, labels: Vec<Label>) -> Result<Self, VoxelError> {
        if dims.nx == 0 || dims.ny == 0 || dims.nz == 0 {
            return Err(VoxelError::BadDims(dims));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(VoxelError::BadVoxelSize(voxel_size));
        }
        if labels.len() != dims.len() {
            return Err(VoxelError::LengthMismatch {
                expected: dims.len(),
                got: labels.len(),
            });
        }
        Ok(VoxelImage {
            dims,
            voxel_size,
            labels,
        })
    }

    /// Builds an image from a predicate on voxel coordinates.
    pub fn from_fn(
        dims: Dims,
        voxel_size: f64,
        mut f: impl FnMut(usize, usize, usize) -> Label,
    ) -> Result<Self, VoxelError> {
        let mut labels = Vec::with_capacity(dims.len());
        for z in 0..dims.nz {
            for y in 0..dims.ny {
                for x in 0..dims.nx {
                    labels.push(f(x, y, z));
                }
            }
        }
        Self::from_labels(dims, voxel_size, labels)
    }

    #[inline]
    pub fn dims(&self) -> Dims {
        self.dims
    }

    #[inline]
    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    #[inline]
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [Label] {
        &mut self.labels
    }

    pub fn into_labels(self) -> Vec<Label> {
        self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> Label {
        self.labels[self.dims.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, label: Label) {
        let i = self.dims.index(x, y, z);
        self.labels[i] = label;
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }

    pub fn mask(&self, pred: impl Fn(Label) -> bool) -> Vec<bool> {
        self.labels.iter().map(|&l| pred(l)).collect()
    }

    /// Reads a `.vxi` file: `VXI1 <nx> <ny> <nz> <voxel_size_um>\n` then one label byte per voxel.
    pub fn read_vxi(path: impl AsRef<Path>) -> Result<Self, VoxelError> {
        let mut reader = BufReader::new(File::open(path)?);
        Self::read_vxi_from(&mut reader)
    }

    pub fn read_vxi_from(reader: &mut impl BufRead) -> Result<Self, VoxelError> {
        let mut header = Vec::new();
        reader.read_until(b'\n', &mut header)?;
        let header = String::from_utf8(header)
            .map_err(|_| VoxelError::Parse("header is not UTF-8".into()))?;
        let line = header
            .strip_suffix('\n')
            .ok_or_else(|| VoxelError::Parse("missing header line".into()))?;
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 5 || fields[0] != "VXI1" {
            return Err(VoxelError::Parse(format!("bad header '{line}'")));
        }
        let parse_n = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| VoxelError::Parse(format!("bad dimension '{s}'")))
        };
        let dims = Dims::new(parse_n(fields[1])?, parse_n(fields[2])?, parse_n(fields[3])?);
        let voxel_size: f64 = fields[4]
            .parse()
            .map_err(|_| VoxelError::Parse(format!("bad voxel size '{}'", fields[4])))?;
        let mut raw = vec![0u8; dims.len()];
        reader.read_exact(&mut raw)?;
        let mut rest = [0u8; 1];
        if reader.read(&mut rest)? != 0 {
            return Err(VoxelError::Parse("trailing bytes after payload".into()));
        }
        let labels = raw
            .into_iter()
            .map(Label::try_from)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_labels(dims, voxel_size, labels)
    }

    pub fn write_vxi(&self, path: impl AsRef<Path>) -> Result<(), VoxelError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_vxi_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_vxi_to(&self, w: &mut impl Write) -> Result<(), VoxelError> {
        let d = self.dims;
        write!(w, "VXI1 {} {} {} {}\n", d.nx, d.ny, d.nz, self.voxel_size)?;
        let raw: Vec<u8> = self.labels.iter().map(|l| l.code()).collect();
        w.write_all(&raw)?;
        Ok(())
    }

    /// Legacy ASCII VTK `STRUCTURED_POINTS` export of the label codes.
    pub fn write_vtk(&self, path: impl AsRef<Path>) -> Result<(), VoxelError> {
        let mut w = BufWriter::new(File::create(path)?);
        let d = self.dims;
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "porefill voxel labels")?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_POINTS")?;
        writeln!(w, "DIMENSIONS {} {} {}", d.nx, d.ny, d.nz)?;
        writeln!(w, "ORIGIN 0 0 0")?;
        writeln!(
            w,
            "SPACING {} {} {}",
            self.voxel_size, self.voxel_size, self.voxel_size
        )?;
        writeln!(w, "POINT_DATA {}", d.len())?;
        writeln!(w, "SCALARS label unsigned_char 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for row in self.labels.chunks(d.nx) {
            let line: Vec<String> = row.iter().map(|l| l.code().to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fraction of voxels in the pore space (PORE, ELECTROLYTE or GAS).
pub fn porosity(img: &VoxelImage) -> f64 {
    let open = img.labels().iter().filter(|l| l.is_pore_space()).count();
    open as f64 / img.dims().len() as f64
}
