//! `pores.csv` / `throats.csv` serialisation.
//!
//! pores: `id,x_um,y_um,z_um,diameter_um,volume_um3,faces` with faces joined by
//! `;`. throats: `pore_a,pore_b,diameter_um,length_um`.

use std::io::{Read, Write};
use std::path::Path;

use super::{face_slot, NetError, Pore, PoreNetwork, Throat};
use crate::voxelgrid::Face;

const PORE_HEADER: [&str; 7] = ["id", "x_um", "y_um", "z_um", "diameter_um", "volume_um3", "faces"];
const THROAT_HEADER: [&str; 4] = ["pore_a", "pore_b", "diameter_um", "length_um"];

fn csv_err(e: csv::Error) -> NetError {
    NetError::Parse(e.to_string())
}

impl PoreNetwork {
    pub fn write_pores_csv(&self, w: impl Write) -> Result<(), NetError> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(PORE_HEADER).map_err(csv_err)?;
        for p in &self.pores {
            let faces: Vec<&str> = self.pore_faces(p.id).iter().map(|f| f.name()).collect();
            wr.write_record([
                p.id.to_string(),
                p.center[0].to_string(),
                p.center[1].to_string(),
                p.center[2].to_string(),
                p.inscribed_diameter.to_string(),
                p.volume.to_string(),
                faces.join(";"),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_throats_csv(&self, w: impl Write) -> Result<(), NetError> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(THROAT_HEADER).map_err(csv_err)?;
        for t in &self.throats {
            wr.write_record([
                t.pore_a.to_string(),
                t.pore_b.to_string(),
                t.diameter.to_string(),
                t.length.to_string(),
            ])
            .map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a network back. Region voxel counts are not stored and are
    /// reported as zero.
    pub fn read_csv(pores: impl Read, throats: impl Read) -> Result<Self, NetError> {
        let mut net = PoreNetwork::default();
        let mut rd = csv::Reader::from_reader(pores);
        check_header(rd.headers().map_err(csv_err)?, &PORE_HEADER)?;
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let id: usize = field(&rec, 0)?;
            for name in rec[6].split(';').filter(|s| !s.is_empty()) {
                let face: Face = name
                    .parse()
                    .map_err(|_| NetError::Parse(format!("unknown face {name:?}")))?;
                net.face_labels[face_slot(face)].push(id);
            }
            net.pores.push(Pore {
                id,
                center: [field(&rec, 1)?, field(&rec, 2)?, field(&rec, 3)?],
                inscribed_diameter: field(&rec, 4)?,
                volume: field(&rec, 5)?,
                region_voxels: 0,
            });
        }
        let mut rd = csv::Reader::from_reader(throats);
        check_header(rd.headers().map_err(csv_err)?, &THROAT_HEADER)?;
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            net.throats.push(Throat {
                pore_a: field(&rec, 0)?,
                pore_b: field(&rec, 1)?,
                diameter: field(&rec, 2)?,
                length: field(&rec, 3)?,
            });
        }
        for ids in &mut net.face_labels {
            ids.sort_unstable();
        }
        net.validate()?;
        Ok(net)
    }

    pub fn save(&self, dir: &Path) -> Result<(), NetError> {
        std::fs::create_dir_all(dir)?;
        self.write_pores_csv(std::fs::File::create(dir.join("pores.csv"))?)?;
        self.write_throats_csv(std::fs::File::create(dir.join("throats.csv"))?)
    }

    pub fn load(dir: &Path) -> Result<Self, NetError> {
        Self::read_csv(
            std::fs::File::open(dir.join("pores.csv"))?,
            std::fs::File::open(dir.join("throats.csv"))?,
        )
    }
}

fn check_header(h: &csv::StringRecord, want: &[&str]) -> Result<(), NetError> {
    if h.iter().eq(want.iter().copied()) {
        Ok(())
    } else {
        Err(NetError::Parse(format!("expected header {want:?}, got {h:?}")))
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, NetError> {
    rec.get(i)
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| NetError::Parse(format!("bad field {i} in {rec:?}")))
}
