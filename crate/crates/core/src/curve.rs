//! Pressure-saturation curves, the currency exchanged between the network
//! model and the lattice Boltzmann runs.

use std::io::{BufRead, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("curve parse error: {0}")]
    Parse(String),
    #[error("curve pressures must be finite and ascending")]
    NotAscending,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered `(pressure, saturation)` samples. Pressures ascend; the unit is
/// Pa for physical curves and lattice pressure for raw simulation output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PressureSaturationCurve {
    points: Vec<(f64, f64)>,
}

impl PressureSaturationCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, CurveError> {
        let finite = points.iter().all(|(p, s)| p.is_finite() && s.is_finite());
        let ascending = points.windows(2).all(|w| w[0].0 <= w[1].0);
        if !finite || !ascending {
            return Err(CurveError::NotAscending);
        }
        Ok(PressureSaturationCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pressures(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn saturations(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Right-continuous step value: saturation of the last sample with
    /// pressure `<= p`, the first sample's saturation below the range, and 0
    /// for an empty curve.
    pub fn step_at(&self, p: f64) -> f64 {
        let k = self.points.partition_point(|s| s.0 <= p);
        match (k, self.points.first()) {
            (0, Some(first)) => first.1,
            (0, None) => 0.0,
            (k, _) => self.points[k - 1].1,
        }
    }

    /// Same curve with every pressure multiplied by `k > 0`.
    pub fn scale_pressure(&self, k: f64) -> Self {
        PressureSaturationCurve {
            points: self.points.iter().map(|&(p, s)| (p * k, s)).collect(),
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[0].1 <= w[1].1)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<(), CurveError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["pressure_pa", "saturation"])
            .map_err(|e| CurveError::Parse(e.to_string()))?;
        for (p, s) in &self.points {
            wr.write_record([p.to_string(), s.to_string()])
                .map_err(|e| CurveError::Parse(e.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self, CurveError> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(|e| CurveError::Parse(e.to_string()))?;
        if headers.len() != 2 || &headers[0] != "pressure_pa" || &headers[1] != "saturation" {
            return Err(CurveError::Parse(format!("unexpected header {headers:?}")));
        }
        let mut points = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| CurveError::Parse(e.to_string()))?;
            let num = |i: usize| -> Result<f64, CurveError> {
                rec[i]
                    .trim()
                    .parse()
                    .map_err(|_| CurveError::Parse(format!("bad number {:?}", &rec[i])))
            };
            points.push((num(0)?, num(1)?));
        }
        Self::new(points)
    }

    pub fn save(&self, path: &Path) -> Result<(), CurveError> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self, CurveError> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_lookup_is_right_continuous() {
        let c = PressureSaturationCurve::new(vec![(1.0, 0.2), (2.0, 0.5), (2.0, 0.6), (4.0, 1.0)])
            .unwrap();
        assert_eq!(c.step_at(0.5), 0.2);
        assert_eq!(c.step_at(1.0), 0.2);
        assert_eq!(c.step_at(2.0), 0.6);
        assert_eq!(c.step_at(3.9), 0.6);
        assert_eq!(c.step_at(9.0), 1.0);
        assert_eq!(PressureSaturationCurve::default().step_at(1.0), 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let c = PressureSaturationCurve::new(vec![(-3.5e3, 0.0), (0.1, 0.25), (7e4, 1.0)]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("pressure_pa,saturation\n"));
        assert_eq!(PressureSaturationCurve::read_csv(&buf[..]).unwrap(), c);
    }

    #[test]
    fn rejects_unsorted() {
        assert!(PressureSaturationCurve::new(vec![(2.0, 0.0), (1.0, 0.5)]).is_err());
        assert!(PressureSaturationCurve::read_csv(&b"p,s\n1,2\n"[..]).is_err());
    }
}
