//! Quasi-static invasion percolation on a pore network.
//!
//! The electrolyte enters through the pores touching the inlet face and
//! advances through the throat with the lowest Washburn entry pressure
//! `p = -4 sigma cos(theta) / d`. Pores carry all volume; throats only gate.
//! With trapping enabled, gas clusters that lose their connection to the
//! outlet face are frozen.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::curve::PressureSaturationCurve;
use crate::dsu::DisjointSet;
use crate::netextract::PoreNetwork;
use crate::voxelgrid::Face;

#[derive(Debug, Error)]
pub enum PercError {
    #[error("no pores touch the inlet face {0}")]
    NoInletPores(Face),
    #[error("invalid fluid pair: {0}")]
    BadFluids(String),
    #[error("network has zero pore volume")]
    ZeroVolume,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluidPair {
    /// N/m
    pub surface_tension: f64,
    /// degrees, measured through the invading phase
    pub contact_angle: f64,
    pub invading: String,
    pub defending: String,
}

impl FluidPair {
    pub fn new(surface_tension: f64, contact_angle: f64) -> Result<Self, PercError> {
        let f = FluidPair {
            surface_tension,
            contact_angle,
            invading: "electrolyte".into(),
            defending: "gas".into(),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), PercError> {
        if !(self.surface_tension > 0.0) || !self.surface_tension.is_finite() {
            return Err(PercError::BadFluids(format!(
                "surface tension {} must be > 0",
                self.surface_tension
            )));
        }
        if !(0.0..=180.0).contains(&self.contact_angle) {
            return Err(PercError::BadFluids(format!(
                "contact angle {} outside [0, 180]",
                self.contact_angle
            )));
        }
        Ok(())
    }
}

/// Washburn entry pressure in Pa of a throat of diameter `d_um` µm. Negative
/// for a wetting invader.
pub fn entry_pressure(d_um: f64, fluids: &FluidPair) -> f64 {
    let cos = fluids.contact_angle.to_radians().cos();
    // cos(90 deg) is not exactly zero in floating point
    let cos = if (fluids.contact_angle - 90.0).abs() < 1e-12 { 0.0 } else { cos };
    -4.0 * fluids.surface_tension * cos / (d_um * 1e-6)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Element {
    Pore(usize),
    Throat(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvasionEvent {
    /// running maximum of entry pressures, Pa
    pub applied_pressure: f64,
    /// entry pressure of the throat that triggered the event, Pa
    pub entry_pressure: f64,
    pub element: Element,
    pub cumulative_saturation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercolationResult {
    pub events: Vec<InvasionEvent>,
    /// sorted pore ids frozen by trapping
    pub trapped_pores: Vec<usize>,
    pub final_saturation: f64,
    pub invaded_pores: Vec<bool>,
}

impl PercolationResult {
    /// Pores in invasion order.
    pub fn pore_order(&self) -> Vec<usize> {
        self.events
            .iter()
            .filter_map(|e| match e.element {
                Element::Pore(p) => Some(p),
                Element::Throat(_) => None,
            })
            .collect()
    }

    /// Staircase `(applied pressure, saturation)` after every pore event.
    pub fn staircase(&self) -> PressureSaturationCurve {
        let pts = self
            .events
            .iter()
            .filter(|e| matches!(e.element, Element::Pore(_)))
            .map(|e| (e.applied_pressure, e.cumulative_saturation))
            .collect();
        PressureSaturationCurve::new(pts).expect("running maximum ascends")
    }
}

/// Invasion percolation from `inlet` towards `outlet`.
///
/// Inlet pores are invaded first; their events carry the first throat event's
/// pressure (0 if no throat is ever invaded). Frontier ties break by smaller
/// throat id.
pub fn invasion_percolation(
    net: &PoreNetwork,
    fluids: &FluidPair,
    inlet: Face,
    outlet: Face,
    trapping: bool,
) -> Result<PercolationResult, PercError> {
    fluids.validate()?;
    let n = net.pores.len();
    let seeds = net.face_pores(inlet);
    if seeds.is_empty() {
        return Err(PercError::NoInletPores(inlet));
    }
    let total: f64 = net.total_volume();
    if !(total > 0.0) {
        return Err(PercError::ZeroVolume);
    }
    let adj = net.adjacency();
    let pe: Vec<f64> = net
        .throats
        .iter()
        .map(|t| entry_pressure(t.diameter, fluids))
        .collect();
    let mut outlet_pore = vec![false; n];
    for &p in net.face_pores(outlet) {
        outlet_pore[p] = true;
    }

    let mut invaded = vec![false; n];
    let mut trapped = vec![false; n];
    let mut heap: BinaryHeap<Reverse<(Key, usize)>> = BinaryHeap::new();
    for &p in seeds {
        invaded[p] = true;
    }
    for &p in seeds {
        push_frontier(p, &adj, &invaded, &pe, &mut heap);
    }
    if trapping {
        update_trapping(n, net, &invaded, &outlet_pore, &mut trapped);
    }

    let valid = |t: usize, invaded: &[bool], trapped: &[bool]| {
        let th = &net.throats[t];
        invaded[th.pore_a] != invaded[th.pore_b]
            && !trapped[th.pore_a]
            && !trapped[th.pore_b]
    };
    while let Some(Reverse((_, t))) = heap.peek() {
        if valid(*t, &invaded, &trapped) {
            break;
        }
        heap.pop();
    }
    let first = heap.peek().map_or(0.0, |Reverse((_, t))| pe[*t]);

    let mut events = Vec::new();
    let mut filled = 0.0;
    let mut count = 0;
    // exact 1 once every pore is in, whatever the summation order
    let sat = |filled: f64, count: usize| if count == n { 1.0 } else { filled / total };
    for &p in seeds {
        filled += net.pores[p].volume;
        count += 1;
        events.push(InvasionEvent {
            applied_pressure: first,
            entry_pressure: first,
            element: Element::Pore(p),
            cumulative_saturation: sat(filled, count),
        });
    }

    let mut applied = f64::NEG_INFINITY;
    while let Some(Reverse((_, t))) = heap.pop() {
        if !valid(t, &invaded, &trapped) {
            continue;
        }
        let th = &net.throats[t];
        let far = if invaded[th.pore_a] { th.pore_b } else { th.pore_a };
        applied = applied.max(pe[t]);
        events.push(InvasionEvent {
            applied_pressure: applied,
            entry_pressure: pe[t],
            element: Element::Throat(t),
            cumulative_saturation: sat(filled, count),
        });
        invaded[far] = true;
        filled += net.pores[far].volume;
        count += 1;
        events.push(InvasionEvent {
            applied_pressure: applied,
            entry_pressure: pe[t],
            element: Element::Pore(far),
            cumulative_saturation: sat(filled, count),
        });
        push_frontier(far, &adj, &invaded, &pe, &mut heap);
        if trapping {
            update_trapping(n, net, &invaded, &outlet_pore, &mut trapped);
        }
    }

    let final_saturation = sat(filled, count);
    Ok(PercolationResult {
        events,
        trapped_pores: (0..n).filter(|&p| trapped[p]).collect(),
        final_saturation,
        invaded_pores: invaded,
    })
}

/// Total order on entry pressure for the heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn push_frontier(
    p: usize,
    adj: &[Vec<(usize, usize)>],
    invaded: &[bool],
    pe: &[f64],
    heap: &mut BinaryHeap<Reverse<(Key, usize)>>,
) {
    for &(q, t) in &adj[p] {
        if !invaded[q] {
            heap.push(Reverse((Key(pe[t]), t)));
        }
    }
}

/// Freezes every defender cluster (uninvaded pores joined by throats) that
/// has no outlet pore.
fn update_trapping(
    n: usize,
    net: &PoreNetwork,
    invaded: &[bool],
    outlet_pore: &[bool],
    trapped: &mut [bool],
) {
    let mut dsu = DisjointSet::new(n);
    for th in &net.throats {
        if !invaded[th.pore_a] && !invaded[th.pore_b] {
            dsu.union(th.pore_a, th.pore_b);
        }
    }
    let mut escapes = vec![false; n];
    for p in 0..n {
        if !invaded[p] && outlet_pore[p] {
            let r = dsu.find(p);
            escapes[r] = true;
        }
    }
    for p in 0..n {
        if !invaded[p] && !escapes[dsu.find(p)] {
            trapped[p] = true;
        }
    }
}

/// Right-continuous staircase on `grid`: the saturation of the last event
/// with applied pressure `<= p`, 0 before the first event.
pub fn curve_from_result(res: &PercolationResult, grid: &[f64]) -> PressureSaturationCurve {
    let pts = grid
        .iter()
        .map(|&p| {
            let k = res.events.partition_point(|e| e.applied_pressure <= p);
            let s = if k == 0 {
                0.0
            } else {
                res.events[k - 1].cumulative_saturation
            };
            (p, s)
        })
        .collect();
    PressureSaturationCurve::new(pts).expect("grid must ascend")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netextract::{Pore, Throat};

    fn water(theta: f64) -> FluidPair {
        FluidPair::new(0.072, theta).unwrap()
    }

    #[test]
    fn washburn_values() {
        assert!((entry_pressure(10.0, &water(0.0)) + 28_800.0).abs() < 1e-6);
        assert_eq!(entry_pressure(10.0, &water(90.0)), 0.0);
        assert!((entry_pressure(10.0, &water(180.0)) - 28_800.0).abs() < 1e-6);
        assert!(FluidPair::new(-1.0, 10.0).is_err());
        assert!(FluidPair::new(0.07, 181.0).is_err());
    }

    fn chain() -> PoreNetwork {
        let pore = |id| Pore {
            id,
            center: [id as f64, 0.0, 0.0],
            inscribed_diameter: 2.0,
            volume: 1.0,
            region_voxels: 1,
        };
        let mut net = PoreNetwork {
            pores: vec![pore(0), pore(1)],
            throats: vec![Throat {
                pore_a: 0,
                pore_b: 1,
                diameter: 4.0,
                length: 1.0,
            }],
            face_labels: Default::default(),
        };
        net.face_labels[0] = vec![0];
        net.face_labels[1] = vec![1];
        net
    }

    #[test]
    fn two_pore_chain() {
        let f = water(140.0);
        let r = invasion_percolation(&chain(), &f, Face::XMin, Face::XMax, true).unwrap();
        let sats: Vec<f64> = r.staircase().saturations().collect();
        assert_eq!(sats, vec![0.5, 1.0]);
        let pb = entry_pressure(4.0, &f);
        assert_eq!(r.events.last().unwrap().applied_pressure, pb);
        assert_eq!(r.events[0].applied_pressure, pb);
        assert_eq!(r.final_saturation, 1.0);
        assert!(r.trapped_pores.is_empty());
    }

    #[test]
    fn grid_lookup() {
        let f = water(140.0);
        let r = invasion_percolation(&chain(), &f, Face::XMin, Face::XMax, false).unwrap();
        let pb = entry_pressure(4.0, &f);
        let c = curve_from_result(&r, &[pb - 1.0, pb, pb + 1.0]);
        let s: Vec<f64> = c.saturations().collect();
        assert_eq!(s, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn missing_inlet() {
        let mut net = chain();
        net.face_labels[0].clear();
        assert!(matches!(
            invasion_percolation(&net, &water(30.0), Face::XMin, Face::XMax, false),
            Err(PercError::NoInletPores(Face::XMin))
        ));
    }
}
