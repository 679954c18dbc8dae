//! Random pore networks, an exhaustive invasion percolation oracle and a
//! dense transport solve.

#![allow(dead_code)]

pub mod dense;

use std::collections::VecDeque;

use porefill::netextract::{Pore, PoreNetwork, Throat};
use porefill::pnmperc::{entry_pressure, FluidPair};
use porefill::Face;
use proptest::prelude::*;

pub const INLET: Face = Face::ZMin;
pub const OUTLET: Face = Face::ZMax;

fn slot(face: Face) -> usize {
    Face::ALL.iter().position(|&f| f == face).unwrap()
}

#[derive(Debug, Clone)]
pub struct Blueprint {
    pub n: usize,
    /// (a, b, diameter index)
    pub edges: Vec<(usize, usize, u8)>,
    pub volumes: Vec<u8>,
    pub inlet: Vec<bool>,
    pub outlet: Vec<bool>,
}

pub fn build(s: &Blueprint, diam: impl Fn(u8) -> f64) -> PoreNetwork {
    let mut seen = std::collections::BTreeSet::new();
    let mut throats = Vec::new();
    for &(a, b, d) in &s.edges {
        let (a, b) = (a.min(b), a.max(b));
        if a != b && seen.insert((a, b)) {
            throats.push(Throat {
                pore_a: a,
                pore_b: b,
                diameter: diam(d),
                length: 1.0,
            });
        }
    }
    let mut net = PoreNetwork {
        pores: (0..s.n)
            .map(|i| Pore {
                id: i,
                center: [0.0; 3],
                inscribed_diameter: 5.0,
                volume: 1.0 + s.volumes[i] as f64,
                region_voxels: 1,
            })
            .collect(),
        throats,
        face_labels: Default::default(),
    };
    net.face_labels[slot(INLET)] = (0..s.n).filter(|&i| s.inlet[i]).collect();
    net.face_labels[slot(OUTLET)] = (0..s.n).filter(|&i| s.outlet[i]).collect();
    if net.face_labels[slot(INLET)].is_empty() {
        net.face_labels[slot(INLET)].push(0);
    }
    net.validate().unwrap();
    net
}

pub fn blueprint(max_pores: usize, connected: bool) -> impl Strategy<Value = Blueprint> {
    (2..=max_pores).prop_flat_map(move |n| {
        let edges = prop::collection::vec((0..n, 0..n, 0u8..8), 0..3 * n);
        let tree = prop::collection::vec((0..n, 0u8..8), n);
        (
            Just(n),
            edges,
            tree,
            prop::collection::vec(any::<u8>(), n),
            prop::collection::vec(prop::bool::weighted(0.25), n),
            prop::collection::vec(prop::bool::weighted(0.25), n),
        )
            .prop_map(move |(n, mut edges, tree, volumes, inlet, outlet)| {
                if connected {
                    // random spanning tree: pore i hooks to some earlier pore
                    for i in 1..n {
                        let (j, d) = tree[i];
                        edges.push((i, j % i, d));
                    }
                }
                Blueprint {
                    n,
                    edges,
                    volumes,
                    inlet,
                    outlet,
                }
            })
    })
}

/// Exhaustive invasion: at every step scan all throats, recompute trapping
/// from scratch by BFS, take the cheapest valid throat (smaller id on ties).
pub fn oracle(net: &PoreNetwork, fluids: &FluidPair, trapping: bool) -> (Vec<usize>, Vec<usize>) {
    let n = net.pores.len();
    let mut invaded = vec![false; n];
    let mut order: Vec<usize> = net.face_pores(INLET).to_vec();
    for &p in &order {
        invaded[p] = true;
    }
    let trapped_now = |invaded: &[bool]| -> Vec<bool> {
        let mut reach = vec![false; n];
        let mut q: VecDeque<usize> = net
            .face_pores(OUTLET)
            .iter()
            .copied()
            .filter(|&p| !invaded[p])
            .collect();
        for &p in &q {
            reach[p] = true;
        }
        while let Some(p) = q.pop_front() {
            for t in &net.throats {
                let other = if t.pore_a == p {
                    t.pore_b
                } else if t.pore_b == p {
                    t.pore_a
                } else {
                    continue;
                };
                if !invaded[other] && !reach[other] {
                    reach[other] = true;
                    q.push_back(other);
                }
            }
        }
        (0..n).map(|p| !invaded[p] && !reach[p]).collect()
    };
    loop {
        let trapped = if trapping {
            trapped_now(&invaded)
        } else {
            vec![false; n]
        };
        let mut best: Option<(f64, usize)> = None;
        for (id, t) in net.throats.iter().enumerate() {
            if invaded[t.pore_a] == invaded[t.pore_b] || trapped[t.pore_a] || trapped[t.pore_b] {
                continue;
            }
            let pe = entry_pressure(t.diameter, fluids);
            let better = match best {
                None => true,
                Some((bp, _)) => pe.total_cmp(&bp).is_lt(),
            };
            if better {
                best = Some((pe, id));
            }
        }
        match best {
            None => {
                let trapped_ids = (0..n).filter(|&p| trapped[p]).collect();
                return (order, trapped_ids);
            }
            Some((_, id)) => {
                let t = &net.throats[id];
                let far = if invaded[t.pore_a] { t.pore_b } else { t.pore_a };
                invaded[far] = true;
                order.push(far);
            }
        }
    }
}

pub fn quantized(d: u8) -> f64 {
    1.0 + 0.5 * d as f64
}
