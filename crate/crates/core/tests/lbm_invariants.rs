use porefill::lbmfill::{CellType, LatticeState, ShanChenParams};
use porefill::Dims;
use proptest::prelude::*;

fn droplet_box(n: usize, periodic: [bool; 3], workers: usize) -> LatticeState {
    let dims = Dims::cube(n);
    let c = n as f64 / 2.0;
    let cells = (0..dims.len())
        .map(|i| {
            let p = dims.coords(i);
            // a solid post through the lower part of the box
            if p[0] == n / 4 && p[1] == n / 4 && p[2] < n / 2 {
                CellType::SolidInterface
            } else {
                CellType::Fluid
            }
        })
        .collect();
    LatticeState::from_cells(dims, cells, periodic, workers, |i| {
        let p = dims.coords(i);
        let r2: f64 = p.iter().map(|&v| (v as f64 - c).powi(2)).sum();
        if r2 < (n as f64 / 4.0).powi(2) {
            ([1.03, 0.006], [0.0; 3])
        } else {
            ([0.006, 1.03], [0.0; 3])
        }
    })
    .unwrap()
}

fn params() -> ShanChenParams {
    ShanChenParams::default().with_adhesion(-0.2, 0.2)
}

fn rel_drift(a: [f64; 2], b: [f64; 2]) -> f64 {
    (0..2).map(|k| ((b[k] - a[k]) / a[k]).abs()).fold(0.0, f64::max)
}

#[test]
fn closed_box_conserves_mass_over_ten_thousand_steps() {
    let mut st = droplet_box(10, [false; 3], 1);
    let m0 = st.masses();
    st.run(&params(), 10_000).unwrap();
    let drift = rel_drift(m0, st.masses());
    assert!(drift < 1e-12, "relative drift {drift:e}");
}

#[test]
fn state_hash_is_independent_of_workers() {
    let p = params();
    let mut hashes = Vec::new();
    for w in [1, 2, 4, 8] {
        let mut st = droplet_box(20, [true; 3], w);
        st.run(&p, 100).unwrap();
        hashes.push(st.state_hash());
    }
    assert!(hashes.windows(2).all(|h| h[0] == h[1]), "{hashes:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_closed_lattices_conserve_mass(
        solid in prop::collection::vec(prop::bool::weighted(0.15), 512),
        rho in prop::collection::vec((0.01f64..1.0, 0.01f64..1.0), 512),
        g_ads in -0.3f64..0.3,
    ) {
        let dims = Dims::cube(8);
        let cells = solid
            .iter()
            .map(|&s| if s { CellType::SolidInterface } else { CellType::Fluid })
            .collect();
        let mut st = LatticeState::from_cells(dims, cells, [false, true, false], 1, |i| {
            ([rho[i].0, rho[i].1], [0.0; 3])
        })
        .unwrap();
        let p = ShanChenParams { g_ab: 1.2, ..ShanChenParams::default() }.with_adhesion(-g_ads, g_ads);
        let m0 = st.masses();
        st.run(&p, 300).unwrap();
        prop_assert!(rel_drift(m0, st.masses()) < 1e-12);
    }
}
