mod common;

use common::dense::dense_d_eff;
use porefill::transport::{effective_diffusivity, entrapment_penalty, OPEN_PHASES};
use porefill::voxelgrid::{perforate, Perforation, SpherePackParams, generate_sphere_pack};
use porefill::{Axis, Dims, Label, VoxelImage};
use proptest::prelude::*;

fn l_shape() -> VoxelImage {
    // long leg spans z at x < 4, the foot runs along x at z < 4; extruded in y
    VoxelImage::from_fn(Dims::new(12, 6, 14), 1.0, |x, _, z| {
        if x < 4 || (z < 4 && x < 10) {
            Label::Pore
        } else {
            Label::SolidBulk
        }
    })
    .unwrap()
}

#[test]
fn l_shape_matches_dense_solve() {
    let img = l_shape();
    for axis in [Axis::Z, Axis::X] {
        let r = effective_diffusivity(&img, &OPEN_PHASES, axis).unwrap();
        match dense_d_eff(&img, &OPEN_PHASES, axis) {
            Some(d) => {
                assert!((r.d_eff_ratio - d).abs() < 1e-6, "{axis:?}: {} vs {d}", r.d_eff_ratio);
                assert!(r.tortuosity >= 1.0);
            }
            None => assert!(!r.percolating),
        }
    }
}

#[test]
fn partial_blockage_matches_dense_solve() {
    let before = VoxelImage::from_fn(Dims::new(8, 8, 12), 1.0, |x, y, _| {
        if (2..6).contains(&x) && (2..6).contains(&y) {
            Label::Pore
        } else {
            Label::SolidInterface
        }
    })
    .unwrap();
    let mut after = before.clone();
    for l in after.labels_mut() {
        if *l == Label::Pore {
            *l = Label::Electrolyte;
        }
    }
    for x in 2..5 {
        for y in 2..6 {
            after.set(x, y, 6, Label::Gas);
        }
    }
    let p = entrapment_penalty(&before, &after, Axis::Z).unwrap();
    let d0 = dense_d_eff(&before, &OPEN_PHASES, Axis::Z).unwrap();
    let d1 = dense_d_eff(&after, &[Label::Electrolyte], Axis::Z).unwrap();
    assert!((p.delta_d_eff - (d1 - d0)).abs() < 1e-6);
    let eps0 = 16.0 / 64.0;
    let eps1 = (16.0 * 12.0 - 12.0) / (64.0 * 12.0);
    assert!((p.delta_tau - (eps1 / d1 - eps0 / d0)).abs() < 1e-5);
    assert!(p.delta_d_eff < 0.0 && p.delta_tau > 0.0);
    assert!(p.saturation < 1.0);
}

fn random_image(n: usize, bits: &[bool]) -> VoxelImage {
    VoxelImage::from_labels(
        Dims::cube(n),
        1.0,
        bits.iter()
            .map(|&b| if b { Label::Pore } else { Label::SolidBulk })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_media_match_dense_solve(bits in prop::collection::vec(prop::bool::weighted(0.65), 216), axis in 0usize..3) {
        let img = random_image(6, &bits);
        let axis = Axis::from_index(axis);
        let r = effective_diffusivity(&img, &OPEN_PHASES, axis).unwrap();
        match dense_d_eff(&img, &OPEN_PHASES, axis) {
            Some(d) => {
                prop_assert!((r.d_eff_ratio - d).abs() < 1e-6);
                prop_assert!(r.d_eff_ratio > 0.0 && r.d_eff_ratio <= 1.0 + 1e-9);
                prop_assert!(r.tortuosity >= 1.0 - 1e-9);
            }
            None => prop_assert!(!r.percolating),
        }
    }

    #[test]
    fn adding_conductors_never_lowers_d_eff(
        bits in prop::collection::vec(prop::bool::weighted(0.6), 343),
        extra in prop::collection::vec(prop::bool::weighted(0.15), 343),
    ) {
        let small = random_image(7, &bits);
        let grown: Vec<bool> = bits.iter().zip(&extra).map(|(a, b)| *a || *b).collect();
        let big = random_image(7, &grown);
        let a = effective_diffusivity(&small, &OPEN_PHASES, Axis::Z).unwrap();
        let b = effective_diffusivity(&big, &OPEN_PHASES, Axis::Z).unwrap();
        prop_assert!(b.d_eff_ratio >= a.d_eff_ratio - 1e-7);
    }
}

#[test]
fn perforation_lowers_tortuosity() {
    for seed in 0..4 {
        let img = generate_sphere_pack(&SpherePackParams {
            dims: Dims::cube(24),
            voxel_size: 1.0,
            radius_mean: 3.0,
            radius_sd: 0.5,
            target_porosity: 0.4,
            seed,
        })
        .unwrap();
        let holes = perforate(
            &img,
            &Perforation {
                hole_diameter: 3.0,
                pitch: 8.0,
                depth: 24.0,
                axis: Axis::Z,
            },
        )
        .unwrap();
        let a = effective_diffusivity(&img, &OPEN_PHASES, Axis::Z).unwrap();
        let b = effective_diffusivity(&holes, &OPEN_PHASES, Axis::Z).unwrap();
        assert!(b.percolating);
        assert!(b.tortuosity < a.tortuosity, "seed {seed}: {} vs {}", b.tortuosity, a.tortuosity);
    }
}
