mod common;

use std::collections::BTreeSet;

use common::{brute_force_corridors, oracle_box, rotate};
use corridor_gas::{enumerate_corridors, tail_constants, LatticeSpec};
use proptest::prelude::*;

fn assert_matches_oracle(spec: &LatticeSpec) -> Result<(), TestCaseError> {
    let ours = enumerate_corridors(spec).unwrap();
    let oracle = brute_force_corridors(spec, oracle_box(spec));
    prop_assert_eq!(ours.corridors.len(), oracle.len(), "spec {:?}", spec);
    for (c, (u, w)) in ours.corridors.iter().zip(&oracle) {
        prop_assert_eq!(&c.direction, u);
        prop_assert!((c.width - w).abs() < 1e-9, "{} vs {}", c.width, w);
    }
    Ok(())
}

fn canonical(mut u: Vec<i64>) -> Vec<i64> {
    if u.iter().find(|&&x| x != 0).is_some_and(|&x| x < 0) {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u
}

fn signed_permutations(d: usize) -> Vec<(Vec<usize>, Vec<i64>)> {
    let perms: Vec<Vec<usize>> = match d {
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]],
    };
    let mut out = Vec::new();
    for p in perms {
        for mask in 0..(1 << d) {
            let signs = (0..d).map(|k| if mask >> k & 1 == 1 { -1 } else { 1 }).collect();
            out.push((p.clone(), signs));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cubic_enumeration_is_complete(r in 0.05f64..0.49) {
        let spec = LatticeSpec::cubic(2, r);
        let ours = enumerate_corridors(&spec).unwrap();
        let n = (1.0 / (2.0 * r)).ceil() as i64 + 1;
        let oracle = brute_force_corridors(&spec, n);
        prop_assert_eq!(ours.directions(), oracle.iter().map(|(u, _)| u.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn general_planar_enumeration_is_complete(
        angle in 0.0f64..std::f64::consts::TAU,
        stretch in 0.8f64..1.25,
        shear in -0.5f64..0.5,
        fraction in 0.1f64..0.95,
    ) {
        let g1 = rotate([1.0, 0.0], angle);
        let g2 = rotate([shear, stretch], angle);
        let probe = LatticeSpec::planar(g1, g2, 0.01);
        let r = 0.5 * fraction * probe.shortest_vector();
        prop_assume!(r > 0.06);
        assert_matches_oracle(&probe.with_radius(r))?;
    }

    #[test]
    fn spacing_minus_width_is_diameter(r in 0.05f64..0.49, d in 2usize..4) {
        let spec = LatticeSpec::cubic(d, r);
        for c in enumerate_corridors(&spec).unwrap().corridors {
            prop_assert!(((c.width + 2.0 * r) / c.spacing - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_spectra_are_closed_under_signed_permutations(r in 0.05f64..0.49, d in 2usize..4) {
        let spec = LatticeSpec::cubic(d, r);
        let dirs: BTreeSet<Vec<i64>> = enumerate_corridors(&spec).unwrap().directions().into_iter().collect();
        for (perm, signs) in signed_permutations(d) {
            let mapped: BTreeSet<Vec<i64>> = dirs
                .iter()
                .map(|u| canonical((0..d).map(|k| signs[k] * u[perm[k]]).collect()))
                .collect();
            prop_assert_eq!(&mapped, &dirs);
        }
    }

    #[test]
    fn growing_scatterers_close_corridors(r1 in 0.05f64..0.45, dr in 0.001f64..0.04) {
        let r2 = r1 + dr;
        let small = enumerate_corridors(&LatticeSpec::cubic(2, r1)).unwrap();
        let large = enumerate_corridors(&LatticeSpec::cubic(2, r2)).unwrap();
        for c in &large.corridors {
            let twin = small.corridors.iter().find(|s| s.direction == c.direction);
            prop_assert!(twin.is_some(), "{:?} appeared", c.direction);
            let shrink = twin.unwrap().width - c.width;
            prop_assert!((shrink - 2.0 * dr).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_superdiffusion_matrix_is_isotropic(r in 0.05f64..0.49, d in 2usize..4) {
        let t = tail_constants(&enumerate_corridors(&LatticeSpec::cubic(d, r)).unwrap());
        let trace: f64 = (0..d).map(|i| t.superdiffusion_raw[i][i]).sum();
        for i in 0..d {
            for j in 0..d {
                let iso = if i == j { trace / d as f64 } else { 0.0 };
                prop_assert!((t.superdiffusion_raw[i][j] - iso).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn map_constant_is_size_biased_flow_constant(r in 0.05f64..0.49, d in 2usize..4) {
        let t = tail_constants(&enumerate_corridors(&LatticeSpec::cubic(d, r)).unwrap());
        prop_assert!((t.c_map - t.mean_free_path * t.c_flow).abs() <= 1e-12 * t.c_map.abs());
    }

    #[test]
    fn superdiffusion_matrix_rotates_with_the_lattice(
        angle in 0.0f64..std::f64::consts::TAU,
        shear in -0.5f64..0.5,
        r in 0.1f64..0.3,
    ) {
        let base = LatticeSpec::planar([1.0, 0.0], [shear, 1.1], r);
        let turned = LatticeSpec::planar(rotate([1.0, 0.0], angle), rotate([shear, 1.1], angle), r);
        prop_assume!(2.0 * r < 0.98 * base.shortest_vector());
        let m = tail_constants(&enumerate_corridors(&base).unwrap()).superdiffusion_raw;
        let m2 = tail_constants(&enumerate_corridors(&turned).unwrap()).superdiffusion_raw;
        let (s, c) = angle.sin_cos();
        let q = [[c, -s], [s, c]];
        for i in 0..2 {
            for j in 0..2 {
                let mut expect = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        expect += q[i][k] * m[k][l] * q[j][l];
                    }
                }
                prop_assert!((m2[i][j] - expect).abs() < 1e-12, "{} vs {}", m2[i][j], expect);
            }
        }
    }
}

#[test]
fn slab_enumeration_matches_projection_oracle() {
    for r in [0.3, 0.22, 0.17] {
        let spec = LatticeSpec::cubic(3, r);
        let ours = enumerate_corridors(&spec).unwrap();
        let oracle = brute_force_corridors(&spec, (1.0 / (2.0 * r)).ceil() as i64 + 1);
        assert_eq!(ours.directions(), oracle.iter().map(|(u, _)| u.clone()).collect::<Vec<_>>());
        for (c, (_, w)) in ours.corridors.iter().zip(&oracle) {
            assert!((c.width - w).abs() < 1e-9);
        }
    }
}
