use std::collections::HashSet;

use bellslice_core::exactgeom::facets;
use bellslice_core::scenario::enumerate_vertices;
use bellslice_core::symmetry::{apply_symmetry, canonicalize, classify, group_order, orbit_bfs};
use bellslice_core::{Inequality, Scenario, SymmetryElement};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario_strategy() -> impl Strategy<Value = Scenario> {
    prop::sample::select(vec![(2usize, 2usize, 2usize, 2usize), (3, 3, 2, 2), (2, 2, 3, 3), (3, 2, 2, 3), (2, 3, 4, 2)])
        .prop_map(|(x, y, a, b)| Scenario::new(x, y, a, b).unwrap())
}

fn tight_inequality(s: Scenario, coeffs: Vec<i64>) -> Inequality {
    let v = enumerate_vertices(&s, 1 << 16).unwrap();
    let l = v.iter().map(|p| coeffs.iter().zip(p).map(|(a, b)| a * b).sum::<i64>()).max().unwrap();
    Inequality::new(s, coeffs, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn canonical_form_is_orbit_invariant(s in scenario_strategy(), seed in any::<u64>(), raw in prop::collection::vec(-2i64..=2, 40)) {
        let coeffs = raw[..s.cg_dimension()].to_vec();
        let ineq = tight_inequality(s, coeffs);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = SymmetryElement::random(&s, &mut rng);
        let image = apply_symmetry(&ineq, &g).unwrap();
        let a = canonicalize(&ineq);
        let b = canonicalize(&image);
        prop_assert_eq!(&a.representative, &b.representative);
        prop_assert_eq!(a.orbit_size, b.orbit_size);
        // orbit-stabilizer
        prop_assert_eq!(a.orbit_size * a.stabilizer, group_order(&s));
        // relabeling permutes vertices, so the image is still tight
        let v = enumerate_vertices(&s, 1 << 16).unwrap();
        prop_assert_eq!(image.local_bound(&v), Some(image.bound()));
    }
}

#[test]
fn classes_of_small_scenarios() {
    let s = Scenario::new(2, 2, 2, 2).unwrap();
    let ineqs: Vec<Inequality> = facets(&enumerate_vertices(&s, 100).unwrap())
        .unwrap()
        .into_iter()
        .map(|h| Inequality::from_halfspace(s, h).unwrap())
        .collect();
    let classes = classify(&ineqs).unwrap();
    let mut orbits: Vec<u128> = classes.iter().map(|c| c.orbit_size).collect();
    orbits.sort();
    assert_eq!(orbits, vec![8, 16]);
    assert!(classes.iter().all(|c| c.complete));
}

#[test]
fn bfs_orbits_partition_the_facets() {
    // independent count: split the facet list by BFS closure
    let s = Scenario::new(3, 2, 2, 2).unwrap();
    let ineqs: Vec<Inequality> = facets(&enumerate_vertices(&s, 1000).unwrap())
        .unwrap()
        .into_iter()
        .map(|h| Inequality::from_halfspace(s, h).unwrap())
        .collect();
    let mut left: HashSet<Inequality> = ineqs.iter().cloned().collect();
    let mut bfs_classes = 0;
    while let Some(f) = left.iter().next().cloned() {
        let orbit = orbit_bfs(&f);
        for g in &orbit {
            assert!(left.remove(g), "orbit leaves the facet list");
        }
        assert_eq!(canonicalize(&f).orbit_size, orbit.len() as u128);
        bfs_classes += 1;
    }
    assert_eq!(classify(&ineqs).unwrap().len(), bfs_classes);
}
