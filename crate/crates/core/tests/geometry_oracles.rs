use std::collections::BTreeSet;

use bellslice_core::exactgeom::{facet_enum, facets, FacetEnumOptions, FacetMethod};
use bellslice_core::scenario::{cg_to_p, enumerate_vertices, p_to_cg, strategies};
use bellslice_core::{Halfspace, JointTable, Scenario, Unlimited};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Bareiss determinant over i128.
fn det(mut m: Vec<Vec<i128>>) -> i128 {
    let n = m.len();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if m[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| m[r][k] != 0) else { return 0 };
            m.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
            }
        }
        prev = m[k][k];
    }
    sign * m[n - 1][n - 1]
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Facets by fitting a hyperplane through every `d`-subset of points.
fn brute_force_facets(points: &[Vec<i64>]) -> BTreeSet<(Vec<i64>, i64)> {
    let d = points[0].len();
    let mut out = BTreeSet::new();
    let n = points.len();
    let mut idx: Vec<usize> = (0..d).collect();
    loop {
        // rows [1, p]; the normal (-b, a) is the signed cofactor vector
        let rows: Vec<Vec<i128>> =
            idx.iter().map(|&i| std::iter::once(1).chain(points[i].iter().map(|&v| v as i128)).collect()).collect();
        let mut normal: Vec<i128> = (0..=d)
            .map(|k| {
                let minor: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != k).map(|(_, v)| *v).collect()).collect();
                if k % 2 == 0 {
                    det(minor)
                } else {
                    -det(minor)
                }
            })
            .collect();
        if normal[1..].iter().any(|&v| v != 0) {
            let g = normal.iter().fold(0, |g, &v| gcd(g, v));
            normal.iter_mut().for_each(|v| *v /= g);
            let value = |p: &Vec<i64>| normal[0] + p.iter().zip(&normal[1..]).map(|(&x, &a)| x as i128 * a).sum::<i128>();
            let vals: Vec<i128> = points.iter().map(value).collect();
            let sign = if vals.iter().all(|&v| v >= 0) {
                Some(1)
            } else if vals.iter().all(|&v| v <= 0) {
                Some(-1)
            } else {
                None
            };
            if let Some(sg) = sign {
                // sg·(n0 + a·x) >= 0  <=>  (-sg a)·x <= sg n0
                let coeffs = normal[1..].iter().map(|&a| (-sg * a) as i64).collect();
                out.insert((coeffs, (sg * normal[0]) as i64));
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - d + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..d {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn as_set(hs: &[Halfspace]) -> BTreeSet<(Vec<i64>, i64)> {
    hs.iter().map(|h| (h.coeffs.clone(), h.bound)).collect()
}

#[test]
fn chsh_polytope_matches_hyperplane_fitting() {
    let s = Scenario::new(2, 2, 2, 2).unwrap();
    let v = enumerate_vertices(&s, 1000).unwrap();
    let oracle = brute_force_facets(&v);
    assert_eq!(oracle.len(), 24);
    assert_eq!(as_set(&facets(&v).unwrap()), oracle);
}

#[test]
fn adjacency_and_double_description_agree() {
    for s in [Scenario::new(2, 2, 2, 2).unwrap(), Scenario::new(3, 2, 2, 2).unwrap(), Scenario::new(2, 2, 3, 2).unwrap()] {
        let v = enumerate_vertices(&s, 10_000).unwrap();
        let dd = facet_enum(&v, &[], &FacetEnumOptions { method: FacetMethod::DoubleDescription, ..Default::default() }, &Unlimited).unwrap();
        let adj = facet_enum(&v, &[], &FacetEnumOptions { method: FacetMethod::Adjacency, ..Default::default() }, &Unlimited).unwrap();
        assert_eq!(dd, adj, "{s}");
    }
}

fn full_dimensional(points: &[Vec<i64>]) -> bool {
    bellslice_core::exactgeom::affine_rank(points) == points[0].len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_cube_subsets_match_oracle(dim in 3usize..=4, mask in any::<u16>()) {
        let pts: Vec<Vec<i64>> = (0..(1usize << dim))
            .filter(|k| mask >> (k % 16) & 1 == 1)
            .map(|k| (0..dim).map(|i| ((k >> i) & 1) as i64).collect())
            .collect();
        prop_assume!(pts.len() > dim && full_dimensional(&pts));
        let oracle = brute_force_facets(&pts);
        prop_assert_eq!(as_set(&facets(&pts).unwrap()), oracle.clone());
        let adj = facet_enum(&pts, &[], &FacetEnumOptions { method: FacetMethod::Adjacency, ..Default::default() }, &Unlimited).unwrap();
        prop_assert_eq!(as_set(&adj), oracle);
    }

    #[test]
    fn random_small_integer_points_match_oracle(pts in prop::collection::vec(prop::collection::vec(-2i64..=2, 3), 5..9)) {
        let mut pts = pts;
        pts.sort();
        pts.dedup();
        prop_assume!(pts.len() > 3 && full_dimensional(&pts));
        prop_assert_eq!(as_set(&facets(&pts).unwrap()), brute_force_facets(&pts));
    }
}

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Probability table of a mixture of deterministic strategies, built from
/// the strategies directly.
fn mixture_table(s: &Scenario, weights: &[(usize, BigRational)]) -> JointTable<BigRational> {
    let all: Vec<_> = strategies(s).collect();
    JointTable::from_fn(*s, |x, y, a, b| {
        weights.iter().fold(BigRational::zero(), |acc, (k, w)| {
            let st = &all[*k];
            if st.alice[x] == a && st.bob[y] == b {
                acc + w.clone()
            } else {
                acc
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn p_and_cg_round_trip_on_local_points(
        dims in prop::sample::select(vec![(2usize, 2usize, 2usize, 2usize), (3, 2, 2, 3), (2, 3, 3, 2), (2, 2, 3, 3)]),
        raw in prop::collection::vec((any::<prop::sample::Index>(), 1i64..20), 1..6),
    ) {
        let s = Scenario::new(dims.0, dims.1, dims.2, dims.3).unwrap();
        let all: Vec<_> = strategies(&s).collect();
        let total: i64 = raw.iter().map(|r| r.1).sum();
        let weights: Vec<(usize, BigRational)> = raw.iter().map(|(i, w)| (i.index(all.len()), rational(*w, total))).collect();
        let table = mixture_table(&s, &weights);
        let cg = p_to_cg(&table).unwrap();
        // CG point equals the same mixture of vertices
        let mut expect = vec![BigRational::zero(); s.cg_dimension()];
        for (k, w) in &weights {
            for (e, v) in expect.iter_mut().zip(all[*k].vertex(&s)) {
                *e += w.clone() * BigRational::from_integer(v.into());
            }
        }
        prop_assert_eq!(&cg.coords, &expect);
        let back = cg_to_p(&s, &cg.coords).unwrap();
        prop_assert_eq!(back.as_slice(), table.as_slice());
        let norm: BigRational = (0..s.outputs_a()).flat_map(|a| (0..s.outputs_b()).map(move |b| (a, b))).fold(BigRational::zero(), |acc, (a, b)| acc + back.get(0, 0, a, b).clone());
        prop_assert!(norm.is_one());
    }
}
