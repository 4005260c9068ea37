use proptest::prelude::*;
use scvx_core::simplex::{
    bernstein_value, embed_face, enumerate_multi_indices, grid_points, multinomial_coefficient, project_face, FaceIndex,
    WeightVector,
};

/// C(n, k) from Pascal's triangle, independent of the library's binomials.
fn choose(n: u32, k: u32) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row[k as usize]
}

/// Random point of Δ^{m−1}: normalized positive draws with some coordinates
/// forced to zero so faces and vertices get exercised.
fn simplex_point(m: usize) -> impl Strategy<Value = WeightVector> {
    (prop::collection::vec(0.0f64..1.0, m), prop::collection::vec(prop::bool::weighted(0.2), m)).prop_filter_map(
        "degenerate draw",
        move |(raw, zero)| {
            let mut v: Vec<f64> = raw.iter().zip(&zero).map(|(&x, &z)| if z { 0.0 } else { x }).collect();
            let s: f64 = v.iter().sum();
            if s < 1e-9 {
                return None;
            }
            v.iter_mut().for_each(|x| *x /= s);
            let head: f64 = v[..m - 1].iter().sum();
            v[m - 1] = (1.0 - head).max(0.0);
            WeightVector::new(v).ok()
        },
    )
}

#[test]
fn count_identity() {
    for m in 1..=5usize {
        for d in 0..=30u32 {
            let got = enumerate_multi_indices(m, d).len() as u128;
            assert_eq!(got, choose(d + m as u32 - 1, m as u32 - 1), "m={m} d={d}");
        }
    }
}

#[test]
fn indices_are_distinct_and_sum_to_degree() {
    let idx = enumerate_multi_indices(4, 9);
    let mut sorted = idx.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), idx.len());
    assert!(idx.iter().all(|i| i.degree() == 9 && i.dim() == 4));
}

#[test]
fn multinomials_match_factorials() {
    let fact = |x: u32| (1..=u128::from(x)).product::<u128>();
    for idx in enumerate_multi_indices(4, 30) {
        let want = fact(30) / idx.exponents().iter().map(|&e| fact(e)).product::<u128>();
        assert_eq!(multinomial_coefficient(30, &idx).unwrap(), want);
    }
}

#[test]
fn grid_points_are_valid_and_distinct() {
    for (m, r) in [(2usize, 7u32), (3, 100), (4, 12)] {
        let g = grid_points(m, r);
        assert_eq!(g.len() as u128, choose(r + m as u32 - 1, m as u32 - 1));
        for w in &g {
            let s: f64 = w.as_slice().iter().sum();
            assert!((s - 1.0).abs() <= 1e-12);
        }
        let mut keys: Vec<Vec<u64>> = g.iter().map(|w| w.as_slice().iter().map(|x| x.to_bits()).collect()).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), g.len());
    }
}

proptest! {
    #[test]
    fn partition_of_unity_and_nonnegativity(
        (m, w) in (1usize..=4).prop_flat_map(|m| (Just(m), simplex_point(m))),
        d in 0u32..=30,
    ) {
        let mut total = 0.0;
        for i in enumerate_multi_indices(m, d) {
            let b = bernstein_value(&i, &w);
            prop_assert!(b >= 0.0);
            total += b;
        }
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
    }

    #[test]
    fn embedding_lands_on_face(
        m in 2usize..=5,
        mask in 1u32..31,
        seed in prop::collection::vec(0.01f64..1.0, 5),
    ) {
        let members: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        prop_assume!(!members.is_empty());
        let face = FaceIndex::new(&members, m).unwrap();
        let s: f64 = seed[..members.len()].iter().sum();
        let mut c: Vec<f64> = seed[..members.len()].iter().map(|x| x / s).collect();
        let head: f64 = c[..c.len() - 1].iter().sum();
        let last = c.len() - 1;
        c[last] = 1.0 - head;
        let w_face = WeightVector::new(c).unwrap();
        let w = embed_face(&face, &w_face).unwrap();
        for k in 0..m {
            if !face.contains(k) {
                prop_assert_eq!(w[k], 0.0);
            }
        }
        prop_assert_eq!(project_face(&face, &w).unwrap(), w_face);
    }
}
