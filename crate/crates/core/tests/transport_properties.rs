mod support;

use proptest::prelude::*;
use support::{brute_force_transport, random_doc, random_embeddings, rng};
use wmdsearch_core::embedding::{EmbeddingTable, Embeddings};
use wmdsearch_core::transport::{nbow_cost_matrix, rwmd, wcd, wmd, GroundMetric};
use wmdsearch_core::weighting::NbowVector;

const EUCLID: GroundMetric = GroundMetric::Euclidean;

#[test]
fn exact_solver_matches_vertex_enumeration() {
    let mut r = rng(1);
    for metric in [GroundMetric::Euclidean, GroundMetric::CosineDistance] {
        for _ in 0..100 {
            let e = random_embeddings(&mut r, 10, 8);
            let a = random_doc(&mut r, 10, 4);
            let b = random_doc(&mut r, 10, 4);
            let c = nbow_cost_matrix(&e, &a, &b, metric).unwrap();
            let (d, _) = wmd(&a, &b, &c).unwrap();
            let oracle = brute_force_transport(&a.weights(), &b.weights(), &c.c);
            assert!((d - oracle).abs() <= 1e-6, "{d} vs {oracle}");
        }
    }
}

#[test]
fn bound_chain_symmetry_and_identity() {
    let mut r = rng(2);
    for _ in 0..500 {
        let e = random_embeddings(&mut r, 12, 8);
        let a = random_doc(&mut r, 12, 6);
        let b = random_doc(&mut r, 12, 6);
        let c = nbow_cost_matrix(&e, &a, &b, EUCLID).unwrap();
        let lower = wcd(&e, &a, &b, EUCLID).unwrap();
        let relaxed = rwmd(&a, &b, &c).unwrap();
        let (exact, _) = wmd(&a, &b, &c).unwrap();
        assert!(lower <= exact + 1e-9, "wcd {lower} > wmd {exact}");
        assert!(relaxed <= exact + 1e-9, "rwmd {relaxed} > wmd {exact}");

        let back = wmd(&b, &a, &nbow_cost_matrix(&e, &b, &a, EUCLID).unwrap())
            .unwrap()
            .0;
        assert!((exact - back).abs() <= 1e-9);
        let selfc = nbow_cost_matrix(&e, &a, &a, EUCLID).unwrap();
        assert_eq!(wmd(&a, &a, &selfc).unwrap().0, 0.0);
    }
}

#[test]
fn centroid_distance_can_exceed_the_relaxed_bound() {
    // Shared words with swapped weights: every word has a free match, so the
    // relaxed bound is 0, while centroids and the exact distance are 8 apart.
    let e: Embeddings = EmbeddingTable::from_rows(1, [("p", vec![0.0f32]), ("q", vec![10.0])])
        .unwrap()
        .into();
    let a = NbowVector::from_weights([("p", 0.9), ("q", 0.1)]).unwrap();
    let b = NbowVector::from_weights([("p", 0.1), ("q", 0.9)]).unwrap();
    let c = nbow_cost_matrix(&e, &a, &b, EUCLID).unwrap();
    assert_eq!(rwmd(&a, &b, &c).unwrap(), 0.0);
    assert!((wcd(&e, &a, &b, EUCLID).unwrap() - 8.0).abs() < 1e-9);
    assert!((wmd(&a, &b, &c).unwrap().0 - 8.0).abs() < 1e-9);
}

/// The full chain `wcd ≤ rwmd ≤ wmd` as literally requested. Its first link
/// is not a theorem (see the test above), so this fails when run.
#[test]
#[ignore = "centroid distance is not bounded by the relaxed distance"]
fn literal_centroid_relaxed_exact_chain() {
    let mut r = rng(2);
    let mut violations = 0;
    for _ in 0..500 {
        let e = random_embeddings(&mut r, 12, 8);
        let a = random_doc(&mut r, 12, 6);
        let b = random_doc(&mut r, 12, 6);
        let c = nbow_cost_matrix(&e, &a, &b, EUCLID).unwrap();
        let lower = wcd(&e, &a, &b, EUCLID).unwrap();
        let relaxed = rwmd(&a, &b, &c).unwrap();
        let (exact, _) = wmd(&a, &b, &c).unwrap();
        if lower > relaxed + 1e-9 || relaxed > exact + 1e-9 {
            violations += 1;
        }
    }
    assert_eq!(
        violations, 0,
        "chain violated on {violations} of 500 instances"
    );
}

#[test]
fn triangle_inequality_on_random_triples() {
    let mut r = rng(3);
    for _ in 0..200 {
        let e = random_embeddings(&mut r, 10, 8);
        let docs: Vec<_> = (0..3).map(|_| random_doc(&mut r, 10, 4)).collect();
        let d = |x: usize, y: usize| {
            let c = nbow_cost_matrix(&e, &docs[x], &docs[y], EUCLID).unwrap();
            wmd(&docs[x], &docs[y], &c).unwrap().0
        };
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
    }
}

#[test]
fn relaxed_bound_holds_for_cosine_costs() {
    let mut r = rng(4);
    for _ in 0..200 {
        let e = random_embeddings(&mut r, 12, 8);
        let a = random_doc(&mut r, 12, 6);
        let b = random_doc(&mut r, 12, 6);
        let c = nbow_cost_matrix(&e, &a, &b, GroundMetric::CosineDistance).unwrap();
        assert!(rwmd(&a, &b, &c).unwrap() <= wmd(&a, &b, &c).unwrap().0 + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn plans_are_feasible(seed in any::<u64>(), cosine in any::<bool>()) {
        let mut r = rng(seed);
        let metric = if cosine { GroundMetric::CosineDistance } else { EUCLID };
        let e = random_embeddings(&mut r, 15, 8);
        let a = random_doc(&mut r, 15, 10);
        let b = random_doc(&mut r, 15, 10);
        let c = nbow_cost_matrix(&e, &a, &b, metric).unwrap();
        let (d, plan) = wmd(&a, &b, &c).unwrap();
        let t = &plan.flow;
        prop_assert!(t.as_slice().iter().all(|x| *x >= 0.0));
        for (i, w) in a.weights().iter().enumerate() {
            prop_assert!((t.row(i).iter().sum::<f64>() - w).abs() <= 1e-7);
        }
        for (j, w) in b.weights().iter().enumerate() {
            let col: f64 = (0..t.rows()).map(|i| t.get(i, j)).sum();
            prop_assert!((col - w).abs() <= 1e-7);
        }
        let objective: f64 = t.as_slice().iter().zip(c.c.as_slice()).map(|(x, y)| x * y).sum();
        prop_assert!((objective - d).abs() <= 1e-12 * (1.0 + d));
    }

    #[test]
    fn distances_are_symmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e = random_embeddings(&mut r, 15, 8);
        let a = random_doc(&mut r, 15, 8);
        let b = random_doc(&mut r, 15, 8);
        for metric in [EUCLID, GroundMetric::CosineDistance] {
            let ab = wmd(&a, &b, &nbow_cost_matrix(&e, &a, &b, metric).unwrap()).unwrap().0;
            let ba = wmd(&b, &a, &nbow_cost_matrix(&e, &b, &a, metric).unwrap()).unwrap().0;
            prop_assert!((ab - ba).abs() <= 1e-9);
        }
    }
}
