use ggm_core::distance::DistanceId;
use ggm_core::evaluation::{
    ablate_joint_pairs, ccr_loo_1nn, compare_distances, evaluate, EvalOptions, LabeledFeatureSet, Metric,
};
use ggm_core::graph::CausalGraph;
use ggm_core::linalg::Matrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 6;

fn joints() -> Vec<String> {
    (0..P).map(|j| format!("j{j}")).collect()
}

fn graph(edges: &[(usize, usize)]) -> CausalGraph {
    let mut a = Matrix::zeros(P, P);
    for &(r, c) in edges {
        a[(r, c)] = 1.0;
    }
    CausalGraph::new(joints(), a, None).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, density: f64) -> CausalGraph {
    let a = Matrix::from_fn(P, P, |r, c| if r != c && rng.random_bool(density) { 1.0 } else { 0.0 });
    CausalGraph::new(joints(), a, None).unwrap()
}

/// Two classes around disjoint edge patterns. Each class holds three
/// variants, each present twice: the max norm only takes the values 0 and p
/// on binary graphs, so it separates classes only through exact duplicates.
fn separable() -> LabeledFeatureSet {
    let a = [(0, 1), (1, 2), (2, 0), (0, 3)];
    let b = [(3, 4), (4, 5), (5, 3), (5, 1)];
    let extra = [(1, 3), (2, 4), (4, 0)];
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for (label, base) in [("a", &a), ("b", &b)] {
        for e in extra {
            let mut edges = base.to_vec();
            edges.push(e);
            for _ in 0..2 {
                graphs.push(graph(&edges));
                labels.push(label.to_string());
            }
        }
    }
    LabeledFeatureSet::new(graphs, labels).unwrap()
}

#[test]
fn separable_set_scores_perfectly_under_every_function() {
    let set = separable();
    let reports = compare_distances(&set, EvalOptions { jaccard_complement: true }).unwrap();
    assert_eq!(reports.len(), 11);
    for r in &reports {
        assert_eq!(r.ccr, 1.0, "{}", r.distance);
    }
}

#[test]
fn jaccard_as_printed_is_a_similarity() {
    // Identical graphs score 1 and disjoint ones 0, so nearest-neighbour
    // search under the raw ratio prefers the other class.
    let r = evaluate(&separable(), DistanceId::Jaccard, EvalOptions::default()).unwrap();
    assert_eq!(r.ccr, 0.0);
}

#[test]
fn frobenius_and_hilbert_schmidt_rows_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let graphs: Vec<CausalGraph> = (0..24).map(|_| random_graph(&mut rng, 0.3)).collect();
    let labels = (0..24).map(|i| format!("s{}", i % 4)).collect();
    let set = LabeledFeatureSet::new(graphs, labels).unwrap();
    let f = evaluate(&set, DistanceId::Frobenius, EvalOptions::default()).unwrap();
    let hs = evaluate(&set, DistanceId::HilbertSchmidt, EvalOptions::default()).unwrap();
    assert_eq!(f.ccr, hs.ccr);
    assert!((f.dbi - hs.dbi).abs() < 1e-9 && (f.di - hs.di).abs() < 1e-9);
}

#[test]
fn permuted_labels_give_chance_ccr() {
    let (classes, per_class, reps) = (4usize, 25usize, 20usize);
    let n = classes * per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let graphs: Vec<CausalGraph> = (0..n).map(|_| random_graph(&mut rng, 0.4)).collect();
    let mut labels: Vec<String> = (0..n).map(|i| format!("c{}", i % classes)).collect();
    let mut total = 0.0;
    for _ in 0..reps {
        labels.shuffle(&mut rng);
        let set = LabeledFeatureSet::new(graphs.clone(), labels.clone()).unwrap();
        total += ccr_loo_1nn(&set, DistanceId::Total).unwrap();
    }
    let mean = total / reps as f64;
    let chance = 1.0 / classes as f64;
    let sigma = (chance * (1.0 - chance) / (n * reps) as f64).sqrt();
    assert!((mean - chance).abs() <= 3.0 * sigma, "mean {mean}, band ±{}", 3.0 * sigma);
}

fn noisy_set(seed: u64) -> LabeledFeatureSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let protos: Vec<CausalGraph> = (0..3).map(|_| random_graph(&mut rng, 0.35)).collect();
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for k in 0..18 {
        let mut a = protos[k % 3].adjacency.clone();
        let (r, c) = (rng.random_range(0..P), rng.random_range(0..P));
        if r != c {
            a[(r, c)] = 1.0 - a[(r, c)];
        }
        graphs.push(CausalGraph::new(joints(), a, None).unwrap());
        labels.push(format!("id{}", k % 3));
    }
    LabeledFeatureSet::new(graphs, labels).unwrap()
}

#[test]
fn relabeling_leaves_scores_unchanged() {
    let set = noisy_set(3);
    let renamed: Vec<String> = set.labels().iter().map(|l| format!("zz-{l}")).collect();
    let other = LabeledFeatureSet::new(set.graphs().to_vec(), renamed).unwrap();
    for id in [DistanceId::Total, DistanceId::KyFan(1), DistanceId::Mahalanobis] {
        let a = evaluate(&set, id, EvalOptions::default()).unwrap();
        let b = evaluate(&other, id, EvalOptions::default()).unwrap();
        assert_eq!((a.ccr, a.dbi, a.di), (b.ccr, b.dbi, b.di));
    }
}

#[test]
fn sample_order_does_not_matter() {
    let set = noisy_set(4);
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
    let pick = |v: &[String]| order.iter().map(|&i| v[i].clone()).collect::<Vec<_>>();
    let shuffled = LabeledFeatureSet::with_ids(
        order.iter().map(|&i| set.graphs()[i].clone()).collect(),
        pick(set.labels()),
        pick(set.ids()),
    )
    .unwrap();
    for id in [DistanceId::Total, DistanceId::Hamming, DistanceId::Spectral] {
        let a = evaluate(&set, id, EvalOptions::default()).unwrap();
        let b = evaluate(&shuffled, id, EvalOptions::default()).unwrap();
        assert_eq!(a.ccr, b.ccr, "{id}");
        assert!((a.dbi - b.dbi).abs() < 1e-12 && (a.di - b.di).abs() < 1e-12);
    }
}

#[test]
fn duplicated_samples_find_their_twins() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut graphs = Vec::new();
    while graphs.len() < 10 {
        let g = random_graph(&mut rng, 0.4);
        if !graphs.contains(&g) {
            graphs.push(g);
        }
    }
    let labels: Vec<String> = (0..10).map(|i| format!("s{}", i % 3)).collect();
    let doubled_graphs: Vec<CausalGraph> = graphs.iter().chain(&graphs).cloned().collect();
    let doubled_labels: Vec<String> = labels.iter().chain(&labels).cloned().collect();
    let set = LabeledFeatureSet::new(doubled_graphs, doubled_labels).unwrap();
    for id in DistanceId::ALL {
        if id == DistanceId::Jaccard {
            continue;
        }
        assert_eq!(ccr_loo_1nn(&set, id).unwrap(), 1.0, "{id}");
    }
}

#[test]
fn ablating_an_absent_pair_changes_nothing() {
    let set = separable();
    // Joints 2 and 5 are never connected in the separable fixture.
    for metric in Metric::ALL {
        let m = ablate_joint_pairs(&set, metric, metric.default_distance(), EvalOptions::default()).unwrap();
        assert_eq!(m.values[(2, 5)], 0.0);
        assert_eq!(m.values[(5, 2)], 0.0);
        assert!((0..P).all(|i| m.values[(i, i)] == 0.0));
        for i in 0..P {
            for j in 0..P {
                assert_eq!(m.values[(i, j)], m.values[(j, i)]);
            }
        }
    }
}

#[test]
fn ablating_the_identity_edge_drives_ccr_to_chance() {
    let shared = [(0, 3), (3, 4), (4, 5), (2, 0)];
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for k in 0..12 {
        let mut edges = shared.to_vec();
        if k % 2 == 0 {
            edges.push((1, 2));
        }
        graphs.push(graph(&edges));
        labels.push(if k % 2 == 0 { "with" } else { "without" }.to_string());
    }
    let set = LabeledFeatureSet::new(graphs, labels).unwrap();
    let m = ablate_joint_pairs(&set, Metric::Ccr, DistanceId::Total, EvalOptions::default()).unwrap();
    assert_eq!(m.baseline_value, 1.0);
    // Every ablated graph is identical, so all neighbours are ties.
    let ablated = 1.0 - m.values[(1, 2)] / 100.0;
    assert!(ablated <= 0.5, "{ablated}");
    assert!(m.values.as_slice().iter().all(|&v| v <= m.values[(1, 2)]));
    assert_eq!(m.values[(0, 3)], 0.0);
}

#[test]
fn jaccard_complement_puts_empty_graphs_together() {
    use ggm_core::evaluation::pairwise_distances;
    let set = LabeledFeatureSet::new(
        vec![graph(&[]), graph(&[]), graph(&[(0, 1)])],
        vec!["a".into(), "a".into(), "b".into()],
    )
    .unwrap();
    let id = DistanceId::Jaccard;
    assert!(pairwise_distances(&set, id, EvalOptions::default()).is_err());
    let dm = pairwise_distances(&set, id, EvalOptions { jaccard_complement: true }).unwrap();
    assert_eq!(dm.get(0, 1), 0.0);
    assert_eq!(dm.get(0, 2), 1.0);
}
