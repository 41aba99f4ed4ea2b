use divclust::projection::AxisModel;
use divclust::split::{SplitCandidate, SplitRule};
use divclust::tree::{leaf_order, ClusterTree, NodeProjection};
use divclust::Error;
use proptest::prelude::*;

/// Axis over 1-D samples whose scores are the sample values themselves.
fn attach(tree: &mut ClusterTree, id: usize, values: &[f64]) {
    let rows = tree.node(id).unwrap().sample_indices.clone();
    let scores: Vec<f64> = rows.iter().map(|&r| values[r]).collect();
    let model = AxisModel::Linear {
        mean: vec![0.0],
        direction: vec![1.0],
    };
    tree.set_analysis(
        id,
        Some(NodeProjection::new("pca", model, scores)),
        SplitCandidate {
            split_point: 0.0,
            criterion: 1.0,
            feasible: true,
            rule: SplitRule::Mean,
        },
    )
    .unwrap();
}

fn candidate(criterion: f64) -> SplitCandidate {
    SplitCandidate {
        split_point: 0.0,
        criterion,
        feasible: true,
        rule: SplitRule::Mean,
    }
}

#[test]
fn sign_partition_of_root() {
    let values = [-2.0, -1.0, 1.0, 2.0];
    let mut t = ClusterTree::new(4);
    attach(&mut t, 0, &values);
    let (l, r) = t.split_node(0, 0.0, false).unwrap();
    assert_eq!(t.node(l).unwrap().sample_indices, vec![0, 1]);
    assert_eq!(t.node(r).unwrap().sample_indices, vec![2, 3]);
    assert_eq!(t.labels(), vec![0, 0, 1, 1]);
}

#[test]
fn split_below_range_is_degenerate() {
    let values = [-2.0, -1.0, 1.0, 2.0];
    let mut t = ClusterTree::new(4);
    attach(&mut t, 0, &values);
    assert!(matches!(t.split_node(0, -5.0, false), Err(Error::DegenerateSplit { .. })));
    assert!(matches!(t.split_node(0, -5.0, true), Err(Error::DegenerateSplit { .. })));
    t.split_node(0, 0.0, false).unwrap();
    assert!(matches!(t.split_node(0, 0.5, false), Err(Error::Structure(_))));
    assert!(matches!(t.node(99), Err(Error::Structure(_))));
}

#[test]
fn ids_are_allocated_monotonically() {
    let values: Vec<f64> = (0..8).map(|v| v as f64).collect();
    let mut t = ClusterTree::new(8);
    attach(&mut t, 0, &values);
    assert_eq!(t.split_node(0, 4.0, false).unwrap(), (1, 2));
    attach(&mut t, 1, &values);
    assert_eq!(t.split_node(1, 2.0, false).unwrap(), (3, 4));
    attach(&mut t, 2, &values);
    assert_eq!(t.split_node(2, 6.0, false).unwrap(), (5, 6));
}

#[test]
fn leaf_selection_rules() {
    let values: Vec<f64> = (0..10).map(|v| v as f64).collect();
    let mut t = ClusterTree::new(10);
    attach(&mut t, 0, &values);
    t.split_node(0, 5.0, false).unwrap();
    assert_eq!(t.select_next_leaf(2), None);

    t.set_analysis(1, None, candidate(0.5)).unwrap();
    assert_eq!(t.select_next_leaf(2), Some(1));
    t.set_analysis(2, None, candidate(0.9)).unwrap();
    assert_eq!(t.select_next_leaf(2), Some(2));
    t.set_analysis(2, None, candidate(0.5)).unwrap();
    assert_eq!(t.select_next_leaf(2), Some(1));
    assert_eq!(t.select_next_leaf(6), None);
    t.set_analysis(1, None, SplitCandidate::infeasible(SplitRule::Mean)).unwrap();
    assert_eq!(t.select_next_leaf(2), Some(2));
}

#[test]
fn three_leaf_labels_follow_leaf_enumeration() {
    let values = [5.0, 1.0, 9.0, 2.0, 8.0, 6.0];
    let mut t = ClusterTree::new(6);
    attach(&mut t, 0, &values);
    t.split_node(0, 4.0, false).unwrap();
    attach(&mut t, 2, &values);
    t.split_node(2, 7.0, false).unwrap();
    let leaves = t.leaves();
    let labels = t.labels();
    for (k, id) in leaves.iter().enumerate() {
        for &s in &t.node(*id).unwrap().sample_indices {
            assert_eq!(labels[s], k);
        }
    }
    let mut seen = labels.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen, vec![0, 1, 2]);
}

#[test]
fn serialization_round_trip_keeps_labels() {
    let values = [5.0, 1.0, 9.0, 2.0, 8.0, 6.0];
    let mut t = ClusterTree::new(6);
    attach(&mut t, 0, &values);
    t.split_node(0, 4.0, true).unwrap();
    attach(&mut t, 2, &values);
    t.split_node(2, 7.0, false).unwrap();
    let json = t.to_json().unwrap();
    let back = ClusterTree::from_json(&json).unwrap();
    assert_eq!(back.labels(), t.labels());
    assert_eq!(back.split_order(), t.split_order());
    assert_eq!(back.node(0).unwrap().manual_split, Some(4.0));
    assert_eq!(back.to_json().unwrap(), json);
}

#[test]
fn corrupt_documents_are_rejected() {
    assert!(ClusterTree::from_json("{").is_err());
    let mut t = ClusterTree::new(4);
    attach(&mut t, 0, &[-2.0, -1.0, 1.0, 2.0]);
    t.split_node(0, 0.0, false).unwrap();
    let json = t.to_json().unwrap().replace("\"n_samples\": 4", "\"n_samples\": 5");
    assert!(ClusterTree::from_json(&json).is_err());
}

#[test]
fn smallest_linkage() {
    let mut t = ClusterTree::new(2);
    attach(&mut t, 0, &[-1.0, 1.0]);
    t.split_node(0, 0.0, false).unwrap();
    let rows: Vec<[f64; 4]> = t.to_linkage().into_iter().map(|r| r.to_array()).collect();
    assert_eq!(rows, vec![[0.0, 1.0, 1.0, 2.0]]);
}

#[test]
fn four_sample_linkage() {
    let mut t = ClusterTree::new(4);
    attach(&mut t, 0, &[-2.0, -1.0, 1.0, 2.0]);
    t.split_node(0, 0.0, false).unwrap();
    let rows: Vec<[f64; 4]> = t.to_linkage().into_iter().map(|r| r.to_array()).collect();
    assert_eq!(rows, vec![[0.0, 1.0, 1.0, 2.0], [2.0, 3.0, 1.0, 2.0], [4.0, 5.0, 2.0, 4.0]]);
}

/// Builds a tree by repeatedly splitting a leaf at the median of its values.
fn random_tree(values: &[f64], picks: &[usize]) -> ClusterTree {
    let mut t = ClusterTree::new(values.len());
    for &p in picks {
        let leaves: Vec<usize> = t
            .leaves()
            .into_iter()
            .filter(|&id| {
                let rows = &t.node(id).unwrap().sample_indices;
                let first = values[rows[0]];
                rows.iter().any(|&r| values[r] != first)
            })
            .collect();
        if leaves.is_empty() {
            break;
        }
        let id = leaves[p % leaves.len()];
        attach(&mut t, id, values);
        let mut s: Vec<f64> = t.node(id).unwrap().sample_indices.iter().map(|&r| values[r]).collect();
        s.sort_by(f64::total_cmp);
        let point = *s.iter().find(|&&v| v > s[0]).unwrap();
        t.split_node(id, point, false).unwrap();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tree_invariants(values in prop::collection::vec(-100i32..100, 2..40), picks in prop::collection::vec(0usize..100, 0..15)) {
        let values: Vec<f64> = values.into_iter().map(f64::from).collect();
        let n = values.len();
        let t = random_tree(&values, &picks);
        t.validate().unwrap();

        let mut covered: Vec<usize> = t.leaves().iter().flat_map(|&id| t.node(id).unwrap().sample_indices.clone()).collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..n).collect::<Vec<_>>());

        let back = ClusterTree::from_json(&t.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.labels(), t.labels());

        let link = t.to_linkage();
        prop_assert_eq!(link.len(), n - 1);
        prop_assert_eq!(link.last().unwrap().size, n);
        for (r, row) in link.iter().enumerate() {
            for c in [row.a, row.b] {
                if c >= n {
                    prop_assert!(link[c - n].height <= row.height);
                    prop_assert!(c - n < r);
                }
            }
        }

        // each leaf's samples appear contiguously in the dendrogram order
        let order = leaf_order(&link);
        let labels = t.labels();
        let mut runs = 1;
        for w in order.windows(2) {
            if labels[w[0]] != labels[w[1]] {
                runs += 1;
            }
        }
        prop_assert_eq!(runs, t.leaf_count());
    }
}
