use serde::{Deserialize, Serialize};

use super::{ClusterTree, NodeId};

/// One agglomerative merge: clusters `a` and `b` join at `height` into a
/// cluster of `size` samples. Cluster ids below `n` are samples; the merge on
/// row `r` creates cluster `n + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkageRow {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

impl LinkageRow {
    pub fn to_array(self) -> [f64; 4] {
        [self.a as f64, self.b as f64, self.height, self.size as f64]
    }
}

struct Builder {
    n: usize,
    rows: Vec<LinkageRow>,
}

impl Builder {
    fn merge(&mut self, a: (usize, f64, usize), b: (usize, f64, usize), height: f64) -> (usize, f64, usize) {
        self.rows.push(LinkageRow {
            a: a.0,
            b: b.0,
            height,
            size: a.2 + b.2,
        });
        (self.n + self.rows.len() - 1, height, a.2 + b.2)
    }

    /// Returns `(cluster id, height, size)` of the merged node.
    fn visit(&mut self, tree: &ClusterTree, id: NodeId) -> (usize, f64, usize) {
        let node = &tree.nodes[&id];
        match node.children {
            Some((l, r)) => {
                let a = self.visit(tree, l);
                let b = self.visit(tree, r);
                self.merge(a, b, 1.0 + a.1.max(b.1))
            }
            None => {
                let mut samples = node.sample_indices.iter();
                let first = *samples.next().expect("nodes are never empty");
                let mut acc = (first, 0.0, 1);
                for &s in samples {
                    acc = self.merge(acc, (s, 0.0, 1), 1.0);
                }
                acc
            }
        }
    }
}

impl ClusterTree {
    /// Agglomerative encoding of the tree: samples of a leaf chain-merge at
    /// height 1, and every internal node merges its children at one above the
    /// taller child. Exactly `n - 1` rows.
    pub fn to_linkage(&self) -> Vec<LinkageRow> {
        let mut b = Builder {
            n: self.n_samples,
            rows: Vec::with_capacity(self.n_samples.saturating_sub(1)),
        };
        if self.n_samples > 0 {
            b.visit(self, self.root);
        }
        b.rows
    }
}

/// Sample order along the leaves of a linkage, left child first.
pub fn leaf_order(linkage: &[LinkageRow]) -> Vec<usize> {
    let n = linkage.len() + 1;
    let mut out = Vec::with_capacity(n);
    let mut stack = vec![2 * n - 2];
    while let Some(c) = stack.pop() {
        if c < n {
            out.push(c);
        } else {
            let row = &linkage[c - n];
            stack.push(row.b);
            stack.push(row.a);
        }
    }
    out
}
