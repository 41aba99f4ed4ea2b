//! Acceptance suite. Prints one PASS/FAIL/SKIP line per criterion.
//!
//! Run with `cargo test -p divclust --test acceptance`. The optional Deng
//! check reads `DIVCLUST_DENG_CSV` (numeric CSV, one sample per row) and
//! either `DIVCLUST_DENG_LABELS` (one label per line) or a label column given
//! by `DIVCLUST_DENG_LABEL_COLUMN` (default 0).

mod common;

use std::time::Instant;

use common::*;
use divclust::algorithm::{AlgorithmConfig, Edit, Engine};
use divclust::eval::{nmi, SeededPrng};
use divclust::io::{
    add_uniform_outliers, linkage_from_svg, load_matrix, make_blobs, make_rings, render_dendrogram_svg,
    validate_linkage, BlobSpec, LoadOptions, SvgOptions,
};
use divclust::linalg::{leading_singular_direction, DataMatrix, KernelSpec};
use divclust::projection::ProjectionConfig;
use divclust::split::{depddp_split, kmeans_1d_split, DensitySplitOptions};
use divclust::tree::{ClusterTree, LinkageRow};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn eigen_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut worst = 1.0f64;
    let mut seed = 0u64;
    while checked < 100 {
        seed += 1;
        let mut r = SeededPrng::new(seed);
        let rows = 2 + r.below(29) as usize;
        let cols = 2 + r.below(19) as usize;
        let x = random_matrix(rows, cols, seed ^ 0xE16E);
        let pairs = jacobi_eigen(&gram_t(&x));
        let (s1, s2) = (pairs[0].0.max(0.0).sqrt(), pairs[1].0.max(0.0).sqrt());
        if (s1 - s2) / s1 < 0.01 {
            continue;
        }
        let d = leading_singular_direction(&x, 1e-9, 1000).unwrap();
        worst = worst.min(cosine(&d.vector, &pairs[0].1).abs());
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst >= 1.0 - 1e-8 && secs < 5.0,
        format!("100 matrices, min |cos| = 1 - {:.1e}, {secs:.2} s", 1.0 - worst),
    )
}

fn kmeans_exact() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for seed in 0..1000u64 {
        let mut r = SeededPrng::new(seed);
        let n = 2 + r.below(49) as usize;
        let mut s: Vec<f64> = (0..n).map(|_| r.normal() * 3.0 + (r.below(3) as f64) * 4.0).collect();
        if seed % 5 == 0 && n > 2 {
            s[1] = s[0];
        }
        let c = kmeans_1d_split(&s);
        match exhaustive_kmeans_1d(&s) {
            Some((point, between)) => {
                let crit_ok = (c.criterion - between).abs() <= 1e-9 * between.abs().max(1.0);
                if !(c.feasible && c.split_point == point && crit_ok) {
                    mismatches += 1;
                }
            }
            None => {
                if c.feasible {
                    mismatches += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && secs < 5.0,
        format!("1000 instances, {mismatches} mismatches, {secs:.2} s"),
    )
}

fn depddp_valley() -> Outcome {
    let opts = DensitySplitOptions::default();
    let dense = 4 * (opts.grid_size - 1) + 1;
    let mut disagree = 0;
    let mut feasible = 0;
    let mut worst_cells = 0.0f64;
    for seed in 0..200u64 {
        let mut r = SeededPrng::new(seed);
        let n = 20 + r.below(181) as usize;
        let modes = 1 + r.below(3) as usize;
        let gap = r.uniform(1.0, 8.0);
        let s: Vec<f64> = (0..n)
            .map(|i| r.normal() + (i % modes) as f64 * gap)
            .collect();
        let c = depddp_split(&s, &opts).unwrap();
        let scan = kde_valley_scan(&s, dense, opts.percentile);
        let coarse_step = scan.step * 4.0;
        match (c.feasible, scan.valley) {
            (true, Some(v)) => {
                feasible += 1;
                let cells = (c.split_point - v).abs() / coarse_step;
                worst_cells = worst_cells.max(cells);
                if cells > 1.0 {
                    disagree += 1;
                }
            }
            (false, None) => {}
            _ => disagree += 1,
        }
    }
    verdict(
        disagree == 0,
        format!("200 samples ({feasible} with a valley), {disagree} disagreements, max offset {worst_cells:.2} cells"),
    )
}

fn nmi_correctness() -> Outcome {
    let v = nmi(&[0, 0, 1, 1], &[0, 1, 1, 1]).unwrap();
    let oracle = contingency_nmi(&[0, 0, 1, 1], &[0, 1, 1, 1]);
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = SeededPrng::new(seed);
        let n = 1 + r.below(60) as usize;
        let (ka, kb) = (1 + r.below(5), 1 + r.below(5));
        let a: Vec<usize> = (0..n).map(|_| r.below(ka) as usize).collect();
        let b: Vec<usize> = (0..n).map(|_| r.below(kb) as usize).collect();
        let ab = nmi(&a, &b).unwrap();
        worst = worst.max((ab - nmi(&b, &a).unwrap()).abs());
        let relabel: Vec<usize> = a.iter().map(|l| 17 - l).collect();
        worst = worst.max((ab - nmi(&relabel, &b).unwrap()).abs());
    }
    verdict(
        (v - 0.3437).abs() <= 1e-4 && (v - oracle).abs() <= 1e-12 && worst <= 1e-12,
        format!("nmi = {v:.6} (oracle {oracle:.6}), max symmetry/relabel deviation {worst:.1e}"),
    )
}

fn recovery_config(algorithm: &str, k: Option<usize>, seed: u64) -> AlgorithmConfig {
    let mut c = AlgorithmConfig::new(algorithm, k);
    c.seed = seed;
    c
}

fn synthetic_recovery() -> Outcome {
    let mut hits = [0usize; 3];
    let mut exact_leaves = 0;
    let mut leaf_counts = Vec::new();
    let algos = ["pddp", "km_pddp", "bkm"];
    for seed in 0..20u64 {
        let blobs = make_blobs(&BlobSpec {
            n: 1000,
            d: 50,
            k: 5,
            separation: 10.0,
            spread: 1.0,
            seed,
        })
        .unwrap();
        let truth = blobs.data.labels().unwrap().to_vec();
        for (a, hit) in algos.iter().zip(hits.iter_mut()) {
            let out = Engine::new(recovery_config(a, Some(5), seed)).unwrap().fit(&blobs.data).unwrap();
            if nmi(&truth, &out.labels).unwrap() >= 0.95 {
                *hit += 1;
            }
        }
        let out = Engine::new(recovery_config("depddp", None, seed)).unwrap().fit(&blobs.data).unwrap();
        let leaves = out.tree.leaf_count();
        leaf_counts.push(leaves);
        if leaves == 5 {
            exact_leaves += 1;
        }
    }
    let ok = hits.iter().all(|&h| h >= 19) && exact_leaves >= 18;
    verdict(
        ok,
        format!(
            "NMI>=0.95: pddp {}/20, km_pddp {}/20, bkm {}/20; depddp 5 leaves {exact_leaves}/20 {:?}",
            hits[0], hits[1], hits[2], leaf_counts
        ),
    )
}

fn outlier_control() -> Outcome {
    let mut hits = 0;
    let mut scores = Vec::new();
    for seed in 0..20u64 {
        let d = [2, 10, 50][seed as usize % 3];
        let blobs = make_blobs(&BlobSpec {
            n: 600,
            d,
            k: 3,
            separation: 10.0,
            spread: 1.0,
            seed,
        })
        .unwrap();
        let (x, inlier) = add_uniform_outliers(&blobs.data, 60, seed + 1000).unwrap();
        let mut c = AlgorithmConfig::new("ipddp", Some(3));
        c.trim_fraction = 0.1;
        c.seed = seed;
        let out = Engine::new(c).unwrap().fit(&x).unwrap();
        let truth = blobs.data.labels().unwrap();
        let pred: Vec<usize> = out.labels.iter().zip(&inlier).filter(|(_, &m)| m).map(|(l, _)| *l).collect();
        let v = nmi(truth, &pred).unwrap();
        scores.push(format!("{v:.2}"));
        if v >= 0.90 {
            hits += 1;
        }
    }
    verdict(hits >= 18, format!("NMI>=0.90 on inliers {hits}/20 [{}]", scores.join(" ")))
}

fn nonlinear_separation() -> Outcome {
    let mut ok = 0;
    let mut detail = Vec::new();
    for seed in 0..10u64 {
        let x = make_rings(600, &[1.0, 3.0], 0.1, seed).unwrap();
        let truth = x.labels().unwrap();
        let mut kc = AlgorithmConfig::new("pddp", Some(2));
        kc.projection = ProjectionConfig::kpca(KernelSpec::Rbf { gamma: None });
        kc.seed = seed;
        let kernel = nmi(truth, &Engine::new(kc).unwrap().fit(&x).unwrap().labels).unwrap();
        let lc = AlgorithmConfig::new("pddp", Some(2));
        let linear = nmi(truth, &Engine::new(lc).unwrap().fit(&x).unwrap().labels).unwrap();
        detail.push(format!("{kernel:.2}/{linear:.2}"));
        if kernel >= 0.9 && linear <= 0.3 {
            ok += 1;
        }
    }
    verdict(ok == 10, format!("{ok}/10 seeds, kpca/pca NMI [{}]", detail.join(" ")))
}

fn efficiency() -> Outcome {
    let time = |n: usize| {
        let blobs = make_blobs(&BlobSpec {
            n,
            d: 2000,
            k: 5,
            separation: 10.0,
            spread: 1.0,
            seed: 11,
        })
        .unwrap();
        let engine = Engine::new(AlgorithmConfig::new("pddp", Some(5))).unwrap();
        let start = Instant::now();
        let out = engine.fit(&blobs.data).unwrap();
        assert_eq!(out.tree.leaf_count(), 5);
        start.elapsed().as_secs_f64()
    };
    let t5 = time(5000);
    let t10 = time(10000);
    let ratio = t10 / t5;
    verdict(
        t5 < 5.0 && ratio < 3.0,
        format!("n=5000: {t5:.2} s, n=10000: {t10:.2} s, ratio {ratio:.2}"),
    )
}

fn interactive_semantics() -> Outcome {
    let mut failures = Vec::new();
    let mut trees = 0;
    for algo in ["pddp", "depddp", "ipddp", "km_pddp", "bkm"] {
        for seed in 0..50u64 {
            let blobs = make_blobs(&BlobSpec {
                n: 150,
                d: 4,
                k: 4,
                separation: 6.0,
                spread: 1.0,
                seed,
            })
            .unwrap();
            let x = &blobs.data;
            let k = if algo == "depddp" { None } else { Some(4) };
            let engine = Engine::new(recovery_config(algo, k, seed)).unwrap();
            let fitted = engine.fit(x).unwrap();
            let tree = &fitted.tree;
            trees += 1;
            let internal: Vec<_> = tree.nodes().filter(|n| !n.is_leaf()).map(|n| n.id).collect();
            if internal.is_empty() {
                continue;
            }

            // idempotent edit on every internal node
            for &id in &internal {
                let mut t = tree.clone();
                let point = t.node(id).unwrap().split_point.unwrap();
                engine.recompute_subtree(&mut t, x, id, point).unwrap();
                if t.labels() != fitted.labels {
                    failures.push(format!("{algo}/{seed}: idempotent edit on node {id} changed labels"));
                }
            }

            // a real edit leaves everything outside the subtree alone
            let id = internal[seed as usize % internal.len()];
            let node = tree.node(id).unwrap();
            let (lo, hi) = node.projection.as_ref().unwrap().score_range;
            let point = lo + (hi - lo) * 0.37;
            let mut t = tree.clone();
            engine.recompute_subtree(&mut t, x, id, point).unwrap();
            let inside: std::collections::HashSet<usize> = node.sample_indices.iter().copied().collect();
            let outside: Vec<usize> = (0..x.rows()).filter(|i| !inside.contains(i)).collect();
            let before: Vec<usize> = outside.iter().map(|&i| fitted.labels[i]).collect();
            let after_labels = t.labels();
            let after: Vec<usize> = outside.iter().map(|&i| after_labels[i]).collect();
            let edited = tree.subtree(id).unwrap();
            let nodes_same = tree.nodes().filter(|n| !edited.contains(&n.id)).all(|n| {
                t.node(n.id).is_ok_and(|m| {
                    m.sample_indices == n.sample_indices
                        && m.split_point == n.split_point
                        && m.manual_split == n.manual_split
                        && m.children == n.children
                })
            });
            if !same_partition(&before, &after) || !nodes_same {
                failures.push(format!("{algo}/{seed}: edit on node {id} leaked outside its subtree"));
            }

            // replaying the edit log reproduces the labels bit-exactly
            let mut edits = vec![Edit { node: id, point }];
            let mut live = t.clone();
            if let Some(&child) = live.nodes().filter(|n| !n.is_leaf() && n.id != id).map(|n| &n.id).last() {
                let (lo, hi) = live.node(child).unwrap().projection.as_ref().unwrap().score_range;
                let p = lo + (hi - lo) * 0.61;
                engine.recompute_subtree(&mut live, x, child, p).unwrap();
                edits.push(Edit { node: child, point: p });
            }
            let replayed = engine.replay(x, &edits).unwrap();
            if replayed.labels != live.labels() {
                failures.push(format!("{algo}/{seed}: replay diverged"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{trees} trees, {} failures{}",
            failures.len(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn linkage_validity() -> Outcome {
    let mut bad = 0;
    let mut total = 0;
    for seed in 0..40u64 {
        let blobs = make_blobs(&BlobSpec {
            n: 30 + seed as usize,
            d: 3,
            k: 3,
            separation: 5.0,
            spread: 1.0,
            seed,
        })
        .unwrap();
        for algo in ["pddp", "km_pddp"] {
            let mut c = AlgorithmConfig::new(algo, Some(2 + seed as usize % 6));
            c.min_sample_split = 2;
            let out = Engine::new(c).unwrap().fit(&blobs.data).unwrap();
            let l = out.tree.to_linkage();
            total += 1;
            let monotone = validate_linkage(&l).is_ok();
            if l.len() != blobs.data.rows() - 1 || l.last().unwrap().size != blobs.data.rows() || !monotone {
                bad += 1;
            }
        }
    }
    let hand = vec![
        LinkageRow { a: 0, b: 1, height: 1.0, size: 2 },
        LinkageRow { a: 2, b: 3, height: 1.0, size: 2 },
        LinkageRow { a: 4, b: 5, height: 2.0, size: 4 },
    ];
    let svg = render_dendrogram_svg(&hand, Some(&[0, 0, 1, 1]), &SvgOptions::default()).unwrap();
    let round_trip = linkage_from_svg(&svg).unwrap() == hand;
    let from_tree = {
        let x = DataMatrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]]).unwrap();
        let mut c = AlgorithmConfig::new("pddp", Some(2));
        c.min_sample_split = 2;
        let t: ClusterTree = Engine::new(c).unwrap().fit(&x).unwrap().tree;
        t.to_linkage() == hand
    };
    verdict(
        bad == 0 && round_trip && from_tree,
        format!("{total} trees, {bad} invalid; 4-sample svg round trip {round_trip}, tree encoding {from_tree}"),
    )
}

fn deng_reference() -> Outcome {
    let Ok(path) = std::env::var("DIVCLUST_DENG_CSV") else {
        return Skip("set DIVCLUST_DENG_CSV to the downloaded Deng matrix".into());
    };
    let mut opts = LoadOptions::default();
    match std::env::var("DIVCLUST_DENG_LABELS") {
        Ok(l) => opts.label_file = Some(l.into()),
        Err(_) => {
            opts.label_column = Some(
                std::env::var("DIVCLUST_DENG_LABEL_COLUMN")
                    .ok()
                    .and_then(|v| v.parse().ok())
                    .unwrap_or(0),
            )
        }
    }
    let x = match load_matrix(&path, &opts) {
        Ok(x) => x,
        Err(e) => return Fail(format!("could not load {path}: {e}")),
    };
    let Some(truth) = x.labels().map(<[usize]>::to_vec) else {
        return Fail("dataset has no labels".into());
    };
    let mut k = truth.clone();
    k.sort_unstable();
    k.dedup();
    let k = k.len();
    let start = Instant::now();
    let de = nmi(&truth, &Engine::new(AlgorithmConfig::new("depddp", None)).unwrap().fit(&x).unwrap().labels).unwrap();
    let t_de = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let ip = nmi(&truth, &Engine::new(AlgorithmConfig::new("ipddp", Some(k))).unwrap().fit(&x).unwrap().labels).unwrap();
    let t_ip = start.elapsed().as_secs_f64();
    verdict(
        (de - 0.70).abs() <= 0.15 && (ip - 0.76).abs() <= 0.15,
        format!("depddp NMI {de:.2} ({t_de:.2} s), ipddp NMI {ip:.2} ({t_ip:.2} s)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("eigen-oracle", eigen_oracle),
        ("kmeans-1d-exact", kmeans_exact),
        ("depddp-valley-oracle", depddp_valley),
        ("nmi-correctness", nmi_correctness),
        ("synthetic-recovery", synthetic_recovery),
        ("outlier-control", outlier_control),
        ("nonlinear-separation", nonlinear_separation),
        ("efficiency-trend", efficiency),
        ("interactive-semantics", interactive_semantics),
        ("linkage-validity", linkage_validity),
        ("deng-reference (optional)", deng_reference),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Pass(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Fail(d) => {
                failed += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]")
            }
            Skip(d) => println!("SKIP {name}: {d}"),
        }
    }
    println!("{failed} criteria failed");
}
