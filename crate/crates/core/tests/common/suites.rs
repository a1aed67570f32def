//! Property suites shared by the focused test files and the acceptance
//! target. Each returns the first violation found.

use std::collections::BTreeSet;

use bookforge::chaptering::{cluster, ClusterMethod, Dissimilarity, Partition};
use bookforge::corpus::{generate_synthetic, Article, Corpus, GoldBook, SynthConfig};
use bookforge::datasets::{
    build_candidate_dataset, build_pair_dataset_chapter, build_pair_dataset_order, find_candidates, ArticleProfiles,
    GroupCount, SeedSet, CANDIDATE_FEATURES,
};
use bookforge::graphnet::{build_subnetwork, compute_centralities, seed_distances, CentralityParams};
use bookforge::learners::{logistic_gradients, logistic_loss, train_gbdt_traced, GbdtParams, Matrix};
use bookforge::metrics::{adjusted_rand, auc};
use bookforge::ordering::ranks_from_pair_classes;
use bookforge::pipeline::{evaluate, generate, prepare_books, profile_corpus, train_models, PipelineParams};
use bookforge::selection::probs_to_ranks;
use bookforge::textfeat::TableEmbedder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

pub type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn check_centralities(n: usize, edges: &[(usize, usize)]) -> std::result::Result<(), String> {
    let g = graph(n, edges);
    let params = CentralityParams::default();
    let f = compute_centralities(&g, &params).map_err(|e| format!("{edges:?}: {e}"))?;
    let between = oracle_betweenness(n, edges);
    let close = oracle_closeness(n, edges);
    let pr = dense_pagerank(n, edges, params.damping);
    for v in 0..n {
        ensure!(f.betweenness[v] == between[v], "betweenness of {v} in {edges:?}: {} vs {}", f.betweenness[v], between[v]);
        ensure!(f.closeness[v] == close[v], "closeness of {v} in {edges:?}: {} vs {}", f.closeness[v], close[v]);
        ensure!((f.pagerank[v] - pr[v]).abs() <= 1e-9, "pagerank of {v} in {edges:?}: {} vs {}", f.pagerank[v], pr[v]);
    }
    Ok(())
}

/// Centralities against brute force: every graph on up to 4 nodes, and
/// random graphs of 5 and 6 nodes over a range of densities.
pub fn centrality_oracle(samples_per_size: usize) -> Outcome {
    let mut checked = 0;
    for n in 1..=4 {
        for edges in all_graphs(n) {
            check_centralities(n, &edges)?;
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 5..=6 {
        for s in 0..samples_per_size {
            let p = 0.05 + 0.9 * (s as f64 / samples_per_size as f64);
            check_centralities(n, &random_graph(&mut rng, n, p))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} graphs"))
}

/// AUC against pair counting on random instances with ties.
pub fn auc_oracle(instances: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(2..60);
        let mut labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        labels[0] = 0;
        labels[1] = 1;
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..12u8)) / 4.0).collect();
        let got = auc(&scores, &labels).map_err(|e| e.to_string())?;
        let want = brute_auc(&scores, &labels);
        worst = worst.max((got - want).abs());
        ensure!((got - want).abs() <= 1e-12, "AUC {got} vs {want}");
    }
    Ok(format!("{instances} instances, max error {worst:.1e}"))
}

/// ARI against pair-agreement counting for every size up to 10.
pub fn ari_oracle(per_size: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for n in 1..=10 {
        for _ in 0..per_size {
            let ka = rng.random_range(1..=n);
            let kb = rng.random_range(1..=n);
            let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();
            let pa = Partition::from_labels(a.iter().copied());
            let pb = Partition::from_labels(b.iter().copied());
            let got = adjusted_rand(&pa, &pb).map_err(|e| e.to_string())?;
            let want = brute_ari(pa.assignment(), pb.assignment());
            ensure!((got - want).abs() <= 1e-12, "ARI of {a:?} vs {b:?}: {got} vs {want}");
            checked += 1;
        }
    }
    Ok(format!("{checked} partition pairs"))
}

/// Candidate generation against level-by-level expansion.
pub fn candidates_oracle(graphs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..graphs {
        let n = rng.random_range(2..40);
        let p = rng.random_range(0.01..0.2);
        let edges = random_graph(&mut rng, n, p);
        let corpus = linked_corpus(n, &edges);
        let seed_count = rng.random_range(1..=n.min(3));
        let mut seeds: Vec<usize> = (0..n).collect();
        seeds.shuffle(&mut rng);
        seeds.truncate(seed_count);
        let hops = rng.random_range(1..=4);
        let set = SeedSet {
            query: String::new(),
            concept_ids: seeds.iter().map(|s| format!("a{s}")).collect(),
        };
        let got: BTreeSet<String> = find_candidates(&corpus, &set, hops)
            .map_err(|e| e.to_string())?
            .into_iter()
            .collect();
        let want = brute_candidates(&edges, &seeds, hops);
        ensure!(got == want, "candidates for seeds {seeds:?}, {hops} hops: {got:?} vs {want:?}");
    }
    Ok(format!("{graphs} graphs"))
}

/// Boosting never raises the training loss, and the loss derivatives match
/// central finite differences.
pub fn booster_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for trial in 0..5 {
        let n = 300;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let labels: Vec<u8> = rows
            .iter()
            .map(|r| u8::from(r[0] + 0.5 * r[1] * r[2] + rng.random_range(-0.3..0.3) > 0.0))
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let params = GbdtParams {
            n_trees: 40,
            rng_seed: trial,
            feature_subsample: if trial % 2 == 0 { 1.0 } else { 0.5 },
            ..Default::default()
        };
        let (_, trace) = train_gbdt_traced(&x, &labels, &params).map_err(|e| e.to_string())?;
        for w in trace.windows(2) {
            ensure!(w[1] <= w[0] * (1.0 + 1e-12), "loss rose from {} to {}", w[0], w[1]);
        }
    }
    let h = 1e-5;
    for _ in 0..1000 {
        let raw = rng.random_range(-8.0..8.0);
        let label = f64::from(rng.random_range(0..2u8));
        let weight = rng.random_range(0.1..5.0);
        let (g, hess) = logistic_gradients(raw, label, weight);
        let fd_g = (logistic_loss(raw + h, label, weight) - logistic_loss(raw - h, label, weight)) / (2.0 * h);
        let fd_h = (logistic_gradients(raw + h, label, weight).0 - logistic_gradients(raw - h, label, weight).0) / (2.0 * h);
        ensure!((g - fd_g).abs() <= 1e-6, "gradient {g} vs {fd_g} at {raw}");
        ensure!((hess - fd_h).abs() <= 1e-6, "hessian {hess} vs {fd_h} at {raw}");
    }
    Ok("5 training traces, 1000 derivative points".into())
}

/// Ranks, and so rank averages, ignore strictly increasing transforms.
pub fn rank_transform_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let transforms: [fn(f64) -> f64; 3] = [|p| p.powi(3), |p| (p / (1.0 - p)).ln(), |p| 2.0 * p - 7.0];
    for _ in 0..200 {
        let n = rng.random_range(1..50);
        let models = rng.random_range(1..5);
        let probs: Vec<Vec<f64>> = (0..models)
            .map(|_| (0..n).map(|_| f64::from(rng.random_range(1..20u8)) / 21.0).collect())
            .collect();
        let avg = |cols: &[Vec<f64>]| -> Vec<f64> {
            let ranks: Vec<Vec<f64>> = cols.iter().map(|c| probs_to_ranks(c).unwrap()).collect();
            (0..n).map(|r| ranks.iter().map(|c| c[r]).sum::<f64>() / models as f64).collect()
        };
        let base = avg(&probs);
        for f in transforms {
            let moved: Vec<Vec<f64>> = probs.iter().map(|c| c.iter().map(|&p| f(p)).collect()).collect();
            ensure!(avg(&moved) == base, "average ranks changed under a monotone transform");
        }
    }
    Ok("200 rank tables x 3 transforms".into())
}

/// Clustering a relabeled matrix gives the relabeled partition.
pub fn partition_relabel_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let n = rng.random_range(2..12);
        // Continuous distances keep the clusterers away from exact ties.
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0))).collect();
        let d = Dissimilarity::from_fn(n, |i, j| ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt())
            .unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let k = rng.random_range(1..=n);
        for method in ClusterMethod::ALL {
            let direct = cluster(&d, k, method).unwrap();
            let shuffled = cluster(&d.permuted(&order), k, method).unwrap();
            // Item a of the shuffled problem is item order[a] of the original.
            let mut back = vec![0; n];
            for (a, &o) in order.iter().enumerate() {
                back[o] = shuffled.cluster_of(a);
            }
            ensure!(
                Partition::from_labels(back) == direct,
                "{method} with k={k} is not relabel invariant"
            );
        }
    }
    Ok("100 matrices x 3 methods".into())
}

/// Swapping a stored pair and flipping its class leaves every counter as
/// it was.
pub fn order_rank_orientation_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..200 {
        let n = rng.random_range(2..10);
        let ids: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let k = rng.random_range(1..=n);
        let mut chapters: Vec<Vec<String>> = vec![Vec::new(); k];
        for (i, id) in ids.iter().enumerate() {
            let c = if i < k { i } else { rng.random_range(0..k) };
            chapters[c].push(id.clone());
        }
        let mut pairs = Vec::new();
        let mut classes = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push((ids[i].clone(), ids[j].clone()));
                classes.push(rng.random_range(0..2u8));
            }
        }
        let base = ranks_from_pair_classes(&pairs, &classes, &chapters).unwrap();
        let conserved: usize = base.article_rank.values().sum::<usize>() + base.chapter_rank.iter().sum::<usize>();
        ensure!(conserved == pairs.len(), "{conserved} increments for {} pairs", pairs.len());
        for (p, c) in pairs.iter_mut().zip(classes.iter_mut()) {
            if rng.random_bool(0.5) {
                *p = (p.1.clone(), p.0.clone());
                *c = 1 - *c;
            }
        }
        let flipped = ranks_from_pair_classes(&pairs, &classes, &chapters).unwrap();
        ensure!(flipped == base, "re-oriented pairs changed the ranks");
    }
    Ok("200 random books".into())
}

fn small_synth() -> SynthConfig {
    SynthConfig {
        articles: 300,
        books: 4,
        min_components: 8,
        max_components: 12,
        ..Default::default()
    }
}

fn small_params() -> PipelineParams {
    let mut params = PipelineParams::default();
    params.gbdt.n_trees = 30;
    params.gbdt.min_samples_leaf = 5;
    params.permutations = 99;
    params
}

/// Serialized artifacts of one seeded run: corpus, gold books, model set,
/// report and a generated book.
pub fn seeded_artifacts(seed: u64) -> Vec<String> {
    let (corpus, golds) = generate_synthetic(&small_synth(), seed).unwrap();
    let mut corpus_bytes = Vec::new();
    corpus.to_writer(&mut corpus_bytes).unwrap();
    let params = small_params();
    let profiles = profile_corpus(&corpus).unwrap();
    let tables = prepare_books(&corpus, &profiles, &golds[1..], &params).unwrap();
    let models = train_models(&tables, &params).unwrap();
    let report = evaluate(&tables, &models, &params).unwrap();
    let book = generate(&corpus, &profiles, &golds[0].title, &models, &params).unwrap();
    let mut scores = Vec::new();
    book.selection.write_scores_csv(&mut scores).unwrap();
    vec![
        String::from_utf8(corpus_bytes).unwrap(),
        serde_json::to_string(&golds).unwrap(),
        models.to_json().unwrap(),
        report.to_json().unwrap(),
        book.draft.to_json().unwrap(),
        String::from_utf8(scores).unwrap(),
    ]
}

/// Two runs with one seed produce byte-identical artifacts.
pub fn determinism() -> Outcome {
    let a = seeded_artifacts(5);
    let b = seeded_artifacts(5);
    let names = ["corpus", "gold books", "model set", "report", "book", "scores"];
    for ((x, y), name) in a.iter().zip(&b).zip(names) {
        ensure!(x == y, "{name} differs between identical runs");
    }
    Ok(format!("{} artifacts, {} bytes", a.len(), a.iter().map(String::len).sum::<usize>()))
}

fn all_finite(rows: &Matrix) -> bool {
    rows.as_slice().iter().all(|v| v.is_finite())
}

/// A hand-built corpus: a star of three seeds' neighbours plus an island
/// that no seed reaches, with no page-view history at all.
fn degenerate_corpus() -> Corpus {
    let mut arts: Vec<Article> = (0..8).map(|i| Article::new(format!("d{i}"), format!("D{i}"))).collect();
    let links = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 0), (4, 5), (5, 4), (1, 4)];
    for (s, t) in links {
        arts[s].out_links.push(format!("d{t}"));
    }
    for (i, a) in arts.iter_mut().enumerate() {
        a.text = format!("common words here\n\npart {i}");
        a.categories.insert("shared".into());
    }
    // d6 and d7 are unreachable from everything.
    arts[6].out_links.push("d7".into());
    Corpus::new(arts).unwrap()
}

/// Degenerate inputs: one seed, constant features, unreachable nodes, empty
/// page-view series and extreme cluster counts. Nothing panics and no
/// emitted table holds a non-finite value.
pub fn degenerate_inputs() -> Outcome {
    let corpus = degenerate_corpus();
    let embedder = TableEmbedder::new(corpus.articles().iter().map(|a| (a.id.clone(), vec![1.0, 0.0]))).unwrap();
    let profiles = ArticleProfiles::new(&corpus, &embedder);
    let params = CentralityParams::default();

    // Single seed: every min/avg/max triple collapses.
    let seeds = SeedSet {
        query: "D0".into(),
        concept_ids: vec!["d0".into()],
    };
    let members = ["d0", "d1", "d2", "d3", "d4", "d5", "d6"];
    let graph = build_subnetwork(&corpus, members).unwrap();
    let table = build_candidate_dataset(&corpus, &profiles, &seeds, None, &graph, &params).map_err(|e| e.to_string())?;
    ensure!(all_finite(&table.features), "candidate table holds a non-finite value");
    for (j, name) in CANDIDATE_FEATURES.iter().enumerate() {
        if let Some(what) = name.strip_prefix("Min ") {
            let avg = CANDIDATE_FEATURES
                .iter()
                .position(|n| n == &format!("Average {what}") || (what == "Dijkstra distance from the seed" && n == "Average Dijkstra distance from the seed concept"))
                .ok_or(format!("no average column for {name}"))?;
            let max = table.feature_index(&format!("Max {what}")).ok_or(format!("no max column for {name}"))?;
            for r in 0..table.len() {
                let row = table.row(r);
                ensure!(row[j] == row[avg] && row[j] == row[max], "{what} triple differs in row {r}");
            }
        }
    }

    // Unreachable node d6: its seed distances are the column means.
    let d6 = table.keys.iter().position(|k| k == "d6").ok_or("d6 missing")?;
    let min_col = table.feature_index("Min Dijkstra distance from the seed").unwrap();
    let reachable: Vec<f64> = (0..table.len()).filter(|&r| r != d6).map(|r| table.row(r)[min_col]).collect();
    let mean = reachable.iter().sum::<f64>() / reachable.len() as f64;
    ensure!((table.row(d6)[min_col] - mean).abs() < 1e-12, "unreachable distance not imputed with the mean");

    // Empty page-view series: correlation cells are imputed to 0.
    let kendall = table.feature_index("Min Kendall Tau statistic").unwrap();
    ensure!((0..table.len()).all(|r| table.row(r)[kendall] == 0.0), "empty series correlation not imputed");

    // Constant features (identical embeddings, categories, views) and k at
    // both extremes.
    let book = GoldBook {
        title: "D0".into(),
        views: 0,
        chapters: vec![vec!["d0".into(), "d1".into(), "d2".into()], vec!["d3".into(), "d4".into(), "d5".into()]],
    };
    let articles: Vec<String> = book.articles().map(String::from).collect();
    let book_graph = build_subnetwork(&corpus, articles.iter().map(String::as_str)).unwrap();
    for k in [1, articles.len()] {
        let pairs = build_pair_dataset_chapter(&corpus, &profiles, &articles, Some(&book.chapters), &book_graph, &GroupCount::Fixed(k))
            .map_err(|e| e.to_string())?;
        ensure!(pairs.len() == 15, "{} chapter pairs for 6 articles", pairs.len());
        ensure!(all_finite(&pairs.features), "chapter pairs hold a non-finite value");
        let want = if k == 1 { 1.0 } else { 0.0 };
        for r in 0..pairs.len() {
            ensure!(pairs.row(r)[17..].iter().all(|&v| v == want), "k={k}: indicator is not {want}");
        }
    }
    let estimated = build_pair_dataset_chapter(
        &corpus,
        &profiles,
        &articles,
        None,
        &book_graph,
        &GroupCount::Estimated(Default::default()),
    )
    .map_err(|e| e.to_string())?;
    ensure!(all_finite(&estimated.features), "estimated-k pairs hold a non-finite value");
    let cosine = estimated.feature_index("Cosine similarity between pair's articles").unwrap();
    let base = cosine * 3 + 17;
    ensure!(
        (0..estimated.len()).all(|r| estimated.row(r)[base..base + 3].iter().all(|&v| v == 1.0)),
        "constant cosine does not form a single group"
    );
    let order = build_pair_dataset_order(&corpus, &profiles, &articles, Some(&book), &book_graph, &params).map_err(|e| e.to_string())?;
    ensure!(all_finite(&order.features), "order pairs hold a non-finite value");

    let d = Dissimilarity::from_fn(5, |i, j| (i as f64 - j as f64).abs()).unwrap();
    for method in ClusterMethod::ALL {
        ensure!(cluster(&d, 1, method).unwrap().k() == 1, "{method} k=1");
        ensure!(cluster(&d, 5, method).unwrap().k() == 5, "{method} k=n");
    }
    Ok("single seed, constant features, unreachable node, empty series, k=1 and k=n".into())
}

/// Seed distance aggregates against all-pairs shortest paths.
pub fn seed_distance_oracle(graphs: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..graphs {
        let n = rng.random_range(1..25);
        let p = rng.random_range(0.02..0.3);
        let edges = random_graph(&mut rng, n, p);
        let g = graph(n, &edges);
        let dist = all_pairs_distances(n, &edges);
        let mut seeds: Vec<usize> = (0..n).collect();
        seeds.shuffle(&mut rng);
        seeds.truncate(rng.random_range(1..=n.min(4)));
        let got = seed_distances(&g, &seeds).map_err(|e| e.to_string())?;
        for v in 0..n {
            let reached: Vec<f64> = seeds.iter().filter_map(|&s| dist[s][v]).map(f64::from).collect();
            match (&got[v], reached.is_empty()) {
                (None, true) => {}
                (Some(d), false) => {
                    let min = reached.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = reached.iter().copied().fold(0.0, f64::max);
                    let avg = reached.iter().sum::<f64>() / reached.len() as f64;
                    ensure!(d.min == min && d.max == max && (d.avg - avg).abs() < 1e-12, "node {v}: {d:?}");
                }
                _ => return Err(format!("node {v}: reachability disagrees")),
            }
        }
    }
    Ok(format!("{graphs} graphs"))
}
