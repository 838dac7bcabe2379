//! Binary CART trees split on Gini impurity, plus the two ensembles built
//! from them: bootstrap-bagged forests with random feature subsets and the
//! staged reweighting booster.
//!
//! Trees accept per-sample weights so the booster reweights without copying
//! data; forests materialize their bootstrap samples so a single-tree forest
//! is structurally identical to a tree fit on that sample.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Clamp keeping stage weights finite when a weak learner is perfect.
const STAGE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { p1: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Weighted class-1 frequency of the leaf the row falls into.
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { p1 } => return *p1,
                Node::Split { feature, threshold, left, right } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    /// Features drawn per split; `None` considers all of them.
    pub mtry: Option<usize>,
}

/// Grows a depth-capped tree on weighted samples. Zero-weight samples are
/// invisible. Deterministic given the data and the rng state; the rng is
/// touched only when `mtry` restricts the candidate features.
pub(crate) fn fit_tree(
    x: &[Vec<f64>],
    y: &[u8],
    w: &[f64],
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
) -> Tree {
    let d = x.first().map(Vec::len).unwrap_or(0);
    let members: Vec<usize> = (0..x.len()).filter(|&i| w[i] > 0.0).collect();
    // Per-feature member lists sorted by feature value; splits partition
    // them stably so children inherit sorted order for free.
    let sorted_cols: Vec<Vec<usize>> = (0..d)
        .map(|f| {
            let mut idx = members.clone();
            idx.sort_by(|&a, &b| {
                x[a][f].partial_cmp(&x[b][f]).expect("finite features").then(a.cmp(&b))
            });
            idx
        })
        .collect();
    let mut nodes = Vec::new();
    grow(x, y, w, sorted_cols, 0, params, rng, &mut nodes);
    Tree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn grow(
    x: &[Vec<f64>],
    y: &[u8],
    w: &[f64],
    sorted_cols: Vec<Vec<usize>>,
    depth: usize,
    params: &TreeParams,
    rng: &mut ChaCha8Rng,
    nodes: &mut Vec<Node>,
) -> usize {
    let members: &[usize] = sorted_cols.first().map(Vec::as_slice).unwrap_or(&[]);
    let (w0, w1) = class_weights(members, y, w);
    let total = w0 + w1;
    let leaf_p1 = if total > 0.0 { w1 / total } else { 0.5 };
    let id = nodes.len();
    nodes.push(Node::Leaf { p1: leaf_p1 });
    if depth >= params.max_depth || w0 == 0.0 || w1 == 0.0 || members.len() < 2 {
        return id;
    }

    let d = sorted_cols.len();
    let candidates: Vec<usize> = match params.mtry {
        Some(m) if m < d => {
            let mut picked = sample(rng, d, m).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..d).collect(),
    };

    // Best (feature, threshold) by impurity decrease; features ascend and
    // thresholds walk left to right, so ties keep the first candidate. A
    // zero-gain split is still taken: interactions pay off deeper down.
    let parent = total * gini(w0, w1);
    let mut best: Option<(f64, usize, f64)> = None;
    for &f in &candidates {
        let col = &sorted_cols[f];
        let mut left0 = 0.0;
        let mut left1 = 0.0;
        for k in 0..col.len() - 1 {
            let i = col[k];
            if y[i] == 1 {
                left1 += w[i];
            } else {
                left0 += w[i];
            }
            let here = x[i][f];
            let next = x[col[k + 1]][f];
            if here == next {
                continue;
            }
            let lt = left0 + left1;
            let gain = parent - lt * gini(left0, left1) - (total - lt) * gini(w0 - left0, w1 - left1);
            if best.map(|(g, _, _)| gain > g).unwrap_or(true) {
                best = Some((gain, f, 0.5 * (here + next)));
            }
        }
    }
    let Some((_, feature, threshold)) = best else {
        return id;
    };

    let split = |col: &Vec<usize>| -> (Vec<usize>, Vec<usize>) {
        col.iter().copied().partition(|&i| x[i][feature] <= threshold)
    };
    let (left_cols, right_cols): (Vec<_>, Vec<_>) = sorted_cols.iter().map(split).unzip();
    let left = grow(x, y, w, left_cols, depth + 1, params, rng, nodes);
    let right = grow(x, y, w, right_cols, depth + 1, params, rng, nodes);
    nodes[id] = Node::Split { feature, threshold, left, right };
    id
}

fn class_weights(members: &[usize], y: &[u8], w: &[f64]) -> (f64, f64) {
    let mut w0 = 0.0;
    let mut w1 = 0.0;
    for &i in members {
        if y[i] == 1 {
            w1 += w[i];
        } else {
            w0 += w[i];
        }
    }
    (w0, w1)
}

/// Gini impurity of a two-class weight pair.
fn gini(w0: f64, w1: f64) -> f64 {
    let total = w0 + w1;
    if total <= 0.0 {
        return 0.0;
    }
    let p = w1 / total;
    2.0 * p * (1.0 - p)
}

/// One bootstrap resample drawn with replacement.
fn bootstrap(x: &[Vec<f64>], y: &[u8], rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<u8>) {
    let n = x.len();
    let mut bx = Vec::with_capacity(n);
    let mut by = Vec::with_capacity(n);
    for _ in 0..n {
        let i = rng.gen_range(0..n);
        bx.push(x[i].clone());
        by.push(y[i]);
    }
    (bx, by)
}

/// Fits `n_trees` trees on independent bootstrap samples, each splitting on
/// `mtry` random features. Per-tree seeds are drawn up front so the result
/// is identical however the trees are scheduled.
pub(crate) fn fit_forest(
    x: &[Vec<f64>],
    y: &[u8],
    n_trees: usize,
    params: &TreeParams,
    seed: u64,
) -> Vec<Tree> {
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..n_trees).map(|_| seeder.gen()).collect();
    seeds
        .into_par_iter()
        .map(|tree_seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let (bx, by) = bootstrap(x, y, &mut rng);
            let w = vec![1.0; bx.len()];
            fit_tree(&bx, &by, &w, params, &mut rng)
        })
        .collect()
}

pub(crate) fn forest_score(trees: &[Tree], row: &[f64]) -> f64 {
    trees.iter().map(|t| t.score(row)).sum::<f64>() / trees.len() as f64
}

/// Two-class staged reweighting over depth-capped trees. Stops early when a
/// stage is perfect or no better than chance. Returns the stages with their
/// weights; an empty result means even the first stage was uninformative.
pub(crate) fn fit_adaboost(
    x: &[Vec<f64>],
    y: &[u8],
    n_stumps: usize,
    stump_depth: usize,
) -> (Vec<Tree>, Vec<f64>) {
    let n = x.len();
    let params = TreeParams { max_depth: stump_depth, mtry: None };
    // The weak learner uses every feature, so the rng is never consulted.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut w = vec![1.0 / n as f64; n];
    let mut trees = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    for _ in 0..n_stumps {
        let tree = fit_tree(x, y, &w, &params, &mut rng);
        let votes: Vec<u8> = x.iter().map(|row| (tree.score(row) >= 0.5) as u8).collect();
        let eps: f64 = w
            .iter()
            .zip(votes.iter().zip(y))
            .filter(|(_, (vote, truth))| vote != truth)
            .map(|(wi, _)| wi)
            .sum();
        if eps >= 0.5 {
            break;
        }
        let alpha = 0.5 * ((1.0 - eps + STAGE_EPS) / (eps + STAGE_EPS)).ln();
        trees.push(tree);
        alphas.push(alpha);
        if eps <= 0.0 {
            break;
        }
        let mut z = 0.0;
        for (wi, (&vote, &truth)) in w.iter_mut().zip(votes.iter().zip(y)) {
            *wi *= if vote == truth { (-alpha).exp() } else { alpha.exp() };
            z += *wi;
        }
        for wi in &mut w {
            *wi /= z;
        }
    }
    (trees, alphas)
}

/// Logistic calibration of the staged margin.
pub(crate) fn adaboost_score(trees: &[Tree], alphas: &[f64], row: &[f64]) -> f64 {
    let margin: f64 = trees
        .iter()
        .zip(alphas)
        .map(|(t, a)| a * if t.score(row) >= 0.5 { 1.0 } else { -1.0 })
        .sum();
    1.0 / (1.0 + (-2.0 * margin).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_xor() -> (Vec<Vec<f64>>, Vec<u8>) {
        let x = vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ];
        let y = vec![0, 1, 1, 0];
        (x, y)
    }

    #[test]
    fn single_threshold_is_recovered() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..10).map(|i| (i >= 6) as u8).collect();
        let w = vec![1.0; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = fit_tree(&x, &y, &w, &TreeParams { max_depth: 4, mtry: None }, &mut rng);
        assert_eq!(tree.nodes.len(), 3);
        match &tree.nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 5.5);
            }
            other => panic!("expected a split at the root, got {other:?}"),
        }
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!((tree.score(row) >= 0.5) as u8, label);
        }
    }

    #[test]
    fn depth_cap_limits_the_tree() {
        let (x, y) = grid_xor();
        let w = vec![1.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // Depth 1 cannot express the checkerboard; both leaves stay mixed.
        let shallow = fit_tree(&x, &y, &w, &TreeParams { max_depth: 1, mtry: None }, &mut rng);
        assert!(shallow.nodes.len() <= 3);
        let deep = fit_tree(&x, &y, &w, &TreeParams { max_depth: 3, mtry: None }, &mut rng);
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!((deep.score(row) >= 0.5) as u8, label, "row {row:?}");
        }
    }

    #[test]
    fn doubling_a_weight_matches_duplicating_the_row() {
        let x = vec![vec![0.1], vec![0.4], vec![0.6], vec![0.9]];
        let y = vec![0, 0, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = TreeParams { max_depth: 3, mtry: None };
        let weighted = fit_tree(&x, &y, &[1.0, 2.0, 1.0, 1.0], &params, &mut rng);
        let mut dup_x = x.clone();
        dup_x.insert(2, vec![0.4]);
        let dup_y = vec![0, 0, 0, 1, 1];
        let duplicated = fit_tree(&dup_x, &dup_y, &[1.0; 5], &params, &mut rng);
        assert_eq!(weighted, duplicated);
    }

    #[test]
    fn zero_weight_rows_are_invisible() {
        let x = vec![vec![0.0], vec![0.25], vec![0.75], vec![1.0], vec![0.5]];
        let y = vec![0, 0, 1, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let params = TreeParams { max_depth: 3, mtry: None };
        let masked = fit_tree(&x, &y, &[1.0, 1.0, 1.0, 1.0, 0.0], &params, &mut rng);
        let visible = fit_tree(&x[..4], &y[..4], &[1.0; 4], &params, &mut rng);
        assert_eq!(masked, visible);
    }

    #[test]
    fn forest_of_one_tree_is_a_bootstrap_tree() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![(i as f64) / 30.0, ((i * 7) % 30) as f64 / 30.0])
            .collect();
        let y: Vec<u8> = (0..30).map(|i| (i % 3 == 0) as u8).collect();
        let params = TreeParams { max_depth: 5, mtry: None };
        let forest = fit_forest(&x, &y, 1, &params, 42);

        let mut seeder = ChaCha8Rng::seed_from_u64(42);
        let tree_seed: u64 = seeder.gen();
        let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
        let (bx, by) = bootstrap(&x, &y, &mut rng);
        let lone = fit_tree(&bx, &by, &vec![1.0; 30], &params, &mut rng);
        assert_eq!(forest[0], lone);
    }

    #[test]
    fn forest_is_deterministic_under_its_seed() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 8) as f64, (i / 8) as f64, ((i * 3) % 5) as f64])
            .collect();
        let y: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let params = TreeParams { max_depth: 4, mtry: Some(2) };
        let a = fit_forest(&x, &y, 8, &params, 7);
        let b = fit_forest(&x, &y, 8, &params, 7);
        assert_eq!(a, b);
        let c = fit_forest(&x, &y, 8, &params, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn boosting_learns_a_staircase_no_single_stump_can() {
        // Three alternating bands need at least two depth-1 stages.
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 30.0]).collect();
        let y: Vec<u8> = (0..30).map(|i| ((i / 10) % 2 == 0) as u8).collect();
        let (trees, alphas) = fit_adaboost(&x, &y, 40, 1);
        assert!(trees.len() > 1);
        assert_eq!(trees.len(), alphas.len());
        let correct = x
            .iter()
            .zip(&y)
            .filter(|&(row, &label)| (adaboost_score(&trees, &alphas, row) >= 0.5) as u8 == label)
            .count();
        assert!(correct >= 28, "boosting stalled at {correct}/30");
    }

    #[test]
    fn perfect_first_stage_short_circuits() {
        let x = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let y = vec![0, 0, 1, 1];
        let (trees, alphas) = fit_adaboost(&x, &y, 50, 2);
        assert_eq!(trees.len(), 1);
        assert!(alphas[0] > 10.0);
        assert!(adaboost_score(&trees, &alphas, &[0.95]) > 0.999);
        assert!(adaboost_score(&trees, &alphas, &[0.05]) < 0.001);
    }
}
