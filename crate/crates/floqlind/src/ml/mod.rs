//! Binary classifiers over feature vectors: training, scoring, metrics,
//! model persistence, and hyperparameter search.
//!
//! Eight algorithm families share one [`ClassifierSpec`] surface. Every
//! training path is deterministic under (spec, data, seed), and every model
//! scores a row with a class-1 probability in [0, 1]; the decision threshold
//! is 0.5 throughout.

mod gaussian;
mod metrics;
mod mlp;
mod tree;

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Scheme;

pub use metrics::{metrics, metrics_at, MetricsReport};
pub use mlp::MlpNet;

/// Algorithm choice with its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Knn { k: usize },
    DecisionTree { max_depth: usize },
    RandomForest { n_trees: usize, max_depth: usize },
    AdaBoost { n_stumps: usize, stump_depth: usize },
    Mlp { hidden: Vec<usize>, epochs: usize, learning_rate: f64, batch: usize },
    GaussianNb,
    Lda,
    Qda,
}

impl std::fmt::Display for ClassifierSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifierSpec::Knn { k } => write!(f, "knn(k={k})"),
            ClassifierSpec::DecisionTree { max_depth } => write!(f, "decision_tree(depth={max_depth})"),
            ClassifierSpec::RandomForest { n_trees, max_depth } => {
                write!(f, "random_forest(trees={n_trees}, depth={max_depth})")
            }
            ClassifierSpec::AdaBoost { n_stumps, stump_depth } => {
                write!(f, "adaboost(stages={n_stumps}, depth={stump_depth})")
            }
            ClassifierSpec::Mlp { hidden, .. } => write!(f, "mlp(hidden={hidden:?})"),
            ClassifierSpec::GaussianNb => write!(f, "gaussian_nb"),
            ClassifierSpec::Lda => write!(f, "lda"),
            ClassifierSpec::Qda => write!(f, "qda"),
        }
    }
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            ClassifierSpec::Knn { k } if *k == 0 => bad("knn needs k >= 1".into()),
            ClassifierSpec::DecisionTree { max_depth } if *max_depth == 0 => {
                bad("tree depth must be at least 1".into())
            }
            ClassifierSpec::RandomForest { n_trees, max_depth } if *n_trees == 0 || *max_depth == 0 => {
                bad("forest needs at least one tree of depth at least 1".into())
            }
            ClassifierSpec::AdaBoost { n_stumps, stump_depth } if *n_stumps == 0 || *stump_depth == 0 => {
                bad("boosting needs at least one stage of depth at least 1".into())
            }
            ClassifierSpec::Mlp { hidden, epochs, learning_rate, batch } => {
                if hidden.is_empty() || hidden.contains(&0) {
                    return bad("mlp hidden layers must be nonempty and positive".into());
                }
                if *epochs == 0 || *batch == 0 || !(*learning_rate > 0.0) {
                    return bad("mlp needs positive epochs, batch size, and learning rate".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Size measure used to break validation-accuracy ties toward the
    /// smaller model. Hyperparameter-free families count as zero; for
    /// nearest neighbors a larger k is the smoother, simpler hypothesis.
    fn complexity(&self) -> f64 {
        match self {
            ClassifierSpec::GaussianNb | ClassifierSpec::Lda | ClassifierSpec::Qda => 0.0,
            ClassifierSpec::Knn { k } => 1.0 / *k as f64,
            ClassifierSpec::DecisionTree { max_depth } => *max_depth as f64,
            ClassifierSpec::RandomForest { n_trees, max_depth } => (*n_trees * *max_depth) as f64,
            ClassifierSpec::AdaBoost { n_stumps, stump_depth } => (*n_stumps * *stump_depth) as f64,
            ClassifierSpec::Mlp { hidden, .. } => {
                let mut widths = vec![1usize];
                widths.extend_from_slice(hidden);
                widths.push(1);
                widths.windows(2).map(|w| (w[0] * w[1] + w[1]) as f64).sum()
            }
        }
    }

    fn family_rank(&self) -> usize {
        match self {
            ClassifierSpec::GaussianNb => 0,
            ClassifierSpec::Lda => 1,
            ClassifierSpec::Qda => 2,
            ClassifierSpec::Knn { .. } => 3,
            ClassifierSpec::DecisionTree { .. } => 4,
            ClassifierSpec::RandomForest { .. } => 5,
            ClassifierSpec::AdaBoost { .. } => 6,
            ClassifierSpec::Mlp { .. } => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum ModelState {
    Knn { x: Vec<Vec<f64>>, y: Vec<u8> },
    Tree(tree::Tree),
    Forest(Vec<tree::Tree>),
    Boosted { trees: Vec<tree::Tree>, alphas: Vec<f64> },
    Mlp(mlp::MlpNet),
    NaiveBayes(gaussian::NaiveBayes),
    Discriminant(gaussian::Discriminant),
}

/// A fitted classifier. Immutable and safely shareable across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub feature_width: usize,
    pub seed: u64,
    state: ModelState,
}

/// Fits `spec` on the given rows. Deterministic under (spec, data, seed).
pub fn train(spec: &ClassifierSpec, x: &[Vec<f64>], y: &[u8], seed: u64) -> Result<TrainedModel> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} feature rows against {} labels",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::DegenerateTrainingData("no training rows".into()));
    }
    let width = x[0].len();
    for (row_idx, row) in x.iter().enumerate() {
        if row.len() != width {
            return Err(Error::FeatureWidth { got: row.len(), expected: width });
        }
        for (col, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteFeature { row: row_idx, col });
            }
        }
    }
    if y.iter().any(|&label| label > 1) {
        return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
    }
    if y.iter().all(|&l| l == y[0]) {
        return Err(Error::DegenerateTrainingData(format!("all labels equal {}", y[0])));
    }

    let state = match spec {
        ClassifierSpec::Knn { .. } => ModelState::Knn { x: x.to_vec(), y: y.to_vec() },
        ClassifierSpec::DecisionTree { max_depth } => {
            let params = tree::TreeParams { max_depth: *max_depth, mtry: None };
            let w = vec![1.0; x.len()];
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            ModelState::Tree(tree::fit_tree(x, y, &w, &params, &mut rng))
        }
        ClassifierSpec::RandomForest { n_trees, max_depth } => {
            let mtry = (width as f64).sqrt().ceil() as usize;
            let params = tree::TreeParams { max_depth: *max_depth, mtry: Some(mtry.max(1)) };
            ModelState::Forest(tree::fit_forest(x, y, *n_trees, &params, seed))
        }
        ClassifierSpec::AdaBoost { n_stumps, stump_depth } => {
            let (trees, alphas) = tree::fit_adaboost(x, y, *n_stumps, *stump_depth);
            ModelState::Boosted { trees, alphas }
        }
        ClassifierSpec::Mlp { hidden, epochs, learning_rate, batch } => {
            let params = mlp::MlpParams {
                hidden: hidden.clone(),
                epochs: *epochs,
                learning_rate: *learning_rate,
                batch: *batch,
            };
            ModelState::Mlp(mlp::fit_mlp(x, y, &params, seed))
        }
        ClassifierSpec::GaussianNb => ModelState::NaiveBayes(gaussian::fit_naive_bayes(x, y)),
        ClassifierSpec::Lda => ModelState::Discriminant(gaussian::fit_lda(x, y)?),
        ClassifierSpec::Qda => ModelState::Discriminant(gaussian::fit_qda(x, y)?),
    };
    Ok(TrainedModel { spec: spec.clone(), feature_width: width, seed, state })
}

/// Class-1 probability for one feature row.
pub fn predict_score(model: &TrainedModel, row: &[f64]) -> Result<f64> {
    if row.len() != model.feature_width {
        return Err(Error::FeatureWidth { got: row.len(), expected: model.feature_width });
    }
    Ok(match &model.state {
        ModelState::Knn { x, y } => {
            let k = match model.spec {
                ClassifierSpec::Knn { k } => k.min(x.len()),
                _ => unreachable!("knn state only arises from a knn spec"),
            };
            knn_vote(x, y, row, k)
        }
        ModelState::Tree(t) => t.score(row),
        ModelState::Forest(trees) => tree::forest_score(trees, row),
        ModelState::Boosted { trees, alphas } => {
            if trees.is_empty() {
                0.5
            } else {
                tree::adaboost_score(trees, alphas, row)
            }
        }
        ModelState::Mlp(net) => net.forward(row),
        ModelState::NaiveBayes(nb) => nb.score(row),
        ModelState::Discriminant(d) => d.score(row),
    })
}

/// Hard decision at the 0.5 threshold.
pub fn predict_label(model: &TrainedModel, row: &[f64]) -> Result<u8> {
    Ok((predict_score(model, row)? >= 0.5) as u8)
}

/// Scores every row and summarizes against the truth.
pub fn evaluate(model: &TrainedModel, x: &[Vec<f64>], y: &[u8]) -> Result<MetricsReport> {
    let scores = x.iter().map(|row| predict_score(model, row)).collect::<Result<Vec<f64>>>()?;
    metrics(y, &scores)
}

fn knn_vote(x: &[Vec<f64>], y: &[u8], row: &[f64], k: usize) -> f64 {
    // Distance ties resolve by training index, keeping the vote stable.
    let mut dist: Vec<(f64, usize)> = x
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d2: f64 = p.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum();
            (d2, i)
        })
        .collect();
    let kth = k - 1;
    dist.select_nth_unstable_by(kth, |a, b| a.partial_cmp(b).expect("finite distances"));
    let ones = dist[..k].iter().filter(|&&(_, i)| y[i] == 1).count();
    ones as f64 / k as f64
}

pub const MODEL_FORMAT: &str = "floqlind-model";
pub const MODEL_VERSION: u32 = 1;

/// Self-describing serialized model: format tag, version, the feature
/// scheme it expects, and the learned state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub scheme: Scheme,
    pub model: TrainedModel,
}

/// Writes the model as JSON, appearing atomically via a temporary sibling.
pub fn save_model(path: &Path, scheme: Scheme, model: &TrainedModel) -> Result<()> {
    let file = ModelFile {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        scheme,
        model: model.clone(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    let tmp = path.with_extension("json.tmp");
    {
        let mut out = fs::File::create(&tmp)?;
        out.write_all(text.as_bytes())?;
        out.write_all(b"\n")?;
        out.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads a model written by [`save_model`], validating the format tag and
/// version before trusting the payload.
pub fn load_model(path: &Path) -> Result<(TrainedModel, Scheme)> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.format != MODEL_FORMAT {
        return Err(Error::SchemaMismatch(format!(
            "model format {:?} is not {MODEL_FORMAT:?}",
            file.format
        )));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::SchemaMismatch(format!(
            "model version {} is not {MODEL_VERSION}",
            file.version
        )));
    }
    Ok((file.model, file.scheme))
}

/// Hyperparameter grid covering the documented ranges: neighbor counts 3-7,
/// tree depths 3-15, forests of 50-300 trees with depths 2-9, boosting with
/// 50-300 stages, one or two hidden layers of 8-512 units, and the three
/// Gaussian fits.
pub fn default_grid() -> Vec<ClassifierSpec> {
    let mut specs = vec![
        ClassifierSpec::GaussianNb,
        ClassifierSpec::Lda,
        ClassifierSpec::Qda,
    ];
    for k in [3, 5, 7] {
        specs.push(ClassifierSpec::Knn { k });
    }
    for max_depth in [3, 6, 9, 12, 15] {
        specs.push(ClassifierSpec::DecisionTree { max_depth });
    }
    for n_trees in [50, 150, 300] {
        for max_depth in [3, 6, 9] {
            specs.push(ClassifierSpec::RandomForest { n_trees, max_depth });
        }
    }
    for n_stumps in [50, 150, 300] {
        for stump_depth in [1, 2] {
            specs.push(ClassifierSpec::AdaBoost { n_stumps, stump_depth });
        }
    }
    for hidden in [vec![32], vec![128], vec![512], vec![64, 64]] {
        specs.push(ClassifierSpec::Mlp { hidden, epochs: 200, learning_rate: 0.05, batch: 32 });
    }
    specs
}

/// Outcome of a hyperparameter search: the winning model plus the full
/// validation ranking for reporting.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub best: TrainedModel,
    pub best_validation: MetricsReport,
    /// Every candidate with its validation accuracy, smallest model first.
    pub ranking: Vec<(ClassifierSpec, f64)>,
}

/// Trains every spec and keeps the one with the best validation accuracy.
/// Candidates are tried smallest first and replaced only on strict
/// improvement, so ties go to the smaller model. Cells train in parallel.
pub fn grid_search(
    specs: &[ClassifierSpec],
    train_x: &[Vec<f64>],
    train_y: &[u8],
    val_x: &[Vec<f64>],
    val_y: &[u8],
    seed: u64,
) -> Result<SearchOutcome> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("search needs at least one candidate".into()));
    }
    let mut order: Vec<usize> = (0..specs.len()).collect();
    order.sort_by(|&a, &b| {
        specs[a]
            .complexity()
            .partial_cmp(&specs[b].complexity())
            .expect("finite complexity")
            .then(specs[a].family_rank().cmp(&specs[b].family_rank()))
            .then(a.cmp(&b))
    });
    let fitted: Vec<(TrainedModel, MetricsReport)> = order
        .par_iter()
        .map(|&i| {
            let model = train(&specs[i], train_x, train_y, seed)?;
            let report = evaluate(&model, val_x, val_y)?;
            Ok((model, report))
        })
        .collect::<Result<_>>()?;
    let mut ranking = Vec::with_capacity(fitted.len());
    let mut best: Option<(TrainedModel, MetricsReport)> = None;
    for (model, report) in fitted {
        ranking.push((model.spec.clone(), report.accuracy));
        if best.as_ref().map(|(_, b)| report.accuracy > b.accuracy).unwrap_or(true) {
            best = Some((model, report));
        }
    }
    let (best, best_validation) = best.expect("at least one candidate was evaluated");
    Ok(SearchOutcome { best, best_validation, ranking })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use tempfile::tempdir;

    /// Two unit-covariance blobs of 20 points at ±(3, 3).
    fn blobs() -> (Vec<Vec<f64>>, Vec<u8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let mut normal = move || {
            let u: f64 = rng.gen_range(1e-12..1.0);
            let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            (-2.0 * u.ln()).sqrt() * v.cos()
        };
        let mut x = Vec::new();
        let mut y = Vec::new();
        for c in 0..2u8 {
            let center = if c == 1 { 3.0 } else { -3.0 };
            for _ in 0..20 {
                x.push(vec![center + normal(), center + normal()]);
                y.push(c);
            }
        }
        (x, y)
    }

    fn roster() -> Vec<ClassifierSpec> {
        vec![
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::DecisionTree { max_depth: 6 },
            ClassifierSpec::RandomForest { n_trees: 25, max_depth: 5 },
            ClassifierSpec::AdaBoost { n_stumps: 30, stump_depth: 2 },
            ClassifierSpec::Mlp { hidden: vec![8], epochs: 300, learning_rate: 0.1, batch: 8 },
            ClassifierSpec::GaussianNb,
            ClassifierSpec::Lda,
            ClassifierSpec::Qda,
        ]
    }

    #[test]
    fn every_family_separates_the_blobs() {
        let (x, y) = blobs();
        for spec in roster() {
            let model = train(&spec, &x, &y, 1).unwrap();
            let report = evaluate(&model, &x, &y).unwrap();
            assert_eq!(report.accuracy, 1.0, "{spec} fell short: {report:?}");
        }
    }

    #[test]
    fn degenerate_training_data_is_rejected() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            train(&ClassifierSpec::Lda, &x, &[1, 1], 0),
            Err(Error::DegenerateTrainingData(_))
        ));
        assert!(matches!(
            train(&ClassifierSpec::Lda, &[], &[], 0),
            Err(Error::DegenerateTrainingData(_))
        ));
        assert!(matches!(
            train(&ClassifierSpec::Lda, &x, &[0, 2], 0),
            Err(Error::InvalidParameter(_))
        ));
        let nan = vec![vec![0.0], vec![f64::NAN]];
        assert!(matches!(
            train(&ClassifierSpec::Lda, &nan, &[0, 1], 0),
            Err(Error::NonFiniteFeature { row: 1, col: 0 })
        ));
        let ragged = vec![vec![0.0], vec![0.0, 1.0]];
        assert!(matches!(
            train(&ClassifierSpec::Lda, &ragged, &[0, 1], 0),
            Err(Error::FeatureWidth { .. })
        ));
        assert!(matches!(
            train(&ClassifierSpec::Knn { k: 0 }, &x, &[0, 1], 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn constant_features_fall_back_to_the_majority_class() {
        let x = vec![vec![2.0, 2.0]; 10];
        let y = vec![1, 1, 1, 1, 1, 1, 1, 0, 0, 0];
        for spec in [
            ClassifierSpec::DecisionTree { max_depth: 5 },
            ClassifierSpec::GaussianNb,
            ClassifierSpec::Lda,
            ClassifierSpec::AdaBoost { n_stumps: 10, stump_depth: 1 },
            ClassifierSpec::Mlp { hidden: vec![4], epochs: 200, learning_rate: 0.5, batch: 5 },
        ] {
            let model = train(&spec, &x, &y, 2).unwrap();
            assert_eq!(predict_label(&model, &[2.0, 2.0]).unwrap(), 1, "{spec}");
        }
    }

    #[test]
    fn knn_memorizes_with_a_single_neighbor() {
        let x: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, (i * i % 7) as f64]).collect();
        let y: Vec<u8> = (0..12).map(|i| (i % 3 == 1) as u8).collect();
        let model = train(&ClassifierSpec::Knn { k: 1 }, &x, &y, 0).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(predict_label(&model, row).unwrap(), label);
        }
    }

    #[test]
    fn knn_scores_the_vote_fraction() {
        let x = vec![vec![0.0], vec![0.1], vec![0.2], vec![5.0]];
        let y = vec![1, 1, 0, 0];
        let model = train(&ClassifierSpec::Knn { k: 3 }, &x, &y, 0).unwrap();
        let score = predict_score(&model, &[0.05]).unwrap();
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_is_rejected_at_prediction() {
        let (x, y) = blobs();
        let model = train(&ClassifierSpec::GaussianNb, &x, &y, 0).unwrap();
        assert!(matches!(
            predict_score(&model, &[1.0, 2.0, 3.0]),
            Err(Error::FeatureWidth { got: 3, expected: 2 })
        ));
    }

    #[test]
    fn model_files_round_trip_and_validate() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let (x, y) = blobs();
        let model = train(&ClassifierSpec::RandomForest { n_trees: 5, max_depth: 4 }, &x, &y, 3).unwrap();
        save_model(&path, Scheme::EigensystemNormalized, &model).unwrap();

        let (back, scheme) = load_model(&path).unwrap();
        assert_eq!(scheme, Scheme::EigensystemNormalized);
        assert_eq!(back, model);
        for row in x.iter().take(5) {
            assert_eq!(
                predict_score(&back, row).unwrap().to_bits(),
                predict_score(&model, row).unwrap().to_bits()
            );
        }

        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("floqlind-model"));
        fs::write(&path, text.replace("floqlind-model", "other-format")).unwrap();
        assert!(matches!(load_model(&path), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn grid_search_prefers_accuracy_then_size() {
        let (x, y) = blobs();
        let (vx, vy) = (x.clone(), y.clone());
        // Both depths separate the blobs perfectly; the shallow tree must win.
        let specs = vec![
            ClassifierSpec::DecisionTree { max_depth: 15 },
            ClassifierSpec::DecisionTree { max_depth: 3 },
        ];
        let outcome = grid_search(&specs, &x, &y, &vx, &vy, 4).unwrap();
        assert_eq!(outcome.best.spec, ClassifierSpec::DecisionTree { max_depth: 3 });
        assert_eq!(outcome.best_validation.accuracy, 1.0);
        assert_eq!(outcome.ranking.len(), 2);
        assert_eq!(outcome.ranking[0].0, ClassifierSpec::DecisionTree { max_depth: 3 });

        let again = grid_search(&specs, &x, &y, &vx, &vy, 4).unwrap();
        assert_eq!(outcome.best, again.best);
    }

    #[test]
    fn default_grid_spans_the_roster() {
        let grid = default_grid();
        assert_eq!(grid.len(), 30);
        for spec in &grid {
            spec.validate().unwrap();
        }
        let families: std::collections::BTreeSet<usize> =
            grid.iter().map(|s| s.family_rank()).collect();
        assert_eq!(families.len(), 8);
    }
}
