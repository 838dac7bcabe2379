//! Fit several classifier families on a swept dataset and compare how well
//! each one recovers the Markovianity label from Choi features alone.
//!
//!     cargo run --release --example train_classifiers

use floqlind::dataset::{design_matrix, split, sweep, GridSpec};
use floqlind::features::Scheme;
use floqlind::lindblad::Problem;
use floqlind::ml::{evaluate, train, ClassifierSpec};

fn main() -> floqlind::Result<()> {
    // Coarse two-phase sweep; enough rows for a meaningful fit while
    // keeping the example quick.
    let grid = GridSpec {
        e_min: 0.0,
        e_max: 3.0,
        e_step: 0.25,
        omega_min: 0.35,
        omega_max: 2.55,
        omega_step: 0.2,
        phases: vec![0.0, std::f64::consts::FRAC_PI_3],
        problems: vec![Problem::I],
    };
    grid.validate()?;
    let rows: Vec<_> = sweep(&grid, Scheme::EigensystemNormalized)?
        .usable()
        .into_iter()
        .cloned()
        .collect();
    let (train_rows, test_rows) = split(&rows, 0.8, 11)?;
    println!("{} training rows, {} held out", train_rows.len(), test_rows.len());

    let (x_train, y_train) = design_matrix(&train_rows.iter().collect::<Vec<_>>());
    let (x_test, y_test) = design_matrix(&test_rows.iter().collect::<Vec<_>>());

    let roster = [
        ClassifierSpec::Knn { k: 5 },
        ClassifierSpec::DecisionTree { max_depth: 9 },
        ClassifierSpec::RandomForest { n_trees: 100, max_depth: 9 },
        ClassifierSpec::AdaBoost { n_stumps: 100, stump_depth: 2 },
        ClassifierSpec::GaussianNb,
        ClassifierSpec::Lda,
        ClassifierSpec::Qda,
        ClassifierSpec::Mlp { hidden: vec![32], epochs: 100, learning_rate: 0.05, batch: 32 },
    ];

    println!("{:<28} {:>9} {:>9} {:>9}", "model", "accuracy", "f1", "auc");
    for spec in roster {
        let model = train(&spec, &x_train, &y_train, 7)?;
        let m = evaluate(&model, &x_test, &y_test)?;
        let auc = m.auc.map_or("n/a".into(), |a| format!("{a:.4}"));
        println!("{:<28} {:>9.4} {:>9.4} {:>9}", spec.to_string(), m.accuracy, m.f1, auc);
    }
    Ok(())
}
