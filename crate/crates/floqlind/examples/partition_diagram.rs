//! Map the yes/no partition of the driving plane and render it: truth from
//! the decision procedure, prediction from a trained classifier, and their
//! disagreement, one colored cell per grid point.
//!
//!     cargo run --release --example partition_diagram

use floqlind::dataset::{design_matrix, sweep, GridSpec};
use floqlind::diagram::PartitionGrid;
use floqlind::features::Scheme;
use floqlind::lindblad::Problem;
use floqlind::ml::{predict_label, train, ClassifierSpec};

fn main() -> floqlind::Result<()> {
    // Truth labels come from a sweep at phase 0; the classifier is trained
    // on a different phase so the panel shows genuine generalization.
    let grid_at = |phi: f64| GridSpec {
        e_min: 0.0,
        e_max: 3.0,
        e_step: 0.25,
        omega_min: 0.35,
        omega_max: 2.55,
        omega_step: 0.2,
        phases: vec![phi],
        problems: vec![Problem::I],
    };

    let train_rows = sweep(&grid_at(std::f64::consts::FRAC_PI_3), Scheme::EigensystemNormalized)?;
    let train_rows: Vec<_> = train_rows.usable().into_iter().cloned().collect();
    let (x, y) = design_matrix(&train_rows.iter().collect::<Vec<_>>());
    let model = train(&ClassifierSpec::RandomForest { n_trees: 100, max_depth: 9 }, &x, &y, 7)?;

    let panel = sweep(&grid_at(0.0), Scheme::EigensystemNormalized)?;
    let mut grid = PartitionGrid::from_rows(&panel.rows)?;
    // Predictions are placed by cell so that skipped points, if any, stay
    // unlabeled instead of shifting every later cell.
    let mut predictions = vec![floqlind::diagram::UNLABELED; grid.truth.len()];
    for row in &panel.rows {
        let at = grid.cell_index(row.e, row.omega).expect("rows defined this lattice");
        predictions[at] = predict_label(&model, &row.features.values)?;
    }
    grid = grid.with_prediction(predictions)?;

    let disagreement = grid.disagreement().expect("prediction panel attached");
    let mismatches = disagreement.iter().filter(|&&d| d == 1).count();
    println!(
        "{} x {} cells, yes fraction {:.3}, classifier misses {} cell(s)",
        grid.e_values.len(),
        grid.omega_values.len(),
        grid.yes_fraction(),
        mismatches
    );

    let csv = std::env::temp_dir().join("floqlind_example_partition.csv");
    let svg = std::env::temp_dir().join("floqlind_example_partition.svg");
    grid.to_csv(&csv)?;
    grid.to_svg(&svg)?;
    println!("wrote {}", csv.display());
    println!("wrote {} (open in a browser)", svg.display());
    Ok(())
}
