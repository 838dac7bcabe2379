//! Search the classifier roster for the best validation accuracy, then
//! serialize the winner and load it back for scoring.
//!
//!     cargo run --release --example model_selection

use floqlind::dataset::{design_matrix, split, sweep, GridSpec};
use floqlind::features::Scheme;
use floqlind::lindblad::Problem;
use floqlind::ml::{default_grid, evaluate, grid_search, load_model, save_model};

fn main() -> floqlind::Result<()> {
    let grid = GridSpec {
        e_min: 0.0,
        e_max: 3.0,
        e_step: 0.25,
        omega_min: 0.35,
        omega_max: 2.55,
        omega_step: 0.2,
        phases: vec![0.0],
        problems: vec![Problem::I],
    };
    grid.validate()?;
    let scheme = Scheme::EigensystemNormalized;
    let rows: Vec<_> = sweep(&grid, scheme)?.usable().into_iter().cloned().collect();
    let (train_rows, val_rows) = split(&rows, 0.8, 3)?;
    let (x_train, y_train) = design_matrix(&train_rows.iter().collect::<Vec<_>>());
    let (x_val, y_val) = design_matrix(&val_rows.iter().collect::<Vec<_>>());

    // Ties on validation accuracy go to the smaller model, so the search
    // is deterministic and the winner is never needlessly complex.
    let outcome = grid_search(&default_grid(), &x_train, &y_train, &x_val, &y_val, 7)?;
    let mut by_accuracy = outcome.ranking.clone();
    by_accuracy.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top candidates by validation accuracy:");
    for (spec, accuracy) in by_accuracy.iter().take(5) {
        println!("  {accuracy:.4}  {spec}");
    }

    let path = std::env::temp_dir().join("floqlind_example_model.json");
    save_model(&path, scheme, &outcome.best)?;
    let (restored, restored_scheme) = load_model(&path)?;
    assert_eq!(restored_scheme, scheme);

    let metrics = evaluate(&restored, &x_val, &y_val)?;
    println!("\nreloaded {} from {}", outcome.best.spec, path.display());
    println!(
        "validation accuracy {:.4}, f1 {:.4}, confusion {:?}",
        metrics.accuracy, metrics.f1, metrics.confusion
    );
    Ok(())
}
