//! Sweep a coarse amplitude/frequency grid into a labeled dataset: one CSV
//! row per point with the verdict, the distance mu_min, and a feature
//! vector. Points the pipeline cannot label honestly become skip records.
//!
//!     cargo run --release --example dataset_generation

use floqlind::dataset::{sweep, write_csv, GridSpec};
use floqlind::features::Scheme;
use floqlind::lindblad::Problem;

fn main() -> floqlind::Result<()> {
    // A 6 x 8 slice of the benchmark plane at two phases. The full grid
    // simply widens the axes; see GridSpec::benchmark. The two phases share
    // one verdict per (E, omega) — maps at shifted drive offsets describe
    // the same periodic process — but contribute different Choi features.
    let grid = GridSpec {
        e_min: 0.0,
        e_max: 2.5,
        e_step: 0.5,
        omega_min: 0.45,
        omega_max: 2.55,
        omega_step: 0.3,
        phases: vec![0.0, std::f64::consts::FRAC_PI_4],
        problems: vec![Problem::I],
    };
    grid.validate()?;

    let scheme = Scheme::EigensystemNormalized;
    let result = sweep(&grid, scheme)?;

    let yes = result.rows.iter().filter(|r| r.label == 1).count();
    println!("labeled {} points: {} yes, {} no", result.rows.len(), yes, result.rows.len() - yes);
    for skip in &result.skips {
        println!("  skipped E = {}, omega = {}: {}", skip.e, skip.omega, skip.reason);
    }

    // Rows whose verdict is tolerance-limited stay out of training data.
    let usable = result.usable();
    println!("usable for training: {}", usable.len());

    let out = std::env::temp_dir().join("floqlind_example_dataset.csv");
    let owned: Vec<_> = usable.into_iter().cloned().collect();
    write_csv(&out, scheme, &owned)?;
    println!("wrote {}", out.display());

    // The first data line, as stored: driving point, label, mu_min, then
    // the sixteen feature columns.
    let text = std::fs::read_to_string(&out)?;
    let mut lines = text.lines();
    println!("\nheader: {}", lines.next().unwrap());
    println!("first row: {}", lines.next().unwrap());
    Ok(())
}
