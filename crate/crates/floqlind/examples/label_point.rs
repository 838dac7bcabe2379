//! Decide whether one driven point relaxes under a time-independent
//! generator: propagate a period, search the logarithm branches, and print
//! the verdict with its witness.
//!
//!     cargo run --release --example label_point

use floqlind::floquet::floquet_map;
use floqlind::lindblad::ModelSpec;
use floqlind::markov::{decide_markovianity, real_feasible_interval};

fn main() -> floqlind::Result<()> {
    // Two points of the same driving model, one on each side of the border.
    for (e, omega) in [(1.8, 0.45), (0.6, 2.45)] {
        let model = ModelSpec::problem_i(e, omega, 0.0);
        let map = floquet_map(&model)?;
        let report = decide_markovianity(&map)?;

        println!("E = {e}, omega = {omega}");
        println!("  integrator steps      {}", map.integrator_steps);
        println!("  step-doubling defect  {:.2e}", map.step_doubling_defect);
        println!("  branches searched     {}", report.branches_searched);
        match &report.witness_x {
            Some(x) => println!("  answer                yes, witness branch x = {x:?}"),
            None => println!("  answer                no"),
        }
        println!("  best branch min eig   {:+.3e}", report.best_min_eig);
        println!("  distance mu_min       {:.3e}", report.mu_min);

        // For a single qubit the branch index is one integer, and the set of
        // real branch parameters with a positive restricted spectrum is an
        // interval; a yes answer means it contains an integer.
        if let Some((lo, hi)) = real_feasible_interval(&map)? {
            println!("  feasible interval     [{lo:+.4}, {hi:+.4}]");
        } else {
            println!("  feasible interval     empty");
        }
        println!();
    }
    Ok(())
}
