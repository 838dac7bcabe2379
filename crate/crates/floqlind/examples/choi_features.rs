//! Turn one-period maps into fixed-width feature vectors through their Choi
//! matrices: every encoding the dataset pipeline knows, side by side.
//!
//!     cargo run --release --example choi_features

use floqlind::features::{choi_eigensystem, feature_vector, Scheme};
use floqlind::floquet::floquet_map;
use floqlind::lindblad::ModelSpec;

fn main() -> floqlind::Result<()> {
    let model = ModelSpec::problem_ii(1.2, 0.9, 0.5);
    let map = floquet_map(&model)?;

    // The Choi matrix of a CPTP qubit map is PSD with trace 2, so its four
    // eigenvalues already form a tiny descriptor.
    let es = choi_eigensystem(&map)?;
    println!("Choi eigenvalues (descending, sum = 2):");
    for v in &es.eigenvalues {
        println!("  {v:.12}");
    }
    println!("  degenerate: {}", es.degenerate());
    println!();

    // Wider encodings add eigenvalue roots, raw matrix elements, or the
    // eigenvectors compressed to spherical angles; the normalized variant
    // additionally remaps everything into [-1, 1].
    for scheme in Scheme::ALL {
        let (fv, degenerate) = feature_vector(&map, scheme)?;
        let joined =
            fv.values.iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>().join(", ");
        println!("{scheme} (width {}{}):", fv.values.len(), if degenerate { ", degenerate" } else { "" });
        println!("  [{joined}]");
    }
    Ok(())
}
