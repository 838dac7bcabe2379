//! Propagate one period of a driven model and inspect the spectrum of the
//! resulting map: eigenvalues, CPTP defects, and the principal logarithm
//! around which all candidate generators are built.
//!
//!     cargo run --release --example floquet_spectrum

use floqlind::choi::ccp_min_eigenvalue;
use floqlind::floquet::floquet_map;
use floqlind::lindblad::ModelSpec;
use floqlind::spectral::{branch, eigendecompose, principal_log};

fn main() -> floqlind::Result<()> {
    let model = ModelSpec::problem_i(1.0, 1.5, 0.0);
    let map = floquet_map(&model)?;

    let cptp = map.cptp_report()?;
    println!("one-period map at E = 1, omega = 1.5");
    println!("  trace defect         {:.2e}", cptp.trace_defect);
    println!("  Choi trace defect    {:.2e}", cptp.choi_trace_defect);
    println!("  hermiticity defect   {:.2e}", cptp.hermiticity_defect);
    println!("  min Choi eigenvalue  {:+.2e}", cptp.min_choi_eigenvalue);
    println!();

    // A trace-preserving map always has the eigenvalue 1; the rest sit
    // inside the unit disk, complex ones in conjugate pairs.
    let decomp = eigendecompose(&map.sup)?;
    println!("spectrum (|z| <= 1, condition number {:.2e}):", decomp.condition_number);
    for z in &decomp.eigenvalues {
        println!("  {:+.6} {:+.6}i   |z| = {:.6}", z.re, z.im, z.norm());
    }
    println!(
        "  {} real, {} conjugate pair(s)",
        decomp.real_indices.len(),
        decomp.pair_indices.len()
    );
    println!();

    // The principal logarithm is one candidate generator; shifting any
    // conjugate pair by 2*pi*i/T walks the other branches. Conditional
    // complete positivity of a branch is the minimum eigenvalue of its
    // reshuffled form restricted away from the maximally entangled state.
    let log = principal_log(&decomp, map.period)?;
    println!("branch x -> restricted min eigenvalue of K_x:");
    for x in -2..=2 {
        let k = branch(&log.k0, &decomp, map.model.omega, &[x])?;
        println!("  x = {x:+}   {:+.6e}", ccp_min_eigenvalue(&k)?);
    }
    Ok(())
}
