//! Reshuffling, the maximally entangled state, and the conditional
//! complete-positivity test.
//!
//! Composite indices are row-major, (i, j) ↦ i·N + j, so the reshuffle of a
//! superoperator K̂ is C[iN+j, kN+l] = K̂[iN+k, jN+l]. Under the crate's
//! column-stacking vectorization this makes the Choi matrix of a completely
//! positive map positive semidefinite with trace N.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linalg::{complement_basis, hermiticity_defect, min_eig_flat, restrict, C64};

/// Hermiticity-preservation tolerance checked by [`ccp_min_eigenvalue`].
pub const HERMITICITY_TOL: f64 = 1e-8;

/// Index permutation C[iN+j, kN+l] = M[iN+k, jN+l]. Applying it twice
/// returns the input bitwise.
pub fn reshuffle(m: &Array2<C64>) -> Result<Array2<C64>> {
    let n2 = m.nrows();
    if m.ncols() != n2 {
        return Err(Error::DimensionMismatch(format!(
            "reshuffle needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = (n2 as f64).sqrt().round() as usize;
    if n * n != n2 {
        return Err(Error::DimensionMismatch(format!(
            "reshuffle needs a perfect-square dimension, got {n2}"
        )));
    }
    let mut out = Array2::<C64>::zeros((n2, n2));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[[i * n + j, k * n + l]] = m[[i * n + k, j * n + l]];
                }
            }
        }
    }
    Ok(out)
}

/// The maximally entangled state |Φ⟩ = Σᵢ|ii⟩/√N, the projector Φ⊥ on its
/// orthogonal complement, and an orthonormal basis of range(Φ⊥) used to
/// deflate the structural zero eigenvalue out of projected Choi matrices.
#[derive(Debug, Clone)]
pub struct PhiProjectors {
    pub phi: Array1<C64>,
    pub phi_perp: Array2<C64>,
    pub complement: Array2<C64>,
}

/// Builds [`PhiProjectors`] for Hilbert dimension `dim`.
pub fn phi_projectors(dim: usize) -> Result<PhiProjectors> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim must be at least 2, got {dim}")));
    }
    let n2 = dim * dim;
    let mut phi = Array1::<C64>::zeros(n2);
    let amp = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
    for i in 0..dim {
        phi[i * dim + i] = amp;
    }
    let mut phi_perp = Array2::<C64>::eye(n2);
    for i in 0..n2 {
        for j in 0..n2 {
            phi_perp[[i, j]] -= phi[i] * phi[j].conj();
        }
    }
    let complement = complement_basis(&phi);
    Ok(PhiProjectors { phi, phi_perp, complement })
}

/// Minimum eigenvalue of Φ⊥·reshuffle(K)·Φ⊥ restricted to range(Φ⊥).
/// Nonnegative exactly when K is conditionally completely positive. The
/// restriction deflates the structural zero along |Φ⟩ so it cannot mask a
/// negative eigenvalue near the feasibility boundary.
pub fn ccp_min_eigenvalue(k: &Array2<C64>) -> Result<f64> {
    let choi = reshuffle(k)?;
    let defect = hermiticity_defect(&choi);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermiticityPreserving(defect));
    }
    let dim = (k.nrows() as f64).sqrt().round() as usize;
    let proj = phi_projectors(dim)?;
    let restricted = restrict(&choi, &proj.complement);
    let nd = restricted.nrows();
    let mut flat: Vec<C64> = restricted.iter().cloned().collect();
    Ok(min_eig_flat(nd, &mut flat))
}
