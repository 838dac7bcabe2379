//! Feature encodings of a map's Choi matrix for classifier pipelines.
//!
//! Five schemes, from coarsest to richest: the Choi eigenvalues alone, the
//! eigenvalues with their 1/2 and 1/4 powers, the raw matrix elements packed
//! into a real square, and the full eigensystem rendered as eigenvalues plus
//! per-eigenvector spherical angles (optionally rebalanced).
//!
//! Eigenvectors are defined only up to a global phase, so a canonical
//! representative is chosen first: rotate so the last significant component
//! is real, then flip the sign so the first significant real slot is
//! positive. Everything downstream is a deterministic function of the map.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::FloquetMap;
use crate::linalg::{eig_hermitian, C64};

/// Adjacent sorted Choi eigenvalues closer than this make the eigenvector
/// ordering unreliable; rows computed from such spectra carry a flag.
pub const DEGENERACY_GAP: f64 = 1e-8;

/// Components below this magnitude are treated as zero by the phase fix.
const COMPONENT_TOL: f64 = 1e-10;

/// The five feature encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Eigvals,
    EigvalsRoots,
    Elements,
    Eigensystem,
    EigensystemNormalized,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Eigvals,
        Scheme::EigvalsRoots,
        Scheme::Elements,
        Scheme::Eigensystem,
        Scheme::EigensystemNormalized,
    ];

    /// Feature count for Hilbert dimension `dim`.
    pub fn width(&self, dim: usize) -> usize {
        let n2 = dim * dim;
        match self {
            Scheme::Eigvals => n2,
            Scheme::EigvalsRoots => 3 * n2,
            Scheme::Elements => n2 * n2,
            Scheme::Eigensystem | Scheme::EigensystemNormalized => n2 + n2 * (n2 - 1),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scheme::Eigvals => "eigvals",
            Scheme::EigvalsRoots => "eigvals_roots",
            Scheme::Elements => "elements",
            Scheme::Eigensystem => "eigensystem",
            Scheme::EigensystemNormalized => "eigensystem_normalized",
        };
        f.write_str(name)
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigvals" => Ok(Scheme::Eigvals),
            "eigvals_roots" => Ok(Scheme::EigvalsRoots),
            "elements" => Ok(Scheme::Elements),
            "eigensystem" => Ok(Scheme::Eigensystem),
            "eigensystem_normalized" => Ok(Scheme::EigensystemNormalized),
            other => Err(Error::InvalidParameter(format!("unknown feature scheme {other:?}"))),
        }
    }
}

/// Hermitian eigendecomposition of a Choi matrix, eigenvalues descending
/// with eigenvector columns aligned.
#[derive(Debug, Clone)]
pub struct ChoiEigensystem {
    pub eigenvalues: Vec<f64>,
    pub vectors: Array2<C64>,
    pub dim: usize,
}

impl ChoiEigensystem {
    /// True when two adjacent sorted eigenvalues are closer than
    /// [`DEGENERACY_GAP`], making the eigenvector split arbitrary.
    pub fn degenerate(&self) -> bool {
        self.eigenvalues.windows(2).any(|w| (w[0] - w[1]).abs() < DEGENERACY_GAP)
    }
}

/// Diagonalizes the Choi matrix of a map. The map must be CPTP: eigenvalues
/// below −1e-9 or a trace away from the Hilbert dimension are rejected.
pub fn choi_eigensystem(map: &FloquetMap) -> Result<ChoiEigensystem> {
    let choi = map.choi()?;
    let (ascending, vectors) = eig_hermitian(&choi);
    let n2 = ascending.len();
    let eigenvalues: Vec<f64> = ascending.iter().rev().cloned().collect();
    let mut columns = Array2::<C64>::zeros((n2, n2));
    for k in 0..n2 {
        for i in 0..n2 {
            columns[[i, k]] = vectors[[i, n2 - 1 - k]];
        }
    }
    if eigenvalues[n2 - 1] < -1e-9 {
        return Err(Error::InvalidParameter(format!(
            "map is not completely positive: Choi eigenvalue {:.3e}",
            eigenvalues[n2 - 1]
        )));
    }
    let total: f64 = eigenvalues.iter().sum();
    if (total - map.dim as f64).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "map is not trace preserving: Choi trace {total}"
        )));
    }
    Ok(ChoiEigensystem { eigenvalues, vectors: columns, dim: map.dim })
}

/// One encoded row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub scheme: Scheme,
    pub values: Vec<f64>,
}

/// The sorted Choi eigenvalues themselves.
pub fn features_eigvals(es: &ChoiEigensystem) -> FeatureVector {
    FeatureVector { scheme: Scheme::Eigvals, values: es.eigenvalues.clone() }
}

/// Eigenvalues concatenated with their 1/2 and 1/4 powers, clamped at zero
/// first so roundoff below the CP boundary cannot produce NaN.
pub fn features_eigvals_roots(es: &ChoiEigensystem) -> FeatureVector {
    let clamped: Vec<f64> = es.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let mut values = clamped.clone();
    values.extend(clamped.iter().map(|l| l.sqrt()));
    values.extend(clamped.iter().map(|l| l.powf(0.25)));
    FeatureVector { scheme: Scheme::EigvalsRoots, values }
}

/// Choi entries packed into one real matrix and flattened column-wise.
pub fn features_elements(map: &FloquetMap) -> Result<FeatureVector> {
    Ok(FeatureVector { scheme: Scheme::Elements, values: elements_encoding(&map.choi()?) })
}

/// Real packing of a Hermitian matrix: upper triangle including the
/// diagonal holds real parts, the strict lower triangle holds imaginary
/// parts of the mirrored entries, flattened column-major.
pub fn elements_encoding(choi: &Array2<C64>) -> Vec<f64> {
    let n = choi.nrows();
    let mut values = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            values.push(if i <= j { choi[[i, j]].re } else { choi[[i, j]].im });
        }
    }
    values
}

/// Inverse of [`elements_encoding`]: Hermiticity supplies the halves the
/// packing dropped.
pub fn elements_decoding(values: &[f64]) -> Result<Array2<C64>> {
    let n = (values.len() as f64).sqrt().round() as usize;
    if n * n != values.len() {
        return Err(Error::FeatureWidth { got: values.len(), expected: n * n });
    }
    let mut choi = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            let v = values[j * n + i];
            if i == j {
                choi[[i, j]] = C64::new(v, 0.0);
            } else if i < j {
                choi[[i, j]] += C64::new(v, 0.0);
                choi[[j, i]] += C64::new(v, 0.0);
            } else {
                choi[[j, i]] += C64::new(0.0, -v);
                choi[[i, j]] += C64::new(0.0, v);
            }
        }
    }
    Ok(choi)
}

/// Canonical global phase: rotate so the last component above
/// 1e-10 in magnitude is real, then flip the overall sign if the first
/// significant real slot is negative.
pub fn phase_fix(v: &mut [C64]) {
    let last = v.iter().rposition(|z| z.norm() > COMPONENT_TOL);
    let Some(last) = last else { return };
    let phase = v[last] / C64::new(v[last].norm(), 0.0);
    let rotation = phase.conj();
    for z in v.iter_mut() {
        *z *= rotation;
    }
    if let Some(first) = v.iter().position(|z| z.re.abs() > COMPONENT_TOL) {
        if v[first].re < 0.0 {
            for z in v.iter_mut() {
                *z = -*z;
            }
        }
    }
}

/// Spherical angles of a unit vector: φ_k = atan2(‖tail‖, v_k) ∈ [0, π] for
/// all but the last angle, which is atan2(v_L, v_{L−1}) wrapped into
/// [0, 2π). Degenerate 0/0 arguments resolve to 0.
pub fn to_spherical(v: &[f64]) -> Result<Vec<f64>> {
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized(norm));
    }
    let l = v.len();
    let mut angles = Vec::with_capacity(l - 1);
    let mut tail_sq: f64 = v.iter().skip(1).map(|x| x * x).sum();
    for k in 0..l.saturating_sub(2) {
        angles.push(f64::atan2(tail_sq.max(0.0).sqrt(), v[k]));
        tail_sq -= v[k + 1] * v[k + 1];
    }
    if l >= 2 {
        let mut last = f64::atan2(v[l - 1], v[l - 2]);
        if last < 0.0 {
            last += 2.0 * std::f64::consts::PI;
        }
        angles.push(last);
    }
    Ok(angles)
}

/// Unit vector with the given spherical angles.
pub fn from_spherical(angles: &[f64]) -> Vec<f64> {
    let l = angles.len() + 1;
    let mut v = Vec::with_capacity(l);
    let mut sines = 1.0;
    for &phi in angles {
        v.push(sines * phi.cos());
        sines *= phi.sin();
    }
    v.push(sines);
    v
}

/// Rebalancing map for qubit Choi spectra: λ' = 0.5(λ − 0.5)·M with the
/// fixed 4×4 sign matrix. The fourth output vanishes whenever Σλ = 2, so
/// trace preservation costs one component instead of skewing all four.
pub fn eigenvalue_remap(lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != 4 {
        return Err(Error::FeatureWidth { got: lambda.len(), expected: 4 });
    }
    const M: [[f64; 4]; 4] = [
        [1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, -1.0, 1.0],
        [-1.0, 1.0, -1.0, 1.0],
        [-1.0, -1.0, 1.0, 1.0],
    ];
    let centered: Vec<f64> = lambda.iter().map(|&l| 0.5 * (l - 0.5)).collect();
    Ok((0..4).map(|j| (0..4).map(|i| centered[i] * M[i][j]).sum()).collect())
}

/// Eigenvalues followed by per-eigenvector spherical angles.
///
/// Each eigenvector unfolds to interleaved real slots (Re x₁, Im x₁, …);
/// after the phase fix the final slot vanishes, so the last angle is
/// dropped and the rest divide by π into [0, 1]. With `purge`, angles at
/// imaginary slots are removed; with `normalize`, the eigenvalue block
/// passes through [`eigenvalue_remap`] and angles shrink by 4 to rebalance
/// the two blocks.
pub fn features_eigensystem(
    es: &ChoiEigensystem,
    purge: bool,
    normalize: bool,
) -> Result<FeatureVector> {
    let n2 = es.eigenvalues.len();
    let mut values = if normalize {
        eigenvalue_remap(&es.eigenvalues)?
    } else {
        es.eigenvalues.clone()
    };
    let scale = if normalize { 0.25 } else { 1.0 };
    for k in 0..n2 {
        let mut column: Vec<C64> = (0..n2).map(|i| es.vectors[[i, k]]).collect();
        phase_fix(&mut column);
        let mut unfolded = Vec::with_capacity(2 * n2);
        for z in &column {
            unfolded.push(z.re);
            unfolded.push(z.im);
        }
        let mut angles = to_spherical(&unfolded)?;
        angles.pop();
        for (slot, angle) in angles.iter().enumerate() {
            // Slot parity marks Re (even) vs Im (odd) coordinates.
            if purge && slot % 2 == 1 {
                continue;
            }
            values.push(angle / std::f64::consts::PI * scale);
        }
    }
    let scheme = if normalize { Scheme::EigensystemNormalized } else { Scheme::Eigensystem };
    Ok(FeatureVector { scheme, values })
}

/// Encodes a map under `scheme`, reporting alongside whether a degenerate
/// Choi spectrum made eigenvector-based features unreliable.
pub fn feature_vector(map: &FloquetMap, scheme: Scheme) -> Result<(FeatureVector, bool)> {
    let es = choi_eigensystem(map)?;
    let fv = match scheme {
        Scheme::Eigvals => features_eigvals(&es),
        Scheme::EigvalsRoots => features_eigvals_roots(&es),
        Scheme::Elements => features_elements(map)?,
        Scheme::Eigensystem => features_eigensystem(&es, true, false)?,
        Scheme::EigensystemNormalized => features_eigensystem(&es, true, true)?,
    };
    let expected = scheme.width(map.dim);
    if fv.values.len() != expected {
        return Err(Error::FeatureWidth { got: fv.values.len(), expected });
    }
    if let Some(bad) = fv.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteFeature { row: 0, col: bad });
    }
    let degenerate = matches!(scheme, Scheme::Eigensystem | Scheme::EigensystemNormalized)
        && es.degenerate();
    Ok((fv, degenerate))
}
