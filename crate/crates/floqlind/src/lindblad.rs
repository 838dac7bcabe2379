//! Benchmark models and Lindbladian superoperators.
//!
//! Vectorization is column stacking throughout: vec(AXB) = (Bᵀ ⊗ A) vec(X),
//! with matrix entry (i, j) landing at component j·N + i. A generator then
//! takes the form
//!
//! L̂ = −i (I ⊗ H − Hᵀ ⊗ I) + Σᵢ γᵢ ( L̄ᵢ ⊗ Lᵢ − ½ I ⊗ Lᵢ†Lᵢ − ½ (Lᵢ†Lᵢ)ᵀ ⊗ I )
//!
//! which annihilates vec(I)† from the left (trace conservation) and whose
//! reshuffle is Hermitian (Hermiticity preservation).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::linalg::kron;
use ndarray::{array, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dagger, C64, C_I, C_ONE, C_ZERO};

/// Benchmark drive families. `I` is a driven qubit with a σ_z splitting,
/// `II` adds a σ_y term to the static part; `Custom` marks maps wrapped
/// around user-supplied constant generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Problem {
    I,
    II,
    Custom,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::I => write!(f, "I"),
            Problem::II => write!(f, "II"),
            Problem::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Problem::I),
            "II" | "ii" | "2" => Ok(Problem::II),
            "custom" => Ok(Problem::Custom),
            other => Err(Error::UnsupportedModel(format!("unknown problem {other:?}"))),
        }
    }
}

/// Parameters of a periodically driven qubit model: static splitting
/// `delta`, decay rate `gamma`, drive amplitude/frequency/phase, and the
/// Hilbert dimension (2 for the benchmark problems).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub problem: Problem,
    pub delta: f64,
    pub gamma: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub dim: usize,
}

impl ModelSpec {
    /// Problem I at the benchmark parameters Δ = 1, γ = 0.01.
    pub fn problem_i(amplitude: f64, omega: f64, phase: f64) -> Self {
        ModelSpec { problem: Problem::I, delta: 1.0, gamma: 0.01, amplitude, omega, phase, dim: 2 }
    }

    /// Problem II at the benchmark parameters Δ = 1, γ = 0.01.
    pub fn problem_ii(amplitude: f64, omega: f64, phase: f64) -> Self {
        ModelSpec { problem: Problem::II, delta: 1.0, gamma: 0.01, amplitude, omega, phase, dim: 2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) {
            return Err(Error::NegativeRate(self.gamma));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be nonnegative, got {}",
                self.amplitude
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!("dim must be at least 2, got {}", self.dim)));
        }
        if !self.delta.is_finite() || !self.phase.is_finite() {
            return Err(Error::InvalidParameter("delta and phase must be finite".into()));
        }
        Ok(())
    }

    /// Drive period T = 2π/ω.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

pub fn pauli_x() -> Array2<C64> {
    array![[C_ZERO, C_ONE], [C_ONE, C_ZERO]]
}

pub fn pauli_y() -> Array2<C64> {
    array![[C_ZERO, -C_I], [C_I, C_ZERO]]
}

/// σ_z with σ_z|0⟩ = +|0⟩ in the computational basis.
pub fn pauli_z() -> Array2<C64> {
    array![[C_ONE, C_ZERO], [C_ZERO, -C_ONE]]
}

/// Lowering operator σ₋ = (σ_x − iσ_y)/2, mapping |0⟩ to |1⟩.
pub fn sigma_minus() -> Array2<C64> {
    array![[C_ZERO, C_ZERO], [C_ONE, C_ZERO]]
}

/// Hamiltonian of the benchmark models at time `t`:
/// (Δ/2)σ_z + E cos(ωt+φ)σ_x for Problem I, with σ_z replaced by
/// σ_z + σ_y for Problem II.
pub fn hamiltonian_at(model: &ModelSpec, t: f64) -> Result<Array2<C64>> {
    let static_part = match model.problem {
        Problem::I => pauli_z(),
        Problem::II => pauli_z() + pauli_y(),
        Problem::Custom => {
            return Err(Error::UnsupportedModel(
                "custom models carry their own generator; no drive Hamiltonian is defined".into(),
            ))
        }
    };
    let drive = model.amplitude * (model.omega * t + model.phase).cos();
    Ok(static_part.mapv(|z| z * C64::new(model.delta / 2.0, 0.0))
        + pauli_x().mapv(|z| z * C64::new(drive, 0.0)))
}

/// Vectorized Lindbladian for Hamiltonian `h`, jump operators `jumps`, and
/// nonnegative rates. The result annihilates vec(I)† from the left and its
/// reshuffle is Hermitian.
pub fn lindbladian_superop(h: &Array2<C64>, jumps: &[Array2<C64>], rates: &[f64]) -> Result<Array2<C64>> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian must be square, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    if jumps.len() != rates.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} jump operators but {} rates",
            jumps.len(),
            rates.len()
        )));
    }
    for &g in rates {
        if !(g >= 0.0) {
            return Err(Error::NegativeRate(g));
        }
    }
    let eye = Array2::<C64>::eye(n);
    let mut sup = (kron(&eye, h) - kron(&h.t().to_owned(), &eye)).mapv(|z| z * (-C_I));
    for (l, &g) in jumps.iter().zip(rates) {
        if l.nrows() != n || l.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "jump operator is {}x{}, expected {}x{}",
                l.nrows(),
                l.ncols(),
                n,
                n
            )));
        }
        let ldl = dagger(l).dot(l);
        let sandwich = kron(&l.mapv(|z| z.conj()), l);
        let anti = kron(&eye, &ldl) + kron(&ldl.t().to_owned(), &eye);
        sup = sup + (sandwich - anti.mapv(|z| z * C64::new(0.5, 0.0))).mapv(|z| z * C64::new(g, 0.0));
    }
    Ok(sup)
}

/// Generator of the depolarizing channel, N(ρ) = tr(ρ)·I/dim − ρ, as the
/// rank-one update vec(I)vec(I)†/dim − I over vectorized operators.
pub fn depolarizing_generator(dim: usize) -> Result<Array2<C64>> {
    if dim < 2 {
        return Err(Error::InvalidParameter(format!("dim must be at least 2, got {dim}")));
    }
    let vec_i = vec_identity(dim);
    let n2 = dim * dim;
    let mut gen = Array2::<C64>::zeros((n2, n2));
    for i in 0..n2 {
        for j in 0..n2 {
            gen[[i, j]] = vec_i[i] * vec_i[j].conj() / C64::new(dim as f64, 0.0);
        }
        gen[[i, i]] -= C_ONE;
    }
    Ok(gen)
}

/// vec(I) under column stacking: ones at components i·(dim+1).
pub fn vec_identity(dim: usize) -> Array1<C64> {
    let mut v = Array1::<C64>::zeros(dim * dim);
    for i in 0..dim {
        v[i * (dim + 1)] = C_ONE;
    }
    v
}

/// Largest component of vec(I)†·gen, zero for a trace-conserving generator.
pub fn trace_annihilation_defect(gen: &Array2<C64>) -> f64 {
    let dim = (gen.nrows() as f64).sqrt().round() as usize;
    let vec_i = vec_identity(dim);
    row_action_defect(gen, &vec_i, &Array1::zeros(gen.nrows()))
}

/// Largest component of vec(I)†·map − vec(I)†, zero for a trace-preserving map.
pub fn trace_preservation_defect(map: &Array2<C64>) -> f64 {
    let dim = (map.nrows() as f64).sqrt().round() as usize;
    let vec_i = vec_identity(dim);
    row_action_defect(map, &vec_i, &vec_i)
}

fn row_action_defect(m: &Array2<C64>, row: &Array1<C64>, expected: &Array1<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        let got: C64 = (0..m.nrows()).map(|i| row[i].conj() * m[[i, j]]).sum();
        worst = worst.max((got - expected[j]).norm());
    }
    worst
}

/// Applies the Lindblad map ρ ↦ −i\[H,ρ\] + Σ γ (LρL† − ½{L†L,ρ}) directly in
/// matrix form. Serves as the basis-action oracle for the vectorized build.
pub fn apply_lindblad(h: &Array2<C64>, jumps: &[Array2<C64>], rates: &[f64], rho: &Array2<C64>) -> Array2<C64> {
    let commutator = h.dot(rho) - rho.dot(h);
    let mut out = commutator.mapv(|z| z * (-C_I));
    for (l, &g) in jumps.iter().zip(rates) {
        let ldl = dagger(l).dot(l);
        let gain = l.dot(rho).dot(&dagger(l));
        let loss = (ldl.dot(rho) + rho.dot(&ldl)).mapv(|z| z * C64::new(0.5, 0.0));
        out = out + (gain - loss).mapv(|z| z * C64::new(g, 0.0));
    }
    out
}

/// Column-stacking vec.
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    let n = rho.nrows();
    let mut v = Array1::<C64>::zeros(n * n);
    for j in 0..n {
        for i in 0..n {
            v[j * n + i] = rho[[i, j]];
        }
    }
    v
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &Array1<C64>) -> Array2<C64> {
    let n = (v.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, v.len(), "length is not a perfect square");
    Array2::from_shape_fn((n, n), |(i, j)| v[j * n + i])
}
