//! One-period propagators of the driven models.
//!
//! The generator splits as L(t) = G₀ + E cos(ωt+φ)·G_x with a constant
//! dissipative part and a pure drive coupling, so the integrator rebuilds
//! only a linear combination at each stage. Step counts climb a doubling
//! ladder until two consecutive resolutions agree entrywise.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::choi::reshuffle;
use crate::error::{Error, Result};
use crate::lindblad::{
    hamiltonian_at, lindbladian_superop, pauli_x, sigma_minus, trace_preservation_defect,
    ModelSpec, Problem,
};
use crate::linalg::{expm, hermiticity_defect, min_eig_flat, C64, C_ONE, C_ZERO};

/// Entrywise agreement required between consecutive ladder rungs.
pub const STEP_DOUBLING_TOL: f64 = 1e-8;

/// Step-count ceiling of the doubling ladder.
pub const MAX_STEPS: usize = 1 << 20;

/// Base step count per drive period of unit length 2π.
pub const BASE_STEPS: usize = 4096;

/// One-period propagator P(T) in vectorized form, together with the
/// integration record that produced it.
#[derive(Debug, Clone)]
pub struct FloquetMap {
    pub sup: Array2<C64>,
    pub dim: usize,
    pub period: f64,
    pub model: ModelSpec,
    /// Steps per period of the accepted resolution; zero for maps built
    /// from a constant generator by matrix exponential.
    pub integrator_steps: usize,
    /// Entrywise distance between the accepted resolution and its doubled
    /// check, zero for matrix-exponential maps.
    pub step_doubling_defect: f64,
}

impl FloquetMap {
    /// Choi matrix of the map.
    pub fn choi(&self) -> Result<Array2<C64>> {
        reshuffle(&self.sup)
    }

    /// Complete-positivity and trace-preservation defects.
    pub fn cptp_report(&self) -> Result<CptpReport> {
        let choi = self.choi()?;
        let n2 = choi.nrows();
        let mut flat: Vec<C64> = choi.iter().cloned().collect();
        let trace: C64 = (0..n2).map(|i| choi[[i, i]]).sum();
        Ok(CptpReport {
            trace_defect: trace_preservation_defect(&self.sup),
            min_choi_eigenvalue: min_eig_flat(n2, &mut flat),
            choi_trace_defect: (trace - C64::new(self.dim as f64, 0.0)).norm(),
            hermiticity_defect: hermiticity_defect(&choi),
        })
    }
}

/// How far a map sits from the CPTP cone: all four defects vanish for an
/// exact quantum channel, and the Choi minimum eigenvalue is nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct CptpReport {
    pub trace_defect: f64,
    pub min_choi_eigenvalue: f64,
    pub choi_trace_defect: f64,
    pub hermiticity_defect: f64,
}

/// Static and drive parts of the vectorized generator,
/// L(t) = parts.0 + E cos(ωt+φ)·parts.1.
pub fn generator_parts(model: &ModelSpec) -> Result<(Array2<C64>, Array2<C64>)> {
    model.validate()?;
    let undriven = ModelSpec { amplitude: 0.0, ..*model };
    let h_static = hamiltonian_at(&undriven, 0.0)?;
    let g0 = lindbladian_superop(&h_static, &[sigma_minus()], &[model.gamma])?;
    let gx = lindbladian_superop(&pauli_x(), &[], &[])?;
    Ok((g0, gx))
}

/// Step count [`floquet_map`] starts from: [`BASE_STEPS`] per 2π of period,
/// so slow drives keep the same time resolution as fast ones.
pub fn recommended_steps(model: &ModelSpec) -> usize {
    let stretches = (model.period() / (2.0 * PI)).ceil().max(1.0) as usize;
    BASE_STEPS * stretches
}

/// Integrates dU/dt = L(t)U over one period starting from
/// [`recommended_steps`].
pub fn floquet_map(model: &ModelSpec) -> Result<FloquetMap> {
    floquet_map_with_steps(model, recommended_steps(model))
}

/// Integrates one period starting from `initial_steps` per period, doubling
/// until two consecutive resolutions agree to [`STEP_DOUBLING_TOL`]. The
/// coarser of the agreeing pair is returned. Fails with
/// [`Error::IntegrationAccuracy`] if agreement needs more than
/// [`MAX_STEPS`] steps.
pub fn floquet_map_with_steps(model: &ModelSpec, initial_steps: usize) -> Result<FloquetMap> {
    model.validate()?;
    if model.problem == Problem::Custom {
        return Err(Error::UnsupportedModel(
            "custom models carry their own generator; use from_constant_generator".into(),
        ));
    }
    if initial_steps == 0 {
        return Err(Error::InvalidParameter("initial_steps must be positive".into()));
    }
    let (g0, gx) = generator_parts(model)?;
    let n2 = model.dim * model.dim;
    let g0_flat: Vec<C64> = g0.iter().cloned().collect();
    let gx_flat: Vec<C64> = gx.iter().cloned().collect();
    let period = model.period();

    let mut steps = initial_steps;
    let mut coarse = propagate(&g0_flat, &gx_flat, n2, model, period, steps);
    loop {
        let fine = propagate(&g0_flat, &gx_flat, n2, model, period, 2 * steps);
        let defect = ladder_defect(&coarse, &fine);
        if defect < STEP_DOUBLING_TOL {
            let sup = Array2::from_shape_vec((n2, n2), coarse)
                .expect("propagator buffer has n2*n2 entries");
            return Ok(FloquetMap {
                sup,
                dim: model.dim,
                period,
                model: *model,
                integrator_steps: steps,
                step_doubling_defect: defect,
            });
        }
        if 2 * steps >= MAX_STEPS {
            return Err(Error::IntegrationAccuracy { steps: 2 * steps, defect });
        }
        steps *= 2;
        coarse = fine;
    }
}

/// Wraps exp(T·gen) of a constant generator as a [`FloquetMap`] with a
/// `Custom` model carrying ω = 2π/T.
pub fn from_constant_generator(gen: &Array2<C64>, period: f64) -> Result<FloquetMap> {
    let n2 = gen.nrows();
    if gen.ncols() != n2 {
        return Err(Error::DimensionMismatch(format!(
            "generator must be square, got {}x{}",
            gen.nrows(),
            gen.ncols()
        )));
    }
    let dim = (n2 as f64).sqrt().round() as usize;
    if dim * dim != n2 || dim < 2 {
        return Err(Error::DimensionMismatch(format!(
            "generator side must be a perfect square of dim >= 2, got {n2}"
        )));
    }
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    let sup = expm(&gen.mapv(|z| z * C64::new(period, 0.0)));
    let model = ModelSpec {
        problem: Problem::Custom,
        delta: 0.0,
        gamma: 0.0,
        amplitude: 0.0,
        omega: 2.0 * PI / period,
        phase: 0.0,
        dim,
    };
    Ok(FloquetMap {
        sup,
        dim,
        period,
        model,
        integrator_steps: 0,
        step_doubling_defect: 0.0,
    })
}

/// Classic fourth-order Runge–Kutta on flat row-major buffers. The stage
/// generator is rebuilt in place, so the per-step loop does not allocate.
fn propagate(
    g0: &[C64],
    gx: &[C64],
    n: usize,
    model: &ModelSpec,
    period: f64,
    steps: usize,
) -> Vec<C64> {
    let len = n * n;
    let mut u = vec![C_ZERO; len];
    for i in 0..n {
        u[i * n + i] = C_ONE;
    }
    let mut gen = vec![C_ZERO; len];
    let mut k1 = vec![C_ZERO; len];
    let mut k2 = vec![C_ZERO; len];
    let mut k3 = vec![C_ZERO; len];
    let mut k4 = vec![C_ZERO; len];
    let mut stage = vec![C_ZERO; len];
    let h = period / steps as f64;
    let drive = |t: f64| model.amplitude * (model.omega * t + model.phase).cos();
    for step in 0..steps {
        let t = step as f64 * h;
        build_generator(g0, gx, drive(t), &mut gen);
        matmul_flat(&gen, &u, &mut k1, n);
        build_generator(g0, gx, drive(t + 0.5 * h), &mut gen);
        add_scaled(&u, &k1, 0.5 * h, &mut stage);
        matmul_flat(&gen, &stage, &mut k2, n);
        add_scaled(&u, &k2, 0.5 * h, &mut stage);
        matmul_flat(&gen, &stage, &mut k3, n);
        build_generator(g0, gx, drive(t + h), &mut gen);
        add_scaled(&u, &k3, h, &mut stage);
        matmul_flat(&gen, &stage, &mut k4, n);
        let w = h / 6.0;
        for i in 0..len {
            u[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }
    }
    u
}

fn build_generator(g0: &[C64], gx: &[C64], c: f64, out: &mut [C64]) {
    for i in 0..out.len() {
        out[i] = g0[i] + gx[i] * c;
    }
}

fn matmul_flat(a: &[C64], b: &[C64], out: &mut [C64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            let mut acc = C_ZERO;
            for k in 0..n {
                acc += a[i * n + k] * b[k * n + j];
            }
            out[i * n + j] = acc;
        }
    }
}

fn add_scaled(u: &[C64], k: &[C64], coef: f64, out: &mut [C64]) {
    for i in 0..u.len() {
        out[i] = u[i] + k[i] * coef;
    }
}

/// Entrywise distance between two rungs; infinite if either diverged, so a
/// blown-up integration can never pass the gate through NaN comparisons.
fn ladder_defect(a: &[C64], b: &[C64]) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if !x.is_finite() || !y.is_finite() {
            return f64::INFINITY;
        }
        worst = worst.max((x - y).norm());
    }
    worst
}
