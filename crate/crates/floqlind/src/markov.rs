//! Decides whether a one-period map is the exponential of some
//! time-independent Lindbladian, and how much depolarizing noise would make
//! it one.
//!
//! The decision reduces to integer feasibility: the map is Markovian exactly
//! when some branch K_x is conditionally completely positive. The objective
//! m(x) = λ_min(V₀ + Σ x_c V_c) is concave in x, so for a single conjugate
//! pair the feasible set over real x is an interval and the integer search
//! needs only its neighborhood; for several pairs a bounded box is swept.
//! The distance μ is the least depolarizing admixture K_x + μ·N̂ that enters
//! the feasible cone, minimized over the same candidate branches.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::FloquetMap;
use crate::lindblad::depolarizing_generator;
use crate::linalg::{min_eig_flat, C64};
use crate::spectral::{eigendecompose, principal_log, v_matrices, VMatrices};

/// Tolerances and search bounds of the decision procedure. The defaults are
/// the ones every published number in this crate is quoted at.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecisionOptions {
    /// Eigenvalue floor treated as positive semidefinite.
    pub psd_tol: f64,
    /// Distances at or below this are flagged as boundary cases.
    pub mu_tol: f64,
    /// Half-width of the winding-number window for one conjugate pair.
    pub scan_halfwidth: f64,
    /// Grid spacing of the coarse concave scan.
    pub scan_step: f64,
    /// Bisection width for the feasible-interval endpoints.
    pub endpoint_tol: f64,
    /// Box radius ‖x‖∞ swept when several conjugate pairs appear.
    pub box_radius: i64,
    /// Bisection width for the noise distance.
    pub mu_bisect_tol: f64,
    /// Largest noise strength the bracket may reach.
    pub mu_bracket_cap: f64,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        DecisionOptions {
            psd_tol: 1e-9,
            mu_tol: 1e-6,
            scan_halfwidth: 64.0,
            scan_step: 0.25,
            endpoint_tol: 1e-6,
            box_radius: 8,
            mu_bisect_tol: 1e-8,
            mu_bracket_cap: 1e4,
        }
    }
}

impl DecisionOptions {
    pub(crate) fn validate(&self) -> Result<()> {
        let positive = [
            ("psd_tol", self.psd_tol),
            ("mu_tol", self.mu_tol),
            ("scan_halfwidth", self.scan_halfwidth),
            ("scan_step", self.scan_step),
            ("endpoint_tol", self.endpoint_tol),
            ("mu_bisect_tol", self.mu_bisect_tol),
            ("mu_bracket_cap", self.mu_bracket_cap),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {value}")));
            }
        }
        if self.box_radius < 0 {
            return Err(Error::InvalidParameter(format!(
                "box_radius must be nonnegative, got {}",
                self.box_radius
            )));
        }
        Ok(())
    }
}

/// Success-path observations that do not invalidate a label but matter for
/// downstream filtering.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Degenerate eigenvalues shared a merged projector in the logarithm.
    pub merged_degenerate_log: bool,
    /// The map is non-Markovian but sits within `mu_tol` of the boundary,
    /// where the verdict is tolerance-limited.
    pub tolerance_boundary: bool,
}

/// Outcome of the Markovianity decision for one map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabelReport {
    /// Whether some branch is conditionally completely positive.
    pub answer: bool,
    /// Feasible winding numbers, present exactly when `answer` is true.
    pub witness_x: Option<Vec<i64>>,
    /// Largest restricted minimum eigenvalue over all searched branches.
    pub best_min_eig: f64,
    /// Least depolarizing strength that makes some branch feasible; zero
    /// when the map already is.
    pub mu_min: f64,
    /// Number of integer branch candidates evaluated.
    pub branches_searched: usize,
    pub diagnostics: Diagnostics,
}

/// Affine pencil W(x, μ) = V₀ + Σ x_c V_c + μ·D over flat buffers, where D
/// is the restricted Choi of the depolarizing generator. Evaluation reuses
/// one scratch matrix, so branch sweeps do not allocate.
struct Pencil {
    v0: Vec<C64>,
    vc: Vec<Vec<C64>>,
    depol: Vec<C64>,
    nd: usize,
    work: Vec<C64>,
}

impl Pencil {
    fn new(vm: &VMatrices, depol_restricted: &Array2<C64>) -> Self {
        let nd = vm.v0.nrows();
        Pencil {
            v0: vm.v0.iter().cloned().collect(),
            vc: vm.vc.iter().map(|v| v.iter().cloned().collect()).collect(),
            depol: depol_restricted.iter().cloned().collect(),
            nd,
            work: vec![C64::new(0.0, 0.0); nd * nd],
        }
    }

    fn min_eig(&mut self, x: &[f64], mu: f64) -> f64 {
        for i in 0..self.work.len() {
            let mut w = self.v0[i];
            for (c, vc) in self.vc.iter().enumerate() {
                w += vc[i] * x[c];
            }
            if mu != 0.0 {
                w += self.depol[i] * mu;
            }
            self.work[i] = w;
        }
        min_eig_flat(self.nd, &mut self.work)
    }

    fn min_eig_int(&mut self, x: &[i64], mu: f64) -> f64 {
        let xf: Vec<f64> = x.iter().map(|&k| k as f64).collect();
        self.min_eig(&xf, mu)
    }
}

/// Everything the decision needs, derived from the map once.
struct Prepared {
    pencil: Pencil,
    pairs: usize,
    merged_degenerate_log: bool,
}

fn prepare(map: &FloquetMap) -> Result<Prepared> {
    let decomp = eigendecompose(&map.sup)?;
    let log = principal_log(&decomp, map.period)?;
    let vm = v_matrices(&decomp, &log.k0, map.model.omega)?;
    let depol = depolarizing_generator(map.dim)?;
    let proj = crate::choi::phi_projectors(map.dim)?;
    let depol_restricted =
        crate::linalg::restrict(&crate::choi::reshuffle(&depol)?, &proj.complement);
    Ok(Prepared {
        pencil: Pencil::new(&vm, &depol_restricted),
        pairs: decomp.pair_indices.len(),
        merged_degenerate_log: log.merged_degenerate,
    })
}

/// Decides Markovianity of `map` at the default [`DecisionOptions`].
pub fn decide_markovianity(map: &FloquetMap) -> Result<LabelReport> {
    decide_markovianity_with(map, &DecisionOptions::default())
}

/// Decides Markovianity and the noise distance μ. Fails with one of the
/// point-flag errors ([`Error::is_point_flag`]) when the spectrum does not
/// support a trustworthy label.
pub fn decide_markovianity_with(map: &FloquetMap, opts: &DecisionOptions) -> Result<LabelReport> {
    opts.validate()?;
    let mut prep = prepare(map)?;
    let candidates = branch_candidates(&mut prep.pencil, prep.pairs, opts);

    let mut best_x = candidates[0].clone();
    let mut best = f64::NEG_INFINITY;
    for x in &candidates {
        let m = prep.pencil.min_eig_int(x, 0.0);
        if m > best {
            best = m;
            best_x = x.clone();
        }
    }
    let answer = best >= -opts.psd_tol;

    let mu_min = if answer {
        0.0
    } else {
        let mut least: Option<f64> = None;
        for x in &candidates {
            if let Some(mu) = noise_distance(&mut prep.pencil, x, opts) {
                least = Some(least.map_or(mu, |best: f64| best.min(mu)));
            }
        }
        least.ok_or(Error::NoiseBracketExceeded(opts.mu_bracket_cap))?
    };

    let diagnostics = Diagnostics {
        merged_degenerate_log: prep.merged_degenerate_log,
        tolerance_boundary: !answer && mu_min <= opts.mu_tol,
    };
    Ok(LabelReport {
        answer,
        witness_x: answer.then(|| best_x),
        best_min_eig: best,
        mu_min,
        branches_searched: candidates.len(),
        diagnostics,
    })
}

/// Feasible winding interval {x ∈ ℝ : m(x) ≥ 0} for a map with exactly one
/// conjugate pair, or `None` when even the concave maximum is infeasible.
pub fn real_feasible_interval(map: &FloquetMap) -> Result<Option<(f64, f64)>> {
    real_feasible_interval_with(map, &DecisionOptions::default())
}

/// [`real_feasible_interval`] at explicit options.
pub fn real_feasible_interval_with(
    map: &FloquetMap,
    opts: &DecisionOptions,
) -> Result<Option<(f64, f64)>> {
    opts.validate()?;
    let mut prep = prepare(map)?;
    if prep.pairs != 1 {
        return Err(Error::DimensionMismatch(format!(
            "real feasible interval needs exactly one conjugate pair, map has {}",
            prep.pairs
        )));
    }
    let (interval, _) = superlevel_interval(&mut prep.pencil, 0.0, opts);
    Ok(interval)
}

/// Minimum conditional-positivity eigenvalue of branch `x` as the
/// depolarizing noise strength varies, one value per entry of `mus`.
pub fn noise_profile(map: &FloquetMap, x: &[i64], mus: &[f64]) -> Result<Vec<f64>> {
    let mut prep = prepare(map)?;
    if x.len() != prep.pairs {
        return Err(Error::DimensionMismatch(format!(
            "branch index has {} entries, map has {} conjugate pairs",
            x.len(),
            prep.pairs
        )));
    }
    for &mu in mus {
        if !mu.is_finite() || mu < 0.0 {
            return Err(Error::InvalidParameter(format!("noise strength must be finite and nonnegative, got {mu}")));
        }
    }
    Ok(mus.iter().map(|&mu| prep.pencil.min_eig_int(x, mu)).collect())
}

/// Integer branches worth evaluating: the single empty branch without pairs,
/// the neighborhood of the concave feasible interval for one pair, and a
/// full box sweep otherwise.
fn branch_candidates(pencil: &mut Pencil, pairs: usize, opts: &DecisionOptions) -> Vec<Vec<i64>> {
    match pairs {
        0 => vec![Vec::new()],
        1 => {
            let (interval, x_star) = superlevel_interval(pencil, -opts.psd_tol, opts);
            let bound = opts.scan_halfwidth.floor() as i64;
            let clamp = |k: i64| k.clamp(-bound, bound);
            let mut set = std::collections::BTreeSet::new();
            set.insert(clamp(x_star.floor() as i64));
            set.insert(clamp(x_star.ceil() as i64));
            if let Some((lo, hi)) = interval {
                for k in (lo - 1.0).ceil() as i64..=(hi + 1.0).floor() as i64 {
                    set.insert(clamp(k));
                }
            }
            set.into_iter().map(|k| vec![k]).collect()
        }
        n => {
            let mut out = Vec::new();
            let mut x = vec![-opts.box_radius; n];
            loop {
                out.push(x.clone());
                let mut c = 0;
                loop {
                    if c == n {
                        return out;
                    }
                    x[c] += 1;
                    if x[c] <= opts.box_radius {
                        break;
                    }
                    x[c] = -opts.box_radius;
                    c += 1;
                }
            }
        }
    }
}

/// Superlevel set {x : m(x) ≥ threshold} of the concave objective for one
/// pair, plus the refined location of the maximum. A coarse scan localizes
/// the peak, ternary search refines it, and the endpoints are bisected using
/// that m is nondecreasing left of the peak and nonincreasing right of it.
fn superlevel_interval(
    pencil: &mut Pencil,
    threshold: f64,
    opts: &DecisionOptions,
) -> (Option<(f64, f64)>, f64) {
    let hw = opts.scan_halfwidth;
    let steps = (2.0 * hw / opts.scan_step).round() as usize;
    let xs: Vec<f64> = (0..=steps).map(|i| -hw + i as f64 * opts.scan_step).collect();
    let ms: Vec<f64> = xs.iter().map(|&x| pencil.min_eig(&[x], 0.0)).collect();
    let mut i_best = 0;
    for (i, &m) in ms.iter().enumerate() {
        if m > ms[i_best] {
            i_best = i;
        }
    }

    let (mut lo, mut hi) = (
        (xs[i_best] - opts.scan_step).max(-hw),
        (xs[i_best] + opts.scan_step).min(hw),
    );
    while hi - lo > 1e-9 {
        let third = (hi - lo) / 3.0;
        if pencil.min_eig(&[lo + third], 0.0) < pencil.min_eig(&[hi - third], 0.0) {
            lo += third;
        } else {
            hi -= third;
        }
    }
    let x_star = 0.5 * (lo + hi);
    let m_star = pencil.min_eig(&[x_star], 0.0);
    if m_star < threshold {
        return (None, x_star);
    }

    // Left endpoint: bracket between the nearest infeasible grid point and
    // the peak, then bisect the unique crossing.
    let crossing = |pencil: &mut Pencil, mut below: f64, mut above: f64| {
        while (below - above).abs() > opts.endpoint_tol {
            let mid = 0.5 * (below + above);
            if pencil.min_eig(&[mid], 0.0) >= threshold {
                above = mid;
            } else {
                below = mid;
            }
        }
        above
    };
    let left_bracket = xs
        .iter()
        .zip(&ms)
        .filter(|&(&x, &m)| x < x_star && m < threshold)
        .map(|(&x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    let left = if left_bracket.is_finite() {
        crossing(pencil, left_bracket, x_star)
    } else {
        -hw
    };
    let right_bracket = xs
        .iter()
        .zip(&ms)
        .filter(|&(&x, &m)| x > x_star && m < threshold)
        .map(|(&x, _)| x)
        .fold(f64::INFINITY, f64::min);
    let right = if right_bracket.is_finite() {
        crossing(pencil, right_bracket, x_star)
    } else {
        hw
    };
    (Some((left, right)), x_star)
}

/// Least μ with m(x, μ) ≥ −psd_tol for a fixed branch, by doubling bracket
/// and bisection; `None` when the bracket cap is reached first. The
/// objective is strictly increasing in μ, so the crossing is unique.
fn noise_distance(pencil: &mut Pencil, x: &[i64], opts: &DecisionOptions) -> Option<f64> {
    let xf: Vec<f64> = x.iter().map(|&k| k as f64).collect();
    let feasible = |pencil: &mut Pencil, mu: f64| pencil.min_eig(&xf, mu) >= -opts.psd_tol;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !feasible(pencil, hi) {
        lo = hi;
        hi *= 2.0;
        if hi > opts.mu_bracket_cap {
            return None;
        }
    }
    while hi - lo > opts.mu_bisect_tol {
        let mid = 0.5 * (lo + hi);
        if feasible(pencil, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
