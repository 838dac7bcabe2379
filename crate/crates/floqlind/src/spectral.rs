//! Spectral decomposition of one-period maps and the branch family of
//! candidate generators.
//!
//! A map P with spectrum {λ_k} and spectral projectors {P_k} has the
//! principal generator K₀ = (1/T) Σ ln(λ_k) P_k. Complex eigenvalues come in
//! conjugate pairs, and each pair admits an integer winding ambiguity: the
//! full candidate family is
//!
//! K_x = K₀ + iω Σ_c x_c (P_c − P_{c*}),  x ∈ ℤⁿ,
//!
//! with P_c the projector of the upper-half-plane member of pair c. Real
//! eigenvalues carry no parameter, since shifting one alone breaks the
//! conjugation symmetry a Hermiticity-preserving generator needs.

use ndarray::Array2;

use crate::choi::{phi_projectors, reshuffle};
use crate::error::{Error, Result};
use crate::linalg::{cond_2, eig, inverse, restrict, C64};

/// Eigenvector condition number past which the map is treated as defective.
pub const NEAR_DEFECTIVE_COND: f64 = 1e8;

/// Relative half-width for classifying an eigenvalue as real and for
/// matching conjugate partners.
pub const REAL_TOL: f64 = 1e-9;

/// Relative spacing below which eigenvalues share one logarithm branch.
pub const GROUP_TOL: f64 = 1e-9;

/// Eigenvalue magnitude below which the logarithm is refused.
pub const SINGULAR_TOL: f64 = 1e-10;

/// Distance of arg(λ) from ±π below which the branch choice is ambiguous.
pub const BRANCH_CUT_TOL: f64 = 1e-6;

/// Eigenvalues, spectral projectors, and the real/pair classification of a
/// one-period map. `pair_indices` lists (upper, lower) half-plane partners;
/// `real_indices.len() + 2·pair_indices.len()` equals the dimension.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub projectors: Vec<Array2<C64>>,
    pub real_indices: Vec<usize>,
    pub pair_indices: Vec<(usize, usize)>,
    pub condition_number: f64,
}

/// Principal-branch generator together with a record of whether degenerate
/// eigenvalues had to share a merged projector.
#[derive(Debug, Clone)]
pub struct PrincipalLog {
    pub k0: Array2<C64>,
    pub merged_degenerate: bool,
}

/// Reshuffled branch family restricted to the complement of the maximally
/// entangled state: m(x) = λ_min(v0 + Σ x_c·vc\[c\]) evaluates conditional
/// complete positivity of K_x without rebuilding any candidate.
#[derive(Debug, Clone)]
pub struct VMatrices {
    pub v0: Array2<C64>,
    pub vc: Vec<Array2<C64>>,
}

/// Diagonalizes a vectorized map and classifies its spectrum. Fails with
/// [`Error::NearDefective`] when the eigenvector basis is too ill-conditioned
/// to trust the projectors, and [`Error::UnpairedEigenvalue`] when a complex
/// eigenvalue has no conjugate partner.
pub fn eigendecompose(sup: &Array2<C64>) -> Result<SpectralDecomposition> {
    let (eigenvalues, right) = eig(sup)?;
    let condition_number = cond_2(&right);
    if !(condition_number.is_finite() && condition_number <= NEAR_DEFECTIVE_COND) {
        return Err(Error::NearDefective { cond: condition_number });
    }
    let left = inverse(&right)?;
    let n = eigenvalues.len();
    let mut projectors = Vec::with_capacity(n);
    for k in 0..n {
        let mut p = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                p[[i, j]] = right[[i, k]] * left[[k, j]];
            }
        }
        projectors.push(p);
    }
    let (real_indices, pair_indices) = classify_spectrum(&eigenvalues, REAL_TOL)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        real_indices,
        pair_indices,
        condition_number,
    })
}

/// Splits a spectrum into real eigenvalues and conjugate pairs. Pairs are
/// matched greedily by distance to the conjugate; the first index of each
/// pair is the upper-half-plane member.
pub fn classify_spectrum(eigenvalues: &[C64], tol: f64) -> Result<(Vec<usize>, Vec<(usize, usize)>)> {
    let n = eigenvalues.len();
    let mut used = vec![false; n];
    let mut real_indices = Vec::new();
    let mut pair_indices = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let li = eigenvalues[i];
        let scale = li.norm().max(1.0);
        if li.im.abs() <= tol * scale {
            real_indices.push(i);
            used[i] = true;
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (j, &lj) in eigenvalues.iter().enumerate().skip(i + 1) {
            if used[j] {
                continue;
            }
            let d = (lj - li.conj()).norm();
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let j = match best {
            Some((j, d)) if d <= tol * scale => j,
            _ => return Err(Error::UnpairedEigenvalue { re: li.re, im: li.im }),
        };
        used[i] = true;
        used[j] = true;
        if li.im > 0.0 {
            pair_indices.push((i, j));
        } else {
            pair_indices.push((j, i));
        }
    }
    Ok((real_indices, pair_indices))
}

/// Clusters eigenvalues whose pairwise relative distance stays within `tol`,
/// transitively, so a chain of near-collisions shares one group. Groups are
/// returned in order of their smallest member index.
pub fn degenerate_groups(eigenvalues: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = eigenvalues.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = eigenvalues[i].norm().max(eigenvalues[j].norm()).max(1.0);
            if (eigenvalues[i] - eigenvalues[j]).norm() <= tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_to_group[r] == usize::MAX {
            root_to_group[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_to_group[r]].push(i);
    }
    groups
}

/// Principal-branch generator K₀ = (1/T) Σ ln(λ) P over degenerate groups.
/// Degenerate eigenvalues are merged into one group projector before taking
/// the logarithm, since their individual projectors are basis-dependent.
/// Fails with [`Error::SingularMap`] near zero eigenvalues and
/// [`Error::BranchCut`] near the negative real axis.
pub fn principal_log(decomp: &SpectralDecomposition, period: f64) -> Result<PrincipalLog> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
    }
    let n = decomp.eigenvalues.len();
    let groups = degenerate_groups(&decomp.eigenvalues, GROUP_TOL);
    let mut k0 = Array2::<C64>::zeros((n, n));
    for group in &groups {
        let mean: C64 = group.iter().map(|&k| decomp.eigenvalues[k]).sum::<C64>()
            / C64::new(group.len() as f64, 0.0);
        if mean.norm() < SINGULAR_TOL {
            return Err(Error::SingularMap(mean.norm()));
        }
        if std::f64::consts::PI - mean.arg().abs() < BRANCH_CUT_TOL {
            return Err(Error::BranchCut { re: mean.re, im: mean.im });
        }
        let log_rate = mean.ln() / C64::new(period, 0.0);
        for &k in group {
            k0 = k0 + decomp.projectors[k].mapv(|z| z * log_rate);
        }
    }
    Ok(PrincipalLog { k0, merged_degenerate: groups.len() < n })
}

/// Candidate generator K_x = K₀ + iω Σ_c x_c (P_c − P_{c*}).
pub fn branch(
    k0: &Array2<C64>,
    decomp: &SpectralDecomposition,
    omega: f64,
    x: &[i64],
) -> Result<Array2<C64>> {
    if x.len() != decomp.pair_indices.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} winding numbers for {} conjugate pairs",
            x.len(),
            decomp.pair_indices.len()
        )));
    }
    let mut k = k0.clone();
    for (&(plus, minus), &xc) in decomp.pair_indices.iter().zip(x) {
        if xc == 0 {
            continue;
        }
        let shift = C64::new(0.0, omega * xc as f64);
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                k[[i, j]] +=
                    shift * (decomp.projectors[plus][[i, j]] - decomp.projectors[minus][[i, j]]);
            }
        }
    }
    Ok(k)
}

/// Precomputes the restricted reshuffles of K₀ and of each pair shift, so the
/// conditional complete-positivity objective becomes an affine pencil in x.
pub fn v_matrices(decomp: &SpectralDecomposition, k0: &Array2<C64>, omega: f64) -> Result<VMatrices> {
    let n2 = k0.nrows();
    let dim = (n2 as f64).sqrt().round() as usize;
    let proj = phi_projectors(dim)?;
    let v0 = restrict(&reshuffle(k0)?, &proj.complement);
    let mut vc = Vec::with_capacity(decomp.pair_indices.len());
    for &(plus, minus) in &decomp.pair_indices {
        let shift = Array2::from_shape_fn((n2, n2), |(i, j)| {
            C64::new(0.0, omega) * (decomp.projectors[plus][[i, j]] - decomp.projectors[minus][[i, j]])
        });
        vc.push(restrict(&reshuffle(&shift)?, &proj.complement));
    }
    Ok(VMatrices { v0, vc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{floquet_map, from_constant_generator};
    use crate::lindblad::ModelSpec;
    use crate::linalg::{expm, hermiticity_defect, max_abs_diff};
    use crate::test_support::random_lindbladian;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn diag(entries: &[C64]) -> Array2<C64> {
        let n = entries.len();
        Array2::from_shape_fn((n, n), |(i, j)| if i == j { entries[i] } else { C64::new(0.0, 0.0) })
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn undamped_undriven_spectrum_is_unit_phases() {
        // H = σ_z/2 over a quarter period gives phases {1, 1, ±i}.
        let model = ModelSpec { gamma: 0.0, ..ModelSpec::problem_i(0.0, 4.0, 0.0) };
        let map = floquet_map(&model).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        let mut got: Vec<C64> = decomp.eigenvalues.clone();
        got.sort_by(|a, b| (a.im, a.re).partial_cmp(&(b.im, b.re)).unwrap());
        let want = [c(0.0, -1.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g - w).norm() < 1e-8, "{g} vs {w}");
        }
        assert_eq!(decomp.real_indices.len(), 2);
        assert_eq!(decomp.pair_indices.len(), 1);
        let (plus, minus) = decomp.pair_indices[0];
        assert!(decomp.eigenvalues[plus].im > 0.0);
        assert!(decomp.eigenvalues[minus].im < 0.0);
    }

    #[test]
    fn driven_spectrum_is_closed_under_conjugation() {
        let map = floquet_map(&ModelSpec::problem_ii(1.5, 1.1, 0.4)).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        assert_eq!(
            decomp.real_indices.len() + 2 * decomp.pair_indices.len(),
            decomp.eigenvalues.len()
        );
        for &(plus, minus) in &decomp.pair_indices {
            let d = (decomp.eigenvalues[plus].conj() - decomp.eigenvalues[minus]).norm();
            assert!(d < 1e-9);
        }
        // One eigenvalue sits at 1: the map preserves trace.
        let closest = decomp
            .eigenvalues
            .iter()
            .map(|z| (z - c(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(closest < 1e-9);
    }

    #[test]
    fn projectors_are_idempotent_and_resolve_the_map() {
        let map = floquet_map(&ModelSpec::problem_i(0.9, 1.3, 0.2)).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        let n = decomp.eigenvalues.len();
        let mut sum = Array2::<C64>::zeros((n, n));
        let mut rebuilt = Array2::<C64>::zeros((n, n));
        for (k, p) in decomp.projectors.iter().enumerate() {
            assert!(max_abs_diff(&p.dot(p), p) < 1e-9);
            sum = sum + p;
            rebuilt = rebuilt + p.mapv(|z| z * decomp.eigenvalues[k]);
        }
        assert!(max_abs_diff(&sum, &Array2::eye(n)) < 1e-10);
        assert!(max_abs_diff(&rebuilt, &map.sup) < 1e-9);
    }

    #[test]
    fn identity_map_logs_to_zero_with_merged_projectors() {
        let map = from_constant_generator(&Array2::zeros((4, 4)), 2.0 * PI).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        let log = principal_log(&decomp, map.period).unwrap();
        assert!(log.merged_degenerate);
        assert!(max_abs_diff(&log.k0, &Array2::zeros((4, 4))) < 1e-12);
        // No conjugate pairs, so the only branch is the log itself.
        assert_eq!(decomp.pair_indices.len(), 0);
        let k = branch(&log.k0, &decomp, map.model.omega, &[]).unwrap();
        assert!(max_abs_diff(&k, &log.k0) < 1e-15);
    }

    #[test]
    fn constant_generator_is_recovered_by_the_log() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..20 {
            let gen = random_lindbladian(&mut rng, 2);
            let period = 0.3;
            let map = from_constant_generator(&gen, period).unwrap();
            let decomp = match eigendecompose(&map.sup) {
                Ok(d) => d,
                // A random draw can land near a spectral collision; skip it.
                Err(Error::NearDefective { .. }) => continue,
                Err(e) => panic!("trial {trial}: {e}"),
            };
            let log = principal_log(&decomp, period).unwrap();
            assert!(
                max_abs_diff(&log.k0, &gen) < 1e-8,
                "trial {trial} differs by {:.3e}",
                max_abs_diff(&log.k0, &gen)
            );
        }
    }

    #[test]
    fn every_branch_exponentiates_back_to_the_map() {
        let map = floquet_map(&ModelSpec::problem_i(1.0, 1.0, 0.3)).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        let log = principal_log(&decomp, map.period).unwrap();
        assert_eq!(decomp.pair_indices.len(), 1);
        for xc in -2..=2 {
            let k = branch(&log.k0, &decomp, map.model.omega, &[xc]).unwrap();
            let back = expm(&k.mapv(|z| z * c(map.period, 0.0)));
            assert!(
                max_abs_diff(&back, &map.sup) < 1e-7,
                "x = {xc} reproduces the map to {:.3e} only",
                max_abs_diff(&back, &map.sup)
            );
            let choi = crate::choi::reshuffle(&k).unwrap();
            assert!(hermiticity_defect(&choi) < 1e-8, "x = {xc}");
        }
        assert!(branch(&log.k0, &decomp, map.model.omega, &[]).is_err());
    }

    #[test]
    fn pencil_matches_branches_evaluated_directly() {
        let map = floquet_map(&ModelSpec::problem_ii(2.2, 0.7, 1.1)).unwrap();
        let decomp = eigendecompose(&map.sup).unwrap();
        let log = principal_log(&decomp, map.period).unwrap();
        let vm = v_matrices(&decomp, &log.k0, map.model.omega).unwrap();
        assert_eq!(vm.vc.len(), decomp.pair_indices.len());
        assert_eq!(vm.v0.nrows(), 3);
        let proj = crate::choi::phi_projectors(2).unwrap();
        for x in [vec![0i64], vec![1], vec![-3], vec![7]] {
            let k = branch(&log.k0, &decomp, map.model.omega, &x).unwrap();
            let direct = crate::linalg::restrict(&reshuffle(&k).unwrap(), &proj.complement);
            let mut pencil = vm.v0.clone();
            for (v, &xc) in vm.vc.iter().zip(&x) {
                pencil = pencil + v.mapv(|z| z * c(xc as f64, 0.0));
            }
            assert!(max_abs_diff(&direct, &pencil) < 1e-10);
        }
        for v in &vm.vc {
            assert!(hermiticity_defect(v) < 1e-8);
        }
    }

    #[test]
    fn guards_catch_unusable_spectra() {
        let near_singular = diag(&[c(1.0, 0.0), c(0.5, 0.0), c(1e-12, 0.0), c(0.3, 0.0)]);
        let decomp = eigendecompose(&near_singular).unwrap();
        assert!(matches!(principal_log(&decomp, 1.0), Err(Error::SingularMap(_))));

        let on_cut = diag(&[c(1.0, 0.0), c(-0.5, 0.0), c(0.3, 0.0), c(0.2, 0.0)]);
        let decomp = eigendecompose(&on_cut).unwrap();
        assert!(matches!(principal_log(&decomp, 1.0), Err(Error::BranchCut { .. })));

        let unpaired = diag(&[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.8), c(0.3, 0.0)]);
        assert!(matches!(
            eigendecompose(&unpaired),
            Err(Error::UnpairedEigenvalue { .. })
        ));

        let jordan = array![
            [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.0)],
        ];
        assert!(matches!(eigendecompose(&jordan), Err(Error::NearDefective { .. })));
    }

    #[test]
    fn degenerate_groups_cluster_transitively() {
        let vals = [
            c(1.0, 0.0),
            c(1.0 + 0.8e-9, 0.0),
            c(1.0 + 1.6e-9, 0.0),
            c(2.0, 0.0),
        ];
        let groups = degenerate_groups(&vals, 1e-9);
        assert_eq!(groups, vec![vec![0, 1, 2], vec![3]]);

        let spread = [c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert_eq!(degenerate_groups(&spread, 1e-9).len(), 3);
    }
}
