//! Dense complex linear algebra for small matrices.
//!
//! Everything here targets the N²×N² superoperators of low-dimensional open
//! systems (4×4 for a qubit), so the routines favor determinism and accuracy
//! near the spectrum edge over asymptotic scaling. Hermitian problems go
//! through a cyclic Jacobi solver; general spectra go through `faer`.

use faer::linalg::solvers::{DenseSolveCore, Eigen};
use faer::Mat;
use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex double-precision scalar used throughout the crate.
pub type C64 = Complex64;

pub(crate) const C_ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const C_ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const C_I: C64 = C64::new(0.0, 1.0);

/// Conjugate transpose.
pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Largest entrywise distance, max_ij |a_ij − b_ij|.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Deviation from Hermiticity, max_ij |a_ij − conj(a_ji)|.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

fn norm_1(a: &Array2<C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let col: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        worst = worst.max(col);
    }
    worst
}

pub(crate) fn to_faer(a: &Array2<C64>) -> Mat<C64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_faer(m: faer::MatRef<'_, C64>) -> Array2<C64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Inverse by partially pivoted LU.
pub fn inverse(a: &Array2<C64>) -> Result<Array2<C64>> {
    assert_eq!(a.nrows(), a.ncols(), "inverse of a non-square matrix");
    let inv = to_faer(a).partial_piv_lu().inverse();
    let out = from_faer(inv.as_ref());
    if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(out)
    } else {
        Err(Error::SingularMatrix)
    }
}

/// Right eigendecomposition of a general complex square matrix.
/// Returns the eigenvalues and the matrix whose columns are eigenvectors,
/// in the solver's deterministic output order.
pub fn eig(a: &Array2<C64>) -> Result<(Vec<C64>, Array2<C64>)> {
    assert_eq!(a.nrows(), a.ncols(), "eigendecomposition of a non-square matrix");
    let evd = Eigen::new(to_faer(a).as_ref()).map_err(|_| Error::EigendecompositionFailed)?;
    let n = a.nrows();
    let values: Vec<C64> = (0..n).map(|k| evd.S()[k]).collect();
    let vectors = from_faer(evd.U());
    Ok((values, vectors))
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    // Padé-13 coefficients; b[k] multiplies A^k (even in V, odd in U).
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = a.nrows();
    assert_eq!(n, a.ncols(), "exponential of a non-square matrix");
    let norm = norm_1(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let a = a.mapv(|z| z / C64::new(2f64.powi(s as i32), 0.0));

    let eye = Array2::<C64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = &a6 * C64::new(B[13], 0.0) + &a4 * C64::new(B[11], 0.0) + &a2 * C64::new(B[9], 0.0);
    let u_poly = a6.dot(&u_inner)
        + &a6 * C64::new(B[7], 0.0)
        + &a4 * C64::new(B[5], 0.0)
        + &a2 * C64::new(B[3], 0.0)
        + &eye * C64::new(B[1], 0.0);
    let u = a.dot(&u_poly);

    let v_inner = &a6 * C64::new(B[12], 0.0) + &a4 * C64::new(B[10], 0.0) + &a2 * C64::new(B[8], 0.0);
    let v = a6.dot(&v_inner)
        + &a6 * C64::new(B[6], 0.0)
        + &a4 * C64::new(B[4], 0.0)
        + &a2 * C64::new(B[2], 0.0)
        + &eye * C64::new(B[0], 0.0);

    // exp(A) ≈ (V − U)⁻¹ (V + U), then undo the scaling by squaring.
    let denom = &v - &u;
    let numer = &v + &u;
    let mut e = inverse(&denom)
        .expect("Padé denominator is well conditioned by the scaling choice")
        .dot(&numer);
    for _ in 0..s {
        e = e.dot(&e);
    }
    e
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix stored flat in
/// row-major order. Rotations zero a[p][q] exactly; convergence is the
/// off-diagonal Frobenius norm falling below `1e-14` of the matrix norm.
/// Only the Hermitian part of the input participates: entries below the
/// diagonal are kept as mirror images of those above.
pub(crate) fn jacobi_flat(n: usize, a: &mut [C64], mut v: Option<&mut [C64]>) {
    debug_assert_eq!(a.len(), n * n);
    if let Some(v) = v.as_deref_mut() {
        debug_assert_eq!(v.len(), n * n);
        v.fill(C_ZERO);
        for k in 0..n {
            v[k * n + k] = C_ONE;
        }
    }
    // Enforce exact Hermitian structure before rotating.
    for p in 0..n {
        a[p * n + p] = C64::new(a[p * n + p].re, 0.0);
        for q in (p + 1)..n {
            a[q * n + p] = a[p * n + q].conj();
        }
    }
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (app - aqq) / (2.0 * r);
                // Smaller-angle root of cot(2φ) = τ keeps |t| ≤ 1.
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let u = apq / C64::new(r, 0.0);

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = akp * c + akq * u.conj() * s;
                    let new_kq = akq * c - akp * u * s;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp.conj();
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq.conj();
                }
                let shift = 2.0 * c * s * r;
                a[p * n + p] = C64::new(c * c * app + s * s * aqq + shift, 0.0);
                a[q * n + q] = C64::new(s * s * app + c * c * aqq - shift, 0.0);
                a[p * n + q] = C_ZERO;
                a[q * n + p] = C_ZERO;

                if let Some(v) = v.as_deref_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = vkp * c + vkq * u.conj() * s;
                        v[k * n + q] = vkq * c - vkp * u * s;
                    }
                }
            }
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix given flat; clobbers `a`.
pub(crate) fn min_eig_flat(n: usize, a: &mut [C64]) -> f64 {
    jacobi_flat(n, a, None);
    (0..n).map(|k| a[k * n + k].re).fold(f64::INFINITY, f64::min)
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// ascending order with matching orthonormal eigenvector columns.
pub fn eig_hermitian(a: &Array2<C64>) -> (Vec<f64>, Array2<C64>) {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "Hermitian eigendecomposition of a non-square matrix");
    let mut flat: Vec<C64> = a.iter().cloned().collect();
    let mut vflat = vec![C_ZERO; n * n];
    jacobi_flat(n, &mut flat, Some(&mut vflat));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        flat[i * n + i]
            .re
            .partial_cmp(&flat[j * n + j].re)
            .expect("Jacobi eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let values: Vec<f64> = order.iter().map(|&k| flat[k * n + k].re).collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| vflat[i * n + order[j]]);
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_hermitian(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut flat: Vec<C64> = a.iter().cloned().collect();
    min_eig_flat(n, &mut flat)
}

/// 2-norm condition number via the Hermitian spectrum of A†A.
pub fn cond_2(a: &Array2<C64>) -> f64 {
    let gram = dagger(a).dot(a);
    let n = gram.nrows();
    let mut flat: Vec<C64> = gram.iter().cloned().collect();
    jacobi_flat(n, &mut flat, None);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for k in 0..n {
        let lambda = flat[k * n + k].re.max(0.0);
        lo = lo.min(lambda);
        hi = hi.max(lambda);
    }
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).sqrt()
    }
}

/// Orthonormal basis of the orthogonal complement of a nonzero vector,
/// returned as the trailing n−1 columns of a Householder reflector that
/// maps e₁ onto span{v}.
pub fn complement_basis(v: &Array1<C64>) -> Array2<C64> {
    let n = v.len();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(norm > 0.0, "complement basis of the zero vector");

    // w = v − α e₁ with α = −e^{i arg v₀} ‖v‖ makes H = I − 2ww†/‖w‖²
    // a Hermitian unitary whose first column is proportional to v.
    let phase = if v[0].norm() > 0.0 { v[0] / C64::new(v[0].norm(), 0.0) } else { C_ONE };
    let alpha = -phase * C64::new(norm, 0.0);
    let mut w: Array1<C64> = v.clone();
    w[0] -= alpha;
    let wnorm_sqr: f64 = w.iter().map(|z| z.norm_sqr()).sum();

    let mut h = Array2::<C64>::eye(n);
    if wnorm_sqr > 0.0 {
        let coeff = C64::new(2.0 / wnorm_sqr, 0.0);
        for i in 0..n {
            for j in 0..n {
                h[[i, j]] -= coeff * w[i] * w[j].conj();
            }
        }
    }
    let mut basis = Array2::<C64>::zeros((n, n - 1));
    for j in 1..n {
        basis.column_mut(j - 1).assign(&h.column(j));
    }
    basis
}

/// Congruence B† M B restricting M to the column span of B.
pub fn restrict(m: &Array2<C64>, basis: &Array2<C64>) -> Array2<C64> {
    dagger(basis).dot(m).dot(basis)
}
