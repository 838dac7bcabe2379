//! Gaussian generative classifiers: naive Bayes with per-feature variances,
//! and the linear/quadratic discriminants with pooled or per-class
//! covariances. Covariances carry a diagonal ridge of 1e-6 so constant
//! features stay solvable.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const COVARIANCE_RIDGE: f64 = 1e-6;
/// Variance floor relative to the largest feature variance.
const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct NaiveBayes {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Discriminant {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    /// Cholesky factor of the covariance: pooled once for the linear
    /// discriminant, one per class for the quadratic one.
    pub chol: Vec<LowerTriangular>,
    pub log_det: Vec<f64>,
}

/// Row-major lower-triangular factor L with A = L·Lᵀ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct LowerTriangular {
    pub n: usize,
    pub data: Vec<f64>,
}

impl LowerTriangular {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Solves L·z = b, so zᵀz = bᵀA⁻¹b.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.at(i, j) * z[j];
            }
            z[i] = acc / self.at(i, i);
        }
        z
    }
}

/// Cholesky factorization of a symmetric positive definite matrix given as
/// row-major storage. Fails on a nonpositive pivot.
pub(crate) fn cholesky(a: &[f64], n: usize) -> Result<LowerTriangular> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = a[i * n + j];
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if acc <= 0.0 {
                    return Err(Error::DegenerateTrainingData(format!(
                        "covariance is not positive definite at pivot {i}"
                    )));
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    Ok(LowerTriangular { n, data: l })
}

fn class_partition(y: &[u8]) -> [Vec<usize>; 2] {
    let mut classes = [Vec::new(), Vec::new()];
    for (i, &label) in y.iter().enumerate() {
        classes[label as usize].push(i);
    }
    classes
}

fn class_means(x: &[Vec<f64>], classes: &[Vec<usize>; 2]) -> [Vec<f64>; 2] {
    let d = x[0].len();
    let mut means = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        for &i in &classes[c] {
            for (m, v) in means[c].iter_mut().zip(&x[i]) {
                *m += v;
            }
        }
        for m in &mut means[c] {
            *m /= classes[c].len() as f64;
        }
    }
    means
}

fn log_priors(classes: &[Vec<usize>; 2], n: usize) -> [f64; 2] {
    [0, 1].map(|c| (classes[c].len() as f64 / n as f64).ln())
}

pub(crate) fn fit_naive_bayes(x: &[Vec<f64>], y: &[u8]) -> NaiveBayes {
    let d = x[0].len();
    let classes = class_partition(y);
    let mean = class_means(x, &classes);
    let mut var = [vec![0.0; d], vec![0.0; d]];
    for c in 0..2 {
        for &i in &classes[c] {
            for ((v, xi), m) in var[c].iter_mut().zip(&x[i]).zip(&mean[c]) {
                *v += (xi - m) * (xi - m);
            }
        }
        for v in &mut var[c] {
            *v /= classes[c].len() as f64;
        }
    }
    // Smoothing keeps constant features from collapsing a likelihood.
    let max_var = var.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let floor = VAR_SMOOTHING * max_var + 1e-12;
    for v in var.iter_mut().flatten() {
        *v += floor;
    }
    NaiveBayes { log_prior: log_priors(&classes, x.len()), mean, var }
}

impl NaiveBayes {
    pub fn score(&self, row: &[f64]) -> f64 {
        let log_post = [0, 1].map(|c| {
            let mut acc = self.log_prior[c];
            for ((xi, m), v) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
                acc -= 0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (xi - m) * (xi - m) / v);
            }
            acc
        });
        softmax1(log_post)
    }
}

/// Scatter matrix Σ (x−μ)(x−μ)ᵀ of one class, row-major.
fn scatter(x: &[Vec<f64>], members: &[usize], mean: &[f64]) -> Vec<f64> {
    let d = mean.len();
    let mut s = vec![0.0; d * d];
    for &i in members {
        for a in 0..d {
            let da = x[i][a] - mean[a];
            for b in 0..=a {
                let v = da * (x[i][b] - mean[b]);
                s[a * d + b] += v;
                if a != b {
                    s[b * d + a] += v;
                }
            }
        }
    }
    s
}

fn ridge(s: &mut [f64], d: usize) {
    for i in 0..d {
        s[i * d + i] += COVARIANCE_RIDGE;
    }
}

fn log_det(l: &LowerTriangular) -> f64 {
    (0..l.n).map(|i| 2.0 * l.at(i, i).ln()).sum()
}

/// Pooled-covariance fit: one Gaussian shape shared by both classes, hence a
/// linear decision boundary.
pub(crate) fn fit_lda(x: &[Vec<f64>], y: &[u8]) -> Result<Discriminant> {
    let d = x[0].len();
    let classes = class_partition(y);
    let mean = class_means(x, &classes);
    let mut pooled = vec![0.0; d * d];
    for c in 0..2 {
        let s = scatter(x, &classes[c], &mean[c]);
        for (p, v) in pooled.iter_mut().zip(s) {
            *p += v;
        }
    }
    let denom = (x.len() as f64 - 2.0).max(1.0);
    for p in &mut pooled {
        *p /= denom;
    }
    ridge(&mut pooled, d);
    let l = cholesky(&pooled, d)?;
    let det = log_det(&l);
    Ok(Discriminant {
        log_prior: log_priors(&classes, x.len()),
        mean,
        chol: vec![l],
        log_det: vec![det],
    })
}

/// Per-class covariance fit, allowing curved boundaries.
pub(crate) fn fit_qda(x: &[Vec<f64>], y: &[u8]) -> Result<Discriminant> {
    let d = x[0].len();
    let classes = class_partition(y);
    let mean = class_means(x, &classes);
    let mut chol = Vec::with_capacity(2);
    let mut dets = Vec::with_capacity(2);
    for c in 0..2 {
        let mut s = scatter(x, &classes[c], &mean[c]);
        let denom = (classes[c].len() as f64 - 1.0).max(1.0);
        for v in &mut s {
            *v /= denom;
        }
        ridge(&mut s, d);
        let l = cholesky(&s, d)?;
        dets.push(log_det(&l));
        chol.push(l);
    }
    Ok(Discriminant { log_prior: log_priors(&classes, x.len()), mean, chol, log_det: dets })
}

impl Discriminant {
    pub fn score(&self, row: &[f64]) -> f64 {
        let log_post = [0, 1].map(|c| {
            let (l, det) = if self.chol.len() == 1 {
                (&self.chol[0], self.log_det[0])
            } else {
                (&self.chol[c], self.log_det[c])
            };
            let centered: Vec<f64> = row.iter().zip(&self.mean[c]).map(|(xi, m)| xi - m).collect();
            let z = l.forward_solve(&centered);
            let mahal: f64 = z.iter().map(|v| v * v).sum();
            self.log_prior[c] - 0.5 * (det + mahal)
        });
        softmax1(log_post)
    }
}

/// Class-1 probability from two log posteriors.
fn softmax1(log_post: [f64; 2]) -> f64 {
    let m = log_post[0].max(log_post[1]);
    let e0 = (log_post[0] - m).exp();
    let e1 = (log_post[1] - m).exp();
    e1 / (e0 + e1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_reconstructs_the_matrix() {
        let a = [4.0, 2.0, 1.0, 2.0, 5.0, 3.0, 1.0, 3.0, 6.0];
        let l = cholesky(&a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += l.data[i * 3 + k] * l.data[j * 3 + k];
                }
                assert!((acc - a[i * 3 + j]).abs() < 1e-12);
            }
        }
        assert!(cholesky(&[1.0, 2.0, 2.0, 1.0], 2).is_err());
    }

    #[test]
    fn forward_solve_gives_the_mahalanobis_norm() {
        let a = [2.0, 0.5, 0.5, 1.0];
        let l = cholesky(&a, 2).unwrap();
        let b = [1.0, -1.0];
        let z = l.forward_solve(&b);
        // bᵀ A⁻¹ b computed by hand: A⁻¹ = [[1, -0.5], [-0.5, 2]] / 1.75.
        let expect = (1.0 + 0.5 + 0.5 + 2.0) / 1.75;
        let got: f64 = z.iter().map(|v| v * v).sum();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn naive_bayes_recovers_moments() {
        let x = vec![vec![0.0, 1.0], vec![2.0, 1.0], vec![10.0, 4.0], vec![12.0, 6.0]];
        let y = vec![0, 0, 1, 1];
        let nb = fit_naive_bayes(&x, &y);
        assert_eq!(nb.mean[0], vec![1.0, 1.0]);
        assert_eq!(nb.mean[1], vec![11.0, 5.0]);
        assert!((nb.var[0][0] - 1.0).abs() < 1e-6);
        assert!((nb.var[1][1] - 1.0).abs() < 1e-6);
        assert!(nb.score(&[11.0, 5.0]) > 0.99);
        assert!(nb.score(&[1.0, 1.0]) < 0.01);
    }

    #[test]
    fn lda_midpoint_is_undecided() {
        let x = vec![
            vec![-3.0, -3.0],
            vec![-4.0, -2.0],
            vec![-2.0, -4.0],
            vec![3.0, 3.0],
            vec![4.0, 2.0],
            vec![2.0, 4.0],
        ];
        let y = vec![0, 0, 0, 1, 1, 1];
        let lda = fit_lda(&x, &y).unwrap();
        assert!((lda.score(&[0.0, 0.0]) - 0.5).abs() < 1e-6);
        assert!(lda.score(&[3.0, 3.0]) > 0.99);
        assert!(lda.score(&[-3.0, -3.0]) < 0.01);
    }

    #[test]
    fn qda_separates_by_spread_alone() {
        // Same mean, different variance: only a quadratic boundary helps.
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..12 {
            let t = (i as f64 - 5.5) / 5.5;
            x.push(vec![0.1 * t]);
            y.push(0);
            x.push(vec![4.0 * t]);
            y.push(1);
        }
        let qda = fit_qda(&x, &y).unwrap();
        assert!(qda.score(&[3.5]) > 0.9, "far point should look wide-class");
        assert!(qda.score(&[0.0]) < 0.5, "center should look narrow-class");
    }

    #[test]
    fn constant_features_survive_the_ridge() {
        let x = vec![vec![1.0, 5.0], vec![1.0, 5.0], vec![1.0, 5.0], vec![1.0, 5.0]];
        let y = vec![0, 0, 1, 1];
        assert!((fit_lda(&x, &y).unwrap().score(&[1.0, 5.0]) - 0.5).abs() < 1e-9);
        assert!((fit_qda(&x, &y).unwrap().score(&[1.0, 5.0]) - 0.5).abs() < 1e-9);
        assert!((fit_naive_bayes(&x, &y).score(&[1.0, 5.0]) - 0.5).abs() < 1e-9);
    }
}
