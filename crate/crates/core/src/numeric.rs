//! Thin numeric helpers over nalgebra: least squares, nullspaces, and
//! eigenvalue clustering for the pointwise linear algebra the detectors run.

use nalgebra::{DMatrix, DVector};

/// Thin SVD `A = U diag(sigma) V^T` computed by one-sided Jacobi rotations,
/// with `sigma` sorted descending. The systems the detectors assemble are
/// frequently rank-deficient by construction, and nalgebra's bidiagonal SVD
/// can silently mis-converge there (orthogonal factors that no longer
/// reproduce `A`), so all least-squares and nullspace work funnels through
/// this slower but unconditionally stable routine.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let k = a.ncols();
    let mut b = a.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let app = b.column(p).dot(&b.column(p));
                let aqq = b.column(q).dot(&b.column(q));
                let apq = b.column(p).dot(&b.column(q));
                if apq.abs() <= 1e-15 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..b.nrows() {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = c * bip - s * biq;
                    b[(i, q)] = s * bip + c * biq;
                }
                for i in 0..k {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = c * vip - s * viq;
                    v[(i, q)] = s * vip + c * viq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..k).map(|j| b.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::zeros(a.nrows(), k);
    let mut sig = DVector::zeros(k);
    let mut vs = DMatrix::zeros(k, k);
    for (jj, &j) in order.iter().enumerate() {
        sig[jj] = norms[j];
        if norms[j] > 0.0 {
            u.set_column(jj, &b.column(j).map(|x| x / norms[j]));
        }
        vs.set_column(jj, &v.column(j).into_owned());
    }
    (u, sig, vs)
}

/// Minimal-norm least-squares solution of `A x = b` via the pseudo-inverse.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut x = DVector::zeros(a.ncols());
    if a.ncols() == 0 {
        return x;
    }
    let (u, sig, v) = jacobi_svd(a);
    let cutoff = 1e-12 * sig[0].max(1.0);
    for j in 0..sig.len() {
        if sig[j] > cutoff {
            let coef = u.column(j).dot(b) / sig[j];
            x.axpy(coef, &v.column(j).into_owned(), 1.0);
        }
    }
    x
}

/// Orthonormal basis of the (numerical) nullspace of `A`: right singular
/// vectors whose singular values fall below `tol` times the largest one.
pub fn nullspace(a: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (_, sig, v) = jacobi_svd(a);
    let smax = sig.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    let mut basis = Vec::new();
    for j in 0..sig.len() {
        if sig[j] <= cutoff {
            basis.push(v.column(j).into_owned());
        }
    }
    basis
}

/// Numerical rank with the same cutoff rule as [`nullspace`].
pub fn rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let (_, sig, _) = jacobi_svd(a);
    let smax = sig.iter().cloned().fold(0.0, f64::max);
    let cutoff = tol * smax.max(1.0);
    sig.iter().filter(|&&s| s > cutoff).count()
}

/// Eigenvalues of a general real matrix, clustered into groups closer than
/// `tol` (relative to the overall scale). Complex pairs are kept; the return
/// value lists `(value, multiplicity)` sorted by real part, and a flag for
/// whether any eigenvalue had a non-negligible imaginary part.
pub fn clustered_eigenvalues(
    m: &DMatrix<f64>,
    tol: f64,
) -> (Vec<(f64, usize)>, bool) {
    // nalgebra's Schur iteration does not terminate on the exactly-zero
    // matrix (no scale to deflate against), and a zero operator is exactly
    // what flat metrics feed in here, so answer that case directly.
    if m.norm() == 0.0 {
        return (vec![(0.0, m.nrows())], false);
    }
    let eig = m.clone().complex_eigenvalues();
    let scale = eig.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
    let mut complex = false;
    let mut reals: Vec<f64> = Vec::new();
    for c in eig.iter() {
        if c.im.abs() > tol * scale {
            complex = true;
        }
        reals.push(c.re);
    }
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for v in reals {
        match clusters.last_mut() {
            Some((center, count)) if (v - *center).abs() <= tol * scale => {
                // running mean keeps the cluster center stable
                *center = (*center * *count as f64 + v) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => clusters.push((v, 1)),
        }
    }
    (clusters, complex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_solutions() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_row_slice(&[2.0, 3.0, 5.0]);
        let x = lstsq(&a, &b);
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_a_rank_one_matrix() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let img = &a * v;
            assert!(img.norm() < 1e-10);
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(rank(&a, 1e-10), 1);
    }

    #[test]
    fn eigenvalue_clustering_counts_multiplicities() {
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[2.0, 1e-14, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 5.0],
        );
        let (clusters, complex) = clustered_eigenvalues(&m, 1e-8);
        assert!(!complex);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0], (2.0, 2));
        assert_eq!(clusters[1].1, 1);

        // rotation block: complex pair flagged
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let (_, complex) = clustered_eigenvalues(&rot, 1e-8);
        assert!(complex);
    }

    #[test]
    fn the_zero_operator_has_a_zero_spectrum() {
        // Must not fall through to the Schur iteration, which does not
        // terminate on this input.
        let (clusters, complex) = clustered_eigenvalues(&DMatrix::zeros(4, 4), 1e-8);
        assert_eq!(clusters, vec![(0.0, 4)]);
        assert!(!complex);
    }
}
