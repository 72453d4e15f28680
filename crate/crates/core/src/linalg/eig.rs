use crate::error::{Error, Result};

use super::matrix::{DenseMatrix, C64, ZERO};

/// Hermiticity tolerance; inputs within it are silently symmetrized.
pub const HERMITIAN_TOL: f64 = 1e-10;

const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 64;

/// Eigendecomposition H = V Λ V† of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the same order as `eigenvalues`.
    pub eigenvectors: DenseMatrix,
}

impl EigDecomposition {
    /// V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Eigenvector k as a column.
    pub fn vector(&self, k: usize) -> DenseMatrix {
        let v = &self.eigenvectors;
        DenseMatrix::from_fn(v.rows(), 1, |i, _| v[(i, k)])
    }
}

fn checked_hermitian(h: &DenseMatrix) -> Result<DenseMatrix> {
    if !h.is_square() {
        return Err(Error::NotHermitian {
            residual: f64::INFINITY,
        });
    }
    let residual = h.hermitian_residual();
    if residual > HERMITIAN_TOL * h.frobenius_norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(h.hermitian_part())
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eig(h: &DenseMatrix) -> Result<EigDecomposition> {
    let a = checked_hermitian(h)?;
    let n = a.rows();
    jacobi(a, DenseMatrix::identity(n))
}

/// As [`hermitian_eig`], but first rotates into the basis `guess` (a unitary,
/// typically the eigenvectors of a nearby matrix). Jacobi converges in very
/// few sweeps when the rotated matrix is already close to diagonal.
pub fn hermitian_eig_with_guess(h: &DenseMatrix, guess: &DenseMatrix) -> Result<EigDecomposition> {
    let a = checked_hermitian(h)?;
    if guess.rows() != a.rows() || guess.cols() != a.cols() {
        return hermitian_eig(h);
    }
    let rotated = guess.dagger().matmul(&a)?.matmul(guess)?.hermitian_part();
    jacobi(rotated, guess.clone())
}

fn jacobi(mut a: DenseMatrix, mut v: DenseMatrix) -> Result<EigDecomposition> {
    let n = a.rows();
    let scale = a.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOL * scale;
    let mut converged = n <= 1 || scale == 0.0;

    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, threshold / n as f64);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = a.diagonal_re();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = DenseMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let s = a.as_slice();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += s[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates a[p][q] with the unitary R = D·Q, where D = diag(1, e^{-iφ})
/// removes the phase of a[p][q] and Q is the real Jacobi rotation.
fn rotate(a: &mut DenseMatrix, v: &mut DenseMatrix, p: usize, q: usize, skip_below: f64) {
    let n = a.rows();
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= skip_below.max(f64::MIN_POSITIVE) {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let phase = apq / mag; // e^{iφ}
    let phase_conj = phase.conj();

    // R = [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let r_pp = C64::new(c, 0.0);
    let r_pq = C64::new(s, 0.0);
    let r_qp = phase_conj * (-s);
    let r_qq = phase_conj * c;

    let data = a.as_mut_slice();
    // A <- A R (columns p, q)
    for k in 0..n {
        let akp = data[k * n + p];
        let akq = data[k * n + q];
        data[k * n + p] = akp * r_pp + akq * r_qp;
        data[k * n + q] = akp * r_pq + akq * r_qq;
    }
    // A <- R† A (rows p, q)
    for k in 0..n {
        let apk = data[p * n + k];
        let aqk = data[q * n + k];
        data[p * n + k] = r_pp.conj() * apk + r_qp.conj() * aqk;
        data[q * n + k] = r_pq.conj() * apk + r_qq.conj() * aqk;
    }
    data[p * n + q] = ZERO;
    data[q * n + p] = ZERO;
    data[p * n + p] = C64::new(data[p * n + p].re, 0.0);
    data[q * n + q] = C64::new(data[q * n + q].re, 0.0);

    let vd = v.as_mut_slice();
    for k in 0..n {
        let vkp = vd[k * n + p];
        let vkq = vd[k * n + q];
        vd[k * n + p] = vkp * r_pp + vkq * r_qp;
        vd[k * n + q] = vkp * r_pq + vkq * r_qq;
    }
}

/// Frobenius-nearest positive semidefinite matrix (eigenvalue clipping).
pub fn psd_project(h: &DenseMatrix) -> Result<DenseMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// H^{-1/2} for positive definite H; fails if any eigenvalue is below `floor`.
pub fn inv_sqrt_psd(h: &DenseMatrix, floor: f64) -> Result<DenseMatrix> {
    let eig = hermitian_eig(h)?;
    let min = eig.min_eigenvalue();
    if min < floor || min <= 0.0 {
        return Err(Error::EigenvalueBelowFloor { value: min, floor });
    }
    Ok(eig.reconstruct_with(|l| 1.0 / l.sqrt()))
}

/// Cheap positive-semidefiniteness test: succeeds when a Cholesky
/// factorization of H + tol·I exists, i.e. λ_min(H) > -tol.
pub fn is_psd_within(h: &DenseMatrix, tol: f64) -> bool {
    if !h.is_square() {
        return false;
    }
    let n = h.rows();
    let mut l = h.hermitian_part();
    for i in 0..n {
        l[(i, i)] += tol;
    }
    let d = l.as_mut_slice();
    for j in 0..n {
        let mut diag = d[j * n + j].re;
        for k in 0..j {
            diag -= d[j * n + k].norm_sqr();
        }
        if diag.is_nan() || diag <= 0.0 {
            return false;
        }
        let ljj = diag.sqrt();
        d[j * n + j] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut acc = d[i * n + j];
            for k in 0..j {
                acc -= d[i * n + k] * d[j * n + k].conj();
            }
            d[i * n + j] = acc / ljj;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::{pauli_z, ONE};

    fn hermitian_sample(n: usize) -> DenseMatrix {
        let g = DenseMatrix::from_fn(n, n, |i, j| {
            C64::new(
                ((3 * i + 5 * j) as f64 * 0.71).sin(),
                ((i * j + 1) as f64 * 0.43).cos(),
            )
        });
        g.add(&g.dagger()).unwrap()
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, -1.0]);
    }

    #[test]
    fn omega_projector_spectrum() {
        let mut v = DenseMatrix::zeros(4, 1);
        v[(0, 0)] = ONE;
        v[(3, 0)] = ONE;
        let e = hermitian_eig(&DenseMatrix::outer(&v)).unwrap();
        let expected = [2.0, 0.0, 0.0, 0.0];
        for (a, b) in e.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        for n in [1, 2, 5, 16, 33] {
            let h = hermitian_sample(n);
            let e = hermitian_eig(&h).unwrap();
            let err = e.reconstruct().distance(&h).unwrap();
            assert!(
                err <= 1e-10 * h.frobenius_norm().max(1.0),
                "n={n} err={err}"
            );
            let vtv = e.eigenvectors.dagger().matmul(&e.eigenvectors).unwrap();
            assert!(vtv.max_abs_diff(&DenseMatrix::identity(n)).unwrap() < 1e-10);
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let h = hermitian_sample(12);
        let cold = hermitian_eig(&h).unwrap();
        let nudged = h.add(&DenseMatrix::identity(12).scale_real(1e-3)).unwrap();
        let warm = hermitian_eig_with_guess(&nudged, &cold.eigenvectors).unwrap();
        for (a, b) in warm.eigenvalues.iter().zip(&cold.eigenvalues) {
            assert!((a - b - 1e-3).abs() < 1e-10);
        }
        assert!(warm.reconstruct().distance(&nudged).unwrap() < 1e-10);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DenseMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn symmetrizes_tiny_skew() {
        let mut m = pauli_z();
        m[(0, 1)] = C64::new(1e-13, 0.0);
        assert!(hermitian_eig(&m).is_ok());
    }

    #[test]
    fn psd_project_cases() {
        let p = psd_project(&pauli_z()).unwrap();
        assert!(
            p.max_abs_diff(&DenseMatrix::diag_real(&[1.0, 0.0]))
                .unwrap()
                < 1e-15
        );
        let neg = psd_project(&DenseMatrix::identity(3).scale_real(-1.0)).unwrap();
        assert!(neg.frobenius_norm() < 1e-15);
        let g = hermitian_sample(6);
        let psd = g.matmul(&g).unwrap();
        assert!(psd_project(&psd).unwrap().distance(&psd).unwrap() < 1e-10 * psd.frobenius_norm());
    }

    #[test]
    fn inv_sqrt_cases() {
        let r = inv_sqrt_psd(&DenseMatrix::identity(3).scale_real(4.0), 1e-12).unwrap();
        assert!(
            r.max_abs_diff(&DenseMatrix::identity(3).scale_real(0.5))
                .unwrap()
                < 1e-15
        );
        let d = inv_sqrt_psd(&DenseMatrix::diag_real(&[1.0, 4.0]), 1e-12).unwrap();
        assert!(
            d.max_abs_diff(&DenseMatrix::diag_real(&[1.0, 0.5]))
                .unwrap()
                < 1e-15
        );
        let g = hermitian_sample(5);
        let h = g
            .matmul(&g)
            .unwrap()
            .add(&DenseMatrix::identity(5))
            .unwrap();
        let s = inv_sqrt_psd(&h, 1e-12).unwrap();
        let id = s.matmul(&h).unwrap().matmul(&s).unwrap();
        assert!(id.max_abs_diff(&DenseMatrix::identity(5)).unwrap() < 1e-9);
    }

    #[test]
    fn cholesky_psd_check() {
        assert!(is_psd_within(&DenseMatrix::diag_real(&[1.0, 0.0]), 1e-9));
        assert!(!is_psd_within(&DenseMatrix::diag_real(&[1.0, -1e-6]), 1e-9));
        assert!(is_psd_within(&DenseMatrix::diag_real(&[1.0, -1e-12]), 1e-9));
        assert!(!is_psd_within(&pauli_z(), 1e-9));
    }

    #[test]
    fn inv_sqrt_rejects_singular() {
        let h = DenseMatrix::diag_real(&[1.0, 0.0]);
        assert!(matches!(
            inv_sqrt_psd(&h, 1e-12),
            Err(Error::EigenvalueBelowFloor { .. })
        ));
    }
}
