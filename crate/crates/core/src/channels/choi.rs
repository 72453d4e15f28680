use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::linalg::{
    hermitian_eig, is_psd_within, partial_trace, permute_subsystems, DenseMatrix, SubsystemShape,
    C64, ZERO,
};

use super::kraus::KrausChannel;

/// Tolerance for the Hermitian, PSD and trace-preservation checks made when a
/// Choi matrix is constructed from untrusted data.
pub const CPTP_TOL: f64 = 1e-9;

/// Eigenvalues at or below this are dropped by [`ChoiMatrix::to_kraus`].
pub const RANK_TOL: f64 = 1e-10;

/// Choi matrix of a channel d_in → d_out, ordered (output ⊗ input).
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    j: DenseMatrix,
}

/// Residuals of the complete-positivity and trace-preservation conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    /// Frobenius norm of the anti-Hermitian part.
    pub hermitian_residual: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eig: f64,
    /// ‖tr_out J − 1‖_F.
    pub tp_residual: f64,
}

impl CptpReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.hermitian_residual <= tol && self.min_eig >= -tol && self.tp_residual <= tol
    }
}

fn check_dims(d_out: usize, d_in: usize, j: &DenseMatrix) -> Result<()> {
    let n = d_out * d_in;
    if d_out == 0 || d_in == 0 || j.rows() != n || j.cols() != n {
        return Err(mismatch(
            "choi matrix",
            format!("{n}x{n}"),
            format!("{}x{}", j.rows(), j.cols()),
        ));
    }
    Ok(())
}

fn tp_residual(d_out: usize, d_in: usize, j: &DenseMatrix) -> Result<f64> {
    let shape = SubsystemShape::new([d_out, d_in])?;
    let marginal = partial_trace(j, &shape, &[1])?;
    marginal.distance(&DenseMatrix::identity(d_in))
}

/// Full residual report (uses an eigendecomposition for λ_min).
pub fn cptp_report(j: &DenseMatrix, d_out: usize, d_in: usize) -> Result<CptpReport> {
    check_dims(d_out, d_in, j)?;
    let hermitian_residual = j.hermitian_residual();
    let min_eig = hermitian_eig(&j.hermitian_part())?.min_eigenvalue();
    Ok(CptpReport {
        hermitian_residual,
        min_eig,
        tp_residual: tp_residual(d_out, d_in, j)?,
    })
}

/// Whether `j` is the Choi matrix of a CPTP map within `tol`, with residuals.
pub fn is_cptp(j: &DenseMatrix, d_out: usize, d_in: usize, tol: f64) -> Result<(bool, CptpReport)> {
    let report = cptp_report(j, d_out, d_in)?;
    Ok((report.passes(tol), report))
}

impl ChoiMatrix {
    /// Validates at [`CPTP_TOL`].
    pub fn new(d_out: usize, d_in: usize, j: DenseMatrix) -> Result<Self> {
        Self::with_tolerance(d_out, d_in, j, CPTP_TOL)
    }

    /// Validates Hermiticity, positivity and trace preservation at `tol`.
    /// The matrix is stored unmodified.
    pub fn with_tolerance(d_out: usize, d_in: usize, j: DenseMatrix, tol: f64) -> Result<Self> {
        check_dims(d_out, d_in, &j)?;
        let residual = j.hermitian_residual();
        if residual > tol {
            return Err(Error::NotHermitian { residual });
        }
        let tp = tp_residual(d_out, d_in, &j)?;
        if tp > tol || !is_psd_within(&j, tol) {
            let min_eig = hermitian_eig(&j.hermitian_part())?.min_eigenvalue();
            return Err(Error::NotCptp {
                min_eig,
                tp_residual: tp,
            });
        }
        Ok(Self { d_in, d_out, j })
    }

    pub(crate) fn new_unchecked(d_out: usize, d_in: usize, j: DenseMatrix) -> Self {
        debug_assert_eq!(j.rows(), d_out * d_in);
        Self { d_in, d_out, j }
    }

    /// Choi matrix of the identity channel on dimension d: |Ω⟩⟨Ω| with
    /// Ω = Σ_i |i⟩|i⟩.
    pub fn identity(d: usize) -> Self {
        KrausChannel::identity(d).to_choi()
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.j
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.j
    }

    pub fn report(&self) -> Result<CptpReport> {
        cptp_report(&self.j, self.d_out, self.d_in)
    }

    /// Cheap check (Cholesky-based positivity) used at API boundaries.
    pub fn check(&self, tol: f64) -> Result<()> {
        let tp = tp_residual(self.d_out, self.d_in, &self.j)?;
        let herm = self.j.hermitian_residual();
        if tp > tol || herm > tol || !is_psd_within(&self.j, tol) {
            let min_eig = hermitian_eig(&self.j.hermitian_part())?.min_eigenvalue();
            return Err(Error::NotCptp {
                min_eig,
                tp_residual: tp,
            });
        }
        Ok(())
    }

    /// Φ(ρ) = tr_in(J (1 ⊗ ρᵀ)), i.e. Φ(ρ)_ij = Σ_ab J[(i,a),(j,b)] ρ_ab.
    pub fn apply(&self, rho: &DenseMatrix) -> Result<DenseMatrix> {
        let (d_out, d_in) = (self.d_out, self.d_in);
        if rho.rows() != d_in || rho.cols() != d_in {
            return Err(mismatch(
                "choi_apply",
                format!("{d_in}x{d_in}"),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        let n = d_out * d_in;
        let jd = self.j.as_slice();
        let rd = rho.as_slice();
        let mut out = DenseMatrix::zeros(d_out, d_out);
        for i in 0..d_out {
            for jj in 0..d_out {
                let mut acc = ZERO;
                for a in 0..d_in {
                    let row = (i * d_in + a) * n + jj * d_in;
                    let jrow = &jd[row..row + d_in];
                    let rrow = &rd[a * d_in..(a + 1) * d_in];
                    for (x, y) in jrow.iter().zip(rrow) {
                        acc += x * y;
                    }
                }
                out[(i, jj)] = acc;
            }
        }
        Ok(out)
    }

    /// Kraus operators √λ·unvec(v) for eigenpairs with λ > `rank_tol`.
    pub fn to_kraus(&self, rank_tol: f64) -> Result<KrausChannel> {
        let eig = hermitian_eig(&self.j.hermitian_part())?;
        let min = eig.min_eigenvalue();
        if min < -rank_tol {
            return Err(Error::NotCptp {
                min_eig: min,
                tp_residual: tp_residual(self.d_out, self.d_in, &self.j)?,
            });
        }
        let ops: Vec<DenseMatrix> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > rank_tol)
            .map(|(k, &l)| {
                let w = C64::new(l.sqrt(), 0.0);
                DenseMatrix::from_fn(self.d_out, self.d_in, |i, a| {
                    eig.eigenvectors[(i * self.d_in + a, k)] * w
                })
            })
            .collect();
        if ops.is_empty() {
            return Err(Error::InvalidArgument(
                "Choi matrix has no eigenvalue above rank tolerance".into(),
            ));
        }
        Ok(KrausChannel::from_parts_unchecked(
            self.d_out, self.d_in, ops,
        ))
    }

    /// Number of eigenvalues above `rank_tol`.
    pub fn rank(&self, rank_tol: f64) -> Result<usize> {
        Ok(hermitian_eig(&self.j.hermitian_part())?
            .eigenvalues
            .iter()
            .filter(|&&l| l > rank_tol)
            .count())
    }
}

/// Choi matrix of the product channel Y ⊗ Z, as W(Y ⊗ Z)W with W exchanging
/// the Y-input and Z-output factors of (out_Y, in_Y, out_Z, in_Z). The result
/// is ordered (out_Y, out_Z) ⊗ (in_Y, in_Z).
pub fn choi_product(y: &ChoiMatrix, z: &ChoiMatrix) -> ChoiMatrix {
    let shape = SubsystemShape::new([y.d_out, y.d_in, z.d_out, z.d_in]).expect("nonzero dims");
    let t = permute_subsystems(&y.j.kron(&z.j), &shape, &[0, 2, 1, 3]).expect("shape matches");
    ChoiMatrix::new_unchecked(y.d_out * z.d_out, y.d_in * z.d_in, t)
}
