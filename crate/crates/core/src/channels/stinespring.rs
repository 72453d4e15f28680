use crate::error::{mismatch, Result};
use crate::linalg::{partial_trace, DenseMatrix, SubsystemShape};

use super::choi::ChoiMatrix;
use super::kraus::KrausChannel;

/// Isometry A: C^{d_in} → C^{d_out} ⊗ C^{d_anc} with Φ(ρ) = tr_anc(AρA†).
#[derive(Clone, Debug)]
pub struct StinespringIsometry {
    d_in: usize,
    d_out: usize,
    d_anc: usize,
    a: DenseMatrix,
}

impl StinespringIsometry {
    /// A = Σ_k E_k ⊗ |k⟩, one ancilla level per Kraus operator.
    pub fn from_kraus(c: &KrausChannel) -> Self {
        let d_anc = c.len();
        let (d_in, d_out) = (c.d_in(), c.d_out());
        let mut a = DenseMatrix::zeros(d_out * d_anc, d_in);
        for (k, e) in c.ops().iter().enumerate() {
            for i in 0..d_out {
                for j in 0..d_in {
                    a[(i * d_anc + k, j)] = e[(i, j)];
                }
            }
        }
        Self {
            d_in,
            d_out,
            d_anc,
            a,
        }
    }

    /// Minimal dilation: the ancilla dimension equals rank(J).
    pub fn from_choi(j: &ChoiMatrix, rank_tol: f64) -> Result<Self> {
        Ok(Self::from_kraus(&j.to_kraus(rank_tol)?))
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_anc(&self) -> usize {
        self.d_anc
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    /// Largest entrywise deviation of A†A from the identity.
    pub fn isometry_residual(&self) -> f64 {
        self.a
            .dagger()
            .matmul(&self.a)
            .and_then(|ata| ata.max_abs_diff(&DenseMatrix::identity(self.d_in)))
            .unwrap_or(f64::INFINITY)
    }

    pub fn apply(&self, rho: &DenseMatrix) -> Result<DenseMatrix> {
        if rho.rows() != self.d_in || rho.cols() != self.d_in {
            return Err(mismatch(
                "stinespring apply",
                format!("{0}x{0}", self.d_in),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        let dilated = self.a.matmul(rho)?.matmul(&self.a.dagger())?;
        let shape = SubsystemShape::new([self.d_out, self.d_anc])?;
        partial_trace(&dilated, &shape, &[0])
    }
}
