use crate::error::{mismatch, Error, Result};
use crate::linalg::{DenseMatrix, ZERO};

use super::choi::ChoiMatrix;

const TP_TOL: f64 = 1e-9;

/// A channel given by Kraus operators E_k (each d_out × d_in) with
/// Σ E_k†E_k = 1.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    d_in: usize,
    d_out: usize,
    ops: Vec<DenseMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<DenseMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| {
            Error::InvalidArgument("channel needs at least one Kraus operator".into())
        })?;
        let (d_out, d_in) = (first.rows(), first.cols());
        for op in &ops {
            if op.rows() != d_out || op.cols() != d_in {
                return Err(mismatch(
                    "KrausChannel::new",
                    format!("{d_out}x{d_in}"),
                    format!("{}x{}", op.rows(), op.cols()),
                ));
            }
        }
        let channel = Self { d_in, d_out, ops };
        let residual = channel.completeness_residual();
        if residual > TP_TOL {
            return Err(Error::NotCptp {
                min_eig: 0.0,
                tp_residual: residual,
            });
        }
        Ok(channel)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            d_in: d,
            d_out: d,
            ops: vec![DenseMatrix::identity(d)],
        }
    }

    /// Conjugation by a single unitary.
    pub fn unitary(u: DenseMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub(crate) fn from_parts_unchecked(d_out: usize, d_in: usize, ops: Vec<DenseMatrix>) -> Self {
        Self { d_in, d_out, ops }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn ops(&self) -> &[DenseMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Largest entrywise deviation of Σ E_k†E_k from the identity.
    pub fn completeness_residual(&self) -> f64 {
        let mut sum = DenseMatrix::zeros(self.d_in, self.d_in);
        for e in &self.ops {
            let ed = e.dagger();
            sum.axpy(crate::linalg::ONE, &ed.matmul(e).expect("shapes agree"))
                .expect("shapes agree");
        }
        sum.max_abs_diff(&DenseMatrix::identity(self.d_in))
            .expect("square")
    }

    pub fn apply(&self, rho: &DenseMatrix) -> Result<DenseMatrix> {
        if rho.rows() != self.d_in || rho.cols() != self.d_in {
            return Err(mismatch(
                "kraus_apply",
                format!("{0}x{0}", self.d_in),
                format!("{}x{}", rho.rows(), rho.cols()),
            ));
        }
        let mut out = DenseMatrix::zeros(self.d_out, self.d_out);
        for e in &self.ops {
            if e.as_slice().iter().all(|&z| z == ZERO) {
                continue;
            }
            let term = e.matmul(rho)?.matmul(&e.dagger())?;
            out.axpy(crate::linalg::ONE, &term)?;
        }
        Ok(out)
    }

    /// J = Σ_k vec(E_k) vec(E_k)†, where vec takes E[i, a] to index
    /// i·d_in + a. This equals Σ_ab Φ(E_ab) ⊗ E_ab.
    pub fn to_choi(&self) -> ChoiMatrix {
        let n = self.d_out * self.d_in;
        let mut j = DenseMatrix::zeros(n, n);
        for e in &self.ops {
            let v = e.as_slice();
            for r in 0..n {
                if v[r] == ZERO {
                    continue;
                }
                for c in 0..n {
                    j[(r, c)] += v[r] * v[c].conj();
                }
            }
        }
        ChoiMatrix::new_unchecked(self.d_out, self.d_in, j)
    }

    /// Channel acting as `self ⊗ other` on product inputs.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let mut ops = Vec::with_capacity(self.ops.len() * other.ops.len());
        for a in &self.ops {
            for b in &other.ops {
                ops.push(a.kron(b));
            }
        }
        KrausChannel {
            d_in: self.d_in * other.d_in,
            d_out: self.d_out * other.d_out,
            ops,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, C64};

    #[test]
    fn rejects_incomplete_set() {
        let half = DenseMatrix::identity(2).scale_real(0.5);
        assert!(matches!(
            KrausChannel::new(vec![half]),
            Err(Error::NotCptp { .. })
        ));
        assert!(KrausChannel::new(vec![]).is_err());
    }

    #[test]
    fn identity_channel_is_noop() {
        let rho = DenseMatrix::from_fn(3, 3, |i, j| C64::new((i + j) as f64, i as f64 - j as f64));
        let out = KrausChannel::identity(3).apply(&rho).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn apply_checks_dims() {
        let c = KrausChannel::identity(2);
        assert!(c.apply(&DenseMatrix::identity(3)).is_err());
    }

    #[test]
    fn unitary_conjugation() {
        let c = KrausChannel::unitary(pauli_x()).unwrap();
        let rho = DenseMatrix::diag_real(&[1.0, 0.0]);
        assert_eq!(c.apply(&rho).unwrap(), DenseMatrix::diag_real(&[0.0, 1.0]));
    }
}
