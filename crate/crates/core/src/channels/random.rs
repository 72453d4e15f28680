use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{inv_sqrt_psd, partial_trace, DenseMatrix, SubsystemShape, C64};

use super::choi::ChoiMatrix;

const MARGINAL_FLOOR: f64 = 1e-12;
const MAX_ATTEMPTS: usize = 16;

/// Random CPTP Choi matrix: ρ = GG† for a (d_out·d_in)×rank Ginibre matrix
/// G, normalized as (1 ⊗ Q^{-1/2}) ρ (1 ⊗ Q^{-1/2}) with Q = tr_out ρ.
pub fn random_choi<R: Rng + ?Sized>(
    d_out: usize,
    d_in: usize,
    rank: usize,
    rng: &mut R,
) -> Result<ChoiMatrix> {
    let n = d_out * d_in;
    if n == 0 || rank < 1 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside [1, {n}]"
        )));
    }
    // the input marginal has rank at most rank·d_out and must be invertible
    if rank * d_out < d_in {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} cannot reach a trace-preserving {d_in} -> {d_out} channel"
        )));
    }
    let shape = SubsystemShape::new([d_out, d_in])?;
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..MAX_ATTEMPTS {
        let g = DenseMatrix::from_fn(n, rank, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * scale, im * scale)
        });
        let rho = g.matmul(&g.dagger())?;
        let marginal = partial_trace(&rho, &shape, &[1])?;
        let q = match inv_sqrt_psd(&marginal, MARGINAL_FLOOR) {
            Ok(q) => q,
            Err(Error::EigenvalueBelowFloor { .. }) => continue,
            Err(e) => return Err(e),
        };
        let k = DenseMatrix::identity(d_out).kron(&q);
        let j = k.matmul(&rho)?.matmul(&k)?.hermitian_part();
        return Ok(ChoiMatrix::new_unchecked(d_out, d_in, j));
    }
    Err(Error::RandomDrawFailed {
        attempts: MAX_ATTEMPTS,
    })
}
