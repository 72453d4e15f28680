//! Quantum channels in Kraus, Choi (Jamiołkowski) and Stinespring form.
//!
//! Choi matrices are ordered (output ⊗ input):
//!
//! ```text
//! J(Φ) = Σ_{a,b} Φ(E_ab) ⊗ E_ab,   Φ(ρ) = tr_in( J(Φ) (1 ⊗ ρᵀ) )
//! ```
//!
//! so complete positivity is `J ⪰ 0` and trace preservation is
//! `tr_out J = 1_in`, a partial trace over the *first* factor.

mod choi;
mod kraus;
mod noise;
mod persist;
mod random;
mod stinespring;

pub use choi::{choi_product, cptp_report, is_cptp, ChoiMatrix, CptpReport, CPTP_TOL, RANK_TOL};
pub use kraus::KrausChannel;
pub use noise::{apply_local_noise, lift_local, noise_kraus, NoiseFamily, NoiseKind};
pub use persist::{read_channel, write_channel, ChannelFile, ChannelMeta};
pub use random::random_choi;
pub use stinespring::StinespringIsometry;

use crate::linalg::DenseMatrix;
use crate::Result;

/// Φ(ρ) = Σ_k E_k ρ E_k†.
pub fn kraus_apply(c: &KrausChannel, rho: &DenseMatrix) -> Result<DenseMatrix> {
    c.apply(rho)
}

pub fn kraus_to_choi(c: &KrausChannel) -> ChoiMatrix {
    c.to_choi()
}

pub fn choi_apply(j: &ChoiMatrix, rho: &DenseMatrix) -> Result<DenseMatrix> {
    j.apply(rho)
}

pub fn choi_to_kraus(j: &ChoiMatrix, rank_tol: f64) -> Result<KrausChannel> {
    j.to_kraus(rank_tol)
}

pub fn kraus_to_stinespring(c: &KrausChannel) -> StinespringIsometry {
    StinespringIsometry::from_kraus(c)
}
